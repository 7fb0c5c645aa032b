//! Structural search vs the brute-force oracle on random circuits.

mod common;

use std::collections::HashSet;

use gatelock::benchgen::{half_adder_pattern, random_netlist, ripple_carry_adder};
use gatelock::matcher::{find_embedding, fs, verify_embedding};
use gatelock::pattern::fanin_cone;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[test]
fn search_equals_oracle_on_random_netlists() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x6f7261636c65);
    let mut trials = 0;
    while trials < 40 {
        let gates = rng.gen_range(30..160);
        let inputs = rng.gen_range(4..10);
        let n = random_netlist(gates, inputs, rng.gen());
        let logic: Vec<_> = n
            .ids()
            .filter(|&id| n.gate(id).kind.is_logic())
            .collect();
        let root = logic[rng.gen_range(0..logic.len())];
        let layers = rng.gen_range(1..=3);
        let cone = fanin_cone(&n, root, layers);
        if cone.pattern.num_nodes() > 6 {
            continue;
        }
        trials += 1;
        let got = fs(&n, &cone.pattern, &HashSet::new()).matched_roots;
        let want = common::oracle_matches(&n, &cone.pattern);
        assert_eq!(got, want, "trial {trials} diverged from the oracle");
        assert!(got.contains(&root), "origin must match itself");
    }
}

#[test]
fn multi_output_patterns_agree_with_oracle() {
    let n = ripple_carry_adder(4);
    let pat = half_adder_pattern();
    let got = fs(&n, &pat, &HashSet::new()).matched_roots;
    let want = common::oracle_matches(&n, &pat);
    assert_eq!(got, want);
    assert_eq!(got.len(), 8);
}

#[test]
fn reported_matches_carry_verifiable_embeddings() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for _ in 0..10 {
        let n = random_netlist(80, 6, rng.gen());
        let logic: Vec<_> = n
            .ids()
            .filter(|&id| n.gate(id).kind.is_logic())
            .collect();
        let root = logic[rng.gen_range(0..logic.len())];
        let cone = fanin_cone(&n, root, 2);
        for m in fs(&n, &cone.pattern, &HashSet::new()).matched_roots {
            let emb = find_embedding(&n, &cone.pattern, m).expect("match must embed");
            assert!(verify_embedding(&n, &cone.pattern, &emb));
        }
    }
}
