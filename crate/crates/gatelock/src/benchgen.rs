//! Deterministic circuit generators.
//!
//! These serve three purposes: tiny fixtures for unit tests, random netlists
//! for oracle-based matcher tests, and benchmark-class stand-ins that mirror
//! the size, interface and structural character of the published ISCAS'85
//! circuits for environments where the original `.bench` files are not
//! available. Stand-ins are honest substitutes, not bit-for-bit copies; see
//! the README for fetching the originals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::netlist::{GateId, GateKind, Netlist};
use crate::pattern::{Pattern, PatternInput};

/// Half-adder shape: XOR and AND over the same two free inputs. The XOR is
/// the root; the AND is a satellite output connected through the shared
/// leaves.
pub fn half_adder_pattern() -> Pattern {
    let mut p = Pattern::empty();
    let a = p.new_leaf();
    let b = p.new_leaf();
    let sum = p.add_node(GateKind::Xor, vec![PatternInput::Free(a), PatternInput::Free(b)]);
    let carry = p.add_node(GateKind::And, vec![PatternInput::Free(a), PatternInput::Free(b)]);
    p.set_root(sum);
    p.add_satellite_output(carry);
    p
}

/// Ripple-carry adder over `bits` built from two half adders plus a carry
/// OR per stage, with an explicit carry-in. A 4-bit instance contains
/// exactly eight half adders.
pub fn ripple_carry_adder(bits: usize) -> Netlist {
    let mut n = Netlist::new();
    let a: Vec<GateId> = (0..bits).map(|i| n.add_input(&format!("a{i}")).unwrap()).collect();
    let b: Vec<GateId> = (0..bits).map(|i| n.add_input(&format!("b{i}")).unwrap()).collect();
    let mut carry = n.add_input("cin").unwrap();
    for i in 0..bits {
        let s1 = n.add_gate(&format!("s1_{i}"), GateKind::Xor, vec![a[i], b[i]]).unwrap();
        let c1 = n.add_gate(&format!("c1_{i}"), GateKind::And, vec![a[i], b[i]]).unwrap();
        let s2 = n.add_gate(&format!("sum{i}"), GateKind::Xor, vec![s1, carry]).unwrap();
        let c2 = n.add_gate(&format!("c2_{i}"), GateKind::And, vec![s1, carry]).unwrap();
        carry = n.add_gate(&format!("cout{i}"), GateKind::Or, vec![c1, c2]).unwrap();
        n.mark_output(s2);
    }
    n.mark_output(carry);
    n
}

/// Schoolbook array multiplier in NOR/NOT logic, the realization style of
/// the c6288 multiplier: shared input inverters, NOR partial products, and
/// 240 NOR-based adder cells at width 16 over 32 inputs and 32 outputs.
pub fn array_multiplier(width: usize) -> Netlist {
    let mut n = Netlist::new();
    let a: Vec<GateId> = (0..width).map(|i| n.add_input(&format!("a{i}")).unwrap()).collect();
    let b: Vec<GateId> = (0..width).map(|i| n.add_input(&format!("b{i}")).unwrap()).collect();
    let ia: Vec<GateId> = (0..width)
        .map(|i| n.add_gate(&format!("ia{i}"), GateKind::Not, vec![a[i]]).unwrap())
        .collect();
    let ib: Vec<GateId> = (0..width)
        .map(|j| n.add_gate(&format!("ib{j}"), GateKind::Not, vec![b[j]]).unwrap())
        .collect();
    // partial products a_i AND b_j as NOR(!a, !b)
    let pp = |n: &mut Netlist, i: usize, j: usize, ia: &[GateId], ib: &[GateId]| {
        n.add_gate(&format!("pp_{i}_{j}"), GateKind::Nor, vec![ia[i], ib[j]]).unwrap()
    };

    // NOR/NOT half adder: sum = NOR(NOR(x,y), carry), carry = NOR(!x, !y)
    let ha = |n: &mut Netlist, tag: String, x: GateId, y: GateId| {
        let nx = n.add_gate(&format!("hnx_{tag}"), GateKind::Not, vec![x]).unwrap();
        let ny = n.add_gate(&format!("hny_{tag}"), GateKind::Not, vec![y]).unwrap();
        let c = n.add_gate(&format!("hac_{tag}"), GateKind::Nor, vec![nx, ny]).unwrap();
        let o = n.add_gate(&format!("hor_{tag}"), GateKind::Nor, vec![x, y]).unwrap();
        let s = n.add_gate(&format!("has_{tag}"), GateKind::Nor, vec![o, c]).unwrap();
        (s, c)
    };
    // full adder from two half adders; carry out = NOT(NOR(c1, c2))
    let fa = |n: &mut Netlist, tag: String, x: GateId, y: GateId, z: GateId| {
        let (s1, c1) = ha(n, format!("fa{tag}_p"), x, y);
        let (s, c2) = ha(n, format!("fa{tag}_q"), s1, z);
        let nc = n.add_gate(&format!("fnc_{tag}"), GateKind::Nor, vec![c1, c2]).unwrap();
        let c = n.add_gate(&format!("fac_{tag}"), GateKind::Not, vec![nc]).unwrap();
        (s, c)
    };

    let mut acc: Vec<GateId> = (0..width).map(|i| pp(&mut n, i, 0, &ia, &ib)).collect();
    let mut outs = vec![acc[0]];
    let mut row_carry: Option<GateId> = None;
    for j in 1..width {
        let mut next = Vec::with_capacity(width);
        let mut carry: Option<GateId> = None;
        for i in 0..width {
            let p = pp(&mut n, i, j, &ia, &ib);
            let other = if i + 1 < width {
                Some(acc[i + 1])
            } else {
                row_carry
            };
            let (s, c) = match (other, carry) {
                (Some(o), Some(cin)) => fa(&mut n, format!("{j}_{i}"), o, p, cin),
                (Some(o), None) => ha(&mut n, format!("{j}_{i}"), o, p),
                (None, Some(cin)) => ha(&mut n, format!("{j}_{i}"), p, cin),
                (None, None) => {
                    next.push(p);
                    continue;
                }
            };
            carry = Some(c);
            next.push(s);
        }
        row_carry = carry;
        outs.push(next[0]);
        acc = next;
    }
    for &s in acc.iter().skip(1) {
        outs.push(s);
    }
    if let Some(c) = row_carry {
        outs.push(c);
    }
    for &o in &outs {
        n.mark_output(o);
    }
    n
}

/// Interface and mix profile for a block-structured stand-in circuit.
#[derive(Debug, Clone)]
pub struct CircuitProfile {
    pub gates: usize,
    pub inputs: usize,
    pub outputs: usize,
    /// Percent of gates spent on irregular glue logic rather than repeated
    /// function blocks.
    pub glue_percent: u32,
    /// Bias the block mix towards XOR/NAND tree cells.
    pub xor_heavy: bool,
}

/// Block-structured random circuit: repeated small function blocks in the
/// NAND-era library style of the ISCAS'85 circuits (four-NAND exclusive-or
/// cells, NAND muxes, and-or-invert cells, adder slices) stitched together
/// with irregular glue gates.
pub fn block_circuit(profile: &CircuitProfile, seed: u64) -> Netlist {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x626c6f636b);
    let mut n = Netlist::new();
    let mut pool: Vec<GateId> = (0..profile.inputs)
        .map(|i| n.add_input(&format!("i{i}")).unwrap())
        .collect();
    let mut k = 0usize;
    let fresh = |n: &mut Netlist, k: &mut usize, kind: GateKind, inputs: Vec<GateId>| {
        let id = n.add_gate(&format!("g{}", *k), kind, inputs).unwrap();
        *k += 1;
        id
    };
    let pick = |pool: &[GateId], rng: &mut ChaCha20Rng| pool[rng.gen_range(0..pool.len())];
    let pick2 = |pool: &[GateId], rng: &mut ChaCha20Rng| {
        let x = pool[rng.gen_range(0..pool.len())];
        loop {
            let y = pool[rng.gen_range(0..pool.len())];
            if y != x || pool.len() < 2 {
                return (x, y);
            }
        }
    };
    // four-NAND exclusive-or, the workhorse cell
    let nand_xor = |n: &mut Netlist, k: &mut usize, x: GateId, y: GateId| {
        let t = n.add_gate(&format!("g{}", *k), GateKind::Nand, vec![x, y]).unwrap();
        *k += 1;
        let u = n.add_gate(&format!("g{}", *k), GateKind::Nand, vec![x, t]).unwrap();
        *k += 1;
        let v = n.add_gate(&format!("g{}", *k), GateKind::Nand, vec![y, t]).unwrap();
        *k += 1;
        let w = n.add_gate(&format!("g{}", *k), GateKind::Nand, vec![u, v]).unwrap();
        *k += 1;
        (w, t)
    };

    while n.num_logic_gates() < profile.gates {
        let glue = rng.gen_range(0..100) < profile.glue_percent;
        if glue {
            let kind = match rng.gen_range(0..20) {
                0..=6 => GateKind::Nand,
                7..=9 => GateKind::Nor,
                10..=12 => GateKind::And,
                13..=14 => GateKind::Or,
                15..=17 => GateKind::Not,
                18 => GateKind::Xor,
                _ => GateKind::Xnor,
            };
            let arity = if matches!(kind, GateKind::Not) {
                1
            } else if rng.gen_range(0..4) == 0 {
                3
            } else {
                2
            };
            let mut inputs = Vec::with_capacity(arity);
            while inputs.len() < arity {
                let s = pick(&pool, &mut rng);
                if !inputs.contains(&s) || pool.len() < arity {
                    inputs.push(s);
                }
            }
            let g = fresh(&mut n, &mut k, kind, inputs);
            pool.push(g);
            continue;
        }
        let block = if profile.xor_heavy {
            match rng.gen_range(0..10) {
                0..=5 => 0,
                6..=8 => 1,
                _ => 3,
            }
        } else {
            rng.gen_range(0..5)
        };
        match block {
            0 => {
                // exclusive-or tree cell
                let (x, y) = pick2(&pool, &mut rng);
                let (w, _) = nand_xor(&mut n, &mut k, x, y);
                pool.push(w);
            }
            1 => {
                // adder slice: two xor cells plus a NAND carry
                let (x, y) = pick2(&pool, &mut rng);
                let z = pick(&pool, &mut rng);
                let (s1, t1) = nand_xor(&mut n, &mut k, x, y);
                let (s2, t2) = nand_xor(&mut n, &mut k, s1, z);
                let c = fresh(&mut n, &mut k, GateKind::Nand, vec![t1, t2]);
                pool.push(s2);
                pool.push(c);
            }
            2 => {
                // NAND mux
                let sel = pick(&pool, &mut rng);
                let (x, y) = pick2(&pool, &mut rng);
                let ns = fresh(&mut n, &mut k, GateKind::Not, vec![sel]);
                let t0 = fresh(&mut n, &mut k, GateKind::Nand, vec![x, ns]);
                let t1 = fresh(&mut n, &mut k, GateKind::Nand, vec![y, sel]);
                let m = fresh(&mut n, &mut k, GateKind::Nand, vec![t0, t1]);
                pool.push(m);
            }
            3 => {
                // and-or-invert cell
                let (x, y) = pick2(&pool, &mut rng);
                let (u, v) = pick2(&pool, &mut rng);
                let t0 = fresh(&mut n, &mut k, GateKind::And, vec![x, y]);
                let t1 = fresh(&mut n, &mut k, GateKind::And, vec![u, v]);
                let o = fresh(&mut n, &mut k, GateKind::Nor, vec![t0, t1]);
                pool.push(o);
            }
            _ => {
                // decoder pair
                let (x, y) = pick2(&pool, &mut rng);
                let nx = fresh(&mut n, &mut k, GateKind::Not, vec![x]);
                let ny = fresh(&mut n, &mut k, GateKind::Not, vec![y]);
                let d0 = fresh(&mut n, &mut k, GateKind::Nor, vec![x, y]);
                let d1 = fresh(&mut n, &mut k, GateKind::Nand, vec![nx, ny]);
                pool.push(d0);
                pool.push(d1);
            }
        }
    }

    // outputs: all sinks, then random signals up to the requested count
    let sinks: Vec<GateId> = n
        .ids()
        .filter(|&id| n.gate(id).fanouts.is_empty() && n.gate(id).kind != GateKind::Input)
        .collect();
    for s in &sinks {
        n.mark_output(*s);
    }
    let mut extra = 0;
    while n.primary_outputs().len() < profile.outputs && extra < profile.outputs * 4 {
        let s = pick(&pool, &mut rng);
        if n.gate(s).kind != GateKind::Input {
            n.mark_output(s);
        }
        extra += 1;
    }
    n
}

/// Uniform random DAG netlist for oracle-based tests; no deliberate
/// repeated structure.
pub fn random_netlist(num_gates: usize, num_inputs: usize, seed: u64) -> Netlist {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x72616e64);
    let mut n = Netlist::new();
    let mut pool: Vec<GateId> = (0..num_inputs)
        .map(|i| n.add_input(&format!("i{i}")).unwrap())
        .collect();
    for k in 0..num_gates {
        let kind = match rng.gen_range(0..9) {
            0 => GateKind::And,
            1 => GateKind::Nand,
            2 => GateKind::Or,
            3 => GateKind::Nor,
            4 => GateKind::Xor,
            5 => GateKind::Xnor,
            6 => GateKind::Not,
            7 => GateKind::Buf,
            _ => GateKind::And,
        };
        let arity = match kind {
            GateKind::Not | GateKind::Buf => 1,
            _ => {
                if rng.gen_range(0..5) == 0 {
                    3
                } else {
                    2
                }
            }
        };
        let mut inputs = Vec::with_capacity(arity);
        for _ in 0..arity {
            inputs.push(pool[rng.gen_range(0..pool.len())]);
        }
        let g = n.add_gate(&format!("g{k}"), kind, inputs).unwrap();
        pool.push(g);
    }
    let sinks: Vec<GateId> = n
        .ids()
        .filter(|&id| n.gate(id).fanouts.is_empty() && n.gate(id).kind != GateKind::Input)
        .collect();
    for s in sinks {
        n.mark_output(s);
    }
    if n.primary_outputs().is_empty() {
        if let Some(last) = n.ids().last() {
            n.mark_output(last);
        }
    }
    n
}

/// Deterministic stand-in for a named ISCAS'85 benchmark: matched gate
/// count, interface width and structural texture, fixed seed per name.
/// Returns `None` for names without a profile.
pub fn standin(name: &str) -> Option<Netlist> {
    let profile = |gates, inputs, outputs, glue_percent, xor_heavy| CircuitProfile {
        gates,
        inputs,
        outputs,
        glue_percent,
        xor_heavy,
    };
    match name {
        "c6288" => Some(array_multiplier(16)),
        "c880" => Some(block_circuit(&profile(404, 60, 26, 35, false), 880)),
        "c1355" => Some(block_circuit(&profile(546, 41, 32, 15, true), 1355)),
        "c1908" => Some(block_circuit(&profile(880, 33, 25, 35, true), 1908)),
        "c2670" => Some(block_circuit(&profile(1193, 157, 64, 40, false), 2670)),
        "c3540" => Some(block_circuit(&profile(1669, 50, 22, 35, false), 3540)),
        "c5315" => Some(block_circuit(&profile(2307, 178, 123, 30, false), 5315)),
        "c7552" => Some(block_circuit(&profile(3512, 207, 108, 35, false), 7552)),
        _ => None,
    }
}
