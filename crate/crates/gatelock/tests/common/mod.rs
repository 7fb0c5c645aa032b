//! Helpers shared by the integration and acceptance suites: benchmark
//! loading with stand-in fallback, and the brute-force matching oracle.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use gatelock::netlist::{GateId, Netlist};
use gatelock::pattern::{Pattern, PatternInput};

/// Load a named benchmark: a real `.bench` file from `benchmarks/` (or
/// `$GATELOCK_BENCH_DIR`) when present, otherwise the generated stand-in.
/// Returns the netlist and which source was used.
pub fn benchmark(name: &str) -> (Netlist, &'static str) {
    let dir = std::env::var("GATELOCK_BENCH_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("../..")
                .join("benchmarks")
        });
    let path = dir.join(format!("{name}.bench"));
    if path.is_file() {
        match gatelock::bench::parse_bench_file(&path) {
            Ok(n) => return (n, "distributed file"),
            Err(e) => panic!("failed to parse {}: {e}", path.display()),
        }
    }
    let n = gatelock::benchgen::standin(name)
        .unwrap_or_else(|| panic!("no benchmark or stand-in named `{name}`"));
    (n, "generated stand-in")
}

/// Brute-force matching oracle, independent of the production search: it
/// enumerates every type-preserving assignment of pattern nodes to gates
/// (all port permutations, breadth-first over whole mapping states) and
/// validates each completed mapping post hoc. The matcher's first-success
/// backtracking never has to agree with this by construction, only by
/// correctness.
pub fn oracle_matches(n: &Netlist, p: &Pattern) -> Vec<GateId> {
    let mut result = Vec::new();
    let root_kind = p.node(p.root()).kind;
    for root in n.ids() {
        if n.gate(root).kind != root_kind {
            continue;
        }
        let states = place_all(
            n,
            p,
            p.root(),
            root,
            Maps {
                nodes: HashMap::new(),
                leaves: HashMap::new(),
            },
        );
        let mut states = states;
        for &sat in p.satellites() {
            let mut next = Vec::new();
            for st in states {
                for g in n.ids() {
                    next.extend(place_all(n, p, sat, g, st.clone()));
                }
            }
            states = next;
        }
        if states
            .iter()
            .any(|st| validate(n, p, &st.nodes, &st.leaves))
        {
            result.push(root);
        }
    }
    result.sort_unstable();
    result.dedup();
    result
}

#[derive(Clone)]
struct Maps {
    nodes: HashMap<u32, GateId>,
    leaves: HashMap<u32, GateId>,
}

/// All mapping states extending `maps` with `node -> g`, over every port
/// permutation.
fn place_all(
    n: &Netlist,
    p: &Pattern,
    node: gatelock::pattern::NodeId,
    g: GateId,
    maps: Maps,
) -> Vec<Maps> {
    if let Some(&bound) = maps.nodes.get(&node.0) {
        return if bound == g { vec![maps] } else { Vec::new() };
    }
    let want = p.node(node);
    let gate = n.gate(g);
    if want.kind != gate.kind
        || want.inputs.len() != gate.inputs.len()
        || n.in_lock_perimeter(g)
    {
        return Vec::new();
    }
    let mut start = maps;
    start.nodes.insert(node.0, g);
    let k = want.inputs.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        let mut states = vec![start.clone()];
        for (i, &j) in perm.iter().enumerate() {
            let signal = gate.inputs[j];
            let mut next = Vec::new();
            for st in states {
                match want.inputs[i] {
                    PatternInput::Free(l) => {
                        if let Some(&bound) = st.leaves.get(&l.0) {
                            if bound == signal {
                                next.push(st);
                            }
                        } else {
                            let mut st = st;
                            st.leaves.insert(l.0, signal);
                            next.push(st);
                        }
                    }
                    PatternInput::Node(q) => {
                        next.extend(place_all(n, p, q, signal, st));
                    }
                }
            }
            states = next;
            if states.is_empty() {
                break;
            }
        }
        out.extend(states);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let len = perm.len();
    if len < 2 {
        return false;
    }
    let mut i = len - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = len - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Full post-hoc validation of a completed mapping.
fn validate(
    n: &Netlist,
    p: &Pattern,
    node_map: &HashMap<u32, GateId>,
    leaf_map: &HashMap<u32, GateId>,
) -> bool {
    for node in p.topo_from_root() {
        let Some(&g) = node_map.get(&node.0) else {
            return false;
        };
        let want = p.node(node);
        let gate = n.gate(g);
        if want.kind != gate.kind
            || want.inputs.len() != gate.inputs.len()
            || n.in_lock_perimeter(g)
        {
            return false;
        }
        // a bijection of pattern inputs to ports must exist under the
        // recorded bindings, with distinct pattern inputs on distinct
        // signals
        let bound: Vec<Option<GateId>> = want
            .inputs
            .iter()
            .map(|i| match i {
                PatternInput::Node(q) => node_map.get(&q.0).copied(),
                PatternInput::Free(l) => leaf_map.get(&l.0).copied(),
            })
            .collect();
        if bound.iter().any(|b| b.is_none()) {
            return false;
        }
        for (a, ia) in want.inputs.iter().enumerate() {
            for (b, ib) in want.inputs.iter().enumerate() {
                if a < b {
                    let same_input = ia == ib;
                    let same_signal = bound[a] == bound[b];
                    if same_input != same_signal {
                        return false;
                    }
                }
            }
        }
        if !bijection_exists(&bound, &gate.inputs) {
            return false;
        }
    }
    true
}

fn bijection_exists(want: &[Option<GateId>], ports: &[GateId]) -> bool {
    let k = want.len();
    let mut used = vec![false; k];
    fn rec(i: usize, want: &[Option<GateId>], ports: &[GateId], used: &mut [bool]) -> bool {
        if i == want.len() {
            return true;
        }
        for j in 0..ports.len() {
            if !used[j] && Some(ports[j]) == want[i] {
                used[j] = true;
                if rec(i + 1, want, ports, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    rec(0, want, ports, &mut used)
}
