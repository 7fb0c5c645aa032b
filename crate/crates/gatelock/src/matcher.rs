//! Structural search for a rooted pattern inside a netlist.
//!
//! Candidates come from the gate-type index: every gate of the root's kind
//! is tried as an anchor, then a backtracking DFS embeds the pattern into
//! its fan-in cone. An embedding maps pattern nodes to gates of the same
//! kind and arity, assigning pattern inputs to gate input ports bijectively.
//! Distinct pattern inputs of one node must bind distinct signals; a free
//! leaf binds one signal consistently across the whole embedding. Interior
//! fanout is unconstrained: a matched gate may drive logic outside the
//! pattern.
//!
//! Key gates of the target netlist never match a pattern node, and neither
//! do the gates directly wired to one: locking flips the types of drivers
//! and successors around a key gate, so the whole (attacker-visible)
//! perimeter is unreliable as evidence of original logic. A free leaf may
//! still bind any signal, including a key gate's output.

use std::collections::HashSet;

use crate::netlist::{GateId, Netlist};
use crate::pattern::{Cone, LeafId, NodeId, Pattern, PatternInput};

/// Roots at which the pattern embeds, sorted by id.
#[derive(Debug, Clone, Default)]
pub struct MatchResult {
    pub matched_roots: Vec<GateId>,
}

impl MatchResult {
    pub fn len(&self) -> usize {
        self.matched_roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matched_roots.is_empty()
    }
}

/// A concrete witness for one match, checkable node by node.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub node_to_gate: Vec<GateId>,
    pub leaf_to_signal: Vec<Option<GateId>>,
}

/// Find every gate the pattern embeds at, excluding `exclude` (self-match
/// suppression for searches seeded from an extracted cone).
pub fn fs(n: &Netlist, pattern: &Pattern, exclude: &HashSet<GateId>) -> MatchResult {
    assert!(
        pattern.key_slots().is_empty(),
        "patterns must be rewritten key-free before searching"
    );
    let root_kind = pattern.node(pattern.root()).kind;
    let mut matched_roots = Vec::new();
    let mut search = Search::new(n, pattern);
    for &g in n.gates_of_kind(root_kind) {
        if exclude.contains(&g) || n.in_lock_perimeter(g) {
            continue;
        }
        if search.matches_at(g) {
            matched_roots.push(g);
        }
    }
    matched_roots.sort_unstable();
    MatchResult { matched_roots }
}

/// One concrete embedding anchored at `root`, if any.
pub fn find_embedding(n: &Netlist, pattern: &Pattern, root: GateId) -> Option<Embedding> {
    if n.in_lock_perimeter(root) {
        return None;
    }
    let mut search = Search::new(n, pattern);
    if search.matches_at(root) {
        Some(Embedding {
            node_to_gate: search
                .node_bind
                .iter()
                .map(|b| b.expect("complete embedding binds every node"))
                .collect(),
            leaf_to_signal: search.leaf_bind.clone(),
        })
    } else {
        None
    }
}

/// Number of instances of an extracted cone in its own netlist; the origin
/// always matches itself, so the result is at least 1 when the origin root
/// is not excluded.
pub fn count_occurrences(n: &Netlist, cone: &Cone) -> usize {
    fs(n, &cone.pattern, &HashSet::new()).len()
}

enum Bind {
    Node(NodeId),
    Leaf(LeafId),
}

struct Search<'a> {
    n: &'a Netlist,
    p: &'a Pattern,
    node_bind: Vec<Option<GateId>>,
    leaf_bind: Vec<Option<GateId>>,
    trail: Vec<Bind>,
}

impl<'a> Search<'a> {
    fn new(n: &'a Netlist, p: &'a Pattern) -> Search<'a> {
        Search {
            n,
            p,
            node_bind: vec![None; p.num_nodes()],
            leaf_bind: vec![None; p.num_leaves()],
            trail: Vec::new(),
        }
    }

    fn matches_at(&mut self, g: GateId) -> bool {
        self.node_bind.fill(None);
        self.leaf_bind.fill(None);
        self.trail.clear();
        let root = self.p.root();
        try_node(self, root, g, &mut |s| match_satellites(s, 0))
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail underflow") {
                Bind::Node(pn) => self.node_bind[pn.index()] = None,
                Bind::Leaf(l) => self.leaf_bind[l.index()] = None,
            }
        }
    }
}

/// The continuation runs on every complete, consistent embedding of the
/// subtree; returning `true` stops the enumeration. Failed branches unwind
/// their bindings, so a later sibling constraint can force a different
/// internal port permutation here (first-success commitment would miss
/// matches whose subtrees share leaves).
fn try_node(
    s: &mut Search,
    pn: NodeId,
    g: GateId,
    k: &mut dyn FnMut(&mut Search) -> bool,
) -> bool {
    if let Some(bound) = s.node_bind[pn.index()] {
        return bound == g && k(s);
    }
    let node = s.p.node(pn);
    let gate = s.n.gate(g);
    if node.kind != gate.kind
        || node.inputs.len() != gate.inputs.len()
        || s.n.in_lock_perimeter(g)
    {
        return false;
    }
    let mark = s.trail.len();
    s.node_bind[pn.index()] = Some(g);
    s.trail.push(Bind::Node(pn));
    let ok = assign_ports(s, pn, g, 0, 0, &[], k);
    if !ok {
        s.undo_to(mark);
    }
    ok
}

/// Assign pattern input `i` of node `pn` to one of the unused input ports
/// of gate `g`, enumerating all bijections. All gate kinds here are
/// commutative, so port order is free. Equal pattern inputs need equal
/// signals, distinct ones distinct signals (per-node injectivity).
fn assign_ports(
    s: &mut Search,
    pn: NodeId,
    g: GateId,
    i: usize,
    used: u64,
    chosen: &[GateId],
    k: &mut dyn FnMut(&mut Search) -> bool,
) -> bool {
    let arity = s.p.node(pn).inputs.len();
    if i == arity {
        return k(s);
    }
    let pi = s.p.node(pn).inputs[i];
    for j in 0..arity {
        if used & (1 << j) != 0 {
            continue;
        }
        let signal = s.n.gate(g).inputs[j];
        let consistent = (0..i).all(|e| {
            if s.p.node(pn).inputs[e] == pi {
                chosen[e] == signal
            } else {
                chosen[e] != signal
            }
        });
        if !consistent {
            continue;
        }
        let mut chosen_next = chosen.to_vec();
        chosen_next.push(signal);
        let mark = s.trail.len();
        let ok = match pi {
            PatternInput::Free(l) => match s.leaf_bind[l.index()] {
                Some(bound) if bound != signal => false,
                Some(_) => assign_ports(s, pn, g, i + 1, used | (1 << j), &chosen_next, k),
                None => {
                    s.leaf_bind[l.index()] = Some(signal);
                    s.trail.push(Bind::Leaf(l));
                    assign_ports(s, pn, g, i + 1, used | (1 << j), &chosen_next, k)
                }
            },
            PatternInput::Node(q) => try_node(s, q, signal, &mut |s2| {
                assign_ports(s2, pn, g, i + 1, used | (1 << j), &chosen_next, k)
            }),
        };
        if ok {
            return true;
        }
        s.undo_to(mark);
    }
    false
}

/// Bind pattern outputs beyond the root. Satellites hang off the root cone
/// through shared leaves only, so candidates are drawn from the fanout of
/// an already-bound input signal when one exists, falling back to the type
/// index.
fn match_satellites(s: &mut Search, idx: usize) -> bool {
    let sats = s.p.satellites();
    if idx == sats.len() {
        return true;
    }
    let sat = sats[idx];
    if s.node_bind[sat.index()].is_some() {
        return match_satellites(s, idx + 1);
    }
    let bound_input = s.p.node(sat).inputs.iter().find_map(|i| match i {
        PatternInput::Free(l) => s.leaf_bind[l.index()],
        PatternInput::Node(q) => s.node_bind[q.index()],
    });
    let candidates: Vec<GateId> = match bound_input {
        Some(sig) => {
            let mut c: Vec<GateId> = s.n.gate(sig).fanouts.clone();
            c.sort_unstable();
            c.dedup();
            c
        }
        None => s.n.gates_of_kind(s.p.node(sat).kind).to_vec(),
    };
    for g in candidates {
        if s.n.gate(g).kind != s.p.node(sat).kind {
            continue;
        }
        let mark = s.trail.len();
        if try_node(s, sat, g, &mut |s2| match_satellites(s2, idx + 1)) {
            return true;
        }
        s.undo_to(mark);
    }
    false
}

/// Verify an embedding node by node: kinds, arities, and the existence of a
/// port bijection consistent with the claimed bindings. Used by tests as
/// the soundness check for every reported match.
pub fn verify_embedding(n: &Netlist, p: &Pattern, emb: &Embedding) -> bool {
    if emb.node_to_gate.len() != p.num_nodes() {
        return false;
    }
    for pn in p.node_ids() {
        let g = emb.node_to_gate[pn.index()];
        let node = p.node(pn);
        let gate = n.gate(g);
        if node.kind != gate.kind
            || node.inputs.len() != gate.inputs.len()
            || n.in_lock_perimeter(g)
        {
            return false;
        }
        // exists a bijection ports -> pattern inputs honoring bindings and
        // per-node signal distinctness
        let k = node.inputs.len();
        let want: Vec<Option<GateId>> = node
            .inputs
            .iter()
            .map(|pi| match pi {
                PatternInput::Node(q) => Some(emb.node_to_gate[q.index()]),
                PatternInput::Free(l) => emb.leaf_to_signal[l.index()],
            })
            .collect();
        if want.iter().any(|w| w.is_none()) {
            return false;
        }
        let mut perm_ok = false;
        let mut used = vec![false; k];
        #[allow(clippy::too_many_arguments)]
        fn place(
            i: usize,
            k: usize,
            want: &[Option<GateId>],
            ports: &[GateId],
            node_inputs: &[PatternInput],
            used: &mut [bool],
            chosen: &mut Vec<GateId>,
            ok: &mut bool,
        ) {
            if *ok {
                return;
            }
            if i == k {
                *ok = true;
                return;
            }
            for j in 0..k {
                if used[j] || Some(ports[j]) != want[i] {
                    continue;
                }
                let consistent = (0..i).all(|e| {
                    if node_inputs[e] == node_inputs[i] {
                        chosen[e] == ports[j]
                    } else {
                        chosen[e] != ports[j]
                    }
                });
                if !consistent {
                    continue;
                }
                used[j] = true;
                chosen.push(ports[j]);
                place(i + 1, k, want, ports, node_inputs, used, chosen, ok);
                chosen.pop();
                used[j] = false;
            }
        }
        place(
            0,
            k,
            &want,
            &gate.inputs,
            &node.inputs,
            &mut used,
            &mut Vec::new(),
            &mut perm_ok,
        );
        if !perm_ok {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_bench;
    use crate::pattern::fanin_cone;

    fn ripple_adder() -> Netlist {
        crate::benchgen::ripple_carry_adder(4)
    }

    #[test]
    fn half_adder_pattern_matches_eight_times() {
        let n = ripple_adder();
        let pat = crate::benchgen::half_adder_pattern();
        let res = fs(&n, &pat, &HashSet::new());
        assert_eq!(res.len(), 8, "roots: {:?}", res.matched_roots);
    }

    #[test]
    fn unique_cone_excluding_origin_matches_nothing() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nt = NAND(a, b)\ny = NOR(t, c)\n",
        )
        .unwrap();
        let root = n.lookup("y").unwrap();
        let cone = fanin_cone(&n, root, 2);
        let mut exclude = HashSet::new();
        exclude.insert(root);
        assert!(fs(&n, &cone.pattern, &exclude).is_empty());
        assert_eq!(count_occurrences(&n, &cone), 1);
    }

    #[test]
    fn matches_are_sorted_and_deterministic() {
        let n = ripple_adder();
        let pat = crate::benchgen::half_adder_pattern();
        let a = fs(&n, &pat, &HashSet::new());
        let b = fs(&n, &pat, &HashSet::new());
        assert_eq!(a.matched_roots, b.matched_roots);
        let mut sorted = a.matched_roots.clone();
        sorted.sort_unstable();
        assert_eq!(a.matched_roots, sorted);
    }

    #[test]
    fn every_match_has_a_checkable_embedding() {
        let n = ripple_adder();
        let pat = crate::benchgen::half_adder_pattern();
        for root in fs(&n, &pat, &HashSet::new()).matched_roots {
            let emb = find_embedding(&n, &pat, root).expect("reported match must embed");
            assert!(verify_embedding(&n, &pat, &emb));
        }
    }

    #[test]
    fn key_gates_block_node_matches_but_not_leaves() {
        // y = XOR(a, keyinput0) is a key gate; z copies its shape unlocked
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nOUTPUT(w)\nOUTPUT(v)\n\
             y = XOR(a, keyinput0)\nw = AND(y, b)\nz = XOR(a, b)\nv = AND(z, b)\n",
        )
        .unwrap();
        // pattern: AND(XOR(x0,x1), x2)
        let root = n.lookup("v").unwrap();
        let cone = fanin_cone(&n, root, 2);
        let res = fs(&n, &cone.pattern, &HashSet::new());
        // w's cone contains the key gate, so only v matches
        assert_eq!(res.matched_roots, vec![root]);

        // w consumes the key gate, so the perimeter rule blocks it even for
        // a single-node pattern; v still matches, and its free leaves are
        // unconstrained
        let shallow = fanin_cone(&n, root, 1);
        let res = fs(&n, &shallow.pattern, &HashSet::new());
        assert_eq!(res.matched_roots, vec![root]);
    }

    #[test]
    fn arity_must_match_exactly() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nOUTPUT(z)\ny = AND(a, b)\nz = AND(a, b, c)\n",
        )
        .unwrap();
        let root = n.lookup("y").unwrap();
        let cone = fanin_cone(&n, root, 1);
        let res = fs(&n, &cone.pattern, &HashSet::new());
        assert_eq!(res.matched_roots, vec![root]);
    }

    #[test]
    fn per_node_injectivity_rules_out_sibling_collapse() {
        // pattern AND(x0, x1) with distinct leaves must not match AND(t, t)
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(z)\nt = NOT(a)\ny = AND(t, t)\nz = AND(a, b)\n")
            .unwrap();
        let root = n.lookup("z").unwrap();
        let cone = fanin_cone(&n, root, 1);
        let res = fs(&n, &cone.pattern, &HashSet::new());
        assert_eq!(res.matched_roots, vec![root]);
    }

    #[test]
    fn shared_leaf_constrains_signals() {
        // half-adder shape requires both gates to share both inputs
        let n = parse_bench(
            "INPUT(p)\nINPUT(q)\nINPUT(r)\nOUTPUT(y)\nOUTPUT(c1)\nOUTPUT(c2)\n\
             s1 = XOR(p, q)\nc1 = AND(p, q)\ns2 = XOR(p, r)\nc2 = AND(q, r)\ny = OR(s1, s2)\n",
        )
        .unwrap();
        let pat = crate::benchgen::half_adder_pattern();
        // only the (p,q) pair forms a half adder; root is its XOR
        let res = fs(&n, &pat, &HashSet::new());
        assert_eq!(res.matched_roots, vec![n.lookup("s1").unwrap()]);
    }
}
