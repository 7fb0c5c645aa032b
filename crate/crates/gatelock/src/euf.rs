//! Unit functions around key gates and their hypothesis-key rewrites.
//!
//! The unit function for a key gate is the fan-in cone of the gate that
//! consumes the key-gate output. Key gates are transparent to the layer
//! count, and the data driver of every key gate in the cone is pulled in
//! even when it lies one level past the budget: the driver's type is what
//! the inverting rewrite flips, so a unit function without it could not be
//! rewritten. A one-layer unit function is therefore root + key gate +
//! driver.
//!
//! Each key gate admits three rewrites against a hypothesis bit:
//!
//! - `E0` (gate transparent at the hypothesis): delete it and wire through;
//! - `E1` (gate inverts): delete it and complement the driver's type;
//! - `E1Hat` (gate inverts): delete it and absorb the inversion into every
//!   consumer via its DeMorgan dual, complementing the consumers' other
//!   inputs.
//!
//! A unit function holding `j` key gates yields `3^j` candidate patterns
//! covering `2^j` hypothesis keys; inverting hypotheses appear twice.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::netlist::{GateId, GateKind, Netlist};
use crate::pattern::{LeafId, NodeId, Pattern, PatternInput};

/// Largest number of key gates a unit function may hold before generation
/// is abandoned; 3^9 patterns per layer step is past any useful budget.
pub const MAX_UF_KEY_GATES: usize = 8;

/// A rooted cone around a key gate, pattern key slots aligned with
/// `key_gates`.
#[derive(Debug, Clone)]
pub struct UnitFunction {
    /// Netlist gate anchoring the search (a successor of the key gate,
    /// never a key gate itself).
    pub root: GateId,
    pub layers: u32,
    pub pattern: Pattern,
    /// Netlist ids of the key gates inside the cone, in discovery order,
    /// parallel to `pattern.key_slots()`.
    pub key_gates: Vec<GateId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    E0,
    E1,
    E1Hat,
}

/// One rewritten, key-free candidate for the original logic under a
/// hypothesis key.
#[derive(Debug, Clone)]
pub struct Euf {
    /// Hypothesis bit per key gate, aligned with `UnitFunction::key_gates`.
    pub hypothesis: Vec<bool>,
    pub variants: Vec<Variant>,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, Default)]
pub struct EufSet {
    pub eufs: Vec<Euf>,
    /// Variant combinations dropped because a rewrite was impossible
    /// (driver on a free leaf, or a consumer without a dual).
    pub skipped: usize,
    /// Set when the unit function held more than [`MAX_UF_KEY_GATES`] key
    /// gates and nothing was generated.
    pub capped: bool,
}

/// Match counts aggregated by hypothesis key.
#[derive(Debug, Clone)]
pub struct HypothesisTable {
    /// All 2^j hypothesis keys, index encoding bit i of the key at
    /// position i.
    pub combos: Vec<Vec<bool>>,
    pub counts: Vec<u64>,
}

impl HypothesisTable {
    pub fn new(j: usize) -> HypothesisTable {
        let combos = (0..1usize << j)
            .map(|m| (0..j).map(|i| (m >> i) & 1 == 1).collect())
            .collect();
        HypothesisTable {
            combos,
            counts: vec![0; 1 << j],
        }
    }

    pub fn index_of(hypothesis: &[bool]) -> usize {
        hypothesis
            .iter()
            .enumerate()
            .fold(0, |acc, (i, b)| acc | ((*b as usize) << i))
    }

    pub fn nonzero(&self) -> usize {
        self.counts.iter().filter(|c| **c > 0).count()
    }
}

/// The hypothesis bit at which a key gate of this kind is transparent.
fn transparency(kind: GateKind) -> bool {
    match kind {
        GateKind::Xor => false,
        GateKind::Xnor => true,
        other => unreachable!("key gate of kind {other}"),
    }
}

/// Non-key gates consuming the key gate's output, chasing through chained
/// key gates; sorted and deduplicated.
pub fn uf_roots(n: &Netlist, key_gate: GateId) -> Result<Vec<GateId>> {
    let mut roots = Vec::new();
    let mut stack = vec![key_gate];
    let mut seen = vec![key_gate];
    while let Some(g) = stack.pop() {
        for &c in &n.gate(g).fanouts {
            if n.is_key_gate(c) {
                if !seen.contains(&c) {
                    seen.push(c);
                    stack.push(c);
                }
            } else if !roots.contains(&c) {
                roots.push(c);
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::FanoutlessKeyGate {
            gate: n.name(key_gate).to_string(),
        });
    }
    roots.sort_unstable();
    Ok(roots)
}

/// One unit function per fanout successor of the key gate.
pub fn extract_uf(n: &Netlist, key_gate: GateId, layers: u32) -> Result<Vec<UnitFunction>> {
    let roots = uf_roots(n, key_gate)?;
    Ok(roots
        .into_iter()
        .map(|root| extract_uf_rooted(n, root, layers))
        .collect())
}

/// Extract the unit function rooted at `root` (a non-key gate): the depth
/// bounded fan-in cone with key gates carried as slots and their data
/// drivers pulled in.
pub fn extract_uf_rooted(n: &Netlist, root: GateId, layers: u32) -> UnitFunction {
    assert!(layers >= 1);
    assert!(!n.is_key_gate(root), "unit functions anchor at logic gates");
    let mut pattern = Pattern::empty();
    let mut node_of: HashMap<GateId, NodeId> = HashMap::new();
    let mut leaf_of: HashMap<GateId, LeafId> = HashMap::new();
    let mut key_gates: Vec<GateId> = Vec::new();

    let root_node = pattern.add_node(n.gate(root).kind, Vec::new());
    node_of.insert(root, root_node);
    // queue of nodes whose ports still need filling: (gate, depth,
    // expandable); frontier nodes get leaf ports only
    let mut queue = std::collections::VecDeque::new();
    queue.push_back((root, 1u32, true));

    while let Some((g, depth, expandable)) = queue.pop_front() {
        let pnode = node_of[&g];
        if !pattern.node(pnode).inputs.is_empty() {
            continue;
        }
        let mut ports = Vec::new();
        for &src in &n.gate(g).inputs {
            let port = resolve_input(
                n,
                src,
                depth,
                layers,
                expandable,
                &mut pattern,
                &mut node_of,
                &mut leaf_of,
                &mut key_gates,
                &mut queue,
            );
            ports.push(port);
        }
        pattern.node_mut(pnode).inputs = ports;
    }

    // a signal that ended up both as a node and as a leaf: keep the node
    for (sig, leaf) in leaf_of.iter() {
        if let Some(&nn) = node_of.get(sig) {
            pattern.replace_refs(PatternInput::Free(*leaf), PatternInput::Node(nn));
        }
    }
    pattern.set_root(root_node);

    // compact renumbers nodes but keeps the slot list's order; every slot
    // sits on a path from the root, so none is dropped
    pattern.compact();
    assert_eq!(pattern.key_slots().len(), key_gates.len());

    UnitFunction {
        root,
        layers,
        pattern,
        key_gates,
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve_input(
    n: &Netlist,
    src: GateId,
    consumer_depth: u32,
    layers: u32,
    consumer_expandable: bool,
    pattern: &mut Pattern,
    node_of: &mut HashMap<GateId, NodeId>,
    leaf_of: &mut HashMap<GateId, LeafId>,
    key_gates: &mut Vec<GateId>,
    queue: &mut std::collections::VecDeque<(GateId, u32, bool)>,
) -> PatternInput {
    if let Some(&existing) = node_of.get(&src) {
        return PatternInput::Node(existing);
    }
    let leaf = |pattern: &mut Pattern, leaf_of: &mut HashMap<GateId, LeafId>, s: GateId| {
        let l = *leaf_of.entry(s).or_insert_with(|| pattern.new_leaf());
        PatternInput::Free(l)
    };

    if n.is_key_gate(src) && consumer_expandable {
        // chase a chain of key gates down to the first data driver
        let mut chain = vec![src];
        let mut data = n.key_gate_data_input(src);
        while let Some(d) = data {
            if n.is_key_gate(d) && !chain.contains(&d) {
                chain.push(d);
                data = n.key_gate_data_input(d);
            } else {
                break;
            }
        }
        // innermost data input first
        let inner: PatternInput = match data {
            Some(d) if n.gate(d).kind.is_logic() && !n.is_key_gate(d) => {
                if let Some(&existing) = node_of.get(&d) {
                    PatternInput::Node(existing)
                } else {
                    let nn = pattern.add_node(n.gate(d).kind, Vec::new());
                    node_of.insert(d, nn);
                    // mandatory inclusion; expansion only within the budget,
                    // otherwise the driver's own inputs become leaves
                    let depth = consumer_depth + 1;
                    queue.push_back((d, depth, depth <= layers));
                    PatternInput::Node(nn)
                }
            }
            Some(d) => leaf(pattern, leaf_of, d),
            None => {
                // key gate fed by key inputs only; nothing to anchor on
                let l = pattern.new_leaf();
                PatternInput::Free(l)
            }
        };
        let mut input = inner;
        for &kg in chain.iter().rev() {
            let slot = pattern.add_key_slot(n.gate(kg).kind, input);
            node_of.insert(kg, slot);
            key_gates.push(kg);
            input = PatternInput::Node(slot);
        }
        return input;
    }

    let depth = consumer_depth + 1;
    if consumer_expandable && depth <= layers && n.gate(src).kind.is_logic() && !n.is_key_gate(src)
    {
        let nn = pattern.add_node(n.gate(src).kind, Vec::new());
        node_of.insert(src, nn);
        queue.push_back((src, depth, true));
        PatternInput::Node(nn)
    } else {
        leaf(pattern, leaf_of, src)
    }
}

/// Generate every variant combination over the unit function's key gates.
pub fn gen_eufs(uf: &UnitFunction) -> EufSet {
    let j = uf.key_gates.len();
    if j > MAX_UF_KEY_GATES {
        log::warn!(
            "unit function at `{:?}` holds {j} key gates; generation capped",
            uf.root
        );
        return EufSet {
            eufs: Vec::new(),
            skipped: 0,
            capped: true,
        };
    }
    let orig_kinds: Vec<GateKind> = uf
        .pattern
        .key_slots()
        .iter()
        .map(|s| uf.pattern.node(*s).kind)
        .collect();
    let mut set = EufSet::default();
    let total = 3usize.pow(j as u32);
    'combos: for mut combo in 0..total {
        let mut variants = Vec::with_capacity(j);
        for _ in 0..j {
            variants.push(match combo % 3 {
                0 => Variant::E0,
                1 => Variant::E1,
                _ => Variant::E1Hat,
            });
            combo /= 3;
        }
        let hypothesis: Vec<bool> = variants
            .iter()
            .zip(&orig_kinds)
            .map(|(v, k)| match v {
                Variant::E0 => transparency(*k),
                Variant::E1 | Variant::E1Hat => !transparency(*k),
            })
            .collect();
        let mut pattern = uf.pattern.clone();
        let slots = pattern.key_slots().to_vec();
        for (i, &slot) in slots.iter().enumerate() {
            if rewrite_slot(&mut pattern, slot, hypothesis[i], variants[i]).is_err() {
                set.skipped += 1;
                log::debug!(
                    "skipping combo {variants:?} on `{:?}`: impossible rewrite",
                    uf.root
                );
                continue 'combos;
            }
        }
        pattern.compact();
        debug_assert!(pattern.key_slots().is_empty(), "slots survive a rewrite");
        pattern.clear_key_slots();
        set.eufs.push(Euf {
            hypothesis,
            variants,
            pattern,
        });
    }
    set
}

struct Impossible;

/// Rewrite one key slot under hypothesis bit `h`. The slot kind may have
/// been flipped by an earlier slot's successor rewrite, in which case the
/// effective behavior at `h` decides between wire-through and inversion,
/// with the requested variant picking the absorption site.
fn rewrite_slot(
    pattern: &mut Pattern,
    slot: NodeId,
    h: bool,
    variant: Variant,
) -> std::result::Result<(), Impossible> {
    let cur = pattern.node(slot).kind;
    let transparent_now = matches!(
        (cur, h),
        (GateKind::Xor, false) | (GateKind::Xnor, true)
    );
    if transparent_now {
        wire_through(pattern, slot);
        return Ok(());
    }
    match variant {
        Variant::E1 | Variant::E0 => complement_driver(pattern, slot),
        Variant::E1Hat => absorb_into_consumers(pattern, slot),
    }
}

/// Remove a slot, wiring its data input to every consumer. The orphaned
/// node drops its own references so later use counts stay accurate.
fn wire_through(pattern: &mut Pattern, slot: NodeId) {
    let data = pattern.node(slot).inputs[0];
    pattern.replace_refs(PatternInput::Node(slot), data);
    pattern.node_mut(slot).inputs.clear();
    pattern.remove_key_slot(slot);
}

/// Delete the slot and complement its driver's type.
fn complement_driver(pattern: &mut Pattern, slot: NodeId) -> std::result::Result<(), Impossible> {
    let data = pattern.node(slot).inputs[0];
    let q = match data {
        PatternInput::Node(q) => q,
        PatternInput::Free(_) => return Err(Impossible),
    };
    if pattern.uses_of(q) == 1 {
        let flipped = pattern
            .node(q)
            .kind
            .complement()
            .ok_or(Impossible)?;
        pattern.node_mut(q).kind = flipped;
        wire_through(pattern, slot);
    } else {
        // the driver feeds other pattern nodes too; complement this path
        // only
        let w = pattern.add_node(GateKind::Not, vec![PatternInput::Node(q)]);
        pattern.node_mut(slot).inputs[0] = PatternInput::Node(w);
        wire_through(pattern, slot);
    }
    Ok(())
}

/// Delete the slot and absorb the inversion into every consumer: dual type,
/// other inputs complemented.
fn absorb_into_consumers(
    pattern: &mut Pattern,
    slot: NodeId,
) -> std::result::Result<(), Impossible> {
    let consumers: Vec<NodeId> = pattern
        .node_ids()
        .filter(|c| {
            pattern
                .node(*c)
                .inputs
                .contains(&PatternInput::Node(slot))
        })
        .collect();
    if consumers.is_empty() {
        return Err(Impossible);
    }
    for &c in &consumers {
        if pattern.is_key_slot(c) || pattern.node(c).kind.demorgan_dual().is_none() {
            return Err(Impossible);
        }
    }
    for &c in &consumers {
        let dual = pattern
            .node(c)
            .kind
            .demorgan_dual()
            .expect("checked above");
        pattern.node_mut(c).kind = dual;
        let mut others: Vec<PatternInput> = Vec::new();
        for i in pattern.node(c).inputs.iter() {
            if *i != PatternInput::Node(slot) && !others.contains(i) {
                others.push(*i);
            }
        }
        for o in others {
            complement_edge_value(pattern, c, o);
        }
    }
    wire_through(pattern, slot);
    Ok(())
}

/// Complement the value node `c` sees on every port currently fed by `v`.
fn complement_edge_value(pattern: &mut Pattern, c: NodeId, v: PatternInput) {
    let replace_ports = |pattern: &mut Pattern, c: NodeId, from: PatternInput, to: PatternInput| {
        for i in pattern.node_mut(c).inputs.iter_mut() {
            if *i == from {
                *i = to;
            }
        }
    };
    match v {
        PatternInput::Free(_) => {
            let w = pattern.add_node(GateKind::Not, vec![v]);
            replace_ports(pattern, c, v, PatternInput::Node(w));
        }
        PatternInput::Node(q) => {
            let uses_elsewhere = pattern
                .node_ids()
                .filter(|n| *n != c)
                .any(|n| pattern.node(n).inputs.contains(&PatternInput::Node(q)));
            if uses_elsewhere {
                let w = pattern.add_node(GateKind::Not, vec![v]);
                replace_ports(pattern, c, v, PatternInput::Node(w));
            } else if pattern.is_key_slot(q) {
                let flipped = match pattern.node(q).kind {
                    GateKind::Xor => GateKind::Xnor,
                    GateKind::Xnor => GateKind::Xor,
                    other => unreachable!("key slot of kind {other}"),
                };
                pattern.node_mut(q).kind = flipped;
            } else if pattern.node(q).kind == GateKind::Not {
                let inner = pattern.node(q).inputs[0];
                replace_ports(pattern, c, v, inner);
                pattern.node_mut(q).inputs.clear();
            } else {
                let flipped = pattern
                    .node(q)
                    .kind
                    .complement()
                    .expect("cone nodes are logic gates");
                pattern.node_mut(q).kind = flipped;
            }
        }
    }
}

/// Truth-table equivalence of a rewrite against its locked unit function
/// under the hypothesis key: exhaustive up to 12 free inputs, 4096 seeded
/// random rows beyond that.
pub fn euf_equiv(uf: &UnitFunction, euf: &Euf) -> bool {
    use rand::{Rng, SeedableRng};
    let leaves = uf.pattern.num_leaves();
    let mut words = vec![0u64; leaves];
    if leaves <= 12 {
        let rows = 1usize << leaves;
        let mut block = 0usize;
        while block * 64 < rows {
            for (i, w) in words.iter_mut().enumerate() {
                *w = if i < 6 {
                    let mut v = 0u64;
                    for lane in 0..64u64 {
                        if (lane >> i) & 1 == 1 {
                            v |= 1 << lane;
                        }
                    }
                    v
                } else if (block >> (i - 6)) & 1 == 1 {
                    !0
                } else {
                    0
                };
            }
            let lanes = (rows - block * 64).min(64);
            let mask = if lanes == 64 { !0u64 } else { (1u64 << lanes) - 1 };
            if !rows_agree(uf, euf, &words, mask) {
                return false;
            }
            block += 1;
        }
        true
    } else {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(0x455546);
        for _ in 0..(4096 / 64) {
            for w in words.iter_mut() {
                *w = rng.gen();
            }
            if !rows_agree(uf, euf, &words, !0) {
                return false;
            }
        }
        true
    }
}

fn rows_agree(uf: &UnitFunction, euf: &Euf, words: &[u64], mask: u64) -> bool {
    let locked = uf.pattern.eval_words(words, &euf.hypothesis);
    let rewritten = euf.pattern.eval_words(words, &[]);
    (locked ^ rewritten) & mask == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_bench;
    use crate::locker::{Inserter, KeyGateVariant};

    /// Two-stage circuit locked on the inner net with the given variant.
    fn locked_pair(variant: KeyGateVariant, bit: bool) -> (Netlist, Netlist) {
        let original = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(G2)\nG1 = NAND(a, b)\nG2 = OR(G1, c)\n",
        )
        .unwrap();
        let mut locked = original.clone();
        let mut ins = Inserter::new(&locked);
        let net = locked.lookup("G1").unwrap();
        ins.insert_on(&mut locked, net, "keyinput0", bit, variant)
            .unwrap();
        (original, locked)
    }

    #[test]
    fn one_layer_uf_holds_root_key_gate_and_driver() {
        let (_, locked) = locked_pair(KeyGateVariant::PrecedingInvert, true);
        let kg = locked.lookup("lock_g0").unwrap();
        let ufs = extract_uf(&locked, kg, 1).unwrap();
        assert_eq!(ufs.len(), 1);
        let uf = &ufs[0];
        assert_eq!(locked.name(uf.root), "G2");
        assert_eq!(uf.key_gates, vec![kg]);
        // root + slot + driver
        assert_eq!(uf.pattern.num_nodes(), 3);
        assert_eq!(uf.pattern.key_slots().len(), 1);
        // driver was complemented by the lock, so it reads AND here
        let driver_kind = uf
            .pattern
            .node_ids()
            .map(|n| uf.pattern.node(n).kind)
            .find(|k| matches!(k, GateKind::And))
            .expect("flipped driver inside the cone");
        assert_eq!(driver_kind, GateKind::And);
    }

    #[test]
    fn three_rewrites_per_key_gate() {
        let (original, locked) = locked_pair(KeyGateVariant::PrecedingInvert, true);
        let kg = locked.lookup("lock_g0").unwrap();
        let uf = extract_uf(&locked, kg, 1).unwrap().remove(0);
        let set = gen_eufs(&uf);
        assert_eq!(set.eufs.len(), 3);
        assert_eq!(set.skipped, 0);
        // hypotheses: one transparent, two inverting
        let zeros = set.eufs.iter().filter(|e| !e.hypothesis[0]).count();
        let ones = set.eufs.iter().filter(|e| e.hypothesis[0]).count();
        assert_eq!((zeros, ones), (1, 2));
        // the inverting driver-flip rewrite reproduces the original logic:
        // NAND feeding OR
        let e1 = set
            .eufs
            .iter()
            .find(|e| e.variants[0] == Variant::E1)
            .unwrap();
        assert!(e1.hypothesis[0]);
        let kinds: Vec<GateKind> = e1
            .pattern
            .topo_from_root()
            .iter()
            .map(|n| e1.pattern.node(*n).kind)
            .collect();
        assert!(kinds.contains(&GateKind::Nand) && kinds.contains(&GateKind::Or));
        // and it matches the original netlist at its root
        let m = crate::matcher::fs(&original, &e1.pattern, &std::collections::HashSet::new());
        assert_eq!(m.len(), 1);
        assert_eq!(original.name(m.matched_roots[0]), "G2");
    }

    #[test]
    fn demorgan_lock_is_reversed_by_e1hat() {
        let (original, locked) = locked_pair(KeyGateVariant::Demorgan, true);
        let kg = locked.lookup("lock_g0").unwrap();
        // two layers so the inserted NOT over `c` joins the cone
        let uf = extract_uf(&locked, kg, 2).unwrap().remove(0);
        let set = gen_eufs(&uf);
        let hits: Vec<&Euf> = set
            .eufs
            .iter()
            .filter(|e| {
                !crate::matcher::fs(&original, &e.pattern, &std::collections::HashSet::new())
                    .is_empty()
            })
            .collect();
        assert!(
            hits.iter()
                .any(|e| e.variants[0] == Variant::E1Hat && e.hypothesis[0]),
            "successor rewrite must recover the original under the true bit"
        );
        for e in hits {
            assert!(e.hypothesis[0], "only the true hypothesis may match");
        }
    }

    #[test]
    fn fanout_key_gate_yields_one_uf_per_successor() {
        let mut n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nOUTPUT(z)\nt = AND(a, b)\n\
             y = OR(t, c)\nz = NOR(t, c)\n",
        )
        .unwrap();
        let mut ins = Inserter::new(&n);
        let net = n.lookup("t").unwrap();
        ins.insert_on(&mut n, net, "keyinput0", false, KeyGateVariant::Passthrough)
            .unwrap();
        let kg = n.lookup("lock_g0").unwrap();
        let ufs = extract_uf(&n, kg, 1).unwrap();
        assert_eq!(ufs.len(), 2);
        let mut roots: Vec<&str> = ufs.iter().map(|u| n.name(u.root)).collect();
        roots.sort();
        assert_eq!(roots, vec!["y", "z"]);
    }

    #[test]
    fn key_gate_driving_only_outputs_is_an_error() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = XOR(a, keyinput0)\n",
        )
        .unwrap();
        let kg = n.lookup("y").unwrap();
        assert!(n.is_key_gate(kg));
        assert!(matches!(
            extract_uf(&n, kg, 1),
            Err(Error::FanoutlessKeyGate { .. })
        ));
    }

    #[test]
    fn every_euf_is_equivalent_to_the_locked_uf_under_its_hypothesis() {
        // randomized circuits, every variant, exhaustive truth tables
        let mut pairs = 0;
        for seed in 0..40u64 {
            let n = crate::benchgen::random_netlist(10, 5, seed);
            let locked = match crate::locker::lock_rll(&n, 2, seed ^ 0x10c8) {
                Ok(l) => l,
                Err(_) => continue,
            };
            for rec in &locked.records {
                let kg = locked.netlist.lookup(&rec.gate_id).unwrap();
                for layers in 1..=2 {
                    let ufs = match extract_uf(&locked.netlist, kg, layers) {
                        Ok(u) => u,
                        Err(_) => continue,
                    };
                    for uf in ufs {
                        let set = gen_eufs(&uf);
                        for euf in &set.eufs {
                            assert!(euf_equiv(&uf, euf), "seed {seed} gate {}", rec.gate_id);
                            pairs += 1;
                        }
                    }
                }
            }
        }
        assert!(pairs > 100, "only {pairs} pairs checked");
    }

    #[test]
    fn cluster_of_three_generates_27_eufs() {
        // three key gates converging within two levels of one root
        let original = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nINPUT(e)\nINPUT(f)\nOUTPUT(n5)\n\
             n1 = AND(a, b)\nn2 = OR(c, d)\nn3 = NAND(e, f)\nn4 = AND(n1, n2)\nn5 = OR(n4, n3)\n",
        )
        .unwrap();
        let mut locked = original.clone();
        let mut ins = Inserter::new(&locked);
        for (i, (net, bit)) in [("n1", true), ("n2", false), ("n3", true)].iter().enumerate() {
            let id = locked.lookup(net).unwrap();
            ins.insert_on(
                &mut locked,
                id,
                &format!("keyinput{i}"),
                *bit,
                if *bit {
                    KeyGateVariant::PrecedingInvert
                } else {
                    KeyGateVariant::Passthrough
                },
            )
            .unwrap();
        }
        let kg = locked.lookup("lock_g2").unwrap();
        let uf = extract_uf_rooted(&locked, locked.lookup("n5").unwrap(), 2);
        let _ = kg;
        assert_eq!(uf.key_gates.len(), 3);
        let set = gen_eufs(&uf);
        assert_eq!(set.eufs.len() + set.skipped, 27);
        // exactly 2^3 distinct hypotheses, inverting bits twice per slot
        let mut seen = std::collections::HashSet::new();
        for e in &set.eufs {
            seen.insert(HypothesisTable::index_of(&e.hypothesis));
        }
        assert_eq!(seen.len(), 8);
        // the combo matching the pre-lock netlist carries the true key
        let truth = vec![true, false, true];
        let mut matched_truth = false;
        for e in &set.eufs {
            let m = crate::matcher::fs(&original, &e.pattern, &std::collections::HashSet::new());
            if !m.is_empty() {
                // hypothesis must agree with the key bits for the slots'
                // key inputs
                let bits: Vec<bool> = uf
                    .key_gates
                    .iter()
                    .zip(&e.hypothesis)
                    .map(|(_, h)| *h)
                    .collect();
                let names: Vec<&str> = uf
                    .key_gates
                    .iter()
                    .map(|kg| {
                        let data = locked
                            .gate(*kg)
                            .inputs
                            .iter()
                            .copied()
                            .find(|s| locked.is_key_input(*s))
                            .unwrap();
                        locked.name(data)
                    })
                    .collect();
                for (name, bit) in names.iter().zip(&bits) {
                    let idx: usize = name["keyinput".len()..].parse().unwrap();
                    assert_eq!(*bit, truth[idx], "match under a wrong hypothesis");
                }
                matched_truth = true;
            }
        }
        assert!(matched_truth, "no rewrite recovered the original cluster");
    }
}
