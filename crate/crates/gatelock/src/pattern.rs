//! Rooted fan-in cone patterns.
//!
//! A pattern is a rooted DAG of typed nodes whose leaves are either further
//! nodes or free leaves. A free leaf matches any signal, but one leaf id
//! always binds one signal, so two gates sharing a leaf must share the
//! driving signal in any match. Key gates inside a pattern are tracked as
//! key slots: XOR/XNOR nodes with a single data input whose key input is
//! implied, to be rewritten away before searching.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::netlist::{GateId, GateKind, Netlist};

/// Index of a node within one [`Pattern`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a free leaf within one [`Pattern`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafId(pub u32);

impl LeafId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternInput {
    Node(NodeId),
    Free(LeafId),
}

#[derive(Debug, Clone)]
pub struct PatternNode {
    pub kind: GateKind,
    pub inputs: Vec<PatternInput>,
}

#[derive(Debug, Clone)]
pub struct Pattern {
    nodes: Vec<PatternNode>,
    /// Matching anchors. The first entry is the root the search is seeded
    /// from; later entries are satellite outputs (parallel gates connected
    /// to the root cone only through shared leaves, like the carry AND of
    /// a half adder).
    outputs: Vec<NodeId>,
    leaf_count: u32,
    /// Nodes standing for key gates; each has exactly one (data) input.
    key_slots: Vec<NodeId>,
}

impl Pattern {
    pub(crate) fn empty() -> Pattern {
        Pattern {
            nodes: Vec::new(),
            outputs: Vec::new(),
            leaf_count: 0,
            key_slots: Vec::new(),
        }
    }

    pub fn root(&self) -> NodeId {
        self.outputs[0]
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    pub fn satellites(&self) -> &[NodeId] {
        &self.outputs[1..]
    }

    pub fn node(&self, id: NodeId) -> &PatternNode {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut PatternNode {
        &mut self.nodes[id.index()]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_count as usize
    }

    pub fn key_slots(&self) -> &[NodeId] {
        &self.key_slots
    }

    pub fn is_key_slot(&self, id: NodeId) -> bool {
        self.key_slots.contains(&id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub(crate) fn add_node(&mut self, kind: GateKind, inputs: Vec<PatternInput>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(PatternNode { kind, inputs });
        id
    }

    pub(crate) fn add_key_slot(&mut self, kind: GateKind, data: PatternInput) -> NodeId {
        let id = self.add_node(kind, vec![data]);
        self.key_slots.push(id);
        id
    }

    pub(crate) fn new_leaf(&mut self) -> LeafId {
        let id = LeafId(self.leaf_count);
        self.leaf_count += 1;
        id
    }

    pub(crate) fn set_root(&mut self, root: NodeId) {
        if self.outputs.is_empty() {
            self.outputs.push(root);
        } else {
            self.outputs[0] = root;
        }
    }

    pub(crate) fn add_satellite_output(&mut self, node: NodeId) {
        self.outputs.push(node);
    }

    pub(crate) fn clear_key_slots(&mut self) {
        self.key_slots.clear();
    }

    pub(crate) fn remove_key_slot(&mut self, slot: NodeId) {
        self.key_slots.retain(|s| *s != slot);
    }

    /// How many node input ports reference `id`.
    pub fn uses_of(&self, id: NodeId) -> usize {
        self.nodes
            .iter()
            .flat_map(|n| n.inputs.iter())
            .filter(|i| **i == PatternInput::Node(id))
            .count()
    }

    /// Replace every port referencing `from` with `to`.
    pub(crate) fn replace_refs(&mut self, from: PatternInput, to: PatternInput) {
        for n in &mut self.nodes {
            for i in &mut n.inputs {
                if *i == from {
                    *i = to;
                }
            }
        }
    }

    /// Nodes reachable from any output, children before parents.
    pub fn topo_from_root(&self) -> Vec<NodeId> {
        let mut order = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = Vec::new();
        for &out in self.outputs.iter().rev() {
            if !seen[out.index()] {
                seen[out.index()] = true;
                stack.push((out, 0usize));
            }
        }
        while let Some((id, child)) = stack.pop() {
            let node = &self.nodes[id.index()];
            if child < node.inputs.len() {
                stack.push((id, child + 1));
                if let PatternInput::Node(c) = node.inputs[child] {
                    if !seen[c.index()] {
                        seen[c.index()] = true;
                        stack.push((c, 0));
                    }
                }
            } else {
                order.push(id);
            }
        }
        order
    }

    /// Drop nodes unreachable from every output, renumbering the rest. Leaf
    /// ids are preserved so evaluations before and after stay comparable.
    pub fn compact(&mut self) {
        let order = self.topo_from_root();
        let mut remap: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        for (new_idx, old) in order.iter().enumerate() {
            remap[old.index()] = Some(NodeId(new_idx as u32));
        }
        let mut nodes = Vec::with_capacity(order.len());
        for &old in &order {
            let mut node = self.nodes[old.index()].clone();
            for i in &mut node.inputs {
                if let PatternInput::Node(c) = i {
                    *c = remap[c.index()].expect("child of reachable node is reachable");
                }
            }
            nodes.push(node);
        }
        self.key_slots = self
            .key_slots
            .iter()
            .filter_map(|s| remap[s.index()])
            .collect();
        for out in &mut self.outputs {
            *out = remap[out.index()].expect("outputs are reachable");
        }
        self.nodes = nodes;
    }

    /// Evaluate the root over 64 lanes. `leaf_words` assigns every leaf id;
    /// `slot_keys` gives one key bit per entry of [`Pattern::key_slots`].
    pub fn eval_words(&self, leaf_words: &[u64], slot_keys: &[bool]) -> u64 {
        debug_assert_eq!(slot_keys.len(), self.key_slots.len());
        let mut values = vec![0u64; self.nodes.len()];
        for id in self.topo_from_root() {
            let node = &self.nodes[id.index()];
            let arg = |i: &PatternInput| match i {
                PatternInput::Node(c) => values[c.index()],
                PatternInput::Free(l) => leaf_words[l.index()],
            };
            let v = if let Some(slot) = self.key_slots.iter().position(|s| *s == id) {
                let key = if slot_keys[slot] { !0u64 } else { 0 };
                let data = arg(&node.inputs[0]);
                match node.kind {
                    GateKind::Xor => data ^ key,
                    GateKind::Xnor => !(data ^ key),
                    other => unreachable!("key slot of kind {other}"),
                }
            } else {
                node.kind.eval_words(node.inputs.iter().map(arg))
            };
            values[id.index()] = v;
        }
        values[self.root().index()]
    }

    /// Free leaves reachable from the root, deduplicated, in first-use order.
    pub fn reachable_leaves(&self) -> Vec<LeafId> {
        let mut leaves = Vec::new();
        for id in self.topo_from_root() {
            for i in &self.nodes[id.index()].inputs {
                if let PatternInput::Free(l) = i {
                    if !leaves.contains(l) {
                        leaves.push(*l);
                    }
                }
            }
        }
        leaves
    }

    /// Stable identifier of the pattern structure as extracted.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_text());
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Deterministic text rendering, used for fingerprints and debugging.
    pub fn canonical_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let order = self.topo_from_root();
        let pos: HashMap<NodeId, usize> = order.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        for &id in &order {
            let node = &self.nodes[id.index()];
            let slot = if self.is_key_slot(id) { "!" } else { "" };
            write!(out, "n{}={}{}(", pos[&id], slot, node.kind).unwrap();
            for (k, i) in node.inputs.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                match i {
                    PatternInput::Node(c) => write!(out, "n{}", pos[c]).unwrap(),
                    PatternInput::Free(l) => write!(out, "L{}", l.0).unwrap(),
                }
            }
            out.push_str(");");
        }
        let outs: Vec<String> = self.outputs.iter().map(|o| format!("n{}", pos[o])).collect();
        write!(out, "out={}", outs.join(",")).unwrap();
        out
    }
}

/// A pattern extracted from a concrete netlist, remembering where each node
/// and leaf came from.
#[derive(Debug, Clone)]
pub struct Cone {
    pub pattern: Pattern,
    /// Netlist gate behind each pattern node.
    pub origin: Vec<GateId>,
    /// Netlist signal behind each leaf.
    pub leaf_signals: Vec<GateId>,
    pub root_gate: GateId,
    pub layers: u32,
}

impl Cone {
    pub fn contains_key_gate(&self, n: &Netlist) -> bool {
        self.origin.iter().any(|g| n.is_key_gate(*g))
    }
}

/// Extract the plain fan-in cone of `root`: all gates reachable backward
/// within `layers` gate levels (the root is level 1). Deeper signals,
/// primary inputs and DFF outputs become free leaves. Shared signals map to
/// shared nodes or shared leaves.
pub fn fanin_cone(n: &Netlist, root: GateId, layers: u32) -> Cone {
    assert!(layers >= 1, "cone needs at least one layer");
    let mut pattern = Pattern::empty();
    let mut node_of: HashMap<GateId, NodeId> = HashMap::new();
    let mut leaf_of: HashMap<GateId, LeafId> = HashMap::new();
    let mut leaf_signals = Vec::new();

    // BFS by depth so every shared gate is included at its minimum depth
    let mut frontier = vec![root];
    let root_node = pattern.add_node(n.gate(root).kind, Vec::new());
    node_of.insert(root, root_node);
    for depth in 1..=layers {
        let mut next = Vec::new();
        for &g in &frontier {
            let pnode = node_of[&g];
            let mut ports = Vec::new();
            for &src in &n.gate(g).inputs {
                let include = depth < layers && n.gate(src).kind.is_logic();
                let input = if let Some(&existing) = node_of.get(&src) {
                    PatternInput::Node(existing)
                } else if include {
                    let nn = pattern.add_node(n.gate(src).kind, Vec::new());
                    node_of.insert(src, nn);
                    next.push(src);
                    PatternInput::Node(nn)
                } else {
                    let leaf = *leaf_of.entry(src).or_insert_with(|| {
                        let l = pattern.new_leaf();
                        leaf_signals.push(src);
                        l
                    });
                    PatternInput::Free(leaf)
                };
                ports.push(input);
            }
            pattern.node_mut(pnode).inputs = ports;
        }
        frontier = next;
    }

    // a signal both included as a node and referenced as a leaf elsewhere:
    // the leaf reference must point at the node for self-matching to hold
    for (sig, leaf) in leaf_of.iter() {
        if let Some(&nn) = node_of.get(sig) {
            pattern.replace_refs(PatternInput::Free(*leaf), PatternInput::Node(nn));
        }
    }
    pattern.set_root(root_node);
    pattern.compact();
    // compact renumbers nodes; rebuild the origin map in the new order
    let mut new_origin = vec![root; pattern.num_nodes()];
    rebuild_origin(&pattern, n, root, &mut new_origin);
    Cone {
        pattern,
        origin: new_origin,
        leaf_signals,
        root_gate: root,
        layers,
    }
}

fn rebuild_origin(pattern: &Pattern, n: &Netlist, root: GateId, origin: &mut [GateId]) {
    // walk pattern and netlist in lockstep from the root
    fn walk(
        pattern: &Pattern,
        n: &Netlist,
        pnode: NodeId,
        gate: GateId,
        origin: &mut [GateId],
        seen: &mut [bool],
    ) {
        if seen[pnode.index()] {
            return;
        }
        seen[pnode.index()] = true;
        origin[pnode.index()] = gate;
        let node = pattern.node(pnode);
        debug_assert_eq!(node.kind, n.gate(gate).kind);
        debug_assert_eq!(node.inputs.len(), n.gate(gate).inputs.len());
        for (i, inp) in node.inputs.iter().enumerate() {
            if let PatternInput::Node(c) = inp {
                walk(pattern, n, *c, n.gate(gate).inputs[i], origin, seen);
            }
        }
    }
    let mut seen = vec![false; pattern.num_nodes()];
    walk(pattern, n, pattern.root(), root, origin, &mut seen);
}
