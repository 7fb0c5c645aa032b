//! Gate-level netlist intermediate representation.
//!
//! A netlist is a directed graph of typed gates. Every signal is the output
//! of exactly one gate (primary inputs are gates of kind [`GateKind::Input`]),
//! so signals and gates share one id space. Primary outputs are markers over
//! existing signals, not gates of their own.
//!
//! Sequential elements are cut at DFF boundaries: a DFF output acts as a
//! pseudo primary input and its data input as a pseudo primary output, which
//! leaves an acyclic combinational core that all analyses operate on.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a gate (and of the signal it drives) within one [`Netlist`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateId(pub u32);

impl GateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Boolean function of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Input,
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Dff,
}

pub const GATE_KIND_COUNT: usize = 10;

impl GateKind {
    pub const ALL: [GateKind; GATE_KIND_COUNT] = [
        GateKind::Input,
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Buf,
        GateKind::Dff,
    ];

    #[inline]
    pub fn as_index(self) -> usize {
        match self {
            GateKind::Input => 0,
            GateKind::And => 1,
            GateKind::Nand => 2,
            GateKind::Or => 3,
            GateKind::Nor => 4,
            GateKind::Xor => 5,
            GateKind::Xnor => 6,
            GateKind::Not => 7,
            GateKind::Buf => 8,
            GateKind::Dff => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Input => "INPUT",
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::Dff => "DFF",
        }
    }

    /// Parse a `.bench` gate keyword (case-insensitive). `BUFF` is accepted
    /// as an alias seen in ITC'99 distributions.
    pub fn from_keyword(kw: &str) -> Option<GateKind> {
        match kw.to_ascii_uppercase().as_str() {
            "AND" => Some(GateKind::And),
            "NAND" => Some(GateKind::Nand),
            "OR" => Some(GateKind::Or),
            "NOR" => Some(GateKind::Nor),
            "XOR" => Some(GateKind::Xor),
            "XNOR" => Some(GateKind::Xnor),
            "NOT" | "INV" => Some(GateKind::Not),
            "BUF" | "BUFF" => Some(GateKind::Buf),
            "DFF" => Some(GateKind::Dff),
            _ => None,
        }
    }

    /// `(min, max)` legal input count.
    pub fn arity(self) -> (usize, usize) {
        match self {
            GateKind::Input => (0, 0),
            GateKind::Not | GateKind::Buf | GateKind::Dff => (1, 1),
            _ => (2, usize::MAX),
        }
    }

    pub fn arity_text(self) -> &'static str {
        match self {
            GateKind::Input => "no inputs",
            GateKind::Not | GateKind::Buf | GateKind::Dff => "exactly 1 input",
            _ => "at least 2 inputs",
        }
    }

    /// Gate computing the complement: AND<->NAND, OR<->NOR, XOR<->XNOR,
    /// NOT<->BUF. `None` for inputs and DFFs.
    pub fn complement(self) -> Option<GateKind> {
        match self {
            GateKind::And => Some(GateKind::Nand),
            GateKind::Nand => Some(GateKind::And),
            GateKind::Or => Some(GateKind::Nor),
            GateKind::Nor => Some(GateKind::Or),
            GateKind::Xor => Some(GateKind::Xnor),
            GateKind::Xnor => Some(GateKind::Xor),
            GateKind::Not => Some(GateKind::Buf),
            GateKind::Buf => Some(GateKind::Not),
            GateKind::Input | GateKind::Dff => None,
        }
    }

    /// Dual used when an inverted input is absorbed into this gate:
    /// `g(!x, o...) = dual(g)(x, !o...)`. XOR/XNOR are excluded because an
    /// input complement there is plain type flip, not a dual rewrite.
    pub fn demorgan_dual(self) -> Option<GateKind> {
        match self {
            GateKind::And => Some(GateKind::Nor),
            GateKind::Nor => Some(GateKind::And),
            GateKind::Nand => Some(GateKind::Or),
            GateKind::Or => Some(GateKind::Nand),
            GateKind::Not => Some(GateKind::Buf),
            GateKind::Buf => Some(GateKind::Not),
            _ => None,
        }
    }

    /// True for the combinational logic kinds (everything except inputs and
    /// DFF boundaries).
    pub fn is_logic(self) -> bool {
        !matches!(self, GateKind::Input | GateKind::Dff)
    }

    /// Evaluate over 64 parallel simulation lanes.
    #[inline]
    pub fn eval_words(self, inputs: impl Iterator<Item = u64>) -> u64 {
        match self {
            GateKind::And | GateKind::Nand => {
                let v = inputs.fold(!0u64, |a, b| a & b);
                if self == GateKind::Nand {
                    !v
                } else {
                    v
                }
            }
            GateKind::Or | GateKind::Nor => {
                let v = inputs.fold(0u64, |a, b| a | b);
                if self == GateKind::Nor {
                    !v
                } else {
                    v
                }
            }
            GateKind::Xor | GateKind::Xnor => {
                let v = inputs.fold(0u64, |a, b| a ^ b);
                if self == GateKind::Xnor {
                    !v
                } else {
                    v
                }
            }
            GateKind::Not => !inputs.fold(0u64, |a, b| a | b),
            GateKind::Buf => inputs.fold(0u64, |a, b| a | b),
            // Inputs and DFF outputs are preset by the simulator; this is
            // only reached when evaluating a DFF as a cut boundary.
            GateKind::Input | GateKind::Dff => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate; `inputs` is ordered, `fanouts` is the derived multiset inverse
/// of `inputs` over the whole netlist (one entry per use).
#[derive(Debug, Clone)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<GateId>,
    pub fanouts: Vec<GateId>,
}

/// Prefix that classifies a primary input as a key input.
pub const KEY_INPUT_PREFIX: &str = "keyinput";

/// A gate-level netlist with derived indexes kept consistent across
/// mutations.
#[derive(Debug, Clone, Default)]
pub struct Netlist {
    gates: Vec<Gate>,
    by_name: HashMap<String, GateId>,
    primary_inputs: Vec<GateId>,
    primary_outputs: Vec<GateId>,
    key_inputs: Vec<GateId>,
    type_index: [Vec<GateId>; GATE_KIND_COUNT],
    key_gate: Vec<bool>,
}

impl Netlist {
    pub fn new() -> Netlist {
        Netlist::default()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Number of logic gates (excludes primary inputs).
    pub fn num_logic_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.kind != GateKind::Input).count()
    }

    #[inline]
    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.index()]
    }

    #[inline]
    pub fn name(&self, id: GateId) -> &str {
        &self.gates[id.index()].name
    }

    pub fn ids(&self) -> impl Iterator<Item = GateId> + '_ {
        (0..self.gates.len() as u32).map(GateId)
    }

    pub fn lookup(&self, name: &str) -> Option<GateId> {
        self.by_name.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<GateId> {
        self.lookup(name).ok_or_else(|| Error::NoSuchSignal {
            signal: name.to_string(),
        })
    }

    pub fn primary_inputs(&self) -> &[GateId] {
        &self.primary_inputs
    }

    pub fn primary_outputs(&self) -> &[GateId] {
        &self.primary_outputs
    }

    pub fn key_inputs(&self) -> &[GateId] {
        &self.key_inputs
    }

    /// Primary inputs that are not key inputs.
    pub fn data_inputs(&self) -> Vec<GateId> {
        self.primary_inputs
            .iter()
            .copied()
            .filter(|id| !self.gate(*id).name.starts_with(KEY_INPUT_PREFIX))
            .collect()
    }

    pub fn gates_of_kind(&self, kind: GateKind) -> &[GateId] {
        &self.type_index[kind.as_index()]
    }

    /// DFF gates; their outputs are pseudo primary inputs of the
    /// combinational core.
    pub fn dffs(&self) -> &[GateId] {
        self.gates_of_kind(GateKind::Dff)
    }

    /// True if `id` is an XOR/XNOR gate directly driven by a key input.
    #[inline]
    pub fn is_key_gate(&self, id: GateId) -> bool {
        self.key_gate[id.index()]
    }

    /// True if `id` sits in the one-gate perimeter of a key gate: it is one,
    /// drives one, or consumes one. Key-gate locations are attacker-visible,
    /// and locking may have flipped the types of the gates next to them, so
    /// the structural search treats the whole perimeter as unreliable.
    pub fn in_lock_perimeter(&self, id: GateId) -> bool {
        if self.key_gate[id.index()] {
            return true;
        }
        let g = self.gate(id);
        g.inputs.iter().any(|&s| self.key_gate[s.index()])
            || g.fanouts.iter().any(|&c| self.key_gate[c.index()])
    }

    /// Key gates driven by the given key input, sorted by id.
    pub fn key_gates_of(&self, key_input: GateId) -> Vec<GateId> {
        let mut v: Vec<GateId> = self
            .gate(key_input)
            .fanouts
            .iter()
            .copied()
            .filter(|g| self.is_key_gate(*g))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The non-key-input data signal feeding a key gate.
    pub fn key_gate_data_input(&self, key_gate: GateId) -> Option<GateId> {
        self.gate(key_gate)
            .inputs
            .iter()
            .copied()
            .find(|s| !self.is_key_input(*s))
    }

    pub fn is_key_input(&self, id: GateId) -> bool {
        self.gate(id).kind == GateKind::Input && self.gate(id).name.starts_with(KEY_INPUT_PREFIX)
    }

    pub fn is_primary_output(&self, id: GateId) -> bool {
        self.primary_outputs.contains(&id)
    }

    // ---- construction and mutation ------------------------------------

    pub fn add_input(&mut self, name: &str) -> Result<GateId> {
        let id = self.push_gate(name, GateKind::Input, Vec::new())?;
        self.primary_inputs.push(id);
        if name.starts_with(KEY_INPUT_PREFIX) {
            self.key_inputs.push(id);
        }
        Ok(id)
    }

    pub fn add_gate(&mut self, name: &str, kind: GateKind, inputs: Vec<GateId>) -> Result<GateId> {
        debug_assert!(kind != GateKind::Input, "use add_input for primary inputs");
        let (min, max) = kind.arity();
        if inputs.len() < min || inputs.len() > max {
            return Err(Error::Arity {
                line: 0,
                signal: name.to_string(),
                kind: kind.name().to_string(),
                expected: kind.arity_text(),
                got: inputs.len(),
            });
        }
        let id = self.push_gate(name, kind, inputs)?;
        for k in 0..self.gates[id.index()].inputs.len() {
            let src = self.gates[id.index()].inputs[k];
            self.gates[src.index()].fanouts.push(id);
        }
        self.refresh_key_gate(id);
        Ok(id)
    }

    /// Create a gate whose inputs are supplied later via [`Netlist::wire_gate`].
    /// The parser uses this pair to resolve forward references.
    pub(crate) fn declare_gate(&mut self, name: &str, kind: GateKind) -> Result<GateId> {
        debug_assert!(kind != GateKind::Input);
        self.push_gate(name, kind, Vec::new())
    }

    pub(crate) fn wire_gate(&mut self, id: GateId, inputs: Vec<GateId>) {
        debug_assert!(self.gates[id.index()].inputs.is_empty());
        self.gates[id.index()].inputs = inputs;
        for k in 0..self.gates[id.index()].inputs.len() {
            let src = self.gates[id.index()].inputs[k];
            self.gates[src.index()].fanouts.push(id);
        }
        self.refresh_key_gate(id);
    }

    fn push_gate(&mut self, name: &str, kind: GateKind, inputs: Vec<GateId>) -> Result<GateId> {
        if self.by_name.contains_key(name) {
            return Err(Error::NameCollision {
                signal: name.to_string(),
            });
        }
        let id = GateId(self.gates.len() as u32);
        self.gates.push(Gate {
            name: name.to_string(),
            kind,
            inputs,
            fanouts: Vec::new(),
        });
        self.by_name.insert(name.to_string(), id);
        self.type_index[kind.as_index()].push(id);
        self.key_gate.push(false);
        Ok(id)
    }

    pub fn mark_output(&mut self, id: GateId) {
        if !self.primary_outputs.contains(&id) {
            self.primary_outputs.push(id);
        }
    }

    /// Change a gate's kind, keeping all indexes consistent.
    pub fn set_kind(&mut self, id: GateId, kind: GateKind) {
        let old = self.gates[id.index()].kind;
        if old == kind {
            return;
        }
        let bucket = &mut self.type_index[old.as_index()];
        bucket.retain(|g| *g != id);
        self.gates[id.index()].kind = kind;
        self.type_index[kind.as_index()].push(id);
        self.refresh_key_gate(id);
    }

    /// Re-point every consumer of `old` (except those in `keep`) at `new`.
    /// Fanout lists of `old`, `new` and all consumers stay consistent.
    pub fn redirect_consumers(&mut self, old: GateId, new: GateId, keep: &[GateId]) {
        let consumers: Vec<GateId> = self.gates[old.index()]
            .fanouts
            .iter()
            .copied()
            .filter(|c| !keep.contains(c))
            .collect();
        for c in &consumers {
            for inp in self.gates[c.index()].inputs.iter_mut() {
                if *inp == old {
                    *inp = new;
                }
            }
        }
        self.gates[old.index()].fanouts.retain(|c| keep.contains(c));
        self.gates[new.index()].fanouts.extend(consumers);
        // consumers may have become or stopped being key gates
        let touched: Vec<GateId> = self.gates[new.index()].fanouts.clone();
        for c in touched {
            self.refresh_key_gate(c);
        }
    }

    /// Re-point one input port of `gate` from `old` to `new`.
    pub fn replace_input(&mut self, gate: GateId, port: usize, new: GateId) {
        let old = self.gates[gate.index()].inputs[port];
        if old == new {
            return;
        }
        self.gates[gate.index()].inputs[port] = new;
        let fo = &mut self.gates[old.index()].fanouts;
        if let Some(pos) = fo.iter().position(|c| *c == gate) {
            fo.swap_remove(pos);
        }
        self.gates[new.index()].fanouts.push(gate);
        self.refresh_key_gate(gate);
    }

    fn refresh_key_gate(&mut self, id: GateId) {
        let g = &self.gates[id.index()];
        let is_kg = matches!(g.kind, GateKind::Xor | GateKind::Xnor)
            && g.inputs.iter().any(|s| self.is_key_input(*s));
        self.key_gate[id.index()] = is_kg;
    }

    /// Next free index for a `keyinput<i>` name.
    pub fn next_key_index(&self) -> usize {
        self.key_inputs
            .iter()
            .filter_map(|id| self.name(*id)[KEY_INPUT_PREFIX.len()..].parse::<usize>().ok())
            .map(|i| i + 1)
            .max()
            .unwrap_or(0)
    }

    // ---- analysis ------------------------------------------------------

    /// Topological order of the combinational core. Inputs and DFF outputs
    /// come first; a DFF's data input does not order the DFF itself.
    pub fn topo_order(&self) -> Result<Vec<GateId>> {
        let n = self.gates.len();
        let mut indegree = vec![0u32; n];
        for id in self.ids() {
            let g = self.gate(id);
            if matches!(g.kind, GateKind::Input | GateKind::Dff) {
                continue;
            }
            indegree[id.index()] = g.inputs.len() as u32;
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: Vec<GateId> = self
            .ids()
            .filter(|id| indegree[id.index()] == 0)
            .collect();
        while let Some(id) = ready.pop() {
            order.push(id);
            for &c in &self.gate(id).fanouts {
                if matches!(self.gate(c).kind, GateKind::Input | GateKind::Dff) {
                    continue;
                }
                indegree[c.index()] -= 1;
                if indegree[c.index()] == 0 {
                    ready.push(c);
                }
            }
        }
        if order.len() != n {
            let stuck = self
                .ids()
                .find(|id| indegree[id.index()] > 0)
                .expect("some gate must be unprocessed");
            return Err(Error::CombinationalCycle {
                signal: self.name(stuck).to_string(),
            });
        }
        Ok(order)
    }

    /// Check every structural invariant; returns a description of the first
    /// violation. Used by tests after each mutation-heavy operation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        // name map bijective
        if self.by_name.len() != self.gates.len() {
            return Err("name map size differs from gate count".into());
        }
        for id in self.ids() {
            if self.by_name.get(&self.gate(id).name) != Some(&id) {
                return Err(format!("name map entry wrong for `{}`", self.name(id)));
            }
        }
        // fanouts are exactly the inverse multiset of inputs
        let mut expect: HashMap<(GateId, GateId), i64> = HashMap::new();
        for id in self.ids() {
            for &src in &self.gate(id).inputs {
                if src.index() >= self.gates.len() {
                    return Err(format!("`{}` references a nonexistent gate", self.name(id)));
                }
                *expect.entry((src, id)).or_insert(0) += 1;
            }
        }
        for id in self.ids() {
            for &c in &self.gate(id).fanouts {
                let e = expect.entry((id, c)).or_insert(0);
                *e -= 1;
            }
        }
        if let Some(((src, dst), k)) = expect.iter().find(|(_, k)| **k != 0) {
            return Err(format!(
                "fanout inconsistency between `{}` and `{}` ({k:+})",
                self.name(*src),
                self.name(*dst)
            ));
        }
        // type index consistent
        let mut seen = 0usize;
        for kind in GateKind::ALL {
            for &id in self.gates_of_kind(kind) {
                if self.gate(id).kind != kind {
                    return Err(format!("type index lists `{}` under {kind}", self.name(id)));
                }
                seen += 1;
            }
        }
        if seen != self.gates.len() {
            return Err("type index does not cover every gate".into());
        }
        // arity
        for id in self.ids() {
            let g = self.gate(id);
            let (min, max) = g.kind.arity();
            if g.inputs.len() < min || g.inputs.len() > max {
                return Err(format!("`{}` violates {} arity", g.name, g.kind));
            }
        }
        // key classification
        for &k in &self.key_inputs {
            if !self.primary_inputs.contains(&k) {
                return Err(format!("key input `{}` is not a primary input", self.name(k)));
            }
        }
        for id in self.ids() {
            let g = self.gate(id);
            let is_kg = matches!(g.kind, GateKind::Xor | GateKind::Xnor)
                && g.inputs.iter().any(|s| self.is_key_input(*s));
            if is_kg != self.key_gate[id.index()] {
                return Err(format!("stale key-gate flag on `{}`", g.name));
            }
        }
        // acyclic
        if let Err(e) = self.topo_order() {
            return Err(e.to_string());
        }
        Ok(())
    }
}
