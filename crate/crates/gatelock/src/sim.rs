//! Logic simulation and simulation-based equivalence checking.
//!
//! The evaluator runs 64 vectors per pass (one bit lane each). Sources of
//! the combinational core are the primary inputs plus DFF outputs; DFF data
//! inputs are readable as pseudo primary outputs after evaluation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::netlist::{GateId, GateKind, Netlist};

/// A single-vector assignment: data inputs (plus DFF pseudo-inputs) and key
/// inputs, kept separate.
#[derive(Debug, Clone, Default)]
pub struct SimVector {
    pub inputs: HashMap<GateId, bool>,
    pub keys: HashMap<GateId, bool>,
}

impl SimVector {
    pub fn get(&self, id: GateId) -> Option<bool> {
        self.inputs.get(&id).or_else(|| self.keys.get(&id)).copied()
    }
}

/// Reusable word-parallel evaluator over one netlist.
pub struct Evaluator<'a> {
    netlist: &'a Netlist,
    order: Vec<GateId>,
    sources: Vec<GateId>,
}

impl<'a> Evaluator<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<Evaluator<'a>> {
        let order = netlist.topo_order()?;
        let mut sources: Vec<GateId> = netlist.primary_inputs().to_vec();
        sources.extend_from_slice(netlist.dffs());
        Ok(Evaluator {
            netlist,
            order,
            sources,
        })
    }

    /// Sources of the combinational core: primary inputs then DFF outputs.
    pub fn sources(&self) -> &[GateId] {
        &self.sources
    }

    /// Evaluate one 64-lane pass. `preset` supplies a word per source gate;
    /// `values` is resized to one word per gate.
    pub fn eval_words(&self, mut preset: impl FnMut(GateId) -> u64, values: &mut Vec<u64>) {
        values.clear();
        values.resize(self.netlist.len(), 0);
        for &id in &self.sources {
            values[id.index()] = preset(id);
        }
        for &id in &self.order {
            let g = self.netlist.gate(id);
            if matches!(g.kind, GateKind::Input | GateKind::Dff) {
                continue;
            }
            values[id.index()] = g.kind.eval_words(g.inputs.iter().map(|i| values[i.index()]));
        }
    }
}

/// Evaluate the netlist on one total assignment; returns primary output
/// values in declaration order.
pub fn simulate(netlist: &Netlist, v: &SimVector) -> Result<Vec<bool>> {
    let ev = Evaluator::new(netlist)?;
    for &src in ev.sources() {
        if v.get(src).is_none() {
            return Err(Error::MissingAssignment {
                signal: netlist.name(src).to_string(),
            });
        }
    }
    let mut values = Vec::new();
    ev.eval_words(
        |id| if v.get(id) == Some(true) { !0u64 } else { 0 },
        &mut values,
    );
    Ok(netlist
        .primary_outputs()
        .iter()
        .map(|po| values[po.index()] & 1 == 1)
        .collect())
}

/// How input vectors for an equivalence sweep are produced.
enum Drive {
    /// All 2^k assignments over k free sources.
    Exhaustive { bits: usize },
    /// Seeded random vectors.
    Random { vectors: usize, rng: Box<ChaCha20Rng> },
}

/// Source words for free (non-key) sources, identical across netlists that
/// share source names.
struct DriveState {
    drive: Drive,
    block: usize,
}

impl DriveState {
    fn lanes_in_block(&self) -> Option<usize> {
        match &self.drive {
            Drive::Exhaustive { bits } => {
                let total = 1usize << bits;
                let done = self.block * 64;
                if done >= total {
                    None
                } else {
                    Some((total - done).min(64))
                }
            }
            Drive::Random { vectors, .. } => {
                let done = self.block * 64;
                if done >= *vectors {
                    None
                } else {
                    Some((vectors - done).min(64))
                }
            }
        }
    }

    /// Word for free source number `i` in the current block.
    fn word(&mut self, i: usize) -> u64 {
        match &mut self.drive {
            Drive::Exhaustive { .. } => {
                // lane l of block b encodes assignment index b*64 + l
                if i < 6 {
                    // alternating pattern within a word
                    let mut w = 0u64;
                    for lane in 0..64u64 {
                        if (lane >> i) & 1 == 1 {
                            w |= 1 << lane;
                        }
                    }
                    w
                } else if (self.block >> (i - 6)) & 1 == 1 {
                    !0
                } else {
                    0
                }
            }
            Drive::Random { rng, .. } => rng.gen(),
        }
    }
}

/// Outcome of an equivalence sweep.
#[derive(Debug, Clone)]
pub enum EquivOutcome {
    Equivalent { vectors_checked: usize },
    Mismatch(Counterexample),
}

impl EquivOutcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivOutcome::Equivalent { .. })
    }
}

/// First diverging vector found by an equivalence sweep.
#[derive(Debug, Clone)]
pub struct Counterexample {
    /// Free-source assignment, by signal name.
    pub assignment: Vec<(String, bool)>,
    pub output: String,
    pub lhs: bool,
    pub rhs: bool,
}

/// Compare `lhs` against `rhs` by simulation. `rhs_keys` assigns the key
/// inputs of `rhs` by name (lhs key inputs, if any, must be covered too).
/// Exhaustive when the shared free sources number at most
/// `exhaustive_limit` bits, otherwise `vectors` seeded random vectors.
pub fn check_equivalence(
    lhs: &Netlist,
    rhs: &Netlist,
    rhs_keys: &HashMap<String, bool>,
    vectors: usize,
    seed: u64,
    exhaustive_limit: usize,
) -> Result<EquivOutcome> {
    let lhs_ev = Evaluator::new(lhs)?;
    let rhs_ev = Evaluator::new(rhs)?;

    // free sources = non-key sources, matched by name
    let mut free_names: Vec<String> = Vec::new();
    for &s in lhs_ev.sources() {
        if !lhs.is_key_input(s) {
            free_names.push(lhs.name(s).to_string());
        }
    }
    for name in &free_names {
        if rhs.lookup(name).is_none() {
            return Err(Error::InterfaceMismatch {
                kind: "input",
                name: name.clone(),
            });
        }
    }
    for &s in rhs_ev.sources() {
        let name = rhs.name(s);
        if !rhs.is_key_input(s) && !free_names.iter().any(|f| f == name) {
            return Err(Error::InterfaceMismatch {
                kind: "input",
                name: name.to_string(),
            });
        }
    }
    free_names.sort();

    // primary outputs matched by name
    let mut out_names: Vec<String> = lhs
        .primary_outputs()
        .iter()
        .map(|&po| lhs.name(po).to_string())
        .collect();
    if rhs.primary_outputs().len() != out_names.len() {
        return Err(Error::InterfaceMismatch {
            kind: "output",
            name: format!(
                "{} vs {} outputs",
                out_names.len(),
                rhs.primary_outputs().len()
            ),
        });
    }
    for &po in rhs.primary_outputs() {
        if !out_names.iter().any(|o| o == rhs.name(po)) {
            return Err(Error::InterfaceMismatch {
                kind: "output",
                name: rhs.name(po).to_string(),
            });
        }
    }
    out_names.sort();

    let key_word = |n: &Netlist, id: GateId| -> Result<u64> {
        match rhs_keys.get(n.name(id)) {
            Some(true) => Ok(!0u64),
            Some(false) => Ok(0),
            None => Err(Error::MissingAssignment {
                signal: n.name(id).to_string(),
            }),
        }
    };

    let drive = if free_names.len() <= exhaustive_limit {
        Drive::Exhaustive {
            bits: free_names.len(),
        }
    } else {
        Drive::Random {
            vectors,
            rng: Box::new(ChaCha20Rng::seed_from_u64(seed)),
        }
    };
    let mut state = DriveState { drive, block: 0 };

    let mut lhs_vals = Vec::new();
    let mut rhs_vals = Vec::new();
    let mut checked = 0usize;
    while let Some(lanes) = state.lanes_in_block() {
        let mut words: HashMap<&str, u64> = HashMap::new();
        for (i, name) in free_names.iter().enumerate() {
            words.insert(name.as_str(), state.word(i));
        }
        // presets fall back to key assignments, which were validated lazily
        let mut key_err: Option<Error> = None;
        lhs_ev.eval_words(
            |id| {
                if let Some(w) = words.get(lhs.name(id)) {
                    *w
                } else {
                    match key_word(lhs, id) {
                        Ok(w) => w,
                        Err(e) => {
                            key_err.get_or_insert(e);
                            0
                        }
                    }
                }
            },
            &mut lhs_vals,
        );
        if let Some(e) = key_err {
            return Err(e);
        }
        let mut key_err: Option<Error> = None;
        rhs_ev.eval_words(
            |id| {
                if let Some(w) = words.get(rhs.name(id)) {
                    *w
                } else {
                    match key_word(rhs, id) {
                        Ok(w) => w,
                        Err(e) => {
                            key_err.get_or_insert(e);
                            0
                        }
                    }
                }
            },
            &mut rhs_vals,
        );
        if let Some(e) = key_err {
            return Err(e);
        }

        let mask = if lanes == 64 { !0u64 } else { (1u64 << lanes) - 1 };
        for name in &out_names {
            let l = lhs_vals[lhs.lookup(name).expect("validated").index()];
            let r = rhs_vals[rhs.lookup(name).expect("validated").index()];
            let diff = (l ^ r) & mask;
            if diff != 0 {
                let lane = diff.trailing_zeros() as u64;
                let assignment = free_names
                    .iter()
                    .map(|f| (f.clone(), (words[f.as_str()] >> lane) & 1 == 1))
                    .collect();
                return Ok(EquivOutcome::Mismatch(Counterexample {
                    assignment,
                    output: name.clone(),
                    lhs: (l >> lane) & 1 == 1,
                    rhs: (r >> lane) & 1 == 1,
                }));
            }
        }
        checked += lanes;
        state.block += 1;
    }
    Ok(EquivOutcome::Equivalent {
        vectors_checked: checked,
    })
}
