//! Oracle-less key recovery by self-referencing structural search.
//!
//! For every key input, in index order: extract the unit function around
//! each of its key gates, generate all hypothesis rewrites, and count their
//! instances elsewhere in the netlist. Exactly one hypothesis with matches
//! decides the key bits of the whole unit function; several candidate
//! hypotheses widen the cone by one layer and retry, as does an all-zero
//! table below the layer bound, because a successor rewrite reaches one
//! level past the cone and can only line up once that level is included.
//! A unit function with no matches at the widest cone stays unknown. A key
//! gate driving a fanout net is attacked once per successor path and the
//! per-path predictions must not contradict each other.
//!
//! The attack consumes the bare netlist: ground truth never enters this
//! module. Scoring against a key file lives behind a separate entry point
//! used by the harness after the report exists.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euf::{extract_uf_rooted, gen_eufs, uf_roots, HypothesisTable};
use crate::matcher::fs;
use crate::netlist::{GateId, Netlist};

#[derive(Debug, Clone)]
pub struct AttackOptions {
    /// Widest cone tried before an ambiguous key is given up as unknown.
    pub max_layers: u32,
    /// Reserved for seeded extensions; the search itself is deterministic.
    pub seed: u64,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            max_layers: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyValue {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "X")]
    Unknown,
}

impl KeyValue {
    pub fn from_bit(b: bool) -> KeyValue {
        if b {
            KeyValue::One
        } else {
            KeyValue::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            KeyValue::Zero => Some(false),
            KeyValue::One => Some(true),
            KeyValue::Unknown => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            KeyValue::Zero => '0',
            KeyValue::One => '1',
            KeyValue::Unknown => 'X',
        }
    }
}

/// Final match-count table of the deciding (or last) layer, for
/// diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisSnapshot {
    /// Key inputs behind each hypothesis bit position.
    pub key_inputs: Vec<String>,
    /// Hypotheses as bit strings, position 0 first.
    pub combos: Vec<String>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyPrediction {
    pub key_input: String,
    pub value: KeyValue,
    pub layers_used: u32,
    pub via_fv: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<HypothesisSnapshot>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub predictions: Vec<KeyPrediction>,
    /// Percentage of key inputs with a definite prediction.
    pub sr: f64,
    /// Filled by scoring when ground truth is available; absent from the
    /// attack itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mr: Option<f64>,
    pub wall_time_secs: f64,
    pub per_key_secs: Vec<f64>,
}

impl AttackReport {
    /// `keyinput<i>=<0|1|X>` lines.
    pub fn predictions_text(&self) -> String {
        let mut out = String::new();
        for p in &self.predictions {
            out.push_str(&format!("{}={}\n", p.key_input, p.value.symbol()));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn definite(&self) -> usize {
        self.predictions
            .iter()
            .filter(|p| p.value != KeyValue::Unknown)
            .count()
    }
}

/// Outcome of [`decide`] over one hypothesis table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// Exactly one hypothesis had matches.
    Decide(usize),
    /// No hypothesis matched: the unit function is unique here.
    Unknown,
    /// Several hypotheses matched: widen the cone and retry.
    Escalate,
}

/// The decision rule over accumulated match counts.
pub fn decide(table: &HypothesisTable) -> Decision {
    match table.nonzero() {
        1 => Decision::Decide(
            table
                .counts
                .iter()
                .position(|c| *c > 0)
                .expect("one nonzero count"),
        ),
        0 => Decision::Unknown,
        _ => Decision::Escalate,
    }
}

enum PathOutcome {
    /// Bits per key gate of the deciding unit function.
    Decided {
        bits: Vec<(GateId, bool)>,
        layers: u32,
        snapshot: HypothesisSnapshot,
    },
    /// All counts zero (or ambiguity never resolved). The unknown applies
    /// to the keys of the narrowest cone tried: wider cones picked up
    /// during escalation may hold neighbors that can still decide on their
    /// own turns.
    Undecided {
        key_gates: Vec<GateId>,
        layers: u32,
        snapshot: Option<HypothesisSnapshot>,
    },
}

/// Run the unit-function pipeline for one successor path of one key gate,
/// escalating layers on ambiguity.
fn attack_path(
    n: &Netlist,
    root: GateId,
    exclude: &HashSet<GateId>,
    max_layers: u32,
) -> PathOutcome {
    let mut narrowest: Option<Vec<GateId>> = None;
    let mut last: Option<(u32, HypothesisSnapshot)> = None;
    for layers in 1..=max_layers {
        let uf = extract_uf_rooted(n, root, layers);
        let set = gen_eufs(&uf);
        let j = uf.key_gates.len();
        let mut table = HypothesisTable::new(j);
        for euf in &set.eufs {
            let idx = HypothesisTable::index_of(&euf.hypothesis);
            table.counts[idx] += fs(n, &euf.pattern, exclude).len() as u64;
        }
        let snapshot = snapshot_of(n, &uf.key_gates, &table);
        match decide(&table) {
            Decision::Decide(idx) => {
                let combo = table.combos[idx].clone();
                return PathOutcome::Decided {
                    bits: uf.key_gates.iter().copied().zip(combo).collect(),
                    layers,
                    snapshot,
                };
            }
            Decision::Unknown | Decision::Escalate => {
                if narrowest.is_none() {
                    narrowest = Some(uf.key_gates);
                }
                last = Some((layers, snapshot));
            }
        }
    }
    let (layers, snapshot) = last.expect("at least one layer ran");
    PathOutcome::Undecided {
        key_gates: narrowest.expect("at least one layer ran"),
        layers,
        snapshot: Some(snapshot),
    }
}

fn snapshot_of(n: &Netlist, key_gates: &[GateId], table: &HypothesisTable) -> HypothesisSnapshot {
    HypothesisSnapshot {
        key_inputs: key_gates
            .iter()
            .map(|kg| key_input_name(n, *kg))
            .collect(),
        combos: table
            .combos
            .iter()
            .map(|c| c.iter().map(|b| if *b { '1' } else { '0' }).collect())
            .collect(),
        counts: table.counts.clone(),
    }
}

fn key_input_name(n: &Netlist, key_gate: GateId) -> String {
    n.gate(key_gate)
        .inputs
        .iter()
        .copied()
        .find(|s| n.is_key_input(*s))
        .map(|s| n.name(s).to_string())
        .unwrap_or_default()
}

fn key_input_id(n: &Netlist, key_gate: GateId) -> Option<GateId> {
    n.gate(key_gate)
        .inputs
        .iter()
        .copied()
        .find(|s| n.is_key_input(*s))
}

/// Key inputs ordered by numeric suffix, then name.
pub fn ordered_key_inputs(n: &Netlist) -> Vec<GateId> {
    let mut keys: Vec<GateId> = n.key_inputs().to_vec();
    keys.sort_by_key(|id| {
        let name = n.name(*id);
        let idx: Option<usize> = name
            .strip_prefix(crate::netlist::KEY_INPUT_PREFIX)
            .and_then(|s| s.parse().ok());
        (idx.is_none(), idx, name.to_string())
    });
    keys
}

/// Final value the attack would assign to one key input, ignoring
/// interactions with other turns. The countermeasure uses this as its
/// self-check when placing families.
pub fn attack_key_input(n: &Netlist, ki: GateId, opts: &AttackOptions) -> KeyValue {
    let gates = n.key_gates_of(ki);
    let mut votes: Vec<KeyValue> = Vec::new();
    for kg in gates {
        let Ok(roots) = uf_roots(n, kg) else { continue };
        let family: HashSet<GateId> = roots.iter().copied().collect();
        for root in roots {
            match attack_path(n, root, &family, opts.max_layers) {
                PathOutcome::Decided { bits, .. } => {
                    for (slot, bit) in bits {
                        if key_input_id(n, slot) == Some(ki) {
                            votes.push(KeyValue::from_bit(bit));
                        }
                    }
                }
                PathOutcome::Undecided { .. } => votes.push(KeyValue::Unknown),
            }
        }
    }
    let mut bits: Vec<bool> = votes.iter().filter_map(|v| v.bit()).collect();
    bits.dedup();
    match bits.as_slice() {
        [] => KeyValue::Unknown,
        [b] => KeyValue::from_bit(*b),
        _ => KeyValue::Unknown,
    }
}

/// Recover the key of a locked netlist by structural search alone.
pub fn run_attack(n: &Netlist, opts: &AttackOptions) -> AttackReport {
    let started = Instant::now();
    let key_inputs = ordered_key_inputs(n);
    let mut value_of: HashMap<GateId, KeyValue> = HashMap::new();
    let mut meta: HashMap<GateId, (u32, bool, Option<HypothesisSnapshot>)> = HashMap::new();
    let mut per_key_secs = vec![0.0f64; key_inputs.len()];

    for (ki_pos, &ki) in key_inputs.iter().enumerate() {
        let turn = Instant::now();
        if value_of.contains_key(&ki) {
            // fixed by an earlier multi-key unit function; never overwritten
            per_key_secs[ki_pos] = turn.elapsed().as_secs_f64();
            continue;
        }
        let gates = n.key_gates_of(ki);
        let mut paths: Vec<(GateId, GateId, HashSet<GateId>)> = Vec::new();
        for kg in gates {
            match uf_roots(n, kg) {
                Ok(roots) => {
                    let family: HashSet<GateId> = roots.iter().copied().collect();
                    for root in roots {
                        paths.push((kg, root, family.clone()));
                    }
                }
                Err(_) => {
                    log::debug!(
                        "key gate `{}` drives no logic; abstaining",
                        n.name(kg)
                    );
                }
            }
        }
        if paths.is_empty() {
            value_of.insert(ki, KeyValue::Unknown);
            meta.insert(ki, (0, false, None));
            per_key_secs[ki_pos] = turn.elapsed().as_secs_f64();
            continue;
        }
        let via_fv = paths.len() > 1;

        // proposals per key input touched this turn
        let mut proposals: HashMap<GateId, Vec<KeyValue>> = HashMap::new();
        let mut touched_meta: HashMap<GateId, (u32, Option<HypothesisSnapshot>)> = HashMap::new();
        for (_, root, family) in &paths {
            let outcome = attack_path(n, *root, family, opts.max_layers);
            match outcome {
                PathOutcome::Decided {
                    bits,
                    layers,
                    snapshot,
                } => {
                    for (kg, bit) in bits {
                        if let Some(owner) = key_input_id(n, kg) {
                            proposals.entry(owner).or_default().push(KeyValue::from_bit(bit));
                            let m = touched_meta.entry(owner).or_insert((0, None));
                            m.0 = m.0.max(layers);
                            m.1 = Some(snapshot.clone());
                        }
                    }
                }
                PathOutcome::Undecided {
                    key_gates,
                    layers,
                    snapshot,
                } => {
                    for kg in key_gates {
                        if let Some(owner) = key_input_id(n, kg) {
                            proposals.entry(owner).or_default().push(KeyValue::Unknown);
                            let m = touched_meta.entry(owner).or_insert((0, None));
                            m.0 = m.0.max(layers);
                            if m.1.is_none() {
                                m.1 = snapshot.clone();
                            }
                        }
                    }
                }
            }
        }

        // merge: definite proposals win unless they contradict; abstaining
        // paths do not veto
        let mut touched: Vec<GateId> = proposals.keys().copied().collect();
        touched.sort_unstable();
        for owner in touched {
            if value_of.contains_key(&owner) {
                continue;
            }
            let votes = &proposals[&owner];
            let mut bits: Vec<bool> = votes.iter().filter_map(|v| v.bit()).collect();
            bits.dedup();
            let value = match bits.as_slice() {
                [] => KeyValue::Unknown,
                [b] => KeyValue::from_bit(*b),
                _ => KeyValue::Unknown,
            };
            let (layers, snapshot) = touched_meta.remove(&owner).unwrap_or((0, None));
            value_of.insert(owner, value);
            meta.insert(owner, (layers, via_fv && owner == ki, snapshot));
        }
        // the key under attack always receives a final value
        value_of.entry(ki).or_insert(KeyValue::Unknown);
        meta.entry(ki).or_insert((opts.max_layers, via_fv, None));
        per_key_secs[ki_pos] = turn.elapsed().as_secs_f64();
    }

    let predictions: Vec<KeyPrediction> = key_inputs
        .iter()
        .map(|ki| {
            let value = value_of.get(ki).copied().unwrap_or(KeyValue::Unknown);
            let (layers_used, via_fv, counts) =
                meta.remove(ki).unwrap_or((0, false, None));
            KeyPrediction {
                key_input: n.name(*ki).to_string(),
                value,
                layers_used,
                via_fv,
                counts,
            }
        })
        .collect();
    let definite = predictions
        .iter()
        .filter(|p| p.value != KeyValue::Unknown)
        .count();
    let sr = if predictions.is_empty() {
        0.0
    } else {
        100.0 * definite as f64 / predictions.len() as f64
    };
    AttackReport {
        predictions,
        sr,
        mr: None,
        wall_time_secs: started.elapsed().as_secs_f64(),
        per_key_secs,
    }
}

/// Two-decimal percentage with halves away from zero, the convention used
/// in the reported tables (3.125 renders as 3.13).
pub fn format_percent(x: f64) -> String {
    format!("{:.2}", (x * 100.0).round() / 100.0)
}

/// Success/misprediction/unknown rates against ground truth.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScoreResult {
    pub sr: f64,
    pub mr: f64,
    pub x_rate: f64,
}

pub fn score(report: &AttackReport, truth: &HashMap<String, bool>) -> Result<ScoreResult> {
    let k = report.predictions.len();
    if truth.len() != k {
        return Err(Error::KeyLengthMismatch {
            expected: k,
            got: truth.len(),
        });
    }
    if k == 0 {
        return Ok(ScoreResult {
            sr: 0.0,
            mr: 0.0,
            x_rate: 0.0,
        });
    }
    let mut definite = 0usize;
    let mut wrong = 0usize;
    for p in &report.predictions {
        let Some(bit) = p.value.bit() else { continue };
        let expected = truth.get(&p.key_input).ok_or(Error::KeyLengthMismatch {
            expected: k,
            got: truth.len(),
        })?;
        definite += 1;
        if bit != *expected {
            wrong += 1;
        }
    }
    let sr = 100.0 * definite as f64 / k as f64;
    Ok(ScoreResult {
        sr,
        mr: 100.0 * wrong as f64 / k as f64,
        x_rate: 100.0 - sr,
    })
}

/// Brute-force the unknown bits against a simulation oracle standing in for
/// an unlocked chip: try all completions and keep those matching the
/// original on `vectors` seeded vectors (exhaustive under 17 free inputs).
/// More than one survivor is reported as-is; zero survivors means some
/// definite prediction was wrong.
pub fn complete_with_oracle(
    locked: &Netlist,
    original: &Netlist,
    report: &AttackReport,
    bound: usize,
    vectors: usize,
    seed: u64,
) -> Result<Vec<HashMap<String, bool>>> {
    let unknowns: Vec<&KeyPrediction> = report
        .predictions
        .iter()
        .filter(|p| p.value == KeyValue::Unknown)
        .collect();
    if unknowns.len() > bound {
        return Err(Error::TooManyUnknowns {
            unknowns: unknowns.len(),
            bound,
        });
    }
    let mut survivors = Vec::new();
    for fill in 0u64..(1u64 << unknowns.len()) {
        let mut key: HashMap<String, bool> = HashMap::new();
        for p in &report.predictions {
            if let Some(bit) = p.value.bit() {
                key.insert(p.key_input.clone(), bit);
            }
        }
        for (i, p) in unknowns.iter().enumerate() {
            key.insert(p.key_input.clone(), (fill >> i) & 1 == 1);
        }
        let outcome = crate::sim::check_equivalence(original, locked, &key, vectors, seed, 16)?;
        if outcome.is_equivalent() {
            survivors.push(key);
        }
    }
    Ok(survivors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_bench;
    use crate::locker::{lock_rll, Inserter, KeyGateVariant};

    fn table(counts: &[u64]) -> HypothesisTable {
        let j = counts.len().trailing_zeros() as usize;
        let mut t = HypothesisTable::new(j);
        t.counts = counts.to_vec();
        t
    }

    #[test]
    fn decide_rule() {
        assert_eq!(decide(&table(&[0, 3])), Decision::Decide(1));
        assert_eq!(decide(&table(&[0, 0])), Decision::Unknown);
        assert_eq!(decide(&table(&[2, 5])), Decision::Escalate);
    }

    #[test]
    fn locked_half_adder_recovered_from_its_siblings() {
        let n = crate::benchgen::ripple_carry_adder(4);
        // lock the sum XOR of one half adder with a known bit
        let mut locked = n.clone();
        let mut ins = Inserter::new(&locked);
        let net = locked.lookup("s1_1").unwrap();
        ins.insert_on(&mut locked, net, "keyinput0", true, KeyGateVariant::PrecedingInvert)
            .unwrap();
        let report = run_attack(&locked, &AttackOptions::default());
        assert_eq!(report.predictions.len(), 1);
        assert_eq!(report.predictions[0].value, KeyValue::One);
        assert!(report.predictions[0].via_fv, "s1_1 drives two successors");
        assert!((report.sr - 100.0).abs() < 1e-9);
    }

    #[test]
    fn unique_unit_function_stays_unknown() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nOUTPUT(y)\n\
             t = NAND(a, b)\nu = NOR(t, c)\ny = XOR(u, d)\n",
        )
        .unwrap();
        let mut locked = n.clone();
        let mut ins = Inserter::new(&locked);
        let net = locked.lookup("u").unwrap();
        ins.insert_on(&mut locked, net, "keyinput0", false, KeyGateVariant::Passthrough)
            .unwrap();
        let report = run_attack(&locked, &AttackOptions::default());
        assert_eq!(report.predictions[0].value, KeyValue::Unknown);
        assert_eq!(report.sr, 0.0);
        assert_eq!(report.definite(), 0);
    }

    #[test]
    fn fanout_paths_that_disagree_abstain() {
        // path Y sees an unlocked copy under the transparent hypothesis,
        // path Z one under the inverting hypothesis
        let mut n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(u)\nINPUT(v)\n\
             INPUT(a1)\nINPUT(b1)\nINPUT(u1)\nINPUT(a2)\nINPUT(b2)\nINPUT(v2)\n\
             OUTPUT(y)\nOUTPUT(z)\nOUTPUT(y1)\nOUTPUT(z2)\n\
             t = NAND(a, b)\ny = AND(t, u)\nz = OR(t, v)\n\
             t1 = NAND(a1, b1)\ny1 = AND(t1, u1)\n\
             t2 = AND(a2, b2)\nz2 = OR(t2, v2)\n",
        )
        .unwrap();
        let mut ins = Inserter::new(&n);
        let net = n.lookup("t").unwrap();
        ins.insert_on(&mut n, net, "keyinput0", false, KeyGateVariant::Passthrough)
            .unwrap();
        let report = run_attack(&n, &AttackOptions { max_layers: 1, seed: 0 });
        assert_eq!(report.predictions[0].value, KeyValue::Unknown);
        assert!(report.predictions[0].via_fv);
    }

    #[test]
    fn fanout_paths_that_agree_decide() {
        // both successors find the same transparent-hypothesis copy
        let mut n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(u)\nINPUT(v)\n\
             INPUT(a1)\nINPUT(b1)\nINPUT(u1)\nINPUT(v1)\n\
             OUTPUT(y)\nOUTPUT(z)\nOUTPUT(y1)\nOUTPUT(z1)\n\
             t = NAND(a, b)\ny = AND(t, u)\nz = OR(t, v)\n\
             t1 = NAND(a1, b1)\ny1 = AND(t1, u1)\nz1 = OR(t1, v1)\n",
        )
        .unwrap();
        let mut ins = Inserter::new(&n);
        let net = n.lookup("t").unwrap();
        ins.insert_on(&mut n, net, "keyinput0", false, KeyGateVariant::Passthrough)
            .unwrap();
        let report = run_attack(&n, &AttackOptions { max_layers: 1, seed: 0 });
        assert_eq!(report.predictions[0].value, KeyValue::Zero);
        assert!(report.predictions[0].via_fv);
    }

    #[test]
    fn one_deciding_path_is_enough() {
        // path Z's shape is unique (abstains), path Y decides
        let mut n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(u)\nINPUT(v)\n\
             INPUT(a1)\nINPUT(b1)\nINPUT(u1)\n\
             OUTPUT(y)\nOUTPUT(z)\nOUTPUT(y1)\n\
             t = NAND(a, b)\ny = AND(t, u)\nz = XNOR(t, v)\n\
             t1 = NAND(a1, b1)\ny1 = AND(t1, u1)\n",
        )
        .unwrap();
        let mut ins = Inserter::new(&n);
        let net = n.lookup("t").unwrap();
        ins.insert_on(&mut n, net, "keyinput0", false, KeyGateVariant::Passthrough)
            .unwrap();
        let report = run_attack(&n, &AttackOptions { max_layers: 1, seed: 0 });
        assert_eq!(report.predictions[0].value, KeyValue::Zero);
    }

    #[test]
    fn attack_is_deterministic() {
        let n = crate::benchgen::array_multiplier(8);
        let locked = lock_rll(&n, 8, 77).unwrap();
        let a = run_attack(&locked.netlist, &AttackOptions::default());
        let b = run_attack(&locked.netlist, &AttackOptions::default());
        assert_eq!(a.predictions_text(), b.predictions_text());
    }

    #[test]
    fn score_arithmetic() {
        let mk = |values: Vec<KeyValue>| AttackReport {
            predictions: values
                .into_iter()
                .enumerate()
                .map(|(i, v)| KeyPrediction {
                    key_input: format!("keyinput{i}"),
                    value: v,
                    layers_used: 1,
                    via_fv: false,
                    counts: None,
                })
                .collect(),
            sr: 0.0,
            mr: None,
            wall_time_secs: 0.0,
            per_key_secs: Vec::new(),
        };
        // 128 keys, 127 definite and correct
        let mut values = vec![KeyValue::Zero; 127];
        values.push(KeyValue::Unknown);
        let report = mk(values);
        let truth: HashMap<String, bool> =
            (0..128).map(|i| (format!("keyinput{i}"), false)).collect();
        let s = score(&report, &truth).unwrap();
        assert!((s.sr - 99.21875).abs() < 1e-9);
        assert_eq!(format_percent(s.sr), "99.22");
        assert_eq!(s.mr, 0.0);
        assert!((s.sr + s.x_rate - 100.0).abs() < 1e-12);

        // 32 keys, 24 definite, 1 wrong
        let mut values = vec![KeyValue::Zero; 24];
        values.extend(vec![KeyValue::Unknown; 8]);
        let report = mk(values);
        let mut truth: HashMap<String, bool> =
            (0..32).map(|i| (format!("keyinput{i}"), false)).collect();
        truth.insert("keyinput3".into(), true);
        let s = score(&report, &truth).unwrap();
        assert!((s.sr - 75.0).abs() < 1e-9);
        assert!((s.mr - 3.125).abs() < 1e-9);
        assert_eq!(format_percent(s.mr), "3.13");

        // all unknown
        let report = mk(vec![KeyValue::Unknown; 4]);
        let truth: HashMap<String, bool> =
            (0..4).map(|i| (format!("keyinput{i}"), false)).collect();
        let s = score(&report, &truth).unwrap();
        assert_eq!((s.sr, s.mr, s.x_rate), (0.0, 0.0, 100.0));

        // length mismatch
        assert!(score(&report, &HashMap::new()).is_err());
    }

    #[test]
    fn oracle_completion_recovers_unknowns() {
        let n = crate::benchgen::array_multiplier(6);
        let locked = lock_rll(&n, 6, 5).unwrap();
        let report = run_attack(&locked.netlist, &AttackOptions::default());
        let survivors =
            complete_with_oracle(&locked.netlist, &n, &report, 20, 2_000, 9).unwrap();
        let truth = locked.key_map();
        assert!(
            survivors.iter().any(|s| *s == truth),
            "truth must survive completion"
        );
        // every survivor is functionally equivalent to the original
        for s in &survivors {
            let out =
                crate::sim::check_equivalence(&n, &locked.netlist, s, 4_000, 17, 12).unwrap();
            assert!(out.is_equivalent());
        }
    }

    #[test]
    fn oracle_completion_bounds_unknowns() {
        let report = AttackReport {
            predictions: (0..25)
                .map(|i| KeyPrediction {
                    key_input: format!("keyinput{i}"),
                    value: KeyValue::Unknown,
                    layers_used: 1,
                    via_fv: false,
                    counts: None,
                })
                .collect(),
            sr: 0.0,
            mr: None,
            wall_time_secs: 0.0,
            per_key_secs: Vec::new(),
        };
        let n = crate::benchgen::ripple_carry_adder(2);
        assert!(matches!(
            complete_with_oracle(&n, &n, &report, 20, 100, 1),
            Err(Error::TooManyUnknowns { .. })
        ));
    }

    #[test]
    fn empty_key_set_reports_cleanly() {
        let n = crate::benchgen::ripple_carry_adder(2);
        let report = run_attack(&n, &AttackOptions::default());
        assert!(report.predictions.is_empty());
        assert_eq!(report.sr, 0.0);
    }
}
