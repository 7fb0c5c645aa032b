//! XOR/XNOR key-gate insertion.
//!
//! A key gate interposes on an internal net: `lock_g<k> = XOR(net, keyinput)`
//! with every former consumer of the net re-pointed at the key gate. The
//! circuit is kept functionally equivalent under the chosen truth bit by one
//! of three variants:
//!
//! - passthrough: the gate type is transparent at the truth bit (XOR at 0,
//!   XNOR at 1), nothing else changes;
//! - preceding invert: the gate inverts at the truth bit and the driving
//!   gate's type is complemented to compensate;
//! - successor rewrite: the gate inverts at the truth bit and every consumer
//!   absorbs the inversion by switching to its dual type with its other
//!   inputs complemented.
//!
//! XOR and XNOR are mixed independently of the truth bit so the gate type
//! does not leak the key.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{GateId, GateKind, Netlist, KEY_INPUT_PREFIX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "RLL")]
    Rll,
    #[serde(rename = "SLL")]
    Sll,
    #[serde(rename = "CM")]
    Cm,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Rll => "RLL",
            Scheme::Sll => "SLL",
            Scheme::Cm => "CM",
        })
    }
}

/// How functional equivalence under the truth bit is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyGateVariant {
    #[serde(rename = "PASSTHROUGH_0")]
    Passthrough,
    #[serde(rename = "PRECEDING_INVERT_1")]
    PrecedingInvert,
    #[serde(rename = "DEMORGAN_1")]
    Demorgan,
}

/// One inserted key gate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyGateRecord {
    pub key_input: String,
    pub gate_id: String,
    pub locked_net: String,
    pub variant: KeyGateVariant,
    pub truth_bit: bool,
}

/// Countermeasure metadata: one family of identically locked unit-function
/// instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub fingerprint: String,
    pub layers: u32,
    pub instance_roots: Vec<String>,
    pub shared_key: bool,
    pub key_inputs: Vec<String>,
    pub key_gates: Vec<String>,
}

/// A locked netlist with its ground truth. The attack path never sees this
/// type; it consumes the bare [`Netlist`] only.
#[derive(Debug, Clone)]
pub struct LockedCircuit {
    pub netlist: Netlist,
    /// Truth bit per key input, aligned with `netlist.key_inputs()`.
    pub key: Vec<bool>,
    /// One record per inserted key gate (can exceed the key length when a
    /// key input fans out to a whole family).
    pub records: Vec<KeyGateRecord>,
    pub scheme: Scheme,
    pub families: Vec<FamilyRecord>,
}

impl LockedCircuit {
    /// Truth bit by key-input name.
    pub fn key_map(&self) -> HashMap<String, bool> {
        self.netlist
            .key_inputs()
            .iter()
            .zip(&self.key)
            .map(|(id, bit)| (self.netlist.name(*id).to_string(), *bit))
            .collect()
    }

    /// `keyinput<i>=<bit>` lines in key-input order.
    pub fn key_file_text(&self) -> String {
        let mut out = String::new();
        for (id, bit) in self.netlist.key_inputs().iter().zip(&self.key) {
            out.push_str(&format!(
                "{}={}\n",
                self.netlist.name(*id),
                if *bit { 1 } else { 0 }
            ));
        }
        out
    }

    /// Ground-truth JSON record for the harness.
    pub fn record_json(&self) -> String {
        #[derive(Serialize)]
        struct File<'a> {
            scheme: Scheme,
            key_inputs: Vec<&'a str>,
            key: Vec<u8>,
            records: &'a [KeyGateRecord],
            families: &'a [FamilyRecord],
        }
        serde_json::to_string_pretty(&File {
            scheme: self.scheme,
            key_inputs: self
                .netlist
                .key_inputs()
                .iter()
                .map(|id| self.netlist.name(*id))
                .collect(),
            key: self.key.iter().map(|b| *b as u8).collect(),
            records: &self.records,
            families: &self.families,
        })
        .expect("lock record serializes")
    }
}

/// Parse a `keyinput<i>=<bit>` key file.
pub fn parse_key_file(text: &str) -> Result<HashMap<String, bool>> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, bit) = line.split_once('=').ok_or(Error::Syntax {
            line: i + 1,
            text: line.to_string(),
        })?;
        let value = match bit.trim() {
            "0" => false,
            "1" => true,
            _ => {
                return Err(Error::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                })
            }
        };
        map.insert(name.trim().to_string(), value);
    }
    Ok(map)
}

/// Internal nets a key gate may interpose on: driven by a combinational
/// gate, consumed by at least one gate, not a primary output, not a key
/// gate's own output, and not already feeding a key gate.
pub fn eligible_nets(n: &Netlist) -> Vec<GateId> {
    n.ids()
        .filter(|&id| {
            let g = n.gate(id);
            g.kind.is_logic()
                && !n.is_key_gate(id)
                && !n.is_primary_output(id)
                && !g.fanouts.is_empty()
                && !g.fanouts.iter().any(|&c| n.is_key_gate(c))
        })
        .collect()
}

/// Next free index in the `lock_g<k>` namespace.
fn next_lock_index(n: &Netlist) -> usize {
    n.ids()
        .filter_map(|id| n.name(id).strip_prefix("lock_g")?.parse::<usize>().ok())
        .map(|i| i + 1)
        .max()
        .unwrap_or(0)
}

/// Rewrite the successor `at` so that it absorbs the inversion arriving on
/// the `key_gate` input: the gate switches to its dual and every other
/// input is complemented, flipping exclusive drivers in place and inserting
/// NOT gates elsewhere.
pub fn apply_demorgan(n: &mut Netlist, at: GateId, key_gate: GateId) -> Result<()> {
    let dual = n
        .gate(at)
        .kind
        .demorgan_dual()
        .ok_or_else(|| Error::InvalidNetlist(format!("`{}` has no dual", n.name(at))))?;
    let mut others: Vec<GateId> = n
        .gate(at)
        .inputs
        .iter()
        .copied()
        .filter(|&s| s != key_gate)
        .collect();
    others.sort_unstable();
    others.dedup();
    n.set_kind(at, dual);
    let mut lock_counter = next_lock_index(n);
    for o in others {
        complement_net_into(n, at, o, &mut lock_counter)?;
    }
    Ok(())
}

/// Complement the value `at` sees on every port currently fed by `o`.
fn complement_net_into(
    n: &mut Netlist,
    at: GateId,
    o: GateId,
    lock_counter: &mut usize,
) -> Result<()> {
    let g = n.gate(o);
    let exclusive = g.fanouts.iter().all(|&c| c == at);
    let flippable = g.kind.complement().is_some()
        && !n.is_key_gate(o)
        && !n.is_primary_output(o)
        && exclusive;
    if flippable {
        let c = n.gate(o).kind.complement().expect("checked above");
        n.set_kind(o, c);
        return Ok(());
    }
    let name = format!("lock_g{}", *lock_counter);
    *lock_counter += 1;
    let w = n.add_gate(&name, GateKind::Not, vec![o])?;
    let ports: Vec<usize> = n
        .gate(at)
        .inputs
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == o)
        .map(|(i, _)| i)
        .collect();
    for p in ports {
        n.replace_input(at, p, w);
    }
    Ok(())
}

/// True when every consumer of `net` can absorb an inversion by the
/// successor rewrite.
fn demorgan_legal(n: &Netlist, net: GateId) -> bool {
    let consumers = &n.gate(net).fanouts;
    !consumers.is_empty()
        && consumers.iter().all(|&c| {
            n.gate(c).kind.demorgan_dual().is_some() && !n.is_key_gate(c)
        })
}

#[derive(Clone)]
pub(crate) struct Inserter {
    lock_counter: usize,
    key_counter: usize,
}

impl Inserter {
    pub(crate) fn new(n: &Netlist) -> Inserter {
        Inserter {
            lock_counter: next_lock_index(n),
            key_counter: n.next_key_index(),
        }
    }

    /// Fresh key-input name for a gate inserted next.
    pub(crate) fn next_key_name(&mut self) -> String {
        let name = format!("{KEY_INPUT_PREFIX}{}", self.key_counter);
        self.key_counter += 1;
        name
    }

    /// Insert one key gate on `net` under an existing key input, with the
    /// variant already chosen.
    pub(crate) fn insert_on(
        &mut self,
        n: &mut Netlist,
        net: GateId,
        key_name: &str,
        truth_bit: bool,
        variant: KeyGateVariant,
    ) -> Result<KeyGateRecord> {
        let key_id = match n.lookup(key_name) {
            Some(id) => id,
            None => n.add_input(key_name)?,
        };
        // transparent at the truth bit only for the passthrough variant
        let kind = match (variant, truth_bit) {
            (KeyGateVariant::Passthrough, false) => GateKind::Xor,
            (KeyGateVariant::Passthrough, true) => GateKind::Xnor,
            (_, false) => GateKind::Xnor,
            (_, true) => GateKind::Xor,
        };
        let gate_name = format!("lock_g{}", self.lock_counter);
        self.lock_counter += 1;
        let locked_net = n.name(net).to_string();
        let kg = n.add_gate(&gate_name, kind, vec![net, key_id])?;
        n.redirect_consumers(net, kg, &[kg]);
        match variant {
            KeyGateVariant::Passthrough => {}
            KeyGateVariant::PrecedingInvert => {
                let c = n
                    .gate(net)
                    .kind
                    .complement()
                    .ok_or_else(|| Error::InvalidNetlist(format!(
                        "driver `{locked_net}` cannot be complemented"
                    )))?;
                n.set_kind(net, c);
            }
            KeyGateVariant::Demorgan => {
                let consumers: Vec<GateId> = {
                    let mut v = n.gate(kg).fanouts.to_vec();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                self.lock_counter = next_lock_index(n).max(self.lock_counter);
                for c in consumers {
                    apply_demorgan(n, c, kg)?;
                }
                self.lock_counter = next_lock_index(n).max(self.lock_counter);
            }
        }
        Ok(KeyGateRecord {
            key_input: key_name.to_string(),
            gate_id: gate_name,
            locked_net,
            variant,
            truth_bit,
        })
    }

    /// Insert one key gate on `net` with a fresh key input, drawing the
    /// truth bit, gate type and variant from `rng`.
    pub(crate) fn insert_random(
        &mut self,
        n: &mut Netlist,
        net: GateId,
        demorgan_share: f64,
        rng: &mut ChaCha20Rng,
    ) -> Result<KeyGateRecord> {
        let (truth_bit, variant) = draw_variant(n, net, demorgan_share, rng);
        let key_name = self.next_key_name();
        self.insert_on(n, net, &key_name, truth_bit, variant)
    }
}

/// Insert a single key gate on `net` with an explicit truth bit and
/// variant. The building block behind the random schemes, exposed for
/// hand-placed locks and tests.
pub fn insert_key_gate(
    n: &mut Netlist,
    net: GateId,
    key_name: &str,
    truth_bit: bool,
    variant: KeyGateVariant,
) -> Result<KeyGateRecord> {
    Inserter::new(n).insert_on(n, net, key_name, truth_bit, variant)
}

/// Seeded draw of truth bit and variant for one key gate: a fair truth bit,
/// a fair transparent/inverting coin, and for the inverting case a fair
/// choice between preceding-invert and the successor rewrite where legal.
pub(crate) fn draw_variant(
    n: &Netlist,
    net: GateId,
    demorgan_share: f64,
    rng: &mut ChaCha20Rng,
) -> (bool, KeyGateVariant) {
    let truth_bit = rng.gen_bool(0.5);
    let transparent = rng.gen_bool(0.5);
    let demorgan_coin = rng.gen_bool(demorgan_share.clamp(0.0, 1.0));
    if transparent {
        (truth_bit, KeyGateVariant::Passthrough)
    } else if demorgan_coin && demorgan_legal(n, net) {
        (truth_bit, KeyGateVariant::Demorgan)
    } else {
        (truth_bit, KeyGateVariant::PrecedingInvert)
    }
}

/// Sample `k` distinct elements, order-deterministic for a given seed.
fn sample_distinct(rng: &mut ChaCha20Rng, pool: &[GateId], k: usize) -> Vec<GateId> {
    let mut v = pool.to_vec();
    for i in 0..k {
        let j = rng.gen_range(i..v.len());
        v.swap(i, j);
    }
    v.truncate(k);
    v
}

/// Share of inverting key gates realized by the successor rewrite rather
/// than a driver flip. Successor rewrites scatter dual-typed gates and
/// inverters through the netlist, and past a point those artifacts alias
/// with each other's hypothesis searches, which mostly shows up as extra
/// unknowns on highly regular circuits. A quarter keeps the rewrite
/// present in every realistically sized key while leaving hypothesis
/// searches mostly alias-free; the CLI exposes the knob.
pub const DEFAULT_DEMORGAN_SHARE: f64 = 0.25;

/// Random logic locking: `key_size` key gates on distinct random internal
/// nets.
pub fn lock_rll(n: &Netlist, key_size: usize, seed: u64) -> Result<LockedCircuit> {
    lock_rll_with(n, key_size, seed, DEFAULT_DEMORGAN_SHARE)
}

pub fn lock_rll_with(
    n: &Netlist,
    key_size: usize,
    seed: u64,
    demorgan_share: f64,
) -> Result<LockedCircuit> {
    let mut netlist = n.clone();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pool = eligible_nets(&netlist);
    if key_size > pool.len() {
        return Err(Error::KeySizeExceedsNets {
            requested: key_size,
            available: pool.len(),
        });
    }
    let chosen = sample_distinct(&mut rng, &pool, key_size);
    let mut inserter = Inserter::new(&netlist);
    let mut records = Vec::with_capacity(key_size);
    for net in chosen {
        records.push(inserter.insert_random(&mut netlist, net, demorgan_share, &mut rng)?);
    }
    let key = key_vector(&netlist, &records);
    Ok(LockedCircuit {
        netlist,
        key,
        records,
        scheme: Scheme::Rll,
        families: Vec::new(),
    })
}

/// Strong logic locking: key gates placed in clusters whose outputs
/// converge at a common successor within two gate levels. A cluster size of
/// 1 degenerates to random placement.
pub fn lock_sll(n: &Netlist, key_size: usize, cluster: usize, seed: u64) -> Result<LockedCircuit> {
    lock_sll_with(n, key_size, cluster, seed, DEFAULT_DEMORGAN_SHARE)
}

pub fn lock_sll_with(
    n: &Netlist,
    key_size: usize,
    cluster: usize,
    seed: u64,
    demorgan_share: f64,
) -> Result<LockedCircuit> {
    assert!(cluster >= 1, "cluster size must be positive");
    let mut netlist = n.clone();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    if key_size > eligible_nets(&netlist).len() {
        return Err(Error::KeySizeExceedsNets {
            requested: key_size,
            available: eligible_nets(&netlist).len(),
        });
    }
    let mut inserter = Inserter::new(&netlist);
    let mut records = Vec::with_capacity(key_size);
    let max_tries = 400 + 4 * netlist.len();
    let mut tries = 0usize;
    // eligibility only changes when a cluster lands, so compute it per round
    let mut ok: std::collections::HashSet<GateId> = eligible_nets(&netlist).into_iter().collect();
    while records.len() < key_size {
        let want = cluster.min(key_size - records.len());
        // insist on full clusters while sites are plentiful; once sampling
        // keeps failing, place what fits and spread the remainder over
        // fresh sites rather than stacking members on one branch
        let accept_partial = tries > max_tries / 2;
        let sites = match find_cluster_sites(&netlist, want, accept_partial, &ok, &mut rng) {
            Some(s) => s,
            None => {
                tries += 1;
                if tries > max_tries {
                    return Err(Error::NoConvergentSite {
                        cluster: want,
                        tries,
                    });
                }
                continue;
            }
        };
        for net in sites {
            records.push(inserter.insert_random(&mut netlist, net, demorgan_share, &mut rng)?);
        }
        ok = eligible_nets(&netlist).into_iter().collect();
    }
    let key = key_vector(&netlist, &records);
    Ok(LockedCircuit {
        netlist,
        key,
        records,
        scheme: Scheme::Sll,
        families: Vec::new(),
    })
}

/// Pick a random convergence gate and return `want` eligible nets among its
/// inputs and its predecessors' inputs, on pairwise independent branches:
/// no chosen net may lie in the two-level fan-in of another, so the key
/// gates interfere at the convergence gate without stacking their rewrites
/// on one another.
fn find_cluster_sites(
    n: &Netlist,
    want: usize,
    accept_partial: bool,
    ok: &std::collections::HashSet<GateId>,
    rng: &mut ChaCha20Rng,
) -> Option<Vec<GateId>> {
    let logic: Vec<GateId> = n.ids().filter(|&id| n.gate(id).kind.is_logic()).collect();
    if logic.is_empty() {
        return None;
    }
    let site = logic[rng.gen_range(0..logic.len())];
    // one net per predecessor branch where possible: every key gate reaches
    // the convergence gate in exactly two levels, and members on distinct
    // branches stay out of each other's fan-in cones
    let mut preds: Vec<GateId> = Vec::new();
    for &p in &n.gate(site).inputs {
        if n.gate(p).kind.is_logic() && !preds.contains(&p) {
            preds.push(p);
        }
    }
    for i in 0..preds.len() {
        let j = rng.gen_range(i..preds.len());
        preds.swap(i, j);
    }
    let fanin_window = |g: GateId, depth: usize| {
        let mut set = vec![g];
        let mut frontier = vec![g];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &f in &frontier {
                for &x in &n.gate(f).inputs {
                    if !set.contains(&x) {
                        set.push(x);
                        next.push(x);
                    }
                }
            }
            frontier = next;
        }
        set
    };
    let nested = |a: GateId, b: GateId| {
        fanin_window(a, 2).contains(&b) || fanin_window(b, 2).contains(&a)
    };
    // keep clusters apart from earlier ones: a net whose two-level fan-in
    // or fanout already touches a key gate would pile hypothesis spaces of
    // unrelated clusters into one cone
    let near_existing_key = |net: GateId| {
        fanin_window(net, 2)
            .into_iter()
            .any(|g| n.is_key_gate(g) || n.gate(g).fanouts.iter().any(|&c| n.is_key_gate(c)))
    };
    let mut chosen: Vec<GateId> = Vec::new();
    let accept = |net: GateId, branch: GateId, chosen: &mut Vec<GateId>, branches: &mut Vec<GateId>| {
        let feeds_other_branch = branches
            .iter()
            .any(|&b| b != branch && n.gate(net).fanouts.contains(&b));
        if !chosen.contains(&net)
            && !feeds_other_branch
            && !near_existing_key(net)
            && chosen.iter().all(|&q| !nested(q, net))
        {
            chosen.push(net);
            branches.push(branch);
            true
        } else {
            false
        }
    };
    let mut branches: Vec<GateId> = Vec::new();
    // first pass: one eligible net per distinct branch, preferring nets
    // whose only consumer is the branch gate: a multi-fanout net would
    // carry this member's key gate into a mate's cones through its other
    // consumers
    for &p in &preds {
        if chosen.len() == want {
            break;
        }
        let mut nets: Vec<GateId> = n
            .gate(p)
            .inputs
            .iter()
            .copied()
            .filter(|c| ok.contains(c))
            .collect();
        nets.sort_unstable();
        nets.dedup();
        let single: Vec<GateId> = nets
            .iter()
            .copied()
            .filter(|&c| n.gate(c).fanouts.len() == 1)
            .collect();
        let pool = if single.is_empty() { &nets } else { &single };
        if !pool.is_empty() {
            let net = pool[rng.gen_range(0..pool.len())];
            accept(net, p, &mut chosen, &mut branches);
        }
    }
    if chosen.len() == want || (accept_partial && !chosen.is_empty()) {
        Some(chosen)
    } else {
        None
    }
}

pub(crate) fn key_vector(n: &Netlist, records: &[KeyGateRecord]) -> Vec<bool> {
    let by_name: HashMap<&str, bool> = records
        .iter()
        .map(|r| (r.key_input.as_str(), r.truth_bit))
        .collect();
    n.key_inputs()
        .iter()
        .map(|id| *by_name.get(n.name(*id)).expect("record for every key input"))
        .collect()
}
