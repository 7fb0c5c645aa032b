//! Key insertion that defeats self-referencing search: every repeated
//! instance of a chosen unit function is locked identically, so no unlocked
//! reference copy survives anywhere in the netlist.
//!
//! Roots are sampled at random; the fan-in cone around a root is counted in
//! the whole netlist. A unique cone gets its own key gate(s); a repeated
//! cone is locked in all of its instances at the structurally corresponding
//! net, sharing one key input (and one truth bit) per position by default.
//! Sharing matters: instances locked with differing bits could be compared
//! against each other truth-table-wise, recreating the self-reference the
//! scheme removes. The independent-bit mode is kept for experiments, with
//! that weakness noted in the emitted metadata.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::attack::{attack_key_input, ordered_key_inputs, run_attack, AttackOptions, KeyValue};
use crate::error::{Error, Result};
use crate::euf::uf_roots;
use crate::locker::{
    eligible_nets, FamilyRecord, Inserter, KeyGateRecord, KeyGateVariant, LockedCircuit, Scheme,
};
use crate::matcher::{find_embedding, fs};
use crate::netlist::{GateId, Netlist};
use crate::pattern::{fanin_cone, Cone, NodeId, PatternInput};

/// Key-size range the insertion must land in.
#[derive(Debug, Clone, Copy)]
pub struct KeyBudget {
    pub min: usize,
    pub max: usize,
}

impl KeyBudget {
    pub fn new(min: usize, max: usize) -> KeyBudget {
        assert!(0 < min && min <= max, "budget must satisfy 0 < min <= max");
        KeyBudget { min, max }
    }
}

#[derive(Debug, Clone)]
pub struct CmOptions {
    pub budget: KeyBudget,
    /// RLL inserts one key gate per instance; SLL inserts `cluster` gates
    /// per instance.
    pub scheme: Scheme,
    pub cluster: usize,
    /// Cone depth for family discovery.
    pub layers: u32,
    /// One key input per position across the whole family (default) or a
    /// fresh key input per instance.
    pub shared_key: bool,
    pub seed: u64,
}

impl CmOptions {
    pub fn rll(budget: KeyBudget, seed: u64) -> CmOptions {
        CmOptions {
            budget,
            scheme: Scheme::Rll,
            cluster: 1,
            layers: 2,
            shared_key: true,
            seed,
        }
    }

    pub fn sll(budget: KeyBudget, cluster: usize, seed: u64) -> CmOptions {
        CmOptions {
            budget,
            scheme: Scheme::Sll,
            cluster,
            layers: 2,
            shared_key: true,
            seed,
        }
    }
}

/// Key layout for one family: `positions` gates per instance, `r` instances.
#[derive(Debug, Clone)]
pub struct FamilyKeyPlan {
    /// Key-input name per (instance, position); shared mode repeats one
    /// name per position across instances.
    pub key_names: Vec<Vec<String>>,
    /// Truth bit per position (shared) and per instance in independent
    /// mode.
    pub bits: Vec<Vec<bool>>,
    /// Transparent/inverting choice per instance and position.
    pub variants: Vec<Vec<KeyGateVariant>>,
}

/// Decide key inputs, bits and variants for a family of `r` instances with
/// `positions` key gates each. Shared mode assigns one key input and one
/// bit per position, fanned out to every instance.
pub(crate) fn assign_family_keys(
    r: usize,
    positions: usize,
    shared: bool,
    inserter: &mut Inserter,
    rng: &mut ChaCha20Rng,
) -> FamilyKeyPlan {
    let mut plan = FamilyKeyPlan {
        key_names: Vec::with_capacity(r),
        bits: Vec::with_capacity(r),
        variants: Vec::with_capacity(r),
    };
    if shared {
        let names: Vec<String> = (0..positions).map(|_| inserter.next_key_name()).collect();
        let bits: Vec<bool> = (0..positions).map(|_| rng.gen_bool(0.5)).collect();
        let variants: Vec<KeyGateVariant> = (0..positions)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    KeyGateVariant::Passthrough
                } else {
                    KeyGateVariant::PrecedingInvert
                }
            })
            .collect();
        for _ in 0..r {
            plan.key_names.push(names.clone());
            plan.bits.push(bits.clone());
            plan.variants.push(variants.clone());
        }
    } else {
        for _ in 0..r {
            plan.key_names
                .push((0..positions).map(|_| inserter.next_key_name()).collect());
            plan.bits.push((0..positions).map(|_| rng.gen_bool(0.5)).collect());
            plan.variants.push(
                (0..positions)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            KeyGateVariant::Passthrough
                        } else {
                            KeyGateVariant::PrecedingInvert
                        }
                    })
                    .collect(),
            );
        }
    }
    plan
}

/// The attacker's one-layer evidence for a key gate interposed on the edge
/// driver -> consumer: instances elsewhere of the same two-gate shape
/// (transparent hypothesis) and of the shape with the driver's type
/// complemented (inverting hypothesis). A placement is safe when both
/// counts are zero (the search comes back empty) or both are positive (the
/// search contradicts itself); exactly one nonzero decides the key.
fn edge_evidence(
    n: &Netlist,
    consumer: GateId,
    driver: GateId,
    exclude: &HashSet<GateId>,
) -> (usize, usize) {
    use crate::pattern::Pattern;
    let build = |driver_kind: crate::netlist::GateKind| {
        let mut p = Pattern::empty();
        let d_arity = n.gate(driver).inputs.len();
        let d_ports: Vec<PatternInput> =
            (0..d_arity).map(|_| PatternInput::Free(p.new_leaf())).collect();
        let d_node = p.add_node(driver_kind, d_ports);
        let c_arity = n.gate(consumer).inputs.len();
        let mut c_ports = vec![PatternInput::Node(d_node)];
        for _ in 1..c_arity {
            c_ports.push(PatternInput::Free(p.new_leaf()));
        }
        let c_node = p.add_node(n.gate(consumer).kind, c_ports);
        p.set_root(c_node);
        p
    };
    let t = fs(n, &build(n.gate(driver).kind), exclude).len();
    let i = match n.gate(driver).kind.complement() {
        Some(flipped) => fs(n, &build(flipped), exclude).len(),
        None => 0,
    };
    (t, i)
}

fn non_deciding(t: usize, i: usize) -> bool {
    (t == 0 && i == 0) || (t > 0 && i > 0)
}

/// Pattern edges a key gate can interpose on: input ports of the root (and,
/// for clusters, of the root's node children) that point at interior nodes,
/// so every instance is guaranteed a logic-gate driver at that spot.
fn placement_ports(cone: &Cone) -> Vec<(NodeId, usize)> {
    let mut ports = Vec::new();
    let root = cone.pattern.root();
    for (i, input) in cone.pattern.node(root).inputs.iter().enumerate() {
        if matches!(input, PatternInput::Node(_)) {
            ports.push((root, i));
        }
    }
    for input in cone.pattern.node(root).inputs.clone() {
        if let PatternInput::Node(child) = input {
            for (i, grand) in cone.pattern.node(child).inputs.iter().enumerate() {
                if matches!(grand, PatternInput::Node(_)) {
                    ports.push((child, i));
                }
            }
        }
    }
    ports
}

/// Lock every repeated instance of randomly chosen unit functions until the
/// minimum budget is met; unique unit functions get individual key gates.
pub fn lock_cm(n: &Netlist, opts: &CmOptions) -> Result<LockedCircuit> {
    let positions = match opts.scheme {
        Scheme::Rll => 1,
        Scheme::Sll => opts.cluster.max(1),
        Scheme::Cm => 1,
    };
    let mut netlist = n.clone();
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut inserter = Inserter::new(&netlist);
    let mut records: Vec<KeyGateRecord> = Vec::new();
    let mut families: Vec<FamilyRecord> = Vec::new();
    let mut family_cones: Vec<Cone> = Vec::new();
    let mut locked_region: HashSet<GateId> = HashSet::new();
    let mut inserted = 0usize;

    let max_attempts = 400 + 20 * netlist.len();
    let mut attempts = 0usize;
    while inserted < opts.budget.min {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::BudgetInfeasible {
                achieved: inserted,
                requested: opts.budget.min,
            });
        }
        let logic: Vec<GateId> = netlist
            .ids()
            .filter(|&id| netlist.gate(id).kind.is_logic() && !locked_region.contains(&id))
            .collect();
        if logic.is_empty() {
            return Err(Error::BudgetInfeasible {
                achieved: inserted,
                requested: opts.budget.min,
            });
        }
        let root = logic[rng.gen_range(0..logic.len())];
        let cone = fanin_cone(&netlist, root, opts.layers);
        if cone.contains_key_gate(&netlist) {
            continue;
        }
        let instances = fs(&netlist, &cone.pattern, &HashSet::new()).matched_roots;
        let r = instances.len();
        if r == 0 {
            // the root itself sits in a lock perimeter; pick another
            continue;
        }
        if r > 1 && r * positions > opts.budget.max.saturating_sub(inserted) {
            // family too large for the remaining budget
            continue;
        }
        // trial insertion on a scratch copy: commit only when the search
        // abstains on every key the family introduces
        let mut trial = netlist.clone();
        let mut trial_inserter = inserter.clone();
        let mut trial_rng = rng.clone();
        match lock_family(
            &mut trial,
            &cone,
            &instances,
            positions,
            opts.shared_key,
            &mut trial_inserter,
            &mut trial_rng,
        )? {
            None => continue,
            Some((new_records, roots)) => {
                let mut names: Vec<String> =
                    new_records.iter().map(|r| r.key_input.clone()).collect();
                names.sort();
                names.dedup();
                let still_hidden = names.iter().all(|name| {
                    let Some(id) = trial.lookup(name) else { return false };
                    attack_key_input(&trial, id, &AttackOptions::default())
                        == KeyValue::Unknown
                });
                if !still_hidden {
                    continue;
                }
                netlist = trial;
                inserter = trial_inserter;
                rng = trial_rng;
                inserted += new_records.len();
                for &g in &roots {
                    if let Some(emb) = find_embedding(&netlist, &cone.pattern, g) {
                        locked_region.extend(emb.node_to_gate.iter().copied());
                    }
                    locked_region.insert(g);
                }
                families.push(FamilyRecord {
                    fingerprint: cone.pattern.fingerprint(),
                    layers: opts.layers,
                    instance_roots: roots.iter().map(|g| netlist.name(*g).to_string()).collect(),
                    shared_key: opts.shared_key,
                    key_inputs: {
                        let mut v: Vec<String> =
                            new_records.iter().map(|r| r.key_input.clone()).collect();
                        v.sort();
                        v.dedup();
                        v
                    },
                    key_gates: new_records.iter().map(|r| r.gate_id.clone()).collect(),
                });
                family_cones.push(cone);
                records.extend(new_records);
            }
        }
    }

    // closure: no unlocked instance of any family pattern may survive
    for (family, cone) in families.iter_mut().zip(&family_cones) {
        let mut guard = 0;
        loop {
            let survivors = fs(&netlist, &cone.pattern, &HashSet::new()).matched_roots;
            if survivors.is_empty() {
                break;
            }
            guard += 1;
            if guard > 16 || inserted + survivors.len() * positions > opts.budget.max {
                return Err(Error::BudgetInfeasible {
                    achieved: inserted,
                    requested: opts.budget.min,
                });
            }
            if let Some((new_records, roots)) = lock_family(
                &mut netlist,
                cone,
                &survivors,
                positions,
                opts.shared_key,
                &mut inserter,
                &mut rng,
            )? {
                inserted += new_records.len();
                family
                    .instance_roots
                    .extend(roots.iter().map(|g| netlist.name(*g).to_string()));
                family
                    .key_gates
                    .extend(new_records.iter().map(|r| r.gate_id.clone()));
                let mut keys: Vec<String> =
                    new_records.iter().map(|r| r.key_input.clone()).collect();
                keys.extend(family.key_inputs.iter().cloned());
                keys.sort();
                keys.dedup();
                family.key_inputs = keys;
                records.extend(new_records);
            } else {
                return Err(Error::BudgetInfeasible {
                    achieved: inserted,
                    requested: opts.budget.min,
                });
            }
        }
    }

    // hardening: the scheme is only done when the structural search
    // abstains on every key. Sub-patterns narrower than the family cone can
    // still have unlocked look-alikes that decide a key; widening that
    // key's unit function with one extra key gate makes the joint shape
    // unique. Iterate until the self-check goes silent or the budget ends.
    let mut rounds = 0;
    loop {
        let report = run_attack(&netlist, &AttackOptions::default());
        let decided: Vec<String> = report
            .predictions
            .iter()
            .filter(|p| p.value != KeyValue::Unknown)
            .map(|p| p.key_input.clone())
            .collect();
        if decided.is_empty() {
            break;
        }
        rounds += 1;
        if rounds > 8 {
            return Err(Error::BudgetInfeasible {
                achieved: inserted,
                requested: opts.budget.min,
            });
        }
        for name in decided {
            if inserted >= opts.budget.max {
                return Err(Error::BudgetInfeasible {
                    achieved: inserted,
                    requested: opts.budget.min,
                });
            }
            let Some(rec) = harden_key(&mut netlist, &name, &mut inserter, &mut rng)? else {
                return Err(Error::BudgetInfeasible {
                    achieved: inserted,
                    requested: opts.budget.min,
                });
            };
            inserted += 1;
            families.push(FamilyRecord {
                fingerprint: String::from("hardening"),
                layers: 1,
                instance_roots: vec![rec.locked_net.clone()],
                shared_key: true,
                key_inputs: vec![rec.key_input.clone()],
                key_gates: vec![rec.gate_id.clone()],
            });
            records.push(rec);
        }
    }

    let key = crate::locker::key_vector(&netlist, &records);
    Ok(LockedCircuit {
        netlist,
        key,
        records,
        scheme: Scheme::Cm,
        families,
    })
}

/// Insert one extra key gate inside the unit function of a key the
/// self-check still decides: the first eligible net feeding one of its
/// roots or drivers, widening the hypothesis space at that spot.
fn harden_key(
    netlist: &mut Netlist,
    key_name: &str,
    inserter: &mut Inserter,
    rng: &mut ChaCha20Rng,
) -> Result<Option<KeyGateRecord>> {
    let Some(ki) = ordered_key_inputs(netlist)
        .into_iter()
        .find(|id| netlist.name(*id) == key_name)
    else {
        return Ok(None);
    };
    let eligible: HashSet<GateId> = eligible_nets(netlist).into_iter().collect();
    let mut candidates: Vec<GateId> = Vec::new();
    for kg in netlist.key_gates_of(ki) {
        let Ok(roots) = uf_roots(netlist, kg) else {
            continue;
        };
        for root in roots {
            for &net in &netlist.gate(root).inputs {
                if eligible.contains(&net) && !candidates.contains(&net) {
                    candidates.push(net);
                }
            }
            // one level deeper: the drivers' own inputs
            for &mid in &netlist.gate(root).inputs {
                for &net in &netlist.gate(mid).inputs {
                    if eligible.contains(&net) && !candidates.contains(&net) {
                        candidates.push(net);
                    }
                }
            }
        }
    }
    // prefer a net whose own one-layer evidence is empty or contradictory,
    // so the hardening gate does not become the next decidable key
    let pick = candidates
        .iter()
        .copied()
        .find(|&net| {
            let exclude: HashSet<GateId> = netlist.gate(net).fanouts.iter().copied().collect();
            netlist.gate(net).fanouts.iter().all(|&c| {
                let (t, i) = edge_evidence(netlist, c, net, &exclude);
                non_deciding(t, i)
            })
        })
        .or_else(|| candidates.first().copied());
    let Some(net) = pick else {
        return Ok(None);
    };
    let bit = rng.gen_bool(0.5);
    let variant = if rng.gen_bool(0.5) {
        KeyGateVariant::Passthrough
    } else {
        KeyGateVariant::PrecedingInvert
    };
    let key = inserter.next_key_name();
    Ok(Some(inserter.insert_on(netlist, net, &key, bit, variant)?))
}

/// Insert key gates at corresponding positions in every instance: the same
/// interior pattern port where its net is lockable, otherwise the
/// instance's own output net, which equally removes the instance from the
/// search (its root then drives a key gate). Returns `None` when some
/// instance offers no lockable net (caller resamples the root).
#[allow(clippy::type_complexity)]
fn lock_family(
    netlist: &mut Netlist,
    cone: &Cone,
    instances: &[GateId],
    positions: usize,
    shared: bool,
    inserter: &mut Inserter,
    rng: &mut ChaCha20Rng,
) -> Result<Option<(Vec<KeyGateRecord>, Vec<GateId>)>> {
    let mut ports = placement_ports(cone);
    for i in 0..ports.len() {
        let j = rng.gen_range(i..ports.len());
        ports.swap(i, j);
    }

    let eligible: HashSet<GateId> = eligible_nets(netlist).into_iter().collect();
    let mut nets: Vec<Vec<GateId>> = Vec::with_capacity(instances.len());
    let mut seen: HashSet<GateId> = HashSet::new();
    for &inst in instances {
        let Some(emb) = find_embedding(netlist, &cone.pattern, inst) else {
            return Ok(None);
        };
        let mut per_instance = Vec::with_capacity(positions);
        for &(node, port) in &ports {
            if per_instance.len() == positions {
                break;
            }
            let consumer = emb.node_to_gate[node.index()];
            let net = netlist.gate(consumer).inputs[port];
            if eligible.contains(&net) && !seen.contains(&net) && !per_instance.contains(&net) {
                seen.insert(net);
                per_instance.push(net);
            }
        }
        if per_instance.len() < positions
            && eligible.contains(&inst)
            && !seen.contains(&inst)
        {
            seen.insert(inst);
            per_instance.push(inst);
        }
        if per_instance.len() < positions {
            return Ok(None);
        }
        nets.push(per_instance);
    }

    // model the post-lock perimeter: the family roots and every consumer of
    // a to-be-locked net stop serving as evidence, then demand that each
    // placement leaves the one-layer search empty or contradictory
    let mut post_lock: HashSet<GateId> = instances.iter().copied().collect();
    for per_instance in &nets {
        for &net in per_instance {
            post_lock.extend(netlist.gate(net).fanouts.iter().copied());
        }
    }
    let mut checked: HashSet<(u64, u64)> = HashSet::new();
    for per_instance in &nets {
        for &net in per_instance {
            for &consumer in &netlist.gate(net).fanouts {
                let sig = (
                    (netlist.gate(consumer).kind.as_index() as u64) << 32
                        | netlist.gate(consumer).inputs.len() as u64,
                    (netlist.gate(net).kind.as_index() as u64) << 32
                        | netlist.gate(net).inputs.len() as u64,
                );
                if !checked.insert(sig) {
                    continue;
                }
                let (t, i) = edge_evidence(netlist, consumer, net, &post_lock);
                if !non_deciding(t, i) {
                    return Ok(None);
                }
            }
        }
    }

    let plan = assign_family_keys(instances.len(), positions, shared, inserter, rng);
    let mut new_records = Vec::new();
    for (i, per_instance) in nets.iter().enumerate() {
        for (p, &net) in per_instance.iter().enumerate() {
            let rec = inserter.insert_on(
                netlist,
                net,
                &plan.key_names[i][p],
                plan.bits[i][p],
                plan.variants[i][p],
            )?;
            new_records.push(rec);
        }
    }
    Ok(Some((new_records, instances.to_vec())))
}
