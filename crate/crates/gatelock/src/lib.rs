//! Gate-level netlist toolkit for XOR/XNOR logic locking and its analysis.
//!
//! The crate covers the full loop of locking a combinational `.bench`
//! netlist, attacking the locked result without an oracle by searching the
//! netlist for unlocked copies of each locked unit function, hardening a
//! design against that attack by locking every repeated instance of a unit
//! function, and measuring the outcome over many seeded instances.
//!
//! - [`netlist`], [`bench`], [`sim`]: the IR, `.bench` parsing/writing, and
//!   word-parallel simulation with equivalence sweeps.
//! - [`pattern`], [`matcher`]: rooted fan-in cone patterns and the
//!   backtracking structural search that finds all of their instances.
//! - [`locker`]: random (RLL) and strong (SLL) key-gate insertion.
//! - [`euf`]: unit function extraction around key gates and generation of
//!   the hypothesis-key rewrites searched by the attack.
//! - [`attack`]: the key-recovery attack, fanout verification, scoring, and
//!   brute-force completion of unknown bits against a simulation oracle.
//! - [`countermeasure`]: key insertion that leaves no unlocked reference
//!   copy of any locked unit function.
//! - [`experiment`]: multi-instance lock/attack/score runs with CSV and
//!   JSON emission.
//! - [`benchgen`]: deterministic circuit generators used by the test suite
//!   and as stand-ins when the published benchmark files are not on disk.

pub mod attack;
pub mod bench;
pub mod benchgen;
pub mod countermeasure;
pub mod error;
pub mod euf;
pub mod experiment;
pub mod locker;
pub mod matcher;
pub mod netlist;
pub mod pattern;
pub mod sim;

pub use error::{Error, Result};
pub use netlist::{Gate, GateId, GateKind, Netlist};
