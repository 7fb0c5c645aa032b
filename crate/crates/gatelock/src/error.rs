//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: cannot parse `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown gate type `{kind}`")]
    UnknownGateType { line: usize, kind: String },

    #[error("line {line}: duplicate definition of signal `{signal}`")]
    DuplicateDefinition { line: usize, signal: String },

    #[error("line {line}: reference to undefined signal `{signal}`")]
    UndefinedSignal { line: usize, signal: String },

    #[error("line {line}: gate `{signal}` of type {kind} takes {expected}, got {got} inputs")]
    Arity {
        line: usize,
        signal: String,
        kind: String,
        expected: &'static str,
        got: usize,
    },

    #[error("combinational cycle through signal `{signal}`")]
    CombinationalCycle { signal: String },

    #[error("no such signal `{signal}`")]
    NoSuchSignal { signal: String },

    #[error("missing assignment for input `{signal}`")]
    MissingAssignment { signal: String },

    #[error("signal name `{signal}` collides with an existing gate")]
    NameCollision { signal: String },

    #[error("key size {requested} exceeds the {available} lockable nets")]
    KeySizeExceedsNets { requested: usize, available: usize },

    #[error("no convergent site found for a cluster of {cluster} after {tries} tries")]
    NoConvergentSite { cluster: usize, tries: usize },

    #[error("key gate `{gate}` drives no logic gate")]
    FanoutlessKeyGate { gate: String },

    #[error("key budget infeasible: inserted {achieved} of at least {requested} key gates")]
    BudgetInfeasible { achieved: usize, requested: usize },

    #[error("predicted keys have {unknowns} unknown bits, above the completion bound {bound}")]
    TooManyUnknowns { unknowns: usize, bound: usize },

    #[error("key length {got} does not match {expected} key inputs")]
    KeyLengthMismatch { expected: usize, got: usize },

    #[error("primary {kind} sets differ: `{name}` missing from one netlist")]
    InterfaceMismatch { kind: &'static str, name: String },

    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
