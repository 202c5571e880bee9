use alloc::string::String;
use alloc::vec::Vec;

use crate::feeder::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("feeder failed validation with {} violation(s)", .0.len())]
    InvalidFeeder(Vec<Violation>),

    #[error("scenario references unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("edge `{0}` is listed as damaged more than once")]
    DuplicateDamage(String),

    #[error("repair time of `{edge}` must be positive and finite, got {value}")]
    NonPositiveRepairTime { edge: String, value: f64 },

    #[error("weight of `{id}` must be nonnegative and finite, got {value}")]
    InvalidWeight { id: String, value: f64 },

    #[error("supernode {0} is fed by more than one damaged edge")]
    NotRadial(usize),

    #[error("precedence graph is not an outtree: {0}")]
    NotOuttree(String),

    #[error("order is not a permutation of the jobs: {0}")]
    NotPermutation(String),

    #[error("oracle-too-large: {what} is {size}, cap is {cap}")]
    OracleTooLarge {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("{value} lies outside the envelope domain [0, {max}]")]
    OutOfDomain { value: f64, max: f64 },

    #[error("invalid hardening menu for `{edge}`: {reason}")]
    InvalidMenu { edge: String, reason: String },

    #[error("hardening menu references unknown edge `{0}`")]
    UnknownMenuEdge(String),

    #[error("invalid schedule-update option {0}, expected 1, 2 or 3")]
    InvalidOption(u8),

    #[error("budget must be nonnegative and finite, got {0}")]
    InvalidBudget(f64),

    #[error("horizon {horizon} ends before the last repair completes at {completion}")]
    HorizonTooShort { horizon: f64, completion: f64 },

    #[error("sample count must be at least 1")]
    NoSamples,

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidFeeder(_) => "invalid-feeder",
            Error::UnknownEdge(_) => "unknown-edge",
            Error::DuplicateDamage(_) => "duplicate-damage",
            Error::NonPositiveRepairTime { .. } => "nonpositive-repair-time",
            Error::InvalidWeight { .. } => "invalid-weight",
            Error::NotRadial(_) => "not-radial",
            Error::NotOuttree(_) => "not-outtree",
            Error::NotPermutation(_) => "not-permutation",
            Error::OracleTooLarge { .. } => "oracle-too-large",
            Error::OutOfDomain { .. } => "out-of-domain",
            Error::InvalidMenu { .. } => "invalid-menu",
            Error::UnknownMenuEdge(_) => "unknown-menu-edge",
            Error::InvalidOption(_) => "invalid-option",
            Error::InvalidBudget(_) => "invalid-budget",
            Error::HorizonTooShort { .. } => "horizon-too-short",
            Error::NoSamples => "no-samples",
            Error::Invalid(_) => "invalid",
        }
    }
}
