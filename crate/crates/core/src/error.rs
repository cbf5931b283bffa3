use alloc::string::String;

use crate::levels::Level;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ill-posed dimer: equal site energies with zero coupling leave the exciton basis undefined")]
    DegenerateModel,

    #[error("degenerate dipole geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("{quantity} outside its domain: {value}")]
    Domain { quantity: &'static str, value: f64 },

    #[error("no optical coherence propagator for |{0:?}><{1:?}|")]
    UnknownCoherence(Level, Level),

    #[error("singular pulse toolbox: carriers {freq_plus} and {freq_minus} cm^-1 give |det| = {determinant:e}")]
    SingularToolbox {
        freq_plus: f64,
        freq_minus: f64,
        determinant: f64,
    },

    #[error("singular orientation block {block}: condition number {condition:e}")]
    SingularGeometry { block: &'static str, condition: f64 },

    #[error("Redfield rates failed a consistency check: {0}")]
    InconsistentRates(&'static str),

    #[error("final-state term tagged {family} ends in |{population:?}><{population:?}|")]
    InconsistentFinalState { family: &'static str, population: Level },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
