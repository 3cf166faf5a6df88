use thiserror::Error;

/// Runtime errors raised by state manipulation, elements and experiments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("path `{0}` appears in both operands of a tensor product")]
    OverlappingPaths(String),
    #[error("state has zero norm")]
    ZeroState,
    #[error("dense oracle cap exceeded: {modes} modes (max {max_modes}), {photons} photons (max {max_photons})")]
    CapExceeded {
        modes: usize,
        max_modes: usize,
        photons: u32,
        max_photons: u32,
    },
    #[error("element `{element}`: photon on path `{path}` at bin {bin}, expected one of {expected:?}")]
    UnexpectedFrequency {
        element: String,
        path: String,
        bin: i64,
        expected: Vec<i64>,
    },
    #[error("invalid spec `{name}`: {reason}")]
    SpecInvariant { name: String, reason: String },
    #[error("herald clauses overlap on path `{0}`")]
    OverlappingClauses(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
