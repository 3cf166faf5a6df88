//! Simulator for frequency-bin photonic circuits built from acousto-optic
//! modulators, biphoton sources, frequency filters and heralding detectors.
//!
//! States live on modes labelled by a beam path and an integer frequency bin
//! (`ω + n·δ`). Elements are single-photon mode maps lifted bosonically to
//! multi-photon Fock states; a dense permanent-based oracle checks the lift.

pub mod dsl;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod state;

pub use elements::{
    apply_element, apply_filter, check_bandwidth, make_aom, make_source, AomSpec, BandwidthCheck, Convention,
    ElementOp, FilterSpec, SourceSpec,
};
pub use error::{Error, Result};
pub use experiments::{
    enumerate_outcomes, post_select, post_select_unresolved, run_ghz, run_ghz_with, run_swap, GhzConfig, GhzResult,
    HeraldClause, HeraldOutcome, HeraldRule, PostSelection, SwapResult,
};
pub use oracle::{dense_oracle_apply, OracleCaps};
pub use state::{inner, ket, tensor, DensityMatrix, FockKet, ModeLabel, StateVector};
