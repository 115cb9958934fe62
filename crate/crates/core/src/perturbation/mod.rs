//! Admissible sets `L(r)`, candidate configurations, random perturbations
//! and the end-to-end construction.

pub mod candidates;
pub mod lset;
pub mod omega;
pub mod pipeline;

pub use candidates::{build_candidate_sets, build_rows, CandidateParams, CandidateSets, Window};
pub use lset::{pos_r, pos_t, LBuilder, LParams, LSet, LWitness, WitnessGamma, WitnessRow};
pub use omega::{
    estimate_failure_probability, find_return_words, omega_zero_membership, select_omega, verify_omega, wilson_interval,
    FailureEstimate, Membership, OmegaSelection, OmegaSpace, Rejector, Returns,
};
pub use pipeline::{prepare, run_theorem1, Grids, PipelineConfig, Prepared, ResolvedGrids, RunOutput, RunReport, StageTiming};
