//! Entanglement-rate toolkit for small multipartite states: dense complex
//! linear algebra, labelled registers with partial trace and purification,
//! hashing-style rate bounds with helper measurements, and Monte-Carlo
//! decoupling experiments on typical subspaces.

pub mod densemat;
pub mod examples;
pub mod measure;
pub mod qstate;
pub mod rates;
pub mod typicality;

pub use densemat::{
    fidelity, herm_eig, purified_distance, set_tolerance, tolerance, trace_distance, trace_norm,
    CMatrix, EigResult, MatError,
};
pub use measure::{
    avg_hashing_rate, convexity_witness, cq_assistance, measure_helper, MeasureError,
    MeasurementEnsemble, Outcome, Povm,
};
pub use qstate::{cnot, MultiState, QStateError, Register, RoleMap, StateDescription};
pub use rates::{
    assisted_lower_bound_l, beats_hashing, chain_hierarchical_rate, coherent_info,
    conditional_entropy, cut_upper_bound_report, fannes_bound, hashing_bound, log_base,
    min_cut_coherent_info, set_log_base, von_neumann, ChainLink, RateReport, RatesError,
};
pub use typicality::{
    decoupling_experiment, haar_unitary, random_typical_measurement, typical_projector,
    DecouplingConfig, DecouplingStats, TrialStats, TypError, TypicalSubspace,
};
