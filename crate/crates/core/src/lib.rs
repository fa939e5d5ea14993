//! Physical-sector extraction from commuting-measurement frequency data.
//!
//! Given relative frequencies f_j of commuting outcomes Π_j = Σ_l c_jl |l⟩⟨l|,
//! the crate finds the smallest set of basis levels that supports the
//! unknown state, with a Hoeffding-style reliability index at every step.
//!
//! * [`numerics`]: pseudoinverse and minimum-norm solves
//! * [`measurement`]: coefficient matrices, Born probabilities
//! * [`states`]: reference diagonal states
//! * [`simulate`]: multinomial frequency data
//! * [`extraction`]: diagonal hint, decision observables, the extraction loop
//! * [`campaign`]: seeded simulation campaigns
//! * [`cli`]: the `physector` command line
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod campaign;
pub mod cli;
pub mod error;
pub mod extraction;
pub mod measurement;
pub mod numerics;
pub mod simulate;
pub mod states;

pub use error::{Error, Result};
pub use extraction::{
    build_decision_observable, decision_statistic, diagonal_hint, diagonal_hint_from,
    hoeffding_sample_size, run_psep, BasisOrder, DecisionObservable, DecisionStatistic,
    DecisionSystem, ExtractionReport, ExtractionStatus, PsepConfig,
};
pub use measurement::{random_measurement, CommutingMeasurement, ProbabilityVector};
pub use numerics::{min_norm_solve, pseudoinverse, RealMatrix, SolveResult};
pub use simulate::{sample_frequencies, FrequencyRecord};
pub use states::{
    even_cat_diagonal, fock_mixture, hybrid_pure_state, DiagonalState, SectorIndexSet,
};
