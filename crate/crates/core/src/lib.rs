//! Linear processes with truncated filters and tapered heavy-tailed innovations.
//!
//! The crate covers four layers:
//!
//! * [`innovations`]: Pareto and tapered Pareto samplers, their moments and the
//!   hard/soft/intermediate taper classification.
//! * [`filters`]: power-law coefficient families (long-range, short-range,
//!   negative dependence) and their truncation at lag `λ(n) = ⌊c·n^γ1⌋`.
//! * [`partial_sums`]: partial-sum coefficients, exact finite-n moments,
//!   normalizers, path simulation, Lyapunov fractions and the coupling estimate
//!   between tapered and untapered innovations.
//! * [`limit_laws`]: the Gaussian and α-stable limits, their constants,
//!   kernels and characteristic functions.
//!
//! [`mc_harness`] ties them together into Monte Carlo comparison reports.

pub mod error;
pub mod filters;
pub mod innovations;
pub mod limit_laws;
pub mod mc_harness;
pub mod partial_sums;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use filters::{Dependence, FilterSpec, TaperRegime, TaperedFilter};
pub use innovations::{InnovationKind, InnovationLaw, InnovationSpec, TailIndex, TaperClass, TaperLevel};
pub use limit_laws::{GaussianLimit, StableLimit, TfKernel};
pub use mc_harness::{ComparisonReport, ExperimentPlan, ReportRow};
pub use partial_sums::{CaseIndex, CoefficientProfile, Normalizer, NormalizerMode, RegimeSpec};
