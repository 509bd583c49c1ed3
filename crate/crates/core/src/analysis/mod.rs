//! Diagnostics, entropy fluxes, exact solutions and estimate checks.

pub mod diagnostics;
pub mod entropy;
pub mod estimates;
pub mod exact;
pub mod studies;

pub use diagnostics::{l1_distance, l1_norm, mass, tv, tv_axes, DiagnosticsReport};
pub use entropy::{entropy_flux_pair, entropy_residual, Entropy, EntropyFluxPair};
pub use estimates::{check_estimates, EstimateContext, MarginRow};
pub use exact::{exact_evaluate, ExactSolution};
