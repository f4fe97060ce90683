//! Exact and sampled computations for weighted Rademacher sums `wξ`,
//! where `ξ = Σ r_i x_i`, together with the constants of the weighted
//! Khintchine inequality and randomized checks of the underlying lemmas.

pub mod cli;
pub mod coeffs;
pub mod constants;
pub mod decimal;
pub mod engine;
pub mod error;
pub mod montecarlo;
pub mod sum;
pub mod verifier;
pub mod weight;
pub mod weighted;

pub use coeffs::CoefficientVector;
pub use constants::ThresholdMode;
pub use decimal::{Decimal, ExactDecimal, Probability};
pub use engine::{
    exact_distribution, exact_moment, exact_tail, prob_zero, Distribution, Engine, Method,
    MomentReport, TailProbability,
};
pub use error::{Error, Result};
pub use montecarlo::{mc_moment, mc_tail, McConfig, McTail};
pub use verifier::{counterexample_demo, run_suite, CaseGenerator, Suite, SuiteReport};
pub use weight::{delta0, weight_stats, Weight, WeightSpec, WeightStats};
pub use weighted::{comparability_factors, extract_constants, ConstantsReport};
