//! Randomized and fixed checks of the inequalities behind the weighted
//! Khintchine theorem, each against an exact enumeration oracle.

mod checks;
mod generator;
mod suites;

pub use checks::*;
pub use generator::{mix64, CaseGenerator, CoefficientLaw, WeightLaw};
pub use suites::{
    run_suite, run_suite_named, Failure, Suite, SuiteReport, L0_LEVELS, PZ_LAMBDAS, PZ_MAX_ATOMS,
    PZ_QS, UPPER_QS,
};
