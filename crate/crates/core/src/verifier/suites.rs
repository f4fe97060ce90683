use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::{zero_mass_bound, ThresholdMode};
use crate::error::{Error, Result};

use super::checks::{
    check_fourth_moment, check_khintchine_upper, check_l0_grid, check_paley_zygmund,
    check_sandwich, check_zero_mass_bound,
};
use super::generator::CaseGenerator;

/// Tail levels of the L⁰ suite.
pub const L0_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
/// `λ` grid of the Paley–Zygmund suite.
pub const PZ_LAMBDAS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const PZ_QS: [f64; 3] = [2.5, 3.0, 4.0];
pub const PZ_MAX_ATOMS: usize = 8;
pub const UPPER_QS: [f64; 4] = [2.5, 3.0, 4.0, 6.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FourthMoment,
    L0,
    ZeroMass,
    PaleyZygmund,
    /// Weights with `s > 2/3`, both modes.
    Sandwich,
    /// Weights with `s > 1 - 2e^{-2+γ}`, refined mode.
    SandwichRefined,
    KhintchineUpper,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::FourthMoment,
        Suite::L0,
        Suite::ZeroMass,
        Suite::PaleyZygmund,
        Suite::Sandwich,
        Suite::SandwichRefined,
        Suite::KhintchineUpper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FourthMoment => "fourth-moment",
            Suite::L0 => "l0",
            Suite::ZeroMass => "zero-mass",
            Suite::PaleyZygmund => "paley-zygmund",
            Suite::Sandwich => "sandwich",
            Suite::SandwichRefined => "sandwich-refined",
            Suite::KhintchineUpper => "khintchine-upper",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: u64,
    pub case_seed: u64,
    pub inputs: Value,
    /// The bound the observed value had to respect.
    pub expected: Option<f64>,
    pub observed: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub case_count: u64,
    pub pass_count: u64,
    /// Ordered by case index.
    pub failures: Vec<Failure>,
    pub wall_time_seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Miss {
    inputs: Value,
    expected: Option<f64>,
    observed: Option<f64>,
    detail: String,
}

impl Miss {
    fn new(inputs: Value, expected: f64, observed: f64, detail: impl Into<String>) -> Self {
        Self {
            inputs,
            expected: Some(expected),
            observed: Some(observed),
            detail: detail.into(),
        }
    }
}

/// Runs `cases` generated cases of `suite`; deterministic given the seed.
pub fn run_suite(gen: &CaseGenerator, suite: Suite, cases: u64) -> SuiteReport {
    let start = Instant::now();
    let outcomes: Vec<Option<Miss>> = (0..cases)
        .into_par_iter()
        .map(|i| run_case(gen, suite, i))
        .collect();
    let failures: Vec<Failure> = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, m)| {
            m.map(|m| Failure {
                index: i as u64,
                case_seed: gen.case_seed(i as u64),
                inputs: m.inputs,
                expected: m.expected,
                observed: m.observed,
                detail: m.detail,
            })
        })
        .collect();
    SuiteReport {
        suite,
        seed: gen.seed,
        case_count: cases,
        pass_count: cases - failures.len() as u64,
        failures,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    }
}

/// [`run_suite`] by suite name.
pub fn run_suite_named(gen: &CaseGenerator, suite: &str, cases: u64) -> Result<SuiteReport> {
    Ok(run_suite(gen, suite.parse()?, cases))
}

fn run_case(gen: &CaseGenerator, suite: Suite, index: u64) -> Option<Miss> {
    let mut rng = gen.rng(index);
    let mut inputs = json!({});
    let outcome = (|| -> Result<Option<Miss>> {
        match suite {
            Suite::FourthMoment => {
                let c = gen.coefficients(&mut rng);
                inputs = json!({ "coefficients": c.texts() });
                let r = check_fourth_moment(&c)?;
                Ok((!r.pass).then(|| {
                    Miss::new(inputs.clone(), r.bound, r.fourth_moment, "E xi^4 > 3 (E xi^2)^2")
                }))
            }
            Suite::L0 => {
                let c = gen.coefficients_in_shell(&mut rng, 1.0, 4.0);
                inputs = json!({ "coefficients": c.texts() });
                let checks = check_l0_grid(&c, &L0_LEVELS, &ThresholdMode::ALL)?;
                Ok(checks.into_iter().find(|r| !r.pass).map(|r| {
                    Miss::new(
                        json!({ "coefficients": c.texts(), "a": r.a, "mode": r.mode }),
                        r.threshold,
                        r.tail.map_or(f64::NAN, |t| t.value()),
                        "P(|xi| > a) below the tail threshold with sum x^2 > 1",
                    )
                }))
            }
            Suite::ZeroMass => {
                let c = gen.coefficients(&mut rng);
                inputs = json!({ "coefficients": c.texts() });
                let r = check_zero_mass_bound(&c)?;
                Ok((!r.pass).then(|| {
                    Miss::new(inputs.clone(), r.bound, r.prob_zero.value(), "P(xi = 0) above the bound")
                }))
            }
            Suite::PaleyZygmund => {
                let dist = gen.distribution(&mut rng, PZ_MAX_ATOMS);
                inputs = json!({ "distribution": dist });
                for q in PZ_QS {
                    for lambda in PZ_LAMBDAS {
                        let r = check_paley_zygmund(&dist, lambda, q)?;
                        if !r.pass {
                            return Ok(Some(Miss::new(
                                json!({ "distribution": dist, "lambda": lambda, "q": q }),
                                r.bound,
                                r.tail,
                                "P(xi > lambda |xi|_2) below the bound",
                            )));
                        }
                    }
                }
                Ok(None)
            }
            Suite::Sandwich | Suite::SandwichRefined => {
                let (min_s, modes): (f64, &[ThresholdMode]) = if suite == Suite::Sandwich {
                    (2.0 / 3.0, &ThresholdMode::ALL)
                } else {
                    (zero_mass_bound(), &[ThresholdMode::Refined])
                };
                let w = gen.weight(&mut rng, min_s);
                let c = gen.coefficients(&mut rng);
                let (p, q) = gen.exponents(&mut rng);
                inputs = json!({ "weight": w, "coefficients": c.texts(), "p": p, "q": q });
                for &mode in modes {
                    let r = check_sandwich(&w, &c, p, q, mode)?;
                    if !r.pass {
                        let (bound, side) = if r.observed < r.lower {
                            (r.lower, "lower")
                        } else {
                            (r.upper, "upper")
                        };
                        let mut inputs = inputs.clone();
                        inputs["mode"] = json!(mode);
                        return Ok(Some(Miss::new(
                            inputs,
                            bound,
                            r.observed,
                            format!("{side} bound violated"),
                        )));
                    }
                }
                Ok(None)
            }
            Suite::KhintchineUpper => {
                let c = gen.coefficients(&mut rng);
                inputs = json!({ "coefficients": c.texts() });
                for q in UPPER_QS {
                    let r = check_khintchine_upper(&c, q)?;
                    if !r.pass {
                        return Ok(Some(Miss::new(
                            json!({ "coefficients": c.texts(), "q": q }),
                            r.b_q * r.norm2,
                            r.norm_q,
                            "|xi|_q > B_q |xi|_2",
                        )));
                    }
                }
                Ok(None)
            }
        }
    })();
    match outcome {
        Ok(m) => m,
        Err(e) => Some(Miss {
            inputs,
            expected: None,
            observed: None,
            detail: e.to_string(),
        }),
    }
}
