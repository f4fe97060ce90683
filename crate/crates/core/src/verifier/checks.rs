use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientVector;
use crate::constants::{
    haagerup_bq, pz_lower_bound, zero_mass_bound, ThresholdMode,
};
use crate::decimal::{Decimal, Probability};
use crate::engine::{Distribution, Engine};
use crate::error::{Error, Result};
use crate::sum::ExactSum;
use crate::weight::Weight;
use crate::weighted::{extract_constants, ConstantsReport};

/// Checks that state `n ≤ 16` enumerate with this limit.
pub const CHECK_N_MAX: usize = 16;
/// Relative slack of the fourth-moment comparison.
pub const FOURTH_MOMENT_SLACK: f64 = 1e-12;
/// Additive slack of the zero-mass comparison.
pub const ZERO_MASS_SLACK: f64 = 1e-7;
/// Additive slack of the Paley–Zygmund comparison.
pub const PZ_SLACK: f64 = 1e-12;
/// Sandwich slack, relative to `‖x‖_2`.
pub const SANDWICH_SLACK: f64 = 1e-10;
/// Relative slack of `‖ξ‖_q <= B_q ‖ξ‖_2`.
pub const UPPER_SLACK: f64 = 1e-10;

fn small_engine() -> Engine {
    Engine::new(CHECK_N_MAX)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentCheck {
    pub pass: bool,
    pub fourth_moment: f64,
    pub second_moment: f64,
    /// `3 (E ξ²)²`.
    pub bound: f64,
}

/// `E ξ⁴ <= 3 (E ξ²)²`.
pub fn check_fourth_moment(coeffs: &CoefficientVector) -> Result<FourthMomentCheck> {
    let engine = small_engine();
    let fourth = engine.exact_moment(coeffs, 4.0, None)?.absolute_moment;
    let second = engine.exact_moment(coeffs, 2.0, None)?.absolute_moment;
    let bound = 3.0 * second * second;
    Ok(FourthMomentCheck {
        pass: fourth <= bound * (1.0 + FOURTH_MOMENT_SLACK),
        fourth_moment: fourth,
        second_moment: second,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L0Check {
    pub pass: bool,
    pub a: f64,
    pub mode: ThresholdMode,
    /// `Σ x² > 1`, decided exactly; otherwise the case is vacuous.
    pub exceeds_unit_ball: bool,
    /// `P(|ξ| > a)`.
    pub tail: Option<Probability>,
    pub threshold: f64,
}

/// If `Σ x² > 1` then `P(|ξ| > a) >= threshold(a)`.
pub fn check_l0_proposition(
    coeffs: &CoefficientVector,
    a: f64,
    mode: ThresholdMode,
) -> Result<L0Check> {
    let mut out = check_l0_grid(coeffs, &[a], &[mode])?;
    Ok(out.remove(0))
}

/// [`check_l0_proposition`] for every `(a, mode)` pair with one enumeration.
pub fn check_l0_grid(
    coeffs: &CoefficientVector,
    levels: &[f64],
    modes: &[ThresholdMode],
) -> Result<Vec<L0Check>> {
    let mut thresholds = Vec::with_capacity(levels.len());
    for &a in levels {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::domain("a", a, "0 < a < 1"));
        }
        let per_mode = modes
            .iter()
            .map(|m| m.tail_threshold(a))
            .collect::<Result<Vec<_>>>()?;
        thresholds.push(per_mode);
    }
    let exceeds = coeffs.cmp_sum_squares(&Decimal::parse("1")?).is_gt();
    let tails = if exceeds {
        let ts = levels
            .iter()
            .map(|&a| Decimal::from_f64(a))
            .collect::<Result<Vec<_>>>()?;
        Some(small_engine().exact_tails(coeffs, &ts, None, true)?)
    } else {
        if coeffs.len() > CHECK_N_MAX {
            return Err(Error::DimensionTooLarge {
                n: coeffs.len(),
                max: CHECK_N_MAX,
            });
        }
        None
    };
    let mut out = Vec::with_capacity(levels.len() * modes.len());
    for (i, &a) in levels.iter().enumerate() {
        for (k, &mode) in modes.iter().enumerate() {
            let threshold = thresholds[i][k];
            let tail = tails.as_ref().map(|t| t[i].probability.clone());
            let pass = tail.as_ref().is_none_or(|p| p.value() >= threshold);
            out.push(L0Check {
                pass,
                a,
                mode,
                exceeds_unit_ball: exceeds,
                tail,
                threshold,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroMassCheck {
    pub pass: bool,
    pub prob_zero: Probability,
    /// `1 - 2e^{-2+γ}`.
    pub bound: f64,
}

/// `P(ξ = 0) <= 1 - 2e^{-2+γ}` for a nonzero coefficient vector.
pub fn check_zero_mass_bound(coeffs: &CoefficientVector) -> Result<ZeroMassCheck> {
    if coeffs.is_zero() {
        return Err(Error::InvalidCoefficients(
            "the zero-mass bound needs a nonzero coefficient vector".into(),
        ));
    }
    let prob_zero = small_engine().prob_zero(coeffs)?.probability;
    let bound = zero_mass_bound();
    Ok(ZeroMassCheck {
        pass: prob_zero.value() <= bound + ZERO_MASS_SLACK,
        prob_zero,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaleyZygmundCheck {
    pub pass: bool,
    pub lambda: f64,
    pub q: f64,
    pub norm2: f64,
    pub normq: f64,
    /// `P(ξ > λ ‖ξ‖_2)`.
    pub tail: f64,
    pub bound: f64,
}

fn validate_distribution(dist: &[(f64, f64)]) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("no atoms".into()));
    }
    for &(v, p) in dist {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidDistribution(format!("value {v} is not a finite nonnegative number")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidDistribution(format!("probability {p} is not in (0, 1]")));
        }
    }
    let total: ExactSum = dist.iter().map(|a| a.1).collect();
    if (total.value() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {}",
            total.value()
        )));
    }
    if dist.iter().all(|a| a.0 == 0.0) {
        return Err(Error::InvalidDistribution("distribution is identically zero".into()));
    }
    Ok(())
}

/// `P(ξ > λ‖ξ‖_2) >= [(1 - λ²) ‖ξ‖_2² / ‖ξ‖_q²]^{q/(q-2)}` for a
/// nonnegative discrete `ξ` given as `(value, probability)` atoms.
pub fn check_paley_zygmund(dist: &[(f64, f64)], lambda: f64, q: f64) -> Result<PaleyZygmundCheck> {
    validate_distribution(dist)?;
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::domain("q", q, "2 < q < inf"));
    }
    let second: ExactSum = dist.iter().map(|&(v, p)| p * v * v).collect();
    let qth: ExactSum = dist.iter().map(|&(v, p)| p * v.powf(q)).collect();
    let norm2 = second.value().sqrt();
    let normq = qth.value().powf(1.0 / q);
    let level = lambda * norm2;
    let tail: ExactSum = dist.iter().filter(|a| a.0 > level).map(|a| a.1).collect();
    let tail = tail.value();
    let bound = pz_lower_bound(lambda, norm2, normq, q)?.bound;
    Ok(PaleyZygmundCheck {
        pass: tail >= bound - PZ_SLACK,
        lambda,
        q,
        norm2,
        normq,
        tail,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub pass: bool,
    /// `L ‖x‖_2`.
    pub lower: f64,
    /// `‖wξ‖_p`.
    pub observed: f64,
    /// `C2 ‖x‖_2`.
    pub upper: f64,
    pub constants: ConstantsReport,
}

/// `L ‖x‖_2 <= ‖wξ‖_p <= C2 ‖x‖_2` with the extracted constants.
pub fn check_sandwich(
    weight: &Weight,
    coeffs: &CoefficientVector,
    p: f64,
    q: f64,
    mode: ThresholdMode,
) -> Result<SandwichCheck> {
    check_sandwich_with(&Engine::default(), weight, coeffs, p, q, mode)
}

pub fn check_sandwich_with(
    engine: &Engine,
    weight: &Weight,
    coeffs: &CoefficientVector,
    p: f64,
    q: f64,
    mode: ThresholdMode,
) -> Result<SandwichCheck> {
    let constants = extract_constants(weight, p, q, mode)?;
    let x2 = coeffs.norm2();
    let lower = constants.lower_factor * x2;
    let upper = constants.c2 * x2;
    if coeffs.is_zero() {
        return Ok(SandwichCheck {
            pass: true,
            lower,
            observed: 0.0,
            upper,
            constants,
        });
    }
    let observed = engine.exact_moment(coeffs, p, Some(weight))?.norm;
    let slack = SANDWICH_SLACK * x2;
    Ok(SandwichCheck {
        pass: lower <= observed + slack && observed <= upper + slack,
        lower,
        observed,
        upper,
        constants,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperKhintchineCheck {
    pub pass: bool,
    pub q: f64,
    pub norm_q: f64,
    pub norm2: f64,
    pub b_q: f64,
}

/// `‖ξ‖_q <= B_q ‖ξ‖_2`.
pub fn check_khintchine_upper(coeffs: &CoefficientVector, q: f64) -> Result<UpperKhintchineCheck> {
    let b_q = haagerup_bq(q)?;
    let norm_q = small_engine().exact_moment(coeffs, q, None)?.norm;
    let norm2 = coeffs.norm2();
    Ok(UpperKhintchineCheck {
        pass: norm_q <= b_q * norm2 * (1.0 + UPPER_SLACK),
        q,
        norm_q,
        norm2,
        b_q,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub p: f64,
    /// `‖wξ‖_p`.
    pub norm: f64,
}

/// One coefficient vector paired with the counterexample weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexamplePair {
    pub coefficients: Vec<String>,
    /// `(Σ x²)^{1/2}`.
    pub l2_norm: f64,
    pub norms: Vec<NormEntry>,
    /// Law of `wξ`.
    pub law: Distribution,
    /// `wξ = 0` with probability one, decided exactly.
    pub weighted_sum_vanishes: bool,
    /// The lower bound `‖wξ‖_p >= L ‖x‖_2` fails for every `L > 0`.
    pub violates_lower_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRejection {
    pub mode: ThresholdMode,
    pub rejected: bool,
    pub s: f64,
    pub threshold: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    /// `w = 1_{r_1 + r_2 != 0}`.
    pub weight: Weight,
    pub s: Probability,
    /// `x = (1, -1)`: `ξ = r_1 - r_2` vanishes wherever `w != 0`.
    pub corrected: CounterexamplePair,
    /// `x = (1, 1)`: here `wξ = ξ`, no violation.
    pub literal: CounterexamplePair,
    pub rejections: Vec<ModeRejection>,
}

fn counterexample_pair(weight: &Weight, xs: &[&str]) -> Result<CounterexamplePair> {
    let coeffs = CoefficientVector::parse(xs)?;
    let engine = Engine::default();
    let law = engine.exact_distribution(&coeffs, Some(weight))?;
    let vanishes = !law.tolerance_mode
        && law.atoms.len() == 1
        && law.atoms[0].exact_value.as_deref() == Some("0")
        && law.atoms[0].probability == Probability::one();
    let norms = [1.0, 2.0]
        .into_iter()
        .map(|p| {
            engine
                .exact_moment(&coeffs, p, Some(weight))
                .map(|m| NormEntry { p, norm: m.norm })
        })
        .collect::<Result<Vec<_>>>()?;
    let l2_norm = coeffs.norm2();
    Ok(CounterexamplePair {
        coefficients: coeffs.texts(),
        l2_norm,
        norms,
        law,
        weighted_sum_vanishes: vanishes,
        violates_lower_bound: vanishes && l2_norm > 0.0,
    })
}

/// The weight `1_{r_1 + r_2 != 0}` with `s = 1/2` defeats the lower bound.
pub fn counterexample_demo() -> CounterexampleReport {
    let weight = Weight::sign_function(2, &["1", "0", "0", "1"], None)
        .expect("fixed weight is valid");
    let corrected = counterexample_pair(&weight, &["1", "-1"]).expect("fixed pair");
    let literal = counterexample_pair(&weight, &["1", "1"]).expect("fixed pair");
    let s = crate::weight::weight_stats(&weight, 2.0)
        .expect("fixed weight")
        .s;
    let rejections = ThresholdMode::ALL
        .into_iter()
        .map(|mode| match extract_constants(&weight, 1.0, 2.0, mode) {
            Err(e @ Error::BelowThreshold { s, threshold, .. }) => ModeRejection {
                mode,
                rejected: true,
                s,
                threshold,
                message: e.to_string(),
            },
            Err(e) => ModeRejection {
                mode,
                rejected: false,
                s: 0.5,
                threshold: mode.min_nonzero_mass(),
                message: e.to_string(),
            },
            Ok(_) => ModeRejection {
                mode,
                rejected: false,
                s: 0.5,
                threshold: mode.min_nonzero_mass(),
                message: "accepted".into(),
            },
        })
        .collect();
    CounterexampleReport {
        weight,
        s,
        corrected,
        literal,
        rejections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(xs: &[&str]) -> CoefficientVector {
        CoefficientVector::parse(xs).unwrap()
    }

    #[test]
    fn fourth_moment_examples() {
        let c = check_fourth_moment(&cv(&["1", "1"])).unwrap();
        assert!(c.pass);
        assert_eq!((c.fourth_moment, c.bound), (8.0, 12.0));
        let c = check_fourth_moment(&cv(&["1"])).unwrap();
        assert_eq!((c.fourth_moment, c.bound), (1.0, 3.0));
        let c = check_fourth_moment(&cv(&["0.6", "0.8"])).unwrap();
        assert!(c.pass && (c.fourth_moment - 1.9216).abs() < 1e-14);
        let big: Vec<String> = (1..=17).map(|i| i.to_string()).collect();
        assert!(matches!(
            check_fourth_moment(&CoefficientVector::parse(&big).unwrap()),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn l0_examples() {
        let c = check_l0_proposition(&cv(&["1.1"]), 0.5, ThresholdMode::Classic).unwrap();
        assert!(c.pass && c.exceeds_unit_ball);
        assert_eq!(c.tail.unwrap().value(), 1.0);
        assert_eq!(c.threshold, 0.1875);
        let c = check_l0_proposition(&cv(&["0.6", "0.8"]), 0.3, ThresholdMode::Refined).unwrap();
        assert!(c.pass && !c.exceeds_unit_ball && c.tail.is_none());
        let c = check_l0_proposition(&cv(&["0.8", "0.8"]), 0.5, ThresholdMode::Classic).unwrap();
        assert!(c.pass);
        assert_eq!(c.tail.unwrap().to_string(), "1/2");
        assert!(check_l0_proposition(&cv(&["1"]), 1.0, ThresholdMode::Classic).is_err());
        assert!(check_l0_proposition(&cv(&["1"]), 0.0, ThresholdMode::Refined).is_err());
    }

    #[test]
    fn zero_mass_examples() {
        let c = check_zero_mass_bound(&cv(&["1", "1"])).unwrap();
        assert!(c.pass);
        assert_eq!(c.prob_zero.to_string(), "1/2");
        assert_eq!(check_zero_mass_bound(&cv(&["1"])).unwrap().prob_zero.value(), 0.0);
        assert_eq!(
            check_zero_mass_bound(&cv(&["1", "2", "3"])).unwrap().prob_zero.to_string(),
            "1/4"
        );
        assert!(check_zero_mass_bound(&cv(&["0", "0"])).is_err());
    }

    #[test]
    fn paley_zygmund_examples() {
        let c = check_paley_zygmund(&[(2.0, 0.5), (0.0, 0.5)], 0.5, 4.0).unwrap();
        assert!(c.pass);
        assert_eq!(c.tail, 0.5);
        assert!((c.bound - 0.28125).abs() < 1e-15);
        let c = check_paley_zygmund(&[(1.0, 1.0)], 0.0, 3.0).unwrap();
        assert!(c.pass && c.tail == 1.0 && (c.bound - 1.0).abs() < 1e-15);
        let c = check_paley_zygmund(&[(1.0, 1.0)], 1.0, 4.0).unwrap();
        assert!(c.pass && c.tail == 0.0 && c.bound == 0.0);
        assert!(check_paley_zygmund(&[(1.0, 1.0)], 0.5, 2.0).is_err());
        assert!(check_paley_zygmund(&[(1.0, 0.5)], 0.5, 3.0).is_err());
        assert!(check_paley_zygmund(&[(0.0, 1.0)], 0.5, 3.0).is_err());
        assert!(check_paley_zygmund(&[(-1.0, 1.0)], 0.5, 3.0).is_err());
        assert!(check_paley_zygmund(&[], 0.5, 3.0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let w = Weight::independent(&[("1", "0.8"), ("0", "0.2")]).unwrap();
        let c = check_sandwich(&w, &cv(&["1"]), 1.0, 4.0, ThresholdMode::Classic).unwrap();
        assert!(c.pass);
        assert!((c.observed - 0.8).abs() < 1e-15);
        assert!((c.lower - 0.010_830_656_541_096_877_5).abs() < 1e-15);
        assert!((c.upper - 0.945_741_609_003_175_8).abs() < 1e-15);

        let one = Weight::constant_one();
        let c = check_sandwich(&one, &cv(&["1", "1"]), 2.0, 4.0, ThresholdMode::Classic).unwrap();
        assert!(c.pass);
        assert!((c.observed - 2f64.sqrt()).abs() < 1e-12);

        let w = Weight::independent(&[("2", "0.5"), ("0.5", "0.3"), ("0", "0.2")]).unwrap();
        let c = check_sandwich(&w, &cv(&["0.6", "0.8"]), 1.0, 4.0, ThresholdMode::Classic).unwrap();
        assert!(c.pass);
        // E|wξ| = E w · E|ξ| = 1.15 · 0.8
        assert!((c.observed - 0.92).abs() < 1e-14);

        let c = check_sandwich(&w, &cv(&["0", "0"]), 1.0, 4.0, ThresholdMode::Refined).unwrap();
        assert!(c.pass && c.observed == 0.0);
    }

    #[test]
    fn upper_khintchine() {
        let c = check_khintchine_upper(&cv(&["1", "1", "1"]), 4.0).unwrap();
        assert!(c.pass);
        // E ξ⁴ = 3·9 - 2·3 = 21
        assert!((c.norm_q - 21f64.powf(0.25)).abs() < 1e-14);
        assert!(check_khintchine_upper(&cv(&["1"]), 1.5).is_err());
    }

    #[test]
    fn counterexample() {
        let r = counterexample_demo();
        assert_eq!(r.s.to_string(), "1/2");
        assert!(r.corrected.weighted_sum_vanishes && r.corrected.violates_lower_bound);
        assert_eq!(r.corrected.norms[0].norm, 0.0);
        assert_eq!(r.corrected.norms[1].norm, 0.0);
        assert_eq!(r.corrected.l2_norm, 2f64.sqrt());
        assert!(!r.corrected.law.tolerance_mode);
        assert!(!r.literal.violates_lower_bound);
        assert_eq!(r.literal.norms[0].norm, 1.0);
        assert!(r.rejections.iter().all(|m| m.rejected));
        assert_eq!(r.rejections[0].threshold, 2.0 / 3.0);
        assert!((r.rejections[1].threshold - 0.517_916_119_692_755_85).abs() < 1e-15);
    }
}
