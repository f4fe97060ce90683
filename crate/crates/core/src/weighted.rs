//! Explicit constants of the weighted Khintchine inequality
//! `L (Σx²)^{1/2} <= ‖wξ‖_p <= C2 (Σx²)^{1/2}`, built step by step from
//! the weight's law.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::constants::{khintchine_upper_constant, ThresholdMode};
use crate::decimal::Probability;
use crate::error::{Error, Result};
use crate::weight::{delta0, weight_stats, Weight};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub mode: ThresholdMode,
    pub p: f64,
    pub q: f64,
    /// `1/p = 1/q + 1/r`.
    pub r: f64,
    /// `P(w != 0)`.
    pub s: f64,
    pub s_exact: Probability,
    /// Tail budget `b`, with `1 - s < b < sup_a threshold(a)`.
    pub b: f64,
    /// Tail level with `threshold(a) = b`.
    pub a: f64,
    /// `(s + 1 - b) / 2`.
    pub tau: f64,
    pub delta0: f64,
    /// `δ₀^{-1} (b - 1 + τ)^{-1/p}`.
    pub t: f64,
    /// `L = a / t`.
    pub lower_factor: f64,
    /// `C1 = t / a = 1 / L`.
    pub c1: f64,
    pub k_r2: f64,
    pub w_q: f64,
    /// `C2 = ‖w‖_q k_{r,2}`.
    pub c2: f64,
    /// `s` must exceed this in the chosen mode.
    pub threshold: f64,
}

fn above_threshold(s: &Probability, mode: ThresholdMode) -> bool {
    match mode {
        ThresholdMode::Classic => {
            *s.ratio() > BigRational::new(2.into(), 3.into())
        }
        ThresholdMode::Refined => s.value() > mode.min_nonzero_mass(),
    }
}

pub fn extract_constants(
    weight: &Weight,
    p: f64,
    q: f64,
    mode: ThresholdMode,
) -> Result<ConstantsReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("p", p, "0 < p < inf"));
    }
    if !(q > p && q.is_finite()) {
        return Err(Error::domain("q", q, "p < q < inf"));
    }
    let stats = weight_stats(weight, q)?;
    let s = stats.s.value();
    let threshold = mode.min_nonzero_mass();
    let below = || Error::BelowThreshold { s, threshold, mode };
    if !above_threshold(&stats.s, mode) {
        return Err(below());
    }
    let b = ((1.0 - s) + mode.budget_cap()) / 2.0;
    let a = mode.level_for_budget(b).map_err(|_| below())?;
    if a <= 0.0 {
        // s so close to the threshold that no positive level fits the budget
        return Err(below());
    }
    let tau = (s + 1.0 - b) / 2.0;
    let delta0 = delta0(weight, tau)?;
    let t = (b - 1.0 + tau).powf(-1.0 / p) / delta0;
    let r = p * q / (q - p);
    let k_r2 = khintchine_upper_constant(r)?;
    let w_q = stats.norm_q;
    Ok(ConstantsReport {
        mode,
        p,
        q,
        r,
        s,
        s_exact: stats.s,
        b,
        a,
        tau,
        delta0,
        t,
        lower_factor: a / t,
        c1: t / a,
        k_r2,
        w_q,
        c2: w_q * k_r2,
        threshold,
    })
}

/// `(lo, hi)` with `lo <= ‖wξ‖_{p1} / ‖wξ‖_{p2} <= hi` for every nonzero
/// coefficient vector.
pub fn comparability_factors(
    weight: &Weight,
    p1: f64,
    p2: f64,
    q: f64,
    mode: ThresholdMode,
) -> Result<(f64, f64)> {
    let first = extract_constants(weight, p1, q, mode)?;
    let second = extract_constants(weight, p2, q, mode)?;
    Ok((
        first.lower_factor / second.c2,
        first.c2 / second.lower_factor,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::l0_tail_threshold_refined;
    use crate::decimal::Decimal;

    fn eighty() -> Weight {
        Weight::independent(&[("1", "0.8"), ("0", "0.2")]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn worked_classic_case() {
        let c = extract_constants(&eighty(), 1.0, 4.0, ThresholdMode::Classic).unwrap();
        assert!(rel(c.b, 4.0 / 15.0) < 1e-15);
        // 30-digit evaluation
        assert!(rel(c.a, 0.324_919_696_232_906_326_155_871_4) < 1e-13);
        assert!(rel(c.tau, 23.0 / 30.0) < 1e-15);
        assert_eq!(c.delta0, 1.0);
        assert!(rel(c.t, 30.0) < 1e-12);
        assert!(rel(c.lower_factor, 0.010_830_656_541_096_877_538_529_047_07) < 1e-12);
        assert!(rel(c.c1 * c.lower_factor, 1.0) < 1e-15);
        assert!(rel(c.r, 4.0 / 3.0) < 1e-15);
        assert_eq!(c.k_r2, 1.0);
        assert!(rel(c.c2, 0.945_741_609_003_175_813_3) < 1e-14);
        assert!((c.b - (1.0 - c.a * c.a).powi(2) / 3.0).abs() < 1e-10);
    }

    #[test]
    fn worked_case_larger_r() {
        let c = extract_constants(&eighty(), 2.0, 4.0, ThresholdMode::Classic).unwrap();
        assert!(rel(c.t, 30f64.sqrt()) < 1e-12);
        assert!(rel(c.lower_factor, 0.059_321_949_001_496_38) < 1e-12);
        assert!(rel(c.c2, 1.244_665_954_576_956_666) < 1e-12);
    }

    #[test]
    fn constant_weight() {
        let c = extract_constants(&Weight::constant_one(), 2.0, 4.0, ThresholdMode::Classic).unwrap();
        assert_eq!(c.s, 1.0);
        // b = (0 + 1/3) / 2, a = (1 - 2^{-1/2})^{1/2}, t = 12^{1/2}
        assert!(rel(c.b, 1.0 / 6.0) < 1e-15);
        assert!(rel(c.a, 0.541_196_100_146_196_984_399_7) < 1e-14);
        assert!(rel(c.t, 3.464_101_615_137_754_587_054_9) < 1e-14);
        assert!(rel(c.c2, 3f64.powf(0.25)) < 1e-14);
    }

    #[test]
    fn refined_mode_solves_budget() {
        let w = Weight::independent(&[("1", "0.6"), ("0", "0.4")]).unwrap();
        assert!(matches!(
            extract_constants(&w, 1.0, 3.0, ThresholdMode::Classic),
            Err(Error::BelowThreshold { .. })
        ));
        let c = extract_constants(&w, 1.0, 3.0, ThresholdMode::Refined).unwrap();
        let beta = l0_tail_threshold_refined(c.a).unwrap();
        assert!((beta - c.b).abs() <= 1e-8 && beta >= c.b);
        assert!(c.b > 1.0 - c.s && c.b - 1.0 + c.tau > 0.0);
        assert!(0.0 < c.a && c.a < 1.0);
        let expect_t = c.delta0.recip() * (c.b - 1.0 + c.tau).powf(-1.0 / c.p);
        assert!(rel(c.t, expect_t) < 1e-10);
    }

    #[test]
    fn counterexample_weight_rejected() {
        let w = Weight::sign_function(2, &["1", "0", "0", "1"], None).unwrap();
        for mode in ThresholdMode::ALL {
            match extract_constants(&w, 1.0, 2.0, mode) {
                Err(Error::BelowThreshold { s, threshold, .. }) => {
                    assert_eq!(s, 0.5);
                    assert_eq!(threshold, mode.min_nonzero_mass());
                }
                other => panic!("expected rejection, got {other:?}"),
            }
        }
    }

    #[test]
    fn exactly_two_thirds_is_rejected() {
        let w = Weight::independent(&[("1", "0.666666666666666666666666"), ("0", "0.333333333333333333333334")])
            .unwrap();
        assert!(extract_constants(&w, 1.0, 2.0, ThresholdMode::Classic).is_err());
        let w = Weight::sign_function(
            2,
            &["1", "1", "0", "0"],
            Some(&[("1", "0.5"), ("2", "0.5")]),
        )
        .unwrap();
        assert!(extract_constants(&w, 1.0, 2.0, ThresholdMode::Classic).is_err());
    }

    #[test]
    fn exponent_domain() {
        assert!(extract_constants(&eighty(), 2.0, 2.0, ThresholdMode::Classic).is_err());
        assert!(extract_constants(&eighty(), 0.0, 2.0, ThresholdMode::Classic).is_err());
        assert!(extract_constants(&eighty(), 1.0, f64::INFINITY, ThresholdMode::Classic).is_err());
    }

    #[test]
    fn scaling_covariance() {
        let w = Weight::independent(&[("2", "0.5"), ("0.5", "0.3"), ("0", "0.2")]).unwrap();
        let c = Decimal::parse("2.5").unwrap();
        let scaled = w.scaled_by(&c).unwrap();
        for mode in ThresholdMode::ALL {
            let a = extract_constants(&w, 1.0, 4.0, mode).unwrap();
            let b = extract_constants(&scaled, 1.0, 4.0, mode).unwrap();
            assert_eq!((a.s, a.a, a.b, a.tau), (b.s, b.a, b.b, b.tau));
            assert!(rel(b.delta0, 2.5 * a.delta0) < 1e-14);
            assert!(rel(b.w_q, 2.5 * a.w_q) < 1e-14);
            assert!(rel(b.lower_factor, 2.5 * a.lower_factor) < 1e-14);
            assert!(rel(b.c2, 2.5 * a.c2) < 1e-14);
        }
    }

    #[test]
    fn comparability() {
        let one = Weight::constant_one();
        let (lo, hi) = comparability_factors(&one, 1.5, 1.5, 4.0, ThresholdMode::Classic).unwrap();
        assert!(lo <= 1.0 && 1.0 <= hi);
        let (lo, hi) = comparability_factors(&eighty(), 1.0, 2.0, 4.0, ThresholdMode::Classic).unwrap();
        assert!(lo > 0.0 && hi.is_finite() && lo <= hi);
        let ratio = 0.8 / 0.8f64.sqrt();
        assert!(lo <= ratio && ratio <= hi);
    }
}
