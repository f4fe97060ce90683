//! Special constants and one-dimensional bound functions.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `2 e^{-2+γ}`: the limit of `B_q^{-2q/(q-2)}` as `q ↓ 2`.
pub fn euler_limit() -> f64 {
    2.0 * (EULER_GAMMA - 2.0).exp()
}

/// `1 - 2 e^{-2+γ}`, the largest possible zero mass of a nonzero Rademacher sum.
pub fn zero_mass_bound() -> f64 {
    1.0 - euler_limit()
}

// Lanczos approximation, g = 7, n = 9 (the coefficient set used by GSL).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const GAMMA_MAX_ARG: f64 = 171.0;

fn lanczos_series(x: f64) -> f64 {
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64))
}

/// Γ(x) for `0 < x <= 171`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= GAMMA_MAX_ARG) {
        return Err(Error::domain("x", x, "0 < x <= 171"));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    // split the power so that w^(z+1/2) does not overflow near x = 171
    let half = w.powf((z + 0.5) / 2.0);
    (2.0 * PI).sqrt() * half * (half * (-w).exp()) * lanczos_series(z)
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain("x", x, "x > 0"));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * w.ln() - w + lanczos_series(z).ln()
}

fn ln_haagerup(q: f64) -> f64 {
    0.5 * LN_2 + (ln_gamma_unchecked((q + 1.0) / 2.0) - 0.5 * PI.ln()) / q
}

/// Haagerup's best upper Khintchine constant
/// `B_q = √2 (Γ((q+1)/2)/√π)^{1/q}` for `q >= 2`.
pub fn haagerup_bq(q: f64) -> Result<f64> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::domain("q", q, "q >= 2"));
    }
    if q == 2.0 {
        return Ok(1.0);
    }
    Ok(ln_haagerup(q).exp())
}

/// Constant `k_{r,2}` with `‖ξ‖_r <= k_{r,2} ‖ξ‖_2`: 1 for `r <= 2`,
/// `B_r` above.
pub fn khintchine_upper_constant(r: f64) -> Result<f64> {
    if !(r > 0.0) || r.is_nan() {
        return Err(Error::domain("r", r, "r > 0"));
    }
    if r <= 2.0 {
        Ok(1.0)
    } else {
        haagerup_bq(r)
    }
}

/// Paley–Zygmund lower bound on `P(ξ > λ‖ξ‖_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PzBound {
    pub lambda: f64,
    pub q: f64,
    pub bound: f64,
}

pub fn pz_lower_bound(lambda: f64, norm2: f64, normq: f64, q: f64) -> Result<PzBound> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain("lambda", lambda, "0 <= lambda <= 1"));
    }
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::domain("q", q, "2 < q < inf"));
    }
    if !(norm2 > 0.0 && norm2.is_finite()) {
        return Err(Error::domain("norm2", norm2, "norm2 > 0"));
    }
    if !(normq > 0.0 && normq.is_finite()) {
        return Err(Error::domain("normq", normq, "normq > 0"));
    }
    if normq < norm2 * (1.0 - 1e-12) {
        return Err(Error::domain("normq", normq, "normq >= norm2 (Lyapunov)"));
    }
    let ratio = (1.0 - lambda * lambda) * (norm2 / normq).powi(2);
    let bound = ratio.powf(q / (q - 2.0)).clamp(0.0, 1.0);
    Ok(PzBound { lambda, q, bound })
}

fn check_open_unit(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("a", a, "0 < a < 1"))
    }
}

/// `(1 - a²)² / 3`: the tail level forcing `Σ x² <= 1`, from
/// Paley–Zygmund with the fourth-moment bound `E ξ⁴ <= 3 (E ξ²)²`.
pub fn l0_tail_threshold_classic(a: f64) -> Result<f64> {
    check_open_unit(a)?;
    Ok(classic_unchecked(a))
}

fn classic_unchecked(a: f64) -> f64 {
    let s = 1.0 - a * a;
    s * s / 3.0
}

/// Search interval for `u = ln(q - 2)`.
pub const LOG_Q_MIN: f64 = -12.0;
pub const LOG_Q_MAX: f64 = 4.0;
const Q_TOLERANCE: f64 = 1e-8;

/// `ln [(1-a²) B_q^{-2}]^{q/(q-2)}`.
fn ln_pz_objective(a: f64, q: f64) -> f64 {
    (q / (q - 2.0)) * ((1.0 - a * a).ln() - 2.0 * ln_haagerup(q))
}

/// Paley–Zygmund tail bound at a single exponent, `[(1-a²) B_q^{-2}]^{q/(q-2)}`.
pub fn pz_objective(a: f64, q: f64) -> f64 {
    ln_pz_objective(a, q).exp()
}

/// Maximizer found by a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub q: f64,
    pub value: f64,
}

/// Golden-section maximization of [`pz_objective`] over `ln(q-2)` in
/// `[LOG_Q_MIN, LOG_Q_MAX]`, refined until the bracket in `q` is below 1e-8.
pub fn refined_search(a: f64) -> Maximum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |u: f64| ln_pz_objective(a, 2.0 + u.exp());
    let (mut lo, mut hi) = (LOG_Q_MIN, LOG_Q_MAX);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi.exp() - lo.exp() <= Q_TOLERANCE {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))]
        .into_iter()
        .fold(None::<(f64, f64)>, |best, (u, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((u, v)),
        })
        .map(|(u, v)| Maximum {
            q: 2.0 + u.exp(),
            value: v.exp(),
        })
        .expect("four candidates")
}

/// Brute-force scan of [`pz_objective`] on `points` equally spaced values of
/// `ln(q-2)`; the reference for [`refined_search`].
pub fn refined_grid_scan(a: f64, points: usize) -> Maximum {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let u = LOG_Q_MIN + (LOG_Q_MAX - LOG_Q_MIN) * i as f64 / (points - 1) as f64;
            let q = 2.0 + u.exp();
            Maximum {
                q,
                value: pz_objective(a, q),
            }
        })
        .fold(
            Maximum {
                q: f64::NAN,
                value: f64::NEG_INFINITY,
            },
            |best, m| if m.value > best.value { m } else { best },
        )
}

/// `β(a) = sup_{q>2} [(1-a²) B_q^{-2}]^{q/(q-2)}` for `0 <= a < 1`.
///
/// The supremum includes the `q ↓ 2` limit, which is `2e^{-2+γ}` at `a = 0`
/// and 0 otherwise.
pub fn l0_tail_threshold_refined(a: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::domain("a", a, "0 <= a < 1"));
    }
    Ok(refined_unchecked(a))
}

fn refined_unchecked(a: f64) -> f64 {
    let searched = refined_search(a).value;
    if a == 0.0 {
        searched.max(euler_limit())
    } else {
        searched
    }
}

/// Largest `a` in `[0, 1)` (to within 1e-10) with `β(a) >= b`, for
/// `0 < b < β(0)`. β is nonincreasing, so bisection applies.
pub fn refined_level_for_budget(b: f64) -> Result<f64> {
    if !(b > 0.0 && b < euler_limit()) {
        return Err(Error::domain("b", b, "0 < b < 2e^{-2+gamma}"));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if refined_unchecked(mid) >= b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Zero-mass constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroMassThreshold {
    /// `1 - 2e^{-2+γ}`.
    pub exact: f64,
    /// `2e^{-2+γ}`.
    pub limit: f64,
    /// `q` used for the numeric check.
    pub check_q: f64,
    /// `B_q^{-2q/(q-2)}` evaluated at `check_q`.
    pub numeric_limit_check: f64,
}

pub const LIMIT_CHECK_Q: f64 = 2.0 + 1e-4;

pub fn zero_mass_threshold() -> ZeroMassThreshold {
    ZeroMassThreshold {
        exact: zero_mass_bound(),
        limit: euler_limit(),
        check_q: LIMIT_CHECK_Q,
        numeric_limit_check: pz_objective(0.0, LIMIT_CHECK_Q),
    }
}

/// Which anti-concentration bound drives the constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// `(1-a²)²/3`, needs `P(w != 0) > 2/3`.
    Classic,
    /// `β(a)`, needs `P(w != 0) > 1 - 2e^{-2+γ}`.
    Refined,
}

impl ThresholdMode {
    pub const ALL: [ThresholdMode; 2] = [ThresholdMode::Classic, ThresholdMode::Refined];

    /// `P(w != 0)` must strictly exceed this.
    pub fn min_nonzero_mass(self) -> f64 {
        match self {
            ThresholdMode::Classic => 2.0 / 3.0,
            ThresholdMode::Refined => zero_mass_bound(),
        }
    }

    /// Supremum of the tail threshold over `a`.
    pub fn budget_cap(self) -> f64 {
        match self {
            ThresholdMode::Classic => 1.0 / 3.0,
            ThresholdMode::Refined => euler_limit(),
        }
    }

    pub fn tail_threshold(self, a: f64) -> Result<f64> {
        match self {
            ThresholdMode::Classic => l0_tail_threshold_classic(a),
            ThresholdMode::Refined => l0_tail_threshold_refined(a),
        }
    }

    /// Tail level `a` whose threshold equals `b`.
    pub fn level_for_budget(self, b: f64) -> Result<f64> {
        match self {
            ThresholdMode::Classic => {
                if !(b > 0.0 && b < 1.0 / 3.0) {
                    return Err(Error::domain("b", b, "0 < b < 1/3"));
                }
                Ok((1.0 - (3.0 * b).sqrt()).sqrt())
            }
            ThresholdMode::Refined => refined_level_for_budget(b),
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::Classic => "classic",
            ThresholdMode::Refined => "refined",
        })
    }
}

impl FromStr for ThresholdMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "classic" => Ok(ThresholdMode::Classic),
            "refined" => Ok(ThresholdMode::Refined),
            other => Err(format!("unknown mode {other:?} (expected classic or refined)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // 40-digit reference values computed with mpmath.
    const GAMMA_REF: [(f64, f64); 9] = [
        (0.5, 1.7724538509055160273),
        (0.7, 1.2980553326475577857),
        (1.0, 1.0),
        (2.5, 1.3293403881791370205),
        (3.3, 2.6834373819557687936),
        (10.1, 454760.75144158595087),
        (23.7, 1.0046141827585367632e22),
        (49.5, 8.6676018431352723453e61),
        (50.0, 6.0828186403426756087e62),
    ];

    #[test]
    fn gamma_matches_high_precision_values() {
        for (x, g) in GAMMA_REF {
            let v = gamma_fn(x).unwrap();
            assert!(rel(v, g) <= 1e-12, "Γ({x}) = {v}, want {g}");
            assert!(rel(ln_gamma(x).unwrap().exp(), g) <= 1e-12);
        }
        assert!(rel(gamma_fn(170.5).unwrap(), 5.5620924145599996107e305) <= 1e-11);
    }

    #[test]
    fn gamma_domain() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(171.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
        assert!(gamma_fn(1e-8).unwrap() > 1e7);
    }

    #[test]
    fn gamma_recurrence() {
        let mut x = 0.51;
        while x < 50.0 {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(rel(lhs, rhs) <= 1e-13, "x = {x}");
            x += 0.37;
        }
    }

    #[test]
    fn haagerup_values() {
        assert_eq!(haagerup_bq(2.0).unwrap(), 1.0);
        assert!((haagerup_bq(4.0).unwrap() - 3f64.powf(0.25)).abs() <= 1e-12);
        // √2 · π^{-1/6}
        assert!((haagerup_bq(3.0).unwrap() - 1.1685752549624655487).abs() <= 1e-12);
        assert!((haagerup_bq(2.5).unwrap() - 1.0874844278957918836).abs() <= 1e-12);
        assert!((haagerup_bq(6.0).unwrap() - 1.5704178024750197353).abs() <= 1e-12);
        assert!(haagerup_bq(1.99).is_err());
    }

    #[test]
    fn haagerup_monotone_and_at_least_one() {
        let mut prev = 1.0;
        for i in 0..400 {
            let q = 2.0 + i as f64 * 0.1;
            let b = haagerup_bq(q).unwrap();
            assert!(b >= 1.0);
            assert!(b >= prev, "B_q decreased at q = {q}");
            prev = b;
        }
    }

    #[test]
    fn khintchine_constant_branches() {
        assert_eq!(khintchine_upper_constant(4.0 / 3.0).unwrap(), 1.0);
        assert_eq!(khintchine_upper_constant(2.0).unwrap(), 1.0);
        assert!((khintchine_upper_constant(4.0).unwrap() - 3f64.powf(0.25)).abs() < 1e-12);
        assert!(khintchine_upper_constant(0.0).is_err());
        assert!(khintchine_upper_constant(-1.0).is_err());
    }

    #[test]
    fn pz_bound_examples() {
        assert_eq!(pz_lower_bound(0.0, 1.0, 1.0, 4.0).unwrap().bound, 1.0);
        let b = pz_lower_bound(0.5, 2f64.sqrt(), 8f64.powf(0.25), 4.0).unwrap();
        assert!((b.bound - 0.28125).abs() < 1e-14);
        assert_eq!(pz_lower_bound(1.0, 1.0, 3.0, 4.0).unwrap().bound, 0.0);
        assert!(pz_lower_bound(0.5, 1.0, 1.0, 2.0).is_err());
        assert!(pz_lower_bound(0.5, 2.0, 1.0, 4.0).is_err());
        assert!(pz_lower_bound(1.5, 1.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn classic_threshold() {
        assert!((l0_tail_threshold_classic(0.5).unwrap() - 0.1875).abs() < 1e-15);
        assert!((l0_tail_threshold_classic(1e-9).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((l0_tail_threshold_classic(0.3249196962329063).unwrap() - 4.0 / 15.0).abs() < 1e-12);
        assert!(l0_tail_threshold_classic(0.0).is_err());
        assert!(l0_tail_threshold_classic(1.0).is_err());
    }

    #[test]
    fn euler_constants() {
        assert!((euler_limit() - 0.48208388030724414967).abs() < 1e-15);
        let z = zero_mass_threshold();
        assert!((z.exact - 0.51791611969275585033).abs() < 1e-15);
        // mpmath: B_q^{-2q/(q-2)} at q = 2 + 1e-4
        assert!((z.numeric_limit_check - 0.48207261427855803538).abs() < 1e-9);
        assert!((z.numeric_limit_check - z.limit).abs() <= 1e-3);
    }

    #[test]
    fn refined_threshold_reference_values() {
        // mpmath root of d/du of the objective
        let refs = [
            (0.1, 0.417341533134915222),
            (0.3, 0.29595127355259038916),
            (0.5, 0.18751949121616918959),
            (0.7, 0.094954719244020364432),
            (0.9, 0.023160998551089658636),
        ];
        for (a, v) in refs {
            let b = l0_tail_threshold_refined(a).unwrap();
            assert!((b - v).abs() <= 1e-10, "β({a}) = {b}, want {v}");
        }
        assert_eq!(l0_tail_threshold_refined(0.0).unwrap(), euler_limit());
        assert!(l0_tail_threshold_refined(1.0).is_err());
        assert!(l0_tail_threshold_refined(-0.1).is_err());
        assert!(l0_tail_threshold_refined(0.999999).unwrap() < 1e-6);
    }

    #[test]
    fn refined_dominates_classic_and_is_monotone() {
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let a = 0.99 * i as f64 / 99.0;
            let beta = l0_tail_threshold_refined(a).unwrap();
            let classic = (1.0 - a * a).powi(2) / 3.0;
            assert!(beta >= classic, "a = {a}");
            assert!(beta <= prev, "β increased at a = {a}");
            prev = beta;
        }
    }

    #[test]
    fn golden_section_agrees_with_grid() {
        for i in 0..100 {
            let a = 0.99 * i as f64 / 99.0;
            let g = refined_search(a);
            let s = refined_grid_scan(a, 10_000);
            assert!((g.value - s.value).abs() <= 1e-6, "a = {a}");
            assert!(g.value >= s.value - 1e-12, "grid beat golden section at a = {a}");
        }
    }

    #[test]
    fn level_for_budget_inverts_thresholds() {
        let a = ThresholdMode::Classic.level_for_budget(4.0 / 15.0).unwrap();
        assert!((a - 0.3249196962329063261558714).abs() < 1e-15);
        for b in [0.05, 0.2, 0.4, 0.48] {
            let a = ThresholdMode::Refined.level_for_budget(b).unwrap();
            let beta = l0_tail_threshold_refined(a).unwrap();
            assert!(beta >= b && beta - b <= 1e-8, "b = {b}, β(a) = {beta}");
        }
        assert!(ThresholdMode::Refined.level_for_budget(0.49).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("classic".parse::<ThresholdMode>().unwrap(), ThresholdMode::Classic);
        assert_eq!("refined".parse::<ThresholdMode>().unwrap(), ThresholdMode::Refined);
        assert!("fancy".parse::<ThresholdMode>().is_err());
    }
}
