//! Exact distributions, moments and tails of `ξ = Σ r_i x_i` and of `wξ`
//! by enumerating all `2^d` sign patterns.
//!
//! Patterns are visited in reflected Gray-code order so each step flips one
//! sign and updates the running sum by `∓2x_i`. The pattern space is cut
//! into fixed blocks of `2^14` patterns (high bits fixed, Gray walk over the
//! low bits); blocks run in parallel and every reduction is exact (integer
//! counts or [`ExactSum`]), so results do not depend on the thread count.
//!
//! When the coefficients admit an integer scaling (see
//! [`CoefficientVector::scaled`]) the running sum is an `i128` and zero
//! detection and threshold ties are decided exactly. Otherwise a sum whose
//! magnitude is within `1e-12 · max|x_i|` of a threshold (or of zero) is
//! treated as equal to it, and results carry `tolerance_mode = true`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientVector;
use crate::decimal::{pow10, Decimal, ExactDecimal, Probability};
use crate::error::{Error, Result};
use crate::sum::{ExactSum, NeumaierSum};
use crate::weight::Weight;

/// Default enumeration limit (about 6.7e7 patterns).
pub const DEFAULT_N_MAX: usize = 26;
/// Environment variable overriding the enumeration limit.
pub const NMAX_ENV: &str = "KHINLAB_NMAX";
/// Hard ceiling on any configured limit.
pub const N_MAX_CEILING: usize = 40;
/// Relative tolerance used when coefficients are not integer-scalable.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

const BLOCK_BITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// `E|wξ|^p` and `‖wξ‖_p`, exact or estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: f64,
    pub absolute_moment: f64,
    pub norm: f64,
    /// `‖ξ‖_2 = (Σ x_i²)^{1/2}` of the unweighted sum.
    pub second_norm: f64,
    pub method: Method,
    pub standard_error: f64,
    pub sample_count: u64,
    /// Normal-approximation 95% interval for the absolute moment (Monte
    /// Carlo only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_ci95: Option<[f64; 2]>,
    pub tolerance_mode: bool,
    pub dimension: usize,
}

/// Exact probability of an event on the sign patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailProbability {
    pub probability: Probability,
    pub tolerance_mode: bool,
}

impl TailProbability {
    pub fn value(&self) -> f64 {
        self.probability.value()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionAtom {
    pub value: f64,
    /// Exact decimal value, in integer-scaled mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_value: Option<String>,
    pub probability: Probability,
}

/// Law of `wξ` (or `ξ`), sorted by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub atoms: Vec<DistributionAtom>,
    pub tolerance_mode: bool,
}

/// Enumeration settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Engine {
    n_max: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
        }
    }
}

impl Engine {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max: n_max.clamp(1, N_MAX_CEILING),
        }
    }

    /// Reads `KHINLAB_NMAX`, falling back to the default when unset or invalid.
    pub fn from_env() -> Self {
        std::env::var(NMAX_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Self::new)
            .unwrap_or_default()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn exact_distribution(
        &self,
        coeffs: &CoefficientVector,
        weight: Option<&Weight>,
    ) -> Result<Distribution> {
        let prep = Prepared::new(coeffs, weight, self.n_max)?;
        Ok(prep.distribution())
    }

    pub fn exact_moment(
        &self,
        coeffs: &CoefficientVector,
        p: f64,
        weight: Option<&Weight>,
    ) -> Result<MomentReport> {
        check_exponent(p)?;
        let prep = Prepared::new(coeffs, weight, self.n_max)?;
        let absolute_moment = prep.moment(p);
        Ok(MomentReport {
            p,
            absolute_moment,
            norm: absolute_moment.powf(1.0 / p),
            second_norm: coeffs.norm2(),
            method: Method::Exact,
            standard_error: 0.0,
            sample_count: 0,
            normal_ci95: None,
            tolerance_mode: prep.tolerance_mode(),
            dimension: coeffs.len(),
        })
    }

    /// `P(|wξ| > t)` when `strict`, else `P(|wξ| >= t)`.
    pub fn exact_tail(
        &self,
        coeffs: &CoefficientVector,
        t: &Decimal,
        weight: Option<&Weight>,
        strict: bool,
    ) -> Result<TailProbability> {
        let prep = Prepared::new(coeffs, weight, self.n_max)?;
        let kernel = TailKernel::new(&prep, t, strict)?;
        Ok(TailProbability {
            probability: prep.tail(&kernel),
            tolerance_mode: prep.tolerance_mode(),
        })
    }

    /// [`Engine::exact_tail`] for several thresholds in one enumeration.
    pub fn exact_tails(
        &self,
        coeffs: &CoefficientVector,
        ts: &[Decimal],
        weight: Option<&Weight>,
        strict: bool,
    ) -> Result<Vec<TailProbability>> {
        let prep = Prepared::new(coeffs, weight, self.n_max)?;
        let kernels = ts
            .iter()
            .map(|t| TailKernel::new(&prep, t, strict))
            .collect::<Result<Vec<_>>>()?;
        if kernels.is_empty() {
            return Ok(Vec::new());
        }
        Ok(prep
            .tails(&kernels)
            .into_iter()
            .map(|probability| TailProbability {
                probability,
                tolerance_mode: prep.tolerance_mode(),
            })
            .collect())
    }

    /// `P(ξ = 0)` for the unweighted sum.
    pub fn prob_zero(&self, coeffs: &CoefficientVector) -> Result<TailProbability> {
        let zero = Decimal::parse("0")?;
        let nonzero = self.exact_tail(coeffs, &zero, None, true)?;
        let one = Probability::one();
        Ok(TailProbability {
            probability: Probability::new(one.ratio() - nonzero.probability.ratio()),
            tolerance_mode: nonzero.tolerance_mode,
        })
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("p", p, "0 < p < inf"))
    }
}

pub fn exact_distribution(
    coeffs: &CoefficientVector,
    weight: Option<&Weight>,
) -> Result<Distribution> {
    Engine::default().exact_distribution(coeffs, weight)
}

pub fn exact_moment(
    coeffs: &CoefficientVector,
    p: f64,
    weight: Option<&Weight>,
) -> Result<MomentReport> {
    Engine::default().exact_moment(coeffs, p, weight)
}

pub fn exact_tail(
    coeffs: &CoefficientVector,
    t: f64,
    weight: Option<&Weight>,
    strict: bool,
) -> Result<TailProbability> {
    Engine::default().exact_tail(coeffs, &Decimal::from_f64(t)?, weight, strict)
}

pub fn prob_zero(coeffs: &CoefficientVector) -> Result<TailProbability> {
    Engine::default().prob_zero(coeffs)
}

/// Running-sum representation.
#[derive(Debug, Clone)]
pub(crate) enum Sums {
    /// `x_i = ints[i] · 10^exponent`.
    Exact {
        ints: Vec<i128>,
        exponent: i32,
        unit: Unit,
    },
    Float {
        values: Vec<f64>,
        tol: f64,
    },
}

/// Conversion of an integer sum to its real value.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Unit {
    Divide(f64),
    Multiply(f64),
}

impl Unit {
    fn for_exponent(e: i32) -> Self {
        if (-22..=0).contains(&e) {
            Unit::Divide(10f64.powi(-e))
        } else {
            Unit::Multiply(format!("1e{e}").parse().unwrap_or(f64::NAN))
        }
    }

    #[inline]
    pub(crate) fn apply(self, s: u128) -> f64 {
        match self {
            Unit::Divide(d) => s as f64 / d,
            Unit::Multiply(m) => s as f64 * m,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PreparedAux {
    pub value: f64,
    pub exact: ExactDecimal,
    pub probability: Probability,
    pub prob: f64,
}

/// Coefficients and weight in the form the enumeration and the sampler use.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    /// Number of signs enumerated: `max(n, k)`.
    pub dim: usize,
    /// Sign depth of the weight table.
    pub depth: usize,
    pub sums: Sums,
    pub table: Vec<f64>,
    pub table_exact: Vec<ExactDecimal>,
    pub aux: Vec<PreparedAux>,
}

impl Prepared {
    pub fn new(coeffs: &CoefficientVector, weight: Option<&Weight>, n_max: usize) -> Result<Self> {
        let prep = Self::unbounded(coeffs, weight)?;
        if prep.dim > n_max {
            return Err(Error::DimensionTooLarge {
                n: prep.dim,
                max: n_max,
            });
        }
        Ok(prep)
    }

    /// Same as [`Prepared::new`] without the enumeration limit (sampling).
    pub fn unbounded(coeffs: &CoefficientVector, weight: Option<&Weight>) -> Result<Self> {
        let depth = weight.map_or(0, Weight::depth);
        let dim = coeffs.len().max(depth);
        let sums = match coeffs.scaled() {
            Some(s) => {
                let mut ints = s.ints.clone();
                ints.resize(dim, 0);
                Sums::Exact {
                    ints,
                    exponent: s.exponent,
                    unit: Unit::for_exponent(s.exponent),
                }
            }
            None => {
                let mut values = coeffs.values().to_vec();
                values.resize(dim, 0.0);
                Sums::Float {
                    tol: FLOAT_TOLERANCE * coeffs.max_abs(),
                    values,
                }
            }
        };
        let (table_exact, aux) = match weight {
            Some(w) => (
                w.table().iter().map(|d| d.exact().clone()).collect::<Vec<_>>(),
                w.aux()
                    .iter()
                    .map(|a| PreparedAux {
                        value: a.value.value(),
                        exact: a.value.exact().clone(),
                        probability: a.probability.clone(),
                        prob: a.probability.value(),
                    })
                    .collect(),
            ),
            None => {
                let one = ExactDecimal::new(BigInt::from(1), 0);
                (
                    vec![one.clone()],
                    vec![PreparedAux {
                        value: 1.0,
                        exact: one,
                        probability: Probability::one(),
                        prob: 1.0,
                    }],
                )
            }
        };
        let table = match weight {
            Some(w) => w.table().iter().map(Decimal::value).collect(),
            None => vec![1.0],
        };
        Ok(Self {
            dim,
            depth,
            sums,
            table,
            table_exact,
            aux,
        })
    }

    pub fn tolerance_mode(&self) -> bool {
        matches!(self.sums, Sums::Float { .. })
    }

    /// Table index of a sign pattern (bit `i` set means `r_{i+1} = -1`).
    #[inline]
    pub fn table_index(&self, pattern: u64) -> usize {
        let mut idx = 0usize;
        for i in 0..self.depth {
            if (pattern >> i) & 1 == 1 {
                idx |= 1 << (self.depth - 1 - i);
            }
        }
        idx
    }

    /// Visits every pattern and folds with exact merges, block by block.
    fn reduce<A, I, E, F, M>(&self, init: I, on_exact: E, on_float: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync,
        E: Fn(&mut A, usize, i128) + Sync,
        F: Fn(&mut A, usize, f64) + Sync,
        M: Fn(&mut A, A),
    {
        let low = self.dim.min(BLOCK_BITS);
        let blocks = 1u64 << (self.dim - low);
        let run = |block: u64| {
            let mut acc = init();
            let start = block << low;
            match &self.sums {
                Sums::Exact { ints, .. } => {
                    self.walk_exact(ints, start, low, |j, s| on_exact(&mut acc, j, s))
                }
                Sums::Float { values, .. } => {
                    self.walk_float(values, start, low, |j, v| on_float(&mut acc, j, v))
                }
            }
            acc
        };
        let parts: Vec<A> = if blocks == 1 {
            vec![run(0)]
        } else {
            (0..blocks).into_par_iter().map(run).collect()
        };
        let mut parts = parts.into_iter();
        let mut total = parts.next().expect("at least one block");
        for part in parts {
            merge(&mut total, part);
        }
        total
    }

    fn walk_exact(&self, ints: &[i128], start: u64, low: usize, mut visit: impl FnMut(usize, i128)) {
        let mut s: i128 = ints
            .iter()
            .enumerate()
            .map(|(i, &x)| if (start >> i) & 1 == 1 { -x } else { x })
            .sum();
        let mut pattern = start;
        let mut idx = self.table_index(start);
        visit(idx, s);
        for step in 1u64..(1u64 << low) {
            let t = step.trailing_zeros() as usize;
            pattern ^= 1 << t;
            let x = ints[t];
            if (pattern >> t) & 1 == 1 {
                s = s - x - x;
            } else {
                s = s + x + x;
            }
            if t < self.depth {
                idx ^= 1 << (self.depth - 1 - t);
            }
            visit(idx, s);
        }
    }

    fn walk_float(&self, values: &[f64], start: u64, low: usize, mut visit: impl FnMut(usize, f64)) {
        let mut s: NeumaierSum = values
            .iter()
            .enumerate()
            .map(|(i, &x)| if (start >> i) & 1 == 1 { -x } else { x })
            .collect();
        let mut pattern = start;
        let mut idx = self.table_index(start);
        visit(idx, s.sum());
        for step in 1u64..(1u64 << low) {
            let t = step.trailing_zeros() as usize;
            pattern ^= 1 << t;
            let x = values[t];
            s += if (pattern >> t) & 1 == 1 { -2.0 * x } else { 2.0 * x };
            if t < self.depth {
                idx ^= 1 << (self.depth - 1 - t);
            }
            visit(idx, s.sum());
        }
    }

    /// `|ξ|` of an integer sum.
    #[inline]
    pub fn abs_exact(&self, s: i128) -> f64 {
        self.abs_exact_u(s.unsigned_abs())
    }

    #[inline]
    pub fn abs_exact_u(&self, abs: u128) -> f64 {
        match &self.sums {
            Sums::Exact { unit, .. } => unit.apply(abs),
            Sums::Float { .. } => unreachable!("integer sum in tolerance mode"),
        }
    }

    /// `|ξ|` of a float sum, snapped to 0 inside the zero tolerance.
    #[inline]
    pub fn abs_float(&self, v: f64) -> f64 {
        match &self.sums {
            Sums::Float { tol, .. } if v.abs() > *tol => v.abs(),
            _ => 0.0,
        }
    }

    fn pattern_mass(&self) -> f64 {
        0.5f64.powi(self.dim as i32)
    }

    pub fn moment(&self, p: f64) -> f64 {
        let kernel = MomentKernel::new(self, p);
        let inner = self.reduce(
            ExactSum::new,
            |acc, j, s| acc.add(kernel.term(j, self.abs_exact(s))),
            |acc, j, v| acc.add(kernel.term(j, self.abs_float(v))),
            |acc, other| acc.merge(&other),
        );
        kernel.aux_factor * inner.value() * self.pattern_mass()
    }

    pub fn tail(&self, kernel: &TailKernel) -> Probability {
        self.tails(std::slice::from_ref(kernel)).remove(0)
    }

    /// One pass over the patterns for several thresholds.
    pub fn tails(&self, kernels: &[TailKernel]) -> Vec<Probability> {
        let n_aux = self.aux.len();
        let counts = self.reduce(
            || vec![0u64; n_aux * kernels.len()],
            |acc, j, s| {
                let abs = s.unsigned_abs();
                for (k, kernel) in kernels.iter().enumerate() {
                    for a in 0..n_aux {
                        if kernel.hit_exact(a, j, abs) {
                            acc[k * n_aux + a] += 1;
                        }
                    }
                }
            },
            |acc, j, v| {
                let abs = self.abs_float(v);
                for (k, kernel) in kernels.iter().enumerate() {
                    for a in 0..n_aux {
                        if kernel.hit_float(a, j, abs) {
                            acc[k * n_aux + a] += 1;
                        }
                    }
                }
            },
            |acc, other| acc.iter_mut().zip(other).for_each(|(x, y)| *x += y),
        );
        counts
            .chunks(n_aux.max(1))
            .take(kernels.len())
            .map(|per_aux| {
                self.aux
                    .iter()
                    .zip(per_aux)
                    .fold(Probability::zero(), |acc, (aux, &count)| {
                        acc + &aux.probability * &Probability::dyadic(count, self.dim as u32)
                    })
            })
            .collect()
    }

    fn distribution(&self) -> Distribution {
        match &self.sums {
            Sums::Exact { exponent, .. } => self.exact_law(*exponent),
            Sums::Float { .. } => self.float_law(),
        }
    }

    fn exact_law(&self, exponent: i32) -> Distribution {
        let counts = self.reduce(
            BTreeMap::<(usize, i128), u64>::new,
            |acc, j, s| *acc.entry((j, s)).or_insert(0) += 1,
            |_, _, _| unreachable!("float sum in exact mode"),
            |acc, other| {
                for (k, c) in other {
                    *acc.entry(k).or_insert(0) += c;
                }
            },
        );
        let mut law: BTreeMap<ExactDecimal, BigRational> = BTreeMap::new();
        for ((j, s), count) in counts {
            let xi = ExactDecimal::new(BigInt::from(s), exponent);
            let cell = Probability::dyadic(count, self.dim as u32);
            for aux in &self.aux {
                let value = aux.exact.mul(&self.table_exact[j]).mul(&xi);
                *law.entry(value).or_insert_with(BigRational::zero) +=
                    (&aux.probability * &cell).ratio();
            }
        }
        Distribution {
            atoms: law
                .into_iter()
                .map(|(v, p)| DistributionAtom {
                    value: v.to_f64() + 0.0,
                    exact_value: Some(v.to_string()),
                    probability: Probability::new(p),
                })
                .collect(),
            tolerance_mode: false,
        }
    }

    fn float_law(&self) -> Distribution {
        let values = self.reduce(
            Vec::<(usize, f64)>::new,
            |_, _, _| unreachable!("integer sum in tolerance mode"),
            |acc, j, v| {
                let snapped = if self.abs_float(v) == 0.0 { 0.0 } else { v };
                acc.push((j, snapped));
            },
            |acc, other| acc.extend(other),
        );
        let mut points: Vec<(f64, usize)> = Vec::with_capacity(values.len() * self.aux.len());
        for (j, xi) in values {
            for (a, aux) in self.aux.iter().enumerate() {
                points.push((aux.value * self.table[j] * xi + 0.0, a));
            }
        }
        points.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut atoms = Vec::new();
        let mut i = 0;
        while i < points.len() {
            let anchor = points[i].0;
            let mut counts = vec![0u64; self.aux.len()];
            let mut j = i;
            while j < points.len() && points[j].0 - anchor <= FLOAT_TOLERANCE * (1.0 + anchor.abs()) {
                counts[points[j].1] += 1;
                j += 1;
            }
            let probability = self
                .aux
                .iter()
                .zip(&counts)
                .fold(Probability::zero(), |acc, (aux, &c)| {
                    acc + &aux.probability * &Probability::dyadic(c, self.dim as u32)
                });
            atoms.push(DistributionAtom {
                value: anchor,
                exact_value: None,
                probability,
            });
            i = j;
        }
        Distribution {
            atoms,
            tolerance_mode: true,
        }
    }
}

/// Per-pattern term `w_j^p |ξ|^p`; the independent layer enters through
/// `aux_factor = Σ_a P(a) a^p`.
pub(crate) struct MomentKernel {
    p: f64,
    table_pow: Vec<f64>,
    pub aux_pow: Vec<f64>,
    pub aux_factor: f64,
}

impl MomentKernel {
    pub fn new(prep: &Prepared, p: f64) -> Self {
        let table_pow = prep.table.iter().map(|w| pow(*w, p)).collect();
        let aux_pow: Vec<f64> = prep.aux.iter().map(|a| pow(a.value, p)).collect();
        let aux_factor = prep
            .aux
            .iter()
            .zip(&aux_pow)
            .map(|(a, ap)| a.prob * ap)
            .collect::<ExactSum>()
            .value();
        Self {
            p,
            table_pow,
            aux_pow,
            aux_factor,
        }
    }

    #[inline]
    pub fn term(&self, j: usize, abs_xi: f64) -> f64 {
        self.table_pow[j] * pow(abs_xi, self.p)
    }
}

#[inline]
fn pow(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v
    } else if p == 2.0 {
        v * v
    } else {
        v.powf(p)
    }
}

/// Threshold test for `|a · w_j · ξ|` against `t`, precomputed per
/// (aux atom, table entry).
pub(crate) struct TailKernel {
    table_len: usize,
    cuts: Cuts,
}

enum Cuts {
    /// Count when `|S| >= m`; `None` never counts.
    Exact(Vec<Option<u128>>),
    Float(Vec<FloatCut>),
}

#[derive(Clone, Copy)]
enum FloatCut {
    Never,
    Greater(f64),
    AtLeast(f64),
}

impl TailKernel {
    pub fn new(prep: &Prepared, t: &Decimal, strict: bool) -> Result<Self> {
        if t.exact().is_negative() {
            return Err(Error::domain("t", t.value(), "t >= 0"));
        }
        let table_len = prep.table.len();
        let cuts = match &prep.sums {
            Sums::Exact { exponent, .. } => {
                let mut cuts = Vec::with_capacity(prep.aux.len() * table_len);
                for aux in &prep.aux {
                    for w in &prep.table_exact {
                        cuts.push(exact_cut(&aux.exact.mul(w), *exponent, t.exact(), strict));
                    }
                }
                Cuts::Exact(cuts)
            }
            Sums::Float { tol, .. } => {
                let tf = t.value();
                let mut cuts = Vec::with_capacity(prep.aux.len() * table_len);
                for aux in &prep.aux {
                    for w in &prep.table {
                        let c = aux.value * w;
                        cuts.push(if c == 0.0 {
                            if !strict && tf == 0.0 {
                                FloatCut::AtLeast(0.0)
                            } else {
                                FloatCut::Never
                            }
                        } else if strict {
                            FloatCut::Greater(tf / c + tol)
                        } else {
                            FloatCut::AtLeast(tf / c - tol)
                        });
                    }
                }
                Cuts::Float(cuts)
            }
        };
        Ok(Self { table_len, cuts })
    }

    #[inline]
    pub fn hit_exact(&self, aux: usize, j: usize, abs_s: u128) -> bool {
        match &self.cuts {
            Cuts::Exact(c) => c[aux * self.table_len + j].is_some_and(|m| abs_s >= m),
            Cuts::Float(_) => unreachable!("integer sum in tolerance mode"),
        }
    }

    #[inline]
    pub fn hit_float(&self, aux: usize, j: usize, abs_xi: f64) -> bool {
        match &self.cuts {
            Cuts::Float(c) => match c[aux * self.table_len + j] {
                FloatCut::Never => false,
                FloatCut::Greater(m) => abs_xi > m,
                FloatCut::AtLeast(m) => abs_xi >= m,
            },
            Cuts::Exact(_) => unreachable!("float sum in exact mode"),
        }
    }
}

/// Smallest `|S|` with `c · |S| · 10^e > t` (strict) or `>= t`.
fn exact_cut(c: &ExactDecimal, e: i32, t: &ExactDecimal, strict: bool) -> Option<u128> {
    if c.is_zero() {
        return (!strict && t.is_zero()).then_some(0);
    }
    // θ = t / (c · 10^e) = t_m 10^{t_e - c_e - e} / c_m
    let shift = t.exponent() as i64 - c.exponent() as i64 - e as i64;
    let (num, den) = if shift >= 0 {
        (t.mantissa() * pow10(shift as u32), c.mantissa().clone())
    } else {
        (t.mantissa().clone(), c.mantissa() * pow10((-shift) as u32))
    };
    let floor = &num / &den;
    let exact_division = (&num % &den).is_zero();
    let m = if strict || !exact_division {
        floor + 1
    } else {
        floor
    };
    m.to_u128()
}
