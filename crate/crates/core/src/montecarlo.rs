//! Seeded Monte Carlo estimates of `E|wξ|^p` and of tail probabilities.
//!
//! Generator: ChaCha8 (`rand_chacha`), seeded with `seed_from_u64(seed)`;
//! batch `b` of `batch_size` samples uses stream `b` of that generator. A
//! sample consumes `ceil(d / 64)` words for the signs (bit `i` set means
//! `r_{i+1} = -1`) and then, when the weight has an independent layer with
//! more than one atom, one `f64` in `[0, 1)` to pick the atom by inverse
//! CDF. Batches run in parallel and are merged in batch order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientVector;
use crate::decimal::Decimal;
use crate::engine::{check_exponent, Method, MomentKernel, MomentReport, Prepared, Sums, TailKernel};
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use crate::weight::Weight;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub sample_count: u64,
    pub seed: u64,
    pub batch_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            sample_count: 1_000_000,
            seed: 0,
            batch_size: 1 << 16,
        }
    }
}

impl McConfig {
    pub fn new(sample_count: u64, seed: u64) -> Self {
        Self {
            sample_count,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::ZeroSampleCount);
        }
        if self.batch_size == 0 {
            return Err(Error::domain("batch_size", 0.0, "batch_size >= 1"));
        }
        Ok(())
    }

    fn batches(&self) -> u64 {
        self.sample_count.div_ceil(self.batch_size)
    }

    fn batch_len(&self, b: u64) -> u64 {
        (self.sample_count - b * self.batch_size).min(self.batch_size)
    }
}

/// Estimated tail probability with its Bernoulli standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McTail {
    pub estimate: f64,
    pub standard_error: f64,
    pub hits: u64,
    pub sample_count: u64,
    /// Normal-approximation 95% interval.
    pub normal_ci95: [f64; 2],
    pub tolerance_mode: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    fn sample_sd(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2.max(0.0) / (self.n - 1) as f64).sqrt()
        }
    }
}

/// One draw: sign pattern words, table index, aux atom and the sum.
struct Sampler<'a> {
    prep: &'a Prepared,
    words: usize,
    aux_cdf: Vec<f64>,
}

enum Draw {
    Exact { j: usize, aux: usize, abs: u128 },
    Float { j: usize, aux: usize, abs: f64 },
}

impl<'a> Sampler<'a> {
    fn new(prep: &'a Prepared) -> Self {
        let mut acc = NeumaierSum::default();
        let aux_cdf = prep
            .aux
            .iter()
            .map(|a| {
                acc += a.prob;
                acc.sum()
            })
            .collect();
        Self {
            prep,
            words: prep.dim.div_ceil(64).max(1),
            aux_cdf,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, bits: &mut [u64]) -> Draw {
        for w in bits.iter_mut() {
            *w = rng.next_u64();
        }
        let aux = if self.aux_cdf.len() == 1 {
            0
        } else {
            let u: f64 = rng.random();
            self.aux_cdf
                .iter()
                .position(|&c| u < c)
                .unwrap_or(self.aux_cdf.len() - 1)
        };
        let j = self.prep.table_index(bits[0]);
        let negative = |i: usize| (bits[i / 64] >> (i % 64)) & 1 == 1;
        match &self.prep.sums {
            Sums::Exact { ints, .. } => {
                let s: i128 = ints
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if negative(i) { -x } else { x })
                    .sum();
                Draw::Exact {
                    j,
                    aux,
                    abs: s.unsigned_abs(),
                }
            }
            Sums::Float { values, .. } => {
                let s: NeumaierSum = values
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if negative(i) { -x } else { x })
                    .collect();
                Draw::Float {
                    j,
                    aux,
                    abs: self.prep.abs_float(s.sum()),
                }
            }
        }
    }

    fn run_batches<A: Send>(&self, cfg: &McConfig, per_batch: impl Fn(u64, &mut dyn FnMut() -> Draw) -> A + Sync) -> Vec<A> {
        (0..cfg.batches())
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(b);
                let mut bits = vec![0u64; self.words];
                let mut next = || self.draw(&mut rng, &mut bits);
                per_batch(cfg.batch_len(b), &mut next)
            })
            .collect()
    }
}

pub fn mc_moment(
    coeffs: &CoefficientVector,
    p: f64,
    weight: Option<&Weight>,
    cfg: &McConfig,
) -> Result<MomentReport> {
    check_exponent(p)?;
    cfg.validate()?;
    let prep = Prepared::unbounded(coeffs, weight)?;
    let kernel = MomentKernel::new(&prep, p);
    let sampler = Sampler::new(&prep);
    let parts = sampler.run_batches(cfg, |len, next| {
        let mut acc = Welford::default();
        for _ in 0..len {
            let value = match next() {
                Draw::Exact { j, aux, abs } => {
                    kernel.aux_pow[aux] * kernel.term(j, prep.abs_exact_u(abs))
                }
                Draw::Float { j, aux, abs } => kernel.aux_pow[aux] * kernel.term(j, abs),
            };
            acc.push(value);
        }
        acc
    });
    let mut total = Welford::default();
    for part in &parts {
        total.merge(part);
    }
    let n = total.n as f64;
    let se = total.sample_sd() / n.sqrt();
    let mean = total.mean;
    Ok(MomentReport {
        p,
        absolute_moment: mean,
        norm: mean.powf(1.0 / p),
        second_norm: coeffs.norm2(),
        method: Method::MonteCarlo,
        standard_error: se,
        sample_count: total.n,
        normal_ci95: Some([mean - Z95 * se, mean + Z95 * se]),
        tolerance_mode: prep.tolerance_mode(),
        dimension: coeffs.len(),
    })
}

/// Estimates `P(|wξ| > t)` (`strict`) or `P(|wξ| >= t)`.
pub fn mc_tail(
    coeffs: &CoefficientVector,
    t: &Decimal,
    weight: Option<&Weight>,
    strict: bool,
    cfg: &McConfig,
) -> Result<McTail> {
    cfg.validate()?;
    let prep = Prepared::unbounded(coeffs, weight)?;
    let kernel = TailKernel::new(&prep, t, strict)?;
    let sampler = Sampler::new(&prep);
    let hits: u64 = sampler
        .run_batches(cfg, |len, next| {
            (0..len)
                .filter(|_| match next() {
                    Draw::Exact { j, aux, abs } => kernel.hit_exact(aux, j, abs),
                    Draw::Float { j, aux, abs } => kernel.hit_float(aux, j, abs),
                })
                .count() as u64
        })
        .into_iter()
        .sum();
    let n = cfg.sample_count as f64;
    let estimate = hits as f64 / n;
    let se = (estimate * (1.0 - estimate) / n).sqrt();
    Ok(McTail {
        estimate,
        standard_error: se,
        hits,
        sample_count: cfg.sample_count,
        normal_ci95: [estimate - Z95 * se, estimate + Z95 * se],
        tolerance_mode: prep.tolerance_mode(),
    })
}
