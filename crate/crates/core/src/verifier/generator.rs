use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientVector;
use crate::decimal::Decimal;
use crate::weight::{AtomBlock, AtomSpec, SignFunctionBlock, Weight, WeightSpec};

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientLaw {
    /// Gaussian direction normalized to the unit sphere, 6 decimals.
    UniformSphere,
    /// Integers in `[-4, 4]`.
    IntegerGrid,
    /// Mostly zeros with a few integers or short decimals.
    Sparse,
    /// One of the above, chosen per case.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightLaw {
    IndependentAtoms,
    SignFunctions,
    Mixed,
}

/// Deterministic stream of random test inputs: case `i` draws from a
/// ChaCha8 generator seeded with [`CaseGenerator::case_seed`]`(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseGenerator {
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub coefficient_law: CoefficientLaw,
    pub weight_law: WeightLaw,
}

const UNITS: u32 = 10_000;

impl CaseGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n_min: 1,
            n_max: 16,
            coefficient_law: CoefficientLaw::Mixed,
            weight_law: WeightLaw::Mixed,
        }
    }

    pub fn case_seed(&self, index: u64) -> u64 {
        mix64(self.seed ^ mix64(index))
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.case_seed(index))
    }

    /// A nonzero coefficient vector.
    pub fn coefficients(&self, rng: &mut ChaCha8Rng) -> CoefficientVector {
        let n = rng.random_range(self.n_min.max(1)..=self.n_max.max(self.n_min).max(1));
        let law = match self.coefficient_law {
            CoefficientLaw::Mixed => [
                CoefficientLaw::UniformSphere,
                CoefficientLaw::IntegerGrid,
                CoefficientLaw::Sparse,
            ][rng.random_range(0..3)],
            other => other,
        };
        loop {
            let texts: Vec<String> = match law {
                CoefficientLaw::UniformSphere | CoefficientLaw::Mixed => {
                    let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    g.iter().map(|v| format!("{:.6}", v / norm)).collect()
                }
                CoefficientLaw::IntegerGrid => {
                    (0..n).map(|_| rng.random_range(-4i32..=4).to_string()).collect()
                }
                CoefficientLaw::Sparse => {
                    let mut t: Vec<String> = (0..n)
                        .map(|_| {
                            if rng.random_bool(0.6) {
                                "0".to_string()
                            } else {
                                sparse_entry(rng)
                            }
                        })
                        .collect();
                    let i = rng.random_range(0..n);
                    t[i] = sparse_entry(rng);
                    t
                }
            };
            let c = CoefficientVector::parse(&texts).expect("generated decimals parse");
            if !c.is_zero() {
                return c;
            }
        }
    }

    /// A coefficient vector with `lo < Σ x² <= hi`, decided exactly.
    pub fn coefficients_in_shell(&self, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> CoefficientVector {
        let lo_d = Decimal::from_f64(lo).expect("finite bound");
        let hi_d = Decimal::from_f64(hi).expect("finite bound");
        let base = self.coefficients(rng);
        loop {
            let radius = rng.random_range(lo..=hi).sqrt();
            let scale = radius / base.norm2();
            let texts: Vec<String> = base
                .values()
                .iter()
                .map(|v| format!("{:.6}", v * scale))
                .collect();
            let c = CoefficientVector::parse(&texts).expect("generated decimals parse");
            if c.cmp_sum_squares(&lo_d).is_gt() && c.cmp_sum_squares(&hi_d).is_le() {
                return c;
            }
        }
    }

    /// A weight with `P(w != 0) > min_s`.
    pub fn weight(&self, rng: &mut ChaCha8Rng, min_s: f64) -> Weight {
        let sign_function = match self.weight_law {
            WeightLaw::IndependentAtoms => false,
            WeightLaw::SignFunctions => true,
            WeightLaw::Mixed => rng.random_bool(0.5),
        };
        let spec = if sign_function {
            let k = rng.random_range(1..=3usize);
            let size = 1usize << k;
            let min_nonzero = (min_s * size as f64).floor() as usize + 1;
            let nonzero = rng.random_range(min_nonzero.min(size)..=size);
            let mut values: Vec<Decimal> = (0..size)
                .map(|i| {
                    if i < nonzero {
                        positive_value(rng)
                    } else {
                        Decimal::parse("0").expect("zero")
                    }
                })
                .collect();
            values.shuffle(rng);
            let aux = rng.random_bool(0.5).then(|| {
                let m = rng.random_range(1..=3);
                let atoms = composition(rng, UNITS, m)
                    .into_iter()
                    .map(|u| AtomSpec {
                        value: positive_value(rng),
                        prob: units(u),
                    })
                    .collect();
                AtomBlock { atoms }
            });
            WeightSpec::SignFunction(SignFunctionBlock { k, values, aux })
        } else {
            // zero mass Z/UNITS with 1 - Z/UNITS > min_s
            let z_max = ((1.0 - min_s) * UNITS as f64).ceil() as u32 - 1;
            let z = rng.random_range(0..=z_max);
            let m = rng.random_range(1..=4);
            let mut atoms: Vec<AtomSpec> = composition(rng, UNITS - z, m)
                .into_iter()
                .map(|u| AtomSpec {
                    value: positive_value(rng),
                    prob: units(u),
                })
                .collect();
            if z > 0 {
                atoms.push(AtomSpec {
                    value: Decimal::parse("0").expect("zero"),
                    prob: units(z),
                });
            }
            WeightSpec::Independent(AtomBlock { atoms })
        };
        Weight::new(spec).expect("generated weight is valid")
    }

    /// `0.5 <= p < q`, two decimals each.
    pub fn exponents(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let p = round2(rng.random_range(0.5..4.0));
        let q = round2(p + rng.random_range(0.25..4.0));
        (p, q)
    }

    /// Nonnegative, not identically zero, `1..=max_atoms` atoms.
    pub fn distribution(&self, rng: &mut ChaCha8Rng, max_atoms: usize) -> Vec<(f64, f64)> {
        let m = rng.random_range(1..=max_atoms.max(1));
        let mut dist: Vec<(f64, f64)> = composition(rng, UNITS, m)
            .into_iter()
            .map(|u| {
                let v = if rng.random_bool(0.25) {
                    0.0
                } else {
                    round3(rng.random_range(0.001..5.0))
                };
                (v, u as f64 / UNITS as f64)
            })
            .collect();
        if dist.iter().all(|a| a.0 == 0.0) {
            let i = rng.random_range(0..m);
            dist[i].0 = round3(rng.random_range(0.001..5.0));
        }
        dist
    }
}

fn sparse_entry(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.5) {
        let v = rng.random_range(1i32..=9);
        if rng.random_bool(0.5) { v } else { -v }.to_string()
    } else {
        format!("{:.3}", rng.random_range(-3.0..3.0))
    }
}

fn positive_value(rng: &mut ChaCha8Rng) -> Decimal {
    Decimal::parse(&format!("{:.3}", rng.random_range(0.05..3.0))).expect("generated decimal")
}

fn units(u: u32) -> Decimal {
    Decimal::parse(&format!("{u}e-4")).expect("generated decimal")
}

/// `total` split into `parts` positive integers.
fn composition(rng: &mut ChaCha8Rng, total: u32, parts: usize) -> Vec<u32> {
    let parts = parts.clamp(1, total as usize) as u32;
    let spare = total - parts;
    let mut cuts: Vec<u32> = (0..parts - 1).map(|_| rng.random_range(0..=spare)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts as usize);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(spare)) {
        out.push(1 + c - prev);
        prev = c;
    }
    out
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::zero_mass_bound;
    use crate::weight::weight_stats;

    #[test]
    fn same_seed_same_stream() {
        let g = CaseGenerator::new(9);
        for i in 0..20 {
            let a = g.coefficients(&mut g.rng(i));
            let b = g.coefficients(&mut g.rng(i));
            assert_eq!(a, b);
            assert!(!a.is_zero() && a.len() <= 16 && a.is_exact());
        }
        assert_ne!(g.case_seed(0), CaseGenerator::new(10).case_seed(0));
    }

    #[test]
    fn shell_and_weights_respect_bounds() {
        let g = CaseGenerator::new(3);
        let one = Decimal::parse("1").unwrap();
        let four = Decimal::parse("4").unwrap();
        for i in 0..200 {
            let mut rng = g.rng(i);
            let c = g.coefficients_in_shell(&mut rng, 1.0, 4.0);
            assert!(c.cmp_sum_squares(&one).is_gt() && c.cmp_sum_squares(&four).is_le());
            for min_s in [2.0 / 3.0, zero_mass_bound()] {
                let w = g.weight(&mut rng, min_s);
                assert!(weight_stats(&w, 2.0).unwrap().s.value() > min_s);
            }
            let (p, q) = g.exponents(&mut rng);
            assert!(0.5 <= p && p < q);
            let d = g.distribution(&mut rng, 8);
            assert!(d.len() <= 8 && d.iter().any(|a| a.0 > 0.0));
        }
    }

    #[test]
    fn compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for parts in 1..6 {
            let c = composition(&mut rng, 17, parts);
            assert_eq!(c.len(), parts);
            assert_eq!(c.iter().sum::<u32>(), 17);
            assert!(c.iter().all(|&u| u >= 1));
        }
    }
}
