use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::decimal::{pow10, Decimal};
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Coefficients with at most this many significant digits are scaled to
/// integers so that sums can be compared exactly.
pub const EXACT_DIGITS: usize = 15;

/// Finite coefficient sequence `(x_1, ..., x_n)` of the sum `Σ r_i x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    entries: Vec<Decimal>,
    values: Vec<f64>,
    scaled: Option<ScaledIntegers>,
}

/// `x_i = ints[i] * 10^exponent` for every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledIntegers {
    pub ints: Vec<i128>,
    pub exponent: i32,
}

impl CoefficientVector {
    pub fn new(entries: Vec<Decimal>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidCoefficients("at least one coefficient is required".into()));
        }
        let values = entries.iter().map(Decimal::value).collect();
        let scaled = scale_to_integers(&entries);
        Ok(Self {
            entries,
            values,
            scaled,
        })
    }

    pub fn parse<S: AsRef<str>>(texts: &[S]) -> Result<Self> {
        let entries = texts
            .iter()
            .map(|t| Decimal::parse(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        let entries = values
            .iter()
            .map(|&v| Decimal::from_f64(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entries(&self) -> &[Decimal] {
        &self.entries
    }

    pub fn texts(&self) -> Vec<String> {
        self.entries.iter().map(|d| d.text().to_string()).collect()
    }

    /// Integer-scaled form, present when every entry has at most
    /// [`EXACT_DIGITS`] significant digits and the scaled sum fits `i128`.
    pub fn scaled(&self) -> Option<&ScaledIntegers> {
        self.scaled.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.scaled.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|d| d.exact().is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Σ x_i², compensated.
    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).collect::<NeumaierSum>().sum()
    }

    /// (Σ x_i²)^{1/2}, the L² norm of the Rademacher sum.
    pub fn norm2(&self) -> f64 {
        self.sum_squares().sqrt()
    }

    /// Exact comparison of Σ x_i² against `bound`.
    pub fn cmp_sum_squares(&self, bound: &Decimal) -> Ordering {
        let b = bound.exact();
        // Σ m_i² 10^{2 e_i} vs m_b 10^{e_b}, brought to the smallest exponent
        let min_e = self
            .entries
            .iter()
            .map(|d| 2 * d.exact().exponent())
            .chain(std::iter::once(b.exponent()))
            .min()
            .unwrap_or(0);
        let lhs: BigInt = self
            .entries
            .iter()
            .map(|d| {
                let e = d.exact();
                e.mantissa() * e.mantissa() * pow10((2 * e.exponent() - min_e) as u32)
            })
            .sum();
        let rhs = b.mantissa() * pow10((b.exponent() - min_e) as u32);
        lhs.cmp(&rhs)
    }

    /// Same vector with every coordinate multiplied by `c`.
    pub fn scaled_by(&self, c: &Decimal) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|d| {
                let prod = d.exact().mul(c.exact());
                Decimal::parse(&format!("{}e{}", prod.mantissa(), prod.exponent()))
                    .expect("product of decimals is a decimal")
            })
            .collect();
        Self::new(entries).expect("nonempty")
    }
}

fn scale_to_integers(entries: &[Decimal]) -> Option<ScaledIntegers> {
    if entries
        .iter()
        .any(|d| d.exact().significant_digits() > EXACT_DIGITS)
    {
        return None;
    }
    let exponent = entries
        .iter()
        .filter(|d| !d.exact().is_zero())
        .map(|d| d.exact().exponent())
        .min()
        .unwrap_or(0);
    let mut ints = Vec::with_capacity(entries.len());
    let mut total = BigInt::zero();
    for d in entries {
        let e = d.exact();
        let v = if e.is_zero() {
            BigInt::zero()
        } else {
            e.mantissa() * pow10((e.exponent() - exponent) as u32)
        };
        total += v.abs();
        ints.push(v.to_i128()?);
    }
    // the largest |Σ ±x_i| must fit as well
    total.to_i128()?;
    Some(ScaledIntegers { ints, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_to_common_exponent() {
        let c = CoefficientVector::parse(&["0.6", "0.80", "-3"]).unwrap();
        let s = c.scaled().unwrap();
        assert_eq!(s.exponent, -1);
        assert_eq!(s.ints, vec![6, 8, -30]);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn long_decimals_fall_back_to_tolerance_mode() {
        let c = CoefficientVector::from_f64(&[0.1 + 0.2, 1.0]).unwrap();
        assert!(!c.is_exact());
        let c = CoefficientVector::parse(&["1e30", "1e-30"]).unwrap();
        assert!(!c.is_exact(), "10^60 overflows i128");
        let c = CoefficientVector::parse(&["123456789012345", "1"]).unwrap();
        assert!(c.is_exact());
        let c = CoefficientVector::parse(&["1234567890123456", "1"]).unwrap();
        assert!(!c.is_exact());
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(CoefficientVector::parse::<&str>(&[]).is_err());
        assert!(CoefficientVector::from_f64(&[f64::INFINITY]).is_err());
        assert!(CoefficientVector::parse(&["1", "x"]).is_err());
    }

    #[test]
    fn norm_and_zero() {
        let c = CoefficientVector::parse(&["0.6", "0.8"]).unwrap();
        assert!((c.norm2() - 1.0).abs() < 1e-15);
        assert!(!c.is_zero());
        let z = CoefficientVector::parse(&["0", "-0.0", "0e5"]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.norm2(), 0.0);
        assert!(z.is_exact());
    }

    #[test]
    fn exact_sum_of_squares_comparison() {
        let one = Decimal::parse("1").unwrap();
        let c = CoefficientVector::parse(&["0.6", "0.8"]).unwrap();
        assert_eq!(c.cmp_sum_squares(&one), Ordering::Equal);
        let c = CoefficientVector::parse(&["0.8", "0.8"]).unwrap();
        assert_eq!(c.cmp_sum_squares(&one), Ordering::Greater);
        let c = CoefficientVector::parse(&["0.1", "0.2"]).unwrap();
        assert_eq!(c.cmp_sum_squares(&Decimal::parse("0.05").unwrap()), Ordering::Equal);
    }

    #[test]
    fn scaling_is_exact() {
        let c = CoefficientVector::parse(&["0.6", "-0.8"]).unwrap();
        let s = c.scaled_by(&Decimal::parse("2.5").unwrap());
        assert_eq!(s.texts(), vec!["15e-1", "-2e0"]);
        assert_eq!(s.values(), &[1.5, -2.0]);
    }
}
