//! Summation helpers.
//!
//! [`NeumaierSum`] is a compensated running sum. [`ExactSum`] accumulates
//! nonnegative doubles without any rounding at all, so the result does not
//! depend on the order of the terms; pattern-space reductions use it so
//! that permuted inputs and parallel partitions give bit-identical output.

use std::ops::AddAssign;

/// Kahan summation with Neumaier's improvement.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new(init: f64) -> Self {
        Self { s: init, c: 0.0 }
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        for x in iter {
            acc += x;
        }
        acc
    }
}

const CHUNK_BITS: u32 = 32;
const CHUNK_MASK: i64 = (1 << CHUNK_BITS) - 1;
// Bit positions run from 2^-1074 (position 0) up to 2^1024; 72 chunks of
// 32 bits leave headroom for carries out of the top.
const CHUNKS: usize = 72;
// Each add puts < 2^32 into a chunk; renormalize long before i64 overflow.
const ADDS_BEFORE_CARRY: u32 = 1 << 29;

/// Order-independent exact sum of nonnegative finite doubles.
///
/// The running value is a fixed-point integer in units of 2^-1074 stored as
/// 32-bit limbs in `i64` cells; carries are propagated lazily.
#[derive(Debug, Clone)]
pub struct ExactSum {
    chunks: [i64; CHUNKS],
    pending: u32,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self {
            chunks: [0; CHUNKS],
            pending: 0,
        }
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        debug_assert!(x >= 0.0 && x.is_finite(), "ExactSum takes nonnegative finite terms");
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as u32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, pos) = if biased == 0 {
            (frac, 0u32)
        } else {
            (frac | (1u64 << 52), biased - 1)
        };
        let idx = (pos / CHUNK_BITS) as usize;
        let wide = (mant as u128) << (pos % CHUNK_BITS);
        self.chunks[idx] += (wide as i64) & CHUNK_MASK;
        self.chunks[idx + 1] += ((wide >> 32) as i64) & CHUNK_MASK;
        self.chunks[idx + 2] += ((wide >> 64) as i64) & CHUNK_MASK;
        self.pending += 1;
        if self.pending >= ADDS_BEFORE_CARRY {
            self.normalize();
        }
    }

    pub fn merge(&mut self, other: &ExactSum) {
        let mut other = other.clone();
        other.normalize();
        self.normalize();
        for (a, b) in self.chunks.iter_mut().zip(other.chunks.iter()) {
            *a += *b;
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        for i in 0..CHUNKS - 1 {
            let carry = self.chunks[i] >> CHUNK_BITS;
            self.chunks[i] &= CHUNK_MASK;
            self.chunks[i + 1] += carry;
        }
        self.pending = 0;
    }

    /// Nearest double to the exact total (ties only approximately even).
    pub fn value(&self) -> f64 {
        let mut c = self.clone();
        c.normalize();
        let Some(top) = c.chunks.iter().rposition(|&v| v != 0) else {
            return 0.0;
        };
        let limb = |i: isize| -> u128 {
            if i < 0 {
                0
            } else {
                c.chunks[i as usize] as u128
            }
        };
        let top = top as isize;
        let mut window = (limb(top) << 64) | (limb(top - 1) << 32) | limb(top - 2);
        if top >= 3 && c.chunks[..(top - 2) as usize].iter().any(|&v| v != 0) {
            window |= 1;
        }
        let mut v = window as f64;
        let mut e = (top - 2) * CHUNK_BITS as isize - 1074;
        while e != 0 {
            let step = e.clamp(-1000, 1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        v
    }
}

impl AddAssign<f64> for ExactSum {
    #[inline]
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = ExactSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn neumaier_survives_cancellation() {
        let s: NeumaierSum = [1e200, 0.1, 0.2, 0.3, -1e200].into_iter().collect();
        assert!((s.sum() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn exact_sum_small_cases() {
        assert_eq!(ExactSum::new().value(), 0.0);
        let s: ExactSum = [1.0, 2.0, 3.5].into_iter().collect();
        assert_eq!(s.value(), 6.5);
        let s: ExactSum = [1e300, 1e-300, 5e-324].into_iter().collect();
        assert_eq!(s.value(), 1e300);
        let s: ExactSum = [5e-324, 5e-324].into_iter().collect();
        assert_eq!(s.value(), 1e-323);
        let s: ExactSum = [f64::MAX / 2.0, f64::MAX / 4.0].into_iter().collect();
        assert_eq!(s.value(), f64::MAX / 2.0 + f64::MAX / 4.0);
    }

    #[test]
    fn exact_sum_recovers_lost_bits() {
        // 1 + 2^-60 repeated 2^10 times: naive summation drops every small term
        let mut s = ExactSum::new();
        s.add(1.0);
        for _ in 0..1024 {
            s.add(2f64.powi(-60));
        }
        assert_eq!(s.value(), 1.0 + 2f64.powi(-50));
    }

    #[test]
    fn merge_equals_single_pass() {
        let xs: Vec<f64> = (1..2000).map(|i| (i as f64).sqrt() * 1e-3).collect();
        let all: ExactSum = xs.iter().copied().collect();
        let mut left: ExactSum = xs[..700].iter().copied().collect();
        let right: ExactSum = xs[700..].iter().copied().collect();
        left.merge(&right);
        assert_eq!(left.value().to_bits(), all.value().to_bits());
    }

    proptest! {
        #[test]
        fn order_independent(mut xs in prop::collection::vec(0.0f64..1e6, 1..200), seed in any::<u64>()) {
            let forward: ExactSum = xs.iter().copied().collect();
            // deterministic shuffle
            let mut state = seed | 1;
            for i in (1..xs.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                xs.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let shuffled: ExactSum = xs.iter().copied().collect();
            prop_assert_eq!(forward.value().to_bits(), shuffled.value().to_bits());
            let naive: f64 = xs.iter().sum();
            prop_assert!((forward.value() - naive).abs() <= 1e-12 * naive.max(1.0));
        }
    }
}
