//! Decimal-string numbers with an exact `mantissa * 10^exponent` shadow.
//!
//! Every numeric input (coefficients, weight atoms, thresholds) enters as
//! text. The text is kept for echoing, the nearest `f64` is used for
//! floating work, and the exact value drives zero detection and tie
//! comparisons.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact value `mantissa * 10^exponent`, normalized so the mantissa has no
/// trailing decimal zeros (zero is stored as `0 * 10^0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactDecimal {
    mantissa: BigInt,
    exponent: i32,
}

impl ExactDecimal {
    pub fn new(mut mantissa: BigInt, mut exponent: i32) -> Self {
        if mantissa.is_zero() {
            return Self {
                mantissa,
                exponent: 0,
            };
        }
        let ten = BigInt::from(10);
        loop {
            let (q, r) = (&mantissa / &ten, &mantissa % &ten);
            if !r.is_zero() {
                break;
            }
            mantissa = q;
            exponent += 1;
        }
        Self { mantissa, exponent }
    }

    pub fn zero() -> Self {
        Self::new(BigInt::zero(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.sign() == Sign::Minus
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Count of significant decimal digits (0 for zero).
    pub fn significant_digits(&self) -> usize {
        if self.is_zero() {
            0
        } else {
            self.mantissa.abs().to_str_radix(10).len()
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.mantissa * &other.mantissa, self.exponent + other.exponent)
    }

    pub fn to_rational(&self) -> BigRational {
        let scale = pow10(self.exponent.unsigned_abs());
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa * scale)
        } else {
            BigRational::new(self.mantissa.clone(), scale)
        }
    }

    /// Correctly rounded conversion through the standard float parser.
    pub fn to_f64(&self) -> f64 {
        format!("{}e{}", self.mantissa, self.exponent)
            .parse()
            .unwrap_or(f64::NAN)
    }
}

impl Ord for ExactDecimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mantissa.sign(), other.mantissa.sign());
        if sa != sb {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        let diff = self.exponent - other.exponent;
        if diff >= 0 {
            (&self.mantissa * pow10(diff as u32)).cmp(&other.mantissa)
        } else {
            self.mantissa
                .cmp(&(&other.mantissa * pow10(diff.unsigned_abs())))
        }
    }
}

impl PartialOrd for ExactDecimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl fmt::Display for ExactDecimal {
    /// Plain positional notation, e.g. `-1.4`, `300`, `0.025`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.is_negative();
        let digits = self.mantissa.abs().to_str_radix(10);
        let sign = if neg { "-" } else { "" };
        if self.exponent >= 0 {
            write!(f, "{sign}{digits}{}", "0".repeat(self.exponent as usize))
        } else {
            let frac = self.exponent.unsigned_abs() as usize;
            if digits.len() > frac {
                let (int, rest) = digits.split_at(digits.len() - frac);
                write!(f, "{sign}{int}.{rest}")
            } else {
                write!(f, "{sign}0.{}{digits}", "0".repeat(frac - digits.len()))
            }
        }
    }
}

pub(crate) fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

/// A number given as decimal text.
#[derive(Debug, Clone, PartialEq)]
pub struct Decimal {
    text: String,
    value: f64,
    exact: ExactDecimal,
}

impl Decimal {
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let bad = |reason| Error::InvalidNumber {
            text: text.to_string(),
            reason,
        };
        let (negative, body) = match trimmed.as_bytes().first() {
            Some(b'-') => (true, &trimmed[1..]),
            Some(b'+') => (false, &trimmed[1..]),
            Some(_) => (false, trimmed),
            None => return Err(bad("empty")),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], Some(&body[i + 1..])),
            None => (body, None),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("no digits"));
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad("not a decimal number"));
        }
        let exp: i64 = match exp {
            Some(e) => e.parse().map_err(|_| bad("bad exponent"))?,
            None => 0,
        };
        let exponent = exp - frac_part.len() as i64;
        if exponent.abs() > 100_000 {
            return Err(bad("exponent out of range"));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut mantissa: BigInt = digits.parse().map_err(|_| bad("bad digits"))?;
        if negative {
            mantissa = -mantissa;
        }
        let exact = ExactDecimal::new(mantissa, exponent as i32);
        let value: f64 = trimmed.parse().map_err(|_| bad("not a decimal number"))?;
        if !value.is_finite() {
            return Err(bad("outside the double range"));
        }
        if value == 0.0 && !exact.is_zero() {
            return Err(bad("underflows the double range"));
        }
        Ok(Self {
            text: trimmed.to_string(),
            value,
            exact,
        })
    }

    /// Uses the shortest decimal text that round-trips to `x`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidNumber {
                text: x.to_string(),
                reason: "not finite",
            });
        }
        let mut d = Self::parse(&format!("{x:e}"))?;
        d.text = format!("{x}");
        Ok(d)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> &ExactDecimal {
        &self.exact
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl std::str::FromStr for Decimal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    /// Accepts a decimal string, or a bare JSON number as a convenience.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Repr::deserialize(d)? {
            Repr::Text(t) => t,
            Repr::Number(n) => n.to_string(),
        };
        Decimal::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Exact probability, always a rational number.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(r: BigRational) -> Self {
        Self(r)
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    /// `count / 2^bits`.
    pub fn dyadic(count: u64, bits: u32) -> Self {
        Self(BigRational::new(
            BigInt::from(count),
            BigInt::one() << bits as usize,
        ))
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn value(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

impl std::ops::Add for Probability {
    type Output = Probability;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Mul for &Probability {
    type Output = Probability;
    fn mul(self, rhs: Self) -> Probability {
        Probability(&self.0 * &rhs.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Probability", 2)?;
        st.serialize_field("ratio", &self.to_string())?;
        st.serialize_field("value", &self.value())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            ratio: String,
        }
        let r = Repr::deserialize(d)?;
        r.ratio
            .parse::<BigRational>()
            .map(Probability)
            .map_err(serde::de::Error::custom)
    }
}

/// Nearest double to a rational, via 64 significant bits of quotient.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let (n, d) = (r.numer().abs(), r.denom().abs());
    // shift so that the integer quotient carries at least 65 bits
    let shift = 65i64 - (n.bits() as i64 - d.bits() as i64);
    let (num, den) = if shift >= 0 {
        (n << shift as usize, d)
    } else {
        (n, d << (-shift) as usize)
    };
    let (q, rem) = (&num / &den, &num % &den);
    // fold the remainder into a sticky bit
    let q = if rem.is_zero() { q } else { q | BigInt::one() };
    let mut v = q.to_str_radix(10).parse::<f64>().unwrap_or(f64::NAN);
    let mut e = -shift;
    while e > 0 {
        let step = e.min(1000);
        v *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        v /= 2f64.powi(step as i32);
        e += step;
    }
    if neg {
        -v
    } else {
        v
    }
}
