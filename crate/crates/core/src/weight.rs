//! Discrete weight models and their summary statistics.
//!
//! A weight is either independent of the signs (a list of atoms), or a
//! function of the first `k` signs given as a table, optionally multiplied
//! by an independent atom layer. Values are nonnegative: callers pass `|w|`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::decimal::{Decimal, ExactDecimal, Probability};
use crate::error::{Error, Result};
use crate::sum::{ExactSum, NeumaierSum};

/// Largest sign-table depth accepted.
pub const MAX_SIGN_DEPTH: usize = 30;

/// JSON form of a weight, e.g.
/// `{"independent": {"atoms": [{"value": "1", "prob": "0.8"}, ...]}}` or
/// `{"sign_function": {"k": 2, "values": ["1","0","0","1"], "aux": {...}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum WeightSpec {
    #[serde(rename = "independent")]
    Independent(AtomBlock),
    #[serde(rename = "sign_function")]
    SignFunction(SignFunctionBlock),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomBlock {
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub value: Decimal,
    pub prob: Decimal,
}

/// Table values are listed in lexicographic sign order with `+` before `-`
/// and `r_1` most significant: `++, +-, -+, --` for `k = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignFunctionBlock {
    pub k: usize,
    pub values: Vec<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<AtomBlock>,
}

/// Validated weight; serializes as its [`WeightSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "WeightSpec", try_from = "WeightSpec")]
pub struct Weight {
    spec: WeightSpec,
    depth: usize,
    table: Vec<Decimal>,
    aux: Vec<AuxAtom>,
}

/// Atom of the independent layer.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxAtom {
    pub value: Decimal,
    pub prob: Decimal,
    pub probability: Probability,
}

fn parse_atoms(pairs: &[(&str, &str)]) -> Result<AtomBlock> {
    let atoms = pairs
        .iter()
        .map(|(v, p)| {
            Ok(AtomSpec {
                value: Decimal::parse(v)?,
                prob: Decimal::parse(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AtomBlock { atoms })
}

impl Weight {
    pub fn new(spec: WeightSpec) -> Result<Self> {
        let (depth, table, aux_block) = match &spec {
            WeightSpec::Independent(block) => (0, vec![Decimal::parse("1")?], Some(block)),
            WeightSpec::SignFunction(f) => {
                if f.k == 0 || f.k > MAX_SIGN_DEPTH {
                    return Err(Error::MalformedWeight(format!(
                        "sign depth k = {} must be in 1..={MAX_SIGN_DEPTH}",
                        f.k
                    )));
                }
                if f.values.len() != 1 << f.k {
                    return Err(Error::MalformedWeight(format!(
                        "sign table has {} entries, expected 2^{} = {}",
                        f.values.len(),
                        f.k,
                        1usize << f.k
                    )));
                }
                (f.k, f.values.clone(), f.aux.as_ref())
            }
        };
        if let Some(v) = table.iter().find(|v| v.exact().is_negative()) {
            return Err(Error::MalformedWeight(format!("negative weight value {v}")));
        }
        let aux = match aux_block {
            Some(block) => validate_atoms(block)?,
            None => vec![AuxAtom {
                value: Decimal::parse("1")?,
                prob: Decimal::parse("1")?,
                probability: Probability::one(),
            }],
        };
        let any_table = table.iter().any(|v| !v.exact().is_zero());
        let any_aux = aux.iter().any(|a| !a.value.exact().is_zero());
        if !(any_table && any_aux) {
            return Err(Error::MalformedWeight("weight is identically zero".into()));
        }
        Ok(Self {
            spec,
            depth,
            table,
            aux,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: WeightSpec =
            serde_json::from_str(text).map_err(|e| Error::MalformedWeight(e.to_string()))?;
        Self::new(spec)
    }

    /// Independent atoms given as `(value, prob)` decimal strings.
    pub fn independent(atoms: &[(&str, &str)]) -> Result<Self> {
        Self::new(WeightSpec::Independent(parse_atoms(atoms)?))
    }

    /// `w ≡ 1`, the unweighted case.
    pub fn constant_one() -> Self {
        Self::independent(&[("1", "1")]).expect("valid constant weight")
    }

    pub fn sign_function(k: usize, values: &[&str], aux: Option<&[(&str, &str)]>) -> Result<Self> {
        let values = values
            .iter()
            .map(|v| Decimal::parse(v))
            .collect::<Result<Vec<_>>>()?;
        let aux = aux.map(parse_atoms).transpose()?;
        Self::new(WeightSpec::SignFunction(SignFunctionBlock { k, values, aux }))
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    /// Number of leading signs the weight depends on (0 if independent).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn table(&self) -> &[Decimal] {
        &self.table
    }

    pub fn aux(&self) -> &[AuxAtom] {
        &self.aux
    }

    /// Merged distribution of `w`, sorted by decreasing value.
    pub fn distribution(&self) -> Vec<WeightAtom> {
        let cell = Probability::dyadic(1, self.depth as u32);
        let mut merged: BTreeMap<ExactDecimal, BigRational> = BTreeMap::new();
        for v in &self.table {
            for a in &self.aux {
                let value = v.exact().mul(a.value.exact());
                let p = &cell * &a.probability;
                *merged.entry(value).or_insert_with(BigRational::zero) += p.ratio();
            }
        }
        merged
            .into_iter()
            .rev()
            .map(|(value, p)| WeightAtom {
                value_f64: value.to_f64(),
                value,
                probability: Probability::new(p),
            })
            .collect()
    }

    /// Same weight with every value multiplied by `c > 0`.
    pub fn scaled_by(&self, c: &Decimal) -> Result<Self> {
        let scale = |d: &Decimal| -> Result<Decimal> {
            let p = d.exact().mul(c.exact());
            Decimal::parse(&format!("{}e{}", p.mantissa(), p.exponent()))
        };
        let spec = match &self.spec {
            WeightSpec::Independent(b) => WeightSpec::Independent(AtomBlock {
                atoms: b
                    .atoms
                    .iter()
                    .map(|a| {
                        Ok(AtomSpec {
                            value: scale(&a.value)?,
                            prob: a.prob.clone(),
                        })
                    })
                    .collect::<Result<_>>()?,
            }),
            WeightSpec::SignFunction(f) => WeightSpec::SignFunction(SignFunctionBlock {
                k: f.k,
                values: f.values.iter().map(scale).collect::<Result<_>>()?,
                aux: f.aux.clone(),
            }),
        };
        Self::new(spec)
    }
}

fn validate_atoms(block: &AtomBlock) -> Result<Vec<AuxAtom>> {
    if block.atoms.is_empty() {
        return Err(Error::MalformedWeight("atom list is empty".into()));
    }
    let mut total = NeumaierSum::default();
    let mut out = Vec::with_capacity(block.atoms.len());
    for a in &block.atoms {
        if a.value.exact().is_negative() {
            return Err(Error::MalformedWeight(format!("negative atom value {}", a.value)));
        }
        if a.prob.exact().is_negative() || a.prob.exact().is_zero() {
            return Err(Error::MalformedWeight(format!(
                "atom probability {} must be positive",
                a.prob
            )));
        }
        total += a.prob.value();
        out.push(AuxAtom {
            value: a.value.clone(),
            prob: a.prob.clone(),
            probability: Probability::new(a.prob.exact().to_rational()),
        });
    }
    if (total.sum() - 1.0).abs() > 1e-12 {
        return Err(Error::MalformedWeight(format!(
            "atom probabilities sum to {}, not 1",
            total.sum()
        )));
    }
    Ok(out)
}

/// One value of a merged weight distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAtom {
    pub value: ExactDecimal,
    pub value_f64: f64,
    pub probability: Probability,
}

/// `s = P(w != 0)`, `‖w‖_q`, and the survival function of `w`.
#[derive(Debug, Clone)]
pub struct WeightStats {
    pub q: f64,
    pub s: Probability,
    pub norm_q: f64,
    atoms: Vec<WeightAtom>,
}

impl WeightStats {
    /// `P(w > delta)`, exact.
    pub fn survival(&self, delta: f64) -> Probability {
        self.mass_where(|v| v > delta)
    }

    /// `P(w >= v)`, exact.
    pub fn at_least(&self, v: f64) -> Probability {
        self.mass_where(|x| x >= v)
    }

    fn mass_where(&self, keep: impl Fn(f64) -> bool) -> Probability {
        Probability::new(
            self.atoms
                .iter()
                .filter(|a| keep(a.value_f64))
                .fold(BigRational::zero(), |acc, a| acc + a.probability.ratio()),
        )
    }

    /// Distribution atoms in decreasing order of value.
    pub fn atoms(&self) -> &[WeightAtom] {
        &self.atoms
    }
}

pub fn weight_stats(weight: &Weight, q: f64) -> Result<WeightStats> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::domain("q", q, "0 < q < inf"));
    }
    let atoms = weight.distribution();
    let s = Probability::new(
        atoms
            .iter()
            .filter(|a| !a.value.is_zero())
            .fold(BigRational::zero(), |acc, a| acc + a.probability.ratio()),
    );
    let moment: ExactSum = atoms
        .iter()
        .map(|a| a.probability.value() * a.value_f64.powf(q))
        .collect();
    Ok(WeightStats {
        q,
        s,
        norm_q: moment.value().powf(1.0 / q),
        atoms,
    })
}

/// `δ₀ = sup{δ > 0 : P(w > δ) >= τ}`; for a discrete weight this is the
/// largest atom `v > 0` with `P(w >= v) >= τ`.
pub fn delta0(weight: &Weight, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::domain("tau", tau, "0 < tau <= 1"));
    }
    let atoms = weight.distribution();
    let mut cumulative = BigRational::zero();
    for atom in atoms.iter().filter(|a| !a.value.is_zero()) {
        cumulative += atom.probability.ratio();
        if Probability::new(cumulative.clone()).value() >= tau {
            return Ok(atom.value_f64);
        }
    }
    let s = Probability::new(cumulative).value();
    Err(Error::NoValidDelta { tau, s })
}

impl From<Weight> for WeightSpec {
    fn from(w: Weight) -> Self {
        w.spec
    }
}

impl TryFrom<WeightSpec> for Weight {
    type Error = Error;

    fn try_from(spec: WeightSpec) -> Result<Self> {
        Weight::new(spec)
    }
}

impl Default for Weight {
    fn default() -> Self {
        Self::constant_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s_of(w: &Weight) -> f64 {
        weight_stats(w, 1.0).unwrap().s.value()
    }

    #[test]
    fn stats_examples() {
        let w = Weight::independent(&[("1", "0.8"), ("0", "0.2")]).unwrap();
        let st = weight_stats(&w, 4.0).unwrap();
        assert_eq!(st.s.to_string(), "4/5");
        assert!((st.norm_q - 0.8f64.powf(0.25)).abs() < 1e-15);
        assert!((st.norm_q - 0.945742).abs() < 1e-6);

        let one = Weight::constant_one();
        for q in [0.5, 1.0, 3.0, 7.5] {
            let st = weight_stats(&one, q).unwrap();
            assert_eq!(st.s.value(), 1.0);
            assert_eq!(st.norm_q, 1.0);
        }

        let w = Weight::sign_function(2, &["1", "0", "0", "1"], None).unwrap();
        assert_eq!(weight_stats(&w, 2.0).unwrap().s.to_string(), "1/2");
    }

    #[test]
    fn survival_function() {
        let w = Weight::independent(&[("2", "0.5"), ("0.5", "0.3"), ("0", "0.2")]).unwrap();
        let st = weight_stats(&w, 2.0).unwrap();
        assert_eq!(st.survival(0.0).to_string(), "4/5");
        assert_eq!(st.survival(0.5).to_string(), "1/2");
        assert_eq!(st.at_least(0.5).to_string(), "4/5");
        assert!(st.survival(2.0).ratio().is_zero());
        assert_eq!(st.survival(-1.0).value(), 1.0);
    }

    #[test]
    fn delta0_examples() {
        let w = Weight::independent(&[("1", "0.8"), ("0", "0.2")]).unwrap();
        assert_eq!(delta0(&w, 0.7666667).unwrap(), 1.0);
        let w = Weight::independent(&[("2", "0.5"), ("0.5", "0.3"), ("0", "0.2")]).unwrap();
        assert_eq!(delta0(&w, 0.7666667).unwrap(), 0.5);
        assert_eq!(delta0(&Weight::constant_one(), 1.0).unwrap(), 1.0);
        assert!(matches!(delta0(&w, 0.81), Err(Error::NoValidDelta { .. })));
        assert!(delta0(&w, 0.0).is_err());
    }

    #[test]
    fn ties_are_merged() {
        let w = Weight::sign_function(1, &["2", "1"], Some(&[("1", "0.5"), ("2", "0.5")])).unwrap();
        let d = w.distribution();
        let vals: Vec<_> = d.iter().map(|a| (a.value.to_string(), a.probability.to_string())).collect();
        assert_eq!(
            vals,
            vec![("4".into(), "1/4".into()), ("2".into(), "1/2".into()), ("1".into(), "1/4".into())]
        );
        assert_eq!(delta0(&w, 0.75).unwrap(), 2.0);
    }

    #[test]
    fn json_schema() {
        let w = Weight::from_json(
            r#"{"independent": {"atoms": [{"value": "1", "prob": "0.8"}, {"value": "0", "prob": "0.2"}]}}"#,
        )
        .unwrap();
        assert!((s_of(&w) - 0.8).abs() < 1e-15);
        let w = Weight::from_json(
            r#"{"sign_function": {"k": 1, "values": ["1", "0.5"],
                "aux": {"atoms": [{"value": "1", "prob": "0.9"}, {"value": "0", "prob": "0.1"}]}}}"#,
        )
        .unwrap();
        assert!((s_of(&w) - 0.9).abs() < 1e-15);
        let back = serde_json::to_string(w.spec()).unwrap();
        assert_eq!(Weight::from_json(&back).unwrap(), w);
    }

    #[test]
    fn malformed_weights() {
        let bad = [
            r#"{"independent": {"atoms": []}}"#,
            r#"{"independent": {"atoms": [{"value": "-1", "prob": "1"}]}}"#,
            r#"{"independent": {"atoms": [{"value": "1", "prob": "0.5"}]}}"#,
            r#"{"independent": {"atoms": [{"value": "1", "prob": "0"}, {"value": "1", "prob": "1"}]}}"#,
            r#"{"independent": {"atoms": [{"value": "0", "prob": "1"}]}}"#,
            r#"{"sign_function": {"k": 2, "values": ["1", "0", "1"]}}"#,
            r#"{"sign_function": {"k": 0, "values": ["1"]}}"#,
            r#"{"sign_function": {"k": 1, "values": ["0", "0"]}}"#,
            r#"{"gaussian": {}}"#,
            r#"{"independent": {"atoms": [{"value": "1", "prob": "1", "extra": 1}]}}"#,
        ];
        for b in bad {
            assert!(matches!(Weight::from_json(b), Err(Error::MalformedWeight(_))), "{b}");
        }
    }

    #[test]
    fn scaling_covariance() {
        let w = Weight::independent(&[("2", "0.5"), ("0.5", "0.3"), ("0", "0.2")]).unwrap();
        let c = Decimal::parse("3").unwrap();
        let w3 = w.scaled_by(&c).unwrap();
        let (a, b) = (weight_stats(&w, 4.0).unwrap(), weight_stats(&w3, 4.0).unwrap());
        assert_eq!(a.s, b.s);
        assert!((b.norm_q - 3.0 * a.norm_q).abs() < 1e-14);
        assert_eq!(delta0(&w3, 0.7).unwrap(), 3.0 * delta0(&w, 0.7).unwrap());
    }
}
