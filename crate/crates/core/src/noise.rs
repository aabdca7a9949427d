//! Noise sources: samplers with exact probability mass functions
//! `ρ_N(y⃗ | z⃗)`.
//!
//! The string sources corrupt each example independently. A mixture picks
//! one component for the whole vector.
//!
//! JSON config:
//!
//! ```json
//! {"kind": "identity"}
//! {"kind": "n_substitution", "delta": 0.1, "alphabet": "abc"}
//! {"kind": "one_delete", "delta": [0.1, 0.2]}
//! {"kind": "first_char_delete"}
//! {"kind": "mixture", "components": [{"prob": 0.5, "model": {"kind": "identity"}}, ...]}
//! ```
//!
//! `delta` is a number or a list. For `n_substitution` a list is indexed
//! by character position, for `one_delete` by example position; past the
//! end the last entry repeats. `alphabet` defaults to `a`–`z`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ln_sum_exp, Scalar};
use crate::seeds;
use crate::value::Value;

/// Default cap on the number of distinct outcomes [`NoiseModel::exhaustive_support`]
/// will materialize.
pub const SUPPORT_CAP: usize = 1_000_000;

/// A noise rate: one value for every position, or one per position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Delta {
    Const(f64),
    PerIndex(Vec<f64>),
}

impl Delta {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Delta::Const(d) => *d,
            Delta::PerIndex(v) => v[i.min(v.len() - 1)],
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Delta::Const(d) => vec![*d],
            Delta::PerIndex(v) => v.clone(),
        }
    }

    /// Every entry in `[0, 1]` (noise) or `(0, 1)` (loss, `open`).
    pub fn validate(&self, what: &str, open: bool) -> Result<()> {
        let vals = self.values();
        if vals.is_empty() {
            return Err(Error::Config(format!("{what}: empty delta list")));
        }
        for d in vals {
            let ok = if open { d > 0.0 && d < 1.0 } else { (0.0..=1.0).contains(&d) };
            if !ok {
                let range = if open { "(0, 1)" } else { "[0, 1]" };
                return Err(Error::Config(format!("{what}: delta {d} outside {range}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Const(d) => write!(f, "{d}"),
            Delta::PerIndex(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                write!(f, "[{}]", parts.join(","))
            }
        }
    }
}

fn default_alphabet() -> String {
    ('a'..='z').collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub prob: f64,
    pub model: NoiseModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// Never corrupts.
    Identity,
    /// Replaces each character, independently with probability `δ_j`, by a
    /// uniformly chosen different character of the alphabet.
    NSubstitution {
        delta: Delta,
        #[serde(default = "default_alphabet")]
        alphabet: String,
    },
    /// With probability `δ_i` deletes one uniformly chosen character.
    OneDelete { delta: Delta },
    /// Always deletes the first character.
    FirstCharDelete,
    Mixture { components: Vec<Component> },
}

impl NoiseModel {
    pub fn n_substitution(delta: f64, alphabet: &str) -> Self {
        NoiseModel::NSubstitution {
            delta: Delta::Const(delta),
            alphabet: alphabet.to_string(),
        }
    }

    pub fn one_delete(delta: f64) -> Self {
        NoiseModel::OneDelete {
            delta: Delta::Const(delta),
        }
    }

    pub fn mixture(components: Vec<(NoiseModel, f64)>) -> Self {
        NoiseModel::Mixture {
            components: components
                .into_iter()
                .map(|(model, prob)| Component { prob, model })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Identity | NoiseModel::FirstCharDelete => Ok(()),
            NoiseModel::NSubstitution { delta, alphabet } => {
                delta.validate("n_substitution noise", false)?;
                let mut chars: Vec<char> = alphabet.chars().collect();
                chars.sort();
                chars.dedup();
                if chars.len() < 2 || chars.len() != alphabet.chars().count() {
                    return Err(Error::Config(format!(
                        "n_substitution alphabet `{alphabet}` needs at least two distinct characters and no repeats"
                    )));
                }
                Ok(())
            }
            NoiseModel::OneDelete { delta } => delta.validate("one_delete noise", false),
            NoiseModel::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::Config("mixture without components".into()));
                }
                let mut total = 0.0;
                for c in components {
                    if !(c.prob.is_finite() && c.prob >= 0.0) {
                        return Err(Error::Config(format!("mixture weight {} is not a probability", c.prob)));
                    }
                    total += c.prob;
                    c.model.validate()?;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// `ln ρ_N(y⃗ | z⃗)`; `-inf` off the support.
    pub fn ln_pmf<S: Scalar>(&self, y: &[Value], z: &[Value]) -> Result<S> {
        if y.len() != z.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: z.len(),
            });
        }
        if let NoiseModel::Mixture { components } = self {
            let terms = components
                .iter()
                .filter(|c| c.prob > 0.0)
                .map(|c| Ok(S::of(c.prob.ln()) + c.model.ln_pmf::<S>(y, z)?))
                .collect::<Result<Vec<S>>>()?;
            return Ok(ln_sum_exp(terms));
        }
        let mut acc = S::zero();
        for (i, (yi, zi)) in y.iter().zip(z).enumerate() {
            acc = acc + self.ln_pmf_one::<S>(i, yi, zi)?;
            if acc == S::neg_infinity() {
                break;
            }
        }
        Ok(acc)
    }

    /// `ρ_N(y⃗ | z⃗)`.
    pub fn pmf<S: Scalar>(&self, y: &[Value], z: &[Value]) -> Result<S> {
        Ok(self.ln_pmf::<S>(y, z)?.exp())
    }

    fn ln_pmf_one<S: Scalar>(&self, i: usize, y: &Value, z: &Value) -> Result<S> {
        let zero = S::neg_infinity();
        match self {
            NoiseModel::Identity => Ok(if y == z { S::zero() } else { zero }),
            NoiseModel::NSubstitution { delta, alphabet } => {
                let (y, z) = (y.chars()?, z.chars()?);
                if y.len() != z.len() {
                    return Ok(zero);
                }
                let mut acc = S::zero();
                for (j, (a, b)) in y.iter().zip(&z).enumerate() {
                    let d = delta.at(j);
                    let p = if a == b {
                        1.0 - d
                    } else if alphabet.contains(*a) {
                        d / others(alphabet, *b) as f64
                    } else {
                        0.0
                    };
                    if p <= 0.0 {
                        return Ok(zero);
                    }
                    acc = acc + S::of(p).ln();
                }
                Ok(acc)
            }
            NoiseModel::OneDelete { delta } => {
                let (y, z) = (y.chars()?, z.chars()?);
                if z.is_empty() {
                    return Ok(if y.is_empty() { S::zero() } else { zero });
                }
                let d = delta.at(i);
                let mut p = if y == z { 1.0 - d } else { 0.0 };
                if y.len() + 1 == z.len() {
                    let hits = (0..z.len()).filter(|&k| deleted_eq(&z, k, &y)).count();
                    p += d * hits as f64 / z.len() as f64;
                }
                Ok(if p > 0.0 { S::of(p).ln() } else { zero })
            }
            NoiseModel::FirstCharDelete => {
                let (y, z) = (y.chars()?, z.chars()?);
                Ok(if y[..] == z[z.len().min(1)..] { S::zero() } else { zero })
            }
            NoiseModel::Mixture { .. } => unreachable!("mixtures are handled per vector"),
        }
    }

    /// One draw from `ρ_N(· | z⃗)` using `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, z: &[Value], rng: &mut R) -> Result<Vec<Value>> {
        if let NoiseModel::Mixture { components } = self {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = &components[components.len() - 1].model;
            for c in components {
                acc += c.prob;
                if u < acc {
                    chosen = &c.model;
                    break;
                }
            }
            return chosen.sample(z, rng);
        }
        z.iter()
            .enumerate()
            .map(|(i, zi)| self.sample_one(i, zi, rng))
            .collect()
    }

    /// `corrupt(z⃗, seed)`: example `i` draws from its own generator seeded
    /// with `mix(seed, i)`; a mixture's component choice uses `seed`.
    pub fn corrupt(&self, z: &[Value], seed: u64) -> Result<Vec<Value>> {
        if let NoiseModel::Mixture { components } = self {
            let u: f64 = seeds::rng(seed).random();
            let mut acc = 0.0;
            for c in components {
                acc += c.prob;
                if u < acc {
                    return c.model.corrupt(z, seeds::mix(seed, u64::MAX));
                }
            }
            let last = &components[components.len() - 1].model;
            return last.corrupt(z, seeds::mix(seed, u64::MAX));
        }
        z.iter()
            .enumerate()
            .map(|(i, zi)| {
                let mut rng = seeds::rng(seeds::mix(seed, i as u64));
                self.sample_one(i, zi, &mut rng)
            })
            .collect()
    }

    fn sample_one<R: Rng + ?Sized>(&self, i: usize, z: &Value, rng: &mut R) -> Result<Value> {
        match self {
            NoiseModel::Identity => Ok(z.clone()),
            NoiseModel::NSubstitution { delta, alphabet } => {
                let alpha: Vec<char> = alphabet.chars().collect();
                let out: String = z
                    .chars()?
                    .into_iter()
                    .enumerate()
                    .map(|(j, c)| {
                        if rng.random::<f64>() < delta.at(j) {
                            let choices: Vec<char> = alpha.iter().copied().filter(|&a| a != c).collect();
                            choices[rng.random_range(0..choices.len())]
                        } else {
                            c
                        }
                    })
                    .collect();
                Ok(Value::Str(out))
            }
            NoiseModel::OneDelete { delta } => {
                let mut z = z.chars()?;
                if !z.is_empty() && rng.random::<f64>() < delta.at(i) {
                    let k = rng.random_range(0..z.len());
                    z.remove(k);
                }
                Ok(Value::Str(z.into_iter().collect()))
            }
            NoiseModel::FirstCharDelete => Ok(Value::Str(z.chars()?.into_iter().skip(1).collect())),
            NoiseModel::Mixture { .. } => unreachable!("mixtures are handled per vector"),
        }
    }

    /// The full support of `ρ_N(· | z⃗)` with probabilities, sorted by
    /// outcome. Errors when it has more than `cap` outcomes.
    pub fn exhaustive_support<S: Scalar>(&self, z: &[Value], cap: usize) -> Result<Vec<(Vec<Value>, S)>> {
        let too_big = || Error::CapExceeded {
            what: "noise support".into(),
            cap: cap as u128,
        };
        let mut merged: BTreeMap<Vec<Value>, S> = BTreeMap::new();
        if let NoiseModel::Mixture { components } = self {
            for c in components.iter().filter(|c| c.prob > 0.0) {
                for (y, p) in c.model.exhaustive_support::<S>(z, cap)? {
                    let e = merged.entry(y).or_insert_with(S::zero);
                    *e = *e + S::of(c.prob) * p;
                    if merged.len() > cap {
                        return Err(too_big());
                    }
                }
            }
            return Ok(merged.into_iter().collect());
        }
        let per: Vec<Vec<(Value, S)>> = z
            .iter()
            .enumerate()
            .map(|(i, zi)| self.support_one::<S>(i, zi, cap))
            .collect::<Result<_>>()?;
        let mut size: usize = 1;
        for p in &per {
            size = size.checked_mul(p.len()).filter(|&s| s <= cap).ok_or_else(too_big)?;
        }
        let mut acc: Vec<(Vec<Value>, S)> = vec![(Vec::new(), S::one())];
        for opts in &per {
            let mut next = Vec::with_capacity(acc.len() * opts.len());
            for (prefix, p) in &acc {
                for (v, q) in opts {
                    let mut y = prefix.clone();
                    y.push(v.clone());
                    next.push((y, *p * *q));
                }
            }
            acc = next;
        }
        for (y, p) in acc {
            let e = merged.entry(y).or_insert_with(S::zero);
            *e = *e + p;
        }
        Ok(merged.into_iter().collect())
    }

    fn support_one<S: Scalar>(&self, i: usize, z: &Value, cap: usize) -> Result<Vec<(Value, S)>> {
        let mut out: BTreeMap<Value, f64> = BTreeMap::new();
        match self {
            NoiseModel::Identity => {
                out.insert(z.clone(), 1.0);
            }
            NoiseModel::NSubstitution { delta, alphabet } => {
                let z = z.chars()?;
                let mut acc: Vec<(String, f64)> = vec![(String::new(), 1.0)];
                for (j, &c) in z.iter().enumerate() {
                    let d = delta.at(j);
                    let subs: Vec<char> = alphabet.chars().filter(|&a| a != c).collect();
                    let mut next = Vec::new();
                    for (prefix, p) in &acc {
                        if d < 1.0 {
                            next.push((format!("{prefix}{c}"), p * (1.0 - d)));
                        }
                        if d > 0.0 {
                            for &a in &subs {
                                next.push((format!("{prefix}{a}"), p * d / subs.len() as f64));
                            }
                        }
                    }
                    if next.len() > cap {
                        return Err(Error::CapExceeded {
                            what: "noise support".into(),
                            cap: cap as u128,
                        });
                    }
                    acc = next;
                }
                for (s, p) in acc {
                    *out.entry(Value::Str(s)).or_insert(0.0) += p;
                }
            }
            NoiseModel::OneDelete { delta } => {
                let chars = z.chars()?;
                let d = if chars.is_empty() { 0.0 } else { delta.at(i) };
                if d < 1.0 {
                    out.insert(z.clone(), 1.0 - d);
                }
                if d > 0.0 {
                    for k in 0..chars.len() {
                        let mut y = chars.clone();
                        y.remove(k);
                        *out.entry(Value::Str(y.into_iter().collect())).or_insert(0.0) += d / chars.len() as f64;
                    }
                }
            }
            NoiseModel::FirstCharDelete => {
                out.insert(Value::Str(z.chars()?.into_iter().skip(1).collect()), 1.0);
            }
            NoiseModel::Mixture { .. } => unreachable!("mixtures are handled per vector"),
        }
        Ok(out.into_iter().map(|(v, p)| (v, S::of(p))).collect())
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Identity => f.write_str("identity"),
            NoiseModel::NSubstitution { delta, alphabet } => write!(f, "n_substitution({delta}, {alphabet})"),
            NoiseModel::OneDelete { delta } => write!(f, "one_delete({delta})"),
            NoiseModel::FirstCharDelete => f.write_str("first_char_delete"),
            NoiseModel::Mixture { components } => {
                let parts: Vec<String> = components.iter().map(|c| format!("{}:{}", c.prob, c.model)).collect();
                write!(f, "mixture[{}]", parts.join(", "))
            }
        }
    }
}

/// Text form: `identity`, `first_char_delete`, `one_delete:0.1`,
/// `n_sub:0.1` (alphabet a-z), `n_sub:0.1:abc`, or inline JSON.
impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let model = if s.starts_with('{') {
            serde_json::from_str(s).map_err(|e| Error::Config(format!("noise `{s}`: {e}")))?
        } else {
            let mut parts = s.splitn(3, ':');
            let name = parts.next().unwrap_or_default();
            let delta = parts.next();
            let rest = parts.next();
            let delta = || -> Result<f64> {
                let a = delta.ok_or_else(|| Error::Config(format!("noise `{name}` needs `:delta`")))?;
                a.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad delta `{a}` in noise `{s}`")))
            };
            match (name, rest) {
                ("identity", None) if s == name => NoiseModel::Identity,
                ("first_char_delete", None) if s == name => NoiseModel::FirstCharDelete,
                ("one_delete", None) => NoiseModel::one_delete(delta()?),
                ("n_sub" | "n_substitution", alphabet) => {
                    NoiseModel::n_substitution(delta()?, alphabet.unwrap_or(&default_alphabet()))
                }
                _ => return Err(Error::Config(format!("unknown noise `{s}`"))),
            }
        };
        model.validate()?;
        Ok(model)
    }
}

// |Σ \ {c}|
fn others(alphabet: &str, c: char) -> usize {
    alphabet.chars().filter(|&a| a != c).count()
}

/// Whether deleting `z[k]` gives `y`.
pub(crate) fn deleted_eq(z: &[char], k: usize, y: &[char]) -> bool {
    z.len() == y.len() + 1 && z[..k] == y[..k] && z[k + 1..] == y[k..]
}
