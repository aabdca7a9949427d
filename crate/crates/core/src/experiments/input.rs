//! Input sources: i.i.d. samplers of input environments.
//!
//! ```json
//! {"kind": "int_uniform", "var": "x", "lo": 0, "hi": 9}
//! {"kind": "str_random", "var": "x", "alphabet": "abc", "min_len": 1, "max_len": 4}
//! {"kind": "bool_bernoulli", "var": "b", "p": 1.0}
//! {"kind": "product", "sources": [...]}
//! {"kind": "categorical", "envs": [{"x": 1}, {"x": 2}], "probs": [0.5, 0.5]}
//! ```
//!
//! `str_random` picks a length uniformly from `min_len..=max_len`, then
//! each character uniformly. `probs` defaults to uniform.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::value::{InputEnv, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSource {
    IntUniform {
        var: String,
        lo: i64,
        hi: i64,
    },
    StrRandom {
        var: String,
        alphabet: String,
        min_len: usize,
        max_len: usize,
    },
    BoolBernoulli {
        var: String,
        p: f64,
    },
    Product {
        sources: Vec<InputSource>,
    },
    Categorical {
        envs: Vec<InputEnv>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probs: Option<Vec<f64>>,
    },
}

impl InputSource {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self {
            InputSource::IntUniform { lo, hi, .. } if lo > hi => bad(format!("int_uniform: lo {lo} > hi {hi}")),
            InputSource::StrRandom {
                alphabet,
                min_len,
                max_len,
                ..
            } => {
                if min_len > max_len {
                    return bad(format!("str_random: min_len {min_len} > max_len {max_len}"));
                }
                if alphabet.is_empty() && *max_len > 0 {
                    return bad("str_random: empty alphabet".into());
                }
                Ok(())
            }
            InputSource::BoolBernoulli { p, .. } if !(0.0..=1.0).contains(p) => {
                bad(format!("bool_bernoulli: p {p} outside [0, 1]"))
            }
            InputSource::Product { sources } => {
                let mut seen = Vec::new();
                for s in sources {
                    s.validate()?;
                    for v in s.variables() {
                        if seen.contains(&v) {
                            return bad(format!("product binds `{v}` twice"));
                        }
                        seen.push(v);
                    }
                }
                Ok(())
            }
            InputSource::Categorical { envs, probs } => {
                if envs.is_empty() {
                    return bad("categorical: no environments".into());
                }
                if let Some(p) = probs {
                    if p.len() != envs.len() || p.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
                        return bad("categorical: probs must be nonnegative, one per environment".into());
                    }
                    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                        return bad("categorical: probs must sum to 1".into());
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Variables bound by every sample.
    pub fn variables(&self) -> Vec<String> {
        match self {
            InputSource::IntUniform { var, .. }
            | InputSource::StrRandom { var, .. }
            | InputSource::BoolBernoulli { var, .. } => vec![var.clone()],
            InputSource::Product { sources } => sources.iter().flat_map(|s| s.variables()).collect(),
            InputSource::Categorical { envs, .. } => envs[0].keys().cloned().collect(),
        }
    }

    pub fn sample_env<R: Rng + ?Sized>(&self, rng: &mut R) -> InputEnv {
        let mut env = InputEnv::new();
        self.sample_into(rng, &mut env);
        env
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, env: &mut InputEnv) {
        match self {
            InputSource::IntUniform { var, lo, hi } => {
                env.insert(var.clone(), Value::Int(rng.random_range(*lo..=*hi)));
            }
            InputSource::StrRandom {
                var,
                alphabet,
                min_len,
                max_len,
            } => {
                let chars: Vec<char> = alphabet.chars().collect();
                let len = rng.random_range(*min_len..=*max_len);
                let s: String = (0..len).map(|_| chars[rng.random_range(0..chars.len())]).collect();
                env.insert(var.clone(), Value::Str(s));
            }
            InputSource::BoolBernoulli { var, p } => {
                env.insert(var.clone(), Value::Bool(rng.random::<f64>() < *p));
            }
            InputSource::Product { sources } => {
                for s in sources {
                    s.sample_into(rng, env);
                }
            }
            InputSource::Categorical { envs, probs } => {
                let i = match probs {
                    None => rng.random_range(0..envs.len()),
                    Some(p) => {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        p.iter()
                            .position(|q| {
                                acc += q;
                                u < acc
                            })
                            .unwrap_or(envs.len() - 1)
                    }
                };
                env.extend(envs[i].clone());
            }
        }
    }

    /// `n` i.i.d. samples; position `i` uses its own generator seeded with
    /// `mix(seed, i)`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<InputEnv> {
        (0..n)
            .map(|i| self.sample_env(&mut seeds::rng(seeds::mix(seed, i as u64))))
            .collect()
    }

    /// The finite support with probabilities, if it has at most `cap`
    /// points.
    pub fn finite_support(&self, cap: usize) -> Option<Vec<(InputEnv, f64)>> {
        let points: Vec<(InputEnv, f64)> = match self {
            InputSource::IntUniform { var, lo, hi } => {
                let n = (*hi as i128 - *lo as i128 + 1) as usize;
                if n > cap {
                    return None;
                }
                (*lo..=*hi)
                    .map(|v| (single(var, Value::Int(v)), 1.0 / n as f64))
                    .collect()
            }
            InputSource::StrRandom {
                var,
                alphabet,
                min_len,
                max_len,
            } => {
                let chars: Vec<char> = alphabet.chars().collect();
                let lens = (max_len - min_len + 1) as f64;
                let mut out = Vec::new();
                for len in *min_len..=*max_len {
                    let count = (chars.len() as u128).checked_pow(len as u32)?;
                    if out.len() as u128 + count > cap as u128 {
                        return None;
                    }
                    let p = 1.0 / lens / count as f64;
                    let mut words = vec![String::new()];
                    for _ in 0..len {
                        words = words
                            .iter()
                            .flat_map(|w| chars.iter().map(move |c| format!("{w}{c}")))
                            .collect();
                    }
                    out.extend(words.into_iter().map(|w| (single(var, Value::Str(w)), p)));
                }
                out
            }
            InputSource::BoolBernoulli { var, p } => [(false, 1.0 - p), (true, *p)]
                .into_iter()
                .filter(|(_, q)| *q > 0.0)
                .map(|(b, q)| (single(var, Value::Bool(b)), q))
                .collect(),
            InputSource::Product { sources } => {
                let mut acc: Vec<(InputEnv, f64)> = vec![(InputEnv::new(), 1.0)];
                for s in sources {
                    let pts = s.finite_support(cap)?;
                    if acc.len() * pts.len() > cap {
                        return None;
                    }
                    acc = acc
                        .iter()
                        .flat_map(|(e, p)| {
                            pts.iter().map(move |(f, q)| {
                                let mut env = e.clone();
                                env.extend(f.clone());
                                (env, p * q)
                            })
                        })
                        .collect();
                }
                acc
            }
            InputSource::Categorical { envs, probs } => {
                let mut merged: BTreeMap<InputEnv, f64> = BTreeMap::new();
                for (i, e) in envs.iter().enumerate() {
                    let p = probs.as_ref().map_or(1.0 / envs.len() as f64, |p| p[i]);
                    if p > 0.0 {
                        *merged.entry(e.clone()).or_insert(0.0) += p;
                    }
                }
                merged.into_iter().collect()
            }
        };
        (points.len() <= cap).then_some(points)
    }
}

fn single(var: &str, v: Value) -> InputEnv {
    let mut env = InputEnv::new();
    env.insert(var.to_string(), v);
    env
}
