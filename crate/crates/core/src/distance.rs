//! Distances between equal-length output vectors.
//!
//! `dl_metric` is the restricted Damerau-Levenshtein distance (optimal
//! string alignment): insertions, deletions, substitutions and swaps of
//! adjacent characters, where no substring is edited twice.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::Value;

fn same_len(a: &[Value], b: &[Value]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Number of positions where the vectors disagree.
pub fn counting_distance(a: &[Value], b: &[Value]) -> Result<u64> {
    same_len(a, b)?;
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as u64)
}

/// Number of positions holding strings of different lengths.
pub fn length_distance(a: &[Value], b: &[Value]) -> Result<u64> {
    same_len(a, b)?;
    let mut n = 0;
    for (x, y) in a.iter().zip(b) {
        if x.as_str()?.chars().count() != y.as_str()?.chars().count() {
            n += 1;
        }
    }
    Ok(n)
}

/// Restricted Damerau-Levenshtein distance over unicode scalars.
pub fn dl_metric(a: &str, b: &str) -> u64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    dl_chars(&a, &b)
}

pub(crate) fn dl_chars(a: &[char], b: &[char]) -> u64 {
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut t = vec![0u64; (n + 1) * width];
    for i in 0..=n {
        t[i * width] = i as u64;
    }
    for j in 0..=m {
        t[j] = j as u64;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = u64::from(a[i - 1] != b[j - 1]);
            let mut v = (t[(i - 1) * width + j] + 1)
                .min(t[i * width + j - 1] + 1)
                .min(t[(i - 1) * width + j - 1] + sub);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(t[(i - 2) * width + j - 2] + 1);
            }
            t[i * width + j] = v;
        }
    }
    t[n * width + m]
}

/// Number of positions whose strings are at DL distance ≥ `k`.
pub fn dl_k_distance(k: u64, a: &[Value], b: &[Value]) -> Result<u64> {
    same_len(a, b)?;
    let mut n = 0;
    for (x, y) in a.iter().zip(b) {
        if dl_metric(x.as_str()?, y.as_str()?) >= k {
            n += 1;
        }
    }
    Ok(n)
}

/// Per-example metric summed by [`DistanceFn::PerExampleSum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleMetric {
    /// 0 on equal values, 1 otherwise.
    Discrete,
    /// 0 on equal string lengths, 1 otherwise.
    Length,
    /// DL distance.
    Dl,
}

impl ExampleMetric {
    pub fn apply(&self, a: &Value, b: &Value) -> Result<u64> {
        Ok(match self {
            ExampleMetric::Discrete => u64::from(a != b),
            ExampleMetric::Length => {
                u64::from(a.as_str()?.chars().count() != b.as_str()?.chars().count())
            }
            ExampleMetric::Dl => dl_metric(a.as_str()?, b.as_str()?),
        })
    }
}

/// A vector distance selectable by name in configs.
///
/// JSON: `{"kind": "counting"}`, `{"kind": "length"}`,
/// `{"kind": "dl_k", "k": 2}`, `{"kind": "per_example_sum", "metric": "dl"}`.
/// Text: `counting`, `length`, `dl_k:2`, `sum:dl`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistanceFn {
    Counting,
    Length,
    DlK { k: u64 },
    PerExampleSum { metric: ExampleMetric },
}

impl DistanceFn {
    pub fn apply(&self, a: &[Value], b: &[Value]) -> Result<u64> {
        match self {
            DistanceFn::Counting => counting_distance(a, b),
            DistanceFn::Length => length_distance(a, b),
            DistanceFn::DlK { k } => dl_k_distance(*k, a, b),
            DistanceFn::PerExampleSum { metric } => {
                same_len(a, b)?;
                a.iter().zip(b).map(|(x, y)| metric.apply(x, y)).sum()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistanceFn::DlK { k: 0 } => Err(Error::Config("dl_k needs k >= 1".into())),
            _ => Ok(()),
        }
    }
}

impl FromStr for DistanceFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = match s {
            "counting" => DistanceFn::Counting,
            "length" => DistanceFn::Length,
            "sum:discrete" => DistanceFn::PerExampleSum { metric: ExampleMetric::Discrete },
            "sum:length" => DistanceFn::PerExampleSum { metric: ExampleMetric::Length },
            "sum:dl" => DistanceFn::PerExampleSum { metric: ExampleMetric::Dl },
            _ => match s.strip_prefix("dl_k:").map(str::parse::<u64>) {
                Some(Ok(k)) => DistanceFn::DlK { k },
                _ => return Err(Error::Config(format!("unknown distance `{s}`"))),
            },
        };
        d.validate()?;
        Ok(d)
    }
}

impl fmt::Display for DistanceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceFn::Counting => f.write_str("counting"),
            DistanceFn::Length => f.write_str("length"),
            DistanceFn::DlK { k } => write!(f, "dl_k:{k}"),
            DistanceFn::PerExampleSum { metric } => {
                let m = match metric {
                    ExampleMetric::Discrete => "discrete",
                    ExampleMetric::Length => "length",
                    ExampleMetric::Dl => "dl",
                };
                write!(f, "sum:{m}")
            }
        }
    }
}
