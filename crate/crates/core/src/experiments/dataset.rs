//! The generative process: hidden program, inputs, clean and noisy outputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::noise::NoiseModel;
use crate::prior::{Prior, ProgramSampler};
use crate::program::Program;
use crate::seeds;
use crate::value::{InputEnv, Value};

use super::input::InputSource;

/// `(p_h, x⃗, z⃗, y⃗)` with `z⃗ = p_h[x⃗]` and `y⃗ ~ ρ_N(· | z⃗)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub hidden: Program,
    pub inputs: Vec<InputEnv>,
    pub clean: Vec<Value>,
    pub outputs: Vec<Value>,
}

/// Where the hidden program comes from.
#[derive(Clone, Copy, Debug)]
pub enum Hidden<'a> {
    Prior(&'a ProgramSampler),
    Fixed(&'a Program),
}

/// Draws a dataset of size `n`. The hidden program, the inputs and the
/// noise use independent streams `mix(seed, 0)`, `mix(seed, 1)` and
/// `mix(seed, 2)`, so a fixed hidden program sees the same inputs and
/// noise as a sampled one would.
pub fn generate_with(
    g: &Grammar,
    hidden: Hidden<'_>,
    source: &InputSource,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("dataset size must be at least 1".into()));
    }
    let hidden = match hidden {
        Hidden::Prior(s) => s.sample(&mut seeds::rng(seeds::mix(seed, 0))).clone(),
        Hidden::Fixed(p) => p.clone(),
    };
    let inputs = source.sample(n, seeds::mix(seed, 1));
    let clean = hidden.evaluate_vec(g, &inputs)?;
    let outputs = noise.corrupt(&clean, seeds::mix(seed, 2))?;
    Ok(Dataset {
        hidden,
        inputs,
        clean,
        outputs,
    })
}

/// [`generate_with`] drawing `p_h ~ ρ_p`.
pub fn generate_dataset(
    prior: &Prior<f64>,
    source: &InputSource,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    let sampler = prior.sampler()?;
    generate_with(prior.grammar(), Hidden::Prior(&sampler), source, noise, n, seed)
}

/// On-disk dataset. `hidden` and `clean` are informational and ignored by
/// synthesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFile {
    pub inputs: Vec<InputEnv>,
    pub outputs: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean: Option<Vec<Value>>,
}

impl DataFile {
    pub fn from_dataset(g: &Grammar, d: &Dataset) -> Self {
        DataFile {
            inputs: d.inputs.clone(),
            outputs: d.outputs.clone(),
            hidden: Some(d.hidden.display(g).to_string()),
            clean: Some(d.clean.clone()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: DataFile = serde_json::from_str(&text)?;
        if file.inputs.len() != file.outputs.len() {
            return Err(Error::LengthMismatch {
                left: file.inputs.len(),
                right: file.outputs.len(),
            });
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AB: &str = r#"{
        "nonterminals": ["s", "k"],
        "start": "s",
        "terminals": [
            {"var": "x", "lhs": ["s"]},
            {"const": "a", "lhs": ["k"]},
            {"const": "b", "lhs": ["k"]}
        ],
        "productions": [{"lhs": "s", "fn": "append", "rhs": ["k", "x"]}]
    }"#;

    #[test]
    fn first_char_delete_undoes_the_prefix() {
        let g = Grammar::from_json(AB).unwrap();
        let p_a = Program::parse(&g, r#"(append "a" x)"#).unwrap();
        let src = InputSource::StrRandom {
            var: "x".into(),
            alphabet: "ab".into(),
            min_len: 0,
            max_len: 3,
        };
        let d = generate_with(&g, Hidden::Fixed(&p_a), &src, &NoiseModel::FirstCharDelete, 20, 4).unwrap();
        let xs: Vec<Value> = d.inputs.iter().map(|e| e["x"].clone()).collect();
        assert_eq!(d.outputs, xs);
        assert!(d.clean.iter().all(|z| z.as_str().unwrap().starts_with('a')));
    }

    #[test]
    fn identity_noise_and_determinism() {
        let g = Grammar::from_json(AB).unwrap();
        let prior = Prior::<f64>::new(&g, 1).unwrap();
        let src = InputSource::StrRandom {
            var: "x".into(),
            alphabet: "xyz".into(),
            min_len: 1,
            max_len: 2,
        };
        let a = generate_dataset(&prior, &src, &NoiseModel::Identity, 5, 11).unwrap();
        assert_eq!(a.outputs, a.clean);
        assert_eq!(a, generate_dataset(&prior, &src, &NoiseModel::Identity, 5, 11).unwrap());
        assert!(generate_dataset(&prior, &src, &NoiseModel::Identity, 0, 11).is_err());
    }
}
