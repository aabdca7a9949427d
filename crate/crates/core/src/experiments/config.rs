//! JSON experiment configs. Grammar paths are relative to the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceFn;
use crate::error::{Error, Result};
use crate::grammar::{CostModel, Grammar};
use crate::loss::LossFn;
use crate::noise::NoiseModel;
use crate::program::Program;
use crate::value::InputEnv;

use super::equivalence::EquivalenceChecker;
use super::input::InputSource;

/// One program text or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HiddenSpec {
    One(String),
    Many(Vec<String>),
}

impl HiddenSpec {
    pub fn texts(&self) -> Vec<&str> {
        match self {
            HiddenSpec::One(s) => vec![s.as_str()],
            HiddenSpec::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }

    pub fn parse(&self, g: &Grammar) -> Result<Vec<Program>> {
        self.texts().into_iter().map(|t| Program::parse(g, t)).collect()
    }
}

/// A convergence sweep.
///
/// ```json
/// {
///   "name": "nsub",
///   "grammar": "../grammars/strings.json",
///   "depth": 2,
///   "input_source": {"kind": "str_random", "var": "x", "alphabet": "abc", "min_len": 1, "max_len": 4},
///   "noise": {"kind": "n_substitution", "delta": 0.1, "alphabet": "abc"},
///   "loss": {"kind": "n_substitution", "delta": 0.1},
///   "n_grid": [1, 2, 5, 10],
///   "trials": 200,
///   "seed": 7
/// }
/// ```
///
/// Without `hidden`, every trial draws `p_h` from the prior. With a list
/// of programs each gets its own curve and the report's main rows are the
/// pointwise worst case. `equivalence_domain` defaults to `input_source`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub grammar: PathBuf,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, f64>>,
    pub input_source: InputSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence_domain: Option<InputSource>,
    pub noise: NoiseModel,
    pub loss: LossFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<BTreeMap<String, f64>>,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<HiddenSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

/// Input-differentiation check: how often `n` inputs separate `hidden`
/// from every inequivalent program by at least `eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDiffConfig {
    pub grammar: PathBuf,
    pub depth: usize,
    pub input_source: InputSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence_domain: Option<InputSource>,
    pub distance: DistanceFn,
    pub hidden: String,
    pub n: usize,
    pub eps: u64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

/// Noise-differentiation check on a fixed input vector, which is either
/// listed or drawn once from `input_source` with `n` and `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseDiffConfig {
    pub grammar: PathBuf,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<InputEnv>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_source: Option<InputSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub hidden: String,
    pub noise: NoiseModel,
    pub loss: LossFn,
    pub distance: DistanceFn,
    pub gamma: f64,
    pub eps: u64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

pub(crate) fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn resolve(config_path: &Path, grammar: &Path) -> PathBuf {
    if grammar.is_absolute() {
        grammar.to_path_buf()
    } else {
        config_path.parent().unwrap_or(Path::new("")).join(grammar)
    }
}

impl ExperimentConfig {
    /// Reads the config and makes the grammar path absolute-or-relative to
    /// the working directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut c: ExperimentConfig = load_json(path)?;
        c.grammar = resolve(path, &c.grammar);
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::Config("n_grid entries must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        self.input_source.validate()?;
        if let Some(d) = &self.equivalence_domain {
            d.validate()?;
        }
        self.noise.validate()?;
        self.loss.validate()
    }

    pub fn load_grammar(&self) -> Result<Grammar> {
        let mut g = Grammar::load(&self.grammar)?;
        if let Some(w) = &self.weights {
            g.set_weights(w)?;
        }
        Ok(g)
    }

    pub fn cost_model(&self, g: &Grammar) -> Result<CostModel<f64>> {
        match &self.costs {
            Some(map) => CostModel::size_with_overrides(g, map),
            None => Ok(g.default_costs()),
        }
    }

    pub fn checker(&self) -> EquivalenceChecker {
        EquivalenceChecker::for_source(self.equivalence_domain.as_ref().unwrap_or(&self.input_source))
    }
}

impl InputDiffConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut c: InputDiffConfig = load_json(path)?;
        c.grammar = resolve(path, &c.grammar);
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.input_source.validate()?;
        self.distance.validate()
    }
}

impl NoiseDiffConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut c: NoiseDiffConfig = load_json(path)?;
        c.grammar = resolve(path, &c.grammar);
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        match (&self.inputs, &self.input_source, self.n) {
            (Some(xs), None, None) if !xs.is_empty() => {}
            (None, Some(src), Some(n)) if n > 0 => src.validate()?,
            _ => {
                return Err(Error::Config(
                    "give either a non-empty `inputs` list or `input_source` with `n` >= 1".into(),
                ))
            }
        }
        self.noise.validate()?;
        self.loss.validate()?;
        self.distance.validate()
    }

    pub fn input_vector(&self) -> Vec<InputEnv> {
        match (&self.inputs, &self.input_source, self.n) {
            (Some(xs), _, _) => xs.clone(),
            (None, Some(src), Some(n)) => src.sample(n, self.seed),
            _ => Vec::new(),
        }
    }
}
