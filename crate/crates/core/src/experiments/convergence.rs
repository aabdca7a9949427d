//! Monte-Carlo estimates of `Pr[p_s ≈ p_h]` across dataset sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grammar::{CostModel, Grammar};
use crate::prior::Prior;
use crate::seeds;
use crate::synth::{synthesize, SynthesisProblem};

use super::config::ExperimentConfig;
use super::dataset::{generate_with, Hidden};
use super::equivalence::EquivalenceChecker;
use super::stats::wilson;

/// Error messages kept per report.
const KEPT_ERRORS: usize = 8;

/// One grid point. `trials` counts completed trials only; trials aborted
/// by an error are in `errors`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl ConvergenceRow {
    pub fn new(n: usize, successes: u64, trials: u64, errors: u64) -> Self {
        let (ci_lo, ci_hi) = wilson(successes, trials);
        ConvergenceRow {
            n,
            trials,
            successes,
            errors,
            p_hat: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci_lo,
            ci_hi,
        }
    }
}

/// The curve for one fixed hidden program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramCurve {
    pub hidden: String,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub name: String,
    pub grammar: String,
    pub depth: usize,
    pub loss: String,
    pub noise: String,
    pub input_source: String,
    pub seed: u64,
    pub trials: u64,
    /// `false` when equivalence was decided on a probe sample.
    pub exhaustive_equivalence: bool,
    /// `prior` or `worst_case`.
    pub aggregate: String,
    pub error_samples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub meta: ReportMeta,
    pub rows: Vec<ConvergenceRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_program: Vec<ProgramCurve>,
}

enum Outcome {
    Success,
    Failure,
    Error(String),
}

struct Harness<'a> {
    grammar: &'a Grammar,
    config: &'a ExperimentConfig,
    costs: CostModel<f64>,
    checker: EquivalenceChecker,
}

impl Harness<'_> {
    fn trial(&self, hidden: Hidden<'_>, n: usize, seed: u64) -> Outcome {
        match self.try_trial(hidden, n, seed) {
            Ok(true) => Outcome::Success,
            Ok(false) => Outcome::Failure,
            Err(e) => Outcome::Error(e.to_string()),
        }
    }

    /// A trial succeeds when the synthesized program is equivalent to
    /// `p_h` and its objective is finite.
    fn try_trial(&self, hidden: Hidden<'_>, n: usize, seed: u64) -> Result<bool> {
        let c = self.config;
        let data = generate_with(self.grammar, hidden, &c.input_source, &c.noise, n, seed)?;
        let problem = SynthesisProblem {
            grammar: self.grammar.clone(),
            depth: c.depth,
            loss: c.loss.clone(),
            costs: self.costs.clone(),
            inputs: data.inputs,
            outputs: data.outputs,
        };
        let result = synthesize(&problem)?;
        if result.all_infinite {
            return Ok(false);
        }
        self.checker.equivalent(self.grammar, &result.program, &data.hidden)
    }

    fn row(&self, hidden: Hidden<'_>, n: usize, path: &[u64], errors: &mut Vec<String>) -> ConvergenceRow {
        let outcomes: Vec<Outcome> = (0..self.config.trials)
            .into_par_iter()
            .map(|t| {
                let mut key = path.to_vec();
                key.extend([n as u64, t]);
                self.trial(hidden, n, seeds::mix_all(self.config.seed, &key))
            })
            .collect();
        let (mut ok, mut done, mut failed) = (0, 0, 0);
        for o in outcomes {
            match o {
                Outcome::Success => {
                    ok += 1;
                    done += 1;
                }
                Outcome::Failure => done += 1,
                Outcome::Error(m) => {
                    failed += 1;
                    if errors.len() < KEPT_ERRORS {
                        errors.push(format!("n={n}: {m}"));
                    }
                }
            }
        }
        ConvergenceRow::new(n, ok, done, failed)
    }
}

/// Runs the sweep described by `config` on `jobs` threads (the config's
/// `jobs`, else all cores). The result does not depend on the thread
/// count: trial `t` at size `n` is seeded with `mix_all(seed, [n, t])`,
/// or `mix_all(seed, [k, n, t])` for the `k`-th fixed hidden program.
pub fn estimate_convergence(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ConvergenceReport> {
    config.validate()?;
    let grammar = config.load_grammar()?;
    let costs = config.cost_model(&grammar)?;
    let prior = Prior::<f64>::new(&grammar, config.depth)?;
    let hidden = match &config.hidden {
        Some(h) => Some(h.parse(&grammar)?),
        None => None,
    };
    if let Some(ps) = &hidden {
        for p in ps {
            prior.rho_p(p)?;
        }
    }
    let sampler = prior.sampler()?;
    let harness = Harness {
        grammar: &grammar,
        config,
        costs,
        checker: config.checker(),
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs.or(config.jobs) {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let mut errors = Vec::new();
    let (rows, per_program, aggregate) = pool.install(|| match &hidden {
        None => {
            let rows = config
                .n_grid
                .iter()
                .map(|&n| harness.row(Hidden::Prior(&sampler), n, &[], &mut errors))
                .collect();
            (rows, Vec::new(), "prior")
        }
        Some(programs) => {
            let curves: Vec<ProgramCurve> = programs
                .iter()
                .enumerate()
                .map(|(k, p)| ProgramCurve {
                    hidden: p.display(&grammar).to_string(),
                    rows: config
                        .n_grid
                        .iter()
                        .map(|&n| harness.row(Hidden::Fixed(p), n, &[k as u64], &mut errors))
                        .collect(),
                })
                .collect();
            (worst_case(&curves, config.n_grid.len()), curves, "worst_case")
        }
    });

    Ok(ConvergenceReport {
        meta: ReportMeta {
            name: config.name.clone(),
            grammar: config.grammar.display().to_string(),
            depth: config.depth,
            loss: config.loss.to_string(),
            noise: config.noise.to_string(),
            input_source: serde_json::to_string(&config.input_source)?,
            seed: config.seed,
            trials: config.trials,
            exhaustive_equivalence: harness.checker.is_exhaustive(),
            aggregate: aggregate.into(),
            error_samples: errors,
        },
        rows,
        per_program,
    })
}

/// Pointwise the row with the smallest `p̂`; the earliest curve wins ties.
fn worst_case(curves: &[ProgramCurve], len: usize) -> Vec<ConvergenceRow> {
    (0..len)
        .filter_map(|i| {
            curves
                .iter()
                .map(|c| &c.rows[i])
                .fold(None::<&ConvergenceRow>, |best, r| match best {
                    Some(b) if b.p_hat <= r.p_hat => Some(b),
                    _ => Some(r),
                })
                .cloned()
        })
        .collect()
}

/// The row of a fixed hidden program's curve at size `n`.
pub fn curve_row<'a>(report: &'a ConvergenceReport, hidden: &str, n: usize) -> Option<&'a ConvergenceRow> {
    report
        .per_program
        .iter()
        .find(|c| c.hidden == hidden)?
        .rows
        .iter()
        .find(|r| r.n == n)
}

/// Program texts of a report's fixed hidden programs, in config order.
pub fn hidden_programs(report: &ConvergenceReport) -> Vec<&str> {
    report.per_program.iter().map(|c| c.hidden.as_str()).collect()
}
