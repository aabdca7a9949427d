//! The synthesis algorithm and its brute-force reference.
//!
//! Both pick the output class `c⃗` minimizing `L(c⃗, y⃗) − ln π(c⃗)` and then
//! the cheapest program of that class. Objectives within
//! [`TIE_TOLERANCE`](crate::scalar::TIE_TOLERANCE) of the minimum are tied
//! and the smallest output vector wins; among equally cheap programs the
//! smallest in [`Program`]'s order wins.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fta::{Fta, StateId};
use crate::grammar::{CostModel, Grammar};
use crate::loss::LossFn;
use crate::program::{enumerate_programs_capped, Program};
use crate::scalar::{nearly_equal, LogWeight, Scalar};
use crate::value::{InputEnv, Value};

/// Largest program space the oracle enumerates.
pub const ORACLE_CAP: u128 = 1_000_000;

/// Inputs to one synthesis run. The prior is the grammar's weights
/// normalized over programs of height ≤ `depth`.
#[derive(Clone, Debug)]
pub struct SynthesisProblem<S> {
    pub grammar: Grammar,
    pub depth: usize,
    pub loss: LossFn,
    pub costs: CostModel<S>,
    pub inputs: Vec<InputEnv>,
    pub outputs: Vec<Value>,
}

impl<S: Scalar> SynthesisProblem<S> {
    /// Problem with `Size` as the complexity measure, or the grammar
    /// file's cost map when it ships one.
    pub fn new(grammar: &Grammar, depth: usize, loss: LossFn, inputs: Vec<InputEnv>, outputs: Vec<Value>) -> Self {
        SynthesisProblem {
            costs: grammar.default_costs(),
            grammar: grammar.clone(),
            depth,
            loss,
            inputs,
            outputs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.outputs.len() {
            return Err(Error::LengthMismatch {
                left: self.inputs.len(),
                right: self.outputs.len(),
            });
        }
        if self.inputs.is_empty() {
            return Err(Error::Config("the dataset is empty".into()));
        }
        self.loss.validate()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub states: usize,
    pub accepting: usize,
    pub transitions: usize,
    pub pruned: usize,
    #[serde(skip)]
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult<S> {
    pub program: Program,
    /// `L(c⃗, y⃗) − ln π(c⃗)`.
    pub objective: S,
    pub loss: S,
    pub log_pi: S,
    /// `c⃗ = program[x⃗]`.
    pub outputs: Vec<Value>,
    pub cost: S,
    /// Every class had infinite objective; the result is only the
    /// tie-break winner.
    pub all_infinite: bool,
    pub diagnostics: Diagnostics,
}

/// One output class with its score.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassScore<S> {
    pub outputs: Vec<Value>,
    pub loss: S,
    pub log_pi: S,
    pub objective: S,
}

/// Index of the winning class: minimal objective, ties (within tolerance)
/// broken by the smaller output vector. Independent of input order.
pub fn select_best<S: Scalar>(scores: &[ClassScore<S>]) -> Option<usize> {
    let min = scores
        .iter()
        .map(|c| c.objective)
        .fold(S::infinity(), |a, b| if b < a { b } else { a });
    scores
        .iter()
        .enumerate()
        .filter(|(_, c)| c.objective == min || nearly_equal(c.objective, min))
        .min_by(|a, b| a.1.outputs.cmp(&b.1.outputs))
        .map(|(i, _)| i)
}

fn objective<S: Scalar>(loss: S, log_pi: S) -> S {
    // ∞ loss stays ∞ even if log π were -∞
    if loss == S::infinity() {
        S::infinity()
    } else {
        loss - log_pi
    }
}

/// Scores every accepting state of a built automaton.
pub fn score_classes<S: Scalar>(fta: &Fta, loss: &LossFn, outputs: &[Value]) -> Result<Vec<(StateId, ClassScore<S>)>> {
    let table = fta.weights::<LogWeight<S>>();
    fta.pi_all(&table)?
        .into_iter()
        .map(|(q, lp)| {
            let values = &fta.state(q).values;
            let l: S = loss.eval(values, outputs)?;
            Ok((
                q,
                ClassScore {
                    outputs: values.clone(),
                    loss: l,
                    log_pi: lp.ln(),
                    objective: objective(l, lp.ln()),
                },
            ))
        })
        .collect()
}

/// Builds the automaton over `x⃗`, picks the best accepting state and
/// extracts its cheapest program.
pub fn synthesize<S: Scalar>(problem: &SynthesisProblem<S>) -> Result<SynthesisResult<S>> {
    problem.validate()?;
    let started = Instant::now();
    let fta = Fta::build(&problem.grammar, &problem.inputs, problem.depth)?;
    if fta.accepting().is_empty() {
        return Err(Error::EmptyFta);
    }
    let scored = score_classes::<S>(&fta, &problem.loss, &problem.outputs)?;
    let scores: Vec<ClassScore<S>> = scored.iter().map(|(_, c)| c.clone()).collect();
    let best = select_best(&scores).ok_or(Error::EmptyFta)?;
    let (q, score) = scored[best].clone();
    let (program, cost) = fta.extract_min_complexity(q, &problem.costs)?;
    Ok(SynthesisResult {
        program,
        all_infinite: score.objective == S::infinity(),
        objective: score.objective,
        loss: score.loss,
        log_pi: score.log_pi,
        outputs: score.outputs,
        cost,
        diagnostics: Diagnostics {
            states: fta.states().len(),
            accepting: fta.accepting().len(),
            transitions: fta.transitions().len(),
            pruned: fta.pruned(),
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        },
    })
}

/// Brute-force classes: enumerate programs, group by output vector, sum
/// weights in `f64`. Programs whose evaluation fails are dropped.
pub fn oracle_classes(g: &Grammar, d: usize, xs: &[InputEnv]) -> Result<BTreeMap<Vec<Value>, (f64, Vec<Program>)>> {
    fn weight(g: &Grammar, p: &Program) -> f64 {
        match p {
            Program::Leaf(t) => g.terminal(*t).weight,
            Program::Node(pid, kids) => {
                g.production(*pid).weight * kids.iter().map(|k| weight(g, k)).product::<f64>()
            }
        }
    }
    let mut classes: BTreeMap<Vec<Value>, (f64, Vec<Program>)> = BTreeMap::new();
    for p in enumerate_programs_capped(g, d, ORACLE_CAP)? {
        match p.evaluate_vec(g, xs) {
            Ok(out) => {
                let e = classes.entry(out).or_insert((0.0, Vec::new()));
                e.0 += weight(g, &p);
                e.1.push(p);
            }
            Err(e) if e.is_domain_failure() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(classes)
}

/// Reference implementation by exhaustive enumeration (at most
/// [`ORACLE_CAP`] programs).
pub fn oracle_synthesize<S: Scalar>(problem: &SynthesisProblem<S>) -> Result<SynthesisResult<S>> {
    problem.validate()?;
    let started = Instant::now();
    let classes = oracle_classes(&problem.grammar, problem.depth, &problem.inputs)?;
    if classes.is_empty() {
        return Err(Error::EmptyFta);
    }
    let total: f64 = classes.values().map(|(w, _)| *w).sum();
    let scores = classes
        .iter()
        .map(|(out, (w, _))| {
            let l: S = problem.loss.eval(out, &problem.outputs)?;
            let lp = S::of((w / total).ln());
            Ok(ClassScore {
                outputs: out.clone(),
                loss: l,
                log_pi: lp,
                objective: objective(l, lp),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&scores).ok_or(Error::EmptyFta)?;
    let score = scores[best].clone();
    let members = &classes[&score.outputs].1;
    let mut chosen: Option<(S, &Program)> = None;
    for p in members {
        let c = p.complexity(&problem.grammar, &problem.costs)?;
        let better = match &chosen {
            None => true,
            Some((bc, bp)) => c < *bc || (c == *bc && p < *bp),
        };
        if better {
            chosen = Some((c, p));
        }
    }
    let (cost, program) = chosen.expect("classes are non-empty");
    Ok(SynthesisResult {
        program: program.clone(),
        all_infinite: score.objective == S::infinity(),
        objective: score.objective,
        loss: score.loss,
        log_pi: score.log_pi,
        outputs: score.outputs,
        cost,
        diagnostics: Diagnostics {
            states: 0,
            accepting: classes.len(),
            transitions: 0,
            pruned: 0,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::env;

    const ARITH: &str = r#"{
        "nonterminals": ["n", "t"],
        "start": "n",
        "terminals": [
            {"var": "x", "lhs": ["n"]},
            {"const": 2, "lhs": ["t"]},
            {"const": 3, "lhs": ["t"]}
        ],
        "productions": [
            {"lhs": "n", "fn": "+", "rhs": ["n", "t"]},
            {"lhs": "n", "fn": "×", "rhs": ["n", "t"]}
        ]
    }"#;

    fn problem(y: i64, loss: LossFn) -> SynthesisProblem<f64> {
        let g = Grammar::from_json(ARITH).unwrap();
        SynthesisProblem::new(&g, 2, loss, vec![env([("x", 1)])], vec![Value::Int(y)])
    }

    #[test]
    fn exact_classes_and_prior_mass() {
        let r = synthesize(&problem(6, LossFn::ZeroOne)).unwrap();
        assert_eq!(r.outputs, vec![Value::Int(6)]);
        assert_eq!(r.cost, 5.0);
        let r = synthesize(&problem(7, LossFn::ZeroInfty)).unwrap();
        assert_eq!(r.outputs, vec![Value::Int(7)]);
        // 6 has six of the 21 programs: 1 + ln(21/6) beats 0 + ln 21
        let p = problem(7, LossFn::ZeroOne);
        let r = synthesize(&p).unwrap();
        assert_eq!(r.outputs, vec![Value::Int(6)]);
        assert!((r.objective - (1.0 + (21.0f64 / 6.0).ln())).abs() < 1e-12);
        let o = oracle_synthesize(&p).unwrap();
        assert_eq!(o.program, r.program);
        assert!((o.objective - r.objective).abs() < 1e-12);
    }

    #[test]
    fn all_infinite_is_flagged() {
        let r = synthesize(&problem(100, LossFn::ZeroInfty)).unwrap();
        assert!(r.all_infinite);
        assert_eq!(r.objective, f64::INFINITY);
    }

    #[test]
    fn ties_prefer_smaller_outputs() {
        let scores: Vec<ClassScore<f64>> = [(3, 1.0), (1, 1.0 + 1e-12), (2, 0.5 + 1.0)]
            .iter()
            .map(|&(v, o)| ClassScore {
                outputs: vec![Value::Int(v)],
                loss: o,
                log_pi: 0.0,
                objective: o,
            })
            .collect();
        assert_eq!(select_best(&scores), Some(1));
    }

    #[test]
    fn mismatched_dataset_is_rejected() {
        let mut p = problem(6, LossFn::ZeroOne);
        p.outputs.push(Value::Int(1));
        assert!(synthesize(&p).is_err());
    }
}
