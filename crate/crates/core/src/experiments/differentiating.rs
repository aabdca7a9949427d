//! Empirical checks of the two "differentiating" conditions.

use rayon::prelude::*;

use crate::distance::DistanceFn;
use crate::error::Result;
use crate::fta::Fta;
use crate::grammar::Grammar;
use crate::loss::LossFn;
use crate::noise::NoiseModel;
use crate::prior::ENUMERATION_CAP;
use crate::program::{enumerate_programs_capped, Program};
use crate::seeds;
use crate::value::{InputEnv, Value};

use super::equivalence::EquivalenceChecker;
use super::input::InputSource;
use super::stats::Estimate;

/// Estimates `Pr_{x⃗ ~ ρ_i^n}[∀p ≉ p_h. d(p[x⃗], p_h[x⃗]) ≥ ε]`.
///
/// Equivalence to `p_h` is decided by `domain`, which should cover the
/// whole input space rather than just the source's support; otherwise
/// programs that only differ off-support count as equivalent. Programs
/// that fail to evaluate on `x⃗` have no output there and are skipped.
/// Trial `t` samples its inputs with seed `mix(seed, t)`.
#[allow(clippy::too_many_arguments)]
pub fn check_input_differentiating(
    g: &Grammar,
    d: usize,
    source: &InputSource,
    domain: &EquivalenceChecker,
    distance: &DistanceFn,
    hidden: &Program,
    n: usize,
    eps: u64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    distance.validate()?;
    let target = domain.signature(g, hidden)?;
    let mut rivals = Vec::new();
    for p in enumerate_programs_capped(g, d, ENUMERATION_CAP)? {
        if domain.signature(g, &p)? != target {
            rivals.push(p);
        }
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let xs = source.sample(n, seeds::mix(seed, t));
            let zh = hidden.evaluate_vec(g, &xs)?;
            for p in &rivals {
                let z = match p.evaluate_vec(g, &xs) {
                    Ok(z) => z,
                    Err(e) if e.is_domain_failure() => continue,
                    Err(e) => return Err(e),
                };
                if distance.apply(&z, &zh)? < eps {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(Estimate::new(hits.iter().filter(|&&h| h).count() as u64, trials))
}

/// Estimates `Pr_{y⃗ ~ ρ_N(·|z⃗_h)}[∀z⃗ ∈ G[x⃗]. L(z⃗,y⃗) ≤ L(z⃗_h,y⃗) + γ ⟹ d(z⃗,z⃗_h) < ε]`.
///
/// Candidates are the outputs of programs of height ≤ `d`, the accepting
/// values of the automaton over `x⃗`. A candidate is separated only when
/// `L(z⃗,y⃗) > L(z⃗_h,y⃗) + γ` holds in the extended reals, so two
/// infinite losses are never separated. Trial `t` corrupts `z⃗_h` with
/// seed `mix(seed, t)`.
#[allow(clippy::too_many_arguments)]
pub fn check_noise_differentiating(
    g: &Grammar,
    d: usize,
    xs: &[InputEnv],
    noise: &NoiseModel,
    loss: &LossFn,
    distance: &DistanceFn,
    zh: &[Value],
    gamma: f64,
    eps: u64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    noise.validate()?;
    loss.validate()?;
    distance.validate()?;
    let fta = Fta::build(g, xs, d)?;
    // only candidates at distance ≥ ε can violate the implication
    let mut far: Vec<&[Value]> = Vec::new();
    for &q in fta.accepting() {
        let z = &fta.state(q).values;
        if distance.apply(z, zh)? >= eps {
            far.push(z);
        }
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let y = noise.corrupt(zh, seeds::mix(seed, t))?;
            let base: f64 = loss.eval(zh, &y)?;
            for z in &far {
                let l: f64 = loss.eval(z, &y)?;
                if !(l > base + gamma) {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(Estimate::new(hits.iter().filter(|&&h| h).count() as u64, trials))
}
