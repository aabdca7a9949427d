//! Exact expected reward: the posterior mass of an output class.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::prior::Prior;
use crate::scalar::ln_sum_exp;
use crate::value::{InputEnv, Value};

/// `E(c⃗ | x⃗, y⃗) = ρ_p(G_{x⃗,c⃗}) ρ_N(y⃗ | c⃗) / ρ(y⃗ | x⃗)` for every class
/// `c⃗`, computed in log space by enumerating the prior.
pub fn expected_rewards(
    prior: &Prior<f64>,
    noise: &NoiseModel,
    xs: &[InputEnv],
    ys: &[Value],
) -> Result<BTreeMap<Vec<Value>, f64>> {
    let masses = prior.class_masses(xs)?;
    let mut joint = Vec::with_capacity(masses.len());
    for (c, m) in masses {
        let ln = m.ln() + noise.ln_pmf::<f64>(ys, &c)?;
        joint.push((c, ln));
    }
    let norm = ln_sum_exp(joint.iter().map(|(_, l)| *l));
    if norm == f64::NEG_INFINITY {
        return Err(Error::ZeroMass);
    }
    Ok(joint.into_iter().map(|(c, l)| (c, (l - norm).exp())).collect())
}

/// [`expected_rewards`] at one class; 0 when no program produces `c⃗`.
pub fn expected_reward(
    prior: &Prior<f64>,
    noise: &NoiseModel,
    xs: &[InputEnv],
    ys: &[Value],
    c: &[Value],
) -> Result<f64> {
    Ok(expected_rewards(prior, noise, xs, ys)?.get(c).copied().unwrap_or(0.0))
}
