//! Loss functions `L(z⃗, y⃗)` over extended nonnegative reals.
//!
//! Config JSON uses a `kind` tag: `zero_one`, `zero_infty`,
//! `n_substitution` (`delta`), `one_delete` (`delta`), `dl`, `ab`,
//! `optimal` (`noise`), `mixture_optimal` (`components`, as in a noise
//! mixture). On the command line the short forms `zero_one`,
//! `zero_infty`, `n_sub:0.1`, `one_delete:0.1`, `dl` and `ab` work too,
//! as does inline JSON.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distance::dl_metric;
use crate::error::{Error, Result};
use crate::noise::{deleted_eq, Component, Delta, NoiseModel};
use crate::scalar::Scalar;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossFn {
    ZeroOne,
    ZeroInfty,
    NSubstitution { delta: Delta },
    OneDelete { delta: Delta },
    Dl,
    Ab,
    Optimal { noise: NoiseModel },
    MixtureOptimal { components: Vec<Component> },
}

fn check_len(z: &[Value], y: &[Value]) -> Result<()> {
    if z.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: z.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Number of positions where the vectors differ.
pub fn zero_one<S: Scalar>(z: &[Value], y: &[Value]) -> Result<S> {
    check_len(z, y)?;
    Ok(S::of(z.iter().zip(y).filter(|(a, b)| a != b).count() as f64))
}

/// 0 when the vectors are equal, ∞ otherwise.
pub fn zero_infty<S: Scalar>(z: &[Value], y: &[Value]) -> Result<S> {
    check_len(z, y)?;
    Ok(if z == y { S::zero() } else { S::infinity() })
}

/// Per string: ∞ on a length change, else `−ln δ_j` for each changed
/// character and `−ln(1 − δ_j)` for each kept one.
pub fn loss_n_substitution<S: Scalar>(delta: &Delta, z: &[Value], y: &[Value]) -> Result<S> {
    check_len(z, y)?;
    let mut total = S::zero();
    for (zi, yi) in z.iter().zip(y) {
        let (zc, yc) = (zi.chars()?, yi.chars()?);
        if zc.len() != yc.len() {
            return Ok(S::infinity());
        }
        let mut ex = S::zero();
        for (j, (a, b)) in zc.iter().zip(&yc).enumerate() {
            let d = delta.at(j);
            let p = if a == b { 1.0 - d } else { d };
            ex = ex + S::of(p).ln();
        }
        total = total + ex;
    }
    Ok(-total)
}

/// Per string `i`: `−ln(1 − δ_i)` when equal, `−ln δ_i` when `y_i` is
/// `z_i` with one character deleted, ∞ otherwise.
pub fn loss_one_delete<S: Scalar>(delta: &Delta, z: &[Value], y: &[Value]) -> Result<S> {
    check_len(z, y)?;
    let mut total = S::zero();
    for (i, (zi, yi)) in z.iter().zip(y).enumerate() {
        let (zc, yc) = (zi.chars()?, yi.chars()?);
        let d = delta.at(i);
        let p = if zc == yc {
            1.0 - d
        } else if (0..zc.len()).any(|k| deleted_eq(&zc, k, &yc)) {
            d
        } else {
            return Ok(S::infinity());
        };
        total = total - S::of(p).ln();
    }
    Ok(total)
}

/// Sum of per-example DL distances.
pub fn loss_dl<S: Scalar>(z: &[Value], y: &[Value]) -> Result<S> {
    check_len(z, y)?;
    let mut total = 0u64;
    for (zi, yi) in z.iter().zip(y) {
        total += dl_metric(zi.as_str()?, yi.as_str()?);
    }
    Ok(S::of(total as f64))
}

/// Per string: 0 when `z_i` starts with `a` or `b` and removing that first
/// character leaves `y_i`, ∞ otherwise.
///
/// For the conditional grammar `append(ite(b, "a", "aa"), x)` this accepts
/// every dataset the first-character-deleting source can produce from
/// either branch, and rejects `y_i = "b"·x_i` against an `a`-prefixed
/// candidate.
pub fn loss_ab<S: Scalar>(z: &[Value], y: &[Value]) -> Result<S> {
    check_len(z, y)?;
    for (zi, yi) in z.iter().zip(y) {
        let zc = zi.chars()?;
        let yc = yi.chars()?;
        let ok = matches!(zc.first(), Some('a' | 'b')) && zc[1..] == yc[..];
        if !ok {
            return Ok(S::infinity());
        }
    }
    Ok(S::zero())
}

/// `−ln ρ_N(y⃗ | z⃗)`, the loss whose argmin maximizes the expected reward.
pub fn optimal_loss<S: Scalar>(noise: &NoiseModel, z: &[Value], y: &[Value]) -> Result<S> {
    Ok(-noise.ln_pmf::<S>(y, z)?)
}

/// `−ln Σ_j w_j ρ_j(y⃗ | z⃗)` for a noise source only known up to a prior
/// over components.
pub fn mixture_optimal_loss<S: Scalar>(components: &[Component], z: &[Value], y: &[Value]) -> Result<S> {
    let m = NoiseModel::Mixture {
        components: components.to_vec(),
    };
    m.validate()?;
    optimal_loss(&m, z, y)
}

impl LossFn {
    pub fn n_substitution(delta: f64) -> Self {
        LossFn::NSubstitution {
            delta: Delta::Const(delta),
        }
    }

    pub fn one_delete(delta: f64) -> Self {
        LossFn::OneDelete {
            delta: Delta::Const(delta),
        }
    }

    pub fn eval<S: Scalar>(&self, z: &[Value], y: &[Value]) -> Result<S> {
        match self {
            LossFn::ZeroOne => zero_one(z, y),
            LossFn::ZeroInfty => zero_infty(z, y),
            LossFn::NSubstitution { delta } => loss_n_substitution(delta, z, y),
            LossFn::OneDelete { delta } => loss_one_delete(delta, z, y),
            LossFn::Dl => loss_dl(z, y),
            LossFn::Ab => loss_ab(z, y),
            LossFn::Optimal { noise } => optimal_loss(noise, z, y),
            LossFn::MixtureOptimal { components } => {
                check_len(z, y)?;
                optimal_loss(
                    &NoiseModel::Mixture {
                        components: components.clone(),
                    },
                    z,
                    y,
                )
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LossFn::NSubstitution { delta } => delta.validate("n_substitution loss", true),
            LossFn::OneDelete { delta } => delta.validate("one_delete loss", true),
            LossFn::Optimal { noise } => noise.validate(),
            LossFn::MixtureOptimal { components } => NoiseModel::Mixture {
                components: components.clone(),
            }
            .validate(),
            _ => Ok(()),
        }
    }
}

impl FromStr for LossFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let loss = if s.starts_with('{') {
            serde_json::from_str(s).map_err(|e| Error::Config(format!("loss `{s}`: {e}")))?
        } else {
            let (name, arg) = match s.split_once(':') {
                Some((n, a)) => (n, Some(a)),
                None => (s, None),
            };
            let delta = || -> Result<Delta> {
                let a = arg.ok_or_else(|| Error::Config(format!("loss `{name}` needs `:delta`")))?;
                a.parse::<f64>()
                    .map(Delta::Const)
                    .map_err(|_| Error::Config(format!("bad delta `{a}` in loss `{s}`")))
            };
            match (name, arg) {
                ("zero_one", None) => LossFn::ZeroOne,
                ("zero_infty", None) => LossFn::ZeroInfty,
                ("dl", None) => LossFn::Dl,
                ("ab", None) => LossFn::Ab,
                ("n_sub" | "n_substitution", _) => LossFn::NSubstitution { delta: delta()? },
                ("one_delete", _) => LossFn::OneDelete { delta: delta()? },
                _ => return Err(Error::Config(format!("unknown loss `{s}`"))),
            }
        };
        loss.validate()?;
        Ok(loss)
    }
}

impl fmt::Display for LossFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossFn::ZeroOne => f.write_str("zero_one"),
            LossFn::ZeroInfty => f.write_str("zero_infty"),
            LossFn::NSubstitution { delta } => write!(f, "n_sub:{delta}"),
            LossFn::OneDelete { delta } => write!(f, "one_delete:{delta}"),
            LossFn::Dl => f.write_str("dl"),
            LossFn::Ab => f.write_str("ab"),
            LossFn::Optimal { noise } => write!(f, "optimal({noise})"),
            LossFn::MixtureOptimal { components } => {
                let m = NoiseModel::Mixture {
                    components: components.clone(),
                };
                write!(f, "optimal({m})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::strs;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn n_substitution_examples() {
        let d = Delta::Const(0.2);
        let l = |z, y| loss_n_substitution::<f64>(&d, &strs([z]), &strs([y])).unwrap();
        assert!(close(l("ab", "ab"), -2.0 * 0.8f64.ln()));
        assert!(close(l("ab", "cb"), -(0.2f64.ln()) - 0.8f64.ln()));
        assert_eq!(l("ab", "abc"), f64::INFINITY);
    }

    #[test]
    fn one_delete_examples() {
        let d = Delta::Const(0.1);
        let l = |z, y| loss_one_delete::<f64>(&d, &strs([z]), &strs([y])).unwrap();
        assert!(close(l("ab", "ab"), -(0.9f64.ln())));
        assert!(close(l("ab", "a"), -(0.1f64.ln())));
        assert_eq!(l("ab", "x"), f64::INFINITY);
    }

    #[test]
    fn dl_and_ab() {
        assert_eq!(loss_dl::<f64>(&strs(["abc", "x"]), &strs(["acb", "y"])).unwrap(), 2.0);
        assert_eq!(loss_ab::<f64>(&strs(["abc"]), &strs(["bc"])).unwrap(), 0.0);
        assert_eq!(loss_ab::<f64>(&strs(["aabc"]), &strs(["abc"])).unwrap(), 0.0);
        assert_eq!(loss_ab::<f64>(&strs(["abc"]), &strs(["xc"])).unwrap(), f64::INFINITY);
        assert_eq!(loss_ab::<f64>(&strs([""]), &strs([""])).unwrap(), f64::INFINITY);
    }

    #[test]
    fn mixture_of_identity_and_first_char_delete() {
        let comps = vec![
            Component { prob: 0.5, model: NoiseModel::Identity },
            Component { prob: 0.5, model: NoiseModel::FirstCharDelete },
        ];
        let l = |y| mixture_optimal_loss::<f64>(&comps, &strs(["ab"]), &strs([y])).unwrap();
        assert!(close(l("ab"), -(0.5f64.ln())));
        assert!(close(l("b"), -(0.5f64.ln())));
        assert_eq!(l("a"), f64::INFINITY);
        let bad = vec![Component { prob: 0.7, model: NoiseModel::Identity }];
        assert!(mixture_optimal_loss::<f64>(&bad, &strs(["ab"]), &strs(["ab"])).is_err());
    }

    #[test]
    fn parse_and_print() {
        for s in ["zero_one", "zero_infty", "n_sub:0.1", "one_delete:0.3", "dl", "ab"] {
            assert_eq!(s.parse::<LossFn>().unwrap().to_string(), s);
        }
        assert!("one_delete:1".parse::<LossFn>().is_err());
        assert!("one_delete".parse::<LossFn>().is_err());
        assert!("hinge".parse::<LossFn>().is_err());
        let l: LossFn = r#"{"kind":"optimal","noise":{"kind":"identity"}}"#.parse().unwrap();
        assert_eq!(l, LossFn::Optimal { noise: NoiseModel::Identity });
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(zero_one::<f64>(&strs(["a"]), &[]).is_err());
        assert!(LossFn::Dl.eval::<f64>(&strs(["a"]), &strs(["a", "b"])).is_err());
    }
}
