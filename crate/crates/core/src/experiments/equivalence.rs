//! Deciding `p ≈ p_h`: equal outputs on every input of the domain.

use crate::error::Result;
use crate::grammar::Grammar;
use crate::program::Program;
use crate::value::{InputEnv, Value};

use super::input::InputSource;

/// Largest finite input domain checked exhaustively.
pub const EXHAUSTIVE_CAP: usize = 10_000;
/// Probe count when the domain is too large to enumerate.
pub const PROBES: usize = 1000;
/// Seed for the probe set, fixed so audits are reproducible.
pub const AUDIT_SEED: u64 = 0x5eed_a0d1;

/// Output equality over a set of inputs. Exact when the inputs are the
/// whole (finite) domain, an approximation on a probe sample otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceChecker {
    inputs: Vec<InputEnv>,
    exhaustive: bool,
}

/// A program's behaviour on the checker's inputs; `None` where
/// evaluation fails.
pub type Signature = Vec<Option<Value>>;

impl EquivalenceChecker {
    /// Exhaustive over the source's support when it has at most
    /// [`EXHAUSTIVE_CAP`] points, otherwise [`PROBES`] samples drawn with
    /// [`AUDIT_SEED`].
    pub fn for_source(source: &InputSource) -> Self {
        match source.finite_support(EXHAUSTIVE_CAP) {
            Some(points) => EquivalenceChecker {
                inputs: points.into_iter().map(|(e, _)| e).collect(),
                exhaustive: true,
            },
            None => EquivalenceChecker {
                inputs: source.sample(PROBES, AUDIT_SEED),
                exhaustive: false,
            },
        }
    }

    pub fn on_inputs(inputs: Vec<InputEnv>, exhaustive: bool) -> Self {
        EquivalenceChecker { inputs, exhaustive }
    }

    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn inputs(&self) -> &[InputEnv] {
        &self.inputs
    }

    pub fn signature(&self, g: &Grammar, p: &Program) -> Result<Signature> {
        self.inputs
            .iter()
            .map(|env| match p.evaluate(g, env) {
                Ok(v) => Ok(Some(v)),
                Err(e) if e.is_domain_failure() => Ok(None),
                Err(e) => Err(e),
            })
            .collect()
    }

    pub fn equivalent(&self, g: &Grammar, p: &Program, q: &Program) -> Result<bool> {
        Ok(self.signature(g, p)? == self.signature(g, q)?)
    }
}
