//! The prior `ρ_p` over programs of height ≤ d, from grammar weights.

use std::collections::BTreeMap;

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Symbol};
use crate::program::{count_programs, enumerate_programs, Program};
use crate::scalar::Semiring;
use crate::value::{InputEnv, Value};

/// Largest program space the prior will enumerate (sampling, brute-force
/// class masses).
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// `ρ_p(p) = w(s0, p) / Σ_{height(p') ≤ d} w(s0, p')`, with weights in the
/// semiring `W`.
#[derive(Clone, Debug)]
pub struct Prior<W> {
    grammar: Grammar,
    d: usize,
    total: W,
}

impl<W: Semiring> Prior<W> {
    /// The normalizer is computed symbolically, without enumeration:
    /// `W(s, h) = Σ_t w(t) + Σ_{s → f(r⃗)} w(f) Π W(r_i, h − 1)`.
    pub fn new(grammar: &Grammar, d: usize) -> Result<Self> {
        let start = Symbol::Nonterminal(grammar.start());
        let total = symbol_totals::<W>(grammar, d)
            .remove(&start)
            .expect("start symbol is a slot");
        if total.is_zero() {
            return Err(Error::Grammar(format!(
                "the start symbol derives no program of height <= {d}"
            )));
        }
        Ok(Prior {
            grammar: grammar.clone(),
            d,
            total,
        })
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn depth(&self) -> usize {
        self.d
    }

    pub fn total_weight(&self) -> &W {
        &self.total
    }

    /// `w(s0, p)`: product of the weights along the derivation.
    pub fn program_weight(&self, p: &Program) -> Result<W> {
        p.conforms(&self.grammar, Symbol::Nonterminal(self.grammar.start()))?;
        Ok(derivation_weight(&self.grammar, p))
    }

    pub fn rho_p(&self, p: &Program) -> Result<W> {
        let height = p.height();
        if height > self.d {
            return Err(Error::HeightExceeded {
                height,
                bound: self.d,
            });
        }
        Ok(self.program_weight(p)?.ratio(&self.total))
    }

    /// Exact alias-table sampler over the enumerated program space.
    pub fn sampler(&self) -> Result<ProgramSampler> {
        let n = count_programs(&self.grammar, self.d);
        if n > ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                what: format!("sampling over {n} programs"),
                cap: ENUMERATION_CAP,
            });
        }
        let programs = enumerate_programs(&self.grammar, self.d);
        let probs: Vec<f64> = programs
            .iter()
            .map(|p| derivation_weight::<W>(&self.grammar, p).ratio(&self.total).to_f64())
            .collect();
        let table = WeightedAliasIndex::new(probs)
            .map_err(|e| Error::Grammar(format!("cannot build sampler: {e}")))?;
        Ok(ProgramSampler { programs, table })
    }

    /// One draw from `ρ_p`, determined by `seed`.
    pub fn sample_program(&self, seed: u64) -> Result<Program> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sampler()?.sample(&mut rng).clone())
    }

    /// Brute-force class masses `ρ_p(G_{x⃗,c⃗})`, keyed by output vector.
    ///
    /// Programs whose evaluation fails are left out and the remaining mass
    /// is renormalized, matching the automaton's pruning.
    pub fn class_masses(&self, xs: &[InputEnv]) -> Result<BTreeMap<Vec<Value>, W>> {
        let n = count_programs(&self.grammar, self.d);
        if n > ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                what: format!("enumerating {n} programs"),
                cap: ENUMERATION_CAP,
            });
        }
        let mut raw: BTreeMap<Vec<Value>, W> = BTreeMap::new();
        for p in enumerate_programs(&self.grammar, self.d) {
            match p.evaluate_vec(&self.grammar, xs) {
                Ok(out) => {
                    let w = derivation_weight::<W>(&self.grammar, &p);
                    let e = raw.entry(out).or_insert_with(W::zero);
                    *e = e.plus(&w);
                }
                Err(e) if e.is_domain_failure() => {}
                Err(e) => return Err(e),
            }
        }
        let total = raw.values().fold(W::zero(), |a, w| a.plus(w));
        if total.is_zero() {
            return Err(Error::EmptyFta);
        }
        Ok(raw.into_iter().map(|(k, w)| (k, w.ratio(&total))).collect())
    }
}

/// Enumerated programs with an alias table over their prior probabilities.
#[derive(Clone, Debug)]
pub struct ProgramSampler {
    programs: Vec<Program>,
    table: WeightedAliasIndex<f64>,
}

impl ProgramSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Program {
        &self.programs[self.table.sample(rng)]
    }

    pub fn programs(&self) -> &[Program] {
        &self.programs
    }
}

fn derivation_weight<W: Semiring>(g: &Grammar, p: &Program) -> W {
    match p {
        Program::Leaf(t) => W::from_weight(g.terminal(*t).weight),
        Program::Node(pid, kids) => kids.iter().fold(
            W::from_weight(g.production(*pid).weight),
            |acc, k| acc.times(&derivation_weight(g, k)),
        ),
    }
}

/// Total weight of programs of height ≤ `d` for every slot symbol.
fn symbol_totals<W: Semiring>(g: &Grammar, d: usize) -> BTreeMap<Symbol, W> {
    let syms = g.slot_symbols();
    let mut prev: BTreeMap<Symbol, W> = BTreeMap::new();
    for h in 0..=d {
        let mut row = BTreeMap::new();
        for &s in &syms {
            let mut total = g
                .terminals_for(s)
                .into_iter()
                .fold(W::zero(), |a, t| a.plus(&W::from_weight(g.terminal(t).weight)));
            if h > 0 {
                for pid in g.productions_for(s) {
                    let prod = g.production(pid);
                    let w = prod
                        .rhs
                        .iter()
                        .fold(W::from_weight(prod.weight), |a, r| a.times(&prev[r]));
                    total = total.plus(&w);
                }
            }
            row.insert(s, total);
        }
        prev = row;
    }
    prev
}
