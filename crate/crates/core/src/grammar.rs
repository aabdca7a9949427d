//! Weighted DSL grammars and their JSON file format.
//!
//! A grammar file looks like
//!
//! ```json
//! {
//!   "nonterminals": ["n", "t"],
//!   "start": "n",
//!   "terminals": [
//!     {"var": "x", "lhs": ["n"]},
//!     {"const": 2, "lhs": ["t"]},
//!     {"const": 3, "lhs": ["t"]}
//!   ],
//!   "productions": [
//!     {"lhs": "n", "fn": "+", "rhs": ["n", "t"]},
//!     {"lhs": "n", "fn": "×", "rhs": ["n", "t"]}
//!   ],
//!   "weights": {"x": 2.0},
//!   "costs": {"x": 1, "2": 1, "3": 1, "+": 1, "×": 2}
//! }
//! ```
//!
//! A terminal is either `"const": <value>` or `"var": <input name>`; its
//! name defaults to the constant's literal (`2`, `"a"`) or the variable
//! name. `lhs` lists the nonterminals that derive the terminal directly.
//! A production's `rhs` names nonterminals or terminals; a terminal in a
//! `rhs` slot must appear there literally. Productions are named
//! `lhs -> fn(rhs, ...)` unless a `name` is given.
//!
//! `weights` maps terminal and production names to positive weights
//! (default 1). `costs` maps terminal and builtin names to positive
//! complexity costs; when present it must cover every terminal and every
//! builtin the productions use, when absent every cost is 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builtins::{Builtin, BuiltinRegistry};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::value::{Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NonterminalId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TerminalId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductionId(pub usize);

/// A grammar symbol: what a production's argument slot (or an automaton
/// state) is labelled with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Nonterminal(NonterminalId),
    Terminal(TerminalId),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TerminalKind {
    Const(Value),
    Var(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Terminal {
    pub name: String,
    pub kind: TerminalKind,
    pub lhs: Vec<NonterminalId>,
    pub weight: f64,
}

impl Terminal {
    /// How the terminal is written in an s-expression.
    pub fn literal(&self) -> String {
        match &self.kind {
            TerminalKind::Const(v) => v.to_string(),
            TerminalKind::Var(name) => name.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Production {
    pub name: String,
    pub lhs: NonterminalId,
    pub builtin: Builtin,
    pub rhs: Vec<Symbol>,
    pub weight: f64,
}

/// A validated weighted grammar `(T, N, P, s0)` plus the weight function.
#[derive(Clone, Debug)]
pub struct Grammar {
    terminals: Vec<Terminal>,
    nonterminals: Vec<String>,
    productions: Vec<Production>,
    start: NonterminalId,
    costs: Option<BTreeMap<String, f64>>,
}

/// On-disk grammar schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarFile {
    pub nonterminals: Vec<String>,
    pub start: String,
    pub terminals: Vec<TerminalSpec>,
    pub productions: Vec<ProductionSpec>,
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, rename = "const", skip_serializing_if = "Option::is_none")]
    pub constant: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(default)]
    pub lhs: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub lhs: String,
    #[serde(rename = "fn")]
    pub func: String,
    pub rhs: Vec<String>,
}

impl Grammar {
    pub fn from_file_spec(spec: &GrammarFile, registry: &BuiltinRegistry) -> Result<Grammar> {
        let bad = |m: String| Error::Grammar(m);

        let mut nt_index = BTreeMap::new();
        for (i, n) in spec.nonterminals.iter().enumerate() {
            if nt_index.insert(n.clone(), NonterminalId(i)).is_some() {
                return Err(bad(format!("duplicate nonterminal `{n}`")));
            }
        }
        let start = *nt_index
            .get(&spec.start)
            .ok_or_else(|| bad(format!("start symbol `{}` is not a nonterminal", spec.start)))?;

        let mut terminals = Vec::new();
        let mut t_index = BTreeMap::new();
        for t in &spec.terminals {
            let kind = match (&t.constant, &t.var) {
                (Some(v), None) => TerminalKind::Const(v.clone()),
                (None, Some(x)) => TerminalKind::Var(x.clone()),
                _ => return Err(bad("a terminal needs exactly one of `const` or `var`".into())),
            };
            let mut term = Terminal {
                name: String::new(),
                kind,
                lhs: Vec::new(),
                weight: 1.0,
            };
            term.name = t.name.clone().unwrap_or_else(|| term.literal());
            for l in &t.lhs {
                let id = *nt_index
                    .get(l)
                    .ok_or_else(|| bad(format!("terminal `{}` has unknown lhs `{l}`", term.name)))?;
                if term.lhs.contains(&id) {
                    return Err(bad(format!("terminal `{}` lists lhs `{l}` twice", term.name)));
                }
                term.lhs.push(id);
            }
            if nt_index.contains_key(&term.name) {
                return Err(bad(format!("`{}` is both a terminal and a nonterminal", term.name)));
            }
            if t_index.insert(term.name.clone(), TerminalId(terminals.len())).is_some() {
                return Err(bad(format!("duplicate terminal `{}`", term.name)));
            }
            terminals.push(term);
        }

        let mut productions: Vec<Production> = Vec::new();
        let mut p_index = BTreeMap::new();
        for p in &spec.productions {
            let lhs = *nt_index
                .get(&p.lhs)
                .ok_or_else(|| bad(format!("production lhs `{}` is not a nonterminal", p.lhs)))?;
            let builtin = registry
                .get(&p.func)
                .ok_or_else(|| bad(format!("unknown builtin `{}`", p.func)))?
                .clone();
            if p.rhs.is_empty() {
                return Err(bad(format!(
                    "production `{} -> {}()` has no arguments; use a terminal",
                    p.lhs, p.func
                )));
            }
            if p.rhs.len() != builtin.arity() {
                return Err(bad(format!(
                    "builtin `{}` takes {} arguments, production gives {}",
                    p.func,
                    builtin.arity(),
                    p.rhs.len()
                )));
            }
            let rhs = p
                .rhs
                .iter()
                .map(|s| {
                    nt_index
                        .get(s)
                        .map(|&n| Symbol::Nonterminal(n))
                        .or_else(|| t_index.get(s).map(|&t| Symbol::Terminal(t)))
                        .ok_or_else(|| bad(format!("unknown symbol `{s}` in production")))
                })
                .collect::<Result<Vec<_>>>()?;
            let name = p
                .name
                .clone()
                .unwrap_or_else(|| format!("{} -> {}({})", p.lhs, p.func, p.rhs.join(", ")));
            if productions
                .iter()
                .any(|q| q.lhs == lhs && q.builtin.name == builtin.name && q.rhs == rhs)
            {
                return Err(bad(format!("duplicate production `{name}`")));
            }
            if t_index.contains_key(&name) {
                return Err(bad(format!("`{name}` names both a terminal and a production")));
            }
            if p_index.insert(name.clone(), ProductionId(productions.len())).is_some() {
                return Err(bad(format!("duplicate production name `{name}`")));
            }
            productions.push(Production {
                name,
                lhs,
                builtin,
                rhs,
                weight: 1.0,
            });
        }

        let mut g = Grammar {
            terminals,
            nonterminals: spec.nonterminals.clone(),
            productions,
            start,
            costs: None,
        };
        g.set_weights(&spec.weights)?;
        if let Some(costs) = &spec.costs {
            // resolve once so a bad cost map is a load-time error
            CostModel::<f64>::from_map(&g, costs)?;
            g.costs = Some(costs.clone());
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Grammar> {
        let spec: GrammarFile =
            serde_json::from_str(text).map_err(|e| Error::Grammar(e.to_string()))?;
        Grammar::from_file_spec(&spec, &BuiltinRegistry::standard())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Grammar> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Grammar::from_json(&text)
    }

    /// Overrides weights by terminal or production name; unnamed entries
    /// keep their current weight.
    pub fn set_weights(&mut self, weights: &BTreeMap<String, f64>) -> Result<()> {
        for (key, &w) in weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Grammar(format!(
                    "weight of `{key}` must be positive and finite, got {w}"
                )));
            }
            if let Some(t) = self.terminals.iter_mut().find(|t| &t.name == key) {
                t.weight = w;
            } else if let Some(p) = self.productions.iter_mut().find(|p| &p.name == key) {
                p.weight = w;
            } else {
                return Err(Error::Grammar(format!("weight for unknown symbol `{key}`")));
            }
        }
        Ok(())
    }

    /// Copy with terminal weights and production weights replaced
    /// positionally.
    pub fn with_weight_vectors(&self, terminal_w: &[f64], production_w: &[f64]) -> Result<Grammar> {
        if terminal_w.len() != self.terminals.len() || production_w.len() != self.productions.len() {
            return Err(Error::Grammar("weight vector lengths do not match the grammar".into()));
        }
        if terminal_w.iter().chain(production_w).any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Grammar("weights must be positive and finite".into()));
        }
        let mut g = self.clone();
        for (t, &w) in g.terminals.iter_mut().zip(terminal_w) {
            t.weight = w;
        }
        for (p, &w) in g.productions.iter_mut().zip(production_w) {
            p.weight = w;
        }
        Ok(g)
    }

    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    pub fn terminal(&self, id: TerminalId) -> &Terminal {
        &self.terminals[id.0]
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn production(&self, id: ProductionId) -> &Production {
        &self.productions[id.0]
    }

    pub fn start(&self) -> NonterminalId {
        self.start
    }

    pub fn nonterminal_name(&self, id: NonterminalId) -> &str {
        &self.nonterminals[id.0]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::Nonterminal(n) => self.nonterminal_name(n),
            Symbol::Terminal(t) => &self.terminal(t).name,
        }
    }

    pub fn nonterminal_id(&self, name: &str) -> Option<NonterminalId> {
        self.nonterminals.iter().position(|n| n == name).map(NonterminalId)
    }

    /// Input variable names referenced by terminals.
    pub fn variables(&self) -> BTreeSet<&str> {
        self.terminals
            .iter()
            .filter_map(|t| match &t.kind {
                TerminalKind::Var(x) => Some(x.as_str()),
                TerminalKind::Const(_) => None,
            })
            .collect()
    }

    /// Symbols that label some derivation slot: every nonterminal plus
    /// every terminal written inline in a production.
    pub fn slot_symbols(&self) -> Vec<Symbol> {
        let mut syms: Vec<Symbol> = (0..self.nonterminals.len())
            .map(|i| Symbol::Nonterminal(NonterminalId(i)))
            .collect();
        for p in &self.productions {
            for s in &p.rhs {
                if !syms.contains(s) {
                    syms.push(*s);
                }
            }
        }
        syms
    }

    /// Terminals usable in a slot labelled `symbol`.
    pub fn terminals_for(&self, symbol: Symbol) -> Vec<TerminalId> {
        match symbol {
            Symbol::Terminal(t) => vec![t],
            Symbol::Nonterminal(n) => (0..self.terminals.len())
                .map(TerminalId)
                .filter(|t| self.terminal(*t).lhs.contains(&n))
                .collect(),
        }
    }

    /// Productions whose result fits a slot labelled `symbol`.
    pub fn productions_for(&self, symbol: Symbol) -> Vec<ProductionId> {
        match symbol {
            Symbol::Terminal(_) => Vec::new(),
            Symbol::Nonterminal(n) => (0..self.productions.len())
                .map(ProductionId)
                .filter(|p| self.production(*p).lhs == n)
                .collect(),
        }
    }

    /// The cost map shipped with the grammar file, if any.
    pub fn cost_map(&self) -> Option<&BTreeMap<String, f64>> {
        self.costs.as_ref()
    }

    /// Cost model from the grammar file, or `Size` when it has none.
    pub fn default_costs<S: Scalar>(&self) -> CostModel<S> {
        match &self.costs {
            Some(map) => CostModel::from_map(self, map).expect("validated at load"),
            None => CostModel::size(self),
        }
    }

    /// Distinct builtin names used by productions, in production order.
    pub fn builtin_names(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for p in &self.productions {
            if !seen.contains(&p.builtin.name.as_str()) {
                seen.push(p.builtin.name.as_str());
            }
        }
        seen
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nonterminals.iter().enumerate() {
            let mut alts: Vec<String> = self
                .terminals
                .iter()
                .filter(|t| t.lhs.contains(&NonterminalId(i)))
                .map(Terminal::literal)
                .collect();
            alts.extend(
                self.productions
                    .iter()
                    .filter(|p| p.lhs == NonterminalId(i))
                    .map(|p| {
                        let args: Vec<&str> = p.rhs.iter().map(|s| self.symbol_name(*s)).collect();
                        format!("{}({})", p.builtin.name, args.join(", "))
                    }),
            );
            writeln!(f, "{n} := {};", alts.join(" | "))?;
        }
        Ok(())
    }
}

/// Per-terminal and per-builtin complexity costs for `Cost(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel<S> {
    terminal: Vec<S>,
    builtin: BTreeMap<String, S>,
}

impl<S: Scalar> CostModel<S> {
    /// All costs 1: `Cost` becomes `Size`.
    pub fn size(g: &Grammar) -> Self {
        CostModel {
            terminal: vec![S::one(); g.terminals().len()],
            builtin: g
                .builtin_names()
                .into_iter()
                .map(|b| (b.to_string(), S::one()))
                .collect(),
        }
    }

    /// Strict resolution: every terminal and every used builtin needs an
    /// entry, and every entry must name one of them.
    pub fn from_map(g: &Grammar, map: &BTreeMap<String, f64>) -> Result<Self> {
        Self::resolve(g, map, None)
    }

    /// `Size` with selected entries overridden.
    pub fn size_with_overrides(g: &Grammar, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        Self::resolve(g, overrides, Some(1.0))
    }

    fn resolve(g: &Grammar, map: &BTreeMap<String, f64>, default: Option<f64>) -> Result<Self> {
        let builtins = g.builtin_names();
        for (k, &v) in map {
            let known = g.terminals().iter().any(|t| &t.name == k) || builtins.contains(&k.as_str());
            if !known {
                return Err(Error::Config(format!("cost for unknown terminal or builtin `{k}`")));
            }
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("cost of `{k}` must be positive, got {v}")));
            }
        }
        let lookup = |name: &str| -> Result<S> {
            map.get(name)
                .copied()
                .or(default)
                .map(S::of)
                .ok_or_else(|| Error::Config(format!("missing cost entry for `{name}`")))
        };
        let terminal = g
            .terminals()
            .iter()
            .map(|t| lookup(&t.name))
            .collect::<Result<Vec<_>>>()?;
        let builtin = builtins
            .into_iter()
            .map(|b| Ok((b.to_string(), lookup(b)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(CostModel { terminal, builtin })
    }

    pub fn terminal_cost(&self, t: TerminalId) -> S {
        self.terminal[t.0]
    }

    pub fn builtin_cost(&self, name: &str) -> Option<S> {
        self.builtin.get(name).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ARITH: &str = r#"{
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

    #[test]
    fn parses_example_grammar() {
        let g = Grammar::from_json(ARITH).unwrap();
        assert_eq!(g.terminals().len(), 3);
        assert_eq!(g.productions()[0].name, "n -> +(n, t)");
        assert_eq!(g.terminals()[1].name, "2");
        assert_eq!(g.variables().into_iter().collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(g.to_string(), "n := x | +(n, t) | ×(n, t);\nt := 2 | 3;\n");
    }

    #[test]
    fn rejects_bad_grammars() {
        let cases = [
            ARITH.replace(r#""start": "n""#, r#""start": "q""#),
            ARITH.replace(r#""fn": "+""#, r#""fn": "minus""#),
            ARITH.replace(r#""rhs": ["n", "t"]}"#, r#""rhs": ["n"]}"#),
            ARITH.replace(r#""rhs": ["n", "t"]},"#, r#""rhs": ["n", "z"]},"#),
            ARITH.replace(r#""fn": "×""#, r#""fn": "+""#),
            ARITH.replace(r#""productions""#, r#""weights": {"x": 0.0}, "productions""#),
            ARITH.replace(r#""productions""#, r#""weights": {"y": 1.0}, "productions""#),
            ARITH.replace(r#""productions""#, r#""costs": {"x": 1}, "productions""#),
        ];
        for c in cases {
            let err = Grammar::from_json(&c).unwrap_err();
            assert!(err.is_validation(), "{c}");
        }
    }

    #[test]
    fn weights_by_name() {
        let json = ARITH.replace(
            r#""productions""#,
            r#""weights": {"x": 2, "n -> +(n, t)": 3, "2": 5}, "productions""#,
        );
        let g = Grammar::from_json(&json).unwrap();
        assert_eq!(g.terminals()[0].weight, 2.0);
        assert_eq!(g.terminals()[1].weight, 5.0);
        assert_eq!(g.productions()[0].weight, 3.0);
        assert_eq!(g.productions()[1].weight, 1.0);
    }

    #[test]
    fn cost_maps() {
        let g = Grammar::from_json(ARITH).unwrap();
        let size = CostModel::<f64>::size(&g);
        assert_eq!(size.builtin_cost("×"), Some(1.0));
        let mut over = BTreeMap::new();
        over.insert("×".to_string(), 2.0);
        let c = CostModel::<f64>::size_with_overrides(&g, &over).unwrap();
        assert_eq!(c.builtin_cost("×"), Some(2.0));
        assert!(CostModel::<f64>::from_map(&g, &over).is_err());
    }
}
