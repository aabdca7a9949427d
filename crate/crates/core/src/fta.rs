//! Values-indexed finite tree automata.
//!
//! A state is a grammar symbol paired with the vector of values some
//! program derivable from that symbol produces on the inputs `x⃗`. States
//! are created level by level: level 0 applies the terminal rule, level
//! `h` applies every production to argument states whose first level is at
//! most `h − 1`, with at least one exactly `h − 1`, so each argument tuple
//! is considered once. States with the start symbol accept.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::builtins::BuiltinFailure;
use crate::error::{Error, Result};
use crate::grammar::{CostModel, Grammar, ProductionId, Symbol, TerminalId, TerminalKind};
use crate::program::Program;
use crate::scalar::{Scalar, Semiring};
use crate::value::{InputEnv, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub symbol: Symbol,
    pub values: Vec<Value>,
    /// Smallest height of a program reaching this state.
    pub level: usize,
}

/// `f(q_1, ..., q_k) → q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub production: ProductionId,
    pub args: Vec<StateId>,
    pub dst: StateId,
}

#[derive(Clone, Debug)]
pub struct Fta {
    grammar: Grammar,
    inputs: Vec<InputEnv>,
    d: usize,
    states: Vec<State>,
    index: HashMap<(Symbol, Vec<Value>), StateId>,
    leaves: Vec<(TerminalId, StateId)>,
    transitions: Vec<Transition>,
    incoming: Vec<Vec<usize>>,
    leaf_in: Vec<Vec<TerminalId>>,
    accepting: Vec<StateId>,
    diagnostics: Vec<String>,
    pruned: usize,
}

const MAX_DIAGNOSTICS: usize = 32;

impl Fta {
    pub fn build(g: &Grammar, xs: &[InputEnv], d: usize) -> Result<Fta> {
        if xs.is_empty() {
            return Err(Error::Config("the automaton needs at least one input".into()));
        }
        for x in g.variables() {
            if let Some(i) = xs.iter().position(|env| !env.contains_key(x)) {
                return Err(Error::UnboundVariable(x.to_string()).at_example(i));
            }
        }
        let mut fta = Fta {
            grammar: g.clone(),
            inputs: xs.to_vec(),
            d,
            states: Vec::new(),
            index: HashMap::new(),
            leaves: Vec::new(),
            transitions: Vec::new(),
            incoming: Vec::new(),
            leaf_in: Vec::new(),
            accepting: Vec::new(),
            diagnostics: Vec::new(),
            pruned: 0,
        };
        let slots = g.slot_symbols();

        for &s in &slots {
            for t in g.terminals_for(s) {
                let values: Vec<Value> = match &g.terminal(t).kind {
                    TerminalKind::Const(v) => vec![v.clone(); xs.len()],
                    TerminalKind::Var(x) => xs.iter().map(|env| env[x].clone()).collect(),
                };
                let q = fta.intern(s, values, 0);
                fta.leaves.push((t, q));
                fta.leaf_in[q.0].push(t);
            }
        }

        // by_symbol[s]: states of symbol s in creation order (so by level)
        let mut by_symbol: BTreeMap<Symbol, Vec<StateId>> = BTreeMap::new();
        for (i, st) in fta.states.iter().enumerate() {
            by_symbol.entry(st.symbol).or_default().push(StateId(i));
        }

        for h in 1..=d {
            let mut created: Vec<StateId> = Vec::new();
            for (pi, prod) in g.productions().iter().enumerate() {
                let pools: Vec<Vec<StateId>> = prod
                    .rhs
                    .iter()
                    .map(|r| {
                        by_symbol
                            .get(r)
                            .map(|v| {
                                v.iter()
                                    .copied()
                                    .filter(|q| fta.states[q.0].level < h)
                                    .collect()
                            })
                            .unwrap_or_default()
                    })
                    .collect();
                if pools.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut idx = vec![0usize; pools.len()];
                'tuples: loop {
                    let args: Vec<StateId> = idx.iter().zip(&pools).map(|(&i, p)| p[i]).collect();
                    if args.iter().any(|q| fta.states[q.0].level == h - 1) {
                        match fta.apply(ProductionId(pi), &args) {
                            Ok(values) => {
                                let before = fta.states.len();
                                let dst = fta.intern(Symbol::Nonterminal(prod.lhs), values, h);
                                if fta.states.len() > before {
                                    created.push(dst);
                                }
                                fta.incoming[dst.0].push(fta.transitions.len());
                                fta.transitions.push(Transition {
                                    production: ProductionId(pi),
                                    args,
                                    dst,
                                });
                            }
                            Err(msg) => {
                                fta.pruned += 1;
                                if fta.diagnostics.len() < MAX_DIAGNOSTICS {
                                    fta.diagnostics.push(msg);
                                }
                            }
                        }
                    }
                    // odometer over the argument pools
                    let mut k = idx.len();
                    loop {
                        if k == 0 {
                            break 'tuples;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < pools[k].len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
            for q in created {
                by_symbol.entry(fta.states[q.0].symbol).or_default().push(q);
            }
        }

        let start = Symbol::Nonterminal(g.start());
        fta.accepting = (0..fta.states.len())
            .map(StateId)
            .filter(|q| fta.states[q.0].symbol == start)
            .collect();
        Ok(fta)
    }

    fn intern(&mut self, symbol: Symbol, values: Vec<Value>, level: usize) -> StateId {
        if let Some(&q) = self.index.get(&(symbol, values.clone())) {
            return q;
        }
        let q = StateId(self.states.len());
        self.index.insert((symbol, values.clone()), q);
        self.states.push(State {
            symbol,
            values,
            level,
        });
        self.incoming.push(Vec::new());
        self.leaf_in.push(Vec::new());
        q
    }

    fn apply(&self, pid: ProductionId, args: &[StateId]) -> std::result::Result<Vec<Value>, String> {
        let prod = self.grammar.production(pid);
        (0..self.inputs.len())
            .map(|j| {
                let vals: Vec<Value> = args.iter().map(|q| self.states[q.0].values[j].clone()).collect();
                prod.builtin.apply(&vals).map_err(|f| {
                    let why = match f {
                        BuiltinFailure::Overflow => "overflow".to_string(),
                        BuiltinFailure::Type(m) => m,
                    };
                    let shown: Vec<String> = vals.iter().map(Value::to_string).collect();
                    format!(
                        "pruned `{}` on example {j} with arguments ({}): {why}",
                        prod.name,
                        shown.join(", ")
                    )
                })
            })
            .collect()
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn inputs(&self) -> &[InputEnv] {
        &self.inputs
    }

    pub fn depth(&self) -> usize {
        self.d
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, q: StateId) -> &State {
        &self.states[q.0]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Terminal rule applications `t → q`.
    pub fn leaves(&self) -> &[(TerminalId, StateId)] {
        &self.leaves
    }

    pub fn accepting(&self) -> &[StateId] {
        &self.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.states[q.0].symbol == Symbol::Nonterminal(self.grammar.start())
    }

    pub fn lookup(&self, symbol: Symbol, values: &[Value]) -> Option<StateId> {
        self.index.get(&(symbol, values.to_vec())).copied()
    }

    /// The accepting state for output vector `values`, if any.
    pub fn accepting_state(&self, values: &[Value]) -> Option<StateId> {
        self.lookup(Symbol::Nonterminal(self.grammar.start()), values)
    }

    /// Messages for the first argument tuples dropped because evaluation
    /// failed.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    /// How many argument tuples were dropped.
    pub fn pruned(&self) -> usize {
        self.pruned
    }

    /// `w(q, m)` for every state and `m = 0..=d`.
    pub fn weights<W: Semiring>(&self) -> WeightTable<W> {
        let n = self.states.len();
        let mut w: Vec<Vec<W>> = vec![Vec::with_capacity(self.d + 1); n];
        for m in 0..=self.d {
            for q in 0..n {
                let mut acc = self.leaf_in[q]
                    .iter()
                    .fold(W::zero(), |a, t| a.plus(&W::from_weight(self.grammar.terminal(*t).weight)));
                if m > 0 {
                    for &ti in &self.incoming[q] {
                        let tr = &self.transitions[ti];
                        let term = tr.args.iter().fold(
                            W::from_weight(self.grammar.production(tr.production).weight),
                            |a, arg| a.times(&w[arg.0][m - 1]),
                        );
                        acc = acc.plus(&term);
                    }
                }
                w[q].push(acc);
            }
        }
        WeightTable { w, d: self.d }
    }

    /// `π(q) = w(q, d) / Σ_{q' accepting} w(q', d)`.
    pub fn pi<W: Semiring>(&self, table: &WeightTable<W>, q: StateId) -> Result<W> {
        if !self.is_accepting(q) {
            return Err(Error::NotAccepting(q.0));
        }
        let total = self.accepting_total(table)?;
        Ok(table.get(q, self.d).ratio(&total))
    }

    /// `π` for every accepting state, in [`Fta::accepting`] order.
    pub fn pi_all<W: Semiring>(&self, table: &WeightTable<W>) -> Result<Vec<(StateId, W)>> {
        let total = self.accepting_total(table)?;
        Ok(self
            .accepting
            .iter()
            .map(|&q| (q, table.get(q, self.d).ratio(&total)))
            .collect())
    }

    fn accepting_total<W: Semiring>(&self, table: &WeightTable<W>) -> Result<W> {
        let total = self
            .accepting
            .iter()
            .fold(W::zero(), |a, q| a.plus(table.get(*q, self.d)));
        if total.is_zero() {
            return Err(Error::EmptyFta);
        }
        Ok(total)
    }

    /// Minimum-cost program of height ≤ d accepted at `q`. Among equal costs
    /// the smallest program in [`Program`]'s order wins.
    pub fn extract_min_complexity<S: Scalar>(&self, q: StateId, costs: &CostModel<S>) -> Result<(Program, S)> {
        if !self.is_accepting(q) {
            return Err(Error::NotAccepting(q.0));
        }
        self.extract_at(q, costs)
    }

    /// Like [`Fta::extract_min_complexity`] for any state.
    pub fn extract_at<S: Scalar>(&self, q: StateId, costs: &CostModel<S>) -> Result<(Program, S)> {
        let mut memo = HashMap::new();
        self.best(q, self.d, costs, &mut memo)?
            .map(|(c, p)| (p, c))
            .ok_or(Error::Unreachable(q.0))
    }

    // best(q, m): cheapest program of height <= m accepted at q
    fn best<S: Scalar>(
        &self,
        q: StateId,
        m: usize,
        costs: &CostModel<S>,
        memo: &mut HashMap<(StateId, usize), Option<(S, Program)>>,
    ) -> Result<Option<(S, Program)>> {
        if let Some(hit) = memo.get(&(q, m)) {
            return Ok(hit.clone());
        }
        let mut best: Option<(S, Program)> = None;
        let consider = |cand: (S, Program), best: &mut Option<(S, Program)>| {
            let better = match best {
                None => true,
                Some((c, p)) => cand.0 < *c || (cand.0 == *c && cand.1 < *p),
            };
            if better {
                *best = Some(cand);
            }
        };
        for &t in &self.leaf_in[q.0] {
            consider((costs.terminal_cost(t), Program::Leaf(t)), &mut best);
        }
        if m > 0 {
            for &ti in &self.incoming[q.0] {
                let tr = &self.transitions[ti];
                let name = &self.grammar.production(tr.production).builtin.name;
                let mut cost = costs
                    .builtin_cost(name)
                    .ok_or_else(|| Error::Config(format!("missing cost entry for `{name}`")))?;
                let mut kids = Vec::with_capacity(tr.args.len());
                let mut ok = true;
                for &arg in &tr.args {
                    match self.best(arg, m - 1, costs, memo)? {
                        Some((c, p)) => {
                            cost = cost + c;
                            kids.push(p);
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    consider((cost, Program::Node(tr.production, kids)), &mut best);
                }
            }
        }
        memo.insert((q, m), best.clone());
        Ok(best)
    }

    /// JSON view: states, terminal rules, transitions and optionally `π`
    /// of accepting states.
    pub fn dump<W: Semiring>(&self, table: Option<&WeightTable<W>>) -> Result<FtaDump> {
        let pi: BTreeMap<usize, f64> = match table {
            Some(t) => self
                .pi_all(t)?
                .into_iter()
                .map(|(q, w)| (q.0, w.to_f64()))
                .collect(),
            None => BTreeMap::new(),
        };
        let g = &self.grammar;
        Ok(FtaDump {
            depth: self.d,
            inputs: self.inputs.clone(),
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(i, s)| StateDump {
                    id: i,
                    symbol: g.symbol_name(s.symbol).to_string(),
                    values: s.values.clone(),
                    level: s.level,
                    accepting: self.is_accepting(StateId(i)),
                    pi: pi.get(&i).copied(),
                })
                .collect(),
            leaves: self
                .leaves
                .iter()
                .map(|(t, q)| LeafDump {
                    terminal: g.terminal(*t).name.clone(),
                    dst: q.0,
                })
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|tr| TransitionDump {
                    builtin: g.production(tr.production).builtin.name.clone(),
                    production: g.production(tr.production).name.clone(),
                    args: tr.args.iter().map(|a| a.0).collect(),
                    dst: tr.dst.0,
                })
                .collect(),
            pruned: self.pruned,
            diagnostics: self.diagnostics.clone(),
        })
    }
}

/// `w(q, m)`: total weight of programs of height ≤ m accepted at `q`.
#[derive(Clone, Debug)]
pub struct WeightTable<W> {
    w: Vec<Vec<W>>,
    d: usize,
}

impl<W: Semiring> WeightTable<W> {
    pub fn get(&self, q: StateId, m: usize) -> &W {
        &self.w[q.0][m]
    }

    pub fn depth(&self) -> usize {
        self.d
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FtaDump {
    pub depth: usize,
    pub inputs: Vec<InputEnv>,
    pub states: Vec<StateDump>,
    pub leaves: Vec<LeafDump>,
    pub transitions: Vec<TransitionDump>,
    pub pruned: usize,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateDump {
    pub id: usize,
    pub symbol: String,
    pub values: Vec<Value>,
    pub level: usize,
    pub accepting: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafDump {
    pub terminal: String,
    pub dst: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionDump {
    pub builtin: String,
    pub production: String,
    pub args: Vec<usize>,
    pub dst: usize,
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

    fn arith_fta(d: usize) -> Fta {
        let g = Grammar::from_json(ARITH).unwrap();
        Fta::build(&g, &[env([("x", 1)])], d).unwrap()
    }

    #[test]
    fn accepting_values_at_depth_two() {
        let fta = arith_fta(2);
        let mut vals: Vec<i64> = fta
            .accepting()
            .iter()
            .map(|q| match fta.state(*q).values[..] {
                [Value::Int(v)] => v,
                _ => unreachable!(),
            })
            .collect();
        vals.sort();
        assert_eq!(vals, [1, 2, 3, 4, 5, 6, 7, 8, 9, 12]);
        assert_eq!(fta.transitions().len(), 16);
    }

    #[test]
    fn depth_zero_has_only_terminals() {
        let fta = arith_fta(0);
        assert_eq!(fta.accepting().len(), 1);
        assert!(fta.transitions().is_empty());
    }

    #[test]
    fn weights_and_pi() {
        let fta = arith_fta(2);
        let table = fta.weights::<f64>();
        let four = fta.accepting_state(&[Value::Int(4)]).unwrap();
        assert_eq!(*table.get(four, 1), 1.0);
        // x+3, (x×2)+2, (x×2)×2
        assert_eq!(*table.get(four, 2), 3.0);
        let total: f64 = fta.pi_all(&table).unwrap().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let six = fta.accepting_state(&[Value::Int(6)]).unwrap();
        let g = fta.grammar();
        let sixes = crate::program::enumerate_programs(g, 2)
            .iter()
            .filter(|p| p.evaluate(g, &env([("x", 1)])).unwrap() == Value::Int(6))
            .count();
        assert!((fta.pi(&table, six).unwrap() - sixes as f64 / 21.0).abs() < 1e-12);
        let t_state = fta.lookup(Symbol::Terminal(TerminalId(1)), &[Value::Int(2)]);
        assert!(t_state.is_none());
    }

    #[test]
    fn extraction_prefers_cheap_programs() {
        let fta = arith_fta(2);
        let g = fta.grammar().clone();
        let size = CostModel::<f64>::size(&g);
        let two = fta.accepting_state(&[Value::Int(2)]).unwrap();
        let (p, c) = fta.extract_min_complexity(two, &size).unwrap();
        assert_eq!(p.display(&g).to_string(), "(× x 2)");
        assert_eq!(c, 3.0);
        let one = fta.accepting_state(&[Value::Int(1)]).unwrap();
        assert_eq!(fta.extract_min_complexity(one, &size).unwrap().0, Program::Leaf(TerminalId(0)));
    }
}
