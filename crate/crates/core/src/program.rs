//! Parse trees, execution semantics, complexity, enumeration and the
//! s-expression syntax.
//!
//! Programs print as s-expressions: a leaf is its terminal's literal
//! (`x`, `3`, `"a"`, `true`) and a node is `(fn arg ...)`, so the
//! arithmetic program `(x + 3) × 3` reads `(× (+ x 3) 3)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::builtins::BuiltinFailure;
use crate::error::{Error, Result};
use crate::grammar::{CostModel, Grammar, ProductionId, Symbol, TerminalId, TerminalKind};
use crate::scalar::Scalar;
use crate::value::{InputEnv, Value};

/// A derivation tree. Each node records the production that built it, so
/// the grammar symbol of every subtree is known.
///
/// The derived order (leaves before nodes, then by terminal or production
/// index, then children left to right) is the deterministic tie-break
/// among equal-cost programs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Leaf(TerminalId),
    Node(ProductionId, Vec<Program>),
}

impl Program {
    pub fn height(&self) -> usize {
        match self {
            Program::Leaf(_) => 0,
            Program::Node(_, kids) => 1 + kids.iter().map(Program::height).max().unwrap_or(0),
        }
    }

    /// Number of parse-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Program::Leaf(_) => 1,
            Program::Node(_, kids) => 1 + kids.iter().map(Program::size).sum::<usize>(),
        }
    }

    /// `⟦p⟧x`.
    pub fn evaluate(&self, g: &Grammar, env: &InputEnv) -> Result<Value> {
        match self {
            Program::Leaf(t) => match &g.terminal(*t).kind {
                TerminalKind::Const(v) => Ok(v.clone()),
                TerminalKind::Var(x) => env
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::UnboundVariable(x.clone())),
            },
            Program::Node(pid, kids) => {
                let prod = g.production(*pid);
                let args = kids
                    .iter()
                    .map(|k| k.evaluate(g, env))
                    .collect::<Result<Vec<_>>>()?;
                prod.builtin.apply(&args).map_err(|f| match f {
                    BuiltinFailure::Overflow => Error::Overflow {
                        builtin: prod.builtin.name.clone(),
                        node: self.display(g).to_string(),
                    },
                    BuiltinFailure::Type(message) => Error::TypeMismatch {
                        builtin: prod.builtin.name.clone(),
                        node: self.display(g).to_string(),
                        message,
                    },
                })
            }
        }
    }

    /// `p[x⃗]`, elementwise; errors carry the example index.
    pub fn evaluate_vec(&self, g: &Grammar, xs: &[InputEnv]) -> Result<Vec<Value>> {
        xs.iter()
            .enumerate()
            .map(|(i, env)| self.evaluate(g, env).map_err(|e| e.at_example(i)))
            .collect()
    }

    /// `Cost(p)`: terminal cost at leaves, builtin cost plus the children's
    /// costs (left to right) at nodes.
    pub fn complexity<S: Scalar>(&self, g: &Grammar, costs: &CostModel<S>) -> Result<S> {
        match self {
            Program::Leaf(t) => Ok(costs.terminal_cost(*t)),
            Program::Node(pid, kids) => {
                let name = &g.production(*pid).builtin.name;
                let mut c = costs
                    .builtin_cost(name)
                    .ok_or_else(|| Error::Config(format!("missing cost entry for `{name}`")))?;
                for k in kids {
                    c = c + k.complexity(g, costs)?;
                }
                Ok(c)
            }
        }
    }

    /// `Cost(p)` under a name-keyed cost map that must cover every terminal
    /// and builtin of the grammar.
    pub fn complexity_with(&self, g: &Grammar, costs: &BTreeMap<String, f64>) -> Result<f64> {
        self.complexity(g, &CostModel::from_map(g, costs)?)
    }

    /// Checks that the tree is a derivation from `slot`.
    pub fn conforms(&self, g: &Grammar, slot: Symbol) -> Result<()> {
        let fail = |what: String| Err(Error::Nonconforming(what));
        match self {
            Program::Leaf(t) => {
                if t.0 >= g.terminals().len() {
                    return fail(format!("unknown terminal #{}", t.0));
                }
                if !g.terminals_for(slot).contains(t) {
                    return fail(format!(
                        "terminal `{}` cannot stand for `{}`",
                        g.terminal(*t).name,
                        g.symbol_name(slot)
                    ));
                }
                Ok(())
            }
            Program::Node(pid, kids) => {
                if pid.0 >= g.productions().len() {
                    return fail(format!("unknown production #{}", pid.0));
                }
                let prod = g.production(*pid);
                if slot != Symbol::Nonterminal(prod.lhs) {
                    return fail(format!(
                        "production `{}` cannot stand for `{}`",
                        prod.name,
                        g.symbol_name(slot)
                    ));
                }
                if kids.len() != prod.rhs.len() {
                    return fail(format!("production `{}` given {} children", prod.name, kids.len()));
                }
                kids.iter()
                    .zip(&prod.rhs)
                    .try_for_each(|(k, s)| k.conforms(g, *s))
            }
        }
    }

    /// Printable s-expression view.
    pub fn display<'a>(&'a self, g: &'a Grammar) -> ProgramDisplay<'a> {
        ProgramDisplay { program: self, grammar: g }
    }

    /// Parses an s-expression rooted at the grammar's start symbol.
    pub fn parse(g: &Grammar, text: &str) -> Result<Program> {
        Self::parse_at(g, text, Symbol::Nonterminal(g.start()))
    }

    /// Parses an s-expression derivable from `slot`. When a tree has more
    /// than one derivation the one with the smallest production indices
    /// wins.
    pub fn parse_at(g: &Grammar, text: &str, slot: Symbol) -> Result<Program> {
        let err = |message: String| Error::ProgramParse {
            input: text.to_string(),
            message,
        };
        let tokens = tokenize(text).map_err(err)?;
        let mut pos = 0;
        let sexp = read_sexp(&tokens, &mut pos).map_err(err)?;
        if pos != tokens.len() {
            return Err(err("trailing input".into()));
        }
        resolve(g, &sexp, slot)
            .into_iter()
            .next()
            .ok_or_else(|| err(format!("no derivation from `{}`", g.symbol_name(slot))))
    }
}

pub struct ProgramDisplay<'a> {
    program: &'a Program,
    grammar: &'a Grammar,
}

impl fmt::Display for ProgramDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.program {
            Program::Leaf(t) => f.write_str(&self.grammar.terminal(*t).literal()),
            Program::Node(pid, kids) => {
                write!(f, "({}", self.grammar.production(*pid).builtin.name)?;
                for k in kids {
                    write!(f, " {}", k.display(self.grammar))?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
    Str(String),
}

fn tokenize(text: &str) -> std::result::Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Token::Open);
            }
            ')' => {
                chars.next();
                out.push(Token::Close);
            }
            '"' => {
                chars.next();
                let mut end = None;
                let mut escaped = false;
                for (j, c) in chars.by_ref() {
                    if escaped {
                        escaped = false;
                    } else if c == '\\' {
                        escaped = true;
                    } else if c == '"' {
                        end = Some(j);
                        break;
                    }
                }
                let end = end.ok_or("unterminated string literal")?;
                let s: String = serde_json::from_str(&text[i..=end]).map_err(|e| e.to_string())?;
                out.push(Token::Str(s));
            }
            _ => {
                let mut atom = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                }
                out.push(Token::Atom(atom));
            }
        }
    }
    Ok(out)
}

enum Sexp {
    Atom(String),
    Str(String),
    List(String, Vec<Sexp>),
}

fn read_sexp(tokens: &[Token], pos: &mut usize) -> std::result::Result<Sexp, String> {
    let tok = tokens.get(*pos).ok_or("unexpected end of input")?;
    *pos += 1;
    match tok {
        Token::Atom(a) => Ok(Sexp::Atom(a.clone())),
        Token::Str(s) => Ok(Sexp::Str(s.clone())),
        Token::Close => Err("unexpected `)`".into()),
        Token::Open => {
            let head = match tokens.get(*pos) {
                Some(Token::Atom(a)) => a.clone(),
                _ => return Err("expected a builtin name after `(`".into()),
            };
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err("missing `)`".into()),
                    Some(Token::Close) => {
                        *pos += 1;
                        return Ok(Sexp::List(head, args));
                    }
                    Some(_) => args.push(read_sexp(tokens, pos)?),
                }
            }
        }
    }
}

fn leaf_matches(g: &Grammar, t: TerminalId, sexp: &Sexp) -> bool {
    let term = g.terminal(t);
    match (sexp, &term.kind) {
        (Sexp::Str(s), TerminalKind::Const(Value::Str(v))) => s == v,
        (Sexp::Atom(a), TerminalKind::Var(x)) => a == x,
        (Sexp::Atom(a), TerminalKind::Const(v @ (Value::Int(_) | Value::Bool(_)))) => {
            *a == v.to_string()
        }
        _ => false,
    }
}

// Every derivation of `sexp` from `slot`, in tie-break order.
fn resolve(g: &Grammar, sexp: &Sexp, slot: Symbol) -> Vec<Program> {
    match sexp {
        Sexp::Atom(_) | Sexp::Str(_) => g
            .terminals_for(slot)
            .into_iter()
            .filter(|t| leaf_matches(g, *t, sexp))
            .map(Program::Leaf)
            .collect(),
        Sexp::List(head, args) => {
            let mut out = Vec::new();
            for pid in g.productions_for(slot) {
                let prod = g.production(pid);
                if &prod.builtin.name != head || prod.rhs.len() != args.len() {
                    continue;
                }
                let options: Vec<Vec<Program>> = args
                    .iter()
                    .zip(&prod.rhs)
                    .map(|(a, s)| resolve(g, a, *s))
                    .collect();
                if options.iter().any(Vec::is_empty) {
                    continue;
                }
                for kids in cartesian(&options) {
                    out.push(Program::Node(pid, kids));
                }
            }
            out
        }
    }
}

fn cartesian(options: &[Vec<Program>]) -> Vec<Vec<Program>> {
    let mut acc: Vec<Vec<Program>> = vec![Vec::new()];
    for opts in options {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    acc
}

/// Number of programs of height ≤ `d` per slot symbol, saturating.
fn count_table(g: &Grammar, d: usize) -> Vec<BTreeMap<Symbol, u128>> {
    let syms = g.slot_symbols();
    // le[h][s]: programs of height <= h
    let mut le: Vec<BTreeMap<Symbol, u128>> = Vec::new();
    for h in 0..=d {
        let mut row = BTreeMap::new();
        for &s in &syms {
            let leaves = g.terminals_for(s).len() as u128;
            let mut total = leaves;
            if h > 0 {
                for pid in g.productions_for(s) {
                    let rhs = &g.production(pid).rhs;
                    let all: u128 = rhs
                        .iter()
                        .fold(1u128, |a, r| a.saturating_mul(le[h - 1][r]));
                    total = total.saturating_add(all);
                }
            }
            row.insert(s, total);
        }
        le.push(row);
    }
    le
}

/// How many programs of height ≤ `d` derive from the start symbol
/// (saturating at `u128::MAX`).
pub fn count_programs(g: &Grammar, d: usize) -> u128 {
    count_table(g, d)[d][&Symbol::Nonterminal(g.start())]
}

/// Every program of height ≤ `d` rooted at the start symbol, each once,
/// ordered by height, then production index, then children.
pub fn enumerate_programs(g: &Grammar, d: usize) -> Vec<Program> {
    enumerate_at(g, d, Symbol::Nonterminal(g.start()))
}

/// [`enumerate_programs`] guarded by a cap on the program count.
pub fn enumerate_programs_capped(g: &Grammar, d: usize, cap: u128) -> Result<Vec<Program>> {
    let n = count_programs(g, d);
    if n > cap {
        return Err(Error::CapExceeded {
            what: format!("{n} programs of height <= {d}"),
            cap,
        });
    }
    Ok(enumerate_programs(g, d))
}

/// Every program of height ≤ `d` derivable from `slot`.
pub fn enumerate_at(g: &Grammar, d: usize, slot: Symbol) -> Vec<Program> {
    let syms = g.slot_symbols();
    // exact[h][s]: programs of height exactly h
    let mut exact: Vec<BTreeMap<Symbol, Vec<Program>>> = Vec::new();
    // upto[s]: programs of height <= h-1, grown each level
    let mut upto: BTreeMap<Symbol, Vec<Program>> = syms.iter().map(|s| (*s, Vec::new())).collect();
    for h in 0..=d {
        let mut row: BTreeMap<Symbol, Vec<Program>> = BTreeMap::new();
        for &s in &syms {
            let mut progs: Vec<Program> = Vec::new();
            if h == 0 {
                progs.extend(g.terminals_for(s).into_iter().map(Program::Leaf));
            } else {
                for pid in g.productions_for(s) {
                    let rhs = &g.production(pid).rhs;
                    let options: Vec<Vec<Program>> = rhs.iter().map(|r| upto[r].clone()).collect();
                    for kids in cartesian(&options) {
                        if kids.iter().any(|k| k.height() == h - 1) {
                            progs.push(Program::Node(pid, kids));
                        }
                    }
                }
            }
            row.insert(s, progs);
        }
        for (s, progs) in &row {
            upto.get_mut(s).expect("slot symbol").extend(progs.iter().cloned());
        }
        exact.push(row);
    }
    exact.into_iter().flat_map(|mut row| row.remove(&slot).unwrap_or_default()).collect()
}
