//! Built-in DSL functions, registered by name with an arity and a type
//! signature.

use std::collections::BTreeMap;
use std::fmt;

use crate::value::{Ty, Value};

/// Why a builtin refused its arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinFailure {
    Overflow,
    Type(String),
}

pub type BuiltinFn = fn(&[Value]) -> Result<Value, BuiltinFailure>;

/// A named black-box function usable in grammar productions.
#[derive(Clone)]
pub struct Builtin {
    pub name: String,
    pub params: Vec<Ty>,
    pub ret: Ty,
    pub func: BuiltinFn,
}

impl Builtin {
    pub fn new(name: impl Into<String>, params: Vec<Ty>, ret: Ty, func: BuiltinFn) -> Self {
        Builtin {
            name: name.into(),
            params,
            ret,
            func,
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Checks the signature, then applies the function.
    pub fn apply(&self, args: &[Value]) -> Result<Value, BuiltinFailure> {
        if args.len() != self.params.len() {
            return Err(BuiltinFailure::Type(format!(
                "expected {} arguments, got {}",
                self.params.len(),
                args.len()
            )));
        }
        for (i, (arg, ty)) in args.iter().zip(&self.params).enumerate() {
            if arg.ty() != *ty {
                return Err(BuiltinFailure::Type(format!(
                    "argument {i} is {} `{arg}`, expected {ty}",
                    arg.ty()
                )));
            }
        }
        (self.func)(args)
    }
}

impl fmt::Debug for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Builtin")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("ret", &self.ret)
            .finish()
    }
}

impl PartialEq for Builtin {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.ret == other.ret
    }
}

fn int_pair(args: &[Value]) -> Result<(i64, i64), BuiltinFailure> {
    match args {
        [Value::Int(a), Value::Int(b)] => Ok((*a, *b)),
        _ => Err(BuiltinFailure::Type("expected two ints".into())),
    }
}

fn str_pair(args: &[Value]) -> Result<(&str, &str), BuiltinFailure> {
    match args {
        [Value::Str(a), Value::Str(b)] => Ok((a, b)),
        _ => Err(BuiltinFailure::Type("expected two strings".into())),
    }
}

fn add(args: &[Value]) -> Result<Value, BuiltinFailure> {
    let (a, b) = int_pair(args)?;
    a.checked_add(b).map(Value::Int).ok_or(BuiltinFailure::Overflow)
}

fn mul(args: &[Value]) -> Result<Value, BuiltinFailure> {
    let (a, b) = int_pair(args)?;
    a.checked_mul(b).map(Value::Int).ok_or(BuiltinFailure::Overflow)
}

fn concat(args: &[Value]) -> Result<Value, BuiltinFailure> {
    let (a, b) = str_pair(args)?;
    Ok(Value::Str(format!("{a}{b}")))
}

// append(prefix, s) puts `prefix` in front of `s`
fn append(args: &[Value]) -> Result<Value, BuiltinFailure> {
    let (prefix, s) = str_pair(args)?;
    Ok(Value::Str(format!("{prefix}{s}")))
}

fn ite(args: &[Value]) -> Result<Value, BuiltinFailure> {
    match args {
        [Value::Bool(c), then, otherwise] => Ok(if *c { then.clone() } else { otherwise.clone() }),
        _ => Err(BuiltinFailure::Type("expected a bool condition".into())),
    }
}

/// Name-indexed set of builtins available to grammar files.
#[derive(Clone, Debug)]
pub struct BuiltinRegistry {
    by_name: BTreeMap<String, Builtin>,
}

impl BuiltinRegistry {
    pub fn empty() -> Self {
        BuiltinRegistry {
            by_name: BTreeMap::new(),
        }
    }

    /// Integer `+`, `*` (also spelled `×`), string `concat`, `append`, and
    /// `ite` over strings.
    pub fn standard() -> Self {
        use Ty::*;
        let mut r = Self::empty();
        r.register(Builtin::new("+", vec![Int, Int], Int, add));
        r.register(Builtin::new("*", vec![Int, Int], Int, mul));
        r.register(Builtin::new("×", vec![Int, Int], Int, mul));
        r.register(Builtin::new("concat", vec![Str, Str], Str, concat));
        r.register(Builtin::new("append", vec![Str, Str], Str, append));
        r.register(Builtin::new("ite", vec![Bool, Str, Str], Str, ite));
        r
    }

    /// Adds or replaces a builtin.
    pub fn register(&mut self, builtin: Builtin) {
        self.by_name.insert(builtin.name.clone(), builtin);
    }

    pub fn get(&self, name: &str) -> Option<&Builtin> {
        self.by_name.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.by_name.keys().map(String::as_str)
    }
}

impl Default for BuiltinRegistry {
    fn default() -> Self {
        Self::standard()
    }
}
