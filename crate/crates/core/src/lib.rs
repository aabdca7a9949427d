//! Programming by example over noisy data.
//!
//! A weighted grammar defines both the program space and the prior over
//! it. Given inputs `x⃗` and noisy outputs `y⃗`, [`synthesize`] builds a
//! finite tree automaton whose accepting states are the observational
//! equivalence classes of programs on `x⃗`, picks the class minimizing
//! `L(c⃗, y⃗) − ln π(c⃗)` and extracts its least complex program.
//!
//! ```
//! use noisy_synth::{Grammar, LossFn, Problem, Value};
//! use noisy_synth::value::env;
//!
//! let g = Grammar::from_json(r#"{
//!     "nonterminals": ["n", "t"],
//!     "start": "n",
//!     "terminals": [
//!         {"var": "x", "lhs": ["n"]},
//!         {"const": 2, "lhs": ["t"]},
//!         {"const": 3, "lhs": ["t"]}
//!     ],
//!     "productions": [
//!         {"lhs": "n", "fn": "+", "rhs": ["n", "t"]},
//!         {"lhs": "n", "fn": "×", "rhs": ["n", "t"]}
//!     ]
//! }"#).unwrap();
//! let problem = Problem::new(&g, 2, LossFn::ZeroOne, vec![env([("x", 1)])], vec![Value::Int(6)]);
//! let result = noisy_synth::synthesize(&problem).unwrap();
//! assert_eq!(result.outputs, vec![Value::Int(6)]);
//! ```
//!
//! Numeric code is generic over the scalar: `f32`, `f64`, log-space
//! weights and exact rationals (for weight tables). The aliases below fix
//! it to `f64`.

pub mod builtins;
pub mod distance;
pub mod error;
pub mod experiments;
pub mod fta;
pub mod grammar;
pub mod loss;
pub mod noise;
pub mod prior;
pub mod program;
pub mod scalar;
pub mod seeds;
pub mod synth;
pub mod value;

pub use builtins::{Builtin, BuiltinRegistry};
pub use distance::{dl_metric, DistanceFn};
pub use error::{Error, Result};
pub use fta::{Fta, StateId};
pub use grammar::{CostModel, Grammar, Symbol};
pub use loss::LossFn;
pub use noise::NoiseModel;
pub use program::Program;
pub use scalar::{LogWeight, Scalar, Semiring};
pub use synth::{oracle_synthesize, synthesize, SynthesisProblem, SynthesisResult};
pub use value::{InputEnv, Value};

pub type Problem = SynthesisProblem<f64>;
pub type Outcome = SynthesisResult<f64>;
pub type Costs = CostModel<f64>;
pub type PriorF64 = prior::Prior<f64>;
