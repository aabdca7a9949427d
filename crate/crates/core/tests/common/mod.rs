#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use noisy_synth::experiments::InputSource;
use noisy_synth::loss::LossFn;
use noisy_synth::noise::NoiseModel;
use noisy_synth::program::enumerate_programs;
use noisy_synth::{seeds, Grammar, InputEnv, Problem, Value};

pub fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn grammar(name: &str) -> Grammar {
    Grammar::load(repo().join("grammars").join(format!("{name}.json"))).unwrap()
}

pub fn config(name: &str) -> PathBuf {
    repo().join("configs").join(format!("{name}.json"))
}

/// The grammar with every weight redrawn from `[0.1, 5)`.
pub fn reweight(g: &Grammar, rng: &mut ChaCha8Rng) -> Grammar {
    let tw: Vec<f64> = g.terminals().iter().map(|_| rng.random_range(0.1..5.0)).collect();
    let pw: Vec<f64> = g.productions().iter().map(|_| rng.random_range(0.1..5.0)).collect();
    g.with_weight_vectors(&tw, &pw).unwrap()
}

pub fn random_string(rng: &mut ChaCha8Rng, alphabet: &str, lo: usize, hi: usize) -> String {
    let chars: Vec<char> = alphabet.chars().collect();
    let len = rng.random_range(lo..=hi);
    (0..len).map(|_| chars[rng.random_range(0..chars.len())]).collect()
}

pub fn string_noises(rng: &mut ChaCha8Rng) -> NoiseModel {
    let d = rng.random_range(0.05..0.5);
    match rng.random_range(0..5) {
        0 => NoiseModel::Identity,
        1 => NoiseModel::n_substitution(d, "abc"),
        2 => NoiseModel::one_delete(d),
        3 => NoiseModel::FirstCharDelete,
        _ => NoiseModel::mixture(vec![(NoiseModel::Identity, 0.5), (NoiseModel::one_delete(d), 0.5)]),
    }
}

/// Which shipped grammar an instance uses.
#[derive(Clone, Copy, Debug)]
pub enum Family {
    Arith,
    Strings,
    StringsAb,
}

/// A random synthesis problem: random weights, inputs, a hidden program's
/// outputs pushed through random noise (or replaced by junk), and a
/// random loss suited to the output type.
pub fn random_instance(family: Family, seed: u64) -> Problem {
    let mut rng = seeds::rng(seed);
    let (base, depth) = match family {
        Family::Arith => (grammar("arith"), rng.random_range(1..=3)),
        Family::Strings => (grammar("strings"), rng.random_range(1..=3)),
        Family::StringsAb => (grammar("strings_ab"), 2),
    };
    let g = reweight(&base, &mut rng);
    let n = rng.random_range(1..=3);
    let source = match family {
        Family::Arith => InputSource::IntUniform { var: "x".into(), lo: -4, hi: 6 },
        Family::Strings => InputSource::StrRandom {
            var: "x".into(),
            alphabet: "abc".into(),
            min_len: 0,
            max_len: 3,
        },
        Family::StringsAb => InputSource::Product {
            sources: vec![
                InputSource::StrRandom {
                    var: "x".into(),
                    alphabet: "ab".into(),
                    min_len: 0,
                    max_len: 3,
                },
                InputSource::BoolBernoulli { var: "b".into(), p: 0.5 },
            ],
        },
    };
    let inputs: Vec<InputEnv> = source.sample(n, rng.random());
    let programs = enumerate_programs(&g, depth);
    let hidden = &programs[rng.random_range(0..programs.len())];
    let clean = hidden.evaluate_vec(&g, &inputs).unwrap();
    let (outputs, loss) = match family {
        Family::Arith => {
            let y: Vec<Value> = clean
                .iter()
                .map(|v| match v {
                    Value::Int(i) if rng.random_bool(0.3) => Value::Int(i + rng.random_range(-2..=2)),
                    other => other.clone(),
                })
                .collect();
            let loss = if rng.random_bool(0.5) { LossFn::ZeroOne } else { LossFn::ZeroInfty };
            (y, loss)
        }
        _ => {
            let noise = string_noises(&mut rng);
            let mut y = noise.corrupt(&clean, rng.random()).unwrap();
            if rng.random_bool(0.1) {
                y[0] = Value::Str(random_string(&mut rng, "abc", 0, 4));
            }
            let d = rng.random_range(0.05..0.5);
            let loss = match rng.random_range(0..7) {
                0 => LossFn::ZeroOne,
                1 => LossFn::ZeroInfty,
                2 => LossFn::n_substitution(d),
                3 => LossFn::one_delete(d),
                4 => LossFn::Dl,
                5 => LossFn::Ab,
                _ => LossFn::Optimal { noise },
            };
            (y, loss)
        }
    };
    Problem::new(&g, depth, loss, inputs, outputs)
}
