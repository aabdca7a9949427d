mod common;

use common::{config, grammar};
use noisy_synth::distance::DistanceFn;
use noisy_synth::experiments::config::ExperimentConfig;
use noisy_synth::experiments::report::{render_csv, CSV_HEADER};
use noisy_synth::experiments::{
    check_input_differentiating, check_noise_differentiating, estimate_convergence, export_report, read_report,
    ConvergenceReport, EquivalenceChecker, InputSource,
};
use noisy_synth::noise::NoiseModel;
use noisy_synth::value::env;
use noisy_synth::{LossFn, Program, Value};

fn int_domain() -> EquivalenceChecker {
    EquivalenceChecker::for_source(&InputSource::IntUniform { var: "x".into(), lo: -10, hi: 10 })
}

fn categorical(xs: &[i64], probs: Option<Vec<f64>>) -> InputSource {
    InputSource::Categorical {
        envs: xs.iter().map(|&x| env([("x", x)])).collect(),
        probs,
    }
}

#[test]
fn input_source_avoiding_the_separating_input_never_differentiates() {
    let g = grammar("arith");
    let hidden = Program::parse(&g, "(× x 2)").unwrap();
    // at x = 0 every program without an addition collapses to 0
    for n in [1, 5, 20] {
        let e = check_input_differentiating(
            &g, 1, &categorical(&[0], None), &int_domain(), &DistanceFn::Counting, &hidden, n, 1, 100, 3,
        )
        .unwrap();
        assert_eq!(e.successes, 0);
    }
}

#[test]
fn rarely_separating_source_stays_below_its_rate() {
    let g = grammar("arith");
    let hidden = Program::parse(&g, "(× x 2)").unwrap();
    let src = categorical(&[0, 5], Some(vec![0.95, 0.05]));
    let e = check_input_differentiating(&g, 1, &src, &int_domain(), &DistanceFn::Counting, &hidden, 1, 1, 2000, 8)
        .unwrap();
    assert!(e.ci_lo < 0.05 && 0.05 < e.ci_hi, "{e:?}");
    assert!(e.p_hat < 0.1);
}

#[test]
fn always_separating_source_differentiates() {
    let g = grammar("arith");
    let hidden = Program::parse(&g, "(+ x 3)").unwrap();
    let e = check_input_differentiating(
        &g, 1, &categorical(&[5], None), &int_domain(), &DistanceFn::Counting, &hidden, 1, 1, 50, 0,
    )
    .unwrap();
    assert_eq!(e.p_hat, 1.0);
}

#[test]
fn identity_noise_is_differentiating() {
    let g = grammar("arith");
    let xs: Vec<_> = [1, 2, 3].iter().map(|&x| env([("x", x)])).collect();
    let zh = Program::parse(&g, "(+ x 2)").unwrap().evaluate_vec(&g, &xs).unwrap();
    for gamma in [0.1, 10.0] {
        let e = check_noise_differentiating(
            &g, 2, &xs, &NoiseModel::Identity, &LossFn::ZeroInfty, &DistanceFn::Counting, &zh, gamma, 1, 50, 1,
        )
        .unwrap();
        assert_eq!(e.p_hat, 1.0);
    }
}

fn string_inputs(n: usize, seed: u64) -> Vec<noisy_synth::InputEnv> {
    InputSource::StrRandom {
        var: "x".into(),
        alphabet: "abc".into(),
        min_len: 1,
        max_len: 4,
    }
    .sample(n, seed)
}

#[test]
fn one_delete_with_its_loss_is_differentiating_under_dl2() {
    let g = grammar("strings");
    let xs = string_inputs(6, 4);
    let zh = Program::parse(&g, r#"(append "a" (concat x "b"))"#).unwrap().evaluate_vec(&g, &xs).unwrap();
    let e = check_noise_differentiating(
        &g,
        2,
        &xs,
        &NoiseModel::one_delete(0.2),
        &LossFn::one_delete(0.2),
        &DistanceFn::DlK { k: 2 },
        &zh,
        1.0,
        1,
        300,
        5,
    )
    .unwrap();
    assert_eq!(e.p_hat, 1.0);
}

#[test]
fn one_delete_under_substitution_loss_needs_no_deletions() {
    let g = grammar("strings");
    let xs = string_inputs(10, 6);
    let zh = Program::parse(&g, r#"(concat x "a")"#).unwrap().evaluate_vec(&g, &xs).unwrap();
    let e = check_noise_differentiating(
        &g,
        2,
        &xs,
        &NoiseModel::one_delete(0.3),
        &LossFn::n_substitution(0.3),
        &DistanceFn::Counting,
        &zh,
        1.0,
        1,
        1000,
        7,
    )
    .unwrap();
    let no_deletion = 0.7f64.powi(10);
    assert!(e.p_hat <= no_deletion + (e.ci_hi - e.p_hat), "{e:?} vs {no_deletion}");
}

#[test]
fn noise_free_arithmetic_converges() {
    let r = estimate_convergence(&ExperimentConfig::load(config("arith_identity")).unwrap(), Some(2)).unwrap();
    let last = r.rows.last().unwrap();
    assert_eq!(last.n, 20);
    assert!(last.p_hat >= 0.99, "{last:?}");
    assert!(r.meta.exhaustive_equivalence);
}

#[test]
fn failing_trials_are_counted_as_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::load(config("arith_identity")).unwrap();
    c.input_source = InputSource::IntUniform {
        var: "x".into(),
        lo: i64::MAX - 1,
        hi: i64::MAX,
    };
    c.hidden = Some(noisy_synth::experiments::HiddenSpec::One("(+ x 3)".into()));
    c.n_grid = vec![2];
    c.trials = 10;
    c.grammar = std::fs::canonicalize(&c.grammar).unwrap();
    let r = estimate_convergence(&c, Some(1)).unwrap();
    let row = &r.rows[0];
    assert_eq!((row.trials, row.successes, row.errors), (0, 0, 10));
    assert!(r.meta.error_samples[0].contains("overflow"), "{:?}", r.meta.error_samples);
    export_report(&r, dir.path().join("r.csv")).unwrap();
}

#[test]
fn zero_trials_is_a_configuration_error() {
    let mut c = ExperimentConfig::load(config("arith_identity")).unwrap();
    c.trials = 0;
    let e = estimate_convergence(&c, None).unwrap_err();
    assert!(e.is_validation());
}

fn small(name: &str) -> ConvergenceReport {
    let mut c = ExperimentConfig::load(config(name)).unwrap();
    c.trials = 20;
    estimate_convergence(&c, Some(3)).unwrap()
}

#[test]
fn reports_round_trip_and_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let r = small("c7_first_char_pab");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    export_report(&r, &a).unwrap();
    export_report(&small("c7_first_char_pab"), &b).unwrap();
    assert_eq!(read_report(&a).unwrap(), r);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(a.with_extension("json")).unwrap(),
        std::fs::read(b.with_extension("json")).unwrap()
    );
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with(&(CSV_HEADER.join(",") + "\n")));
}

#[test]
fn empty_grid_gives_a_header_only_csv() {
    let csv = render_csv(&[]).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), "n,trials,successes,p_hat,ci_lo,ci_hi\n");
}

#[test]
fn tampered_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    export_report(&small("c5b_delete_one_delete"), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap().replacen(",20,", ",19,", 1);
    std::fs::write(&path, text).unwrap();
    assert!(read_report(&path).is_err());
}

#[test]
fn thread_count_does_not_change_results() {
    let mut c = ExperimentConfig::load(config("c5c_delete_dl")).unwrap();
    c.trials = 30;
    c.n_grid = vec![1, 3, 8];
    let one = estimate_convergence(&c, Some(1)).unwrap();
    let many = estimate_convergence(&c, Some(5)).unwrap();
    assert_eq!(one, many);
}

#[test]
fn fixed_hidden_programs_get_their_own_curves() {
    let r = small("c9_converge_bfalse");
    assert_eq!(r.per_program.len(), 2);
    assert_eq!(r.meta.aggregate, "worst_case");
    for c in &r.per_program {
        assert!(c.rows.iter().all(|row| row.p_hat == 1.0));
    }
    let g = grammar("strings_ab");
    let xs = vec![env([("x", Value::str("c")), ("b", Value::Bool(false))])];
    assert_eq!(
        Program::parse(&g, &r.per_program[1].hidden).unwrap().evaluate_vec(&g, &xs).unwrap(),
        vec![Value::str("bbc")]
    );
}
