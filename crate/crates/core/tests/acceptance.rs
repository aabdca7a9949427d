//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

mod common;

use std::time::Instant;

use rand::Rng;

use common::{config, grammar, random_instance, random_string, reweight, Family};
use noisy_synth::experiments::config::{ExperimentConfig, NoiseDiffConfig};
use noisy_synth::experiments::convergence::{curve_row, ConvergenceRow};
use noisy_synth::experiments::{
    check_noise_differentiating, estimate_convergence, expected_rewards, export_report, ConvergenceReport,
};
use noisy_synth::loss::{loss_n_substitution, optimal_loss, zero_infty};
use noisy_synth::noise::{Delta, NoiseModel};
use noisy_synth::prior::Prior;
use noisy_synth::program::enumerate_programs;
use noisy_synth::synth::oracle_classes;
use noisy_synth::value::env;
use noisy_synth::{oracle_synthesize, seeds, synthesize, Fta, LossFn, Problem, Program, Value};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let criteria: Vec<(u32, fn() -> Verdict)> = vec![
        (1, fig4),
        (2, oracle_equivalence),
        (3, pi_correctness),
        (4, optimal_loss_identities),
        (5, convergence),
        (6, non_convergence),
        (7, trade_off),
        (8, optimal_beats_dl),
        (9, metric_necessity),
        (10, determinism),
    ];
    let mut failed = Vec::new();
    for (k, check) in criteria {
        let started = Instant::now();
        let v = check();
        let secs = started.elapsed().as_secs_f64();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {k}: {status} ({secs:.2}s) {}", v.detail);
        if !v.pass {
            failed.push(k);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}

/// Edges of the figure as `(builtin, source value, constant, target value)`.
const FIG4_EDGES: [(&str, i64, i64, i64); 16] = [
    ("+", 1, 2, 3),
    ("×", 1, 3, 3),
    ("×", 1, 2, 2),
    ("+", 1, 3, 4),
    ("+", 2, 2, 4),
    ("×", 2, 2, 4),
    ("×", 2, 3, 6),
    ("+", 2, 3, 5),
    ("×", 3, 2, 6),
    ("+", 3, 3, 6),
    ("+", 3, 2, 5),
    ("×", 3, 3, 9),
    ("×", 4, 2, 8),
    ("+", 4, 2, 6),
    ("×", 4, 3, 12),
    ("+", 4, 3, 7),
];

fn int(v: &[Value]) -> i64 {
    match v {
        [Value::Int(i)] => *i,
        other => panic!("expected one integer, got {other:?}"),
    }
}

fn fig4() -> Verdict {
    let started = Instant::now();
    let g = grammar("arith");
    let fta = Fta::build(&g, &[env([("x", 1)])], 2).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let accepting: Vec<i64> = {
        let mut v: Vec<i64> = fta.accepting().iter().map(|&q| int(&fta.state(q).values)).collect();
        v.sort();
        v
    };
    let mut got: Vec<(String, i64, i64, i64)> = fta
        .transitions()
        .iter()
        .map(|t| {
            let b = g.production(t.production).builtin.name.clone();
            let src = int(&fta.state(t.args[0]).values);
            let k = int(&fta.state(t.args[1]).values);
            (b, src, k, int(&fta.state(t.dst).values))
        })
        .collect();
    got.sort();
    let mut want: Vec<(String, i64, i64, i64)> =
        FIG4_EDGES.iter().map(|&(b, s, k, d)| (b.to_string(), s, k, d)).collect();
    want.sort();
    let values_ok = accepting == vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 12];
    let edges_ok = got == want;
    verdict(
        values_ok && edges_ok && elapsed < 1.0,
        format!(
            "accepting values {accepting:?}; {} transitions, multiset {}; build {elapsed:.4}s",
            got.len(),
            if edges_ok { "matches" } else { "differs" }
        ),
    )
}

fn instances() -> Vec<(Family, u64)> {
    let mut v = Vec::new();
    for i in 0..300 {
        v.push((Family::Arith, seeds::mix(1, i)));
    }
    for i in 0..150 {
        v.push((Family::Strings, seeds::mix(2, i)));
    }
    for i in 0..100 {
        v.push((Family::StringsAb, seeds::mix(3, i)));
    }
    v
}

fn same_objective(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

fn oracle_equivalence() -> Verdict {
    let started = Instant::now();
    let all = instances();
    let mut bad = Vec::new();
    for (family, seed) in &all {
        let p = random_instance(*family, *seed);
        let (r, o) = (synthesize(&p).unwrap(), oracle_synthesize(&p).unwrap());
        if r.outputs != o.outputs || !same_objective(r.objective, o.objective) || r.program != o.program {
            bad.push(format!("{family:?}/{seed}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        bad.is_empty() && secs < 120.0,
        format!("{} instances, {} disagreements {:?}", all.len(), bad.len(), &bad[..bad.len().min(5)]),
    )
}

fn pi_correctness() -> Verdict {
    let mut states = 0;
    let mut worst = 0.0f64;
    for (family, seed) in instances() {
        let p = random_instance(family, seed);
        let fta = Fta::build(&p.grammar, &p.inputs, p.depth).unwrap();
        let table = fta.weights::<f64>();
        let brute = oracle_classes(&p.grammar, p.depth, &p.inputs).unwrap();
        let total: f64 = brute.values().map(|(w, _)| w).sum();
        let pis = fta.pi_all(&table).unwrap();
        if pis.len() != brute.len() {
            return verdict(false, format!("{family:?}/{seed}: {} classes vs {}", pis.len(), brute.len()));
        }
        for (q, pi) in pis {
            let Some((w, _)) = brute.get(&fta.state(q).values) else {
                return verdict(false, format!("{family:?}/{seed}: class missing from brute force"));
            };
            worst = worst.max((pi - w / total).abs());
            states += 1;
        }
    }
    verdict(worst <= 1e-9, format!("{states} accepting states, max |π - brute force| = {worst:e}"))
}

fn optimal_loss_identities() -> Verdict {
    let mut rng = seeds::rng(44);
    let mut pointwise_bad = 0;
    let mut max_diff = 0.0f64;
    for _ in 0..2000 {
        let n = rng.random_range(1..=3);
        let z: Vec<Value> = (0..n).map(|_| Value::Str(random_string(&mut rng, "ab", 0, 4))).collect();
        let y: Vec<Value> = if rng.random_bool(0.3) {
            z.clone()
        } else {
            (0..n).map(|_| Value::Str(random_string(&mut rng, "ab", 0, 4))).collect()
        };
        let a: f64 = optimal_loss(&NoiseModel::Identity, &z, &y).unwrap();
        let b: f64 = zero_infty(&z, &y).unwrap();
        if a != b {
            pointwise_bad += 1;
        }
        let d = rng.random_range(0.01..0.99);
        let a: f64 = optimal_loss(&NoiseModel::n_substitution(d, "ab"), &z, &y).unwrap();
        let b: f64 = loss_n_substitution(&Delta::Const(d), &z, &y).unwrap();
        if a.is_infinite() || b.is_infinite() {
            if a != b {
                pointwise_bad += 1;
            }
        } else {
            max_diff = max_diff.max((a - b).abs());
        }
    }
    let pointwise_ok = pointwise_bad == 0 && max_diff <= 1e-12;

    let mut violations = 0;
    for i in 0..200u64 {
        let mut rng = seeds::rng(seeds::mix(45, i));
        let g = reweight(&grammar("strings"), &mut rng);
        let depth = rng.random_range(1..=2);
        let n = rng.random_range(1..=3);
        let xs: Vec<_> = (0..n)
            .map(|_| env([("x", Value::Str(random_string(&mut rng, "abc", 1, 3)))]))
            .collect();
        let noise = common::string_noises(&mut rng);
        let programs = enumerate_programs(&g, depth);
        let hidden = &programs[rng.random_range(0..programs.len())];
        let ys = noise.corrupt(&hidden.evaluate_vec(&g, &xs).unwrap(), rng.random()).unwrap();
        let problem = Problem::new(&g, depth, LossFn::Optimal { noise: noise.clone() }, xs.clone(), ys.clone());
        let chosen = synthesize(&problem).unwrap().outputs;
        let rewards = expected_rewards(&Prior::<f64>::new(&g, depth).unwrap(), &noise, &xs, &ys).unwrap();
        let best = rewards.values().cloned().fold(0.0, f64::max);
        if rewards[&chosen] < best - 1e-9 {
            violations += 1;
        }
    }
    verdict(
        pointwise_ok && violations == 0,
        format!(
            "identity/zero_infty and n_sub(|Σ|=2) mismatches {pointwise_bad}, max diff {max_diff:e}; \
             expected-reward violations {violations}/200"
        ),
    )
}

fn run(name: &str, jobs: Option<usize>) -> ConvergenceReport {
    estimate_convergence(&ExperimentConfig::load(config(name)).unwrap(), jobs).unwrap()
}

fn fmt_rows(rows: &[ConvergenceRow]) -> String {
    rows.iter().map(|r| format!("{}:{}", r.n, r.p_hat)).collect::<Vec<_>>().join(" ")
}

/// Reaches 0.9 within n ≤ 50 and never drops by more than the intervals
/// allow (`ci_hi[k+1] ≥ ci_lo[k]`).
fn converges(rows: &[ConvergenceRow]) -> (bool, bool) {
    let reaches = rows.iter().any(|r| r.n <= 50 && r.p_hat >= 0.9);
    let monotone = rows.windows(2).all(|w| w[1].ci_hi >= w[0].ci_lo);
    (reaches, monotone)
}

fn convergence() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["c5a_nsub_nsub", "c5b_delete_one_delete", "c5c_delete_dl"] {
        let r = run(name, None);
        let (reaches, monotone) = converges(&r.rows);
        let errors: u64 = r.rows.iter().map(|r| r.errors).sum();
        pass &= reaches && monotone && errors == 0;
        parts.push(format!("{name} [{}] reach={reaches} monotone={monotone}", fmt_rows(&r.rows)));
    }
    verdict(pass, parts.join("; "))
}

fn non_convergence() -> Verdict {
    let r = run("c6_delete_nsub", None);
    let mut pass = r.rows.len() == 3;
    let mut parts = Vec::new();
    for row in &r.rows {
        let bound = 0.7f64.powi(row.n as i32) + 0.05;
        pass &= row.ci_hi <= bound && row.errors == 0;
        parts.push(format!("n={} p̂={} ci_hi={:.4} bound={:.4}", row.n, row.p_hat, row.ci_hi, bound));
    }
    verdict(pass, parts.join("; "))
}

/// `p̂(p_a) + p̂(p_b) ≤ 1 + (upper half-width of each)` at every n.
fn trade_off_rows(r: &ConvergenceReport) -> (bool, String) {
    let [a, b] = [&r.per_program[0], &r.per_program[1]];
    let mut pass = true;
    let mut parts = Vec::new();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let sum = ra.p_hat + rb.p_hat;
        let slack = (ra.ci_hi - ra.p_hat) + (rb.ci_hi - rb.p_hat);
        pass &= sum <= 1.0 + slack && ra.errors == 0 && rb.errors == 0;
        parts.push(format!("n={} {}+{}={} <= {:.4}", ra.n, ra.p_hat, rb.p_hat, sum, 1.0 + slack));
    }
    (pass, parts.join(", "))
}

fn trade_off() -> Verdict {
    let (pass, detail) = trade_off_rows(&run("c7_first_char_pab", None));
    verdict(pass, detail)
}

fn optimal_beats_dl() -> Verdict {
    let one = run("c5b_delete_one_delete", None);
    let dl = run("c5c_delete_dl", None);
    let dominated = one
        .rows
        .iter()
        .zip(&dl.rows)
        .all(|(a, b)| a.n == b.n && a.p_hat >= b.ci_lo);
    let one4 = run("c8_delete04_one_delete", None);
    let dl4 = run("c8_delete04_dl", None);
    let strict: Vec<usize> = one4
        .rows
        .iter()
        .zip(&dl4.rows)
        .filter(|(a, b)| a.ci_lo > b.ci_hi)
        .map(|(a, _)| a.n)
        .collect();
    verdict(
        dominated && !strict.is_empty(),
        format!(
            "δ=0.1: L_1D [{}] vs L_DL [{}] dominated={dominated}; δ=0.4: L_1D [{}] vs L_DL [{}], \
             separated at n={strict:?}",
            fmt_rows(&one.rows),
            fmt_rows(&dl.rows),
            fmt_rows(&one4.rows),
            fmt_rows(&dl4.rows)
        ),
    )
}

fn noise_diff(name: &str) -> f64 {
    let c = NoiseDiffConfig::load(config(name)).unwrap();
    c.validate().unwrap();
    let g = noisy_synth::Grammar::load(&c.grammar).unwrap();
    let hidden = Program::parse(&g, &c.hidden).unwrap();
    let xs = c.input_vector();
    let zh = hidden.evaluate_vec(&g, &xs).unwrap();
    check_noise_differentiating(&g, c.depth, &xs, &c.noise, &c.loss, &c.distance, &zh, c.gamma, c.eps, c.trials, c.seed)
        .unwrap()
        .p_hat
}

fn all_one(r: &ConvergenceReport) -> bool {
    r.per_program.iter().all(|c| c.rows.iter().all(|row| row.p_hat == 1.0 && row.errors == 0))
}

fn per_program(r: &ConvergenceReport) -> String {
    r.per_program
        .iter()
        .map(|c| format!("{} [{}]", c.hidden, fmt_rows(&c.rows)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn metric_necessity() -> Verdict {
    let nd = noise_diff("c9_noise_diff_btrue_dl2");
    let conv = run("c9_converge_btrue", None);
    let conv_ok = all_one(&conv);
    let (sum_ok, sum_detail) = trade_off_rows(&run("c9_counting_pab", None));
    let counting = noise_diff("c9_noise_diff_btrue_counting");
    let nd_false = noise_diff("c9_noise_diff_bfalse_dl2");
    let conv_false = run("c9_converge_bfalse", None);
    let worst_n1 = curve_row(&conv, &conv.per_program[1].hidden, 1).map(|r| r.p_hat);
    verdict(
        nd == 1.0 && conv_ok && sum_ok,
        format!(
            "b=true: noise-diff(DL-2)={nd}, convergence {} (needs 1.0 for every hidden program; \
             worst at n=1 is {worst_n1:?}); counting distance: noise-diff={counting}, {sum_detail}; \
             b=false variant: noise-diff(DL-2)={nd_false}, convergence {} all_one={}",
            per_program(&conv),
            per_program(&conv_false),
            all_one(&conv_false)
        ),
    )
}

fn bytes_of(name: &str, jobs: usize, dir: &std::path::Path) -> (Vec<u8>, Vec<u8>) {
    let path = dir.join(format!("{name}-{jobs}.csv"));
    export_report(&run(name, Some(jobs)), &path).unwrap();
    let json = std::fs::read(path.with_extension("json")).unwrap();
    (std::fs::read(&path).unwrap(), json)
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let names = [
        "c5a_nsub_nsub",
        "c5b_delete_one_delete",
        "c5c_delete_dl",
        "c6_delete_nsub",
        "c7_first_char_pab",
        "c8_delete04_one_delete",
        "c8_delete04_dl",
        "c9_converge_btrue",
        "c9_converge_bfalse",
        "c9_counting_pab",
    ];
    let mut differing = Vec::new();
    for name in names {
        let a = bytes_of(name, 1, dir.path());
        let b = bytes_of(name, 4, dir.path());
        let c = bytes_of(name, 4, dir.path());
        if a != b || b != c {
            differing.push(name.to_string());
        }
    }
    for name in ["c9_noise_diff_btrue_dl2", "c9_noise_diff_btrue_counting"] {
        if noise_diff(name).to_bits() != noise_diff(name).to_bits() {
            differing.push(name.to_string());
        }
    }
    let dump = |()| {
        let g = grammar("arith");
        let fta = Fta::build(&g, &[env([("x", 1)])], 2).unwrap();
        serde_json::to_vec(&fta.dump(Some(&fta.weights::<f64>())).unwrap()).unwrap()
    };
    if dump(()) != dump(()) {
        differing.push("fig4 dump".into());
    }
    let summary = |()| {
        instances()
            .iter()
            .take(100)
            .map(|&(f, s)| {
                let r = synthesize(&random_instance(f, s)).unwrap();
                (r.objective.to_bits(), r.outputs)
            })
            .collect::<Vec<_>>()
    };
    if summary(()) != summary(()) {
        differing.push("synthesis results".into());
    }
    verdict(
        differing.is_empty(),
        format!(
            "{} reports compared at jobs=1 and jobs=4 (twice), plus noise checks, FTA dump and synthesis; differing: {differing:?}",
            names.len()
        ),
    )
}
