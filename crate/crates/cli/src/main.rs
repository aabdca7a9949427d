use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use noisy_synth::experiments::config::{ExperimentConfig, InputDiffConfig, NoiseDiffConfig};
use noisy_synth::experiments::dataset::{generate_with, DataFile, Hidden};
use noisy_synth::experiments::report::{read_csv_rows, render_csv};
use noisy_synth::experiments::{
    check_input_differentiating, check_noise_differentiating, estimate_convergence, export_report,
    EquivalenceChecker, Estimate, InputSource,
};
use noisy_synth::prior::Prior;
use noisy_synth::program::enumerate_programs_capped;
use noisy_synth::synth::Diagnostics;
use noisy_synth::{
    oracle_synthesize, synthesize, CostModel, Error, Fta, Grammar, LossFn, NoiseModel, Problem, Program,
    Semiring,
};

#[derive(Parser)]
#[command(name = "noisy-synth", version, about = "Programming by example over noisy data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a program from a dataset and print the result as JSON.
    Synth(SynthArgs),
    /// Sample a hidden program, inputs and noisy outputs.
    GenData(GenDataArgs),
    /// Run a convergence sweep and write a CSV report.
    Converge(ConvergeArgs),
    /// Estimate how often an input source separates the hidden program.
    CheckInputDiff(DiffArgs),
    /// Estimate how often the noise keeps loss gaps and distances aligned.
    CheckNoiseDiff(DiffArgs),
    /// List the programs of bounded height with their prior probabilities.
    Enumerate(EnumerateArgs),
    /// Build the automaton for a dataset and print it as JSON.
    DumpFta(DumpFtaArgs),
    /// Render a convergence CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Grammar file (JSON).
    #[arg(long)]
    grammar: PathBuf,
    /// Dataset file with `inputs` and `outputs`.
    #[arg(long)]
    data: PathBuf,
    /// Loss: zero_one, zero_infty, n_sub:δ, one_delete:δ, dl, ab, or JSON.
    #[arg(long, default_value = "zero_one")]
    loss: String,
    /// Height bound.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Cost overrides: a JSON object or a path to one. Unlisted symbols cost 1.
    #[arg(long)]
    costs: Option<String>,
    /// Also write the automaton, with class probabilities, to this file.
    #[arg(long)]
    dump_fta: Option<PathBuf>,
    /// Use the brute-force reference instead of the automaton.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Input source: a JSON object or a path to one.
    #[arg(long)]
    source: String,
    /// Noise: identity, first_char_delete, one_delete:δ, n_sub:δ[:alphabet], or JSON.
    #[arg(long, default_value = "identity")]
    noise: String,
    /// Dataset size.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed hidden program; sampled from the prior when absent.
    #[arg(long)]
    hidden: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// CSV report path; a JSON sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. The report does not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    noise: Option<String>,
}

#[derive(Args)]
struct DiffArgs {
    /// Check config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Dataset whose inputs each program is run on.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct DumpFtaArgs {
    #[arg(long)]
    grammar: PathBuf,
    /// Dataset; only its inputs are used.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 2)]
    depth: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// Convergence CSV.
    #[arg(long)]
    csv: PathBuf,
    /// SVG output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "convergence")]
    title: String,
    /// Also draw the envelope base^n.
    #[arg(long)]
    envelope: Option<f64>,
}

/// Failure before any computation (exit 1) or during it (exit 2).
enum Fail {
    Invalid(String),
    Runtime(String),
}

type Outcome = Result<String, Fail>;

fn invalid(e: impl std::fmt::Display) -> Fail {
    Fail::Invalid(e.to_string())
}

fn runtime(e: Error) -> Fail {
    if e.is_validation() {
        Fail::Invalid(e.to_string())
    } else {
        Fail::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Converge(a) => cmd_converge(a),
        Command::CheckInputDiff(a) => cmd_input_diff(a),
        Command::CheckNoiseDiff(a) => cmd_noise_diff(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::DumpFta(a) => cmd_dump_fta(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Fail::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn load_grammar(path: &Path) -> Result<Grammar, Fail> {
    Grammar::load(path).map_err(invalid)
}

fn load_data(path: &Path) -> Result<DataFile, Fail> {
    DataFile::load(path).map_err(invalid)
}

/// Inline JSON when it looks like JSON, otherwise a file path.
fn inline_or_file(arg: &str) -> Result<String, Fail> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| invalid(format!("cannot read {arg}: {e}")))
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Fail> {
    std::fs::write(path, text).map_err(|e| Fail::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// JSON has no infinities; they become strings.
fn num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn pretty(v: &impl Serialize) -> Result<String, Fail> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Fail::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cmd_synth(a: SynthArgs) -> Outcome {
    let g = load_grammar(&a.grammar)?;
    let data = load_data(&a.data)?;
    let loss: LossFn = a.loss.parse().map_err(invalid)?;
    let costs = match &a.costs {
        None => g.default_costs(),
        Some(spec) => {
            let map: BTreeMap<String, f64> =
                serde_json::from_str(&inline_or_file(spec)?).map_err(|e| invalid(format!("costs: {e}")))?;
            CostModel::size_with_overrides(&g, &map).map_err(invalid)?
        }
    };
    let problem = Problem {
        grammar: g.clone(),
        depth: a.depth,
        loss,
        costs,
        inputs: data.inputs,
        outputs: data.outputs,
    };
    problem.validate().map_err(invalid)?;
    if let Some(path) = &a.dump_fta {
        let fta = Fta::build(&g, &problem.inputs, a.depth).map_err(runtime)?;
        let table = fta.weights::<f64>();
        write_out(path, &pretty(&fta.dump(Some(&table)).map_err(runtime)?)?)?;
    }
    let r = if a.oracle { oracle_synthesize(&problem) } else { synthesize(&problem) }.map_err(runtime)?;
    pretty(&json!({
        "program": r.program.display(&g).to_string(),
        "objective": num(r.objective),
        "loss": num(r.loss),
        "log_pi": num(r.log_pi),
        "outputs": r.outputs,
        "cost": num(r.cost),
        "all_infinite": r.all_infinite,
        "diagnostics": diagnostics(&r.diagnostics),
    }))
}

fn diagnostics(d: &Diagnostics) -> serde_json::Value {
    json!({
        "states": d.states,
        "accepting": d.accepting,
        "transitions": d.transitions,
        "pruned": d.pruned,
    })
}

fn cmd_gen_data(a: GenDataArgs) -> Outcome {
    let g = load_grammar(&a.grammar)?;
    let source: InputSource =
        serde_json::from_str(&inline_or_file(&a.source)?).map_err(|e| invalid(format!("source: {e}")))?;
    source.validate().map_err(invalid)?;
    let noise: NoiseModel = a.noise.parse().map_err(invalid)?;
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let prior = Prior::<f64>::new(&g, a.depth).map_err(invalid)?;
    let fixed = match &a.hidden {
        Some(text) => {
            let p = Program::parse(&g, text).map_err(invalid)?;
            prior.rho_p(&p).map_err(invalid)?;
            Some(p)
        }
        None => None,
    };
    let sampler;
    let hidden = match &fixed {
        Some(p) => Hidden::Fixed(p),
        None => {
            sampler = prior.sampler().map_err(runtime)?;
            Hidden::Prior(&sampler)
        }
    };
    let d = generate_with(&g, hidden, &source, &noise, a.n, a.seed).map_err(runtime)?;
    let text = pretty(&DataFile::from_dataset(&g, &d))?;
    match &a.out {
        Some(path) => {
            write_out(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn cmd_converge(a: ConvergeArgs) -> Outcome {
    let mut c = ExperimentConfig::load(&a.config).map_err(invalid)?;
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(t) = a.trials {
        c.trials = t;
    }
    if let Some(d) = a.depth {
        c.depth = d;
    }
    if let Some(l) = &a.loss {
        c.loss = l.parse().map_err(invalid)?;
    }
    if let Some(n) = &a.noise {
        c.noise = n.parse().map_err(invalid)?;
    }
    if a.jobs == Some(0) {
        return Err(invalid("--jobs must be at least 1"));
    }
    c.validate().map_err(invalid)?;
    c.load_grammar().map_err(invalid)?;
    let report = estimate_convergence(&c, a.jobs).map_err(runtime)?;
    if let Some(path) = &a.out {
        export_report(&report, path).map_err(|e| Fail::Runtime(e.to_string()))?;
    }
    let csv = render_csv(&report.rows).map_err(runtime)?;
    Ok(String::from_utf8_lossy(&csv).into_owned())
}

fn estimate_json(e: &Estimate, seed: u64) -> Outcome {
    pretty(&json!({
        "trials": e.trials,
        "successes": e.successes,
        "p_hat": e.p_hat,
        "ci_lo": e.ci_lo,
        "ci_hi": e.ci_hi,
        "seed": seed,
    }))
}

fn cmd_input_diff(a: DiffArgs) -> Outcome {
    let mut c = InputDiffConfig::load(&a.config).map_err(invalid)?;
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(t) = a.trials {
        c.trials = t;
    }
    if let Some(d) = a.depth {
        c.depth = d;
    }
    c.validate().map_err(invalid)?;
    let g = load_grammar(&c.grammar)?;
    let hidden = Program::parse(&g, &c.hidden).map_err(invalid)?;
    let domain = EquivalenceChecker::for_source(c.equivalence_domain.as_ref().unwrap_or(&c.input_source));
    let e = check_input_differentiating(
        &g,
        c.depth,
        &c.input_source,
        &domain,
        &c.distance,
        &hidden,
        c.n,
        c.eps,
        c.trials,
        c.seed,
    )
    .map_err(runtime)?;
    estimate_json(&e, c.seed)
}

fn cmd_noise_diff(a: DiffArgs) -> Outcome {
    let mut c = NoiseDiffConfig::load(&a.config).map_err(invalid)?;
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(t) = a.trials {
        c.trials = t;
    }
    if let Some(d) = a.depth {
        c.depth = d;
    }
    c.validate().map_err(invalid)?;
    let g = load_grammar(&c.grammar)?;
    let hidden = Program::parse(&g, &c.hidden).map_err(invalid)?;
    let xs = c.input_vector();
    let zh = hidden.evaluate_vec(&g, &xs).map_err(runtime)?;
    let e = check_noise_differentiating(
        &g, c.depth, &xs, &c.noise, &c.loss, &c.distance, &zh, c.gamma, c.eps, c.trials, c.seed,
    )
    .map_err(runtime)?;
    estimate_json(&e, c.seed)
}

fn cmd_enumerate(a: EnumerateArgs) -> Outcome {
    let g = load_grammar(&a.grammar)?;
    let inputs = match &a.data {
        Some(p) => Some(load_data(p)?.inputs),
        None => None,
    };
    let prior = Prior::<f64>::new(&g, a.depth).map_err(invalid)?;
    let programs = enumerate_programs_capped(&g, a.depth, noisy_synth::prior::ENUMERATION_CAP).map_err(runtime)?;
    let mut out = String::new();
    for p in programs {
        let rho = prior.rho_p(&p).map_err(runtime)?.to_f64();
        let _ = write!(out, "{rho}\t{}", p.display(&g));
        if let Some(xs) = &inputs {
            let shown = match p.evaluate_vec(&g, xs) {
                Ok(v) => serde_json::to_string(&v).map_err(|e| Fail::Runtime(e.to_string()))?,
                Err(e) if e.is_domain_failure() => "error".into(),
                Err(e) => return Err(runtime(e)),
            };
            let _ = write!(out, "\t{shown}");
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_dump_fta(a: DumpFtaArgs) -> Outcome {
    let g = load_grammar(&a.grammar)?;
    let data = load_data(&a.data)?;
    let fta = Fta::build(&g, &data.inputs, a.depth).map_err(runtime)?;
    let table = fta.weights::<f64>();
    pretty(&fta.dump(Some(&table)).map_err(runtime)?)
}

fn cmd_plot(a: PlotArgs) -> Outcome {
    let rows = read_csv_rows(&a.csv).map_err(invalid)?;
    let mut points = Vec::new();
    for r in &rows {
        let parse = |s: &str| s.parse::<f64>().map_err(|_| invalid(format!("{}: bad number `{s}`", a.csv.display())));
        points.push((parse(&r[0])?, parse(&r[3])?, parse(&r[4])?, parse(&r[5])?));
    }
    let svg = render_svg(&a.title, &points, a.envelope);
    match &a.out {
        Some(path) => {
            write_out(path, &svg)?;
            Ok(String::new())
        }
        None => Ok(svg),
    }
}

/// Line chart of `p̂` against `n` with interval bars.
fn render_svg(title: &str, points: &[(f64, f64, f64, f64)], envelope: Option<f64>) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let max_n = points.iter().map(|p| p.0).fold(1.0, f64::max);
    let x = |n: f64| m + (w - 2.0 * m) * n / max_n;
    let y = |p: f64| h - m - (h - 2.0 * m) * p;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let title = title.replace('&', "&amp;").replace('<', "&lt;");
    let _ = writeln!(s, r#"<text x="{}" y="25" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#, w / 2.0);
    let _ = writeln!(s, r#"<line x1="{m}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, y(0.0), w - m, y(0.0));
    let _ = writeln!(s, r#"<line x1="{m}" y1="{}" x2="{m}" y2="{}" stroke="black"/>"#, y(0.0), y(1.0));
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{tick}</text>"#, m - 6.0, y(tick) + 4.0);
    }
    for p in points {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#, x(p.0), y(0.0) + 16.0, p.0);
        let _ = writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="steelblue"/>"#, x(p.0), y(p.2), y(p.3));
    }
    if let Some(base) = envelope {
        let steps = 100;
        let pts: Vec<String> = (0..=steps)
            .map(|i| {
                let n = max_n * i as f64 / steps as f64;
                format!("{:.2},{:.2}", x(n), y(base.powf(n).clamp(0.0, 1.0)))
            })
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="firebrick" stroke-dasharray="4 3"/>"#, pts.join(" "));
    }
    let line: Vec<String> = points.iter().map(|p| format!("{:.2},{:.2}", x(p.0), y(p.1))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, line.join(" "));
    for p in points {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, x(p.0), y(p.1));
    }
    s.push_str("</svg>\n");
    s
}
