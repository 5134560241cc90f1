//! `covertime`: cover-time estimation for dense graphs from the command
//! line. Subcommands: estimate, partition, simulate, verify, generate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use covertime::error::Error;
use covertime::estimator::{estimate, EstimateConfig};
use covertime::graph::{generate, parse_edge_list, write_edge_list, Family, Graph, LabeledGraph};
use covertime::markov::{
    build_chain, exact_mixing_time, first_visit_prefactor, first_visit_terms, mixing_time,
    return_sum_nonlazy, taboo_profile, DEFAULT_MIXING_CAP,
};
use covertime::partition::{default_zeta, partition, verify_partition, CheckStatus};
use covertime::spectral::CutMode;
use covertime::walker::{simulate_cover, WalkConfig};

/// Exit codes: 0 success, 1 failure, 2 input parse error, 3 regime error.
const EXIT_PARSE: u8 = 2;
const EXIT_REGIME: u8 = 3;

#[derive(Parser)]
#[command(name = "covertime", version, about = "Cover-time estimation for dense graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tiered cover-time estimate and print a report.
    Estimate(EstimateArgs),
    /// Partition the graph into dense high-conductance blocks.
    Partition(PartitionArgs),
    /// Monte Carlo cover-time simulation.
    Simulate(SimulateArgs),
    /// Run the invariant battery; exits nonzero on any failed check.
    Verify(VerifyArgs),
    /// Emit a generated graph as an edge list.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Table,
    Json,
}

#[derive(Args, Serialize)]
struct InputArgs {
    /// Edge-list file (`u v` per line, `#` comments). Mutually exclusive
    /// with --generate.
    input: Option<PathBuf>,
    /// Generator spec: complete:N | circulant:N:D | dumbbell:N:B |
    /// random:N:P:THETA
    #[arg(long, value_name = "SPEC", conflicts_with = "input")]
    generate: Option<String>,
    /// Master seed; every random draw in the run derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap (default: available parallelism).
    #[arg(long, env = "COVERTIME_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Conductance threshold; default max(n^(-theta psi), 0.05).
    #[arg(long)]
    zeta: Option<f64>,
    /// Mixing accuracy parameter; default max(n^(3 theta psi), 10).
    #[arg(long)]
    omega: Option<f64>,
    /// Tier 2 requires T_mix <= C / ratio_floor.
    #[arg(long, default_value_t = 100.0)]
    ratio_floor: f64,
    /// Fresh trials for the tier-3 stopping-time estimate.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args, Serialize)]
struct PartitionArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    cut_mode: CutModeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum CutModeArg {
    Auto,
    Sweep,
    BruteForce,
}

impl From<CutModeArg> for CutMode {
    fn from(m: CutModeArg) -> CutMode {
        match m {
            CutModeArg::Auto => CutMode::Auto,
            CutModeArg::Sweep => CutMode::Sweep,
            CutModeArg::BruteForce => CutMode::BruteForce,
        }
    }
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Start vertex (internal id).
    #[arg(long, default_value_t = 0)]
    start: u32,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Simulate the lazy walk instead of the simple walk.
    #[arg(long)]
    lazy: bool,
    /// Per-trial step cap; default 50 n ln(n) / theta.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Write per-trial rows `trial,quantity,value` to this CSV file.
    #[arg(long, value_name = "PATH")]
    dump_csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long)]
    zeta: Option<f64>,
    /// Also run the exact taboo-oracle comparison (small graphs).
    #[arg(long)]
    deep: bool,
}

#[derive(Args, Serialize)]
struct GenerateArgs {
    /// Generator spec: complete:N | circulant:N:D | dumbbell:N:B |
    /// random:N:P:THETA
    spec: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn parse_family(spec: &str, seed: u64) -> anyhow::Result<Family> {
    let parts: Vec<&str> = spec.split(':').collect();
    let usage = "expected complete:N | circulant:N:D | dumbbell:N:B | random:N:P:THETA";
    let fam = match parts.as_slice() {
        ["complete", n] => Family::Complete { n: n.parse()? },
        ["circulant", n, d] => Family::RegularCirculant { n: n.parse()?, degree: d.parse()? },
        ["dumbbell", n, b] => Family::Dumbbell { n: n.parse()?, bridges: b.parse()? },
        ["random", n, p, theta] => Family::DenseRandom {
            n: n.parse()?,
            p: p.parse()?,
            theta: theta.parse()?,
            seed,
        },
        _ => anyhow::bail!("bad generator spec `{spec}`: {usage}"),
    };
    Ok(fam)
}

fn load_graph(io: &InputArgs) -> Result<LabeledGraph, Error> {
    match (&io.input, &io.generate) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                line: 0,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            parse_edge_list(&text)
        }
        (None, Some(spec)) => {
            let fam = parse_family(spec, io.seed)
                .map_err(|e| Error::InvalidGraph(e.to_string()))?;
            let graph = generate(&fam)?;
            let labels = (0..graph.n()).map(|v| v.to_string()).collect();
            Ok(LabeledGraph { graph, labels })
        }
        (None, None) => Err(Error::InvalidGraph(
            "provide an edge-list file or --generate SPEC".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn init_threads(io: &InputArgs) {
    #[cfg(feature = "parallel")]
    if let Some(t) = io.threads {
        if t > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    if io.threads.is_some() {
        eprintln!("note: built without the `parallel` feature; --threads has no effect");
    }
}

/// Resolved run configuration echoed into every report.
fn run_config_json(io: &InputArgs, extra: serde_json::Value) -> serde_json::Value {
    let mut cfg = json!({
        "input": io.input.as_ref().map(|p| p.display().to_string()),
        "generate": io.generate,
        "seed": io.seed,
        "threads": io.threads,
        "format": io.format,
    });
    if let (Some(obj), Some(add)) = (cfg.as_object_mut(), extra.as_object()) {
        for (k, v) in add {
            obj.insert(k.clone(), v.clone());
        }
    }
    cfg
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => EXIT_PARSE,
        Error::HypothesisViolation(_)
        | Error::MixingRatio { .. }
        | Error::MixingTooSlow { .. }
        | Error::TpiViolation { .. }
        | Error::ReturnMassTooLarge { .. }
        | Error::PartitionDivergence { .. }
        | Error::DegenerateSplit { .. }
        | Error::AbsorbingEscape
        | Error::BracketFailure { .. }
        | Error::Budget { .. }
        | Error::Precision { .. } => EXIT_REGIME,
        _ => 1,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(&err))
}

fn cmd_estimate(args: EstimateArgs) -> ExitCode {
    init_threads(&args.io);
    let labeled = match load_graph(&args.io) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let g = &labeled.graph;
    let theta = g.min_degree_ratio().theta;
    let cfg = EstimateConfig {
        zeta: Some(
            args.zeta
                .unwrap_or_else(|| default_zeta(g.n(), theta)),
        ),
        omega: Some(args.omega.unwrap_or_else(|| {
            covertime::estimator::default_omega(g.n(), theta)
        })),
        ratio_floor: args.ratio_floor,
        kappa_trials: args.trials,
        seed: args.io.seed,
        ..EstimateConfig::default()
    };
    let report = match estimate(g, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };

    let run_config = run_config_json(
        &args.io,
        json!({
            "zeta": cfg.zeta, "omega": cfg.omega, "ratio_floor": cfg.ratio_floor,
            "trials": cfg.kappa_trials,
            "vertex_labels": non_identity_labels(&labeled),
        }),
    );
    match args.io.format {
        Format::Json => {
            let mut value = serde_json::to_value(&report).expect("report serializes");
            value["diagnostics"]["run_config"] = run_config;
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        }
        Format::Table => {
            let d = &report.diagnostics;
            println!("cover-time report (tier {:?})", report.tier);
            match report.point_estimate {
                Some(p) => println!("  point estimate : {p:.3}"),
                None => println!("  point estimate : (interval only)"),
            }
            println!("  interval       : [{:.3}, {:.3}]", report.lower, report.upper);
            println!("  blocks         : {}", report.blocks.len());
            for (i, b) in report.blocks.iter().enumerate() {
                println!(
                    "    block {i}: |V|={} C_i={:.3} pi_i={:.4} depth={} phi={:.4}",
                    b.vertices.len(),
                    b.c_i,
                    b.pi_i,
                    b.depth,
                    b.phi_found
                );
            }
            println!(
                "  theta={:.4} zeta={:.4} omega={:.2} omega_used={:?} T_mix={:?}",
                d.theta, d.zeta, d.omega_config, d.omega_used, d.t_mix
            );
            if let Some(k) = &d.kappa {
                println!(
                    "  kappa: starts={} u*={} trials={} hw_rel={:.3} heuristic_upper={:.3}",
                    k.starts, k.start_vertex, k.trials, k.half_width_rel, k.heuristic_upper
                );
            }
            for reason in &d.fallthrough {
                println!("  fall-through: {reason}");
            }
        }
    }
    ExitCode::SUCCESS
}

fn non_identity_labels(labeled: &LabeledGraph) -> Option<Vec<String>> {
    let identity = labeled
        .labels
        .iter()
        .enumerate()
        .all(|(i, l)| l == &i.to_string());
    if identity {
        None
    } else {
        Some(labeled.labels.clone())
    }
}

fn cmd_partition(args: PartitionArgs) -> ExitCode {
    init_threads(&args.io);
    let labeled = match load_graph(&args.io) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let g = &labeled.graph;
    let theta = g.min_degree_ratio().theta;
    let zeta = args.zeta.unwrap_or_else(|| default_zeta(g.n(), theta));
    let part = match partition(g, zeta, args.cut_mode.into()) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match args.io.format {
        Format::Json => {
            let mut value = serde_json::to_value(&part).expect("partition serializes");
            value["run_config"] = run_config_json(
                &args.io,
                json!({"zeta": zeta, "cut_mode": args.cut_mode,
                       "vertex_labels": non_identity_labels(&labeled)}),
            );
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        }
        Format::Table => {
            println!("partition: {} blocks, {} splits (zeta={zeta:.4})", part.blocks.len(), part.splits.len());
            for (i, b) in part.blocks.iter().enumerate() {
                println!(
                    "  block {i}: depth={} phi={:.4} vertices={:?}",
                    b.depth, b.cut_value, b.vertices
                );
            }
            for (j, s) in part.splits.iter().enumerate() {
                println!(
                    "  split {j}: depth={} phi={:.6} |Y_a|={} |Y_b|={} -> {} | {}",
                    s.depth,
                    s.cut_value,
                    s.y_a.len(),
                    s.y_b.len(),
                    s.child_a.len(),
                    s.child_b.len()
                );
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_simulate(args: SimulateArgs) -> ExitCode {
    init_threads(&args.io);
    let labeled = match load_graph(&args.io) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let g = &labeled.graph;
    if args.start as usize >= g.n() {
        return fail(Error::InvalidGraph(format!(
            "start vertex {} out of range (n = {})",
            args.start,
            g.n()
        )));
    }
    let mut cfg = WalkConfig::for_graph(g, args.io.seed, args.lazy, args.trials);
    if let Some(cap) = args.max_steps {
        cfg.max_steps = cap;
    }
    let stats = match simulate_cover(g, args.start, &cfg) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let summary = stats.summary();
    if let Some(path) = &args.dump_csv {
        let mut csv = String::from("trial,quantity,value\n");
        for (i, (&steps, &cens)) in stats.steps.iter().zip(&stats.censored).enumerate() {
            csv.push_str(&format!("{i},cover_steps,{steps}\n"));
            csv.push_str(&format!("{i},censored,{}\n", u8::from(cens)));
        }
        if let Err(e) = std::fs::write(path, csv) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    match args.io.format {
        Format::Json => {
            let value = json!({
                "summary": summary,
                "walk_config": cfg,
                "run_config": run_config_json(&args.io, json!({
                    "start": args.start, "lazy": args.lazy,
                    "trials": args.trials, "max_steps": cfg.max_steps,
                    "vertex_labels": non_identity_labels(&labeled),
                })),
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        }
        Format::Table => {
            println!(
                "cover-time simulation: start={} trials={} lazy={}",
                args.start, summary.trials, args.lazy
            );
            println!(
                "  mean={:.3} var={:.3} halfwidth95={:.3} censored={}",
                summary.mean, summary.variance, summary.half_width95, summary.censored
            );
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    init_threads(&args.io);
    let labeled = match load_graph(&args.io) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let g = &labeled.graph;
    let theta = g.min_degree_ratio().theta;
    let zeta = args.zeta.unwrap_or_else(|| default_zeta(g.n(), theta));
    let mut failures = 0usize;
    let mut report_line = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // chain invariants
    let chain = build_chain(g);
    let p = chain.transition();
    let mut row_residual = 0.0f64;
    let mut stationary_residual = 0.0f64;
    let mut balance_residual = 0.0f64;
    for u in 0..g.n() {
        let row: f64 = (0..g.n()).map(|x| p[(u, x)]).sum();
        row_residual = row_residual.max((row - 1.0).abs());
    }
    for x in 0..g.n() {
        let back: f64 = (0..g.n()).map(|u| chain.pi()[u] * p[(u, x)]).sum();
        stationary_residual = stationary_residual.max((back - chain.pi()[x]).abs());
        for u in 0..g.n() {
            balance_residual = balance_residual
                .max((chain.pi()[u] * p[(u, x)] - chain.pi()[x] * p[(x, u)]).abs());
        }
    }
    report_line("chain-row-sums", row_residual <= 1e-12, format!("residual {row_residual:.2e}"));
    report_line(
        "chain-stationarity",
        stationary_residual <= 1e-10,
        format!("residual {stationary_residual:.2e}"),
    );
    report_line(
        "chain-reversibility",
        balance_residual <= 1e-12,
        format!("residual {balance_residual:.2e}"),
    );

    // partition battery
    match partition(g, zeta, CutMode::Auto) {
        Ok(part) => {
            let vr = verify_partition(g, &part);
            for check in &vr.checks {
                match check.status {
                    CheckStatus::Pass => {}
                    CheckStatus::Flag => {
                        println!("FLAG {}: {}", check.name, check.detail);
                    }
                    CheckStatus::Fail => {
                        report_line(&check.name, false, check.detail.clone());
                    }
                }
            }
            report_line(
                "partition-battery",
                vr.all_pass(),
                format!("{} blocks, {} checks", part.blocks.len(), vr.checks.len()),
            );
        }
        Err(e) => return fail(e),
    }

    // mixing certificate consistency
    match mixing_time(&chain, g, 10.0, DEFAULT_MIXING_CAP) {
        Ok(cert) => report_line(
            "mixing-certificate",
            cert.t_exact <= cert.t_cheeger || !cert.phi_rigorous,
            format!(
                "T_exact={} T_cheeger={} (phi {} {})",
                cert.t_exact,
                cert.t_cheeger,
                cert.phi,
                if cert.phi_rigorous { "rigorous" } else { "sweep upper bound" }
            ),
        ),
        Err(e) => report_line("mixing-certificate", false, e.to_string()),
    }

    if args.deep {
        if g.n() <= 16 {
            let omega = 20.0;
            match exact_mixing_time(&chain, omega, DEFAULT_MIXING_CAP) {
                Ok(t_mix) => {
                    let mut worst = 0.0f64;
                    let theta_n = theta * g.n() as f64;
                    let mut r_bound_ok = true;
                    for v in 0..g.n() as u32 {
                        let est = first_visit_terms(&chain, v, t_mix, omega);
                        let r_nl = return_sum_nonlazy(&chain, v, t_mix);
                        if !(1.0..=1.0 + t_mix as f64 / theta_n).contains(&r_nl) {
                            r_bound_ok = false;
                        }
                        for u in 0..g.n() as u32 {
                            if u == v {
                                continue;
                            }
                            let prefactor = first_visit_prefactor(&chain, u, v, &est);
                            let profile = taboo_profile(&chain, u, v, 10 * t_mix);
                            for (t, &oracle) in
                                profile.iter().enumerate().skip(t_mix as usize)
                            {
                                let rel =
                                    (prefactor * est.survival(t as u64) - oracle).abs() / oracle;
                                worst = worst.max(rel);
                            }
                        }
                    }
                    report_line(
                        "first-visit-oracle",
                        worst <= 5.0 / omega,
                        format!("max relative error {worst:.4} vs 5/omega = {:.4}", 5.0 / omega),
                    );
                    report_line(
                        "return-mass-bound",
                        r_bound_ok,
                        format!("1 <= R'_v <= 1 + T/(theta n) at T={t_mix}"),
                    );
                }
                Err(e) => report_line("first-visit-oracle", false, e.to_string()),
            }
        } else {
            println!("SKIP first-visit-oracle: deep oracle suite needs n <= 16");
        }
    }

    if failures == 0 {
        println!("verify: all checks passed");
        ExitCode::SUCCESS
    } else {
        eprintln!("verify: {failures} check(s) failed");
        ExitCode::FAILURE
    }
}

fn cmd_generate(args: GenerateArgs) -> ExitCode {
    let fam = match parse_family(&args.spec, args.seed) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let g: Graph = match generate(&fam) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let text = write_edge_list(&g);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
            eprintln!("wrote {} edges to {}", g.m(), path.display());
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Generate(a) => cmd_generate(a),
    }
}
