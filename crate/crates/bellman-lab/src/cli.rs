//! Command-line interface: one thin binary exposing the library as
//! subcommands with machine-readable, reproducible outputs.
//!
//! Conventions: every JSON document carries a versioned `schema` id and
//! an embedded manifest (subcommand, resolved parameters, tool version,
//! seed, output paths); CSV outputs get a manifest sidecar. All
//! randomness flows from `--seed` (default 0). Wall-clock timing goes
//! to stderr only, so reruns with the same seed produce byte-identical
//! files. `BELLMAN_LAB_THREADS` caps parallelism.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bellman::{closed_form, corollary_norm_sup, BellmanQuery, Functional};
use crate::error::{Error, Result};
use crate::extremal::{
    attainment_witness, extremal_b, extremal_b1_middle, extremal_b1_power, shaved_level_measure,
    ExtremalRecipe,
};
use crate::maximal::{maximal_function, weak_type_check};
use crate::norms::norm_comparison_check;
use crate::partition::{build_tree, integral, StepFunction};
use crate::search::{maximize, verify_upper_bound, Optimizer, SearchConfig};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits: round-trips f64 exactly and keeps CSV diffs
/// stable across runs.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Parser)]
#[command(
    name = "bellman-lab",
    version,
    about = "Tree maximal operators, weak-L^p norms, sharp level-set bounds and their extremizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the closed-form bound min(1, f/λ, C^p F^p/λ^p).
    ClosedForm(QueryArgs),
    /// Sup of ‖Mφ‖_{p,∞} over the feasible set (F, resp. kF).
    NormSup(NormSupArgs),
    /// Build the discretized extremal function for a query.
    Extremal(ExtremalArgs),
    /// Quasi-norm and equivalent norm of a step function.
    Norms(NormsArgs),
    /// Maximal function leaf values and its distribution curve.
    Maximal(MaximalArgs),
    /// Monte Carlo check that no feasible function beats the bound.
    VerifyBound(SearchArgs),
    /// Local search approaching the bound from below.
    Search(SearchArgs),
    /// Closed form vs discretized attainment over a λ grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
struct QueryArgs {
    #[arg(long, value_enum, ignore_case = true)]
    functional: Functional,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    f: f64,
    #[arg(long = "F")]
    norm_level: f64,
    #[arg(long)]
    lambda: f64,
    /// Write the JSON document here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

impl QueryArgs {
    fn query(&self) -> Result<BellmanQuery> {
        BellmanQuery::new(self.p, self.f, self.norm_level, self.lambda, self.functional)
    }
}

#[derive(Debug, Args, Serialize)]
struct NormSupArgs {
    #[arg(long, value_enum, ignore_case = true)]
    functional: Functional,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    f: f64,
    #[arg(long = "F")]
    norm_level: f64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ExtremalArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, default_value_t = 2)]
    arity: u32,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    /// Optional CSV dump of the leaf values.
    #[arg(long)]
    #[serde(skip)]
    emit_leaves: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct NormsArgs {
    /// Step function JSON ({arity, depth, values}).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MaximalArgs {
    /// Step function JSON ({arity, depth, values}).
    #[arg(long)]
    input: PathBuf,
    /// Output directory for the CSV files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Use strict level sets μ({M > λ}) in the distribution curve.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args, Serialize)]
struct SearchArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, default_value_t = 2)]
    arity: u32,
    #[arg(long, default_value_t = 10)]
    depth: u32,
    #[arg(long, default_value_t = 1000)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Optimizer::CoordinateAscent)]
    optimizer: Optimizer,
    #[arg(long, default_value_t = 50_000)]
    move_budget: u32,
    /// Write the best feasible function as step-function JSON.
    #[arg(long)]
    #[serde(skip)]
    emit_certificate: Option<PathBuf>,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig> {
        let mut cfg = SearchConfig::new(
            self.query.query()?,
            self.arity,
            self.depth,
            self.trials,
            self.seed,
        );
        cfg.optimizer = self.optimizer;
        cfg.move_budget = self.move_budget;
        Ok(cfg)
    }
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[arg(long, value_enum, ignore_case = true)]
    functional: Functional,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    f: f64,
    #[arg(long = "F")]
    norm_level: f64,
    /// start:stop:step, inclusive of start, exclusive of stop.
    #[arg(long)]
    lambda_grid: String,
    #[arg(long, default_value_t = 2)]
    arity: u32,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Serialize)]
struct Manifest {
    subcommand: String,
    tool_version: String,
    seed: Option<u64>,
    parameters: serde_json::Value,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Document<T: Serialize> {
    schema: String,
    #[serde(flatten)]
    payload: T,
    manifest: Manifest,
}

fn manifest<A: Serialize>(subcommand: &str, args: &A, seed: Option<u64>, outputs: &[&Path]) -> Manifest {
    Manifest {
        subcommand: subcommand.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        seed,
        parameters: serde_json::to_value(args).expect("args serialize"),
        outputs: outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    }
}

fn emit_json<T: Serialize>(doc: &Document<T>, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_manifest_sidecar(dir: &Path, m: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(m)?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// `start:stop:step`, start included, stop excluded.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!(
            "lambda grid must be start:stop:step, got {text}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Domain(format!("bad grid number {s}")))
        })
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain("grid step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut i = 0u64;
    loop {
        let lam = start + i as f64 * step;
        if lam >= stop - 1e-12 * step {
            break;
        }
        out.push(lam);
        i += 1;
    }
    if out.is_empty() {
        return Err(Error::Domain(format!("empty lambda grid {text}")));
    }
    Ok(out)
}

fn configure_threads() {
    if let Ok(text) = std::env::var("BELLMAN_LAB_THREADS") {
        if let Ok(n) = text.parse::<usize>() {
            if n >= 1 {
                // Ignore failure: the pool can only be built once.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

pub fn main_entry() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(64);
        }
    };
    let started = Instant::now();
    match run(cli) {
        Ok(()) => {
            eprintln!("completed in {:.1} ms", started.elapsed().as_secs_f64() * 1e3);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ClosedForm(args) => run_closed_form(args),
        Command::NormSup(args) => run_norm_sup(args),
        Command::Extremal(args) => run_extremal(args),
        Command::Norms(args) => run_norms(args),
        Command::Maximal(args) => run_maximal(args),
        Command::VerifyBound(args) => run_search(args, false),
        Command::Search(args) => run_search(args, true),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn run_closed_form(args: QueryArgs) -> Result<()> {
    let cf = closed_form(&args.query()?)?;
    let doc = Document {
        schema: "bellman-lab/closed-form/v1".into(),
        payload: cf,
        manifest: manifest("closed-form", &args, None, &[]),
    };
    emit_json(&doc, args.out.as_deref())
}

#[derive(Serialize)]
struct NormSupPayload {
    value: f64,
}

fn run_norm_sup(args: NormSupArgs) -> Result<()> {
    let value = corollary_norm_sup(args.p, args.f, args.norm_level, args.functional)?;
    let doc = Document {
        schema: "bellman-lab/norm-sup/v1".into(),
        payload: NormSupPayload { value },
        manifest: manifest("norm-sup", &args, None, &[]),
    };
    emit_json(&doc, args.out.as_deref())
}

fn build_recipe(query: &BellmanQuery, arity: u32, depth: u32) -> Result<ExtremalRecipe> {
    let tree = build_tree(arity, depth)?;
    match query.functional {
        Functional::B | Functional::B2 => extremal_b(query, tree).map_err(|e| {
            Error::Domain(format!(
                "{e}; below the power threshold the sup is approached by                  level-λ step functions instead — use `search`"
            ))
        }),
        Functional::B1 => {
            let th = crate::bellman::thresholds(query);
            if query.lambda > th.lambda_power {
                extremal_b1_power(query, tree)
            } else {
                extremal_b1_middle(query, tree)
            }
        }
    }
}

fn run_extremal(args: ExtremalArgs) -> Result<()> {
    let query = args.query.query()?;
    let recipe = build_recipe(&query, args.arity, args.depth)?;
    let mut outputs: Vec<&Path> = Vec::new();
    if let Some(path) = &args.emit_leaves {
        let mut csv = String::from("leaf,value\n");
        for (i, v) in recipe.leaf_values.iter().enumerate() {
            csv.push_str(&format!("{i},{}\n", fmt17(*v)));
        }
        std::fs::write(path, csv)?;
        outputs.push(path);
    }
    let doc = Document {
        schema: "bellman-lab/extremal-recipe/v1".into(),
        manifest: manifest("extremal", &args, None, &outputs),
        payload: recipe,
    };
    emit_json(&doc, args.query.out.as_deref())
}

#[derive(Serialize)]
struct NormsPayload {
    p: f64,
    integral: f64,
    quasi: crate::norms::NormResult,
    equiv: crate::norms::NormResult,
    ratio_equiv_over_quasi: f64,
    k: f64,
}

fn run_norms(args: NormsArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)?;
    let phi = StepFunction::from_json(&text)?;
    let cmp = norm_comparison_check(&phi, args.p)?;
    let doc = Document {
        schema: "bellman-lab/norms/v1".into(),
        payload: NormsPayload {
            p: args.p,
            integral: integral(&phi),
            quasi: cmp.quasi,
            equiv: cmp.equiv,
            ratio_equiv_over_quasi: cmp.ratio,
            k: cmp.k,
        },
        manifest: manifest("norms", &args, None, &[]),
    };
    emit_json(&doc, args.out.as_deref())
}

fn run_maximal(args: MaximalArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)?;
    let phi = StepFunction::from_json(&text)?;
    let m = maximal_function(&phi);
    std::fs::create_dir_all(&args.out_dir)?;

    let values_path = args.out_dir.join("maximal_values.csv");
    let mut csv = String::from("leaf,value\n");
    for (i, v) in m.values().values().iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", fmt17(*v)));
    }
    std::fs::write(&values_path, csv)?;

    // The exact staircase: one row per distinct maximal value.
    let curve_path = args.out_dir.join("distribution.csv");
    let mut levels: Vec<f64> = m.values().values().to_vec();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();
    let mut csv = String::from("lambda,measure\n");
    for level in levels {
        let measure = if args.strict {
            m.distribution_above(level)
        } else {
            m.distribution_at(level)
        };
        csv.push_str(&format!("{},{}\n", fmt17(level), fmt17(measure)));
    }
    std::fs::write(&curve_path, csv)?;

    let man = manifest("maximal", &args, None, &[&values_path, &curve_path]);
    write_manifest_sidecar(&args.out_dir, &man)?;
    Ok(())
}

fn run_search(args: SearchArgs, optimize: bool) -> Result<()> {
    let cfg = args.config()?;
    let report = if optimize {
        maximize(&cfg)?
    } else {
        verify_upper_bound(&cfg)?
    };
    let mut outputs: Vec<&Path> = Vec::new();
    if let Some(path) = &args.emit_certificate {
        if let Some(best) = report.best_function() {
            std::fs::write(path, best.to_json() + "\n")?;
            outputs.push(path);
        }
    }
    let violations = report.upper_bound_violations;
    let doc = Document {
        schema: "bellman-lab/search-report/v1".into(),
        manifest: manifest(
            if optimize { "search" } else { "verify-bound" },
            &args,
            Some(args.seed),
            &outputs,
        ),
        payload: report,
    };
    emit_json(&doc, args.query.out.as_deref())?;
    if violations > 0 {
        return Err(Error::Invariant(format!(
            "{violations} feasible function(s) exceeded the closed-form bound"
        )));
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    use rayon::prelude::*;
    let grid = parse_grid(&args.lambda_grid)?;
    let tree = build_tree(args.arity, args.depth)?;
    let eps_d = tree.leaf_measure();

    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&lambda| -> Result<(f64, f64, f64)> {
            let query =
                BellmanQuery::new(args.p, args.f, args.norm_level, lambda, args.functional)?;
            let target = closed_form(&query)?.value;
            let witness = attainment_witness(&query, tree)?;
            // Feasibility is part of the contract; a violation would be
            // an invariant breach, surfaced via weak_type_check below.
            weak_type_check(&witness, lambda)?;
            let achieved = shaved_level_measure(&witness, lambda, eps_d);
            Ok((lambda, target, achieved))
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(&args.out_dir)?;
    let sweep_path = args.out_dir.join("sweep.csv");
    let closed_path = args.out_dir.join("closed_form.csv");
    let achieved_path = args.out_dir.join("achieved.csv");

    let mut sweep_csv = String::from("lambda,closed_form,achieved,gap\n");
    let mut closed_csv = String::from("lambda,closed_form\n");
    let mut achieved_csv = String::from("lambda,achieved\n");
    for (lambda, target, achieved) in &rows {
        sweep_csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(*lambda),
            fmt17(*target),
            fmt17(*achieved),
            fmt17(target - achieved)
        ));
        closed_csv.push_str(&format!("{},{}\n", fmt17(*lambda), fmt17(*target)));
        achieved_csv.push_str(&format!("{},{}\n", fmt17(*lambda), fmt17(*achieved)));
    }
    std::fs::write(&sweep_path, sweep_csv)?;
    std::fs::write(&closed_path, closed_csv)?;
    std::fs::write(&achieved_path, achieved_csv)?;

    let man = manifest(
        "sweep",
        &args,
        None,
        &[&sweep_path, &closed_path, &achieved_path],
    );
    write_manifest_sidecar(&args.out_dir, &man)?;
    Ok(())
}
