//! Command-line front end: fairness and efficiency checks, solvers,
//! non-existence certificates and the reproduction suite.
//!
//! Exit codes: 0 on success, 1 when a check or assertion fails (or a solver
//! does not converge), 2 on usage and input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use famdiv::scenarios::{run_scenario, ScenarioConfig, ScenarioReport, SCENARIOS};
use famdiv::{
    certify_nonexistence, check_fairness, family_ee_solve, find_ee_reference, fs_welfare_max,
    leximin, pareto_oracle_grid, pareto_test_mrs, parse_economy, restricted_equilibrium,
    tatonnement, Allocation, Bundle, Criterion, EeMode, EquilibriumConfig, Economy,
    FairnessCriterion, ObjectiveSet, ParetoVerdict, Region, ResponseRule, SolveConfig,
};

#[derive(Parser)]
#[command(name = "famdiv", version, about = "Fair division of goods among families")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one fairness criterion for an allocation.
    Check(CheckArgs),
    /// Test an allocation for Pareto optimality.
    Pareto(ParetoArgs),
    /// Compute an allocation.
    Solve(SolveArgs),
    /// Certify on a grid that criteria cannot hold jointly.
    Certify(CertifyArgs),
    /// Run pinned reproduction scenarios.
    Repro(ReproArgs),
}

#[derive(Args)]
struct CheckArgs {
    economy: PathBuf,
    #[arg(long)]
    allocation: PathBuf,
    /// individual-fs, family-fs, individual-ne, family-ne, individual-ee or family-ee.
    #[arg(long)]
    criterion: FairnessCriterion,
    /// Reference bundle for the egalitarian criteria, e.g. `0.5,0.5`. When
    /// absent a reference is searched for.
    #[arg(long, value_parser = parse_bundle)]
    reference: Option<Bundle>,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Grid resolution of the reference search.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Args)]
struct ParetoArgs {
    economy: PathBuf,
    #[arg(long)]
    allocation: PathBuf,
    /// Also search a grid with this many steps per good for a dominator.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Leximin,
    FsWelfare,
    FamilyEe,
    Equilibrium,
    RestrictedEquilibrium,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objectives {
    Individual,
    FamilyProduct,
    FamilyGm,
    FamilySum,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    MaxMin,
    FirstMember,
}

#[derive(Args)]
struct SolveArgs {
    economy: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Objectives for `leximin`.
    #[arg(long, value_enum, default_value = "individual")]
    objectives: Objectives,
    /// Restrict `leximin` to individually fair-share allocations.
    #[arg(long)]
    fs_only: bool,
    /// Family response rule for `equilibrium`.
    #[arg(long, value_enum, default_value = "max-min")]
    rule: Rule,
    /// Write the allocation document to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    economy: PathBuf,
    /// Comma-separated criteria, e.g. `individual-ne,pareto`.
    #[arg(long, value_delimiter = ',', required = true)]
    criteria: Vec<Criterion>,
    #[arg(long)]
    grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

#[derive(Args)]
struct ReproArgs {
    /// Scenario name; see `--list`.
    #[arg(required_unless_present_any = ["all", "list"], conflicts_with_all = ["all", "list"])]
    scenario: Option<String>,
    /// Run every registered scenario.
    #[arg(long)]
    all: bool,
    /// List registered scenarios.
    #[arg(long)]
    list: bool,
    /// Run scenarios concurrently.
    #[arg(long)]
    parallel: bool,
    /// Override each scenario's grid resolution.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
}

/// Errors in user input map to exit code 2; everything else to 1.
struct Failure {
    usage: bool,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let usage = error.chain().any(|cause| {
            cause.is::<std::io::Error>()
                || matches!(
                    cause.downcast_ref::<famdiv::Error>(),
                    Some(
                        famdiv::Error::Parse { .. }
                            | famdiv::Error::Validation(_)
                            | famdiv::Error::Dimension { .. }
                            | famdiv::Error::UnknownFamily(_)
                            | famdiv::Error::UnknownScenario(_)
                            | famdiv::Error::MissingReference(_)
                            | famdiv::Error::TwoGoodsOnly(_)
                            | famdiv::Error::BudgetExceeded { .. }
                    )
                )
        });
        Failure { usage, error }
    }
}

impl From<famdiv::Error> for Failure {
    fn from(error: famdiv::Error) -> Self {
        anyhow::Error::from(error).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(if f.usage { 2 } else { 1 })
        }
    }
}

/// Honors `FAMDIV_THREADS` as a cap on worker threads.
fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("FAMDIV_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .with_context(|| format!("FAMDIV_THREADS must be a positive integer, got `{value}`"))?;
        if threads == 0 {
            return Err(anyhow!("FAMDIV_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Check(args) => check(args, cli.json),
        Command::Pareto(args) => pareto(args, cli.json),
        Command::Solve(args) => solve(args, cli.json),
        Command::Certify(args) => certify(args, cli.json),
        Command::Repro(args) => repro(args, cli.json),
    }
}

fn parse_bundle(s: &str) -> Result<Bundle, String> {
    let s = s.trim();
    let values: Result<Vec<f64>, String> = if s.starts_with('[') {
        serde_json::from_str(s).map_err(|e| e.to_string())
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
            .collect()
    };
    values.map(Bundle::new)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_economy(path: &Path) -> Result<Economy> {
    parse_economy(&read(path)?).with_context(|| format!("parsing economy {}", path.display()))
}

fn load_allocation(econ: &Economy, path: &Path) -> Result<Allocation> {
    econ.parse_allocation(&read(path)?)
        .with_context(|| format!("parsing allocation {}", path.display()))
}

fn print_json(value: &Value) {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn describe(econ: &Economy, x: &Allocation) -> String {
    econ.families
        .iter()
        .zip(&x.bundles)
        .map(|(f, b)| {
            let q: Vec<String> = b.0.iter().map(|v| format!("{v:.6}")).collect();
            format!("  {}: ({})", f.id, q.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn check(args: &CheckArgs, as_json: bool) -> Result<bool, Failure> {
    let econ = load_economy(&args.economy)?;
    let x = load_allocation(&econ, &args.allocation)?;
    let reference = match (&args.reference, args.criterion) {
        (Some(r), _) => Some(r.clone()),
        (None, FairnessCriterion::IndividualEe) => {
            find_ee_reference(&econ, &x, EeMode::Individual, args.grid, args.eps)?
        }
        (None, FairnessCriterion::FamilyEe) => {
            find_ee_reference(&econ, &x, EeMode::Family, args.grid, args.eps)?
        }
        (None, _) => None,
    };
    if args.criterion.needs_reference() && reference.is_none() {
        if as_json {
            print_json(&json!({
                "criterion": args.criterion,
                "holds": false,
                "reference": null,
                "witnesses": [],
            }));
        } else {
            println!("{}: fails (no reference bundle found on the ray or a {}-step grid)", args.criterion, args.grid);
        }
        return Ok(false);
    }
    let report = check_fairness(&econ, &x, args.criterion, reference.as_ref(), args.eps)?;
    if as_json {
        let mut value = serde_json::to_value(&report).map_err(anyhow::Error::from)?;
        if let Some(r) = &reference {
            value["reference"] = json!(r.0);
        }
        print_json(&value);
    } else {
        println!("{}: {}", report.criterion, if report.holds { "holds" } else { "fails" });
        if let Some(r) = &reference {
            println!("  reference: {:?}", r.0);
        }
        for w in &report.witnesses {
            println!("  {} against {} by {:.6e}", w.who, serde_json::to_string(&w.against).unwrap_or_default(), w.gap);
        }
    }
    Ok(report.holds)
}

fn pareto(args: &ParetoArgs, as_json: bool) -> Result<bool, Failure> {
    let econ = load_economy(&args.economy)?;
    let x = load_allocation(&econ, &args.allocation)?;
    let verdict = if econ.goods == 2 {
        Some(pareto_test_mrs(&econ, &x, args.eps)?)
    } else {
        None
    };
    // Fall back to the grid when the MRS test cannot decide.
    let grid = args.grid.or(match &verdict {
        Some(ParetoVerdict::Inapplicable { .. }) | None => Some(32),
        _ => None,
    });
    let dominator = match grid {
        Some(n) => Some(pareto_oracle_grid(&econ, &x, n, args.eps)?),
        None => None,
    };
    let mrs_ok = !matches!(verdict, Some(ParetoVerdict::NotOptimal { .. }));
    let grid_ok = !matches!(dominator, Some(Some(_)));
    let optimal = mrs_ok && grid_ok;
    if as_json {
        print_json(&json!({
            "optimal": optimal,
            "mrs_test": verdict,
            "grid_n": grid,
            "dominator": dominator.as_ref().map(|d| d.as_ref().map(|d| econ.allocation_document(d))),
        }));
    } else {
        match &verdict {
            Some(ParetoVerdict::Optimal) => println!("MRS test: optimal"),
            Some(ParetoVerdict::NotOptimal { mrs_gap, .. }) => {
                println!("MRS test: not optimal (gap {:.6e})", mrs_gap.unwrap_or(f64::NAN))
            }
            Some(ParetoVerdict::Inapplicable { reason }) => println!("MRS test: inapplicable ({reason})"),
            None => println!("MRS test: needs two goods"),
        }
        match (grid, &dominator) {
            (Some(n), Some(None)) => println!("grid {n}: no dominator"),
            (Some(n), Some(Some(d))) => println!("grid {n}: dominated by\n{}", describe(&econ, d)),
            _ => {}
        }
    }
    Ok(optimal)
}

fn solve(args: &SolveArgs, as_json: bool) -> Result<bool, Failure> {
    let econ = load_economy(&args.economy)?;
    let cfg = SolveConfig::default();
    let (allocation, value, ok) = match args.method {
        Method::Leximin => {
            let set = match args.objectives {
                Objectives::Individual => ObjectiveSet::IndividualNormalized,
                Objectives::FamilyProduct => ObjectiveSet::FamilyProduct,
                Objectives::FamilyGm => ObjectiveSet::FamilyGeometricMean,
                Objectives::FamilySum => ObjectiveSet::FamilySum,
            };
            let region = if args.fs_only { Region::IndividualFsOnly } else { Region::All };
            let out = leximin(&econ, set, region, &cfg)?;
            (Some(out.allocation.clone()), json!(out), true)
        }
        Method::FsWelfare => {
            let out = fs_welfare_max(&econ, &cfg)?;
            (Some(out.allocation.clone()), json!(out), true)
        }
        Method::FamilyEe => {
            let sol = family_ee_solve(&econ, &cfg)?;
            let value = json!({
                "allocation": sol.allocation,
                "V": sol.level,
                "t": sol.t,
                "reference": sol.reference,
                "objectives": sol.objectives,
                "stages": sol.stages,
            });
            (Some(sol.allocation), value, true)
        }
        Method::Equilibrium | Method::RestrictedEquilibrium => {
            let rule = match args.rule {
                Rule::MaxMin => ResponseRule::MaxMin,
                Rule::FirstMember => ResponseRule::FirstMember,
            };
            let eq_cfg = EquilibriumConfig {
                rule,
                ..EquilibriumConfig::default()
            };
            let out = if matches!(args.method, Method::Equilibrium) {
                tatonnement(&econ, &econ.equal_split(), &eq_cfg)?
            } else {
                restricted_equilibrium(&econ, &eq_cfg)?
            };
            let allocation = out.triple.as_ref().map(|t| t.allocation.clone());
            let ok = allocation.is_some() && out.fair != Some(false);
            (allocation, json!(out), ok)
        }
    };
    let document = allocation.as_ref().map(|x| econ.allocation_document(x));
    if let (Some(path), Some(doc)) = (&args.out, &document) {
        let text = serde_json::to_string_pretty(doc).map_err(anyhow::Error::from)?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if as_json {
        let mut value = value;
        value["bundles"] = document.map(|d| d["bundles"].clone()).unwrap_or(Value::Null);
        print_json(&value);
    } else {
        match &allocation {
            Some(x) => println!("allocation:\n{}", describe(&econ, x)),
            None => println!("no allocation: the method did not converge"),
        }
        if let Method::FamilyEe = args.method {
            let num = |key: &str| value[key].as_f64().unwrap_or(f64::NAN);
            let reference: Vec<String> = value["reference"]
                .as_array()
                .map(|r| r.iter().map(|v| format!("{:.6}", v.as_f64().unwrap_or(f64::NAN))).collect())
                .unwrap_or_default();
            println!("V = {:.3e}, t = {:.9}, reference = ({})", num("V"), num("t"), reference.join(", "));
        }
        if let Some(diag) = value.get("diagnostics").and_then(Value::as_array) {
            for d in diag {
                println!("  note: {}", d.as_str().unwrap_or_default());
            }
        }
    }
    Ok(ok)
}

fn certify(args: &CertifyArgs, as_json: bool) -> Result<bool, Failure> {
    let econ = load_economy(&args.economy)?;
    let cert = certify_nonexistence(&econ, &args.criteria, args.grid, args.eps)?;
    if as_json {
        print_json(&json!({
            "grid_n": cert.grid_n,
            "criteria": cert.criteria.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "min_joint_violation": cert.min_joint_violation,
            "argmin": econ.allocation_document(&cert.argmin),
            "history": cert.history,
        }));
    } else {
        for h in &cert.history {
            println!("grid {:>4}: min joint violation {:.6e}", h.grid_n, h.min_joint_violation);
        }
        println!("argmin at grid {}:\n{}", cert.grid_n, describe(&econ, &cert.argmin));
    }
    Ok(true)
}

fn repro(args: &ReproArgs, as_json: bool) -> Result<bool, Failure> {
    if args.list {
        if as_json {
            print_json(&json!(SCENARIOS));
        } else {
            SCENARIOS.iter().for_each(|s| println!("{s}"));
        }
        return Ok(true);
    }
    let cfg = ScenarioConfig {
        grid_n: args.grid,
        eps: args.eps,
    };
    let names: Vec<&str> = match &args.scenario {
        Some(name) => vec![name.as_str()],
        None => SCENARIOS.to_vec(),
    };
    let reports: Vec<ScenarioReport> = if args.parallel {
        names
            .par_iter()
            .map(|n| run_scenario(n, &cfg))
            .collect::<famdiv::Result<_>>()?
    } else {
        names
            .iter()
            .map(|n| run_scenario(n, &cfg))
            .collect::<famdiv::Result<_>>()?
    };
    let passed = reports.iter().all(|r| r.passed);
    if as_json {
        print_json(&json!({ "passed": passed, "scenarios": reports }));
    } else {
        for r in &reports {
            print!("{r}");
        }
        let ok = reports.iter().filter(|r| r.passed).count();
        println!("{ok}/{} scenarios passed", reports.len());
    }
    Ok(passed)
}
