//! Command-line entry point: verify plans against safety specifications,
//! dump compiled automata, certify sequential compositions, harvest
//! verified plans into a fine-tuning dataset, and cross-check with the
//! brute-force oracle.
//!
//! Exit codes: 0 = all checks passed, 1 = a verification failed,
//! 2 = usage or internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plancheck::checker::{
    brute_force_check_budgeted, explain, verify_product_budgeted, Verdict, VerdictResult,
};
use plancheck::compile::exe2fsa;
use plancheck::compose::{compose_and_certify, direct_verify, ComposeManifest, CompositionPlan};
use plancheck::formula::{parse_spec, SafetyFormula};
use plancheck::harvest::{
    emit_dataset, harvest, read_tasks, stats, GeneratorClient, HarvestConfig, HttpGenerator,
    MockGenerator, TemplateFamily,
};
use plancheck::product::product;
use plancheck::props::fmt_valuation;
use plancheck::system::{build_transition_system, load_system, SystemSpec};

#[derive(Parser)]
#[command(
    name = "plancheck",
    version,
    about = "Compile executable robot plans to automata and verify them against safety specifications"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Maximum states explored per check.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_states: usize,
    /// Wall-clock budget for the whole invocation, in milliseconds.
    #[arg(long, global = true, default_value_t = 600_000)]
    budget_ms: u64,
    /// Output format for results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for deterministic generation (mock harvesting).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a plan against safety specifications.
    Verify(VerifyArgs),
    /// Compile a plan to its automaton and dump DOT/JSON.
    Exe2fsa(Exe2fsaArgs),
    /// Certify a sequential composition of verified plans.
    Compose(ComposeArgs),
    /// Generate plans, verify them, and emit a fine-tuning dataset.
    Harvest(HarvestArgs),
    /// Cross-check a plan with the brute-force bounded oracle.
    OracleCheck(OracleArgs),
    /// Render the failure report for a plan and specification.
    Explain(ExplainArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// System description file (JSON).
    #[arg(long)]
    system: PathBuf,
    /// Plan source file.
    #[arg(long)]
    plan: PathBuf,
    /// Specification: a file path or an inline formula. Repeatable;
    /// defaults to the system file's specs.
    #[arg(long = "spec")]
    specs: Vec<String>,
    /// Directory to write fsa.dot and product.dot into.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// File to write the failure report to.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Override the state budget for this check.
    #[arg(long)]
    budget: Option<usize>,
    /// Write an SMV model of the product for external cross-checking.
    #[arg(long)]
    emit_smv: Option<PathBuf>,
}

#[derive(Args)]
struct Exe2fsaArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    /// Write Graphviz DOT here.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the canonical automaton JSON here (stdout when neither output
    /// is given).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    #[arg(long, required_unless_present = "manifest")]
    system: Option<PathBuf>,
    /// Plan files, in composition order.
    #[arg(long = "plan")]
    plans: Vec<PathBuf>,
    /// Manifest file listing system, parts and optional connections.
    #[arg(long, conflicts_with_all = ["system", "plans"])]
    manifest: Option<PathBuf>,
    #[arg(long = "spec")]
    specs: Vec<String>,
    /// Also verify the joint automaton directly and compare.
    #[arg(long)]
    direct_check: bool,
}

#[derive(Args)]
struct HarvestArgs {
    #[arg(long)]
    system: PathBuf,
    /// Task file: one task per line.
    #[arg(long)]
    tasks: PathBuf,
    /// Plans generated per task.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Dataset output path (JSON Lines).
    #[arg(long)]
    out: PathBuf,
    /// Use the deterministic mock generator with this safe-plan ratio.
    #[arg(long, conflicts_with = "endpoint")]
    mock: Option<f64>,
    /// Chat-completions endpoint base URL.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name for the endpoint.
    #[arg(long, default_value = "gpt-4o-mini")]
    model: String,
    /// Write the stats table here.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Allow writing an empty dataset.
    #[arg(long)]
    allow_empty: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long = "spec")]
    specs: Vec<String>,
    /// Maximum prefix length to search.
    #[arg(long, default_value_t = 12)]
    k: usize,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long = "spec")]
    specs: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    };
    if started.elapsed().as_millis() as u64 > cli.global.budget_ms {
        eprintln!(
            "error: exceeded the time budget of {} ms",
            cli.global.budget_ms
        );
        return ExitCode::from(2);
    }
    code
}

type AnyError = Box<dyn std::error::Error>;

fn run(cli: &Cli) -> Result<ExitCode, AnyError> {
    match &cli.command {
        Command::Verify(args) => cmd_verify(&cli.global, args),
        Command::Exe2fsa(args) => cmd_exe2fsa(args),
        Command::Compose(args) => cmd_compose(&cli.global, args),
        Command::Harvest(args) => cmd_harvest(&cli.global, args),
        Command::OracleCheck(args) => cmd_oracle(&cli.global, args),
        Command::Explain(args) => cmd_explain(&cli.global, args),
    }
}

/// Resolves --spec arguments: an existing file path or an inline formula.
/// Without any, falls back to the system's own specification list.
fn resolve_specs(
    system: &SystemSpec,
    args: &[String],
) -> Result<Vec<(String, SafetyFormula)>, AnyError> {
    if args.is_empty() {
        return Ok(system
            .specs
            .iter()
            .map(|(raw, f)| (raw.clone(), f.clone()))
            .collect());
    }
    let mut out = Vec::new();
    for arg in args {
        let path = Path::new(arg);
        let text = if path.exists() {
            std::fs::read_to_string(path)?
        } else {
            arg.clone()
        };
        let f = parse_spec(&text).map_err(|e| format!("specification {arg:?}: {e}"))?;
        out.push((text.trim().to_string(), f));
    }
    Ok(out)
}

struct Checked {
    plan_text: String,
    fsa: plancheck::fsa::Fsa,
    product: plancheck::product::ProductAutomaton,
    specs: Vec<(String, SafetyFormula)>,
}

fn load_and_compile(
    system_path: &Path,
    plan_path: &Path,
    spec_args: &[String],
) -> Result<Checked, AnyError> {
    let system = load_system(system_path)?;
    let plan_text = std::fs::read_to_string(plan_path)?;
    let out = exe2fsa(&system, &plan_text)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let ts = build_transition_system(&system)?;
    let product = product(&out.fsa, &ts)?;
    let specs = resolve_specs(&system, spec_args)?;
    Ok(Checked {
        plan_text,
        fsa: out.fsa,
        product,
        specs,
    })
}

fn verdict_json(spec: &str, v: &Verdict) -> serde_json::Value {
    let cex = v.counterexample.as_ref().map(|c| {
        serde_json::json!({
            "length": c.prefix.len(),
            "violated_clause": c.clause.to_string(),
            "prefix": c.prefix.iter().map(fmt_valuation).collect::<Vec<_>>(),
            "steps": c.path.iter().map(|s| {
                serde_json::json!({
                    "valuation": fmt_valuation(&s.valuation),
                    "plan_line": s.span.map(|sp| sp.start_line),
                })
            }).collect::<Vec<_>>(),
        })
    });
    serde_json::json!({
        "spec": spec,
        "verdict": if v.passed() { "pass" } else { "fail" },
        "explored": v.stats.explored,
        "warnings": v.warnings,
        "counterexample": cex,
    })
}

fn cmd_verify(global: &GlobalOpts, args: &VerifyArgs) -> Result<ExitCode, AnyError> {
    let checked = load_and_compile(&args.system, &args.plan, &args.specs)?;
    let budget = args.budget.unwrap_or(global.budget_states);

    if let Some(dir) = &args.dot {
        std::fs::create_dir_all(dir)?;
        let name = args.plan.file_stem().unwrap_or_default().to_string_lossy();
        std::fs::write(dir.join("fsa.dot"), checked.fsa.to_dot(&name))?;
        std::fs::write(
            dir.join("product.dot"),
            checked.product.to_dot(&format!("{name}_product")),
        )?;
    }
    if let Some(path) = &args.emit_smv {
        let formulas: Vec<SafetyFormula> =
            checked.specs.iter().map(|(_, f)| f.clone()).collect();
        std::fs::write(path, plancheck::smv::to_smv(&checked.product, &formulas))?;
    }

    let mut results = Vec::new();
    for (raw, f) in &checked.specs {
        let v = verify_product_budgeted(&checked.product, f, budget)?;
        results.push((raw.clone(), v));
    }

    let mut report = String::new();
    for (raw, v) in &results {
        if v.counterexample.is_some() {
            report.push_str(&explain(v, raw, Some(&checked.plan_text))?);
            report.push('\n');
        }
    }
    if let Some(path) = &args.report {
        std::fs::write(path, &report)?;
    }

    let any_fail = results.iter().any(|(_, v)| !v.passed());
    match global.format {
        Format::Json => {
            let doc = serde_json::json!({
                "plan": args.plan.display().to_string(),
                "results": results.iter().map(|(s, v)| verdict_json(s, v)).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Text => {
            for (raw, v) in &results {
                for w in &v.warnings {
                    eprintln!("warning: {w}");
                }
                println!("{}  {}", if v.passed() { "PASS" } else { "FAIL" }, raw);
            }
            if any_fail && args.report.is_none() {
                print!("\n{report}");
            }
        }
    }
    Ok(ExitCode::from(if any_fail { 1 } else { 0 }))
}

fn cmd_exe2fsa(args: &Exe2fsaArgs) -> Result<ExitCode, AnyError> {
    let system = load_system(&args.system)?;
    let plan_text = std::fs::read_to_string(&args.plan)?;
    let out = exe2fsa(&system, &plan_text)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let name = args.plan.file_stem().unwrap_or_default().to_string_lossy();
    let mut wrote = false;
    if let Some(path) = &args.dot {
        std::fs::write(path, out.fsa.to_dot(&name))?;
        wrote = true;
    }
    if let Some(path) = &args.json {
        std::fs::write(path, out.fsa.to_json())?;
        wrote = true;
    }
    if !wrote {
        print!("{}", out.fsa.to_json());
    }
    Ok(ExitCode::from(0))
}

fn cmd_compose(global: &GlobalOpts, args: &ComposeArgs) -> Result<ExitCode, AnyError> {
    let (system_path, plan_paths, connections) = match &args.manifest {
        Some(path) => {
            let manifest = ComposeManifest::from_json(&std::fs::read_to_string(path)?)?;
            let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
            // Manifest paths resolve against the working directory first,
            // then against the manifest's own directory.
            let resolve = move |p: &str| {
                let direct = PathBuf::from(p);
                if direct.exists() {
                    direct
                } else {
                    base.join(p)
                }
            };
            (
                resolve(&manifest.system),
                manifest.parts.iter().map(|p| resolve(p)).collect::<Vec<_>>(),
                manifest.connections.clone(),
            )
        }
        None => (
            args.system.clone().expect("clap enforces system"),
            args.plans.clone(),
            None,
        ),
    };
    if plan_paths.is_empty() {
        return Err("composition needs at least one --plan (or a manifest)".into());
    }

    let system = load_system(&system_path)?;
    let ts = build_transition_system(&system)?;
    let specs = resolve_specs(&system, &args.specs)?;
    let formulas: Vec<SafetyFormula> = specs.iter().map(|(_, f)| f.clone()).collect();

    let mut parts = Vec::new();
    for path in &plan_paths {
        let text = std::fs::read_to_string(path)?;
        let out = exe2fsa(&system, &text)?;
        parts.push(product(&out.fsa, &ts)?);
    }
    let mut plan = CompositionPlan::sequential(parts);
    if let Some(conns) = connections {
        if conns.len() != plan.parts.len().saturating_sub(1) {
            return Err("manifest connections must cover every adjacent pair".into());
        }
        plan.connections = conns.into_iter().map(Some).collect();
    }

    let cert = compose_and_certify(&plan, &formulas)?;
    let certified = cert.result == VerdictResult::Pass;
    let mut direct_results = None;
    if args.direct_check {
        direct_results = Some(direct_verify(&cert.joint, &formulas)?);
    }

    match global.format {
        Format::Json => {
            let doc = serde_json::json!({
                "parts": plan_paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                "certified": certified,
                "failures": cert.failures.iter().map(|(spec, boundary, w)| {
                    serde_json::json!({
                        "spec": specs[*spec].0,
                        "boundary": boundary,
                        "from_state": w.from,
                        "to_state": w.to,
                    })
                }).collect::<Vec<_>>(),
                "direct_check": direct_results.as_ref().map(|vs| {
                    vs.iter().zip(&specs).map(|(v, (s, _))| {
                        serde_json::json!({"spec": s, "verdict": if v.passed() {"pass"} else {"fail"}})
                    }).collect::<Vec<_>>()
                }),
                "joint_states": cert.joint.state_count(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Text => {
            if certified {
                println!(
                    "CERTIFIED  {} parts compose safely for all {} specification(s)",
                    plan_paths.len(),
                    specs.len()
                );
            } else {
                for (spec, boundary, w) in &cert.failures {
                    println!(
                        "REFUSED    boundary {} -> {} violates {} (monitor state {} at exit {})",
                        boundary,
                        boundary + 1,
                        specs[*spec].0,
                        w.monitor_state,
                        w.from
                    );
                }
            }
            if let Some(vs) = &direct_results {
                for (v, (s, _)) in vs.iter().zip(&specs) {
                    println!("DIRECT     {}  {}", if v.passed() { "PASS" } else { "FAIL" }, s);
                }
            }
        }
    }

    let direct_fail = direct_results
        .map(|vs| vs.iter().any(|v| !v.passed()))
        .unwrap_or(false);
    Ok(ExitCode::from(if certified && !direct_fail { 0 } else { 1 }))
}

fn cmd_harvest(global: &GlobalOpts, args: &HarvestArgs) -> Result<ExitCode, AnyError> {
    let system = load_system(&args.system)?;
    let tasks = read_tasks(&args.tasks)?;
    if tasks.is_empty() {
        return Err("task file contains no tasks".into());
    }

    let client: Box<dyn GeneratorClient> = match (&args.mock, &args.endpoint) {
        (Some(ratio), _) => {
            // Template family keyed by the system's proposition names.
            let prop_names: Vec<&str> = system.props.iter().map(|d| d.name.as_str()).collect();
            let family = if prop_names.contains(&"navigate") {
                TemplateFamily::RobotDog
            } else if prop_names.contains(&"ask") {
                TemplateFamily::Fetch
            } else {
                TemplateFamily::Driving
            };
            Box::new(MockGenerator::with_safe_ratio(family, *ratio, global.seed))
        }
        (None, Some(endpoint)) => Box::new(HttpGenerator::new(endpoint, &args.model)),
        (None, None) => {
            return Err("choose a generator: --mock <ratio> or --endpoint <url>".into())
        }
    };

    let outcome = harvest(
        client.as_ref(),
        &system,
        &tasks,
        &HarvestConfig {
            seeds_per_task: args.seeds,
            ..Default::default()
        },
    )?;
    emit_dataset(&outcome.dataset, &args.out, args.allow_empty)?;
    let report = stats(&outcome.records)?;

    for (task, seed, error) in &outcome.failures {
        eprintln!("warning: generation failed for {task:?} seed {seed}: {error}");
    }

    match global.format {
        Format::Json => {
            let doc = serde_json::json!({
                "records": outcome.records.len(),
                "dataset_entries": outcome.dataset.len(),
                "dataset": args.out.display().to_string(),
                "stats": report,
            });
            let rendered = serde_json::to_string_pretty(&doc)?;
            if let Some(path) = &args.stats {
                std::fs::write(path, format!("{rendered}\n"))?;
            }
            println!("{rendered}");
        }
        Format::Text => {
            let table = format!("{report}dataset        {:>8}\n", outcome.dataset.len());
            if let Some(path) = &args.stats {
                std::fs::write(path, &table)?;
            }
            print!("{table}");
            println!("dataset written to {}", args.out.display());
        }
    }
    Ok(ExitCode::from(0))
}

fn cmd_oracle(global: &GlobalOpts, args: &OracleArgs) -> Result<ExitCode, AnyError> {
    let checked = load_and_compile(&args.system, &args.plan, &args.specs)?;
    let mut any_fail = false;
    for (raw, f) in &checked.specs {
        let v = brute_force_check_budgeted(&checked.product, f, args.k, global.budget_states)?;
        let failed = v.result == VerdictResult::Fail;
        any_fail |= failed;
        match global.format {
            Format::Json => {
                println!("{}", serde_json::to_string_pretty(&verdict_json(raw, &v))?);
            }
            Format::Text => {
                println!("{}  {}", if failed { "FAIL" } else { "PASS" }, raw);
                if failed {
                    // The bounded oracle proves existence; show the shortest
                    // bad prefix from the checker for context.
                    let cv = verify_product_budgeted(&checked.product, f, global.budget_states)?;
                    if let Some(cex) = cv.counterexample {
                        println!("bad prefix ({} steps):", cex.prefix.len());
                        for (i, val) in cex.prefix.iter().enumerate() {
                            println!("  step {}: {}", i + 1, fmt_valuation(val));
                        }
                    }
                }
            }
        }
    }
    Ok(ExitCode::from(if any_fail { 1 } else { 0 }))
}

fn cmd_explain(global: &GlobalOpts, args: &ExplainArgs) -> Result<ExitCode, AnyError> {
    let checked = load_and_compile(&args.system, &args.plan, &args.specs)?;
    let mut any_fail = false;
    let mut out = String::new();
    for (raw, f) in &checked.specs {
        let v = verify_product_budgeted(&checked.product, f, global.budget_states)?;
        if v.passed() {
            out.push_str(&format!("PASS  {raw}\n"));
        } else {
            any_fail = true;
            out.push_str(&explain(&v, raw, Some(&checked.plan_text))?);
            out.push('\n');
        }
    }
    if checked.specs.is_empty() {
        out.push_str("no specifications to check\n");
    }
    match global.format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({ "report": out }))?
            );
        }
        Format::Text => print!("{out}"),
    }
    Ok(ExitCode::from(if any_fail { 1 } else { 0 }))
}
