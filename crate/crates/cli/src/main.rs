//! `cryptomut` — generate crypto-misuse mutants, seed them into Java
//! projects, and evaluate detector reports against the mutation log.
//!
//! Exit codes: 0 success, 2 validation error (registry/model/arguments),
//! 3 generation error, 4 seeding or target error, 5 analysis error,
//! 1 anything else.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use cryptomut_core::api_model::{ApiModel, PlacementKind};
use cryptomut_core::kill::{
    baseline_diff, load_report, match_findings, summarize, ColumnMap, GroupBy, KillReport,
    MatchOptions, ReportFormat, DEFAULT_DRIFT,
};
use cryptomut_core::locations::{locations_for, Scope};
use cryptomut_core::mutation::{
    apply_operator, base_instantiation, generate_all, ConditionMode, Mutant, OperatorConfig,
};
use cryptomut_core::seeder::{
    compile_check, default_compile_command, emit_log, generate_minimal_app, load_log, plan, seed,
    SeedMode, SeedOptions, DEFAULT_COMPILE_TIMEOUT_SECS,
};
use cryptomut_core::source::{check_syntax, scan};
use cryptomut_core::taxonomy::{CaseFilter, MisuseCase, OperatorId, Registry};
use cryptomut_core::Error as CoreError;

// ---------------------------------------------------------------------------
// Exit codes
// ---------------------------------------------------------------------------

const EXIT_VALIDATION: i32 = 2;
const EXIT_GENERATION: i32 = 3;
const EXIT_SEEDING: i32 = 4;
const EXIT_ANALYSIS: i32 = 5;

/// CLI-origin failure carrying its exit code.
#[derive(Debug)]
struct StageError {
    code: i32,
    message: String,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for StageError {}

fn stage_err(code: i32, message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(StageError {
        code,
        message: message.into(),
    })
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    if let Some(stage) = err.downcast_ref::<StageError>() {
        return stage.code;
    }
    let Some(core) = err.downcast_ref::<CoreError>() else {
        return 1;
    };
    match core {
        CoreError::Json { .. }
        | CoreError::InvalidRegistry(_)
        | CoreError::InvalidCase { .. }
        | CoreError::UnknownCluster(_)
        | CoreError::UnknownOperator(_)
        | CoreError::UnknownCase(_)
        | CoreError::InvalidModel(_)
        | CoreError::ApiNotFound(_)
        | CoreError::ScopeNeedsCase => EXIT_VALIDATION,
        CoreError::MissingSpec { .. }
        | CoreError::IncompatibleForm { .. }
        | CoreError::InapplicableOperator { .. }
        | CoreError::ConditionUnavailable { .. }
        | CoreError::UnsupportedExpression(_) => EXIT_GENERATION,
        CoreError::NoSourceFiles(_)
        | CoreError::NoEntryPoint(_)
        | CoreError::OutputInsideProject(_)
        | CoreError::EmptyPlan => EXIT_SEEDING,
        CoreError::EmptyRecords
        | CoreError::LogRecord { .. }
        | CoreError::ReportShape { .. }
        | CoreError::MissingColumn(_) => EXIT_ANALYSIS,
        CoreError::Io { .. } | CoreError::CommandNotFound(_) | CoreError::CommandTimeout(_) => 1,
    }
}

// ---------------------------------------------------------------------------
// Argument types
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "cryptomut",
    version,
    about = "Mutation analysis for crypto-API misuse detectors",
    long_about = "Instantiates crypto-API misuse cases as compilable Java mutants, seeds them\n\
                  into target projects, and evaluates detector reports against the mutation log."
)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Globals {
    /// Misuse-case registry JSON (defaults to the bundled registry).
    #[arg(long, global = true, value_name = "PATH")]
    registry: Option<PathBuf>,
    /// API model JSON (defaults to the bundled model).
    #[arg(long, global = true, value_name = "PATH")]
    api_model: Option<PathBuf>,
    /// Emit machine-readable JSON on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel parsing (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the misuse-case registry.
    Taxonomy {
        #[command(subcommand)]
        command: TaxonomyCommand,
    },
    /// Inspect the API model that backs mutant synthesis.
    ApiModel {
        #[command(subcommand)]
        command: ApiModelCommand,
    },
    /// Generate mutants without seeding them anywhere.
    Generate(GenerateArgs),
    /// Parse a project and list candidate seed locations.
    Scan(ScanArgs),
    /// Seed mutants into copies of a project and write the mutation log.
    Seed(SeedArgs),
    /// Re-parse (and optionally compile) a seeded copy.
    Check(CheckArgs),
    /// Seed one mutant into a fresh minimal app.
    Minimize(MinimizeArgs),
    /// Match a detector report against a mutation log.
    Analyze(AnalyzeArgs),
    /// Run generate → seed → analyze from a config file.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum TaxonomyCommand {
    /// List misuse cases, optionally filtered.
    List {
        #[arg(long)]
        cluster: Option<String>,
        /// Only cases this operator applies to (OP1..OP12).
        #[arg(long)]
        operator: Option<String>,
        /// Only the curated selection.
        #[arg(long)]
        selected: bool,
    },
    /// Show one case in full.
    Show { case_id: String },
    /// List the clusters.
    Clusters,
}

#[derive(Subcommand)]
enum ApiModelCommand {
    /// List modeled APIs.
    List,
    /// Show one API spec in full.
    Show { qualified_name: String },
}

#[derive(Args, Clone)]
struct SelectionArgs {
    /// Case ids, comma separated (default: every selected case).
    #[arg(long, visible_alias = "case", value_delimiter = ',', value_name = "ID")]
    cases: Vec<String>,
    /// Operators, comma separated (default: all applicable, plus base).
    #[arg(long, visible_alias = "operator", value_delimiter = ',', value_name = "OP")]
    operators: Vec<String>,
    /// Body operator for OP10–OP12 (OP7|OP8|OP9).
    #[arg(long, value_name = "OP")]
    body_op: Option<String>,
    /// Condition synthesis mode for flexible operators.
    #[arg(long, value_parser = ["generic", "context"])]
    condition: Option<String>,
    /// Upper bound on variants per (case, operator).
    #[arg(long, value_name = "N")]
    variant_cap: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    /// Write the mutant set as JSON here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// Root of the Java project to analyze.
    #[arg(long, value_name = "DIR")]
    project: PathBuf,
    /// main | similarity | exhaustive.
    #[arg(long)]
    scope: String,
    /// Case whose API usages to look for (required for similarity).
    #[arg(long, value_name = "ID")]
    case: Option<String>,
}

#[derive(Args)]
struct SeedArgs {
    /// Root of the Java project to seed.
    #[arg(long, value_name = "DIR")]
    project: PathBuf,
    /// main | similarity | exhaustive.
    #[arg(long)]
    scope: String,
    #[command(flatten)]
    selection: SelectionArgs,
    /// bulk (one copy, all mutants) | isolated (one copy per mutant).
    #[arg(long, default_value = "bulk")]
    mode: String,
    /// In similarity scope, replace the usage's argument instead of
    /// inserting a new statement after it.
    #[arg(long)]
    in_place: bool,
    /// Output directory for seeded copies (must lie outside the project).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Mutation log path (default: <out>/mutation-log.jsonl).
    #[arg(long, value_name = "PATH")]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// A seeded copy directory.
    #[arg(long, value_name = "DIR")]
    copy: PathBuf,
    /// Also run the compile command.
    #[arg(long)]
    compile: bool,
    /// Compile command template; `{}` is replaced by the copy path.
    #[arg(long, value_name = "CMD")]
    compile_cmd: Option<String>,
    /// Compile timeout in seconds.
    #[arg(long, default_value_t = DEFAULT_COMPILE_TIMEOUT_SECS, value_name = "SECS")]
    timeout: u64,
}

#[derive(Args)]
struct MinimizeArgs {
    /// Fully qualified mutant id (<case>__<OP>__<variant>), or `<case>__BASE`.
    #[arg(long, value_name = "ID")]
    mutant_id: String,
    /// Output directory; the app lands in <out>/<mutant-id>/.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Mutation log written by `seed`.
    #[arg(long, value_name = "PATH")]
    log: PathBuf,
    /// Detector report (SARIF or CSV).
    #[arg(long, value_name = "PATH")]
    report: PathBuf,
    /// sarif | csv (default: inferred from the extension).
    #[arg(long)]
    format: Option<String>,
    /// Column-map JSON for CSV reports.
    #[arg(long, value_name = "PATH")]
    column_map: Option<PathBuf>,
    /// Detector report over the unmutated project; its findings are
    /// subtracted before matching.
    #[arg(long, value_name = "PATH")]
    baseline: Option<PathBuf>,
    /// Line-drift tolerance when matching findings to seeded spans.
    #[arg(long, default_value_t = DEFAULT_DRIFT, value_name = "LINES")]
    drift: usize,
    /// Keep only findings with these rule ids, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "RULE")]
    rules: Vec<String>,
    /// Also print a grouped summary: operator | case | cluster | scope.
    #[arg(long, value_name = "KEY")]
    group_by: Option<String>,
    /// Write the full kill report as JSON here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config JSON.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Plan only: report what would be generated and seeded.
    #[arg(long)]
    dry_run: bool,
}

/// Config for `cryptomut run`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    project: PathBuf,
    scope: String,
    #[serde(default)]
    cases: Vec<String>,
    #[serde(default)]
    operators: Vec<String>,
    #[serde(default)]
    body_op: Option<String>,
    #[serde(default)]
    condition: Option<String>,
    #[serde(default)]
    variant_cap: Option<usize>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    in_place: bool,
    out: PathBuf,
    #[serde(default)]
    log: Option<PathBuf>,
    #[serde(default)]
    report: Option<PathBuf>,
    #[serde(default)]
    format: Option<String>,
    #[serde(default)]
    column_map: Option<PathBuf>,
    #[serde(default)]
    baseline: Option<PathBuf>,
    #[serde(default)]
    drift: Option<usize>,
    #[serde(default)]
    rules: Vec<String>,
    #[serde(default)]
    group_by: Option<String>,
}

// ---------------------------------------------------------------------------
// Context (registry + model, bundled or loaded)
// ---------------------------------------------------------------------------

struct Ctx {
    registry_owned: Option<Registry>,
    model_owned: Option<ApiModel>,
    json: bool,
}

impl Ctx {
    fn new(globals: &Globals) -> Result<Ctx> {
        let registry_owned = globals
            .registry
            .as_deref()
            .map(Registry::load)
            .transpose()?;
        let model_owned = globals
            .api_model
            .as_deref()
            .map(ApiModel::load)
            .transpose()?;
        let ctx = Ctx {
            registry_owned,
            model_owned,
            json: globals.json,
        };
        // Cross-validate whenever either side was swapped out.
        if ctx.registry_owned.is_some() || ctx.model_owned.is_some() {
            ctx.model().validate_against(ctx.registry())?;
        }
        Ok(ctx)
    }

    fn registry(&self) -> &Registry {
        self.registry_owned
            .as_ref()
            .unwrap_or_else(|| Registry::bundled())
    }

    fn model(&self) -> &ApiModel {
        self.model_owned
            .as_ref()
            .unwrap_or_else(|| ApiModel::bundled())
    }

    fn emit<T: Serialize>(&self, value: &T, human: impl FnOnce()) -> Result<()> {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value)?);
        } else {
            human();
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Mutant selection shared by generate / seed / run
// ---------------------------------------------------------------------------

fn operator_config(registry: &Registry, sel: &SelectionArgs) -> Result<OperatorConfig> {
    let mut config = OperatorConfig::for_registry(registry);
    if let Some(cap) = sel.variant_cap {
        config.variant_cap = cap;
    }
    if let Some(op) = &sel.body_op {
        config.body_operator = Some(OperatorId::from_str(op)?);
    }
    if let Some(mode) = &sel.condition {
        config.condition_mode = match mode.as_str() {
            "context" => ConditionMode::ContextSpecific,
            _ => ConditionMode::Generic,
        };
    }
    Ok(config)
}

fn select_mutants(
    registry: &Registry,
    model: &ApiModel,
    sel: &SelectionArgs,
) -> Result<Vec<Mutant>> {
    let config = operator_config(registry, sel)?;
    let cases: Vec<&MisuseCase> = if sel.cases.is_empty() {
        registry.selected_cases().collect()
    } else {
        sel.cases
            .iter()
            .map(|id| registry.case(id))
            .collect::<Result<_, _>>()?
    };
    if sel.operators.is_empty() {
        return Ok(generate_all(&cases, model, &config)?);
    }
    let operators: Vec<OperatorId> = sel
        .operators
        .iter()
        .map(|s| OperatorId::from_str(s))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for case in &cases {
        for &op in &operators {
            if op == OperatorId::Base {
                out.push(base_instantiation(case, model)?);
            } else if case.applicable_operators.contains(&op) {
                out.extend(apply_operator(case, op, model, &config)?);
            }
        }
    }
    if out.is_empty() {
        return Err(CoreError::InapplicableOperator {
            case_id: sel.cases.join(","),
            operator: sel.operators.join(","),
        }
        .into());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_taxonomy(ctx: &Ctx, command: TaxonomyCommand) -> Result<()> {
    let registry = ctx.registry();
    match command {
        TaxonomyCommand::List {
            cluster,
            operator,
            selected,
        } => {
            let filter = CaseFilter {
                cluster,
                operator: operator.as_deref().map(OperatorId::from_str).transpose()?,
                api_kind: None,
                selected_only: selected,
            };
            let cases = registry.list_cases(&filter)?;
            ctx.emit(&cases, || {
                for case in &cases {
                    let ops: Vec<String> = case
                        .applicable_operators
                        .iter()
                        .map(|o| o.to_string())
                        .collect();
                    println!(
                        "{:<40} {:<36} {}",
                        case.id,
                        case.cluster,
                        ops.join(",")
                    );
                }
                eprintln!("{} case(s)", cases.len());
            })
        }
        TaxonomyCommand::Show { case_id } => {
            let case = registry.case(&case_id)?;
            ctx.emit(case, || {
                println!("{}", serde_json::to_string_pretty(case).expect("serializes"));
            })
        }
        TaxonomyCommand::Clusters => {
            let clusters = &registry.clusters;
            ctx.emit(clusters, || {
                for cluster in clusters {
                    println!("{:<36} {}", cluster.id, cluster.name);
                }
            })
        }
    }
}

fn cmd_api_model(ctx: &Ctx, command: ApiModelCommand) -> Result<()> {
    let model = ctx.model();
    match command {
        ApiModelCommand::List => {
            let names: Vec<&str> = model
                .apis
                .iter()
                .map(|a| a.qualified_name.as_str())
                .collect();
            ctx.emit(&names, || {
                for api in &model.apis {
                    println!("{:<48} {:?}", api.qualified_name, api.kind);
                }
            })
        }
        ApiModelCommand::Show { qualified_name } => {
            let spec = model.require(&qualified_name)?;
            ctx.emit(spec, || {
                println!("{}", serde_json::to_string_pretty(spec).expect("serializes"));
            })
        }
    }
}

fn cmd_generate(ctx: &Ctx, args: GenerateArgs) -> Result<()> {
    let mutants = select_mutants(ctx.registry(), ctx.model(), &args.selection)?;
    let json = serde_json::to_string_pretty(&mutants)?;
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("{} mutant(s) -> {}", mutants.len(), path.display());
        }
        None => {
            if ctx.json {
                println!("{json}");
            } else {
                for mutant in &mutants {
                    println!("=== {} [{}]", mutant.id, mutant.variant_label);
                    println!("{}", mutant.snippet.display_text());
                }
                eprintln!("{} mutant(s)", mutants.len());
            }
        }
    }
    Ok(())
}

fn cmd_scan(ctx: &Ctx, args: ScanArgs) -> Result<()> {
    let scope = Scope::from_str(&args.scope)?;
    let model = scan(&args.project)?;
    for diagnostic in &model.diagnostics {
        eprintln!(
            "warning: {}:{}: {}",
            diagnostic.file.display(),
            diagnostic.line,
            diagnostic.message
        );
    }
    let case = args
        .case
        .as_deref()
        .map(|id| ctx.registry().case(id))
        .transpose()?;
    let locations = locations_for(&model, scope, case, &PlacementKind::ALL)?;
    ctx.emit(&locations, || {
        for loc in &locations {
            println!(
                "{}:{} {} in {}{}",
                loc.file.display(),
                loc.line,
                loc.kind,
                loc.enclosing_class,
                loc.enclosing_method
                    .as_deref()
                    .map(|m| format!("#{m}"))
                    .unwrap_or_default()
            );
        }
        eprintln!(
            "{} location(s), {} parsed file(s)",
            locations.len(),
            model.files.len()
        );
    })
}

#[derive(Serialize)]
struct SeedSummary {
    records: usize,
    skipped: usize,
    copies: Vec<PathBuf>,
    log: PathBuf,
}

fn cmd_seed(ctx: &Ctx, args: SeedArgs) -> Result<()> {
    let scope = Scope::from_str(&args.scope)?;
    let mode = SeedMode::from_str(&args.mode)?;
    let registry = ctx.registry();
    let api = ctx.model();
    let project = scan(&args.project)?;
    for diagnostic in &project.diagnostics {
        eprintln!(
            "warning: excluded {}:{}: {}",
            diagnostic.file.display(),
            diagnostic.line,
            diagnostic.message
        );
    }
    let mutants = select_mutants(registry, api, &args.selection)?;
    let entries = plan(&project, registry, mutants, scope)?;
    let options = SeedOptions {
        scope,
        mode,
        in_place: args.in_place,
    };
    let report = seed(&project, api, &entries, &options, &args.out)?;
    let log_path = args
        .log
        .clone()
        .unwrap_or_else(|| args.out.join("mutation-log.jsonl"));
    emit_log(&report.records, &log_path)?;
    for skip in &report.skipped {
        eprintln!(
            "skipped {} at {}:{}: {}",
            skip.mutant_id, skip.file, skip.line, skip.reason
        );
    }
    let summary = SeedSummary {
        records: report.records.len(),
        skipped: report.skipped.len(),
        copies: report.copies.clone(),
        log: log_path.clone(),
    };
    ctx.emit(&summary, || {
        println!(
            "seeded {} record(s) into {} cop(ies), {} skipped",
            summary.records,
            summary.copies.len(),
            summary.skipped
        );
        println!("log: {}", log_path.display());
    })
}

#[derive(Serialize)]
struct CheckSummary {
    files_checked: usize,
    syntax_errors: usize,
    compiled: Option<bool>,
}

fn cmd_check(ctx: &Ctx, args: CheckArgs) -> Result<()> {
    let report = check_syntax(&args.copy)?;
    for diagnostic in &report.diagnostics {
        eprintln!(
            "{}:{}: {}",
            diagnostic.file.display(),
            diagnostic.line,
            diagnostic.message
        );
    }
    let mut compiled = None;
    if args.compile {
        let template = args
            .compile_cmd
            .clone()
            .unwrap_or_else(default_compile_command);
        let outcome = compile_check(&args.copy, &template, args.timeout)?;
        if !outcome.stderr.trim().is_empty() {
            eprintln!("{}", outcome.stderr.trim_end());
        }
        compiled = Some(outcome.success);
    }
    let summary = CheckSummary {
        files_checked: report.files_checked,
        syntax_errors: report.diagnostics.len(),
        compiled,
    };
    ctx.emit(&summary, || {
        println!(
            "{} file(s) checked, {} syntax error(s){}",
            summary.files_checked,
            summary.syntax_errors,
            match summary.compiled {
                Some(true) => ", compiled OK",
                Some(false) => ", compile FAILED",
                None => "",
            }
        );
    })?;
    if !report.ok() || compiled == Some(false) {
        return Err(stage_err(
            EXIT_SEEDING,
            format!("copy {} failed verification", args.copy.display()),
        ));
    }
    Ok(())
}

/// Find one mutant by id by regenerating its (case, operator) pair.
fn find_mutant(registry: &Registry, model: &ApiModel, mutant_id: &str) -> Result<Mutant> {
    let parts: Vec<&str> = mutant_id.split("__").collect();
    let not_found = || {
        stage_err(
            EXIT_VALIDATION,
            format!("no mutant with id `{mutant_id}` (expected <case>__<OP>__<variant>)"),
        )
    };
    let (case_id, op_str) = match parts.as_slice() {
        [case, op] => (*case, *op),
        [case, op, _] => (*case, *op),
        _ => return Err(not_found()),
    };
    let case = registry.case(case_id)?;
    let operator = OperatorId::from_str(op_str)?;
    if operator == OperatorId::Base {
        let mutant = base_instantiation(case, model)?;
        return if mutant.id == mutant_id {
            Ok(mutant)
        } else {
            Err(not_found())
        };
    }
    let variant: usize = parts
        .get(2)
        .and_then(|v| v.parse().ok())
        .ok_or_else(not_found)?;
    let mut config = OperatorConfig::for_registry(registry);
    config.variant_cap = config.variant_cap.max(variant);
    apply_operator(case, operator, model, &config)?
        .into_iter()
        .find(|m| m.id == mutant_id)
        .ok_or_else(not_found)
}

fn cmd_minimize(ctx: &Ctx, args: MinimizeArgs) -> Result<()> {
    let mutant = find_mutant(ctx.registry(), ctx.model(), &args.mutant_id)?;
    let app = generate_minimal_app(&mutant, ctx.model(), &args.out)?;
    ctx.emit(&app.records, || {
        println!("minimal app: {}", app.dir.display());
        for record in &app.records {
            println!(
                "  {} {}:{}..{}",
                record.mutant_id, record.file, record.start_line, record.end_line
            );
        }
    })
}

fn load_column_map(path: Option<&Path>) -> Result<ColumnMap> {
    match path {
        Some(p) => Ok(ColumnMap::load(p)?),
        None => Ok(ColumnMap::default()),
    }
}

struct AnalyzeInputs<'a> {
    log: &'a Path,
    report: &'a Path,
    format: Option<&'a str>,
    column_map: Option<&'a Path>,
    baseline: Option<&'a Path>,
    drift: usize,
    rules: &'a [String],
    group_by: Option<&'a str>,
    out: Option<&'a Path>,
}

fn run_analysis(ctx: &Ctx, inputs: AnalyzeInputs<'_>) -> Result<KillReport> {
    let records = load_log(inputs.log)?;
    let format = inputs
        .format
        .map(ReportFormat::from_str)
        .transpose()?;
    let map = load_column_map(inputs.column_map)?;
    let parsed = load_report(inputs.report, format, &map)?;
    for diagnostic in &parsed.diagnostics {
        eprintln!("report: skipped {diagnostic}");
    }
    let findings = match inputs.baseline {
        Some(path) => {
            let base = load_report(path, format, &map)?;
            for diagnostic in &base.diagnostics {
                eprintln!("baseline: skipped {diagnostic}");
            }
            baseline_diff(parsed.findings, &base.findings, inputs.drift)
        }
        None => parsed.findings,
    };
    let options = MatchOptions {
        drift: inputs.drift,
        rule_filter: if inputs.rules.is_empty() {
            None
        } else {
            Some(inputs.rules.to_vec())
        },
    };
    let report = match_findings(&records, &findings, &options)?;
    if let Some(out) = inputs.out {
        if let Some(parent) = out.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
        }
        std::fs::write(out, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", out.display()))?;
    }
    if ctx.json {
        let mut value = serde_json::to_value(&report)?;
        if let Some(key) = inputs.group_by {
            let group = GroupBy::from_str(key)?;
            let rows = summarize(&report, group, Some(ctx.registry()))?;
            value["groups"] = serde_json::to_value(rows)?;
        }
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        println!(
            "killed {}/{} ({:.1}%), {} unmatched finding(s)",
            report.killed.len(),
            report.total_records,
            report.kill_ratio * 100.0,
            report.unmatched_findings.len()
        );
        if let Some(key) = inputs.group_by {
            let group = GroupBy::from_str(key)?;
            let rows = summarize(&report, group, Some(ctx.registry()))?;
            for row in rows {
                println!(
                    "  {:<40} {}/{} ({:.1}%)",
                    row.key,
                    row.killed,
                    row.total,
                    row.ratio * 100.0
                );
            }
        }
        for record in &report.unkilled {
            println!(
                "  unkilled {} at {}:{}",
                record.mutant_id, record.file, record.start_line
            );
        }
    }
    Ok(report)
}

fn cmd_analyze(ctx: &Ctx, args: AnalyzeArgs) -> Result<()> {
    run_analysis(
        ctx,
        AnalyzeInputs {
            log: &args.log,
            report: &args.report,
            format: args.format.as_deref(),
            column_map: args.column_map.as_deref(),
            baseline: args.baseline.as_deref(),
            drift: args.drift,
            rules: &args.rules,
            group_by: args.group_by.as_deref(),
            out: args.out.as_deref(),
        },
    )
    .map(|_| ())
}

fn cmd_run(ctx: &Ctx, args: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        stage_err(
            EXIT_VALIDATION,
            format!("config {}: {e}", args.config.display()),
        )
    })?;
    let scope = Scope::from_str(&config.scope)?;
    let registry = ctx.registry();
    let api = ctx.model();
    let selection = SelectionArgs {
        cases: config.cases.clone(),
        operators: config.operators.clone(),
        body_op: config.body_op.clone(),
        condition: config.condition.clone(),
        variant_cap: config.variant_cap,
    };
    let project = scan(&config.project)?;
    let mutants = select_mutants(registry, api, &selection)?;
    let entries = plan(&project, registry, mutants, scope)?;
    if args.dry_run {
        let placements: usize = entries.iter().map(|e| e.locations.len()).sum();
        println!(
            "dry run: {} mutant(s), {} planned placement(s) across {} file(s)",
            entries.len(),
            placements,
            project.files.len()
        );
        return Ok(());
    }
    let options = SeedOptions {
        scope,
        mode: config
            .mode
            .as_deref()
            .map(SeedMode::from_str)
            .transpose()?
            .unwrap_or(SeedMode::Bulk),
        in_place: config.in_place,
    };
    let report = seed(&project, api, &entries, &options, &config.out)?;
    let log_path = config
        .log
        .clone()
        .unwrap_or_else(|| config.out.join("mutation-log.jsonl"));
    emit_log(&report.records, &log_path)?;
    println!(
        "seeded {} record(s) into {} cop(ies), {} skipped; log: {}",
        report.records.len(),
        report.copies.len(),
        report.skipped.len(),
        log_path.display()
    );
    if let Some(report_path) = &config.report {
        run_analysis(
            ctx,
            AnalyzeInputs {
                log: &log_path,
                report: report_path,
                format: config.format.as_deref(),
                column_map: config.column_map.as_deref(),
                baseline: config.baseline.as_deref(),
                drift: config.drift.unwrap_or(DEFAULT_DRIFT),
                rules: &config.rules,
                group_by: config.group_by.as_deref(),
                out: None,
            },
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry
// ---------------------------------------------------------------------------

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.globals.jobs {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let ctx = Ctx::new(&cli.globals)?;
    match cli.command {
        Command::Taxonomy { command } => cmd_taxonomy(&ctx, command),
        Command::ApiModel { command } => cmd_api_model(&ctx, command),
        Command::Generate(args) => cmd_generate(&ctx, args),
        Command::Scan(args) => cmd_scan(&ctx, args),
        Command::Seed(args) => cmd_seed(&ctx, args),
        Command::Check(args) => cmd_check(&ctx, args),
        Command::Minimize(args) => cmd_minimize(&ctx, args),
        Command::Analyze(args) => cmd_analyze(&ctx, args),
        Command::Run(args) => cmd_run(&ctx, args),
    }
}

/// Die quietly on a closed pipe (`cryptomut ... | head`) instead of
/// panicking on the first failed write.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code_for(&err));
    }
}
