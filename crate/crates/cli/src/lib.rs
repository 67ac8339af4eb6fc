//! Command-line driver: `vspec compile`, `vspec verify` and `vspec check`.
//!
//! Exit codes depend only on the outcome category:
//!
//! | code | outcome |
//! |------|---------|
//! | 0 | success, every requested property Verified |
//! | 1 | compile error, usage error, unknown property, verifier error |
//! | 2 | I/O error, unreadable network file, malformed proof file |
//! | 3 | some property Falsified or NotChecked |
//! | 4 | proof file is stale |

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use vspec_cache::{
    read_proof_file, timestamp_now, write_proof_file, ArtifactRecord, CacheError, ProofCacheFile, PropertyRecord,
};
use vspec_core::diagnostics::Diagnostic;
use vspec_core::frontend::{load_program, TypedProgram};
use vspec_core::itp::{emit_itp_module, module_name_for};
use vspec_core::marabou::{emit_plan, interpret_verdicts, render_witness, MarabouError, PropertyStatus, Verdict};
use vspec_core::network::{analyze_network_types, hash_bytes, AnalysisError, Digest, NetworkContext};
use vspec_core::normalise::{print_normalised, prune_non_prop, NormEnv, NormalisedProperty};
use vspec_core::query::{compile_property, print_plans, PropertyPlan};
use vspec_core::Rational;
use vspec_verifier::{check_query, CheckOptions, VerifyError, DEFAULT_PHASE_BUDGET};

pub const VERIFIER_ID: &str = concat!("vspec-builtin ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(name = "vspec", version, about = "Compile and verify neural-network specifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Summary format on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile properties to verifier queries or an interface module.
    Compile(CompileArgs),
    /// Verify properties with the built-in verifier and record the results.
    Verify(VerifyArgs),
    /// Report recorded statuses after re-hashing the artifacts.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Marabou,
    Agda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Builtin,
    EmitOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    /// Normalised properties in surface syntax.
    Normalised,
    /// Linear queries with their metanetwork tables.
    Queries,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Specification source file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Network file for a declared network, as `name:path`.
    #[arg(long = "network", value_name = "NAME:PATH", value_parser = parse_binding)]
    pub networks: Vec<(String, PathBuf)>,
    /// Restrict to the named properties.
    #[arg(long = "property", value_name = "NAME")]
    pub properties: Vec<String>,
    /// Print an intermediate stage to standard output.
    #[arg(long, value_enum)]
    pub emit: Vec<Emit>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub common: SpecArgs,
    #[arg(long, value_enum, default_value_t = Target::Marabou)]
    pub target: Target,
    /// Directory for generated files.
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    /// Proof file cited by the interface module, and updated with its digest.
    #[arg(long)]
    pub proof_file: Option<PathBuf>,
    /// Interface module name; derived from the spec file name by default.
    #[arg(long)]
    pub module_name: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: SpecArgs,
    /// Proof file to write; `<spec>.vclp` by default.
    #[arg(long)]
    pub proof_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Solver::Builtin)]
    pub solver: Solver,
    /// Also write the query files under this directory.
    #[arg(long, value_name = "DIR")]
    pub queries: Option<PathBuf>,
    /// Maximum number of ReLU nodes left unfixed by bound propagation.
    #[arg(long, default_value_t = DEFAULT_PHASE_BUDGET)]
    pub phase_budget: usize,
    /// Skip interval bound propagation.
    #[arg(long)]
    pub no_bound_propagation: bool,
    /// Worker threads for phase enumeration.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub proof_file: PathBuf,
    /// Restrict to the named properties.
    #[arg(long = "property", value_name = "NAME")]
    pub properties: Vec<String>,
    /// Also compare an interface module against its recorded digest.
    #[arg(long, value_name = "FILE")]
    pub module: Option<PathBuf>,
}

fn parse_binding(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once(':') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected `name:path`, got `{s}`")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Success,
    Error,
    Io,
    NotVerified,
    Stale,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Error => 1,
            Outcome::Io => 2,
            Outcome::NotVerified => 3,
            Outcome::Stale => 4,
        }
    }
}

/// Everything an invocation prints, plus its outcome.
#[derive(Debug)]
pub struct Report {
    pub outcome: Outcome,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    outcome: Outcome,
    message: String,
}

impl Failure {
    fn new(outcome: Outcome, message: impl std::fmt::Display) -> Failure {
        Failure { outcome, message: format!("error: {message}") }
    }

    /// An already rendered diagnostic.
    fn rendered(outcome: Outcome, diagnostic: String) -> Failure {
        Failure { outcome, message: diagnostic }
    }
}

type Result<T> = std::result::Result<T, Failure>;

#[derive(Default)]
struct Log {
    lines: Vec<String>,
    diagnostics: Vec<String>,
    emitted: BTreeMap<&'static str, String>,
    properties: Vec<Value>,
}

impl Log {
    fn diag(&mut self, d: String) {
        self.diagnostics.push(d);
    }

    fn status(&mut self, name: &str, status: &PropertyStatus, queries: Option<usize>) {
        self.lines.push(format!("{name}: {status}"));
        let mut entry = json!({ "name": name, "status": status.label() });
        if let Some(q) = queries {
            entry["queries"] = json!(q);
        }
        if let Some(w) = status.witness() {
            self.lines.push(format!("  witness: {}", render_witness(w)));
            let map: serde_json::Map<String, Value> =
                w.iter().map(|(v, r)| (v.to_string(), json!(exact(r)))).collect();
            entry["witness"] = Value::Object(map);
        }
        self.properties.push(entry);
    }
}

fn exact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn run(cli: &Cli) -> Report {
    let mut log = Log::default();
    let (command, result) = match &cli.command {
        Command::Compile(a) => ("compile", compile(a, &mut log)),
        Command::Verify(a) => ("verify", verify(a, &mut log)),
        Command::Check(a) => ("check", check(a, &mut log)),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(f) => {
            log.diag(f.message);
            f.outcome
        }
    };
    let stdout = match cli.format {
        Format::Text => {
            let mut out = String::new();
            for text in log.emitted.values() {
                out.push_str(text);
                if !text.ends_with('\n') {
                    out.push('\n');
                }
            }
            for l in &log.lines {
                out.push_str(l);
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let summary = json!({
                "command": command,
                "exit_code": outcome.code(),
                "properties": log.properties,
                "diagnostics": log.diagnostics,
                "emitted": log.emitted,
            });
            format!("{summary:#}\n")
        }
    };
    let stderr = log.diagnostics.iter().map(|d| format!("{d}\n")).collect();
    Report { outcome, stdout, stderr }
}

struct Loaded {
    spec_path: PathBuf,
    spec_digest: Digest,
    source_program: TypedProgram,
    ctx: NetworkContext,
    env: NormEnv,
    properties: Vec<NormalisedProperty>,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn canonical(path: &Path) -> PathBuf {
    std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn load(args: &SpecArgs, log: &mut Log) -> Result<Loaded> {
    let file = display(&args.spec);
    let bytes = std::fs::read(&args.spec).map_err(|e| Failure::new(Outcome::Io, format!("{file}: {e}")))?;
    let source = String::from_utf8(bytes).map_err(|_| Failure::new(Outcome::Io, format!("{file}: not UTF-8")))?;
    let program = load_program(&source).map_err(|e| Failure::rendered(Outcome::Error, e.diagnostic().render(&file)))?;
    let mut files = BTreeMap::new();
    for (name, path) in &args.networks {
        if files.insert(name.clone(), path.clone()).is_some() {
            return Err(Failure::new(Outcome::Error, format!("network `{name}` is bound more than once")));
        }
    }
    let (analysed, ctx) = analyze_network_types(&program, &files).map_err(|e| {
        let outcome = if matches!(e, AnalysisError::Load { .. }) { Outcome::Io } else { Outcome::Error };
        Failure::rendered(outcome, Diagnostic::error(None, e.to_string()).render(&file))
    })?;
    let env = NormEnv::new(&analysed, &ctx);
    let (mut properties, warnings) = prune_non_prop(&analysed, &env)
        .map_err(|(name, e)| Failure::rendered(Outcome::Error, format!("{file}: error: property `{name}`: {e}")))?;
    for w in warnings {
        log.diag(w.render(&file));
    }
    for name in &args.properties {
        if !properties.iter().any(|p| &p.name == name) {
            return Err(Failure::new(Outcome::Error, format!("no property `{name}` in {file}")));
        }
    }
    if !args.properties.is_empty() {
        properties.retain(|p| args.properties.contains(&p.name));
    }
    if args.emit.contains(&Emit::Normalised) {
        log.emitted.insert("normalised", print_normalised(&properties));
    }
    Ok(Loaded {
        spec_path: canonical(&args.spec),
        spec_digest: hash_bytes(source.as_bytes()),
        source_program: program,
        ctx,
        env,
        properties,
    })
}

fn plans(args: &SpecArgs, loaded: &Loaded, log: &mut Log) -> Result<Vec<PropertyPlan>> {
    let file = display(&args.spec);
    let plans = loaded
        .properties
        .iter()
        .map(|p| {
            compile_property(p, &loaded.ctx, &loaded.env).map_err(|e| {
                Failure::rendered(Outcome::Error, Diagnostic::error(Some(p.span), format!("property `{}`: {e}", p.name)).render(&file))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if args.emit.contains(&Emit::Queries) {
        log.emitted.insert("queries", print_plans(&plans));
    }
    Ok(plans)
}

fn write_queries(plans: &[PropertyPlan], ctx: &NetworkContext, dir: &Path, log: &mut Log) -> Result<()> {
    for plan in plans {
        let (_, warnings) = emit_plan(plan, ctx, dir).map_err(|e| {
            let outcome = if matches!(e, MarabouError::Io { .. }) { Outcome::Io } else { Outcome::Error };
            Failure::new(outcome, format!("property `{}`: {e}", plan.name))
        })?;
        for w in warnings {
            log.diag(w.render(&display(&dir.join(&plan.name))));
        }
    }
    Ok(())
}

fn read_existing(path: &Path) -> Result<Option<ProofCacheFile>> {
    if !path.exists() {
        return Ok(None);
    }
    read_proof_file(path).map(Some).map_err(|e| cache_failure(path, e))
}

fn cache_failure(path: &Path, e: CacheError) -> Failure {
    let outcome = match e {
        CacheError::StaleCache { .. } => Outcome::Stale,
        CacheError::UnknownProperty(_) => Outcome::Error,
        CacheError::MalformedProofFile { .. } | CacheError::Io { .. } => Outcome::Io,
    };
    Failure::new(outcome, format!("{}: {e}", display(path)))
}

/// Fresh spec and network records, keeping whatever the old file recorded
/// for the same spec contents.
fn base_proof_file(loaded: &Loaded, existing: Option<ProofCacheFile>) -> ProofCacheFile {
    let spec = ArtifactRecord { path: loaded.spec_path.clone(), digest: loaded.spec_digest };
    let mut file = match existing {
        Some(old) if old.spec.as_ref().map(|s| s.digest) == Some(loaded.spec_digest) => old,
        Some(old) => ProofCacheFile { itp_digest: old.itp_digest, ..ProofCacheFile::default() },
        None => ProofCacheFile::default(),
    };
    file.spec = Some(spec);
    file.networks = loaded
        .ctx
        .entries
        .iter()
        .map(|(name, e)| (name.clone(), ArtifactRecord { path: e.path.clone(), digest: e.digest }))
        .collect();
    file
}

fn default_proof_file(spec: &Path) -> PathBuf {
    spec.with_extension("vclp")
}

fn compile(args: &CompileArgs, log: &mut Log) -> Result<Outcome> {
    let loaded = load(&args.common, log)?;
    let plans = plans(&args.common, &loaded, log)?;
    let io = |path: &Path, e: std::io::Error| Failure::new(Outcome::Io, format!("{}: {e}", display(path)));
    match args.target {
        Target::Marabou => {
            write_queries(&plans, &loaded.ctx, &args.output, log)?;
            for plan in &plans {
                log.lines
                    .push(format!("{}: {} queries in {}", plan.name, plan.queries.len(), display(&args.output.join(&plan.name))));
                log.properties.push(json!({ "name": plan.name, "queries": plan.queries.len() }));
            }
        }
        Target::Agda => {
            let proof_path = args.proof_file.clone().unwrap_or_else(|| default_proof_file(&args.common.spec));
            let stem = args.common.spec.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let module_name = args.module_name.clone().unwrap_or_else(|| module_name_for(&stem));
            let module = emit_itp_module(&loaded.source_program, &module_name, &display(&proof_path))
                .map_err(|e| Failure::rendered(Outcome::Error, format!("{}: error: {e}", display(&args.common.spec))))?;
            std::fs::create_dir_all(&args.output).map_err(|e| io(&args.output, e))?;
            let path = args.output.join(format!("{module_name}.agda"));
            std::fs::write(&path, &module.text).map_err(|e| io(&path, e))?;
            let mut proof = base_proof_file(&loaded, read_existing(&proof_path)?);
            proof.itp_digest = Some(module.digest);
            write_proof_file(&proof, &proof_path).map_err(|e| cache_failure(&proof_path, e))?;
            log.lines.push(format!("wrote {}", display(&path)));
            for p in &module.properties {
                log.properties.push(json!({ "name": p }));
            }
        }
    }
    Ok(Outcome::Success)
}

fn verify(args: &VerifyArgs, log: &mut Log) -> Result<Outcome> {
    let loaded = load(&args.common, log)?;
    let plans = plans(&args.common, &loaded, log)?;
    if let Some(dir) = &args.queries {
        write_queries(&plans, &loaded.ctx, dir, log)?;
    }
    let opts = CheckOptions {
        phase_budget: args.phase_budget,
        bound_propagation: !args.no_bound_propagation,
        jobs: args.jobs.max(1),
    };
    let verifier = match args.solver {
        Solver::Builtin => VERIFIER_ID,
        Solver::EmitOnly => "none",
    };
    let mut results = Vec::new();
    for plan in &plans {
        let status = match args.solver {
            Solver::EmitOnly => PropertyStatus::NotChecked,
            Solver::Builtin => {
                let mut verdicts = Vec::new();
                for q in &plan.queries {
                    let (verdict, _) = check_query(q, &loaded.ctx, &opts).map_err(|e| verify_failure(plan, q.index, e))?;
                    let sat = matches!(verdict, Verdict::Sat(_));
                    verdicts.push(verdict);
                    // one satisfiable disjunct settles the property
                    if sat {
                        break;
                    }
                }
                let mut padded = verdicts;
                padded.resize(plan.queries.len(), Verdict::Unsat);
                interpret_verdicts(plan, &padded).map_err(|e| Failure::new(Outcome::Error, e.to_string()))?
            }
        };
        let networks: BTreeSet<String> =
            plan.queries.iter().flat_map(|q| q.meta.networks()).map(|n| n.to_string()).collect();
        results.push((plan, status, networks));
    }
    let proof_path = args.proof_file.clone().unwrap_or_else(|| default_proof_file(&args.common.spec));
    let mut proof = base_proof_file(&loaded, read_existing(&proof_path)?);
    let timestamp = timestamp_now();
    let mut outcome = Outcome::Success;
    for (plan, status, networks) in results {
        log.status(&plan.name, &status, Some(plan.queries.len()));
        if !matches!(status, PropertyStatus::Verified { .. }) {
            outcome = Outcome::NotVerified;
        }
        proof.properties.insert(
            plan.name.clone(),
            PropertyRecord {
                status,
                networks: networks.into_iter().collect(),
                query_count: plan.queries.len(),
                verifier: verifier.to_string(),
                timestamp: timestamp.clone(),
            },
        );
    }
    write_proof_file(&proof, &proof_path).map_err(|e| cache_failure(&proof_path, e))?;
    Ok(outcome)
}

fn verify_failure(plan: &PropertyPlan, index: usize, e: VerifyError) -> Failure {
    let mut message = format!("property `{}`, query {index}: {e}", plan.name);
    if let VerifyError::PhaseBudgetExceeded { unfixed, .. } = e {
        message.push_str(&format!("; rerun with `--phase-budget {unfixed}` or higher"));
    }
    Failure::new(Outcome::Error, message)
}

fn check(args: &CheckArgs, log: &mut Log) -> Result<Outcome> {
    let path = &args.proof_file;
    let proof = read_proof_file(path).map_err(|e| cache_failure(path, e))?;
    if let Some(module) = &args.module {
        proof.check_module(module).map_err(|e| cache_failure(path, e))?;
    }
    let names: Vec<String> = if args.properties.is_empty() {
        proof.properties.keys().cloned().collect()
    } else {
        args.properties.clone()
    };
    if names.is_empty() {
        log.diag(format!("{}: warning: proof file records no properties", display(path)));
    }
    let mut outcome = Outcome::Success;
    for name in &names {
        let status = proof.check_property(name).map_err(|e| cache_failure(path, e))?;
        if !matches!(status, PropertyStatus::Verified { .. }) {
            outcome = Outcome::NotVerified;
        }
        log.status(name, &status, proof.properties.get(name).map(|r| r.query_count));
    }
    Ok(outcome)
}
