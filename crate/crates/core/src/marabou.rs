//! Marabou text query files, the per-property manifest, and verdict
//! interpretation.
//!
//! One constraint per line:
//!
//! ```text
//! y0 +2x0 -1x1 <= -1.25
//! ```
//!
//! The first term carries only a `-` sign when negative, later terms carry
//! ` +` or ` -`. A coefficient of 1 is omitted; other coefficients are
//! decimals when exact, else `p/q`.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::diagnostics::Diagnostic;
use crate::expr::SolverVar;
use crate::network::{Digest, NetworkContext};
use crate::query::{LinearConstraint, LinearQuery, Polarity, PropertyPlan, Relation};
use crate::scalar::{parse_rational, render_rational, Rational};

#[derive(Debug, Error)]
pub enum MarabouError {
    #[error("atom is not linear: {0}")]
    NonLinearAtom(String),
    #[error("variable {0} is outside the metanetwork")]
    VariableOutOfRange(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("expected {expected} verdicts, got {actual}")]
    VerdictCountMismatch { expected: usize, actual: usize },
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> MarabouError + '_ {
    move |source| MarabouError::Io { path: path.display().to_string(), source }
}

/// Renders one constraint in the query file grammar.
pub fn render_constraint(c: &LinearConstraint) -> String {
    let mut out = String::new();
    for (i, (var, coeff)) in c.terms.iter().enumerate() {
        if i > 0 {
            out.push(' ');
            if !coeff.is_negative() {
                out.push('+');
            }
        }
        if !coeff.is_one() {
            out.push_str(&render_rational(coeff));
        }
        out.push_str(&var.to_string());
    }
    out.push_str(&format!(" {} {}", c.relation.symbol(), render_rational(&c.constant)));
    out
}

/// An emitted query file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarabouQueryFile {
    pub path: PathBuf,
    pub lines: Vec<String>,
    /// `(network, file)` per metanetwork application.
    pub manifest: Vec<(String, PathBuf)>,
}

/// Renders a query as file content, with a warning per strict relation.
pub fn render_query(q: &LinearQuery) -> (String, Vec<Diagnostic>) {
    let mut text = String::new();
    let mut warnings = Vec::new();
    for c in &q.constraints {
        if c.terms.is_empty() {
            continue;
        }
        let line = render_constraint(c);
        if c.relation.is_strict() {
            warnings.push(Diagnostic::warning(
                None,
                format!("query {}: strict relation in `{line}` is emitted verbatim; external solvers may weaken it", q.index),
            ));
        }
        text.push_str(&line);
        text.push('\n');
    }
    (text, warnings)
}

pub fn emit_query(q: &LinearQuery, path: &Path, ctx: &NetworkContext) -> Result<(MarabouQueryFile, Vec<Diagnostic>), MarabouError> {
    check_bounds(q)?;
    let (text, warnings) = render_query(q);
    std::fs::write(path, &text).map_err(io_error(path))?;
    let manifest = q
        .meta
        .applications
        .iter()
        .map(|a| (a.network.clone(), ctx.get(&a.network).map(|e| e.path.clone()).unwrap_or_default()))
        .collect();
    let lines = text.lines().map(str::to_string).collect();
    Ok((MarabouQueryFile { path: path.to_path_buf(), lines, manifest }, warnings))
}

fn check_bounds(q: &LinearQuery) -> Result<(), MarabouError> {
    for c in &q.constraints {
        for v in c.vars() {
            let ok = match v {
                SolverVar::Input(i) => i < q.meta.total_inputs,
                SolverVar::Output(j) => j < q.meta.total_outputs,
            };
            if !ok {
                return Err(MarabouError::VariableOutOfRange(v.to_string()));
            }
        }
    }
    Ok(())
}

pub const MANIFEST_FILE: &str = "queries.manifest";
const MANIFEST_HEADER: &str = "vspec-manifest 1";

/// One network application recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestNetwork {
    pub name: String,
    pub path: PathBuf,
    pub digest: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestQuery {
    pub file: String,
    pub index: usize,
    pub networks: Vec<ManifestNetwork>,
}

/// The sidecar describing a property directory:
///
/// ```text
/// vspec-manifest 1
/// property safe forall
/// query query1.txt
/// controller /abs/controller.vnet <sha256>
/// query query2.txt
/// controller /abs/controller.vnet <sha256>
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub property: String,
    pub polarity: Polarity,
    pub disjuncts: usize,
    pub queries: Vec<ManifestQuery>,
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{MANIFEST_HEADER}")?;
        writeln!(f, "property {} {} {}", self.property, self.polarity.keyword(), self.disjuncts)?;
        for q in &self.queries {
            writeln!(f, "query {}", q.file)?;
            for n in &q.networks {
                writeln!(f, "{} {} {}", n.name, n.path.display(), n.digest)?;
            }
        }
        Ok(())
    }
}

pub fn parse_manifest(text: &str, path: &str) -> Result<Manifest, MarabouError> {
    let bad = |line: usize, message: &str| MarabouError::Malformed { path: path.to_string(), line, message: message.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == MANIFEST_HEADER => {}
        Some((n, _)) => return Err(bad(n, "missing manifest header")),
        None => return Err(bad(1, "empty manifest")),
    }
    let (n, line) = lines.next().ok_or_else(|| bad(2, "missing property line"))?;
    let words: Vec<&str> = line.split_whitespace().collect();
    let (property, polarity, disjuncts) = match words.as_slice() {
        ["property", name, pol, count] => {
            let polarity = match *pol {
                "forall" => Polarity::AllForall,
                "exists" => Polarity::AllExists,
                _ => return Err(bad(n, "polarity must be `forall` or `exists`")),
            };
            let count = count.parse().map_err(|_| bad(n, "bad disjunct count"))?;
            (name.to_string(), polarity, count)
        }
        _ => return Err(bad(n, "expected `property <name> <polarity> <count>`")),
    };
    let mut queries: Vec<ManifestQuery> = Vec::new();
    for (n, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["query", file] => {
                let index = file
                    .strip_prefix("query")
                    .and_then(|s| s.strip_suffix(".txt"))
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(n, "query files are named query<k>.txt"))?;
                queries.push(ManifestQuery { file: file.to_string(), index, networks: Vec::new() });
            }
            [name, file, digest] => {
                let q = queries.last_mut().ok_or_else(|| bad(n, "network line before any query"))?;
                let digest = digest.parse().map_err(|_| bad(n, "bad digest"))?;
                q.networks.push(ManifestNetwork { name: name.to_string(), path: PathBuf::from(file), digest });
            }
            _ => return Err(bad(n, "unrecognised manifest line")),
        }
    }
    Ok(Manifest { property, polarity, disjuncts, queries })
}

/// Writes `<out>/<property>/query<k>.txt` and the manifest.
pub fn emit_plan(plan: &PropertyPlan, ctx: &NetworkContext, out: &Path) -> Result<(Vec<MarabouQueryFile>, Vec<Diagnostic>), MarabouError> {
    let dir = out.join(&plan.name);
    std::fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let mut manifest = Manifest { property: plan.name.clone(), polarity: plan.polarity, disjuncts: plan.disjuncts, queries: Vec::new() };
    for q in &plan.queries {
        let file = format!("query{}.txt", q.index);
        let (emitted, w) = emit_query(q, &dir.join(&file), ctx)?;
        warnings.extend(w);
        let networks = q
            .meta
            .applications
            .iter()
            .filter_map(|a| ctx.get(&a.network).map(|e| (a, e)))
            .map(|(a, e)| ManifestNetwork { name: a.network.clone(), path: e.path.clone(), digest: e.digest })
            .collect();
        manifest.queries.push(ManifestQuery { file, index: q.index, networks });
        files.push(emitted);
    }
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_string()).map_err(io_error(&path))?;
    Ok((files, warnings))
}

/// Reads a query file back into constraints.
pub fn parse_query_file(text: &str, path: &str) -> Result<Vec<LinearConstraint>, MarabouError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_constraint(line).map_err(|message| MarabouError::Malformed {
            path: path.to_string(),
            line: i + 1,
            message,
        })?);
    }
    Ok(out)
}

pub fn parse_constraint(line: &str) -> Result<LinearConstraint, String> {
    let words: Vec<&str> = line.split_whitespace().collect();
    if words.len() < 3 {
        return Err("expected `<terms> <relation> <constant>`".into());
    }
    let relation = match words[words.len() - 2] {
        "<=" => Relation::Le,
        "<" => Relation::Lt,
        ">=" => Relation::Ge,
        ">" => Relation::Gt,
        "=" => Relation::Eq,
        other => return Err(format!("unknown relation `{other}`")),
    };
    let constant = parse_rational(words[words.len() - 1]).ok_or("bad constant")?;
    let mut terms = BTreeMap::new();
    for word in &words[..words.len() - 2] {
        let body = word.strip_prefix('+').unwrap_or(word);
        let split = body.rfind(['x', 'y']).ok_or_else(|| format!("term `{word}` has no variable"))?;
        let (coeff_text, var_text) = body.split_at(split);
        let index: usize = var_text[1..].parse().map_err(|_| format!("bad variable `{var_text}`"))?;
        let var = if var_text.starts_with('x') { SolverVar::Input(index) } else { SolverVar::Output(index) };
        let coeff = match coeff_text {
            "" => Rational::one(),
            "-" => -Rational::one(),
            text => parse_rational(text).ok_or_else(|| format!("bad coefficient `{text}`"))?,
        };
        let entry = terms.entry(var).or_insert_with(Rational::zero);
        *entry += coeff;
    }
    terms.retain(|_, c: &mut Rational| !c.is_zero());
    Ok(LinearConstraint { terms, relation, constant })
}

/// A satisfying assignment to metanetwork variables.
pub type Witness = BTreeMap<SolverVar, Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(Witness),
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyStatus {
    Verified { witness: Option<Witness> },
    Falsified { witness: Option<Witness> },
    NotChecked,
}

impl PropertyStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PropertyStatus::Verified { .. } => "Verified",
            PropertyStatus::Falsified { .. } => "Falsified",
            PropertyStatus::NotChecked => "NotChecked",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            PropertyStatus::Verified { witness } | PropertyStatus::Falsified { witness } => witness.as_ref(),
            PropertyStatus::NotChecked => None,
        }
    }
}

impl fmt::Display for PropertyStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Renders a witness as `x0 = 13/4, y0 = 0`.
pub fn render_witness(w: &Witness) -> String {
    let mut parts: Vec<(SolverVar, &Rational)> = w.iter().map(|(v, r)| (*v, r)).collect();
    parts.sort_by_key(|(v, _)| match v {
        SolverVar::Input(i) => (0, *i),
        SolverVar::Output(j) => (1, *j),
    });
    parts.iter().map(|(v, r)| format!("{v} = {}", render_rational(r))).collect::<Vec<_>>().join(", ")
}

/// Combines per-query verdicts. A negated universal property holds iff
/// every query is unsatisfiable; an existential one iff some query is
/// satisfiable.
pub fn interpret_verdicts(plan: &PropertyPlan, verdicts: &[Verdict]) -> Result<PropertyStatus, MarabouError> {
    if verdicts.len() != plan.queries.len() {
        return Err(MarabouError::VerdictCountMismatch { expected: plan.queries.len(), actual: verdicts.len() });
    }
    let first_sat = verdicts.iter().find_map(|v| match v {
        Verdict::Sat(w) => Some(w.clone()),
        Verdict::Unsat => None,
    });
    Ok(match (plan.polarity, first_sat) {
        (Polarity::AllForall, None) => PropertyStatus::Verified { witness: None },
        (Polarity::AllForall, Some(w)) => PropertyStatus::Falsified { witness: Some(w) },
        (Polarity::AllExists, Some(w)) => PropertyStatus::Verified { witness: Some(w) },
        (Polarity::AllExists, None) => PropertyStatus::Falsified { witness: None },
    })
}
