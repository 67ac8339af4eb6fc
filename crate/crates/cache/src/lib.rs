//! Proof cache files (`.vclp`).
//!
//! A proof file binds verification results to content digests of the
//! specification and every network file, so a status can be reported later
//! without re-running verification. The format is line-oriented text:
//!
//! ```text
//! vclp 1
//!
//! [spec]
//! digest = <sha256>
//! path = /abs/controller.vcl
//!
//! [network controller]
//! digest = <sha256>
//! path = /abs/controller.vnet
//!
//! [property safe]
//! networks = controller
//! queries = 2
//! status = Falsified
//! timestamp = 2026-10-14T09:30:00Z
//! verifier = vspec-builtin 0.1.0
//! witness.x0 = 13/4
//! witness.y0 = 0
//!
//! [itp]
//! digest = <sha256>
//! ```
//!
//! Sections appear in this order, networks and properties sorted by name,
//! keys sorted within a section. Rationals are written `p/q` (integers
//! bare). Blank lines and lines starting with `#` are ignored on reading.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vspec_core::expr::SolverVar;
use vspec_core::marabou::{PropertyStatus, Witness};
use vspec_core::network::{hash_file, Digest};
use vspec_core::scalar::parse_rational;
use vspec_core::Rational;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{artifact} has changed since verification: expected digest {expected}, found {}", actual.map_or("no file".to_string(), |d| d.to_string()))]
    StaleCache { artifact: String, expected: Digest, actual: Option<Digest> },
    #[error("no property `{0}` in proof file")]
    UnknownProperty(String),
    #[error("malformed proof file, line {line}: {message}")]
    MalformedProofFile { line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactRecord {
    pub path: PathBuf,
    pub digest: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyRecord {
    pub status: PropertyStatus,
    pub networks: Vec<String>,
    pub query_count: usize,
    pub verifier: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofCacheFile {
    pub version: u32,
    pub spec: Option<ArtifactRecord>,
    pub networks: BTreeMap<String, ArtifactRecord>,
    pub properties: BTreeMap<String, PropertyRecord>,
    pub itp_digest: Option<Digest>,
}

impl Default for ProofCacheFile {
    fn default() -> Self {
        ProofCacheFile {
            version: FORMAT_VERSION,
            spec: None,
            networks: BTreeMap::new(),
            properties: BTreeMap::new(),
            itp_digest: None,
        }
    }
}

/// Current UTC time, RFC 3339 with second precision.
pub fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn render_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn var_name(v: &SolverVar) -> String {
    v.to_string()
}

fn parse_var(s: &str) -> Option<SolverVar> {
    let index = s.get(1..)?.parse().ok()?;
    match s.as_bytes().first()? {
        b'x' => Some(SolverVar::Input(index)),
        b'y' => Some(SolverVar::Output(index)),
        _ => None,
    }
}

impl fmt::Display for ProofCacheFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vclp {}", self.version)?;
        let section = |f: &mut fmt::Formatter<'_>, header: &str, mut keys: Vec<(String, String)>| -> fmt::Result {
            keys.sort();
            writeln!(f, "\n[{header}]")?;
            for (k, v) in keys {
                writeln!(f, "{k} = {v}")?;
            }
            Ok(())
        };
        let artifact = |a: &ArtifactRecord| {
            vec![("digest".to_string(), a.digest.to_string()), ("path".to_string(), a.path.display().to_string())]
        };
        if let Some(spec) = &self.spec {
            section(f, "spec", artifact(spec))?;
        }
        for (name, n) in &self.networks {
            section(f, &format!("network {name}"), artifact(n))?;
        }
        for (name, p) in &self.properties {
            let mut keys = vec![
                ("networks".to_string(), p.networks.join(", ")),
                ("queries".to_string(), p.query_count.to_string()),
                ("status".to_string(), p.status.label().to_string()),
                ("timestamp".to_string(), p.timestamp.clone()),
                ("verifier".to_string(), p.verifier.clone()),
            ];
            if let Some(w) = p.status.witness() {
                for (v, r) in w {
                    keys.push((format!("witness.{}", var_name(v)), render_rational(r)));
                }
            }
            section(f, &format!("property {name}"), keys)?;
        }
        if let Some(d) = &self.itp_digest {
            section(f, "itp", vec![("digest".to_string(), d.to_string())])?;
        }
        Ok(())
    }
}

enum Section {
    Spec,
    Network(String),
    Property(String),
    Itp,
}

pub fn parse_proof_file(text: &str) -> Result<ProofCacheFile, CacheError> {
    let bad = |line: usize, message: &str| CacheError::MalformedProofFile { line, message: message.to_string() };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let version = match lines.next() {
        Some((n, l)) => {
            let v = l.strip_prefix("vclp ").ok_or_else(|| bad(n, "missing `vclp` header"))?;
            let v: u32 = v.trim().parse().map_err(|_| bad(n, "bad version"))?;
            if v != FORMAT_VERSION {
                return Err(bad(n, &format!("unsupported version {v}")));
            }
            v
        }
        None => return Err(bad(1, "empty file")),
    };
    let mut sections: Vec<(usize, Section, BTreeMap<String, String>)> = Vec::new();
    for (n, line) in lines {
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let section = match header.split_once(' ') {
                None if header == "spec" => Section::Spec,
                None if header == "itp" => Section::Itp,
                Some(("network", name)) => Section::Network(name.trim().to_string()),
                Some(("property", name)) => Section::Property(name.trim().to_string()),
                _ => return Err(bad(n, &format!("unknown section `{header}`"))),
            };
            sections.push((n, section, BTreeMap::new()));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| bad(n, "expected `key = value`"))?;
        let (_, _, keys) = sections.last_mut().ok_or_else(|| bad(n, "key outside any section"))?;
        if keys.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
            return Err(bad(n, &format!("duplicate key `{}`", key.trim())));
        }
    }
    let mut file = ProofCacheFile { version, ..ProofCacheFile::default() };
    for (n, section, mut keys) in sections {
        let mut take = |k: &str| keys.remove(k).ok_or_else(|| bad(n, &format!("missing `{k}`")));
        let digest = |s: String| s.parse::<Digest>().map_err(|_| bad(n, "bad digest"));
        match section {
            Section::Spec | Section::Network(_) => {
                let record = ArtifactRecord { digest: digest(take("digest")?)?, path: PathBuf::from(take("path")?) };
                match section {
                    Section::Spec => file.spec = Some(record),
                    Section::Network(name) => {
                        file.networks.insert(name, record);
                    }
                    _ => unreachable!(),
                }
            }
            Section::Itp => file.itp_digest = Some(digest(take("digest")?)?),
            Section::Property(name) => {
                let status_label = take("status")?;
                let query_count = take("queries")?.parse().map_err(|_| bad(n, "bad query count"))?;
                let verifier = take("verifier")?;
                let timestamp = take("timestamp")?;
                let networks = take("networks")?
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
                let mut witness = Witness::new();
                for (k, v) in std::mem::take(&mut keys) {
                    let var = k
                        .strip_prefix("witness.")
                        .and_then(parse_var)
                        .ok_or_else(|| bad(n, &format!("unknown key `{k}`")))?;
                    witness.insert(var, parse_rational(&v).ok_or_else(|| bad(n, "bad rational"))?);
                }
                let witness = (!witness.is_empty()).then_some(witness);
                let status = match status_label.as_str() {
                    "Verified" => PropertyStatus::Verified { witness },
                    "Falsified" => PropertyStatus::Falsified { witness },
                    "NotChecked" => PropertyStatus::NotChecked,
                    other => return Err(bad(n, &format!("unknown status `{other}`"))),
                };
                file.properties.insert(name, PropertyRecord { status, networks, query_count, verifier, timestamp });
            }
        }
        if let Some(k) = keys.keys().next() {
            return Err(bad(n, &format!("unknown key `{k}`")));
        }
    }
    Ok(file)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io { path: path.display().to_string(), source }
}

pub fn read_proof_file(path: &Path) -> Result<ProofCacheFile, CacheError> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_proof_file(&text)
}

/// Writes the file atomically: a temporary file in the same directory is
/// renamed over the target.
pub fn write_proof_file(file: &ProofCacheFile, path: &Path) -> Result<(), CacheError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_error(&dir))?;
    tmp.write_all(file.to_string().as_bytes()).map_err(io_error(path))?;
    tmp.persist(path).map_err(|e| CacheError::Io { path: path.display().to_string(), source: e.error })?;
    Ok(())
}

fn check_artifact(artifact: String, record: &ArtifactRecord) -> Result<(), CacheError> {
    let actual = hash_file(&record.path).ok();
    if actual != Some(record.digest) {
        return Err(CacheError::StaleCache { artifact, expected: record.digest, actual });
    }
    Ok(())
}

impl ProofCacheFile {
    /// Re-hashes the spec and the networks of one property.
    pub fn check_property(&self, name: &str) -> Result<PropertyStatus, CacheError> {
        let record = self.properties.get(name).ok_or_else(|| CacheError::UnknownProperty(name.to_string()))?;
        if let Some(spec) = &self.spec {
            check_artifact(format!("specification {}", spec.path.display()), spec)?;
        }
        for net in &record.networks {
            let entry = self.networks.get(net).ok_or_else(|| CacheError::MalformedProofFile {
                line: 0,
                message: format!("property `{name}` references unrecorded network `{net}`"),
            })?;
            check_artifact(format!("network `{net}`"), entry)?;
        }
        Ok(record.status.clone())
    }

    /// Checks every property, in name order.
    pub fn check_all(&self) -> Result<Vec<(String, PropertyStatus)>, CacheError> {
        self.properties.keys().map(|name| Ok((name.clone(), self.check_property(name)?))).collect()
    }

    /// Compares the recorded interface module digest against a file.
    pub fn check_module(&self, module: &Path) -> Result<(), CacheError> {
        let Some(expected) = self.itp_digest else {
            return Err(CacheError::MalformedProofFile { line: 0, message: "no interface module digest recorded".into() });
        };
        let actual = hash_file(module).ok();
        if actual != Some(expected) {
            return Err(CacheError::StaleCache { artifact: format!("module {}", module.display()), expected, actual });
        }
        Ok(())
    }
}

/// Reads the proof file and checks one property.
pub fn check_property(path: &Path, name: &str) -> Result<PropertyStatus, CacheError> {
    read_proof_file(path)?.check_property(name)
}
