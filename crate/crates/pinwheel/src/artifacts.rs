//! Proof artifacts on disk.
//!
//! ```text
//! DIR/manifest
//! DIR/theta-12/lists.csv       instances of L, one per line
//! DIR/theta-12/removed.csv     instances of R
//! DIR/theta-12/schedules.csv   instance|cycle for every line of lists.csv
//! ```
//!
//! Instances are ascending comma-separated integers (`[]` for the empty
//! instance); cycles use 1-based job indices and `0` for idle. Files are
//! sorted by instance. The manifest holds `key=value` lines with the proof
//! parameters and a SHA-256 digest per stage file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pinwheel_core::proof::{certify_chain, BaseMode, ProofChain, ProofParams, ProofStage};
use pinwheel_core::{Instance, Rational, Schedule};
use sha2::{Digest, Sha256};

use crate::error::{io_at, Error, Result};

pub const MANIFEST: &str = "manifest";
pub const FORMAT: &str = "pinwheel-proof-1";
pub const STAGE_FILES: [&str; 3] = ["lists.csv", "removed.csv", "schedules.csv"];

pub fn stage_file(theta: u64, name: &str) -> String {
    format!("theta-{theta}/{name}")
}

pub fn instance_text(a: &Instance) -> String {
    if a.is_empty() {
        "[]".to_string()
    } else {
        a.to_string()
    }
}

/// Parses one canonical integer instance.
pub fn parse_instance_text(text: &str) -> Result<Instance, String> {
    let a: Instance = text.parse().map_err(|e| format!("{e}"))?;
    if !a.is_integral() {
        return Err(format!("`{text}` has fractional periods"));
    }
    if instance_text(&a) != text {
        return Err(format!("`{text}` is not canonical (expected `{}`)", instance_text(&a)));
    }
    Ok(a)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Rendered contents of one stage's files, in [`STAGE_FILES`] order.
pub fn render_stage(stage: &ProofStage) -> [String; 3] {
    let mut lists = String::new();
    let mut schedules = String::new();
    for (a, s) in &stage.lists {
        let text = instance_text(a);
        lists.push_str(&text);
        lists.push('\n');
        let _ = writeln!(schedules, "{text}|{s}");
    }
    let mut removed = String::new();
    for a in &stage.removed {
        removed.push_str(&instance_text(a));
        removed.push('\n');
    }
    [lists, removed, schedules]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub params: ProofParams,
    pub base: BaseMode,
    /// Relative file path to lowercase hex SHA-256.
    pub digests: BTreeMap<String, String>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "format={FORMAT}\nm={}\nd={}\ntheta_min={}\ntheta_max={}\nbase={}\n",
            p.min,
            p.bound,
            p.theta_min,
            p.theta_max,
            match self.base {
                BaseMode::Exact => "exact",
                BaseMode::Saturated => "saturated",
            }
        );
        for (file, digest) in &self.digests {
            let _ = writeln!(out, "sha256:{file}={digest}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Manifest, String> {
        let mut fields = BTreeMap::new();
        let mut digests = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", no + 1))?;
            if let Some(file) = key.strip_prefix("sha256:") {
                digests.insert(file.to_string(), value.to_string());
            } else if fields.insert(key.to_string(), value.to_string()).is_some() {
                return Err(format!("line {}: duplicate key {key}", no + 1));
            }
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| format!("missing key {k}"));
        if get("format")? != FORMAT {
            return Err(format!("unsupported format {}", get("format")?));
        }
        let int = |k: &str| -> Result<u64, String> { get(k)?.parse().map_err(|e| format!("{k}: {e}")) };
        let bound: Rational = get("d")?.parse().map_err(|e| format!("d: {e}"))?;
        let base = match get("base")?.as_str() {
            "exact" => BaseMode::Exact,
            "saturated" => BaseMode::Saturated,
            other => return Err(format!("unknown base mode {other}")),
        };
        let params =
            ProofParams::new(int("m")?, bound, int("theta_min")?, int("theta_max")?).map_err(|e| format!("{e}"))?;
        Ok(Manifest { params, base, digests })
    }
}

/// Writes every stage and the manifest.
pub fn write_chain(dir: &Path, chain: &ProofChain, base: BaseMode) -> Result<()> {
    let mut digests = BTreeMap::new();
    for stage in &chain.stages {
        let sub = dir.join(format!("theta-{}", stage.theta));
        fs::create_dir_all(&sub).map_err(io_at(&sub))?;
        for (name, body) in STAGE_FILES.iter().zip(render_stage(stage)) {
            let path = sub.join(name);
            fs::write(&path, &body).map_err(io_at(&path))?;
            digests.insert(stage_file(stage.theta, name), sha256_hex(body.as_bytes()));
        }
    }
    let manifest = Manifest {
        params: chain.params.clone(),
        base,
        digests,
    };
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest.render()).map_err(io_at(&path))
}

/// Rewrites the manifest digests to match the files currently on disk.
pub fn reseal(dir: &Path) -> Result<()> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_at(&path))?;
    let mut manifest = Manifest::parse(&text).map_err(|message| Error::Format {
        path: path.clone(),
        line: 0,
        message,
    })?;
    for (file, digest) in manifest.digests.iter_mut() {
        let p = dir.join(file);
        *digest = sha256_hex(&fs::read(&p).map_err(io_at(&p))?);
    }
    fs::write(&path, manifest.render()).map_err(io_at(&path))
}

struct Problem {
    file: String,
    line: usize,
    message: String,
}

fn parse_instances(file: &str, body: &str, problems: &mut Vec<Problem>) -> Vec<Instance> {
    let mut out: Vec<Instance> = Vec::new();
    for (no, line) in body.lines().enumerate() {
        match parse_instance_text(line) {
            Ok(a) => {
                if out.last().is_some_and(|prev| *prev >= a) {
                    problems.push(Problem {
                        file: file.to_string(),
                        line: no + 1,
                        message: "not strictly ascending".into(),
                    });
                }
                out.push(a);
            }
            Err(message) => problems.push(Problem {
                file: file.to_string(),
                line: no + 1,
                message,
            }),
        }
    }
    out
}

fn parse_schedules(file: &str, body: &str, problems: &mut Vec<Problem>) -> Vec<(Instance, Schedule)> {
    let mut out = Vec::new();
    for (no, line) in body.lines().enumerate() {
        let mut problem = |message: String| {
            problems.push(Problem {
                file: file.to_string(),
                line: no + 1,
                message,
            })
        };
        let Some((inst, cycle)) = line.split_once('|') else {
            problem("expected instance|cycle".into());
            continue;
        };
        match (parse_instance_text(inst), cycle.parse::<Schedule>()) {
            (Ok(a), Ok(s)) => out.push((a, s)),
            (Err(e), _) => problem(e),
            (_, Err(e)) => problem(format!("{e}")),
        }
    }
    out
}

fn load_stage(theta: u64, problems: &mut Vec<Problem>, bodies: &BTreeMap<String, String>) -> ProofStage {
    let body = |name: &str| bodies.get(&stage_file(theta, name)).map(String::as_str).unwrap_or("");
    let lists_file = stage_file(theta, "lists.csv");
    let sched_file = stage_file(theta, "schedules.csv");
    let lists = parse_instances(&lists_file, body("lists.csv"), problems);
    let removed = parse_instances(&stage_file(theta, "removed.csv"), body("removed.csv"), problems);
    let schedules = parse_schedules(&sched_file, body("schedules.csv"), problems);
    let keys: Vec<&Instance> = schedules.iter().map(|(a, _)| a).collect();
    if keys != lists.iter().collect::<Vec<_>>() {
        problems.push(Problem {
            file: sched_file,
            line: 0,
            message: format!("instances differ from {lists_file}"),
        });
    }
    ProofStage {
        theta,
        lists: schedules.into_iter().collect(),
        removed: removed.into_iter().collect::<BTreeSet<_>>(),
    }
}

/// Reads a proof directory, failing on the first problem.
pub fn read_chain(dir: &Path) -> Result<(ProofChain, BaseMode)> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_at(&path))?;
    let manifest = Manifest::parse(&text).map_err(|message| Error::Format {
        path: path.clone(),
        line: 0,
        message,
    })?;
    let mut bodies = BTreeMap::new();
    for theta in manifest.params.thetas() {
        for name in STAGE_FILES {
            let file = stage_file(theta, name);
            let p = dir.join(&file);
            bodies.insert(file, fs::read_to_string(&p).map_err(io_at(&p))?);
        }
    }
    let mut problems = Vec::new();
    let stages = manifest
        .params
        .thetas()
        .map(|t| load_stage(t, &mut problems, &bodies))
        .collect();
    if let Some(p) = problems.into_iter().next() {
        return Err(Error::Format {
            path: dir.join(p.file),
            line: p.line,
            message: p.message,
        });
    }
    Ok((
        ProofChain {
            params: manifest.params,
            stages,
        },
        manifest.base,
    ))
}

/// Certification verdict with machine-readable reasons, one per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CertifyReport {
    pub reasons: Vec<String>,
}

impl CertifyReport {
    pub fn accepted(&self) -> bool {
        self.reasons.is_empty()
    }
}

/// Checks digests, file syntax and ordering, then the chain properties.
/// Never solves; every problem found is reported.
pub fn certify_dir(dir: &Path) -> CertifyReport {
    let mut reasons = Vec::new();
    let path: PathBuf = dir.join(MANIFEST);
    let manifest = match fs::read_to_string(&path) {
        Ok(text) => match Manifest::parse(&text) {
            Ok(m) => m,
            Err(e) => {
                reasons.push(format!("manifest invalid: {e}"));
                return CertifyReport { reasons };
            }
        },
        Err(e) => {
            reasons.push(format!("missing-file {MANIFEST}: {e}"));
            return CertifyReport { reasons };
        }
    };
    let mut bodies = BTreeMap::new();
    let mut expected = BTreeSet::new();
    for theta in manifest.params.thetas() {
        for name in STAGE_FILES {
            let file = stage_file(theta, name);
            expected.insert(file.clone());
            let bytes = match fs::read(dir.join(&file)) {
                Ok(b) => b,
                Err(_) => {
                    reasons.push(format!("missing-file {file}"));
                    continue;
                }
            };
            match manifest.digests.get(&file) {
                None => reasons.push(format!("missing-digest {file}")),
                Some(d) if *d != sha256_hex(&bytes) => reasons.push(format!("digest-mismatch {file}")),
                Some(_) => {}
            }
            match String::from_utf8(bytes) {
                Ok(text) => {
                    bodies.insert(file, text);
                }
                Err(_) => reasons.push(format!("not-utf8 {file}")),
            }
        }
    }
    for file in manifest.digests.keys().filter(|f| !expected.contains(*f)) {
        reasons.push(format!("unexpected-digest {file}"));
    }
    let mut problems = Vec::new();
    let stages = manifest
        .params
        .thetas()
        .map(|t| load_stage(t, &mut problems, &bodies))
        .collect();
    for p in problems {
        reasons.push(format!("malformed {}:{}: {}", p.file, p.line, p.message));
    }
    let chain = ProofChain {
        params: manifest.params,
        stages,
    };
    reasons.extend(certify_chain(&chain, manifest.base).iter().map(|f| f.to_string()));
    CertifyReport { reasons }
}

/// Reads one instance per line, skipping blank lines and `#` comments.
pub fn read_instances(path: &Path) -> Result<Vec<Instance>> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.parse().map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: no + 1,
            message: format!("{e}"),
        })?);
    }
    Ok(out)
}

pub fn write_instances<'a>(path: &Path, instances: impl IntoIterator<Item = &'a Instance>) -> Result<()> {
    let mut body = String::new();
    for a in instances {
        body.push_str(&instance_text(a));
        body.push('\n');
    }
    fs::write(path, body).map_err(io_at(path))
}
