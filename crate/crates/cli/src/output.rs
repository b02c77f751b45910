//! Run ids, CSV emission and manifests.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_DATA: u8 = 4;

/// Error carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, msg: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_DATA, msg: msg.into() }
    }

    pub fn context(self, what: impl fmt::Display) -> Self {
        CliError { msg: format!("{what}: {}", self.msg), ..self }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // one line on the error stream
        f.write_str(&self.msg.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

impl From<antq::Error> for CliError {
    fn from(e: antq::Error) -> Self {
        let code = match e {
            antq::Error::InvalidInput(_) => EXIT_USAGE,
            antq::Error::ResourceLimit(_) => EXIT_RESOURCE,
            _ => EXIT_DATA,
        };
        CliError { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub n: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub kind: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: usize,
    pub repetition: usize,
    pub code: u8,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub antq: String,
    pub antq_cli: String,
    pub rng: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub command: String,
    pub args: Vec<String>,
    /// Canonical configuration; its hash, with the instance hashes, is the run id.
    pub config: Value,
    pub instances: Vec<InstanceRecord>,
    pub seeds: Value,
    pub versions: Versions,
    pub threads: Option<usize>,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputRecord>,
    pub failures: Vec<Failure>,
}

impl Manifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    pub fn output(&self, kind: &str) -> Option<&Path> {
        self.outputs.iter().find(|o| o.kind == kind).map(|o| o.path.as_path())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// First 16 hex digits of `sha256(command \n config \n instance hashes...)`.
pub fn run_id(command: &str, config: &Value, instances: &[InstanceRecord]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(config.to_string().as_bytes());
    for inst in instances {
        h.update(b"\n");
        h.update(inst.sha256.as_bytes());
    }
    hex::encode(h.finalize())[..16].to_string()
}

/// Collects outputs and failures of one invocation, then writes the manifest.
pub struct RunContext {
    started: Instant,
    manifest: Manifest,
}

impl RunContext {
    pub fn new(command: &str, args: &[String], config: Value, instances: Vec<InstanceRecord>, seeds: Value) -> Self {
        let run_id = run_id(command, &config, &instances);
        RunContext {
            started: Instant::now(),
            manifest: Manifest {
                run_id,
                command: command.to_string(),
                args: args.to_vec(),
                config,
                instances,
                seeds,
                versions: Versions {
                    antq: antq::VERSION.to_string(),
                    antq_cli: env!("CARGO_PKG_VERSION").to_string(),
                    rng: "ChaCha20 (rand_chacha 0.9)".to_string(),
                },
                threads: crate::thread_setting(),
                wall_time_s: 0.0,
                outputs: Vec::new(),
                failures: Vec::new(),
            },
        }
    }

    pub fn run_id(&self) -> &str {
        &self.manifest.run_id
    }

    pub fn fail(&mut self, f: Failure) {
        self.manifest.failures.push(f);
    }

    pub fn write_csv<R: Serialize>(&mut self, kind: &str, path: &Path, rows: &[R]) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        if rows.is_empty() {
            // the header is only emitted with the first row
            drop(w);
            std::fs::write(path, "")?;
        }
        self.record(kind, path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, kind: &str, path: &Path, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        self.record(kind, path);
        Ok(())
    }

    pub fn record(&mut self, kind: &str, path: &Path) {
        self.manifest.outputs.push(OutputRecord { kind: kind.to_string(), path: path.to_path_buf() });
    }

    /// Writes `<primary>.manifest.json`. Recorded failures turn into the
    /// returned error after the manifest is on disk.
    pub fn finish(mut self, primary: &Path) -> CliResult<Manifest> {
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        let path = manifest_path(primary);
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if let Some(first) = self.manifest.failures.first() {
            return Err(CliError {
                code: first.code,
                msg: format!(
                    "{} run(s) failed, see {}; first (instance {}, repetition {}): {}",
                    self.manifest.failures.len(),
                    path.display(),
                    first.instance,
                    first.repetition,
                    first.error
                ),
            });
        }
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_depends_on_config_and_instances() {
        let rec = |h: &str| InstanceRecord { path: "x".into(), sha256: h.into(), n: 3, lambda: 0.0 };
        let cfg = serde_json::json!({"p": [1, 2]});
        let a = run_id("qaa", &cfg, &[rec("aa")]);
        assert_eq!(a.len(), 16);
        assert_eq!(a, run_id("qaa", &cfg, &[InstanceRecord { path: "elsewhere".into(), ..rec("aa") }]));
        assert_ne!(a, run_id("qaa", &cfg, &[rec("ab")]));
        assert_ne!(a, run_id("qaoa", &cfg, &[rec("aa")]));
        assert_ne!(a, run_id("qaa", &serde_json::json!({"p": [1]}), &[rec("aa")]));
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::from(antq::Error::InvalidInput("x".into())).code, EXIT_USAGE);
        assert_eq!(CliError::from(antq::Error::ResourceLimit("x".into())).code, EXIT_RESOURCE);
        assert_eq!(CliError::from(antq::Error::Parse("x".into())).code, EXIT_DATA);
        assert_eq!(CliError::data("a\nb").to_string(), "a b");
    }

    #[test]
    fn manifest_sidecar_name() {
        assert_eq!(manifest_path(Path::new("out/m.csv")), PathBuf::from("out/m.csv.manifest.json"));
    }
}
