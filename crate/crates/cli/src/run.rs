//! Per-invocation bookkeeping: input digests, staged outputs, the manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const STDOUT: &str = "<stdout>";

/// Everything that ends a run early, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invariant(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn invariant(e: impl fmt::Display) -> Self {
        Failure::Invariant(e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Invariant(m) => write!(f, "invariant failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Run {
    pub seed: u64,
    pub tol: f64,
    inputs: BTreeMap<String, String>,
    outputs: Vec<(Option<PathBuf>, Vec<u8>)>,
    failed_checks: Vec<String>,
    started: Instant,
}

impl Run {
    pub fn new(seed: u64, tol: f64) -> Self {
        Self {
            seed,
            tol,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            failed_checks: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| Failure::Io(format!("{}: not UTF-8", path.display())))
    }

    /// Stages an artifact; nothing touches the file system before `commit`.
    pub fn emit(&mut self, path: Option<&Path>, content: impl Into<Vec<u8>>) {
        self.outputs.push((path.map(Path::to_path_buf), content.into()));
    }

    pub fn emit_json(&mut self, path: Option<&Path>, value: &Value) {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        self.emit(path, text);
    }

    /// Records a failed invariant; the run still writes its reports.
    pub fn fail_check(&mut self, what: impl Into<String>) {
        self.failed_checks.push(what.into());
    }

    pub fn failed_checks(&self) -> &[String] {
        &self.failed_checks
    }

    /// Writes staged files through temporaries so a failed write leaves no
    /// partial artifact behind, then prints stdout artifacts.
    pub fn commit(&self) -> Result<BTreeMap<String, String>, Failure> {
        let mut staged: Vec<(PathBuf, &PathBuf)> = Vec::new();
        let cleanup = |staged: &[(PathBuf, &PathBuf)]| {
            for (tmp, _) in staged {
                let _ = fs::remove_file(tmp);
            }
        };
        for (path, bytes) in &self.outputs {
            let Some(path) = path else { continue };
            let mut name = path.file_name().unwrap_or_default().to_os_string();
            name.push(".partial");
            let tmp = path.with_file_name(name);
            if let Err(e) = fs::write(&tmp, bytes) {
                cleanup(&staged);
                return Err(Failure::Io(format!("{}: {e}", path.display())));
            }
            staged.push((tmp, path));
        }
        for (tmp, path) in &staged {
            if let Err(e) = fs::rename(tmp, path) {
                cleanup(&staged);
                return Err(Failure::Io(format!("{}: {e}", path.display())));
            }
        }
        let mut digests = BTreeMap::new();
        let mut stdout = std::io::stdout().lock();
        for (path, bytes) in &self.outputs {
            let key = path.as_ref().map_or(STDOUT.to_string(), |p| p.display().to_string());
            digests.insert(key, sha256_hex(bytes));
            if path.is_none() {
                stdout
                    .write_all(bytes)
                    .map_err(|e| Failure::Io(format!("stdout: {e}")))?;
            }
        }
        Ok(digests)
    }

    pub fn manifest(
        &self,
        argv: &[String],
        subcommand: &str,
        params: Value,
        workers: usize,
        outputs: BTreeMap<String, String>,
        exit_code: u8,
    ) -> Value {
        json!({
            "argv": argv,
            "subcommand": subcommand,
            "params": params,
            "seed": self.seed,
            "tol": self.tol,
            "workers": workers,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": self.inputs,
            "outputs": outputs,
            "failed_checks": self.failed_checks,
            "exit_code": exit_code,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(Failure::Usage(String::new()).code(), 2);
        assert_eq!(Failure::invariant("x").code(), 1);
        assert_eq!(Failure::Io(String::new()).code(), 3);
    }
}
