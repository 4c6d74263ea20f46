//! Shared CLI plumbing: error mapping, config hashing, deterministic output
//! files, run log.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use siegel_core::SiegelError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Accuracy(String),
    Other(String),
}

impl From<SiegelError> for CliError {
    fn from(e: SiegelError) -> Self {
        match e {
            SiegelError::Accuracy(_)
            | SiegelError::Resonance { .. }
            | SiegelError::Budget(_)
            | SiegelError::RefinementRequired { .. } => CliError::Accuracy(e.to_string()),
            SiegelError::Dimension(_) | SiegelError::Domain(_) | SiegelError::Serde(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

pub fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// SHA-256 of the canonical JSON serialization of the resolved config.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String, CliError> {
    let canon = serde_json::to_string(cfg).map_err(|e| CliError::Other(e.to_string()))?;
    let mut hasher = Sha256::new();
    hasher.update(canon.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(hex)
}

/// Output sink rooted in the run directory. Data files embed the tool
/// version and config hash; wall time goes to a separate `run.log` so the
/// data files stay byte-identical across reruns.
pub struct RunDir {
    dir: PathBuf,
    pub hash: String,
    started: Instant,
}

impl RunDir {
    pub fn create<T: Serialize>(dir: &Path, cfg: &T) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: config_hash(cfg)?,
            started: Instant::now(),
        })
    }

    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<(), CliError> {
        let mut body = String::new();
        let _ = writeln!(body, "# version={VERSION}");
        let _ = writeln!(body, "# config={}", self.hash);
        let _ = writeln!(body, "{header}");
        for row in rows {
            let _ = writeln!(body, "{row}");
        }
        std::fs::write(self.dir.join(name), body)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, payload: &T) -> Result<(), CliError> {
        let mut value = serde_json::to_value(payload).map_err(|e| CliError::Other(e.to_string()))?;
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("version".into(), serde_json::json!(VERSION));
            map.insert("config_hash".into(), serde_json::json!(self.hash));
        }
        let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Other(e.to_string()))?;
        std::fs::write(self.dir.join(name), text + "\n")?;
        Ok(())
    }

    /// Appends the wall time to `run.log` (excluded from determinism
    /// comparisons by design).
    pub fn finish(self, what: &str) -> Result<(), CliError> {
        let elapsed = self.started.elapsed();
        let line = format!(
            "version={VERSION} config={} cmd={what} wall_ms={}\n",
            self.hash,
            elapsed.as_millis()
        );
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.dir.join("run.log"))?;
        f.write_all(line.as_bytes())?;
        Ok(())
    }
}

/// Formats a float with full round-trip precision, deterministically.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Parses a decimal string into the exact rational used by the g = 1 fast
/// path, falling back to the exact dyadic of the parsed f64.
pub fn parse_exact_q(s: &str) -> Result<siegel_core::reduction::Rational128, CliError> {
    use siegel_core::reduction::Rational128;
    if let Ok(r) = Rational128::from_decimal_str(s) {
        return Ok(r);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| config_error(format!("cannot parse q value: {s}")))?;
    Rational128::from_f64_exact(v).map_err(CliError::from)
}
