//! Output files: sweep CSV, trace JSON, resolved config and run manifest.
//!
//! Everything written here is a deterministic function of the resolved
//! configuration and seed, so identical runs produce byte-identical files.
//! The manifest timestamp honors `SOURCE_DATE_EPOCH` (reproducible-builds
//! convention) and falls back to the wall clock.

use std::path::{Path, PathBuf};

use irsjam_core::experiments::{ConvergenceTrace, SweepResult};
use serde::Serialize;

use crate::CliError;
use crate::config_file::ResolvedConfig;

pub const SWEEP_CSV_HEADER: &str =
    "variable,value,algorithm,mean_secrecy_rate_bps,stderr,feasible_frac,mean_iters,trials,seed";

/// Fixed-notation formatting with 10 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn sweep_csv(result: &SweepResult, master_seed: u64) -> String {
    let mut out = String::with_capacity(64 * (result.cells.len() + 1));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for cell in &result.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            cell.variable,
            fmt_sig(cell.value),
            cell.algorithm,
            fmt_sig(cell.mean_secrecy_rate),
            fmt_sig(cell.std_error),
            fmt_sig(cell.feasible_frac),
            fmt_sig(cell.mean_iterations),
            cell.trials,
            master_seed,
        ));
    }
    out
}

/// One row of a convergence trace file.
#[derive(Debug, Serialize, serde::Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_norm: Option<f64>,
}

pub fn trace_rows(entry: &ConvergenceTrace) -> Vec<TraceRow> {
    entry
        .trace
        .objectives
        .iter()
        .enumerate()
        .map(|(iteration, &objective)| TraceRow {
            iteration,
            objective,
            grad_norm: entry.trace.grad_norms.get(iteration).copied(),
        })
        .collect()
}

pub fn trace_file_name(entry: &ConvergenceTrace) -> String {
    format!("trace_{}_{}.json", entry.algorithm, entry.n_irs)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub master_seed: u64,
    pub artifact_version: String,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn digest_string(bytes: &[u8]) -> String {
    format!("fnv1a64:{:016x}", fnv1a64(bytes))
}

/// RFC 3339 UTC timestamp; `SOURCE_DATE_EPOCH` wins over the wall clock so
/// reruns can be byte-identical.
pub fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
    rfc3339_utc(secs)
}

fn rfc3339_utc(secs: u64) -> String {
    let days = secs / 86_400;
    let rem = secs % 86_400;
    let (year, month, day) = civil_from_days(days as i64);
    format!(
        "{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}Z",
        rem / 3600,
        (rem % 3600) / 60,
        rem % 60
    )
}

/// Days since 1970-01-01 to (year, month, day), civil calendar.
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = (z - era * 146_097) as u64;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i64 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

/// Writes the shared output bundle (resolved config, payload files, manifest)
/// and returns the manifest path.
pub struct OutputWriter {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl OutputWriter {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| {
            CliError::Io(format!("cannot create out dir `{}`: {e}", dir.display()))
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes `resolved_config.json` and returns its digest.
    pub fn write_resolved_config(&mut self, resolved: &ResolvedConfig) -> Result<String, CliError> {
        let json = serde_json::to_string_pretty(resolved)
            .map_err(|e| CliError::Io(format!("config serialization failed: {e}")))?;
        let mut contents = json;
        contents.push('\n');
        self.write("resolved_config.json", &contents)?;
        Ok(digest_string(contents.as_bytes()))
    }

    pub fn finish(mut self, digest: String, master_seed: u64) -> Result<(), CliError> {
        let manifest = RunManifest {
            config_digest: digest,
            master_seed,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
            outputs: {
                let mut names = self.outputs.clone();
                names.push("manifest.json".to_string());
                names
            },
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Io(format!("manifest serialization failed: {e}")))?;
        self.write("manifest.json", &format!("{json}\n"))
    }
}
