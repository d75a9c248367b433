//! Flat key-value run configuration.
//!
//! The file format is one `key = value` per line, `#` comments, blank lines
//! ignored. Keys match the scenario and sweep field names exactly; unknown or
//! duplicate keys are hard errors (silent typos corrupt experiments). Every
//! key is optional and defaults to the reference scenario shipped in
//! `configs/default.cfg`.

use std::path::Path;
use std::str::FromStr;

use irsjam_core::channel::CgRule;
use irsjam_core::{Algorithm, ScenarioConfig, SweepSpec, SweepVariable};
use serde::Serialize;

use crate::CliError;

/// Fully resolved run configuration: scenario, sweep and convergence settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub master_seed: u64,
    /// Element counts traced by the `converge` command.
    pub l_values: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            variable: SweepVariable::QosDb,
            values: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 100,
            algorithms: vec![Algorithm::Om, Algorithm::Mm, Algorithm::NoIrs],
            master_seed: 1,
            l_values: vec![20, 50],
        }
    }
}

pub const KNOWN_KEYS: &[&str] = &[
    "n_tx",
    "n_irs",
    "p_total_dbm",
    "noise_bob_dbm",
    "noise_eve_dbm",
    "qos_db",
    "pl0_db",
    "d0_m",
    "rho_ai",
    "rho_ib",
    "rho_ie",
    "rho_ab",
    "rho_ae",
    "d_ai",
    "d_ib",
    "d_ie",
    "d_ab",
    "d_ae",
    "om_tol",
    "mm_tol",
    "max_iter",
    "eta0",
    "cg_rule",
    "variable",
    "values",
    "trials",
    "algorithms",
    "master_seed",
    "l_values",
];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        let mut config = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "config line {line_no}: expected `key = value`, got `{raw_line}`"
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(CliError::Config(format!(
                    "config line {line_no}: duplicate key `{key}`"
                )));
            }
            seen.push(key.to_string());
            config.set(key, value).map_err(|reason| {
                CliError::Config(format!("config line {line_no}, key `{key}`: {reason}"))
            })?;
        }
        Ok(config)
    }

    /// Applies one `KEY=VALUE` override (the `--set` flag).
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let Some((key, value)) = spec.split_once('=') else {
            return Err(CliError::Config(format!(
                "--set expects KEY=VALUE, got `{spec}`"
            )));
        };
        self.set(key.trim(), value.trim())
            .map_err(|reason| CliError::Config(format!("--set {key}: {reason}")))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(value: &str, what: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| format!("invalid {what} `{value}`: {e}"))
        }
        fn parse_list<T: FromStr>(value: &str, what: &str) -> Result<Vec<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse::<T>(s, what))
                .collect()
        }

        let s = &mut self.scenario;
        match key {
            "n_tx" => s.n_tx = parse(value, "integer")?,
            "n_irs" => s.n_irs = parse(value, "integer")?,
            "p_total_dbm" => s.p_total_dbm = parse(value, "number")?,
            "noise_bob_dbm" => s.noise_bob_dbm = parse(value, "number")?,
            "noise_eve_dbm" => s.noise_eve_dbm = parse(value, "number")?,
            "qos_db" => s.qos_db = parse(value, "number")?,
            "pl0_db" => s.pl0_db = parse(value, "number")?,
            "d0_m" => s.d0_m = parse(value, "number")?,
            "rho_ai" => s.rho_ai = parse(value, "number")?,
            "rho_ib" => s.rho_ib = parse(value, "number")?,
            "rho_ie" => s.rho_ie = parse(value, "number")?,
            "rho_ab" => s.rho_ab = parse(value, "number")?,
            "rho_ae" => s.rho_ae = parse(value, "number")?,
            "d_ai" => s.d_ai = parse(value, "number")?,
            "d_ib" => s.d_ib = parse(value, "number")?,
            "d_ie" => s.d_ie = parse(value, "number")?,
            "d_ab" => s.d_ab = parse(value, "number")?,
            "d_ae" => s.d_ae = parse(value, "number")?,
            "om_tol" => s.om_tol = parse(value, "number")?,
            "mm_tol" => s.mm_tol = parse(value, "number")?,
            "max_iter" => s.max_iter = parse(value, "integer")?,
            "eta0" => s.eta0 = parse(value, "number")?,
            "cg_rule" => s.cg_rule = value.parse::<CgRule>()?,
            "variable" => self.variable = value.parse::<SweepVariable>()?,
            "values" => self.values = parse_list(value, "number")?,
            "trials" => self.trials = parse(value, "integer")?,
            "algorithms" => {
                self.algorithms = value
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(|a| a.parse::<Algorithm>())
                    .collect::<Result<_, _>>()?
            }
            "master_seed" => self.master_seed = parse(value, "integer")?,
            "l_values" => self.l_values = parse_list(value, "integer")?,
            other => {
                return Err(format!(
                    "unknown key `{other}` (known keys: {})",
                    KNOWN_KEYS.join(", ")
                ));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.sweep_spec()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.l_values.is_empty() || self.l_values.iter().any(|&l| l == 0) {
            return Err(CliError::Config(
                "l_values must be a non-empty list of positive integers".into(),
            ));
        }
        Ok(())
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            variable: self.variable,
            values: self.values.clone(),
            trials: self.trials,
            base: self.scenario.clone(),
            algorithms: self.algorithms.clone(),
            master_seed: self.master_seed,
        }
    }

    pub fn resolved(&self) -> ResolvedConfig {
        let s = &self.scenario;
        ResolvedConfig {
            n_tx: s.n_tx,
            n_irs: s.n_irs,
            p_total_dbm: s.p_total_dbm,
            noise_bob_dbm: s.noise_bob_dbm,
            noise_eve_dbm: s.noise_eve_dbm,
            qos_db: s.qos_db,
            pl0_db: s.pl0_db,
            d0_m: s.d0_m,
            rho_ai: s.rho_ai,
            rho_ib: s.rho_ib,
            rho_ie: s.rho_ie,
            rho_ab: s.rho_ab,
            rho_ae: s.rho_ae,
            d_ai: s.d_ai,
            d_ib: s.d_ib,
            d_ie: s.d_ie,
            d_ab: s.d_ab,
            d_ae: s.d_ae,
            om_tol: s.om_tol,
            mm_tol: s.mm_tol,
            max_iter: s.max_iter,
            eta0: s.eta0,
            cg_rule: s.cg_rule.to_string(),
            variable: self.variable.to_string(),
            values: self.values.clone(),
            trials: self.trials,
            algorithms: self.algorithms.iter().map(|a| a.to_string()).collect(),
            master_seed: self.master_seed,
            l_values: self.l_values.clone(),
        }
    }
}

/// Flat serialized form written to `resolved_config.json` and digested into
/// the run manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub n_tx: usize,
    pub n_irs: usize,
    pub p_total_dbm: f64,
    pub noise_bob_dbm: f64,
    pub noise_eve_dbm: f64,
    pub qos_db: f64,
    pub pl0_db: f64,
    pub d0_m: f64,
    pub rho_ai: f64,
    pub rho_ib: f64,
    pub rho_ie: f64,
    pub rho_ab: f64,
    pub rho_ae: f64,
    pub d_ai: f64,
    pub d_ib: f64,
    pub d_ie: f64,
    pub d_ab: f64,
    pub d_ae: f64,
    pub om_tol: f64,
    pub mm_tol: f64,
    pub max_iter: usize,
    pub eta0: f64,
    pub cg_rule: String,
    pub variable: String,
    pub values: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<String>,
    pub master_seed: u64,
    pub l_values: Vec<usize>,
}
