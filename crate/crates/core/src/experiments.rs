//! Seeded Monte-Carlo harness: per-trial pipeline, parameter sweeps and
//! convergence traces.
//!
//! Seed discipline: trial `t` of sweep point `v` runs on
//! `derive_seed(master_seed, [v, t])`, and every algorithm receives the same
//! trial seed, so compared algorithms see identical channels and identical
//! starting phases. Trials execute in parallel; aggregation happens on the
//! collected, index-ordered results, so outputs are independent of the worker
//! count.

use rayon::prelude::*;

use crate::channel::{ScenarioConfig, effective_bob_channel, effective_eve_channel, generate_channels};
use crate::phase_opt::{
    MmOptions, OmOptions, PhaseVector, SolveTrace, build_quadratic, mm_solve, om_solve,
};
use crate::rng::{self, derive_seed};
use crate::transmit::{RateReport, design_for_channels};

/// Sub-stream tags for per-trial seed derivation.
const STREAM_CHANNEL: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_RESTART: u64 = 3;

/// Phase-selection strategy for a trial.
///
/// New baselines (for example a full-CSI design) slot in as further variants;
/// everything downstream dispatches on this enum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Manifold conjugate-gradient phase optimizer.
    Om,
    /// Minorize-maximize phase optimizer.
    Mm,
    /// Keep the random initial phases (no optimization).
    RandomPhase,
    /// Ignore the surface entirely; direct channels only.
    NoIrs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Om,
        Algorithm::Mm,
        Algorithm::RandomPhase,
        Algorithm::NoIrs,
    ];

    pub fn runs_solver(self) -> bool {
        matches!(self, Algorithm::Om | Algorithm::Mm)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "om" => Ok(Self::Om),
            "mm" => Ok(Self::Mm),
            "random-phase" => Ok(Self::RandomPhase),
            "no-irs" => Ok(Self::NoIrs),
            other => Err(format!(
                "unknown algorithm `{other}` (expected om, mm, random-phase or no-irs)"
            )),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Om => "om",
            Self::Mm => "mm",
            Self::RandomPhase => "random-phase",
            Self::NoIrs => "no-irs",
        })
    }
}

/// Which scenario field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    QosDb,
    NIrs,
}

impl SweepVariable {
    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) {
        match self {
            Self::QosDb => cfg.qos_db = value,
            Self::NIrs => cfg.n_irs = value.round().max(1.0) as usize,
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qos_db" => Ok(Self::QosDb),
            "n_irs" => Ok(Self::NIrs),
            other => Err(format!(
                "unknown sweep variable `{other}` (expected qos_db or n_irs)"
            )),
        }
    }
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::QosDb => "qos_db",
            Self::NIrs => "n_irs",
        })
    }
}

/// Full description of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base: ScenarioConfig,
    pub algorithms: Vec<Algorithm>,
    pub master_seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("sweep values must be non-empty and strictly increasing")]
    BadValues,
    #[error("trials must be >= 1")]
    NoTrials,
    #[error("algorithm list must be non-empty")]
    NoAlgorithms,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.values.is_empty() || self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SweepError::BadValues);
        }
        if self.trials == 0 {
            return Err(SweepError::NoTrials);
        }
        if self.algorithms.is_empty() {
            return Err(SweepError::NoAlgorithms);
        }
        Ok(())
    }
}

/// Result of one trial: rates, solver trace, bookkeeping.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub report: RateReport,
    pub trace: SolveTrace,
    pub feasible: bool,
    /// True when the solver gave up (restart budget exhausted); the trial
    /// counts as zero rate and is excluded from iteration statistics.
    pub failed: bool,
}

/// Aggregated statistics for one (value, algorithm) cell.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub variable: SweepVariable,
    pub value: f64,
    pub algorithm: Algorithm,
    pub mean_secrecy_rate: f64,
    pub std_error: f64,
    pub feasible_frac: f64,
    pub mean_iterations: f64,
    pub mean_wall_time_s: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn total_trials(&self) -> usize {
        self.cells.iter().map(|c| c.trials).sum()
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }
}

/// Runs one trial: channels and starting phases from the derived sub-seeds,
/// phase selection by the chosen algorithm, then the transmit design.
/// Deterministic in `(cfg, algorithm, seed)`.
pub fn run_trial(cfg: &ScenarioConfig, algorithm: Algorithm, seed: u64) -> TrialOutcome {
    let cs = generate_channels(cfg, derive_seed(seed, &[STREAM_CHANNEL]));
    let mut init_rng = rng::stream(derive_seed(seed, &[STREAM_INIT]));
    let q0 = PhaseVector::random(cfg.n_irs, &mut init_rng);

    let failed_outcome = || TrialOutcome {
        report: RateReport::default(),
        trace: SolveTrace::default(),
        feasible: false,
        failed: true,
    };

    let (h_bob, h_eve, trace) = match algorithm {
        Algorithm::NoIrs => (
            cs.alice_bob.clone(),
            cs.alice_eve.clone(),
            SolveTrace::default(),
        ),
        Algorithm::RandomPhase => {
            let qf = build_quadratic(&cs);
            let trace = SolveTrace {
                objectives: vec![qf.objective(&q0)],
                converged: true,
                ..Default::default()
            };
            (
                effective_bob_channel(&cs, &q0).expect("matching dimensions"),
                effective_eve_channel(&cs, &q0).expect("matching dimensions"),
                trace,
            )
        }
        Algorithm::Om => {
            let qf = build_quadratic(&cs);
            let opts = OmOptions::from_config(cfg, derive_seed(seed, &[STREAM_RESTART]));
            match om_solve(&qf, &q0, &opts) {
                Ok(sol) => (
                    effective_bob_channel(&cs, &sol.q).expect("matching dimensions"),
                    effective_eve_channel(&cs, &sol.q).expect("matching dimensions"),
                    sol.trace,
                ),
                Err(_) => return failed_outcome(),
            }
        }
        Algorithm::Mm => {
            let qf = build_quadratic(&cs);
            let sol = mm_solve(&qf, &q0, &MmOptions::from_config(cfg));
            (
                effective_bob_channel(&cs, &sol.q).expect("matching dimensions"),
                effective_eve_channel(&cs, &sol.q).expect("matching dimensions"),
                sol.trace,
            )
        }
    };

    let (design, report) =
        design_for_channels(&h_bob, &h_eve, cfg).expect("nonnegative jam power by construction");
    TrialOutcome {
        report,
        trace,
        feasible: design.feasible,
        failed: false,
    }
}

/// Runs the full sweep. For each value, all algorithms run the same derived
/// trial seeds (paired comparison); cells appear in `(value, algorithm)`
/// order matching the spec lists.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let mut cells = Vec::with_capacity(spec.values.len() * spec.algorithms.len());
    for (value_index, &value) in spec.values.iter().enumerate() {
        let mut cfg = spec.base.clone();
        spec.variable.apply(&mut cfg, value);
        let seeds: Vec<u64> = (0..spec.trials)
            .map(|t| derive_seed(spec.master_seed, &[value_index as u64, t as u64]))
            .collect();
        for &algorithm in &spec.algorithms {
            let outcomes: Vec<TrialOutcome> = seeds
                .par_iter()
                .map(|&s| run_trial(&cfg, algorithm, s))
                .collect();
            cells.push(aggregate(spec.variable, value, algorithm, &outcomes));
        }
    }
    Ok(SweepResult { cells })
}

/// Two-pass aggregation over the ordered trial outcomes.
fn aggregate(
    variable: SweepVariable,
    value: f64,
    algorithm: Algorithm,
    outcomes: &[TrialOutcome],
) -> SweepCell {
    let n = outcomes.len();
    let rates: Vec<f64> = outcomes.iter().map(|o| o.report.secrecy_rate).collect();
    let mean = rates.iter().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let feasible = outcomes.iter().filter(|o| o.feasible).count();
    let failures = outcomes.iter().filter(|o| o.failed).count();
    let solver_runs: Vec<&TrialOutcome> = outcomes
        .iter()
        .filter(|o| !o.failed && algorithm.runs_solver())
        .collect();
    let mean_iterations = if solver_runs.is_empty() {
        0.0
    } else {
        solver_runs.iter().map(|o| o.trace.iterations as f64).sum::<f64>()
            / solver_runs.len() as f64
    };
    let mean_wall_time_s = if solver_runs.is_empty() {
        0.0
    } else {
        solver_runs.iter().map(|o| o.trace.wall_time_s).sum::<f64>() / solver_runs.len() as f64
    };
    SweepCell {
        variable,
        value,
        algorithm,
        mean_secrecy_rate: mean,
        std_error,
        feasible_frac: feasible as f64 / n as f64,
        mean_iterations,
        mean_wall_time_s,
        trials: n,
        failures,
    }
}

/// Convergence traces for one fixed channel realization per element count,
/// with both solvers started from the same phases.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    pub algorithm: Algorithm,
    pub n_irs: usize,
    pub trace: SolveTrace,
}

pub fn convergence_experiment(
    cfg: &ScenarioConfig,
    l_values: &[usize],
    seed: u64,
) -> Vec<ConvergenceTrace> {
    let mut bundle = Vec::with_capacity(2 * l_values.len());
    for (index, &l) in l_values.iter().enumerate() {
        let mut cfg_l = cfg.clone();
        cfg_l.n_irs = l;
        let trial_seed = derive_seed(seed, &[index as u64]);
        let cs = generate_channels(&cfg_l, derive_seed(trial_seed, &[STREAM_CHANNEL]));
        let mut init_rng = rng::stream(derive_seed(trial_seed, &[STREAM_INIT]));
        let q0 = PhaseVector::random(l, &mut init_rng);
        let qf = build_quadratic(&cs);

        let opts = OmOptions::from_config(&cfg_l, derive_seed(trial_seed, &[STREAM_RESTART]));
        let om_trace = match om_solve(&qf, &q0, &opts) {
            Ok(sol) => sol.trace,
            Err(_) => SolveTrace::default(),
        };
        bundle.push(ConvergenceTrace {
            algorithm: Algorithm::Om,
            n_irs: l,
            trace: om_trace,
        });

        let mm = mm_solve(&qf, &q0, &MmOptions::from_config(&cfg_l));
        bundle.push(ConvergenceTrace {
            algorithm: Algorithm::Mm,
            n_irs: l,
            trace: mm.trace,
        });
    }
    bundle
}
