//! Scenario configuration, random channel generation and effective channels.
//!
//! All powers and gains are carried in watts / linear ratios internally; dB and
//! dBm appear only at the configuration boundary.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::C64;
use crate::phase_opt::PhaseVector;
use crate::rng;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("phase vector has {got} entries but the scenario has {expected} reflecting elements")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("path-loss distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

/// Conjugate-gradient coefficient rule used by the manifold solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CgRule {
    /// Norm-ratio coefficient (Fletcher-Reeves form).
    #[default]
    Paper,
    /// Polak-Ribiere-plus on Riemannian gradients with vector transport.
    PolakRibiere,
}

impl std::str::FromStr for CgRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "polak_ribiere" => Ok(Self::PolakRibiere),
            other => Err(format!(
                "unknown cg_rule `{other}` (expected `paper` or `polak_ribiere`)"
            )),
        }
    }
}

impl std::fmt::Display for CgRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::PolakRibiere => "polak_ribiere",
        })
    }
}

/// Physical constants and solver settings for one scenario.
///
/// The default value is the reference scenario used by the shipped config:
/// a 5-antenna transmitter, 50 reflecting elements, 5 dBm power budget,
/// -90 dBm noise floors and the distance/exponent layout listed field by
/// field below.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Transmit antennas N_t (>= 2 so the artificial-noise null space is nonempty).
    pub n_tx: usize,
    /// Reflecting elements L.
    pub n_irs: usize,
    /// Total transmit power budget, dBm.
    pub p_total_dbm: f64,
    /// Noise power at the legitimate user, dBm.
    pub noise_bob_dbm: f64,
    /// Noise power at the eavesdropper, dBm.
    pub noise_eve_dbm: f64,
    /// SNR target at the legitimate user, dB.
    pub qos_db: f64,
    /// Path loss at the reference distance, dB.
    pub pl0_db: f64,
    /// Reference distance, meters.
    pub d0_m: f64,
    /// Path-loss exponents per link.
    pub rho_ai: f64,
    pub rho_ib: f64,
    pub rho_ie: f64,
    pub rho_ab: f64,
    pub rho_ae: f64,
    /// Link distances, meters.
    pub d_ai: f64,
    pub d_ib: f64,
    pub d_ie: f64,
    pub d_ab: f64,
    pub d_ae: f64,
    /// Manifold solver: stop when the Riemannian gradient norm of the
    /// scale-normalized objective drops below this.
    pub om_tol: f64,
    /// Minorize-maximize solver: relative objective-change stopping tolerance.
    pub mm_tol: f64,
    /// Iteration cap shared by both solvers.
    pub max_iter: usize,
    /// Initial step size for the manifold solver, in (0, 1).
    pub eta0: f64,
    /// Conjugate-gradient coefficient rule.
    pub cg_rule: CgRule,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_tx: 5,
            n_irs: 50,
            p_total_dbm: 5.0,
            noise_bob_dbm: -90.0,
            noise_eve_dbm: -90.0,
            qos_db: 10.0,
            pl0_db: -30.0,
            d0_m: 1.0,
            rho_ai: 2.0,
            rho_ib: 2.5,
            rho_ie: 2.5,
            rho_ab: 3.0,
            rho_ae: 3.0,
            d_ai: 50.0,
            d_ib: 6.0,
            d_ie: 7.0,
            d_ab: 48.0,
            d_ae: 45.0,
            om_tol: 1e-4,
            mm_tol: 1e-6,
            max_iter: 2000,
            eta0: 0.3,
            cg_rule: CgRule::Paper,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let err = |field: &'static str, reason: String| ChannelError::InvalidConfig {
            field,
            reason,
        };
        if self.n_tx < 2 {
            return Err(err("n_tx", format!("must be >= 2, got {}", self.n_tx)));
        }
        if self.n_irs < 1 {
            return Err(err("n_irs", "must be >= 1".into()));
        }
        for (field, value) in [
            ("d_ai", self.d_ai),
            ("d_ib", self.d_ib),
            ("d_ie", self.d_ie),
            ("d_ab", self.d_ab),
            ("d_ae", self.d_ae),
            ("d0_m", self.d0_m),
        ] {
            if !(value > 0.0) {
                return Err(err(field, format!("distance must be > 0, got {value}")));
            }
        }
        for (field, value) in [
            ("rho_ai", self.rho_ai),
            ("rho_ib", self.rho_ib),
            ("rho_ie", self.rho_ie),
            ("rho_ab", self.rho_ab),
            ("rho_ae", self.rho_ae),
        ] {
            if !(value >= 0.0) {
                return Err(err(field, format!("exponent must be >= 0, got {value}")));
            }
        }
        for (field, value) in [
            ("p_total_dbm", self.p_total_dbm),
            ("noise_bob_dbm", self.noise_bob_dbm),
            ("noise_eve_dbm", self.noise_eve_dbm),
            ("qos_db", self.qos_db),
            ("pl0_db", self.pl0_db),
        ] {
            if !value.is_finite() {
                return Err(err(field, format!("must be finite, got {value}")));
            }
        }
        if !(self.om_tol > 0.0) {
            return Err(err("om_tol", format!("must be > 0, got {}", self.om_tol)));
        }
        if !(self.mm_tol > 0.0) {
            return Err(err("mm_tol", format!("must be > 0, got {}", self.mm_tol)));
        }
        if self.max_iter == 0 {
            return Err(err("max_iter", "must be >= 1".into()));
        }
        if !(self.eta0 > 0.0 && self.eta0 < 1.0) {
            return Err(err("eta0", format!("must lie in (0, 1), got {}", self.eta0)));
        }
        Ok(())
    }

    pub fn p_total_w(&self) -> f64 {
        dbm_to_watt(self.p_total_dbm)
    }

    pub fn noise_bob_w(&self) -> f64 {
        dbm_to_watt(self.noise_bob_dbm)
    }

    pub fn noise_eve_w(&self) -> f64 {
        dbm_to_watt(self.noise_eve_dbm)
    }

    pub fn qos_linear(&self) -> f64 {
        db_to_linear(self.qos_db)
    }

    fn link_gain(&self, d: f64, rho: f64) -> f64 {
        db_to_linear(path_loss_db(d, rho, self.pl0_db, self.d0_m).expect("validated distance"))
    }

    pub fn gain_alice_irs(&self) -> f64 {
        self.link_gain(self.d_ai, self.rho_ai)
    }

    pub fn gain_irs_bob(&self) -> f64 {
        self.link_gain(self.d_ib, self.rho_ib)
    }

    pub fn gain_irs_eve(&self) -> f64 {
        self.link_gain(self.d_ie, self.rho_ie)
    }

    pub fn gain_alice_bob(&self) -> f64 {
        self.link_gain(self.d_ab, self.rho_ab)
    }

    pub fn gain_alice_eve(&self) -> f64 {
        self.link_gain(self.d_ae, self.rho_ae)
    }
}

/// One realization of the five link channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Transmitter-to-surface matrix, `n_irs x n_tx`.
    pub alice_irs: DMatrix<C64>,
    /// Surface-to-user vector, length `n_irs`.
    pub irs_bob: DVector<C64>,
    /// Surface-to-eavesdropper vector, length `n_irs`.
    pub irs_eve: DVector<C64>,
    /// Direct transmitter-to-user vector, length `n_tx`.
    pub alice_bob: DVector<C64>,
    /// Direct transmitter-to-eavesdropper vector, length `n_tx`.
    pub alice_eve: DVector<C64>,
    /// Seed that produced this realization.
    pub seed: u64,
}

impl ChannelSet {
    pub fn n_irs(&self) -> usize {
        self.alice_irs.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.alice_irs.ncols()
    }
}

/// Log-distance path loss in dB: `PL_0 - 10 rho log10(d / d_0)`.
pub fn path_loss_db(d: f64, rho: f64, pl0_db: f64, d0_m: f64) -> Result<f64, ChannelError> {
    if !(d > 0.0) {
        return Err(ChannelError::NonPositiveDistance(d));
    }
    if !(d0_m > 0.0) {
        return Err(ChannelError::NonPositiveDistance(d0_m));
    }
    Ok(pl0_db - 10.0 * rho * (d / d0_m).log10())
}

pub fn dbm_to_watt(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Draws one Rayleigh-fading realization of all five channels.
///
/// Entries are i.i.d. circularly-symmetric complex Gaussian with per-entry
/// variance equal to the link's linear path-loss gain. Draw order is fixed
/// (transmitter-surface matrix row-major, then surface-user, surface-
/// eavesdropper, direct-user, direct-eavesdropper), so the result is a pure
/// function of `(cfg, seed)`.
pub fn generate_channels(cfg: &ScenarioConfig, seed: u64) -> ChannelSet {
    let mut rng = rng::stream(seed);
    let l = cfg.n_irs;
    let nt = cfg.n_tx;

    let g_ai = cfg.gain_alice_irs();
    let mut a2i = Vec::with_capacity(l * nt);
    for _ in 0..l * nt {
        a2i.push(rng::complex_gaussian(&mut rng, g_ai));
    }
    let alice_irs = DMatrix::from_row_iterator(l, nt, a2i);

    let mut draw_vec = |len: usize, gain: f64| {
        DVector::from_iterator(len, (0..len).map(|_| rng::complex_gaussian(&mut rng, gain)))
    };
    let irs_bob = draw_vec(l, cfg.gain_irs_bob());
    let irs_eve = draw_vec(l, cfg.gain_irs_eve());
    let alice_bob = draw_vec(nt, cfg.gain_alice_bob());
    let alice_eve = draw_vec(nt, cfg.gain_alice_eve());

    ChannelSet {
        alice_irs,
        irs_bob,
        irs_eve,
        alice_bob,
        alice_eve,
        seed,
    }
}

fn effective_channel(
    alice_irs: &DMatrix<C64>,
    irs_rx: &DVector<C64>,
    direct: &DVector<C64>,
    q: &PhaseVector,
) -> Result<DVector<C64>, ChannelError> {
    if q.len() != alice_irs.nrows() {
        return Err(ChannelError::DimensionMismatch {
            got: q.len(),
            expected: alice_irs.nrows(),
        });
    }
    let weighted = irs_rx.component_mul(q.as_vector());
    Ok(alice_irs.ad_mul(&weighted) + direct)
}

/// Effective transmitter-to-user channel for a given phase configuration:
/// the cascaded surface path plus the direct path.
///
/// The phase convention matches [`crate::phase_opt::build_quadratic`]: entry i
/// of `q` multiplies element i's cascaded coefficient, so
/// `||h_B(q)||^2 = objective(q) + direct_power` holds exactly.
pub fn effective_bob_channel(
    cs: &ChannelSet,
    q: &PhaseVector,
) -> Result<DVector<C64>, ChannelError> {
    effective_channel(&cs.alice_irs, &cs.irs_bob, &cs.alice_bob, q)
}

/// Effective transmitter-to-eavesdropper channel, same convention.
pub fn effective_eve_channel(
    cs: &ChannelSet,
    q: &PhaseVector,
) -> Result<DVector<C64>, ChannelError> {
    effective_channel(&cs.alice_irs, &cs.irs_eve, &cs.alice_eve, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn path_loss_reference_distance() {
        assert_relative_eq!(
            path_loss_db(1.0, 2.7, -30.0, 1.0).unwrap(),
            -30.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn path_loss_decade() {
        assert_relative_eq!(
            path_loss_db(10.0, 2.0, -30.0, 1.0).unwrap(),
            -50.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn path_loss_general_point() {
        let pl = path_loss_db(50.0, 2.0, -30.0, 1.0).unwrap();
        assert!((pl - (-63.9794)).abs() < 1e-4);
        assert_relative_eq!(pl, -30.0 - 20.0 * 50f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn path_loss_rejects_nonpositive_distance() {
        assert!(path_loss_db(0.0, 2.0, -30.0, 1.0).is_err());
        assert!(path_loss_db(-3.0, 2.0, -30.0, 1.0).is_err());
    }

    #[test]
    fn unit_conversions() {
        assert_relative_eq!(dbm_to_watt(-90.0), 1e-12, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watt(5.0), 10f64.powf(-2.5), max_relative = 1e-12);
        assert!((dbm_to_watt(5.0) - 3.1623e-3).abs() < 1e-7);
        assert_relative_eq!(db_to_linear(10.0), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ScenarioConfig {
            n_irs: 6,
            ..Default::default()
        };
        let a = generate_channels(&cfg, 424242);
        let b = generate_channels(&cfg, 424242);
        assert_eq!(a, b);
        let c = generate_channels(&cfg, 424243);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_gain_entries_have_unit_variance() {
        let cfg = ScenarioConfig {
            n_tx: 5,
            n_irs: 50,
            pl0_db: 0.0,
            d_ai: 1.0,
            d_ib: 1.0,
            d_ie: 1.0,
            d_ab: 1.0,
            d_ae: 1.0,
            ..Default::default()
        };
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for seed in 0..400u64 {
            let cs = generate_channels(&cfg, seed);
            sum_sq += cs.alice_irs.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += cs.alice_irs.len();
        }
        let var = sum_sq / count as f64;
        assert!((var - 1.0).abs() < 0.02, "sample variance {var}");
    }

    #[test]
    fn direct_link_matches_closed_form_gain() {
        // d_ab = 48 m, rho_ab = 3: gain 10^((-30 - 30 log10 48)/10) ~= 9.04e-9.
        let cfg = ScenarioConfig {
            n_irs: 1,
            ..Default::default()
        };
        let expected = 10f64.powf((-30.0 - 30.0 * 48f64.log10()) / 10.0);
        assert!((expected - 9.04e-9).abs() / expected < 1e-3);
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for seed in 0..20_000u64 {
            let cs = generate_channels(&cfg, seed);
            sum_sq += cs.alice_bob.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += cs.alice_bob.len();
        }
        let mean = sum_sq / count as f64;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean |h|^2 = {mean:.3e}, expected {expected:.3e}"
        );
    }

    #[test]
    fn effective_channel_scalar_alignment() {
        let cs = ChannelSet {
            alice_irs: DMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
            irs_bob: DVector::from_element(1, C64::new(1.0, 0.0)),
            irs_eve: DVector::from_element(1, C64::new(1.0, 0.0)),
            alice_bob: DVector::from_element(1, C64::new(1.0, 0.0)),
            alice_eve: DVector::from_element(1, C64::new(1.0, 0.0)),
            seed: 0,
        };
        let aligned = PhaseVector::from_phases(&[0.0]);
        let h = effective_bob_channel(&cs, &aligned).unwrap();
        assert!((h[0] - C64::new(2.0, 0.0)).norm() <= 1e-15);

        let opposed = PhaseVector::from_phases(&[std::f64::consts::PI]);
        let h = effective_bob_channel(&cs, &opposed).unwrap();
        assert!(h[0].norm() <= 1e-15);
    }

    #[test]
    fn effective_channel_rejects_dimension_mismatch() {
        let cfg = ScenarioConfig {
            n_irs: 4,
            ..Default::default()
        };
        let cs = generate_channels(&cfg, 1);
        let q = PhaseVector::from_phases(&[0.0; 3]);
        assert!(matches!(
            effective_bob_channel(&cs, &q),
            Err(ChannelError::DimensionMismatch { got: 3, expected: 4 })
        ));
    }

    #[test]
    fn validate_flags_bad_fields() {
        let mut cfg = ScenarioConfig::default();
        cfg.n_tx = 1;
        assert!(cfg.validate().is_err());
        cfg = ScenarioConfig::default();
        cfg.d_ib = -1.0;
        assert!(cfg.validate().is_err());
        cfg = ScenarioConfig::default();
        cfg.eta0 = 1.5;
        assert!(cfg.validate().is_err());
        assert!(ScenarioConfig::default().validate().is_ok());
    }
}
