//! Transmit design: minimum-power beamformer, null-space artificial noise and
//! rate evaluation.
//!
//! The beamformer is maximum-ratio transmission toward the user's effective
//! channel at exactly the power meeting the SNR target; the full power
//! remainder becomes artificial noise spread isotropically over the null space
//! of that channel, so the user sees no jamming. The eavesdropper's channels
//! never enter the design, only the rate evaluation.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::C64;
use crate::channel::{ChannelError, ChannelSet, ScenarioConfig, effective_bob_channel, effective_eve_channel};
use crate::numerics::{NumericsError, rank1_nullspace_basis};
use crate::phase_opt::PhaseVector;

#[derive(Debug, Error)]
pub enum TransmitError {
    #[error("jamming power must be nonnegative, got {0}")]
    NegativeJamPower(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Complete transmit-side design for one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitDesign {
    /// Beamformer `w` (units sqrt-watt); `||w||^2 = p_signal`.
    pub beamformer: DVector<C64>,
    /// Artificial-noise covariance (watts); PSD with trace `p_jam`.
    pub an_covariance: DMatrix<C64>,
    pub p_signal: f64,
    pub p_jam: f64,
    /// False when the SNR target cannot be met within the power budget; all
    /// power fields and matrices are zeroed in that case.
    pub feasible: bool,
}

impl TransmitDesign {
    fn infeasible(n_tx: usize) -> Self {
        Self {
            beamformer: DVector::zeros(n_tx),
            an_covariance: DMatrix::zeros(n_tx, n_tx),
            p_signal: 0.0,
            p_jam: 0.0,
            feasible: false,
        }
    }
}

/// Achieved rates for one design (base-2 logarithms, bits per channel use).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateReport {
    pub rate_bob: f64,
    pub rate_eve: f64,
    /// `max(rate_bob - rate_eve, 0)`.
    pub secrecy_rate: f64,
    pub sinr_bob: f64,
    pub sinr_eve: f64,
}

/// Maximum-ratio beamformer at the minimum power meeting the SNR target:
/// `P_T = gamma sigma_b^2 / ||h_B||^2`, `w = sqrt(P_T) h_B / ||h_B||`.
///
/// Returns `None` for a vanishing channel (no finite power meets the target).
pub fn min_power_and_beamformer(
    h_bob: &DVector<C64>,
    gamma_lin: f64,
    noise_bob_w: f64,
) -> Option<(DVector<C64>, f64)> {
    let gain = h_bob.norm_squared();
    if gain < 1e-300 {
        return None;
    }
    let p_signal = gamma_lin * noise_bob_w / gain;
    let w = h_bob.scale(p_signal.sqrt() / gain.sqrt());
    Some((w, p_signal))
}

/// Isotropic artificial-noise covariance on the null space of the user's
/// channel: `R = p_jam / (n - 1) * U U^H` with `U` an orthonormal null-space
/// basis, so `h^H R h = 0` and `trace(R) = p_jam`.
pub fn an_covariance(h_bob: &DVector<C64>, p_jam: f64) -> Result<DMatrix<C64>, TransmitError> {
    if p_jam < 0.0 {
        return Err(TransmitError::NegativeJamPower(p_jam));
    }
    let n = h_bob.len();
    if p_jam == 0.0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let basis = rank1_nullspace_basis(h_bob)?;
    Ok((&basis * basis.adjoint()).scale(p_jam / (n - 1) as f64))
}

/// Achievable rates for given effective channels and design.
pub fn secrecy_rate(
    h_bob: &DVector<C64>,
    h_eve: &DVector<C64>,
    design: &TransmitDesign,
    noise_bob_w: f64,
    noise_eve_w: f64,
) -> RateReport {
    let signal_bob = h_bob.dotc(&design.beamformer).norm_sqr();
    let signal_eve = h_eve.dotc(&design.beamformer).norm_sqr();
    let jam_bob = (h_bob.dotc(&(&design.an_covariance * h_bob)).re).max(0.0);
    let jam_eve = (h_eve.dotc(&(&design.an_covariance * h_eve)).re).max(0.0);

    let sinr_bob = signal_bob / (noise_bob_w + jam_bob);
    let sinr_eve = signal_eve / (noise_eve_w + jam_eve);
    let rate_bob = (1.0 + sinr_bob).log2();
    let rate_eve = (1.0 + sinr_eve).log2();
    RateReport {
        rate_bob,
        rate_eve,
        secrecy_rate: (rate_bob - rate_eve).max(0.0),
        sinr_bob,
        sinr_eve,
    }
}

/// Designs the transmission from effective channels: beamformer at minimum
/// power, feasibility test against the budget, artificial noise on the
/// remainder, rate evaluation. Infeasible realizations return a zeroed design
/// and report rather than an error.
pub fn design_for_channels(
    h_bob: &DVector<C64>,
    h_eve: &DVector<C64>,
    cfg: &ScenarioConfig,
) -> Result<(TransmitDesign, RateReport), TransmitError> {
    let p_total = cfg.p_total_w();
    let Some((beamformer, p_signal)) =
        min_power_and_beamformer(h_bob, cfg.qos_linear(), cfg.noise_bob_w())
    else {
        return Ok((TransmitDesign::infeasible(cfg.n_tx), RateReport::default()));
    };
    if p_signal > p_total {
        return Ok((TransmitDesign::infeasible(cfg.n_tx), RateReport::default()));
    }
    let p_jam = p_total - p_signal;
    let an_covariance = an_covariance(h_bob, p_jam)?;
    let design = TransmitDesign {
        beamformer,
        an_covariance,
        p_signal,
        p_jam,
        feasible: true,
    };
    let report = secrecy_rate(h_bob, h_eve, &design, cfg.noise_bob_w(), cfg.noise_eve_w());
    Ok((design, report))
}

/// Full pipeline from a channel realization and phase configuration.
pub fn design_transmission(
    cs: &ChannelSet,
    q: &PhaseVector,
    cfg: &ScenarioConfig,
) -> Result<(TransmitDesign, RateReport), TransmitError> {
    let h_bob = effective_bob_channel(cs, q)?;
    let h_eve = effective_eve_channel(cs, q)?;
    design_for_channels(&h_bob, &h_eve, cfg)
}
