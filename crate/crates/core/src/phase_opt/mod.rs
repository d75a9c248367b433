//! Surface-phase optimization.
//!
//! Maximizing the user's effective channel gain over unit-modulus phases is a
//! quadratic problem `g(q) = q^H (-A) q + 2 Re{q^H b}` with `-A` positive
//! semidefinite, subject to `|q_i| = 1`. Two solvers are provided: a
//! conjugate-gradient method on the product-of-circles manifold ([`om_solve`],
//! which minimizes `1/g`) and a minorize-maximize iteration with closed-form
//! per-element phase updates ([`mm_solve`]). [`grid_oracle`] exhaustively
//! scans a phase grid for small problems and is used to validate both.

mod mm;
mod om;
mod oracle;

pub use mm::{MmOptions, mm_beta, mm_solve, mm_step};
pub use om::{OmOptions, om_solve};
pub use oracle::grid_oracle;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::C64;
use crate::channel::ChannelSet;
use crate::numerics::{HermitianMatrix, unit_normalize};
use crate::rng::SimRng;

/// Objective values with `|g|` at or below this (on the scale-normalized
/// problem) are treated as singular for the reciprocal objective.
pub(crate) const SINGULAR_FLOOR: f64 = 1e-12;

/// Cap on the conjugate-gradient coefficient.
const ALPHA_CAP: f64 = 10.0;

/// Unit-modulus tolerance enforced by [`PhaseVector`].
const UNIT_MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("objective stayed nonpositive after {restarts} random restarts")]
    ObjectiveSingularity { restarts: usize },
    #[error("objective magnitude {value:.3e} is below 1e-12; gradient undefined")]
    GradientSingularity { value: f64 },
    #[error("grid oracle supports at most 3 elements, got {0}")]
    GridTooLarge(usize),
    #[error("grid resolution must be >= 1")]
    ZeroResolution,
    #[error("phase vector entry {index} has modulus {modulus} (must be 1 within 1e-12)")]
    NotUnitModulus { index: usize, modulus: f64 },
}

/// Length-L complex vector with unit-modulus entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    q: DVector<C64>,
}

impl PhaseVector {
    pub fn new(q: DVector<C64>) -> Result<Self, SolveError> {
        for (index, entry) in q.iter().enumerate() {
            let modulus = entry.norm();
            if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
                return Err(SolveError::NotUnitModulus { index, modulus });
            }
        }
        Ok(Self { q })
    }

    /// Builds `q_i = exp(j theta_i)`.
    pub fn from_phases(phases: &[f64]) -> Self {
        Self {
            q: DVector::from_iterator(
                phases.len(),
                phases.iter().map(|&t| C64::new(t.cos(), t.sin())),
            ),
        }
    }

    /// Uniform random phases.
    pub fn random(len: usize, rng: &mut SimRng) -> Self {
        use rand::RngExt;
        let phases: Vec<f64> = (0..len)
            .map(|_| std::f64::consts::TAU * rng.random::<f64>())
            .collect();
        Self::from_phases(&phases)
    }

    /// Wraps a vector already known to be unit modulus (solver iterates).
    pub(crate) fn from_unit_unchecked(q: DVector<C64>) -> Self {
        debug_assert!(is_unit_modulus(&q), "iterate left the unit-modulus set");
        Self { q }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.q
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.q
    }

    /// Largest deviation of any entry modulus from 1.
    pub fn max_modulus_error(&self) -> f64 {
        self.q
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn is_unit_modulus(v: &DVector<C64>) -> bool {
    v.iter().all(|z| (z.norm() - 1.0).abs() <= UNIT_MODULUS_TOL)
}

/// The pair `(A, b)` of the phase-gain objective plus the direct-path power.
///
/// `A` is Hermitian negative semidefinite, `g(q) = q^H (-A) q + 2 Re{q^H b}`,
/// and `g(q) + direct_power` equals the squared norm of the user's effective
/// channel for the same `q`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub a: HermitianMatrix,
    pub b: DVector<C64>,
    /// `||h_AB||^2`, the constant offset recovering the full channel power.
    pub direct_power: f64,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `g(q) = q^H (-A) q + 2 Re{q^H b}` (real; the imaginary residue of the
    /// Hermitian quadratic form is discarded).
    pub fn objective(&self, q: &PhaseVector) -> f64 {
        self.view().objective(q.as_vector())
    }

    /// Euclidean gradient of the reciprocal objective `f = 1/g`:
    /// `-2 (-A q + b) / g^2`.
    ///
    /// First-order contract: for a tangent direction `z`,
    /// `f(retract(q, t, z)) ~ f(q) + t Re{z^H grad}`.
    pub fn euclidean_gradient(&self, q: &PhaseVector) -> Result<DVector<C64>, SolveError> {
        let view = self.view();
        let (g, grad) = view.objective_and_recip_gradient(q.as_vector());
        grad.ok_or(SolveError::GradientSingularity { value: g })
    }

    pub(crate) fn view(&self) -> FormRef<'_> {
        FormRef {
            a: self.a.as_matrix(),
            b: &self.b,
        }
    }

    /// Rescaled copy with `O(1)` objective magnitudes, used by the solvers so
    /// that stopping tolerances are scale-free.
    pub(crate) fn scaled(&self) -> ScaledForm {
        let l = self.dim() as f64;
        let a_norm = self.a.as_matrix().norm();
        let b_norm = self.b.norm();
        let scale = (a_norm * l + 2.0 * l.sqrt() * b_norm).max(1e-300);
        let scale = if scale > 1e-300 { scale } else { 1.0 };
        let a = self.a.as_matrix().unscale(scale);
        ScaledForm {
            a: HermitianMatrix::new(a).expect("scaling preserves symmetry"),
            b: self.b.unscale(scale),
            scale,
        }
    }
}

/// Borrowed view evaluating the objective and reciprocal gradient.
pub(crate) struct FormRef<'a> {
    pub a: &'a DMatrix<C64>,
    pub b: &'a DVector<C64>,
}

impl FormRef<'_> {
    pub fn objective(&self, v: &DVector<C64>) -> f64 {
        let av = self.a * v;
        -v.dotc(&av).re + 2.0 * v.dotc(self.b).re
    }

    /// Returns `(g, grad f)` where `f = 1/g`; the gradient is `None` when
    /// `|g|` is below the singular floor.
    pub fn objective_and_recip_gradient(&self, v: &DVector<C64>) -> (f64, Option<DVector<C64>>) {
        let av = self.a * v;
        let g = -v.dotc(&av).re + 2.0 * v.dotc(self.b).re;
        if g.abs() < SINGULAR_FLOOR {
            return (g, None);
        }
        let grad = (self.b - av).scale(-2.0 / (g * g));
        (g, Some(grad))
    }
}

/// Scale-normalized problem: `objective = g / scale`.
pub(crate) struct ScaledForm {
    pub a: HermitianMatrix,
    pub b: DVector<C64>,
    pub scale: f64,
}

impl ScaledForm {
    pub fn view(&self) -> FormRef<'_> {
        FormRef {
            a: self.a.as_matrix(),
            b: &self.b,
        }
    }
}

/// Builds the phase-gain quadratic form from a channel realization:
/// `A = -diag(conj(h_IB)) H_AI H_AI^H diag(h_IB)` (negative semidefinite),
/// `b = diag(conj(h_IB)) H_AI h_AB`, offset `||h_AB||^2`.
pub fn build_quadratic(cs: &ChannelSet) -> QuadraticForm {
    let l = cs.n_irs();
    // Cascade matrix: row i of the transmitter-surface matrix scaled by the
    // conjugated surface-user coefficient.
    let mut cascade = cs.alice_irs.clone();
    for i in 0..l {
        let w = cs.irs_bob[i].conj();
        cascade.row_mut(i).iter_mut().for_each(|z| *z *= w);
    }
    let a = -(&cascade * cascade.adjoint());
    QuadraticForm {
        a: HermitianMatrix::new(a).expect("product form is Hermitian"),
        b: &cascade * &cs.alice_bob,
        direct_power: cs.alice_bob.norm_squared(),
    }
}

/// Projects a vector onto the tangent space at a unit-modulus point:
/// `v_i - Re{v_i conj(q_i)} q_i` per entry.
pub(crate) fn project_tangent(v: &DVector<C64>, at: &DVector<C64>) -> DVector<C64> {
    DVector::from_iterator(
        v.len(),
        v.iter()
            .zip(at.iter())
            .map(|(&vi, &qi)| vi - qi.scale((vi * qi.conj()).re)),
    )
}

/// Riemannian gradient: orthogonal projection of the Euclidean gradient onto
/// the tangent space at `q`.
pub fn riemannian_gradient(egrad: &DVector<C64>, q: &PhaseVector) -> DVector<C64> {
    project_tangent(egrad, q.as_vector())
}

/// Carries a tangent vector to the tangent space at `q_next` (projection).
pub fn vector_transport(mu: &DVector<C64>, q_next: &PhaseVector) -> DVector<C64> {
    project_tangent(mu, q_next.as_vector())
}

/// Conjugate-gradient coefficient: the norm ratio
/// `||egrad_next||^2 / ||egrad_curr||^2`, clamped to `[0, 10]`.
/// A vanishing current gradient restarts the recursion (returns 0).
pub fn cg_coefficient(egrad_next: &DVector<C64>, egrad_curr: &DVector<C64>) -> f64 {
    let denom = egrad_curr.norm_squared();
    if denom < 1e-300 {
        return 0.0;
    }
    (egrad_next.norm_squared() / denom).max(0.0).min(ALPHA_CAP)
}

/// Polak-Ribiere-plus coefficient on Riemannian gradients:
/// `Re{g_next^H (g_next - transported_prev)} / ||g_curr||^2`, clamped to `[0, 10]`.
pub(crate) fn pr_plus_coefficient(
    rgrad_next: &DVector<C64>,
    transported_prev: &DVector<C64>,
    rgrad_curr_norm_sq: f64,
) -> f64 {
    if rgrad_curr_norm_sq < 1e-300 {
        return 0.0;
    }
    let num = rgrad_next.dotc(&(rgrad_next - transported_prev)).re;
    (num / rgrad_curr_norm_sq).max(0.0).min(ALPHA_CAP)
}

/// Retraction: entrywise normalization of `q + eta * mu`.
///
/// An entry whose sum lands exactly on zero keeps its previous phase.
pub fn retract(q: &PhaseVector, eta: f64, mu: &DVector<C64>) -> PhaseVector {
    PhaseVector::from_unit_unchecked(retract_raw(q.as_vector(), eta, mu))
}

pub(crate) fn retract_raw(q: &DVector<C64>, eta: f64, mu: &DVector<C64>) -> DVector<C64> {
    let moved = q + mu.scale(eta);
    match unit_normalize(&moved) {
        Ok(v) => v,
        Err(_) => DVector::from_iterator(
            q.len(),
            moved.iter().zip(q.iter()).map(|(&m, &prev)| {
                let modulus = m.norm();
                if modulus < 1e-300 {
                    prev
                } else {
                    m / C64::new(modulus, 0.0)
                }
            }),
        ),
    }
}

/// Outcome of a step-size computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSize {
    pub eta: f64,
    /// True when the Armijo backtracking path was taken instead of the secant
    /// estimate.
    pub fallback: bool,
}

/// Secant root of the slope interpolated through offsets `0` and `-eta_prev`
/// along the line `q + t d`. Exact for slopes affine in `t`; `None` when the
/// probe slope is unusable (singular objective, tiny denominator, nonpositive
/// or runaway estimate).
pub(crate) fn secant_estimate(
    form: &FormRef<'_>,
    q: &DVector<C64>,
    d: &DVector<C64>,
    eta_prev: f64,
) -> Option<f64> {
    let (_, grad_here) = form.objective_and_recip_gradient(q);
    let slope_here = real_inner(&grad_here?, d);
    let probe = q - d.scale(eta_prev);
    let (_, grad_probe) = form.objective_and_recip_gradient(&probe);
    let slope_probe = real_inner(&grad_probe?, d);
    secant_from_slopes(slope_here, slope_probe, eta_prev)
}

/// Root of the affine slope model through `(0, slope_here)` and
/// `(-eta_prev, slope_probe)`.
pub(crate) fn secant_from_slopes(slope_here: f64, slope_probe: f64, eta_prev: f64) -> Option<f64> {
    let denom = slope_probe - slope_here;
    if denom.abs() < 1e-18 {
        return None;
    }
    let eta = eta_prev * slope_here / denom;
    if eta.is_finite() && eta > 0.0 && eta <= 1e3 * eta_prev {
        Some(eta)
    } else {
        None
    }
}

/// Real inner product `Re{x^H y}`.
pub(crate) fn real_inner(x: &DVector<C64>, y: &DVector<C64>) -> f64 {
    x.dotc(y).re
}

/// Sufficient-decrease test for `f = 1/g` at step `t` along the retracted
/// direction `mu`. Candidates with a singular or nonpositive objective are
/// rejected outright.
pub(crate) fn armijo_accepts(
    form: &FormRef<'_>,
    q: &DVector<C64>,
    mu: &DVector<C64>,
    t: f64,
    f_curr: f64,
    slope: f64,
) -> bool {
    let candidate = retract_raw(q, t, mu);
    let g = form.objective(&candidate);
    if g <= SINGULAR_FLOOR {
        return false;
    }
    1.0 / g <= f_curr + 1e-4 * t * slope
}

/// Step size along `mu` at `q`: the secant estimate from the Euclidean
/// direction `d` when it exists and satisfies sufficient decrease, otherwise
/// Armijo backtracking (factor 0.5, constant 1e-4, at most 30 halvings from
/// `eta_prev`). Returns `eta = 0` when backtracking exhausts its budget, which
/// the solver treats as stagnation.
pub fn secant_step_size(
    qf: &QuadraticForm,
    q: &PhaseVector,
    d: &DVector<C64>,
    mu: &DVector<C64>,
    eta_prev: f64,
) -> StepSize {
    step_size(&qf.view(), q.as_vector(), d, mu, eta_prev)
}

pub(crate) fn step_size(
    form: &FormRef<'_>,
    q: &DVector<C64>,
    d: &DVector<C64>,
    mu: &DVector<C64>,
    eta_prev: f64,
) -> StepSize {
    if d.norm_squared() < 1e-300 || mu.norm_squared() < 1e-300 {
        return StepSize {
            eta: 0.0,
            fallback: false,
        };
    }
    let (g, grad) = form.objective_and_recip_gradient(q);
    let Some(grad) = grad else {
        return StepSize {
            eta: 0.0,
            fallback: false,
        };
    };
    let f_curr = 1.0 / g;
    let slope = real_inner(&project_tangent(&grad, q), mu);

    if let Some(eta) = secant_estimate(form, q, d, eta_prev)
        && armijo_accepts(form, q, mu, eta, f_curr, slope)
    {
        return StepSize {
            eta,
            fallback: false,
        };
    }

    let mut t = eta_prev;
    for _ in 0..30 {
        if armijo_accepts(form, q, mu, t, f_curr, slope) {
            return StepSize {
                eta: t,
                fallback: true,
            };
        }
        t *= 0.5;
    }
    StepSize {
        eta: 0.0,
        fallback: true,
    }
}

/// Per-iteration record of a solver run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    /// Objective `g` at each recorded iterate (physical scale).
    pub objectives: Vec<f64>,
    /// Riemannian gradient norm of the scale-normalized reciprocal objective
    /// at each iterate. Populated by the manifold solver only.
    pub grad_norms: Vec<f64>,
    /// Number of update steps performed.
    pub iterations: usize,
    /// Whether the stopping criterion was met before the iteration cap.
    pub converged: bool,
    pub wall_time_s: f64,
    /// Steps that used Armijo backtracking instead of the secant estimate.
    pub fallback_steps: usize,
    /// Random re-initializations after a nonpositive starting objective.
    pub restarts: usize,
    /// True when backtracking could not find any acceptable step.
    pub stagnated: bool,
}

/// Solver output: the best iterate found and the iteration trace.
#[derive(Debug, Clone)]
pub struct Solution {
    pub q: PhaseVector,
    pub trace: SolveTrace,
}

pub(crate) struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn elapsed_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
