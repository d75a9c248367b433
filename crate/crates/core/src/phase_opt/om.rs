//! Conjugate-gradient solver on the product-of-circles manifold.
//!
//! Minimizes the reciprocal objective `f = 1/g` over unit-modulus vectors.
//! Each iteration computes a step size (secant estimate safeguarded by Armijo
//! backtracking), retracts along the manifold search direction, projects the
//! new Euclidean gradient onto the tangent space, transports the old direction,
//! and combines them with a conjugate-gradient coefficient. Iteration stops
//! when the Riemannian gradient norm falls below the tolerance.

use nalgebra::DVector;

use super::{
    PhaseVector, QuadraticForm, ScaledForm, SINGULAR_FLOOR, Solution, SolveError, SolveTrace,
    Stopwatch, cg_coefficient, pr_plus_coefficient, project_tangent, real_inner, retract_raw,
    step_size,
};
use crate::C64;
use crate::channel::{CgRule, ScenarioConfig};
use crate::rng;

/// Draw budget for the initial-point rejection sampler. A nonpositive
/// objective occupies at most half of each circle, so this bound is
/// unreachable for any instance with a positive maximum.
const MAX_INIT_DRAWS: usize = 200;

#[derive(Debug, Clone)]
pub struct OmOptions {
    /// Stop when the Riemannian gradient norm of the scale-normalized
    /// objective drops to this value.
    pub tol: f64,
    /// Total update-step budget, shared across random restarts.
    pub max_iter: usize,
    /// Initial step size, in (0, 1).
    pub eta0: f64,
    pub cg_rule: CgRule,
    /// Seed for the re-randomized starting points used when the initial
    /// objective is nonpositive.
    pub restart_seed: u64,
}

impl OmOptions {
    pub fn from_config(cfg: &ScenarioConfig, restart_seed: u64) -> Self {
        Self {
            tol: cfg.om_tol,
            max_iter: cfg.max_iter,
            eta0: cfg.eta0,
            cg_rule: cfg.cg_rule,
            restart_seed,
        }
    }
}

impl Default for OmOptions {
    fn default() -> Self {
        Self::from_config(&ScenarioConfig::default(), 0)
    }
}

struct BestIterate {
    objective: f64,
    q: DVector<C64>,
}

impl BestIterate {
    fn offer(&mut self, objective: f64, q: &DVector<C64>) {
        if objective > self.objective {
            self.objective = objective;
            self.q = q.clone();
        }
    }
}

enum RunEnd {
    Converged,
    IterCap,
    Stagnated,
}

/// Solves the phase problem with the manifold conjugate-gradient method.
///
/// The starting point is re-randomized (at most five times) if its objective
/// is nonpositive, where the reciprocal objective is unusable. Returns the
/// best iterate by objective value together with the trace.
pub fn om_solve(
    qf: &QuadraticForm,
    q0: &PhaseVector,
    opts: &OmOptions,
) -> Result<Solution, SolveError> {
    let watch = Stopwatch::start();
    let scaled = qf.scaled();
    let mut trace = SolveTrace::default();
    let mut restart_rng = rng::stream(opts.restart_seed);

    // The reciprocal objective needs a positive start; re-randomize until one
    // is found (each accepted step afterwards keeps the objective positive).
    let mut q = q0.as_vector().clone();
    while scaled.view().objective(&q) <= SINGULAR_FLOOR {
        trace.restarts += 1;
        if trace.restarts > MAX_INIT_DRAWS {
            trace.wall_time_s = watch.elapsed_s();
            return Err(SolveError::ObjectiveSingularity {
                restarts: trace.restarts - 1,
            });
        }
        q = PhaseVector::random(q.len(), &mut restart_rng).into_vector();
    }

    let mut best = BestIterate {
        objective: f64::NEG_INFINITY,
        q: q.clone(),
    };
    let end = cg_run(&scaled, &mut q, opts, &mut trace, &mut best);
    trace.converged = matches!(end, RunEnd::Converged);
    trace.stagnated = matches!(end, RunEnd::Stagnated);
    trace.wall_time_s = watch.elapsed_s();
    Ok(Solution {
        q: PhaseVector::from_unit_unchecked(best.q),
        trace,
    })
}

fn cg_run(
    scaled: &ScaledForm,
    q: &mut DVector<C64>,
    opts: &OmOptions,
    trace: &mut SolveTrace,
    best: &mut BestIterate,
) -> RunEnd {
    let form = scaled.view();
    let (g, grad) = form.objective_and_recip_gradient(q);
    let mut egrad = grad.expect("caller ensured a positive objective");
    let mut rgrad = project_tangent(&egrad, q);
    let mut rgrad_norm = rgrad.norm();

    record(trace, best, scaled.scale, g, rgrad_norm, q);
    if rgrad_norm <= opts.tol {
        return RunEnd::Converged;
    }

    // Initial search directions: the negated Euclidean gradient, both for the
    // manifold direction and for the Euclidean recursion feeding the secant.
    let mut mu = -&egrad;
    let mut d = -&egrad;
    let mut steepest = true;
    let mut eta_prev = opts.eta0;

    while trace.iterations < opts.max_iter {
        let mut step = step_size(&form, q, &d, &mu, eta_prev);
        if step.eta == 0.0 && !steepest {
            // Conjugate direction made no progress; retry from steepest descent.
            mu = -&rgrad;
            d = -&egrad;
            step = step_size(&form, q, &d, &mu, eta_prev);
        }
        if step.fallback {
            trace.fallback_steps += 1;
        }
        if step.eta == 0.0 {
            return RunEnd::Stagnated;
        }

        let q_next = retract_raw(q, step.eta, &mu);
        debug_assert!(super::is_unit_modulus(&q_next));
        trace.iterations += 1;

        let (g_next, grad_next) = form.objective_and_recip_gradient(&q_next);
        // The accepted step keeps the objective positive, so the gradient exists.
        let egrad_next = grad_next.expect("accepted iterate has positive objective");
        let rgrad_next = project_tangent(&egrad_next, &q_next);
        let rgrad_next_norm = rgrad_next.norm();
        record(trace, best, scaled.scale, g_next, rgrad_next_norm, &q_next);

        if rgrad_next_norm <= opts.tol {
            *q = q_next;
            return RunEnd::Converged;
        }

        let alpha = match opts.cg_rule {
            CgRule::Paper => cg_coefficient(&egrad_next, &egrad),
            CgRule::PolakRibiere => {
                let transported = project_tangent(&rgrad, &q_next);
                pr_plus_coefficient(&rgrad_next, &transported, rgrad_norm * rgrad_norm)
            }
        };
        let transported_mu = project_tangent(&mu, &q_next);
        mu = -&rgrad_next + transported_mu.scale(alpha);
        d = -&egrad_next + d.scale(alpha);
        steepest = false;
        // Keep the direction gradient-related; fall back to steepest descent
        // whenever conjugacy produced an ascent direction.
        if real_inner(&mu, &rgrad_next) >= 0.0 {
            mu = -&rgrad_next;
            d = -&egrad_next;
            steepest = true;
        }

        *q = q_next;
        egrad = egrad_next;
        rgrad = rgrad_next;
        rgrad_norm = rgrad_next_norm;
        eta_prev = step.eta;
    }
    RunEnd::IterCap
}

fn record(
    trace: &mut SolveTrace,
    best: &mut BestIterate,
    scale: f64,
    g_scaled: f64,
    rgrad_norm: f64,
    q: &DVector<C64>,
) {
    trace.objectives.push(g_scaled * scale);
    trace.grad_norms.push(rgrad_norm);
    best.offer(g_scaled, q);
}
