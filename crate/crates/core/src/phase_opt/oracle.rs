//! Exhaustive phase-grid search for validating the solvers on small problems.

use nalgebra::DVector;

use super::{PhaseVector, QuadraticForm, SolveError};
use crate::C64;

/// Evaluates the objective on the uniform grid `{2 pi k / resolution}` per
/// element and returns the best grid point and its value. Cost is
/// `resolution^L`, so the dimension is capped at 3.
pub fn grid_oracle(
    qf: &QuadraticForm,
    resolution: usize,
) -> Result<(PhaseVector, f64), SolveError> {
    let l = qf.dim();
    if l > 3 {
        return Err(SolveError::GridTooLarge(l));
    }
    if resolution == 0 {
        return Err(SolveError::ZeroResolution);
    }

    let phases: Vec<C64> = (0..resolution)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / resolution as f64;
            C64::new(theta.cos(), theta.sin())
        })
        .collect();

    let view = qf.view();
    let total = resolution.pow(l as u32);
    let mut point = DVector::from_element(l, phases[0]);
    let mut best_value = f64::NEG_INFINITY;
    let mut best_point = point.clone();
    let mut indices = vec![0usize; l];

    for _ in 0..total {
        for (slot, &k) in indices.iter().enumerate() {
            point[slot] = phases[k];
        }
        let value = view.objective(&point);
        if value > best_value {
            best_value = value;
            best_point.copy_from(&point);
        }
        // Mixed-radix increment.
        for slot in indices.iter_mut() {
            *slot += 1;
            if *slot < resolution {
                break;
            }
            *slot = 0;
        }
    }

    Ok((PhaseVector::from_unit_unchecked(best_point), best_value))
}
