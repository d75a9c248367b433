//! Small dense complex-linear-algebra kernels shared by the other modules.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::C64;

/// Entrywise asymmetry above this bound rejects a matrix as non-Hermitian.
const HERMITIAN_REJECT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian: |m[{row},{col}] - conj(m[{col},{row}])| = {asymmetry:.3e} exceeds 1e-9")]
    NotHermitian {
        row: usize,
        col: usize,
        asymmetry: f64,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("vector entry {index} has zero modulus")]
    ZeroModulusEntry { index: usize },
    #[error("null-space basis of the zero vector is ill-defined")]
    ZeroVector,
    #[error("a length-{0} vector has no null space to project onto")]
    NoNullSpace(usize),
}

/// Square complex matrix with `m[i][j] = conj(m[j][i])` enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry to 1e-9 per entry, then stores the exactly
    /// symmetrized matrix `(m + m^H) / 2`.
    pub fn new(m: DMatrix<C64>) -> Result<Self, NumericsError> {
        if m.nrows() != m.ncols() {
            return Err(NumericsError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let asymmetry = (m[(i, j)] - m[(j, i)].conj()).norm();
                if asymmetry > HERMITIAN_REJECT_TOL {
                    return Err(NumericsError::NotHermitian {
                        row: i,
                        col: j,
                        asymmetry,
                    });
                }
            }
        }
        let sym = (&m + m.adjoint()).scale(0.5);
        Ok(Self { entries: sym })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.entries.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Largest eigenvalue of a Hermitian matrix.
///
/// Power iteration on the diagonally shifted matrix `M + ||M||_inf I`, which is
/// positive semidefinite so its dominant eigenvalue is `lambda_max(M)` plus the
/// shift. Iteration stops once successive Rayleigh quotients agree to 1e-12
/// relative, capped at 10 000 iterations. The start vector comes from a fixed
/// seed, so the result is deterministic for a fixed input.
pub fn lambda_max(m: &HermitianMatrix) -> f64 {
    let n = m.dim();
    if n == 1 {
        return m.as_matrix()[(0, 0)].re;
    }
    let shift = m.inf_norm();
    if shift == 0.0 {
        // Zero matrix: every eigenvalue is zero.
        return 0.0;
    }

    let mut rng = crate::rng::stream(0x706f_7765_725f_6974);
    let mut v = DVector::<C64>::from_fn(n, |_, _| crate::rng::complex_gaussian(&mut rng, 1.0));
    v /= C64::new(v.norm(), 0.0);

    let mut rayleigh = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let mut w = m.as_matrix() * &v;
        w += v.scale(shift);
        let next = v.dotc(&w).re;
        let w_norm = w.norm();
        if w_norm < 1e-300 {
            // Start vector lay in the null space of the shifted matrix.
            return next - shift;
        }
        v = w / C64::new(w_norm, 0.0);
        if (next - rayleigh).abs() <= 1e-12 * next.abs().max(1e-300) {
            return next - shift;
        }
        rayleigh = next;
    }
    rayleigh - shift
}

/// Orthonormal basis of the orthogonal complement of a nonzero vector.
///
/// Returns an `n x (n-1)` matrix `U` with `U^H U = I` and `U^H h = 0`, built
/// from the trailing columns of the Householder reflector that maps `h/||h||`
/// onto the first coordinate axis.
pub fn rank1_nullspace_basis(h: &DVector<C64>) -> Result<DMatrix<C64>, NumericsError> {
    let n = h.len();
    if n < 2 {
        return Err(NumericsError::NoNullSpace(n));
    }
    let norm = h.norm();
    if norm < 1e-300 {
        return Err(NumericsError::ZeroVector);
    }
    let u = h / C64::new(norm, 0.0);

    // alpha = -u_1/|u_1| avoids cancellation in v = u - alpha e_1.
    let alpha = if u[0].norm() < 1e-300 {
        C64::new(-1.0, 0.0)
    } else {
        -u[0] / C64::new(u[0].norm(), 0.0)
    };
    let mut v = u.clone();
    v[0] -= alpha;
    let v_norm_sq = v.norm_squared();

    let mut basis = DMatrix::<C64>::zeros(n, n - 1);
    for j in 1..n {
        let coeff = C64::new(2.0 / v_norm_sq, 0.0) * v[j].conj();
        let mut col = basis.column_mut(j - 1);
        for i in 0..n {
            col[i] = -coeff * v[i];
        }
        col[j] += C64::new(1.0, 0.0);
    }
    Ok(basis)
}

/// Entrywise projection onto the unit circle: `v_i / |v_i|`.
pub fn unit_normalize(v: &DVector<C64>) -> Result<DVector<C64>, NumericsError> {
    let mut out = v.clone();
    for (index, entry) in out.iter_mut().enumerate() {
        let modulus = entry.norm();
        if modulus < 1e-300 {
            return Err(NumericsError::ZeroModulusEntry { index });
        }
        *entry /= C64::new(modulus, 0.0);
    }
    Ok(out)
}
