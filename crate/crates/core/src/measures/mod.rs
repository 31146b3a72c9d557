//! Figures of merit of the two-mode state: EPR variance, Gaussian
//! entanglement of formation, quadrature squeezing, and logarithmic
//! negativity as an independent entanglement witness.

mod geof;

pub use geof::{
    entropy_from_epr, geof, geof_symmetric, geof_with, GeofMethod, GeofOptions, GeofReport,
};

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_linear_map, symplectic_eigenvalues, CovarianceMatrix, ModeIndex, QuadratureIndex,
    PHYSICALITY_TOL,
};

/// `½[Var(x_at − p_ph) + Var(p_at − x_ph)]` in coherent-state units
/// (1 for the vacuum, 0 for an ideal EPR state).
pub fn epr_variance(gamma: &CovarianceMatrix) -> f64 {
    let g = |i, j| gamma.get(i, j);
    0.25 * (g(0, 0) + g(3, 3) - 2.0 * g(0, 3)) + 0.25 * (g(1, 1) + g(2, 2) - 2.0 * g(1, 2))
}

/// Variance of a single quadrature relative to the coherent level.
pub fn squeezing(gamma: &CovarianceMatrix, mode: ModeIndex, quad: QuadratureIndex) -> f64 {
    gamma.variance(mode, quad)
}

/// Partial transpose with respect to the light mode (`p_ph → −p_ph`).
pub fn partial_transpose(gamma: &CovarianceMatrix) -> CovarianceMatrix {
    let flip = Matrix4::from_diagonal(&[1.0, 1.0, 1.0, -1.0].into());
    apply_linear_map(gamma, &flip)
}

/// Smallest symplectic eigenvalue of the partially transposed state.
pub fn min_partial_transpose_eigenvalue(gamma: &CovarianceMatrix) -> Result<f64> {
    symplectic_eigenvalues(&partial_transpose(gamma)).map(|(_, low)| low)
}

/// Logarithmic negativity in bits, `max(0, −log₂ ν̃₋)`.
pub fn log_negativity(gamma: &CovarianceMatrix) -> Result<f64> {
    let nu = min_partial_transpose_eigenvalue(gamma)?;
    Ok((-nu.log2()).max(0.0))
}

/// Two-mode covariance reduced by local symplectic operations to
///
/// ```text
/// ⎡ a   0   cx  0  ⎤
/// ⎢ 0   a   0   cp ⎥
/// ⎢ cx  0   b   0  ⎥
/// ⎣ 0   cp  0   b  ⎦
/// ```
///
/// with `cx ≥ |cp|` and `cp` carrying the sign of `det C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardForm {
    pub a: f64,
    pub b: f64,
    pub c_x: f64,
    pub c_p: f64,
}

impl StandardForm {
    pub fn covariance(&self) -> CovarianceMatrix {
        let StandardForm { a, b, c_x, c_p } = *self;
        CovarianceMatrix::symmetrized(Matrix4::new(
            a, 0.0, c_x, 0.0, //
            0.0, a, 0.0, c_p, //
            c_x, 0.0, b, 0.0, //
            0.0, c_p, 0.0, b,
        ))
    }

    pub fn is_symmetric(&self) -> bool {
        (self.a - self.b).abs() <= 1e-12 * self.a.max(self.b)
    }
}

/// `√det M` and `M^{-1/2}` for a 2×2 symmetric positive definite `M`.
fn inverse_sqrt_2x2(m: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    let det = m.determinant();
    if !(det > 0.0) {
        return None;
    }
    let root_det = det.sqrt();
    let t = (m.trace() + 2.0 * root_det).sqrt();
    let sqrt_m = (m + Matrix2::identity() * root_det) / t;
    sqrt_m.try_inverse()
}

/// Local-symplectic standard form.
///
/// Each local block `A` is brought to `√det A · 1` by the symplectic
/// `(det A)^{1/4} A^{-1/2}`; local rotations then diagonalize the correlation
/// block through its singular value decomposition.
pub fn standard_form(gamma: &CovarianceMatrix) -> Result<StandardForm> {
    let a_block = gamma.local_block(ModeIndex::Atoms);
    let b_block = gamma.local_block(ModeIndex::Light);
    let det_a = a_block.determinant();
    let det_b = b_block.determinant();
    for (name, det, block) in [("atomic", det_a, &a_block), ("light", det_b, &b_block)] {
        if !(det >= 1.0 - PHYSICALITY_TOL) || block[(0, 0)] <= 0.0 {
            return Err(Error::InvalidState(format!(
                "{name} block has determinant {det:e} below the vacuum level"
            )));
        }
    }
    let ta = inverse_sqrt_2x2(&a_block)
        .ok_or_else(|| Error::InvalidState("atomic block is not positive definite".into()))?
        * det_a.powf(0.25);
    let tb = inverse_sqrt_2x2(&b_block)
        .ok_or_else(|| Error::InvalidState("light block is not positive definite".into()))?
        * det_b.powf(0.25);
    let c = ta * gamma.coupling_block() * tb.transpose();
    let svd = c
        .try_svd(false, false, f64::EPSILON, 200)
        .ok_or_else(|| Error::numerical("SVD of the correlation block did not converge"))?;
    let (s0, s1) = (svd.singular_values[0], svd.singular_values[1]);
    let (hi, lo) = if s0 >= s1 { (s0, s1) } else { (s1, s0) };
    let sign = if gamma.coupling_block().determinant() < 0.0 {
        -1.0
    } else {
        1.0
    };
    Ok(StandardForm {
        a: det_a.sqrt(),
        b: det_b.sqrt(),
        c_x: hi,
        c_p: sign * lo,
    })
}
