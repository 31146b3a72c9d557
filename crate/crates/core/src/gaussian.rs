//! Two-mode Gaussian states described by their covariance matrix.
//!
//! Quadratures are ordered `(x_at, p_at, x_ph, p_ph)` and normalized so that
//! the joint vacuum (coherent) state has covariance equal to the identity.
//! A single quadrature variance relative to the coherent level is therefore
//! the diagonal entry itself.
//!
//! Displacements are not tracked: every state produced by the interface has
//! zero mean, and homodyne conditioning of a Gaussian state leaves a
//! covariance that does not depend on the measurement outcome.

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};

/// Tolerance on symmetric entries, relative to the largest entry magnitude.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Absolute tolerance on symplectic eigenvalues for physicality.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Variances at or below this value are treated as zero when conditioning.
pub const PSEUDO_INVERSE_TOL: f64 = 1e-12;

/// One of the two bosonic modes of the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeIndex {
    Atoms,
    Light,
}

impl ModeIndex {
    fn offset(self) -> usize {
        match self {
            ModeIndex::Atoms => 0,
            ModeIndex::Light => 2,
        }
    }

    /// The other mode.
    pub fn partner(self) -> Self {
        match self {
            ModeIndex::Atoms => ModeIndex::Light,
            ModeIndex::Light => ModeIndex::Atoms,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadratureIndex {
    X,
    P,
}

impl QuadratureIndex {
    fn offset(self) -> usize {
        match self {
            QuadratureIndex::X => 0,
            QuadratureIndex::P => 1,
        }
    }
}

/// Row/column of a quadrature in the 4×4 covariance matrix.
pub fn quadrature_row(mode: ModeIndex, quad: QuadratureIndex) -> usize {
    mode.offset() + quad.offset()
}

/// Covariance matrix of the joint atom + light state.
///
/// The matrix is kept exactly symmetric: every constructor and every map in
/// this crate symmetrizes its result as `(γ + γᵀ)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    /// Joint coherent (vacuum) state.
    pub fn vacuum() -> Self {
        CovarianceMatrix(Matrix4::identity())
    }

    pub fn from_diagonal(diag: [f64; 4]) -> Self {
        CovarianceMatrix(Matrix4::from_diagonal(&diag.into()))
    }

    /// Wraps a matrix after checking that it is finite and symmetric.
    ///
    /// Physicality is not checked here; see [`CovarianceMatrix::is_physical`].
    pub fn from_matrix(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite covariance entry".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidState(format!(
                "covariance matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: Matrix4<f64>) -> Self {
        CovarianceMatrix((m + m.transpose()) * 0.5)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    /// Variance of one quadrature relative to the coherent level.
    pub fn variance(&self, mode: ModeIndex, quad: QuadratureIndex) -> f64 {
        let i = quadrature_row(mode, quad);
        self.0[(i, i)]
    }

    /// The 2×2 local block of one mode.
    pub fn local_block(&self, mode: ModeIndex) -> Matrix2<f64> {
        let o = mode.offset();
        self.0.fixed_view::<2, 2>(o, o).into_owned()
    }

    /// Correlation block between atoms (rows) and light (columns).
    pub fn coupling_block(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Smallest symplectic eigenvalue.
    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        symplectic_eigenvalues(self).map(|(_, low)| low)
    }

    /// Whether every symplectic eigenvalue is at least `1 − PHYSICALITY_TOL`.
    pub fn is_physical(&self) -> bool {
        matches!(self.min_symplectic_eigenvalue(), Ok(nu) if nu >= 1.0 - PHYSICALITY_TOL)
    }
}

/// Covariance matrix of a single mode, `(x, p)` ordering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCovariance(Matrix2<f64>);

impl ModeCovariance {
    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn variance(&self, quad: QuadratureIndex) -> f64 {
        let i = quad.offset();
        self.0[(i, i)]
    }

    /// `√det`, the single symplectic eigenvalue of the mode.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        self.0.determinant().max(0.0).sqrt()
    }
}

/// The symplectic form `Ω = ⊕₂ [[0, 1], [−1, 0]]`.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut omega = Matrix4::zeros();
    omega[(0, 1)] = 1.0;
    omega[(1, 0)] = -1.0;
    omega[(2, 3)] = 1.0;
    omega[(3, 2)] = -1.0;
    omega
}

/// Returns `M γ Mᵀ`.
pub fn apply_linear_map(gamma: &CovarianceMatrix, m: &Matrix4<f64>) -> CovarianceMatrix {
    CovarianceMatrix::symmetrized(m * gamma.0 * m.transpose())
}

/// The two symplectic eigenvalues `(ν₁, ν₂)` with `ν₁ ≥ ν₂`.
///
/// With `γ = L Lᵀ` (Cholesky), `Ωγ` has the spectrum of the antisymmetric
/// matrix `Lᵀ Ω L`, whose singular values are `ν₁, ν₁, ν₂, ν₂`.
pub fn symplectic_eigenvalues(gamma: &CovarianceMatrix) -> Result<(f64, f64)> {
    let chol = gamma
        .0
        .cholesky()
        .ok_or_else(|| Error::InvalidState("covariance matrix is not positive definite".into()))?;
    let l = chol.l();
    let k = l.transpose() * symplectic_form() * l;
    let svd = k
        .try_svd(false, false, f64::EPSILON, 500)
        .ok_or_else(|| Error::numerical("symplectic eigenvalue solve did not converge"))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((0.5 * (s[0] + s[1]), 0.5 * (s[2] + s[3])))
}

/// Single-mode phase-space rotation acting on `(x, p)`:
/// `x → cos φ x + sin φ p`, `p → cos φ p − sin φ x`.
pub fn rotation(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Block-diagonal rotation `R(φ_at) ⊕ R(φ_ph)`.
pub fn local_rotation(phi_at: f64, phi_ph: f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation(phi_at));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation(phi_ph));
    m
}

pub fn rotate_quadratures(gamma: &CovarianceMatrix, phi_at: f64, phi_ph: f64) -> CovarianceMatrix {
    apply_linear_map(gamma, &local_rotation(phi_at, phi_ph))
}

/// Covariance of the unmeasured mode after homodyne detection of `quad` on
/// `mode`.
///
/// This is the Schur complement `A − C (π B π)⁺ Cᵀ`, where `B` is the block of
/// the measured mode, `A` the block of the kept mode, `C` their correlations
/// and `π` the projector onto the measured quadrature. The pseudoinverse of
/// the rank-one `π B π` is `1/B_qq` on the measured quadrature.
pub fn condition_on_quadrature(
    gamma: &CovarianceMatrix,
    mode: ModeIndex,
    quad: QuadratureIndex,
) -> Result<ModeCovariance> {
    let kept = mode.partner();
    let m = quadrature_row(mode, quad);
    let measured_var = gamma.0[(m, m)];
    if !(measured_var > PSEUDO_INVERSE_TOL) {
        return Err(Error::InvalidState(format!(
            "measured quadrature variance {measured_var:e} is not positive"
        )));
    }
    let k = kept.offset();
    let a = gamma.local_block(kept);
    let c = nalgebra::Vector2::new(gamma.0[(k, m)], gamma.0[(k + 1, m)]);
    let cond = a - c * c.transpose() / measured_var;
    Ok(ModeCovariance((cond + cond.transpose()) * 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn tms(r: f64) -> CovarianceMatrix {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        CovarianceMatrix::from_matrix(Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ))
        .unwrap()
    }

    fn s1() -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m[(0, 3)] = 1.0;
        m[(2, 1)] = 1.0;
        m
    }

    #[test]
    fn identity_map_of_vacuum() {
        let out = apply_linear_map(&CovarianceMatrix::vacuum(), &Matrix4::identity());
        assert_eq!(out, CovarianceMatrix::vacuum());
    }

    #[test]
    fn unit_coupling_congruence() {
        let out = apply_linear_map(&CovarianceMatrix::vacuum(), &s1());
        let expected = Matrix4::new(
            2.0, 0.0, 0.0, 1.0, //
            0.0, 1.0, 1.0, 0.0, //
            0.0, 1.0, 2.0, 0.0, //
            1.0, 0.0, 0.0, 1.0,
        );
        assert_eq!(*out.matrix(), expected);
    }

    #[test]
    fn symplectic_eigenvalues_examples() {
        let (a, b) = symplectic_eigenvalues(&CovarianceMatrix::vacuum()).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);

        let (a, b) =
            symplectic_eigenvalues(&CovarianceMatrix::from_diagonal([2.0, 2.0, 1.0, 1.0])).unwrap();
        assert!((a - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);

        for r in [0.1, 0.7, 1.5] {
            let (a, b) = symplectic_eigenvalues(&tms(r)).unwrap();
            assert!((a - 1.0).abs() < 1e-9, "r={r}: {a}");
            assert!((b - 1.0).abs() < 1e-9, "r={r}: {b}");
        }
    }

    #[test]
    fn symplectic_eigenvalues_reject_indefinite() {
        let g = CovarianceMatrix::from_diagonal([1.0, -1.0, 1.0, 1.0]);
        assert!(matches!(
            symplectic_eigenvalues(&g),
            Err(Error::InvalidState(_))
        ));
        assert!(!g.is_physical());
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut m = Matrix4::identity();
        m[(0, 1)] = 0.1;
        assert!(CovarianceMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn zero_rotation_is_identity() {
        let g = apply_linear_map(&CovarianceMatrix::vacuum(), &s1());
        assert_eq!(rotate_quadratures(&g, 0.0, 0.0), g);
        let v = rotate_quadratures(&CovarianceMatrix::vacuum(), 0.3, -1.2);
        assert!((v.matrix() - Matrix4::identity()).amax() < 1e-15);
    }

    #[test]
    fn quarter_turn_maps_x_to_p() {
        let g = CovarianceMatrix::from_diagonal([3.0, 0.5, 1.0, 1.0]);
        let r = rotate_quadratures(&g, FRAC_PI_2, 0.0);
        assert!((r.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((r.get(1, 1) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn conditioning_product_state() {
        let c = condition_on_quadrature(
            &CovarianceMatrix::vacuum(),
            ModeIndex::Light,
            QuadratureIndex::X,
        )
        .unwrap();
        assert_eq!(*c.matrix(), Matrix2::identity());
    }

    #[test]
    fn conditioning_after_unit_coupling() {
        let g = apply_linear_map(&CovarianceMatrix::vacuum(), &s1());
        let c = condition_on_quadrature(&g, ModeIndex::Light, QuadratureIndex::X).unwrap();
        let expected = Matrix2::new(2.0, 0.0, 0.0, 0.5);
        assert!((c.matrix() - expected).amax() < 1e-15);
        assert_eq!(c.variance(QuadratureIndex::P), 0.5);
    }

    #[test]
    fn conditioning_zero_variance_errors() {
        let g = CovarianceMatrix::from_diagonal([1.0, 1.0, 0.0, 1.0]);
        let err = condition_on_quadrature(&g, ModeIndex::Light, QuadratureIndex::X);
        assert!(matches!(err, Err(Error::InvalidState(_))));
    }
}
