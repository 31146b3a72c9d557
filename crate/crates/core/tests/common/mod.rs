#![allow(dead_code)]

use interface_sim::gaussian::{local_rotation, CovarianceMatrix};
use nalgebra::Matrix4;
use proptest::prelude::*;

/// Parameters of a random two-mode Gaussian state: local
/// rotation–squeeze–rotation on each mode around a beam splitter and a
/// two-mode squeezer, applied to a thermal state.
#[derive(Clone, Debug)]
pub struct StateParams {
    pub local_in: [f64; 6],
    pub two_mode: f64,
    pub splitter: f64,
    pub local_out: [f64; 6],
    pub thermal: [f64; 4],
}

fn local(p: &[f64; 6]) -> Matrix4<f64> {
    let squeeze =
        Matrix4::from_diagonal(&[p[1].exp(), (-p[1]).exp(), p[4].exp(), (-p[4]).exp()].into());
    local_rotation(p[0], p[3]) * squeeze * local_rotation(p[2], p[5])
}

fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

fn beam_splitter(t: f64) -> Matrix4<f64> {
    let (s, c) = t.sin_cos();
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, s, //
        -s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

impl StateParams {
    /// The symplectic matrix `M` of the state `M (1 + N) Mᵀ`.
    pub fn symplectic(&self) -> Matrix4<f64> {
        local(&self.local_out)
            * beam_splitter(self.splitter)
            * two_mode_squeezer(self.two_mode)
            * local(&self.local_in)
    }

    pub fn state(&self) -> CovarianceMatrix {
        let m = self.symplectic();
        let t = &self.thermal;
        let thermal =
            Matrix4::from_diagonal(&[1.0 + t[0], 1.0 + t[0], 1.0 + t[1], 1.0 + t[1]].into())
                + Matrix4::from_diagonal(&[t[2], 0.0, t[3], 0.0].into());
        CovarianceMatrix::from_matrix(m * thermal * m.transpose()).expect("finite symmetric matrix")
    }

    /// The pure state `M Mᵀ ≤ γ`.
    pub fn pure_part(&self) -> CovarianceMatrix {
        let m = self.symplectic();
        CovarianceMatrix::from_matrix(m * m.transpose()).expect("finite symmetric matrix")
    }
}

fn angles() -> impl Strategy<Value = [f64; 6]> {
    (
        -3.2..3.2f64,
        -0.8..0.8f64,
        -3.2..3.2f64,
        -3.2..3.2f64,
        -0.8..0.8f64,
        -3.2..3.2f64,
    )
        .prop_map(|(a, b, c, d, e, f)| [a, b, c, d, e, f])
}

pub fn state_params() -> impl Strategy<Value = StateParams> {
    (
        angles(),
        0.0..1.2f64,
        -1.6..1.6f64,
        angles(),
        prop::array::uniform4(0.0..0.8f64),
    )
        .prop_map(
            |(local_in, two_mode, splitter, local_out, thermal)| StateParams {
                local_in,
                two_mode,
                splitter,
                local_out,
                thermal,
            },
        )
}

/// Entanglement entropy (ebits) of a pure two-mode state with local
/// symplectic eigenvalue `nu`.
pub fn pure_state_entropy(nu: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    term((nu + 1.0) / 2.0) - term((nu - 1.0) / 2.0)
}
