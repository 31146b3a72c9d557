//! Gaussian entanglement of formation.
//!
//! The GEOF of a two-mode state `γ` is the smallest entanglement entropy of a
//! pure Gaussian state `γ_p ≤ γ`. Every pure two-mode state is a two-mode
//! squeezed state `TMS(r)` dressed with local symplectics `L`, and its
//! entropy grows with `r`. For fixed `L` the candidate `L TMS(r) Lᵀ` is
//! matrix-convex in `r`, so `g(r) = λ_min(γ − L TMS(r) Lᵀ)` is concave and the
//! feasible `r` form an interval. The smallest feasible `r` is found by a
//! golden-section search for the maximum of `g` followed by false position
//! for its left root; the simplex method then minimizes that `r` over `L`.
//!
//! Two parametrizations of `L` are available. The reduced one works in the
//! standard-form frame with one squeezer per mode aligned with the `x`/`p`
//! axes, so `γ − γ_p` splits into an `x` block and a `p` block and
//! feasibility is a pair of 2×2 eigenvalue checks. The full one uses
//! rotation–squeeze–rotation on each mode (six parameters plus `r`) and a
//! 4×4 eigenvalue check; it is slower and mainly serves as a cross-check.

use nalgebra::{Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::simplex::{nelder_mead, SimplexOptions, SimplexResult};

use super::{min_partial_transpose_eigenvalue, standard_form, StandardForm};

/// Objective value assigned to local operations with no feasible `r`.
const INFEASIBLE: f64 = 1e3;
const GOLDEN_ITERS: usize = 90;
const ROOT_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeofMethod {
    /// Closed form for symmetric states, reduced numerical search otherwise.
    Auto,
    /// Reduced numerical search regardless of symmetry.
    Reduced,
    /// Full local-symplectic numerical search.
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct GeofOptions {
    pub method: GeofMethod,
    /// Seed of the random restart sequence.
    pub seed: u64,
    /// Random restarts in addition to the seeded start.
    pub restarts: usize,
    /// Allowed negative slack on `γ − γ_p ⪰ 0`.
    pub feasibility_slack: f64,
}

impl Default for GeofOptions {
    fn default() -> Self {
        GeofOptions {
            method: GeofMethod::Auto,
            seed: 0x5eed,
            restarts: 8,
            feasibility_slack: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeofReport {
    /// GEOF in ebits.
    pub value: f64,
    /// Two-mode squeezing parameter of the optimal pure state.
    pub squeezing: f64,
    pub method: GeofMethod,
    pub evaluations: usize,
    /// Per-start sequences of the best simplex value (in `r`).
    pub traces: Vec<Vec<f64>>,
}

/// Entanglement entropy (ebits) of the pure state with EPR uncertainty `delta`:
/// `c₊ log₂ c₊ − c₋ log₂ c₋`, `c± = (δ^{-1/2} ± δ^{1/2})²/4`.
pub fn entropy_from_epr(delta: f64) -> f64 {
    if delta >= 1.0 {
        return 0.0;
    }
    let (lo, hi) = (delta.sqrt(), 1.0 / delta.sqrt());
    let c_plus = (hi + lo).powi(2) / 4.0;
    let c_minus = (hi - lo).powi(2) / 4.0;
    let term = |c: f64| if c > 0.0 { c * c.log2() } else { 0.0 };
    term(c_plus) - term(c_minus)
}

fn entropy_from_squeezing(r: f64) -> f64 {
    entropy_from_epr((-2.0 * r).exp())
}

/// Closed form for a symmetric standard form (`a = b`): the entropy at the
/// minimized EPR uncertainty `√((a − |c_x|)(a − |c_p|))`.
pub fn geof_symmetric(sf: &StandardForm) -> f64 {
    if sf.c_x * sf.c_p >= 0.0 {
        return 0.0;
    }
    let delta = ((sf.a - sf.c_x.abs()) * (sf.a - sf.c_p.abs()))
        .max(0.0)
        .sqrt();
    entropy_from_epr(delta)
}

pub fn geof(gamma: &CovarianceMatrix) -> Result<f64> {
    geof_with(gamma, &GeofOptions::default()).map(|r| r.value)
}

pub fn geof_with(gamma: &CovarianceMatrix, opts: &GeofOptions) -> Result<GeofReport> {
    let nu = gamma.min_symplectic_eigenvalue()?;
    if nu < 1.0 - 1e-9 {
        return Err(Error::InvalidState(format!(
            "symplectic eigenvalue {nu} below the uncertainty bound"
        )));
    }
    let sf = standard_form(gamma)?;
    // Two-mode Gaussian states are separable iff their partial transpose is
    // physical.
    let nu_pt = min_partial_transpose_eigenvalue(gamma)?;
    if nu_pt >= 1.0 || sf.c_x * sf.c_p >= 0.0 {
        return Ok(GeofReport {
            value: 0.0,
            squeezing: 0.0,
            method: opts.method,
            evaluations: 0,
            traces: Vec::new(),
        });
    }
    match opts.method {
        GeofMethod::Auto if sf.is_symmetric() => {
            let value = geof_symmetric(&sf);
            let delta = ((sf.a - sf.c_x) * (sf.a + sf.c_p)).sqrt();
            Ok(GeofReport {
                value,
                squeezing: -0.5 * delta.ln(),
                method: GeofMethod::Auto,
                evaluations: 0,
                traces: Vec::new(),
            })
        }
        GeofMethod::Auto | GeofMethod::Reduced => minimize(&sf, opts, GeofMethod::Reduced),
        GeofMethod::Full => minimize(&sf, opts, GeofMethod::Full),
    }
}

/// Smallest `r ≥ 0` with `g(r) ≥ −slack` for concave `g`, or `Err(max g)`.
fn smallest_feasible(
    g: impl Fn(f64) -> f64,
    r_hi: f64,
    slack: f64,
) -> std::result::Result<f64, f64> {
    if g(0.0) >= -slack {
        return Ok(0.0);
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0, r_hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..GOLDEN_ITERS {
        if g2 >= -slack || g1 >= -slack {
            break;
        }
        if g1 > g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = g(x2);
        }
    }
    let (peak, g_peak) = if g1 >= g2 { (x1, g1) } else { (x2, g2) };
    if g_peak < -slack {
        return Err(g_peak);
    }
    // Illinois false position on the sign change of g + slack in [0, peak].
    let h = |r: f64| g(r) + slack;
    let (mut a, mut fa) = (0.0, h(0.0));
    let (mut b, mut fb) = (peak, h(peak));
    let mut side = 0i8;
    for _ in 0..ROOT_ITERS {
        if b - a <= 1e-14 * (1.0 + b) {
            break;
        }
        let mut mid = b - fb * (b - a) / (fb - fa);
        if !(mid > a && mid < b) {
            mid = 0.5 * (a + b);
        }
        let fm = h(mid);
        if fm >= 0.0 {
            b = mid;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = mid;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    let feasible = b;
    Ok(feasible)
}

fn lambda_min_2x2(p: f64, q: f64, s: f64) -> f64 {
    0.5 * (p + s) - (0.25 * (p - s).powi(2) + q * q).sqrt()
}

/// Reduced search variables: local squeezings `(u, v)`.
fn reduced_objective(sf: &StandardForm, x: &[f64], slack: f64) -> f64 {
    let (u, v) = (x[0], x[1]);
    if !(u.abs() < 20.0 && v.abs() < 20.0) {
        return INFEASIBLE * 10.0;
    }
    let StandardForm { a, b, c_x, c_p } = *sf;
    let (e2u, e2v, euv) = ((2.0 * u).exp(), (2.0 * v).exp(), (u + v).exp());
    let g = |r: f64| {
        let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let x_block = lambda_min_2x2(a - e2u * ch, c_x - euv * sh, b - e2v * ch);
        let p_block = lambda_min_2x2(a - ch / e2u, c_p + sh / euv, b - ch / e2v);
        x_block.min(p_block)
    };
    let r_hi = 0.5 * (a + b).ln() + u.abs() + v.abs() + 0.5;
    match smallest_feasible(g, r_hi, slack) {
        Ok(r) => r,
        Err(g_peak) => INFEASIBLE - g_peak.max(-INFEASIBLE),
    }
}

fn local_symplectic(theta: f64, squeeze: f64, phi: f64) -> Matrix2<f64> {
    let rot = |t: f64| {
        let (s, c) = t.sin_cos();
        Matrix2::new(c, s, -s, c)
    };
    rot(theta) * Matrix2::new(squeeze.exp(), 0.0, 0.0, (-squeeze).exp()) * rot(phi)
}

fn tms(r: f64) -> Matrix4<f64> {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

/// Full search variables: `(θ_a, u_a, φ_a, θ_b, u_b, φ_b)`.
fn full_objective(sf: &StandardForm, x: &[f64], slack: f64) -> f64 {
    if x.iter().any(|v| !(v.abs() < 40.0)) || x[1].abs() > 20.0 || x[4].abs() > 20.0 {
        return INFEASIBLE * 10.0;
    }
    let mut l = Matrix4::zeros();
    l.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&local_symplectic(x[0], x[1], x[2]));
    l.fixed_view_mut::<2, 2>(2, 2)
        .copy_from(&local_symplectic(x[3], x[4], x[5]));
    let gamma = *sf.covariance().matrix();
    let g = |r: f64| {
        let diff = gamma - l * tms(r) * l.transpose();
        let diff = (diff + diff.transpose()) * 0.5;
        diff.symmetric_eigenvalues().min()
    };
    let r_hi = 0.5 * (sf.a + sf.b).ln() + x[1].abs() + x[4].abs() + 0.5;
    match smallest_feasible(g, r_hi, slack) {
        Ok(r) => r,
        Err(g_peak) => INFEASIBLE - g_peak.max(-INFEASIBLE),
    }
}

/// Local squeezing of the optimal pure state for the symmetrized state,
/// used as the seeded start.
fn symmetric_seed(sf: &StandardForm) -> f64 {
    let a = 0.5 * (sf.a + sf.b);
    let (dx, dp) = (a - sf.c_x.abs(), a - sf.c_p.abs());
    if dx > 0.0 && dp > 0.0 {
        0.25 * (dx / dp).ln()
    } else {
        0.0
    }
}

fn minimize(sf: &StandardForm, opts: &GeofOptions, method: GeofMethod) -> Result<GeofReport> {
    let slack = opts.feasibility_slack;
    let w = symmetric_seed(sf);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(opts.restarts + 1);
    match method {
        GeofMethod::Full => {
            starts.push(vec![0.0, w, 0.0, 0.0, w, 0.0]);
            for _ in 0..opts.restarts {
                starts.push(
                    (0..6)
                        .map(|i| {
                            if i % 3 == 1 {
                                w + rng.random_range(-1.0..1.0)
                            } else {
                                rng.random_range(-0.5..0.5)
                            }
                        })
                        .collect(),
                );
            }
        }
        _ => {
            starts.push(vec![w, w]);
            for _ in 0..opts.restarts {
                starts.push(vec![
                    w + rng.random_range(-1.5..1.5),
                    w + rng.random_range(-1.5..1.5),
                ]);
            }
        }
    }

    let simplex_opts = SimplexOptions {
        initial_step: 0.3,
        f_tol: 1e-13,
        x_tol: 1e-9,
        max_iter: if method == GeofMethod::Full {
            20_000
        } else {
            4_000
        },
    };
    let mut evaluations = 0;
    let mut traces = Vec::with_capacity(starts.len());
    let mut best: Option<SimplexResult> = None;
    let mut any_converged = false;
    for start in &starts {
        let res = match method {
            GeofMethod::Full => nelder_mead(|x| full_objective(sf, x, slack), start, &simplex_opts),
            _ => nelder_mead(|x| reduced_objective(sf, x, slack), start, &simplex_opts),
        };
        evaluations += res.evaluations;
        any_converged |= res.converged;
        traces.push(res.trace.clone());
        if best.as_ref().is_none_or(|b| res.value < b.value) {
            best = Some(res);
        }
    }
    let best = best.expect("at least one start");
    if best.value >= INFEASIBLE {
        return Err(Error::numerical("no feasible pure state found for GEOF"));
    }
    let value = entropy_from_squeezing(best.value);
    if !any_converged {
        return Err(Error::NumericalFailure {
            message: "GEOF minimizer did not converge from any start".into(),
            best_bound: Some(value),
        });
    }
    Ok(GeofReport {
        value,
        squeezing: best.value,
        method,
        evaluations,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_protocol, PassParams, Scheme};

    fn sym(a: f64, cx: f64, cp: f64) -> StandardForm {
        StandardForm {
            a,
            b: a,
            c_x: cx,
            c_p: cp,
        }
    }

    #[test]
    fn vacuum_is_separable() {
        assert_eq!(geof(&CovarianceMatrix::vacuum()).unwrap(), 0.0);
    }

    #[test]
    fn pure_tms_equals_its_entropy() {
        for r in [0.1f64, 0.6, 1.3] {
            let sf = sym((2.0 * r).cosh(), (2.0 * r).sinh(), -(2.0 * r).sinh());
            let g = geof(&sf.covariance()).unwrap();
            let c2 = r.cosh().powi(2);
            let s2 = r.sinh().powi(2);
            let expected = c2 * c2.log2() - s2 * s2.log2();
            assert!((g - expected).abs() < 1e-10, "r={r}: {g} vs {expected}");
        }
    }

    #[test]
    fn reduced_search_matches_closed_form() {
        for sf in [
            sym(2.0, 1.5, -1.2),
            sym(1.5, 0.9, -0.3),
            sym(3.0, 2.7, -2.7),
        ] {
            let closed = geof_symmetric(&sf);
            let opts = GeofOptions {
                method: GeofMethod::Reduced,
                ..Default::default()
            };
            let num = geof_with(&sf.covariance(), &opts).unwrap();
            assert!(
                (num.value - closed).abs() < 1e-6,
                "{sf:?}: {} vs {closed}",
                num.value
            );
        }
    }

    #[test]
    fn full_search_agrees_with_reduced_on_asymmetric_states() {
        let params = PassParams::new(0.5, 0.05, 0.0, 0.02).unwrap();
        for scheme in [Scheme::Unswitched, Scheme::Switched] {
            let s = run_protocol(4, &params, scheme, None).unwrap();
            let reduced = geof_with(&s.gamma, &GeofOptions::default()).unwrap();
            let full = geof_with(
                &s.gamma,
                &GeofOptions {
                    method: GeofMethod::Full,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(reduced.value > 0.0);
            assert!(
                (full.value - reduced.value).abs() < 1e-4,
                "{scheme:?}: full {} reduced {}",
                full.value,
                reduced.value
            );
        }
    }

    #[test]
    fn simplex_traces_never_increase() {
        let s = run_protocol(
            5,
            &PassParams::new(0.4, 0.02, 0.0, 0.02).unwrap(),
            Scheme::Switched,
            None,
        )
        .unwrap();
        let report = geof_with(&s.gamma, &GeofOptions::default()).unwrap();
        assert!(!report.traces.is_empty());
        for t in &report.traces {
            assert!(t.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn entropy_limits() {
        assert_eq!(entropy_from_epr(1.0), 0.0);
        assert_eq!(entropy_from_epr(2.0), 0.0);
        assert!(entropy_from_epr(0.5) > 0.0);
        assert!(entropy_from_epr(0.1) > entropy_from_epr(0.5));
    }
}
