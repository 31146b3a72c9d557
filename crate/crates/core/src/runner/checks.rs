//! Battery of analytic checks with a deterministic text report.

use std::fmt::Write as _;

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    disentangled_p_variance, optimal_disentangle_kappa, run_protocol_observed, scattering_matrix,
    single_pass_with_noise, switching_angles, NoiseModel, Orientation, PassParams, ProtocolState,
    Scheme,
};
use crate::gaussian::{
    apply_linear_map, condition_on_quadrature, rotate_quadratures, CovarianceMatrix, ModeIndex,
    QuadratureIndex,
};
use crate::measures::{
    epr_variance, geof_symmetric, geof_with, standard_form, GeofMethod, GeofOptions,
};
use crate::optimize::{
    crude_single_pass, golden_section, optimize_disentangle_kappa, DisentangleModel,
};
use crate::physical::{derive_model_params, photons_for_target_eta, ExperimentalSetup};

const SEED: u64 = 20_040_601;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn failed(&self) -> bool {
        self.outcomes.iter().any(|o| !o.passed)
    }

    pub fn outcome(&self, name: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let tag = if o.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{tag} {:<28} {}", o.name, o.detail).expect("writing to a String");
        }
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        writeln!(out, "{passed}/{} checks passed", self.outcomes.len())
            .expect("writing to a String");
        out
    }
}

type Check = fn(&NoiseModel) -> crate::Result<(bool, String)>;

const CHECKS: [(&str, Check); 13] = [
    ("group-property", group_property),
    ("lossless-collapse", lossless_collapse),
    ("epr-floor", epr_floor),
    ("qnd-benchmark", qnd_benchmark),
    ("disentangling-law", disentangling_law),
    ("crude-model", crude_model),
    ("coupling-decay", coupling_decay),
    ("full-decay-pass", full_decay_pass),
    ("single-pass-conditioning", single_pass_conditioning),
    ("switch-equivalence", switch_equivalence),
    ("physicality", physicality),
    ("rb-example", rb_example),
    ("geof-symmetric", geof_symmetric_states),
];

pub fn run_checks() -> CheckReport {
    run_checks_with(&NoiseModel::default())
}

/// Runs the battery with a substitute noise model; anything other than the
/// default is expected to break the noise-dependent checks.
pub fn run_checks_with(noise: &NoiseModel) -> CheckReport {
    let outcomes = CHECKS
        .iter()
        .map(|&(name, check)| match check(noise) {
            Ok((passed, detail)) => CheckOutcome {
                name,
                passed,
                detail,
            },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect();
    CheckReport { outcomes }
}

fn run(
    n: usize,
    params: &PassParams,
    scheme: Scheme,
    noise: &NoiseModel,
    observe: impl FnMut(&ProtocolState),
) -> crate::Result<ProtocolState> {
    run_protocol_observed(n, params, scheme, None, noise, observe)
}

fn group_property(_: &NoiseModel) -> crate::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let diff = scattering_matrix(a) * scattering_matrix(b) - scattering_matrix(a + b);
        worst = worst.max(diff.amax());
    }
    Ok((
        worst == 0.0,
        format!("max deviation {worst:e} over 100 pairs"),
    ))
}

fn lossless_collapse(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 1..=20 {
        for k in [0.05, 0.2, 1.0] {
            let s = run(
                n,
                &PassParams::lossless(k)?,
                Scheme::Unswitched,
                noise,
                |_| {},
            )?;
            let single = apply_linear_map(
                &CovarianceMatrix::vacuum(),
                &scattering_matrix(n as f64 * k),
            );
            worst = worst.max((s.gamma.matrix() - single.matrix()).amax());
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
}

/// Lossless `[1 + (1 − nκ)²]/2 ≥ 1/2`, and the single lossy pass
/// `1 + η/2 + (2 − η − ζ)κ²/4 − κ√((1 − η)(1 − ζ))` whose minimum over `κ`
/// is still above 1/2.
fn epr_floor(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut lowest = f64::INFINITY;
    let mut equality = 0.0f64;
    for n in 1..=20 {
        let nf = n as f64;
        for k in [0.05, 0.2, 1.0, 1.0 / nf] {
            let s = run(
                n,
                &PassParams::lossless(k)?,
                Scheme::Unswitched,
                noise,
                |_| {},
            )?;
            let e = epr_variance(&s.gamma);
            worst = worst.max((e - 0.5 * (1.0 + (1.0 - nf * k).powi(2))).abs());
            lowest = lowest.min(e);
        }
        let at_one = run(
            n,
            &PassParams::lossless(1.0 / nf)?,
            Scheme::Unswitched,
            noise,
            |_| {},
        )?;
        equality = equality.max((epr_variance(&at_one.gamma) - 0.5).abs());
    }
    for eta in [0.01f64, 0.1, 0.3] {
        for zeta in [0.0, 0.02, 0.2] {
            let t = ((1.0 - eta) * (1.0 - zeta)).sqrt();
            for k in [0.3, 0.9, 2.0 * t / (2.0 - eta - zeta)] {
                let g = single_pass_with_noise(
                    &CovarianceMatrix::vacuum(),
                    k,
                    eta,
                    zeta,
                    Orientation::Plain,
                    noise,
                )?;
                let e = epr_variance(&g);
                let expected = 1.0 + 0.5 * eta + 0.25 * (2.0 - eta - zeta) * k * k - t * k;
                worst = worst.max((e - expected).abs());
                lowest = lowest.min(e);
            }
        }
    }
    let ok = worst <= 1e-12 && lowest >= 0.5 - 1e-12 && equality <= 1e-12;
    Ok((
        ok,
        format!(
            "max formula deviation {worst:.3e}, lowest {lowest:.12}, equality gap {equality:.3e}"
        ),
    ))
}

fn qnd_benchmark(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 1..=50 {
        let k0 = optimal_disentangle_kappa(n);
        let s = run(
            n,
            &PassParams::lossless(k0)?,
            Scheme::Unswitched,
            noise,
            |_| {},
        )?;
        let p = condition_on_quadrature(&s.gamma, ModeIndex::Light, QuadratureIndex::X)?
            .variance(QuadratureIndex::P);
        worst = worst.max((p - 1.0 / (n as f64 + 0.5)).abs());
    }
    Ok((
        worst <= 1e-9,
        format!("max deviation {worst:.3e}, n = 1..50"),
    ))
}

fn disentangling_law(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let (mut formula, mut kappa_err, mut min_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut light_ok = true;
    for n in 1..=50 {
        let k0 = optimal_disentangle_kappa(n);
        for i in 0..=20 {
            let k = 0.1 * k0 * i as f64;
            let s = run_protocol_observed(
                n,
                &PassParams::lossless(k)?,
                Scheme::UnswitchedThenDisentangle,
                Some(k),
                noise,
                |_| {},
            )?;
            let v = s.gamma.variance(ModeIndex::Atoms, QuadratureIndex::P);
            formula = formula.max((v - disentangled_p_variance(n, k)).abs());
        }
        let res = optimize_disentangle_kappa(
            n,
            DisentangleModel::Lossless,
            Scheme::UnswitchedThenDisentangle,
            ModeIndex::Atoms,
        )?;
        let nf = n as f64;
        kappa_err = kappa_err.max((res.kappa_star - optimal_disentangle_kappa(n)).abs());
        min_err = min_err.max((res.value - (1.0 / nf - 0.25 / (nf * nf))).abs());
        let s = run_protocol_observed(
            n,
            &PassParams::lossless(k0)?,
            Scheme::UnswitchedThenDisentangle,
            Some(k0),
            noise,
            |_| {},
        )?;
        light_ok &= s.gamma.variance(ModeIndex::Light, QuadratureIndex::P) < 1.0;
    }
    let ok = formula <= 1e-12 && kappa_err <= 1e-6 && min_err <= 1e-9 && light_ok;
    Ok((
        ok,
        format!(
            "formula {formula:.3e}, optimum coupling {kappa_err:.3e}, minimum {min_err:.3e}, light squeezed: {light_ok}"
        ),
    ))
}

fn crude_model(_: &NoiseModel) -> crate::Result<(bool, String)> {
    let m = crude_single_pass(25.0)?;
    let (eta0, dmin) = m.optimum();
    let analytic =
        (eta0 - 0.5f64.sqrt() / 5.0).abs() < 1e-15 && (dmin - 0.4 * 2f64.sqrt()).abs() < 1e-15;
    let (x, fx) = golden_section(|e| Ok::<_, ()>(m.delta_leading(e)), 1e-6, 0.5, 1e-12)
        .expect("infallible objective");
    let ok = analytic && (x - eta0).abs() < 1e-8 && (fx - dmin).abs() < 1e-8;
    Ok((
        ok,
        format!("eta0 {eta0:.9}, minimum {dmin:.9}, golden section at {x:.9}"),
    ))
}

fn coupling_decay(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let p = PassParams::new(1.0, 0.1, 0.01, 0.0)?;
    let first = run(1, &p, Scheme::Unswitched, noise, |_| {})?;
    let k2 = first.coupling(p.kappa());
    Ok((
        (k2 - 0.94393).abs() < 1e-5,
        format!("second-pass coupling {k2:.6}"),
    ))
}

/// A pass with complete decay leaves only the decay noise: `diag(2, 2, 1, 1)`.
fn full_decay_pass(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let start = run(
        3,
        &PassParams::new(0.7, 0.1, 0.0, 0.05)?,
        Scheme::Switched,
        noise,
        |_| {},
    )?;
    let g = single_pass_with_noise(&start.gamma, 0.7, 1.0, 1.0, Orientation::Plain, noise)?;
    let dev = (g.matrix() - Matrix4::from_diagonal(&[2.0, 2.0, 1.0, 1.0].into())).amax();
    Ok((
        dev <= 1e-15,
        format!("deviation from diag(2, 2, 1, 1) {dev:.3e}"),
    ))
}

/// One lossy pass from vacuum and homodyne detection of light x:
/// `1 + η − (1 − η)(1 − ζ)κ² / (1 + (1 − ζ)κ²)`.
fn single_pass_conditioning(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for eta in [0.0, 0.05, 0.2] {
        for zeta in [0.0, 0.02, 0.3] {
            for k in [0.2, 1.0, 3.0] {
                let g = single_pass_with_noise(
                    &CovarianceMatrix::vacuum(),
                    k,
                    eta,
                    zeta,
                    Orientation::Plain,
                    noise,
                )?;
                let p = condition_on_quadrature(&g, ModeIndex::Light, QuadratureIndex::X)?
                    .variance(QuadratureIndex::P);
                let lk = (1.0 - zeta) * k * k;
                let expected = 1.0 + eta - (1.0 - eta) * lk / (1.0 + lk);
                worst = worst.max((p - expected).abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
}

fn switch_equivalence(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let (a, b) = switching_angles();
    let p = PassParams::new(0.6, 0.04, 0.01, 0.02)?;
    let mut manual = ProtocolState::initial();
    let mut worst = 0.0f64;
    let mut step = 0;
    run(6, &p, Scheme::Switched, noise, |s| {
        step += 1;
        let k = manual.coupling(p.kappa());
        let pass = |g: &CovarianceMatrix| {
            single_pass_with_noise(g, k, p.eta(), p.zeta(), Orientation::Plain, noise)
                .expect("valid parameters")
        };
        let gamma = if step % 2 == 0 {
            rotate_quadratures(&pass(&rotate_quadratures(&manual.gamma, -a, -b)), a, b)
        } else {
            pass(&manual.gamma)
        };
        manual = ProtocolState {
            gamma,
            pass_count: step,
            jx_factor: manual.jx_factor * (1.0 - p.eta()),
            sx_factor: manual.sx_factor * (1.0 - p.zeta()),
        };
        worst = worst.max((s.gamma.matrix() - manual.gamma.matrix()).amax());
    })?;
    Ok((
        worst <= 1e-12,
        format!("angles ({a:.6}, {b:.6}), max deviation {worst:.3e}"),
    ))
}

fn physicality(noise: &NoiseModel) -> crate::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut lowest = f64::INFINITY;
    let mut failure = None;
    for _ in 0..200 {
        let scheme = if rng.random_bool(0.5) {
            Scheme::Switched
        } else {
            Scheme::Unswitched
        };
        let p = PassParams::new(
            rng.random_range(0.0..1.5),
            rng.random_range(0.0..0.3),
            0.0,
            rng.random_range(0.0..0.3),
        )?;
        let n = rng.random_range(1..=30);
        run(n, &p, scheme, noise, |s| {
            match s.gamma.min_symplectic_eigenvalue() {
                Ok(nu) => lowest = lowest.min(nu),
                Err(e) => failure = Some(e.to_string()),
            }
        })?;
    }
    if let Some(e) = failure {
        return Ok((false, e));
    }
    Ok((
        lowest >= 1.0 - 1e-9,
        format!("lowest symplectic eigenvalue {lowest:.12}"),
    ))
}

fn rb_example(_: &NoiseModel) -> crate::Result<(bool, String)> {
    let setup = ExperimentalSetup::rb87_example();
    let params = derive_model_params(&setup)?;
    let lo = photons_for_target_eta(&setup, 0.01)?;
    let hi = photons_for_target_eta(&setup, 0.1)?;
    let identity = params.eta_over_epsilon == setup.n_photons / setup.n_atoms
        || ((params.eta_over_epsilon * setup.n_atoms / setup.n_photons) - 1.0).abs() < 1e-12;
    let ok = (24.0..=27.0).contains(&params.alpha0)
        && identity
        && (1e7..=1e8).contains(&(lo as f64))
        && (1e7..=1e8).contains(&(hi as f64));
    Ok((
        ok,
        format!("optical depth {:.4}, photons {lo:e}..{hi:e}", params.alpha0),
    ))
}

fn geof_symmetric_states(_: &NoiseModel) -> crate::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let opts = GeofOptions {
        method: GeofMethod::Reduced,
        ..GeofOptions::default()
    };
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let r: f64 = rng.random_range(0.1..1.2);
        let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let mut m = Matrix4::identity() * (ch + rng.random_range(0.0..0.5));
        m[(0, 2)] = sh;
        m[(2, 0)] = sh;
        m[(1, 3)] = -sh;
        m[(3, 1)] = -sh;
        // Correlated x noise on both modes keeps the state mode-symmetric.
        let y = rng.random_range(0.0..0.5);
        for (i, j) in [(0, 0), (2, 2), (0, 2), (2, 0)] {
            m[(i, j)] += y;
        }
        let sf = standard_form(&CovarianceMatrix::from_matrix(m)?)?;
        let num = geof_with(&sf.covariance(), &opts)?.value;
        worst = worst.max((num - geof_symmetric(&sf)).abs());
    }
    Ok((worst <= 1e-4, format!("max deviation {worst:.3e} ebits")))
}
