//! Scalar protocol optimizations: the best depumping probability per pass
//! count, the best coupling for the decoupling pass, and the crude single-pass
//! squeezing model.

use std::collections::HashMap;

use crate::dynamics::{lab_frame, run_protocol, PassParams, ProtocolState, Scheme};
use crate::error::{Error, Result};
use crate::gaussian::{condition_on_quadrature, CovarianceMatrix, ModeIndex, QuadratureIndex};
use crate::measures::{epr_variance, geof_with, GeofOptions};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Lower end of the η search bracket.
pub const ETA_MIN: f64 = 1e-6;
/// Upper end of the η search bracket; larger η leaves the small-decay regime.
pub const ETA_MAX: f64 = 0.5;
/// Golden-section stopping width in η.
pub const ETA_TOL: f64 = 1e-7;
/// Coarse grid size used to cross-check the golden-section result.
pub const GRID_POINTS: usize = 64;
/// Search bracket for a free coupling.
pub const KAPPA_MAX: f64 = 2.0;

/// Golden-section minimization of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`. Returns `(x_min, f_min)`.
pub fn golden_section<E>(
    mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> std::result::Result<(f64, f64), E> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iters = 0;
    while hi - lo > tol && iters < 500 {
        iters += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// The crude single-pass squeezing estimate `Δ(η) = 1/(1 + α₀η) + 2η`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrudeModel {
    pub alpha0: f64,
}

impl CrudeModel {
    pub fn delta(&self, eta: f64) -> f64 {
        1.0 / (1.0 + self.alpha0 * eta) + 2.0 * eta
    }

    /// Large-coupling form `1/(α₀η) + 2η` (valid for `α₀η ≫ 1`).
    pub fn delta_leading(&self, eta: f64) -> f64 {
        1.0 / (self.alpha0 * eta) + 2.0 * eta
    }

    /// Stationary point `(η₀, Δ_min) = (1/√(2α₀), 2√(2/α₀))`; exact for
    /// [`CrudeModel::delta_leading`].
    pub fn optimum(&self) -> (f64, f64) {
        (
            1.0 / (2.0 * self.alpha0).sqrt(),
            2.0 * (2.0 / self.alpha0).sqrt(),
        )
    }

    /// Exact minimizer of [`CrudeModel::delta`] on `η ≥ 0`:
    /// `((√(α₀/2) − 1)/α₀, 2√(2/α₀) − 2/α₀)` when `α₀ > 2`.
    pub fn exact_optimum(&self) -> (f64, f64) {
        let root = (self.alpha0 / 2.0).sqrt();
        if root <= 1.0 {
            return (0.0, 1.0);
        }
        ((root - 1.0) / self.alpha0, 2.0 / root - 2.0 / self.alpha0)
    }
}

pub fn crude_single_pass(alpha0: f64) -> Result<CrudeModel> {
    if !(alpha0.is_finite() && alpha0 > 0.0) {
        return Err(Error::parameter("alpha0", format!("{alpha0} must be > 0")));
    }
    Ok(CrudeModel { alpha0 })
}

/// Quantity targeted by an optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    MaximizeGeof,
    MinimizeEpr,
    /// Atomic p-variance: after homodyne detection of light x (laboratory
    /// frame) for the plain schemes, unconditional after a decoupling pass.
    MinimizeAtomicP,
    /// Unconditional light p-variance, the light quadrature squeezed by the
    /// decoupling pass.
    MinimizeLightP,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MaximizeGeof => "geof",
            Objective::MinimizeEpr => "epr",
            Objective::MinimizeAtomicP => "atomic-p",
            Objective::MinimizeLightP => "light-p",
        }
    }

    /// Natural value of the metric for a final protocol state.
    pub fn metric(self, scheme: Scheme, state: &ProtocolState, geof: &GeofOptions) -> Result<f64> {
        match self {
            Objective::MaximizeGeof => geof_with(&state.gamma, geof).map(|r| r.value),
            Objective::MinimizeEpr => Ok(epr_variance(&state.gamma)),
            Objective::MinimizeAtomicP => atomic_p_variance(scheme, state),
            Objective::MinimizeLightP => {
                Ok(state.gamma.variance(ModeIndex::Light, QuadratureIndex::P))
            }
        }
    }

    /// Value in minimization form.
    pub fn cost(self, value: f64) -> f64 {
        match self {
            Objective::MaximizeGeof => -value,
            _ => value,
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "geof" => Ok(Objective::MaximizeGeof),
            "epr" => Ok(Objective::MinimizeEpr),
            "atomic-p" => Ok(Objective::MinimizeAtomicP),
            "light-p" => Ok(Objective::MinimizeLightP),
            other => Err(format!(
                "unknown objective `{other}` (expected geof, epr, atomic-p or light-p)"
            )),
        }
    }
}

/// Atomic p-variance as defined for [`Objective::MinimizeAtomicP`].
pub fn atomic_p_variance(scheme: Scheme, state: &ProtocolState) -> Result<f64> {
    if scheme.disentangles() {
        Ok(state.gamma.variance(ModeIndex::Atoms, QuadratureIndex::P))
    } else {
        let lab = lab_frame(&state.gamma, scheme, state.pass_count);
        conditional_atomic_p(&lab)
    }
}

/// Atomic p-variance after homodyne detection of the light x-quadrature.
pub fn qnd_atomic_p(state: &ProtocolState) -> Result<f64> {
    conditional_atomic_p(&state.gamma)
}

fn conditional_atomic_p(gamma: &CovarianceMatrix) -> Result<f64> {
    condition_on_quadrature(gamma, ModeIndex::Light, QuadratureIndex::X)
        .map(|m| m.variance(QuadratureIndex::P))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizationResult {
    /// Optimal depumping probability (0 for lossless coupling searches).
    pub eta_star: f64,
    /// Per-pass coupling at the optimum, `√(α₀ η*)` for physical searches.
    pub kappa_star: f64,
    /// Nominal coupling of the decoupling pass, for the disentangle schemes.
    pub decoupler_kappa: Option<f64>,
    /// Metric value at the optimum, in natural form.
    pub value: f64,
    pub evaluations: usize,
    /// The optimum sits at an end of the search bracket.
    pub at_bracket_edge: bool,
}

/// Search settings shared by the optimizers.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub eta_min: f64,
    pub eta_max: f64,
    pub tol: f64,
    pub grid_points: usize,
    pub geof: GeofOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            eta_min: ETA_MIN,
            eta_max: ETA_MAX,
            tol: ETA_TOL,
            grid_points: GRID_POINTS,
            geof: GeofOptions::default(),
        }
    }
}

/// Memoized scalar objective keyed on the exact argument.
struct Cached<F> {
    f: F,
    cache: HashMap<u64, f64>,
}

impl<F: FnMut(f64) -> Result<f64>> Cached<F> {
    fn new(f: F) -> Self {
        Cached {
            f,
            cache: HashMap::new(),
        }
    }

    fn eval(&mut self, x: f64) -> Result<f64> {
        if let Some(&v) = self.cache.get(&x.to_bits()) {
            return Ok(v);
        }
        let v = (self.f)(x)?;
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.cache.insert(x.to_bits(), v);
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug)]
struct ScalarOptimum {
    x: f64,
    cost: f64,
    evaluations: usize,
    at_edge: bool,
}

/// Minimizes a cost over `[lo, hi]` by golden section (in log space when
/// `log_scale`), cross-checked against a coarse grid. If the grid beats the
/// golden-section result by more than 1e-6 the grid bracket is searched
/// again. The result is never worse than the best grid point; ties go to
/// the smaller argument.
fn bracketed_minimum(
    cost: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
    grid_points: usize,
    log_scale: bool,
) -> Result<ScalarOptimum> {
    let mut obj = Cached::new(cost);
    let (to_t, from_t): (fn(f64) -> f64, fn(f64) -> f64) = if log_scale {
        (f64::ln, f64::exp)
    } else {
        (|x| x, |t| t)
    };
    let golden_in = |obj: &mut Cached<_>, a: f64, b: f64| -> Result<(f64, f64)> {
        let (mut t_lo, mut t_hi) = (to_t(a), to_t(b));
        // Narrow in t until the bracket is narrower than `tol` in x.
        let mut best = (f64::NAN, f64::INFINITY);
        let mut t1 = t_hi - INV_PHI * (t_hi - t_lo);
        let mut t2 = t_lo + INV_PHI * (t_hi - t_lo);
        let mut f1 = obj.eval(from_t(t1))?;
        let mut f2 = obj.eval(from_t(t2))?;
        for _ in 0..500 {
            if from_t(t_hi) - from_t(t_lo) <= tol {
                break;
            }
            if f1 <= f2 {
                t_hi = t2;
                t2 = t1;
                f2 = f1;
                t1 = t_hi - INV_PHI * (t_hi - t_lo);
                f1 = obj.eval(from_t(t1))?;
            } else {
                t_lo = t1;
                t1 = t2;
                f1 = f2;
                t2 = t_lo + INV_PHI * (t_hi - t_lo);
                f2 = obj.eval(from_t(t2))?;
            }
        }
        for (t, f) in [(t1, f1), (t2, f2)] {
            if f < best.1 || (f == best.1 && from_t(t) < best.0) {
                best = (from_t(t), f);
            }
        }
        Ok(best)
    };

    let golden = golden_in(&mut obj, lo, hi)?;
    let n = grid_points.max(3);
    let (t_lo, t_hi) = (to_t(lo), to_t(hi));
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                from_t(t_lo + (t_hi - t_lo) * i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let mut grid_best = (0usize, f64::INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let v = obj.eval(x)?;
        if v < grid_best.1 {
            grid_best = (i, v);
        }
    }

    let mut best = golden;
    if grid_best.1 < golden.1 - 1e-6 {
        let i = grid_best.0;
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(n - 1)];
        let refined = golden_in(&mut obj, a, b)?;
        if refined.1 < best.1 {
            best = refined;
        }
    }
    let gx = grid[grid_best.0];
    if grid_best.1 < best.1 || (grid_best.1 == best.1 && gx < best.0) {
        best = (gx, grid_best.1);
    }

    let edge = 1e-3 * (t_hi - t_lo);
    let t_best = to_t(best.0);
    let at_edge = t_best - t_lo <= edge || t_hi - t_best <= edge;
    Ok(ScalarOptimum {
        x: best.0,
        cost: best.1,
        evaluations: obj.cache.len(),
        at_edge,
    })
}

/// Final state for a physical run with `κ = √(α₀η)` and `ζ = r`.
pub fn physical_run(
    n: usize,
    alpha0: f64,
    r: f64,
    eta: f64,
    scheme: Scheme,
    decoupler_kappa: Option<f64>,
) -> Result<ProtocolState> {
    let params = PassParams::from_optical_depth(alpha0, eta, 0.0, r)?;
    let kd = if scheme.disentangles() {
        Some(decoupler_kappa.unwrap_or(params.kappa()))
    } else {
        None
    };
    run_protocol(n, &params, scheme, kd)
}

/// Best η for a pass count, with `κ = √(α₀η)` and `ζ = r`.
///
/// For the disentangle schemes the decoupling pass uses the same nominal
/// coupling as the entangling passes.
pub fn optimize_eta(
    n: usize,
    alpha0: f64,
    r: f64,
    scheme: Scheme,
    objective: Objective,
) -> Result<OptimizationResult> {
    optimize_eta_with(n, alpha0, r, scheme, objective, &SearchOptions::default())
}

pub fn optimize_eta_with(
    n: usize,
    alpha0: f64,
    r: f64,
    scheme: Scheme,
    objective: Objective,
    opts: &SearchOptions,
) -> Result<OptimizationResult> {
    if n == 0 {
        return Err(Error::parameter("n", "at least one pass is required"));
    }
    crude_single_pass(alpha0)?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::parameter("r", format!("{r} not in [0, 1)")));
    }
    let cost = |eta: f64| -> Result<f64> {
        let state = physical_run(n, alpha0, r, eta, scheme, None)?;
        objective
            .metric(scheme, &state, &opts.geof)
            .map(|v| objective.cost(v))
    };
    let opt = bracketed_minimum(
        cost,
        opts.eta_min,
        opts.eta_max,
        opts.tol,
        opts.grid_points,
        true,
    )?;
    let kappa = (alpha0 * opt.x).sqrt();
    Ok(OptimizationResult {
        eta_star: opt.x,
        kappa_star: kappa,
        decoupler_kappa: scheme.disentangles().then_some(kappa),
        value: objective.cost(opt.cost),
        evaluations: opt.evaluations,
        at_bracket_edge: opt.at_edge,
    })
}

/// Loss model for the decoupling-pass optimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DisentangleModel {
    /// `η = ζ = 0`; the search runs over the per-pass coupling `κ`.
    Lossless,
    /// `κ = √(α₀η)` and `ζ = r`; the search runs over `η`.
    Physical { alpha0: f64, r: f64 },
}

/// Variance targeted by the decoupling pass for a given per-pass coupling
/// (lossless) or depumping probability (physical), with decoupler coupling
/// `kappa_d`.
fn disentangled_variance(
    n: usize,
    model: DisentangleModel,
    scheme: Scheme,
    x: f64,
    kappa_d: f64,
    target: ModeIndex,
) -> Result<f64> {
    let state = match model {
        DisentangleModel::Lossless => {
            run_protocol(n, &PassParams::lossless(x)?, scheme, Some(kappa_d))?
        }
        DisentangleModel::Physical { alpha0, r } => {
            physical_run(n, alpha0, r, x, scheme, Some(kappa_d))?
        }
    };
    Ok(match target {
        ModeIndex::Atoms => state.gamma.variance(ModeIndex::Atoms, QuadratureIndex::P),
        ModeIndex::Light => state.gamma.variance(ModeIndex::Light, QuadratureIndex::P),
    })
}

/// Evaluates the disentangle protocol at a fixed search variable (κ for
/// the lossless model, η for the physical model) with the decoupler tied to
/// the per-pass coupling.
pub fn disentangled_variance_at(
    n: usize,
    model: DisentangleModel,
    x: f64,
    target: ModeIndex,
) -> Result<f64> {
    let kappa = nominal_kappa(model, x);
    disentangled_variance(
        n,
        model,
        Scheme::UnswitchedThenDisentangle,
        x,
        kappa,
        target,
    )
}

fn nominal_kappa(model: DisentangleModel, x: f64) -> f64 {
    match model {
        DisentangleModel::Lossless => x,
        DisentangleModel::Physical { alpha0, .. } => (alpha0 * x).sqrt(),
    }
}

/// Minimizes the squeezed variance of `target` (atomic p or light p) after
/// the decoupling pass.
///
/// In the unswitched scheme the decoupler shares the per-pass coupling, so
/// the lossless optimum is `κ₀ = √(n − 1/2)/n`. In the switched scheme the
/// decoupler coupling is searched independently for every outer point.
pub fn optimize_disentangle_kappa(
    n: usize,
    model: DisentangleModel,
    scheme: Scheme,
    target: ModeIndex,
) -> Result<OptimizationResult> {
    optimize_disentangle_kappa_with(n, model, scheme, target, &SearchOptions::default())
}

pub fn optimize_disentangle_kappa_with(
    n: usize,
    model: DisentangleModel,
    scheme: Scheme,
    target: ModeIndex,
    opts: &SearchOptions,
) -> Result<OptimizationResult> {
    if n == 0 {
        return Err(Error::parameter("n", "at least one pass is required"));
    }
    if !scheme.disentangles() {
        return Err(Error::parameter(
            "scheme",
            format!("{} has no decoupling pass", scheme.name()),
        ));
    }
    if let DisentangleModel::Physical { alpha0, r } = model {
        crude_single_pass(alpha0)?;
        if !(0.0..1.0).contains(&r) {
            return Err(Error::parameter("r", format!("{r} not in [0, 1)")));
        }
    }
    let free_decoupler = scheme.is_switched();
    let inner = |x: f64| -> Result<(f64, f64)> {
        let kappa = nominal_kappa(model, x);
        if !free_decoupler {
            return disentangled_variance(n, model, scheme, x, kappa, target).map(|v| (kappa, v));
        }
        let opt = bracketed_minimum(
            |kd| disentangled_variance(n, model, scheme, x, kd, target),
            0.0,
            KAPPA_MAX,
            1e-9,
            opts.grid_points,
            false,
        )?;
        Ok((opt.x, opt.cost))
    };
    let (lo, hi, log_scale, tol) = match model {
        DisentangleModel::Lossless => (0.0, KAPPA_MAX, false, 1e-10),
        DisentangleModel::Physical { .. } => (opts.eta_min, opts.eta_max, true, opts.tol),
    };
    let opt = bracketed_minimum(
        |x| inner(x).map(|v| v.1),
        lo,
        hi,
        tol,
        opts.grid_points,
        log_scale,
    )?;
    let (kd, value) = inner(opt.x)?;
    let (eta_star, kappa_star) = match model {
        DisentangleModel::Lossless => (0.0, opt.x),
        DisentangleModel::Physical { alpha0, .. } => (opt.x, (alpha0 * opt.x).sqrt()),
    };
    Ok(OptimizationResult {
        eta_star,
        kappa_star,
        decoupler_kappa: Some(kd),
        value,
        evaluations: opt.evaluations,
        at_bracket_edge: opt.at_edge,
    })
}
