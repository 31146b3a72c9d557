//! Figure sweeps: per-n optimization of η (or of the coupling, for lossless
//! decoupling runs) and evaluation of every metric at the optimum.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{optimal_disentangle_kappa, run_protocol, PassParams, ProtocolState, Scheme};
use crate::gaussian::{ModeIndex, QuadratureIndex};
use crate::measures::{epr_variance, geof_with, GeofOptions};
use crate::optimize::{
    atomic_p_variance, optimize_disentangle_kappa_with, optimize_eta_with, physical_run,
    DisentangleModel, Objective, SearchOptions,
};

use super::config::{ConfigError, EtaMode, RunConfig};
use super::{run_tasks, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Unswitched scheme, GEOF and EPR optima, `r ∈ {0, 0.02}`.
    Fig1,
    /// As `Fig1` for the switched scheme.
    Fig2,
    /// Conditional atomic squeezing for both schemes, `r = 0.02`.
    Fig3,
    /// Unswitched entangling passes plus a decoupling pass, `r = 0.02`.
    Fig4,
}

impl Figure {
    pub fn label(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }

    fn preset(self) -> Plan {
        let (schemes, rs, objectives) = match self {
            Figure::Fig1 => (
                vec![Scheme::Unswitched],
                vec![0.0, 0.02],
                vec![Objective::MaximizeGeof, Objective::MinimizeEpr],
            ),
            Figure::Fig2 => (
                vec![Scheme::Switched],
                vec![0.0, 0.02],
                vec![Objective::MaximizeGeof, Objective::MinimizeEpr],
            ),
            Figure::Fig3 => (
                vec![Scheme::Unswitched, Scheme::Switched],
                vec![0.02],
                vec![Objective::MinimizeAtomicP],
            ),
            Figure::Fig4 => (
                vec![Scheme::UnswitchedThenDisentangle],
                vec![0.02],
                vec![Objective::MinimizeAtomicP, Objective::MinimizeLightP],
            ),
        };
        Plan {
            label: self.label(),
            schemes,
            rs,
            objectives,
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(Figure::Fig1),
            "2" => Ok(Figure::Fig2),
            "3" => Ok(Figure::Fig3),
            "4" => Ok(Figure::Fig4),
            other => Err(format!("unknown figure `{other}` (expected 1, 2, 3 or 4)")),
        }
    }
}

/// One row of a sweep. Metrics that do not apply to the scheme are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub figure: &'static str,
    pub scheme: Scheme,
    pub r: f64,
    pub objective: Objective,
    pub n: usize,
    /// `None` for lossless runs, where the coupling is searched directly.
    pub eta_star: Option<f64>,
    pub kappa: f64,
    pub kappa_d: Option<f64>,
    pub at_edge: bool,
    pub objective_value: f64,
    pub geof: Option<f64>,
    pub epr: Option<f64>,
    /// Conditional (plain schemes) or unconditional (after decoupling)
    /// atomic p-variance.
    pub atomic_p: Option<f64>,
    /// Light p-variance after decoupling.
    pub light_p: Option<f64>,
    /// Conditional atomic p-variance of the entangling passes alone at the
    /// same η, for comparison with the decoupled value.
    pub qnd_atomic_p: Option<f64>,
    /// Lossless optimal coupling `√(n − 1/2)/n`.
    pub kappa0: Option<f64>,
}

/// Schemes, reflectivities and objectives of a sweep.
#[derive(Clone, Debug)]
struct Plan {
    label: &'static str,
    schemes: Vec<Scheme>,
    rs: Vec<f64>,
    objectives: Vec<Objective>,
}

impl Plan {
    fn with_overrides(mut self, cfg: &RunConfig) -> Self {
        if let Some(s) = cfg.scheme {
            self.schemes = vec![s];
        }
        if let Some(r) = cfg.reflectivity {
            self.rs = vec![r];
        }
        if let Some(o) = &cfg.objectives {
            self.objectives = o.clone();
        }
        self
    }

    fn check(&self, cfg: &RunConfig) -> Result<(), ConfigError> {
        for &scheme in &self.schemes {
            if cfg.lossless && !scheme.disentangles() {
                return Err(ConfigError::field(
                    "lossless",
                    format!(
                        "only the disentangle schemes have a lossless sweep, not {}",
                        scheme.name()
                    ),
                ));
            }
            for &obj in &self.objectives {
                let ok = match obj {
                    Objective::MaximizeGeof | Objective::MinimizeEpr => !scheme.disentangles(),
                    Objective::MinimizeAtomicP => true,
                    Objective::MinimizeLightP => scheme.disentangles(),
                };
                if !ok {
                    return Err(ConfigError::field(
                        "objectives",
                        format!(
                            "{} is not available for the {} scheme",
                            obj.name(),
                            scheme.name()
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn run_figure(which: Figure, cfg: &RunConfig) -> Result<Vec<SweepRecord>, RunError> {
    run_plan(which.preset().with_overrides(cfg), cfg)
}

/// Free sweep; defaults to the unswitched scheme at `r = 0` with GEOF and
/// EPR objectives.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRecord>, RunError> {
    let plan = Plan {
        label: "sweep",
        schemes: vec![Scheme::Unswitched],
        rs: vec![0.0],
        objectives: vec![Objective::MaximizeGeof, Objective::MinimizeEpr],
    };
    run_plan(plan.with_overrides(cfg), cfg)
}

fn run_plan(plan: Plan, cfg: &RunConfig) -> Result<Vec<SweepRecord>, RunError> {
    cfg.validate()?;
    plan.check(cfg)?;
    let mut tasks = Vec::new();
    for &scheme in &plan.schemes {
        for &r in &plan.rs {
            for &objective in &plan.objectives {
                for n in cfg.pass_counts() {
                    tasks.push((scheme, r, objective, n));
                }
            }
        }
    }
    let label = plan.label;
    let records = run_tasks(&tasks, |&(scheme, r, objective, n)| {
        record_for(label, cfg, scheme, r, objective, n)
    })?;
    Ok(records)
}

fn search_options(cfg: &RunConfig) -> SearchOptions {
    SearchOptions {
        geof: GeofOptions {
            seed: cfg.seed,
            ..GeofOptions::default()
        },
        ..SearchOptions::default()
    }
}

fn record_for(
    label: &'static str,
    cfg: &RunConfig,
    scheme: Scheme,
    r: f64,
    objective: Objective,
    n: usize,
) -> crate::Result<SweepRecord> {
    let opts = search_options(cfg);
    let alpha0 = cfg.alpha0;

    // Search variable, nominal coupling, decoupler coupling, value, edge flag.
    let (eta, kappa, kappa_d, value, at_edge) = if scheme.disentangles() {
        let target = match objective {
            Objective::MinimizeLightP => ModeIndex::Light,
            _ => ModeIndex::Atoms,
        };
        let model = if cfg.lossless {
            DisentangleModel::Lossless
        } else {
            DisentangleModel::Physical { alpha0, r }
        };
        match cfg.eta_mode {
            EtaMode::Fixed(eta) => {
                let kappa = (alpha0 * eta).sqrt();
                let state = physical_run(n, alpha0, r, eta, scheme, Some(kappa))?;
                let value = match target {
                    ModeIndex::Atoms => state.gamma.variance(ModeIndex::Atoms, QuadratureIndex::P),
                    ModeIndex::Light => state.gamma.variance(ModeIndex::Light, QuadratureIndex::P),
                };
                (Some(eta), kappa, Some(kappa), value, false)
            }
            EtaMode::Optimize => {
                let res = optimize_disentangle_kappa_with(n, model, scheme, target, &opts)?;
                let eta = (!cfg.lossless).then_some(res.eta_star);
                (
                    eta,
                    res.kappa_star,
                    res.decoupler_kappa,
                    res.value,
                    res.at_bracket_edge,
                )
            }
        }
    } else {
        match cfg.eta_mode {
            EtaMode::Fixed(eta) => {
                let state = physical_run(n, alpha0, r, eta, scheme, None)?;
                let value = objective.metric(scheme, &state, &opts.geof)?;
                (Some(eta), (alpha0 * eta).sqrt(), None, value, false)
            }
            EtaMode::Optimize => {
                let res = optimize_eta_with(n, alpha0, r, scheme, objective, &opts)?;
                (
                    Some(res.eta_star),
                    res.kappa_star,
                    None,
                    res.value,
                    res.at_bracket_edge,
                )
            }
        }
    };

    let run = |s: Scheme, kd: Option<f64>| -> crate::Result<ProtocolState> {
        match eta {
            Some(eta) => physical_run(n, alpha0, r, eta, s, kd),
            None => run_protocol(n, &PassParams::lossless(kappa)?, s, kd),
        }
    };
    let state = run(scheme, kappa_d)?;
    let geof = geof_with(&state.gamma, &opts.geof)?.value;
    let epr = epr_variance(&state.gamma);
    let atomic_p = atomic_p_variance(scheme, &state)?;
    let (light_p, qnd_atomic_p, kappa0) = if scheme.disentangles() {
        let plain = scheme.entangling_part();
        let entangled = run(plain, None)?;
        (
            Some(state.gamma.variance(ModeIndex::Light, QuadratureIndex::P)),
            Some(atomic_p_variance(plain, &entangled)?),
            Some(optimal_disentangle_kappa(n)),
        )
    } else {
        (None, None, None)
    };

    Ok(SweepRecord {
        figure: label,
        scheme,
        r,
        objective,
        n,
        eta_star: eta,
        kappa,
        kappa_d,
        at_edge,
        objective_value: value,
        geof: Some(geof),
        epr: Some(epr),
        atomic_p: Some(atomic_p),
        light_p,
        qnd_atomic_p,
        kappa0,
    })
}

/// CSV column names, in order.
pub const CSV_HEADER: [&str; 20] = [
    "figure",
    "scheme",
    "r",
    "objective",
    "n",
    "eta_star",
    "kappa",
    "kappa_d",
    "at_edge",
    "objective_value",
    "geof",
    "epr",
    "epr_db",
    "atomic_p",
    "atomic_p_db",
    "light_p",
    "light_p_db",
    "qnd_atomic_p",
    "qnd_atomic_p_db",
    "kappa0",
];

fn number(out: &mut String, v: Option<f64>) -> Result<(), RunError> {
    out.push(',');
    if let Some(v) = v {
        if !v.is_finite() {
            return Err(RunError::Compute(crate::Error::numerical(format!(
                "refusing to write non-finite value {v}"
            ))));
        }
        write!(out, "{v:.11e}").expect("writing to a String");
    }
    Ok(())
}

/// `−10 log₁₀ v`, the squeezing in dB below the coherent level.
pub fn decibels(v: f64) -> f64 {
    -10.0 * v.log10()
}

/// Renders records as CSV, ordered by scheme, r, objective and n.
pub fn to_csv(records: &[SweepRecord]) -> Result<String, RunError> {
    let mut rows: Vec<&SweepRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        (a.scheme as u8)
            .cmp(&(b.scheme as u8))
            .then(a.r.total_cmp(&b.r))
            .then((a.objective as u8).cmp(&(b.objective as u8)))
            .then(a.n.cmp(&b.n))
    });
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for rec in rows {
        write!(out, "{},{}", rec.figure, rec.scheme.name()).expect("writing to a String");
        number(&mut out, Some(rec.r))?;
        write!(out, ",{},{}", rec.objective.name(), rec.n).expect("writing to a String");
        number(&mut out, rec.eta_star)?;
        number(&mut out, Some(rec.kappa))?;
        number(&mut out, rec.kappa_d)?;
        write!(out, ",{}", u8::from(rec.at_edge)).expect("writing to a String");
        number(&mut out, Some(rec.objective_value))?;
        number(&mut out, rec.geof)?;
        for v in [rec.epr, rec.atomic_p, rec.light_p, rec.qnd_atomic_p] {
            number(&mut out, v)?;
            number(&mut out, v.map(decibels))?;
        }
        number(&mut out, rec.kappa0)?;
        out.push('\n');
    }
    Ok(out)
}

/// Writes `contents` next to `path` and renames it into place, so a failed
/// run never leaves a partial file.
pub fn write_atomically(path: &Path, contents: &str) -> Result<(), RunError> {
    let file_name = path.file_name().ok_or_else(|| {
        ConfigError::field("output_path", format!("{} is not a file", path.display()))
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let io = |source| RunError::Io {
        path: path.to_owned(),
        source,
    };
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::crude_single_pass;

    fn small(n_max: usize) -> RunConfig {
        RunConfig {
            n_max,
            ..RunConfig::default()
        }
    }

    #[test]
    fn single_pass_record_matches_crude_model() {
        let cfg = RunConfig {
            reflectivity: Some(0.0),
            ..small(1)
        };
        let recs = run_figure(Figure::Fig1, &cfg).unwrap();
        assert_eq!(recs.len(), 2);
        let crude = crude_single_pass(25.0).unwrap();
        for rec in &recs {
            let eta = rec.eta_star.unwrap();
            let band = crude.delta(eta);
            let sq = rec.atomic_p.unwrap();
            assert!((sq / band - 1.0).abs() < 0.1, "{rec:?}: {sq} vs {band}");
        }
    }

    #[test]
    fn lossless_decoupler_sweep_recovers_kappa0() {
        let cfg = RunConfig {
            lossless: true,
            objectives: Some(vec![Objective::MinimizeAtomicP]),
            ..small(8)
        };
        let recs = run_figure(Figure::Fig4, &cfg).unwrap();
        assert_eq!(recs.len(), 8);
        for rec in &recs {
            let k0 = optimal_disentangle_kappa(rec.n);
            assert!((rec.kappa - k0).abs() < 1e-6, "{rec:?}");
            assert_eq!(rec.kappa0, Some(k0));
            assert!(rec.eta_star.is_none());
        }
    }

    #[test]
    fn switched_conditional_squeezing_is_no_worse() {
        let recs = run_figure(Figure::Fig3, &small(6)).unwrap();
        for n in 1..=6 {
            let get = |s: Scheme| {
                recs.iter()
                    .find(|r| r.n == n && r.scheme == s)
                    .unwrap()
                    .objective_value
            };
            assert!(
                get(Scheme::Switched) <= get(Scheme::Unswitched) + 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn incompatible_objective_is_a_config_error() {
        let cfg = RunConfig {
            objectives: Some(vec![Objective::MaximizeGeof]),
            ..small(2)
        };
        assert!(matches!(
            run_figure(Figure::Fig4, &cfg),
            Err(RunError::Config(ConfigError::Field {
                field: "objectives",
                ..
            }))
        ));
        let cfg = RunConfig {
            lossless: true,
            ..small(2)
        };
        assert!(matches!(
            run_figure(Figure::Fig1, &cfg),
            Err(RunError::Config(ConfigError::Field {
                field: "lossless",
                ..
            }))
        ));
    }

    #[test]
    fn csv_layout() {
        let cfg = RunConfig {
            eta_mode: EtaMode::Fixed(0.05),
            reflectivity: Some(0.02),
            objectives: Some(vec![Objective::MinimizeEpr]),
            ..small(3)
        };
        let csv = to_csv(&run_sweep(&cfg).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), CSV_HEADER.len());
            assert_eq!(fields[0], "sweep");
            // Plain scheme: no decoupler, light or κ₀ columns.
            assert_eq!(fields[7], "");
            assert_eq!(fields[15], "");
            assert_eq!(fields[19], "");
            let epr: f64 = fields[11].parse().unwrap();
            let db: f64 = fields[12].parse().unwrap();
            assert!((db - decibels(epr)).abs() < 1e-9);
        }
        assert!(lines[1].contains(",1,") && lines[3].split(',').nth(4) == Some("3"));
    }

    #[test]
    fn decibel_convention() {
        assert_eq!(decibels(1.0), 0.0);
        assert!((decibels(0.5) - 3.0103).abs() < 1e-4);
    }
}
