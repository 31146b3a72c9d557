use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use interface_sim::dynamics::Scheme;
use interface_sim::gaussian::ModeIndex;
use interface_sim::measures::GeofOptions;
use interface_sim::optimize::{
    optimize_disentangle_kappa_with, optimize_eta_with, DisentangleModel, Objective, SearchOptions,
};
use interface_sim::physical::{derive_model_params, photons_for_target_eta, ExperimentalSetup};
use interface_sim::runner::config::EtaSetting;
use interface_sim::runner::{
    run_checks, run_figure, run_sweep, to_csv, write_atomically, ConfigError, EtaMode, Figure,
    PartialConfig, RunConfig, RunError, SweepRecord,
};

#[derive(Parser, Debug)]
#[command(
    name = "interface-sim",
    version,
    about = "Multipass light-atom interface simulator"
)]
struct Cli {
    /// Flat JSON configuration file; command-line options take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha0: Option<f64>,
    /// Reflection loss per pass.
    #[arg(long = "r", global = true)]
    reflectivity: Option<f64>,
    /// unswitched, switched, unswitched-disentangle or switched-disentangle.
    #[arg(long, global = true)]
    scheme: Option<String>,
    #[arg(long, global = true)]
    n_min: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// geof, epr, atomic-p or light-p; repeat or separate with commas.
    #[arg(long = "objective", global = true, value_delimiter = ',')]
    objectives: Vec<String>,
    /// Fixed depumping probability instead of optimizing it.
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the GEOF restart sequence.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Lossless decoupling sweep over the coupling itself.
    #[arg(long, global = true)]
    lossless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Data for one of the four figures.
    Figure {
        #[arg(value_parser = ["1", "2", "3", "4"])]
        which: String,
    },
    /// Sweep with explicitly chosen scheme, r and objectives.
    Sweep,
    /// Optimize a single pass count.
    Optimize {
        #[arg(long)]
        n: usize,
    },
    /// Model parameters of the Rb-87 example setup.
    Physical,
    /// Run the analytic check battery and write `checks.txt`.
    Check,
}

impl Cli {
    fn overrides(&self) -> PartialConfig {
        PartialConfig {
            alpha0: self.alpha0,
            reflectivity: self.reflectivity,
            scheme: self.scheme.clone(),
            n_min: self.n_min,
            n_max: self.n_max,
            objectives: (!self.objectives.is_empty()).then(|| self.objectives.clone()),
            eta: self.eta.map(EtaSetting::Fixed),
            output_path: self.out.clone(),
            seed: self.seed,
            lossless: self.lossless.then_some(true),
        }
    }

    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        RunConfig::resolve(&file.merge(self.overrides()))
    }
}

fn output_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.output_path
        .clone()
        .unwrap_or_else(|| PathBuf::from(default))
}

fn write_table(cfg: &RunConfig, default: &str, records: Vec<SweepRecord>) -> Result<(), RunError> {
    let path = output_path(cfg, default);
    write_atomically(&path, &to_csv(&records)?)?;
    info!("wrote {} rows to {}", records.len(), path.display());
    println!("{}", path.display());
    Ok(())
}

fn optimize_one(cfg: &RunConfig, n: usize) -> Result<(), RunError> {
    if cfg.eta_mode != EtaMode::Optimize {
        return Err(ConfigError::field("eta", "the optimize command searches η itself").into());
    }
    let scheme = cfg.scheme.unwrap_or(Scheme::Unswitched);
    let r = cfg.reflectivity.unwrap_or(0.0);
    let opts = SearchOptions {
        geof: GeofOptions {
            seed: cfg.seed,
            ..GeofOptions::default()
        },
        ..SearchOptions::default()
    };
    let objectives = cfg.objectives.clone().unwrap_or_else(|| {
        if scheme.disentangles() {
            vec![Objective::MinimizeAtomicP]
        } else {
            vec![Objective::MaximizeGeof]
        }
    });
    for objective in objectives {
        let res = if scheme.disentangles() {
            let target = match objective {
                Objective::MinimizeAtomicP => ModeIndex::Atoms,
                Objective::MinimizeLightP => ModeIndex::Light,
                other => {
                    return Err(ConfigError::field(
                        "objectives",
                        format!("{} is not available for {}", other.name(), scheme.name()),
                    )
                    .into())
                }
            };
            let model = if cfg.lossless {
                DisentangleModel::Lossless
            } else {
                DisentangleModel::Physical {
                    alpha0: cfg.alpha0,
                    r,
                }
            };
            optimize_disentangle_kappa_with(n, model, scheme, target, &opts)?
        } else {
            if cfg.lossless {
                return Err(
                    ConfigError::field("lossless", "only for the disentangle schemes").into(),
                );
            }
            optimize_eta_with(n, cfg.alpha0, r, scheme, objective, &opts)?
        };
        println!(
            "scheme={} r={r} objective={} n={n} eta_star={:.11e} kappa={:.11e} kappa_d={} value={:.11e} at_edge={}",
            scheme.name(),
            objective.name(),
            res.eta_star,
            res.kappa_star,
            res.decoupler_kappa.map_or(String::new(), |k| format!("{k:.11e}")),
            res.value,
            res.at_bracket_edge,
        );
    }
    Ok(())
}

fn physical(cfg: &RunConfig) -> Result<(), RunError> {
    let mut setup = ExperimentalSetup::rb87_example();
    if let Some(r) = cfg.reflectivity {
        setup.reflectivity = r;
    }
    let p = derive_model_params(&setup)?;
    println!("optical_depth={:.11e}", p.alpha0);
    println!("detuning_hz={:.11e}", setup.detuning_hz);
    println!("epsilon={:.11e}", p.epsilon);
    println!(
        "eta={:.11e} kappa={:.11e} photons={:e}",
        p.eta, p.kappa, setup.n_photons
    );
    let targets = match cfg.eta_mode {
        EtaMode::Fixed(eta) => vec![eta],
        EtaMode::Optimize => vec![0.01, 0.03, 0.1],
    };
    for eta in targets {
        println!(
            "eta_target={eta} photons={}",
            photons_for_target_eta(&setup, eta)?
        );
    }
    Ok(())
}

fn check(cfg: &RunConfig) -> Result<bool, RunError> {
    let report = run_checks();
    let text = report.render();
    print!("{text}");
    write_atomically(&output_path(cfg, "checks.txt"), &text)?;
    Ok(!report.failed())
}

fn execute(cli: &Cli) -> Result<bool, RunError> {
    let cfg = cli.resolve()?;
    match &cli.command {
        Command::Figure { which } => {
            let fig: Figure = which.parse().map_err(|e| ConfigError::field("figure", e))?;
            let default = format!("{}.csv", fig.label());
            write_table(&cfg, &default, run_figure(fig, &cfg)?)?;
        }
        Command::Sweep => write_table(&cfg, "sweep.csv", run_sweep(&cfg)?)?,
        Command::Optimize { n } => optimize_one(&cfg, *n)?,
        Command::Physical => physical(&cfg)?,
        Command::Check => return check(&cfg),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(RunError::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
