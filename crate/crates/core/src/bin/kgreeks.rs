use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kernel_greeks::harness::export::{export_results, ResultBundle, RunManifest};
use kernel_greeks::harness::{
    compare, convergence_rate_fit, kde_grid, kde_of_estimates, pilot_estimates, plan, run_study, ExperimentConfig,
};
use kernel_greeks::{EstimatorId, Result};

#[derive(Parser)]
#[command(name = "kgreeks", version, about = "Monte Carlo Delta estimation with randomized-parameter kernel estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One replicated run; prints the mean estimate and its standard error.
    Estimate(Common),
    /// Pilot constants and the selected bandwidth and tilt.
    Bandwidth(Common),
    /// MSE over a grid of sample sizes and the fitted log-log slope.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated sample sizes [default: 1e4,3e4,1e5,3e5,1e6].
        #[arg(long)]
        grid: Option<String>,
    },
    /// Several estimators on one configuration, with densities of their estimates.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated estimator ids [default: uniform,exponential,lr,fd].
        #[arg(long)]
        estimators: Option<String>,
        /// Grid size of the estimate densities; 0 disables them [default: 200].
        #[arg(long = "kde-points")]
        kde_points: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat key=value file (or a config.json written by a previous run); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "model.spot")]
    spot: Option<String>,
    #[arg(long = "model.rate")]
    rate: Option<String>,
    #[arg(long = "model.vol")]
    vol: Option<String>,
    #[arg(long = "model.maturity")]
    maturity: Option<String>,
    /// digital | vanilla | identity
    #[arg(long)]
    payoff: Option<String>,
    #[arg(long)]
    strike: Option<String>,
    /// Average over this many steps instead of the terminal value (0 = terminal).
    #[arg(long = "asian-steps")]
    asian_steps: Option<String>,
    /// hat | check | uniform | exponential | double | oracle | lr | fd
    #[arg(long)]
    estimator: Option<String>,
    /// p2 | p4 | p6
    #[arg(long)]
    kernel: Option<String>,
    /// uniform | exponential (randomizer of hat, check, double and oracle)
    #[arg(long)]
    randomizer: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "fd-eps")]
    fd_eps: Option<String>,
    /// auto | <value>
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    antithetic: bool,
    #[arg(long = "pilot-n")]
    pilot_n: Option<String>,
    #[arg(long = "plugin-law")]
    plugin_law: bool,
    #[arg(long = "reference-n")]
    reference_n: Option<String>,
    #[arg(long = "reference-eps")]
    reference_eps: Option<String>,
    /// Output directory for CSV files and the config sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
}

const DEFAULT_GRID: [usize; 5] = [10_000, 30_000, 100_000, 300_000, 1_000_000];
const DEFAULT_COMPARE: [EstimatorId; 4] = [
    EstimatorId::UniformOpt,
    EstimatorId::ExponentialOpt,
    EstimatorId::LikelihoodRatio,
    EstimatorId::FiniteDifference,
];
const DEFAULT_KDE_POINTS: usize = 200;

impl Common {
    /// The run manifest behind `--config`, when it is one.
    fn manifest(&self) -> Option<RunManifest> {
        let text = std::fs::read_to_string(self.config.as_ref()?).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let pairs = [
            ("model.spot", &self.spot),
            ("model.rate", &self.rate),
            ("model.vol", &self.vol),
            ("model.maturity", &self.maturity),
            ("payoff", &self.payoff),
            ("strike", &self.strike),
            ("asian-steps", &self.asian_steps),
            ("estimator", &self.estimator),
            ("kernel", &self.kernel),
            ("randomizer", &self.randomizer),
            ("theta", &self.theta),
            ("epsilon", &self.epsilon),
            ("alpha", &self.alpha),
            ("fd-eps", &self.fd_eps),
            ("bandwidth", &self.bandwidth),
            ("n", &self.n),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("pilot-n", &self.pilot_n),
            ("reference-n", &self.reference_n),
            ("reference-eps", &self.reference_eps),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.antithetic {
            cfg.antithetic = true;
        }
        if self.plugin_law {
            cfg.plugin_law = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|item| {
            let mut probe = ExperimentConfig::default();
            probe.set("n", item.trim())?;
            Ok(probe.n)
        })
        .collect()
}

fn parse_estimators(s: &str) -> Result<Vec<EstimatorId>> {
    s.split(',').map(|item| EstimatorId::parse(item.trim())).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{v:.6}"))
}

fn write_out(common: &Common, manifest: RunManifest, bundle: &ResultBundle) -> Result<()> {
    if let Some(dir) = &common.out {
        for path in export_results(dir, &manifest, bundle)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Estimate(c) | Command::Bandwidth(c) => c,
        Command::Sweep { common, .. } | Command::Compare { common, .. } => common,
    };
    if let Some(w) = common.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global();
    }
    let cfg = common.resolve()?;
    match &cli.command {
        Command::Estimate(_) => {
            let out = run_study(&cfg)?;
            let r = &out.row;
            println!(
                "{} {} N={} R={} h={} theta={} epsilon={}",
                r.estimator,
                r.payoff,
                r.n,
                r.replications,
                opt(r.h),
                opt(r.theta),
                opt(r.epsilon)
            );
            println!("estimate = {:.8e} ± {:.3e}", r.mean, r.stderr);
            println!(
                "reference = {:.8e} ({})  bias = {:.3e}  mse = {:.3e}",
                r.reference,
                r.reference_source.as_str(),
                r.bias,
                r.mse
            );
            let bundle = ResultBundle {
                rows: vec![out.row.clone()],
                raw: vec![(cfg.estimator, out.run)],
                ..ResultBundle::default()
            };
            write_out(common, manifest("estimate", &cfg, vec![], vec![], 0), &bundle)
        }
        Command::Bandwidth(_) => {
            let pilot = pilot_estimates(&cfg)?;
            println!("pilot N = {}", pilot.pilot_n);
            println!("m_hat = {:.10e}", pilot.m_hat);
            println!("Sigma_hat = {:.10e}", pilot.sigma_hat);
            for (k, e) in pilot.e.iter().enumerate() {
                println!("E_{} = {:.10e}", k + 1, e);
            }
            println!("E[phi^2] = {:.10e}", pilot.second_moment);
            if cfg.estimator.is_kernel() {
                let p = plan(&cfg)?;
                println!("theta* = {:.10e}", p.theta);
                println!("h* = {}", opt(p.h));
                if let Some(c) = p.choice {
                    println!("bias constant = {:.10e}", c.bias_constant);
                    println!("variance constant = {:.10e}", c.sigma);
                    println!("predicted MSE = {:.10e}", c.predicted_mse);
                    if c.degenerate {
                        println!("bias constant vanishes: h = N^(-1/(2p+2)) fallback");
                    }
                }
            }
            Ok(())
        }
        Command::Sweep { grid, .. } => {
            let grid = match (grid, common.manifest()) {
                (Some(g), _) => parse_grid(g)?,
                (None, Some(m)) if !m.grid.is_empty() => m.grid,
                (None, _) => DEFAULT_GRID.to_vec(),
            };
            let study = convergence_rate_fit(&cfg, &grid, cfg.reps)?;
            for r in &study.rows {
                println!("N={:>10} h={} mse={:.6e}", r.n, opt(r.h), r.mse);
            }
            println!("slope = {:.4} (r2 = {:.4})", study.fit.slope, study.fit.r_squared);
            let bundle = ResultBundle {
                rows: study.rows.clone(),
                rates: vec![(cfg.estimator, study)],
                ..ResultBundle::default()
            };
            write_out(common, manifest("sweep", &cfg, vec![], grid, 0), &bundle)
        }
        Command::Compare { estimators, kde_points, .. } => {
            let saved = common.manifest();
            let ids = match (estimators, &saved) {
                (Some(list), _) => parse_estimators(list)?,
                (None, Some(m)) if !m.estimators.is_empty() => m.estimators.clone(),
                (None, _) => DEFAULT_COMPARE.to_vec(),
            };
            let kde_points = &kde_points.or(saved.map(|m| m.kde_points)).unwrap_or(DEFAULT_KDE_POINTS);
            let outs = compare(&cfg, &ids)?;
            let mut bundle = ResultBundle::default();
            for (id, out) in ids.iter().zip(outs) {
                let r = &out.row;
                println!(
                    "{:<12} mean={:.6e} stderr={:.3e} bias={:.3e} var={:.3e} mse={:.3e}",
                    r.estimator, r.mean, r.stderr, r.bias, r.variance, r.mse
                );
                if *kde_points > 0 && out.run.estimates.len() >= 10 {
                    let grid = kde_grid(&out.run.estimates, *kde_points)?;
                    let density = kde_of_estimates(&out.run.estimates, &grid)?;
                    bundle.kde.push((*id, grid, density));
                }
                bundle.rows.push(out.row);
                bundle.raw.push((*id, out.run));
            }
            write_out(common, manifest("compare", &cfg, ids, vec![], *kde_points), &bundle)
        }
    }
}

fn manifest(command: &str, cfg: &ExperimentConfig, estimators: Vec<EstimatorId>, grid: Vec<usize>, kde_points: usize) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        config: cfg.clone(),
        estimators,
        grid,
        kde_points,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
