//! `pqd`: command-line access to the decoupling estimators.
//!
//! Exit codes: 0 success, 1 a verification scenario failed, 2 usage or I/O
//! error, 3 numerical or validation failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use pqd_core::entropics::{entropy, mutual_information, subsystem_entropy};
use pqd_core::format::{fmt12, round12};
use pqd_core::pqd::{bounds_report, optimize_xi, rates_sweep, Epsilon, OptimizerOptions};
use pqd_core::qmat::{DensityMatrix, DimSig, DENSITY_TOL};
use pqd_core::scenarios::{classical_state, reports_to_json, run_all, run_scenario};
use pqd_core::states::{
    classically_correlated_diagonal, isotropic, max_entangled, random_density_on,
    random_separable, state_from_json_with_tol, state_to_json,
};

mod study;

#[derive(Parser)]
#[command(name = "pqd", version, about = "Private quantum decoupling estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Von Neumann entropy (bits) of the whole state or of a marginal.
    Entropy {
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated labels to keep; default is the whole system.
        #[arg(long, value_delimiter = ',')]
        subsystem: Vec<String>,
        #[arg(long, default_value_t = DENSITY_TOL)]
        tol: f64,
    },
    /// Quantum mutual information I(X:Y) in bits.
    Qmi {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long, default_value_t = DENSITY_TOL)]
        tol: f64,
    },
    /// Closed-form bounds plus the POVM upper bound, as JSON.
    Bounds {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value = "inf")]
        eps: Epsilon,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimizer estimate of the ε-constrained value, as JSON.
    Optimize {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value = "inf")]
        eps: Epsilon,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimizer estimates over an ε grid, as CSV.
    Sweep {
        #[arg(long)]
        state: PathBuf,
        /// `start:stop:step`, inclusive of `stop`.
        #[arg(long)]
        eps_grid: String,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the built-in scenarios; exits 1 if any fails.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run a single scenario by name.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounds and optimizer estimates on random states, as CSV.
    RandomStudy {
        #[arg(long, num_args = 2, value_names = ["D_R", "D_A"], required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        samples: usize,
        /// Rank of each sample; default is full rank.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value = "inf")]
        eps: Epsilon,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a state file.
    MakeState {
        #[command(subcommand)]
        kind: StateKind,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StateKind {
    /// Maximally entangled state of two d-level systems.
    Bell {
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Classically correlated state; random qubit conditionals on R when seeded.
    Cc {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Isotropic state with singlet fraction f.
    Isotropic {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        f: f64,
    },
    /// Ginibre-sampled state on R ⊗ A.
    Random {
        #[arg(long, num_args = 2, value_names = ["D_R", "D_A"], required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convex mixture of random product states.
    Separable {
        #[arg(long, num_args = 2, value_names = ["D_R", "D_A"], required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        terms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct OptArgs {
    #[arg(long = "dB")]
    d_b: Option<usize>,
    #[arg(long = "dE")]
    d_e: Option<usize>,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration budget per penalty stage.
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    #[arg(long)]
    gradient_polish: bool,
    #[arg(long)]
    povm_elements: Option<usize>,
    #[arg(long, default_value_t = DENSITY_TOL)]
    tol: f64,
}

impl OptArgs {
    fn options(&self) -> OptimizerOptions {
        OptimizerOptions {
            d_b: self.d_b,
            d_e: self.d_e,
            restarts: self.restarts,
            max_iterations: self.iterations,
            seed: self.seed,
            gradient_polish: self.gradient_polish,
            povm_elements: self.povm_elements,
            ..Default::default()
        }
    }
}

/// Distinguishes a failed verification from an error.
struct Failed;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<pqd_core::Error>(),
                    Some(err) if !matches!(err, pqd_core::Error::UnknownScenario(_))
                )
            });
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("PQD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("PQD_THREADS=`{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(command: Command) -> anyhow::Result<Option<Failed>> {
    match command {
        Command::Entropy { state, subsystem, tol } => {
            let rho = load_state(&state, tol)?;
            let s = if subsystem.is_empty() {
                entropy(&rho)
            } else {
                subsystem_entropy(&rho, &strs(&subsystem))?
            };
            println!("{}", fmt12(s));
        }
        Command::Qmi { state, x, y, tol } => {
            let rho = load_state(&state, tol)?;
            println!("{}", fmt12(mutual_information(&rho, &strs(&x), &strs(&y))?));
        }
        Command::Bounds { state, eps, opt, out } => {
            let rho = load_state(&state, opt.tol)?;
            let report = bounds_report(&rho, eps, &opt.options())?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
        }
        Command::Optimize { state, eps, opt, out } => {
            let rho = load_state(&state, opt.tol)?;
            match optimize_xi(&rho, eps, &opt.options()) {
                Ok(o) => emit(out.as_deref(), &o.to_json()?)?,
                Err(pqd_core::Error::Infeasible(o)) => {
                    emit(out.as_deref(), &o.to_json()?)?;
                    return Err(pqd_core::Error::Infeasible(o).into());
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Sweep { state, eps_grid, opt, out } => {
            let rho = load_state(&state, opt.tol)?;
            let grid = parse_grid(&eps_grid)?;
            let result = rates_sweep(&rho, &grid, &opt.options())?;
            emit(out.as_deref(), &result.to_csv())?;
        }
        Command::Verify { seed, scenario, out } => {
            let reports = match scenario {
                Some(name) => vec![run_scenario(&name, seed)?],
                None => run_all(seed)?,
            };
            for r in &reports {
                eprintln!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
            }
            emit(out.as_deref(), &reports_to_json(&reports))?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(Some(Failed));
            }
        }
        Command::RandomStudy { dims, samples, rank, eps, opt, out } => {
            let csv = study::run(dims[0], dims[1], samples, rank, eps, &opt.options())?;
            emit(out.as_deref(), &csv)?;
        }
        Command::MakeState { kind, out } => {
            let rho = make_state(kind)?;
            emit(out.as_deref(), &state_to_json(&rho))?;
        }
    }
    Ok(None)
}

fn make_state(kind: StateKind) -> pqd_core::Result<DensityMatrix> {
    match kind {
        StateKind::Bell { d } => Ok(max_entangled(d)?.to_density()),
        StateKind::Cc { p, seed: None } => classically_correlated_diagonal(&p),
        StateKind::Cc { p, seed: Some(s) } => classical_state(&p, s),
        StateKind::Isotropic { d, f } => isotropic(d, f),
        StateKind::Random { dims, rank, seed } => {
            let sig = DimSig::new(dims.clone(), vec!["R", "A"])?;
            random_density_on(&sig, rank.unwrap_or(dims[0] * dims[1]), seed)
        }
        StateKind::Separable { dims, terms, seed } => random_separable(dims[0], dims[1], terms, seed),
    }
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn load_state(path: &Path, tol: f64) -> anyhow::Result<DensityMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(state_from_json_with_tol(&text, tol).with_context(|| format!("loading {}", path.display()))?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Expands `start:stop:step` into an ascending grid rounded to 12 significant digits.
fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts[..] else {
        bail!("eps grid `{text}` is not start:stop:step");
    };
    let parse = |s: &str| -> anyhow::Result<f64> {
        let x: f64 = s.trim().parse().with_context(|| format!("eps grid value `{s}`"))?;
        if !x.is_finite() {
            bail!("eps grid value `{s}` is not finite");
        }
        Ok(x)
    };
    let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
    if step <= 0.0 || b < a || a < 0.0 {
        bail!("eps grid needs 0 <= start <= stop and step > 0");
    }
    let count = ((b - a) / step + 1e-9).floor();
    if count > 1e6 {
        bail!("eps grid has more than a million points");
    }
    Ok((0..=count as usize).map(|k| round12(a + k as f64 * step)).collect())
}
