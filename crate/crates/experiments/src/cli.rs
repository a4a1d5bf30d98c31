//! Argument parsing and the run loop behind the `geocurrents` binary.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{load_config, ExperimentSpec};
use crate::drivers;

#[derive(Debug, Parser)]
#[command(name = "geocurrents", version, about = "Seeded experiments on Liouville currents, laminations and earthquakes")]
pub struct Cli {
    /// JSON experiment config; its `kind` must belong to the chosen subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also write `<experiment>_plot.csv` with the error series.
    #[arg(long, global = true)]
    pub plot_data: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed form, invariance, quadrature and inversion of box values.
    Liouville,
    /// Boundary values and structural checks of earthquake maps.
    QuakeEval,
    /// Scaled earthquake pullbacks converging to a lamination.
    Converge {
        #[arg(value_enum)]
        which: Option<ConvergeKind>,
    },
    /// Monotonicity, comparison and single-leaf bounds.
    Ineq {
        #[arg(value_enum)]
        which: Option<IneqKind>,
    },
    /// Cocycle identity, its failure for laminations, sup norms and the divergence dichotomy.
    Bonahon,
    /// Convergence after pushing forward by a circle map.
    Mcg,
    /// Sup-norm estimate of one current.
    Supnorm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConvergeKind {
    Theorem71,
    Lemma61,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IneqKind {
    Prop93,
    Lemma92,
    Lemma94,
}

impl Command {
    fn accepts(&self, spec: &ExperimentSpec) -> bool {
        use ExperimentSpec as E;
        matches!(
            (self, spec),
            (Command::Liouville, E::Liouville(_))
                | (Command::QuakeEval, E::QuakeEval(_))
                | (Command::Converge { which: None | Some(ConvergeKind::Theorem71) }, E::Theorem71(_))
                | (Command::Converge { which: None | Some(ConvergeKind::Lemma61) }, E::Lemma61(_))
                | (Command::Ineq { which: None | Some(IneqKind::Prop93) }, E::Prop93(_))
                | (Command::Ineq { which: None | Some(IneqKind::Lemma92) }, E::Lemma92(_))
                | (Command::Ineq { which: None | Some(IneqKind::Lemma94) }, E::Lemma94(_))
                | (Command::Bonahon, E::Bonahon(_))
                | (Command::Mcg, E::Mcg(_))
                | (Command::Supnorm, E::Supnorm(_))
        )
    }

    fn defaults(&self) -> Vec<ExperimentSpec> {
        crate::default_suite().into_iter().filter(|s| self.accepts(s)).collect()
    }
}

/// Experiments to run, their seed, and the directory relative lamination paths resolve against.
fn plan(cli: &Cli) -> Result<(Vec<ExperimentSpec>, u64, PathBuf)> {
    match &cli.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if !cli.command.accepts(&cfg.spec) {
                bail!("config kind `{}` does not belong to this subcommand", cfg.spec.name());
            }
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((vec![cfg.spec], cli.seed.or(cfg.seed).unwrap_or(0), base))
        }
        None => Ok((cli.command.defaults(), cli.seed.unwrap_or(0), PathBuf::from("."))),
    }
}

fn execute(cli: &Cli, specs: &[ExperimentSpec], seed: u64, base: &Path) -> Result<bool> {
    let mut all_pass = true;
    for spec in specs {
        let report = drivers::run(spec, seed, base).with_context(|| format!("running {}", spec.name()))?;
        report.write(&cli.out, cli.plot_data)?;
        for w in &report.warnings {
            eprintln!("warning [{}]: {w}", report.experiment);
        }
        for v in &report.verdicts {
            println!(
                "{} {}: {} (measured {:.3e}, threshold {:.3e})",
                if v.pass { "PASS" } else { "FAIL" },
                report.experiment,
                v.claim,
                v.measured,
                v.threshold
            );
        }
        all_pass &= report.passed();
    }
    Ok(all_pass)
}

/// Parses `args` and runs; returns the process exit code (0 pass, 1 a verdict failed, 2 bad input or error).
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (specs, seed, base) = match plan(&cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli, &specs, seed, &base)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
