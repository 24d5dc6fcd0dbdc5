//! Command-line interface.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polpath_core::experiment::{exact_counts, simulate, ExperimentConfig};
use polpath_core::qstate::{bell_pbs_state, maximally_mixed, pure_state, random_density};
use polpath_core::stokes::stokes;
use polpath_core::tomography::{reconstruct_counts, report};
use polpath_core::Complex64;

use crate::error::{CliError, Result};
use crate::fringe::{fringe_rows, to_csv};
use crate::io::{
    density_to_json, emit, read_counts, read_result, read_state, to_json_string, CountDataJson,
    MetricsJson, ResultJson, StokesJson,
};
use crate::selftest::{corrupted_reconstruct, Selftest};

#[derive(Debug, Parser)]
#[command(
    name = "polpath",
    version,
    about = "Single-photon polarization-path state tomography: simulate the bench, reconstruct the state",
    after_help = "All angles and phases are in radians. Phases also accept multiples of pi, e.g. pi/2 or 3pi/2."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a density matrix JSON file.
    GenState(GenStateArgs),
    /// Count photons on the simulated bench.
    Simulate(SimulateArgs),
    /// Estimate the density matrix from a count record.
    Reconstruct(ReconstructArgs),
    /// Tabulate output-arm Stokes parameters against the interferometer phase (CSV).
    Fringe(FringeArgs),
    /// Score a reconstruction against a reference state.
    Report(ReportArgs),
    /// Run the algebraic identity checks; exits nonzero if any fails.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    /// (|H,0⟩ + |V,1⟩)/√2
    Bell,
    /// |H,0⟩
    H0,
    /// I/4
    Mixed,
    /// Ginibre-random state of the given rank (needs --seed)
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct GenStateArgs {
    #[arg(long, value_enum)]
    pub kind: StateKind,
    #[arg(long, required_if_eq("kind", "random"))]
    pub seed: Option<u64>,
    /// Rank of a random state.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub rank: u8,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Density matrix JSON file.
    #[arg(long)]
    pub state: PathBuf,
    /// Total photon budget, split equally over the (setting, phase) runs.
    #[arg(long)]
    pub photons: u64,
    /// Interferometer phases in radians.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, default_value = "0,pi/2")]
    pub phases: Vec<f64>,
    /// Standard deviation of the wave-plate angle error, radians.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Required unless the run is --exact without jitter.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rounded expected counts instead of sampled ones.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Count record JSON file.
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub mle: Toggle,
    /// Reference state; fills in the metrics.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the estimated Stokes parameters here.
    #[arg(long)]
    pub stokes_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FringeArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Number of phases over [0, 2π).
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Reconstruction result JSON file.
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Swap in a broken reconstruction map (negative control).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Real number, or a rational multiple of pi such as `pi/2`, `-3pi/4`, `2*pi`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if let Ok(x) = t.parse::<f64>() {
        return if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("not a finite angle: {s}"))
        };
    }
    let bad = || format!("not an angle: {s:?} (use radians or forms like pi/2)");
    let pos = t.find("pi").ok_or_else(bad)?;
    let (coef, rest) = (&t[..pos], &t[pos + 2..]);
    let coef = coef.trim_end_matches('*');
    let numerator = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let denominator = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    let x = numerator * PI / denominator;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenState(a) => gen_state(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Fringe(a) => fringe_cmd(a),
        Command::Report(a) => report_cmd(a),
        Command::Selftest(a) => selftest_cmd(a),
    }
}

fn gen_state(a: GenStateArgs) -> Result<()> {
    let rho = match a.kind {
        StateKind::Bell => bell_pbs_state(),
        StateKind::H0 => {
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            pure_state([one, zero, zero, zero])?
        }
        StateKind::Mixed => maximally_mixed(),
        StateKind::Random => {
            let seed = a
                .seed
                .ok_or_else(|| CliError::Usage("--kind random needs --seed".into()))?;
            random_density(seed, a.rank as usize)?.into_validated()?
        }
    };
    emit(a.out.as_deref(), &to_json_string(&density_to_json(&rho)))
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let random = !a.exact || a.jitter != 0.0;
    let seed = match a.seed {
        Some(s) => s,
        None if random => {
            return Err(CliError::Usage(
                "--seed is required unless --exact is given without --jitter".into(),
            ))
        }
        None => 0,
    };
    let rho = read_state(&a.state)?;
    let cfg = ExperimentConfig::new(a.photons, seed)
        .with_phases(a.phases)
        .with_jitter(a.jitter);
    let data = if a.exact {
        exact_counts(&rho, &cfg)?
    } else {
        simulate(&rho, &cfg)?
    };
    emit(
        a.out.as_deref(),
        &to_json_string(&CountDataJson::from(&data)),
    )
}

fn reconstruct_cmd(a: ReconstructArgs) -> Result<()> {
    let data = read_counts(&a.counts)?;
    let reference = a.reference.as_deref().map(read_state).transpose()?;
    let (est, mut result) = reconstruct_counts(&data, a.mle == Toggle::On)?;
    if let Some(reference) = reference {
        result.metrics = Some(report(&reference, &result)?);
    }
    if let Some(path) = &a.stokes_out {
        emit(Some(path), &to_json_string(&StokesJson::from(&est.set)))?;
    }
    emit(
        a.out.as_deref(),
        &to_json_string(&ResultJson::from(&result)),
    )
}

fn fringe_cmd(a: FringeArgs) -> Result<()> {
    let rho = read_state(&a.state)?;
    let rows = fringe_rows(&stokes(&rho)?, a.points)?;
    emit(a.out.as_deref(), &to_csv(&rows))
}

fn report_cmd(a: ReportArgs) -> Result<()> {
    let result = read_result(&a.result)?;
    let reference = read_state(&a.reference)?;
    let metrics = report(&reference, &result)?;
    emit(
        a.out.as_deref(),
        &to_json_string(&MetricsJson::from(&metrics)),
    )
}

fn selftest_cmd(a: SelftestArgs) -> Result<()> {
    let mut harness = Selftest::new();
    if a.inject_fault {
        harness = harness.with_reconstruct(corrupted_reconstruct);
    }
    let checks = harness.run()?;
    for check in &checks {
        println!("{check}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::SelftestFailed {
            failed,
            total: checks.len(),
        });
    }
    println!("selftest: all {} checks passed", checks.len());
    Ok(())
}
