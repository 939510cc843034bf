//! `qudit-tomo`: command-line front end for simulation and reconstruction.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qudit_tomography::bases::{build_tomography_set, load_paper_bases_d6, TomographySet, DEFAULT_TRIALS};
use qudit_tomography::experiments::{
    acquire, compare_report, reproduce, BasesSource, ExperimentConfig, ExperimentReport, ReproductionReport, Scheme,
    Target, DEFAULT_ENSEMBLE_SAMPLES,
};
use qudit_tomography::io::{self, StateFile, TableSidecar};
use qudit_tomography::optics::{render_pattern, OpticalConfig};
use qudit_tomography::tomography::{linear_inversion, reconstruct};
use qudit_tomography::{Error, Result};

#[derive(Parser)]
#[command(name = "qudit-tomo", version, about = "Multiplexed tomography of spatial photonic qudits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a well-conditioned informationally complete basis set.
    GenBases {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a bundled basis set.
    Bases {
        /// The published d = 6 set.
        #[arg(long, required = true)]
        paper_d6: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the measured probability table of a state.
    Simulate {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Photons per setting; omit for noiseless probabilities.
        #[arg(long)]
        photons: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Multiplexed)]
        scheme: SchemeArg,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        optics: OpticsArgs,
    },
    /// Reconstruct a density matrix from a probability table.
    Reconstruct {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the interference pattern of a state behind the seed mask of basis J.
    Pattern {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        basis: usize,
        #[arg(long, default_value_t = 32)]
        samples_per_period: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        optics: OpticsArgs,
    },
    /// Monte Carlo reproduction of the d = 6 experiment.
    ReproducePaper {
        /// Targets to run (repeatable); all three when omitted.
        #[arg(long = "state", value_enum)]
        states: Vec<PaperState>,
        #[arg(long, default_value_t = 100_000)]
        photons: u64,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random-phase masks averaged per run for rho3.
        #[arg(long, default_value_t = DEFAULT_ENSEMBLE_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = SchemeArg::Multiplexed)]
        scheme: SchemeArg,
        /// Report JSON path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        optics: OpticsArgs,
    },
    /// Compare a multiplexed and a traditional report.
    Compare {
        #[arg(long)]
        multiplexed: PathBuf,
        #[arg(long)]
        traditional: PathBuf,
    },
}

#[derive(Args)]
struct OpticsArgs {
    /// Slit width in metres.
    #[arg(long, default_value_t = 50e-6)]
    slit_width: f64,
    /// Slit separation in metres.
    #[arg(long, default_value_t = 100e-6)]
    slit_separation: f64,
    #[arg(long, default_value_t = 0.15)]
    focal_length: f64,
    #[arg(long, default_value_t = 405e-9)]
    wavelength: f64,
}

impl OpticsArgs {
    fn config(&self, dim: usize) -> Result<OpticalConfig> {
        OpticalConfig::new(self.slit_width, self.slit_separation, self.focal_length, self.wavelength, dim)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Multiplexed,
    Traditional,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Multiplexed => Scheme::Multiplexed,
            SchemeArg::Traditional => Scheme::Traditional,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PaperState {
    Psi1,
    Psi2,
    Rho3,
}

fn read_set(path: &Path) -> Result<TomographySet> {
    TomographySet::from_json(&fs::read_to_string(path)?)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn target_from_file(file: StateFile) -> Target {
    match file {
        StateFile::Pure(state) => Target::Pure { label: "state".into(), state },
        StateFile::Mixed(rho) => Target::Density { label: "state".into(), rho },
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenBases { dim, trials, seed, out } => {
            let set = build_tomography_set(dim, trials, seed)?;
            fs::write(&out, set.to_json() + "\n")?;
            println!("d = {dim}: best condition number {:.6} over {trials} trials", set.condition_number());
        }
        Command::Bases { paper_d6: _, out } => {
            let set = load_paper_bases_d6();
            fs::write(&out, set.to_json() + "\n")?;
            println!("d = 6 published set: condition number {:.6}", set.condition_number());
        }
        Command::Simulate { set, state, photons, seed, scheme, out, optics } => {
            let set = read_set(&set)?;
            let target = target_from_file(StateFile::read(&state)?);
            let mut config = ExperimentConfig::new(set.dim(), photons, 1, seed);
            config.optical = optics.config(set.dim())?;
            config.bases_source = BasesSource::Generated { trials: 1 };
            let acq = acquire(&config, &set, &target, scheme.into(), 0)?;
            let sidecar = TableSidecar {
                dim: set.dim(),
                settings: acq.measured.settings,
                set_hash: set.content_hash(),
                photons_per_setting: photons,
                counts: acq.measured.counts.clone(),
            };
            io::write_table(&out, &acq.measured, &sidecar)?;
            println!("wrote {} ({} settings)", out.display(), acq.measured.settings);
        }
        Command::Reconstruct { set, table, out } => {
            let set = read_set(&set)?;
            let (table, sidecar) = io::read_table(&table)?;
            if let Some(s) = &sidecar {
                if s.set_hash != set.content_hash() {
                    return Err(Error::InvalidArgument("table was produced with a different basis set".into()));
                }
            }
            let estimate = linear_inversion(&table, &set)?;
            let rho = reconstruct(&table, &set)?;
            write_json(&out, &rho)?;
            println!("wrote {} (least-squares residual {:.3e})", out.display(), estimate.residual_norm);
        }
        Command::Pattern { set, state, basis, samples_per_period, out, optics } => {
            let set = read_set(&set)?;
            let file = StateFile::read(&state)?;
            let b = set
                .basis(basis)
                .ok_or_else(|| Error::InvalidArgument(format!("basis {basis} not in set")))?;
            let seed = b.seed.as_ref().ok_or_else(|| {
                Error::InvalidArgument("the canonical basis has no multiplexing mask".into())
            })?;
            let pattern = render_pattern(&optics.config(set.dim())?, file.prepared(), seed, samples_per_period)?;
            io::write_pattern(&out, &pattern, basis)?;
            println!("wrote {} ({} points)", out.display(), pattern.x_grid.len());
        }
        Command::ReproducePaper { states, photons, runs, seed, samples, scheme, out, optics } => {
            let states = if states.is_empty() { vec![PaperState::Psi1, PaperState::Psi2, PaperState::Rho3] } else { states };
            let mut targets = Vec::new();
            for s in states {
                targets.push(match s {
                    PaperState::Psi1 => Target::psi1(6)?,
                    PaperState::Psi2 => Target::psi2(),
                    PaperState::Rho3 => Target::Rho3Ensemble,
                });
            }
            let mut config = ExperimentConfig::new(6, Some(photons), runs, seed);
            config.ensemble_samples = samples;
            config.optical = optics.config(6)?;
            let report = reproduce(&config, &targets, scheme.into())?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            match out {
                Some(path) => {
                    fs::write(&path, json)?;
                    print!("{report}");
                }
                None => {
                    eprint!("{report}");
                    print!("{json}");
                }
            }
        }
        Command::Compare { multiplexed, traditional } => {
            let a = load_reports(&multiplexed)?;
            let b = load_reports(&traditional)?;
            let mut matched = 0;
            for (label, ra, mean_a) in &a {
                if let Some((_, rb, mean_b)) = b.iter().find(|(l, _, _)| l == label) {
                    matched += 1;
                    println!("== {label}");
                    println!("{}", compare_report(ra, rb)?);
                    if let (Some(ma), Some(mb)) = (mean_a, mean_b) {
                        println!("{:<18} {:>22.6} {:>22.6} {:>12.2e}", "mean fidelity", ma, mb, mb - ma);
                    }
                }
            }
            if matched == 0 {
                return Err(Error::InvalidArgument("the reports share no state labels".into()));
            }
        }
    }
    Ok(())
}

/// `(label, representative report, mean fidelity)` from either a
/// reproduction report or a single experiment report.
fn load_reports(path: &Path) -> Result<Vec<(String, ExperimentReport, Option<f64>)>> {
    let text = fs::read_to_string(path)?;
    if let Ok(r) = serde_json::from_str::<ReproductionReport>(&text) {
        return Ok(r.states.into_iter().map(|s| (s.label, s.first_run, Some(s.mean_fidelity))).collect());
    }
    let single: ExperimentReport = serde_json::from_str(&text)?;
    Ok(vec![(single.label.clone(), single, None)])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
