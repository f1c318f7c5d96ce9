use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::units::Units;

pub const OUT_ENV: &str = "OTKIT_OUT";

const AFTER_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (unknown subcommand or flag, bad flag value)
  3  configuration error (malformed or inconsistent config file)
  4  domain error (parameters outside the model's valid range)
  5  numerical error (runaway, divergence, fit not converged, singular system)
  6  input/output error (unreadable or malformed data file, unwritable output)

Every run writes its data files plus manifest.json into the output
directory (--out, or $OTKIT_OUT, or ./otkit-out).";

#[derive(Debug, Parser)]
#[command(name = "otkit", version, about = "Organic transistor device models and neuromorphic demos", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML configuration file (SI units); missing sections use defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", env = OUT_ENV, default_value = "otkit-out")]
    pub out: PathBuf,
    /// Seed for noise, data splits and growth jitter.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sweeps; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<NonZeroUsize>,
    /// Reject extra CSV columns and unsorted axes instead of warning.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Units of emitted CSV columns.
    #[arg(long, global = true, value_enum, default_value_t = Units::Si)]
    pub units: Units,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thin-film transistor curves and contact analysis.
    Tft {
        #[command(subcommand)]
        action: TftAction,
    },
    /// Self-heating of permeable-base transistors.
    Opbt {
        #[command(subcommand)]
        action: OpbtAction,
    },
    /// Electrochemical transistor currents and ion sensing.
    Oect {
        #[command(subcommand)]
        action: OectAction,
    },
    /// Impedance spectra, circuit fitting and ion classification.
    Impedance {
        #[command(subcommand)]
        action: ImpedanceAction,
    },
    /// Delayed-feedback reservoir.
    Reservoir {
        #[command(subcommand)]
        action: ReservoirAction,
    },
    /// Grown synaptic networks.
    Synapse {
        #[command(subcommand)]
        action: SynapseAction,
    },
    /// Re-run a previous invocation from its manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum TftAction {
    /// Transfer and output curves with transconductance.
    Iv,
    /// Contact resistance from a length series (length_m,r_tot_w_ohm_m).
    Tlm {
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum OpbtAction {
    /// Steady states under voltage drive, every root per voltage.
    Sweep,
    /// V(I) under current drive.
    Trace,
    /// Peak temperature under a pulse train.
    Pulsed,
}

#[derive(Debug, Subcommand)]
pub enum OectAction {
    /// Steady-state output curves.
    Iv,
    /// Drain current after a gate step.
    Transient,
    /// Turn-off voltage versus concentration.
    Sense,
}

#[derive(Debug, Subcommand)]
pub enum ImpedanceAction {
    /// Spectrum of the configured circuit, optionally with noise.
    Simulate,
    /// Fit the circuit to a spectrum (omega_rad_s,z_real_ohm,z_imag_ohm[,weight]).
    Fit {
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
    },
    /// Classify (V_TO, R_W*) pairs against per-species calibration curves.
    Classify {
        /// Directory of <species>.csv files (concentration_mol_l,v_to_v,r_w_star_ohm).
        #[arg(long, value_name = "DIR")]
        calibration: PathBuf,
        /// Query as V_TO:R_W* in V and Ω; repeatable.
        #[arg(long = "query", value_name = "V:OHM", required = true, value_parser = parse_query)]
        queries: Vec<(f64, f64)>,
    },
}

fn parse_query(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected V_TO:R_W*, got '{s}'"))?;
    let v: f64 = a.trim().parse().map_err(|_| format!("bad V_TO '{a}'"))?;
    let r: f64 = b.trim().parse().map_err(|_| format!("bad R_W* '{b}'"))?;
    Ok((v, r))
}

#[derive(Debug, Subcommand)]
pub enum ReservoirAction {
    /// Integrate the autonomous delay system; trajectory and box-counting dimension.
    Simulate,
    /// Bifurcation diagram of the adiabatic map over the gain.
    Bifurcation,
    /// Iris classification with a 120/30 split per seed.
    Iris {
        /// Iris CSV (sepal_length,sepal_width,petal_length,petal_width,species); bundled copy if omitted.
        #[arg(long, value_name = "CSV")]
        input: Option<PathBuf>,
        /// Number of splits, seeded from --seed upward.
        #[arg(long, default_value_t = 1)]
        splits: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum SynapseAction {
    /// Four-phase conditioning protocol.
    Pavlov,
    /// Train on one bitmap and score queries.
    Digits {
        /// Digit 0-9 or a 15-character 01 string (row-major 3x5).
        #[arg(long, default_value = "5")]
        trained: String,
        /// Queries as digits or bitmaps; defaults to every digit, every single flip and the inverse.
        #[arg(long = "query")]
        queries: Vec<String>,
    },
    /// Long-term retention versus reinforcement.
    Decay,
}
