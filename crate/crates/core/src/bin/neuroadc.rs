use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use neuroadc::config::{self, ExperimentConfig, RAMP_TARGET_RATE};
use neuroadc::engine::{calibrate_charge_gain, run};
use neuroadc::error::{Error, Result};
use neuroadc::io;
use neuroadc::recon::{decoherence_metrics, monte_carlo, ramp_round_trip, reconstruct};
use neuroadc::stimulus::Waveform;

#[derive(Parser)]
#[command(
    name = "neuroadc",
    version,
    about = "Scanned spiking-neuron ADC simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the array and write spikes.csv (and membrane.csv).
    Simulate(Common),
    /// Low-pass reconstruction; writes reconstruction.csv and prints the RMS error.
    Reconstruct(Common),
    /// Learn a compensation table from a sawtooth run; writes compensation.csv.
    Compensate(Common),
    /// Find the charge gain that yields a target aggregate spike rate.
    CalibrateGain {
        #[command(flatten)]
        common: Common,
        /// Target aggregate rate, spikes per second.
        #[arg(long, default_value_t = RAMP_TARGET_RATE)]
        target: f64,
    },
    /// Repeat the reconstruction with fresh mismatch; writes montecarlo.csv.
    Montecarlo(Common),
    /// Compare spike decoherence with inhibition on and off.
    Decohere(Common),
    /// Print the fully resolved configuration.
    DumpConfig(Common),
}

#[derive(Args)]
struct Common {
    /// paper-sine-50 or paper-ramp-10. Defaults apply when neither this nor --config is given.
    #[arg(long)]
    preset: Option<String>,
    /// Config file; applied on top of --preset if both are given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run seed [default: from config, 0 for presets].
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trial count.
    #[arg(long, default_value_t = 30)]
    trials: usize,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Counting window in scan steps [default: one sweep].
    #[arg(long)]
    window: Option<u64>,
    /// Low-pass coefficient.
    #[arg(long)]
    alpha: Option<f64>,
    /// Disable lateral inhibition.
    #[arg(long)]
    no_inhibition: bool,
    /// Replace the input with a constant current, amperes.
    #[arg(long, value_name = "AMPS")]
    constant: Option<f64>,
    /// Also write membrane.csv.
    #[arg(long)]
    record_membrane: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(p), None) => config::preset(p)?,
            (Some(p), Some(path)) => config::load(path, &config::preset(p)?)?,
            (None, Some(path)) => config::load(path, &ExperimentConfig::default())?,
            (None, None) => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.sim.seed = seed;
        }
        if let Some(w) = self.window {
            cfg.recon.window_steps = Some(w);
        }
        if let Some(a) = self.alpha {
            cfg.recon.alpha = a;
        }
        if self.no_inhibition {
            cfg.sim.policy.enabled = false;
        }
        if let Some(amps) = self.constant {
            cfg.sim.waveform = Waveform::Constant { amps };
            cfg.waveform_file = None;
        }
        if self.record_membrane {
            cfg.sim.record_membrane = true;
        }
        cfg.sim.validate()?;
        cfg.recon.validate()?;
        Ok(cfg)
    }

    fn out_file(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|source| Error::Io {
            path: self.out.clone(),
            source,
        })?;
        Ok(self.out.join(name))
    }
}

fn report(path: &Path) {
    eprintln!("wrote {}", path.display());
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(c) => {
            let cfg = c.resolve()?;
            let trace = run(&cfg.sim)?;
            let p = c.out_file("spikes.csv")?;
            io::write_spikes(&p, &trace)?;
            report(&p);
            if trace.membrane.is_some() {
                let p = c.out_file("membrane.csv")?;
                io::write_membrane(&p, &trace)?;
                report(&p);
            }
            println!(
                "spikes={} mean_rate_per_us={}",
                trace.spikes.len(),
                trace.mean_rate() * 1e-6
            );
        }
        Command::Reconstruct(c) => {
            let cfg = c.resolve()?;
            let r = reconstruct(&run(&cfg.sim)?, &cfg.recon)?;
            let p = c.out_file("reconstruction.csv")?;
            io::write_reconstruction(&p, &r)?;
            report(&p);
            println!(
                "rms_pct={} windows={} window_steps={}",
                r.rms_pct,
                r.counts.len(),
                r.window_steps
            );
        }
        Command::Compensate(c) => {
            let cfg = c.resolve()?;
            let rt = ramp_round_trip(&run(&cfg.sim)?, &cfg.recon)?;
            let p = c.out_file("compensation.csv")?;
            io::write_compensation(&p, &rt.table)?;
            report(&p);
            println!(
                "breakpoints={} count_scale={} fresh_max_abs_error={} fresh_monotone={}",
                rt.table.breakpoints.len(),
                rt.table.count_scale,
                rt.max_abs_error,
                rt.monotone
            );
        }
        Command::CalibrateGain { common, target } => {
            let cfg = common.resolve()?;
            let k = calibrate_charge_gain(target, &cfg.sim)?;
            println!("charge_gain={k:?}");
        }
        Command::Montecarlo(c) => {
            let cfg = c.resolve()?;
            let r = monte_carlo(&cfg.sim, &cfg.recon, c.trials)?;
            let p = c.out_file("montecarlo.csv")?;
            io::write_monte_carlo(&p, &r)?;
            report(&p);
            println!(
                "trials={} mean_pct={} std_pct={}",
                r.n_trials, r.mean_pct, r.std_pct
            );
        }
        Command::Decohere(c) => {
            let cfg = c.resolve()?;
            println!("inhibition,isi_cv,burst_fraction");
            for enabled in [true, false] {
                let mut sim = cfg.sim.clone();
                sim.policy.enabled = enabled;
                let d = decoherence_metrics(&run(&sim)?, sim.scan.scan_step_seconds)?;
                println!(
                    "{},{},{}",
                    if enabled { "on" } else { "off" },
                    d.isi_cv,
                    d.burst_fraction
                );
            }
        }
        Command::DumpConfig(c) => {
            print!("{}", config::render(&c.resolve()?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("neuroadc: {e}");
            ExitCode::FAILURE
        }
    }
}
