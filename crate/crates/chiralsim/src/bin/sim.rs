//! Command-line front end: reproducible spectra, saturation curves, fits and
//! phase-shift reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use chiralsim::spectrum::write_atomic;
use chiralsim::{
    fano_contrast, fano_fit, max_phase_shift, simulate_saturation, simulate_spectrum, Direction,
    Error, FanoFit, ScenarioConfig, Spectrum,
};

#[derive(Parser)]
#[command(
    name = "sim",
    about = "Waveguide-emitter spectroscopy simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario configuration (JSON); defaults to the built-in reference
    /// parameter set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the drive direction from the config.
    #[arg(long, value_parser = parse_direction)]
    direction: Option<Direction>,
    /// Override the drive power in W.
    #[arg(long)]
    power: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for Monte-Carlo oracle modes; production quadrature output does
    /// not depend on it.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate transmission/reflection spectra and differential signals.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Dip depth of the strongly coupled branch versus drive power.
    Saturation {
        #[command(flatten)]
        common: CommonArgs,
        /// Lowest power of the logarithmic grid, W.
        #[arg(long, default_value_t = 1e-13)]
        power_start: f64,
        /// Highest power of the logarithmic grid, W.
        #[arg(long, default_value_t = 1e-6)]
        power_stop: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 61)]
        power_points: usize,
    },
    /// Fit Fano lineshapes to a spectrum CSV and report the branch contrast.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Input spectrum CSV.
        #[arg(long)]
        input: PathBuf,
        /// Fit window `lo,hi` in μeV; when absent, both Zeeman branches are
        /// fitted in ±40 μeV windows around their resonances.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
    /// Maximum weak-drive phase shift of the strongly coupled branch.
    Phase {
        #[command(flatten)]
        common: CommonArgs,
        /// Also scan the phase shift over β and the dephasing time.
        #[arg(long)]
        scan: bool,
    },
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    match s {
        "ltr" => Ok(Direction::LeftToRight),
        "rtl" => Ok(Direction::RightToLeft),
        other => Err(format!("unknown direction {other:?}, expected ltr or rtl")),
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected lo,hi".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("bad hi: {e}"))?;
    if !(hi > lo) {
        return Err(format!("window [{lo}, {hi}] is empty"));
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct OutputRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    scenario: ScenarioConfig,
    command: Vec<String>,
    outputs: Vec<OutputRecord>,
    wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn sha256_file(path: &Path) -> Result<String, Error> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn load_scenario(common: &CommonArgs) -> Result<ScenarioConfig, Error> {
    let mut scenario = match &common.config {
        Some(path) => ScenarioConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(direction) = common.direction {
        scenario.drive.direction = direction;
    }
    if let Some(power) = common.power {
        scenario.drive.power_in_waveguide = power;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn write_manifest(
    out: &Path,
    scenario: &ScenarioConfig,
    seed: Option<u64>,
    paths: &[PathBuf],
    started: Instant,
) -> Result<(), Error> {
    let outputs = paths
        .iter()
        .map(|p| {
            Ok(OutputRecord {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let manifest = RunManifest {
        scenario: scenario.clone(),
        command: std::env::args().collect(),
        outputs,
        wall_time_s: started.elapsed().as_secs_f64(),
        seed,
    };
    write_atomic(
        &out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )
}

fn cmd_spectrum(common: &CommonArgs) -> Result<(), Error> {
    let started = Instant::now();
    let scenario = load_scenario(common)?;
    let spectra = simulate_spectrum(&scenario)?;
    let out = &common.out;
    let files = [
        ("transmission.csv", &spectra.transmission),
        ("reflection.csv", &spectra.reflection),
        ("delta_t.csv", &spectra.delta_t),
        ("delta_r.csv", &spectra.delta_r),
    ];
    let mut written = Vec::new();
    for (name, spectrum) in files {
        let path = out.join(name);
        spectrum.write_csv(&path)?;
        written.push(path);
    }
    write_manifest(out, &scenario, common.seed, &written, started)?;
    println!("wrote {} spectra to {}", written.len(), out.display());
    Ok(())
}

fn cmd_saturation(
    common: &CommonArgs,
    power_start: f64,
    power_stop: f64,
    power_points: usize,
) -> Result<(), Error> {
    let started = Instant::now();
    if !(power_start > 0.0) || !(power_stop > power_start) || power_points < 2 {
        return Err(Error::Config(
            "saturation grid needs 0 < power-start < power-stop and at least 2 points".into(),
        ));
    }
    let scenario = load_scenario(common)?;
    let log_step = (power_stop / power_start).ln() / (power_points - 1) as f64;
    let powers: Vec<f64> = (0..power_points)
        .map(|i| power_start * (i as f64 * log_step).exp())
        .collect();
    let depths = simulate_saturation(&scenario, &powers)?;
    let mut body = String::from("power_W,dip_depth\n");
    for (p, d) in powers.iter().zip(&depths) {
        body.push_str(&format!("{p:.16e},{d:.16e}\n"));
    }
    let path = common.out.join("saturation.csv");
    write_atomic(&path, body.as_bytes())?;
    write_manifest(&common.out, &scenario, common.seed, &[path], started)?;
    println!(
        "plateau depth {:.4}, fully driven depth {:.4}",
        depths[0],
        depths[depths.len() - 1]
    );
    Ok(())
}

#[derive(Serialize)]
struct FitReportEntry {
    window: (f64, f64),
    fit: FanoFit,
    stderr: [f64; 5],
}

#[derive(Serialize)]
struct FitReport {
    input: String,
    fits: Vec<FitReportEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contrast: Option<f64>,
}

fn cmd_fit(common: &CommonArgs, input: &Path, window: Option<(f64, f64)>) -> Result<bool, Error> {
    let started = Instant::now();
    let scenario = load_scenario(common)?;
    let spectrum = Spectrum::read_csv(input)?;
    let windows: Vec<(f64, f64)> = match window {
        Some(w) => vec![w],
        None => {
            let half = scenario.emitter.zeeman_splitting / 2.0;
            vec![(half - 40.0, half + 40.0), (-half - 40.0, -half + 40.0)]
        }
    };
    let fits: Vec<FanoFit> = windows
        .iter()
        .map(|&w| fano_fit(&spectrum, w, None))
        .collect::<Result<_, _>>()?;
    let contrast = if fits.len() == 2 && fits.iter().all(|f| f.converged) {
        Some(fano_contrast(&fits[0], &fits[1])?)
    } else {
        None
    };
    let all_converged = fits.iter().all(|f| f.converged);
    let entries = windows
        .iter()
        .zip(&fits)
        .map(|(&w, f)| {
            let mut stderr = [0.0; 5];
            for (i, s) in stderr.iter_mut().enumerate() {
                *s = f.covariance[i][i].max(0.0).sqrt();
            }
            FitReportEntry { window: w, fit: f.clone(), stderr }
        })
        .collect();
    let report = FitReport {
        input: input.display().to_string(),
        fits: entries,
        contrast,
    };
    let path = common.out.join("fit_report.json");
    write_atomic(&path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    write_manifest(&common.out, &scenario, common.seed, &[path], started)?;
    for (w, f) in windows.iter().zip(&fits) {
        println!(
            "window [{:.1}, {:.1}]: A = {:.4e}, q = {:.3}, gamma = {:.3} ueV, omega0 = {:.3} ueV, \
             converged = {}",
            w.0, w.1, f.params.a, f.params.q, f.params.gamma, f.params.omega0, f.converged
        );
    }
    if let Some(c) = contrast {
        println!("contrast C = {c:.4}");
    }
    Ok(all_converged)
}

#[derive(Serialize)]
struct PhaseReport {
    delta_phi_rad: f64,
    maximizing_detuning_uev: f64,
    transmission_amplitude: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    scan: Vec<PhaseScanRow>,
}

#[derive(Serialize)]
struct PhaseScanRow {
    beta: f64,
    dephasing_tau_d: f64,
    delta_phi_rad: f64,
}

fn cmd_phase(common: &CommonArgs, scan: bool) -> Result<(), Error> {
    let started = Instant::now();
    let scenario = load_scenario(common)?;
    let emitter = &scenario.emitter;
    let direction = scenario.drive.direction;
    let rates = emitter.derive_rates(emitter.strong_branch_for(direction), direction)?;
    let shift = max_phase_shift(&rates);
    println!(
        "max phase shift {:.4} rad at detuning {:.3} ueV from the branch resonance \
         (|t| = {:.4} there)",
        shift.delta_phi, shift.detuning_uev, shift.transmission_amplitude
    );
    let mut rows = Vec::new();
    if scan {
        println!("beta  tau_d_ns  delta_phi_rad");
        for i in 0..=10 {
            let beta = 0.5 + 0.05 * i as f64;
            for tau_d in [0.4, 0.8, 1.6, 3.2] {
                let mut e = emitter.clone();
                e.beta = beta;
                e.dephasing_tau_d = tau_d;
                let r = e.derive_rates(e.strong_branch_for(direction), direction)?;
                let s = max_phase_shift(&r);
                println!("{beta:.2}  {tau_d:.1}  {:.4}", s.delta_phi);
                rows.push(PhaseScanRow {
                    beta,
                    dephasing_tau_d: tau_d,
                    delta_phi_rad: s.delta_phi,
                });
            }
        }
    }
    let report = PhaseReport {
        delta_phi_rad: shift.delta_phi,
        maximizing_detuning_uev: shift.detuning_uev,
        transmission_amplitude: shift.transmission_amplitude,
        scan: rows,
    };
    let path = common.out.join("phase.json");
    write_atomic(&path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    write_manifest(&common.out, &scenario, common.seed, &[path], started)?;
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 4,
        Error::FitNotConverged(_) | Error::UnconvergedInput => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    if let Ok(threads) = std::env::var("SIM_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SIM_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum { common } => cmd_spectrum(common),
        Command::Saturation { common, power_start, power_stop, power_points } => {
            cmd_saturation(common, *power_start, *power_stop, *power_points)
        }
        Command::Fit { common, input, window } => match cmd_fit(common, input, *window) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("error: one or more fits did not converge (report written)");
                return ExitCode::from(3);
            }
            Err(e) => Err(e),
        },
        Command::Phase { common, scan } => cmd_phase(common, *scan),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
