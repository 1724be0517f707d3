//! Ensemble effects (spectral wandering, blinking) and the full simulation
//! pipeline producing transmission/reflection spectra and differential
//! signals.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cavity::{bare_cavity_amplitudes, fp_compose};
use crate::config::{ScenarioConfig, ZeemanBranch};
use crate::error::{Error, Result};
use crate::quad::gauss_hermite;
use crate::scatter::{
    compose_weak_amplitudes, composition_assumption_holds, scatter, weak_reflection_amplitude,
    weak_transmission_amplitude,
};
use crate::spectrum::{Spectrum, SpectrumKind, SpectrumMetadata};
use crate::units::{power_to_flux, rabi_from_flux};

/// Average `spectrum_fn` over a Gaussian center-frequency displacement with
/// standard deviation `sigma` (μeV) by Gauss-Hermite quadrature of the given
/// order. `spectrum_fn` maps a center offset to spectrum values; `sigma = 0`
/// is an exact pass-through.
pub fn wandering_average<F>(spectrum_fn: F, sigma: f64, order: usize) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    assert!(sigma >= 0.0);
    if sigma == 0.0 {
        return spectrum_fn(0.0);
    }
    let (nodes, weights) = gauss_hermite(order);
    let inv_sqrt_pi = std::f64::consts::FRAC_2_SQRT_PI / 2.0;
    nodes
        .par_iter()
        .zip(&weights)
        .map(|(&x, &w)| {
            let offset = std::f64::consts::SQRT_2 * sigma * x;
            let scale = w * inv_sqrt_pi;
            spectrum_fn(offset)
                .into_iter()
                .map(|v| scale * v)
                .collect::<Vec<f64>>()
        })
        .reduce_with(|mut acc, term| {
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            acc
        })
        .unwrap_or_default()
}

/// Mix the bright spectrum with the emitter-absent baseline:
/// (1 − p_dark)·bright + p_dark·dark.
pub fn apply_blinking(bright: &Spectrum, dark_baseline: &Spectrum, p_dark: f64) -> Result<Spectrum> {
    if !bright.same_grid(dark_baseline) {
        return Err(Error::GridMismatch);
    }
    if !(0.0..=1.0).contains(&p_dark) {
        return Err(Error::Config(format!("p_dark = {p_dark} outside [0, 1]")));
    }
    let values = bright
        .values()
        .iter()
        .zip(dark_baseline.values())
        .map(|(b, d)| (1.0 - p_dark) * b + p_dark * d)
        .collect();
    Spectrum::new(bright.detunings().to_vec(), values, bright.metadata.clone())
}

/// ΔT = (on − off)/off pointwise; `off` must be strictly positive.
pub fn differential_transmission(on: &Spectrum, off: &Spectrum) -> Result<Spectrum> {
    if !on.same_grid(off) {
        return Err(Error::GridMismatch);
    }
    let mut values = Vec::with_capacity(on.len());
    for (i, (a, b)) in on.values().iter().zip(off.values()).enumerate() {
        if *b <= 0.0 {
            return Err(Error::NonphysicalBaseline(i));
        }
        values.push((a - b) / b);
    }
    let metadata = SpectrumMetadata { kind: Some(SpectrumKind::DeltaT), ..on.metadata.clone() };
    Spectrum::new(on.detunings().to_vec(), values, metadata)
}

/// ΔR = (r_on − r_off)/t_off pointwise; the denominator is the transmitted
/// baseline, not the reflected one.
pub fn differential_reflectivity(
    r_on: &Spectrum,
    r_off: &Spectrum,
    t_off: &Spectrum,
) -> Result<Spectrum> {
    if !r_on.same_grid(r_off) || !r_on.same_grid(t_off) {
        return Err(Error::GridMismatch);
    }
    let mut values = Vec::with_capacity(r_on.len());
    for (i, ((a, b), t)) in r_on
        .values()
        .iter()
        .zip(r_off.values())
        .zip(t_off.values())
        .enumerate()
    {
        if *t <= 0.0 {
            return Err(Error::NonphysicalBaseline(i));
        }
        values.push((a - b) / t);
    }
    let metadata = SpectrumMetadata { kind: Some(SpectrumKind::DeltaR), ..r_on.metadata.clone() };
    Spectrum::new(r_on.detunings().to_vec(), values, metadata)
}

/// Output of the full pipeline for one direction and power.
#[derive(Debug, Clone)]
pub struct SimulatedSpectra {
    pub transmission: Spectrum,
    pub reflection: Spectrum,
    pub delta_t: Spectrum,
    pub delta_r: Spectrum,
}

/// Raw two-branch power response at one rigid center offset.
fn branch_power_response(
    scenario: &ScenarioConfig,
    grid: &[f64],
    flux: f64,
    center_offset: f64,
) -> (Vec<f64>, Vec<f64>) {
    let emitter = &scenario.emitter;
    let direction = scenario.drive.direction;
    let mut per_branch = Vec::with_capacity(2);
    for branch in [ZeemanBranch::SigmaPlus, ZeemanBranch::SigmaMinus] {
        let rates = emitter
            .derive_rates(branch, direction)
            .expect("validated emitter");
        let omega = rabi_from_flux(flux, rates.gamma_f);
        let resonance = emitter.branch_offset(branch) + center_offset;
        let results: Vec<_> = grid
            .iter()
            .map(|&d| scatter(d - resonance, omega, &rates).expect("omega consistent with rates"))
            .collect();
        per_branch.push(results);
    }
    let (minus, plus) = (per_branch.pop().unwrap(), per_branch.pop().unwrap());
    crate::scatter::compose_power(&plus, &minus)
}

/// Weak-drive amplitude response with optional cavity composition.
fn weak_amplitude_response(
    scenario: &ScenarioConfig,
    grid: &[f64],
    center_offset: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let emitter = &scenario.emitter;
    let direction = scenario.drive.direction;
    let mut ts = Vec::with_capacity(2);
    let mut ts_back = Vec::with_capacity(2);
    let mut rs = Vec::with_capacity(2);
    for branch in [ZeemanBranch::SigmaPlus, ZeemanBranch::SigmaMinus] {
        let rates = emitter.derive_rates(branch, direction)?;
        let back_rates = emitter.derive_rates(branch, direction.reversed())?;
        let resonance = emitter.branch_offset(branch) + center_offset;
        ts.push(
            grid.iter()
                .map(|&d| weak_transmission_amplitude(d - resonance, &rates))
                .collect::<Vec<_>>(),
        );
        ts_back.push(
            grid.iter()
                .map(|&d| weak_transmission_amplitude(d - resonance, &back_rates))
                .collect::<Vec<_>>(),
        );
        rs.push(
            grid.iter()
                .map(|&d| weak_reflection_amplitude(d - resonance, &rates))
                .collect::<Vec<_>>(),
        );
    }
    let (t, r) = compose_weak_amplitudes(&ts[0], &ts[1], &rs[0], &rs[1]);
    match &scenario.cavity {
        Some(cavity) => {
            let t_back: Vec<Complex64> = ts_back[0]
                .iter()
                .zip(&ts_back[1])
                .map(|(a, b)| a * b)
                .collect();
            fp_compose(&t, &t_back, &r, cavity, grid)
        }
        None => Ok((t, r)),
    }
}

/// Run the full pipeline: directional rates per branch, saturating (or, with
/// a cavity, linear) scattering, branch composition, wandering average,
/// blinking, differential signals.
pub fn simulate_spectrum(scenario: &ScenarioConfig) -> Result<SimulatedSpectra> {
    scenario.validate()?;
    let grid = scenario.drive.laser_detuning_grid.to_grid()?;
    let emitter = &scenario.emitter;
    let ensemble = &scenario.ensemble;
    let flux = power_to_flux(scenario.drive.power_in_waveguide, emitter.center_energy);
    if !composition_assumption_holds(emitter.zeeman_splitting, emitter.gamma_perp()) {
        log::warn!(
            "Zeeman splitting {} ueV is below 10 homogeneous linewidths; \
             branch composition degraded",
            emitter.zeeman_splitting
        );
    }

    let n = grid.len();
    let use_cavity = scenario.cavity.is_some();
    if use_cavity {
        let strong = emitter.derive_rates(
            emitter.strong_branch_for(scenario.drive.direction),
            scenario.drive.direction,
        )?;
        let omega = rabi_from_flux(flux, strong.gamma_f);
        if omega > 0.1 * strong.gamma_perp {
            log::warn!(
                "cavity composition is linear but the drive is saturating \
                 (Rabi {omega:.3} ns^-1); spectra ignore saturation"
            );
        }
    }

    // stacked [T..., R...] values at one rigid center offset
    let stacked = |offset: f64| -> Vec<f64> {
        let (t, r) = if use_cavity {
            let (ta, ra) = weak_amplitude_response(scenario, &grid, offset)
                .expect("validated cavity scenario");
            (
                ta.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>(),
                ra.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>(),
            )
        } else {
            branch_power_response(scenario, &grid, flux, offset)
        };
        let mut out = t;
        out.extend(r);
        out
    };
    let averaged = wandering_average(stacked, ensemble.wandering_sigma, ensemble.quadrature_order);
    let (t_bright, r_bright) = averaged.split_at(n);

    // emitter-absent baseline: bare waveguide, or the bare cavity fringe
    let (t_dark, r_dark): (Vec<f64>, Vec<f64>) = match &scenario.cavity {
        Some(cavity) => {
            let (t, r) = bare_cavity_amplitudes(cavity, &grid)?;
            (
                t.iter().map(|a| a.norm_sqr()).collect(),
                r.iter().map(|a| a.norm_sqr()).collect(),
            )
        }
        None => (vec![1.0; n], vec![0.0; n]),
    };

    let metadata = |kind| SpectrumMetadata {
        kind: Some(kind),
        direction: Some(scenario.drive.direction),
        power_w: Some(scenario.drive.power_in_waveguide),
        config_digest: Some(scenario.digest()),
    };
    let bright_t = Spectrum::new(grid.clone(), t_bright.to_vec(), metadata(SpectrumKind::Transmission))?;
    let bright_r = Spectrum::new(grid.clone(), r_bright.to_vec(), metadata(SpectrumKind::Reflection))?;
    let dark_t = Spectrum::new(grid.clone(), t_dark, metadata(SpectrumKind::Transmission))?;
    let dark_r = Spectrum::new(grid.clone(), r_dark, metadata(SpectrumKind::Reflection))?;

    let transmission = apply_blinking(&bright_t, &dark_t, ensemble.p_dark)?;
    let reflection = apply_blinking(&bright_r, &dark_r, ensemble.p_dark)?;
    let delta_t = differential_transmission(&transmission, &dark_t)?;
    let delta_r = differential_reflectivity(&reflection, &dark_r, &dark_t)?;
    Ok(SimulatedSpectra { transmission, reflection, delta_t, delta_r })
}

/// On-resonance |ΔT| of the strongly coupled branch for each power (W).
/// The cavity, if configured, is ignored here: saturation is a nonlinear
/// effect and the cavity composition is linear-only.
pub fn simulate_saturation(scenario: &ScenarioConfig, powers: &[f64]) -> Result<Vec<f64>> {
    scenario.validate()?;
    if powers.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Config("power grid must be strictly positive".into()));
    }
    if scenario.cavity.is_some() {
        log::warn!("cavity configuration ignored in saturation mode (linear-only composition)");
    }
    let emitter = &scenario.emitter;
    let ensemble = &scenario.ensemble;
    let direction = scenario.drive.direction;
    let strong = emitter.strong_branch_for(direction);
    let probe = emitter.branch_offset(strong);
    let grid = vec![probe];
    let mut bare = scenario.clone();
    bare.cavity = None;
    powers
        .par_iter()
        .map(|&power| {
            let flux = power_to_flux(power, emitter.center_energy);
            let on_resonance = wandering_average(
                |offset| branch_power_response(&bare, &grid, flux, offset).0,
                ensemble.wandering_sigma,
                ensemble.quadrature_order,
            )[0];
            let blinked = (1.0 - ensemble.p_dark) * on_resonance + ensemble.p_dark;
            Ok((1.0 - blinked).abs())
        })
        .collect()
}
