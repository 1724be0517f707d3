//! Directional transmission and reflection of the driven emitter.

use num_complex::Complex64;

use crate::bloch::bloch_steady_state;
use crate::config::DirectionalRates;
use crate::error::{Error, Result};
use crate::units::detuning_to_rate;

/// Power transmission, reflection, loss and coherent amplitude at one
/// detuning and drive strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterResult {
    /// Coherent transmission amplitude α_out/α_in.
    pub t_coherent: Complex64,
    /// Total power transmission (coherent plus incoherently forward-scattered).
    pub transmission: f64,
    /// Total power reflection.
    pub reflection: f64,
    /// Power lost to free space.
    pub loss: f64,
    /// Phase of the coherent transmission amplitude, rad.
    pub phase: f64,
}

/// Weak-drive (single-photon) transmission amplitude
/// t(Δ) = 1 − γ_f/(γ⊥ + iΔ/ħ).
pub fn weak_transmission_amplitude(delta_uev: f64, rates: &DirectionalRates) -> Complex64 {
    let delta = detuning_to_rate(delta_uev);
    Complex64::new(1.0, 0.0) - rates.gamma_f / Complex64::new(rates.gamma_perp, delta)
}

/// Weak-drive reflection amplitude r(Δ) = −sqrt(γ_f γ_b)/(γ⊥ + iΔ/ħ).
pub fn weak_reflection_amplitude(delta_uev: f64, rates: &DirectionalRates) -> Complex64 {
    let delta = detuning_to_rate(delta_uev);
    -Complex64::new((rates.gamma_f * rates.gamma_b).sqrt(), 0.0) / Complex64::new(rates.gamma_perp, delta)
}

/// Total power reflection in the weak-drive limit, including the incoherent
/// backward component.
fn weak_total_reflection(delta_uev: f64, rates: &DirectionalRates) -> f64 {
    let delta = detuning_to_rate(delta_uev);
    let denom = rates.gamma_perp * rates.gamma_perp + delta * delta;
    2.0 * rates.gamma_f * rates.gamma_b * rates.gamma_perp / (rates.gamma_total * denom)
}

/// Full transmission/reflection/loss balance at detuning `delta_uev` (μeV)
/// and Rabi frequency `omega` (ns⁻¹). The drive photon flux is implied by
/// Ω through Φ = (Ω/2)²/γ_f; `omega = 0` returns the weak-drive limit.
pub fn scatter(delta_uev: f64, omega: f64, rates: &DirectionalRates) -> Result<ScatterResult> {
    assert!(omega >= 0.0);
    if omega == 0.0 {
        let t = weak_transmission_amplitude(delta_uev, rates);
        let delta = detuning_to_rate(delta_uev);
        let denom = rates.gamma_perp * rates.gamma_perp + delta * delta;
        // limits of pop/Φ and |σ⁻|²/Φ as Ω → 0
        let pop_per_flux = 2.0 * rates.gamma_f * rates.gamma_perp / (rates.gamma_total * denom);
        let coh_per_flux = rates.gamma_f / denom;
        let transmission = t.norm_sqr() + rates.gamma_f * (pop_per_flux - coh_per_flux);
        let reflection = weak_total_reflection(delta_uev, rates);
        return Ok(ScatterResult {
            t_coherent: t,
            transmission,
            reflection,
            loss: rates.gamma_loss * pop_per_flux,
            phase: t.arg(),
        });
    }
    if rates.gamma_f == 0.0 {
        // no waveguide coupling in the drive direction, so no flux can
        // correspond to a finite Rabi frequency
        return Err(Error::DegenerateInput);
    }
    let flux = (omega / 2.0).powi(2) / rates.gamma_f;
    let state = bloch_steady_state(delta_uev, omega, rates);
    let alpha_in = flux.sqrt();
    let alpha_out = Complex64::new(alpha_in, 0.0) + rates.gamma_f.sqrt() * state.sigma_minus;
    let t_coherent = alpha_out / alpha_in;
    let incoherent_forward = rates.gamma_f * (state.population - state.sigma_minus.norm_sqr());
    let transmission = (alpha_out.norm_sqr() + incoherent_forward) / flux;
    let reflection = rates.gamma_b * state.population / flux;
    Ok(ScatterResult {
        t_coherent,
        transmission,
        reflection,
        loss: rates.gamma_loss * state.population / flux,
        phase: t_coherent.arg(),
    })
}

/// Amplitude-level series composition of the two Zeeman branches for the
/// weak-drive path: t(ω) = t₊(ω)·t₋(ω), r(ω) = r₊(ω) + r₋(ω).
pub fn compose_weak_amplitudes(
    t_plus: &[Complex64],
    t_minus: &[Complex64],
    r_plus: &[Complex64],
    r_minus: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let t = t_plus.iter().zip(t_minus).map(|(a, b)| a * b).collect();
    let r = r_plus.iter().zip(r_minus).map(|(a, b)| a + b).collect();
    (t, r)
}

/// Power-level composition for the saturating path: T = T₊·T₋, R = R₊ + R₋.
/// Valid when the Zeeman splitting is large compared to the linewidths.
pub fn compose_power(plus: &[ScatterResult], minus: &[ScatterResult]) -> (Vec<f64>, Vec<f64>) {
    let t = plus
        .iter()
        .zip(minus)
        .map(|(a, b)| a.transmission * b.transmission)
        .collect();
    let r = plus
        .iter()
        .zip(minus)
        .map(|(a, b)| a.reflection + b.reflection)
        .collect();
    (t, r)
}

/// True when the spectral-independence assumption behind the branch
/// composition is sound (splitting at least 10 homogeneous linewidths).
pub fn composition_assumption_holds(zeeman_splitting_uev: f64, gamma_perp: f64) -> bool {
    let fwhm_uev = 2.0 * gamma_perp * crate::units::HBAR_UEV_NS;
    zeeman_splitting_uev >= 10.0 * fwhm_uev
}

/// Maximum weak-drive phase shift and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    /// max over Δ of |arg t(Δ)|, rad.
    pub delta_phi: f64,
    /// Maximizing detuning, μeV.
    pub detuning_uev: f64,
    /// |t| at the maximizer.
    pub transmission_amplitude: f64,
}

/// Maximum phase shift imparted on a transmitted photon in the weak-drive
/// limit. For γ_f < γ⊥ the analytic stationary point Δ = ħ·sqrt((γ⊥−γ_f)γ⊥)
/// is used; for γ_f ≥ γ⊥ the phase reaches π at resonance.
pub fn max_phase_shift(rates: &DirectionalRates) -> PhaseShift {
    let gf = rates.gamma_f;
    let gp = rates.gamma_perp;
    if gf >= gp {
        return PhaseShift {
            delta_phi: std::f64::consts::PI,
            detuning_uev: 0.0,
            transmission_amplitude: weak_transmission_amplitude(0.0, rates).norm(),
        };
    }
    let delta_star = ((gp - gf) * gp).sqrt();
    let delta_uev = delta_star * crate::units::HBAR_UEV_NS;
    // refine on a bracketing grid in case of numerical edge cases
    let phase_at = |d_uev: f64| weak_transmission_amplitude(d_uev, rates).arg().abs();
    let refined = golden_section_max(phase_at, 0.5 * delta_uev, 2.0 * delta_uev.max(1e-9), 1e-6);
    let (best_d, best_phi) = if phase_at(delta_uev) >= refined.1 {
        (delta_uev, phase_at(delta_uev))
    } else {
        refined
    };
    PhaseShift {
        delta_phi: best_phi,
        detuning_uev: best_d,
        transmission_amplitude: weak_transmission_amplitude(best_d, rates).norm(),
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}
