//! Steady state of the resonantly driven two-level system.

use num_complex::Complex64;

use crate::config::DirectionalRates;
use crate::units::detuning_to_rate;

/// Steady-state expectation values of the driven two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    /// ⟨σ⁻⟩, dimensionless.
    pub sigma_minus: Complex64,
    /// Excited-state population ⟨σ⁺σ⁻⟩ ∈ [0, 1/2].
    pub population: f64,
    /// ⟨σ_z⟩ ∈ [−1, 0].
    pub inversion: f64,
}

/// Closed-form steady state at laser detuning `delta_uev` (μeV) and Rabi
/// frequency `omega` (ns⁻¹).
///
/// The phase of ⟨σ⁻⟩ is fixed so that the weak-drive transmission amplitude
/// is t(Δ) = 1 − γ_f/(γ⊥ + iΔ/ħ).
pub fn bloch_steady_state(delta_uev: f64, omega: f64, rates: &DirectionalRates) -> BlochState {
    assert!(omega >= 0.0);
    let delta = detuning_to_rate(delta_uev);
    let gamma = rates.gamma_total;
    let gperp = rates.gamma_perp;
    let denom = gperp * gperp + delta * delta;
    let saturation_rate = omega * omega * gperp / denom;
    let inversion = -gamma / (gamma + saturation_rate);
    let population = saturation_rate / (2.0 * (gamma + saturation_rate));
    let sigma_minus = Complex64::new(omega / 2.0 * inversion, 0.0) / Complex64::new(gperp, delta);
    BlochState { sigma_minus, population, inversion }
}
