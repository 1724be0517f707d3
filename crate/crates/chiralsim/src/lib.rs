//! Simulator and spectroscopy toolkit for a chirally coupled two-level
//! emitter in a single-mode waveguide.
//!
//! The crate models a quantum emitter whose two Zeeman branches couple with
//! different strengths to the two propagation directions of a waveguide. It
//! computes steady-state transmission and reflection spectra (including
//! saturation at high drive power), maximum transmission phase shifts,
//! ensemble effects (spectral wandering, blinking), an optional weak
//! Fabry-Pérot coupler environment, and Fano-lineshape fitting with contrast
//! extraction.
//!
//! # Quick start
//!
//! ```
//! use chiralsim::{simulate_spectrum, ScenarioConfig};
//!
//! let scenario = ScenarioConfig::default();
//! let out = simulate_spectrum(&scenario).unwrap();
//! // two transmission dips, one per Zeeman branch
//! let deepest = out
//!     .delta_t
//!     .values()
//!     .iter()
//!     .cloned()
//!     .fold(f64::INFINITY, f64::min);
//! assert!(deepest < -0.01);
//! ```
//!
//! A walkthrough of the physics and the API lives in the `book/` directory
//! of the repository (`mdbook serve book`); its code snippets are compiled
//! as doc-tests.

pub mod bloch;
pub mod cavity;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod fano;
pub mod quad;
pub mod scatter;
pub mod spectrum;
pub mod units;

pub use bloch::{bloch_steady_state, BlochState};
pub use cavity::{bare_cavity_amplitudes, fp_compose};
pub use config::{
    CavityConfig, Direction, DirectionalRates, DriveConfig, EmitterConfig, EnsembleConfig,
    GridSpec, ScenarioConfig, StrongBranch, ZeemanBranch,
};
pub use ensemble::{
    apply_blinking, differential_reflectivity, differential_transmission, simulate_saturation,
    simulate_spectrum, wandering_average, SimulatedSpectra,
};
pub use error::{Error, Result};
pub use fano::{fano_contrast, fano_eval, fano_fit, pl_contrast, FanoFit, FanoParams};
pub use scatter::{
    max_phase_shift, scatter, weak_reflection_amplitude, weak_transmission_amplitude, PhaseShift,
    ScatterResult,
};
pub use spectrum::{Spectrum, SpectrumKind, SpectrumMetadata};

/// The book chapters double as doc-tests so the guide cannot drift from the
/// API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/units-and-parameters.md")]
    mod units_and_parameters {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/ensemble-effects.md")]
    mod ensemble_effects {}
    #[doc = include_str!("../../../book/src/fano-fitting.md")]
    mod fano_fitting {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
