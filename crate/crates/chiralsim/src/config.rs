//! Physical parameters of the emitter, its environment and the drive, plus
//! the derivation of directional decay rates from laboratory quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{HBAR_UEV_NS, PURE_DEPHASING_WEIGHT};

/// Propagation direction of the resonant drive laser along the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "ltr")]
    LeftToRight,
    #[serde(rename = "rtl")]
    RightToLeft,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }
}

/// Zeeman branch of the exciton transition.
///
/// Convention: `SigmaPlus` is the high-energy component (detuning offset
/// +splitting/2), `SigmaMinus` the low-energy one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeemanBranch {
    SigmaPlus,
    SigmaMinus,
}

impl ZeemanBranch {
    pub fn other(self) -> Self {
        match self {
            ZeemanBranch::SigmaPlus => ZeemanBranch::SigmaMinus,
            ZeemanBranch::SigmaMinus => ZeemanBranch::SigmaPlus,
        }
    }
}

/// Which Zeeman branch is preferentially forward-coupled for left-to-right
/// drive. The spectral ordering is ambiguous in practice, so it is exposed as
/// configuration rather than hard-coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrongBranch {
    HighEnergy,
    LowEnergy,
}

/// Physical parameters of one emitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterConfig {
    /// Fraction of spontaneous emission captured by the waveguide mode.
    pub beta: f64,
    /// Forward fraction of the preferred branch for left-to-right drive.
    #[serde(rename = "beta_d_LR")]
    pub beta_d_lr: f64,
    /// Forward fraction of the preferred branch for right-to-left drive.
    #[serde(rename = "beta_d_RL")]
    pub beta_d_rl: f64,
    /// Radiative lifetime τ in ns.
    pub lifetime_tau: f64,
    /// Pure dephasing time τ_d in ns.
    pub dephasing_tau_d: f64,
    /// Transition center energy in eV.
    pub center_energy: f64,
    /// σ⁺/σ⁻ splitting in μeV.
    pub zeeman_splitting: f64,
    pub strong_branch: StrongBranch,
}

impl Default for EmitterConfig {
    /// Reference parameter set: β = 0.7, β_d = 0.95 (both directions),
    /// τ = 1 ns, τ_d = 0.8 ns, 1.3 eV center, 160 μeV splitting, the
    /// high-energy branch preferentially forward-coupled.
    fn default() -> Self {
        EmitterConfig {
            beta: 0.7,
            beta_d_lr: 0.95,
            beta_d_rl: 0.95,
            lifetime_tau: 1.0,
            dephasing_tau_d: 0.8,
            center_energy: 1.3,
            zeeman_splitting: 160.0,
            strong_branch: StrongBranch::HighEnergy,
        }
    }
}

impl EmitterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta = {} outside [0, 1]", self.beta)));
        }
        for (name, v) in [("beta_d_LR", self.beta_d_lr), ("beta_d_RL", self.beta_d_rl)] {
            if !(0.5..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "{name} = {v} outside [0.5, 1] (forward fraction of the preferred branch)"
                )));
            }
        }
        if !(self.lifetime_tau > 0.0) {
            return Err(Error::Config("lifetime_tau must be positive".into()));
        }
        if !(self.dephasing_tau_d > 0.0) {
            return Err(Error::Config("dephasing_tau_d must be positive".into()));
        }
        if !(self.center_energy > 0.0) {
            return Err(Error::Config("center_energy must be positive".into()));
        }
        if !(self.zeeman_splitting >= 0.0) {
            return Err(Error::Config("zeeman_splitting must be non-negative".into()));
        }
        Ok(())
    }

    /// Detuning of a branch resonance from the center energy, in μeV.
    pub fn branch_offset(&self, branch: ZeemanBranch) -> f64 {
        match branch {
            ZeemanBranch::SigmaPlus => self.zeeman_splitting / 2.0,
            ZeemanBranch::SigmaMinus => -self.zeeman_splitting / 2.0,
        }
    }

    /// The branch that is preferentially co-propagating with the given drive.
    pub fn strong_branch_for(&self, direction: Direction) -> ZeemanBranch {
        let strong_ltr = match self.strong_branch {
            StrongBranch::HighEnergy => ZeemanBranch::SigmaPlus,
            StrongBranch::LowEnergy => ZeemanBranch::SigmaMinus,
        };
        match direction {
            Direction::LeftToRight => strong_ltr,
            Direction::RightToLeft => strong_ltr.other(),
        }
    }

    /// Transverse decay rate γ⊥ in ns⁻¹.
    pub fn gamma_perp(&self) -> f64 {
        0.5 / self.lifetime_tau + PURE_DEPHASING_WEIGHT / self.dephasing_tau_d
    }

    /// Partition the total decay rate of one transition into co-propagating,
    /// counter-propagating and free-space loss channels for the given drive
    /// direction.
    pub fn derive_rates(&self, branch: ZeemanBranch, direction: Direction) -> Result<DirectionalRates> {
        self.validate()?;
        let gamma_total = 1.0 / self.lifetime_tau;
        let beta_d = match direction {
            Direction::LeftToRight => self.beta_d_lr,
            Direction::RightToLeft => self.beta_d_rl,
        };
        let forward_fraction = if branch == self.strong_branch_for(direction) {
            beta_d
        } else {
            1.0 - beta_d
        };
        Ok(DirectionalRates {
            gamma_total,
            gamma_f: self.beta * forward_fraction * gamma_total,
            gamma_b: self.beta * (1.0 - forward_fraction) * gamma_total,
            gamma_loss: (1.0 - self.beta) * gamma_total,
            gamma_perp: self.gamma_perp(),
        })
    }
}

/// Decay-rate partition for one transition and one drive direction, ns⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalRates {
    /// Total decay rate Γ = 1/τ.
    pub gamma_total: f64,
    /// Decay into the co-propagating waveguide mode.
    pub gamma_f: f64,
    /// Decay into the counter-propagating mode.
    pub gamma_b: f64,
    /// Free-space loss.
    pub gamma_loss: f64,
    /// Transverse (coherence) decay rate γ⊥.
    pub gamma_perp: f64,
}

/// Spectral wandering, blinking and quadrature settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Standard deviation of the Gaussian center-frequency wandering, μeV.
    pub wandering_sigma: f64,
    /// Probability of the emitter being in a dark (non-interacting) state.
    pub p_dark: f64,
    /// Gauss-Hermite order for the wandering average; must be odd so the
    /// undisplaced center is a node.
    pub quadrature_order: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            wandering_sigma: 4.0,
            p_dark: 0.25,
            // The homogeneous line (~0.7 μeV HWHM) is much narrower than the
            // 4 μeV wandering; Gauss-Hermite needs a few hundred nodes to
            // resolve it to better than 1e-4.
            quadrature_order: 501,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.wandering_sigma >= 0.0) {
            return Err(Error::Config("wandering_sigma must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.p_dark) {
            return Err(Error::Config(format!("p_dark = {} outside [0, 1]", self.p_dark)));
        }
        if self.quadrature_order < 1 || self.quadrature_order % 2 == 0 {
            return Err(Error::Config(format!(
                "quadrature_order = {} must be odd and >= 1",
                self.quadrature_order
            )));
        }
        Ok(())
    }
}

/// Detuning grid specification: either explicit μeV values or a uniform range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit(Vec<f64>),
    Linear { start: f64, stop: f64, points: usize },
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<Vec<f64>> {
        let grid = match self {
            GridSpec::Explicit(v) => v.clone(),
            GridSpec::Linear { start, stop, points } => {
                if *points < 2 || stop <= start {
                    return Err(Error::Config("grid needs points >= 2 and stop > start".into()));
                }
                let step = (stop - start) / (*points - 1) as f64;
                (0..*points).map(|i| start + i as f64 * step).collect()
            }
        };
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("detuning grid must be strictly increasing".into()));
        }
        Ok(grid)
    }
}

/// Resonant laser drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub direction: Direction,
    /// Power inside the waveguide, W.
    pub power_in_waveguide: f64,
    /// Laser detunings relative to the center energy, μeV.
    pub laser_detuning_grid: GridSpec,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            direction: Direction::LeftToRight,
            power_in_waveguide: 1e-12,
            laser_detuning_grid: GridSpec::Linear { start: -110.0, stop: 110.0, points: 2201 },
        }
    }
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.power_in_waveguide >= 0.0) {
            return Err(Error::Config("power_in_waveguide must be non-negative".into()));
        }
        self.laser_detuning_grid.to_grid().map(|_| ())
    }
}

/// Weak Fabry-Pérot coupler environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Amplitude reflectivity of each out-coupler mirror.
    pub mirror_reflectivity: f64,
    /// Amplitude transmissivity of each mirror; r² + t² <= 1.
    pub mirror_transmissivity: f64,
    /// Round-trip phase at the center energy, rad.
    pub round_trip_phase_at_center: f64,
    /// Round-trip time in ns; sets the phase dispersion dθ/dω.
    pub round_trip_time: f64,
    /// One-way phase from the left mirror to the emitter, rad.
    pub emitter_position_phase: f64,
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.mirror_reflectivity) {
            return Err(Error::Config("mirror_reflectivity must lie in [0, 1)".into()));
        }
        let r2t2 = self.mirror_reflectivity.powi(2) + self.mirror_transmissivity.powi(2);
        if self.mirror_transmissivity < 0.0 || r2t2 > 1.0 + 1e-12 {
            return Err(Error::Config(format!("mirror r^2 + t^2 = {r2t2} exceeds 1")));
        }
        if !(self.round_trip_time >= 0.0) {
            return Err(Error::Config("round_trip_time must be non-negative".into()));
        }
        Ok(())
    }

    /// Round-trip phase at detuning Δ (μeV) from the center energy.
    pub fn round_trip_phase(&self, detuning_uev: f64) -> f64 {
        self.round_trip_phase_at_center + self.round_trip_time * detuning_uev / HBAR_UEV_NS
    }
}

/// Full scenario: everything a simulation run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ScenarioConfig {
    pub emitter: EmitterConfig,
    pub ensemble: EnsembleConfig,
    pub drive: DriveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityConfig>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.emitter.validate()?;
        self.ensemble.validate()?;
        self.drive.validate()?;
        if let Some(cavity) = &self.cavity {
            cavity.validate()?;
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let scenario: ScenarioConfig = serde_json::from_str(json)?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Hex SHA-256 digest of the canonical JSON form.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("scenario serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}
