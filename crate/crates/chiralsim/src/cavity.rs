//! Weak Fabry-Pérot coupler environment composed with the emitter by
//! transfer matrices.

use num_complex::Complex64;

use crate::config::CavityConfig;
use crate::error::{Error, Result};

/// 2x2 complex transfer matrix mapping (a_in_left, b_out_left) to
/// (b_out_right, a_in_right).
type Transfer = [[Complex64; 2]; 2];

/// Transfer matrix of a two-port with scattering matrix
/// [[s11, s12], [s21, s22]].
fn s_to_transfer(s11: Complex64, s12: Complex64, s21: Complex64, s22: Complex64) -> Transfer {
    [
        [s21 - s11 * s22 / s12, s22 / s12],
        [-s11 / s12, Complex64::new(1.0, 0.0) / s12],
    ]
}

fn mat_mul(a: &Transfer, b: &Transfer) -> Transfer {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Mirror scattering matrix [[−r, t], [t, r]]: real, symmetric in
/// transmission, unitary when r² + t² = 1.
fn mirror_transfer(r: f64, t: f64) -> Transfer {
    let r = Complex64::new(r, 0.0);
    let t = Complex64::new(t, 0.0);
    s_to_transfer(-r, t, t, r)
}

/// Free propagation accumulating one-way phase φ.
fn propagation_transfer(phi: f64) -> Transfer {
    let zero = Complex64::new(0.0, 0.0);
    [
        [Complex64::from_polar(1.0, phi), zero],
        [zero, Complex64::from_polar(1.0, -phi)],
    ]
}

/// Transmission and reflection amplitudes of a composed transfer matrix for
/// drive incident from the left with nothing incoming from the right.
fn system_amplitudes(m: &Transfer) -> (Complex64, Complex64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let t = det / m[1][1];
    let r = -m[1][0] / m[1][1];
    (t, r)
}

fn compose_at(
    t_forward: Complex64,
    t_backward: Complex64,
    r_emitter: Complex64,
    cavity: &CavityConfig,
    detuning_uev: f64,
) -> (Complex64, Complex64) {
    let theta = cavity.round_trip_phase(detuning_uev);
    let phi1 = cavity.emitter_position_phase;
    let phi2 = theta / 2.0 - phi1;
    let mirror = mirror_transfer(cavity.mirror_reflectivity, cavity.mirror_transmissivity);
    // the chiral emitter is a non-reciprocal two-port: backward transmission
    // sees the swapped directional rates; reflection is the same from both
    // sides (amplitude −sqrt(γ_f γ_b)/(γ⊥ + iΔ))
    let emitter = s_to_transfer(r_emitter, t_backward, t_forward, r_emitter);
    let mut m = mirror;
    m = mat_mul(&propagation_transfer(phi1), &m);
    m = mat_mul(&emitter, &m);
    m = mat_mul(&propagation_transfer(phi2), &m);
    m = mat_mul(&mirror, &m);
    let (t, r) = system_amplitudes(&m);
    // reference the empty waveguide: remove the bare one-way propagation
    // phase from t and the to-emitter-and-back phase from r, so r_m = 0,
    // t_m = 1 reproduces the emitter amplitudes identically
    (
        t * Complex64::from_polar(1.0, -theta / 2.0),
        r * Complex64::from_polar(1.0, -2.0 * phi1),
    )
}

/// Compose the emitter's weak-drive amplitudes with the coupler cavity on a
/// detuning grid. `t_forward` is the transmission in the drive direction,
/// `t_backward` the transmission of counter-propagating light (they differ
/// for a chiral emitter). Rejects parameter sets whose composed transmission
/// exceeds unity (nonphysical mirrors).
pub fn fp_compose(
    t_forward: &[Complex64],
    t_backward: &[Complex64],
    r_emitter: &[Complex64],
    cavity: &CavityConfig,
    grid: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    cavity.validate()?;
    assert_eq!(t_forward.len(), grid.len());
    assert_eq!(t_backward.len(), grid.len());
    assert_eq!(r_emitter.len(), grid.len());
    let mut t_sys = Vec::with_capacity(grid.len());
    let mut r_sys = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (ts, rs) = compose_at(t_forward[i], t_backward[i], r_emitter[i], cavity, grid[i]);
        if ts.norm_sqr() > 1.0 + 1e-9 {
            return Err(Error::NonphysicalCavity(ts.norm_sqr()));
        }
        t_sys.push(ts);
        r_sys.push(rs);
    }
    Ok((t_sys, r_sys))
}

/// Amplitudes of the bare cavity (no emitter) on a grid; the dark baseline
/// when a coupler cavity is present.
pub fn bare_cavity_amplitudes(
    cavity: &CavityConfig,
    grid: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let one = vec![Complex64::new(1.0, 0.0); grid.len()];
    let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
    fp_compose(&one, &one, &zero, cavity, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Direction, EmitterConfig, ZeemanBranch};
    use crate::scatter::{weak_reflection_amplitude, weak_transmission_amplitude};
    use approx::assert_relative_eq;

    fn cavity(r: f64, theta0: f64) -> CavityConfig {
        CavityConfig {
            mirror_reflectivity: r,
            mirror_transmissivity: (1.0 - r * r).sqrt(),
            round_trip_phase_at_center: theta0,
            round_trip_time: 0.05,
            emitter_position_phase: 0.4,
        }
    }

    /// Forward/backward/reflection amplitudes of one emitter branch.
    fn emitter_amplitudes(
        emitter: &EmitterConfig,
        grid: &[f64],
    ) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
        let fwd = emitter
            .derive_rates(ZeemanBranch::SigmaPlus, Direction::LeftToRight)
            .unwrap();
        let bwd = emitter
            .derive_rates(ZeemanBranch::SigmaPlus, Direction::RightToLeft)
            .unwrap();
        (
            grid.iter().map(|&d| weak_transmission_amplitude(d, &fwd)).collect(),
            grid.iter().map(|&d| weak_transmission_amplitude(d, &bwd)).collect(),
            grid.iter().map(|&d| weak_reflection_amplitude(d, &fwd)).collect(),
        )
    }

    #[test]
    fn no_cavity_is_identity() {
        let cav = cavity(0.0, 1.3);
        let grid = [-5.0, 0.0, 2.0];
        let (tf, tb, r) = emitter_amplitudes(&EmitterConfig::default(), &grid);
        let (ts, rs) = fp_compose(&tf, &tb, &r, &cav, &grid).unwrap();
        for i in 0..grid.len() {
            assert!((ts[i] - tf[i]).norm() < 1e-12);
            assert!((rs[i] - r[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_lossless_cavity_on_fringe_transmits_fully() {
        // internal round-trip factor is −r²e^{iθ}, so the Airy maximum
        // sits at θ = π
        let cav = CavityConfig { round_trip_time: 0.0, ..cavity(0.6, std::f64::consts::PI) };
        let (t, _) = bare_cavity_amplitudes(&cav, &[0.0]).unwrap();
        assert_relative_eq!(t[0].norm_sqr(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn empty_cavity_matches_airy_formula() {
        let cav = cavity(0.45, 0.9);
        let grid = [-40.0, -3.0, 0.0, 11.0, 60.0];
        let (t, r) = bare_cavity_amplitudes(&cav, &grid).unwrap();
        for (i, &d) in grid.iter().enumerate() {
            let theta = cav.round_trip_phase(d);
            let rt = Complex64::from_polar(1.0, theta);
            let tm2 = Complex64::new(cav.mirror_transmissivity.powi(2), 0.0);
            let denom = Complex64::new(1.0, 0.0) + cav.mirror_reflectivity.powi(2) * rt;
            let airy_t = tm2 / denom;
            assert!((t[i] - airy_t).norm() < 1e-12, "t mismatch at {d}");
            assert_relative_eq!(
                t[i].norm_sqr() + r[i].norm_sqr(),
                1.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn far_detuned_emitter_leaves_airy_background() {
        let cav = cavity(0.3, 0.4);
        let grid = [800.0];
        let (tf, tb, r) = emitter_amplitudes(&EmitterConfig::default(), &grid);
        let (with_emitter, _) = fp_compose(&tf, &tb, &r, &cav, &grid).unwrap();
        let (bare, _) = bare_cavity_amplitudes(&cav, &grid).unwrap();
        assert!((with_emitter[0] - bare[0]).norm() < 5e-3);
    }

    #[test]
    fn lossless_chiral_emitter_in_lossless_cavity_is_unitary() {
        // β = 1, no pure dephasing: the emitter two-port is unitary, and so
        // is the whole composition
        let emitter = EmitterConfig {
            beta: 1.0,
            dephasing_tau_d: 1e12,
            ..EmitterConfig::default()
        };
        let cav = cavity(0.55, 2.2);
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.25 + 80.0).collect();
        let (tf, tb, r) = emitter_amplitudes(&emitter, &grid);
        let (t, rr) = fp_compose(&tf, &tb, &r, &cav, &grid).unwrap();
        for i in 0..grid.len() {
            assert_relative_eq!(
                t[i].norm_sqr() + rr[i].norm_sqr(),
                1.0,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn lossy_composition_is_subunitary() {
        let cav = cavity(0.5, 2.2);
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.5).collect();
        let (tf, tb, r) = emitter_amplitudes(&EmitterConfig::default(), &grid);
        let (t, rr) = fp_compose(&tf, &tb, &r, &cav, &grid).unwrap();
        for i in 0..grid.len() {
            assert!(t[i].norm_sqr() + rr[i].norm_sqr() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn rejects_nonphysical_mirrors() {
        let cav = CavityConfig {
            mirror_reflectivity: 0.8,
            mirror_transmissivity: 0.9,
            round_trip_phase_at_center: 0.0,
            round_trip_time: 0.0,
            emitter_position_phase: 0.0,
        };
        let grid = [0.0];
        let one = [Complex64::new(1.0, 0.0)];
        let zero = [Complex64::new(0.0, 0.0)];
        assert!(fp_compose(&one, &one, &zero, &cav, &grid).is_err());
    }
}
