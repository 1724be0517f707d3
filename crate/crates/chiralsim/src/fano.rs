//! Fano lineshape evaluation, Levenberg-Marquardt fitting and contrast
//! ratios.

use nalgebra::{DMatrix, DVector, Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Parameters of the Fano lineshape
/// y(ω) = y0 + A·(qΓ + ω − ω0)² / (Γ² + (ω − ω0)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoParams {
    /// Background level, signal units.
    pub y0: f64,
    /// Amplitude, signal units.
    pub a: f64,
    /// Asymmetry parameter, dimensionless.
    pub q: f64,
    /// Line broadening Γ, μeV.
    pub gamma: f64,
    /// Resonance position ω₀, μeV.
    pub omega0: f64,
}

impl FanoParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.y0, self.a, self.q, self.gamma, self.omega0];
        if !(self.gamma > 0.0) || all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("invalid Fano parameters {self:?}")));
        }
        Ok(())
    }

    fn to_vector(self) -> Vector5<f64> {
        Vector5::new(self.y0, self.a, self.q, self.gamma, self.omega0)
    }

    fn from_vector(v: &Vector5<f64>) -> Self {
        FanoParams { y0: v[0], a: v[1], q: v[2], gamma: v[3], omega0: v[4] }
    }
}

/// Map parameters to the canonical representative with |q| ≤ 1.
///
/// The lineshape is exactly invariant under
/// (q, A, y0) → (−1/q, −A·q², y0 + A·(1 + q²)), so every curve has two
/// parameterizations; fits report the one with |q| ≤ 1 to make results
/// deterministic and comparable.
fn canonicalize(p: FanoParams) -> FanoParams {
    if p.q.abs() > 1.0 {
        FanoParams {
            y0: p.y0 + p.a * (1.0 + p.q * p.q),
            a: -p.a * p.q * p.q,
            q: -1.0 / p.q,
            gamma: p.gamma,
            omega0: p.omega0,
        }
    } else {
        p
    }
}

/// Evaluate the Fano lineshape at `omega` (μeV).
pub fn fano_eval(params: &FanoParams, omega: f64) -> f64 {
    let x = omega - params.omega0;
    let u = params.q * params.gamma + x;
    params.y0 + params.a * u * u / (params.gamma * params.gamma + x * x)
}

fn residuals_and_jacobian(
    params: &FanoParams,
    omegas: &[f64],
    values: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = omegas.len();
    let mut res = DVector::zeros(n);
    let mut jac = DMatrix::zeros(n, 5);
    for (i, (&w, &y)) in omegas.iter().zip(values).enumerate() {
        let x = w - params.omega0;
        let u = params.q * params.gamma + x;
        let d = params.gamma * params.gamma + x * x;
        res[i] = params.y0 + params.a * u * u / d - y;
        jac[(i, 0)] = 1.0;
        jac[(i, 1)] = u * u / d;
        jac[(i, 2)] = 2.0 * params.a * u * params.gamma / d;
        jac[(i, 3)] = params.a * (2.0 * u * params.q * d - 2.0 * u * u * params.gamma) / (d * d);
        jac[(i, 4)] = params.a * (2.0 * u * u * x - 2.0 * u * d) / (d * d);
    }
    (res, jac)
}

/// A completed fit with residual diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FanoFit {
    pub params: FanoParams,
    /// Parameter covariance estimate, row-major 5x5
    /// (order y0, A, q, Γ, ω₀); zero matrix when not converged.
    pub covariance: [[f64; 5]; 5],
    /// Residual sum of squares.
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 500;

fn levenberg_marquardt(
    init: FanoParams,
    omegas: &[f64],
    values: &[f64],
) -> (FanoParams, f64, bool, usize) {
    let mut p = init.to_vector();
    let (mut res, mut jac) = residuals_and_jacobian(&FanoParams::from_vector(&p), omegas, values);
    let mut rss = res.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=MAX_ITERATIONS {
        iterations = iter;
        let jtj: Matrix5<f64> = (jac.transpose() * &jac).fixed_view::<5, 5>(0, 0).into_owned();
        let jtr = jac.transpose() * &res;
        let mut damped = jtj;
        for k in 0..5 {
            damped[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
        }
        let Some(step) = damped
            .lu()
            .solve(&Vector5::new(jtr[0], jtr[1], jtr[2], jtr[3], jtr[4]))
        else {
            lambda *= 10.0;
            continue;
        };
        let trial = p - step;
        let trial_params = FanoParams::from_vector(&trial);
        if !(trial_params.gamma > 0.0) || trial.iter().any(|v| !v.is_finite()) {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
            continue;
        }
        let (trial_res, trial_jac) = residuals_and_jacobian(&trial_params, omegas, values);
        let trial_rss = trial_res.norm_squared();
        if trial_rss <= rss {
            let rel_drop = (rss - trial_rss) / rss.max(1e-300);
            let step_small = step.norm() <= 1e-12 * (1.0 + p.norm());
            p = trial;
            res = trial_res;
            jac = trial_jac;
            rss = trial_rss;
            lambda = (lambda * 0.3).max(1e-12);
            if rel_drop < 1e-14 || step_small || rss < 1e-28 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                // stuck in a flat or hostile region; accept current point
                converged = rss.is_finite();
                break;
            }
        }
    }
    (FanoParams::from_vector(&p), rss, converged, iterations)
}

/// Initial guesses for one start: seed ω₀ at the extremal-derivative point,
/// Γ at a fifth of the window width, the background at the window edges.
fn seed(omegas: &[f64], values: &[f64], q: f64) -> FanoParams {
    let n = omegas.len();
    let edge = (n / 10).max(1);
    let baseline = values
        .iter()
        .take(edge)
        .chain(values.iter().skip(n - edge))
        .sum::<f64>()
        / (2 * edge) as f64;
    let mut omega0 = omegas[n / 2];
    let mut max_slope = -1.0;
    for i in 1..n {
        let slope = ((values[i] - values[i - 1]) / (omegas[i] - omegas[i - 1])).abs();
        if slope > max_slope {
            max_slope = slope;
            omega0 = 0.5 * (omegas[i] + omegas[i - 1]);
        }
    }
    let mut dev = 0.0f64;
    for (&_w, &y) in omegas.iter().zip(values) {
        if (y - baseline).abs() > dev.abs() {
            dev = y - baseline;
        }
    }
    let a = if dev < 0.0 { -dev } else { dev / (1.0 + q * q) };
    FanoParams {
        y0: baseline - a,
        a: if a == 0.0 { 1e-6 } else { a },
        q,
        gamma: (omegas[n - 1] - omegas[0]) / 5.0,
        omega0,
    }
}

/// Fit the Fano lineshape to the points of `spectrum` inside `window`
/// (inclusive detuning range, μeV). Without an initial guess, multi-starts
/// over q ∈ {−2, −0.5, 0, 0.5, 2} and returns the best-rss fit, reported in
/// the canonical |q| ≤ 1 parameterization.
pub fn fano_fit(spectrum: &Spectrum, window: (f64, f64), init: Option<FanoParams>) -> Result<FanoFit> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::Config(format!("degenerate fit window [{lo}, {hi}]")));
    }
    let idx = spectrum.window_indices(lo, hi);
    if idx.len() < 10 {
        return Err(Error::DegenerateWindow(idx.len()));
    }
    let omegas: Vec<f64> = idx.iter().map(|&i| spectrum.detunings()[i]).collect();
    let values: Vec<f64> = idx.iter().map(|&i| spectrum.values()[i]).collect();
    let starts: Vec<FanoParams> = match init {
        Some(p) => {
            p.validate()?;
            vec![p]
        }
        None => [-2.0, -0.5, 0.0, 0.5, 2.0]
            .iter()
            .map(|&q| seed(&omegas, &values, q))
            .collect(),
    };
    let mut best: Option<(FanoParams, f64, bool, usize)> = None;
    for start in starts {
        let run = levenberg_marquardt(start, &omegas, &values);
        let better = match &best {
            None => true,
            Some(b) => (run.2, -run.1) > (b.2, -b.1),
        };
        if better {
            best = Some(run);
        }
    }
    let (raw, rss, converged, iterations) = best.expect("at least one start");
    let mut params = canonicalize(raw);
    // A = 0 fits carry no asymmetry information; report q = 0 for stability
    if params.a == 0.0 {
        params.q = 0.0;
    }
    let covariance = if converged {
        let (res, jac) = residuals_and_jacobian(&params, &omegas, &values);
        let dof = (omegas.len() as f64 - 5.0).max(1.0);
        let variance = res.norm_squared() / dof;
        let jtj: Matrix5<f64> = (jac.transpose() * &jac).fixed_view::<5, 5>(0, 0).into_owned();
        match jtj.try_inverse() {
            Some(inv) => {
                let mut cov = [[0.0; 5]; 5];
                for (i, row) in cov.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = variance * inv[(i, j)];
                    }
                }
                cov
            }
            None => [[0.0; 5]; 5],
        }
    } else {
        [[0.0; 5]; 5]
    };
    Ok(FanoFit { params, covariance, rss, converged, iterations })
}

/// Amplitude contrast C = (A⁺ − A⁻)/(A⁺ + A⁻) between the fitted branches.
pub fn fano_contrast(fit_plus: &FanoFit, fit_minus: &FanoFit) -> Result<f64> {
    if !fit_plus.converged || !fit_minus.converged {
        return Err(Error::UnconvergedInput);
    }
    let sum = fit_plus.params.a + fit_minus.params.a;
    if sum == 0.0 {
        return Err(Error::UndefinedContrast);
    }
    let c = (fit_plus.params.a - fit_minus.params.a) / sum;
    if !(-1.0..=1.0).contains(&c) {
        log::warn!("fitted amplitudes have opposite signs; contrast {c} outside [-1, 1]");
    }
    Ok(c)
}

/// Intensity contrast C = (I⁺ − I⁻)/(I⁺ + I⁻).
pub fn pl_contrast(i_plus: f64, i_minus: f64) -> Result<f64> {
    if i_plus < 0.0 || i_minus < 0.0 {
        return Err(Error::Config("intensities must be non-negative".into()));
    }
    if i_plus + i_minus == 0.0 {
        return Err(Error::UndefinedContrast);
    }
    Ok((i_plus - i_minus) / (i_plus + i_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumMetadata;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synth(params: &FanoParams, lo: f64, hi: f64, n: usize) -> Spectrum {
        let step = (hi - lo) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        let values = grid.iter().map(|&w| fano_eval(params, w)).collect();
        Spectrum::new(grid, values, SpectrumMetadata::default()).unwrap()
    }

    #[test]
    fn eval_reference_points() {
        let p = FanoParams { y0: 0.0, a: 1.0, q: 0.0, gamma: 2.0, omega0: 5.0 };
        assert_eq!(fano_eval(&p, 5.0), 0.0);
        let p = FanoParams { y0: 0.0, a: 1.0, q: 1.0, gamma: 2.0, omega0: 0.0 };
        assert_relative_eq!(fano_eval(&p, 2.0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(fano_eval(&p, 1e9), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn noiseless_recovery() {
        let truth = FanoParams { y0: 0.01, a: -0.03, q: 0.8, gamma: 3.0, omega0: -80.0 };
        let s = synth(&truth, -120.0, -40.0, 400);
        let fit = fano_fit(&s, (-120.0, -40.0), None).unwrap();
        assert!(fit.converged);
        assert!(fit.rss < 1e-10, "rss {}", fit.rss);
        assert_relative_eq!(fit.params.a, truth.a, max_relative = 1e-6);
        assert_relative_eq!(fit.params.q, truth.q, max_relative = 1e-6);
        assert_relative_eq!(fit.params.gamma, truth.gamma, max_relative = 1e-6);
        assert_relative_eq!(fit.params.omega0, truth.omega0, max_relative = 1e-6);
        assert_relative_eq!(fit.params.y0, truth.y0, max_relative = 1e-6);
    }

    #[test]
    fn noisy_recovery_within_five_percent() {
        let truth = FanoParams { y0: 0.01, a: -0.03, q: 0.8, gamma: 3.0, omega0: -80.0 };
        let clean = synth(&truth, -120.0, -40.0, 400);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy_values: Vec<f64> = clean
            .values()
            .iter()
            .map(|v| v + 0.05 * truth.a.abs() * (rng.gen::<f64>() - 0.5) * 2.0)
            .collect();
        let s = Spectrum::new(clean.detunings().to_vec(), noisy_values, SpectrumMetadata::default())
            .unwrap();
        let fit = fano_fit(&s, (-120.0, -40.0), None).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.params.a, truth.a, max_relative = 0.05);
        assert_relative_eq!(fit.params.gamma, truth.gamma, max_relative = 0.05);
        assert_relative_eq!(fit.params.omega0, truth.omega0, max_relative = 0.05);
    }

    #[test]
    fn symmetric_data_stays_symmetric() {
        // truth q = 0 with 2% noise: the fitter must not invent asymmetry
        let truth = FanoParams { y0: 1.0, a: -0.4, q: 0.0, gamma: 4.0, omega0: 0.0 };
        let clean = synth(&truth, -60.0, 60.0, 300);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noisy: Vec<f64> = clean
            .values()
            .iter()
            .map(|v| v + 0.02 * truth.a.abs() * (rng.gen::<f64>() - 0.5) * 2.0)
            .collect();
        let s =
            Spectrum::new(clean.detunings().to_vec(), noisy, SpectrumMetadata::default()).unwrap();
        let fit = fano_fit(&s, (-60.0, 60.0), None).unwrap();
        assert!(fit.converged);
        assert!(fit.params.q.abs() < 0.05, "spurious q = {}", fit.params.q);
    }

    #[test]
    fn twin_parameterization_is_the_same_curve() {
        // the exact degeneracy the fitter canonicalizes away
        let p = FanoParams { y0: 0.01, a: -0.03, q: 0.8, gamma: 3.0, omega0: -80.0 };
        let twin = FanoParams {
            y0: p.y0 + p.a * (1.0 + p.q * p.q),
            a: -p.a * p.q * p.q,
            q: -1.0 / p.q,
            gamma: p.gamma,
            omega0: p.omega0,
        };
        for &x in &[-95.0, -81.0, -80.0, -79.3, -60.0] {
            assert_relative_eq!(fano_eval(&p, x), fano_eval(&twin, x), max_relative = 1e-12);
        }
    }

    #[test]
    fn mirrored_lineshape_is_equivalent() {
        // q -> -q with ω − ω₀ -> −(ω − ω₀) leaves the lineshape unchanged
        let p = FanoParams { y0: 0.2, a: 0.7, q: 1.3, gamma: 2.5, omega0: 0.0 };
        let m = FanoParams { q: -p.q, ..p };
        for &x in &[-7.0, -1.0, 0.0, 0.4, 3.0] {
            assert_relative_eq!(fano_eval(&p, x), fano_eval(&m, -x), max_relative = 1e-13);
        }
    }

    #[test]
    fn window_too_small_is_rejected() {
        let truth = FanoParams { y0: 0.0, a: 1.0, q: 0.5, gamma: 3.0, omega0: 0.0 };
        let s = synth(&truth, -50.0, 50.0, 100);
        assert!(matches!(
            fano_fit(&s, (-2.0, 2.0), None),
            Err(Error::DegenerateWindow(_))
        ));
        assert!(fano_fit(&s, (5.0, 5.0), None).is_err());
    }

    #[test]
    fn contrast_identities() {
        let truth = FanoParams { y0: 0.0, a: 0.03, q: 0.5, gamma: 3.0, omega0: 0.0 };
        let s = synth(&truth, -50.0, 50.0, 200);
        let fit = fano_fit(&s, (-50.0, 50.0), None).unwrap();
        assert_eq!(fano_contrast(&fit, &fit).unwrap(), 0.0);
        let mut single_sided = fit.clone();
        single_sided.params.a = 0.0;
        assert_relative_eq!(fano_contrast(&fit, &single_sided).unwrap(), 1.0);
        let mut unconverged = fit.clone();
        unconverged.converged = false;
        assert!(matches!(
            fano_contrast(&fit, &unconverged),
            Err(Error::UnconvergedInput)
        ));
    }

    #[test]
    fn amplitude_ratio_contrast() {
        // amplitudes 12.2 : 1.07 give C close to 0.84
        let c = (12.2 - 1.07) / (12.2 + 1.07);
        assert_relative_eq!(c, 0.84, max_relative = 2e-3);
    }

    #[test]
    fn pl_contrast_identities() {
        assert_eq!(pl_contrast(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(pl_contrast(1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(pl_contrast(0.95, 0.05).unwrap(), 0.90, max_relative = 1e-12);
        // scale invariance
        assert_relative_eq!(
            pl_contrast(0.95 * 7.3, 0.05 * 7.3).unwrap(),
            pl_contrast(0.95, 0.05).unwrap(),
            max_relative = 1e-12
        );
        assert!(matches!(pl_contrast(0.0, 0.0), Err(Error::UndefinedContrast)));
        assert!(pl_contrast(-1.0, 1.0).is_err());
    }
}
