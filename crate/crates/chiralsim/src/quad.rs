//! Gauss-Hermite quadrature nodes and weights.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Nodes and weights of the n-point Gauss-Hermite rule for the weight
/// function e^{−x²} on (−∞, ∞).
///
/// Computed by the Golub-Welsch method: the nodes are the eigenvalues of the
/// symmetric tridiagonal Jacobi matrix of the Hermite recurrence and the
/// weights come from the first components of its eigenvectors. This stays
/// accurate for orders in the hundreds. Rules are cached per order since the
/// ensemble average requests the same order repeatedly.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let rule = compute_rule(n);
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![0.0], vec![SQRT_PI]);
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for j in 1..n {
        let b = (j as f64 / 2.0).sqrt();
        jacobi[(j - 1, j)] = b;
        jacobi[(j, j - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let first = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], SQRT_PI * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut nodes, mut weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    // enforce the exact ±pair symmetry of the rule
    for i in 0..n / 2 {
        let k = n - 1 - i;
        let x = (nodes[k] - nodes[i]) / 2.0;
        nodes[i] = -x;
        nodes[k] = x;
        let w = (weights[i] + weights[k]) / 2.0;
        weights[i] = w;
        weights[k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_nodes_match_reference() {
        let (x, w) = gauss_hermite(1);
        assert_eq!(x, vec![0.0]);
        assert_relative_eq!(w[0], SQRT_PI, max_relative = 1e-14);

        // 3-point rule: nodes 0, ±sqrt(3/2); weights 2√π/3, √π/6
        let (x, w) = gauss_hermite(3);
        assert_relative_eq!(x[0], -(1.5f64).sqrt(), max_relative = 1e-13);
        assert_eq!(x[1], 0.0);
        assert_relative_eq!(w[1], 2.0 * SQRT_PI / 3.0, max_relative = 1e-13);
        assert_relative_eq!(w[0], SQRT_PI / 6.0, max_relative = 1e-13);
    }

    #[test]
    fn moments_are_exact() {
        // ∫ e^{-x²} x^{2k} dx = √π (2k−1)!!/2^k, exact up to degree 2n−1
        for &n in &[5usize, 21, 101, 501] {
            let (x, w) = gauss_hermite(n);
            let m0: f64 = w.iter().sum();
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
            assert_relative_eq!(m0, SQRT_PI, max_relative = 1e-12);
            assert_relative_eq!(m2, SQRT_PI / 2.0, max_relative = 1e-11);
            assert_relative_eq!(m4, 3.0 * SQRT_PI / 4.0, max_relative = 1e-11);
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        for &n in &[41usize, 500, 501] {
            let (x, w) = gauss_hermite(n);
            assert!(x.windows(2).all(|p| p[1] > p[0]));
            for i in 0..n {
                assert_relative_eq!(x[i], -x[n - 1 - i], epsilon = 1e-12);
                assert_relative_eq!(w[i], w[n - 1 - i], max_relative = 1e-12);
            }
            if n % 2 == 1 {
                assert_eq!(x[n / 2], 0.0);
            }
            assert!(w.iter().all(|&wi| wi >= 0.0));
        }
    }

    #[test]
    fn gaussian_integral_of_smooth_function() {
        // E[cos(aX)] for X ~ N(0,1) is e^{-a²/2}
        let (x, w) = gauss_hermite(41);
        let a = 1.3;
        let sum: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| w * (a * std::f64::consts::SQRT_2 * x).cos())
            .sum();
        assert_relative_eq!(sum / SQRT_PI, (-a * a / 2.0f64).exp(), max_relative = 1e-12);
    }
}
