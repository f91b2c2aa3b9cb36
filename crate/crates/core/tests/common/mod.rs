//! Closed-form reference values shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// p-th derivative of the Gaussian autocorrelation `exp(−s²/2σ²)`.
pub fn soft_autocorrelation_derivative(p: usize, s: f64, sigma: f64) -> f64 {
    let t = s / sigma;
    let e = (-0.5 * t * t).exp();
    let poly = match p {
        0 => 1.0,
        1 => -t,
        2 => t * t - 1.0,
        3 => 3.0 * t - t * t * t,
        4 => t.powi(4) - 6.0 * t * t + 3.0,
        _ => panic!("order {p} not tabulated"),
    };
    poly * e / sigma.powi(p as i32)
}

/// p-th derivative of `sin t / t`, valid away from the origin.
pub fn sinc_derivative(p: usize, t: f64) -> f64 {
    assert!(t.abs() > 0.3, "closed form loses precision near zero");
    let (s, c) = t.sin_cos();
    match p {
        0 => s / t,
        1 => (t * c - s) / (t * t),
        2 => (-t * t * s - 2.0 * t * c + 2.0 * s) / t.powi(3),
        3 => (-t.powi(3) * c + 3.0 * t * t * s + 6.0 * t * c - 6.0 * s) / t.powi(4),
        4 => (t.powi(4) * s + 4.0 * t.powi(3) * c - 12.0 * t * t * s - 24.0 * t * c + 24.0 * s) / t.powi(5),
        _ => panic!("order {p} not tabulated"),
    }
}

/// p-th derivative of the sinc-model autocorrelation `sinc(√3 s/σ)`.
pub fn hard_autocorrelation_derivative(p: usize, s: f64, sigma: f64) -> f64 {
    let a = 3f64.sqrt() / sigma;
    a.powi(p as i32) * sinc_derivative(p, a * s)
}

/// `∫ u(x − a) v(x) dx` for the Gaussian model with σ = 1.
pub fn soft_mode_projection(a: f64) -> f64 {
    a * (-0.5 * a * a).exp()
}

pub fn log_space(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (start.ln() + (stop.ln() - start.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Samples from `N(0, C)` through a dense Cholesky factor.
pub fn cholesky_samples(cov: &DMatrix<f64>, n: usize, seed: u64) -> DMatrix<f64> {
    let m = cov.nrows();
    let l = cov.clone().cholesky().expect("covariance must be positive definite").unpack();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    (l * z).transpose()
}

/// Unbiased covariance of the rows of `x`.
pub fn row_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mean: DVector<f64> = x.row_mean().transpose();
    let mut centred = x.clone();
    for mut row in centred.row_iter_mut() {
        row -= mean.transpose();
    }
    centred.transpose() * centred / (n as f64 - 1.0)
}

/// Standard error of a sample covariance element for Gaussian data.
pub fn covariance_standard_error(cov: &DMatrix<f64>, i: usize, j: usize, n: usize) -> f64 {
    ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)] * cov[(i, j)]) / (n as f64 - 1.0)).sqrt()
}
