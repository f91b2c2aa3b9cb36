//! Fisher information for the half-separation `d` and centroid `x_c` of a
//! binary source.
//!
//! Three independent routes are provided:
//!
//! * [`fisher_dense`] evaluates `F_jk = ½ Tr(C⁻¹ ∂_j C C⁻¹ ∂_k C)` on a finite
//!   pixel grid,
//! * [`fisher_decomposed`] works in the continuum limit and splits the
//!   information into the variance term `F⁽¹⁾`, the out-of-span eigenvector
//!   term `F⁽²⁾` and the in-span eigenvector term `F⁽³⁾`,
//! * closed-form approximations of the sub-Rayleigh parts.
//!
//! Matrices are indexed `(d, x_c)`; see [`Parameter::index`].

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix2};
use serde::{Deserialize, Serialize};

use crate::detector::{build_covariance, build_gamma, CovarianceModel, DetectorGrid};
use crate::error::{ensure, Error, Result};
use crate::optics::{eigenvalues_gamma, Aperture, BinaryEigenmodes, BinarySource, ModeSign, Parameter};

/// Default central-difference step, in units of σ.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FisherMethod {
    DenseNumeric,
    Decomposed,
    Approximation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherTerms {
    /// Change of the principal-component variances.
    pub first: Matrix2<f64>,
    /// Change of the eigenvectors out of their span.
    pub second: Matrix2<f64>,
    /// Rotation of the eigenvectors within their span.
    pub third: Matrix2<f64>,
}

impl FisherTerms {
    pub fn total(&self) -> Matrix2<f64> {
        self.first + self.second + self.third
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub matrix: Matrix2<f64>,
    pub terms: Option<FisherTerms>,
    pub method: FisherMethod,
}

impl FisherResult {
    pub fn get(&self, a: Parameter, b: Parameter) -> f64 {
        self.matrix[(a.index(), b.index())]
    }

    pub fn dd(&self) -> f64 {
        self.matrix[(0, 0)]
    }

    pub fn cc(&self) -> f64 {
        self.matrix[(1, 1)]
    }

    pub fn dc(&self) -> f64 {
        self.matrix[(0, 1)]
    }

    fn terms_or_nan(&self, pick: impl Fn(&FisherTerms) -> f64) -> f64 {
        self.terms.as_ref().map_or(f64::NAN, pick)
    }

    /// `F_d^(SR) = F⁽¹⁾_dd`.
    pub fn sub_rayleigh_d(&self) -> f64 {
        self.terms_or_nan(|t| t.first[(0, 0)])
    }

    /// `F_d^(R) = F⁽²⁾_dd`.
    pub fn rayleigh_d(&self) -> f64 {
        self.terms_or_nan(|t| t.second[(0, 0)])
    }

    /// `F_c^(SR) = F⁽³⁾_cc`.
    pub fn sub_rayleigh_c(&self) -> f64 {
        self.terms_or_nan(|t| t.third[(1, 1)])
    }

    /// `F_c^(R) = F⁽²⁾_cc`.
    pub fn rayleigh_c(&self) -> f64 {
        self.terms_or_nan(|t| t.second[(1, 1)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative {
    /// Closed-form derivatives of the low-rank factors of `Γ`.
    Analytic,
    /// Central differences of the dense covariance, step in length units.
    FiniteDiff { step: f64 },
}

/// Covariance of the binary-source quadratures on a fixed grid, as a function
/// of `θ = (d, x_c)`.
#[derive(Debug, Clone, Copy)]
pub struct BinaryImagingModel {
    pub aperture: Aperture,
    pub grid: DetectorGrid,
    pub snr: f64,
}

impl BinaryImagingModel {
    pub fn new(aperture: Aperture, grid: DetectorGrid, snr: f64) -> Result<Self> {
        ensure(snr.is_finite() && snr >= 0.0, || format!("SNR must be non-negative, got {snr}"))?;
        Ok(Self { aperture, grid, snr })
    }

    pub fn covariance(&self, source: &BinarySource) -> Result<CovarianceModel> {
        let gamma = build_gamma(&source.to_source_model(), &self.aperture, &self.grid);
        build_covariance(gamma, self.snr.max(f64::MIN_POSITIVE))
    }

    fn covariance_dense(&self, source: &BinarySource) -> DMatrix<f64> {
        let gamma = build_gamma(&source.to_source_model(), &self.aperture, &self.grid);
        let mut c = gamma.to_dense() * self.snr;
        for i in 0..c.nrows() {
            c[(i, i)] += 1.0;
        }
        c
    }

    /// Sampled `[u(x − x₁), u(x − x₂), u′(x − x₁), u′(x − x₂)]`, each scaled by `√Δx`.
    fn basis(&self, source: &BinarySource) -> [DVector<f64>; 4] {
        let (x1, x2) = source.positions();
        let ap = &self.aperture;
        [
            self.grid.sample(|x| ap.transfer(x - x1)),
            self.grid.sample(|x| ap.transfer(x - x2)),
            self.grid.sample(|x| ap.transfer_derivative(x - x1)),
            self.grid.sample(|x| ap.transfer_derivative(x - x2)),
        ]
    }

    /// `∂C/∂θ_j` as rank-one terms `coef · y_a y_bᵀ` over [`Self::basis`].
    fn gradient_terms(&self, parameter: Parameter) -> Vec<(f64, usize, usize)> {
        // ∂x₁/∂d = 1, ∂x₂/∂d = −1, ∂x_l/∂x_c = 1; ∂u(x − x_l) = −u′ ∂x_l
        let moves = match parameter {
            Parameter::HalfSeparation => [1.0, -1.0],
            Parameter::Centroid => [1.0, 1.0],
        };
        let mut terms = Vec::with_capacity(4);
        for (l, mv) in moves.iter().enumerate() {
            let coef = -self.snr * 0.5 * mv;
            terms.push((coef, 2 + l, l));
            terms.push((coef, l, 2 + l));
        }
        terms
    }

    /// Dense analytic `[∂C/∂d, ∂C/∂x_c]`.
    pub fn covariance_gradient(&self, source: &BinarySource) -> [DMatrix<f64>; 2] {
        let basis = self.basis(source);
        Parameter::ALL.map(|p| {
            let m = self.grid.pixel_count();
            let mut out = DMatrix::zeros(m, m);
            for (coef, a, b) in self.gradient_terms(p) {
                out.ger(coef, &basis[a], &basis[b], 1.0);
            }
            out
        })
    }

    /// Central-difference `[∂C/∂d, ∂C/∂x_c]`.
    pub fn covariance_gradient_fd(&self, source: &BinarySource, step: f64) -> Result<[DMatrix<f64>; 2]> {
        let d = source.half_separation;
        let xc = source.centroid;
        if !(step > 0.0) || !step.is_finite() || d - step <= 0.0 || d + step == d || xc + step == xc {
            return Err(Error::FiniteDifferenceStep { step });
        }
        let shifted = |dd: f64, dc: f64| -> Result<DMatrix<f64>> {
            Ok(self.covariance_dense(&BinarySource::new(d + dd, xc + dc)?))
        };
        let grad_d = (shifted(step, 0.0)? - shifted(-step, 0.0)?) / (2.0 * step);
        let grad_c = (shifted(0.0, step)? - shifted(0.0, -step)?) / (2.0 * step);
        Ok([grad_d, grad_c])
    }
}

fn factor(c: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(c).ok_or(Error::SingularCovariance)?;
    // every eigenvalue of S Γ + I is ≥ 1, so are the squared pivots
    let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if !(min_pivot > 1.0 - 1e-8) {
        return Err(Error::SingularCovariance);
    }
    Ok(chol)
}

/// Fisher information of the discretized model on `model.grid`.
///
/// The analytic route only needs `C⁻¹` applied to the four sampled
/// factor vectors; the finite-difference route forms dense `C⁻¹ ∂C` products
/// and is meant for small grids.
pub fn fisher_dense(model: &BinaryImagingModel, source: &BinarySource, derivative: Derivative) -> Result<FisherResult> {
    ensure(source.half_separation > 0.0, || "dense Fisher information requires d > 0".into())?;
    let chol = factor(model.covariance_dense(source))?;
    let mut matrix = Matrix2::zeros();
    match derivative {
        Derivative::Analytic => {
            let basis = model.basis(source);
            let mut y = DMatrix::zeros(model.grid.pixel_count(), 4);
            for (k, v) in basis.iter().enumerate() {
                y.set_column(k, v);
            }
            let gram = y.transpose() * chol.solve(&y);
            let terms = Parameter::ALL.map(|p| model.gradient_terms(p));
            for j in 0..2 {
                for k in j..2 {
                    let mut tr = 0.0;
                    for &(ca, a, b) in &terms[j] {
                        for &(cb, c, d) in &terms[k] {
                            // Tr(C⁻¹ y_a y_bᵀ C⁻¹ y_c y_dᵀ)
                            tr += ca * cb * gram[(b, c)] * gram[(d, a)];
                        }
                    }
                    matrix[(j, k)] = 0.5 * tr;
                    matrix[(k, j)] = 0.5 * tr;
                }
            }
        }
        Derivative::FiniteDiff { step } => {
            let grads = model.covariance_gradient_fd(source, step)?;
            let solved = grads.map(|g| chol.solve(&g));
            for j in 0..2 {
                for k in j..2 {
                    let tr = solved[j].component_mul(&solved[k].transpose()).sum();
                    matrix[(j, k)] = 0.5 * tr;
                    matrix[(k, j)] = 0.5 * tr;
                }
            }
        }
    }
    Ok(FisherResult {
        matrix,
        terms: None,
        method: FisherMethod::DenseNumeric,
    })
}

/// Continuum-limit Fisher information from the principal-component
/// decomposition, with the per-term breakdown.
pub fn fisher_decomposed(aperture: &Aperture, snr: f64, source: &BinarySource) -> Result<FisherResult> {
    ensure(snr.is_finite() && snr >= 0.0, || format!("SNR must be non-negative, got {snr}"))?;
    ensure(source.half_separation > 0.0, || "decomposed Fisher information requires d > 0".into())?;
    let modes = BinaryEigenmodes::new(aperture, source)?;
    let (g_plus, g_minus) = eigenvalues_gamma(modes.overlap);
    let signs = [ModeSign::Plus, ModeSign::Minus];
    let v = [snr * g_plus + 1.0, snr * g_minus + 1.0];
    // ∂V_± / ∂θ: only d moves the overlap
    let dv = [
        [0.5 * snr * modes.overlap_derivative, 0.0],
        [-0.5 * snr * modes.overlap_derivative, 0.0],
    ];

    // a[μ][j][k] = ⟨∂_j e_μ, ∂_k e_μ⟩, b[μ][j] = ⟨e_ν, ∂_j e_μ⟩ with ν ≠ μ
    let mut a = [[[0.0; 2]; 2]; 2];
    let mut b = [[0.0; 2]; 2];
    for (mu, &sign) in signs.iter().enumerate() {
        let other = modes.mode(signs[1 - mu]);
        for p in Parameter::ALL {
            let dp = modes.derivative(sign, p);
            b[mu][p.index()] = other.inner(dp, aperture)?;
            for q in Parameter::ALL {
                if q.index() < p.index() {
                    continue;
                }
                let val = dp.inner(modes.derivative(sign, q), aperture)?;
                a[mu][p.index()][q.index()] = val;
                a[mu][q.index()][p.index()] = val;
            }
        }
    }

    let mut first = Matrix2::zeros();
    let mut second = Matrix2::zeros();
    let mut third = Matrix2::zeros();
    for j in 0..2 {
        for k in 0..2 {
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            let mut f3 = 0.0;
            for mu in 0..2 {
                let nu = 1 - mu;
                f1 += 0.5 * dv[mu][j] * dv[mu][k] / (v[mu] * v[mu]);
                let excess = v[mu] - 1.0;
                f2 += excess * excess / v[mu] * (a[mu][j][k] - b[mu][j] * b[mu][k]);
                let pair = v[mu] * v[nu];
                f3 += (v[mu] - 1.0) * (v[nu] - 1.0) / pair * b[nu][j] * b[mu][k]
                    + excess * excess / pair * b[nu][j] * b[nu][k];
            }
            first[(j, k)] = f1;
            second[(j, k)] = f2;
            third[(j, k)] = f3;
        }
    }
    let terms = FisherTerms { first, second, third };
    Ok(FisherResult {
        matrix: terms.total(),
        terms: Some(terms),
        method: FisherMethod::Decomposed,
    })
}

/// `f(t) = 2t² / (1 + t²)²`, peaking at `t = 1` with `f(1) = ½`.
pub fn subrayleigh_profile(t: f64) -> f64 {
    let q = 1.0 + t * t;
    2.0 * t * t / (q * q)
}

/// `F_d^(SR) ≈ (S/σ²) f(√S d/σ)`.
pub fn fisher_d_subrayleigh_approx(snr: f64, d: f64, sigma: f64) -> f64 {
    snr / (sigma * sigma) * subrayleigh_profile(snr.sqrt() * d / sigma)
}

/// `F_c^(SR) ≈ (S/σ²) (1 + 1/S)⁻¹ (1 + S d²/σ²)⁻¹`.
pub fn fisher_c_subrayleigh_approx(snr: f64, d: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    snr / s2 / (1.0 + 1.0 / snr) / (1.0 + snr * d * d / s2)
}

/// `F ≈ coefficient · dᵉˣᵖᵒⁿᵉⁿᵗ` up to a model-dependent factor of order one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub exponent: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotes {
    /// Large-`d` limit of both `F_d^(R)` and `F_c^(R)`: `S / (σ² (1 + 2/S))`.
    pub large_d_saturation: f64,
    /// `∫ u″² dx − 1/σ⁴`.
    pub rayleigh_bracket: f64,
    /// `F_d^(R) ≈ small_d_rayleigh_coefficient · d²` for small `d`.
    pub small_d_rayleigh_coefficient: f64,
    /// Leading small-`d` behaviour `S² d⁴/σ⁶` of `F_c^(R)`.
    pub small_d_centroid_rayleigh: PowerLaw,
}

pub fn fisher_asymptotes(snr: f64, aperture: &Aperture) -> Result<Asymptotes> {
    ensure(snr.is_finite() && snr > 0.0, || format!("SNR must be positive, got {snr}"))?;
    let sigma = aperture.sigma();
    let s2 = sigma * sigma;
    let bracket = aperture.correlation(2, 2, 0.0)? - 1.0 / (s2 * s2);
    Ok(Asymptotes {
        large_d_saturation: snr / (s2 * (1.0 + 2.0 / snr)),
        rayleigh_bracket: bracket,
        small_d_rayleigh_coefficient: snr / (1.0 + 1.0 / snr) * bracket,
        small_d_centroid_rayleigh: PowerLaw {
            coefficient: snr * snr / (s2 * s2 * s2),
            exponent: 4,
        },
    })
}
