//! Pixel grid of the homodyne array and the quadrature covariance it sees.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::optics::{Aperture, BinaryEigenmodes, BinarySource, SourceModel};

/// Uniform array of `pixel_count` pixels tiling
/// `[center − half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorGrid {
    center: f64,
    half_width: f64,
    pixel_count: usize,
}

impl DetectorGrid {
    pub fn new(center: f64, half_width: f64, pixel_count: usize) -> Result<Self> {
        ensure(center.is_finite(), || format!("grid center must be finite, got {center}"))?;
        ensure(half_width.is_finite() && half_width > 0.0, || {
            format!("grid half-width must be positive, got {half_width}")
        })?;
        ensure(pixel_count >= 2, || format!("grid needs at least 2 pixels, got {pixel_count}"))?;
        Ok(Self {
            center,
            half_width,
            pixel_count,
        })
    }

    pub fn with_pitch(center: f64, pitch: f64, pixel_count: usize) -> Result<Self> {
        Self::new(center, 0.5 * pitch * pixel_count as f64, pixel_count)
    }

    /// 1000 pixels over `center ± 4σ`, i.e. a pitch of 0.008σ.
    pub fn standard(center: f64, sigma: f64) -> Result<Self> {
        Self::new(center, 4.0 * sigma, 1000)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn pixel_count(&self) -> usize {
        self.pixel_count
    }

    pub fn pitch(&self) -> f64 {
        2.0 * self.half_width / self.pixel_count as f64
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn position(&self, i: usize) -> f64 {
        self.center - self.half_width + (i as f64 + 0.5) * self.pitch()
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.pixel_count).map(move |i| self.position(i))
    }

    /// `false` (with a logged warning) when the pitch is coarser than 0.1σ.
    pub fn check_resolution(&self, sigma: f64) -> bool {
        let ok = self.pitch() <= 0.1 * sigma;
        if !ok {
            warn!(
                "pixel pitch {:.4} exceeds 0.1σ = {:.4}; the small-pixel model is inaccurate",
                self.pitch(),
                0.1 * sigma
            );
        }
        ok
    }

    /// `√Δx · (…, f(x_i), …)ᵀ`
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let scale = self.pitch().sqrt();
        DVector::from_iterator(self.pixel_count, self.positions().map(|x| scale * f(x)))
    }
}

/// Discretized coherence matrix `Γ = Σ_l w_l f_l f_lᵀ` kept as weights and
/// sampled transfer functions `f_l = √Δx · u_l(x_i)`.
#[derive(Debug, Clone)]
pub struct LowRankGamma {
    grid: DetectorGrid,
    weights: Vec<f64>,
    vectors: Vec<DVector<f64>>,
}

impl LowRankGamma {
    pub fn new(grid: DetectorGrid, weights: Vec<f64>, vectors: Vec<DVector<f64>>) -> Result<Self> {
        ensure(weights.len() == vectors.len(), || "one weight per factor vector".into())?;
        ensure(
            vectors.iter().all(|v| v.len() == grid.pixel_count()),
            || "factor vectors must match the pixel count".into(),
        )?;
        Ok(Self {
            grid,
            weights,
            vectors,
        })
    }

    /// The zero matrix on `grid`.
    pub fn zero(grid: DetectorGrid) -> Self {
        Self {
            grid,
            weights: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn grid(&self) -> &DetectorGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn dimension(&self) -> usize {
        self.grid.pixel_count()
    }

    pub fn trace(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(w, v)| w * v.norm_squared())
            .sum()
    }

    /// `Γ y` without materializing `Γ`.
    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dimension());
        for (w, v) in self.weights.iter().zip(&self.vectors) {
            out.axpy(w * v.dot(y), v, 1.0);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.dimension();
        let mut out = DMatrix::zeros(m, m);
        for (w, v) in self.weights.iter().zip(&self.vectors) {
            out.ger(*w, v, v, 1.0);
        }
        out
    }
}

/// Builds `Γ_{ii′} = Γ(x_i, x_{i′}) Δx` as a rank-L outer-product sum.
pub fn build_gamma(source: &SourceModel, aperture: &Aperture, grid: &DetectorGrid) -> LowRankGamma {
    grid.check_resolution(aperture.sigma());
    let (weights, vectors) = source
        .points()
        .iter()
        .map(|p| (p.weight, grid.sample(|x| aperture.transfer(x - p.position))))
        .unzip();
    LowRankGamma {
        grid: *grid,
        weights,
        vectors,
    }
}

/// Quadrature covariance `C = S Γ + I`.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    snr: f64,
    gamma: LowRankGamma,
}

pub fn build_covariance(gamma: LowRankGamma, snr: f64) -> Result<CovarianceModel> {
    ensure(snr.is_finite() && snr > 0.0, || format!("SNR must be positive, got {snr}"))?;
    Ok(CovarianceModel { snr, gamma })
}

impl CovarianceModel {
    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn grid(&self) -> &DetectorGrid {
        self.gamma.grid()
    }

    pub fn gamma(&self) -> &LowRankGamma {
        &self.gamma
    }

    pub fn gamma_dense(&self) -> DMatrix<f64> {
        self.gamma.to_dense()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.gamma.dimension();
        let mut c = self.gamma.to_dense() * self.snr;
        for i in 0..m {
            c[(i, i)] += 1.0;
        }
        c
    }
}

/// The two distinguished principal components of a binary source.
#[derive(Debug, Clone)]
pub struct PrincipalComponents {
    /// `[V₊, V₋]`
    pub variances: [f64; 2],
    /// Discrete eigenvalues `[γ₊, γ₋]` of `Γ` along the two vectors.
    pub gammas: [f64; 2],
    /// `[e₊, e₋]`, orthonormal in the discrete inner product.
    pub vectors: [DVector<f64>; 2],
}

/// Samples `e_±(x)` on the grid, re-orthonormalizes them (Gram–Schmidt, `e₊`
/// first) and evaluates `V_μ = S γ_μ + 1` with `γ_μ = e_μᵀ Γ e_μ`.
pub fn principal_components(
    source: &BinarySource,
    aperture: &Aperture,
    grid: &DetectorGrid,
    snr: f64,
) -> Result<PrincipalComponents> {
    ensure(snr.is_finite() && snr >= 0.0, || format!("SNR must be non-negative, got {snr}"))?;
    let modes = BinaryEigenmodes::new(aperture, source)?;
    let mut plus = grid.sample(|x| modes.plus.value(aperture, x));
    let mut minus = grid.sample(|x| modes.minus.value(aperture, x));
    plus.normalize_mut();
    let proj = plus.dot(&minus);
    minus.axpy(-proj, &plus, 1.0);
    minus.normalize_mut();

    let gamma = build_gamma(&source.to_source_model(), aperture, grid);
    let g_plus = plus.dot(&gamma.apply(&plus));
    let g_minus = minus.dot(&gamma.apply(&minus));
    Ok(PrincipalComponents {
        variances: [snr * g_plus + 1.0, snr * g_minus + 1.0],
        gammas: [g_plus, g_minus],
        vectors: [plus, minus],
    })
}
