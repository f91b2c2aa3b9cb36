//! Transfer functions of the imaging system and the modes built from them.
//!
//! Two real, even, unit-norm amplitude transfer functions are supported: a
//! Gaussian ("soft" aperture) and a sinc ("hard" aperture).  Both are scaled so
//! that `∫ u′(x)² dx = 1/σ²`.
//!
//! Every integral of a product of shifted transfer-function derivatives reduces
//! to the cross-correlation [`Aperture::correlation`].  For the soft model it is
//! evaluated by adaptive quadrature in position space; the hard model is
//! band-limited, so the same quadrature engine runs over its finite frequency
//! support instead, where the integrand has no slowly decaying tail.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::quadrature::Quadrature;

/// Overlap above which the antisymmetric mode is treated as degenerate.
pub const DEGENERATE_OVERLAP: f64 = 1.0 - 1e-14;

// Below this argument the sinc family switches to its Taylor series.
const SINC_SERIES_CUTOFF: f64 = 0.1;
// Half-width (in σ) of the position-space window for soft-aperture integrals.
const SOFT_WINDOW: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApertureModel {
    Soft,
    Hard,
}

impl ApertureModel {
    pub fn name(self) -> &'static str {
        match self {
            ApertureModel::Soft => "soft",
            ApertureModel::Hard => "hard",
        }
    }
}

impl std::str::FromStr for ApertureModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "soft" => Ok(ApertureModel::Soft),
            "hard" => Ok(ApertureModel::Hard),
            other => Err(Error::InvalidArgument(format!(
                "unknown aperture model `{other}` (expected soft or hard)"
            ))),
        }
    }
}

impl std::fmt::Display for ApertureModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    model: ApertureModel,
    sigma: f64,
}

impl Aperture {
    pub fn new(model: ApertureModel, sigma: f64) -> Result<Self> {
        ensure(sigma.is_finite() && sigma > 0.0, || {
            format!("aperture width must be positive, got {sigma}")
        })?;
        Ok(Self { model, sigma })
    }

    pub fn soft(sigma: f64) -> Result<Self> {
        Self::new(ApertureModel::Soft, sigma)
    }

    pub fn hard(sigma: f64) -> Result<Self> {
        Self::new(ApertureModel::Hard, sigma)
    }

    pub fn model(&self) -> ApertureModel {
        self.model
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Frequency cutoff of the hard aperture, `√3/σ`.
    fn band_limit(&self) -> f64 {
        3f64.sqrt() / self.sigma
    }

    /// The transfer function `u(x)`.
    pub fn transfer(&self, x: f64) -> f64 {
        self.transfer_nth(0, x)
    }

    /// `u′(x)`, in closed form.
    pub fn transfer_derivative(&self, x: f64) -> f64 {
        self.transfer_nth(1, x)
    }

    /// `u″(x)`, in closed form.
    pub fn transfer_second_derivative(&self, x: f64) -> f64 {
        self.transfer_nth(2, x)
    }

    /// Derivative of order `order` (0, 1 or 2) of the transfer function.
    ///
    /// # Panics
    /// If `order > 2`.
    pub fn transfer_nth(&self, order: usize, x: f64) -> f64 {
        assert!(order <= 2, "transfer-function derivatives are provided up to second order");
        let s = self.sigma;
        match self.model {
            ApertureModel::Soft => {
                let amp = (2.0 / (PI * s * s)).powf(0.25);
                let g = amp * (-(x * x) / (s * s)).exp();
                match order {
                    0 => g,
                    1 => -2.0 * x / (s * s) * g,
                    _ => (4.0 * x * x / s.powi(4) - 2.0 / (s * s)) * g,
                }
            }
            ApertureModel::Hard => {
                let k = self.band_limit();
                let amp = 3f64.powf(0.25) / (PI * s).sqrt();
                let t = k * x;
                match order {
                    0 => amp * sinc(t),
                    1 => amp * k * sinc_d1(t),
                    _ => amp * k * k * sinc_d2(t),
                }
            }
        }
    }

    /// The detection mode `v(x) = −σ u′(x)`, unit-norm and odd.
    pub fn detection_mode(&self, x: f64) -> f64 {
        -self.sigma * self.transfer_derivative(x)
    }

    /// Cross-correlation `∫ u⁽ᵐ⁾(x) u⁽ⁿ⁾(x − s) dx` of two transfer-function
    /// derivatives, computed by adaptive quadrature to an absolute tolerance
    /// of 1e-10.
    ///
    /// With `R(s) = ∫ u(x) u(x − s) dx` this equals `(−1)ⁿ R⁽ᵐ⁺ⁿ⁾(s)`.
    pub fn correlation(&self, m: usize, n: usize, s: f64) -> Result<f64> {
        self.correlation_with(&Quadrature::default(), m, n, s)
    }

    pub fn correlation_with(&self, quad: &Quadrature, m: usize, n: usize, s: f64) -> Result<f64> {
        ensure(s.is_finite(), || format!("correlation shift must be finite, got {s}"))?;
        match self.model {
            ApertureModel::Soft => {
                assert!(m <= 2 && n <= 2, "soft-aperture correlation supports orders up to 2");
                let sig = self.sigma;
                let center = 0.5 * s;
                let pieces = 2 * SOFT_WINDOW as usize;
                let breaks: Vec<f64> = (0..=pieces)
                    .map(|i| center + sig * (i as f64 - SOFT_WINDOW))
                    .collect();
                let est = quad.integrate_pieces(
                    |x| self.transfer_nth(m, x) * self.transfer_nth(n, x - s),
                    &breaks,
                )?;
                Ok(est.value)
            }
            ApertureModel::Hard => {
                // Parseval over the flat spectrum on |k| ≤ K:
                // (−1)ⁿ/(2K) ∫ kᵖ cos(ks + pπ/2) dk, integrand even in k.
                let cutoff = self.band_limit();
                let p = m + n;
                let phase = p as f64 * FRAC_PI_2;
                let pieces = ((cutoff * s.abs() / FRAC_PI_2).ceil() as usize).clamp(1, 4096);
                let breaks: Vec<f64> = (0..=pieces)
                    .map(|i| cutoff * i as f64 / pieces as f64)
                    .collect();
                let est = quad.integrate_pieces(
                    |k| k.powi(p as i32) * (k * s + phase).cos(),
                    &breaks,
                )?;
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                Ok(sign * est.value / cutoff)
            }
        }
    }

    /// Overlap `χ(d) = ∫ u(x + d) u(x − d) dx` of the two displaced transfer
    /// functions of a binary source with half-separation `d`.
    pub fn overlap(&self, d: f64) -> Result<f64> {
        ensure(d >= 0.0 && d.is_finite(), || {
            format!("half-separation must be non-negative, got {d}")
        })?;
        match self.model {
            ApertureModel::Soft => Ok((-2.0 * d * d / (self.sigma * self.sigma)).exp()),
            ApertureModel::Hard => {
                if d == 0.0 {
                    return Ok(1.0);
                }
                Ok(self.correlation(0, 0, 2.0 * d)?.clamp(-1.0, 1.0))
            }
        }
    }

    /// `dχ/dd`.
    pub fn overlap_derivative(&self, d: f64) -> Result<f64> {
        ensure(d >= 0.0 && d.is_finite(), || {
            format!("half-separation must be non-negative, got {d}")
        })?;
        match self.model {
            ApertureModel::Soft => {
                let s2 = self.sigma * self.sigma;
                Ok(-4.0 * d / s2 * (-2.0 * d * d / s2).exp())
            }
            ApertureModel::Hard => Ok(-2.0 * self.correlation(0, 1, 2.0 * d)?),
        }
    }
}

/// `sin(t)/t` with `sinc(0) = 1`.
pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < SINC_SERIES_CUTOFF {
        // Σ (−1)ʲ t²ʲ / (2j+1)!
        sinc_series(t, 0)
    } else {
        t.sin() / t
    }
}

pub(crate) fn sinc_d1(t: f64) -> f64 {
    if t.abs() < SINC_SERIES_CUTOFF {
        sinc_series(t, 1)
    } else {
        (t * t.cos() - t.sin()) / (t * t)
    }
}

pub(crate) fn sinc_d2(t: f64) -> f64 {
    if t.abs() < SINC_SERIES_CUTOFF {
        sinc_series(t, 2)
    } else {
        ((2.0 - t * t) * t.sin() - 2.0 * t * t.cos()) / (t * t * t)
    }
}

// Term-wise derivative of the sinc Taylor series.
fn sinc_series(t: f64, order: u32) -> f64 {
    let mut total = 0.0;
    let mut factorial = 1.0; // (2j+1)!
    for j in 0..10u32 {
        if j > 0 {
            factorial *= ((2 * j) * (2 * j + 1)) as f64;
        }
        let power = 2 * j;
        if power < order {
            continue;
        }
        let mut coef = if j % 2 == 0 { 1.0 } else { -1.0 } / factorial;
        for q in 0..order {
            coef *= (power - q) as f64;
        }
        total += coef * t.powi((power - order) as i32);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub position: f64,
    pub weight: f64,
}

/// Mutually incoherent point emitters with relative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    points: Vec<PointSource>,
}

impl SourceModel {
    /// Builds a source from `(position, weight)` pairs, normalizing the weights.
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let raw: Vec<(f64, f64)> = points.into_iter().collect();
        ensure(!raw.is_empty(), || "source needs at least one point".into())?;
        for &(x, w) in &raw {
            ensure(x.is_finite(), || format!("source position must be finite, got {x}"))?;
            ensure(w.is_finite() && w > 0.0, || {
                format!("source weight must be positive, got {w}")
            })?;
        }
        let total: f64 = raw.iter().map(|p| p.1).sum();
        let points = raw
            .into_iter()
            .map(|(position, w)| PointSource {
                position,
                weight: w / total,
            })
            .collect();
        Ok(Self { points })
    }

    pub fn single(position: f64) -> Result<Self> {
        Self::new([(position, 1.0)])
    }

    /// Two equally bright points at `x_c ± d`.
    pub fn binary(d: f64, centroid: f64) -> Result<Self> {
        Ok(BinarySource::new(d, centroid)?.to_source_model())
    }

    pub fn points(&self) -> &[PointSource] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Normalized coherence `Γ(x, x′) = Σ_l w_l u_l(x) u_l(x′)`.
    pub fn coherence(&self, aperture: &Aperture, x: f64, x_prime: f64) -> f64 {
        self.points
            .iter()
            .map(|p| {
                p.weight * aperture.transfer(x - p.position) * aperture.transfer(x_prime - p.position)
            })
            .sum()
    }
}

/// A binary source parametrized by half-separation `d` and centroid `x_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinarySource {
    pub half_separation: f64,
    pub centroid: f64,
}

impl BinarySource {
    pub fn new(half_separation: f64, centroid: f64) -> Result<Self> {
        ensure(half_separation.is_finite() && half_separation >= 0.0, || {
            format!("half-separation must be non-negative, got {half_separation}")
        })?;
        ensure(centroid.is_finite(), || format!("centroid must be finite, got {centroid}"))?;
        Ok(Self {
            half_separation,
            centroid,
        })
    }

    /// Positions `(x_1, x_2) = (x_c + d, x_c − d)`.
    pub fn positions(&self) -> (f64, f64) {
        (
            self.centroid + self.half_separation,
            self.centroid - self.half_separation,
        )
    }

    pub fn to_source_model(&self) -> SourceModel {
        let (x1, x2) = self.positions();
        SourceModel {
            points: vec![
                PointSource {
                    position: x1,
                    weight: 0.5,
                },
                PointSource {
                    position: x2,
                    weight: 0.5,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeSign {
    Plus,
    Minus,
}

impl ModeSign {
    fn factor(self) -> f64 {
        match self {
            ModeSign::Plus => 1.0,
            ModeSign::Minus => -1.0,
        }
    }
}

/// The two estimated source parameters, in Fisher-matrix index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parameter {
    HalfSeparation,
    Centroid,
}

impl Parameter {
    pub const ALL: [Parameter; 2] = [Parameter::HalfSeparation, Parameter::Centroid];

    pub fn index(self) -> usize {
        match self {
            Parameter::HalfSeparation => 0,
            Parameter::Centroid => 1,
        }
    }
}

/// `(γ₊, γ₋) = ((1 + χ)/2, (1 − χ)/2)`.
pub fn eigenvalues_gamma(chi: f64) -> (f64, f64) {
    debug_assert!(chi.abs() <= 1.0 + 1e-12, "overlap out of range: {chi}");
    (0.5 * (1.0 + chi), 0.5 * (1.0 - chi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerm {
    pub coef: f64,
    /// Derivative order of the transfer function.
    pub order: usize,
    pub shift: f64,
}

/// A finite combination `Σ c · u⁽ᵏ⁾(x − a)` of shifted transfer-function
/// derivatives.  Eigenmodes and their parameter derivatives all have this form,
/// so their inner products reduce to [`Aperture::correlation`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeFunction {
    terms: Vec<ModeTerm>,
}

impl ModeFunction {
    pub fn new(terms: Vec<ModeTerm>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[ModeTerm] {
        &self.terms
    }

    pub fn value(&self, aperture: &Aperture, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * aperture.transfer_nth(t.order, x - t.shift))
            .sum()
    }

    /// `∫ f(x) g(x) dx`.
    pub fn inner(&self, other: &ModeFunction, aperture: &Aperture) -> Result<f64> {
        let mut total = 0.0;
        for a in &self.terms {
            for b in &other.terms {
                if a.coef == 0.0 || b.coef == 0.0 {
                    continue;
                }
                total += a.coef * b.coef * aperture.correlation(a.order, b.order, b.shift - a.shift)?;
            }
        }
        Ok(total)
    }
}

/// The Karhunen–Loève eigenmodes `e_±` of a binary source's coherence
/// function, with their derivatives with respect to `d` and `x_c`.
#[derive(Debug, Clone)]
pub struct BinaryEigenmodes {
    pub overlap: f64,
    pub overlap_derivative: f64,
    pub plus: ModeFunction,
    pub minus: ModeFunction,
    /// `[∂_d e₊, ∂_{x_c} e₊]`
    pub d_plus: [ModeFunction; 2],
    /// `[∂_d e₋, ∂_{x_c} e₋]`
    pub d_minus: [ModeFunction; 2],
}

impl BinaryEigenmodes {
    pub fn new(aperture: &Aperture, source: &BinarySource) -> Result<Self> {
        let d = source.half_separation;
        let chi = aperture.overlap(d)?;
        if chi >= DEGENERATE_OVERLAP {
            return Err(Error::DegenerateMode { overlap: chi });
        }
        let dchi = aperture.overlap_derivative(d)?;
        let (x1, x2) = source.positions();
        let build = |sign: ModeSign| {
            let sgn = sign.factor();
            let norm = (2.0 * (1.0 + sgn * chi)).sqrt();
            // ∂_d N = ±χ′/N
            let dnorm = sgn * dchi / norm;
            let mode = ModeFunction::new(vec![
                ModeTerm { coef: 1.0 / norm, order: 0, shift: x1 },
                ModeTerm { coef: sgn / norm, order: 0, shift: x2 },
            ]);
            // ∂_d u(x − x₁) = −u′(x − x₁), ∂_d u(x − x₂) = +u′(x − x₂)
            let by_d = ModeFunction::new(vec![
                ModeTerm { coef: -1.0 / norm, order: 1, shift: x1 },
                ModeTerm { coef: sgn / norm, order: 1, shift: x2 },
                ModeTerm { coef: -dnorm / (norm * norm), order: 0, shift: x1 },
                ModeTerm { coef: -sgn * dnorm / (norm * norm), order: 0, shift: x2 },
            ]);
            let by_centroid = ModeFunction::new(vec![
                ModeTerm { coef: -1.0 / norm, order: 1, shift: x1 },
                ModeTerm { coef: -sgn / norm, order: 1, shift: x2 },
            ]);
            (mode, [by_d, by_centroid])
        };
        let (plus, d_plus) = build(ModeSign::Plus);
        let (minus, d_minus) = build(ModeSign::Minus);
        Ok(Self {
            overlap: chi,
            overlap_derivative: dchi,
            plus,
            minus,
            d_plus,
            d_minus,
        })
    }

    pub fn mode(&self, sign: ModeSign) -> &ModeFunction {
        match sign {
            ModeSign::Plus => &self.plus,
            ModeSign::Minus => &self.minus,
        }
    }

    pub fn derivative(&self, sign: ModeSign, parameter: Parameter) -> &ModeFunction {
        let set = match sign {
            ModeSign::Plus => &self.d_plus,
            ModeSign::Minus => &self.d_minus,
        };
        &set[parameter.index()]
    }
}

/// Value of the normalized eigenmode `e_±(x) = [u₁(x) ± u₂(x)] / √(2(1 ± χ))`.
pub fn eigenmode(aperture: &Aperture, source: &BinarySource, sign: ModeSign, x: f64) -> Result<f64> {
    let chi = aperture.overlap(source.half_separation)?;
    if sign == ModeSign::Minus && chi >= DEGENERATE_OVERLAP {
        return Err(Error::DegenerateMode { overlap: chi });
    }
    let (x1, x2) = source.positions();
    let sgn = sign.factor();
    Ok((aperture.transfer(x - x1) + sgn * aperture.transfer(x - x2)) / (2.0 * (1.0 + sgn * chi)).sqrt())
}
