//! Estimating centroid and half-separation from quadrature samples.
//!
//! The samples are projected onto the detection mode `v(x − ξ)` for a range
//! of displacements `ξ`.  The resulting variance curve `V_ξ` has two lobes
//! around the centroid; the dip between them locates `x̃_c`, and the excess of
//! `V_{x̃_c}` over the unit noise floor yields `d̃`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::DetectorGrid;
use crate::error::{ensure, Error, Result};
use crate::montecarlo::{sample_quadratures_stream, SampleSet};
use crate::optics::{Aperture, BinarySource, SourceModel};

/// Sweep half-range around the prior centroid, in σ.
pub const SWEEP_HALF_RANGE: f64 = 2.0;
/// Sweep step, in σ.
pub const SWEEP_STEP: f64 = 0.02;
/// Minimum distance (in σ) between a swept mode centre and the grid edge.
pub const SWEEP_MARGIN: f64 = 2.0;
/// Width of the moving average used by the fallback centroid search.
pub const SMOOTHING_WINDOW: usize = 5;
/// Maximum tolerated fraction of failed realizations.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
    /// Number of samples behind each value; `None` for the analytic curve.
    pub n_samples: Option<usize>,
}

impl VarianceCurve {
    /// Standard error of a variance estimate, `V √(2/(N − 1))`.
    fn standard_error(&self, value: f64) -> f64 {
        match self.n_samples {
            Some(n) if n > 1 => value * (2.0 / (n as f64 - 1.0)).sqrt(),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QualityFlag {
    CleanTwoLobe,
    FallbackSmoothed,
}

impl QualityFlag {
    pub fn name(self) -> &'static str {
        match self {
            QualityFlag::CleanTwoLobe => "clean_two_lobe",
            QualityFlag::FallbackSmoothed => "fallback_smoothed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InversionMethod {
    /// `d̃ = σ √(max(0, V − 1)/S)`.
    ApproxFormula,
    /// Bisection on the analytic `V_{x_c}(d)` over `[0, σ]`.
    ExactInversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub centroid_hat: f64,
    pub halfsep_hat: f64,
    pub v_min: f64,
    pub quality_flag: QualityFlag,
}

/// Displacements `prior ± 2σ` in steps of 0.02σ, clipped so every mode centre
/// keeps a 2σ margin from the grid edges.
pub fn sweep_grid(prior: f64, sigma: f64, grid: &DetectorGrid) -> Result<Vec<f64>> {
    let (lo, hi) = grid.domain();
    let min = lo + SWEEP_MARGIN * sigma;
    let max = hi - SWEEP_MARGIN * sigma;
    ensure(max > min, || "grid is too narrow for a variance sweep".into())?;
    let prior = prior.clamp(min, max);
    let step = SWEEP_STEP * sigma;
    let half = (SWEEP_HALF_RANGE / SWEEP_STEP).round() as i64;
    let xi: Vec<f64> = (-half..=half)
        .map(|k| prior + k as f64 * step)
        .filter(|&x| x >= min - 1e-12 * sigma && x <= max + 1e-12 * sigma)
        .collect();
    ensure(xi.len() >= 5, || "sweep range too short".into())?;
    Ok(xi)
}

/// Noise-subtracted intensity-weighted mean pixel position.
pub fn centroid_prior(set: &SampleSet) -> f64 {
    let samples = set.samples();
    let n = samples.nrows() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, x) in set.grid().positions().enumerate() {
        let intensity = samples.column(j).norm_squared() / n - 1.0;
        num += intensity * x;
        den += intensity;
    }
    if den > 0.0 && (num / den).is_finite() {
        num / den
    } else {
        set.grid().center()
    }
}

fn mode_weights(grid: &DetectorGrid, aperture: &Aperture, xi: &[f64]) -> DMatrix<f64> {
    let scale = grid.pitch().sqrt();
    let positions: Vec<f64> = grid.positions().collect();
    DMatrix::from_fn(positions.len(), xi.len(), |i, k| {
        scale * aperture.detection_mode(positions[i] - xi[k])
    })
}

fn column_variances(projected: &DMatrix<f64>) -> Vec<f64> {
    let n = projected.nrows() as f64;
    projected
        .column_iter()
        .map(|c| {
            let mean = c.mean();
            (c.norm_squared() - n * mean * mean) / (n - 1.0)
        })
        .collect()
}

/// Unbiased variance of `q_ξ = Σ_i q_i v(x_i − ξ) √Δx` for each `ξ`.
pub fn mode_variance_sweep(set: &SampleSet, aperture: &Aperture, xi_grid: &[f64]) -> Result<VarianceCurve> {
    ensure(set.len() >= 2, || "variance sweep needs at least two samples".into())?;
    let (lo, hi) = set.grid().domain();
    let margin = SWEEP_MARGIN * aperture.sigma() * (1.0 - 1e-9);
    ensure(
        xi_grid.iter().all(|&x| x >= lo + margin && x <= hi - margin),
        || format!("sweep points must stay {SWEEP_MARGIN}σ inside the grid"),
    )?;
    let weights = mode_weights(set.grid(), aperture, xi_grid);
    let projected = set.samples() * weights;
    Ok(VarianceCurve {
        xi: xi_grid.to_vec(),
        values: column_variances(&projected),
        n_samples: Some(set.len()),
    })
}

/// Empirical `V_ξ` at a single displacement.
pub fn mode_variance(set: &SampleSet, aperture: &Aperture, xi: f64) -> f64 {
    let weights = mode_weights(set.grid(), aperture, &[xi]);
    column_variances(&(set.samples() * weights))[0]
}

/// `V_ξ = S Σ_l w_l (∫ u_l(x) v(x − ξ) dx)² + 1`.
pub fn analytic_mode_variance(source: &SourceModel, aperture: &Aperture, snr: f64, xi: f64) -> Result<f64> {
    let sigma = aperture.sigma();
    let mut total = 0.0;
    for p in source.points() {
        // ∫ u(x − x_l) v(x − ξ) dx = −σ ∫ u(y) u′(y − (ξ − x_l)) dy
        let proj = -sigma * aperture.correlation(0, 1, xi - p.position)?;
        total += p.weight * proj * proj;
    }
    Ok(snr * total + 1.0)
}

pub fn analytic_variance_curve(source: &SourceModel, aperture: &Aperture, snr: f64, xi_grid: &[f64]) -> Result<VarianceCurve> {
    let values = xi_grid
        .iter()
        .map(|&xi| analytic_mode_variance(source, aperture, snr, xi))
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceCurve {
        xi: xi_grid.to_vec(),
        values,
        n_samples: None,
    })
}

// Vertex of the parabola through three points, clamped to the bracket.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = (x[1] - x[0]) * (y[1] - y[2]);
    let d2 = (x[1] - x[2]) * (y[1] - y[0]);
    let denom = d1 - d2;
    if denom == 0.0 || !denom.is_finite() {
        return x[1];
    }
    let shift = 0.5 * ((x[1] - x[0]) * d1 - (x[1] - x[2]) * d2) / denom;
    (x[1] - shift).clamp(x[0], x[2])
}

fn refine(xi: &[f64], values: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= xi.len() {
        return xi[k];
    }
    parabolic_vertex([xi[k - 1], xi[k], xi[k + 1]], [values[k - 1], values[k], values[k + 1]])
}

fn argmin(values: &[f64], range: std::ops::RangeInclusive<usize>) -> usize {
    let start = *range.start();
    values[range]
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| start + i)
        .expect("non-empty range")
}

fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(values.len() - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Centroid from the dip between the two dominant lobes of `curve`.
pub fn estimate_centroid(curve: &VarianceCurve) -> Result<(f64, QualityFlag)> {
    let v = &curve.values;
    let n = v.len();
    if n < 5 || curve.xi.len() != n {
        return Err(Error::EstimationFailure("variance curve too short".into()));
    }
    let mut maxima: Vec<usize> = (1..n - 1)
        .filter(|&i| v[i] >= v[i - 1] && v[i] > v[i + 1])
        .collect();
    maxima.sort_by(|&a, &b| v[b].total_cmp(&v[a]));

    if let Some(&top) = maxima.first() {
        let floor_ok = |i: usize| v[i] > 1.0 + 3.0 * curve.standard_error(v[i]);
        for &other in &maxima[1..] {
            let (lo, hi) = (top.min(other), top.max(other));
            let trough = argmin(v, lo..=hi);
            let lower = v[other];
            if floor_ok(top) && floor_ok(other) && v[trough] < lower - 3.0 * curve.standard_error(lower) {
                return Ok((refine(&curve.xi, v, trough), QualityFlag::CleanTwoLobe));
            }
        }
    }

    let smooth = moving_average(v, SMOOTHING_WINDOW);
    let rising = smooth.windows(2).all(|w| w[1] >= w[0]);
    let falling = smooth.windows(2).all(|w| w[1] <= w[0]);
    if rising || falling {
        return Err(Error::EstimationFailure("variance curve is monotone".into()));
    }
    let k = argmin(&smooth, n / 4..=(3 * n) / 4);
    Ok((refine(&curve.xi, &smooth, k), QualityFlag::FallbackSmoothed))
}

/// Half-separation from the variance measured at the centroid.
pub fn estimate_halfseparation(v_at_centroid: f64, snr: f64, aperture: &Aperture, method: InversionMethod) -> Result<f64> {
    ensure(snr.is_finite() && snr > 0.0, || format!("SNR must be positive, got {snr}"))?;
    ensure(v_at_centroid.is_finite(), || "variance must be finite".into())?;
    let sigma = aperture.sigma();
    if v_at_centroid <= 1.0 {
        return Ok(0.0);
    }
    match method {
        InversionMethod::ApproxFormula => Ok(sigma * ((v_at_centroid - 1.0) / snr).sqrt()),
        InversionMethod::ExactInversion => {
            let curve = |d: f64| -> Result<f64> {
                analytic_mode_variance(&BinarySource::new(d, 0.0)?.to_source_model(), aperture, snr, 0.0)
            };
            let mut lo = 0.0;
            let mut hi = sigma;
            let top = curve(hi)?;
            if v_at_centroid > top {
                return Err(Error::OutOfRange { value: v_at_centroid, max: top });
            }
            while hi - lo > 1e-13 * sigma {
                let mid = 0.5 * (lo + hi);
                if curve(mid)? < v_at_centroid {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Full single-realization pipeline: prior, sweep, centroid, `V_{x̃_c}`, `d̃`.
pub fn estimate(set: &SampleSet, aperture: &Aperture, snr: f64, method: InversionMethod) -> Result<EstimateRecord> {
    let prior = centroid_prior(set);
    let xi = sweep_grid(prior, aperture.sigma(), set.grid())?;
    let curve = mode_variance_sweep(set, aperture, &xi)?;
    let (centroid_hat, quality_flag) = estimate_centroid(&curve)?;
    let v_min = mode_variance(set, aperture, centroid_hat);
    let halfsep_hat = estimate_halfseparation(v_min, snr, aperture, method)?;
    Ok(EstimateRecord {
        centroid_hat,
        halfsep_hat,
        v_min,
        quality_flag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub realizations: usize,
    pub samples: usize,
    pub grid: DetectorGrid,
    pub source: BinarySource,
    pub aperture: Aperture,
    pub snr: f64,
    pub seed: u64,
    pub method: InversionMethod,
}

impl Protocol {
    /// 1000 realizations of 500 samples on 1000 pixels of width 0.008σ.
    pub fn standard(aperture: Aperture, source: BinarySource, snr: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            realizations: 1000,
            samples: 500,
            grid: DetectorGrid::standard(source.centroid, aperture.sigma())?,
            source,
            aperture,
            snr,
            seed,
            method: InversionMethod::ExactInversion,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub realization: usize,
    pub seed: u64,
    pub stream: u64,
    /// `Err` carries the failure message.
    pub outcome: std::result::Result<EstimateRecord, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterStats {
    pub truth: f64,
    pub mean: f64,
    pub std: f64,
    pub bias: f64,
    /// Standard error of the mean.
    pub bias_error: f64,
    /// `1 / (N · std²)`, the per-sample precision.
    pub precision: f64,
    pub precision_error: f64,
}

impl ParameterStats {
    /// Summary over estimates from realizations of `samples_per_realization` samples.
    pub fn from_estimates(values: &[f64], truth: f64, samples_per_realization: usize) -> Result<Self> {
        let r = values.len();
        ensure(r >= 2, || "statistics need at least two realizations".into())?;
        let rf = r as f64;
        let mean = values.iter().sum::<f64>() / rf;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rf;
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / rf;
        let var = m2 * rf / (rf - 1.0);
        let std = var.sqrt();
        let n = samples_per_realization as f64;
        let precision = 1.0 / (n * var);
        // delta method: sd(P)/P = sd(s²)/s², Var(s²) ≈ (m₄ − m₂² (R − 3)/(R − 1)) / R
        let var_of_var = ((m4 - m2 * m2 * (rf - 3.0) / (rf - 1.0)) / rf).max(0.0);
        let precision_error = precision * var_of_var.sqrt() / var;
        Ok(Self {
            truth,
            mean,
            std,
            bias: mean - truth,
            bias_error: std / rf.sqrt(),
            precision,
            precision_error,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub protocol: Protocol,
    pub completed: usize,
    pub failed: usize,
    pub clean_two_lobe: usize,
    pub half_separation: Option<ParameterStats>,
    pub centroid: Option<ParameterStats>,
    #[serde(skip)]
    pub records: Vec<RealizationRecord>,
}

impl ExperimentSummary {
    pub fn failure_fraction(&self) -> f64 {
        self.failed as f64 / (self.completed + self.failed).max(1) as f64
    }

    pub fn check(&self) -> Result<()> {
        if self.failure_fraction() > MAX_FAILURE_FRACTION {
            Err(Error::ProtocolFailure {
                failed: self.failed,
                total: self.completed + self.failed,
            })
        } else {
            Ok(())
        }
    }
}

fn run_one(protocol: &Protocol, realization: usize, stream: u64) -> RealizationRecord {
    let outcome = sample_quadratures_stream(
        &protocol.source.to_source_model(),
        &protocol.aperture,
        &protocol.grid,
        protocol.snr,
        protocol.samples,
        protocol.seed,
        stream,
    )
    .and_then(|set| estimate(&set, &protocol.aperture, protocol.snr, protocol.method))
    .map_err(|e| e.to_string());
    RealizationRecord {
        realization,
        seed: protocol.seed,
        stream,
        outcome,
    }
}

/// Runs one realization per entry of `streams`, in parallel, without
/// enforcing the failure threshold.
pub fn run_realizations(protocol: &Protocol, streams: &[u64]) -> Result<ExperimentSummary> {
    ensure(protocol.samples >= 2, || "each realization needs at least two samples".into())?;
    ensure(protocol.snr > 0.0, || "SNR must be positive".into())?;
    let records: Vec<RealizationRecord> = streams
        .par_iter()
        .enumerate()
        .map(|(k, &stream)| run_one(protocol, k, stream))
        .collect();
    let ok: Vec<&EstimateRecord> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let completed = ok.len();
    let stats = |pick: fn(&EstimateRecord) -> f64, truth: f64| {
        let values: Vec<f64> = ok.iter().map(|r| pick(r)).collect();
        ParameterStats::from_estimates(&values, truth, protocol.samples).ok()
    };
    Ok(ExperimentSummary {
        protocol: *protocol,
        completed,
        failed: records.len() - completed,
        clean_two_lobe: ok.iter().filter(|r| r.quality_flag == QualityFlag::CleanTwoLobe).count(),
        half_separation: stats(|r| r.halfsep_hat, protocol.source.half_separation),
        centroid: stats(|r| r.centroid_hat, protocol.source.centroid),
        records,
    })
}

/// Runs `protocol.realizations` independent realizations (stream `k` for
/// realization `k`) and summarizes the estimates.
pub fn run_experiment(protocol: &Protocol) -> Result<ExperimentSummary> {
    ensure(protocol.realizations >= 2, || "at least two realizations are required".into())?;
    let streams: Vec<u64> = (0..protocol.realizations as u64).collect();
    let summary = run_realizations(protocol, &streams)?;
    summary.check()?;
    Ok(summary)
}

/// Convenience for tests and examples: projection of a single quadrature
/// vector onto `v(x − ξ)`.
pub fn project(grid: &DetectorGrid, aperture: &Aperture, q: &DVector<f64>, xi: f64) -> f64 {
    let scale = grid.pitch().sqrt();
    grid.positions()
        .zip(q.iter())
        .map(|(x, qi)| qi * aperture.detection_mode(x - xi) * scale)
        .sum()
}
