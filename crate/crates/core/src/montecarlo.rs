//! Seeded generation of quadrature vectors with covariance `S Γ + I`.
//!
//! Each sample is `q = √(2Δx) Σ_l Re(β_l) u_l + n`, where `Re(β_l)` has variance
//! `S w_l / 2` and `n` is white unit-variance detector noise.  Only the real
//! quadrature is drawn since the local-oscillator phase is fixed to zero.
//!
//! Random streams: [`ChaCha8Rng`] seeded with `seed_from_u64(seed)`; realization
//! `k` of an experiment uses stream `k` (`set_stream`), giving 2⁶⁴ independent,
//! non-overlapping streams per seed.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::detector::DetectorGrid;
use crate::error::{ensure, Error, Result};
use crate::optics::{Aperture, ApertureModel, SourceModel};

pub const RNG_DESCRIPTION: &str = "ChaCha8Rng (rand_chacha 0.9); seed_from_u64(seed), set_stream(realization)";

const MAGIC: &[u8; 4] = b"HSQS";
const FORMAT_VERSION: u32 = 1;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub aperture: Aperture,
    pub source: SourceModel,
    pub snr: f64,
}

/// `N` quadrature vectors on a grid of `M` pixels, stored as an `N × M` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: DMatrix<f64>,
    grid: DetectorGrid,
    seed: u64,
    stream: u64,
    meta: SampleMeta,
}

impl SampleSet {
    pub fn from_parts(samples: DMatrix<f64>, grid: DetectorGrid, seed: u64, stream: u64, meta: SampleMeta) -> Result<Self> {
        ensure(samples.ncols() == grid.pixel_count(), || {
            format!("sample width {} does not match {} pixels", samples.ncols(), grid.pixel_count())
        })?;
        Ok(Self { samples, grid, seed, stream, meta })
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn grid(&self) -> &DetectorGrid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn mean(&self) -> DVector<f64> {
        self.samples.row_mean().transpose()
    }

    /// Little-endian dump: header, then the samples row by row.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (n, m) = self.samples.shape();
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(m as u64).to_le_bytes())?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.stream.to_le_bytes())?;
        let model: u8 = match self.meta.aperture.model() {
            ApertureModel::Soft => 0,
            ApertureModel::Hard => 1,
        };
        w.write_all(&[model])?;
        for v in [
            self.meta.aperture.sigma(),
            self.meta.snr,
            self.grid.center(),
            self.grid.half_width(),
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        let points = self.meta.source.points();
        w.write_all(&(points.len() as u32).to_le_bytes())?;
        for p in points {
            w.write_all(&p.position.to_le_bytes())?;
            w.write_all(&p.weight.to_le_bytes())?;
        }
        let mut row = Vec::with_capacity(8 * m);
        for i in 0..n {
            row.clear();
            for j in 0..m {
                row.extend_from_slice(&self.samples[(i, j)].to_le_bytes());
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let m = read_u64(&mut r)? as usize;
        let n = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        let stream = read_u64(&mut r)?;
        let mut model = [0u8; 1];
        r.read_exact(&mut model)?;
        let model = match model[0] {
            0 => ApertureModel::Soft,
            1 => ApertureModel::Hard,
            other => return Err(Error::Format(format!("unknown aperture code {other}"))),
        };
        let sigma = read_f64(&mut r)?;
        let snr = read_f64(&mut r)?;
        let center = read_f64(&mut r)?;
        let half_width = read_f64(&mut r)?;
        let count = read_u32(&mut r)? as usize;
        let mut pts = Vec::with_capacity(count);
        for _ in 0..count {
            pts.push((read_f64(&mut r)?, read_f64(&mut r)?));
        }
        let aperture = Aperture::new(model, sigma).map_err(|e| Error::Format(e.to_string()))?;
        let source = SourceModel::new(pts).map_err(|e| Error::Format(e.to_string()))?;
        let grid = DetectorGrid::new(center, half_width, m).map_err(|e| Error::Format(e.to_string()))?;
        let len = n
            .checked_mul(m)
            .and_then(|k| k.checked_mul(8))
            .ok_or_else(|| Error::Format(format!("sample block {n}×{m} is too large")))?;
        let mut data = Vec::new();
        r.take(len as u64).read_to_end(&mut data)?;
        if data.len() != len {
            return Err(Error::Format(format!("expected {len} sample bytes, found {}", data.len())));
        }
        let samples = DMatrix::from_row_iterator(
            n,
            m,
            data.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))),
        );
        Self::from_parts(samples, grid, seed, stream, SampleMeta { aperture, source, snr })
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Draws `n_samples` quadrature vectors from stream 0 of `seed`.
pub fn sample_quadratures(
    source: &SourceModel,
    aperture: &Aperture,
    grid: &DetectorGrid,
    snr: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SampleSet> {
    sample_quadratures_stream(source, aperture, grid, snr, n_samples, seed, 0)
}

pub fn sample_quadratures_stream(
    source: &SourceModel,
    aperture: &Aperture,
    grid: &DetectorGrid,
    snr: f64,
    n_samples: usize,
    seed: u64,
    stream: u64,
) -> Result<SampleSet> {
    ensure(n_samples >= 1, || "at least one sample is required".into())?;
    ensure(snr.is_finite() && snr >= 0.0, || format!("SNR must be non-negative, got {snr}"))?;
    let mut rng = stream_rng(seed, stream);
    let m = grid.pixel_count();
    let points = source.points();

    // columns √2 · √Δx u_l(x_i) scaled by the amplitude standard deviation √(S w_l / 2)
    let mut modes = DMatrix::zeros(m, points.len());
    for (l, p) in points.iter().enumerate() {
        let scale = 2f64.sqrt() * (0.5 * snr * p.weight).sqrt();
        let column = grid.sample(|x| aperture.transfer(x - p.position)) * scale;
        modes.set_column(l, &column);
    }
    let amplitudes = DMatrix::from_iterator(
        n_samples,
        points.len(),
        (0..n_samples * points.len()).map(|_| StandardNormal.sample(&mut rng)),
    );
    let mut samples = DMatrix::from_iterator(
        n_samples,
        m,
        (0..n_samples * m).map(|_| StandardNormal.sample(&mut rng)),
    );
    samples.gemm(1.0, &amplitudes, &modes.transpose(), 1.0);
    Ok(SampleSet {
        samples,
        grid: *grid,
        seed,
        stream,
        meta: SampleMeta {
            aperture: *aperture,
            source: source.clone(),
            snr,
        },
    })
}

/// Unbiased (divisor `N − 1`) sample covariance of the rows.
pub fn empirical_covariance(set: &SampleSet) -> Result<DMatrix<f64>> {
    covariance_of_rows(set.samples())
}

pub fn covariance_of_rows(samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = samples.nrows();
    ensure(n >= 2, || format!("covariance needs at least two samples, got {n}"))?;
    let mean = samples.row_mean();
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    Ok(centered.tr_mul(&centered) / (n as f64 - 1.0))
}
