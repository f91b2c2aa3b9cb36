//! Draws quadrature samples for a binary source, compares the empirical
//! principal variances with the model and round-trips the sample set through
//! the binary dump format.
//!
//!     cargo run --release --example sampling

use subrayleigh::montecarlo::{empirical_covariance, sample_quadratures, SampleSet};
use subrayleigh::{principal_components, Aperture, BinarySource, DetectorGrid};

fn main() -> subrayleigh::Result<()> {
    let aperture = Aperture::soft(1.0)?;
    let binary = BinarySource::new(0.2, 0.0)?;
    let source = binary.to_source_model();
    let grid = DetectorGrid::new(0.0, 4.0, 200)?;
    let snr = 100.0;
    let n = 20_000;

    let set = sample_quadratures(&source, &aperture, &grid, snr, n, 42)?;
    let cov = empirical_covariance(&set)?;
    let pcs = principal_components(&binary, &aperture, &grid, snr)?;
    for (k, name) in ["+", "-"].iter().enumerate() {
        let e = &pcs.vectors[k];
        let empirical = (e.transpose() * &cov * e)[(0, 0)];
        println!("V{name}: model {:.4}, empirical {:.4}", pcs.variances[k], empirical);
    }
    println!("mean norm {:.4} (bound {:.4})", set.mean().norm(), 5.0 * (200.0 / n as f64).sqrt());

    let mut buf = Vec::new();
    set.write_to(&mut buf)?;
    let back = SampleSet::read_from(buf.as_slice())?;
    println!("dump: {} bytes, round trip identical: {}", buf.len(), back == set);
    Ok(())
}
