//! Fisher information for half-separation and centroid: grid-based trace
//! formula, continuous decomposition into sub-Rayleigh and Rayleigh parts,
//! and the closed-form approximations.
//!
//!     cargo run --release --example fisher_information [soft|hard] [S]

use subrayleigh::fisher::{
    fisher_asymptotes, fisher_c_subrayleigh_approx, fisher_d_subrayleigh_approx, fisher_decomposed, fisher_dense,
    BinaryImagingModel, Derivative,
};
use subrayleigh::{Aperture, ApertureModel, BinarySource, DetectorGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let model: ApertureModel = args.next().as_deref().unwrap_or("soft").parse()?;
    let snr: f64 = args.next().as_deref().unwrap_or("100").parse()?;
    let aperture = Aperture::new(model, 1.0)?;
    let grid = DetectorGrid::standard(0.0, 1.0)?;
    let imaging = BinaryImagingModel::new(aperture, grid, snr)?;

    println!("{model} aperture, S = {snr}, M = {}, pixel = {}", grid.pixel_count(), grid.pitch());
    println!(
        "{:>6} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "d", "F_dd grid", "F_dd", "F_d^SR", "approx", "F_cc", "F_c^SR", "approx"
    );
    for d in [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0] {
        let source = BinarySource::new(d, 0.0)?;
        let dense = fisher_dense(&imaging, &source, Derivative::Analytic)?;
        let split = fisher_decomposed(&aperture, snr, &source)?;
        println!(
            "{d:>6.2} {:>11.4} {:>11.4} {:>11.4} {:>11.4} {:>11.4} {:>11.4} {:>11.4}",
            dense.dd(),
            split.dd(),
            split.sub_rayleigh_d(),
            fisher_d_subrayleigh_approx(snr, d, 1.0),
            split.cc(),
            split.sub_rayleigh_c(),
            fisher_c_subrayleigh_approx(snr, d, 1.0),
        );
    }

    let asym = fisher_asymptotes(snr, &aperture)?;
    println!("large-d saturation: {:.4}", asym.large_d_saturation);
    println!("small-d Rayleigh part of F_dd ~ {:.4} d^2", asym.small_d_rayleigh_coefficient);
    Ok(())
}
