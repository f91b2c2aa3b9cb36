//! Repeated estimation experiment: precision and bias of the centroid and
//! half-separation estimators against the Fisher information.
//!
//!     cargo run --release --example monte_carlo [d] [S] [realizations]

use subrayleigh::estimator::{run_experiment, Protocol};
use subrayleigh::fisher::fisher_decomposed;
use subrayleigh::{Aperture, BinarySource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let d: f64 = args.next().as_deref().unwrap_or("0.2").parse()?;
    let snr: f64 = args.next().as_deref().unwrap_or("100").parse()?;
    let realizations: usize = args.next().as_deref().unwrap_or("200").parse()?;

    let aperture = Aperture::soft(1.0)?;
    let source = BinarySource::new(d, 0.0)?;
    let mut protocol = Protocol::standard(aperture, source, snr, 2024)?;
    protocol.realizations = realizations;

    let start = std::time::Instant::now();
    let summary = run_experiment(&protocol)?;
    let fi = fisher_decomposed(&aperture, snr, &source)?;
    println!(
        "{} realizations x {} samples in {:.1?}: {} failed, {} clean two-lobe",
        realizations,
        protocol.samples,
        start.elapsed(),
        summary.failed,
        summary.clean_two_lobe
    );
    if let Some(s) = summary.half_separation {
        println!(
            "d:  precision/S {:.4} +- {:.4}  (F_d^SR/S {:.4}), bias {:+.5} +- {:.5}",
            s.precision / snr,
            s.precision_error / snr,
            fi.sub_rayleigh_d() / snr,
            s.bias,
            s.bias_error
        );
    }
    if let Some(s) = summary.centroid {
        println!(
            "xc: precision/S {:.4} +- {:.4}  (F_cc/S {:.4}), bias {:+.5} +- {:.5}",
            s.precision / snr,
            s.precision_error / snr,
            fi.cc() / snr,
            s.bias,
            s.bias_error
        );
    }
    Ok(())
}
