//! Prints transfer functions, mode overlaps and the eigenvalues of the
//! coherence function for both aperture models.
//!
//!     cargo run --example transfer_functions

use subrayleigh::optics::{eigenvalues_gamma, BinaryEigenmodes, ModeSign};
use subrayleigh::{Aperture, BinarySource};

fn main() -> subrayleigh::Result<()> {
    for aperture in [Aperture::soft(1.0)?, Aperture::hard(1.0)?] {
        println!("== {} aperture, sigma = {}", aperture.model(), aperture.sigma());
        println!("{:>6} {:>12} {:>12} {:>12}", "x", "u(x)", "u'(x)", "v(x)");
        for k in 0..=8 {
            let x = 0.25 * k as f64;
            println!(
                "{x:>6.2} {:>12.6} {:>12.6} {:>12.6}",
                aperture.transfer(x),
                aperture.transfer_derivative(x),
                aperture.detection_mode(x)
            );
        }

        println!("{:>6} {:>12} {:>12} {:>12}", "d", "overlap", "gamma+", "gamma-");
        for d in [0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0] {
            let chi = aperture.overlap(d)?;
            let (plus, minus) = eigenvalues_gamma(chi);
            println!("{d:>6.2} {chi:>12.6} {plus:>12.6} {minus:>12.6}");
        }

        let modes = BinaryEigenmodes::new(&aperture, &BinarySource::new(0.2, 0.0)?)?;
        let norm_plus = modes.mode(ModeSign::Plus).inner(modes.mode(ModeSign::Plus), &aperture)?;
        let cross = modes.mode(ModeSign::Plus).inner(modes.mode(ModeSign::Minus), &aperture)?;
        println!("d = 0.2: <e+,e+> = {norm_plus:.12}, <e+,e-> = {cross:.2e}\n");
    }
    Ok(())
}
