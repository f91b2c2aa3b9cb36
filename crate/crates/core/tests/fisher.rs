mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use subrayleigh::fisher::{
    fisher_c_subrayleigh_approx, fisher_d_subrayleigh_approx, fisher_decomposed, fisher_dense, BinaryImagingModel,
    Derivative, FisherResult,
};
use subrayleigh::{Aperture, ApertureModel, BinarySource, DetectorGrid};

use common::log_space;

fn assert_psd(f: &FisherResult) {
    let m = f.matrix;
    let tol = 1e-10 * m.trace();
    let eig = m.symmetric_eigen();
    assert!(eig.eigenvalues.iter().all(|&l| l >= -tol), "{:?}", eig.eigenvalues);
}

#[test]
fn decomposed_terms_add_up_and_matrix_is_psd() {
    for ap in [Aperture::soft(1.0).unwrap(), Aperture::hard(1.0).unwrap()] {
        for d in [0.03, 0.3, 1.5] {
            let f = fisher_decomposed(&ap, 100.0, &BinarySource::new(d, 0.2).unwrap()).unwrap();
            let terms = f.terms.expect("decomposition carries its terms");
            let sum = terms.first + terms.second + terms.third;
            for k in 0..4 {
                assert_relative_eq!(sum[k], f.matrix[k], max_relative = 1e-12, epsilon = 1e-300);
            }
            assert_psd(&f);
        }
    }
}

#[test]
fn analytic_covariance_gradient_matches_finite_differences() {
    for model in [ApertureModel::Soft, ApertureModel::Hard] {
        let ap = Aperture::new(model, 1.0).unwrap();
        let grid = DetectorGrid::new(0.0, 4.0, 300).unwrap();
        let imaging = BinaryImagingModel::new(ap, grid, 100.0).unwrap();
        let src = BinarySource::new(0.15, 0.05).unwrap();
        let analytic = imaging.covariance_gradient(&src);
        let fd = imaging.covariance_gradient_fd(&src, 1e-5).unwrap();
        for k in 0..2 {
            let rel = (&analytic[k] - &fd[k]).norm() / analytic[k].norm();
            assert!(rel < 1e-5, "{model} parameter {k}: {rel:e}");
        }
    }
}

#[test]
fn dense_agrees_with_decomposition_for_soft_aperture() {
    let ap = Aperture::soft(1.0).unwrap();
    let src = BinarySource::new(0.1, 0.0).unwrap();
    let imaging = BinaryImagingModel::new(ap, DetectorGrid::standard(0.0, 1.0).unwrap(), 100.0).unwrap();
    let dense = fisher_dense(&imaging, &src, Derivative::Analytic).unwrap();
    let split = fisher_decomposed(&ap, 100.0, &src).unwrap();
    assert_relative_eq!(dense.dd(), split.dd(), max_relative = 5e-3);
    assert_relative_eq!(dense.cc(), split.cc(), max_relative = 5e-3);
    assert!(dense.dc().abs() <= 1e-6 * dense.dd());
    assert_psd(&dense);
}

#[test]
fn dense_hard_aperture_converges_with_window() {
    // sinc tails outside the window carry power ∝ 1/L
    let ap = Aperture::hard(1.0).unwrap();
    let src = BinarySource::new(0.5, 0.0).unwrap();
    let split = fisher_decomposed(&ap, 100.0, &src).unwrap();
    let mut last = f64::INFINITY;
    for pixels in [500, 1000, 2000] {
        let grid = DetectorGrid::with_pitch(0.0, 0.05, pixels).unwrap();
        let imaging = BinaryImagingModel::new(ap, grid, 100.0).unwrap();
        let dense = fisher_dense(&imaging, &src, Derivative::Analytic).unwrap();
        let err = (dense.dd() / split.dd() - 1.0).abs();
        assert!(err < last, "error {err} did not shrink");
        last = err;
    }
    assert!(last < 0.02, "{last}");
}

#[test]
fn subrayleigh_approximations_track_exact_terms() {
    let snr = 400.0;
    let ap = Aperture::soft(1.0).unwrap();
    let d_peak = fisher_d_subrayleigh_approx(snr, 1.0 / snr.sqrt(), 1.0);
    let c_peak = fisher_c_subrayleigh_approx(snr, 0.0, 1.0);
    let mut worst_d: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for d in log_space(0.01, 0.2, 40) {
        let f = fisher_decomposed(&ap, snr, &BinarySource::new(d, 0.0).unwrap()).unwrap();
        worst_d = worst_d.max((f.sub_rayleigh_d() - fisher_d_subrayleigh_approx(snr, d, 1.0)).abs() / d_peak);
        worst_c = worst_c.max((f.sub_rayleigh_c() - fisher_c_subrayleigh_approx(snr, d, 1.0)).abs() / c_peak);
    }
    assert!(worst_d <= 0.1, "{worst_d}");
    assert!(worst_c <= 0.1, "{worst_c}");
}

#[test]
fn subrayleigh_shapes() {
    for ap in [Aperture::soft(1.0).unwrap(), Aperture::hard(1.0).unwrap()] {
        // the sinc model's F_c^SR touches zero near d ≈ 0.9σ and revives slightly beyond
        let ds = log_space(0.005, 0.8, 80);
        let rows: Vec<FisherResult> = ds
            .iter()
            .map(|&d| fisher_decomposed(&ap, 100.0, &BinarySource::new(d, 0.0).unwrap()).unwrap())
            .collect();
        let sr_d: Vec<f64> = rows.iter().map(|f| f.sub_rayleigh_d()).collect();
        let peak = sr_d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(peak > 0 && peak < ds.len() - 1);
        assert!(sr_d[..=peak].windows(2).all(|w| w[1] > w[0]));
        assert!(sr_d[peak..].windows(2).all(|w| w[1] < w[0]));
        assert!(rows.windows(2).all(|w| w[1].sub_rayleigh_c() < w[0].sub_rayleigh_c()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_is_shift_invariant_and_scales_with_sigma(
        t in 0.02f64..3.0,
        sigma in 0.4f64..2.5,
        xc in -3.0f64..3.0,
        snr in 1.0f64..500.0,
        hard in any::<bool>(),
    ) {
        let model = if hard { ApertureModel::Hard } else { ApertureModel::Soft };
        let unit = fisher_decomposed(&Aperture::new(model, 1.0).unwrap(), snr, &BinarySource::new(t, 0.0).unwrap()).unwrap();
        let scaled = fisher_decomposed(&Aperture::new(model, sigma).unwrap(), snr, &BinarySource::new(t * sigma, xc).unwrap()).unwrap();
        let s2 = sigma * sigma;
        for k in [0, 3] {
            prop_assert!((scaled.matrix[k] * s2 - unit.matrix[k]).abs() <= 1e-7 * unit.matrix[k].abs().max(1e-3));
        }
        prop_assert!(scaled.dc().abs() <= 1e-6 * scaled.dd().max(scaled.cc()));
    }
}
