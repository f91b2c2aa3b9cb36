mod common;

use proptest::prelude::*;
use subrayleigh::montecarlo::{empirical_covariance, sample_quadratures, sample_quadratures_stream, SampleSet};
use subrayleigh::{build_covariance, build_gamma, principal_components, Aperture, BinarySource, DetectorGrid, Error};

use common::{cholesky_samples, covariance_standard_error, row_covariance};

fn soft() -> Aperture {
    Aperture::soft(1.0).unwrap()
}

#[test]
fn principal_variances_recovered_from_samples() {
    let src = BinarySource::new(0.2, 0.0).unwrap();
    let grid = DetectorGrid::new(0.0, 4.0, 200).unwrap();
    let set = sample_quadratures(&src.to_source_model(), &soft(), &grid, 100.0, 100_000, 5).unwrap();
    let cov = empirical_covariance(&set).unwrap();
    let chi = (-0.08f64).exp();
    let expected = [50.0 * (1.0 + chi) + 1.0, 50.0 * (1.0 - chi) + 1.0];
    let pcs = principal_components(&src, &soft(), &grid, 100.0).unwrap();
    for k in 0..2 {
        let e = &pcs.vectors[k];
        let v = (e.transpose() * &cov * e)[(0, 0)];
        assert!((v / expected[k] - 1.0).abs() < 0.03, "{v} vs {}", expected[k]);
    }
    assert!(set.mean().norm() <= 5.0 * (200.0f64 / 100_000.0).sqrt());
}

#[test]
fn structured_sampler_matches_cholesky_oracle() {
    let src = BinarySource::new(0.2, 0.0).unwrap().to_source_model();
    let grid = DetectorGrid::new(0.0, 4.0, 60).unwrap();
    let n = 40_000;
    let analytic = build_covariance(build_gamma(&src, &soft(), &grid), 100.0).unwrap().to_dense();
    let structured = empirical_covariance(&sample_quadratures(&src, &soft(), &grid, 100.0, n, 8).unwrap()).unwrap();
    let oracle = row_covariance(&cholesky_samples(&analytic, n, 9));
    for i in 0..60 {
        for j in 0..=i {
            let se = covariance_standard_error(&analytic, i, j, n);
            let z = (structured[(i, j)] - oracle[(i, j)]) / (2f64.sqrt() * se);
            assert!(z.abs() < 5.0, "({i},{j}) z = {z}");
            assert!((structured[(i, j)] - analytic[(i, j)]).abs() < 5.0 * se);
        }
    }
}

#[test]
fn no_signal_gives_white_noise() {
    let src = BinarySource::new(0.2, 0.0).unwrap().to_source_model();
    let grid = DetectorGrid::new(0.0, 4.0, 20).unwrap();
    let n = 100_000;
    let cov = empirical_covariance(&sample_quadratures(&src, &soft(), &grid, 0.0, n, 1).unwrap()).unwrap();
    let nf = n as f64;
    for i in 0..20 {
        assert!((cov[(i, i)] - 1.0).abs() <= 5.0 * (2.0 / nf).sqrt());
        for j in 0..i {
            assert!(cov[(i, j)].abs() <= 5.0 / nf.sqrt());
        }
    }
}

#[test]
fn covariance_error_shrinks_like_inverse_root_n() {
    let src = BinarySource::new(0.2, 0.0).unwrap().to_source_model();
    let grid = DetectorGrid::new(0.0, 4.0, 50).unwrap();
    let analytic = build_covariance(build_gamma(&src, &soft(), &grid), 100.0).unwrap().to_dense();
    let dist: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let set = sample_quadratures(&src, &soft(), &grid, 100.0, n, 77).unwrap();
            (empirical_covariance(&set).unwrap() - &analytic).norm()
        })
        .collect();
    for w in dist.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..7.0).contains(&ratio), "ratio {ratio} ({dist:?})");
    }
}

#[test]
fn seeds_and_streams() {
    let src = BinarySource::new(0.1, 0.0).unwrap().to_source_model();
    let grid = DetectorGrid::new(0.0, 4.0, 30).unwrap();
    let a = sample_quadratures_stream(&src, &soft(), &grid, 50.0, 10, 3, 4).unwrap();
    let b = sample_quadratures_stream(&src, &soft(), &grid, 50.0, 10, 3, 4).unwrap();
    let c = sample_quadratures_stream(&src, &soft(), &grid, 50.0, 10, 3, 5).unwrap();
    let d = sample_quadratures_stream(&src, &soft(), &grid, 50.0, 10, 4, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.samples(), c.samples());
    assert_ne!(a.samples(), d.samples());
    assert!(sample_quadratures(&src, &soft(), &grid, 50.0, 0, 3).is_err());
    assert!(empirical_covariance(&sample_quadratures(&src, &soft(), &grid, 50.0, 1, 3).unwrap()).is_err());
}

#[test]
fn corrupted_dumps_are_rejected() {
    let src = BinarySource::new(0.1, 0.0).unwrap().to_source_model();
    let grid = DetectorGrid::new(0.0, 4.0, 8).unwrap();
    let set = sample_quadratures(&src, &soft(), &grid, 50.0, 3, 3).unwrap();
    let mut buf = Vec::new();
    set.write_to(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"HSQS");

    let mut bad_magic = buf.clone();
    bad_magic[0] = b'X';
    assert!(matches!(SampleSet::read_from(bad_magic.as_slice()), Err(Error::Format(_))));
    let truncated = &buf[..buf.len() - 5];
    assert!(SampleSet::read_from(truncated).is_err());
    let mut huge = buf.clone();
    huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
    assert!(SampleSet::read_from(huge.as_slice()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dump_round_trip(
        d in 0.01f64..2.0,
        xc in -1.0f64..1.0,
        pixels in 2usize..40,
        n in 1usize..20,
        seed in any::<u64>(),
        hard in any::<bool>(),
    ) {
        let ap = if hard { Aperture::hard(0.7).unwrap() } else { soft() };
        let src = BinarySource::new(d, xc).unwrap().to_source_model();
        let grid = DetectorGrid::new(xc, 3.0, pixels).unwrap();
        let set = sample_quadratures(&src, &ap, &grid, 30.0, n, seed).unwrap();
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        prop_assert_eq!(SampleSet::read_from(buf.as_slice()).unwrap(), set);
    }
}
