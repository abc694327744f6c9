mod common;

use common::{miou_oracle, Lcg};
use proptest::prelude::*;
use scafrest_core::linalg::Matrix;
use scafrest_core::metrics::{
    fit_gaussian, frechet_distance, mae, miou, psnr, ssim, EmbeddingSet, Gaussian,
};
use scafrest_core::raster::{BinaryMask, ColorSpace, Raster};

fn random_mask(rng: &mut Lcg, w: usize, h: usize) -> BinaryMask {
    BinaryMask::new(w, h, (0..w * h).map(|_| rng.coin()).collect()).unwrap()
}

fn random_image(rng: &mut Lcg, w: usize, h: usize, space: ColorSpace) -> Raster<f64> {
    Raster::from_fn(w, h, space, |_, _, _| rng.unit()).unwrap()
}

#[test]
fn miou_matches_counting_oracle() {
    let mut rng = Lcg(99);
    for _ in 0..1000 {
        let p = random_mask(&mut rng, 8, 8);
        let g = random_mask(&mut rng, 8, 8);
        assert_eq!(miou(&p, &g).unwrap(), miou_oracle(p.bits(), g.bits()));
        assert_eq!(miou(&p, &p).unwrap(), 1.0);
    }
}

#[test]
fn miou_two_by_two_cases() {
    let gt = BinaryMask::new(2, 2, vec![true, true, false, false]).unwrap();
    let none = BinaryMask::empty(2, 2).unwrap();
    assert_eq!(miou(&none, &gt).unwrap(), 0.25);
    assert_eq!(miou(&gt.complement(), &gt).unwrap(), 0.0);
    assert_eq!(miou(&gt, &gt).unwrap(), 1.0);
}

#[test]
fn self_comparison_identities() {
    let mut rng = Lcg(3);
    for space in [ColorSpace::Gray, ColorSpace::Rgb] {
        for (w, h) in [(16, 16), (23, 14), (11, 11)] {
            let x = random_image(&mut rng, w, h, space);
            assert_eq!(mae(&x, &x).unwrap(), 0.0);
            assert!((ssim(&x, &x).unwrap() - 1.0).abs() < 1e-9);
            assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY);
        }
    }
    let set = EmbeddingSet::new((0..12).map(|_| (0..5).map(|_| rng.unit()).collect()).collect()).unwrap();
    let g = fit_gaussian(&set).unwrap();
    assert!(frechet_distance(&g, &g).unwrap().abs() < 1e-8);
    let copy = Gaussian {
        mean: g.mean.clone(),
        cov: Matrix::from_vec(5, 5, g.cov.data().to_vec()).unwrap(),
    };
    assert!(frechet_distance(&g, &copy).unwrap().abs() < 1e-8);
}

#[test]
fn psnr_closed_forms() {
    let a = Raster::<f64>::filled(9, 7, ColorSpace::Rgb, 0.25).unwrap();
    let b = Raster::<f64>::filled(9, 7, ColorSpace::Rgb, 0.35).unwrap();
    assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    let zero = Raster::<f64>::filled(9, 7, ColorSpace::Gray, 0.0).unwrap();
    let one = Raster::<f64>::filled(9, 7, ColorSpace::Gray, 1.0).unwrap();
    assert!(psnr(&zero, &one).unwrap().abs() < 1e-9);
}

#[test]
fn one_dimensional_frechet_closed_form() {
    let mut rng = Lcg(1234);
    for _ in 0..100 {
        let (m1, m2) = (rng.unit() * 4.0 - 2.0, rng.unit() * 4.0 - 2.0);
        let (s1, s2) = (rng.unit() * 3.0, rng.unit() * 3.0);
        let g = |m: f64, s: f64| Gaussian {
            mean: vec![m],
            cov: Matrix::from_vec(1, 1, vec![s * s]).unwrap(),
        };
        let expect = (m1 - m2).powi(2) + (s1 - s2).powi(2);
        let got = frechet_distance(&g(m1, s1), &g(m2, s2)).unwrap();
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }
}

#[test]
fn diagonal_frechet_sums_per_axis() {
    let a = Gaussian {
        mean: vec![0.0, 1.0],
        cov: Matrix::from_vec(2, 2, vec![4.0, 0.0, 0.0, 1.0]).unwrap(),
    };
    let b = Gaussian {
        mean: vec![1.0, 1.0],
        cov: Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 9.0]).unwrap(),
    };
    // axis 0: 1 + (2-1)^2, axis 1: (1-3)^2
    let got: f64 = frechet_distance(&a, &b).unwrap();
    assert!((got - 6.0).abs() < 1e-10);
}

proptest! {
    #[test]
    fn miou_bounded_and_symmetric(bits in proptest::collection::vec(any::<(bool, bool)>(), 1..80)) {
        let n = bits.len();
        let p = BinaryMask::new(n, 1, bits.iter().map(|b| b.0).collect()).unwrap();
        let g = BinaryMask::new(n, 1, bits.iter().map(|b| b.1).collect()).unwrap();
        let v = miou(&p, &g).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, miou(&g, &p).unwrap());
    }

    #[test]
    fn pixel_metrics_behave(seed in any::<u64>(), w in 11usize..24, h in 11usize..24) {
        let mut rng = Lcg(seed);
        let a = random_image(&mut rng, w, h, ColorSpace::Rgb);
        let b = random_image(&mut rng, w, h, ColorSpace::Rgb);
        let d = mae(&a, &b).unwrap();
        prop_assert!(d >= 0.0 && d <= 1.0);
        prop_assert_eq!(d, mae(&b, &a).unwrap());
        prop_assert!(psnr(&a, &b).unwrap() >= 0.0);
        prop_assert!(ssim(&a, &b).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn frechet_nonnegative_and_symmetric(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = Lcg(seed);
        let mut fit = || {
            let set = EmbeddingSet::new((0..d + 4).map(|_| (0..d).map(|_| rng.unit()).collect()).collect()).unwrap();
            fit_gaussian(&set).unwrap()
        };
        let (a, b) = (fit(), fit());
        let ab = frechet_distance(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - frechet_distance(&b, &a).unwrap()).abs() < 1e-8);
    }
}
