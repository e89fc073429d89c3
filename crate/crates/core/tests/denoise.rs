mod common;

use glg::denoise::{add_noise, denoise_image, psnr, shrink_coefficient, shrinkage_factor};
use glg::{FitConfig, Filter, ImageGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scene(side: usize) -> ImageGrid {
    ImageGrid::from_fn(side, |y, x| {
        let (dy, dx) = (y as f64 - 20.0, x as f64 - 36.0);
        let disk = if dy * dy + dx * dx < 180.0 { 0.8 } else { 0.25 };
        disk + 0.1 * (0.3 * x as f64).sin() + 0.05 * (0.17 * (x + 2 * y) as f64).cos()
    })
    .unwrap()
}

#[test]
fn psnr_examples() {
    let a = ImageGrid::from_fn(64, |y, x| ((x * y) % 9) as f64 / 8.0).unwrap();
    let b = ImageGrid::new(a.values() - 0.1).unwrap();
    assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-10);
    assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    assert!(psnr(&a, &ImageGrid::from_fn(32, |_, _| 0.0).unwrap()).is_err());
}

#[test]
fn psnr_by_hand() {
    let a = ImageGrid::from_fn(4, |y, x| if (y, x) == (0, 0) { 2.0 } else { 0.0 }).unwrap();
    let mut v = a.values().clone();
    v[[3, 3]] = 0.5;
    // 20 log10(4 * 2 / 0.5)
    assert!((psnr(&a, &ImageGrid::new(v).unwrap()).unwrap() - 20.0 * 16f64.log10()).abs() < 1e-12);
}

#[test]
fn shrinkage_matches_direct_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..60 {
        let v = rng.random_range(-3.0..3.0);
        let mu = rng.random_range(-6.0..0.0);
        let var = rng.random_range(0.1..3.0);
        let c = rng.random_range(0.001..0.1);
        let got = shrink_coefficient(v, mu, var, c);
        let want = common::shrink_oracle(v, mu, var, c);
        assert!((got - want).abs() < 1e-6, "v={v} mu={mu} var={var} c={c}: {got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shrinkage_is_odd_and_bounded(v in -5.0..5.0f64, mu in -6.0..1.0f64, var in 0.05..3.0f64, c in 1e-4..0.5f64) {
        let s = shrink_coefficient(v, mu, var, c);
        prop_assert!(s.abs() <= v.abs());
        prop_assert!(s * v >= 0.0);
        prop_assert!((shrink_coefficient(-v, mu, var, c) + s).abs() <= 1e-12 * v.abs().max(1.0));
        let f = shrinkage_factor(v, mu, var, c);
        prop_assert!(f > 0.0 && f <= 1.0);
    }

    #[test]
    fn more_noise_shrinks_more(v in -3.0..3.0f64, mu in -5.0..0.0f64, var in 0.1..2.0f64, c in 1e-3..0.2f64, extra in 1.1..4.0f64) {
        let a = shrinkage_factor(v, mu, var, c);
        let b = shrinkage_factor(v, mu, var, c * extra);
        prop_assert!(b <= a + 1e-9, "{a} then {b}");
    }
}

#[test]
fn noise_is_reproducible() {
    let img = scene(64);
    let a = add_noise(&img, 0.1, 4).unwrap();
    assert_eq!(a, add_noise(&img, 0.1, 4).unwrap());
    assert_ne!(a, add_noise(&img, 0.1, 5).unwrap());
    assert!(add_noise(&img, -0.1, 4).is_err());
    assert_eq!(add_noise(&img, 0.0, 4).unwrap(), img);
}

#[test]
fn denoising_raises_psnr() {
    let clean = scene(64);
    let noisy = add_noise(&clean, 0.1, 8).unwrap();
    let out = denoise_image(&noisy, Filter::Daub4, 3, 0.1, &FitConfig::default()).unwrap();
    let before = psnr(&clean, &noisy).unwrap();
    let after = psnr(&clean, &out.image).unwrap();
    assert!(after > before + 3.0, "{before} -> {after}");
    assert_eq!(out.params.len(), 3);
}

#[test]
fn zero_noise_leaves_the_image() {
    let clean = scene(64);
    let out = denoise_image(&clean, Filter::Daub4, 3, 0.0, &FitConfig::default()).unwrap();
    let worst = (out.image.values() - clean.values()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-8, "{worst}");
}
