#[path = "common/fixtures.rs"]
mod fixtures;
#[path = "common/oracles.rs"]
mod oracles;

use fba_core::losses::{
    composition_loss_alpha, composition_loss_fb, exclusion_loss, gradient_loss_alpha, l1_alpha,
    l1_fb, laplacian_loss, laplacian_loss_color, GradientOperator,
};
use fba_core::metrics::{
    connectivity_error, gradient_error, mse, sad, ConnectivityParams, GradientParams,
};
use fba_core::pyramid::build_pyramid;
use fba_core::{EvalMask, PixelMap};
use fixtures::*;
use rand::Rng;

#[test]
fn l1_and_compositional_losses_are_bitwise_equal_to_loops() {
    let mut rng = rng(11);
    for _ in 0..30 {
        let (w, h) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let (gt, image) = consistent(&mut rng, w, h);
        let (pred, _) = consistent(&mut rng, w, h);
        let m = mask(&mut rng, w, h, 0.6);
        assert_eq!(
            l1_alpha(&pred.alpha, &gt.alpha, &m).unwrap().to_bits(),
            oracles::l1_alpha(&pred.alpha, &gt.alpha, &m).to_bits()
        );
        assert_eq!(
            composition_loss_alpha(&pred.alpha, &gt.fg, &gt.bg, &image, &m)
                .unwrap()
                .to_bits(),
            oracles::reconstruction(&pred.alpha, &gt.fg, &gt.bg, &image, &m).to_bits()
        );
        assert_eq!(
            l1_fb(&pred.fg, &pred.bg, &gt.fg, &gt.bg, &m).unwrap().to_bits(),
            oracles::l1_fb(&pred.fg, &pred.bg, &gt.fg, &gt.bg, &m).to_bits()
        );
        assert_eq!(
            composition_loss_fb(&pred.fg, &pred.bg, &gt.alpha, &image, &m)
                .unwrap()
                .to_bits(),
            oracles::reconstruction(&gt.alpha, &pred.fg, &pred.bg, &image, &m).to_bits()
        );
    }
}

#[test]
fn gradient_and_exclusion_losses_match_loops() {
    let mut rng = rng(12);
    for _ in 0..30 {
        let (w, h) = (rng.random_range(2..=32), rng.random_range(2..=32));
        let (a, b) = (pixel(&mut rng, w, h), pixel(&mut rng, w, h));
        let (f, g) = (color(&mut rng, w, h), color(&mut rng, w, h));
        let m = mask(&mut rng, w, h, 0.7);
        let got = gradient_loss_alpha(&a, &b, &m, GradientOperator::Forward).unwrap();
        assert!(rel_close(got, oracles::grad_alpha(&a, &b, &m), 1e-6));
        let got = exclusion_loss(&f, &g, &m, GradientOperator::Forward).unwrap();
        assert!(rel_close(got, oracles::exclusion(&f, &g, &m), 1e-6));
    }
}

#[test]
fn laplacian_losses_match_pyramid_oracle() {
    let mut rng = rng(13);
    for _ in 0..10 {
        let (w, h) = (rng.random_range(16..=32), rng.random_range(16..=32));
        let (a, b) = (pixel(&mut rng, w, h), pixel(&mut rng, w, h));
        assert!(rel_close(
            laplacian_loss(&a, &b).unwrap(),
            oracles::laplacian_loss(&a, &b),
            1e-6
        ));
        let (f, g) = (color(&mut rng, w, h), color(&mut rng, w, h));
        assert!(rel_close(
            laplacian_loss_color(&f, &g).unwrap(),
            oracles::laplacian_loss_color(&f, &g),
            1e-6
        ));
    }
}

#[test]
fn laplacian_loss_of_offset_prediction_matches_oracle() {
    let mut rng = rng(14);
    let gt = pixel(&mut rng, 20, 24);
    let pred = gt.map(|v| v + 0.125);
    let got = laplacian_loss(&pred, &gt).unwrap();
    assert!((got - oracles::laplacian_loss(&pred, &gt)).abs() < 1e-6);
    assert!(got < 1e-4);
}

#[test]
fn impulse_pyramid_matches_straight_line_oracle() {
    let mut img = PixelMap::zeros(8, 8);
    img.set(3, 4, 1.0);
    let pyr = build_pyramid(&img, 3).unwrap();
    let (bands, residual) = oracles::pyramid(&img, 3);
    for (got, want) in pyr.levels().iter().zip(&bands) {
        assert_eq!(got.dims(), want.dims());
        assert!(max_abs_diff(got.data(), want.data()) < 1e-6);
    }
    assert!(max_abs_diff(pyr.residual().data(), residual.data()) < 1e-6);
}

#[test]
fn pyramid_matches_oracle_on_odd_sizes() {
    let mut rng = rng(15);
    for (w, h) in [(9, 8), (17, 31), (33, 16), (25, 25)] {
        let img = pixel(&mut rng, w, h);
        let pyr = build_pyramid(&img, 4).unwrap();
        let (bands, residual) = oracles::pyramid(&img, 4);
        for (got, want) in pyr.levels().iter().zip(&bands) {
            assert!(max_abs_diff(got.data(), want.data()) < 1e-6);
        }
        assert!(max_abs_diff(pyr.residual().data(), residual.data()) < 1e-6);
    }
}

#[test]
fn sad_and_mse_are_exact() {
    let mut rng = rng(16);
    for _ in 0..25 {
        let (w, h) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let (a, b) = (pixel(&mut rng, w, h), pixel(&mut rng, w, h));
        let mut m = mask(&mut rng, w, h, 0.5);
        if m.is_empty() {
            m = EvalMask::full(w, h);
        }
        assert_eq!(sad(&a, &b, &m).unwrap(), oracles::sad(&a, &b, &m));
        assert_eq!(mse(&a, &b, &m).unwrap(), oracles::mse(&a, &b, &m));
    }
}

#[test]
fn gradient_error_matches_direct_convolution() {
    let mut rng = rng(17);
    for _ in 0..10 {
        let (w, h) = (rng.random_range(4..=32), rng.random_range(4..=32));
        let (a, b) = (pixel(&mut rng, w, h), pixel(&mut rng, w, h));
        let m = mask(&mut rng, w, h, 0.5);
        let got = gradient_error(&a, &b, &m, GradientParams::default()).unwrap();
        let want = oracles::gradient_error(&a, &b, &m, 1.4, 2.0);
        assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    }
}

#[test]
fn gradient_error_ramp_versus_step() {
    let ramp = PixelMap::from_fn(16, 16, |x, _| x as f32 / 15.0);
    let step = PixelMap::from_fn(16, 16, |x, _| if x < 8 { 0.0 } else { 1.0 });
    let m = EvalMask::full(16, 16);
    let got = gradient_error(&ramp, &step, &m, GradientParams::default()).unwrap();
    let want = oracles::gradient_error(&ramp, &step, &m, 1.4, 2.0);
    assert!(got > 0.0);
    assert!((got - want).abs() < 1e-5);
}

#[test]
fn dog_radius_matches_library() {
    for sigma in [0.5, 1.0, 1.4, 2.0, 3.3] {
        assert_eq!(
            fba_core::metrics::dog_half_size(sigma) as isize,
            oracles::dog_radius(sigma)
        );
    }
    assert_eq!(oracles::dog_radius(1.4), 4);
}

#[test]
fn connectivity_matches_flood_fill_oracle() {
    let mut rng = rng(18);
    let p = ConnectivityParams::default();
    for _ in 0..25 {
        let (w, h) = (rng.random_range(8..=32), rng.random_range(8..=32));
        let (a, b) = matte_pair(&mut rng, w, h);
        let m = mask(&mut rng, w, h, 0.8);
        let got = connectivity_error(&a, &b, &m, p).unwrap();
        let want = oracles::connectivity_error(&a, &b, &m, p.step, p.theta).unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn connectivity_single_flipped_pixel() {
    let gt = PixelMap::from_fn(12, 12, |x, y| {
        if (2..10).contains(&x) && (2..10).contains(&y) {
            1.0
        } else {
            0.0
        }
    });
    let mut pred = gt.clone();
    pred.set(5, 5, 0.0);
    let m = EvalMask::full(12, 12);
    let p = ConnectivityParams::default();
    let got = connectivity_error(&pred, &gt, &m, p).unwrap();
    let want = oracles::connectivity_error(&pred, &gt, &m, p.step, p.theta).unwrap();
    assert_eq!(got, want);
}
