//! Shared helpers for unit tests: smooth synthetic images and small fitted
//! models.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::basis::BandLimitSpec;
use crate::fbspca::{fit, FbModel};
use crate::grid::Image;

/// Smooth multi-bump image with spectrum well inside the band limit.
pub fn bump_image(side: usize, rng: &mut ChaCha8Rng) -> Image<f64> {
    let c = side as f64 / 2.0;
    let rad = 0.6 * c * 0.7;
    let mut img = Image::<f64>::zeros(side);
    for _ in 0..4 {
        let ang = rng.gen::<f64>() * std::f64::consts::TAU;
        let rr = rng.gen::<f64>() * rad;
        let (bx, by) = (c + rr * ang.cos(), c + rr * ang.sin());
        let sx = 1.5 + 2.0 * rng.gen::<f64>();
        let sy = 1.5 + 2.0 * rng.gen::<f64>();
        let amp = 0.5 + rng.gen::<f64>();
        for x in 0..side {
            for y in 0..side {
                let dx = (x as f64 - bx) / sx;
                let dy = (y as f64 - by) / sy;
                *img.at_mut(x, y) += -amp * (-0.5 * (dx * dx + dy * dy)).exp();
            }
        }
    }
    img
}

/// A small model fitted on a sign-symmetric bump stack (zero mean image).
pub fn small_model(side: usize, m: usize, seed: u64) -> FbModel<f64> {
    let spec = BandLimitSpec::new(side, 0.6, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stack = Vec::new();
    for _ in 0..30 {
        let b = bump_image(side, &mut rng);
        stack.push(b.map(|v| -v));
        stack.push(b);
    }
    fit(&stack, &spec, m).unwrap()
}

/// A small model with a non-trivial mean image: bump stack plus a common
/// offset pattern.
pub fn small_model_with_mean(side: usize, m: usize, seed: u64) -> FbModel<f64> {
    let spec = BandLimitSpec::new(side, 0.6, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = bump_image(side, &mut rng);
    let mut stack = Vec::new();
    for _ in 0..50 {
        let b = bump_image(side, &mut rng);
        let img = Image::from_vec(
            side,
            base.as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(&a, &c)| 0.5 * a + c)
                .collect(),
        );
        stack.push(img);
    }
    fit(&stack, &spec, m).unwrap()
}
