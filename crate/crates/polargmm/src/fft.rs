//! Centered 2D discrete Fourier transforms.
//!
//! `fhat` maps an image to its Fourier grid with the zero frequency at pixel
//! `(L/2, L/2)` and the spatial origin likewise at the frame center, so that
//! real-space geometry (rotation about the center, radial coordinates) carries
//! over to frequency space unchanged. Transforms are normalized by `1/L`
//! forward and `L` backward, making the pair unitary on `L^2` pixels.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::grid::{CGrid, Grid, Image};
use crate::scalar::Scalar;

/// Circularly shift both axes by `+shift` (modular).
fn roll2<P: Copy>(g: &Grid<P>, shift: usize) -> Grid<P> {
    let side = g.side();
    let mut out = Vec::with_capacity(side * side);
    for x in 0..side {
        for y in 0..side {
            let sx = (x + side - shift % side) % side;
            let sy = (y + side - shift % side) % side;
            out.push(*g.at(sx, sy));
        }
    }
    Grid::from_vec(side, out)
}

/// Move index 0 to the center `L/2` on both axes.
pub fn fftshift<P: Copy>(g: &Grid<P>) -> Grid<P> {
    roll2(g, g.side() / 2)
}

/// Inverse of [`fftshift`]: move the center `L/2` back to index 0.
pub fn ifftshift<P: Copy>(g: &Grid<P>) -> Grid<P> {
    let side = g.side();
    roll2(g, side - side / 2)
}

fn fft2_in_place<T: Scalar>(data: &mut [Complex<T>], side: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(side)
    } else {
        planner.plan_fft_forward(side)
    };
    // rows
    for row in data.chunks_exact_mut(side) {
        fft.process(row);
    }
    // columns, via transpose
    let mut col = vec![Complex::new(T::zero(), T::zero()); side];
    for y in 0..side {
        for x in 0..side {
            col[x] = data[x * side + y];
        }
        fft.process(&mut col);
        for x in 0..side {
            data[x * side + y] = col[x];
        }
    }
}

/// Centered forward transform of a real image, scaled by `1/L`.
pub fn fhat<T: Scalar>(img: &Image<T>) -> CGrid<T> {
    let side = img.side();
    let shifted = ifftshift(img);
    let mut data: Vec<Complex<T>> = shifted
        .as_slice()
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    fft2_in_place(&mut data, side, false);
    let scale = T::one() / T::from_usize(side).unwrap();
    for v in &mut data {
        *v = *v * scale;
    }
    fftshift(&Grid::from_vec(side, data))
}

/// Centered inverse transform, scaled by `L`; returns the complex plane.
pub fn ifhat<T: Scalar>(grid: &CGrid<T>) -> CGrid<T> {
    let side = grid.side();
    let shifted = ifftshift(grid);
    let mut data = shifted.into_vec();
    fft2_in_place(&mut data, side, true);
    // rustfft's inverse is unnormalized: divide by L^2, then scale by L
    let scale = T::one() / T::from_usize(side).unwrap();
    for v in &mut data {
        *v = *v * scale;
    }
    fftshift(&Grid::from_vec(side, data))
}

/// Real part of the centered inverse transform.
pub fn ifhat_real<T: Scalar>(grid: &CGrid<T>) -> Image<T> {
    ifhat(grid).map(|c| c.re)
}
