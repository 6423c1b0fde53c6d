//! Square pixel grids (real images and complex Fourier planes) and the
//! bilinear resampling operations shared by the simulator, the translation
//! operators and the centering stage.
//!
//! Coordinates are `(x, y)` = (row, column), row-major storage. Geometric
//! operations treat `side / 2` as the frame center, matching the centered
//! discrete Fourier transform in [`crate::fft`].

use num_complex::Complex;
use std::ops::{Add, Mul};

use crate::scalar::Scalar;

/// A square `side x side` grid of pixels of type `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<P> {
    side: usize,
    data: Vec<P>,
}

/// Real-valued image.
pub type Image<T> = Grid<T>;
/// Complex-valued plane (Fourier grids, complex decodes).
pub type CGrid<T> = Grid<Complex<T>>;

impl<P: Copy + num_traits::Zero> Grid<P> {
    pub fn zeros(side: usize) -> Self {
        Grid {
            side,
            data: vec![P::zero(); side * side],
        }
    }
}

impl<P> Grid<P> {
    pub fn from_vec(side: usize, data: Vec<P>) -> Self {
        assert_eq!(data.len(), side * side, "grid data length");
        Grid { side, data }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> &P {
        &self.data[x * self.side + y]
    }

    #[inline]
    pub fn at_mut(&mut self, x: usize, y: usize) -> &mut P {
        &mut self.data[x * self.side + y]
    }

    pub fn data_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn as_slice(&self) -> &[P] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<P> {
        self.data
    }

    pub fn map<Q>(&self, f: impl Fn(&P) -> Q) -> Grid<Q> {
        Grid {
            side: self.side,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Pixel types that support bilinear blending with weights of type `T`.
pub trait Blend<T>: Copy + num_traits::Zero + Add<Output = Self> + Mul<T, Output = Self> {}
impl<T: Scalar> Blend<T> for T {}
impl<T: Scalar> Blend<T> for Complex<T> {}

/// Pixel types with a real squared magnitude.
pub trait PixelNorm<T> {
    fn mag_sqr(&self) -> T;
}
impl<T: Scalar> PixelNorm<T> for T {
    fn mag_sqr(&self) -> T {
        *self * *self
    }
}
impl<T: Scalar> PixelNorm<T> for Complex<T> {
    fn mag_sqr(&self) -> T {
        self.norm_sqr()
    }
}

impl<P> Grid<P> {
    /// Euclidean norm over all pixels.
    pub fn norm<T: Scalar>(&self) -> T
    where
        P: PixelNorm<T>,
    {
        self.data.iter().map(|v| v.mag_sqr()).sum::<T>().sqrt()
    }
}

impl<P> Grid<P> {
    /// Bilinear sample at fractional coordinates, zero outside the frame.
    pub fn sample_bilinear<T: Scalar>(&self, x: T, y: T) -> P
    where
        P: Blend<T>,
    {
        let side = self.side as isize;
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let ix = x0.as_f64() as isize;
        let iy = y0.as_f64() as isize;
        let one = T::one();
        let mut acc = P::zero();
        let weights = [
            (ix, iy, (one - fx) * (one - fy)),
            (ix + 1, iy, fx * (one - fy)),
            (ix, iy + 1, (one - fx) * fy),
            (ix + 1, iy + 1, fx * fy),
        ];
        for (px, py, w) in weights {
            if px >= 0 && px < side && py >= 0 && py < side {
                acc = acc + *self.at(px as usize, py as usize) * w;
            }
        }
        acc
    }

    /// Shift content by `t` pixels (bilinear, zero fill): `out(x) = in(x - t)`.
    pub fn shift<T: Scalar>(&self, t: [T; 2]) -> Grid<P>
    where
        P: Blend<T>,
    {
        let side = self.side;
        let mut out = Vec::with_capacity(side * side);
        for ix in 0..side {
            for iy in 0..side {
                let x = T::from_usize(ix).unwrap() - t[0];
                let y = T::from_usize(iy).unwrap() - t[1];
                out.push(self.sample_bilinear(x, y));
            }
        }
        Grid { side, data: out }
    }

    /// Rotate content by `alpha` radians about the frame center.
    ///
    /// The direction is the one under which image rotation by `alpha`
    /// advances steerable coefficient phases by `alpha * omega`.
    pub fn rotate<T: Scalar>(&self, alpha: T) -> Grid<P>
    where
        P: Blend<T>,
    {
        self.warp(alpha, [T::zero(), T::zero()])
    }

    /// Rotate by `alpha` then shift by `t`, in a single resampling pass.
    pub fn warp<T: Scalar>(&self, alpha: T, t: [T; 2]) -> Grid<P>
    where
        P: Blend<T>,
    {
        let side = self.side;
        let c = T::from_usize(side).unwrap() / T::lit(2.0);
        let (sin_a, cos_a) = alpha.sin_cos();
        let mut out = Vec::with_capacity(side * side);
        for ix in 0..side {
            for iy in 0..side {
                let xs = T::from_usize(ix).unwrap() - c - t[0];
                let ys = T::from_usize(iy).unwrap() - c - t[1];
                let xr = cos_a * xs - sin_a * ys + c;
                let yr = sin_a * xs + cos_a * ys + c;
                out.push(self.sample_bilinear(xr, yr));
            }
        }
        Grid { side, data: out }
    }
}

impl<T: Scalar> Image<T> {
    pub fn mean(&self) -> T {
        let n = T::from_usize(self.data.len()).unwrap();
        self.data.iter().copied().sum::<T>() / n
    }

    /// Population variance over the frame.
    pub fn variance(&self) -> T {
        let mu = self.mean();
        let n = T::from_usize(self.data.len()).unwrap();
        self.data
            .iter()
            .map(|&v| {
                let d = v - mu;
                d * d
            })
            .sum::<T>()
            / n
    }

    pub fn min_max(&self) -> (T, T) {
        let mut lo = self.data[0];
        let mut hi = self.data[0];
        for &v in &self.data {
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        (lo, hi)
    }
}

impl<T: Scalar> CGrid<T> {
    /// Discrete inner product `sum conj(self) * other`.
    pub fn inner(&self, other: &CGrid<T>) -> Complex<T> {
        debug_assert_eq!(self.side, other.side);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += a.conj() * b;
        }
        acc
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v = *v * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp(side: usize) -> Image<f64> {
        let mut img = Image::zeros(side);
        for x in 0..side {
            for y in 0..side {
                *img.at_mut(x, y) = x as f64 + 0.25 * y as f64;
            }
        }
        img
    }

    #[test]
    fn integer_shift_is_exact() {
        let img = ramp(16);
        let sh = img.shift([3.0, -2.0]);
        for x in 4..16 {
            for y in 0..13 {
                assert_relative_eq!(*sh.at(x, y), *img.at(x - 3, y + 2), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_shift_identity() {
        let img = ramp(12);
        let sh = img.shift([0.0, 0.0]);
        assert_eq!(img, sh);
    }

    #[test]
    fn rotate_by_zero_identity() {
        let img = ramp(12);
        let r = img.rotate(0.0);
        for (a, b) in img.as_slice().iter().zip(r.as_slice()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn warp_composes_rotation_and_shift() {
        let img = ramp(32);
        let w = img.warp(0.3, [1.6, -2.2]);
        let two_step = img.rotate(0.3).shift([1.6, -2.2]);
        // not identical (one vs two resamplings) but close away from borders
        let mut worst: f64 = 0.0;
        for x in 8..24 {
            for y in 8..24 {
                worst = worst.max((w.at(x, y) - two_step.at(x, y)).abs());
            }
        }
        assert!(worst < 0.3, "worst interior deviation {worst}");
    }
}
