//! Steerable Fourier-Bessel PCA clustering and rigid alignment of noisy 2D
//! projection images.
//!
//! The pipeline represents each image by complex coefficients on a steerable
//! Fourier-Bessel principal component basis, fits a mixture of polar
//! Gaussians to the coefficient magnitudes and phases by EM, and aligns
//! samples over random rotation grids and ring-shaped translation grids.

pub mod align;
pub mod basis;
pub mod bessel;
pub mod center;
pub mod checks;
pub mod error;
pub mod fbspca;
pub mod fft;
pub mod gmm;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod simulate;
pub mod translate;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use scalar::{wrap_angle, Scalar};

/// Concrete single-precision aliases.
pub mod f32 {
    pub type Image = crate::grid::Image<f32>;
    pub type CGrid = crate::grid::CGrid<f32>;
    pub type BasisGrid = crate::basis::BasisGrid<f32>;
    pub type FbModel = crate::fbspca::FbModel<f32>;
    pub type PolarCoeff = crate::fbspca::PolarCoeff<f32>;
}

/// Concrete double-precision aliases (the default throughout the CLI).
pub mod f64 {
    pub type Image = crate::grid::Image<f64>;
    pub type CGrid = crate::grid::CGrid<f64>;
    pub type BasisGrid = crate::basis::BasisGrid<f64>;
    pub type FbModel = crate::fbspca::FbModel<f64>;
    pub type PolarCoeff = crate::fbspca::PolarCoeff<f64>;
}
