//! Two-dimensional grids shared by every stage of the transform.
//!
//! All grids are stored row-major with `height` rows of `width` samples and
//! are immutable once built. Constructors reject grids smaller than 2x2 and
//! any non-finite sample.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_dims(height: usize, width: usize, len: usize) -> Result<()> {
    if height < 2 || width < 2 {
        return Err(Error::DimensionTooSmall { height, width });
    }
    let expected = height * width;
    if len != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: len,
        });
    }
    Ok(())
}

fn check_complex(values: &[Complex64]) -> Result<()> {
    match values
        .iter()
        .position(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Real-valued intensity grid.
///
/// Intensities are nominally in `[0, 1]`; only finiteness is enforced, so the
/// same type also carries intermediate real maps such as the equalized
/// Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageField {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ImageField {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(height, width, values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Builds a field by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(height.saturating_mul(width));
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self::new(height, width, values)
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height.saturating_mul(width)])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Applies `f` to every sample, re-validating finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.height, self.width, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Complex-valued field in the spatial domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    height: usize,
    width: usize,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(height: usize, width: usize, values: Vec<Complex64>) -> Result<Self> {
        check_dims(height, width, values.len())?;
        check_complex(&values)?;
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Real parts as an [`ImageField`].
    pub fn real(&self) -> ImageField {
        ImageField {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|c| c.re).collect(),
        }
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }
}

/// Complex spectrum indexed by frequency bin; bin `(0, 0)` holds DC.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    height: usize,
    width: usize,
    values: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(height: usize, width: usize, values: Vec<Complex64>) -> Result<Self> {
        check_dims(height, width, values.len())?;
        check_complex(&values)?;
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dc(&self) -> Complex64 {
        self.values[0]
    }

    /// Sum of squared magnitudes over all bins.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Detected phase in radians, one "phixel" per pixel, always within `[-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    height: usize,
    width: usize,
    psi: Vec<f64>,
}

impl PhaseMap {
    pub fn new(height: usize, width: usize, psi: Vec<f64>) -> Result<Self> {
        check_dims(height, width, psi.len())?;
        for (index, &value) in psi.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if !(-PI..=PI).contains(&value) {
                return Err(Error::PhaseOutOfRange { index, value });
            }
        }
        Ok(Self { height, width, psi })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.psi[row * self.width + col]
    }

    /// Largest absolute per-pixel difference against another map of the same size.
    pub fn max_abs_diff(&self, other: &PhaseMap) -> Result<f64> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(self
            .psi
            .iter()
            .zip(&other.psi)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Phases reinterpreted as a real field.
    pub fn to_field(&self) -> ImageField {
        ImageField {
            height: self.height,
            width: self.width,
            values: self.psi.clone(),
        }
    }
}
