use crate::error::{Error, Result};

/// Normalized spatial-frequency coordinates for every bin of an
/// `height x width` spectrum.
///
/// Frequencies are in cycles per pixel, in `[-0.5, 0.5)`, laid out in the
/// unshifted order of the discrete transform: `0, 1/n, ..., -1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    height: usize,
    width: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    r: Vec<f64>,
    r_max: f64,
}

/// Signed frequency of bin `k` out of `n`, in cycles per sample.
pub(crate) fn bin_frequency(k: usize, n: usize) -> f64 {
    let positive = n.div_ceil(2);
    if k < positive {
        k as f64 / n as f64
    } else {
        -((n - k) as f64) / n as f64
    }
}

pub fn build_frequency_grid(height: usize, width: usize) -> Result<FrequencyGrid> {
    if height < 2 || width < 2 {
        return Err(Error::DimensionTooSmall { height, width });
    }
    let u: Vec<f64> = (0..width).map(|k| bin_frequency(k, width)).collect();
    let v: Vec<f64> = (0..height).map(|k| bin_frequency(k, height)).collect();
    let mut r = Vec::with_capacity(height * width);
    for &vy in &v {
        for &ux in &u {
            r.push(ux.hypot(vy));
        }
    }
    let r_max = r.iter().copied().fold(0.0, f64::max);
    Ok(FrequencyGrid {
        height,
        width,
        u,
        v,
        r,
        r_max,
    })
}

impl FrequencyGrid {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Horizontal frequency of column `col`.
    pub fn u(&self, col: usize) -> f64 {
        self.u[col]
    }

    /// Vertical frequency of row `row`.
    pub fn v(&self, row: usize) -> f64 {
        self.v[row]
    }

    pub fn r(&self, row: usize, col: usize) -> f64 {
        self.r[row * self.width + col]
    }

    /// Radial frequency of every bin, row-major.
    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    /// Largest radius on the grid (the Nyquist corner for even sizes).
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
}
