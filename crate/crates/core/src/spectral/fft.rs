use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::Result;
use crate::field::{ComplexField, ImageField, SpectralField};

/// Reusable 2D transform engine.
///
/// Holds a planner so repeated transforms of the same size reuse their plans.
/// It is not shared between threads; batch workers each own one.
pub struct Fft2d {
    planner: FftPlanner<f64>,
    scratch: Vec<Complex64>,
    transposed: Vec<Complex64>,
}

impl Default for Fft2d {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2d").finish_non_exhaustive()
    }
}

impl Fft2d {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            scratch: Vec::new(),
            transposed: Vec::new(),
        }
    }

    /// Unnormalized forward transform; the DC bin is the sum of all pixels.
    pub fn forward(&mut self, image: &ImageField) -> Result<SpectralField> {
        let (h, w) = image.dims();
        let mut buf: Vec<Complex64> = image.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(h, w, &mut buf, FftDirection::Forward);
        SpectralField::new(h, w, buf)
    }

    /// Inverse transform scaled by `1 / (height * width)`.
    pub fn inverse(&mut self, spectrum: &SpectralField) -> Result<ComplexField> {
        let (h, w) = spectrum.dims();
        let mut buf = spectrum.values().to_vec();
        self.transform(h, w, &mut buf, FftDirection::Inverse);
        let scale = 1.0 / (h * w) as f64;
        for c in &mut buf {
            *c *= scale;
        }
        ComplexField::new(h, w, buf)
    }

    /// In-place transform of a row-major `h x w` buffer: rows, then columns
    /// via a transpose round trip so the output keeps the input layout.
    pub(crate) fn transform(&mut self, h: usize, w: usize, buf: &mut [Complex64], direction: FftDirection) {
        let row_fft = self.planner.plan_fft(w, direction);
        let col_fft = self.planner.plan_fft(h, direction);
        let need = row_fft
            .get_inplace_scratch_len()
            .max(col_fft.get_inplace_scratch_len());
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::default());
        }

        for row in buf.chunks_exact_mut(w) {
            row_fft.process_with_scratch(row, &mut self.scratch[..row_fft.get_inplace_scratch_len()]);
        }

        self.transposed.clear();
        self.transposed.resize(h * w, Complex64::default());
        transpose(h, w, buf, &mut self.transposed);
        for col in self.transposed.chunks_exact_mut(h) {
            col_fft.process_with_scratch(col, &mut self.scratch[..col_fft.get_inplace_scratch_len()]);
        }
        transpose(w, h, &self.transposed, buf);
    }
}

fn transpose(h: usize, w: usize, src: &[Complex64], dst: &mut [Complex64]) {
    for row in 0..h {
        for col in 0..w {
            dst[col * h + row] = src[row * w + col];
        }
    }
}

pub fn forward_spectrum(image: &ImageField) -> Result<SpectralField> {
    Fft2d::new().forward(image)
}

pub fn inverse_spectrum(spectrum: &SpectralField) -> Result<ComplexField> {
    Fft2d::new().inverse(spectrum)
}
