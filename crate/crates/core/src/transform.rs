//! The Phase Stretch Transform: spectrum, low-pass, phase kernel, inverse
//! transform, coherent phase detection and normalization.

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::analysis::center_crop;
use crate::config::{KernelParams, Normalization, RefineryConfig};
use crate::error::Result;
use crate::field::{ensure_same_dims, ComplexField, ImageField, PhaseMap, SpectralField};
use crate::spectral::{build_frequency_grid, build_kernel, build_lowpass, AmplitudeFilter, Fft2d, PhaseKernel};

/// Phase spread (radians) at or below which a map counts as constant under
/// min-max normalization. Transform round-off on flat input stays orders of
/// magnitude below this.
pub const FLAT_PHASE_TOLERANCE: f64 = 1e-12;

/// Per-bin `input * gain * exp(-i phi)`.
pub fn apply_spectral_filters(
    spectrum: &SpectralField,
    kernel: &PhaseKernel,
    lpf: &AmplitudeFilter,
) -> Result<SpectralField> {
    ensure_same_dims(spectrum.dims(), kernel.dims())?;
    ensure_same_dims(spectrum.dims(), lpf.dims())?;
    let values = spectrum
        .values()
        .iter()
        .zip(kernel.phi())
        .zip(lpf.gain())
        .map(|((&x, &phi), &gain)| {
            let (sin, cos) = phi.sin_cos();
            (x * gain) * Complex64::new(cos, -sin)
        })
        .collect();
    SpectralField::new(spectrum.height(), spectrum.width(), values)
}

/// Four-quadrant argument of every pixel. A pixel with both parts zero has
/// phase 0.
pub fn detect_phase(field: &ComplexField) -> Result<PhaseMap> {
    let psi = field
        .values()
        .iter()
        .map(|c| if c.re == 0.0 && c.im == 0.0 { 0.0 } else { c.im.atan2(c.re) })
        .collect();
    PhaseMap::new(field.height(), field.width(), psi)
}

/// Maps detected phase onto `[0, 1]`.
///
/// Quantization to the output bit depth happens when the image is written,
/// not here.
pub fn normalize_output(psi: &PhaseMap, policy: Normalization) -> Result<ImageField> {
    let values: Vec<f64> = match policy {
        Normalization::MinMaxPerImage => {
            let (lo, hi) = psi
                .psi()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
            let span = hi - lo;
            if span <= FLAT_PHASE_TOLERANCE {
                vec![0.0; psi.psi().len()]
            } else {
                psi.psi().iter().map(|&p| ((p - lo) / span).clamp(0.0, 1.0)).collect()
            }
        }
        Normalization::FixedPhaseRange => psi
            .psi()
            .iter()
            .map(|&p| ((p + PI) / (2.0 * PI)).clamp(0.0, 1.0))
            .collect(),
    };
    ImageField::new(psi.height(), psi.width(), values)
}

/// Kernel and low-pass filter for one grid size.
#[derive(Debug, Clone)]
pub struct SpectralFilters {
    pub kernel: PhaseKernel,
    pub lpf: AmplitudeFilter,
}

impl SpectralFilters {
    pub fn build(height: usize, width: usize, params: &KernelParams) -> Result<Self> {
        let grid = build_frequency_grid(height, width)?;
        Ok(Self {
            kernel: build_kernel(&grid, params)?,
            lpf: build_lowpass(&grid, params.sigma_lpf())?,
        })
    }
}

/// Stateful PST runner: caches filters per image size and owns an FFT
/// planner. Cheap to create; meant to live for one worker.
#[derive(Debug)]
pub struct Refinery {
    config: RefineryConfig,
    fft: Fft2d,
    filters: HashMap<(usize, usize), SpectralFilters>,
}

impl Refinery {
    pub fn new(config: RefineryConfig) -> Self {
        Self {
            config,
            fft: Fft2d::new(),
            filters: HashMap::new(),
        }
    }

    pub fn config(&self) -> &RefineryConfig {
        &self.config
    }

    /// Complex field after propagation through the low-pass and phase kernel.
    pub fn propagate(&mut self, image: &ImageField) -> Result<ComplexField> {
        let dims = image.dims();
        if !self.filters.contains_key(&dims) {
            let built = SpectralFilters::build(dims.0, dims.1, &self.config.kernel)?;
            self.filters.insert(dims, built);
        }
        let filters = &self.filters[&dims];
        let spectrum = self.fft.forward(image)?;
        let filtered = apply_spectral_filters(&spectrum, &filters.kernel, &filters.lpf)?;
        self.fft.inverse(&filtered)
    }

    /// Detected phase before normalization.
    pub fn phase(&mut self, image: &ImageField) -> Result<PhaseMap> {
        detect_phase(&self.propagate(image)?)
    }

    /// Normalized "analog" feature map.
    pub fn refine(&mut self, image: &ImageField) -> Result<ImageField> {
        let psi = self.phase(image)?;
        normalize_output(&psi, self.config.normalization)
    }

    /// Feature map of the central `fraction` of the image: the phase is
    /// detected on the full frame, cropped, and then normalized over the crop
    /// alone. Keeps phase spikes at the periodic frame seam (where opposite
    /// edges of a non-periodic image meet) from setting the output range.
    /// `fraction = 1.0` is the same as [`Refinery::refine`].
    pub fn refine_center(&mut self, image: &ImageField, fraction: f64) -> Result<ImageField> {
        let psi = center_crop(&self.phase(image)?.to_field(), fraction)?;
        let psi = PhaseMap::new(psi.height(), psi.width(), psi.into_values())?;
        normalize_output(&psi, self.config.normalization)
    }
}

/// One-shot PST of a single-channel image.
pub fn pst(image: &ImageField, config: &RefineryConfig) -> Result<ImageField> {
    Refinery::new(*config).refine(image)
}

/// Detected phase of the PST pipeline, before normalization.
pub fn pst_phase(image: &ImageField, config: &RefineryConfig) -> Result<PhaseMap> {
    Refinery::new(*config).phase(image)
}
