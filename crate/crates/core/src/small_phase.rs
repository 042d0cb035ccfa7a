//! First-order (small-phase) analysis of the transform.
//!
//! For `|phi| << 1`, `exp(-i phi) ~ 1 - i phi`, so the propagated field is
//! approximately `E - i G` with `E` the low-passed image and
//! `G = F^-1{ F{E} * phi }`. The detected phase is then close to `-G / E`,
//! and for a quadratic kernel `G` is proportional to `-laplacian(E)`, which
//! makes the detected phase an intensity-equalized Laplacian.

use num_complex::Complex64;

use crate::config::KernelParams;
use crate::error::{Error, Result};
use crate::field::{ensure_same_dims, ImageField, PhaseMap};
use crate::spectral::{build_frequency_grid, build_kernel, build_lowpass, AmplitudeFilter, Fft2d, PhaseKernel};
use crate::transform::{apply_spectral_filters, detect_phase};

/// Relative division guard: pixels with `|E| <= GUARD_FACTOR * max|E|` are
/// treated as having no signal.
pub const GUARD_FACTOR: f64 = 1e-8;

/// `G` and `E` of the first-order expansion, plus the imaginary residue of
/// `G` (zero up to round-off for real input and symmetric kernels).
#[derive(Debug, Clone)]
pub struct FirstOrderTerms {
    pub operator: ImageField,
    pub filtered: ImageField,
    pub imag_residue: f64,
}

pub fn first_order_terms(image: &ImageField, kernel: &PhaseKernel, lpf: &AmplitudeFilter) -> Result<FirstOrderTerms> {
    ensure_same_dims(image.dims(), kernel.dims())?;
    ensure_same_dims(image.dims(), lpf.dims())?;
    let (h, w) = image.dims();
    let mut fft = Fft2d::new();
    let spectrum = fft.forward(image)?;

    let mut weighted = Vec::with_capacity(h * w);
    let mut smoothed = Vec::with_capacity(h * w);
    for ((&x, &gain), &phi) in spectrum.values().iter().zip(lpf.gain()).zip(kernel.phi()) {
        let base: Complex64 = x * gain;
        smoothed.push(base);
        weighted.push(base * phi);
    }
    let g = fft.inverse(&crate::field::SpectralField::new(h, w, weighted)?)?;
    let e = fft.inverse(&crate::field::SpectralField::new(h, w, smoothed)?)?;
    Ok(FirstOrderTerms {
        imag_residue: g.max_abs_imag().max(e.max_abs_imag()),
        operator: g.real(),
        filtered: e.real(),
    })
}

fn guard(field: &ImageField) -> f64 {
    GUARD_FACTOR * field.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn guarded_ratio(num: &ImageField, den: &ImageField, scale: f64) -> Result<ImageField> {
    let eta = guard(den);
    let values = num
        .values()
        .iter()
        .zip(den.values())
        .map(|(&n, &d)| if d.abs() > eta { scale * n / d } else { 0.0 })
        .collect();
    ImageField::new(num.height(), num.width(), values)
}

/// First-order phase `-G / E`, zero where `|E|` is below the guard.
///
/// Values are radians but are not confined to `[-pi, pi]`, so the result is a
/// plain real field rather than a [`PhaseMap`].
pub fn small_phase_reference(image: &ImageField, kernel: &PhaseKernel, lpf: &AmplitudeFilter) -> Result<ImageField> {
    let terms = first_order_terms(image, kernel, lpf)?;
    guarded_ratio(&terms.operator, &terms.filtered, -1.0)
}

/// Periodic 5-point Laplacian.
pub fn discrete_laplacian(image: &ImageField) -> ImageField {
    let (h, w) = image.dims();
    let v = image.values();
    let mut out = Vec::with_capacity(h * w);
    for row in 0..h {
        let up = (row + h - 1) % h;
        let down = (row + 1) % h;
        for col in 0..w {
            let left = (col + w - 1) % w;
            let right = (col + 1) % w;
            out.push(
                v[up * w + col] + v[down * w + col] + v[row * w + left] + v[row * w + right]
                    - 4.0 * v[row * w + col],
            );
        }
    }
    ImageField::new(h, w, out).expect("laplacian of a finite field is finite")
}

/// Equalized Laplacian `laplacian(E) / E`, zero where `|E|` is below the guard.
pub fn laplacian_reference(image: &ImageField) -> Result<ImageField> {
    guarded_ratio(&discrete_laplacian(image), image, 1.0)
}

/// Exact and first-order phase at one kernel scale.
#[derive(Debug, Clone)]
pub struct SmallPhaseResult {
    pub epsilon: f64,
    pub psi_exact: PhaseMap,
    /// `epsilon` times the first-order phase at full kernel strength.
    pub psi_approx: ImageField,
    /// `max |psi_exact - psi_approx| / epsilon` over pixels above the guard.
    pub max_abs_error: f64,
}

/// Compares exact phase detection against the first-order approximation for
/// a sequence of shrinking kernel scales.
///
/// `epsilons` must be non-empty, positive and strictly decreasing.
pub fn small_phase_convergence(
    image: &ImageField,
    params: &KernelParams,
    epsilons: &[f64],
) -> Result<Vec<SmallPhaseResult>> {
    if epsilons.is_empty() {
        return Err(Error::invalid("epsilons", "empty list"));
    }
    if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::invalid("epsilons", "every scale must be finite and > 0"));
    }
    if epsilons.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::invalid("epsilons", "scales must be strictly decreasing"));
    }

    let (h, w) = image.dims();
    let grid = build_frequency_grid(h, w)?;
    let kernel = build_kernel(&grid, params)?;
    let lpf = build_lowpass(&grid, params.sigma_lpf())?;

    let terms = first_order_terms(image, &kernel, &lpf)?;
    let reference = guarded_ratio(&terms.operator, &terms.filtered, -1.0)?;
    let eta = guard(&terms.filtered);

    let mut fft = Fft2d::new();
    let spectrum = fft.forward(image)?;
    epsilons
        .iter()
        .map(|&eps| {
            let scaled = kernel.scaled(eps)?;
            let field = fft.inverse(&apply_spectral_filters(&spectrum, &scaled, &lpf)?)?;
            let psi_exact = detect_phase(&field)?;
            let psi_approx = reference.map(|v| eps * v)?;
            let max_abs_error = psi_exact
                .psi()
                .iter()
                .zip(psi_approx.values())
                .zip(terms.filtered.values())
                .filter(|(_, e)| e.abs() > eta)
                .fold(0.0f64, |m, ((a, b), _)| m.max((a - b).abs()))
                / eps;
            Ok(SmallPhaseResult {
                epsilon: eps,
                psi_exact,
                psi_approx,
                max_abs_error,
            })
        })
        .collect()
}

/// Pearson correlation of two equally sized slices.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

/// Values of `field` at least `margin` pixels away from every border.
pub fn interior(field: &ImageField, margin: usize) -> Vec<f64> {
    let (h, w) = field.dims();
    let mut out = Vec::new();
    for row in margin..h.saturating_sub(margin) {
        for col in margin..w.saturating_sub(margin) {
            out.push(field.get(row, col));
        }
    }
    out
}
