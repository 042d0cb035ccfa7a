use crate::config::{KernelFamily, KernelParams};
use crate::error::{Error, Result};

use super::grid::FrequencyGrid;

/// Pure-phase spectral kernel `phi`, radians per bin.
///
/// `phi` is zero at DC and its largest absolute value equals
/// [`PhaseKernel::strength`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseKernel {
    height: usize,
    width: usize,
    phi: Vec<f64>,
    strength: f64,
}

impl PhaseKernel {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// Same profile with every phase multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid("factor", format!("must be finite and > 0, got {factor}")));
        }
        Ok(Self {
            height: self.height,
            width: self.width,
            phi: self.phi.iter().map(|p| p * factor).collect(),
            strength: self.strength * factor,
        })
    }

    /// Identically zero kernel; only useful as a reference point in tests and
    /// in the small-phase analysis.
    pub fn zero(grid: &FrequencyGrid) -> Self {
        Self {
            height: grid.height(),
            width: grid.width(),
            phi: vec![0.0; grid.height() * grid.width()],
            strength: 0.0,
        }
    }
}

/// Real, positive low-pass gain per bin; 1 at DC.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeFilter {
    height: usize,
    width: usize,
    gain: Vec<f64>,
}

impl AmplitudeFilter {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn gain(&self) -> &[f64] {
        &self.gain
    }

    /// Unit gain everywhere.
    pub fn all_pass(grid: &FrequencyGrid) -> Self {
        Self {
            height: grid.height(),
            width: grid.width(),
            gain: vec![1.0; grid.height() * grid.width()],
        }
    }
}

/// `f(rho) = rho * atan(rho) - ln(1 + rho^2) / 2`, the PST radial profile
/// before normalization. It is the antiderivative of `atan` with `f(0) = 0`,
/// so it is non-negative and non-decreasing for `rho >= 0`.
pub fn pst_profile(rho: f64) -> f64 {
    rho * rho.atan() - 0.5 * (rho * rho).ln_1p()
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

/// `phi(r) = S * f(W r) / f(W r_max)`.
pub fn build_pst_kernel(grid: &FrequencyGrid, strength: f64, warp: f64) -> Result<PhaseKernel> {
    let strength = positive("S", strength)?;
    let warp = positive("W", warp)?;
    let peak = pst_profile(warp * grid.r_max());
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::invalid("W", format!("profile peak {peak} is not usable")));
    }
    let phi = grid
        .radii()
        .iter()
        .map(|&r| strength * (pst_profile(warp * r) / peak))
        .collect();
    Ok(PhaseKernel {
        height: grid.height(),
        width: grid.width(),
        phi,
        strength,
    })
}

/// `phi(r) = strength * (r / r_max)^2`.
pub fn build_quadratic_kernel(grid: &FrequencyGrid, strength: f64) -> Result<PhaseKernel> {
    let strength = positive("strength", strength)?;
    let r_max = grid.r_max();
    let phi = grid
        .radii()
        .iter()
        .map(|&r| {
            let t = r / r_max;
            strength * (t * t)
        })
        .collect();
    Ok(PhaseKernel {
        height: grid.height(),
        width: grid.width(),
        phi,
        strength,
    })
}

/// Kernel for a parameter set: PST uses `S` and `W`, quadratic uses `S` as
/// its peak phase.
pub fn build_kernel(grid: &FrequencyGrid, params: &KernelParams) -> Result<PhaseKernel> {
    match params.family() {
        KernelFamily::PstArctanLog => build_pst_kernel(grid, params.strength(), params.warp()),
        KernelFamily::Quadratic => build_quadratic_kernel(grid, params.strength()),
    }
}

/// Gaussian gain `exp(-r^2 / (2 sigma^2))`, floored at the smallest positive
/// normal `f64` so the gain never underflows to zero.
pub fn build_lowpass(grid: &FrequencyGrid, sigma_lpf: f64) -> Result<AmplitudeFilter> {
    let sigma = positive("sigma_lpf", sigma_lpf)?;
    let denom = 2.0 * sigma * sigma;
    let gain = grid
        .radii()
        .iter()
        .map(|&r| (-(r * r) / denom).exp().max(f64::MIN_POSITIVE))
        .collect();
    Ok(AmplitudeFilter {
        height: grid.height(),
        width: grid.width(),
        gain,
    })
}
