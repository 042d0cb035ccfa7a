//! Frequency grids, spectral filters and the 2D discrete Fourier transform.

mod export;
mod fft;
mod grid;
mod kernel;

pub use export::{read_flat_f64, write_flat_f64, FlatArray};
pub use fft::{forward_spectrum, inverse_spectrum, Fft2d};
pub use grid::{build_frequency_grid, FrequencyGrid};
pub use kernel::{
    build_kernel, build_lowpass, build_pst_kernel, build_quadratic_kernel, pst_profile,
    AmplitudeFilter, PhaseKernel,
};
