//! Physics-derived image standardization with the Phase Stretch Transform.
//!
//! An image is treated as a real optical field. Its spectrum is low-pass
//! filtered, multiplied by a pure-phase spectral kernel `exp(-i phi)`, and
//! transformed back; the per-pixel argument of the resulting complex field is
//! the output feature map. Because every step before phase detection is
//! linear and phase detection is a ratio, the output is exactly invariant to
//! positive rescaling of the input intensity.
//!
//! ```
//! use phase_refinery::{pst, ImageField, RefineryConfig};
//!
//! let image = phase_refinery::fixtures::textured(64, 64);
//! let config = RefineryConfig::default();
//! let refined = pst(&image, &config).unwrap();
//! let brighter = pst(&image.map(|v| 3.0 * v).unwrap(), &config).unwrap();
//! for (a, b) in refined.values().iter().zip(brighter.values()) {
//!     assert!((a - b).abs() < 1e-9);
//! }
//! ```

pub mod analysis;
pub mod config;
mod error;
pub mod field;
pub mod fixtures;
pub mod pipeline;
pub mod small_phase;
pub mod spectral;
pub mod transform;

pub use config::{BitDepth, ColorPolicy, KernelFamily, KernelParams, Normalization, RefineryConfig};
pub use error::{Error, Result};
pub use field::{ComplexField, ImageField, PhaseMap, SpectralField};
pub use transform::{pst, pst_phase, Refinery};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/spectral-kernels.md")]
    pub struct SpectralKernels;
    #[doc = include_str!("../../../book/src/phase-detection.md")]
    pub struct PhaseDetection;
    #[doc = include_str!("../../../book/src/small-phase.md")]
    pub struct SmallPhase;
    #[doc = include_str!("../../../book/src/illumination.md")]
    pub struct Illumination;
    #[doc = include_str!("../../../book/src/batch-refinery.md")]
    pub struct BatchRefinery;
    #[doc = include_str!("../../../book/src/domain-shift.md")]
    pub struct DomainShift;
    #[doc = include_str!("../../../book/src/file-formats.md")]
    pub struct FileFormats;
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
}
