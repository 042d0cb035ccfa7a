//! Refinement parameters and their flat key-value file format.
//!
//! ```text
//! kernel.family = pst_arctan_log
//! kernel.S = 0.3
//! kernel.W = 15
//! kernel.sigma_lpf = 0.15
//! color_policy = luma
//! normalization = minmax_per_image
//! output_bit_depth = 16
//! ```
//!
//! Every key is required exactly once and unknown keys are rejected, so a
//! training run and an inference run cannot silently disagree on the protocol.
//! Blank lines and lines starting with `#` are ignored.

use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// Arctan-log radial profile of the Phase Stretch Transform.
    PstArctanLog,
    /// Quadratic radial profile (group-velocity dispersion).
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorPolicy {
    Luma,
    PerChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    MinMaxPerImage,
    FixedPhaseRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    pub fn max_code(self) -> f64 {
        match self {
            BitDepth::Eight => u8::MAX as f64,
            BitDepth::Sixteen => u16::MAX as f64,
        }
    }
}

macro_rules! token_enum {
    ($ty:ty, $what:literal, $( $variant:path => $token:literal ),+ $(,)?) => {
        impl $ty {
            pub fn token(self) -> &'static str {
                match self { $( $variant => $token ),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s.to_ascii_lowercase().as_str() {
                    $( $token => Ok($variant), )+
                    other => Err(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        other,
                        [$( $token ),+].join(", ")
                    )),
                }
            }
        }
    };
}

token_enum!(KernelFamily, "kernel family",
    KernelFamily::PstArctanLog => "pst_arctan_log",
    KernelFamily::Quadratic => "quadratic",
);
token_enum!(ColorPolicy, "color policy",
    ColorPolicy::Luma => "luma",
    ColorPolicy::PerChannel => "per_channel",
);
token_enum!(Normalization, "normalization",
    Normalization::MinMaxPerImage => "minmax_per_image",
    Normalization::FixedPhaseRange => "fixed_phase_range",
);

/// Kernel strength `S`, warp `W` and low-pass width `sigma_lpf`.
///
/// For the quadratic family `S` is the peak phase and `W` is unused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    strength: f64,
    warp: f64,
    sigma_lpf: f64,
    family: KernelFamily,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

impl KernelParams {
    pub fn new(family: KernelFamily, strength: f64, warp: f64, sigma_lpf: f64) -> Result<Self> {
        Ok(Self {
            strength: positive("S", strength)?,
            warp: positive("W", warp)?,
            sigma_lpf: positive("sigma_lpf", sigma_lpf)?,
            family,
        })
    }

    /// `S = 0.3`, `W = 15`, `sigma_lpf = 0.15`: the settings used for
    /// histopathology patches.
    pub fn histopathology() -> Self {
        Self {
            strength: 0.3,
            warp: 15.0,
            sigma_lpf: 0.15,
            family: KernelFamily::PstArctanLog,
        }
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn warp(&self) -> f64 {
        self.warp
    }

    pub fn sigma_lpf(&self) -> f64 {
        self.sigma_lpf
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn with_family(mut self, family: KernelFamily) -> Self {
        self.family = family;
        self
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self::histopathology()
    }
}

/// Everything that must be identical between training-time and
/// inference-time refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineryConfig {
    pub kernel: KernelParams,
    pub color_policy: ColorPolicy,
    pub normalization: Normalization,
    pub output_bit_depth: BitDepth,
}

impl Default for RefineryConfig {
    fn default() -> Self {
        Self {
            kernel: KernelParams::default(),
            color_policy: ColorPolicy::Luma,
            normalization: Normalization::MinMaxPerImage,
            output_bit_depth: BitDepth::Sixteen,
        }
    }
}

const KEYS: [&str; 7] = [
    "kernel.family",
    "kernel.S",
    "kernel.W",
    "kernel.sigma_lpf",
    "color_policy",
    "normalization",
    "output_bit_depth",
];

impl RefineryConfig {
    /// Canonical text form. `f64` values use the shortest representation that
    /// parses back to the same bits.
    pub fn to_config_string(&self) -> String {
        let bit_depth = self.output_bit_depth.bits();
        format!(
            "kernel.family = {}\nkernel.S = {}\nkernel.W = {}\nkernel.sigma_lpf = {}\n\
             color_policy = {}\nnormalization = {}\noutput_bit_depth = {}\n",
            self.kernel.family,
            self.kernel.strength,
            self.kernel.warp,
            self.kernel.sigma_lpf,
            self.color_policy,
            self.normalization,
            bit_depth,
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut slots: [Option<(usize, &str)>; 7] = [None; 7];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let slot = KEYS.iter().position(|k| *k == key).ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("unknown key `{key}`"),
            })?;
            if slots[slot].is_some() {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            slots[slot] = Some((line_no, value));
        }

        let mut fields = [(0usize, ""); 7];
        for (i, slot) in slots.iter().enumerate() {
            fields[i] = slot.ok_or_else(|| Error::Config {
                line: 0,
                message: format!("missing key `{}`", KEYS[i]),
            })?;
        }

        fn field<T: FromStr>(f: (usize, &str), key: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            f.1.parse::<T>().map_err(|e| Error::Config {
                line: f.0,
                message: format!("`{key}`: {e}"),
            })
        }

        let family: KernelFamily = field(fields[0], KEYS[0])?;
        let strength: f64 = field(fields[1], KEYS[1])?;
        let warp: f64 = field(fields[2], KEYS[2])?;
        let sigma: f64 = field(fields[3], KEYS[3])?;
        let color_policy: ColorPolicy = field(fields[4], KEYS[4])?;
        let normalization: Normalization = field(fields[5], KEYS[5])?;
        let output_bit_depth = match field::<u32>(fields[6], KEYS[6])? {
            8 => BitDepth::Eight,
            16 => BitDepth::Sixteen,
            other => {
                return Err(Error::Config {
                    line: fields[6].0,
                    message: format!("`output_bit_depth` must be 8 or 16, got {other}"),
                })
            }
        };
        let kernel = KernelParams::new(family, strength, warp, sigma).map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })?;

        Ok(Self {
            kernel,
            color_policy,
            normalization,
            output_bit_depth,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_config_string()).map_err(|e| Error::io(path, e))
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_config_string().as_bytes()))
    }
}
