//! Illumination robustness study: graded linear illumination ramps, Shannon
//! entropy of raw and refined images, and entropy-drop defect flags.

use std::fmt::Write as _;

use crate::config::RefineryConfig;
use crate::error::{Error, Result};
use crate::field::ImageField;
use crate::transform::Refinery;

/// Dark-edge multiplier for each standard level (index 0 is level 1).
pub const STANDARD_FLOORS: [f64; 6] = [1.0, 0.8, 0.6, 0.4, 0.2, 0.0];
pub const LEVELS: u8 = 6;
pub const DEFAULT_BINS: usize = 256;
pub const DEFAULT_DROP_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlluminationProfile {
    /// Horizontal ramp, bright at the left edge.
    LinearRamp,
}

/// One graded illumination condition.
///
/// Levels 1 to 5 ramp linearly from 1 at the left edge to `floor` at the
/// right edge. Level 6 ramps from 1 to 0 at the horizontal midpoint and stays
/// dark beyond it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationSpec {
    level: u8,
    profile: IlluminationProfile,
    floor: f64,
}

impl IlluminationSpec {
    pub fn standard(level: u8) -> Result<Self> {
        if !(1..=LEVELS).contains(&level) {
            return Err(Error::invalid("level", format!("must be 1..=6, got {level}")));
        }
        Ok(Self {
            level,
            profile: IlluminationProfile::LinearRamp,
            floor: STANDARD_FLOORS[level as usize - 1],
        })
    }

    /// A non-standard floor for levels 2..=5. Level 1 must stay uniform and
    /// level 6 must reach zero.
    pub fn with_floor(level: u8, floor: f64) -> Result<Self> {
        let spec = Self::standard(level)?;
        if !(0.0..=1.0).contains(&floor) {
            return Err(Error::invalid("floor", format!("must be in [0, 1], got {floor}")));
        }
        if level == 1 && floor != 1.0 {
            return Err(Error::invalid("floor", "level 1 is uniform illumination (floor 1)"));
        }
        if level == LEVELS && floor != 0.0 {
            return Err(Error::invalid("floor", "level 6 is total regional loss (floor 0)"));
        }
        Ok(Self { floor, ..spec })
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn profile(&self) -> IlluminationProfile {
        self.profile
    }

    /// Multiplier for column `col` of a `width`-wide image.
    pub fn multiplier(&self, col: usize, width: usize) -> f64 {
        let t = col as f64 / (width - 1) as f64;
        if self.level == LEVELS {
            (1.0 - 2.0 * t).max(0.0)
        } else {
            1.0 - (1.0 - self.floor) * t
        }
    }
}

pub fn apply_illumination(image: &ImageField, spec: &IlluminationSpec) -> Result<ImageField> {
    let w = image.width();
    let ramp: Vec<f64> = (0..w).map(|c| spec.multiplier(c, w)).collect();
    ImageField::from_fn(image.height(), w, |r, c| (image.get(r, c) * ramp[c]).clamp(0.0, 1.0))
}

/// Central `fraction` of the image in each dimension (at least 2x2).
pub fn center_crop(image: &ImageField, fraction: f64) -> Result<ImageField> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("crop", format!("must be in (0, 1], got {fraction}")));
    }
    let (h, w) = image.dims();
    let ch = ((h as f64 * fraction).round() as usize).clamp(2, h);
    let cw = ((w as f64 * fraction).round() as usize).clamp(2, w);
    let (r0, c0) = ((h - ch) / 2, (w - cw) / 2);
    ImageField::from_fn(ch, cw, |r, c| image.get(r0 + r, c0 + c))
}

fn histogram_of(values: impl Iterator<Item = f64>, bins: usize) -> Result<(Vec<u64>, u64)> {
    if bins < 2 {
        return Err(Error::invalid("bins", format!("need at least 2, got {bins}")));
    }
    let mut counts = vec![0u64; bins];
    let mut total = 0u64;
    for (index, v) in values.enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::IntensityOutOfRange { index, value: v });
        }
        let k = ((v * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
        total += 1;
    }
    Ok((counts, total))
}

fn entropy_from_counts(counts: &[u64], total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    // a single occupied bin sums to -0.0
    h.max(0.0)
}

/// Shannon entropy in bits over `bins` uniform bins on `[0, 1]`.
pub fn shannon_entropy(image: &ImageField, bins: usize) -> Result<f64> {
    shannon_entropy_of(image.values().iter().copied(), bins)
}

/// Entropy of an arbitrary stream of `[0, 1]` samples (e.g. several channels
/// pooled together).
pub fn shannon_entropy_of(values: impl Iterator<Item = f64>, bins: usize) -> Result<f64> {
    let (counts, total) = histogram_of(values, bins)?;
    Ok(entropy_from_counts(&counts, total))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelEntropy {
    pub level: u8,
    pub floor: f64,
    pub raw_bits: f64,
    pub refined_bits: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub levels: Vec<LevelEntropy>,
    /// Population standard deviation over levels 1..=5.
    pub raw_std: f64,
    pub refined_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub bins: usize,
    /// Fraction of the image (centred) used for the entropy measurement.
    pub crop: f64,
    pub drop_fraction: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            crop: 1.0,
            drop_fraction: DEFAULT_DROP_FRACTION,
        }
    }
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Flags every level whose refined entropy falls below `drop_fraction` times
/// the refined entropy at level 1. Nothing is flagged when level 1 has zero
/// entropy.
pub fn flag_defective(report: &EntropyReport, drop_fraction: f64) -> Result<Vec<bool>> {
    if !(drop_fraction > 0.0 && drop_fraction < 1.0) {
        return Err(Error::invalid("drop_fraction", format!("must be in (0, 1), got {drop_fraction}")));
    }
    let baseline = report
        .levels
        .iter()
        .find(|l| l.level == 1)
        .map(|l| l.refined_bits)
        .ok_or_else(|| Error::invalid("report", "no level-1 entry"))?;
    Ok(report
        .levels
        .iter()
        .map(|l| l.refined_bits < drop_fraction * baseline)
        .collect())
}

/// Runs all six illumination levels through the refinery and measures raw and
/// refined entropy.
///
/// The refined measurement uses [`Refinery::refine_center`], so the output
/// range is set by the analyzed region. With `crop = 1.0` this is exactly the
/// entropy of [`pst`]. Normalizing the full map instead lets phase spikes at
/// the periodic seam of the ramp (bright left edge wrapping onto the dark
/// right edge) set the range for the whole image.
///
/// [`pst`]: crate::transform::pst
pub fn entropy_stability_study(image: &ImageField, config: &RefineryConfig, options: StudyOptions) -> Result<EntropyReport> {
    let mut refinery = Refinery::new(*config);
    let mut levels = Vec::with_capacity(LEVELS as usize);
    for level in 1..=LEVELS {
        let spec = IlluminationSpec::standard(level)?;
        let lit = apply_illumination(image, &spec)?;
        let refined = refinery.refine_center(&lit, options.crop)?;
        levels.push(LevelEntropy {
            level,
            floor: spec.floor(),
            raw_bits: shannon_entropy(&center_crop(&lit, options.crop)?, options.bins)?,
            refined_bits: shannon_entropy(&refined, options.bins)?,
            flagged: false,
        });
    }
    let raw: Vec<f64> = levels[..5].iter().map(|l| l.raw_bits).collect();
    let refined: Vec<f64> = levels[..5].iter().map(|l| l.refined_bits).collect();
    let mut report = EntropyReport {
        levels,
        raw_std: population_std(&raw),
        refined_std: population_std(&refined),
    };
    let flags = flag_defective(&report, options.drop_fraction)?;
    for (entry, flag) in report.levels.iter_mut().zip(flags) {
        entry.flagged = flag;
    }
    Ok(report)
}

impl EntropyReport {
    /// `level,floor,raw_entropy_bits,refined_entropy_bits,flagged`, one row
    /// per level, six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,floor,raw_entropy_bits,refined_entropy_bits,flagged\n");
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{}",
                l.level, l.floor, l.raw_bits, l.refined_bits, l.flagged
            );
        }
        out
    }

    pub fn flagged_levels(&self) -> Vec<u8> {
        self.levels.iter().filter(|l| l.flagged).map(|l| l.level).collect()
    }
}
