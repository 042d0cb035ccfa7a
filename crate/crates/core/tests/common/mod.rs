//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use phase_refinery::fixtures;
use phase_refinery::pipeline::encode_png;
use phase_refinery::{BitDepth, ImageField, RefineryConfig};

/// Textbook O(N^2) 2D DFT. `sign` is -1 for forward, +1 for inverse
/// (unscaled). Twiddle angles are reduced with integer arithmetic first.
pub fn brute_dft(h: usize, w: usize, x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); h * w];
    for k in 0..h {
        for l in 0..w {
            let mut acc = Complex64::default();
            for m in 0..h {
                for n in 0..w {
                    let turns = ((k * m) % h) as f64 / h as f64 + ((l * n) % w) as f64 / w as f64;
                    acc += x[m * w + n] * Complex64::from_polar(1.0, sign * 2.0 * PI * turns);
                }
            }
            out[k * w + l] = acc;
        }
    }
    out
}

/// `max |a - b| / max |b|`.
pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    diff / scale
}

pub fn random_image(h: usize, w: usize, seed: u64) -> ImageField {
    fixtures::uniform_noise(h, w, 0.05, 1.0, seed)
}

pub fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/pst_histopathology_96.bin")
}

/// Seed of the golden 96x96 fixture.
pub const GOLDEN_SEED: u64 = 96;

pub fn golden_input() -> ImageField {
    fixtures::histopathology_patch(96, GOLDEN_SEED)
}

pub fn golden_config() -> RefineryConfig {
    RefineryConfig::default()
}

/// Writes `count` images mixing 8/16-bit gray and 8-bit RGB, some nested.
pub fn write_fixture_set(dir: &Path, count: u64) {
    for i in 0..count {
        let sub = if i % 5 == 0 { dir.join("nested") } else { dir.to_path_buf() };
        std::fs::create_dir_all(&sub).unwrap();
        let size = 32 + 8 * (i as usize % 3);
        let bytes = match i % 3 {
            0 => encode_png(&fixtures::histopathology_rgb(size, i), BitDepth::Eight).unwrap(),
            1 => encode_png(&[fixtures::histopathology_patch(size, i)], BitDepth::Sixteen).unwrap(),
            _ => encode_png(&[random_image(size, size + 4, i)], BitDepth::Eight).unwrap(),
        };
        std::fs::write(sub.join(format!("slide_{i:03}.png")), bytes).unwrap();
    }
}

/// Relative paths and bytes of every file under `root`, sorted.
pub fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out: Vec<(PathBuf, Vec<u8>)> = walkdir::WalkDir::new(root)
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            (
                e.path().strip_prefix(root).unwrap().to_path_buf(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}
