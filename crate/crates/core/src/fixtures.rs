//! Procedural test images. All generators are deterministic.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftDirection;

use crate::field::ImageField;
use crate::spectral::{build_frequency_grid, Fft2d};

/// Positive background with a few overlapping Gaussian bumps. Smooth enough
/// for the small-phase expansion to converge cleanly.
pub fn smooth_blobs(height: usize, width: usize) -> ImageField {
    let bumps = [
        (0.30, 0.35, 0.12, 0.35),
        (0.65, 0.60, 0.10, 0.25),
        (0.45, 0.75, 0.08, -0.15),
        (0.75, 0.25, 0.14, 0.20),
    ];
    ImageField::from_fn(height, width, |r, c| {
        let y = r as f64 / height as f64;
        let x = c as f64 / width as f64;
        0.5 + bumps
            .iter()
            .map(|&(cy, cx, s, a)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp())
            .sum::<f64>()
    })
    .expect("fixture is finite")
}

/// A single centred Gaussian blob (sigma = width / 10) on a 0.2 background.
pub fn gaussian_blob(height: usize, width: usize) -> ImageField {
    let sigma = width as f64 / 10.0;
    let (cy, cx) = (height as f64 / 2.0, width as f64 / 2.0);
    ImageField::from_fn(height, width, |r, c| {
        let d2 = (r as f64 - cy).powi(2) + (c as f64 - cx).powi(2);
        0.2 + 0.7 * (-d2 / (2.0 * sigma * sigma)).exp()
    })
    .expect("fixture is finite")
}

/// White noise passed through an annular band-pass `[lo, hi]` (cycles per
/// pixel) and rescaled affinely onto `[floor, ceil]`.
pub fn band_limited_noise(height: usize, width: usize, lo: f64, hi: f64, floor: f64, ceil: f64, seed: u64) -> ImageField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = build_frequency_grid(height, width).expect("fixture dims");
    let mut buf: Vec<Complex64> = (0..height * width)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
        .collect();
    let mut fft = Fft2d::new();
    fft.transform(height, width, &mut buf, FftDirection::Forward);
    for (c, &r) in buf.iter_mut().zip(grid.radii()) {
        if r < lo || r > hi {
            *c = Complex64::default();
        }
    }
    fft.transform(height, width, &mut buf, FftDirection::Inverse);
    let re: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let (mn, mx) = re.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = (mx - mn).max(f64::MIN_POSITIVE);
    ImageField::new(height, width, re.iter().map(|v| floor + (ceil - floor) * (v - mn) / span).collect())
        .expect("fixture is finite")
}

/// Cell-culture-like texture used for the illumination study.
pub fn textured(height: usize, width: usize) -> ImageField {
    band_limited_noise(height, width, 0.04, 0.30, 0.15, 0.85, 0x5eed_7e47)
}

/// H&E-like RGB patch: pink stroma texture with dark purple nuclei.
pub fn histopathology_rgb(size: usize, seed: u64) -> [ImageField; 3] {
    let stroma = band_limited_noise(size, size, 0.02, 0.2, 0.0, 1.0, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00c0_ffee);
    let nuclei: Vec<(f64, f64, f64, f64, f64)> = (0..(size * size / 300).max(3))
        .map(|_| {
            (
                rng.gen_range(0.0..size as f64),
                rng.gen_range(0.0..size as f64),
                rng.gen_range(2.0..4.5),
                rng.gen_range(1.5..3.0),
                rng.gen_range(0.0..std::f64::consts::PI),
            )
        })
        .collect();
    let mask = ImageField::from_fn(size, size, |r, c| {
        nuclei
            .iter()
            .map(|&(cy, cx, a, b, theta)| {
                let (dy, dx) = (r as f64 - cy, c as f64 - cx);
                let (s, co) = theta.sin_cos();
                let u = (dx * co + dy * s) / a;
                let v = (-dx * s + dy * co) / b;
                (-(u * u + v * v) * 1.5).exp()
            })
            .fold(0.0, f64::max)
    })
    .expect("fixture is finite");
    let channel = |base: f64, nuc: f64, tex: f64| {
        ImageField::from_fn(size, size, |r, c| {
            let n = mask.get(r, c);
            let t = stroma.get(r, c);
            (base - nuc * n - tex * t).clamp(0.0, 1.0)
        })
        .expect("fixture is finite")
    };
    [channel(0.92, 0.35, 0.12), channel(0.72, 0.50, 0.22), channel(0.86, 0.22, 0.08)]
}

/// Luma of [`histopathology_rgb`].
pub fn histopathology_patch(size: usize, seed: u64) -> ImageField {
    let [r, g, b] = histopathology_rgb(size, seed);
    crate::pipeline::luma(&r, &g, &b)
}

/// Uniform noise in `[lo, hi)`.
pub fn uniform_noise(height: usize, width: usize, lo: f64, hi: f64, seed: u64) -> ImageField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageField::from_fn(height, width, |_, _| rng.gen_range(lo..hi)).expect("fixture is finite")
}
