//! Acceptance suite: one check per criterion, each timed against its budget.
//!
//! Every criterion runs even if an earlier one fails; the test prints one
//! PASS/FAIL line per criterion and fails at the end if any line is FAIL.
//! Run with `cargo test --release --test acceptance -- --nocapture`.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use phase_refinery::analysis::{entropy_stability_study, StudyOptions};
use phase_refinery::fixtures;
use phase_refinery::pipeline::domain_shift::{
    generate_domain_shift_dataset, run_domain_shift_experiment, ClassifierParams, DEFAULT_PER_DOMAIN,
};
use phase_refinery::pipeline::{quantized_codes, refine_batch, MANIFEST_NAME};
use phase_refinery::small_phase::{
    interior, laplacian_reference, pearson, small_phase_convergence, small_phase_reference,
};
use phase_refinery::spectral::{
    build_frequency_grid, build_kernel, build_lowpass, build_quadratic_kernel, read_flat_f64, AmplitudeFilter, Fft2d,
};
use phase_refinery::transform::apply_spectral_filters;
use phase_refinery::{pst, pst_phase, BitDepth, KernelFamily, KernelParams, RefineryConfig, SpectralField};

use common::*;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dft_oracle() -> Check {
    let mut worst_fwd = 0.0f64;
    let mut worst_inv = 0.0f64;
    let mut fft = Fft2d::new();
    for (i, n) in [8usize, 8, 16, 16].into_iter().enumerate() {
        let img = random_image(n, n, 100 + i as u64);
        let x: Vec<Complex64> = img.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let fwd = fft.forward(&img).map_err(|e| e.to_string())?;
        worst_fwd = worst_fwd.max(relative_error(fwd.values(), &brute_dft(n, n, &x, -1.0)));

        let spec: Vec<Complex64> = x
            .iter()
            .zip(img.values().iter().rev())
            .map(|(a, &b)| Complex64::new(a.re - 0.5, b - 0.5))
            .collect();
        let inv = fft
            .inverse(&SpectralField::new(n, n, spec.clone()).unwrap())
            .map_err(|e| e.to_string())?;
        let scale = 1.0 / (n * n) as f64;
        let oracle: Vec<Complex64> = brute_dft(n, n, &spec, 1.0).into_iter().map(|c| c * scale).collect();
        worst_inv = worst_inv.max(relative_error(inv.values(), &oracle));
    }
    ensure(
        worst_fwd < 1e-10 && worst_inv < 1e-10,
        format!("forward rel err {worst_fwd:.3e}, inverse rel err {worst_inv:.3e}"),
    )
}

fn round_trip() -> Check {
    let mut fft = Fft2d::new();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let img = random_image(64, 64, seed);
        let spectrum = fft.forward(&img).map_err(|e| e.to_string())?;
        let back = fft.inverse(&spectrum).map_err(|e| e.to_string())?;
        for (a, b) in img.values().iter().zip(back.values()) {
            worst = worst.max((Complex64::new(*a, 0.0) - b).norm());
        }
    }
    ensure(worst <= 1e-9, format!("max abs err {worst:.3e} over 100 images"))
}

fn unitarity() -> Check {
    let params = KernelParams::histopathology();
    let mut worst_bin = 0.0f64;
    let mut worst_energy = 0.0f64;
    let mut fft = Fft2d::new();
    for (h, w, seed) in [(64, 64, 1), (48, 80, 2), (33, 17, 3)] {
        let grid = build_frequency_grid(h, w).unwrap();
        let kernel = build_kernel(&grid, &params).unwrap();
        let spectrum = fft.forward(&random_image(h, w, seed)).unwrap();
        let out = apply_spectral_filters(&spectrum, &kernel, &AmplitudeFilter::all_pass(&grid)).unwrap();
        for (a, b) in spectrum.values().iter().zip(out.values()) {
            if a.norm() > 0.0 {
                worst_bin = worst_bin.max((a.norm() - b.norm()).abs() / a.norm());
            }
        }
        let e_in = spectrum.energy();
        worst_energy = worst_energy.max((out.energy() - e_in).abs() / e_in);
        // Parseval on the spatial side as well
        let field = fft.inverse(&out).unwrap();
        let spatial: f64 = field.values().iter().map(|c| c.norm_sqr()).sum::<f64>() * (h * w) as f64;
        worst_energy = worst_energy.max((spatial - e_in).abs() / e_in);
    }
    ensure(
        worst_bin <= 1e-12 && worst_energy <= 1e-9,
        format!("per-bin rel magnitude err {worst_bin:.3e}, energy rel err {worst_energy:.3e}"),
    )
}

fn scale_invariance() -> Check {
    let config = RefineryConfig::default();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let img = random_image(64, 64, 500 + seed);
        let base = pst_phase(&img, &config).map_err(|e| e.to_string())?;
        for c in [0.1, 0.5, 2.0, 10.0] {
            let scaled = pst_phase(&img.map(|v| c * v).unwrap(), &config).map_err(|e| e.to_string())?;
            worst = worst.max(scaled.max_abs_diff(&base).unwrap());
        }
    }
    ensure(worst <= 1e-9, format!("max |psi(cI) - psi(I)| = {worst:.3e} over 20 images x 4 scales"))
}

fn convergence() -> Check {
    let img = fixtures::smooth_blobs(64, 64);
    let eps = [1e-1, 5e-2, 2.5e-2];
    let mut parts = Vec::new();
    let mut ok = true;
    for family in [KernelFamily::PstArctanLog, KernelFamily::Quadratic] {
        let params = KernelParams::histopathology().with_family(family);
        let results = small_phase_convergence(&img, &params, &eps).map_err(|e| e.to_string())?;
        let errs: Vec<f64> = results.iter().map(|r| r.max_abs_error).collect();
        let ratios: Vec<f64> = errs.windows(2).map(|p| p[1] / p[0]).collect();
        ok &= ratios.iter().all(|&r| r <= 0.75);
        parts.push(format!(
            "{}: errors {:.3e}/{:.3e}/{:.3e} ratios {:.3}/{:.3}",
            family.token(),
            errs[0],
            errs[1],
            errs[2],
            ratios[0],
            ratios[1]
        ));
    }
    ensure(ok, parts.join("; "))
}

fn laplacian() -> Check {
    let img = fixtures::gaussian_blob(64, 64);
    let grid = build_frequency_grid(64, 64).unwrap();
    let kernel = build_quadratic_kernel(&grid, 1e-3).unwrap();
    let lpf = build_lowpass(&grid, 0.15).unwrap();
    let reference = small_phase_reference(&img, &kernel, &lpf).map_err(|e| e.to_string())?;
    let oracle = laplacian_reference(&img).map_err(|e| e.to_string())?;
    let r = pearson(&interior(&reference, 4), &interior(&oracle, 4));
    ensure(r > 0.99, format!("Pearson r = {r:.6}"))
}

fn entropy_study() -> Check {
    let img = fixtures::textured(256, 256);
    let options = StudyOptions {
        crop: 0.5,
        ..Default::default()
    };
    let report = entropy_stability_study(&img, &RefineryConfig::default(), options).map_err(|e| e.to_string())?;
    let flagged = report.flagged_levels();
    let refined: Vec<String> = report.levels.iter().map(|l| format!("{:.3}", l.refined_bits)).collect();
    ensure(
        report.refined_std < report.raw_std && flagged == [6],
        format!(
            "raw std {:.4}, refined std {:.4}, flagged {:?}, refined bits [{}]",
            report.raw_std,
            report.refined_std,
            flagged,
            refined.join(", ")
        ),
    )
}

fn batch_determinism() -> Check {
    let tmp = tempfile::TempDir::new().unwrap();
    let input = tmp.path().join("input");
    write_fixture_set(&input, 50);
    let config = RefineryConfig::default();
    let mut trees = Vec::new();
    let mut digests = Vec::new();
    for workers in [1, 4, 8] {
        let out = tmp.path().join(format!("out_{workers}"));
        let manifest = refine_batch(&input, &out, &config, workers).map_err(|e| e.to_string())?;
        if manifest.total() != 50 || manifest.failures() != 0 {
            return Err(format!("workers={workers}: {} records, {} failures", manifest.total(), manifest.failures()));
        }
        let tree: Vec<_> = tree_bytes(&out)
            .into_iter()
            .filter(|(p, _)| p.as_os_str() != MANIFEST_NAME)
            .collect();
        trees.push(tree);
        digests.push(manifest.payload_digest());
    }
    ensure(
        trees[0].len() == 50 && trees.iter().all(|t| *t == trees[0]) && digests.iter().all(|d| *d == digests[0]),
        format!("{} outputs per run, manifest payload digest {}", trees[0].len(), &digests[0][..16]),
    )
}

fn domain_shift() -> Check {
    let config = RefineryConfig::default();
    let params = ClassifierParams::default();
    let mut wins = 0;
    let mut min_refined_id = 1.0f64;
    let (mut raw_sum, mut ref_sum) = (0.0, 0.0);
    for seed in 0..10 {
        let data = generate_domain_shift_dataset(seed, DEFAULT_PER_DOMAIN).map_err(|e| e.to_string())?;
        let raw = run_domain_shift_experiment(&data, false, &config, &params).map_err(|e| e.to_string())?;
        let refined = run_domain_shift_experiment(&data, true, &config, &params).map_err(|e| e.to_string())?;
        wins += usize::from(refined.ood_acc > raw.ood_acc);
        min_refined_id = min_refined_id.min(refined.id_val_acc);
        raw_sum += raw.ood_acc;
        ref_sum += refined.ood_acc;
    }
    ensure(
        wins >= 8 && min_refined_id >= 0.9,
        format!(
            "refined OOD wins on {wins}/10 seeds, mean OOD {:.3} -> {:.3}, min refined in-domain {min_refined_id:.3}",
            raw_sum / 10.0,
            ref_sum / 10.0
        ),
    )
}

fn golden() -> Check {
    let path = golden_path();
    let stored = read_flat_f64(std::fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?)
        .map_err(|e| e.to_string())?;
    let fresh = pst(&golden_input(), &golden_config()).map_err(|e| e.to_string())?;
    if (stored.height, stored.width) != fresh.dims() {
        return Err(format!("golden dims {}x{}", stored.height, stored.width));
    }
    let stored = phase_refinery::ImageField::new(stored.height, stored.width, stored.values).unwrap();
    let a = quantized_codes(&stored, BitDepth::Sixteen);
    let b = quantized_codes(&fresh, BitDepth::Sixteen);
    let mismatches = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    ensure(mismatches == 0, format!("{mismatches} of {} 16-bit codes differ", a.len()))
}

type Criterion = (&'static str, Duration, fn() -> Check);

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("1 dft oracle", Duration::from_secs(1), dft_oracle),
        ("2 round trip", Duration::from_secs(5), round_trip),
        ("3 kernel unitarity", Duration::from_secs(5), unitarity),
        ("4 scale invariance", Duration::from_secs(10), scale_invariance),
        ("5 small-phase convergence", Duration::from_secs(10), convergence),
        ("6 laplacian correspondence", Duration::from_secs(5), laplacian),
        ("7 illumination entropy", Duration::from_secs(10), entropy_study),
        ("8 batch determinism", Duration::from_secs(30), batch_determinism),
        ("9 domain shift", Duration::from_secs(300), domain_shift),
        ("10 golden cross-check", Duration::from_secs(5), golden),
    ];
    let mut failed = Vec::new();
    for (name, budget, check) in criteria {
        let t0 = Instant::now();
        let result = check();
        let elapsed = t0.elapsed();
        let in_time = elapsed <= budget;
        let (ok, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        println!(
            "{} criterion {name}: {detail} [{:.3} s, budget {} s{}]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
        if !ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
