//! End-to-end properties of the detected phase.

mod common;

use phase_refinery::small_phase::{
    interior, laplacian_reference, pearson, small_phase_convergence, small_phase_reference,
};
use phase_refinery::spectral::{build_frequency_grid, build_lowpass, build_quadratic_kernel};
use phase_refinery::transform::{normalize_output, FLAT_PHASE_TOLERANCE};
use phase_refinery::{fixtures, pst, pst_phase, ImageField, KernelFamily, KernelParams, Normalization, PhaseMap, RefineryConfig};
use proptest::prelude::*;

use common::*;

#[test]
fn scale_invariance_on_20_images() {
    let config = RefineryConfig::default();
    for seed in 0..20 {
        let img = random_image(64, 64, 900 + seed);
        let base = pst_phase(&img, &config).unwrap();
        for c in [0.1, 0.5, 2.0, 10.0] {
            let scaled = pst_phase(&img.map(|v| c * v).unwrap(), &config).unwrap();
            assert!(scaled.max_abs_diff(&base).unwrap() <= 1e-9, "seed {seed} c {c}");
        }
    }
}

#[test]
fn piecewise_constant_illumination_is_equalized_away_from_edges() {
    // Only a global scalar is exactly invisible; with a two-level mask the
    // phase matches the unlit phase closely once far enough from the mask
    // edges (the column at the centre and the wrapped frame edge).
    let config = RefineryConfig::default();
    let img = fixtures::textured(128, 128);
    let base = pst_phase(&img, &config).unwrap();
    let range = base.psi().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for dim in [0.8, 0.5, 0.2] {
        let lit = ImageField::from_fn(128, 128, |r, c| img.get(r, c) * if c < 64 { 1.0 } else { dim }).unwrap();
        let psi = pst_phase(&lit, &config).unwrap();
        let worst_at = |margin: usize| {
            let mut worst = 0.0f64;
            for r in 0..128 {
                for c in 0..128usize {
                    let dist = c.min(127 - c).min(c.abs_diff(64usize));
                    if dist >= margin {
                        worst = worst.max((psi.get(r, c) - base.get(r, c)).abs());
                    }
                }
            }
            worst / range
        };
        let (near, far) = (worst_at(8), worst_at(16));
        assert!(far < near, "dim {dim}");
        assert!(far < 1e-3, "dim {dim}: {far}");
    }
}

#[test]
fn convergence_on_smooth_fixture_both_families() {
    let img = fixtures::smooth_blobs(64, 64);
    for family in [KernelFamily::PstArctanLog, KernelFamily::Quadratic] {
        let params = KernelParams::histopathology().with_family(family);
        let results = small_phase_convergence(&img, &params, &[1e-1, 5e-2, 2.5e-2]).unwrap();
        for pair in results.windows(2) {
            assert!(pair[1].max_abs_error / pair[0].max_abs_error <= 0.75, "{family:?}");
        }
    }
}

#[test]
fn quadratic_reference_is_an_equalized_laplacian() {
    let img = fixtures::gaussian_blob(64, 64);
    let grid = build_frequency_grid(64, 64).unwrap();
    let reference =
        small_phase_reference(&img, &build_quadratic_kernel(&grid, 1e-3).unwrap(), &build_lowpass(&grid, 0.15).unwrap())
            .unwrap();
    let oracle = laplacian_reference(&img).unwrap();
    assert!(pearson(&interior(&reference, 4), &interior(&oracle, 4)) > 0.99);
}

#[test]
fn constant_image_refines_to_zeros() {
    let out = pst(&ImageField::constant(16, 16, 0.7).unwrap(), &RefineryConfig::default()).unwrap();
    assert!(out.values().iter().all(|&v| v == 0.0));
}

#[test]
fn fixed_range_normalization_formula() {
    let psi = PhaseMap::new(2, 2, vec![-std::f64::consts::PI, 0.0, 1.0, std::f64::consts::PI]).unwrap();
    let out = normalize_output(&psi, Normalization::FixedPhaseRange).unwrap();
    assert_eq!(out.values()[0], 0.0);
    assert_eq!(out.values()[1], 0.5);
    assert_eq!(out.values()[3], 1.0);

    let near_flat = PhaseMap::new(2, 2, vec![0.3, 0.3, 0.3, 0.3 + 0.5 * FLAT_PHASE_TOLERANCE]).unwrap();
    let out = normalize_output(&near_flat, Normalization::MinMaxPerImage).unwrap();
    assert_eq!(out.values(), &[0.0; 4]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phase_ignores_global_gain(
        h in 4usize..40,
        w in 4usize..40,
        seed in any::<u64>(),
        log_c in -3.0f64..3.0,
    ) {
        let config = RefineryConfig::default();
        let img = random_image(h, w, seed);
        let c = 10f64.powf(log_c);
        let a = pst_phase(&img, &config).unwrap();
        let b = pst_phase(&img.map(|v| c * v).unwrap(), &config).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-9);
    }

    #[test]
    fn refined_output_in_unit_range(h in 2usize..32, w in 2usize..32, seed in any::<u64>(), fixed in any::<bool>()) {
        let mut config = RefineryConfig::default();
        if fixed {
            config.normalization = Normalization::FixedPhaseRange;
        }
        let out = pst(&random_image(h, w, seed), &config).unwrap();
        prop_assert!(out.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
