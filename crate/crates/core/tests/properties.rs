use proptest::prelude::*;
use qudit_tomography::bases::{build_tomography_set, generate_basis, random_flat_seed, TomographySet};
use qudit_tomography::experiments::rng_stream;
use qudit_tomography::linalg::CMatrix;
use qudit_tomography::optics::{extract_probabilities, render_pattern, OpticalConfig};
use qudit_tomography::qudit::{
    density_from_pure, fidelity, project_to_physical, random_density_matrix, random_pure_state,
};
use qudit_tomography::tomography::{forward_probabilities, reconstruct};
use qudit_tomography::{DensityMatrix, C64};
use rand::Rng;
use std::sync::OnceLock;

fn cached_set(d: usize) -> &'static TomographySet {
    static SETS: OnceLock<Vec<TomographySet>> = OnceLock::new();
    &SETS.get_or_init(|| (2..=8).map(|d| build_tomography_set(d, 10, 7).unwrap()).collect())[d - 2]
}

fn pair(d: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
    let mut rng = rng_stream(seed, d as u64);
    let ra = 1 + seed as usize % d;
    let rb = 1 + (seed / 7) as usize % d;
    (random_density_matrix(d, ra, &mut rng).unwrap(), random_density_matrix(d, rb, &mut rng).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(d in 2usize..=8, seed in any::<u64>()) {
        let (a, b) = pair(d, seed);
        let fab = fidelity(&a, &b).unwrap();
        let fba = fidelity(&b, &a).unwrap();
        prop_assert!((fab - fba).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fab));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn projection_is_idempotent(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = rng_stream(seed, 0);
        let raw = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.3, rng.random::<f64>() - 0.5));
        let Ok(once) = project_to_physical(&raw) else { return Ok(()) };
        prop_assert!(once.min_eigenvalue() >= -1e-10);
        let twice = project_to_physical(once.matrix()).unwrap();
        prop_assert!(once.distance(&twice) < 1e-10);
    }

    #[test]
    fn pure_density_has_rank_one(d in 2usize..=8, seed in any::<u64>()) {
        let psi = random_pure_state(d, &mut rng_stream(seed, 1)).unwrap();
        let rho = density_from_pure(&psi).unwrap();
        let ev = rho.eigenvalues();
        prop_assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert_eq!(ev.iter().filter(|v| v.abs() > 1e-10).count(), 1);
    }

    #[test]
    fn generated_bases_are_orthonormal(d in 2usize..=8, seed in any::<u64>()) {
        let s = random_flat_seed(d, &mut rng_stream(seed, 2));
        let basis = generate_basis(&s, 1).unwrap();
        let gram = basis.gram();
        for m in 0..d {
            for n in 0..d {
                let target = if m == n { 1.0 } else { 0.0 };
                prop_assert!((gram[(m, n)] - C64::new(target, 0.0)).norm() < 1e-12);
            }
        }
        for m in 0..d {
            for l in 0..d {
                let w = C64::from_polar(1.0, std::f64::consts::TAU * ((m * l) % d) as f64 / d as f64);
                prop_assert!((basis.element(m)[l] - s[l] * w).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn probabilities_ignore_global_seed_phase(d in 2usize..=8, seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let mut rng = rng_stream(seed, 3);
        let s = random_flat_seed(d, &mut rng);
        let psi = random_pure_state(d, &mut rng).unwrap();
        let p = generate_basis(&s, 1).unwrap().born_probabilities(psi.amplitudes());
        let q = generate_basis(&(&s * C64::from_polar(1.0, theta)), 1).unwrap().born_probabilities(psi.amplitudes());
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pattern_extraction_recovers_born_rule(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = rng_stream(seed, 4);
        let s = random_flat_seed(d, &mut rng);
        let psi = random_pure_state(d, &mut rng).unwrap();
        let cfg = OpticalConfig::default_for(d);
        let p = extract_probabilities(&render_pattern(&cfg, &psi, &s, 8).unwrap()).unwrap();
        let born = generate_basis(&s, 1).unwrap().born_probabilities(psi.amplitudes());
        for (a, b) in p.iter().zip(&born) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_refinement_keeps_multiplex_samples(d in 2usize..=6, seed in any::<u64>()) {
        let mut rng = rng_stream(seed, 5);
        let s = random_flat_seed(d, &mut rng);
        let psi = random_pure_state(d, &mut rng).unwrap();
        let cfg = OpticalConfig::default_for(d);
        let coarse = render_pattern(&cfg, &psi, &s, 8).unwrap();
        let fine = render_pattern(&cfg, &psi, &s, 64).unwrap();
        for (a, b) in coarse.multiplex_intensities.iter().zip(&fine.multiplex_intensities) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_model_is_affine(d in 2usize..=8, seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let (a, b) = pair(d, seed);
        let set = cached_set(d);
        let mix = DensityMatrix::new(a.matrix() * C64::from(alpha) + b.matrix() * C64::from(1.0 - alpha)).unwrap();
        let pa = forward_probabilities(&a, set).unwrap().flattened();
        let pb = forward_probabilities(&b, set).unwrap().flattened();
        let pm = forward_probabilities(&mix, set).unwrap().flattened();
        for i in 0..pm.len() {
            prop_assert!((pm[i] - (alpha * pa[i] + (1.0 - alpha) * pb[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_round_trip(d in 2usize..=8, seed in any::<u64>()) {
        let (rho, _) = pair(d, seed);
        let set = cached_set(d);
        let back = reconstruct(&forward_probabilities(&rho, set).unwrap(), set).unwrap();
        prop_assert!(fidelity(&back, &rho).unwrap() >= 1.0 - 1e-8);
    }
}
