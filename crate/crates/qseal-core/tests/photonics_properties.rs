//! Property tests for the interferometer model: normalization, the
//! separable-state bound, consistency between the correlation definitions,
//! and the triangle envelope against a direct convolution.

use num_complex::Complex64;
use qseal_core::{
    bell_overlap, bsa_probabilities, correlation, separable_state, triangle, CoincidenceProbabilities,
    TwoPhotonState,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_state(rng: &mut StdRng) -> TwoPhotonState {
    let mut amps = [Complex64::new(0.0, 0.0); 4];
    let mut norm2 = 0.0;
    for a in &mut amps {
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        *a = Complex64::new(re, im);
        norm2 += a.norm_sqr();
    }
    let s = norm2.sqrt();
    TwoPhotonState::new(amps[0] / s, amps[1] / s, amps[2] / s, amps[3] / s).unwrap()
}

#[test]
fn probabilities_normalize_for_random_states() {
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..100_000 {
        let st = random_state(&mut rng);
        let p = bsa_probabilities(&st);
        for &q in p.pathways() {
            assert!(q >= -1e-15, "negative pathway probability {q}");
        }
        assert!((p.total() - 1.0).abs() <= 1e-10, "total {}", p.total());
    }
}

#[test]
fn separable_states_respect_the_half_bound() {
    let mut rng = StdRng::seed_from_u64(32);
    let tau = core::f64::consts::TAU;
    for _ in 0..100_000 {
        let st = separable_state(
            rng.gen_range(0.0..tau),
            rng.gen_range(0.0..tau),
            rng.gen_range(0.0..tau),
            rng.gen_range(0.0..tau),
        );
        let e = correlation(&st);
        assert!(e.abs() <= 0.5 + 1e-12, "separable correlation {e}");
    }
}

#[test]
fn separable_mixtures_respect_the_half_bound() {
    // Convex mixtures of product states stay inside the classical bound.
    let mut rng = StdRng::seed_from_u64(33);
    let tau = core::f64::consts::TAU;
    for _ in 0..1_000 {
        let m = rng.gen_range(1..=10usize);
        let mut mixed = CoincidenceProbabilities::from_pathways([0.0; 10]);
        let mut weight_left = 1.0;
        for i in 0..m {
            let w = if i + 1 == m {
                weight_left
            } else {
                rng.gen_range(0.0..weight_left)
            };
            weight_left -= w;
            let st = separable_state(
                rng.gen_range(0.0..tau),
                rng.gen_range(0.0..tau),
                rng.gen_range(0.0..tau),
                rng.gen_range(0.0..tau),
            );
            let p = bsa_probabilities(&st);
            let mut pw = *mixed.pathways();
            for (acc, &q) in pw.iter_mut().zip(p.pathways()) {
                *acc += w * q;
            }
            mixed = CoincidenceProbabilities::from_pathways(pw);
        }
        let e = mixed.p_dd - mixed.p_ds;
        assert!(e.abs() <= 0.5 + 1e-12, "mixture correlation {e}");
    }
}

#[test]
fn correlation_definitions_agree() {
    // p_dd - p_ds equals the Bell-overlap difference for every pure state.
    let mut rng = StdRng::seed_from_u64(34);
    for _ in 0..100_000 {
        let st = random_state(&mut rng);
        let p = bsa_probabilities(&st);
        let e = correlation(&st);
        let (plus, minus) = bell_overlap(&st);
        assert!((e - (p.p_dd - p.p_ds)).abs() <= 1e-12);
        assert!((e - (plus - minus)).abs() <= 1e-12);
    }
}

#[test]
fn triangle_matches_rectangle_self_convolution() {
    // The envelope is the autoconvolution of a unit rectangle on [-1/2, 1/2],
    // evaluated here by midpoint quadrature.
    let n_quad = 4000usize;
    let h = 1.0 / n_quad as f64;
    for i in 0..=10_000usize {
        let x = -1.25 + 2.5 * i as f64 / 10_000.0;
        let mut conv = 0.0;
        for j in 0..n_quad {
            let s = -0.5 + (j as f64 + 0.5) * h;
            let u = x - s;
            if (-0.5..=0.5).contains(&u) {
                conv += h;
            }
        }
        assert!(
            (conv - triangle(x)).abs() <= 1e-3,
            "x = {x}: conv {conv} vs triangle {}",
            triangle(x)
        );
    }
}
