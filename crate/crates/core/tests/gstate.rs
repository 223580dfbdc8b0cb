use gbec::basis::{BasisSpec, InteractionTensor};
use gbec::gstate::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_state(spec: BasisSpec, seed: u64, scale: f64) -> GaussianState<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = spec.nb();
    let mut s = GaussianState::<Complex64>::vacuum(spec);
    for b in s.beta.iter_mut() {
        *b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
    }
    for l in 0..spec.n_l() {
        let a = DMatrix::from_fn(nb, nb, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.1);
        s.g[l] = &a * a.adjoint();
        let b = DMatrix::from_fn(nb, nb, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.1);
        s.f[l] = (&b + b.transpose()) * c(0.5, 0.0);
    }
    s.mu = 0.7;
    s
}

/// Unit ground mode `φ_000` in the l = 0 block.
fn e0(spec: BasisSpec) -> DVector<f64> {
    let mut v = DVector::zeros(spec.nb());
    v[0] = 1.0;
    v
}

/// `∫ r² R_00⁴ dr` from the Gaussian integral: R_00 = 2π^{-1/4} e^{-r²/2}.
fn m0000() -> f64 {
    16.0 / PI * PI.sqrt() / (4.0 * 2f64.powf(1.5))
}

#[test]
fn free_theory_blocks() {
    let spec = BasisSpec::new(4, 2).unwrap();
    let mut s = random_state(spec, 1, 1.0);
    s.mu = 0.3;
    let inter = QuadratureInteraction::new(spec, 0.0);
    let mf = build_mean_field(&s, &inter).unwrap();
    for l in 0..spec.n_l() {
        for n in 0..spec.nb() {
            for np in 0..spec.nb() {
                let want = if n == np { 2.0 * n as f64 + l as f64 + 1.5 - 0.3 } else { 0.0 };
                assert!((mf.e_blocks[l][(n, np)] - c(want, 0.0)).norm() < 1e-14);
                assert!(mf.delta_blocks[l][(n, np)].norm() < 1e-14);
            }
        }
    }
    for n in 0..spec.nb() {
        let want = s.beta[n] * (2.0 * n as f64 + 1.5 - 0.3);
        assert!((mf.eta[n] - want).norm() < 1e-13);
    }
}

#[test]
fn vacuum_is_stationary_with_zero_energy() {
    let spec = BasisSpec::new(3, 1).unwrap();
    let s = GaussianState::<Complex64>::vacuum(spec);
    let inter = QuadratureInteraction::new(spec, 0.4);
    let mf = build_mean_field(&s, &inter).unwrap();
    assert!(mf.eta.norm() == 0.0);
    assert_eq!(mf.energy, 0.0);
    assert_eq!(s.particle_numbers(), (0.0, 0.0));
}

#[test]
fn mismatched_basis_rejected() {
    let s = GaussianState::<f64>::vacuum(BasisSpec::new(3, 1).unwrap());
    let inter = QuadratureInteraction::new(BasisSpec::new(4, 1).unwrap(), 0.1);
    assert!(build_mean_field(&s, &inter).is_err());
}

#[test]
fn coherent_single_mode_driving_vector() {
    let spec = BasisSpec::new(3, 0).unwrap();
    let n = 50.0;
    let a = 0.02;
    let s = GaussianState::<f64>::coherent(spec, n);
    let mf = build_mean_field(&s, &QuadratureInteraction::new(spec, a)).unwrap();
    // η_0 = ε_00 √N + a M_0000 N^{3/2}: the density terms 2|φ|² + φ² - |φ|² collapse to one.
    let want = 1.5 * n.sqrt() + a * m0000() * n.powf(1.5);
    assert!((mf.eta[0] - want).abs() < 1e-12 * want);
}

#[test]
fn quadrature_and_tensor_routes_agree() {
    let spec = BasisSpec::new(4, 2).unwrap();
    let s = random_state(spec, 7, 2.0);
    let quad = QuadratureInteraction::new(spec, 0.13);
    let tens = TensorInteraction { tensor: Arc::new(InteractionTensor::build(spec)), a_s: 0.13 };
    let a = build_mean_field(&s, &quad).unwrap();
    let b = build_mean_field(&s, &tens).unwrap();
    for l in 0..spec.n_l() {
        assert!((&a.e_blocks[l] - &b.e_blocks[l]).norm() < 1e-10 * a.e_blocks[l].norm());
        let dd = (&a.delta_blocks[l] - &b.delta_blocks[l]).norm();
        assert!(dd < 1e-10 * a.delta_blocks[l].norm().max(1.0), "l={l} {dd} {}", a.delta_blocks[l].norm());
    }
    assert!((&a.eta - &b.eta).norm() < 1e-10 * a.eta.norm());
    assert!((a.energy - b.energy).abs() < 1e-10 * a.energy.abs());
}

#[test]
fn blocks_keep_hermitian_and_symmetric_structure() {
    let spec = BasisSpec::new(4, 2).unwrap();
    let s = random_state(spec, 11, 1.0);
    let mf = build_mean_field(&s, &QuadratureInteraction::new(spec, -0.2)).unwrap();
    for l in 0..spec.n_l() {
        let e = &mf.e_blocks[l];
        let d = &mf.delta_blocks[l];
        assert!((e - e.adjoint()).norm() < 1e-12 * e.norm());
        assert!((d - d.transpose()).norm() < 1e-12 * d.norm());
    }
}

#[test]
fn driving_vector_is_energy_gradient() {
    let spec = BasisSpec::new(3, 1).unwrap();
    for seed in 0..4 {
        let s = random_state(spec, 100 + seed, 1.5);
        let inter = QuadratureInteraction::new(spec, 0.3);
        let mf = build_mean_field(&s, &inter).unwrap();
        let h = 1e-5;
        for n in 0..spec.nb() {
            let energy_at = |dz: Complex64| {
                let mut t = s.clone();
                t.beta[n] += dz;
                total_energy(&t, &inter).unwrap()
            };
            let d_re = (energy_at(c(h, 0.0)) - energy_at(c(-h, 0.0))) / (2.0 * h);
            let d_im = (energy_at(c(0.0, h)) - energy_at(c(0.0, -h))) / (2.0 * h);
            let grad = c(0.5 * d_re, 0.5 * d_im);
            assert!((grad - mf.eta[n]).norm() < 1e-6, "n={n}: {grad} vs {}", mf.eta[n]);
        }
    }
}

#[test]
fn free_coherent_energy_per_particle() {
    let spec = BasisSpec::new(4, 1).unwrap();
    let s = GaussianState::<f64>::coherent(spec, 1000.0);
    let e = total_energy(&s, &QuadratureInteraction::new(spec, 0.0)).unwrap();
    assert!((e / 1000.0 - 1.5).abs() < 1e-14);
}

/// `E = 1.5 N + (U_eff/2) N² ∫|φ_000|⁴ d³r` with `U = 4π a_s`.
fn single_mode_energy(n: f64, a: f64, u_mult: f64) -> f64 {
    let u = 4.0 * PI * a * u_mult;
    1.5 * n + 0.5 * u * n * n * m0000() / (4.0 * PI)
}

#[test]
fn single_mode_energies_follow_effective_coupling() {
    let spec = BasisSpec::new(4, 2).unwrap();
    for &n in &[10.0, 100.0] {
        for &a in &[0.01, -0.003] {
            let inter = QuadratureInteraction::new(spec, a);
            let coh = total_energy(&GaussianState::<f64>::coherent(spec, n), &inter).unwrap();
            let want = single_mode_energy(n, a, 1.0);
            assert!((coh - want).abs() < 1e-11 * want.abs());
            let sq = GaussianState::<f64>::squeezed(spec, n, &e0(spec)).unwrap();
            let e = total_energy(&sq, &inter).unwrap();
            let want = single_mode_energy(n, a, 3.0 * (1.0 + 1.0 / (3.0 * n)));
            assert!((e - want).abs() < 1e-11 * want.abs(), "N={n} a={a}: {e} vs {want}");
        }
    }
}

#[test]
fn particle_numbers_of_reference_states() {
    let spec = BasisSpec::new(3, 1).unwrap();
    assert_eq!(GaussianState::<f64>::coherent(spec, 100.0).particle_numbers(), (100.0, 0.0));
    let sq = GaussianState::<f64>::squeezed(spec, 100.0, &e0(spec)).unwrap();
    let (nc, nd) = sq.particle_numbers();
    assert_eq!(nc, 0.0);
    assert!((nd - 100.0).abs() < 1e-12);
}

#[test]
fn number_variance_of_squeezed_and_coherent_states() {
    let spec = BasisSpec::new(4, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &n in &[1.0, 10.0, 100.0, 1234.5] {
        let mode = DVector::from_fn(spec.nb(), |_, _| rng.gen_range(-1.0..1.0));
        let sq = GaussianState::<f64>::squeezed(spec, n, &mode).unwrap();
        let want = 2.0 * n * (n + 1.0);
        assert!((sq.number_variance() - want).abs() < 1e-10 * want);
        let coh = GaussianState::<f64>::coherent(spec, n);
        assert!((coh.number_variance() - n).abs() < 1e-10 * n);
    }
}

#[test]
fn reference_states_are_physical() {
    let spec = BasisSpec::new(3, 1).unwrap();
    assert!(GaussianState::<f64>::coherent(spec, 10.0).is_physical());
    let sq = GaussianState::<f64>::squeezed(spec, 10.0, &e0(spec)).unwrap();
    assert!(sq.is_physical());
    let mut bad = GaussianState::<f64>::vacuum(spec);
    bad.f[0][(0, 0)] = 1.0;
    assert!(!bad.is_physical());
}

#[test]
fn widths_of_ground_mode_states() {
    let spec = BasisSpec::new(4, 1).unwrap();
    let coh = GaussianState::<f64>::coherent(spec, 30.0);
    assert!((width(&coh, true).unwrap() - 1.5f64.sqrt()).abs() < 1e-13);
    assert!((width(&coh, false).unwrap() - 45f64.sqrt()).abs() < 1e-12);
    let sq = GaussianState::<f64>::squeezed(spec, 30.0, &e0(spec)).unwrap();
    assert!((width(&sq, true).unwrap() - 1.5f64.sqrt()).abs() < 1e-13);
    assert!(width(&GaussianState::<f64>::vacuum(spec), true).is_err());
}

#[test]
fn local_coherence_limits() {
    let spec = BasisSpec::new(4, 1).unwrap();
    let coh = GaussianState::<f64>::coherent(spec, 100.0);
    let sq = GaussianState::<f64>::squeezed(spec, 100.0, &e0(spec)).unwrap();
    for &r in &[0.0, 0.4, 1.3] {
        assert!((g2_local(&coh, r).unwrap() - 1.0).abs() < 1e-14);
        assert!((g2_local(&sq, r).unwrap() - 3.01).abs() < 1e-12);
    }
    assert!(g2_local(&GaussianState::<f64>::vacuum(spec), 0.5).is_err());
}

#[test]
fn squeezed_mode_extraction() {
    let spec = BasisSpec::new(5, 1).unwrap();
    let mode = DVector::from_vec(vec![0.9, -0.3, 0.2, 0.1, 0.05, 0.01]);
    let sq = GaussianState::<f64>::squeezed(spec, 40.0, &mode).unwrap();
    let m = extract_squeezed_mode(&sq).unwrap();
    assert!(m.residual < 1e-12);
    assert!((m.n_d - 40.0).abs() < 1e-12);
    assert!((m.xi0 - 40f64.sqrt().asinh()).abs() < 1e-14);
    assert!((m.f_singular - (40.0f64 * 41.0).sqrt()).abs() < 1e-10);
    let unit = mode.normalize();
    assert!((m.f.dot(&unit).abs() - 1.0).abs() < 1e-12);
    assert!(matches!(
        extract_squeezed_mode(&GaussianState::<f64>::coherent(spec, 5.0)),
        Err(gbec::GbecError::NoSqueezedMode(_))
    ));
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let spec = BasisSpec::new(3, 2).unwrap();
    let s = random_state(spec, 99, 1.0 / 3.0);
    let snap = StateSnapshot::from_state(&s, 0.0123456789);
    let text = snap.to_json().unwrap();
    assert!(text.contains("\"G\"") && text.contains("\"F\""));
    let back = StateSnapshot::from_json(&text).unwrap();
    assert_eq!(back, snap);
    assert_eq!(back.to_state().unwrap(), s);
}

#[test]
fn real_and_complex_paths_agree() {
    let spec = BasisSpec::new(3, 1).unwrap();
    let real = GaussianState::<f64>::squeezed(spec, 7.0, &DVector::from_vec(vec![1.0, 0.2, -0.1, 0.05])).unwrap();
    let mut real = real;
    real.beta[0] = 1.7;
    real.beta[2] = -0.4;
    real.mu = 1.1;
    let inter = QuadratureInteraction::new(spec, 0.07);
    let er = build_mean_field(&real, &inter).unwrap();
    let ec = build_mean_field(&real.to_complex(), &inter).unwrap();
    assert!((er.energy - ec.energy).abs() < 1e-12 * er.energy.abs());
    for n in 0..spec.nb() {
        assert!((c(er.eta[n], 0.0) - ec.eta[n]).norm() < 1e-12);
    }
    assert_eq!(real.to_complex().to_real(0.0).unwrap(), real);
}
