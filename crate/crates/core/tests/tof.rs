use std::f64::consts::PI;

use gbec::basis::BasisSpec;
use gbec::gstate::{g2_local, GaussianState};
use gbec::tof::*;
use nalgebra::DVector;
use proptest::prelude::*;

fn ground_mode(r: f64) -> f64 {
    PI.powf(-0.75) * (-0.5 * r * r).exp()
}

const R0: f64 = 8.0;

#[test]
fn zero_time_is_identity() {
    let m = free_propagate(ground_mode, R0, 100.0, 0.0).unwrap();
    for (r, f) in m.grid.r.iter().zip(&m.f) {
        let exact = if *r <= R0 { ground_mode(*r) } else { 0.0 };
        assert_eq!(f.re, exact);
        assert_eq!(f.im, 0.0);
    }
}

#[test]
fn ground_mode_spreads_analytically() {
    let m0 = free_propagate(ground_mode, R0, 100.0, 0.0).unwrap();
    let m1 = free_propagate(ground_mode, R0, 100.0, 1.0).unwrap();
    assert!((m0.mean_square_radius() - 1.5).abs() < 1e-10);
    assert!((m1.mean_square_radius() / m0.mean_square_radius() - 2.0).abs() < 1e-8);
    // Pointwise against the spreading Gaussian |f_T|² = (π(1+T²))^{-3/2} e^{-r²/(1+T²)}.
    for t in [0.5, 1.0, 3.0] {
        let m = free_propagate(ground_mode, R0, 100.0, t).unwrap();
        let s = 1.0 + t * t;
        for (r, f) in m.grid.r.iter().zip(&m.f).step_by(37) {
            let exact = (PI * s).powf(-1.5) * (-r * r / s).exp();
            assert!((f.norm_sqr() - exact).abs() < 1e-9 * (PI * s).powf(-1.5), "T={t} r={r}");
        }
    }
}

#[test]
fn norm_is_preserved() {
    for t in [0.3, 1.0, 5.0] {
        let m = free_propagate(ground_mode, R0, 100.0, t).unwrap();
        assert!((m.norm() - 1.0).abs() < 1e-6, "T={t}: {}", m.norm());
    }
}

#[test]
fn excited_profile_keeps_norm() {
    // A basis mode with a node spreads without losing weight.
    let spec = BasisSpec::new(4, 0).unwrap();
    let c = DVector::from_vec(vec![0.6, -0.5, 0.3, 0.2, 0.1]);
    let f = mode_profile(&spec, &c).unwrap();
    let m = free_propagate(&f, default_extent(&spec), 50.0, 2.0).unwrap();
    assert!((m.norm() - 1.0).abs() < 1e-6);
}

#[test]
fn negative_time_is_rejected() {
    assert!(free_propagate(ground_mode, R0, 100.0, -0.1).is_err());
    assert!(free_propagate(ground_mode, R0, 100.0, f64::NAN).is_err());
}

#[test]
fn unnormalized_input_is_rejected() {
    assert!(free_propagate(|r| 2.0 * ground_mode(r), R0, 100.0, 1.0).is_err());
}

#[test]
fn closed_form_g2() {
    assert!((g2_after_expansion(100.0, 0.0) - 3.01).abs() < 1e-15);
    assert!((g2_after_expansion(100.0, 3.0) - 3.01).abs() < 1e-15);
    assert!((g2_after_expansion(1e12, 1.0) - 3.0).abs() < 1e-11);
}

#[test]
fn g2_is_invariant_under_expansion() {
    for t in [0.0, 1.0, 3.0] {
        let m = free_propagate(ground_mode, R0, 100.0, t).unwrap();
        assert!((m.g2().unwrap() - g2_after_expansion(100.0, t)).abs() < 1e-12, "T={t}");
    }
}

#[test]
fn g2_is_position_independent() {
    let m = free_propagate(ground_mode, R0, 100.0, 1.0).unwrap();
    let g0 = m.g2().unwrap();
    let mut checked = 0;
    for i in 0..m.f.len() {
        if m.density(i) > 1e-12 {
            assert!((m.g2_at(i).unwrap() - g0).abs() < 1e-12);
            checked += 1;
        } else {
            assert!(m.g2_at(i).is_err());
        }
    }
    assert!(checked > 100);
}

#[test]
fn matches_local_g2_of_squeezed_state() {
    let spec = BasisSpec::new(6, 1).unwrap();
    let n = 100.0;
    let mut c = DVector::zeros(spec.nb());
    c[0] = 0.8;
    c[1] = 0.6;
    let state = GaussianState::<f64>::squeezed(spec, n, &c).unwrap();
    for r in [0.0, 0.7, 1.5] {
        let g = g2_local(&state, r).unwrap();
        assert!((g - g2_after_expansion(n, 0.0)).abs() < 1e-12, "r={r}: {g}");
    }
}

#[test]
fn table_rows_and_csv() {
    let rows = expansion_table(ground_mode, R0, 100.0, &[0.0, 1.0, 3.0]).unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[1].width / rows[0].width - 2f64.sqrt()).abs() < 1e-8);
    let mut buf = Vec::new();
    write_tof_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "T,width,g2");
    assert_eq!(text.lines().count(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn width_follows_free_dispersion(t in 0.1f64..4.0) {
        let m = free_propagate(ground_mode, R0, 10.0, t).unwrap();
        prop_assert!((m.mean_square_radius() - 1.5 * (1.0 + t * t)).abs() < 1e-7 * (1.0 + t * t));
    }
}
