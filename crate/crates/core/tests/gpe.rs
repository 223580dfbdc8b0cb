use gbec::basis::BasisSpec;
use gbec::gpe::*;
use gbec::GbecError;
use nalgebra::DVector;
use std::f64::consts::PI;

fn spec() -> BasisSpec {
    BasisSpec::new(20, 0).unwrap()
}

#[test]
fn free_mode_is_oscillator_ground_state() {
    let s = solve_effective(1000.0, 0.0, 1.0, &spec()).unwrap();
    assert!(s.converged);
    assert!((s.mu - 1.5).abs() < 1e-12);
    assert!((s.e_per_n - 1.5).abs() < 1e-12);
    assert!((s.mode.coeffs[0].abs() - 1000f64.sqrt()).abs() < 1e-10);
    assert!((s.width - 1.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn repulsion_raises_energy_and_width() {
    let s = solve_effective(1000.0, 0.2 / 1000.0, 1.0, &spec()).unwrap();
    assert!(s.converged);
    assert!(s.e_per_n > 1.5 && s.width > 1.5f64.sqrt());
    assert!(s.mu > s.e_per_n);
}

#[test]
fn weak_tripled_attraction_converges() {
    let s = solve_effective(1000.0, -0.05 / 1000.0, 3.0, &spec()).unwrap();
    assert!(s.converged);
    assert!(s.e_per_n < 1.5 && s.width < 1.5f64.sqrt());
}

#[test]
fn mode_is_normalized() {
    let s = solve_effective(500.0, 0.3 / 500.0, 1.0, &spec()).unwrap();
    assert!((s.mode.coeffs.norm_squared() - 500.0).abs() < 1e-8);
    // Radial integral of the density on an independent grid.
    let q = 4000;
    let h = 12.0 / q as f64;
    let total: f64 = (1..q).map(|i| {
        let r = i as f64 * h;
        4.0 * PI * r * r * s.mode.density(r) * h
    }).sum();
    assert!((total / 500.0 - 1.0).abs() < 1e-8);
}

#[test]
fn tripling_is_rescaling() {
    let n = 1000.0;
    for a in [-0.05 / n, 0.04 / n] {
        let t = solve_effective(n, a, 3.0, &spec()).unwrap();
        let g = solve_effective(n, 3.0 * a, 1.0, &spec()).unwrap();
        assert!((&t.mode.coeffs - &g.mode.coeffs).amax() < 1e-10);
        assert!((t.mu - g.mu).abs() < 1e-10);
        assert!((t.e_per_n - g.e_per_n).abs() < 1e-10);
    }
}

#[test]
fn converged_mode_is_stationary() {
    let n = 1000.0;
    for (a, u, lhy) in [(0.1 / n, 1.0, false), (-0.1 / n, 3.0, false), (0.5 / n, 1.0, true)] {
        let p = EffectiveProblem::new(n, a, u, 20, lhy).unwrap();
        let s = p.solve(&EffectiveOptions::default()).unwrap();
        let c = &s.mode.coeffs;
        let h = 1e-5;
        let grad = DVector::from_fn(c.len(), |i, _| {
            let (mut up, mut dn) = (c.clone(), c.clone());
            up[i] += h;
            dn[i] -= h;
            (p.energy(&up) - p.energy(&dn)) / (2.0 * h)
        });
        let tangential = &grad - c * (grad.dot(c) / c.norm_squared());
        assert!(tangential.norm() < 1e-6, "{}", tangential.norm());
        // The Lagrange multiplier of the norm constraint is μ.
        assert!((grad.dot(c) / (2.0 * n) - s.mu).abs() < 1e-6);
    }
}

#[test]
fn strong_attraction_collapses_with_last_iterate() {
    match solve_effective(1000.0, -0.25 / 1000.0, 3.0, &spec()) {
        Err(GbecError::Collapse { last, width, .. }) => {
            assert_eq!(last.len(), 21);
            assert!(width < 1.5f64.sqrt());
        }
        other => panic!("expected collapse, got {other:?}"),
    }
}

#[test]
fn invalid_inputs_rejected() {
    assert!(solve_effective(0.0, 0.0, 1.0, &spec()).is_err());
    assert!(solve_effective(10.0, f64::NAN, 1.0, &spec()).is_err());
    assert!(solve_effective(10.0, 0.0, 0.0, &spec()).is_err());
    assert!(solve_lhy_gpe(10.0, -0.01, &spec()).is_err());
}

#[test]
fn collapse_thresholds() {
    let g = collapse_threshold(1.0, &spec(), 1e-4).unwrap();
    let t = collapse_threshold(3.0, &spec(), 1e-4).unwrap();
    assert!(g.k_collapse - g.k_stable <= 1e-4 && t.k_collapse - t.k_stable <= 1e-4);
    assert!((g.k_c - 0.575).abs() < 0.01, "{}", g.k_c);
    assert!((t.k_c - 0.19).abs() < 0.01, "{}", t.k_c);
    assert!((3.0 * t.k_c - g.k_c).abs() < 1e-3);
}

#[test]
fn homogeneous_integrals_match_closed_forms() {
    for (n0, a) in [(1.0, 0.01), (0.3, 0.002), (5.0, 0.05)] {
        let (dep, ano) = homogeneous_fluctuations(n0, a).unwrap();
        let s = (n0 * n0 * n0 * a * a * a / PI).sqrt();
        assert!((dep / (8.0 / 3.0 * s) - 1.0).abs() < 1e-6);
        assert!((ano / (8.0 * s) - 1.0).abs() < 1e-6);
        assert!((ano / dep - 3.0).abs() < 1e-6);
    }
    let (dep, _) = homogeneous_fluctuations(1.0, 0.01).unwrap();
    assert!((dep - 1.5045e-3).abs() < 1e-7);
    assert!(homogeneous_fluctuations(1.0, 0.0).is_err());
    assert!(homogeneous_fluctuations(1.0, -0.1).is_err());
}

#[test]
fn lhy_shift_from_depletion_and_anomalous_average() {
    // η picks up U(2G + F)φ; with the uniform-gas averages this is δμ.
    let (n0, a) = (0.7, 0.01);
    let (g, f) = homogeneous_fluctuations(n0, a).unwrap();
    let u = 4.0 * PI * a;
    let shift = u * (2.0 * g + f);
    assert!((shift / lhy_mu_shift(n0, a) - 1.0).abs() < 1e-6);
    let coefficient = shift / (n0 * u * (n0 * a.powi(3) / PI).sqrt());
    assert!((coefficient - 40.0 / 3.0).abs() < 1e-5);
}

#[test]
fn lhy_reduces_to_gpe_without_interaction() {
    let l = solve_lhy_gpe(1000.0, 0.0, &spec()).unwrap();
    let g = solve_effective(1000.0, 0.0, 1.0, &spec()).unwrap();
    assert!((&l.mode.coeffs - &g.mode.coeffs).amax() < 1e-10);
    assert!((l.e_per_n - g.e_per_n).abs() < 1e-12);
}

#[test]
fn lhy_raises_energy() {
    let n = 1000.0;
    let a = 0.5 / n;
    let l = solve_lhy_gpe(n, a, &spec()).unwrap();
    let g = solve_effective(n, a, 1.0, &spec()).unwrap();
    assert!(l.converged && l.e_per_n > g.e_per_n);
    // The trapped shift lies between zero and the shift at the densest point.
    let center = lhy_mu_shift(g.mode.density(0.0), a);
    let dmu = l.mu - g.mu;
    assert!(dmu > 0.0 && dmu < center, "{dmu} {center}");
}

#[test]
fn lhy_potential_at_center_matches_uniform_shift() {
    let n = 1000.0;
    let a = 0.5 / n;
    let g = solve_effective(n, a, 1.0, &spec()).unwrap();
    let p = EffectiveProblem::new(n, a, 1.0, 20, true).unwrap();
    let v = p.lhy_potential(&g.mode.coeffs, 0.0);
    let want = lhy_mu_shift(g.mode.density(0.0), a);
    assert!((v / want - 1.0).abs() < 0.05);
}

#[test]
fn scan_csv_columns() {
    let sp = spec();
    let rows: Vec<ScanRow> = [0.0, -0.25]
        .iter()
        .map(|&k| ScanRow::from_outcome(100.0, k / 100.0, 3.0, &solve_effective(100.0, k / 100.0, 3.0, &sp)))
        .collect();
    let mut buf = Vec::new();
    write_scan_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "N,a_s_over_aho,u_mult,converged,E_per_N,mu,W");
    assert!(lines.next().unwrap().contains(",true,"));
    assert!(lines.next().unwrap().contains(",false,"));
}

#[test]
fn squeezed_multiplier_value() {
    assert!((squeezed_multiplier(100.0) - 3.01).abs() < 1e-14);
}
