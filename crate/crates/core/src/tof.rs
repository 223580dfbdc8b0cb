//! Interaction-free expansion of a single squeezed mode after the trap is
//! switched off, and the pair correlation `g²(0)` of the expanded cloud.
//!
//! Only `l = 0` profiles are propagated. The free propagator is integrated
//! over solid angle analytically, leaving the radial kernel
//! `4π (2πiT)^{-3/2} e^{i(r² + r'²)/2T} sin(rr'/T)/(rr'/T)`,
//! which is applied by composite Gauss-Legendre quadrature.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{reduced_radial_all, BasisSpec};
use crate::error::{domain, Result};

/// Gauss-Legendre nodes per panel.
const PANEL_ORDER: usize = 20;
/// Output panels; `|f_T|²` is smooth on the scale of the cloud.
const OUTPUT_PANELS: usize = 48;
/// Radians of kernel phase allowed per input panel.
const PHASE_PER_PANEL: f64 = 2.0;
const MAX_PANELS: usize = 200_000;
/// Allowed deviation of the input norm from one.
const NORM_TOL: f64 = 1e-6;

/// Composite Gauss-Legendre rule on `[0, r_max]`.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, panels: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).unwrap());
        let h = r_max / panels as f64;
        let mut r = Vec::with_capacity(panels * PANEL_ORDER);
        let mut w = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let a = p as f64 * h;
            for &(x, wx) in rule.as_node_weight_pairs() {
                r.push(a + 0.5 * h * (x + 1.0));
                w.push(0.5 * h * wx);
            }
        }
        Self { r, w }
    }

    /// `∫ g(r) d³r` for a radial function sampled on the grid.
    pub fn integrate3(&self, g: impl Fn(usize) -> f64) -> f64 {
        (0..self.r.len()).map(|i| 4.0 * PI * self.w[i] * self.r[i] * self.r[i] * g(i)).sum()
    }
}

/// Extent beyond which every basis function of `spec` is negligible.
pub fn default_extent(spec: &BasisSpec) -> f64 {
    (4.0 * spec.n_cut as f64 + 3.0).sqrt() + 5.0
}

/// Output extent at time `t`, `r_max(0)·√(1+T²)·1.5`.
pub fn extent_at(r_max0: f64, t: f64) -> f64 {
    r_max0 * (1.0 + t * t).sqrt() * 1.5
}

/// Normalized `l = 0` wavefunction `Σ c_n R_n0(r) Y_00` of basis coefficients.
pub fn mode_profile(spec: &BasisSpec, coeffs: &DVector<f64>) -> Result<impl Fn(f64) -> f64> {
    let nb = spec.nb();
    if coeffs.len() != nb {
        return domain(format!("{} coefficients for a basis of {nb}", coeffs.len()));
    }
    let norm = coeffs.norm();
    if norm == 0.0 {
        return domain("zero mode");
    }
    let c = coeffs / (norm * (4.0 * PI).sqrt());
    Ok(move |r: f64| {
        let p = reduced_radial_all(nb, 0, r);
        c.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() * (-0.5 * r * r).exp()
    })
}

/// Mode function `f(r, T)` of an expanded single-mode squeezed state of `N` particles.
#[derive(Clone, Debug)]
pub struct ExpandedMode {
    pub grid: RadialGrid,
    pub f: Vec<Complex64>,
    pub t: f64,
    pub n: f64,
}

impl ExpandedMode {
    /// `∫|f_T|² d³r`.
    pub fn norm(&self) -> f64 {
        self.grid.integrate3(|i| self.f[i].norm_sqr())
    }

    pub fn mean_square_radius(&self) -> f64 {
        self.grid.integrate3(|i| self.grid.r[i] * self.grid.r[i] * self.f[i].norm_sqr()) / self.norm()
    }

    /// RMS radius `√⟨r²⟩`.
    pub fn width(&self) -> f64 {
        self.mean_square_radius().sqrt()
    }

    /// `⟨ψ†ψ⟩_T = N|f|²` at grid node `i`.
    pub fn density(&self, i: usize) -> f64 {
        self.n * self.f[i].norm_sqr()
    }

    /// `⟨ψψ⟩_T = √(N(N+1)) f²` at grid node `i`.
    pub fn anomalous(&self, i: usize) -> Complex64 {
        (self.n * (self.n + 1.0)).sqrt() * self.f[i] * self.f[i]
    }

    /// `g²(0)` from the rank-one correlators at grid node `i`.
    pub fn g2_at(&self, i: usize) -> Result<f64> {
        let n = self.density(i);
        if n <= 1e-12 {
            return domain(format!("density {n:e} at r = {}; g2 undefined", self.grid.r[i]));
        }
        Ok((2.0 * n * n + self.anomalous(i).norm_sqr()) / (n * n))
    }

    /// `g²(0)` at the densest node.
    pub fn g2(&self) -> Result<f64> {
        let i = (0..self.f.len()).max_by(|&a, &b| self.f[a].norm_sqr().total_cmp(&self.f[b].norm_sqr())).unwrap_or(0);
        self.g2_at(i)
    }
}

/// Propagates the normalized `l = 0` profile `f` for a time `t` with the free
/// Hamiltonian. `r_max0` bounds the support of `f`.
pub fn free_propagate(f: impl Fn(f64) -> f64, r_max0: f64, n: f64, t: f64) -> Result<ExpandedMode> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("expansion time {t} must be non-negative"));
    }
    if !(n > 0.0) || !(r_max0 > 0.0) {
        return domain(format!("need N > 0 and r_max > 0, got {n} and {r_max0}"));
    }
    let out = RadialGrid::new(extent_at(r_max0, t), OUTPUT_PANELS);
    let input = RadialGrid::new(r_max0, OUTPUT_PANELS);
    let f0: Vec<f64> = input.r.iter().map(|&r| f(r)).collect();
    let norm = input.integrate3(|i| f0[i] * f0[i]);
    if (norm - 1.0).abs() > NORM_TOL {
        return domain(format!("input mode has norm {norm}"));
    }
    if t == 0.0 {
        let f = out.r.iter().map(|&r| Complex64::new(if r <= r_max0 { f(r) } else { 0.0 }, 0.0)).collect();
        return Ok(ExpandedMode { grid: out, f, t, n });
    }
    let r_out = extent_at(r_max0, t);
    let phase = (0.5 * r_max0 * r_max0 + r_out * r_max0) / t;
    let panels = (phase / PHASE_PER_PANEL).ceil() as usize;
    if panels > MAX_PANELS {
        return domain(format!("expansion time {t} too short to resolve the kernel"));
    }
    let src = RadialGrid::new(r_max0, panels.max(OUTPUT_PANELS));
    // r'² f(r') e^{ir'²/2T} with the quadrature weight folded in.
    let g: Vec<Complex64> = src
        .r
        .iter()
        .zip(&src.w)
        .map(|(&r, &w)| Complex64::from_polar(w * r * r * f(r), 0.5 * r * r / t))
        .collect();
    let pref = Complex64::from_polar(4.0 * PI * (2.0 * PI * t).powf(-1.5), -0.75 * PI);
    let values = out
        .r
        .par_iter()
        .map(|&r| {
            let s: Complex64 = src
                .r
                .iter()
                .zip(&g)
                .map(|(&rp, gi)| {
                    let x = r * rp / t;
                    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                    gi * sinc
                })
                .sum();
            pref * Complex64::from_polar(1.0, 0.5 * r * r / t) * s
        })
        .collect();
    Ok(ExpandedMode { grid: out, f: values, t, n })
}

/// `g²(0) = 3 + 1/N` of a single-mode squeezed state, at any expansion time.
pub fn g2_after_expansion(n: f64, _t: f64) -> f64 {
    3.0 + 1.0 / n
}

/// One line of the expansion table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TofRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub width: f64,
    pub g2: f64,
}

/// Expands `f` to each time in `times`, in parallel.
pub fn expansion_table(f: impl Fn(f64) -> f64 + Sync, r_max0: f64, n: f64, times: &[f64]) -> Result<Vec<TofRow>> {
    times
        .par_iter()
        .map(|&t| {
            let m = free_propagate(&f, r_max0, n, t)?;
            Ok(TofRow { t, width: m.width(), g2: m.g2()? })
        })
        .collect()
}

pub fn write_tof_csv<W: std::io::Write>(rows: &[TofRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
