//! Single-mode effective equations in the `l = 0` oscillator basis: the
//! Gross–Pitaevskii equation, its tripled-interaction variant for a squeezed
//! mode, and the Lee–Huang–Yang corrected equation.
//!
//! A mode is `φ(r) = Σ_n c_n R_n0(r) Y_00` with `Σ c_n² = N`. The energy is
//! `Σ ε_n c_n² + (u U/2) ∫|φ|⁴ + (2/5) C ∫|φ|⁵`, with `C` the LHY coefficient
//! `(40/3) U a_s √(a_s/π)` when enabled and zero otherwise.

use crate::basis::{BasisSpec, RadialQuadrature};
use crate::error::{domain, GbecError, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// LHY chemical-potential coefficient in `δμ = (40/3) n₀ U √(n₀ a_s³/π)`.
pub const LHY_COEFFICIENT: f64 = 40.0 / 3.0;

/// Interaction multiplier of an exact single-mode squeezed vacuum, `3(1 + 1/(3N))`.
pub fn squeezed_multiplier(n: f64) -> f64 {
    3.0 * (1.0 + 1.0 / (3.0 * n))
}

/// Converged (or last) radial mode of an effective equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialMode {
    /// Coefficients over `R_n0`, `n = 0..=n_cut`.
    pub coeffs: DVector<f64>,
    pub norm_n: f64,
    /// Interaction multiplier `u` in `U_eff = u U`.
    pub u_eff: f64,
    pub a_s: f64,
    pub lhy: bool,
}

impl RadialMode {
    /// `φ(r)` including the `Y_00` factor.
    pub fn value(&self, r: f64) -> f64 {
        let p = crate::basis::reduced_radial_all(self.coeffs.len(), 0, r);
        let s: f64 = p.iter().zip(self.coeffs.iter()).map(|(a, b)| a * b).sum();
        s * (-0.5 * r * r).exp() / (4.0 * PI).sqrt()
    }

    /// Density `|φ(r)|²`.
    pub fn density(&self, r: f64) -> f64 {
        self.value(r).powi(2)
    }

    /// Width `√(⟨r²⟩/N)`.
    pub fn width(&self) -> f64 {
        let spec = BasisSpec { n_cut: self.coeffs.len() - 1, l_max: 0 };
        let r2 = self.coeffs.dot(&(spec.r2_matrix(0) * &self.coeffs));
        (r2 / self.norm_n).sqrt()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EffectiveSolution {
    pub mode: RadialMode,
    pub mu: f64,
    pub e_per_n: f64,
    pub width: f64,
    pub steps: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Iteration controls for the normalized flow.
#[derive(Clone, Debug)]
pub struct EffectiveOptions {
    pub dtau: f64,
    pub dtau_max: f64,
    /// Target for `‖h c - μ c‖ / √N`.
    pub tol: f64,
    pub max_steps: usize,
    /// Widths per particle below this count as collapse.
    pub collapse_width: f64,
    /// Starting coefficients; the oscillator ground state when absent.
    pub initial: Option<DVector<f64>>,
}

impl Default for EffectiveOptions {
    fn default() -> Self {
        Self {
            dtau: 0.05,
            dtau_max: 1.0,
            tol: 1e-10,
            max_steps: 200_000,
            collapse_width: crate::ground::COLLAPSE_WIDTH,
            initial: None,
        }
    }
}

/// Grid, one-body energies and couplings of one effective equation.
#[derive(Clone, Debug)]
pub struct EffectiveProblem {
    quad: RadialQuadrature,
    /// `e^{-r²/2}` on the grid, for the non-polynomial LHY term.
    damp: DVector<f64>,
    eps: DVector<f64>,
    n: f64,
    u_mult: f64,
    a_s: f64,
    /// Basis-normalized cubic coupling `u a_s`.
    g: f64,
    /// Basis-normalized LHY coupling `C/(4π)^{3/2}`.
    kappa: f64,
    lhy: bool,
}

impl EffectiveProblem {
    pub fn new(n: f64, a_s: f64, u_mult: f64, n_cut: usize, lhy: bool) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return domain(format!("particle number must be positive, got {n}"));
        }
        if !a_s.is_finite() || !(u_mult > 0.0) || !u_mult.is_finite() {
            return domain(format!("invalid coupling a_s={a_s}, u_mult={u_mult}"));
        }
        if lhy && a_s < 0.0 {
            return domain("LHY correction needs a_s >= 0");
        }
        let spec = BasisSpec::new(n_cut, 0)?;
        let order = if lhy { 4 * n_cut + 64 } else { spec.quadrature_order() };
        let quad = RadialQuadrature::with_order(spec, order);
        let damp = quad.r.map(|r| (-0.5 * r * r).exp());
        let eps = DVector::from_vec(spec.energies(0, 0.0));
        let kappa = if lhy { LHY_COEFFICIENT * a_s.powf(2.5) / (2.0 * PI) } else { 0.0 };
        Ok(Self { quad, damp, eps, n, u_mult, a_s, g: u_mult * a_s, kappa, lhy })
    }

    pub fn nb(&self) -> usize {
        self.eps.len()
    }

    /// Reduced mode `Σ c_n P_n0` on the grid.
    fn grid_mode(&self, c: &DVector<f64>) -> DVector<f64> {
        self.quad.p[0].tr_mul(c)
    }

    /// Mean-field matrix `h(c)` whose lowest eigenvector is the stationary mode.
    pub fn hamiltonian(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let f = self.grid_mode(c);
        let d: Vec<f64> = (0..f.len())
            .map(|q| self.g * f[q] * f[q] + self.kappa * f[q].abs().powi(3) * self.damp[q])
            .collect();
        let mut h = self.quad.project(0, &d);
        for n in 0..self.nb() {
            h[(n, n)] += self.eps[n];
        }
        h
    }

    /// Total energy of the coefficients `c` (their norm is not enforced).
    pub fn energy(&self, c: &DVector<f64>) -> f64 {
        let f = self.grid_mode(c);
        let mut e_int = 0.0;
        for q in 0..f.len() {
            let a = f[q].abs();
            e_int += self.quad.w[q] * (0.5 * self.g * a.powi(4) + 0.4 * self.kappa * a.powi(5) * self.damp[q]);
        }
        c.component_mul(c).dot(&self.eps) + e_int
    }

    /// Local LHY potential `C|φ(r)|³` of the coefficients `c`; zero without LHY.
    pub fn lhy_potential(&self, c: &DVector<f64>, r: f64) -> f64 {
        let p = crate::basis::reduced_radial_all(self.nb(), 0, r);
        let f: f64 = p.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
        self.kappa * (f * (-0.5 * r * r).exp()).abs().powi(3)
    }

    fn width(&self, c: &DVector<f64>) -> f64 {
        let spec = BasisSpec { n_cut: self.nb() - 1, l_max: 0 };
        (c.dot(&(spec.r2_matrix(0) * c)) / self.n).sqrt()
    }

    fn mode(&self, c: DVector<f64>) -> RadialMode {
        RadialMode { coeffs: c, norm_n: self.n, u_eff: self.u_mult, a_s: self.a_s, lhy: self.lhy }
    }

    /// Relaxes `(1 + dτ(h(c) - μ)) c' = c` followed by renormalization.
    ///
    /// Fixed points are eigenvectors of `h(c)`. A step that raises the energy
    /// or leaves `1 + dτ(h - μ)` indefinite is retried with half the step.
    pub fn solve(&self, opts: &EffectiveOptions) -> Result<EffectiveSolution> {
        let nb = self.nb();
        let norm = self.n.sqrt();
        let mut c = match &opts.initial {
            Some(c0) if c0.len() == nb && c0.norm() > 0.0 => c0 * (norm / c0.norm()),
            Some(c0) => return domain(format!("initial guess has length {} or zero norm, basis has {nb}", c0.len())),
            None => {
                let mut c = DVector::zeros(nb);
                c[0] = norm;
                c
            }
        };
        let mut e = self.energy(&c);
        let mut dt = opts.dtau;
        let mut good = 0usize;
        let mut residual = f64::INFINITY;
        let mut mu = 0.0;
        for step in 0..opts.max_steps {
            let h = self.hamiltonian(&c);
            let hc = &h * &c;
            mu = c.dot(&hc) / self.n;
            residual = (&hc - &c * mu).norm() / norm;
            if residual < opts.tol {
                let width = self.width(&c);
                if width < opts.collapse_width {
                    return Err(GbecError::Collapse { step, width, last: c.as_slice().to_vec() });
                }
                return Ok(EffectiveSolution {
                    e_per_n: e / self.n,
                    mu,
                    width,
                    steps: step,
                    residual,
                    converged: true,
                    mode: self.mode(c),
                });
            }
            loop {
                if dt < 1e-14 {
                    return Err(GbecError::Divergence { step, msg: "effective flow step underflow".into() });
                }
                let mut a = &h * dt;
                for i in 0..nb {
                    a[(i, i)] += 1.0 - dt * mu;
                }
                let Some(ch) = Cholesky::new(a) else {
                    dt *= 0.5;
                    good = 0;
                    continue;
                };
                let mut next = ch.solve(&c);
                next *= norm / next.norm();
                let e_next = self.energy(&next);
                if !e_next.is_finite() || e_next > e + 1e-13 * e.abs().max(1.0) {
                    dt *= 0.5;
                    good = 0;
                    continue;
                }
                c = next;
                e = e_next;
                break;
            }
            good += 1;
            if good >= 20 {
                dt = (dt * 1.5).min(opts.dtau_max);
                good = 0;
            }
            let width = self.width(&c);
            if width < opts.collapse_width {
                return Err(GbecError::Collapse { step, width, last: c.as_slice().to_vec() });
            }
        }
        let width = self.width(&c);
        Ok(EffectiveSolution {
            e_per_n: e / self.n,
            mu,
            width,
            steps: opts.max_steps,
            residual,
            converged: false,
            mode: self.mode(c),
        })
    }
}

/// Ground mode of `[𝓛 + u U|φ|²]φ = 0` at `N` particles.
///
/// `u_mult = 1` is the Gross–Pitaevskii equation, `3` the squeezed-mode
/// equation and [`squeezed_multiplier`] its finite-`N` form.
pub fn solve_effective(n: f64, a_s: f64, u_mult: f64, spec: &BasisSpec) -> Result<EffectiveSolution> {
    solve_effective_with(n, a_s, u_mult, spec, &EffectiveOptions::default())
}

pub fn solve_effective_with(
    n: f64,
    a_s: f64,
    u_mult: f64,
    spec: &BasisSpec,
    opts: &EffectiveOptions,
) -> Result<EffectiveSolution> {
    EffectiveProblem::new(n, a_s, u_mult, spec.n_cut, false)?.solve(opts)
}

/// Ground mode of the LHY-corrected Gross–Pitaevskii equation.
pub fn solve_lhy_gpe(n: f64, a_s: f64, spec: &BasisSpec) -> Result<EffectiveSolution> {
    if !(a_s >= 0.0) {
        return domain(format!("LHY-corrected equation needs a_s >= 0, got {a_s}"));
    }
    EffectiveProblem::new(n, a_s, 1.0, spec.n_cut, true)?.solve(&EffectiveOptions::default())
}

/// LHY chemical-potential shift `(40/3) n₀ U √(n₀ a_s³/π)` of a uniform gas.
pub fn lhy_mu_shift(n0: f64, a_s: f64) -> f64 {
    LHY_COEFFICIENT * n0 * 4.0 * PI * a_s * (n0 * a_s.powi(3) / PI).sqrt()
}

/// Result of [`collapse_threshold`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Threshold {
    pub u_mult: f64,
    /// Largest `N|a_s|/a_ho` found metastable.
    pub k_stable: f64,
    /// Smallest `N|a_s|/a_ho` found collapsing.
    pub k_collapse: f64,
    pub k_c: f64,
}

/// Nominal particle number for threshold scans; the result depends on `N a_s` only.
const THRESHOLD_N: f64 = 1000.0;

/// Critical `k = N|a_s|/a_ho` of the attractive effective equation, by
/// bisection to `resolution` on the product `u k`.
///
/// Each trial restarts from the last metastable mode so the flow follows the
/// metastable branch up to its end.
pub fn collapse_threshold(u_mult: f64, spec: &BasisSpec, resolution: f64) -> Result<Threshold> {
    if !(u_mult > 0.0) || !(resolution > 0.0) {
        return domain("u_mult and resolution must be positive");
    }
    let trial = |s: f64, init: &Option<DVector<f64>>| -> Result<Option<DVector<f64>>> {
        let a = -s / (u_mult * THRESHOLD_N);
        let opts = EffectiveOptions { initial: init.clone(), tol: 1e-9, ..Default::default() };
        match solve_effective_with(THRESHOLD_N, a, u_mult, spec, &opts) {
            Ok(sol) if sol.converged => Ok(Some(sol.mode.coeffs)),
            Ok(_) | Err(GbecError::Collapse { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut init = None;
    while trial(hi, &None)?.is_some() {
        lo = hi;
        hi *= 2.0;
        if hi > 64.0 {
            return domain("no collapse found for u k <= 64");
        }
    }
    while hi - lo > resolution * u_mult {
        let mid = 0.5 * (lo + hi);
        match trial(mid, &init)? {
            Some(c) => {
                lo = mid;
                init = Some(c);
            }
            None => hi = mid,
        }
    }
    Ok(Threshold { u_mult, k_stable: lo / u_mult, k_collapse: hi / u_mult, k_c: 0.5 * (lo + hi) / u_mult })
}

/// Depletion `⟨δψ†δψ⟩` and anomalous average `⟨δψ²⟩` of a uniform condensate
/// at density `n0`, from the Bogoliubov momentum integrals.
///
/// With `k = √(2 n₀U) x` both integrals reduce to `(2n₀U)^{3/2}/(2π²)` times
/// a pure number; the anomalous one carries the `1/k²` counterterm.
pub fn homogeneous_fluctuations(n0: f64, a_s: f64) -> Result<(f64, f64)> {
    if !(a_s > 0.0) || !(n0 > 0.0) {
        return domain(format!("homogeneous integrals need n0 > 0 and a_s > 0, got n0={n0}, a_s={a_s}"));
    }
    // Written without the cancellations of `ℰ/E - 1` and `1 - x/√(x²+2)`.
    let dep = |x: f64| {
        let (en, e) = (x * x + 1.0, x * (x * x + 2.0).sqrt());
        0.5 * x * x / (e * (en + e))
    };
    let ano = |x: f64| {
        let s = (x * x + 2.0).sqrt();
        1.0 / ((s + x) * s)
    };
    let i1 = half_line(dep)?;
    let i2 = half_line(ano)?;
    let scale = (2.0 * n0 * 4.0 * PI * a_s).powf(1.5) / (2.0 * PI * PI);
    Ok((scale * i1, scale * i2))
}

/// `∫₀^∞ f(x) dx` through `x = t/(1-t)` and double-exponential quadrature.
fn half_line(f: impl Fn(f64) -> f64) -> Result<f64> {
    let out = quadrature::integrate(|t: f64| f(t / (1.0 - t)) / ((1.0 - t) * (1.0 - t)), 0.0, 1.0, 1e-14);
    if out.error_estimate > 1e-10 * out.integral.abs() {
        return Err(GbecError::Numeric { msg: "momentum integral did not converge".into(), estimate: out.error_estimate });
    }
    Ok(out.integral)
}

/// One line of a scan table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScanRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub a_s_over_aho: f64,
    pub u_mult: f64,
    pub converged: bool,
    #[serde(rename = "E_per_N")]
    pub e_per_n: f64,
    pub mu: f64,
    #[serde(rename = "W")]
    pub w: f64,
}

impl ScanRow {
    /// Row for one solve; collapse is recorded as a non-converged row.
    pub fn from_outcome(n: f64, a_s: f64, u_mult: f64, out: &Result<EffectiveSolution>) -> Self {
        match out {
            Ok(s) => Self { n, a_s_over_aho: a_s, u_mult, converged: s.converged, e_per_n: s.e_per_n, mu: s.mu, w: s.width },
            Err(_) => Self { n, a_s_over_aho: a_s, u_mult, converged: false, e_per_n: f64::NAN, mu: f64::NAN, w: f64::NAN },
        }
    }
}

pub fn write_scan_csv<W: std::io::Write>(rows: &[ScanRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
