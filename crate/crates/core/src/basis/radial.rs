use crate::error::{domain, Result};
use statrs::function::gamma::ln_gamma;

/// Generalized Laguerre polynomial `L_n^α(x)` by forward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln` of the normalization `√(2 n! / Γ(n + l + 3/2))`.
pub fn radial_norm_ln(n: usize, l: usize) -> f64 {
    0.5 * (std::f64::consts::LN_2 + ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + l as f64 + 1.5))
}

/// `P_nl(r) = R_nl(r) e^{r²/2}`: the radial function with its Gaussian stripped.
pub fn reduced_radial(n: usize, l: usize, r: f64) -> f64 {
    let alpha = l as f64 + 0.5;
    radial_norm_ln(n, l).exp() * r.powi(l as i32) * laguerre(n, alpha, r * r)
}

/// `P_nl(r)` for `n = 0..nb`, sharing one recurrence.
pub fn reduced_radial_all(nb: usize, l: usize, r: f64) -> Vec<f64> {
    let alpha = l as f64 + 0.5;
    let x = r * r;
    let rl = r.powi(l as i32);
    let mut out = Vec::with_capacity(nb);
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 0..nb {
        if n > 0 {
            let k = (n - 1) as f64;
            let next = if n == 1 {
                1.0 + alpha - x
            } else {
                ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0)
            };
            prev = cur;
            cur = next;
        }
        out.push(radial_norm_ln(n, l).exp() * rl * cur);
    }
    out
}

/// Normalized radial eigenfunction `R_nl(r)` of the isotropic oscillator.
pub fn radial_eigenfunction(n: usize, l: usize, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("radius must be finite and non-negative, got {r}"));
    }
    Ok(reduced_radial(n, l, r) * (-0.5 * r * r).exp())
}
