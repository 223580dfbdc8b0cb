use super::quadrature::RadialQuadrature;
use super::radial::radial_norm_ln;
use super::BasisSpec;
use crate::error::{GbecError, Result};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use statrs::function::gamma::ln_gamma;

/// Largest tolerated ratio `Σ|t_K| / |Σ t_K|` in the closed-form sum before
/// switching to quadrature.
pub const CANCELLATION_LIMIT: f64 = 1e6;

/// A tensor entry together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementValue {
    pub value: f64,
    /// `Σ|t_K| / |Σ t_K|` of the alternating series.
    pub cancellation: f64,
    /// True when the closed form was rejected and quadrature used instead.
    pub fallback: bool,
}

/// Polynomial coefficients of `R_nl` in powers of `r²`, each already
/// multiplied by the normalization and by `2^{-k}` from the Gaussian moment.
/// Magnitudes are returned; the sign of power `k` is `(-1)^k`. Successive
/// coefficients come from their exact ratio so that relative errors stay at
/// a few ulp instead of inheriting the absolute error of `lnΓ`.
fn scaled_coeffs(n: usize, l: usize) -> Vec<f64> {
    let alpha = l as f64 + 0.5;
    let c0 = (radial_norm_ln(n, l) + ln_gamma(n as f64 + alpha + 1.0)
        - ln_gamma(n as f64 + 1.0)
        - ln_gamma(alpha + 1.0))
    .exp();
    let mut out = Vec::with_capacity(n + 1);
    out.push(c0);
    for k in 0..n {
        let kf = k as f64;
        let next = out[k] * (n - k) as f64 / (2.0 * (kf + 1.0) * (kf + alpha + 1.0));
        out.push(next);
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Neumaier compensated sum.
fn neumaier(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let u = s + t;
        c += if s.abs() >= t.abs() { (s - u) + t } else { (t - u) + s };
        s = u;
    }
    s + c
}

/// Put the four `(n, l)` labels in a fixed order so that every symmetric
/// permutation of an element evaluates to the same bits.
fn canonical(n: [usize; 4], l: [usize; 4]) -> ([usize; 4], [usize; 4]) {
    let mut p: [(usize, usize); 4] = [(l[0], n[0]), (l[1], n[1]), (l[2], n[2]), (l[3], n[3])];
    p.sort_unstable();
    (p.map(|x| x.1), p.map(|x| x.0))
}

/// Closed-form `∫ r² R R R R dr` for four arbitrary `(n, l)` pairs with even
/// `Σl`. Returns the value and the cancellation ratio of the final sum.
fn closed_form(n: [usize; 4], l: [usize; 4]) -> (f64, f64) {
    let lsum: usize = l.iter().sum();
    debug_assert!(lsum % 2 == 0);
    let c: Vec<Vec<f64>> = (0..4).map(|i| scaled_coeffs(n[i], l[i])).collect();
    let a = convolve(&convolve(&c[0], &c[1]), &convolve(&c[2], &c[3]));
    let s0 = (3.0 + lsum as f64) / 2.0;
    let ln_pref = -(s0 + 1.0) * std::f64::consts::LN_2;
    // Locate the dominant term in log space, then build Γ(s0+K)/Γ(s0+K*)
    // by exact recurrence around it.
    let kstar = a
        .iter()
        .enumerate()
        .map(|(k, ak)| (k, ak.ln() + ln_gamma(s0 + k as f64)))
        .fold((0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
        .0;
    let mut g = vec![1.0f64; a.len()];
    for k in kstar + 1..a.len() {
        g[k] = g[k - 1] * (s0 + (k - 1) as f64);
    }
    for k in (0..kstar).rev() {
        g[k] = g[k + 1] / (s0 + k as f64);
    }
    let terms: Vec<f64> = a
        .iter()
        .zip(&g)
        .enumerate()
        .map(|(k, (ak, gk))| if k % 2 == 0 { ak * gk } else { -ak * gk })
        .collect();
    let s = neumaier(terms.iter().copied());
    let abs: f64 = terms.iter().map(|t| t.abs()).sum();
    let value = s * (ln_gamma(s0 + kstar as f64) + ln_pref).exp();
    let ratio = if s == 0.0 { f64::INFINITY } else { abs / s.abs() };
    (value, ratio)
}

/// Shared quadrature rules for fallback evaluation, keyed by the largest
/// `(n, l)` of the element so the result does not depend on the caller.
fn fallback_quadrature(n: [usize; 4], l: [usize; 4]) -> Arc<RadialQuadrature> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<RadialQuadrature>>>> = OnceLock::new();
    let key = (n.iter().copied().max().unwrap().max(1), l.iter().copied().max().unwrap());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(q) = cache.lock().expect("quadrature cache").get(&key) {
        return q.clone();
    }
    let q = Arc::new(RadialQuadrature::new(BasisSpec { n_cut: key.0, l_max: key.1 }));
    cache.lock().expect("quadrature cache").entry(key).or_insert(q).clone()
}

/// Four-`l` interaction integral `a_s ∫ r² R_{n l} R_{n' l'} R_{n1 l1} R_{n1' l1'} dr`.
///
/// `Σl` must be even (odd sums never arise from parity-allowed couplings).
/// The alternating closed form is summed with compensation; when its
/// cancellation ratio exceeds [`CANCELLATION_LIMIT`] or the result is not
/// finite, the element is recomputed by quadrature and flagged.
pub fn interaction_element4(n: [usize; 4], l: [usize; 4], a_s: f64) -> Result<ElementValue> {
    if l.iter().sum::<usize>() % 2 == 1 {
        return Err(GbecError::Domain(format!(
            "odd total angular momentum {l:?} in interaction element"
        )));
    }
    let (n, l) = canonical(n, l);
    let (v, ratio) = closed_form(n, l);
    if v.is_finite() && ratio <= CANCELLATION_LIMIT {
        return Ok(ElementValue { value: a_s * v, cancellation: ratio, fallback: false });
    }
    let value = fallback_quadrature(n, l).integrate4(n, l);
    Ok(ElementValue { value: a_s * value, cancellation: ratio, fallback: true })
}

/// Element with its provenance, for `M^{l,l1}_{n n' n1 n1'}`.
pub fn interaction_element_detailed(
    n: usize,
    np: usize,
    n1: usize,
    n1p: usize,
    l: usize,
    l1: usize,
    a_s: f64,
) -> Result<ElementValue> {
    interaction_element4([n, np, n1, n1p], [l, l, l1, l1], a_s)
}

/// `M^{l,l1}_{n n' n1 n1'} = a_s ∫ r² R_{nl} R_{n'l} R_{n1 l1} R_{n1' l1} dr`.
pub fn interaction_element(
    n: usize,
    np: usize,
    n1: usize,
    n1p: usize,
    l: usize,
    l1: usize,
    a_s: f64,
) -> Result<f64> {
    Ok(interaction_element_detailed(n, np, n1, n1p, l, l1, a_s)?.value)
}

/// Quadrature evaluation of the same element, checked against a higher order.
pub fn interaction_element_quad(
    n: usize,
    np: usize,
    n1: usize,
    n1p: usize,
    l: usize,
    l1: usize,
    a_s: f64,
) -> Result<f64> {
    let ns = [n, np, n1, n1p];
    let ls = [l, l, l1, l1];
    let spec = BasisSpec { n_cut: *ns.iter().max().unwrap().max(&1), l_max: l.max(l1) };
    let q0 = spec.quadrature_order();
    let lo = RadialQuadrature::with_order(spec, q0);
    let hi = RadialQuadrature::with_order(spec, q0 + 16);
    let (a, b) = (lo.integrate4(ns, ls), hi.integrate4(ns, ls));
    let scale: f64 = (0..hi.order)
        .map(|q| {
            (hi.w[q] * hi.p[l][(n, q)] * hi.p[l][(np, q)] * hi.p[l1][(n1, q)] * hi.p[l1][(n1p, q)]).abs()
        })
        .sum();
    let diff = (a - b).abs();
    if diff > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(GbecError::Numeric {
            msg: format!("radial quadrature not converged for n={ns:?}, l={ls:?}"),
            estimate: diff,
        });
    }
    Ok(a_s * b)
}

/// Interaction integrals `M^{l,l1}_{n n' n1 n1'}` stored at `a_s = 1`.
///
/// Storage uses the symmetries `n↔n'`, `n1↔n1'` and `(l,n,n')↔(l1,n1,n1')`.
/// A pair index `A = l·P + tri(n, n')` with `n ≤ n'`, `tri(n, n') = n'(n'+1)/2 + n`
/// and `P = nb(nb+1)/2` labels each half; entries are laid out for `A ≤ B`
/// with `B` outer and `A` inner, at position `B(B+1)/2 + A`.
#[derive(Clone, Debug)]
pub struct InteractionTensor {
    pub spec: BasisSpec,
    entries: Vec<f64>,
    /// Number of entries that fell back to quadrature.
    pub fallbacks: usize,
}

fn tri(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    b * (b + 1) / 2 + a
}

impl InteractionTensor {
    fn pairs(spec: &BasisSpec) -> usize {
        spec.nb() * (spec.nb() + 1) / 2
    }

    /// Number of stored entries for a truncation.
    pub fn stored_len(spec: &BasisSpec) -> usize {
        let na = spec.n_l() * Self::pairs(spec);
        na * (na + 1) / 2
    }

    /// Number of entries of the unreduced tensor.
    pub fn full_len(spec: &BasisSpec) -> usize {
        let nb = spec.nb();
        (spec.n_l() * nb * nb).pow(2)
    }

    fn pair_label(spec: &BasisSpec, a: usize) -> (usize, usize, usize) {
        let p = Self::pairs(spec);
        let l = a / p;
        let mut t = a % p;
        let mut np = 0;
        while t > np {
            t -= np + 1;
            np += 1;
        }
        (l, t, np)
    }

    /// Build all entries in parallel.
    pub fn build(spec: BasisSpec) -> Self {
        let na = spec.n_l() * Self::pairs(&spec);
        let rows: Vec<(Vec<f64>, usize)> = (0..na)
            .into_par_iter()
            .map(|b| {
                let (l1, n1, n1p) = Self::pair_label(&spec, b);
                let mut fb = 0;
                let row = (0..=b)
                    .map(|a| {
                        let (l, n, np) = Self::pair_label(&spec, a);
                        let e = interaction_element4([n, np, n1, n1p], [l, l, l1, l1], 1.0)
                            .expect("even angular sum");
                        fb += e.fallback as usize;
                        e.value
                    })
                    .collect();
                (row, fb)
            })
            .collect();
        let fallbacks = rows.iter().map(|r| r.1).sum();
        let entries = rows.into_iter().flat_map(|r| r.0).collect();
        Self { spec, entries, fallbacks }
    }

    /// Reassemble from stored entries in the documented order.
    pub fn from_entries(spec: BasisSpec, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != Self::stored_len(&spec) {
            return Err(GbecError::Format(format!(
                "expected {} tensor entries, found {}",
                Self::stored_len(&spec),
                entries.len()
            )));
        }
        Ok(Self { spec, entries, fallbacks: 0 })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Unit-strength entry `M^{l,l1}_{n n' n1 n1'} / a_s`.
    #[inline]
    pub fn unit(&self, l: usize, n: usize, np: usize, l1: usize, n1: usize, n1p: usize) -> f64 {
        let p = Self::pairs(&self.spec);
        let a = l * p + tri(n, np);
        let b = l1 * p + tri(n1, n1p);
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.entries[b * (b + 1) / 2 + a]
    }

    /// Entry scaled by `a_s`.
    #[inline]
    pub fn get(&self, l: usize, n: usize, np: usize, l1: usize, n1: usize, n1p: usize, a_s: f64) -> f64 {
        a_s * self.unit(l, n, np, l1, n1, n1p)
    }
}
