use super::radial::reduced_radial_all;
use super::BasisSpec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

const RESCALE: f64 = 1e150;

/// Orthonormal Laguerre recurrence at `x` up to degree `q`.
///
/// Returns `(p_q, p_q', ln Σ_{k<q} p_k²)` with `p_q` and `p_q'` sharing an
/// arbitrary positive scale.
fn recurrence(q: usize, alpha: f64, x: f64) -> (f64, f64, f64) {
    let a = |k: usize| 2.0 * k as f64 + alpha + 1.0;
    let b = |k: usize| ((k as f64) * (k as f64 + alpha)).sqrt();
    let mut p_prev = 0.0;
    let mut p = (-0.5 * ln_gamma(alpha + 1.0)).exp();
    let (mut d_prev, mut d) = (0.0, 0.0);
    let mut sum = 0.0;
    let mut ln_scale = 0.0;
    for k in 0..q {
        sum += p * p;
        let bk1 = b(k + 1);
        let p_next = ((x - a(k)) * p - b(k) * p_prev) / bk1;
        let d_next = ((x - a(k)) * d + p - b(k) * d_prev) / bk1;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        if p.abs() > RESCALE || d.abs() > RESCALE {
            p /= RESCALE;
            p_prev /= RESCALE;
            d /= RESCALE;
            d_prev /= RESCALE;
            sum /= RESCALE * RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    (p, d, sum.ln() + 2.0 * ln_scale)
}

/// Generalized Gauss–Laguerre rule for `∫₀^∞ x^α e^{-x} f(x) dx`.
///
/// Nodes come from the Jacobi matrix, are polished by Newton steps on the
/// degree-`q` orthonormal polynomial, and weights use the Christoffel
/// function so that small weights keep full relative accuracy.
pub fn gauss_laguerre(q: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(q > 0 && alpha > -1.0);
    let jac = DMatrix::from_fn(q, q, |i, j| {
        if i == j {
            2.0 * i as f64 + alpha + 1.0
        } else if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            (k * (k + alpha)).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut weights = Vec::with_capacity(q);
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (p, d, _) = recurrence(q, alpha, *x);
            let dx = p / d;
            *x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, _, ln_sum) = recurrence(q, alpha, *x);
        weights.push((-ln_sum).exp());
    }
    (nodes, weights)
}

/// Radial grid for integrals of four basis functions.
///
/// With `t = 2r²`, `∫ r² R_a R_b R_c R_d dr = Σ_q w_q P_a P_b P_c P_d` where
/// `P = R e^{r²/2}` is the reduced radial function. The rule is exact for
/// every quartic product in the basis.
#[derive(Clone, Debug)]
pub struct RadialQuadrature {
    pub spec: BasisSpec,
    pub order: usize,
    pub r: DVector<f64>,
    pub w: DVector<f64>,
    /// `p[l][(n, q)] = P_nl(r_q)`.
    pub p: Vec<DMatrix<f64>>,
}

impl RadialQuadrature {
    pub fn new(spec: BasisSpec) -> Self {
        Self::with_order(spec, spec.quadrature_order())
    }

    pub fn with_order(spec: BasisSpec, order: usize) -> Self {
        Self::with_functions(spec, order, spec.l_max)
    }

    /// Grid carrying reduced functions up to `l_fun ≥ l_max`.
    pub fn with_functions(spec: BasisSpec, order: usize, l_fun: usize) -> Self {
        let (t, wt) = gauss_laguerre(order, 0.5);
        let scale = 1.0 / (4.0 * std::f64::consts::SQRT_2);
        let r = DVector::from_iterator(order, t.iter().map(|t| (0.5 * t).sqrt()));
        let w = DVector::from_iterator(order, wt.iter().map(|w| w * scale));
        let nb = spec.nb();
        let p = (0..=l_fun.max(spec.l_max))
            .map(|l| {
                let mut m = DMatrix::zeros(nb, order);
                for (q, &rq) in r.iter().enumerate() {
                    for (n, v) in reduced_radial_all(nb, l, rq).into_iter().enumerate() {
                        m[(n, q)] = v;
                    }
                }
                m
            })
            .collect();
        Self { spec, order, r, w, p }
    }

    pub fn len(&self) -> usize {
        self.order
    }

    pub fn is_empty(&self) -> bool {
        self.order == 0
    }

    /// `∫ r² R_{n1 l1} R_{n2 l2} R_{n3 l3} R_{n4 l4} dr`.
    pub fn integrate4(&self, n: [usize; 4], l: [usize; 4]) -> f64 {
        (0..self.order)
            .map(|q| {
                self.w[q]
                    * self.p[l[0]][(n[0], q)]
                    * self.p[l[1]][(n[1], q)]
                    * self.p[l[2]][(n[2], q)]
                    * self.p[l[3]][(n[3], q)]
            })
            .sum()
    }

    /// `A_{nn'} = Σ_q w_q d_q P_nl P_n'l` for a real grid density `d`.
    pub fn project(&self, l: usize, d: &[f64]) -> DMatrix<f64> {
        let pl = &self.p[l];
        let mut scaled = pl.clone();
        for (q, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.w[q] * d[q];
        }
        &scaled * pl.transpose()
    }
}
