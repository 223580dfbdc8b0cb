//! Linear response around a converged Gaussian ground state.
//!
//! Each total angular momentum `L` gives one sector. Its coordinates are
//! the one-particle amplitudes `(δβ_n, δβ̄_n)` in the `l = L` block (present
//! only when the ground state has a coherent part) and the pair amplitudes
//! `(δξ_p, δξ̄_p)` of two Bogoliubov quasiparticles `(l, s)` and `(l', s')`
//! coupled to `L`. Modes solve `M x = ω x`; `K M` is Hermitian for the
//! metric `K = diag(1, -1, m/2, -m/2)` with `m` the pair multiplicity.
//!
//! Every interaction term is the symmetric form
//! `⟨X, Y⟩ = Σ M̄^{L; l l' l1 l1'}_{n n' n1 n1'} X_{nn'} Y_{n1 n1'}` between
//! pair amplitudes in the oscillator basis, evaluated either on the radial
//! grid ([`GridKernel`]) or from the coupled tensor ([`TensorKernel`]).

use crate::basis::{pair_weight, reduced_radial_all, BasisSpec, CoupledTensor, RadialQuadrature};
use crate::error::{domain, GbecError, Result};
use crate::gstate::{build_mean_field, GaussianState, MeanFieldBlocks, QuadratureInteraction};
use crate::ground::{symplectic_diagonalize, BogoliubovBasis};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Modes with `|ω|` below this are treated as zero modes.
pub const ZERO_MODE_THRESHOLD: f64 = 1e-3;
/// Largest tolerated imaginary part of a finite frequency.
pub const INSTABILITY_IMAG: f64 = 1e-6;

/// Amplitude `X_{nn'}` over radial states of the channel `(l, l')`.
#[derive(Clone, Debug)]
pub struct PairAmplitude {
    pub l: usize,
    pub lp: usize,
    pub x: DMatrix<f64>,
}

/// Evaluates the interaction form between pair amplitudes.
pub trait PairKernel: Sync {
    fn spec(&self) -> BasisSpec;
    fn a_s(&self) -> f64;
    /// `⟨a_i, b_j⟩` for sector `L`.
    fn gram(&self, big_l: usize, a: &[PairAmplitude], b: &[PairAmplitude]) -> DMatrix<f64>;
}

/// Radial-grid evaluation: `⟨X, Y⟩ = a_s w_X w_Y Σ_q w_q x_q y_q`.
#[derive(Clone, Debug)]
pub struct GridKernel {
    pub quad: Arc<RadialQuadrature>,
    pub a_s: f64,
}

impl GridKernel {
    pub fn new(spec: BasisSpec, a_s: f64) -> Self {
        Self::from_interaction(&QuadratureInteraction::new(spec, a_s))
    }

    pub fn from_interaction(inter: &QuadratureInteraction) -> Self {
        Self { quad: inter.quad.clone(), a_s: inter.a_s }
    }

    /// Grid values `w_X Σ X_{nn'} P_nl P_n'l'` of every amplitude, one row each.
    fn values(&self, big_l: usize, a: &[PairAmplitude]) -> DMatrix<f64> {
        let q = &self.quad;
        let mut out = DMatrix::zeros(a.len(), q.order);
        for (i, amp) in a.iter().enumerate() {
            let w = pair_weight(big_l, amp.l, amp.lp);
            let y = &amp.x * &q.p[amp.lp];
            for k in 0..q.order {
                out[(i, k)] = w * q.p[amp.l].column(k).dot(&y.column(k));
            }
        }
        out
    }
}

impl PairKernel for GridKernel {
    fn spec(&self) -> BasisSpec {
        self.quad.spec
    }
    fn a_s(&self) -> f64 {
        self.a_s
    }
    fn gram(&self, big_l: usize, a: &[PairAmplitude], b: &[PairAmplitude]) -> DMatrix<f64> {
        let mut va = self.values(big_l, a);
        let vb = self.values(big_l, b);
        for (k, mut col) in va.column_iter_mut().enumerate() {
            col *= self.quad.w[k] * self.a_s;
        }
        va * vb.transpose()
    }
}

/// Evaluation through the dense coupled tensor of one sector.
#[derive(Clone, Debug)]
pub struct TensorKernel {
    pub tensor: Arc<CoupledTensor>,
    pub a_s: f64,
}

impl PairKernel for TensorKernel {
    fn spec(&self) -> BasisSpec {
        self.tensor.spec
    }
    fn a_s(&self) -> f64 {
        self.a_s
    }
    fn gram(&self, big_l: usize, a: &[PairAmplitude], b: &[PairAmplitude]) -> DMatrix<f64> {
        assert_eq!(big_l, self.tensor.big_l, "tensor built for another sector");
        let nb = self.tensor.spec.nb();
        let nn = nb * nb;
        let flat = |x: &DMatrix<f64>| DVector::from_fn(nn, |k, _| x[(k / nb, k % nb)]);
        let fa: Vec<DVector<f64>> = a.iter().map(|p| flat(&p.x)).collect();
        let fb: Vec<DVector<f64>> = b.iter().map(|p| flat(&p.x)).collect();
        let mut out = DMatrix::zeros(a.len(), b.len());
        let mut cache: std::collections::HashMap<[usize; 4], DMatrix<f64>> = Default::default();
        for (i, pa) in a.iter().enumerate() {
            for (j, pb) in b.iter().enumerate() {
                let key = [pa.l, pa.lp, pb.l, pb.lp];
                let m = cache.entry(key).or_insert_with(|| {
                    DMatrix::from_fn(nn, nn, |r, c| self.tensor.unit(key, [r / nb, r % nb, c / nb, c % nb]))
                });
                out[(i, j)] = self.a_s * fa[i].dot(&(&*m * &fb[j]));
            }
        }
        out
    }
}

/// Two quasiparticles `(l, s)` and `(l', s')` with `l ≤ l'`, and `s ≤ s'` when `l = l'`
/// (`s < s'` for the antisymmetric odd combinations).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairChannel {
    pub l: usize,
    pub lp: usize,
    pub s: usize,
    pub sp: usize,
}

impl PairChannel {
    /// Number of ordered pairs represented: 1 on the diagonal, else 2.
    pub fn multiplicity(&self) -> f64 {
        if self.l == self.lp && self.s == self.sp {
            1.0
        } else {
            2.0
        }
    }
}

/// Linear-response operator of one sector.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    pub big_l: usize,
    /// Number of `δβ` components (0 when the one-particle block is absent).
    pub n_1pe: usize,
    pub pairs: Vec<PairChannel>,
    pub matrix: DMatrix<Complex64>,
    /// Diagonal of the metric `K`.
    pub metric: DVector<f64>,
    /// Ground-state coherent amplitudes, for the phase generator.
    pub beta: DVector<f64>,
}

impl SectorOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖K M - (K M)†‖_max`.
    pub fn pseudo_hermiticity_defect(&self) -> f64 {
        let km = DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(i, j)] * self.metric[i]);
        (&km - km.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Every eigenvalue, both branches included.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        linalg::eigenvalues(&self.matrix)
    }
}

/// Pair channels of sector `L`.
///
/// Channels with `l + l' + L` even come first; they couple to the contact
/// interaction. The remaining ones follow and evolve freely at
/// `ω = D_l(s) + D_l'(s')`.
pub fn pair_channels(spec: &BasisSpec, big_l: usize) -> Vec<PairChannel> {
    let nb = spec.nb();
    let mut natural = Vec::new();
    let mut free = Vec::new();
    for l in 0..=spec.l_max {
        for lp in l..=spec.l_max {
            if big_l < lp - l || big_l > l + lp {
                continue;
            }
            let even = (l + lp + big_l) % 2 == 0;
            for s in 0..nb {
                for sp in 0..nb {
                    if l == lp && (sp < s || (!even && sp == s)) {
                        continue;
                    }
                    let c = PairChannel { l, lp, s, sp };
                    if even {
                        natural.push(c);
                    } else {
                        free.push(c);
                    }
                }
            }
        }
    }
    natural.extend(free);
    natural
}

/// Whether a channel couples to the contact interaction.
fn coupled(c: &PairChannel, big_l: usize) -> bool {
    (c.l + c.lp + big_l) % 2 == 0
}

/// Builds the sector operator around a converged ground state.
///
/// `mf` must be the mean-field blocks of `ground` and `bogo` their
/// Bogoliubov basis.
pub fn assemble_sector(
    big_l: usize,
    ground: &GaussianState<f64>,
    mf: &MeanFieldBlocks<f64>,
    bogo: &BogoliubovBasis,
    kernel: &dyn PairKernel,
) -> Result<SectorOperator> {
    let spec = ground.spec;
    if kernel.spec() != spec {
        return domain(format!("kernel basis {:?} differs from state basis {:?}", kernel.spec(), spec));
    }
    if bogo.u.len() != spec.n_l() || mf.e_blocks.len() != spec.n_l() {
        return domain("Bogoliubov basis or mean field does not match the state");
    }
    let nb = spec.nb();
    let pairs = pair_channels(&spec, big_l);
    if pairs.is_empty() {
        return domain(format!("sector L={big_l} has no allowed pair channel for l_max={}", spec.l_max));
    }
    let n1 = if big_l <= spec.l_max && ground.beta.iter().any(|&b| b != 0.0) { nb } else { 0 };
    let np = pairs.len();
    let nc = pairs.iter().filter(|c| coupled(c, big_l)).count();
    let coupling = &pairs[..nc];

    let mut objs = Vec::with_capacity(n1 + 3 * np);
    for m in 0..n1 {
        let mut x = DMatrix::zeros(nb, nb);
        x.set_column(m, &ground.beta);
        objs.push(PairAmplitude { l: 0, lp: big_l, x });
    }
    let col = |m: &DMatrix<f64>, s: usize| m.column(s).into_owned();
    let mut push = |f: &dyn Fn(&PairChannel) -> DMatrix<f64>| {
        for p in coupling {
            objs.push(PairAmplitude { l: p.l, lp: p.lp, x: f(p) });
        }
    };
    push(&|p| {
        let (u, v, up, vp) = (col(&bogo.u[p.l], p.s), col(&bogo.v[p.l], p.s), col(&bogo.u[p.lp], p.sp), col(&bogo.v[p.lp], p.sp));
        &u * vp.transpose() + &v * up.transpose()
    });
    push(&|p| col(&bogo.u[p.l], p.s) * col(&bogo.u[p.lp], p.sp).transpose());
    push(&|p| col(&bogo.v[p.l], p.s) * col(&bogo.v[p.lp], p.sp).transpose());
    let g = kernel.gram(big_l, &objs, &objs);

    let phi = |m: usize| m;
    let uv = |p: usize| n1 + p;
    let uu = |p: usize| n1 + nc + p;
    let vv = |p: usize| n1 + 2 * nc + p;
    let (b, bb, x, xb) = (0, n1, 2 * n1, 2 * n1 + np);
    let dim = 2 * n1 + 2 * np;
    let i = Complex64::i();
    let re = |v: f64| Complex64::new(v, 0.0);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);

    if n1 > 0 {
        let (e, d) = (&mf.e_blocks[big_l], &mf.delta_blocks[big_l]);
        for n in 0..n1 {
            for k in 0..n1 {
                m[(b + n, b + k)] = re(e[(n, k)]);
                m[(b + n, bb + k)] = re(d[(n, k)]);
                m[(bb + n, bb + k)] = re(-e[(n, k)]);
                m[(bb + n, b + k)] = re(-d[(n, k)]);
            }
            for (q, pq) in coupling.iter().enumerate() {
                let mq = pq.multiplicity();
                let (a_uv, a_uu, a_vv) = (g[(phi(n), uv(q))], g[(phi(n), uu(q))], g[(phi(n), vv(q))]);
                m[(b + n, x + q)] = i * (mq * (a_uv + a_uu));
                m[(b + n, xb + q)] = -i * (mq * (a_uv + a_vv));
                m[(bb + n, x + q)] = -i * (mq * (a_uv + a_vv));
                m[(bb + n, xb + q)] = i * (mq * (a_uv + a_uu));
            }
        }
    }
    for p in 0..nc {
        for k in 0..n1 {
            let (a_uv, a_uu, a_vv) = (g[(uv(p), phi(k))], g[(uu(p), phi(k))], g[(vv(p), phi(k))]);
            m[(x + p, b + k)] = -2.0 * i * (a_uv + a_uu);
            m[(x + p, bb + k)] = -2.0 * i * (a_uv + a_vv);
            m[(xb + p, b + k)] = -2.0 * i * (a_uv + a_vv);
            m[(xb + p, bb + k)] = -2.0 * i * (a_uv + a_uu);
        }
        for (q, pq) in coupling.iter().enumerate() {
            let mq = pq.multiplicity();
            let same = g[(uv(p), uv(q))] + g[(uu(p), uu(q))] + g[(vv(p), vv(q))];
            let cross = g[(uv(p), uv(q))] + g[(uu(p), vv(q))] + g[(vv(p), uu(q))];
            m[(x + p, x + q)] = re(mq * same);
            m[(x + p, xb + q)] = re(-mq * cross);
            m[(xb + p, x + q)] = re(mq * cross);
            m[(xb + p, xb + q)] = re(-mq * same);
        }
    }
    for (p, pp) in pairs.iter().enumerate() {
        let dp = bogo.d[pp.l][pp.s] + bogo.d[pp.lp][pp.sp];
        m[(x + p, x + p)] += re(dp);
        m[(xb + p, xb + p)] -= re(dp);
    }

    let mut metric = DVector::zeros(dim);
    for n in 0..n1 {
        metric[b + n] = 1.0;
        metric[bb + n] = -1.0;
    }
    for (p, pp) in pairs.iter().enumerate() {
        metric[x + p] = 0.5 * pp.multiplicity();
        metric[xb + p] = -0.5 * pp.multiplicity();
    }
    Ok(SectorOperator { big_l, n_1pe: n1, pairs, matrix: m, metric, beta: ground.beta.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeLabel {
    Goldstone,
    Dipole,
    Breathing,
    Other,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeLabel::Goldstone => "goldstone",
            ModeLabel::Dipole => "dipole",
            ModeLabel::Breathing => "breathing",
            ModeLabel::Other => "other",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    #[serde(rename = "L")]
    pub big_l: usize,
    pub omega: f64,
    pub omega_imag: f64,
    pub weight_1pe: f64,
    pub weight_2pe: f64,
    pub degeneracy: usize,
    pub label: ModeLabel,
    /// Overlap of the `δβ` part with the phase generator `(iβ, -iβ)`; only
    /// for `L = 0` with a coherent part.
    pub goldstone_overlap: Option<f64>,
}

/// Eigenpair of a sector with its classification.
#[derive(Clone, Debug)]
pub struct Mode {
    pub record: ModeRecord,
    pub vector: DVector<Complex64>,
}

/// Unit phase generator `(iβ, -iβ, 0, 0)` of a sector with a coherent part at `L = 0`.
pub fn phase_generator(op: &SectorOperator) -> Option<DVector<Complex64>> {
    let n1 = op.n_1pe;
    if op.big_l != 0 || n1 == 0 {
        return None;
    }
    let mut g = DVector::<Complex64>::zeros(op.dim());
    for n in 0..n1 {
        g[n] = Complex64::new(0.0, op.beta[n]);
        g[n1 + n] = Complex64::new(0.0, -op.beta[n]);
    }
    let norm = g.norm();
    Some(g.unscale(norm))
}

/// Weights and zero-mode label of one eigenpair.
///
/// `weight_1pe` is the share of the metric norm carried by `δβ`; for
/// modes of vanishing norm the plain Euclidean share is used instead.
pub fn classify_mode(omega: Complex64, vector: &DVector<Complex64>, op: &SectorOperator) -> ModeRecord {
    let n1 = op.n_1pe;
    let signed: f64 = vector.iter().zip(op.metric.iter()).map(|(z, k)| k * z.norm_sqr()).sum();
    let plain: f64 = vector.iter().zip(op.metric.iter()).map(|(z, k)| k.abs() * z.norm_sqr()).sum();
    let one_signed: f64 = (0..2 * n1).map(|k| op.metric[k] * vector[k].norm_sqr()).sum();
    let one_plain: f64 = (0..2 * n1).map(|k| vector[k].norm_sqr()).sum();
    let weight_1pe = if signed.abs() > 1e-8 * plain { one_signed / signed } else { one_plain / plain } + 0.0;
    let goldstone_overlap = phase_generator(op).map(|g| {
        if one_plain > 1e-24 * plain {
            g.dotc(vector).norm() / one_plain.sqrt()
        } else {
            0.0
        }
    });
    ModeRecord {
        big_l: op.big_l,
        omega: omega.re,
        omega_imag: omega.im,
        weight_1pe,
        weight_2pe: 1.0 - weight_1pe,
        degeneracy: 2 * op.big_l + 1,
        label: if omega.norm() < ZERO_MODE_THRESHOLD { ModeLabel::Goldstone } else { ModeLabel::Other },
        goldstone_overlap,
    }
}

/// Full spectrum of a sector.
///
/// The physical branch has positive metric norm; zero modes, whose norm
/// vanishes, are kept once per `±ω` pair. The lowest finite mode is labelled
/// breathing in `L = 0` and dipole in `L = 1`.
pub fn diagonalize_sector(op: &SectorOperator) -> Result<Vec<Mode>> {
    let (vals, vecs) = linalg::eigen(&op.matrix);
    let mut zero = Vec::new();
    let mut modes = Vec::new();
    for (k, w) in vals.iter().enumerate() {
        let v = vecs.column(k).into_owned();
        if w.norm() < ZERO_MODE_THRESHOLD {
            zero.push((*w, v));
            continue;
        }
        if w.im.abs() > INSTABILITY_IMAG {
            return Err(GbecError::Instability(format!("sector L={} has frequency {w}", op.big_l)));
        }
        let norm: f64 = v.iter().zip(op.metric.iter()).map(|(z, m)| m * z.norm_sqr()).sum();
        if norm > 0.0 {
            modes.push(Mode { record: classify_mode(*w, &v, op), vector: v });
        }
    }
    let keep = zero.len().div_ceil(2);
    // A ±ω zero pair is close to a Jordan block, so only the span of its
    // eigenvectors is meaningful. Its member along the phase generator
    // represents the Goldstone mode.
    let along_generator = phase_generator(op).and_then(|g| {
        let cols: Vec<DVector<Complex64>> = zero.iter().map(|(_, v)| v.clone()).collect();
        if cols.is_empty() {
            return None;
        }
        // Maximize |g†x₁|/‖x₁‖ over x in the span, x₁ being the δβ part.
        let q = DMatrix::from_columns(&cols).qr().q();
        let a = q.rows(0, 2 * op.n_1pe).into_owned();
        let b = a.adjoint() * g.rows(0, 2 * op.n_1pe);
        let c = (a.adjoint() * &a).pseudo_inverse(1e-12).ok()? * &b;
        let overlap = b.dotc(&c).re.max(0.0).sqrt();
        let x = &q * c;
        let norm = x.norm();
        (overlap > 0.5).then(|| (x.unscale(norm), overlap))
    });
    let mut rest = keep;
    if let Some((g, overlap)) = &along_generator {
        let mut record = classify_mode(Complex64::new(0.0, 0.0), g, op);
        record.goldstone_overlap = Some(*overlap);
        modes.push(Mode { record, vector: g.clone() });
        rest -= 1;
    }
    // The remaining representatives favour positive norm and little
    // overlap with the Goldstone vector already kept.
    let score = |v: &DVector<Complex64>| {
        let plain = v.norm_squared();
        let signed: f64 = v.iter().zip(op.metric.iter()).map(|(z, m)| m * z.norm_sqr()).sum();
        let along = along_generator.as_ref().map_or(0.0, |(g, _)| g.dotc(v).norm() / plain.sqrt());
        signed / plain - 2.0 * along
    };
    zero.sort_by(|a, b| score(&b.1).total_cmp(&score(&a.1)));
    for (w, v) in zero.into_iter().take(rest) {
        modes.push(Mode { record: classify_mode(w, &v, op), vector: v });
    }
    modes.sort_by(|a, b| {
        let za = a.record.label == ModeLabel::Goldstone;
        let zb = b.record.label == ModeLabel::Goldstone;
        if za && zb {
            std::cmp::Ordering::Equal
        } else {
            zb.cmp(&za).then(a.record.omega.total_cmp(&b.record.omega))
        }
    });
    let lowest = match op.big_l {
        0 => Some(ModeLabel::Breathing),
        1 => Some(ModeLabel::Dipole),
        _ => None,
    };
    if let Some(label) = lowest {
        // Among modes degenerate with the lowest one, the most coherent wins.
        let finite = || modes.iter().enumerate().filter(|(_, m)| m.record.label != ModeLabel::Goldstone);
        if let Some((_, first)) = finite().next() {
            let w0 = first.record.omega;
            let pick = finite()
                .take_while(|(_, m)| m.record.omega - w0 < 1e-9)
                .max_by(|a, b| a.1.record.weight_1pe.total_cmp(&b.1.record.weight_1pe))
                .map(|(i, _)| i);
            if let Some(i) = pick {
                modes[i].record.label = label;
            }
        }
    }
    Ok(modes)
}

/// Density fluctuation `δn = φ₀(δφ + δφ*) + δG(r, r)` of a mode, as the
/// radial profile multiplying `Y_L0`. The arbitrary eigenvector phase is
/// fixed so that the profile is as real as possible; the real part is returned.
pub fn density_fluctuation(
    mode: &Mode,
    op: &SectorOperator,
    ground: &GaussianState<f64>,
    bogo: &BogoliubovBasis,
    r: &[f64],
) -> Result<Vec<f64>> {
    let spec = ground.spec;
    let nb = spec.nb();
    if mode.vector.len() != op.dim() {
        return domain("mode does not belong to this sector");
    }
    let (n1, np) = (op.n_1pe, op.pairs.len());
    let x = &mode.vector;
    let i = Complex64::i();
    let norm4pi = (4.0 * PI).sqrt();
    let raw: Vec<Complex64> = r
        .iter()
        .map(|&rr| {
            let gauss = (-0.5 * rr * rr).exp();
            let rad: Vec<DVector<f64>> = (0..=spec.l_max.max(if n1 > 0 { op.big_l } else { 0 }))
                .map(|l| DVector::from_vec(reduced_radial_all(nb, l, rr)) * gauss)
                .collect();
            let mut dn = Complex64::new(0.0, 0.0);
            if n1 > 0 {
                let phi0 = ground.beta.dot(&rad[0]) / norm4pi;
                for m in 0..n1 {
                    dn += (x[m] + x[n1 + m]) * (phi0 * rad[op.big_l][m]);
                }
            }
            let qp = |mat: &DMatrix<f64>, l: usize, s: usize| mat.column(s).dot(&rad[l]);
            for (p, pc) in op.pairs.iter().enumerate() {
                let (u, v) = (qp(&bogo.u[pc.l], pc.l, pc.s), qp(&bogo.v[pc.l], pc.l, pc.s));
                let (up, vp) = (qp(&bogo.u[pc.lp], pc.lp, pc.sp), qp(&bogo.v[pc.lp], pc.lp, pc.sp));
                let a = pair_weight(op.big_l, pc.l, pc.lp) / norm4pi;
                let w = 0.5 * pc.multiplicity() * a * (u * vp + v * up);
                dn += i * w * (x[2 * n1 + p] - x[2 * n1 + np + p]);
            }
            dn
        })
        .collect();
    let sq: Complex64 = raw.iter().map(|z| z * z).sum();
    let rot = Complex64::from_polar(1.0, -0.5 * sq.arg());
    Ok(raw.iter().map(|z| (z * rot).re).collect())
}

/// Ground-state data shared by every sector.
pub struct SpectrumInput<'a> {
    pub ground: &'a GaussianState<f64>,
    pub inter: &'a QuadratureInteraction,
}

/// Modes of every sector in `sectors`, computed in parallel.
pub fn spectrum(input: &SpectrumInput<'_>, sectors: &[usize]) -> Result<Vec<Vec<Mode>>> {
    let mf = build_mean_field(input.ground, input.inter)?;
    let bogo = symplectic_diagonalize(&mf)?;
    let kernel = GridKernel::from_interaction(input.inter);
    sectors
        .par_iter()
        .map(|&l| diagonalize_sector(&assemble_sector(l, input.ground, &mf, &bogo, &kernel)?))
        .collect()
}

/// One line of the spectrum table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumRow {
    #[serde(rename = "a_s_over_aho_times_N")]
    pub a_s_over_aho_times_n: f64,
    #[serde(rename = "L")]
    pub big_l: usize,
    pub omega: f64,
    pub weight_1pe: f64,
    pub degeneracy: usize,
    pub label: String,
}

impl SpectrumRow {
    pub fn new(k: f64, m: &ModeRecord) -> Self {
        Self {
            a_s_over_aho_times_n: k,
            big_l: m.big_l,
            omega: m.omega,
            weight_1pe: m.weight_1pe,
            degeneracy: m.degeneracy,
            label: m.label.to_string(),
        }
    }
}

pub fn write_spectrum_csv<W: std::io::Write>(rows: &[SpectrumRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
