//! Gaussian variational state in the projected basis and its derived
//! quantities.

use crate::basis::{reduced_radial_all, BasisSpec, InteractionTensor, RadialQuadrature};
use crate::error::{domain, GbecError, Result};
use crate::linalg;
use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Field type of a state: `f64` for real ground states, `Complex64` in general.
pub trait Scalar: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Coherent amplitudes `β_n` (in the `l = 0` block) and covariance blocks
/// `G^l = ⟨a†a⟩`, `F^l = ⟨aa⟩`, identical for every `m` of a given `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState<T: Scalar = Complex64> {
    pub spec: BasisSpec,
    pub beta: DVector<T>,
    pub g: Vec<DMatrix<T>>,
    pub f: Vec<DMatrix<T>>,
    pub mu: f64,
}

impl<T: Scalar> GaussianState<T> {
    pub fn vacuum(spec: BasisSpec) -> Self {
        let nb = spec.nb();
        Self {
            spec,
            beta: DVector::zeros(nb),
            g: vec![DMatrix::zeros(nb, nb); spec.n_l()],
            f: vec![DMatrix::zeros(nb, nb); spec.n_l()],
            mu: 0.0,
        }
    }

    /// Coherent state with `n` particles in `φ_000`.
    pub fn coherent(spec: BasisSpec, n: f64) -> Self {
        let mut s = Self::vacuum(spec);
        s.beta[0] = T::from_real(n.sqrt());
        s
    }

    /// Single-mode squeezed vacuum with `sinh²ξ = n` in the `l = 0` mode `mode`.
    pub fn squeezed(spec: BasisSpec, n: f64, mode: &DVector<f64>) -> Result<Self> {
        if mode.len() != spec.nb() {
            return domain("squeezed mode length differs from basis size");
        }
        let norm = mode.norm();
        if norm == 0.0 {
            return domain("squeezed mode must be non-zero");
        }
        let f = mode / norm;
        let ff = &f * f.transpose();
        let mut s = Self::vacuum(spec);
        s.g[0] = ff.map(|x| T::from_real(n * x));
        s.f[0] = ff.map(|x| T::from_real((n * (n + 1.0)).sqrt() * x));
        Ok(s)
    }

    pub fn check_shape(&self) -> Result<()> {
        let nb = self.spec.nb();
        let ok = self.beta.len() == nb
            && self.g.len() == self.spec.n_l()
            && self.f.len() == self.spec.n_l()
            && self.g.iter().chain(&self.f).all(|m| m.shape() == (nb, nb));
        if ok {
            Ok(())
        } else {
            domain("state dimensions do not match its basis")
        }
    }

    /// `(N_c, N_d) = (Σ|β|², Σ_l (2l+1) Tr G^l)`.
    pub fn particle_numbers(&self) -> (f64, f64) {
        let nc = self.beta.norm_squared();
        let nd = self
            .g
            .iter()
            .enumerate()
            .map(|(l, g)| (2 * l + 1) as f64 * g.trace().real())
            .sum();
        (nc, nd)
    }

    pub fn total_number(&self) -> f64 {
        let (a, b) = self.particle_numbers();
        a + b
    }

    /// Project `G` onto its Hermitian part and `F` onto its symmetric part.
    pub fn symmetrize(&mut self) {
        for g in &mut self.g {
            let h = (g.clone() + g.adjoint()) * T::from_real(0.5);
            *g = h;
        }
        for f in &mut self.f {
            let s = (f.clone() + f.transpose()) * T::from_real(0.5);
            *f = s;
        }
    }

    pub fn to_complex(&self) -> GaussianState<Complex64> {
        let c = |z: T| Complex64::new(z.real(), z.imaginary());
        GaussianState {
            spec: self.spec,
            beta: self.beta.map(c),
            g: self.g.iter().map(|m| m.map(c)).collect(),
            f: self.f.iter().map(|m| m.map(c)).collect(),
            mu: self.mu,
        }
    }

    /// Real state, provided every imaginary part is below `tol`.
    pub fn to_real(&self, tol: f64) -> Result<GaussianState<f64>> {
        let max_im = self
            .beta
            .iter()
            .chain(self.g.iter().flat_map(|m| m.iter()))
            .chain(self.f.iter().flat_map(|m| m.iter()))
            .map(|z| z.imaginary().abs())
            .fold(0.0, f64::max);
        if max_im > tol {
            return domain(format!("state has imaginary parts up to {max_im:e}"));
        }
        Ok(GaussianState {
            spec: self.spec,
            beta: self.beta.map(|z| z.real()),
            g: self.g.iter().map(|m| m.map(|z| z.real())).collect(),
            f: self.f.iter().map(|m| m.map(|z| z.real())).collect(),
            mu: self.mu,
        })
    }

    /// Nambu covariance `Γ^l = [[I + 2G, 2F], [2F*, I + 2G*]]`.
    pub fn gamma_block(&self, l: usize) -> DMatrix<Complex64> {
        let c = self.to_complex_block(l);
        let nb = self.spec.nb();
        let mut gm = DMatrix::identity(2 * nb, 2 * nb);
        for i in 0..nb {
            for j in 0..nb {
                gm[(i, j)] += c.0[(i, j)] * 2.0;
                gm[(i, j + nb)] = c.1[(i, j)] * 2.0;
                gm[(i + nb, j)] = c.1[(i, j)].conj() * 2.0;
                gm[(i + nb, j + nb)] += c.0[(i, j)].conj() * 2.0;
            }
        }
        gm
    }

    fn to_complex_block(&self, l: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let c = |z: &T| Complex64::new(z.real(), z.imaginary());
        (self.g[l].map(|z| c(&z)), self.f[l].map(|z| c(&z)))
    }

    /// Smallest `|eig(Σ^z Γ^l)|` over all blocks; a pure or mixed physical
    /// state has this at least one. A positive covariance makes `Σ^z Γ`
    /// similar to a Hermitian matrix, so complex eigenvalues mark an
    /// invalid covariance and yield zero.
    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        let nb = self.spec.nb();
        (0..self.spec.n_l())
            .map(|l| {
                let mut m = self.gamma_block(l);
                for i in nb..2 * nb {
                    for j in 0..2 * nb {
                        m[(i, j)] = -m[(i, j)];
                    }
                }
                let ev = linalg::eigenvalues(&m);
                if ev.iter().any(|z| z.im.abs() > 1e-8 * z.norm().max(1.0)) {
                    return 0.0;
                }
                ev.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue() >= 1.0 - 1e-8
    }

    /// Number variance `⟨N²⟩ - ⟨N⟩²` from Wick's theorem.
    pub fn number_variance(&self) -> f64 {
        let b = &self.beta;
        let g0 = &self.g[0];
        let f0 = &self.f[0];
        // ⟨δa_i δa_j†⟩ = δ_ij + G_ji and ⟨δa_i† δa_j⟩ = G_ij.
        let mut coherent = b.norm_squared();
        coherent += 2.0 * (b.adjoint() * g0.transpose() * b)[(0, 0)].real();
        coherent += 2.0 * (b.adjoint() * f0 * b.conjugate())[(0, 0)].real();
        let mut fluct = 0.0;
        for (l, (g, f)) in self.g.iter().zip(&self.f).enumerate() {
            let deg = (2 * l + 1) as f64;
            let gg = (g * g).trace().real();
            let ff: f64 = f.iter().map(|z| z.modulus_squared()).sum();
            fluct += deg * (g.trace().real() + gg + ff);
        }
        coherent + fluct
    }
}

/// Unit-strength radial contractions `C^l_{nn'} = ∫ r² R_nl R_n'l d(r)` of a
/// density `d(r) = Σ_{l1} Σ_ab R_{a l1} X^{l1}_ab R_{b l1}`.
pub trait Interaction: Sync + Send {
    fn spec(&self) -> BasisSpec;
    fn a_s(&self) -> f64;
    /// `density[l1]` holds `X^{l1}`; returns `C^l` for each `l` in `l_out`.
    fn contract_real(&self, density: &[DMatrix<f64>], l_out: &[usize]) -> Vec<DMatrix<f64>>;
}

/// Contractions evaluated on the radial quadrature grid.
#[derive(Clone, Debug)]
pub struct QuadratureInteraction {
    pub quad: Arc<RadialQuadrature>,
    pub a_s: f64,
}

impl QuadratureInteraction {
    /// Grid of the lowest order that is exact for all basis quartics.
    pub fn new(spec: BasisSpec, a_s: f64) -> Self {
        let order = 2 * spec.n_cut + spec.l_max + 2;
        Self { quad: Arc::new(RadialQuadrature::with_order(spec, order)), a_s }
    }

    pub fn with_quadrature(quad: Arc<RadialQuadrature>, a_s: f64) -> Self {
        Self { quad, a_s }
    }

    /// Density on the grid.
    pub fn grid_density(&self, density: &[DMatrix<f64>]) -> Vec<f64> {
        let q = &self.quad;
        let mut d = vec![0.0; q.order];
        for (l1, x) in density.iter().enumerate() {
            if x.iter().all(|v| *v == 0.0) {
                continue;
            }
            let y = x * &q.p[l1];
            for (k, dk) in d.iter_mut().enumerate() {
                *dk += q.p[l1].column(k).dot(&y.column(k));
            }
        }
        d
    }
}

impl Interaction for QuadratureInteraction {
    fn spec(&self) -> BasisSpec {
        self.quad.spec
    }
    fn a_s(&self) -> f64 {
        self.a_s
    }
    fn contract_real(&self, density: &[DMatrix<f64>], l_out: &[usize]) -> Vec<DMatrix<f64>> {
        let d = self.grid_density(density);
        l_out.iter().map(|&l| self.quad.project(l, &d)).collect()
    }
}

/// Contractions through the dense symmetry-reduced tensor.
#[derive(Clone, Debug)]
pub struct TensorInteraction {
    pub tensor: Arc<InteractionTensor>,
    pub a_s: f64,
}

impl Interaction for TensorInteraction {
    fn spec(&self) -> BasisSpec {
        self.tensor.spec
    }
    fn a_s(&self) -> f64 {
        self.a_s
    }
    fn contract_real(&self, density: &[DMatrix<f64>], l_out: &[usize]) -> Vec<DMatrix<f64>> {
        let nb = self.tensor.spec.nb();
        l_out
            .iter()
            .map(|&l| {
                DMatrix::from_fn(nb, nb, |n, np| {
                    let mut s = 0.0;
                    for (l1, x) in density.iter().enumerate() {
                        for a in 0..nb {
                            for b in 0..nb {
                                let v = x[(a, b)];
                                if v != 0.0 {
                                    s += self.tensor.unit(l, n, np, l1, a, b) * v;
                                }
                            }
                        }
                    }
                    s
                })
            })
            .collect()
    }
}

fn contract<T: Scalar>(inter: &dyn Interaction, density: &[DMatrix<T>], l_out: &[usize]) -> Vec<DMatrix<T>> {
    let re: Vec<DMatrix<f64>> = density.iter().map(|m| m.map(|z| z.real())).collect();
    let out_re = inter.contract_real(&re, l_out);
    let has_im = density.iter().any(|m| m.iter().any(|z| z.imaginary() != 0.0));
    if !has_im {
        return out_re.into_iter().map(|m| m.map(T::from_real)).collect();
    }
    let im: Vec<DMatrix<f64>> = density.iter().map(|m| m.map(|z| z.imaginary())).collect();
    let out_im = inter.contract_real(&im, l_out);
    // Only reached for complex T, where √(-1) is the imaginary unit.
    let i = (-T::one()).sqrt();
    out_re
        .into_iter()
        .zip(out_im)
        .map(|(r, m)| r.map(T::from_real) + m.map(|v| T::from_real(v) * i))
        .collect()
}

/// Per-`l` mean-field matrices, driving vector and grand energy `E - μN`.
#[derive(Clone, Debug)]
pub struct MeanFieldBlocks<T: Scalar = Complex64> {
    pub e_blocks: Vec<DMatrix<T>>,
    pub delta_blocks: Vec<DMatrix<T>>,
    pub eta: DVector<T>,
    /// `E - μN` at the state's chemical potential.
    pub energy: f64,
    pub mu: f64,
}

impl<T: Scalar> MeanFieldBlocks<T> {
    /// The same blocks at another chemical potential (`ℰ` and `η` are affine in `μ`).
    pub fn shift_mu(&self, state: &GaussianState<T>, mu: f64) -> Self {
        let d = T::from_real(self.mu - mu);
        let mut out = self.clone();
        for e in &mut out.e_blocks {
            for i in 0..e.nrows() {
                e[(i, i)] += d;
            }
        }
        out.eta += state.beta.map(|b| b * d);
        out.energy += (self.mu - mu) * state.total_number();
        out.mu = mu;
        out
    }
}

/// Mean-field blocks `ℰ^l`, `Δ^l`, the driving vector `η` and the energy.
pub fn build_mean_field<T: Scalar>(state: &GaussianState<T>, inter: &dyn Interaction) -> Result<MeanFieldBlocks<T>> {
    state.check_shape()?;
    if inter.spec() != state.spec {
        return domain(format!("interaction basis {:?} differs from state basis {:?}", inter.spec(), state.spec));
    }
    let spec = state.spec;
    let nl = spec.n_l();
    let a = inter.a_s();
    let beta = &state.beta;
    let x_rho = beta.conjugate() * beta.transpose();
    let x_phi2 = beta * beta.transpose();
    let deg = |l: usize| T::from_real((2 * l + 1) as f64);

    let dens_a: Vec<DMatrix<T>> = (0..nl)
        .map(|l| if l == 0 { &x_rho + &state.g[0] } else { &state.g[l] * deg(l) })
        .collect();
    let dens_b: Vec<DMatrix<T>> = (0..nl)
        .map(|l| if l == 0 { &x_phi2 + &state.f[0] } else { &state.f[l] * deg(l) })
        .collect();
    let mut dens_c = dens_a.clone();
    dens_c[0] = &state.g[0] - &x_rho;

    let all: Vec<usize> = (0..nl).collect();
    let ca = contract(inter, &dens_a, &all);
    let cb = contract(inter, &dens_b, &all);
    let cc = contract(inter, &dens_c, &[0]).remove(0);

    let ar = T::from_real(a);
    let mut e_blocks = Vec::with_capacity(nl);
    let mut delta_blocks = Vec::with_capacity(nl);
    for l in 0..nl {
        let mut e = &ca[l] * T::from_real(2.0 * a);
        for (n, eps) in spec.energies(l, state.mu).into_iter().enumerate() {
            e[(n, n)] += T::from_real(eps);
        }
        e_blocks.push(e);
        delta_blocks.push(&cb[l] * ar);
    }

    let eps0 = DVector::from_vec(spec.energies(0, state.mu));
    let mut eta = beta.zip_map(&eps0, |b, e| b * T::from_real(e));
    eta += (&ca[0] * beta + &cb[0] * beta.conjugate() + &cc * beta) * ar;

    let dot = |c: &DMatrix<T>, x: &DMatrix<T>| -> f64 { c.zip_fold(x, T::zero(), |acc, u, v| acc + u * v).real() };
    let c_rho = (&ca[0] - &cc) * T::from_real(0.5);
    let mut e_int = 0.0;
    for l in 0..nl {
        e_int += dot(&ca[l], &dens_a[l]) + 0.5 * dot(&cb[l], &dens_b[l].conjugate());
    }
    e_int -= dot(&c_rho, &x_rho);

    let mut e_free = 0.0;
    for (n, b) in beta.iter().enumerate() {
        e_free += eps0[n] * b.modulus_squared();
    }
    for l in 0..nl {
        let eps = spec.energies(l, state.mu);
        let tr: f64 = (0..spec.nb()).map(|n| eps[n] * state.g[l][(n, n)].real()).sum();
        e_free += (2 * l + 1) as f64 * tr;
    }

    Ok(MeanFieldBlocks { e_blocks, delta_blocks, eta, energy: e_free + a * e_int, mu: state.mu })
}

/// Grand energy `E - μN` at the state's chemical potential.
pub fn total_energy<T: Scalar>(state: &GaussianState<T>, inter: &dyn Interaction) -> Result<f64> {
    Ok(build_mean_field(state, inter)?.energy)
}

/// Energy `E` with the chemical-potential term removed.
pub fn physical_energy<T: Scalar>(state: &GaussianState<T>, inter: &dyn Interaction) -> Result<f64> {
    Ok(total_energy(state, inter)? + state.mu * state.total_number())
}

/// Mean square radius `∫ r² n(r) d³r` of the total density.
pub fn mean_square_radius<T: Scalar>(state: &GaussianState<T>) -> f64 {
    let r0 = state.spec.r2_matrix(0).map(T::from_real);
    let mut s = (state.beta.adjoint() * &r0 * &state.beta)[(0, 0)].real();
    for (l, g) in state.g.iter().enumerate() {
        let rl = state.spec.r2_matrix(l).map(T::from_real);
        s += (2 * l + 1) as f64 * (&rl * g.transpose()).trace().real();
    }
    s
}

/// Width `√(⟨r²⟩/N)` per particle, or `√⟨r²⟩` when `per_particle` is false.
pub fn width<T: Scalar>(state: &GaussianState<T>, per_particle: bool) -> Result<f64> {
    let r2 = mean_square_radius(state);
    if !per_particle {
        return Ok(r2.sqrt());
    }
    let n = state.total_number();
    if n <= 0.0 {
        return domain("width per particle of an empty state");
    }
    Ok((r2 / n).sqrt())
}

/// Local radial fields `(φ, ⟨δψ†δψ⟩, ⟨δψδψ⟩)` at radius `r`, each times `4π`.
pub fn local_fields<T: Scalar>(state: &GaussianState<T>, r: f64) -> (T, f64, T) {
    let nb = state.spec.nb();
    let gauss = (-0.5 * r * r).exp();
    let mut phi = T::zero();
    let mut g = 0.0;
    let mut f = T::zero();
    for l in 0..state.spec.n_l() {
        let rv = DVector::from_vec(reduced_radial_all(nb, l, r)).map(|v| T::from_real(v * gauss));
        if l == 0 {
            phi = rv.dot(&state.beta);
        }
        let deg = (2 * l + 1) as f64;
        g += deg * (rv.transpose() * &state.g[l] * &rv)[(0, 0)].real();
        f += T::from_real(deg) * (rv.transpose() * &state.f[l] * &rv)[(0, 0)];
    }
    (phi, g, f)
}

/// Local second-order coherence `g²(r)` including every Wick contraction.
pub fn g2_local<T: Scalar>(state: &GaussianState<T>, r: f64) -> Result<f64> {
    let (phi, g, f) = local_fields(state, r);
    let rho = phi.modulus_squared();
    let n = rho + g;
    if n <= 1e-300 {
        return Err(GbecError::Domain(format!("zero density at r = {r}; g2 undefined")));
    }
    let cross = (phi.conjugate() * phi.conjugate() * f).real();
    let num = rho * rho + 4.0 * rho * g + 2.0 * g * g + f.modulus_squared() + 2.0 * cross;
    Ok(num / (n * n))
}

/// Dominant depleted mode of the `l = 0` block.
#[derive(Clone, Debug)]
pub struct SqueezedMode {
    pub f: DVector<f64>,
    pub xi0: f64,
    /// `‖G⁰ - N_d f f†‖_F / ‖G⁰‖_F`.
    pub residual: f64,
    pub n_d: f64,
    /// Leading singular value of `F⁰`.
    pub f_singular: f64,
}

pub fn extract_squeezed_mode<T: Scalar>(state: &GaussianState<T>) -> Result<SqueezedMode> {
    let (_, n_d) = state.particle_numbers();
    if n_d < 1e-9 {
        return Err(GbecError::NoSqueezedMode(n_d));
    }
    let g0 = &state.g[0];
    let eig = SymmetricEigen::new(g0.clone());
    let k = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(k).into_owned();
    // Fix the phase so the largest component is real and positive.
    let big = v.iter().copied().max_by(|a, b| a.modulus().partial_cmp(&b.modulus()).unwrap()).unwrap();
    let phase = big.conjugate() * T::from_real(1.0 / big.modulus());
    let v = v.map(|z| z * phase);
    let f = v.map(|z| z.real());
    let fc = f.map(T::from_real);
    let diff = g0 - &fc * fc.transpose() * T::from_real(n_d);
    let residual = diff.norm() / g0.norm();
    let f_singular = state.f[0].clone().singular_values().max();
    Ok(SqueezedMode { f, xi0: n_d.sqrt().asinh(), residual, n_d, f_singular })
}

/// Serializable snapshot; floats round-trip exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub n_cut: usize,
    pub l_max: usize,
    pub mu: f64,
    pub a_s: f64,
    pub beta: Vec<[f64; 2]>,
    /// Per-`l` blocks in row-major order.
    #[serde(rename = "G")]
    pub g: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<[f64; 2]>>,
}

impl StateSnapshot {
    pub fn from_state<T: Scalar>(state: &GaussianState<T>, a_s: f64) -> Self {
        let c = |z: &T| [z.real(), z.imaginary()];
        let rows = |m: &DMatrix<T>| -> Vec<[f64; 2]> {
            (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| c(&m[(i, j)])).collect()
        };
        Self {
            n_cut: state.spec.n_cut,
            l_max: state.spec.l_max,
            mu: state.mu,
            a_s,
            beta: state.beta.iter().map(c).collect(),
            g: state.g.iter().map(rows).collect(),
            f: state.f.iter().map(rows).collect(),
        }
    }

    pub fn to_state(&self) -> Result<GaussianState<Complex64>> {
        let spec = BasisSpec::new(self.n_cut, self.l_max)?;
        let nb = spec.nb();
        let z = |v: &[f64; 2]| Complex64::new(v[0], v[1]);
        let block = |v: &Vec<[f64; 2]>| -> Result<DMatrix<Complex64>> {
            if v.len() != nb * nb {
                return Err(GbecError::Format("snapshot block has wrong size".into()));
            }
            Ok(DMatrix::from_row_iterator(nb, nb, v.iter().map(z)))
        };
        if self.beta.len() != nb || self.g.len() != spec.n_l() || self.f.len() != spec.n_l() {
            return Err(GbecError::Format("snapshot dimensions inconsistent".into()));
        }
        Ok(GaussianState {
            spec,
            beta: DVector::from_iterator(nb, self.beta.iter().map(z)),
            g: self.g.iter().map(block).collect::<Result<_>>()?,
            f: self.f.iter().map(block).collect::<Result<_>>()?,
            mu: self.mu,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
