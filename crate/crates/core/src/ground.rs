//! Imaginary-time relaxation to the variational ground state at fixed particle
//! number, and the Bogoliubov basis of the converged mean-field Hamiltonian.
//!
//! Ground states are taken real. For real `G`, `F` and real blocks the Nambu
//! matrices are block circulant, so the flow of `Γ^l` splits into the flows
//! of `X = I + 2G + 2F` and `Y = I + 2G - 2F`:
//!
//! `∂_τ X = K - X P X`, `∂_τ Y = P - Y K Y`, with `P = ℰ + Δ`, `K = ℰ - Δ`.

use crate::basis::BasisSpec;
use crate::error::{domain, GbecError, Result};
use crate::gstate::{build_mean_field, width, GaussianState, Interaction, MeanFieldBlocks};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How the flow is started.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// All particles coherent in `φ_000`.
    Coherent,
    /// All particles in a squeezed vacuum of `φ_000`.
    Squeezed,
    /// Squeezed vacuum in a randomly perturbed `l = 0` mode.
    VacuumNoise,
    /// Coherent and squeezed seeds in parallel; the lower energy wins.
    Auto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Initial imaginary-time step.
    pub dtau: f64,
    /// Largest step the adaptive rule may reach; `None` picks it from the basis.
    pub dtau_max: Option<f64>,
    /// Stationarity tolerance on `‖η‖`, scaled by `max(1, √N)`.
    pub tol_eta: f64,
    /// Tolerance on the relative covariance residual.
    pub tol_gamma: f64,
    pub max_steps: usize,
    pub target_n: f64,
    /// Relative tolerance on `N`.
    pub mu_tol: f64,
    pub seed_mode: SeedMode,
    /// RNG seed for [`SeedMode::VacuumNoise`].
    pub seed: u64,
    /// Relaxation rate of `N` toward its target.
    pub kappa: f64,
    /// Damp stiff high-energy components so that larger steps stay stable
    /// (applied while the coherent part holds most particles).
    pub precondition: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dtau: 1e-3,
            dtau_max: None,
            tol_eta: 1e-8,
            tol_gamma: 1e-9,
            max_steps: 1_000_000,
            target_n: 1000.0,
            mu_tol: 1e-8,
            seed_mode: SeedMode::Auto,
            seed: 42,
            kappa: 1.0,
            precondition: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.dtau) {
            return domain(format!("dtau must be positive, got {}", self.dtau));
        }
        if let Some(m) = self.dtau_max {
            if !pos(m) {
                return domain(format!("dtau_max must be positive, got {m}"));
            }
        }
        if !pos(self.tol_eta) || !pos(self.tol_gamma) || !pos(self.mu_tol) {
            return domain("tolerances must be positive");
        }
        if !pos(self.target_n) {
            return domain(format!("target N must be positive, got {}", self.target_n));
        }
        if !pos(self.kappa) {
            return domain("kappa must be positive");
        }
        if self.max_steps == 0 {
            return domain("max_steps must be at least one");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "CSC")]
    Csc,
    #[serde(rename = "SSC")]
    Ssc,
    #[serde(rename = "mixed")]
    Mixed,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Csc => "CSC",
            Phase::Ssc => "SSC",
            Phase::Mixed => "mixed",
        })
    }
}

/// Classify by condensate fraction: above 0.99 coherent, below 0.01 squeezed.
pub fn detect_phase<T: crate::gstate::Scalar>(state: &GaussianState<T>) -> Phase {
    let (nc, nd) = state.particle_numbers();
    let frac = if nc + nd > 0.0 { nc / (nc + nd) } else { 1.0 };
    if frac > 0.99 {
        Phase::Csc
    } else if frac < 0.01 {
        Phase::Ssc
    } else {
        Phase::Mixed
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub steps: usize,
    pub final_eta_norm: f64,
    /// `‖Σ^z𝓗Σ^z - Γ𝓗Γ‖_F` summed over blocks.
    pub final_gamma_residual: f64,
    /// The same residual divided by `‖Σ^z𝓗Σ^z‖_F + ‖Γ𝓗Γ‖_F`.
    pub relative_gamma_residual: f64,
    pub mu: f64,
    #[serde(rename = "N")]
    pub n: f64,
    /// Energy `E` (not `E - μN`).
    #[serde(rename = "E")]
    pub e: f64,
    pub phase: Phase,
    pub collapsed: bool,
    pub converged: bool,
    pub seed_mode: SeedMode,
    pub final_dtau: f64,
    /// The coherent branch of [`SeedMode::Auto`] was stopped after losing its
    /// coherent part; the squeezed branch covers that basin.
    #[serde(default)]
    pub abandoned: bool,
}

/// Chemical-potential-free rates; the full rate is `r0 - μ r1` piecewise.
struct Rates {
    mf: MeanFieldBlocks<f64>,
    db0: DVector<f64>,
    db1: DVector<f64>,
    dx0: Vec<DMatrix<f64>>,
    dy0: Vec<DMatrix<f64>>,
    /// `I - X²` and `I - Y²`, the coefficients of `-μ`.
    dx1: Vec<DMatrix<f64>>,
    dy1: Vec<DMatrix<f64>>,
    /// Norms of `K` and `X P X` (and their `Y` partners) at `μ = 0`, used for scale.
    x: Vec<DMatrix<f64>>,
    y: Vec<DMatrix<f64>>,
    p: Vec<DMatrix<f64>>,
    k: Vec<DMatrix<f64>>,
}

fn xy(state: &GaussianState<f64>, l: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let nb = state.spec.nb();
    let i = DMatrix::<f64>::identity(nb, nb);
    let g2 = &state.g[l] * 2.0;
    let f2 = &state.f[l] * 2.0;
    (&i + &g2 + &f2, &i + &g2 - &f2)
}

fn rates(state: &GaussianState<f64>, inter: &dyn Interaction) -> Result<Rates> {
    let mut s0 = state.clone();
    s0.mu = 0.0;
    let mf = build_mean_field(&s0, inter)?;
    let nb = state.spec.nb();
    let i = DMatrix::<f64>::identity(nb, nb);
    let mut r = Rates {
        db0: DVector::zeros(nb),
        db1: DVector::zeros(nb),
        dx0: vec![],
        dy0: vec![],
        dx1: vec![],
        dy1: vec![],
        x: vec![],
        y: vec![],
        p: vec![],
        k: vec![],
        mf,
    };
    for l in 0..state.spec.n_l() {
        let (x, y) = xy(state, l);
        let p = &r.mf.e_blocks[l] + &r.mf.delta_blocks[l];
        let k = &r.mf.e_blocks[l] - &r.mf.delta_blocks[l];
        r.dx0.push(&k - &x * &p * &x);
        r.dy0.push(&p - &y * &k * &y);
        r.dx1.push(&i - &x * &x);
        r.dy1.push(&i - &y * &y);
        if l == 0 {
            r.db0 = -(&x * &r.mf.eta);
            r.db1 = -(&x * &state.beta);
        }
        r.x.push(x);
        r.y.push(y);
        r.p.push(p);
        r.k.push(k);
    }
    Ok(r)
}

struct Evaluated {
    db: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    dy: Vec<DMatrix<f64>>,
    eta_norm: f64,
    gamma_abs: f64,
    gamma_rel: f64,
}

fn evaluate(r: &Rates, state: &GaussianState<f64>, mu: f64) -> Evaluated {
    let db = &r.db0 - &r.db1 * mu;
    let dx: Vec<DMatrix<f64>> = r.dx0.iter().zip(&r.dx1).map(|(a, b)| a - b * mu).collect();
    let dy: Vec<DMatrix<f64>> = r.dy0.iter().zip(&r.dy1).map(|(a, b)| a - b * mu).collect();
    let eta = &r.mf.eta - &state.beta * mu;
    let mut abs2 = 0.0;
    let mut lin2 = 0.0;
    let mut quad2 = 0.0;
    let nb = state.spec.nb();
    let i = DMatrix::<f64>::identity(nb, nb);
    for l in 0..dx.len() {
        abs2 += dx[l].norm_squared() + dy[l].norm_squared();
        let pm = &r.p[l] - &i * mu;
        let km = &r.k[l] - &i * mu;
        lin2 += pm.norm_squared() + km.norm_squared();
        quad2 += (&r.x[l] * &pm * &r.x[l]).norm_squared() + (&r.y[l] * &km * &r.y[l]).norm_squared();
    }
    // The Nambu residual has the X and Y parts as its two diagonal blocks
    // after an orthogonal change of basis, so the norms carry over.
    let gamma_abs = abs2.sqrt();
    let scale = lin2.sqrt() + quad2.sqrt();
    Evaluated {
        db,
        dx,
        dy,
        eta_norm: eta.norm(),
        gamma_abs,
        gamma_rel: if scale > 0.0 { gamma_abs / scale } else { 0.0 },
    }
}

/// Damp the stiff high-`n` components: entry `(i, j)` of block `l` is divided
/// by `1 + dt (c_i + c_j)` with `c_n = 2n + l`, and `β_n` by `1 + dt c_n`.
/// Fixed points are unchanged; the low modes that limit convergence are not.
fn precondition(ev: &mut Evaluated, dt: f64) {
    let c = |n: usize, l: usize| (2 * n + l) as f64;
    for n in 0..ev.db.len() {
        ev.db[n] /= 1.0 + dt * c(n, 0);
    }
    for l in 0..ev.dx.len() {
        let nb = ev.dx[l].nrows();
        for i in 0..nb {
            for j in 0..nb {
                let f = 1.0 / (1.0 + dt * (c(i, l) + c(j, l)));
                ev.dx[l][(i, j)] *= f;
                ev.dy[l][(i, j)] *= f;
            }
        }
    }
}

/// `(1 - μ) e0 + μ e1`: the rates are affine in `μ`.
fn combine(e0: &Evaluated, e1: &Evaluated, mu: f64) -> Evaluated {
    let mix = |a: &DMatrix<f64>, b: &DMatrix<f64>| a * (1.0 - mu) + b * mu;
    Evaluated {
        db: &e0.db * (1.0 - mu) + &e1.db * mu,
        dx: e0.dx.iter().zip(&e1.dx).map(|(a, b)| mix(a, b)).collect(),
        dy: e0.dy.iter().zip(&e1.dy).map(|(a, b)| mix(a, b)).collect(),
        eta_norm: f64::NAN,
        gamma_abs: f64::NAN,
        gamma_rel: f64::NAN,
    }
}

fn dn_rate(state: &GaussianState<f64>, db: &DVector<f64>, dx: &[DMatrix<f64>], dy: &[DMatrix<f64>]) -> f64 {
    let mut d = 2.0 * state.beta.dot(db);
    for l in 0..dx.len() {
        d += (2 * l + 1) as f64 * 0.25 * (dx[l].trace() + dy[l].trace());
    }
    d
}

fn advance(state: &GaussianState<f64>, ev: &Evaluated, dt: f64) -> GaussianState<f64> {
    let mut out = state.clone();
    out.beta += &ev.db * dt;
    for l in 0..state.spec.n_l() {
        let dg = (&ev.dx[l] + &ev.dy[l]) * (0.25 * dt);
        let df = (&ev.dx[l] - &ev.dy[l]) * (0.25 * dt);
        out.g[l] += dg;
        out.f[l] += df;
    }
    out.symmetrize();
    purify(&mut out);
    out
}

fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let q = &eig.eigenvectors;
    Some(q * DMatrix::from_diagonal(&eig.eigenvalues.map(f)) * q.transpose())
}

/// Restore `XY = I` (a pure state) when Euler drift exceeds `1e-13`, using
/// the geometric mean `X' = X # Y^{-1}`. The exact flow preserves purity;
/// without this the drift lets `Y` become singular at bounded `G`.
fn purify(state: &mut GaussianState<f64>) {
    let nb = state.spec.nb();
    let i = DMatrix::<f64>::identity(nb, nb);
    for l in 0..state.spec.n_l() {
        let (x, y) = xy(state, l);
        let drift = (&x * &y - &i).norm();
        if drift <= 1e-13 * (1.0 + x.norm() * y.norm()) {
            continue;
        }
        let Some(xh) = sym_fn(&x, f64::sqrt) else { continue };
        let z = &xh * &y * &xh;
        let z = (&z + z.transpose()) * 0.5;
        let Some(zi) = sym_fn(&z, |v| 1.0 / v.sqrt()) else { continue };
        let xp = &xh * zi * &xh;
        let Some(xpi) = xp.clone().try_inverse() else { continue };
        let xp = (&xp + xp.transpose()) * 0.5;
        let yp = (&xpi + xpi.transpose()) * 0.5;
        state.g[l] = (&xp + &yp - &i * 2.0) * 0.25;
        state.f[l] = (&xp - &yp) * 0.25;
    }
}

/// `X` and `Y` must stay positive definite for `Γ` to be a covariance.
fn positive(state: &GaussianState<f64>) -> bool {
    (0..state.spec.n_l()).all(|l| {
        let (x, y) = xy(state, l);
        x.cholesky().is_some() && y.cholesky().is_some()
    })
}

fn finite(state: &GaussianState<f64>) -> bool {
    state.beta.iter().chain(state.g.iter().flat_map(|m| m.iter())).chain(state.f.iter().flat_map(|m| m.iter())).all(|x| x.is_finite())
}

/// One explicit Euler step of the imaginary-time equations at the state's own
/// chemical potential, followed by re-symmetrization.
pub fn imaginary_step(state: &GaussianState<f64>, inter: &dyn Interaction, dtau: f64) -> Result<GaussianState<f64>> {
    if !(dtau > 0.0 && dtau.is_finite()) {
        return domain(format!("dtau must be positive, got {dtau}"));
    }
    let r = rates(state, inter)?;
    let ev = evaluate(&r, state, state.mu);
    let out = advance(state, &ev, dtau);
    if !finite(&out) {
        return Err(GbecError::Divergence { step: 1, msg: "non-finite state after imaginary-time step".into() });
    }
    Ok(out)
}

/// Per-particle width below which the flow is declared collapsing.
pub const COLLAPSE_WIDTH: f64 = 0.6 * 1.224_744_871_391_589;

/// Default step cap when the stiff components are preconditioned.
pub const PRECONDITIONED_DTAU_MAX: f64 = 0.5;

/// Step bound from the largest single-particle energy in the basis.
pub fn default_dtau_max(spec: &BasisSpec) -> f64 {
    let emax = 2.0 * spec.n_cut as f64 + spec.l_max as f64 + 1.5;
    (1.0 / (2.0 * emax)).min(0.05)
}

/// Seed state for a given mode.
pub fn seed_state(spec: BasisSpec, n: f64, mode: SeedMode, seed: u64) -> GaussianState<f64> {
    match mode {
        SeedMode::Coherent | SeedMode::Auto => GaussianState::coherent(spec, n),
        SeedMode::Squeezed => {
            let mut e0 = DVector::zeros(spec.nb());
            e0[0] = 1.0;
            GaussianState::squeezed(spec, n, &e0).expect("unit mode")
        }
        SeedMode::VacuumNoise => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = DVector::from_fn(spec.nb(), |_, _| 0.1 * rng.gen_range(-1.0..1.0));
            m[0] += 1.0;
            GaussianState::squeezed(spec, n, &m).expect("non-zero mode")
        }
    }
}

/// Relax one seed at fixed target `N`.
///
/// The chemical potential is chosen every step so that `dN/dτ = -κ(N - N_t)`;
/// `N` is affine in `μ` along the flow, which makes this a closed formula.
/// The step grows 1.1× after 50 accepted steps and is halved (and the step
/// undone) whenever `E - μN` rises.
pub fn relax(
    seed_state: GaussianState<f64>,
    config: &SolverConfig,
    inter: &dyn Interaction,
    seed_mode: SeedMode,
) -> Result<(GaussianState<f64>, ConvergenceReport)> {
    relax_inner(seed_state, config, inter, seed_mode, false)
}

fn relax_inner(
    seed_state: GaussianState<f64>,
    config: &SolverConfig,
    inter: &dyn Interaction,
    seed_mode: SeedMode,
    stop_if_incoherent: bool,
) -> Result<(GaussianState<f64>, ConvergenceReport)> {
    config.validate()?;
    let spec = seed_state.spec;
    let dt_max = config.dtau_max.unwrap_or_else(|| {
        if config.precondition {
            PRECONDITIONED_DTAU_MAX
        } else {
            default_dtau_max(&spec)
        }
    });
    let nt = config.target_n;
    let eta_tol = config.tol_eta * nt.sqrt().max(1.0);
    let mut dt = config.dtau.min(dt_max);
    let mut state = seed_state;
    let mut prev: Option<(GaussianState<f64>, f64, f64)> = None; // state, E, N
    let mut last_mu = f64::NAN;
    let mut good = 0usize;
    let mut collapsed = false;
    let mut converged = false;
    let mut abandoned = false;
    let mut steps = 0usize;
    let mut last = (f64::NAN, f64::NAN, f64::NAN);

    while steps < config.max_steps {
        let r = match rates(&state, inter) {
            Ok(r) if r.mf.energy.is_finite() => r,
            _ => {
                collapsed = true;
                break;
            }
        };
        let n_now = state.total_number();
        if let Some((ps, pe, pn)) = &prev {
            let omega_new = r.mf.energy - last_mu * n_now;
            let omega_old = pe - last_mu * pn;
            if omega_new > omega_old + 1e-11 * omega_old.abs().max(1.0) || !omega_new.is_finite() {
                state = ps.clone();
                prev = None;
                dt *= 0.5;
                good = 0;
                if dt < 1e-12 {
                    collapsed = true;
                    break;
                }
                continue;
            }
        }
        let mut e0 = evaluate(&r, &state, 0.0);
        let mut e1 = evaluate(&r, &state, 1.0);
        // Only coherent-dominated states: with a macroscopically squeezed mode
        // the scaled step leaves the pure-state manifold and stalls the flow.
        if config.precondition && state.beta.norm_squared() > 0.5 * n_now {
            precondition(&mut e0, dt);
            precondition(&mut e1, dt);
        }
        let d0 = dn_rate(&state, &e0.db, &e0.dx, &e0.dy);
        let d1 = dn_rate(&state, &e1.db, &e1.dx, &e1.dy);
        let target = -config.kappa * (n_now - nt);
        let mu = if (d1 - d0).abs() > 0.0 { (target - d0) / (d1 - d0) } else { last_mu.max(0.0) };
        let ev = evaluate(&r, &state, mu);
        let step = combine(&e0, &e1, mu);
        state.mu = mu;
        last = (ev.eta_norm, ev.gamma_abs, ev.gamma_rel);
        if ev.gamma_rel < config.tol_gamma && ev.eta_norm < eta_tol && ((n_now - nt) / nt).abs() < config.mu_tol {
            converged = true;
            break;
        }
        if stop_if_incoherent && state.beta.norm_squared() < 0.01 * n_now {
            abandoned = true;
            break;
        }
        let w = width(&state, true).unwrap_or(f64::NAN);
        if !w.is_finite() || w < COLLAPSE_WIDTH {
            collapsed = true;
            break;
        }
        prev = Some((state.clone(), r.mf.energy, n_now));
        last_mu = mu;
        let next = advance(&state, &step, dt);
        steps += 1;
        // E - μN is unbounded below in N for attraction, so an overshoot in N
        // can look like descent; reject steps that move N away from target.
        let dn_next = (next.total_number() - nt).abs();
        if !finite(&next) || dn_next > (n_now - nt).abs() + 1e-3 * nt || !positive(&next) {
            if let Some((ps, _, _)) = prev.take() {
                state = ps;
            }
            dt *= 0.5;
            good = 0;
            if dt < 1e-12 {
                collapsed = true;
                break;
            }
            continue;
        }
        state = next;
        good += 1;
        if good >= 50 {
            dt = (dt * 1.1).min(dt_max);
            good = 0;
        }
    }

    let e = if collapsed {
        f64::NEG_INFINITY
    } else {
        let mut s0 = state.clone();
        s0.mu = 0.0;
        build_mean_field(&s0, inter)?.energy
    };
    let report = ConvergenceReport {
        steps,
        final_eta_norm: last.0,
        final_gamma_residual: last.1,
        relative_gamma_residual: last.2,
        mu: state.mu,
        n: state.total_number(),
        e,
        phase: detect_phase(&state),
        collapsed,
        converged: converged && !collapsed,
        seed_mode,
        final_dtau: dt,
        abandoned,
    };
    Ok((state, report))
}

/// Ground state at `config.target_n`.
///
/// With [`SeedMode::Auto`] a squeezed and a coherent seed are relaxed. The
/// coherent branch stops once its coherent fraction drops below 1%, since
/// it has then entered the basin of the squeezed seed. The squeezed result is
/// taken when it is lower by more than `1e-10|E|` or the coherent branch was
/// stopped; if either branch collapses the energy is unbounded below and the
/// collapsing branch is returned.
pub fn solve_ground(config: &SolverConfig, inter: &dyn Interaction) -> Result<(GaussianState<f64>, ConvergenceReport)> {
    config.validate()?;
    let spec = inter.spec();
    let n = config.target_n;
    match config.seed_mode {
        SeedMode::Auto => {
            let (a, b) = rayon::join(
                || {
                    let seed = seed_state(spec, n, SeedMode::Coherent, config.seed);
                    relax_inner(seed, config, inter, SeedMode::Coherent, true)
                },
                || relax(seed_state(spec, n, SeedMode::Squeezed, config.seed), config, inter, SeedMode::Squeezed),
            );
            let (coh, sq) = (a?, b?);
            if coh.1.collapsed {
                return Ok(coh);
            }
            if sq.1.collapsed {
                return Ok(sq);
            }
            if coh.1.abandoned || sq.1.e < coh.1.e - 1e-10 * coh.1.e.abs() {
                Ok(sq)
            } else {
                Ok(coh)
            }
        }
        mode => relax(seed_state(spec, n, mode, config.seed), config, inter, mode),
    }
}

/// Per-`l` Bogoliubov transformation of the quadratic mean-field Hamiltonian.
#[derive(Clone, Debug)]
pub struct BogoliubovBasis {
    pub u: Vec<DMatrix<f64>>,
    pub v: Vec<DMatrix<f64>>,
    /// Excitation energies `D_l(s)`, ascending.
    pub d: Vec<DVector<f64>>,
    /// `(l, s)` of modes with `D < 1e-8`; their normalization uses `D = 1e-8`.
    pub zero_modes: Vec<(usize, usize)>,
}

/// Threshold below which an excitation energy is treated as a zero mode.
pub const ZERO_MODE: f64 = 1e-8;

/// Square root of a positive semidefinite matrix; `None` if an eigenvalue is
/// clearly negative.
fn psd_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&x| x < -1e-12 * scale) {
        return None;
    }
    let q = &eig.eigenvectors;
    Some(q * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt())) * q.transpose())
}

/// Diagonalize `[[ℰ, Δ], [Δ, ℰ]]` symplectically, block by block.
///
/// With `P = ℰ + Δ` and `K = ℰ - Δ` both positive, the frequencies are the
/// singular values of `C = P^{1/2} K^{1/2}`. For `C y = ω z` the combinations
/// `u - v = P^{1/2} z / √ω` and `u + v = K^{1/2} y / √ω` satisfy
/// `uᵀu - vᵀv = 𝟙`. Working with `C` rather than `C Cᵀ` keeps soft modes
/// accurate when `P` is nearly singular, as in the squeezed phase.
pub fn symplectic_diagonalize(mf: &MeanFieldBlocks<f64>) -> Result<BogoliubovBasis> {
    let mut out = BogoliubovBasis { u: vec![], v: vec![], d: vec![], zero_modes: vec![] };
    for (l, (e, delta)) in mf.e_blocks.iter().zip(&mf.delta_blocks).enumerate() {
        let nb = e.nrows();
        if delta.norm() <= 1e-14 * e.norm().max(1.0) {
            let eig = SymmetricEigen::new(e.clone());
            let mut idx: Vec<usize> = (0..nb).collect();
            idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let d = DVector::from_iterator(nb, idx.iter().map(|&i| eig.eigenvalues[i]));
            if d.iter().any(|&x| x < -ZERO_MODE) {
                return Err(GbecError::Instability(format!("negative single-particle energy in block l={l}")));
            }
            for (s, &x) in d.iter().enumerate() {
                if x < ZERO_MODE {
                    out.zero_modes.push((l, s));
                }
            }
            out.u.push(DMatrix::from_fn(nb, nb, |i, j| eig.eigenvectors[(i, idx[j])]));
            out.v.push(DMatrix::zeros(nb, nb));
            out.d.push(d);
            continue;
        }
        let p = e + delta;
        let k = e - delta;
        let (Some(ph), Some(kh)) = (psd_sqrt(&p), psd_sqrt(&k)) else {
            return Err(GbecError::Instability(format!("mean-field Hamiltonian of block l={l} is not positive")));
        };
        let svd = (&ph * &kh).svd(true, true);
        let (zu, yv) = (svd.u.expect("requested"), svd.v_t.expect("requested").transpose());
        let mut idx: Vec<usize> = (0..nb).collect();
        idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let mut u = DMatrix::zeros(nb, nb);
        let mut v = DMatrix::zeros(nb, nb);
        let mut d = DVector::zeros(nb);
        for (s, &i) in idx.iter().enumerate() {
            let w = svd.singular_values[i];
            if w < ZERO_MODE {
                out.zero_modes.push((l, s));
            }
            let wr = w.max(ZERO_MODE).sqrt();
            let minus = &ph * zu.column(i) / wr;
            let plus = &kh * yv.column(i) / wr;
            u.set_column(s, &((&plus + &minus) * 0.5));
            v.set_column(s, &((&plus - &minus) * 0.5));
            d[s] = w;
        }
        out.u.push(u);
        out.v.push(v);
        out.d.push(d);
    }
    Ok(out)
}
