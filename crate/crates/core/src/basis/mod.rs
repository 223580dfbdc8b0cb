//! Spherical oscillator eigenbasis, radial quadrature, interaction tensors and
//! angular-momentum coupling.

mod cache;
mod cg;
mod coupled;
mod quadrature;
mod radial;
mod tensor;

pub use cache::{read_tensor_cache, write_tensor_cache, CACHE_MAGIC, CACHE_VERSION};
pub use cg::{clebsch_gordan, ln_factorial};
pub use coupled::{coupled_element, pair_weight, CoupledTensor};
pub use quadrature::{gauss_laguerre, RadialQuadrature};
pub use radial::{
    laguerre, radial_eigenfunction, radial_norm_ln, reduced_radial, reduced_radial_all,
};
pub use tensor::{
    interaction_element, interaction_element4, interaction_element_detailed,
    interaction_element_quad, ElementValue, InteractionTensor, CANCELLATION_LIMIT,
};

use crate::error::{domain, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Truncation of the spherical oscillator basis `φ_nlm = R_nl(r) Y_lm`.
///
/// Both bounds are inclusive; each angular momentum block holds `n_cut + 1`
/// radial states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub n_cut: usize,
    pub l_max: usize,
}

impl BasisSpec {
    pub fn new(n_cut: usize, l_max: usize) -> Result<Self> {
        if n_cut < 1 {
            return domain(format!("n_cut must be at least 1, got {n_cut}"));
        }
        Ok(Self { n_cut, l_max })
    }

    /// Radial states per angular momentum block.
    pub fn nb(&self) -> usize {
        self.n_cut + 1
    }

    pub fn n_l(&self) -> usize {
        self.l_max + 1
    }

    /// Default quadrature order for four-function radial integrals.
    pub fn quadrature_order(&self) -> usize {
        4 * self.n_cut + 2 * self.l_max + 16
    }

    pub fn check(&self, n: usize, l: usize) -> Result<()> {
        if n > self.n_cut || l > self.l_max {
            return domain(format!(
                "quantum numbers (n={n}, l={l}) outside basis (n_cut={}, l_max={})",
                self.n_cut, self.l_max
            ));
        }
        Ok(())
    }

    /// `R_nl(r)` with range checking against this truncation.
    pub fn radial_eigenfunction(&self, n: usize, l: usize, r: f64) -> Result<f64> {
        self.check(n, l)?;
        radial_eigenfunction(n, l, r)
    }

    /// `ε_nl - μ` for every radial state of block `l`.
    pub fn energies(&self, l: usize, mu: f64) -> Vec<f64> {
        (0..self.nb()).map(|n| eigenenergy(n, l, mu)).collect()
    }

    /// Matrix of `r²` within block `l`; tridiagonal in `n`.
    pub fn r2_matrix(&self, l: usize) -> DMatrix<f64> {
        let nb = self.nb();
        let lf = l as f64;
        DMatrix::from_fn(nb, nb, |i, j| {
            let (a, b) = (i.min(j), i.max(j));
            if a == b {
                2.0 * a as f64 + lf + 1.5
            } else if b == a + 1 {
                -((b as f64) * (a as f64 + lf + 1.5)).sqrt()
            } else {
                0.0
            }
        })
    }
}

/// Oscillator eigenenergy `2n + l + 3/2 - μ`.
pub fn eigenenergy(n: usize, l: usize, mu: f64) -> f64 {
    2.0 * n as f64 + l as f64 + 1.5 - mu
}
