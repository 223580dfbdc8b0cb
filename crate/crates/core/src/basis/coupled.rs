use super::cg::clebsch_gordan;
use super::tensor::interaction_element4;
use super::BasisSpec;
use crate::error::Result;
use rayon::prelude::*;

/// Angular weight `C^{L0}_{l0 l'0} √((2l+1)(2l'+1)/(2L+1))`.
pub fn pair_weight(big_l: usize, l: usize, lp: usize) -> f64 {
    let c = clebsch_gordan(l as i64, 0, lp as i64, 0, big_l as i64, 0);
    c * (((2 * l + 1) * (2 * lp + 1)) as f64 / (2 * big_l + 1) as f64).sqrt()
}

/// CG-weighted element `M̄^{L; l l' l1 l1'}_{n n' n1 n1'}`.
///
/// Vanishes whenever either pair violates the parity rule `l + l' + L` even.
pub fn coupled_element(
    big_l: usize,
    l: [usize; 4],
    n: [usize; 4],
    a_s: f64,
) -> Result<f64> {
    let w1 = pair_weight(big_l, l[0], l[1]);
    let w2 = pair_weight(big_l, l[2], l[3]);
    if w1 == 0.0 || w2 == 0.0 || a_s == 0.0 {
        return Ok(0.0);
    }
    let m = interaction_element4(n, l, a_s)?.value;
    Ok(w1 * m * w2)
}

/// Dense `M̄` for one total angular momentum, over all parity-allowed
/// `(l, l')` pairs of a basis. Intended for small truncations.
#[derive(Clone, Debug)]
pub struct CoupledTensor {
    pub spec: BasisSpec,
    pub big_l: usize,
    /// Allowed ordered pairs `(l, l')`.
    pub channels: Vec<(usize, usize)>,
    data: Vec<f64>,
}

impl CoupledTensor {
    pub fn build(spec: BasisSpec, big_l: usize) -> Result<Self> {
        let channels: Vec<(usize, usize)> = (0..=spec.l_max)
            .flat_map(|l| (0..=spec.l_max).map(move |lp| (l, lp)))
            .filter(|&(l, lp)| pair_weight(big_l, l, lp) != 0.0)
            .collect();
        let nb = spec.nb();
        let nc = channels.len();
        let block = nb.pow(4);
        let data: Result<Vec<Vec<f64>>> = (0..nc * nc)
            .into_par_iter()
            .map(|ij| {
                let (a, b) = channels[ij / nc];
                let (c, d) = channels[ij % nc];
                let mut v = Vec::with_capacity(block);
                for n in 0..nb {
                    for np in 0..nb {
                        for n1 in 0..nb {
                            for n1p in 0..nb {
                                v.push(coupled_element(big_l, [a, b, c, d], [n, np, n1, n1p], 1.0)?);
                            }
                        }
                    }
                }
                Ok(v)
            })
            .collect();
        Ok(Self { spec, big_l, channels, data: data?.concat() })
    }

    fn channel(&self, l: usize, lp: usize) -> Option<usize> {
        self.channels.iter().position(|&c| c == (l, lp))
    }

    /// Entry at `a_s = 1`; zero for parity-forbidden channels.
    pub fn unit(&self, l: [usize; 4], n: [usize; 4]) -> f64 {
        let (Some(i), Some(j)) = (self.channel(l[0], l[1]), self.channel(l[2], l[3])) else {
            return 0.0;
        };
        let nb = self.spec.nb();
        let nc = self.channels.len();
        let off = (i * nc + j) * nb.pow(4);
        self.data[off + ((n[0] * nb + n[1]) * nb + n[2]) * nb + n[3]]
    }
}
