//! Seeded test matrices.
//!
//! All randomness comes from `ChaCha8Rng` seeded with `seed_from_u64`, with
//! Gaussian entries drawn through `rand_distr::StandardNormal`. Both are
//! portable, so a seed gives the same matrix on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::householder::qr_unblocked;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaProfile {
    /// `sigma_i = kappa^(-i/(n-1))`
    #[default]
    Geometric,
    /// Evenly spaced from 1 down to `1/kappa`.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondSpec {
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
    #[serde(default)]
    pub profile: SigmaProfile,
}

impl CondSpec {
    pub fn new(m: usize, n: usize, kappa: f64, seed: u64) -> Self {
        CondSpec {
            m,
            n,
            kappa,
            seed,
            profile: SigmaProfile::Geometric,
        }
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.n;
        if n == 1 {
            return vec![1.0];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.profile {
                    SigmaProfile::Geometric => self.kappa.powf(-t),
                    SigmaProfile::Linear => 1.0 - (1.0 - 1.0 / self.kappa) * t,
                }
            })
            .collect()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `m x n` matrix of independent standard normal entries.
pub fn gaussian_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..m * n).map(|_| StandardNormal.sample(rng)).collect();
    Matrix::from_col_major(m, n, data).expect("length matches")
}

/// Gaussian matrix from a bare seed.
pub fn random_matrix(m: usize, n: usize, seed: u64) -> Matrix {
    gaussian_matrix(m, n, &mut rng(seed))
}

/// `U diag(sigma) Vᵀ` with `U`, `V` the orthogonal factors of seeded
/// Gaussian matrices and `sigma_1 / sigma_n = kappa`.
pub fn gen_cond_matrix(spec: &CondSpec) -> Result<Matrix> {
    let CondSpec { m, n, kappa, .. } = *spec;
    if n == 0 || n > m {
        return Err(Error::dim(format!(
            "conditioned matrix needs m >= n >= 1, got {m}x{n}"
        )));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::Parse(format!(
            "kappa must be finite and >= 1, got {kappa}"
        )));
    }
    let mut rng = rng(spec.seed);
    let u = qr_unblocked(&gaussian_matrix(m, n, &mut rng))?
        .factor
        .explicit_q(true);
    let v = qr_unblocked(&gaussian_matrix(n, n, &mut rng))?
        .factor
        .explicit_q(true);
    let sigma = spec.singular_values();
    let mut us = u;
    for (j, s) in sigma.iter().enumerate() {
        us.col_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    us.matmul(&v.transpose())
}
