//! Frequency-frequency matrix, its SVD, and noise-subspace selection.
//!
//! The N = L^2 samples are folded row-major into an L x L matrix, so rows step
//! the frequency by L * delta_omega (coarse) and columns by delta_omega (fine):
//!
//! ```text
//! [ S_1       S_2       ...  S_L  ]
//! [ S_{L+1}   S_{L+2}   ...  S_2L ]
//! [ ...                           ]
//! ```
//!
//! Left singular vectors therefore live on the coarse frequencies and right
//! singular vectors on the fine ones.

mod svd;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::forward::SpectrumVector;
use crate::waveform::FrequencyGrid;

pub use svd::{svd_matrix, SvdResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubspaceError {
    #[error("spectrum length {got} is not L^2 = {expected}")]
    Length { expected: usize, got: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error(
        "SVD did not converge after {sweeps} sweeps \
         (largest relative off-diagonal {off_diagonal:.3e}, column-norm ratio {condition:.3e})"
    )]
    NonConvergence { sweeps: usize, off_diagonal: f64, condition: f64 },
    #[error("noise subspace is empty: P*K = {p_paths}*{k_targets} must be less than L = {l}")]
    EmptyNoiseSubspace { p_paths: usize, k_targets: usize, l: usize },
    #[error("energy threshold {0} must lie in (0, 1]")]
    InvalidThreshold(f64),
}

/// L x L frequency-frequency matrix, entry(i, j) = S_{iL+j+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct KffMatrix {
    pub entries: Array2<Complex64>,
    pub grid: FrequencyGrid,
}

impl KffMatrix {
    pub fn split(&self) -> usize {
        self.entries.nrows()
    }

    /// Rows concatenated back into S_1..S_N.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.entries.iter().copied().collect()
    }
}

pub fn build_kff(sv: &SpectrumVector) -> Result<KffMatrix, SubspaceError> {
    let l = sv.grid.split();
    if sv.values.len() != l * l {
        return Err(SubspaceError::Length { expected: l * l, got: sv.values.len() });
    }
    let entries = Array2::from_shape_vec((l, l), sv.values.clone())
        .expect("length checked against L^2");
    Ok(KffMatrix { entries, grid: sv.grid })
}

pub fn svd(k: &KffMatrix) -> Result<SvdResult, SubspaceError> {
    svd_matrix(&k.entries)
}

/// How many trailing singular vectors form the noise subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// The last L - P*K vectors.
    PathsTargets { p_paths: usize, k_targets: usize },
    /// Vectors whose sigma_i / sigma_1 falls below the threshold.
    EnergyThreshold(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSubspace {
    /// Left noise vectors u_{PK+1}..u_L as columns.
    pub left: Array2<Complex64>,
    /// Right noise vectors v_{PK+1}..v_L as columns.
    pub right: Array2<Complex64>,
    pub p_paths: usize,
    pub k_targets: usize,
}

impl NoiseSubspace {
    pub fn dim(&self) -> usize {
        self.left.ncols()
    }
}

pub fn noise_subspace(
    r: &SvdResult,
    p_paths: usize,
    k_targets: usize,
) -> Result<NoiseSubspace, SubspaceError> {
    let l = r.sigma.len();
    let signal = p_paths.saturating_mul(k_targets);
    if signal >= l {
        return Err(SubspaceError::EmptyNoiseSubspace { p_paths, k_targets, l });
    }
    Ok(trailing(r, signal, p_paths, k_targets))
}

pub fn select_noise_subspace(
    r: &SvdResult,
    selection: Selection,
) -> Result<NoiseSubspace, SubspaceError> {
    match selection {
        Selection::PathsTargets { p_paths, k_targets } => noise_subspace(r, p_paths, k_targets),
        Selection::EnergyThreshold(eps) => {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(SubspaceError::InvalidThreshold(eps));
            }
            let s1 = r.sigma.first().copied().unwrap_or(0.0);
            let signal = r.sigma.iter().take_while(|&&s| s1 > 0.0 && s / s1 >= eps).count();
            if signal >= r.sigma.len() {
                return Err(SubspaceError::EmptyNoiseSubspace {
                    p_paths: signal,
                    k_targets: 1,
                    l: r.sigma.len(),
                });
            }
            Ok(trailing(r, signal, signal, 1))
        }
    }
}

fn trailing(r: &SvdResult, signal: usize, p_paths: usize, k_targets: usize) -> NoiseSubspace {
    let l = r.sigma.len();
    NoiseSubspace {
        left: r.u.slice(ndarray::s![.., signal..l]).to_owned(),
        right: r.v.slice(ndarray::s![.., signal..l]).to_owned(),
        p_paths,
        k_targets,
    }
}

/// Fraction of sum(sigma^2) carried by the first `count` singular values.
pub fn energy_fraction(sigma: &[f64], count: usize) -> f64 {
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0.0;
    }
    sigma.iter().take(count).map(|s| s * s).sum::<f64>() / total
}
