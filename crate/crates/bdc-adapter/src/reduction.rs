//! Dimension reduction applied to feature maps before the polynomial-cost
//! centered-distance computation.
//!
//! The projection is a fixed linear map on observation columns — the moral
//! equivalent of a 1x1 convolution with frozen weights — so the whole
//! representation path stays training-free and the only learned parameters
//! in the crate remain the reasoning head. Two kinds are supported:
//!
//! - `RandomOrthogonal`: orthonormal rows from a seeded Gaussian draw.
//!   With `out_dim == in_dim` this is a rotation and preserves all pairwise
//!   column distances exactly (up to round-off).
//! - `Pca`: top principal directions of mean-centered fit data, via a
//!   cyclic Jacobi eigensolver on the covariance matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, l2_norm, seeded_rng, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionKind {
    RandomOrthogonal,
    Pca,
}

/// Immutable linear map from `in_dim`-dimensional observation columns to
/// `out_dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    kind: ProjectionKind,
    in_dim: usize,
    out_dim: usize,
    seed: u64,
    weights: Matrix,
}

impl Projection {
    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `out_dim x in_dim` weight matrix.
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Rebuild a projection from serialized parts (checkpoint loading).
    pub fn from_parts(
        kind: ProjectionKind,
        in_dim: usize,
        out_dim: usize,
        seed: u64,
        weights: Matrix,
    ) -> Result<Self> {
        if weights.shape() != (out_dim, in_dim) || out_dim > in_dim {
            return Err(Error::BadProjectionDims { out_dim, in_dim });
        }
        Ok(Projection {
            kind,
            in_dim,
            out_dim,
            seed,
            weights,
        })
    }

    /// Apply the projection column-wise: `W . obs`.
    pub fn apply(&self, obs: &Matrix) -> Result<Matrix> {
        if obs.rows() != self.in_dim {
            return Err(Error::DimMismatch {
                op: "project",
                lhs: format!("in_dim {}", self.in_dim),
                rhs: format!("{} rows", obs.rows()),
            });
        }
        self.weights.matmul(obs)
    }
}

/// Fit a projection. `fit_data` (rows are samples) is required for the PCA
/// kind and ignored otherwise.
pub fn fit_projection(
    kind: ProjectionKind,
    in_dim: usize,
    out_dim: usize,
    fit_data: Option<&Matrix>,
    seed: u64,
) -> Result<Projection> {
    if out_dim > in_dim || out_dim == 0 {
        return Err(Error::BadProjectionDims { out_dim, in_dim });
    }
    let weights = match kind {
        ProjectionKind::RandomOrthogonal => random_orthogonal_rows(out_dim, in_dim, seed),
        ProjectionKind::Pca => {
            let data = fit_data.ok_or(Error::MissingFitData)?;
            if data.cols() != in_dim {
                return Err(Error::DimMismatch {
                    op: "fit_projection",
                    lhs: format!("in_dim {}", in_dim),
                    rhs: format!("{} cols", data.cols()),
                });
            }
            if data.rows() < out_dim {
                return Err(Error::InsufficientFitData {
                    need: out_dim,
                    got: data.rows(),
                });
            }
            pca_rows(data, out_dim)?
        }
    };
    Ok(Projection {
        kind,
        in_dim,
        out_dim,
        seed,
        weights,
    })
}

/// Convenience wrapper matching the operation name used elsewhere.
pub fn project(p: &Projection, obs: &Matrix) -> Result<Matrix> {
    p.apply(obs)
}

fn random_orthogonal_rows(out_dim: usize, in_dim: usize, seed: u64) -> Matrix {
    let mut rng = seeded_rng(seed);
    let mut w = gaussian_matrix(out_dim, in_dim, &mut rng);
    // Modified Gram-Schmidt with one re-orthogonalization pass.
    for i in 0..out_dim {
        loop {
            for _pass in 0..2 {
                for j in 0..i {
                    let proj: f64 = (0..in_dim).map(|c| w.get(i, c) * w.get(j, c)).sum();
                    for c in 0..in_dim {
                        let v = w.get(i, c) - proj * w.get(j, c);
                        w.set(i, c, v);
                    }
                }
            }
            let norm = l2_norm(w.row(i));
            if norm > 1e-12 {
                for c in 0..in_dim {
                    w.set(i, c, w.get(i, c) / norm);
                }
                break;
            }
            // Degenerate draw; replace the row and retry.
            let fresh = gaussian_matrix(1, in_dim, &mut rng);
            for c in 0..in_dim {
                w.set(i, c, fresh.get(0, c));
            }
        }
    }
    w
}

fn pca_rows(data: &Matrix, out_dim: usize) -> Result<Matrix> {
    let n = data.rows();
    let d = data.cols();
    let mut means = vec![0.0; d];
    for r in 0..n {
        for (c, m) in means.iter_mut().enumerate() {
            *m += data.get(r, c);
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let mut cov = Matrix::zeros(d, d);
    for r in 0..n {
        for i in 0..d {
            let xi = data.get(r, i) - means[i];
            for j in i..d {
                let xj = data.get(r, j) - means[j];
                let v = cov.get(i, j) + xi * xj / denom;
                cov.set(i, j, v);
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov.set(i, j, cov.get(j, i));
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigh(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut w = Matrix::zeros(out_dim, d);
    for (row, &idx) in order.iter().take(out_dim).enumerate() {
        let mut v: Vec<f64> = (0..d).map(|r| eigenvectors.get(r, idx)).collect();
        // Deterministic sign: largest-magnitude component positive.
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        for (c, x) in v.iter().enumerate() {
            w.set(row, c, *x);
        }
    }
    Ok(w)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and a matrix whose columns are the matching eigenvectors.
fn jacobi_eigh(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let tol = 1e-14 * a.frobenius_norm().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| m.get(i, i)).collect();
    (eigenvalues, v)
}
