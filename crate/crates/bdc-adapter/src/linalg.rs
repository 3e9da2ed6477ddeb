//! Dense real-matrix foundation shared by every other module.
//!
//! Everything is 64-bit floating point and row-major. Row-major layout is
//! part of the on-disk contract: the feature-bank format serializes feature
//! maps exactly in this order.
//!
//! Randomness is always explicit: [`seeded_rng`] builds a ChaCha12 generator
//! from a 64-bit seed, and the same seed yields the same stream on every
//! platform. There is no global RNG state anywhere in the crate.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// The one RNG algorithm used across the crate (ChaCha12, seedable,
/// platform-stable stream).
pub type Rng = ChaCha12Rng;

/// Build the crate-wide deterministic generator from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed for a named role (episode sampling,
/// projection fit, training, ...) so one user-facing seed can drive several
/// decoupled streams. SplitMix64 finalizer over `seed ^ role`.
pub fn split_seed(seed: u64, role: u64) -> u64 {
    let mut z = seed ^ role.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Wrap a row-major buffer. Errors when the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch {
                op: "from_vec",
                lhs: format!("{}x{}", rows, cols),
                rhs: format!("len {}", data.len()),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimMismatch {
                    op: "from_rows",
                    lhs: format!("row len {}", c),
                    rhs: format!("row len {}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Matrix::from_vec(r, c, data)
    }

    /// Single-column matrix from a slice (n x 1).
    pub fn column_vector(v: &[f64]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transposed(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        self.map(|x| c * x)
    }

    /// Standard matrix product. Errors on an inner-dimension mismatch.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch {
                op: "matmul",
                lhs: format!("{}x{}", self.rows, self.cols),
                rhs: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Square root of the sum of squared entries.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Dot product. Lengths must agree.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Scale to unit Euclidean norm. Errors on a zero-norm input.
pub fn l2_normalize(v: &[f64]) -> Result<Vec<f64>> {
    let n = l2_norm(v);
    if n == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Cosine similarity. Errors when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let (na, nb) = (l2_norm(a), l2_norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(dot(a, b) / (na * nb))
}

/// Matrix with independent standard-normal entries drawn from `rng`.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    use rand_distr::{Distribution, StandardNormal};
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Matrix { rows, cols, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn matmul_identity() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let p = Matrix::identity(2).matmul(&a).unwrap();
        assert_eq!(p, a);
    }

    #[test]
    fn matmul_orthogonal_supports_is_zero() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let p = a.matmul(&b).unwrap();
        assert!(p.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = seeded_rng(11);
        let a = gaussian_matrix(3, 4, &mut rng);
        let b = gaussian_matrix(4, 2, &mut rng);
        let p = a.matmul(&b).unwrap();
        let mut expect = Matrix::zeros(3, 2);
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += a.get(i, k) * b.get(k, j);
                }
                expect.set(i, j, acc);
            }
        }
        assert!(max_abs_diff(&p, &expect) < 1e-12);
    }

    #[test]
    fn matmul_dim_mismatch_errors() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn l2_normalize_three_four_five() {
        let v = l2_normalize(&[3.0, 4.0]).unwrap();
        assert!((v[0] - 0.6).abs() < 1e-15);
        assert!((v[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn l2_normalize_unit_is_identity() {
        let v = l2_normalize(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn l2_normalize_zero_errors() {
        assert!(matches!(l2_normalize(&[0.0, 0.0]), Err(Error::ZeroNorm)));
    }

    #[test]
    fn frobenius_norm_cases() {
        assert_eq!(Matrix::zeros(3, 2).frobenius_norm(), 0.0);
        let d = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert!((d.frobenius_norm() - 5.0).abs() < 1e-15);

        let mut rng = seeded_rng(5);
        let a = gaussian_matrix(5, 5, &mut rng);
        let direct: f64 = a.data().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((a.frobenius_norm() - direct).abs() < 1e-12);
    }

    #[test]
    fn frobenius_equals_sqrt_trace_of_gram() {
        let mut rng = seeded_rng(17);
        for _ in 0..10 {
            let a = gaussian_matrix(4, 6, &mut rng);
            let gram = a.transposed().matmul(&a).unwrap();
            let trace: f64 = (0..gram.rows()).map(|i| gram.get(i, i)).sum();
            assert!((a.frobenius_norm() - trace.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn split_seed_distinct_roles() {
        assert_ne!(split_seed(7, 1), split_seed(7, 2));
        assert_eq!(split_seed(7, 1), split_seed(7, 1));
    }

    #[test]
    fn seeded_rng_is_reproducible() {
        use rand::Rng as _;
        let a: Vec<u64> = (0..4).map(|_| seeded_rng(42).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| seeded_rng(42).random()).collect();
        assert_eq!(a, b);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn dims() -> impl Strategy<Value = (usize, usize, usize, usize)> {
            (1usize..6, 1usize..6, 1usize..6, 1usize..6)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn matmul_associative((m, k, l, n) in dims(), seed in 0u64..1000) {
                let mut rng = seeded_rng(seed);
                let a = gaussian_matrix(m, k, &mut rng);
                let b = gaussian_matrix(k, l, &mut rng);
                let c = gaussian_matrix(l, n, &mut rng);
                let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
                let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
                let scale = left.frobenius_norm().max(1.0);
                prop_assert!(max_abs_diff(&left, &right) / scale < 1e-9);
            }

            #[test]
            fn normalize_idempotent(seed in 0u64..1000, dim in 1usize..8) {
                let mut rng = seeded_rng(seed);
                let v = gaussian_matrix(1, dim, &mut rng).data().to_vec();
                prop_assume!(l2_norm(&v) > 0.0);
                let once = l2_normalize(&v).unwrap();
                let twice = l2_normalize(&once).unwrap();
                for (a, b) in once.iter().zip(&twice) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
                prop_assert!((l2_norm(&once) - 1.0).abs() < 1e-12);
            }
        }
    }
}
