//! Brownian distance covariance core: Euclidean distance matrices,
//! double-centering, centered-distance (BDC) matrices, and the trace-form
//! dependence measure, together with a deliberately naive brute-force
//! oracle used to cross-check the fast path.
//!
//! Conventions:
//! - A feature map is a `k x m` [`Matrix`] whose `m` columns are observation
//!   vectors of dimension `k`.
//! - [`distance_matrix`] computes squared distances through the Gram-matrix
//!   expansion `|ti|^2 + |tj|^2 - 2 ti.tj`, clamps round-off negatives at
//!   zero, then takes the square root.
//! - Centering is `r = d - rowmean - colmean + grandmean`, so every row and
//!   column of a centered matrix sums to zero.
//! - [`bdc_measure`] is the plain trace form `tr(Rt' Rs)` with no `1/m^2`
//!   factor; [`dcov_oracle`] carries the classical `1/n^2`, so the two agree
//!   up to an exact factor of `n^2`.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Pairwise Euclidean distances between the columns of a feature map.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    entries: Matrix,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }
}

/// Double-centered distance matrix, optionally scaled to unit Frobenius
/// norm. The normalized form is what the classifier compares with cosine
/// similarity; the raw form is what the dependence measure consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct BdcMatrix {
    entries: Matrix,
    normalized: bool,
}

impl BdcMatrix {
    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    /// Row-major vectorization. The matrix is symmetric, so the orientation
    /// is immaterial for dot products between vectorized matrices.
    pub fn to_flat(&self) -> Vec<f64> {
        self.entries.data().to_vec()
    }
}

/// Euclidean distance matrix of the observation columns. Requires at least
/// two columns and finite entries.
pub fn distance_matrix(obs: &Matrix) -> Result<DistanceMatrix> {
    let m = obs.cols();
    if m < 2 {
        return Err(Error::TooFewObservations { min: 2, got: m });
    }
    if !obs.is_finite() {
        return Err(Error::NonFinite("distance_matrix input"));
    }
    let k = obs.rows();
    let mut sq_norms = vec![0.0; m];
    for j in 0..m {
        let mut acc = 0.0;
        for r in 0..k {
            let v = obs.get(r, j);
            acc += v * v;
        }
        sq_norms[j] = acc;
    }
    let mut d = Matrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let mut gram = 0.0;
            for r in 0..k {
                gram += obs.get(r, i) * obs.get(r, j);
            }
            // Gram expansion can go ~-1e-16 for coincident columns.
            let sq = (sq_norms[i] + sq_norms[j] - 2.0 * gram).max(0.0);
            let dist = sq.sqrt();
            d.set(i, j, dist);
            d.set(j, i, dist);
        }
    }
    Ok(DistanceMatrix { entries: d })
}

/// Subtract row and column means and add back the grand mean.
pub fn double_center(d: &DistanceMatrix) -> BdcMatrix {
    let m = d.size();
    let mf = m as f64;
    let mut row_means = vec![0.0; m];
    let mut col_means = vec![0.0; m];
    let mut grand = 0.0;
    for i in 0..m {
        for j in 0..m {
            let v = d.get(i, j);
            row_means[i] += v;
            col_means[j] += v;
            grand += v;
        }
    }
    for v in row_means.iter_mut().chain(col_means.iter_mut()) {
        *v /= mf;
    }
    grand /= mf * mf;

    let mut r = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            r.set(i, j, d.get(i, j) - row_means[i] - col_means[j] + grand);
        }
    }
    BdcMatrix {
        entries: r,
        normalized: false,
    }
}

/// Centered-distance matrix of a feature map: `double_center(distance_matrix(obs))`,
/// optionally scaled to unit Frobenius norm. Normalization fails when every
/// observation column coincides (the centered matrix is exactly zero).
pub fn bdc_matrix(obs: &Matrix, normalize: bool) -> Result<BdcMatrix> {
    let mut r = double_center(&distance_matrix(obs)?);
    if normalize {
        let norm = r.entries.frobenius_norm();
        if norm == 0.0 {
            return Err(Error::DegenerateBdc);
        }
        r.entries = r.entries.scaled(1.0 / norm);
        r.normalized = true;
    }
    Ok(r)
}

/// Trace-form dependence value `tr(Rt' Rs)` of two same-size, unnormalized
/// centered matrices; by symmetry this is the element-wise product sum.
pub fn bdc_measure(rt: &BdcMatrix, rs: &BdcMatrix) -> Result<f64> {
    if rt.size() != rs.size() {
        return Err(Error::DimMismatch {
            op: "bdc_measure",
            lhs: format!("{}", rt.size()),
            rhs: format!("{}", rs.size()),
        });
    }
    if rt.normalized || rs.normalized {
        return Err(Error::NormalizedMeasureInput);
    }
    Ok(rt
        .entries
        .data()
        .iter()
        .zip(rs.entries.data())
        .map(|(a, b)| a * b)
        .sum())
}

/// Brute-force squared sample distance covariance of two paired samples
/// (rows are the `n` samples). Built from explicit pairwise loops and
/// explicit mean subtraction, with no shared code with the fast path, and
/// scaled by `1/n^2`: `n^2 * dcov_oracle` equals [`bdc_measure`] of the
/// corresponding centered matrices.
pub fn dcov_oracle(x_samples: &Matrix, y_samples: &Matrix) -> Result<f64> {
    let n = x_samples.rows();
    if n != y_samples.rows() {
        return Err(Error::DimMismatch {
            op: "dcov_oracle",
            lhs: format!("{} samples", n),
            rhs: format!("{} samples", y_samples.rows()),
        });
    }
    if n < 2 {
        return Err(Error::TooFewObservations { min: 2, got: n });
    }
    let a = pairwise_distances(x_samples);
    let b = pairwise_distances(y_samples);
    let a_stats = CenteringStats::of(&a, n);
    let b_stats = CenteringStats::of(&b, n);
    let mut acc = 0.0;
    for k in 0..n {
        for l in 0..n {
            let ac = a[k * n + l] - a_stats.row[k] - a_stats.col[l] + a_stats.grand;
            let bc = b[k * n + l] - b_stats.row[k] - b_stats.col[l] + b_stats.grand;
            acc += ac * bc;
        }
    }
    Ok(acc / (n as f64 * n as f64))
}

/// Sample distance correlation `dcov / sqrt(dvar_x * dvar_y)` where dcov
/// and dvar are the Szekely square-root quantities; always in `[0, 1]` up
/// to round-off. Errors when either marginal sample is constant.
///
/// Same brute-force path as [`dcov_oracle`] (shared distance and centering
/// helpers, identical accumulation order), with each distance matrix built
/// once instead of per covariance term.
pub fn dcorr(x_samples: &Matrix, y_samples: &Matrix) -> Result<f64> {
    let n = x_samples.rows();
    if n != y_samples.rows() {
        return Err(Error::DimMismatch {
            op: "dcorr",
            lhs: format!("{} samples", n),
            rhs: format!("{} samples", y_samples.rows()),
        });
    }
    if n < 2 {
        return Err(Error::TooFewObservations { min: 2, got: n });
    }
    let a = pairwise_distances(x_samples);
    let b = pairwise_distances(y_samples);
    let a_stats = CenteringStats::of(&a, n);
    let b_stats = CenteringStats::of(&b, n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for k in 0..n {
        for l in 0..n {
            let ac = a[k * n + l] - a_stats.row[k] - a_stats.col[l] + a_stats.grand;
            let bc = b[k * n + l] - b_stats.row[k] - b_stats.col[l] + b_stats.grand;
            sxy += ac * bc;
            sxx += ac * ac;
            syy += bc * bc;
        }
    }
    let n2 = n as f64 * n as f64;
    let (vxy, vx, vy) = (sxy / n2, sxx / n2, syy / n2);
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::ZeroDistanceVariance);
    }
    // vxy is a V-statistic and is non-negative up to round-off; clamp
    // before the square root.
    Ok((vxy.max(0.0) / (vx * vy).sqrt()).sqrt())
}

/// Pearson correlation of two scalar samples. Errors on constant input.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimMismatch {
            op: "pearson",
            lhs: format!("{}", x.len()),
            rhs: format!("{}", y.len()),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroDistanceVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn pairwise_distances(samples: &Matrix) -> Vec<f64> {
    let n = samples.rows();
    let mut d = vec![0.0; n * n];
    for k in 0..n {
        for l in (k + 1)..n {
            let mut acc = 0.0;
            for (a, b) in samples.row(k).iter().zip(samples.row(l)) {
                acc += (a - b) * (a - b);
            }
            let dist = acc.sqrt();
            d[k * n + l] = dist;
            d[l * n + k] = dist;
        }
    }
    d
}

struct CenteringStats {
    row: Vec<f64>,
    col: Vec<f64>,
    grand: f64,
}

impl CenteringStats {
    fn of(d: &[f64], n: usize) -> Self {
        let nf = n as f64;
        let mut row = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut grand = 0.0;
        for k in 0..n {
            for l in 0..n {
                let v = d[k * n + l];
                row[k] += v;
                col[l] += v;
                grand += v;
            }
        }
        for v in row.iter_mut().chain(col.iter_mut()) {
            *v /= nf;
        }
        grand /= nf * nf;
        CenteringStats { row, col, grand }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, seeded_rng};
    use rand::Rng as _;

    #[test]
    fn distance_matrix_identical_columns() {
        let obs = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let d = distance_matrix(&obs).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(d.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn distance_matrix_three_four_five() {
        let obs = Matrix::from_rows(&[vec![0.0, 3.0], vec![0.0, 4.0]]).unwrap();
        let d = distance_matrix(&obs).unwrap();
        assert!((d.get(0, 1) - 5.0).abs() < 1e-12);
        assert!((d.get(1, 0) - 5.0).abs() < 1e-12);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn distance_matrix_matches_pairwise_loop_oracle() {
        let mut rng = seeded_rng(3);
        let obs = gaussian_matrix(6, 10, &mut rng);
        let d = distance_matrix(&obs).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let mut acc = 0.0;
                for r in 0..6 {
                    let diff = obs.get(r, i) - obs.get(r, j);
                    acc += diff * diff;
                }
                assert!((d.get(i, j) - acc.sqrt()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn distance_matrix_rejects_small_and_nonfinite() {
        let one = Matrix::zeros(3, 1);
        assert!(matches!(
            distance_matrix(&one),
            Err(Error::TooFewObservations { .. })
        ));
        let mut bad = Matrix::zeros(2, 2);
        bad.set(0, 0, f64::NAN);
        assert!(matches!(distance_matrix(&bad), Err(Error::NonFinite(_))));
    }

    #[test]
    fn double_center_two_point_case() {
        // D = [[0,5],[5,0]]: row/col means 2.5, grand mean 2.5.
        let obs = Matrix::from_rows(&[vec![0.0, 3.0], vec![0.0, 4.0]]).unwrap();
        let r = double_center(&distance_matrix(&obs).unwrap());
        assert!((r.get(0, 0) + 2.5).abs() < 1e-12);
        assert!((r.get(0, 1) - 2.5).abs() < 1e-12);
        assert!((r.get(1, 0) - 2.5).abs() < 1e-12);
        assert!((r.get(1, 1) + 2.5).abs() < 1e-12);
    }

    #[test]
    fn double_center_zero_matrix_stays_zero() {
        let obs = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let r = double_center(&distance_matrix(&obs).unwrap());
        assert!(r.entries().data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn double_center_rows_and_cols_sum_to_zero() {
        let mut rng = seeded_rng(8);
        let obs = gaussian_matrix(4, 8, &mut rng);
        let r = double_center(&distance_matrix(&obs).unwrap());
        let m = r.size();
        for i in 0..m {
            let row_sum: f64 = (0..m).map(|j| r.get(i, j)).sum();
            let col_sum: f64 = (0..m).map(|j| r.get(j, i)).sum();
            assert!(row_sum.abs() < 1e-9, "row {} sums to {}", i, row_sum);
            assert!(col_sum.abs() < 1e-9, "col {} sums to {}", i, col_sum);
        }
    }

    #[test]
    fn bdc_matrix_degenerate_cases() {
        let obs = Matrix::from_rows(&[vec![2.0, 2.0], vec![-1.0, -1.0]]).unwrap();
        let raw = bdc_matrix(&obs, false).unwrap();
        assert!(raw.entries().data().iter().all(|&x| x == 0.0));
        assert!(matches!(bdc_matrix(&obs, true), Err(Error::DegenerateBdc)));
    }

    #[test]
    fn bdc_matrix_normalized_two_point_case() {
        // Unnormalized matrix is +-2.5 with Frobenius norm 5.
        let obs = Matrix::from_rows(&[vec![0.0, 3.0], vec![0.0, 4.0]]).unwrap();
        let r = bdc_matrix(&obs, true).unwrap();
        assert!(r.normalized());
        assert!((r.get(0, 0) + 0.5).abs() < 1e-12);
        assert!((r.get(0, 1) - 0.5).abs() < 1e-12);
        assert!((r.entries().frobenius_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bdc_measure_cases() {
        let zero = BdcMatrix {
            entries: Matrix::zeros(2, 2),
            normalized: false,
        };
        assert_eq!(bdc_measure(&zero, &zero).unwrap(), 0.0);

        let obs = Matrix::from_rows(&[vec![0.0, 3.0], vec![0.0, 4.0]]).unwrap();
        let r = bdc_matrix(&obs, false).unwrap();
        let v = bdc_measure(&r, &r).unwrap();
        assert!((v - 25.0).abs() < 1e-10, "got {}", v);

        let mut rng = seeded_rng(4);
        let rt = bdc_matrix(&gaussian_matrix(3, 6, &mut rng), false).unwrap();
        let rs = bdc_matrix(&gaussian_matrix(5, 6, &mut rng), false).unwrap();
        let v = bdc_measure(&rt, &rs).unwrap();
        let direct: f64 = rt
            .entries()
            .data()
            .iter()
            .zip(rs.entries().data())
            .map(|(a, b)| a * b)
            .sum();
        assert!((v - direct).abs() < 1e-10);
    }

    #[test]
    fn bdc_measure_rejects_mismatch_and_normalized() {
        let mut rng = seeded_rng(9);
        let r2 = bdc_matrix(&gaussian_matrix(2, 2, &mut rng), false).unwrap();
        let r3 = bdc_matrix(&gaussian_matrix(2, 3, &mut rng), false).unwrap();
        assert!(matches!(
            bdc_measure(&r2, &r3),
            Err(Error::DimMismatch { .. })
        ));
        let rn = bdc_matrix(&gaussian_matrix(2, 3, &mut rng), true).unwrap();
        assert!(matches!(
            bdc_measure(&rn, &r3),
            Err(Error::NormalizedMeasureInput)
        ));
    }

    #[test]
    fn dcov_oracle_self_dependence_positive() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let v = dcov_oracle(&x, &x).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn dcov_oracle_constant_marginal_is_zero() {
        let x = Matrix::from_rows(&[vec![5.0], vec![5.0], vec![5.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(dcov_oracle(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn dcov_oracle_cross_checks_bdc_measure() {
        let mut rng = seeded_rng(21);
        let t = gaussian_matrix(3, 5, &mut rng);
        let s = gaussian_matrix(2, 5, &mut rng);
        let rt = bdc_matrix(&t, false).unwrap();
        let rs = bdc_matrix(&s, false).unwrap();
        let trace = bdc_measure(&rt, &rs).unwrap();
        let oracle = dcov_oracle(&t.transposed(), &s.transposed()).unwrap();
        assert!((trace - 25.0 * oracle).abs() < 1e-9 * trace.abs().max(1.0));
    }

    #[test]
    fn dcorr_perfect_dependence_is_one() {
        let mut rng = seeded_rng(30);
        let x = gaussian_matrix(40, 1, &mut rng);
        let r = dcorr(&x, &x).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "got {}", r);
    }

    #[test]
    fn dcorr_constant_sample_errors() {
        let x = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        assert!(matches!(
            dcorr(&x, &x),
            Err(Error::ZeroDistanceVariance)
        ));
    }

    #[test]
    fn dcorr_detects_quadratic_dependence() {
        let mut rng = seeded_rng(2024);
        let xs: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let x = Matrix::column_vector(&xs);
        let y = Matrix::column_vector(&ys);
        let r = dcorr(&x, &y).unwrap();
        assert!(r > 0.4, "dcorr = {}", r);
        let p = pearson(&xs, &ys).unwrap();
        assert!(p.abs() < 0.05, "pearson = {}", p);
    }

    #[test]
    fn dcorr_independent_normals_is_small() {
        let mut rng = seeded_rng(77);
        let x = gaussian_matrix(2000, 1, &mut rng);
        let y = gaussian_matrix(2000, 1, &mut rng);
        let r = dcorr(&x, &y).unwrap();
        assert!(r < 0.1, "dcorr = {}", r);
    }

    mod properties {
        use super::*;
        use crate::reduction::{fit_projection, ProjectionKind};
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            // Trace form equals m^2 times the classical 1/n^2 oracle.
            #[test]
            fn oracle_equivalence(m in 2usize..13, kt in 1usize..7, ks in 1usize..7, seed in 0u64..10_000) {
                let mut rng = seeded_rng(seed);
                let t = gaussian_matrix(kt, m, &mut rng);
                let s = gaussian_matrix(ks, m, &mut rng);
                let trace = bdc_measure(
                    &bdc_matrix(&t, false).unwrap(),
                    &bdc_matrix(&s, false).unwrap(),
                ).unwrap();
                let oracle = dcov_oracle(&t.transposed(), &s.transposed()).unwrap();
                let expect = (m * m) as f64 * oracle;
                prop_assert!(
                    (trace - expect).abs() <= 1e-9 * trace.abs().max(expect.abs()).max(1e-12),
                    "trace {} vs m^2 * oracle {}", trace, expect
                );
                // The measure of any pair built from real observations is a
                // scaled squared V-statistic, hence non-negative.
                prop_assert!(trace >= -1e-9, "negative measure {}", trace);
            }

            // Distances between observation columns obey the triangle
            // inequality on every sampled triple.
            #[test]
            fn triangle_inequality(m in 3usize..10, k in 1usize..6, seed in 0u64..10_000) {
                let mut rng = seeded_rng(seed);
                let d = distance_matrix(&gaussian_matrix(k, m, &mut rng)).unwrap();
                for i in 0..m {
                    for j in 0..m {
                        for l in 0..m {
                            prop_assert!(
                                d.get(i, j) <= d.get(i, l) + d.get(l, j) + 1e-9,
                                "triple ({},{},{}): {} > {} + {}",
                                i, j, l, d.get(i, j), d.get(i, l), d.get(l, j)
                            );
                        }
                    }
                }
            }

            // Self-measure is the squared Frobenius norm, hence non-negative.
            #[test]
            fn self_measure_is_squared_frobenius(m in 2usize..10, k in 1usize..6, seed in 0u64..10_000) {
                let mut rng = seeded_rng(seed);
                let r = bdc_matrix(&gaussian_matrix(k, m, &mut rng), false).unwrap();
                let v = bdc_measure(&r, &r).unwrap();
                let fro = r.entries().frobenius_norm();
                prop_assert!(v >= 0.0);
                prop_assert!((v - fro * fro).abs() < 1e-10 * v.max(1.0));
            }

            // Adding a constant vector to every column leaves the matrix unchanged.
            #[test]
            fn translation_invariance(m in 2usize..10, k in 1usize..6, seed in 0u64..10_000) {
                let mut rng = seeded_rng(seed);
                let obs = gaussian_matrix(k, m, &mut rng);
                let shift = gaussian_matrix(k, 1, &mut rng);
                let mut moved = obs.clone();
                for r in 0..k {
                    for c in 0..m {
                        moved.set(r, c, obs.get(r, c) + 3.0 * shift.get(r, 0));
                    }
                }
                let a = bdc_matrix(&obs, false).unwrap();
                let b = bdc_matrix(&moved, false).unwrap();
                for (x, y) in a.entries().data().iter().zip(b.entries().data()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }

            // A random orthogonal map on the columns preserves distances.
            #[test]
            fn rotation_invariance(m in 2usize..9, k in 2usize..6, seed in 0u64..10_000) {
                let mut rng = seeded_rng(seed);
                let obs = gaussian_matrix(k, m, &mut rng);
                let q = fit_projection(ProjectionKind::RandomOrthogonal, k, k, None, seed ^ 0xabc)
                    .unwrap();
                let rotated = q.weights().matmul(&obs).unwrap();
                let da = distance_matrix(&obs).unwrap();
                let db = distance_matrix(&rotated).unwrap();
                for (x, y) in da.entries().data().iter().zip(db.entries().data()) {
                    prop_assert!((x - y).abs() < 1e-8);
                }
            }

            // Scaling the observations scales the raw matrix and leaves the
            // normalized matrix unchanged.
            #[test]
            fn scaling_covariance(m in 2usize..9, k in 1usize..6, seed in 0u64..10_000, c in 1u32..50) {
                let scale = c as f64 / 10.0;
                let mut rng = seeded_rng(seed);
                let obs = gaussian_matrix(k, m, &mut rng);
                let scaled = obs.scaled(scale);
                let raw = bdc_matrix(&obs, false).unwrap();
                let raw_scaled = bdc_matrix(&scaled, false).unwrap();
                for (x, y) in raw.entries().data().iter().zip(raw_scaled.entries().data()) {
                    prop_assert!((scale * x - y).abs() < 1e-9 * scale.max(1.0));
                }
                let unit = bdc_matrix(&obs, true).unwrap();
                let unit_scaled = bdc_matrix(&scaled, true).unwrap();
                for (x, y) in unit.entries().data().iter().zip(unit_scaled.entries().data()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }

            #[test]
            fn symmetry_of_centered_matrix(m in 2usize..10, k in 1usize..6, seed in 0u64..10_000) {
                let mut rng = seeded_rng(seed);
                let r = bdc_matrix(&gaussian_matrix(k, m, &mut rng), false).unwrap();
                for i in 0..m {
                    for j in 0..m {
                        prop_assert!((r.get(i, j) - r.get(j, i)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
