//! Few-shot classification over centered-distance representations:
//! class prototypes (mean of per-shot unit-norm matrices, re-normalized),
//! exponential prototype similarity scores, residual fusion with the
//! reasoning head, the zero-shot text baseline, evaluation reports, and
//! hyper-parameter grid search.
//!
//! Score pipeline for one query:
//! - `p_m[n] = w_n . f` — raw head logits (no softmax);
//! - `p_b[n] = exp(-delta * (1 - cos_n))` with `cos_n` the cosine between
//!   the query's vectorized unit-norm centered matrix and prototype `n`;
//!   always in `(0, 1]`, equal to 1 exactly when the cosine is 1;
//! - fused: `alpha * p_b + p_m`; ties break to the lowest class index.
//!   `alpha = +inf` is understood as prototype-only ranking.

use serde::{Deserialize, Serialize};

use crate::bdc::bdc_matrix;
use crate::error::{Error, Result};
use crate::head::{Batch, LinearHead, TrainConfig};
use crate::linalg::{cosine, dot, l2_normalize, seeded_rng, split_seed, Matrix};
use crate::reduction::Projection;

/// One labeled support image: its global embedding and its feature map.
#[derive(Debug, Clone)]
pub struct SupportItem {
    pub label: usize,
    pub embedding: Vec<f64>,
    pub map: Matrix,
}

/// One labeled query with an id for reporting.
#[derive(Debug, Clone)]
pub struct QueryItem {
    pub id: String,
    pub label: usize,
    pub embedding: Vec<f64>,
    pub map: Matrix,
}

/// An M-shot N-class episode: exactly `shots` support items per class plus
/// a query set.
#[derive(Debug, Clone)]
pub struct Episode {
    pub class_names: Vec<String>,
    pub shots: usize,
    pub support: Vec<SupportItem>,
    pub queries: Vec<QueryItem>,
}

impl Episode {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Check the exactly-M-per-class invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_classes();
        let mut counts = vec![0usize; n];
        for item in &self.support {
            if item.label >= n {
                return Err(Error::InvalidBatch(format!(
                    "support label {} out of range",
                    item.label
                )));
            }
            counts[item.label] += 1;
        }
        for (class, &count) in counts.iter().enumerate() {
            if count != self.shots {
                return Err(Error::InsufficientShots {
                    class,
                    need: self.shots,
                    got: count,
                });
            }
        }
        Ok(())
    }

    /// Support maps grouped by class, in support order.
    pub fn support_maps_by_class(&self) -> Vec<Vec<&Matrix>> {
        let mut by_class = vec![Vec::new(); self.num_classes()];
        for item in &self.support {
            by_class[item.label].push(&item.map);
        }
        by_class
    }
}

/// Unit-norm vectorized class prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    matrix_side: usize,
    shots: usize,
    prototypes: Matrix, // N x side^2, unit-norm rows
}

impl PrototypeSet {
    pub fn num_classes(&self) -> usize {
        self.prototypes.rows()
    }

    /// Side length of the underlying centered matrices.
    pub fn matrix_side(&self) -> usize {
        self.matrix_side
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn prototype(&self, class: usize) -> &[f64] {
        self.prototypes.row(class)
    }

    pub fn prototypes(&self) -> &Matrix {
        &self.prototypes
    }

    /// Rebuild from serialized parts; re-validates unit norms.
    pub fn from_parts(matrix_side: usize, shots: usize, prototypes: Matrix) -> Result<Self> {
        if prototypes.cols() != matrix_side * matrix_side {
            return Err(Error::DimMismatch {
                op: "prototype_set",
                lhs: format!("side^2 {}", matrix_side * matrix_side),
                rhs: format!("{} cols", prototypes.cols()),
            });
        }
        for r in 0..prototypes.rows() {
            let norm = crate::linalg::l2_norm(prototypes.row(r));
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "prototype {} has norm {}",
                    r, norm
                )));
            }
        }
        Ok(PrototypeSet {
            matrix_side,
            shots,
            prototypes,
        })
    }
}

/// Fusion hyper-parameters: residual ratio `alpha`, sharpness `delta`, and
/// the zero-shot softmax temperature `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub alpha: f64,
    pub delta: f64,
    pub tau: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            alpha: 1.0,
            delta: 1.0,
            tau: 0.01,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::InvalidParameter("alpha must be >= 0".into()));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::InvalidParameter("delta must be > 0".into()));
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::InvalidParameter("tau must be > 0".into()));
        }
        Ok(())
    }
}

/// The full trained model: fixed projection, trained head, prototype set,
/// and fusion settings. Immutable during evaluation.
#[derive(Debug, Clone)]
pub struct AdapterModel {
    pub projection: Projection,
    pub head: LinearHead,
    pub prototypes: PrototypeSet,
    pub fusion: FusionConfig,
}

/// Which score drives the predicted class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    /// `alpha * p_b + p_m` (the default; honors `alpha = +inf`).
    Fused,
    /// Head logits only (equivalent to `alpha = 0`).
    HeadOnly,
    /// Prototype scores only (the `alpha -> inf` limit).
    PrototypeOnly,
}

/// Per-query score breakdown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub predicted: usize,
    pub p_b: Vec<f64>,
    pub p_m: Vec<f64>,
    pub fused: Vec<f64>,
}

/// Build class prototypes from support maps grouped by class: per image
/// project, compute the unit-norm centered matrix, vectorize; per class
/// average and re-normalize.
pub fn build_prototypes_from_maps(
    maps_by_class: &[Vec<&Matrix>],
    projection: &Projection,
    normalize_each: bool,
) -> Result<PrototypeSet> {
    if maps_by_class.is_empty() {
        return Err(Error::InvalidParameter("no classes".into()));
    }
    let mut side = 0usize;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(maps_by_class.len());
    let mut shots = usize::MAX;
    for (class, maps) in maps_by_class.iter().enumerate() {
        if maps.is_empty() {
            return Err(Error::InsufficientShots {
                class,
                need: 1,
                got: 0,
            });
        }
        shots = shots.min(maps.len());
        let mut mean: Option<Vec<f64>> = None;
        for map in maps {
            let reduced = projection.apply(map)?;
            let b = bdc_matrix(&reduced, normalize_each)?;
            if side == 0 {
                side = b.size();
            } else if b.size() != side {
                return Err(Error::DimMismatch {
                    op: "build_prototypes",
                    lhs: format!("side {}", side),
                    rhs: format!("side {}", b.size()),
                });
            }
            match &mut mean {
                None => mean = Some(b.entries().data().to_vec()),
                Some(acc) => {
                    for (a, v) in acc.iter_mut().zip(b.entries().data()) {
                        *a += v;
                    }
                }
            }
        }
        let mut mean = mean.expect("class has at least one shot");
        let count = maps.len() as f64;
        for v in &mut mean {
            *v /= count;
        }
        rows.push(l2_normalize(&mean).map_err(|_| Error::DegenerateBdc)?);
    }
    PrototypeSet::from_parts(side, shots, Matrix::from_rows(&rows)?)
}

/// Episode wrapper around [`build_prototypes_from_maps`].
pub fn build_prototypes(
    episode: &Episode,
    projection: &Projection,
    normalize_each: bool,
) -> Result<PrototypeSet> {
    episode.validate()?;
    build_prototypes_from_maps(&episode.support_maps_by_class(), projection, normalize_each)
}

/// Prototype similarity scores `exp(-delta * (1 - cos))` for one query map.
pub fn prototype_scores(
    map: &Matrix,
    protos: &PrototypeSet,
    projection: &Projection,
    delta: f64,
) -> Result<Vec<f64>> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter("delta must be > 0".into()));
    }
    let reduced = projection.apply(map)?;
    let b = bdc_matrix(&reduced, true)?;
    if b.size() != protos.matrix_side() {
        return Err(Error::DimMismatch {
            op: "prototype_scores",
            lhs: format!("side {}", protos.matrix_side()),
            rhs: format!("side {}", b.size()),
        });
    }
    let flat = b.to_flat();
    Ok((0..protos.num_classes())
        .map(|n| {
            // Both vectors are unit-norm; clamp round-off so the score
            // stays in (0, 1].
            let cos = dot(&flat, protos.prototype(n)).clamp(-1.0, 1.0);
            (-delta * (1.0 - cos)).exp()
        })
        .collect())
}

/// Element-wise residual fusion `alpha * p_b + p_m`. `alpha` must be finite
/// here; the infinite limit is handled by [`predict`].
pub fn fuse(p_b: &[f64], p_m: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if p_b.len() != p_m.len() {
        return Err(Error::DimMismatch {
            op: "fuse",
            lhs: format!("{}", p_b.len()),
            rhs: format!("{}", p_m.len()),
        });
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(
            "fuse requires a finite alpha; use ScoreMode::PrototypeOnly for the limit".into(),
        ));
    }
    Ok(p_b
        .iter()
        .zip(p_m)
        .map(|(b, m)| alpha * b + m)
        .collect())
}

/// First index attaining the maximum (ties break to the lowest class).
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate().skip(1) {
        if v > scores[best] {
            best = i;
        }
    }
    best
}

/// Score one query. `alpha = +inf` ranks by prototype scores alone, and the
/// reported fused vector is then the prototype score vector.
pub fn predict(
    map: &Matrix,
    embedding: &[f64],
    model: &AdapterModel,
) -> Result<Prediction> {
    let p_m = model.head.forward(embedding)?;
    let p_b = prototype_scores(map, &model.prototypes, &model.projection, model.fusion.delta)?;
    let fused = if model.fusion.alpha.is_infinite() {
        p_b.clone()
    } else {
        fuse(&p_b, &p_m, model.fusion.alpha)?
    };
    Ok(Prediction {
        predicted: argmax(&fused),
        p_b,
        p_m,
        fused,
    })
}

/// Zero-shot probabilities: softmax of cosine similarities over `tau`.
pub fn zero_shot_scores(image: &[f64], text_features: &Matrix, tau: f64) -> Result<Vec<f64>> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter("tau must be > 0".into()));
    }
    let sims: Result<Vec<f64>> = (0..text_features.rows())
        .map(|n| cosine(image, text_features.row(n)))
        .collect();
    let sims = sims?;
    let scaled: Vec<f64> = sims.iter().map(|s| s / tau).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|z| (z - max).exp()).collect();
    let denom: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / denom).collect())
}

/// One report line per query.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QueryRecord {
    pub id: String,
    pub true_label: usize,
    pub predicted: usize,
    pub p_b: Vec<f64>,
    pub p_m: Vec<f64>,
    pub fused: Vec<f64>,
}

/// Accuracy report over a query set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalReport {
    pub overall: f64,
    pub per_class: Vec<f64>,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
    pub records: Vec<QueryRecord>,
}

/// Evaluate the model over the episode's queries in their stored order.
pub fn evaluate(episode: &Episode, model: &AdapterModel, mode: ScoreMode) -> Result<EvalReport> {
    if episode.queries.is_empty() {
        return Err(Error::InvalidParameter("empty query set".into()));
    }
    let n = episode.num_classes();
    let mut confusion = vec![vec![0usize; n]; n];
    let mut records = Vec::with_capacity(episode.queries.len());
    let mut correct = 0usize;
    for q in &episode.queries {
        if q.label >= n {
            return Err(Error::InvalidBatch(format!(
                "query label {} out of range",
                q.label
            )));
        }
        let scored = predict(&q.map, &q.embedding, model)?;
        let predicted = match mode {
            ScoreMode::Fused => scored.predicted,
            ScoreMode::HeadOnly => argmax(&scored.p_m),
            ScoreMode::PrototypeOnly => argmax(&scored.p_b),
        };
        if predicted == q.label {
            correct += 1;
        }
        confusion[q.label][predicted] += 1;
        records.push(QueryRecord {
            id: q.id.clone(),
            true_label: q.label,
            predicted,
            p_b: scored.p_b,
            p_m: scored.p_m,
            fused: scored.fused,
        });
    }
    let per_class: Vec<f64> = (0..n)
        .map(|c| {
            let total: usize = confusion[c].iter().sum();
            if total == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / total as f64
            }
        })
        .collect();
    Ok(EvalReport {
        overall: correct as f64 / episode.queries.len() as f64,
        per_class,
        confusion,
        records,
    })
}

/// Nearest-class-mean baseline on the global embeddings: class prototypes
/// are re-normalized means of support embeddings, queries are classified by
/// cosine. This is the marginal-statistics reference the centered-distance
/// path is measured against.
pub fn embedding_baseline_accuracy(episode: &Episode) -> Result<f64> {
    episode.validate()?;
    if episode.queries.is_empty() {
        return Err(Error::InvalidParameter("empty query set".into()));
    }
    let n = episode.num_classes();
    let dim = episode
        .support
        .first()
        .map(|s| s.embedding.len())
        .ok_or_else(|| Error::InvalidParameter("empty support set".into()))?;
    let mut sums = vec![vec![0.0; dim]; n];
    let mut counts = vec![0usize; n];
    for item in &episode.support {
        for (acc, v) in sums[item.label].iter_mut().zip(&item.embedding) {
            *acc += v;
        }
        counts[item.label] += 1;
    }
    let mut protos = Vec::with_capacity(n);
    for (class, sum) in sums.iter().enumerate() {
        let mean: Vec<f64> = sum.iter().map(|v| v / counts[class] as f64).collect();
        protos.push(l2_normalize(&mean)?);
    }
    let mut correct = 0usize;
    for q in &episode.queries {
        let scores: Result<Vec<f64>> = protos.iter().map(|p| cosine(&q.embedding, p)).collect();
        if argmax(&scores?) == q.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / episode.queries.len() as f64)
}

/// One grid-search evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub alpha: f64,
    pub delta: f64,
    pub accuracy: f64,
}

/// Exhaustive fused-accuracy search over the alpha and delta grids. The
/// grids are evaluated in ascending order and ties keep the earlier entry,
/// so equal accuracies resolve to the smaller alpha, then smaller delta.
pub fn grid_search(
    alphas: &[f64],
    deltas: &[f64],
    episode: &Episode,
    base: &AdapterModel,
) -> Result<(FusionConfig, Vec<GridRow>)> {
    if alphas.is_empty() || deltas.is_empty() {
        return Err(Error::Usage("grid search needs non-empty grids".into()));
    }
    let mut alphas = alphas.to_vec();
    let mut deltas = deltas.to_vec();
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rows = Vec::with_capacity(alphas.len() * deltas.len());
    let mut best: Option<(f64, FusionConfig)> = None;
    for &alpha in &alphas {
        for &delta in &deltas {
            let fusion = FusionConfig {
                alpha,
                delta,
                tau: base.fusion.tau,
            };
            fusion.validate()?;
            let model = AdapterModel {
                projection: base.projection.clone(),
                head: base.head.clone(),
                prototypes: base.prototypes.clone(),
                fusion,
            };
            let report = evaluate(episode, &model, ScoreMode::Fused)?;
            rows.push(GridRow {
                alpha,
                delta,
                accuracy: report.overall,
            });
            let better = match &best {
                None => true,
                Some((acc, _)) => report.overall > *acc,
            };
            if better {
                best = Some((report.overall, fusion));
            }
        }
    }
    let (_, config) = best.expect("non-empty grids");
    Ok((config, rows))
}

/// Assemble seed-deterministic training batches: support embeddings are
/// shuffled once per call and chunked into `images_per_batch` groups; each
/// group gains `texts_per_batch` rows sampled without replacement from the
/// text pool. Rows are re-normalized to f64 precision before batching.
pub fn make_training_batches(
    support: &[SupportItem],
    text_features: &Matrix,
    text_labels: &[usize],
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<Vec<Batch>> {
    cfg.validate()?;
    if text_features.rows() != text_labels.len() {
        return Err(Error::DimMismatch {
            op: "make_training_batches",
            lhs: format!("{} text rows", text_features.rows()),
            rhs: format!("{} labels", text_labels.len()),
        });
    }
    if cfg.texts_per_batch > text_features.rows() {
        return Err(Error::InvalidBatch(format!(
            "texts_per_batch {} exceeds text pool of {}",
            cfg.texts_per_batch,
            text_features.rows()
        )));
    }
    let mut rng = seeded_rng(split_seed(cfg.seed, 0x62_61));
    use rand::seq::SliceRandom;

    let mut image_order: Vec<usize> = (0..support.len()).collect();
    image_order.shuffle(&mut rng);

    let steps = if cfg.images_per_batch == 0 || support.is_empty() {
        1
    } else {
        support.len().div_ceil(cfg.images_per_batch)
    };

    let mut batches = Vec::with_capacity(steps);
    for step in 0..steps {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        if cfg.images_per_batch > 0 {
            let start = step * cfg.images_per_batch;
            let end = (start + cfg.images_per_batch).min(support.len());
            for &idx in &image_order[start..end] {
                rows.push(l2_normalize(&support[idx].embedding)?);
                labels.push(support[idx].label);
            }
        }
        if cfg.texts_per_batch > 0 {
            let mut pool: Vec<usize> = (0..text_features.rows()).collect();
            pool.shuffle(&mut rng);
            for &t in pool.iter().take(cfg.texts_per_batch) {
                rows.push(l2_normalize(text_features.row(t))?);
                labels.push(text_labels[t]);
            }
        }
        if rows.is_empty() {
            continue;
        }
        batches.push(Batch::new(Matrix::from_rows(&rows)?, labels, num_classes)?);
    }
    if batches.is_empty() {
        return Err(Error::InvalidBatch("no training batches produced".into()));
    }
    Ok(batches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;
    use crate::reduction::ProjectionKind;

    fn identity_projection(dim: usize) -> Projection {
        Projection::from_parts(
            ProjectionKind::RandomOrthogonal,
            dim,
            dim,
            0,
            Matrix::identity(dim),
        )
        .unwrap()
    }

    fn random_map(k: usize, m: usize, seed: u64) -> Matrix {
        gaussian_matrix(k, m, &mut seeded_rng(seed))
    }

    #[test]
    fn one_shot_prototype_equals_the_image_matrix() {
        let map = random_map(3, 4, 1);
        let proj = identity_projection(3);
        let protos =
            build_prototypes_from_maps(&[vec![&map]], &proj, true).unwrap();
        let b = bdc_matrix(&map, true).unwrap();
        for (a, e) in protos.prototype(0).iter().zip(b.entries().data()) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn two_identical_shots_equal_either_one() {
        let map = random_map(3, 4, 2);
        let proj = identity_projection(3);
        let protos = build_prototypes_from_maps(&[vec![&map, &map]], &proj, true).unwrap();
        let b = bdc_matrix(&map, true).unwrap();
        for (a, e) in protos.prototype(0).iter().zip(b.entries().data()) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_pair_prototype_is_bisector() {
        // Four observations collapsed onto two coincident pairs give a
        // rank-one centered matrix; swapping which columns pair up flips
        // the rank-one direction from (1,1,-1,-1) to (1,-1,1,-1), so the
        // two vectorized matrices are exactly orthogonal. The two-shot
        // prototype must then be the normalized bisector with cosine
        // sqrt(2)/2 to each shot.
        let proj = identity_projection(2);
        let a = Matrix::from_rows(&[vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 0.0, 0.0, 0.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0, 3.0, 0.0, 3.0], vec![0.0, 0.0, 0.0, 0.0]]).unwrap();
        let va = bdc_matrix(&a, true).unwrap().to_flat();
        let vb = bdc_matrix(&b, true).unwrap().to_flat();
        assert!(dot(&va, &vb).abs() < 1e-12, "pair not orthogonal");
        let protos = build_prototypes_from_maps(&[vec![&a, &b]], &proj, true).unwrap();
        let p = protos.prototype(0);
        let expect = std::f64::consts::FRAC_1_SQRT_2;
        assert!((dot(p, &va) - expect).abs() < 1e-12, "cos a = {}", dot(p, &va));
        assert!((dot(p, &vb) - expect).abs() < 1e-12, "cos b = {}", dot(p, &vb));
    }

    #[test]
    fn prototype_score_of_own_matrix_is_one() {
        let map = random_map(3, 4, 7);
        let proj = identity_projection(3);
        let protos = build_prototypes_from_maps(&[vec![&map]], &proj, true).unwrap();
        let scores = prototype_scores(&map, &protos, &proj, 1.0).unwrap();
        assert!((scores[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prototype_score_analytic_values() {
        // cosine 0 with delta 1 -> exp(-1); cosine -1 with delta 2 -> exp(-4).
        assert!(((-1.0f64).exp() - 0.367879441).abs() < 1e-9);
        assert!(((-4.0f64).exp() - 0.018315639).abs() < 1e-9);
        // Drive the actual code path with a hand-built prototype set.
        let map = random_map(2, 3, 9);
        let proj = identity_projection(2);
        let flat = bdc_matrix(&map, true).unwrap().to_flat();
        let negated = l2_normalize(&flat.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        let protos = PrototypeSet::from_parts(3, 1, Matrix::from_rows(&[negated]).unwrap()).unwrap();
        let s = prototype_scores(&map, &protos, &proj, 2.0).unwrap();
        assert!((s[0] - (-4.0f64).exp()).abs() < 1e-9, "score {}", s[0]);
    }

    #[test]
    fn fuse_cases() {
        // alpha = 0 -> p_m exactly.
        let p_b = vec![1.0, (-1.0f64).exp()];
        let p_m = vec![0.2, 0.9];
        assert_eq!(fuse(&p_b, &p_m, 0.0).unwrap(), p_m);
        // p_m = 0 -> alpha * p_b.
        let fused = fuse(&p_b, &[0.0, 0.0], 2.0).unwrap();
        assert_eq!(fused, vec![2.0, 2.0 * (-1.0f64).exp()]);
        // arithmetic example.
        let fused = fuse(&p_b, &p_m, 1.0).unwrap();
        assert!((fused[0] - 1.2).abs() < 1e-15);
        assert!((fused[1] - (0.9 + (-1.0f64).exp())).abs() < 1e-15);
        // mismatched lengths error.
        assert!(fuse(&p_b, &[1.0], 1.0).is_err());
        // infinite alpha is rejected here (predict handles the limit).
        assert!(fuse(&p_b, &p_m, f64::INFINITY).is_err());
    }

    #[test]
    fn zero_shot_cases() {
        let one = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let p = zero_shot_scores(&[1.0, 0.0], &one, 0.5).unwrap();
        assert_eq!(p, vec![1.0]);

        // Two classes at equal similarity split evenly.
        let two = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let p = zero_shot_scores(&[1.0, 0.0], &two, 0.01).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);

        // sims (1, 0) at tau = 1 -> softmax(1, 0).
        let ortho = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let p = zero_shot_scores(&[1.0, 0.0], &ortho, 1.0).unwrap();
        assert!((p[0] - 0.7310585786).abs() < 1e-9);
        assert!((p[1] - 0.2689414214).abs() < 1e-9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);

        assert!(zero_shot_scores(&[0.0, 0.0], &ortho, 1.0).is_err());
    }

    fn toy_model(num_classes: usize, seed: u64) -> (AdapterModel, Vec<Matrix>) {
        let k = 3;
        let m = 4;
        let proj = identity_projection(k);
        let class_maps: Vec<Matrix> = (0..num_classes)
            .map(|c| random_map(k, m, seed + c as u64))
            .collect();
        let maps_by_class: Vec<Vec<&Matrix>> = class_maps.iter().map(|m| vec![m]).collect();
        let protos = build_prototypes_from_maps(&maps_by_class, &proj, true).unwrap();
        let mut rng = seeded_rng(seed ^ 0xff);
        let text = gaussian_matrix(num_classes, 5, &mut rng);
        let head = crate::head::init_from_text(&text).unwrap();
        (
            AdapterModel {
                projection: proj,
                head,
                prototypes: protos,
                fusion: FusionConfig::default(),
            },
            class_maps,
        )
    }

    #[test]
    fn predict_alpha_zero_is_head_argmax() {
        let (mut model, maps) = toy_model(3, 50);
        model.fusion.alpha = 0.0;
        let emb = l2_normalize(&[0.3, -0.2, 0.9, 0.1, 0.4]).unwrap();
        let pred = predict(&maps[1], &emb, &model).unwrap();
        assert_eq!(pred.predicted, argmax(&pred.p_m));
        assert_eq!(pred.fused, pred.p_m);
    }

    #[test]
    fn predict_equal_head_logits_defers_to_prototypes() {
        let (mut model, maps) = toy_model(3, 51);
        // A zero-weight head produces constant (zero) logits.
        model.head = LinearHead::from_weights(Matrix::zeros(3, 5));
        let emb = l2_normalize(&[1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let pred = predict(&maps[2], &emb, &model).unwrap();
        assert_eq!(pred.predicted, argmax(&pred.p_b));
    }

    #[test]
    fn predict_infinite_alpha_is_prototype_only() {
        let (mut model, maps) = toy_model(3, 52);
        model.fusion.alpha = f64::INFINITY;
        let emb = l2_normalize(&[0.3, -0.2, 0.9, 0.1, 0.4]).unwrap();
        let pred = predict(&maps[0], &emb, &model).unwrap();
        assert_eq!(pred.predicted, argmax(&pred.p_b));
        assert_eq!(pred.fused, pred.p_b);
    }

    fn toy_episode(maps: &[Matrix], queries_per_class: usize) -> Episode {
        let n = maps.len();
        let mut queries = Vec::new();
        for c in 0..n {
            for q in 0..queries_per_class {
                queries.push(QueryItem {
                    id: format!("q{}:{}", c, q),
                    label: c,
                    embedding: l2_normalize(&[1.0, 0.1 * c as f64, 0.2, 0.3, 0.4]).unwrap(),
                    map: maps[c].clone(),
                });
            }
        }
        let episode = Episode {
            class_names: (0..n).map(|c| format!("class_{}", c)).collect(),
            shots: 1,
            support: maps
                .iter()
                .enumerate()
                .map(|(c, m)| SupportItem {
                    label: c,
                    embedding: l2_normalize(&[1.0, c as f64, 0.0, 0.0, 0.0]).unwrap(),
                    map: m.clone(),
                })
                .collect(),
            queries,
        };
        episode.validate().unwrap();
        episode
    }

    #[test]
    fn evaluate_all_correct_in_prototype_mode() {
        let (model, maps) = toy_model(3, 60);
        let episode = toy_episode(&maps, 4);
        let report = evaluate(&episode, &model, ScoreMode::PrototypeOnly).unwrap();
        assert_eq!(report.overall, 1.0);
        for c in 0..3 {
            assert_eq!(report.per_class[c], 1.0);
            assert_eq!(report.confusion[c][c], 4);
        }
    }

    #[test]
    fn evaluate_confusion_rows_sum_to_query_counts() {
        let (model, maps) = toy_model(3, 61);
        let episode = toy_episode(&maps, 5);
        let report = evaluate(&episode, &model, ScoreMode::HeadOnly).unwrap();
        for row in &report.confusion {
            assert_eq!(row.iter().sum::<usize>(), 5);
        }
        // Hand-count accuracy from records.
        let hand = report
            .records
            .iter()
            .filter(|r| r.predicted == r.true_label)
            .count() as f64
            / report.records.len() as f64;
        assert_eq!(report.overall, hand);
    }

    #[test]
    fn evaluate_rejects_empty_queries() {
        let (model, maps) = toy_model(2, 62);
        let mut episode = toy_episode(&maps, 1);
        episode.queries.clear();
        assert!(evaluate(&episode, &model, ScoreMode::Fused).is_err());
    }

    #[test]
    fn grid_search_singleton_and_cardinality() {
        let (model, maps) = toy_model(2, 70);
        let episode = toy_episode(&maps, 2);
        let (best, rows) = grid_search(&[0.7], &[2.0], &episode, &model).unwrap();
        assert_eq!(best.alpha, 0.7);
        assert_eq!(best.delta, 2.0);
        assert_eq!(rows.len(), 1);

        let (_, rows) = grid_search(&[0.0, 1.0, 2.0], &[0.5, 1.0], &episode, &model).unwrap();
        assert_eq!(rows.len(), 6);
    }

    #[test]
    fn grid_search_recovers_planted_optimum() {
        // Prototypes classify the queries perfectly while the head is
        // wired to the wrong classes, so only configurations with alpha
        // large enough to drown the head reach full accuracy; the planted
        // optimum is the smallest such grid point.
        let (mut model, maps) = toy_model(3, 72);
        let wrong_rows: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                model
                    .head
                    .weights()
                    .row((c + 1) % 3)
                    .iter()
                    .map(|v| 0.05 * v)
                    .collect()
            })
            .collect();
        model.head = LinearHead::from_weights(Matrix::from_rows(&wrong_rows).unwrap());
        let episode = toy_episode(&maps, 3);
        let (best, rows) = grid_search(&[0.0, 2.0], &[1.0, 3.0], &episode, &model).unwrap();
        let acc = |alpha: f64| {
            rows.iter()
                .filter(|r| r.alpha == alpha)
                .map(|r| r.accuracy)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        assert!(acc(2.0) > acc(0.0), "fusion must beat the sabotaged head");
        assert_eq!(best.alpha, 2.0);
        assert_eq!(best.delta, 1.0); // perfect-prototype ties resolve to the smaller delta
    }

    #[test]
    fn grid_search_ties_prefer_smaller_alpha_then_delta() {
        let (model, maps) = toy_model(2, 71);
        let episode = toy_episode(&maps, 2);
        // Prototype mode is perfect here, so large alphas all tie; the
        // winner must be the smallest grid point that attains the maximum.
        let (best, rows) = grid_search(&[5.0, 10.0], &[1.0, 2.0], &episode, &model).unwrap();
        let max = rows
            .iter()
            .map(|r| r.accuracy)
            .fold(f64::NEG_INFINITY, f64::max);
        let first = rows
            .iter()
            .find(|r| r.accuracy == max)
            .expect("non-empty rows");
        assert_eq!(best.alpha, first.alpha);
        assert_eq!(best.delta, first.delta);
    }

    #[test]
    fn batches_mix_images_and_text_and_are_deterministic() {
        let mut rng = seeded_rng(80);
        let support: Vec<SupportItem> = (0..10)
            .map(|i| SupportItem {
                label: i % 2,
                embedding: l2_normalize(gaussian_matrix(1, 4, &mut rng).row(0)).unwrap(),
                map: random_map(2, 3, i as u64),
            })
            .collect();
        let text = {
            let g = gaussian_matrix(2, 4, &mut rng);
            let rows: Vec<Vec<f64>> = (0..2).map(|r| l2_normalize(g.row(r)).unwrap()).collect();
            Matrix::from_rows(&rows).unwrap()
        };
        let cfg = TrainConfig {
            images_per_batch: 4,
            texts_per_batch: 2,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = make_training_batches(&support, &text, &[0, 1], 2, &cfg).unwrap();
        let b = make_training_batches(&support, &text, &[0, 1], 2, &cfg).unwrap();
        assert_eq!(a.len(), 3); // ceil(10 / 4)
        assert_eq!(a[0].len(), 6); // 4 images + 2 texts
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.features(), y.features());
            assert_eq!(x.labels(), y.labels());
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            // Prototype scores live in (0, 1] and strictly decrease in delta
            // whenever the cosine is below one.
            #[test]
            fn score_range_and_delta_monotonicity(seed in 0u64..2000) {
                let proj = identity_projection(3);
                let a = random_map(3, 4, seed);
                let b = random_map(3, 4, seed ^ 0x5555);
                let protos = build_prototypes_from_maps(&[vec![&a], vec![&b]], &proj, true).unwrap();
                let s1 = prototype_scores(&a, &protos, &proj, 1.0).unwrap();
                let s2 = prototype_scores(&a, &protos, &proj, 2.0).unwrap();
                for (x, y) in s1.iter().zip(&s2) {
                    prop_assert!(*x > 0.0 && *x <= 1.0);
                    prop_assert!(*y > 0.0 && *y <= 1.0);
                }
                // Own class: cosine 1, constant in delta.
                prop_assert!((s1[0] - 1.0).abs() < 1e-12);
                prop_assert!((s2[0] - 1.0).abs() < 1e-12);
                // Other class: cosine < 1 with probability one.
                prop_assert!(s2[1] < s1[1]);
            }

            // Adding a constant to every head logit shifts fused scores but
            // never changes the argmax.
            #[test]
            fn fusion_shift_invariance(seed in 0u64..2000, c in -10i32..10) {
                let shift = c as f64;
                let (model, maps) = toy_model(3, seed);
                let emb = l2_normalize(&[0.5, 0.2, -0.1, 0.7, 0.3]).unwrap();
                let pred = predict(&maps[0], &emb, &model).unwrap();
                let shifted: Vec<f64> = pred.p_m.iter().map(|v| v + shift).collect();
                let fused = fuse(&pred.p_b, &shifted, model.fusion.alpha).unwrap();
                prop_assert_eq!(argmax(&fused), pred.predicted);
                for (f, orig) in fused.iter().zip(&pred.fused) {
                    prop_assert!((f - (orig + shift)).abs() < 1e-12);
                }
            }

            // Permuting class order permutes prototypes, scores, and the
            // confusion matrix consistently.
            #[test]
            fn class_permutation_equivariance(seed in 0u64..500) {
                let proj = identity_projection(3);
                let maps: Vec<Matrix> = (0..3).map(|c| random_map(3, 4, seed * 7 + c)).collect();
                let fwd = build_prototypes_from_maps(
                    &[vec![&maps[0]], vec![&maps[1]], vec![&maps[2]]], &proj, true).unwrap();
                let perm = [2usize, 0, 1]; // new[i] = old[perm[i]]
                let back = build_prototypes_from_maps(
                    &[vec![&maps[2]], vec![&maps[0]], vec![&maps[1]]], &proj, true).unwrap();
                let query = random_map(3, 4, seed * 7 + 99);
                let s_fwd = prototype_scores(&query, &fwd, &proj, 1.0).unwrap();
                let s_back = prototype_scores(&query, &back, &proj, 1.0).unwrap();
                for i in 0..3 {
                    prop_assert!((s_back[i] - s_fwd[perm[i]]).abs() < 1e-12);
                }
            }
        }
    }
}
