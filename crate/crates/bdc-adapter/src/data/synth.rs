//! Synthetic dependence-structured benchmark generator.
//!
//! Each generated feature map is `map_rows x map_cols`; the columns are the
//! observation channels the centered-distance representation is computed
//! over, and the rows index a fixed per-channel sample profile. The first
//! half of the columns are source channels; each remaining column is
//! derived from one source by the pointwise square `y = x^2 + noise`. The
//! class decides *which* source feeds each derived column (a cyclic shift
//! of the pairing), so the class signal lives entirely in the dependence
//! pattern between channel pairs:
//!
//! - Source channel `j` carries a per-source permutation of one shared,
//!   skewed base profile, plus Gaussian jitter. Because every channel is a
//!   permutation of the same value multiset, per-channel means and
//!   variances are identical across classes by construction, so a
//!   marginal-statistics classifier has nothing to exploit.
//! - The global embedding is the per-column mean vector (class-agnostic by
//!   the same argument) plus a small class offset — a deliberately weak
//!   linear signal that keeps the reasoning head trainable while the
//!   dependence path dominates.
//! - Text features are the deterministic expected embedding of each class,
//!   so initializing the head from text starts it near the best linear
//!   classifier.
//!
//! With `noise = 0` an item is fully determined by its class.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{l2_normalize, seeded_rng, split_seed, Matrix, Rng};

use super::bank::{FeatureBank, TEXT_ID_PREFIX};
use super::manifest::{Manifest, Splits};

/// Scale of the class offset mixed into embeddings. Chosen so the
/// embedding-cosine baseline stays well below the dependence path on the
/// default spec.
const EMBED_OFFSET: f64 = 0.08;

/// Skew exponent of the base profile. A symmetric profile would make the
/// squared pairing invisible to first-order distance statistics; the skew
/// keeps the paired-channel distance correlation comfortably high.
const PROFILE_SKEW: f64 = 1.6;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Number of classes N.
    pub classes: usize,
    /// Train items per class (the support pool).
    pub shots: usize,
    /// Total test queries, spread as evenly as possible over classes.
    pub queries: usize,
    /// Validation items per class (0 disables the val split).
    pub val_per_class: usize,
    /// Feature-map rows: per-channel profile length.
    pub map_rows: usize,
    /// Feature-map columns: observation channels (must be even; the first
    /// half are sources, the second half derived).
    pub map_cols: usize,
    /// Gaussian noise level on sources and derived channels.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            classes: 4,
            shots: 8,
            queries: 200,
            val_per_class: 0,
            map_rows: 16,
            map_cols: 32,
            noise: 0.15,
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 1 || self.shots < 1 || self.queries < 1 {
            return Err(Error::SynthSpec(
                "classes, shots and queries must all be >= 1".into(),
            ));
        }
        if self.map_rows < 2 {
            return Err(Error::SynthSpec("map rows must be >= 2".into()));
        }
        if self.map_cols < 2 || !self.map_cols.is_multiple_of(2) {
            return Err(Error::SynthSpec("map cols must be even and >= 2".into()));
        }
        if self.map_cols / 2 < self.classes {
            return Err(Error::SynthSpec(format!(
                "map cols {} give only {} channel pairings, fewer than {} classes",
                self.map_cols,
                self.map_cols / 2,
                self.classes
            )));
        }
        if self.noise.is_nan() || self.noise < 0.0 {
            return Err(Error::SynthSpec("noise must be >= 0".into()));
        }
        Ok(())
    }

    pub fn embedding_dim(&self) -> usize {
        self.map_cols
    }
}

struct Generator {
    spec: SynthSpec,
    /// profiles[j] is the row profile of source channel j.
    profiles: Vec<Vec<f64>>,
    /// Unit class-offset directions, one per class.
    offsets: Vec<Vec<f64>>,
    rng: Rng,
}

impl Generator {
    fn new(spec: SynthSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = seeded_rng(split_seed(spec.seed, 0x5359_4e54));
        let sources = spec.map_cols / 2;
        let base = base_profile(spec.map_rows);
        let mut profiles = Vec::with_capacity(sources);
        for _ in 0..sources {
            let mut p = base.clone();
            use rand::seq::SliceRandom;
            p.shuffle(&mut rng);
            profiles.push(p);
        }
        let mut offsets = Vec::with_capacity(spec.classes);
        for _ in 0..spec.classes {
            let g: Vec<f64> = (0..spec.map_cols)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            offsets.push(l2_normalize(&g)?);
        }
        Ok(Generator {
            spec,
            profiles,
            offsets,
            rng,
        })
    }

    fn sources(&self) -> usize {
        self.spec.map_cols / 2
    }

    /// Draw one feature map for `class`: sources first, then derived
    /// columns wired by the class's cyclic pairing shift.
    fn draw_map(&mut self, class: usize) -> Matrix {
        let k = self.spec.map_rows;
        let s = self.sources();
        let noise = self.spec.noise;
        let mut map = Matrix::zeros(k, self.spec.map_cols);
        let mut source_values = vec![vec![0.0; k]; s];
        for (j, values) in source_values.iter_mut().enumerate() {
            for (r, v) in values.iter_mut().enumerate() {
                let eps: f64 = StandardNormal.sample(&mut self.rng);
                *v = self.profiles[j][r] + noise * eps;
                map.set(r, j, *v);
            }
        }
        for i in 0..s {
            let src = (i + class) % s;
            for r in 0..k {
                let eps: f64 = StandardNormal.sample(&mut self.rng);
                let x = source_values[src][r];
                map.set(r, s + i, x * x + noise * eps);
            }
        }
        map
    }

    /// Embedding: per-column means plus the class offset, unit-normalized.
    fn embed(&self, map: &Matrix, class: usize) -> Result<Vec<f64>> {
        let k = map.rows() as f64;
        let v: Vec<f64> = (0..map.cols())
            .map(|c| {
                let mean: f64 = (0..map.rows()).map(|r| map.get(r, c)).sum::<f64>() / k;
                mean + EMBED_OFFSET * self.offsets[class][c]
            })
            .collect();
        l2_normalize(&v)
    }

    /// Deterministic text feature for a class: expected column means plus
    /// the class offset.
    fn text_feature(&self, class: usize) -> Result<Vec<f64>> {
        let k = self.spec.map_rows as f64;
        let s = self.sources();
        let base = base_profile(self.spec.map_rows);
        let mean_p: f64 = base.iter().sum::<f64>() / k;
        let mean_p2: f64 = base.iter().map(|v| v * v).sum::<f64>() / k;
        let v: Vec<f64> = (0..self.spec.map_cols)
            .map(|c| {
                let expected = if c < s { mean_p } else { mean_p2 };
                expected + EMBED_OFFSET * self.offsets[class][c]
            })
            .collect();
        l2_normalize(&v)
    }
}

/// Skewed, fixed per-channel base profile on [-1, 1].
fn base_profile(len: usize) -> Vec<f64> {
    (0..len)
        .map(|r| {
            let q = (r as f64 + 0.5) / len as f64;
            2.0 * q.powf(PROFILE_SKEW) - 1.0
        })
        .collect()
}

/// Generate a bank and manifest from the spec. Same spec, same bytes.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(FeatureBank, Manifest)> {
    let mut generator = Generator::new(spec.clone())?;
    let spec = generator.spec.clone();
    let mut bank = FeatureBank::new(spec.embedding_dim(), Some((spec.map_rows, spec.map_cols)));
    let class_names: Vec<String> = (0..spec.classes).map(|c| format!("class_{}", c)).collect();

    for (c, name) in class_names.iter().enumerate() {
        let text = generator.text_feature(c)?;
        bank.push_item(format!("{}{}", TEXT_ID_PREFIX, name), c as u32, &text, None)?;
    }

    let mut splits = Splits::default();
    for (split, per_class_counts) in [
        ("train", vec![spec.shots; spec.classes]),
        ("val", vec![spec.val_per_class; spec.classes]),
        ("test", query_counts(spec.queries, spec.classes)),
    ] {
        for (c, &count) in per_class_counts.iter().enumerate() {
            for i in 0..count {
                let map = generator.draw_map(c);
                let embedding = generator.embed(&map, c)?;
                let id = format!("img:{}:{}:{}", c, split, i);
                bank.push_item(&id, c as u32, &embedding, Some(&map))?;
                match split {
                    "train" => splits.train.push(id),
                    "val" => splits.val.push(id),
                    _ => splits.test.push(id),
                }
            }
        }
    }

    let manifest = Manifest {
        class_names,
        templates: vec!["a photo of a".into()],
        splits,
    };
    manifest.validate(&bank)?;
    Ok((bank, manifest))
}

fn query_counts(total: usize, classes: usize) -> Vec<usize> {
    let base = total / classes;
    let extra = total % classes;
    (0..classes)
        .map(|c| base + usize::from(c < extra))
        .collect()
}

/// The class-c source index feeding derived column `s + i`.
pub fn paired_source(spec: &SynthSpec, class: usize, derived_index: usize) -> usize {
    (derived_index + class) % (spec.map_cols / 2)
}
