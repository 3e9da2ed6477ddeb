//! Component ablation: random-init head vs text-init head vs head plus
//! prototype fusion, on the synthetic benchmark.
//!
//! ```bash
//! cargo run --example ablation
//! ```

use bdc_adapter::data::{generate_synthetic, sample_episode, SynthSpec};
use bdc_adapter::fewshot::{
    build_prototypes, evaluate, make_training_batches, AdapterModel, FusionConfig, ScoreMode,
};
use bdc_adapter::head::{init_from_text, init_random, train, TrainConfig};
use bdc_adapter::linalg::split_seed;
use bdc_adapter::reduction::{fit_projection, ProjectionKind};

fn main() -> bdc_adapter::Result<()> {
    let spec = SynthSpec::default();
    let (bank, manifest) = generate_synthetic(&spec)?;
    let n = manifest.class_names.len();
    let episode = sample_episode(&bank, &manifest, spec.shots, split_seed(spec.seed, 1))?;
    let projection = fit_projection(
        ProjectionKind::RandomOrthogonal,
        spec.map_rows,
        spec.map_rows,
        None,
        split_seed(spec.seed, 2),
    )?;
    let prototypes = build_prototypes(&episode, &projection, true)?;

    let (text_pool, text_labels) = bank.text_features(n)?;
    let cfg = TrainConfig {
        images_per_batch: spec.shots,
        texts_per_batch: text_pool.rows(),
        seed: split_seed(spec.seed, 3),
        ..TrainConfig::default()
    };
    let batches = make_training_batches(&episode.support, &text_pool, &text_labels, n, &cfg)?;

    let mut rows = Vec::new();
    for (name, text_init, alpha) in [
        ("MRN w/o init", false, 0.0),
        ("MRN w/ init", true, 0.0),
        ("MRN+BDC", true, 1.0),
    ] {
        let head0 = if text_init {
            init_from_text(&bank.class_text_matrix(n)?)?
        } else {
            init_random(n, bank.dim(), split_seed(spec.seed, 4))
        };
        let (head, _) = train(head0, &batches, &cfg)?;
        let model = AdapterModel {
            projection: projection.clone(),
            head,
            prototypes: prototypes.clone(),
            fusion: FusionConfig {
                alpha,
                ..FusionConfig::default()
            },
        };
        let report = evaluate(&episode, &model, ScoreMode::Fused)?;
        rows.push((name, report.overall));
    }
    println!("{:<14} accuracy", "row");
    for (name, accuracy) in &rows {
        println!("{:<14} {:.3}", name, accuracy);
    }
    Ok(())
}
