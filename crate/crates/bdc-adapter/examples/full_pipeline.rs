//! The whole thing end to end, through the same code paths as the `bdc`
//! binary: generate a bank, train the head, rebuild prototypes, evaluate
//! with residual fusion, and write a line-delimited report.
//!
//! ```bash
//! cargo run --example full_pipeline
//! ```

use bdc_adapter::data::{
    generate_synthetic, load_checkpoint, read_summary, sample_episode, save_checkpoint,
    write_bank, write_manifest, write_report, Checkpoint, SynthSpec,
};
use bdc_adapter::fewshot::{
    build_prototypes, evaluate, make_training_batches, AdapterModel, FusionConfig, ScoreMode,
};
use bdc_adapter::head::{init_from_text, train, TrainConfig};
use bdc_adapter::linalg::split_seed;
use bdc_adapter::reduction::{fit_projection, ProjectionKind};

fn main() -> bdc_adapter::Result<()> {
    let dir = std::env::temp_dir().join("bdc-adapter-pipeline-example");
    std::fs::create_dir_all(&dir)?;
    let spec = SynthSpec::default();
    let seed = spec.seed;

    // 1. Generate and persist the bank.
    let (bank, manifest) = generate_synthetic(&spec)?;
    write_bank(dir.join("bank.fbnk"), &bank)?;
    write_manifest(dir.join("manifest.json"), &manifest)?;
    println!("generated {} items ({} classes)", bank.len(), spec.classes);

    // 2. Episode, projection, prototypes.
    let n = manifest.class_names.len();
    let episode = sample_episode(&bank, &manifest, spec.shots, split_seed(seed, 1))?;
    let projection = fit_projection(
        ProjectionKind::RandomOrthogonal,
        spec.map_rows,
        spec.map_rows,
        None,
        split_seed(seed, 2),
    )?;
    let prototypes = build_prototypes(&episode, &projection, true)?;

    // 3. Train the head on support embeddings plus text features.
    let (text_pool, text_labels) = bank.text_features(n)?;
    let cfg = TrainConfig {
        images_per_batch: spec.shots,
        texts_per_batch: text_pool.rows(),
        seed: split_seed(seed, 3),
        ..TrainConfig::default()
    };
    let batches = make_training_batches(&episode.support, &text_pool, &text_labels, n, &cfg)?;
    let head0 = init_from_text(&bank.class_text_matrix(n)?)?;
    let (head, trace) = train(head0, &batches, &cfg)?;
    println!(
        "trained {} epochs: loss {:.4} -> {:.4}",
        cfg.epochs,
        trace.first().unwrap(),
        trace.last().unwrap()
    );

    // 4. Persist and reload the checkpoint, then evaluate fused.
    let checkpoint = Checkpoint {
        head,
        projection,
        fusion: FusionConfig::default(),
        shots: spec.shots,
        seed,
    };
    save_checkpoint(dir.join("model.bdck"), &checkpoint)?;
    let checkpoint = load_checkpoint(dir.join("model.bdck"))?;

    let model = AdapterModel {
        projection: checkpoint.projection,
        head: checkpoint.head,
        prototypes,
        fusion: checkpoint.fusion,
    };
    let report = evaluate(&episode, &model, ScoreMode::Fused)?;
    write_report(dir.join("report.jsonl"), &report)?;
    let summary = read_summary(dir.join("report.jsonl"))?;
    println!(
        "fused accuracy {:.3} over {} queries (report at {})",
        summary.overall,
        summary.queries,
        dir.join("report.jsonl").display()
    );
    println!("confusion: {:?}", summary.confusion);
    Ok(())
}
