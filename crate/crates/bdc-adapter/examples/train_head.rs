//! Training the one-layer reasoning head: text-feature initialization,
//! mixed image/text batches, cross-entropy with analytic gradients, and
//! the cosine-annealed decoupled-weight-decay optimizer.
//!
//! ```bash
//! cargo run --example train_head
//! ```

use bdc_adapter::data::{generate_synthetic, sample_episode, SynthSpec};
use bdc_adapter::fewshot::make_training_batches;
use bdc_adapter::head::{cosine_lr, init_from_text, train, TrainConfig};
use bdc_adapter::linalg::split_seed;

fn main() -> bdc_adapter::Result<()> {
    let spec = SynthSpec::default();
    let (bank, manifest) = generate_synthetic(&spec)?;
    let episode = sample_episode(&bank, &manifest, spec.shots, split_seed(spec.seed, 1))?;

    let n = manifest.class_names.len();
    let (text_pool, text_labels) = bank.text_features(n)?;
    let head = init_from_text(&bank.class_text_matrix(n)?)?;

    let cfg = TrainConfig {
        epochs: 30,
        base_lr: 1e-3,
        images_per_batch: spec.shots,
        texts_per_batch: text_pool.rows(),
        seed: split_seed(spec.seed, 3),
        ..TrainConfig::default()
    };
    let batches = make_training_batches(&episode.support, &text_pool, &text_labels, n, &cfg)?;
    println!(
        "{} batches/epoch of {} images + {} texts",
        batches.len(),
        cfg.images_per_batch,
        cfg.texts_per_batch
    );
    let total_steps = cfg.epochs * batches.len();
    println!(
        "cosine schedule: lr {:.2e} -> {:.2e} -> {:.2e} over {} steps",
        cosine_lr(cfg.base_lr, 0, total_steps),
        cosine_lr(cfg.base_lr, total_steps / 2, total_steps),
        cosine_lr(cfg.base_lr, total_steps, total_steps),
        total_steps
    );

    let (trained, trace) = train(head, &batches, &cfg)?;
    for (epoch, loss) in trace.iter().enumerate() {
        if epoch % 5 == 0 || epoch + 1 == trace.len() {
            println!("epoch {:>2}: mean batch loss {:.6}", epoch, loss);
        }
    }
    println!(
        "trained head: {} classes x {} dims, weight norm {:.4}",
        trained.num_classes(),
        trained.dim(),
        trained.weights().frobenius_norm()
    );
    Ok(())
}
