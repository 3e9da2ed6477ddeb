//! Zero-shot classification: softmax over image/text cosine similarities
//! with a temperature, no training at all.
//!
//! ```bash
//! cargo run --example zero_shot
//! ```

use bdc_adapter::data::{generate_synthetic, SynthSpec};
use bdc_adapter::fewshot::{argmax, zero_shot_scores};

fn main() -> bdc_adapter::Result<()> {
    let spec = SynthSpec::default();
    let (bank, manifest) = generate_synthetic(&spec)?;
    let n = manifest.class_names.len();
    let text = bank.class_text_matrix(n)?;

    let mut correct = 0usize;
    let mut total = 0usize;
    for id in &manifest.splits.test {
        let item = bank.find(id).expect("manifest validated");
        let probs = zero_shot_scores(&item.embedding, &text, 0.01)?;
        if argmax(&probs) == item.label as usize {
            correct += 1;
        }
        total += 1;
        if total <= 3 {
            println!(
                "{}: true {}, predicted {}, probs {:?}",
                id,
                manifest.class_names[item.label as usize],
                manifest.class_names[argmax(&probs)],
                probs.iter().map(|p| (p * 1000.0).round() / 1000.0).collect::<Vec<_>>()
            );
        }
    }
    println!(
        "zero-shot accuracy over {} queries: {:.3}",
        total,
        correct as f64 / total as f64
    );
    Ok(())
}
