//! Searching the residual ratio and sharpness on a validation split.
//!
//! ```bash
//! cargo run --example grid_search
//! ```

use bdc_adapter::data::{generate_synthetic, sample_episode, SynthSpec};
use bdc_adapter::fewshot::{build_prototypes, grid_search, AdapterModel, FusionConfig};
use bdc_adapter::head::init_from_text;
use bdc_adapter::linalg::split_seed;
use bdc_adapter::reduction::{fit_projection, ProjectionKind};

fn main() -> bdc_adapter::Result<()> {
    let spec = SynthSpec {
        val_per_class: 20,
        ..SynthSpec::default()
    };
    let (bank, mut manifest) = generate_synthetic(&spec)?;
    // Validate on the val split: make those items the episode queries.
    manifest.splits.test = std::mem::take(&mut manifest.splits.val);

    let episode = sample_episode(&bank, &manifest, spec.shots, split_seed(spec.seed, 1))?;
    let projection = fit_projection(
        ProjectionKind::RandomOrthogonal,
        spec.map_rows,
        spec.map_rows,
        None,
        split_seed(spec.seed, 2),
    )?;
    let prototypes = build_prototypes(&episode, &projection, true)?;
    let head = init_from_text(&bank.class_text_matrix(spec.classes)?)?;
    let model = AdapterModel {
        projection,
        head,
        prototypes,
        fusion: FusionConfig::default(),
    };

    let alphas = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
    let deltas = [0.25, 0.5, 1.0, 2.0];
    let (best, rows) = grid_search(&alphas, &deltas, &episode, &model)?;
    println!("alpha  delta  accuracy");
    for row in &rows {
        println!("{:>5}  {:>5}  {:.3}", row.alpha, row.delta, row.accuracy);
    }
    println!(
        "best: alpha = {}, delta = {} ({} configurations)",
        best.alpha,
        best.delta,
        rows.len()
    );
    Ok(())
}
