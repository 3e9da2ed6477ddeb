//! Feature-bank, manifest and checkpoint persistence: bit-exact round
//! trips, and the distinct errors raised for corrupted inputs.
//!
//! ```bash
//! cargo run --example feature_bank_io
//! ```

use bdc_adapter::data::{
    load_checkpoint, read_bank, save_checkpoint, write_bank, Checkpoint, FeatureBank,
};
use bdc_adapter::fewshot::FusionConfig;
use bdc_adapter::head::LinearHead;
use bdc_adapter::linalg::{gaussian_matrix, l2_normalize, seeded_rng};
use bdc_adapter::reduction::{fit_projection, ProjectionKind};

fn main() -> bdc_adapter::Result<()> {
    let dir = std::env::temp_dir().join("bdc-adapter-io-example");
    std::fs::create_dir_all(&dir)?;

    // Build a small bank with maps and write it.
    let mut rng = seeded_rng(3);
    let mut bank = FeatureBank::new(4, Some((2, 3)));
    for i in 0..5 {
        let embedding = l2_normalize(gaussian_matrix(1, 4, &mut rng).row(0))?;
        let map = gaussian_matrix(2, 3, &mut rng);
        bank.push_item(format!("img:{}", i), i % 2, &embedding, Some(&map))?;
    }
    let bank_path = dir.join("demo.fbnk");
    write_bank(&bank_path, &bank)?;
    let loaded = read_bank(&bank_path)?;
    println!(
        "bank round trip: {} items, {} bytes, equal = {}",
        loaded.len(),
        std::fs::metadata(&bank_path)?.len(),
        loaded == bank
    );

    // Corrupt one embedding float and watch the reader object.
    let mut bytes = std::fs::read(&bank_path)?;
    let first_embedding = 28 + 4 + "img:0".len() + 4;
    bytes[first_embedding..first_embedding + 4].copy_from_slice(&9.0f32.to_le_bytes());
    let corrupted = dir.join("corrupted.fbnk");
    std::fs::write(&corrupted, &bytes)?;
    println!("corrupted read: {}", read_bank(&corrupted).unwrap_err());

    // Checkpoint round trip and checksum protection.
    let ck = Checkpoint {
        head: LinearHead::from_weights(gaussian_matrix(2, 4, &mut rng)),
        projection: fit_projection(ProjectionKind::RandomOrthogonal, 2, 2, None, 8)?,
        fusion: FusionConfig::default(),
        shots: 4,
        seed: 7,
    };
    let ck_path = dir.join("demo.bdck");
    save_checkpoint(&ck_path, &ck)?;
    println!(
        "checkpoint round trip equal = {}",
        load_checkpoint(&ck_path)? == ck
    );
    let mut bytes = std::fs::read(&ck_path)?;
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xFF;
    let tampered = dir.join("tampered.bdck");
    std::fs::write(&tampered, &bytes)?;
    println!("tampered read: {}", load_checkpoint(&tampered).unwrap_err());

    Ok(())
}
