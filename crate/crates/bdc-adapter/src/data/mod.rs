//! Persistence and data plumbing: the binary feature-bank format, the JSON
//! manifest, checksummed checkpoint and prototype files, episode sampling,
//! the synthetic dependence-structured generator, and line-delimited
//! evaluation reports.

pub mod bank;
pub mod checkpoint;
pub mod manifest;
pub mod report;
pub mod synth;

pub use bank::{read_bank, sample_episode, write_bank, BankItem, FeatureBank, TEXT_ID_PREFIX};
pub use checkpoint::{
    load_checkpoint, load_prototypes, save_checkpoint, save_prototypes, Checkpoint,
};
pub use manifest::{read_manifest, write_manifest, Manifest, Splits};
pub use report::{read_summary, write_report, SummaryRecord};
pub use synth::{generate_synthetic, SynthSpec};
