//! Human-readable JSON manifest: index-ordered class names, prompt
//! templates, and train/val/test split assignments by item id.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::bank::FeatureBank;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub class_names: Vec<String>,
    pub templates: Vec<String>,
    pub splits: Splits,
}

impl Manifest {
    /// Check that every referenced id exists in the bank, no id appears in
    /// two splits, and every bank label fits the class list.
    pub fn validate(&self, bank: &FeatureBank) -> Result<()> {
        if self.class_names.is_empty() {
            return Err(Error::Manifest("empty class list".into()));
        }
        let n = self.class_names.len() as u32;
        for item in bank.items() {
            if item.label >= n {
                return Err(Error::Manifest(format!(
                    "item {:?} has label {} but only {} classes are declared",
                    item.id, item.label, n
                )));
            }
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for (split, ids) in [
            ("train", &self.splits.train),
            ("val", &self.splits.val),
            ("test", &self.splits.test),
        ] {
            for id in ids {
                if bank.find(id).is_none() {
                    return Err(Error::Manifest(format!(
                        "{} id {:?} not present in the bank",
                        split, id
                    )));
                }
                if !seen.insert(id) {
                    return Err(Error::Manifest(format!(
                        "id {:?} appears in more than one split",
                        id
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &Manifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    #[test]
    fn manifest_round_trips() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("manifest.json");
        let m = Manifest {
            class_names: vec!["cat".into(), "dog".into()],
            templates: vec!["a photo of a".into()],
            splits: Splits {
                train: vec!["img:0:0".into()],
                val: vec![],
                test: vec!["img:0:1".into()],
            },
        };
        write_manifest(&path, &m).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), m);
    }

    #[test]
    fn validation_catches_missing_ids_and_duplicates() {
        let mut bank = FeatureBank::new(2, None);
        bank.push_item("a", 0, &[1.0, 0.0], None).unwrap();
        let mut m = Manifest {
            class_names: vec!["only".into()],
            templates: vec![],
            splits: Splits {
                train: vec!["a".into()],
                val: vec![],
                test: vec!["ghost".into()],
            },
        };
        assert!(matches!(m.validate(&bank), Err(Error::Manifest(_))));
        m.splits.test = vec!["a".into()];
        assert!(matches!(m.validate(&bank), Err(Error::Manifest(_))));
        m.splits.test = vec![];
        m.validate(&bank).unwrap();
    }

    #[test]
    fn validation_catches_label_overflow() {
        let mut bank = FeatureBank::new(2, None);
        bank.push_item("a", 5, &[1.0, 0.0], None).unwrap();
        let m = Manifest {
            class_names: vec!["only".into()],
            templates: vec![],
            splits: Splits::default(),
        };
        assert!(matches!(m.validate(&bank), Err(Error::Manifest(_))));
    }
}
