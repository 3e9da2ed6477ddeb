//! Binary feature-bank format and episode sampling.
//!
//! A bank stores L2-normalized embedding vectors, and optionally feature
//! maps, for every item — the offline stand-in for live image and text
//! encoders. Text items are distinguished by a `text:` id prefix and carry
//! the class index as their label.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic  "FBNK"  (4 bytes)
//! version        u32      (currently 1)
//! item count     u64
//! vector dim d   u32
//! map rows k     u32      (0 when no item carries a map)
//! map cols m     u32      (0 when no item carries a map)
//! per item:
//!   id length    u32, then that many UTF-8 bytes
//!   label        u32
//!   embedding    d  x f32
//!   has_map      u8       (0 or 1; must be 0 when the header says no maps)
//!   map          k*m x f32, row-major, only when has_map == 1
//! ```
//!
//! Values are stored as `f32` and widened to `f64` in memory; in-memory
//! banks are kept quantized through `f32` so `write(read(path))` is
//! byte-identical. Reads validate the magic, the version, exact length
//! arithmetic, and the unit-norm invariant (within 1e-5, the 32-bit storage
//! tolerance), each with its own error carrying a byte offset. Writes go to
//! a temporary file in the destination directory followed by an atomic
//! rename.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::fewshot::{Episode, QueryItem, SupportItem};
use crate::linalg::{l2_norm, seeded_rng, Matrix};

use super::manifest::Manifest;

pub const BANK_MAGIC: &[u8; 4] = b"FBNK";
pub const BANK_VERSION: u32 = 1;

/// Id prefix marking text-feature items.
pub const TEXT_ID_PREFIX: &str = "text:";

/// Embedding norms must satisfy `|norm - 1| <= NORM_TOLERANCE` after f32
/// quantization.
pub const NORM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct BankItem {
    pub id: String,
    pub label: u32,
    pub embedding: Vec<f64>,
    pub map: Option<Matrix>,
}

impl BankItem {
    pub fn is_text(&self) -> bool {
        self.id.starts_with(TEXT_ID_PREFIX)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBank {
    dim: usize,
    map_shape: Option<(usize, usize)>,
    items: Vec<BankItem>,
}

impl FeatureBank {
    pub fn new(dim: usize, map_shape: Option<(usize, usize)>) -> Self {
        FeatureBank {
            dim,
            map_shape,
            items: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn map_shape(&self) -> Option<(usize, usize)> {
        self.map_shape
    }

    pub fn items(&self) -> &[BankItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn find(&self, id: &str) -> Option<&BankItem> {
        self.items.iter().find(|item| item.id == id)
    }

    /// Quantize through f32 and append. The embedding must be unit-norm
    /// (within [`NORM_TOLERANCE`] after quantization) and shapes must match
    /// the bank header.
    pub fn push_item(
        &mut self,
        id: impl Into<String>,
        label: u32,
        embedding: &[f64],
        map: Option<&Matrix>,
    ) -> Result<()> {
        let id = id.into();
        if embedding.len() != self.dim {
            return Err(Error::DimMismatch {
                op: "push_item",
                lhs: format!("bank dim {}", self.dim),
                rhs: format!("embedding dim {}", embedding.len()),
            });
        }
        let quantized: Vec<f64> = embedding.iter().map(|v| *v as f32 as f64).collect();
        if !quantized.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("bank embedding"));
        }
        let norm = l2_norm(&quantized);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "embedding for {:?} has norm {} after quantization",
                id, norm
            )));
        }
        let map = match (map, self.map_shape) {
            (None, _) => None,
            (Some(_), None) => {
                return Err(Error::InvalidParameter(
                    "bank header declares no feature maps".into(),
                ))
            }
            (Some(m), Some((k, cols))) => {
                if m.shape() != (k, cols) {
                    return Err(Error::DimMismatch {
                        op: "push_item",
                        lhs: format!("map shape {}x{}", k, cols),
                        rhs: format!("{}x{}", m.rows(), m.cols()),
                    });
                }
                if !m.is_finite() {
                    return Err(Error::NonFinite("bank feature map"));
                }
                Some(m.map(|v| v as f32 as f64))
            }
        };
        self.items.push(BankItem {
            id,
            label,
            embedding: quantized,
            map,
        });
        Ok(())
    }

    /// Text features ordered by label, one row per class; errors unless
    /// every class in `0..num_classes` has at least one text item. When a
    /// class has several templates the first (bank order) is used for the
    /// per-class matrix and the rest are returned in the pool as well.
    pub fn text_features(&self, num_classes: usize) -> Result<(Matrix, Vec<usize>)> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        for class in 0..num_classes {
            let mut found = false;
            for item in self.items.iter().filter(|i| i.is_text()) {
                if item.label as usize == class {
                    rows.push(item.embedding.clone());
                    labels.push(class);
                    found = true;
                }
            }
            if !found {
                return Err(Error::Manifest(format!(
                    "no text features for class {}",
                    class
                )));
            }
        }
        Ok((Matrix::from_rows(&rows)?, labels))
    }

    /// First text feature per class, as an `N x d` matrix (head init and
    /// the zero-shot baseline).
    pub fn class_text_matrix(&self, num_classes: usize) -> Result<Matrix> {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(num_classes);
        for class in 0..num_classes {
            let item = self
                .items
                .iter()
                .find(|i| i.is_text() && i.label as usize == class)
                .ok_or_else(|| Error::Manifest(format!("no text features for class {}", class)))?;
            rows.push(item.embedding.clone());
        }
        Matrix::from_rows(&rows)
    }
}

struct CountingWriter<W: Write> {
    inner: W,
    written: u64,
}

impl<W: Write> CountingWriter<W> {
    fn put(&mut self, bytes: &[u8]) -> Result<()> {
        self.inner.write_all(bytes)?;
        self.written += bytes.len() as u64;
        Ok(())
    }
}

/// Serialize a bank. The write lands via temp-file + atomic rename so a
/// crash never leaves a partial bank at `path`.
pub fn write_bank(path: impl AsRef<Path>, bank: &FeatureBank) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = CountingWriter {
            inner: BufWriter::new(tmp.as_file_mut()),
            written: 0,
        };
        w.put(BANK_MAGIC)?;
        w.put(&BANK_VERSION.to_le_bytes())?;
        w.put(&(bank.items.len() as u64).to_le_bytes())?;
        w.put(&(bank.dim as u32).to_le_bytes())?;
        let (k, m) = bank.map_shape.unwrap_or((0, 0));
        w.put(&(k as u32).to_le_bytes())?;
        w.put(&(m as u32).to_le_bytes())?;
        for item in &bank.items {
            let id_bytes = item.id.as_bytes();
            w.put(&(id_bytes.len() as u32).to_le_bytes())?;
            w.put(id_bytes)?;
            w.put(&item.label.to_le_bytes())?;
            for v in &item.embedding {
                w.put(&(*v as f32).to_le_bytes())?;
            }
            match &item.map {
                None => w.put(&[0u8])?,
                Some(map) => {
                    w.put(&[1u8])?;
                    for v in map.data() {
                        w.put(&(*v as f32).to_le_bytes())?;
                    }
                }
            }
        }
        w.inner.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

struct BankReader<R: Read> {
    inner: R,
    offset: u64,
    path: String,
}

impl<R: Read> BankReader<R> {
    fn take(&mut self, buf: &mut [u8]) -> Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            let n = self.inner.read(&mut buf[filled..])?;
            if n == 0 {
                return Err(Error::Truncated {
                    path: self.path.clone(),
                    offset: self.offset + filled as u64,
                    needed: (buf.len() - filled) as u64,
                });
            }
            filled += n;
        }
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.take(&mut b)?;
        Ok(b[0])
    }

    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.take(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.take(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    fn f32s(&mut self, count: usize) -> Result<Vec<f64>> {
        let mut bytes = vec![0u8; count * 4];
        self.take(&mut bytes)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect())
    }

    fn at_eof(&mut self) -> Result<bool> {
        let mut b = [0u8; 1];
        Ok(self.inner.read(&mut b)? == 0)
    }
}

/// Deserialize and validate a bank.
pub fn read_bank(path: impl AsRef<Path>) -> Result<FeatureBank> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut r = BankReader {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
        path: display.clone(),
    };
    let mut magic = [0u8; 4];
    r.take(&mut magic)?;
    if &magic != BANK_MAGIC {
        return Err(Error::BadMagic {
            path: display,
            offset: 0,
            expected: "FBNK",
        });
    }
    let version = r.u32()?;
    if version != BANK_VERSION {
        return Err(Error::VersionMismatch {
            path: display,
            found: version,
            expected: BANK_VERSION,
        });
    }
    let count = r.u64()? as usize;
    let dim = r.u32()? as usize;
    let k = r.u32()? as usize;
    let m = r.u32()? as usize;
    let map_shape = if k == 0 && m == 0 {
        None
    } else if k == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "{}: header map shape {}x{} is half-empty",
            display, k, m
        )));
    } else {
        Some((k, m))
    };

    let mut bank = FeatureBank::new(dim, map_shape);
    for index in 0..count {
        let id_len = r.u32()? as usize;
        let mut id_bytes = vec![0u8; id_len];
        r.take(&mut id_bytes)?;
        let id = String::from_utf8(id_bytes).map_err(|_| Error::InvalidParameter(format!(
            "{}: item {} id is not UTF-8",
            display, index
        )))?;
        let label = r.u32()?;
        let embedding_offset = r.offset;
        let embedding = r.f32s(dim)?;
        let norm = l2_norm(&embedding);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NormViolation {
                path: display,
                index,
                norm,
                offset: embedding_offset,
            });
        }
        let has_map = r.u8()?;
        let map = match (has_map, map_shape) {
            (0, _) => None,
            (1, Some((rows, cols))) => {
                let data = r.f32s(rows * cols)?;
                Some(Matrix::from_vec(rows, cols, data)?)
            }
            (1, None) => {
                return Err(Error::InvalidParameter(format!(
                    "{}: item {} has a map but the header declares none",
                    display, index
                )))
            }
            (flag, _) => {
                return Err(Error::InvalidParameter(format!(
                    "{}: item {} has invalid map flag {}",
                    display, index, flag
                )))
            }
        };
        bank.items.push(BankItem {
            id,
            label,
            embedding,
            map,
        });
    }
    if !r.at_eof()? {
        return Err(Error::TrailingData {
            path: display,
            offset: r.offset,
        });
    }
    Ok(bank)
}

/// Draw an M-shot episode: exactly `shots` support items per class from the
/// train split, sampled without replacement under the given seed, and every
/// test-split item as a query (bank order). Items in the episode must carry
/// feature maps.
pub fn sample_episode(
    bank: &FeatureBank,
    manifest: &Manifest,
    shots: usize,
    seed: u64,
) -> Result<Episode> {
    manifest.validate(bank)?;
    let n = manifest.class_names.len();
    let mut rng = seeded_rng(seed);

    let mut by_class: Vec<Vec<&BankItem>> = vec![Vec::new(); n];
    for id in &manifest.splits.train {
        let item = bank
            .find(id)
            .ok_or_else(|| Error::Manifest(format!("train id {:?} missing from bank", id)))?;
        by_class[item.label as usize].push(item);
    }

    let mut support = Vec::with_capacity(n * shots);
    for (class, candidates) in by_class.iter().enumerate() {
        if candidates.len() < shots {
            return Err(Error::InsufficientShots {
                class,
                need: shots,
                got: candidates.len(),
            });
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.shuffle(&mut rng);
        for &idx in order.iter().take(shots) {
            let item = candidates[idx];
            support.push(SupportItem {
                label: item.label as usize,
                embedding: item.embedding.clone(),
                map: item
                    .map
                    .clone()
                    .ok_or_else(|| Error::Manifest(format!("item {:?} has no feature map", item.id)))?,
            });
        }
    }

    let mut queries = Vec::with_capacity(manifest.splits.test.len());
    for id in &manifest.splits.test {
        let item = bank
            .find(id)
            .ok_or_else(|| Error::Manifest(format!("test id {:?} missing from bank", id)))?;
        queries.push(QueryItem {
            id: item.id.clone(),
            label: item.label as usize,
            embedding: item.embedding.clone(),
            map: item
                .map
                .clone()
                .ok_or_else(|| Error::Manifest(format!("item {:?} has no feature map", item.id)))?,
        });
    }

    let episode = Episode {
        class_names: manifest.class_names.clone(),
        shots,
        support,
        queries,
    };
    episode.validate()?;
    Ok(episode)
}

/// Pool per-row samples of selected map columns across the given items:
/// one sample row per (item, map row), one sample column per selected map
/// column. Used by the dependence-statistics CLI.
pub fn column_samples(items: &[&BankItem], cols: &[usize]) -> Result<Matrix> {
    if cols.is_empty() {
        return Err(Error::Usage("no columns selected".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for item in items {
        let map = item
            .map
            .as_ref()
            .ok_or_else(|| Error::Manifest(format!("item {:?} has no feature map", item.id)))?;
        for &c in cols {
            if c >= map.cols() {
                return Err(Error::Usage(format!(
                    "column {} out of range ({} columns)",
                    c,
                    map.cols()
                )));
            }
        }
        for r in 0..map.rows() {
            rows.push(cols.iter().map(|&c| map.get(r, c)).collect());
        }
    }
    if rows.is_empty() {
        return Err(Error::Usage("no items matched the filter".into()));
    }
    Matrix::from_rows(&rows)
}
