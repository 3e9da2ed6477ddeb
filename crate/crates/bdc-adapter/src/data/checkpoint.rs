//! Checksummed binary containers for trained state.
//!
//! Both the checkpoint and the prototype file share one envelope:
//!
//! ```text
//! magic (4 bytes) | version u32 | payload length u64 | payload | fnv1a64(payload) u64
//! ```
//!
//! Little-endian throughout; weights are stored as f64 so a round trip is
//! bit-exact. The version is checked before the checksum, so an outdated
//! file reports a version error rather than a checksum error, while a
//! flipped payload byte reports a checksum error.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fewshot::{FusionConfig, PrototypeSet};
use crate::head::LinearHead;
use crate::linalg::Matrix;
use crate::reduction::{Projection, ProjectionKind};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"BDCK";
pub const PROTOTYPE_MAGIC: &[u8; 4] = b"BDCP";
pub const CONTAINER_VERSION: u32 = 1;

/// Everything needed to rerun inference: the trained head, the fixed
/// projection, fusion settings, and the shot count and base seed used to
/// rebuild the support episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub head: LinearHead,
    pub projection: Projection,
    pub fusion: FusionConfig,
    pub shots: usize,
    pub seed: u64,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[derive(Default)]
struct PayloadWriter {
    bytes: Vec<u8>,
}

impl PayloadWriter {
    fn u8(&mut self, v: u8) {
        self.bytes.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes.extend_from_slice(&v.to_le_bytes());
    }
    fn matrix(&mut self, m: &Matrix) {
        self.u32(m.rows() as u32);
        self.u32(m.cols() as u32);
        for v in m.data() {
            self.f64(*v);
        }
    }
}

struct PayloadReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> PayloadReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Truncated {
                path: self.path.to_string(),
                offset: self.pos as u64,
                needed: (self.pos + n - self.bytes.len()) as u64,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.f64()?);
        }
        Matrix::from_vec(rows, cols, data)
    }
    fn finished(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

fn write_container(path: &Path, magic: &[u8; 4], payload: &[u8]) -> Result<()> {
    let mut bytes = Vec::with_capacity(payload.len() + 24);
    bytes.extend_from_slice(magic);
    bytes.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    bytes.extend_from_slice(payload);
    bytes.extend_from_slice(&fnv1a64(payload).to_le_bytes());
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    fs::write(tmp.path(), &bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read_container(path: &Path, magic: &[u8; 4], expected: &'static str) -> Result<Vec<u8>> {
    let display = path.display().to_string();
    let bytes = fs::read(path)?;
    if bytes.len() < 16 {
        return Err(Error::Truncated {
            path: display,
            offset: bytes.len() as u64,
            needed: (16 - bytes.len()) as u64,
        });
    }
    if &bytes[0..4] != magic {
        return Err(Error::BadMagic {
            path: display,
            offset: 0,
            expected,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CONTAINER_VERSION {
        return Err(Error::VersionMismatch {
            path: display,
            found: version,
            expected: CONTAINER_VERSION,
        });
    }
    let payload_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let need = 16 + payload_len + 8;
    if bytes.len() < need {
        return Err(Error::Truncated {
            path: display,
            offset: bytes.len() as u64,
            needed: (need - bytes.len()) as u64,
        });
    }
    if bytes.len() > need {
        return Err(Error::TrailingData {
            path: display,
            offset: need as u64,
        });
    }
    let payload = &bytes[16..16 + payload_len];
    let stored = u64::from_le_bytes(bytes[16 + payload_len..need].try_into().unwrap());
    let computed = fnv1a64(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch {
            path: display,
            stored,
            computed,
        });
    }
    Ok(payload.to_vec())
}

fn kind_to_byte(kind: ProjectionKind) -> u8 {
    match kind {
        ProjectionKind::RandomOrthogonal => 0,
        ProjectionKind::Pca => 1,
    }
}

fn kind_from_byte(b: u8, path: &str) -> Result<ProjectionKind> {
    match b {
        0 => Ok(ProjectionKind::RandomOrthogonal),
        1 => Ok(ProjectionKind::Pca),
        other => Err(Error::InvalidParameter(format!(
            "{}: unknown projection kind {}",
            path, other
        ))),
    }
}

pub fn save_checkpoint(path: impl AsRef<Path>, ck: &Checkpoint) -> Result<()> {
    let mut w = PayloadWriter::default();
    w.u32(ck.shots as u32);
    w.u64(ck.seed);
    w.f64(ck.fusion.alpha);
    w.f64(ck.fusion.delta);
    w.f64(ck.fusion.tau);
    w.matrix(ck.head.weights());
    w.u8(kind_to_byte(ck.projection.kind()));
    w.u32(ck.projection.in_dim() as u32);
    w.u32(ck.projection.out_dim() as u32);
    w.u64(ck.projection.seed());
    w.matrix(ck.projection.weights());
    write_container(path.as_ref(), CHECKPOINT_MAGIC, &w.bytes)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let payload = read_container(path, CHECKPOINT_MAGIC, "BDCK")?;
    let mut r = PayloadReader {
        bytes: &payload,
        pos: 0,
        path: &display,
    };
    let shots = r.u32()? as usize;
    let seed = r.u64()?;
    let fusion = FusionConfig {
        alpha: r.f64()?,
        delta: r.f64()?,
        tau: r.f64()?,
    };
    let head = LinearHead::from_weights(r.matrix()?);
    let kind = kind_from_byte(r.u8()?, &display)?;
    let in_dim = r.u32()? as usize;
    let out_dim = r.u32()? as usize;
    let proj_seed = r.u64()?;
    let weights = r.matrix()?;
    let projection = Projection::from_parts(kind, in_dim, out_dim, proj_seed, weights)?;
    if !r.finished() {
        return Err(Error::TrailingData {
            path: display.clone(),
            offset: r.pos as u64,
        });
    }
    Ok(Checkpoint {
        head,
        projection,
        fusion,
        shots,
        seed,
    })
}

pub fn save_prototypes(path: impl AsRef<Path>, protos: &PrototypeSet) -> Result<()> {
    let mut w = PayloadWriter::default();
    w.u32(protos.matrix_side() as u32);
    w.u32(protos.shots() as u32);
    w.matrix(protos.prototypes());
    write_container(path.as_ref(), PROTOTYPE_MAGIC, &w.bytes)
}

pub fn load_prototypes(path: impl AsRef<Path>) -> Result<PrototypeSet> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let payload = read_container(path, PROTOTYPE_MAGIC, "BDCP")?;
    let mut r = PayloadReader {
        bytes: &payload,
        pos: 0,
        path: &display,
    };
    let side = r.u32()? as usize;
    let shots = r.u32()? as usize;
    let prototypes = r.matrix()?;
    if !r.finished() {
        return Err(Error::TrailingData {
            path: display.clone(),
            offset: r.pos as u64,
        });
    }
    PrototypeSet::from_parts(side, shots, prototypes)
}
