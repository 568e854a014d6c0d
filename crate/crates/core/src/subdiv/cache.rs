//! On-disk cache for sample operators.
//!
//! Layout (little-endian): magic `SUBFITW\0`, `u32` version, 32-byte key,
//! `u64` rows, `u64` cols, `u64` triplet count, then `(u64 row, u64 col,
//! f64 value)` triplets. The key hashes the control connectivity together
//! with the sample list.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::sparse::SparseMatrix;

use super::operator::{LimitSurface, SampleOperator, SampleSpec};

const MAGIC: &[u8; 8] = b"SUBFITW\0";
const VERSION: u32 = 1;

pub fn operator_key(control: &TriMesh, samples: &[SampleSpec]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(control.connectivity_hash());
    h.update((samples.len() as u64).to_le_bytes());
    for s in samples {
        h.update((s.face as u64).to_le_bytes());
        for b in s.bary {
            h.update(b.to_le_bytes());
        }
    }
    h.finalize().into()
}

fn file_name(key: &[u8; 32]) -> String {
    let hex: String = key.iter().map(|b| format!("{b:02x}")).collect();
    format!("{hex}.wop")
}

pub fn write_operator(path: &Path, key: &[u8; 32], op: &SampleOperator) -> Result<()> {
    let trip = op.matrix.triplets();
    let mut buf = Vec::with_capacity(68 + trip.len() * 24);
    buf.extend_from_slice(MAGIC);
    buf.extend(VERSION.to_le_bytes());
    buf.extend_from_slice(key);
    buf.extend((op.matrix.nrows() as u64).to_le_bytes());
    buf.extend((op.matrix.ncols() as u64).to_le_bytes());
    buf.extend((trip.len() as u64).to_le_bytes());
    for (r, c, v) in trip {
        buf.extend((r as u64).to_le_bytes());
        buf.extend((c as u64).to_le_bytes());
        buf.extend(v.to_le_bytes());
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_operator(path: &Path, key: &[u8; 32]) -> Result<SampleOperator> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let mut cur = bytes.as_slice();
    let mut take = |n: usize| -> Result<&[u8]> {
        if cur.len() < n {
            return Err(Error::Cache("truncated operator file".into()));
        }
        let (a, b) = cur.split_at(n);
        cur = b;
        Ok(a)
    };
    if take(8)? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    if take(32)? != key {
        return Err(Error::Cache("connectivity hash mismatch".into()));
    }
    let mut u64_at = || -> Result<u64> { Ok(u64::from_le_bytes(take(8)?.try_into().unwrap())) };
    let nrows = u64_at()? as usize;
    let ncols = u64_at()? as usize;
    let n = u64_at()? as usize;
    let mut trip = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let r = u64_at()? as usize;
        let c = u64_at()? as usize;
        let v = f64::from_bits(u64_at()?);
        trip.push((r, c, v));
    }
    Ok(SampleOperator {
        matrix: SparseMatrix::from_triplets(nrows, ncols, &trip)?,
    })
}

/// Loads the operator from `dir` when present, otherwise builds and stores it.
pub fn load_or_build(dir: &Path, control: &TriMesh, samples: &[SampleSpec]) -> Result<SampleOperator> {
    let key = operator_key(control, samples);
    let path: PathBuf = dir.join(file_name(&key));
    if path.exists() {
        match read_operator(&path, &key) {
            Ok(op) => return Ok(op),
            Err(e) => log::warn!("ignoring operator cache {}: {e}", path.display()),
        }
    }
    let op = LimitSurface::new(control)?.sample_operator(samples)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_operator(&path, &key, &op)?;
    Ok(op)
}
