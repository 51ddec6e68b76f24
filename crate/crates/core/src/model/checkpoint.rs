//! Checkpoint format: a fixed little-endian binary layout that round-trips
//! the network bit-for-bit at `f32` precision.
//!
//! Layout: `"FERM"` magic, `u32` version, an 8-byte architecture
//! fingerprint (the leading bytes of a SHA-256 over the sorted parameter
//! name/shape listing), then one entry per tensor in sorted name order:
//! `u32` name length, UTF-8 name, `u32` rank, `u32` dims, raw `f32` data.
//! The architecture preset is inferred from the fingerprint on load, so a
//! checkpoint is self-describing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{FerError, Result};
use crate::scalar::Scalar;

use super::network::{ArchPreset, FerNetwork};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"FERM";
pub const CHECKPOINT_VERSION: u32 = 1;

fn fingerprint(shapes: &[(String, Vec<usize>)]) -> [u8; 8] {
    let mut hasher = Sha256::new();
    for (name, shape) in shapes {
        hasher.update((name.len() as u32).to_le_bytes());
        hasher.update(name.as_bytes());
        hasher.update((shape.len() as u32).to_le_bytes());
        for &d in shape {
            hasher.update((d as u32).to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    out
}

/// Serialize every named tensor of the network to `path`. Writing the same
/// network twice produces identical bytes.
pub fn save_checkpoint<F: Scalar>(net: &FerNetwork<F>, path: &Path) -> Result<()> {
    let params = net.named_params();
    let shapes: Vec<(String, Vec<usize>)> =
        params.iter().map(|(n, t)| (n.clone(), t.shape().to_vec())).collect();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&fingerprint(&shapes))?;
    for (name, tensor) in &params {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(tensor.rank() as u32).to_le_bytes())?;
        for &d in tensor.shape() {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for &v in tensor.data() {
            w.write_all(&(v.to_f64() as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

struct Entry {
    name: String,
    shape: Vec<usize>,
    data: Vec<f32>,
}

fn read_entry(r: &mut impl Read) -> Result<Option<Entry>> {
    let mut len_buf = [0u8; 4];
    match r.read_exact(&mut len_buf) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let name_len = u32::from_le_bytes(len_buf) as usize;
    let mut name_buf = vec![0u8; name_len];
    r.read_exact(&mut name_buf)?;
    let name = String::from_utf8(name_buf)
        .map_err(|_| FerError::Checkpoint("parameter name is not UTF-8".to_string()))?;
    let rank = read_u32(r)? as usize;
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        shape.push(read_u32(r)? as usize);
    }
    let count: usize = shape.iter().product();
    if shape.iter().any(|&d| d == 0) || count == 0 {
        return Err(FerError::Checkpoint(format!("{name} has an empty shape {shape:?}")));
    }
    let mut data = vec![0f32; count];
    let mut byte_buf = vec![0u8; count * 4];
    r.read_exact(&mut byte_buf).map_err(|_| {
        FerError::Checkpoint(format!("{name}: checkpoint truncated mid-tensor"))
    })?;
    for (v, chunk) in data.iter_mut().zip(byte_buf.chunks_exact(4)) {
        *v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
    }
    Ok(Some(Entry { name, shape, data }))
}

/// Load a checkpoint, inferring the architecture preset from the stored
/// fingerprint. Rejects unknown magic/version, fingerprints that match no
/// known preset, and any entry list that disagrees with the fingerprint.
pub fn load_checkpoint<F: Scalar>(path: &Path) -> Result<FerNetwork<F>> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(FerError::Checkpoint(format!(
            "bad magic {magic:?}; not a checkpoint file"
        )));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(FerError::Checkpoint(format!(
            "unsupported version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let mut stored_fp = [0u8; 8];
    r.read_exact(&mut stored_fp)?;

    let mut entries = Vec::new();
    while let Some(e) = read_entry(&mut r)? {
        if let Some(last) = entries.last() {
            let last: &Entry = last;
            if e.name <= last.name {
                return Err(FerError::Checkpoint(format!(
                    "entries out of order: {:?} after {:?}",
                    e.name, last.name
                )));
            }
        }
        entries.push(e);
    }

    let listed: Vec<(String, Vec<usize>)> =
        entries.iter().map(|e| (e.name.clone(), e.shape.clone())).collect();
    if fingerprint(&listed) != stored_fp {
        return Err(FerError::Checkpoint(
            "stored fingerprint does not match the entry list".to_string(),
        ));
    }

    let preset = [ArchPreset::Full, ArchPreset::Tiny]
        .into_iter()
        .find(|p| fingerprint(&p.parameter_shapes()) == stored_fp)
        .ok_or_else(|| {
            FerError::Checkpoint("fingerprint matches no known architecture".to_string())
        })?;

    let mut net = FerNetwork::<F>::new(preset, 0)?;
    {
        let mut params = net.named_params_mut();
        debug_assert_eq!(params.len(), entries.len());
        for ((name, tensor), entry) in params.iter_mut().zip(&entries) {
            if *name != entry.name || tensor.shape() != entry.shape.as_slice() {
                return Err(FerError::Checkpoint(format!(
                    "entry {} does not match network parameter {name}",
                    entry.name
                )));
            }
            for (dst, &src) in tensor.data_mut().iter_mut().zip(&entry.data) {
                *dst = F::from_f64(src as f64);
            }
        }
    }
    Ok(net)
}
