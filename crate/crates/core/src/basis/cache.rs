use super::tensor::InteractionTensor;
use super::BasisSpec;
use crate::error::{GbecError, Result};
use std::io::{Read, Write};

pub const CACHE_MAGIC: &[u8; 4] = b"GBEC";
pub const CACHE_VERSION: u32 = 1;

/// Binary layout: `"GBEC"`, version, `n_cut`, `l_max` (all `u32` little
/// endian), then every stored entry as little-endian `f64` in the order of
/// [`InteractionTensor::entries`].
pub fn write_tensor_cache<W: Write>(t: &InteractionTensor, mut w: W) -> Result<()> {
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&(t.spec.n_cut as u32).to_le_bytes())?;
    w.write_all(&(t.spec.l_max as u32).to_le_bytes())?;
    for v in t.entries() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_tensor_cache<R: Read>(mut r: R) -> Result<InteractionTensor> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(GbecError::Format("not a tensor cache (bad magic)".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CACHE_VERSION {
        return Err(GbecError::Format(format!("unsupported cache version {version}")));
    }
    let spec = BasisSpec::new(read_u32(&mut r)? as usize, read_u32(&mut r)? as usize)?;
    let n = InteractionTensor::stored_len(&spec);
    let mut buf = vec![0u8; 8 * n];
    r.read_exact(&mut buf)?;
    let entries = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    InteractionTensor::from_entries(spec, entries)
}
