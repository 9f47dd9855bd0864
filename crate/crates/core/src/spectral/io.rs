//! GNF1 binary field files.
//!
//! Layout: the 8 bytes `GNFIELD1`, a little-endian u32 header length, a JSON
//! header `{n, points_per_dim, box_length, domain, dtype}`, then the data as
//! little-endian complex128 pairs in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Domain, Field, Grid};
use crate::error::{GnError, Result};

pub const MAGIC: &[u8; 8] = b"GNFIELD1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    n: usize,
    points_per_dim: usize,
    box_length: f64,
    domain: Domain,
    dtype: String,
}

pub fn write_field<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let header = Header {
        n: field.grid.n,
        points_per_dim: field.grid.points,
        box_length: field.grid.length,
        domain: field.domain,
        dtype: "c128".into(),
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    let mut buf = Vec::with_capacity(field.data.len() * 16);
    for c in &field.data {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut input: R) -> Result<Field> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| GnError::Format("truncated magic".into()))?;
    if &magic != MAGIC {
        return Err(GnError::Format("bad magic, expected GNFIELD1".into()));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len).map_err(|_| GnError::Format("truncated header length".into()))?;
    let len = u32::from_le_bytes(len) as usize;
    if len > 1 << 20 {
        return Err(GnError::Format(format!("header length {len} too large")));
    }
    let mut json = vec![0u8; len];
    input.read_exact(&mut json).map_err(|_| GnError::Format("truncated header".into()))?;
    let header: Header =
        serde_json::from_slice(&json).map_err(|e| GnError::Format(format!("bad header: {e}")))?;
    if header.dtype != "c128" {
        return Err(GnError::Format(format!("unsupported dtype {}", header.dtype)));
    }
    let grid = Grid::new(header.n, header.points_per_dim, header.box_length)?;
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() != grid.len() * 16 {
        return Err(GnError::Format(format!(
            "expected {} data bytes, found {}",
            grid.len() * 16,
            raw.len()
        )));
    }
    let data = raw
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Field::from_data(grid, header.domain, data)
}

/// Writes through a sibling temp file and renames, so readers never see a
/// partial file.
pub fn save_field(field: &Field, path: &Path) -> Result<()> {
    let tmp = path.with_extension("gnf1.tmp");
    {
        let file = std::fs::File::create(&tmp)?;
        let mut w = std::io::BufWriter::new(file);
        write_field(field, &mut w)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<Field> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file))
}
