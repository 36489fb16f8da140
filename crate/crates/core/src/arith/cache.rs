//! Binary cache for [`FactorTable`].
//!
//! Layout: the 4-byte magic `DSPF`, one version byte, the table limit as a
//! little-endian `u64`, then `limit + 1` little-endian `u32` entries
//! `spf[0], spf[1], ..., spf[limit]` (entries 0 and 1 are zero).

use std::io::{Read, Write};

use super::FactorTable;
use crate::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"DSPF";
pub const CACHE_VERSION: u8 = 1;

pub fn write_cache<W: Write>(table: &FactorTable, mut w: W) -> Result<()> {
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&[CACHE_VERSION])?;
    w.write_all(&table.limit().to_le_bytes())?;
    let mut buf = Vec::with_capacity(1 << 16);
    for chunk in table.raw().chunks(1 << 14) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cache<R: Read>(mut r: R, ceiling: u64) -> Result<FactorTable> {
    let mut header = [0u8; 13];
    r.read_exact(&mut header)?;
    if &header[..4] != CACHE_MAGIC {
        return Err(Error::Io("not a DSPF cache file".into()));
    }
    if header[4] != CACHE_VERSION {
        return Err(Error::Io(format!("unsupported DSPF version {}", header[4])));
    }
    let limit = u64::from_le_bytes(header[5..13].try_into().unwrap());
    if limit > ceiling {
        return Err(Error::Capacity {
            what: "cached factor table limit",
            requested: limit,
            limit: ceiling,
        });
    }
    let mut bytes = vec![0u8; (limit as usize + 1) * 4];
    r.read_exact(&mut bytes)?;
    let spf = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FactorTable::from_raw(limit, spf))
}
