//! Versioned little-endian container shared by every sketch file.
//!
//! ```text
//! magic   4 bytes  "HSK1"
//! version u16      FORMAT_VERSION
//! tag     4 bytes  sketch type ("HSKM", "HSKO", "HSKD", "HSKB", "HSKQ")
//! body    ...      sketch-specific, little-endian
//! ```
//!
//! The byte layout of each body is documented in `docs/formats.md`.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{HskError, Result};
use crate::sampler::{Coins, KeepSmallest, LevelSampleBank, Tagged};
use crate::types::{Power, SketchParams};

pub const MAGIC: &[u8; 4] = b"HSK1";
pub const FORMAT_VERSION: u16 = 1;

/// A sketch with a binary body inside the shared container.
pub trait SketchCodec: Sized {
    const TAG: [u8; 4];

    fn write_body<W: Write>(&self, w: &mut W) -> Result<()>;

    fn read_body<R: Read>(r: &mut R) -> Result<Self>;

    fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.write_all(MAGIC)?;
        out.write_u16::<LittleEndian>(FORMAT_VERSION)?;
        out.write_all(&Self::TAG)?;
        self.write_body(&mut out)?;
        Ok(out)
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let tag = read_header(&mut r)?;
        if tag != Self::TAG {
            return Err(HskError::Format(format!(
                "type tag {:?}, expected {:?}",
                String::from_utf8_lossy(&tag),
                String::from_utf8_lossy(&Self::TAG)
            )));
        }
        let v = Self::read_body(&mut r)?;
        if !r.is_empty() {
            return Err(HskError::Format(format!("{} trailing bytes", r.len())));
        }
        Ok(v)
    }
}

/// Reads magic and version; returns the type tag.
pub fn read_header<R: Read>(r: &mut R) -> Result<[u8; 4]> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(HskError::Format("bad magic".into()));
    }
    let version = r.read_u16::<LittleEndian>().map_err(truncated)?;
    if version != FORMAT_VERSION {
        return Err(HskError::Format(format!("unsupported format version {version}")));
    }
    let mut tag = [0u8; 4];
    r.read_exact(&mut tag).map_err(truncated)?;
    Ok(tag)
}

/// Type tag of a serialized sketch without decoding the body.
pub fn peek_tag(bytes: &[u8]) -> Result<[u8; 4]> {
    let mut r = bytes;
    read_header(&mut r)
}

pub(crate) fn truncated(e: std::io::Error) -> HskError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        HskError::Format("truncated input".into())
    } else {
        HskError::Io(e)
    }
}

pub(crate) fn put_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    Ok(w.write_f64::<LittleEndian>(v)?)
}

pub(crate) fn put_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    Ok(w.write_u64::<LittleEndian>(v)?)
}

pub(crate) fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    Ok(w.write_u32::<LittleEndian>(v)?)
}

pub(crate) fn put_u8<W: Write>(w: &mut W, v: u8) -> Result<()> {
    Ok(w.write_u8(v)?)
}

pub(crate) fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    r.read_f64::<LittleEndian>().map_err(truncated)
}

pub(crate) fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    r.read_u64::<LittleEndian>().map_err(truncated)
}

pub(crate) fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    r.read_u32::<LittleEndian>().map_err(truncated)
}

pub(crate) fn get_u8<R: Read>(r: &mut R) -> Result<u8> {
    r.read_u8().map_err(truncated)
}

pub(crate) fn get_bool<R: Read>(r: &mut R) -> Result<bool> {
    match get_u8(r)? {
        0 => Ok(false),
        1 => Ok(true),
        b => Err(HskError::Format(format!("bad flag byte {b}"))),
    }
}

/// Guards length prefixes against absurd allocations from corrupt input.
pub(crate) fn get_len<R: Read>(r: &mut R) -> Result<usize> {
    let n = get_u64(r)?;
    if n > (1 << 40) {
        return Err(HskError::Format(format!("implausible length {n}")));
    }
    Ok(n as usize)
}

pub(crate) fn put_params<W: Write>(w: &mut W, p: &SketchParams) -> Result<()> {
    put_f64(w, p.epsilon)?;
    put_u64(w, p.w)?;
    put_u64(w, p.n_hint)?;
    put_f64(w, p.c1)?;
    put_f64(w, p.c2)?;
    put_f64(w, p.c)?;
    put_u8(w, p.p.as_u8())?;
    put_u64(w, p.seed)
}

pub(crate) fn get_params<R: Read>(r: &mut R) -> Result<SketchParams> {
    Ok(SketchParams {
        epsilon: get_f64(r)?,
        w: get_u64(r)?,
        n_hint: get_u64(r)?,
        c1: get_f64(r)?,
        c2: get_f64(r)?,
        c: get_f64(r)?,
        p: Power::from_u8(get_u8(r)?)?,
        seed: get_u64(r)?,
    })
}

pub(crate) fn put_tagged<W: Write>(w: &mut W, entries: &[Tagged]) -> Result<()> {
    put_u64(w, entries.len() as u64)?;
    for t in entries {
        put_f64(w, t.value)?;
        put_u64(w, t.index)?;
    }
    Ok(())
}

pub(crate) fn get_tagged<R: Read>(r: &mut R) -> Result<Vec<Tagged>> {
    let n = get_len(r)?;
    let mut v = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let value = get_f64(r)?;
        let index = get_u64(r)?;
        v.push(Tagged { value, index });
    }
    Ok(v)
}

pub(crate) fn put_bank<W: Write>(w: &mut W, bank: &LevelSampleBank) -> Result<()> {
    put_u64(w, bank.coins().key())?;
    put_u8(w, bank.nested() as u8)?;
    put_u64(w, bank.offered())?;
    put_u64(w, bank.capacity() as u64)?;
    put_u32(w, bank.num_levels() as u32)?;
    for level in bank.levels() {
        put_tagged(w, &level.sorted())?;
    }
    Ok(())
}

pub(crate) fn get_bank<R: Read>(r: &mut R) -> Result<LevelSampleBank> {
    let coins = Coins::from_key(get_u64(r)?);
    let nested = get_bool(r)?;
    let offered = get_u64(r)?;
    let capacity = get_len(r)?;
    let n_levels = get_u32(r)? as usize;
    if n_levels > 128 {
        return Err(HskError::Format(format!("implausible level count {n_levels}")));
    }
    let mut levels = Vec::with_capacity(n_levels);
    for _ in 0..n_levels {
        let entries = get_tagged(r)?;
        if entries.len() > capacity {
            return Err(HskError::Format("level buffer exceeds capacity".into()));
        }
        levels.push(KeepSmallest::from_sorted(capacity, entries));
    }
    Ok(LevelSampleBank::from_parts(coins, nested, offered, levels))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Blob(Vec<f64>);

    impl SketchCodec for Blob {
        const TAG: [u8; 4] = *b"TEST";

        fn write_body<W: Write>(&self, w: &mut W) -> Result<()> {
            put_u64(w, self.0.len() as u64)?;
            self.0.iter().try_for_each(|&x| put_f64(w, x))
        }

        fn read_body<R: Read>(r: &mut R) -> Result<Self> {
            let n = get_len(r)?;
            Ok(Blob((0..n).map(|_| get_f64(r)).collect::<Result<_>>()?))
        }
    }

    #[test]
    fn header_layout() {
        let bytes = Blob(vec![1.5]).to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"HSK1");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..10], b"TEST");
        assert_eq!(peek_tag(&bytes).unwrap(), *b"TEST");
        assert_eq!(Blob::from_bytes(&bytes).unwrap().0, vec![1.5]);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = Blob(vec![1.0, 2.0]).to_bytes().unwrap();
        assert!(Blob::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Blob::from_bytes(&bad).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(Blob::from_bytes(&extra).is_err());
    }
}
