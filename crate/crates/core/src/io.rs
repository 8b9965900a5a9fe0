//! Binary field files.
//!
//! Layout, all little-endian: magic `F2D1`, `u32` version, 8 zero bytes,
//! `u32` n, `f64` L, one tag byte, then `n²` complex values as `(re, im)`
//! pairs of `f64` in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTag};

pub const MAGIC: &[u8; 4] = b"F2D1";
pub const VERSION: u32 = 1;

pub fn write_field<W: Write>(w: &mut W, f: &Field) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[0u8; 8])?;
    w.write_all(&(f.grid().n() as u32).to_le_bytes())?;
    w.write_all(&f.grid().half_width().to_le_bytes())?;
    w.write_all(&[f.tag().to_byte()])?;
    for v in f.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field<R: Read>(r: &mut R) -> Result<Field> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let tag = SpaceTag::from_byte(tag[0])
        .ok_or_else(|| Error::Format(format!("unknown tag {}", tag[0])))?;
    let grid = GridSpec::new(n, l)?;
    let mut raw = vec![0u8; grid.len() * 16];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Field::new(grid, values, tag)
}

pub fn save_field(path: impl AsRef<Path>, f: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    read_field(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_in_memory() {
        let g = GridSpec::new(8, 1.5).unwrap();
        let f = Field::from_fn(g, |z| z * z + Complex64::new(0.0, 1.0));
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 16 + 4 + 8 + 1 + 64 * 16);
        let back = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.tag(), f.tag());
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = vec![0u8; 64];
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(
            read_field(&mut bytes.as_slice()),
            Err(Error::Format(_))
        ));
    }
}
