//! Binary snapshot format.
//!
//! Layout: 8-byte magic `HWSNAP01`, one endianness byte (`0` little, `1` big),
//! `dim` and `n` as u32, then `n^dim` coefficient pairs `(re, im)` as f64,
//! all in the declared byte order, in grid index order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"HWSNAP01";

pub fn write_snapshot(field: &SpectralField, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&[0u8])?;
    w.write_all(&(field.grid().dim() as u32).to_le_bytes())?;
    w.write_all(&(field.grid().n() as u32).to_le_bytes())?;
    for c in field.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<SpectralField> {
    if bytes.len() < 17 || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let big = match bytes[8] {
        0 => false,
        1 => true,
        b => return Err(Error::Format(format!("unknown endianness flag {b}"))),
    };
    let u32_at = |o: usize| {
        let a: [u8; 4] = bytes[o..o + 4].try_into().unwrap();
        if big {
            u32::from_be_bytes(a)
        } else {
            u32::from_le_bytes(a)
        }
    };
    let (dim, n) = (u32_at(9) as usize, u32_at(13) as usize);
    let grid = TorusGrid::new(dim, n).map_err(|e| Error::Format(e.to_string()))?;
    let body = &bytes[17..];
    if body.len() != grid.len() * 16 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            grid.len() * 16,
            body.len()
        )));
    }
    let f64_at = |o: usize| {
        let a: [u8; 8] = body[o..o + 8].try_into().unwrap();
        if big {
            f64::from_be_bytes(a)
        } else {
            f64::from_le_bytes(a)
        }
    };
    let coeffs = (0..grid.len())
        .map(|i| Complex64::new(f64_at(16 * i), f64_at(16 * i + 8)))
        .collect();
    SpectralField::from_coeffs(&grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.snap");
        let g = TorusGrid::two_d(8).unwrap();
        let f = SpectralField::from_fn(&g, |[x, y]| (x - 0.3 * y).sin().exp());
        write_snapshot(&f, &path).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.grid(), f.grid());
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn corrupted_input_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.snap");
        let f = SpectralField::zeros(&TorusGrid::one_d(8).unwrap());
        write_snapshot(&f, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
        bytes[0] = b'H';
        bytes.pop();
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn big_endian_payload_decodes() {
        let mut bytes = SNAPSHOT_MAGIC.to_vec();
        bytes.push(1);
        bytes.extend(1u32.to_be_bytes());
        bytes.extend(8u32.to_be_bytes());
        for i in 0..8 {
            bytes.extend((i as f64).to_be_bytes());
            bytes.extend(0f64.to_be_bytes());
        }
        let f = decode(&bytes).unwrap();
        assert_eq!(f.coeffs()[3], Complex64::new(3.0, 0.0));
    }
}
