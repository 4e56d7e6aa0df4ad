//! Binary dump of steady-state matrices.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | rows (`u64`) |
//! | 8 | columns (`u64`) |
//! | 2 | sector label, ASCII (`ee`, `oo`, `eo`, `oe`) |
//! | 16 per entry | row-major `(re, im)` pairs of `f64` |

use std::io::{Read, Write};

use ndarray::Array2;

use super::Sector;
use crate::error::{Error, Result};
use crate::hilbert::C64;

pub fn write_steady_state<W: Write>(mut w: W, sector: Sector, m: &Array2<C64>) -> Result<()> {
    let (r, c) = m.dim();
    w.write_all(&(r as u64).to_le_bytes())?;
    w.write_all(&(c as u64).to_le_bytes())?;
    w.write_all(sector.label().as_bytes())?;
    for z in m.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_steady_state<R: Read>(mut r: R) -> Result<(Sector, Array2<C64>)> {
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let cols = u64::from_le_bytes(b8) as usize;
    let mut label = [0u8; 2];
    r.read_exact(&mut label)?;
    let sector: Sector = std::str::from_utf8(&label)
        .map_err(|_| Error::Shape("sector label is not ASCII".into()))?
        .parse()?;
    let len = rows.checked_mul(cols).ok_or_else(|| Error::Shape(format!("{rows}x{cols} overflows")))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        data.push(C64::new(re, im));
    }
    let m = Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Shape(e.to_string()))?;
    Ok((sector, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let m = Array2::from_shape_fn((2, 3), |(i, j)| C64::new(i as f64, j as f64 + 0.5));
        let mut buf = Vec::new();
        write_steady_state(&mut buf, Sector::EO, &m).unwrap();
        assert_eq!(buf.len(), 8 + 8 + 2 + 6 * 16);
        assert_eq!(&buf[0..8], &2u64.to_le_bytes());
        assert_eq!(&buf[16..18], b"eo");
        // row-major: second entry is (0, 1)
        assert_eq!(&buf[18 + 16..18 + 24], &0.0f64.to_le_bytes());
        assert_eq!(&buf[18 + 24..18 + 32], &1.5f64.to_le_bytes());
        let (s, back) = read_steady_state(buf.as_slice()).unwrap();
        assert_eq!(s, Sector::EO);
        assert_eq!(back, m);
        assert!(read_steady_state(&buf[..20]).is_err());
    }
}
