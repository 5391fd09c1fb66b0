//! Binary field snapshots.
//!
//! Layout (all little-endian):
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `CBFF`                              |
//! | 4     | format version, `u32` (currently 1)       |
//! | 4     | dimension `n`, `u32`                      |
//! | 4     | modes per axis `N`, `u32`                 |
//! | 8     | period `L`, IEEE-754 `f64`                |
//! | ...   | `N^n` lattice sites in row-major FFT order, each holding `n` complex coefficients as `(re, im)` `f64` pairs |

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::SpectralVelocity;
use super::grid::TorusGrid;
use super::ops;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CBFF";
pub const VERSION: u32 = 1;

pub fn encode(u: &SpectralVelocity) -> Vec<u8> {
    let grid = u.grid();
    let len = grid.lattice_len();
    let mut out = Vec::with_capacity(24 + 16 * grid.coeff_len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.modes() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    for idx in 0..len {
        for c in 0..grid.dim() {
            let z = u.coeffs()[c * len + idx];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Decodes a snapshot; the dealias factor is not part of the format and is
/// supplied by the caller.
pub fn decode(bytes: &[u8], dealias_factor: f64) -> Result<SpectralVelocity> {
    let mut cur = bytes;
    let mut magic = [0u8; 4];
    read_exact(&mut cur, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut cur)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut cur)? as usize;
    let modes = read_u32(&mut cur)? as usize;
    let length = read_f64(&mut cur)?;
    let grid = TorusGrid::new(dim, length, modes, dealias_factor)?;
    let len = grid.lattice_len();
    if cur.len() != 16 * grid.coeff_len() {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            16 * grid.coeff_len(),
            cur.len()
        )));
    }
    let mut raw = vec![Complex64::default(); grid.coeff_len()];
    for idx in 0..len {
        for c in 0..dim {
            let re = read_f64(&mut cur)?;
            let im = read_f64(&mut cur)?;
            raw[c * len + idx] = Complex64::new(re, im);
        }
    }
    ops::leray_project(grid, raw)
}

pub fn write_file(path: &Path, u: &SpectralVelocity) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(u))?;
    Ok(())
}

pub fn read_file(path: &Path, dealias_factor: f64) -> Result<SpectralVelocity> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes, dealias_factor)
}

fn read_exact(cur: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    cur.read_exact(buf)
        .map_err(|_| Error::Format("truncated snapshot".into()))
}

fn read_u32(cur: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(cur, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(cur: &mut &[u8]) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(cur, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let grid = TorusGrid::new(2, 1.5, 8, 1.5).unwrap();
        let u = SpectralVelocity::random_smooth(grid, 1, 2.0, 2.0, 1.0).unwrap();
        let bytes = encode(&u);
        assert_eq!(&bytes[0..4], b"CBFF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 1.5);
        assert_eq!(bytes.len(), 24 + 16 * 2 * 64);
        // site (0, 1), component 0 sits right after site (0, 0)'s two components
        let idx = grid.index_of([0, 1, 0]).unwrap();
        assert_eq!(idx, 1);
        let re = f64::from_le_bytes(bytes[24 + 32..24 + 40].try_into().unwrap());
        assert_eq!(re, u.coeffs()[idx].re);
    }

    #[test]
    fn rejects_corrupt_input() {
        let grid = TorusGrid::periodic_2pi(2, 8).unwrap();
        let u = SpectralVelocity::zeros(grid);
        let mut bytes = encode(&u);
        assert!(decode(&bytes[..bytes.len() - 1], 1.5).is_err());
        bytes[0] = b'X';
        assert!(decode(&bytes, 1.5).is_err());
    }
}
