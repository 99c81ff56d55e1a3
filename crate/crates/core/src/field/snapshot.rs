//! `ZKF1` field snapshots.
//!
//! Layout (little endian): the magic bytes `ZKF1`, `u32` N, `f64` L, `u8`
//! kind (0 real, 1 complex), then the `N²` samples row-major as `f64`, or as
//! `(re, im)` pairs for complex fields.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{ComplexField, Grid2D, RealField};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"ZKF1";

#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Real(RealField),
    Complex(ComplexField),
}

impl Snapshot {
    pub fn grid(&self) -> &Grid2D {
        match self {
            Snapshot::Real(f) => f.grid(),
            Snapshot::Complex(f) => f.grid(),
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let grid = self.grid();
        w.write_all(MAGIC)?;
        w.write_all(&(grid.n() as u32).to_le_bytes())?;
        w.write_all(&grid.length().to_le_bytes())?;
        match self {
            Snapshot::Real(f) => {
                w.write_all(&[0u8])?;
                for v in f.values() {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            Snapshot::Complex(f) => {
                w.write_all(&[1u8])?;
                for z in f.values() {
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Snapshot(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let length = f64::from_le_bytes(b8);
        let mut kind = [0u8; 1];
        r.read_exact(&mut kind)?;
        let grid = Grid2D::new(n, length).map_err(|e| Error::Snapshot(e.to_string()))?;
        let mut next = || -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        match kind[0] {
            0 => {
                let values = (0..grid.len()).map(|_| next()).collect::<Result<Vec<_>>>()?;
                Ok(Snapshot::Real(RealField::new(grid, values)?))
            }
            1 => {
                let values = (0..grid.len())
                    .map(|_| Ok(Complex64::new(next()?, next()?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Snapshot::Complex(ComplexField::new(grid, values)?))
            }
            k => Err(Error::Snapshot(format!("unknown kind byte {k}"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn into_real(self) -> Result<RealField> {
        match self {
            Snapshot::Real(f) => Ok(f),
            Snapshot::Complex(_) => Err(Error::Snapshot("expected a real field".into())),
        }
    }

    pub fn into_complex(self) -> Result<ComplexField> {
        match self {
            Snapshot::Complex(f) => Ok(f),
            Snapshot::Real(_) => Err(Error::Snapshot("expected a complex field".into())),
        }
    }
}

impl From<RealField> for Snapshot {
    fn from(f: RealField) -> Self {
        Snapshot::Real(f)
    }
}

impl From<ComplexField> for Snapshot {
    fn from(f: ComplexField) -> Self {
        Snapshot::Complex(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid2D::new(16, 2.5).unwrap();
        let f = RealField::from_fn(&g, |a, b| a - 2.0 * b);
        let mut buf = Vec::new();
        Snapshot::from(f).write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"ZKF1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 2.5);
        assert_eq!(buf[16], 0);
        assert_eq!(buf.len(), 17 + 8 * 256);
        assert_eq!(f64::from_le_bytes(buf[17..25].try_into().unwrap()), -1.25 + 2.5);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Snapshot::read_from(&b"ZKF2\0\0\0\0"[..]).is_err());
        let g = Grid2D::new(16, 1.0).unwrap();
        let mut buf = Vec::new();
        Snapshot::from(RealField::zeros(&g)).write_to(&mut buf).unwrap();
        buf[16] = 7;
        assert!(Snapshot::read_from(&buf[..]).is_err());
        buf.truncate(100);
        assert!(Snapshot::read_from(&buf[..]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), complex in any::<bool>(), len in 0.5f64..100.0) {
            let g = Grid2D::new(16, len).unwrap();
            let s = seed as f64 * 1e-19;
            let snap = if complex {
                Snapshot::from(ComplexField::from_fn(&g, |a, b| Complex64::new(a * s + b, (a * b).sin())))
            } else {
                Snapshot::from(RealField::from_fn(&g, |a, b| (a + s).exp() - b))
            };
            let mut buf = Vec::new();
            snap.write_to(&mut buf).unwrap();
            let back = Snapshot::read_from(&buf[..]).unwrap();
            prop_assert_eq!(back, snap);
        }
    }
}
