//! Flat little-endian binary format for feature vectors.
//!
//! ```text
//! "KDFV" | version u32 | tag u32 (0 Fourier, 1 Taylor) | dim u32 | rho u64 | sigma f64
//! Fourier: seed u64
//! Taylor:  tau u64 | center dim x f64
//! values:  rho x f64
//! ```

use std::io::{Read, Write};

use super::{BasisTag, FeatureVector};
use crate::constants::MAX_FEATURE_DIM;
use crate::error::{invalid, Result};

pub const MAGIC: &[u8; 4] = b"KDFV";
pub const FORMAT_VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> crate::Error {
    invalid("feature file", e.to_string())
}

pub fn write_feature_vector<W: Write>(v: &FeatureVector, mut w: W) -> Result<()> {
    let mut buf = Vec::with_capacity(64 + 8 * v.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let (tag, dim) = match &v.basis {
        BasisTag::Fourier { dim, .. } => (0u32, *dim),
        BasisTag::Taylor { center, .. } => (1u32, center.len()),
    };
    buf.extend_from_slice(&tag.to_le_bytes());
    buf.extend_from_slice(&(dim as u32).to_le_bytes());
    buf.extend_from_slice(&(v.len() as u64).to_le_bytes());
    buf.extend_from_slice(&v.basis.sigma().to_le_bytes());
    match &v.basis {
        BasisTag::Fourier { seed, .. } => buf.extend_from_slice(&seed.to_le_bytes()),
        BasisTag::Taylor { tau, center, .. } => {
            buf.extend_from_slice(&(*tau as u64).to_le_bytes());
            for c in center {
                buf.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    for x in &v.values {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

struct Cursor<R: Read>(R);

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(io_err)?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_feature_vector<R: Read>(r: R) -> Result<FeatureVector> {
    let mut c = Cursor(r);
    if &c.bytes::<4>()? != MAGIC {
        return Err(invalid("feature file", "bad magic"));
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(invalid(
            "feature file",
            format!("unsupported version {version}"),
        ));
    }
    let tag = c.u32()?;
    let dim = c.u32()? as usize;
    let rho = c.u64()?;
    if rho > MAX_FEATURE_DIM {
        return Err(invalid(
            "feature file",
            format!("rho = {rho} exceeds the cap"),
        ));
    }
    let rho = rho as usize;
    let sigma = c.f64()?;
    let basis = match tag {
        0 => BasisTag::Fourier {
            sigma,
            dim,
            rho,
            seed: c.u64()?,
        },
        1 => {
            let tau = c.u64()? as usize;
            let center = (0..dim).map(|_| c.f64()).collect::<Result<_>>()?;
            BasisTag::Taylor { sigma, tau, center }
        }
        t => return Err(invalid("feature file", format!("unknown basis tag {t}"))),
    };
    let values = (0..rho).map(|_| c.f64()).collect::<Result<_>>()?;
    let mut rest = Vec::new();
    c.0.read_to_end(&mut rest).map_err(io_err)?;
    if !rest.is_empty() {
        return Err(invalid("feature file", "trailing bytes"));
    }
    Ok(FeatureVector { values, basis })
}
