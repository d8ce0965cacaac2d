//! `PSVMMAP1` binary container for a fitted [`SdrMap`].
//!
//! All integers are little-endian `u64`, all reals little-endian IEEE-754
//! `f64`, matrices row-major:
//!
//! | field          | type             | notes                              |
//! |----------------|------------------|------------------------------------|
//! | magic          | 8 bytes          | ASCII `PSVMMAP1`                   |
//! | kernel kind    | u64              | 0 = gaussian, 1 = linear           |
//! | gamma          | f64              | 0.0 for the linear kernel          |
//! | standardize    | u64              | 0 or 1                             |
//! | n, p, k, d     | 4 × u64          | training size, input dim, basis, output dim |
//! | training       | n·p × f64        | points as the kernel sees them     |
//! | col_means      | p × f64          |                                    |
//! | col_sds        | p × f64          | population convention              |
//! | eigenvalues    | k × f64          | descending                         |
//! | psi            | n·k × f64        | eigenbasis                         |
//! | directions     | k·d × f64        | principal directions               |
//!
//! Nothing follows the last field. Per-slice fit diagnostics are not stored.

use std::io::{Read, Write};

use ndarray::Array2;

use super::SdrMap;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

pub const MAGIC: &[u8; 8] = b"PSVMMAP1";

pub fn write_map<W: Write>(map: &SdrMap, mut w: W) -> Result<()> {
    let (n, p) = map.training.dim();
    let (k, d) = map.directions.dim();
    w.write_all(MAGIC)?;
    let (kind, gamma) = match map.kernel {
        KernelSpec::Gaussian { gamma } => (0u64, gamma),
        KernelSpec::Linear => (1u64, 0.0),
    };
    let mut buf = Vec::with_capacity(8 * (8 + n * p + 2 * p + k + n * k + k * d));
    buf.extend_from_slice(&kind.to_le_bytes());
    buf.extend_from_slice(&gamma.to_le_bytes());
    for v in [map.standardize as u64, n as u64, p as u64, k as u64, d as u64] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut put = |xs: &mut dyn Iterator<Item = f64>| {
        for x in xs {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    };
    put(&mut map.training.iter().copied());
    put(&mut map.col_means.iter().copied());
    put(&mut map.col_sds.iter().copied());
    put(&mut map.eigenvalues.iter().copied());
    put(&mut map.psi.iter().copied());
    put(&mut map.directions.iter().copied());
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take8(&mut self, what: &str) -> Result<[u8; 8]> {
        let end = self.pos + 8;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format(format!("truncated while reading {what}")))?;
        self.pos = end;
        Ok(chunk.try_into().expect("8 bytes"))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take8(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take8(what)?))
    }

    fn reals(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let remaining = (self.bytes.len() - self.pos) / 8;
        if count > remaining {
            return Err(Error::Format(format!("truncated while reading {what}")));
        }
        (0..count).map(|_| self.f64(what)).collect()
    }
}

pub fn read_map<R: Read>(mut r: R) -> Result<SdrMap> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::Format("missing PSVMMAP1 magic header".into()));
    }
    let mut c = Cursor { bytes: &bytes, pos: 8 };
    let kernel = match c.u64("kernel kind")? {
        0 => KernelSpec::gaussian(c.f64("gamma")?)?,
        1 => {
            c.f64("gamma")?;
            KernelSpec::Linear
        }
        other => return Err(Error::Format(format!("unknown kernel kind {other}"))),
    };
    let standardize = match c.u64("standardize flag")? {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad standardize flag {other}"))),
    };
    let dims: Vec<usize> = ["n", "p", "k", "d"]
        .iter()
        .map(|w| c.u64(w).map(|v| v as usize))
        .collect::<Result<_>>()?;
    let (n, p, k, d) = (dims[0], dims[1], dims[2], dims[3]);
    if n == 0 || p == 0 || k == 0 || d == 0 || k > n || d > k {
        return Err(Error::Format(format!("inconsistent dimensions n={n} p={p} k={k} d={d}")));
    }
    let matrix = |rows: usize, cols: usize, data: Vec<f64>| {
        Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Format(e.to_string()))
    };
    let training = matrix(n, p, c.reals(n * p, "training points")?)?;
    let col_means = c.reals(p, "column means")?;
    let col_sds = c.reals(p, "column sds")?;
    let eigenvalues = c.reals(k, "eigenvalues")?;
    let psi = matrix(n, k, c.reals(n * k, "eigenbasis")?)?;
    let directions = matrix(k, d, c.reals(k * d, "directions")?)?;
    if c.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    if eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Format("eigenvalues must be positive".into()));
    }
    Ok(SdrMap {
        kernel,
        training,
        standardize,
        col_means,
        col_sds,
        eigenvalues,
        psi,
        directions,
        slices: Vec::new(),
        basis_truncated: false,
        directions_truncated: false,
    })
}
