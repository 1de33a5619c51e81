//! Binary snapshot files.
//!
//! Layout (little-endian): magic `VCRS`, `u32` version = 1, `u64` nx, `u64` ny,
//! `f64` time, `f64` alpha exponent, then `nx * ny` `f64` samples, row-major
//! with x fastest.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::field::ScalarField;
use super::grid::Grid;
use super::solver::SimState;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VCRS";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: u64,
    pub ny: u64,
    pub time: f64,
    pub alpha: f64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &SimState) -> Self {
        let n = state.grid().n() as u64;
        Snapshot {
            nx: n,
            ny: n,
            time: state.time(),
            alpha: state.alpha_exponent(),
            values: state.theta().values().to_vec(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.nx.to_le_bytes());
        out.extend_from_slice(&self.ny.to_le_bytes());
        out.extend_from_slice(&self.time.to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let nx = u64::from_le_bytes(take(&mut r)?);
        let ny = u64::from_le_bytes(take(&mut r)?);
        let time = f64::from_le_bytes(take(&mut r)?);
        let alpha = f64::from_le_bytes(take(&mut r)?);
        let count = nx
            .checked_mul(ny)
            .ok_or_else(|| Error::Format("dimension overflow".into()))? as usize;
        if r.len() != count * 8 {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                count * 8,
                r.len()
            )));
        }
        let values = r
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(Snapshot {
            nx,
            ny,
            time,
            alpha,
            values,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        Snapshot::from_bytes(&buf)
    }

    pub fn into_state(self) -> Result<SimState> {
        if self.nx != self.ny {
            return Err(Error::Format(format!(
                "non-square snapshot {} x {}",
                self.nx, self.ny
            )));
        }
        let grid = Grid::new(self.nx as usize)?;
        let theta = ScalarField::new(grid, self.values)?;
        SimState::at_time(theta, self.time, self.alpha)
    }
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format("truncated header".into()))
}

fn take<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    read_exact(r, &mut buf)?;
    Ok(buf)
}
