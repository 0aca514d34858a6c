//! Binary checkpoints: `"FKDV"`, version, grid and time header, then the
//! samples as little-endian `f64`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::SolverState;
use crate::spectral::{Field, Grid};

pub const MAGIC: &[u8; 4] = b"FKDV";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n_points: usize,
    pub half_length: f64,
    pub alpha: f64,
    pub t: f64,
    pub step_count: u64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &SolverState, alpha: f64) -> Self {
        let g = state.u.grid();
        Self {
            n_points: g.n_points(),
            half_length: g.half_length(),
            alpha,
            t: state.t,
            step_count: state.step_count,
            values: state.u.values().to_vec(),
        }
    }

    pub fn to_state(&self) -> Result<SolverState> {
        let grid = Grid::new(self.n_points, self.half_length)?;
        let u = Field::new(&grid, self.values.clone())?;
        Ok(SolverState::at(u, self.alpha, self.t, self.step_count))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_points as u64).to_le_bytes());
        for x in [self.half_length, self.alpha, self.t] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.extend_from_slice(&self.step_count.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Length { expected: HEADER_LEN, found: bytes.len() });
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format(format!("bad magic bytes {:?}", &bytes[..4])));
        }
        let word = |i: usize| -> [u8; 8] { bytes[i..i + 8].try_into().expect("8-byte slice") };
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice"));
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n_points = u64::from_le_bytes(word(8)) as usize;
        let expected = n_points
            .checked_mul(8)
            .and_then(|p| p.checked_add(HEADER_LEN))
            .ok_or_else(|| Error::Format(format!("implausible point count {n_points}")))?;
        if bytes.len() != expected {
            return Err(Error::Length { expected, found: bytes.len() });
        }
        let values = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            n_points,
            half_length: f64::from_le_bytes(word(16)),
            alpha: f64::from_le_bytes(word(24)),
            t: f64::from_le_bytes(word(32)),
            step_count: u64::from_le_bytes(word(40)),
            values,
        })
    }
}

pub fn write_snapshot(state: &SolverState, alpha: f64, path: &Path) -> Result<()> {
    fs::write(path, Snapshot::from_state(state, alpha).encode())?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    Snapshot::decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn sample() -> Snapshot {
        let g = make_grid(16, 3.0).unwrap();
        let u = Field::from_fn(&g, |x| (x * 1.3).sin() + 1e-300 * x).unwrap();
        let mut s = SolverState::new(u, 0.5);
        s.t = 0.25;
        s.step_count = 25;
        Snapshot::from_state(&s, 0.5)
    }

    #[test]
    fn header_layout() {
        let bytes = sample().encode();
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 8);
        assert_eq!(&bytes[..4], b"FKDV");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &16u64.to_le_bytes());
        assert_eq!(&bytes[40..48], &25u64.to_le_bytes());
    }

    #[test]
    fn round_trip_is_bitwise() {
        let s = sample();
        let back = Snapshot::decode(&s.encode()).unwrap();
        assert_eq!(back, s);
        for (a, b) in back.values.iter().zip(&s.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut bytes = sample().encode();
        bytes[0] = b'X';
        assert!(matches!(Snapshot::decode(&bytes), Err(Error::Format(_))));
        let mut bytes = sample().encode();
        bytes[4] = 2;
        assert!(matches!(Snapshot::decode(&bytes), Err(Error::Format(_))));
        let bytes = sample().encode();
        assert!(matches!(
            Snapshot::decode(&bytes[..bytes.len() - 3]),
            Err(Error::Length { expected: 176, found: 173 })
        ));
        assert!(matches!(Snapshot::decode(&bytes[..10]), Err(Error::Length { .. })));
    }
}
