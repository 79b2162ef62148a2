//! Binary solver snapshots.
//!
//! Little-endian layout: magic `GCHS`, version `u32`, `N` as `u64`, `L` as
//! `f64`, `t` as `f64`, `k` and `p` as `u32`, `b` as `f64`, then the `N`
//! samples as `f64`.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::model::ModelParams;
use crate::spectral::{Field, GridSpec};
use crate::timestepper::SolverState;

pub const MAGIC: [u8; 4] = *b"GCHS";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 4 + 4 + 8;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not a snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("snapshot truncated: {found} bytes, expected {expected}")]
    Truncated { found: usize, expected: usize },
    #[error("snapshot has {0} trailing bytes")]
    Trailing(usize),
    #[error("invalid snapshot contents: {0}")]
    Invalid(String),
}

/// Decoded snapshot: the solver state and the model tuple it was taken under.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: SolverState,
    pub k: u32,
    pub p: u32,
    pub b: f64,
}

impl Snapshot {
    pub fn new(state: SolverState, params: &ModelParams) -> Self {
        Self {
            state,
            k: params.k(),
            p: params.p(),
            b: params.b(),
        }
    }

    /// Whether `params` has the same `(k, p, b)`; `g` is not recorded.
    pub fn matches(&self, params: &ModelParams) -> bool {
        self.k == params.k() && self.p == params.p() && self.b.to_bits() == params.b().to_bits()
    }
}

pub fn encode(snapshot: &Snapshot) -> Vec<u8> {
    let u = &snapshot.state.u;
    let grid = u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.n_points());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n_points() as u64).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&snapshot.state.t.to_le_bytes());
    out.extend_from_slice(&snapshot.k.to_le_bytes());
    out.extend_from_slice(&snapshot.p.to_le_bytes());
    out.extend_from_slice(&snapshot.b.to_le_bytes());
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const W: usize>(&mut self) -> [u8; W] {
        let out = self.bytes[self.pos..self.pos + W]
            .try_into()
            .expect("length checked");
        self.pos += W;
        out
    }
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        return Err(SnapshotError::Truncated {
            found: bytes.len(),
            expected: HEADER_LEN,
        });
    }
    let mut r = Reader { bytes, pos: 0 };
    if r.take::<4>() != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u32::from_le_bytes(r.take());
    if version != VERSION {
        return Err(SnapshotError::Version { found: version });
    }
    let n = u64::from_le_bytes(r.take());
    let length = f64::from_le_bytes(r.take());
    let t = f64::from_le_bytes(r.take());
    let k = u32::from_le_bytes(r.take());
    let p = u32::from_le_bytes(r.take());
    let b = f64::from_le_bytes(r.take());
    let expected = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(8))
        .and_then(|d| d.checked_add(HEADER_LEN))
        .ok_or_else(|| SnapshotError::Invalid(format!("point count {n} too large")))?;
    if bytes.len() < expected {
        return Err(SnapshotError::Truncated {
            found: bytes.len(),
            expected,
        });
    }
    if bytes.len() > expected {
        return Err(SnapshotError::Trailing(bytes.len() - expected));
    }
    let grid =
        GridSpec::new(n as usize, length).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    if !t.is_finite() {
        return Err(SnapshotError::Invalid(format!("time {t} is not finite")));
    }
    let values = (0..n).map(|_| f64::from_le_bytes(r.take())).collect();
    let u = Field::new(grid, values).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    Ok(Snapshot {
        state: SolverState::at(t, u),
        k,
        p,
        b,
    })
}

pub fn write_snapshot(snapshot: &Snapshot, path: &Path) -> Result<(), SnapshotError> {
    fs::write(path, encode(snapshot))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;

    fn sample() -> Snapshot {
        let g = GridSpec::new(16, 3.5).unwrap();
        let u = Field::from_fn(g, |x| (x * 1.7).sin() * 1e-3 + x);
        Snapshot::new(SolverState::at(0.125, u), &Preset::Novikov.params())
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let bytes = encode(&s);
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 8);
        assert_eq!(&bytes[..4], b"GCHS");
        let back = decode(&bytes).unwrap();
        assert_eq!(back, s);
        assert!(back.matches(&Preset::Novikov.params()));
        assert!(!back.matches(&Preset::CamassaHolm.params()));
    }

    #[test]
    fn rejects_damaged_files() {
        let bytes = encode(&sample());
        let err = decode(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
        assert!(decode(&bytes[..10])
            .unwrap_err()
            .to_string()
            .contains("truncated"));
        let mut wrong = bytes.clone();
        wrong[4] = 2;
        assert!(matches!(
            decode(&wrong),
            Err(SnapshotError::Version { found: 2 })
        ));
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(decode(&wrong), Err(SnapshotError::BadMagic)));
        let mut long = bytes;
        long.push(0);
        assert!(matches!(decode(&long), Err(SnapshotError::Trailing(1))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.gchs");
        write_snapshot(&sample(), &path).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), sample());
        assert!(matches!(
            read_snapshot(&dir.path().join("missing")),
            Err(SnapshotError::Io(_))
        ));
    }
}
