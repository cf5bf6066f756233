//! Binary field snapshots.
//!
//! Layout (little endian): the magic bytes `ARCS`, a `u16` format version,
//! a `u16` dimension, two `u32` cell counts (the second is 1 for 1D grids),
//! then `nx * ny` `f64` values in row-major order for the shape `(nx, ny)`.

use std::io::{Read, Write};

use super::SolverError;
use crate::model::Grid;

pub const MAGIC: &[u8; 4] = b"ARCS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

pub fn write_snapshot<W: Write>(mut out: W, grid: &Grid, field: &[f64]) -> Result<(), SolverError> {
    if field.len() != grid.len() {
        return Err(SolverError::Snapshot(format!(
            "field has {} values, grid has {} cells",
            field.len(),
            grid.len()
        )));
    }
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * field.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.dim() as u16).to_le_bytes());
    buf.extend_from_slice(&(grid.nx() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.ny() as u32).to_le_bytes());
    for x in field {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    out.write_all(&buf)
        .map_err(|e| SolverError::Snapshot(e.to_string()))
}

/// Decoded snapshot: dimension, cell counts and values.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dim: u16,
    pub cells: [u32; 2],
    pub values: Vec<f64>,
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<Snapshot, SolverError> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| SolverError::Snapshot(e.to_string()))?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(SolverError::Snapshot("missing ARCS header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(SolverError::Snapshot(format!("unsupported version {version}")));
    }
    let dim = u16::from_le_bytes([bytes[6], bytes[7]]);
    let nx = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let ny = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let count = nx as usize * ny as usize;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 8 * count {
        return Err(SolverError::Snapshot(format!(
            "expected {count} values, payload holds {} bytes",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot {
        dim,
        cells: [nx, ny],
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new_2d([1.0, 1.0], [5, 4]).unwrap();
        let field: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, &field).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 20);
        assert_eq!(&buf[..4], b"ARCS");
        assert_eq!(&buf[4..8], &[1, 0, 2, 0]);
        assert_eq!(&buf[8..16], &[5, 0, 0, 0, 4, 0, 0, 0]);
        let back = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back.values, field);
        assert_eq!(back.cells, [5, 4]);
    }

    #[test]
    fn rejects_truncated_or_foreign_files() {
        let g = Grid::new_1d(1.0, 4).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, &[1.0; 4]).unwrap();
        assert_eq!(read_snapshot(&buf[..]).unwrap().cells, [4, 1]);
        assert!(read_snapshot(&buf[..buf.len() - 3]).is_err());
        let mut foreign = buf.clone();
        foreign[0] = b'X';
        assert!(read_snapshot(&foreign[..]).is_err());
        assert!(write_snapshot(Vec::new(), &g, &[1.0; 3]).is_err());
    }
}
