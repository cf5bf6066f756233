use serde::{Deserialize, Serialize};

use super::ModelError;

/// Smallest admissible cell count along an active axis.
pub const MIN_CELLS: usize = 4;

/// Cell-centered structured grid on a box `[0, Lx] (x [0, Ly])`.
///
/// Fields living on the grid are flat `Vec<f64>` in row-major order for
/// the shape `(nx, ny)`, so cell `(i, j)` is stored at `i * ny + j`. A 1D
/// grid is stored with `ny = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    lengths: [f64; 2],
    cells: [usize; 2],
    h: [f64; 2],
}

impl Grid {
    pub fn new_1d(length: f64, cells: usize) -> Result<Self, ModelError> {
        Self::new(&[length], &[cells])
    }

    pub fn new_2d(lengths: [f64; 2], cells: [usize; 2]) -> Result<Self, ModelError> {
        Self::new(&lengths, &cells)
    }

    /// Builds a grid from per-axis extents and cell counts (1 or 2 axes).
    pub fn new(lengths: &[f64], cells: &[usize]) -> Result<Self, ModelError> {
        let dim = lengths.len();
        if dim == 0 || dim > 2 || cells.len() != dim {
            return Err(ModelError::InvalidGrid(format!(
                "expected 1 or 2 axes with matching cell counts, got {} lengths and {} counts",
                lengths.len(),
                cells.len()
            )));
        }
        let mut l = [1.0; 2];
        let mut c = [1usize; 2];
        let mut h = [1.0; 2];
        for axis in 0..dim {
            if !(lengths[axis].is_finite() && lengths[axis] > 0.0) {
                return Err(ModelError::InvalidGrid(format!(
                    "axis {axis} length must be positive, got {}",
                    lengths[axis]
                )));
            }
            if cells[axis] < MIN_CELLS {
                return Err(ModelError::InvalidGrid(format!(
                    "axis {axis} needs at least {MIN_CELLS} cells, got {}",
                    cells[axis]
                )));
            }
            l[axis] = lengths[axis];
            c[axis] = cells[axis];
            h[axis] = lengths[axis] / cells[axis] as f64;
        }
        Ok(Self {
            dim,
            lengths: l,
            cells: c,
            h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    /// Cells along y; 1 for a 1D grid.
    pub fn ny(&self) -> usize {
        self.cells[1]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn h_min(&self) -> f64 {
        self.h[..self.dim].iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.cells[1] + j
    }

    /// Length (1D) or area (2D) of a single cell.
    pub fn cell_volume(&self) -> f64 {
        self.h[..self.dim].iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }

    /// Center of cell `(i, j)`; the y coordinate is 0 on a 1D grid.
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let x = (i as f64 + 0.5) * self.h[0];
        let y = if self.dim == 2 {
            (j as f64 + 0.5) * self.h[1]
        } else {
            0.0
        };
        [x, y]
    }

    /// Samples `f` at every cell center.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.nx() {
            for j in 0..self.ny() {
                out.push(f(self.center(i, j)));
            }
        }
        out
    }

    pub fn integrate(&self, field: &[f64]) -> f64 {
        field.iter().sum::<f64>() * self.cell_volume()
    }

    /// Same geometry with every active axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self, ModelError> {
        let cells: Vec<usize> = self.cells().iter().map(|c| c * factor).collect();
        Self::new(self.lengths(), &cells)
    }
}
