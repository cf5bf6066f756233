use super::{Grid, ModelError};

/// The three unknowns at one time instant: cell density `u`, attractant `v`
/// and repellent `w`, all stored in the layout described by [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl SystemState {
    pub fn new(grid: &Grid, u: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> Result<Self, ModelError> {
        let n = grid.len();
        for (name, field) in [("u", &u), ("v", &v), ("w", &w)] {
            if field.len() != n {
                return Err(ModelError::ShapeMismatch {
                    field: name,
                    expected: n,
                    got: field.len(),
                });
            }
            if let Some(bad) = field.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(ModelError::InvalidInitialData(format!(
                    "{name} must be finite and nonnegative, found {bad}"
                )));
            }
        }
        Ok(Self { t: 0.0, u, v, w })
    }

    /// Constant state `(u, v, w) = (a, b, c)`.
    pub fn uniform(grid: &Grid, u: f64, v: f64, w: f64) -> Result<Self, ModelError> {
        let n = grid.len();
        Self::new(grid, vec![u; n], vec![v; n], vec![w; n])
    }

    pub fn mass(&self, grid: &Grid) -> f64 {
        grid.integrate(&self.u)
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.w)
            .all(|x| x.is_finite())
    }
}

pub(crate) fn max_of(field: &[f64]) -> f64 {
    field.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn min_of(field: &[f64]) -> f64 {
    field.iter().copied().fold(f64::INFINITY, f64::min)
}
