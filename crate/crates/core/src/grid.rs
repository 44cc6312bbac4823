//! Structured grids and cell-centered scalar fields.
//!
//! The domain is an axis-aligned box in 1D or 2D, discretized into uniform
//! cells. Fields store one value per cell center in row-major order (the x
//! index varies fastest). All volume-weighted reductions use the uniform
//! cell volume, so discrete integrals are plain sums scaled by it.

use thiserror::Error;

/// Errors from grid construction.
#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid dimension must be 1 or 2 (got {0})")]
    BadDimension(usize),
    #[error("grid needs at least 3 cells per axis (axis {axis} has {cells})")]
    TooFewCells { axis: usize, cells: usize },
    #[error("grid extent along axis {axis} must be positive (got {extent})")]
    BadExtent { axis: usize, extent: f64 },
}

/// A uniform axis-aligned box grid, 1D or 2D.
///
/// For 1D grids the second axis is a singleton with unit extent so that
/// `cell_volume` reduces to the 1D spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: [usize; 2],
    extents: [f64; 2],
    spacing: [f64; 2],
}

impl Grid {
    /// A 1D interval of length `extent` split into `cells` uniform cells.
    pub fn line(extent: f64, cells: usize) -> Result<Self, GridError> {
        Self::new(1, [cells, 1], [extent, 1.0])
    }

    /// A 2D rectangle with `cells = [nx, ny]` and `extents = [lx, ly]`.
    pub fn rect(extents: [f64; 2], cells: [usize; 2]) -> Result<Self, GridError> {
        Self::new(2, cells, extents)
    }

    fn new(dim: usize, cells: [usize; 2], extents: [f64; 2]) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::BadDimension(dim));
        }
        for axis in 0..dim {
            if cells[axis] < 3 {
                return Err(GridError::TooFewCells {
                    axis,
                    cells: cells[axis],
                });
            }
            if !(extents[axis] > 0.0) || !extents[axis].is_finite() {
                return Err(GridError::BadExtent {
                    axis,
                    extent: extents[axis],
                });
            }
        }
        let spacing = [
            extents[0] / cells[0] as f64,
            if dim == 2 {
                extents[1] / cells[1] as f64
            } else {
                1.0
            },
        ];
        Ok(Self {
            dim,
            cells,
            extents,
            spacing,
        })
    }

    /// Bypasses the cell-count checks; only for internal tests that need
    /// degenerate layouts.
    #[doc(hidden)]
    pub fn new_unchecked(dim: usize, cells: [usize; 2], extents: [f64; 2]) -> Self {
        let spacing = [
            extents[0] / cells[0] as f64,
            if dim == 2 {
                extents[1] / cells[1] as f64
            } else {
                1.0
            },
        ];
        Self {
            dim,
            cells,
            extents,
            spacing,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cell counts per axis; `cells()[1] == 1` for 1D grids.
    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    pub fn extents(&self) -> [f64; 2] {
        self.extents
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn n_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    /// Volume of one cell (length in 1D, area in 2D).
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 2 {
            self.spacing[0] * self.spacing[1]
        } else {
            self.spacing[0]
        }
    }

    /// Total domain volume.
    pub fn volume(&self) -> f64 {
        self.cell_volume() * self.n_cells() as f64
    }

    /// Flat index of cell `(i, j)`; row-major, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    /// Physical coordinates of the center of flat cell `c`.
    #[inline]
    pub fn center(&self, c: usize) -> (f64, f64) {
        let i = c % self.cells[0];
        let j = c / self.cells[0];
        let x = (i as f64 + 0.5) * self.spacing[0];
        let y = if self.dim == 2 {
            (j as f64 + 0.5) * self.spacing[1]
        } else {
            0.0
        };
        (x, y)
    }
}

/// A scalar field sampled at cell centers of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Field with every cell set to `value`.
    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n_cells()],
        }
    }

    /// Field sampled from `f(x, y)` at cell centers.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = (0..grid.n_cells())
            .map(|c| {
                let (x, y) = grid.center(c);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    /// Wraps raw per-cell values; panics if the length does not match.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            grid.n_cells(),
            "field length {} does not match grid cell count {}",
            values.len(),
            grid.n_cells()
        );
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Volume-weighted L1 norm.
    pub fn l1(&self) -> f64 {
        reduce(self, Reduction::L1)
    }

    /// Volume-weighted squared L2 norm.
    pub fn l2_squared(&self) -> f64 {
        reduce(self, Reduction::L2Squared)
    }

    /// Volume-weighted integral (signed sum).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// Reduction kinds over a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    L1,
    L2Squared,
    Min,
    Max,
}

/// Volume-weighted reductions: `L1 = sum |u| * vol`, `L2Squared = sum u^2 * vol`,
/// plus plain `Min`/`Max` over cells.
pub fn reduce(u: &Field, kind: Reduction) -> f64 {
    let vol = u.grid.cell_volume();
    match kind {
        Reduction::L1 => u.values.iter().map(|v| v.abs()).sum::<f64>() * vol,
        Reduction::L2Squared => u.values.iter().map(|v| v * v).sum::<f64>() * vol,
        Reduction::Min => u.min(),
        Reduction::Max => u.max(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_grid_geometry() {
        let g = Grid::line(1.0, 8).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.n_cells(), 8);
        assert_eq!(g.cell_volume(), 0.125);
        assert_eq!(g.volume(), 1.0);
        let (x0, y0) = g.center(0);
        assert_eq!(x0, 0.0625);
        assert_eq!(y0, 0.0);
    }

    #[test]
    fn rect_grid_geometry() {
        let g = Grid::rect([2.0, 1.0], [4, 5]).unwrap();
        assert_eq!(g.n_cells(), 20);
        assert!((g.cell_volume() - 0.1).abs() < 1e-15);
        assert_eq!(g.index(3, 1), 7);
        let (x, y) = g.center(7);
        assert!((x - 1.75).abs() < 1e-15);
        assert!((y - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(
            Grid::line(1.0, 2).unwrap_err(),
            GridError::TooFewCells { axis: 0, cells: 2 }
        );
        assert!(matches!(
            Grid::rect([1.0, -1.0], [4, 4]).unwrap_err(),
            GridError::BadExtent { axis: 1, .. }
        ));
    }

    #[test]
    fn reduce_constant_unit_domain() {
        // u = 1 on a unit-length 1D domain has L1 mass exactly 1.
        let g = Grid::line(1.0, 10).unwrap();
        let u = Field::constant(g, 1.0);
        assert_eq!(reduce(&u, Reduction::L1), 1.0);
    }

    #[test]
    fn reduce_zero_field() {
        let g = Grid::line(1.0, 5).unwrap();
        let u = Field::constant(g, 0.0);
        assert_eq!(reduce(&u, Reduction::L1), 0.0);
        assert_eq!(reduce(&u, Reduction::L2Squared), 0.0);
        assert_eq!(reduce(&u, Reduction::Min), 0.0);
        assert_eq!(reduce(&u, Reduction::Max), 0.0);
    }

    #[test]
    fn reduce_hand_summed_two_cells() {
        // Two cells of volume 0.5 holding (1, -1): l1 = 1, l2sq = 1, min = -1.
        let g = Grid::new_unchecked(1, [2, 1], [1.0, 1.0]);
        let u = Field::from_values(g, vec![1.0, -1.0]);
        assert_eq!(reduce(&u, Reduction::L1), 1.0);
        assert_eq!(reduce(&u, Reduction::L2Squared), 1.0);
        assert_eq!(reduce(&u, Reduction::Min), -1.0);
        assert_eq!(reduce(&u, Reduction::Max), 1.0);
    }

    #[test]
    fn integral_is_signed() {
        let g = Grid::line(1.0, 4).unwrap();
        let u = Field::from_values(g, vec![1.0, -1.0, 2.0, 0.0]);
        assert!((u.integral() - 0.5).abs() < 1e-15);
    }
}
