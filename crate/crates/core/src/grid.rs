//! Regular axis-aligned grid over the human's state space.
//!
//! Cell `(0, …, 0)` is *centered* on `origin`, so the center of cell `i` on an
//! axis is `origin + i * cell_size`. With the cell size equal to the human's
//! basic step, every reachable state is an exact cell center.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{within_radius, AgentState};

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one axis")]
    NoAxes,
    #[error("grid axis {axis}: {reason}")]
    BadAxis { axis: usize, reason: &'static str },
    #[error("grid fields disagree on dimension")]
    DimensionMismatch,
    #[error("state {coords:?} lies outside the grid")]
    OutOfBounds { coords: Vec<f64> },
    #[error("state has dimension {found}, grid has {expected}")]
    StateDimension { found: usize, expected: usize },
    #[error("cell index {0:?} is outside the grid")]
    BadCell(Vec<usize>),
}

/// Multi-axis cell index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    origin: Vec<f64>,
    cell_size: Vec<f64>,
    counts: Vec<usize>,
    strides: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    origin: Vec<f64>,
    cell_size: Vec<f64>,
    counts: Vec<usize>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = GridError;

    fn try_from(g: GridSpec) -> Result<Self, Self::Error> {
        Grid::new(g.origin, g.cell_size, g.counts)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            origin: g.origin,
            cell_size: g.cell_size,
            counts: g.counts,
        }
    }
}

impl Grid {
    pub fn new(
        origin: Vec<f64>,
        cell_size: Vec<f64>,
        counts: Vec<usize>,
    ) -> Result<Self, GridError> {
        if origin.is_empty() {
            return Err(GridError::NoAxes);
        }
        if origin.len() != cell_size.len() || origin.len() != counts.len() {
            return Err(GridError::DimensionMismatch);
        }
        for axis in 0..origin.len() {
            if !origin[axis].is_finite() {
                return Err(GridError::BadAxis {
                    axis,
                    reason: "origin is not finite",
                });
            }
            if !(cell_size[axis].is_finite() && cell_size[axis] > 0.0) {
                return Err(GridError::BadAxis {
                    axis,
                    reason: "cell size must be positive",
                });
            }
            if counts[axis] == 0 {
                return Err(GridError::BadAxis {
                    axis,
                    reason: "count must be positive",
                });
            }
        }
        // Row-major with the last axis fastest.
        let mut strides = vec![1; counts.len()];
        for axis in (0..counts.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * counts[axis + 1];
        }
        Ok(Self {
            origin,
            cell_size,
            counts,
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn cell_size(&self) -> &[f64] {
        &self.cell_size
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Total number of cells `N_c`.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis_index(&self, axis: usize, x: f64) -> Option<usize> {
        let i = ((x - self.origin[axis]) / self.cell_size[axis]).round();
        if i >= 0.0 && i < self.counts[axis] as f64 {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Flat index of the cell containing `coords`.
    pub fn locate(&self, coords: &[f64]) -> Result<usize, GridError> {
        if coords.len() != self.dim() {
            return Err(GridError::StateDimension {
                found: coords.len(),
                expected: self.dim(),
            });
        }
        let mut flat = 0;
        for (axis, &x) in coords.iter().enumerate() {
            let i = self
                .axis_index(axis, x)
                .ok_or_else(|| GridError::OutOfBounds {
                    coords: coords.to_vec(),
                })?;
            flat += i * self.strides[axis];
        }
        Ok(flat)
    }

    pub fn state_to_cell(&self, state: &AgentState) -> Result<CellIndex, GridError> {
        let flat = self.locate(state.coords())?;
        Ok(self.unflatten(flat))
    }

    pub fn flatten(&self, cell: &CellIndex) -> Result<usize, GridError> {
        if cell.0.len() != self.dim() || cell.0.iter().zip(&self.counts).any(|(i, n)| i >= n) {
            return Err(GridError::BadCell(cell.0.clone()));
        }
        Ok(cell.0.iter().zip(&self.strides).map(|(i, s)| i * s).sum())
    }

    pub fn unflatten(&self, mut flat: usize) -> CellIndex {
        let idx = self
            .strides
            .iter()
            .map(|s| {
                let i = flat / s;
                flat %= s;
                i
            })
            .collect();
        CellIndex(idx)
    }

    pub fn cell_center(&self, cell: &CellIndex) -> Result<AgentState, GridError> {
        let flat = self.flatten(cell)?;
        Ok(AgentState::new(self.center_of(flat)))
    }

    /// Center coordinates of a flat cell index.
    pub fn center_of(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflatten(flat);
        idx.0
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.origin[axis] + i as f64 * self.cell_size[axis])
            .collect()
    }

    /// Flat indices of every cell whose center lies within `rho` of `point`,
    /// in ascending order.
    pub fn cells_within(&self, point: &[f64], rho: f64) -> Vec<usize> {
        let mut ranges = Vec::with_capacity(self.dim());
        for (axis, &p) in point.iter().enumerate().take(self.dim()) {
            let lo = ((p - rho - self.origin[axis]) / self.cell_size[axis]).floor();
            let hi = ((p + rho - self.origin[axis]) / self.cell_size[axis]).ceil();
            let max = self.counts[axis] as f64 - 1.0;
            if hi < 0.0 || lo > max {
                return Vec::new();
            }
            ranges.push((lo.max(0.0) as usize, hi.min(max) as usize));
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            let flat: usize = idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum();
            let center: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(axis, &i)| self.origin[axis] + i as f64 * self.cell_size[axis])
                .collect();
            if within_radius(&center, point, rho) {
                out.push(flat);
            }
            // Odometer increment, last axis fastest.
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    out.sort_unstable();
                    return out;
                }
                axis -= 1;
                if idx[axis] < ranges[axis].1 {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = ranges[axis].0;
            }
        }
    }
}
