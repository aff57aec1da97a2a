//! Cubical grids and binary occupancy masks.
//!
//! A compact set is represented by the finite collection of occupied cell
//! centers. Cells are indexed with the x axis fastest: the linear index of
//! cell `(i, j, k)` is `i + n * (j + n * k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box. Only the first `dim` entries of each corner are used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        Self { min, max }
    }

    /// Cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self { min: vec![lo; dim], max: vec![hi; dim] }
    }

    /// Smallest cube with the same center as `self` that contains it, grown
    /// by `pad` on every side.
    pub fn cubical_hull(&self, pad: f64) -> Self {
        let extent = self
            .min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| b - a)
            .fold(0.0_f64, f64::max)
            + 2.0 * pad;
        let min = self
            .min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| 0.5 * (a + b) - 0.5 * extent)
            .collect::<Vec<_>>();
        let max = min.iter().map(|a| a + extent).collect();
        Self { min, max }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

/// Maximum squared cell distance must fit the `u32` storage of the distance
/// field.
const MAX_SQUARED_CELLS: u64 = u32::MAX as u64 - 1;

/// Cubical grid over a box in R^2 or R^3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    origin: [f64; 3],
    n: usize,
    h: f64,
}

/// Builds a grid with `n` cells per axis over a cubical `bbox`.
pub fn make_grid(bbox: &BoundingBox, n: usize, dim: usize) -> Result<GridSpec> {
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
    }
    if bbox.min.len() != dim || bbox.max.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "box has {} coordinates, grid dimension is {dim}",
            bbox.min.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 cells per axis, got {n}")));
    }
    let extents: Vec<f64> = bbox.min.iter().zip(&bbox.max).map(|(a, b)| b - a).collect();
    let extent = extents[0];
    if !(extent.is_finite() && extent > 0.0) {
        return Err(Error::InvalidGrid(format!("degenerate box extent {extent}")));
    }
    if extents.iter().any(|e| (e - extent).abs() > 1e-12 * extent) {
        return Err(Error::InvalidGrid(format!("box is not cubical: extents {extents:?}")));
    }
    let reach = (n as u64 - 1).pow(2) * dim as u64;
    if reach > MAX_SQUARED_CELLS {
        return Err(Error::InvalidGrid(format!("n = {n} too large for dimension {dim}")));
    }
    let mut origin = [0.0; 3];
    origin[..dim].copy_from_slice(&bbox.min);
    Ok(GridSpec { dim, origin, n, h: extent / n as f64 })
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell (`h^d`).
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn bbox(&self) -> BoundingBox {
        let ext = self.h * self.n as f64;
        BoundingBox {
            min: self.origin().to_vec(),
            max: self.origin().iter().map(|a| a + ext).collect(),
        }
    }

    /// Smallest radius the grid estimators accept.
    pub fn resolvable_floor(&self) -> f64 {
        2.0 * self.h
    }

    pub fn linear(&self, idx: [usize; 3]) -> usize {
        match self.dim {
            2 => idx[0] + self.n * idx[1],
            _ => idx[0] + self.n * (idx[1] + self.n * idx[2]),
        }
    }

    pub fn unlinear(&self, mut lin: usize) -> [usize; 3] {
        let i = lin % self.n;
        lin /= self.n;
        let j = lin % self.n;
        let k = if self.dim == 3 { lin / self.n } else { 0 };
        [i, j, k]
    }

    pub fn center(&self, idx: [usize; 3]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for a in 0..self.dim {
            c[a] = self.origin[a] + (idx[a] as f64 + 0.5) * self.h;
        }
        c
    }

    /// Cell containing `p`, or `None` when `p` is outside the box. Points on
    /// the upper face belong to the last cell.
    pub fn locate(&self, p: &[f64]) -> Option<[usize; 3]> {
        let mut idx = [0usize; 3];
        let ext = self.h * self.n as f64;
        for a in 0..self.dim {
            let x = *p.get(a)?;
            let rel = x - self.origin[a];
            if !(rel >= 0.0 && rel <= ext * (1.0 + 1e-14)) {
                return None;
            }
            idx[a] = ((rel / self.h).floor() as usize).min(self.n - 1);
        }
        Some(idx)
    }
}

/// Occupancy of grid cells; the seed set `A` is the set of occupied centers.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMask {
    grid: GridSpec,
    cells: Vec<bool>,
}

impl BinaryMask {
    /// An explicitly empty mask.
    pub fn empty(grid: GridSpec) -> Self {
        let len = grid.len();
        Self { grid, cells: vec![false; len] }
    }

    pub fn from_cells(grid: GridSpec, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "mask has {} cells, grid has {}",
                cells.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, cells })
    }

    /// Marks every cell whose center satisfies `inside`.
    pub fn from_predicate(grid: GridSpec, inside: impl Fn(&[f64; 3]) -> bool) -> Self {
        let cells = (0..grid.len()).map(|lin| inside(&grid.center(grid.unlinear(lin)))).collect();
        Self { grid, cells }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn set(&mut self, idx: [usize; 3]) {
        let lin = self.grid.linear(idx);
        self.cells[lin] = true;
    }

    pub fn set_linear(&mut self, lin: usize) {
        self.cells[lin] = true;
    }

    pub fn get(&self, idx: [usize; 3]) -> bool {
        self.cells[self.grid.linear(idx)]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    /// Multi-indices of occupied cells in linear order.
    pub fn occupied(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(lin, _)| self.grid.unlinear(lin))
    }

    /// Cell-wise union with a mask on the same grid.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("union of masks on different grids".into()));
        }
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a |= *b;
        }
        Ok(())
    }
}

/// Snaps each point to its containing cell. Duplicates collapse.
pub fn mask_from_points<P: AsRef<[f64]>>(points: &[P], grid: &GridSpec) -> Result<BinaryMask> {
    let mut mask = BinaryMask::empty(grid.clone());
    for p in points {
        let p = p.as_ref();
        let idx = grid
            .locate(p)
            .ok_or_else(|| Error::PointOutOfBounds { point: p.to_vec() })?;
        mask.set(idx);
    }
    Ok(mask)
}
