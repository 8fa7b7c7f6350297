//! Floor sampling grid for blocker positions.

use serde::{Deserialize, Serialize};

use super::{Scene, Vec3};
use crate::error::{Error, Result};

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    /// Row-major index `iy * nx + ix`.
    pub index: usize,
    pub center: Vec3,
    pub occupied: bool,
}

/// Row-major tiling of the room floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockageGrid {
    pub cell_dx: f64,
    pub cell_dy: f64,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<GridCell>,
    /// Grid indices of the free cells, ascending. Position `i` in this list
    /// is the blockage-position number.
    pub free: Vec<usize>,
}

impl BlockageGrid {
    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.len() - self.free.len()
    }

    /// Grid index of blockage position `hbp`.
    pub fn free_cell(&self, hbp: usize) -> Result<&GridCell> {
        self.free
            .get(hbp)
            .map(|&k| &self.cells[k])
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "blockage position {hbp} out of range (0..{})",
                    self.free.len()
                ))
            })
    }

    /// Blockage-position number of grid cell `index`, if free.
    pub fn hbp_of(&self, index: usize) -> Option<usize> {
        self.free.binary_search(&index).ok()
    }

    pub fn cell_at(&self, ix: usize, iy: usize) -> Option<&GridCell> {
        (ix < self.nx && iy < self.ny).then(|| &self.cells[iy * self.nx + ix])
    }
}

/// Number of whole cells of size `d` along `extent`, tolerant to round-off
/// (6 / 0.1 counts as 60).
fn cell_count(extent: f64, d: f64) -> usize {
    (extent / d + 1e-9).floor() as usize
}

/// Overlaps thinner than this (m) are rounding noise at shared edges.
const OVERLAP_EPS: f64 = 1e-9;

/// Tiles the floor with `cell_dx × cell_dy` cells. A cell is occupied when
/// its rectangle overlaps an obstacle footprint with positive area.
pub fn build_grid(scene: &Scene, cell_dx: f64, cell_dy: f64) -> Result<BlockageGrid> {
    if !(cell_dx.is_finite() && cell_dy.is_finite() && cell_dx > 0.0 && cell_dy > 0.0) {
        return Err(Error::InvalidArgument("grid cell sizes must be positive".into()));
    }
    let (rx, ry) = (scene.room.x, scene.room.y);
    let nx = cell_count(rx, cell_dx);
    let ny = cell_count(ry, cell_dy);
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid cell {cell_dx} x {cell_dy} m is larger than the {rx} x {ry} m floor"
        )));
    }
    let footprints: Vec<[f64; 4]> = scene
        .obstacles
        .iter()
        .map(|o| [o.bbox.min.x, o.bbox.max.x, o.bbox.min.y, o.bbox.max.y])
        .collect();
    let mut cells = Vec::with_capacity(nx * ny);
    let mut free = Vec::new();
    for iy in 0..ny {
        let (y0, y1) = (iy as f64 * cell_dy, (iy + 1) as f64 * cell_dy);
        for ix in 0..nx {
            let (x0, x1) = (ix as f64 * cell_dx, (ix + 1) as f64 * cell_dx);
            let occupied = footprints.iter().any(|f| {
                f[1].min(x1) - f[0].max(x0) > OVERLAP_EPS && f[3].min(y1) - f[2].max(y0) > OVERLAP_EPS
            });
            let index = iy * nx + ix;
            if !occupied {
                free.push(index);
            }
            cells.push(GridCell {
                index,
                center: Vec3::new((ix as f64 + 0.5) * cell_dx, (iy as f64 + 0.5) * cell_dy, 0.0),
                occupied,
            });
        }
    }
    Ok(BlockageGrid {
        cell_dx,
        cell_dy,
        nx,
        ny,
        cells,
        free,
    })
}
