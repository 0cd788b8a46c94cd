//! Depth-map extraction for straight circular tubes.
//!
//! Every cell carries three depths: `d_bar` at its center (aligned with
//! pressure), `d_x` at its right edge and `d_y` at its top edge (aligned
//! with the two velocity components). For a circular section of radius `r`
//! the depth at signed distance `y` from the axis is the chord
//! `2·sqrt(r² − y²)`, so each column of edge depths integrates to the
//! section area `πr²`.
//!
//! Extraction order:
//! 1. raw chords at each inside cell's right and top edge sample points;
//! 2. wall cells zero, outside cells the open-space depth;
//! 3. each edge depth averaged with the same component of the next cell
//!    along its own axis;
//! 4. `d_bar` set to the mean of the four edges bounding the cell;
//! 5. every inside value clamped from below to the minimum depth.

use std::io::Write;

use super::{AreaFunction, CellRaster, CellType, GeometryError, GridSpec};
use crate::grid::Grid2;

pub const DEFAULT_OPEN_SPACE_DEPTH: f64 = 0.05;
/// Automatic clamp floor as a fraction of the smallest raw nonzero depth.
pub const AUTO_MIN_DEPTH_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub d_bar: Grid2<f64>,
    pub d_x: Grid2<f64>,
    pub d_y: Grid2<f64>,
    pub min_depth: f64,
    pub open_space_depth: f64,
}

/// Chord of a circle of radius `r` at signed distance `y` from its center;
/// zero when the line misses the circle.
#[inline]
pub fn chord_depth(r: f64, y: f64) -> f64 {
    2.0 * (r * r - y * y).max(0.0).sqrt()
}

/// Raw (pre-averaging) edge depths `(d_x, d_y)`: chords at `(x̂+½, ŷ)` and
/// `(x̂, ŷ+½)` for inside cells, zero for walls, open-space depth outside.
pub fn raw_edge_depths(
    af: &AreaFunction,
    cells: &CellRaster,
    grid: &GridSpec,
    open_space_depth: f64,
) -> (Grid2<f64>, Grid2<f64>) {
    let half = 0.5 * grid.ds;
    let length = af.length();
    let sample = |i: usize, j: usize, dx: f64, dy: f64| -> f64 {
        match cells[(i, j)] {
            CellType::Wall => 0.0,
            CellType::Outside => open_space_depth,
            _ => {
                let x = (grid.x_center(i) + dx).clamp(0.0, length);
                chord_depth(af.radius_at(x), grid.y_center(j) + dy)
            }
        }
    };
    let d_x = Grid2::from_fn(grid.nx, grid.ny, |i, j| sample(i, j, half, 0.0));
    let d_y = Grid2::from_fn(grid.nx, grid.ny, |i, j| sample(i, j, 0.0, half));
    (d_x, d_y)
}

/// Smallest strictly positive raw depth found on inside cells.
pub fn min_raw_nonzero(raw_x: &Grid2<f64>, raw_y: &Grid2<f64>, cells: &CellRaster) -> Option<f64> {
    cells
        .indexed()
        .filter(|(_, _, c)| c.is_inside())
        .flat_map(|(i, j, _)| [raw_x[(i, j)], raw_y[(i, j)]])
        .filter(|&d| d > 0.0)
        .reduce(f64::min)
}

/// Edge averaging: `d_x(x̂,ŷ) ← (d_x(x̂,ŷ) + d_x(x̂+1,ŷ))/2` and
/// `d_y(x̂,ŷ) ← (d_y(x̂,ŷ) + d_y(x̂,ŷ+1))/2` on inside cells, reading raw
/// neighbor values.
pub fn smooth_edges(
    raw_x: &Grid2<f64>,
    raw_y: &Grid2<f64>,
    cells: &CellRaster,
) -> (Grid2<f64>, Grid2<f64>) {
    let mut d_x = raw_x.clone();
    let mut d_y = raw_y.clone();
    for (i, j, c) in cells.indexed() {
        if !c.is_inside() {
            continue;
        }
        // inside cells never touch the outer grid ring
        d_x[(i, j)] = 0.5 * (raw_x[(i, j)] + raw_x[(i + 1, j)]);
        d_y[(i, j)] = 0.5 * (raw_y[(i, j)] + raw_y[(i, j + 1)]);
    }
    (d_x, d_y)
}

/// Center depth as the mean of the four bounding edges of each inside cell.
pub fn center_depths(
    d_x: &Grid2<f64>,
    d_y: &Grid2<f64>,
    cells: &CellRaster,
    open_space_depth: f64,
) -> Grid2<f64> {
    Grid2::from_fn(cells.nx(), cells.ny(), |i, j| match cells[(i, j)] {
        CellType::Wall => 0.0,
        CellType::Outside => open_space_depth,
        _ => 0.25 * (d_x[(i, j)] + d_x[(i - 1, j)] + d_y[(i, j)] + d_y[(i, j - 1)]),
    })
}

/// Runs the full extraction. `min_depth = None` selects the automatic
/// floor ([`AUTO_MIN_DEPTH_FRACTION`] of the smallest raw nonzero depth).
pub fn build_depth_map(
    af: &AreaFunction,
    cells: &CellRaster,
    grid: &GridSpec,
    min_depth: Option<f64>,
    open_space_depth: f64,
) -> Result<DepthMap, GeometryError> {
    if cells.dims() != (grid.nx, grid.ny) {
        return Err(GeometryError::Validation(format!(
            "cell raster is {:?}, grid is {}x{}",
            cells.dims(),
            grid.nx,
            grid.ny
        )));
    }
    if !(open_space_depth > 0.0) {
        return Err(GeometryError::Validation(format!(
            "open-space depth must be > 0, got {open_space_depth}"
        )));
    }
    let (raw_x, raw_y) = raw_edge_depths(af, cells, grid, open_space_depth);
    let smallest = min_raw_nonzero(&raw_x, &raw_y, cells);
    let min_depth = match min_depth {
        Some(m) if !(m > 0.0) => {
            return Err(GeometryError::Validation(format!(
                "minimum depth must be > 0, got {m}"
            )))
        }
        Some(m) => {
            if let Some(s) = smallest {
                if m >= s {
                    log::warn!(
                        "minimum depth {m:e} m is not below the smallest raw depth {s:e} m; \
                         it should be at least an order of magnitude lower"
                    );
                }
            }
            m
        }
        None => smallest.ok_or_else(|| {
            GeometryError::Validation("no inside cell has a nonzero depth".into())
        })? * AUTO_MIN_DEPTH_FRACTION,
    };

    let (mut d_x, mut d_y) = smooth_edges(&raw_x, &raw_y, cells);
    let mut d_bar = center_depths(&d_x, &d_y, cells, open_space_depth);
    for (k, c) in cells.as_slice().iter().enumerate() {
        if c.is_inside() {
            for g in [&mut d_bar, &mut d_x, &mut d_y] {
                let v = &mut g.as_mut_slice()[k];
                *v = v.max(min_depth);
            }
        }
    }
    Ok(DepthMap {
        d_bar,
        d_x,
        d_y,
        min_depth,
        open_space_depth,
    })
}

impl DepthMap {
    /// Uniform depth on inside cells, zero on walls, open-space depth outside.
    pub fn uniform(cells: &CellRaster, depth: f64, open_space_depth: f64) -> Self {
        let fill = |c: &CellType| match c {
            CellType::Wall => 0.0,
            CellType::Outside => open_space_depth,
            _ => depth,
        };
        Self {
            d_bar: cells.map(fill),
            d_x: cells.map(fill),
            d_y: cells.map(fill),
            min_depth: depth,
            open_space_depth,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.d_bar.dims()
    }

    /// CSV with header `x,y,d_bar,d_x,d_y`, one row per cell in row-major
    /// order; `x`, `y` are world cell-center coordinates, all values in SI.
    pub fn write_csv<W: Write>(&self, grid: &GridSpec, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,d_bar,d_x,d_y")?;
        for (i, j, d) in self.d_bar.indexed() {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                grid.x_center(i),
                grid.y_center(j),
                d,
                self.d_x[(i, j)],
                self.d_y[(i, j)]
            )?;
        }
        Ok(())
    }
}

/// Triangle surface for general depth extraction by ray casting.
#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Depth extraction from an arbitrary 3D surface (intersecting the lines
/// normal to the mid-sagittal plane with the mesh). Only the analytic
/// circular-section path is available.
pub fn depth_map_from_mesh(
    _mesh: &TriangleMesh,
    _cells: &CellRaster,
    _grid: &GridSpec,
) -> Result<DepthMap, GeometryError> {
    Err(GeometryError::NotImplemented("depth extraction from 3D meshes"))
}
