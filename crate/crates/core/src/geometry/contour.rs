use serde::{Deserialize, Serialize};

use super::{AreaFunction, GeometryError};
use crate::grid::Grid2;

/// Uniform square-cell grid. `origin` is the world position (meters) of the
/// center of cell `(0, 0)`; the tube axis is the world line `y = 0` and the
/// glottis sits at world `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ds: f64,
    pub nx: usize,
    pub ny: usize,
    pub origin: (f64, f64),
}

impl GridSpec {
    /// Grid with the default tube placement: axis on the horizontal
    /// midline, the glottal excitation edge at world `x = 0` with one
    /// excitation column and one wall column behind it.
    pub fn new(ds: f64, nx: usize, ny: usize) -> Result<Self, GeometryError> {
        let grid = Self {
            ds,
            nx,
            ny,
            origin: (-1.5 * ds, -0.5 * (ny as f64 - 1.0) * ds),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.ds > 0.0) || !self.ds.is_finite() {
            return Err(GeometryError::Validation(format!("ds must be > 0, got {}", self.ds)));
        }
        if self.nx < 3 || self.ny < 3 {
            return Err(GeometryError::Validation(format!(
                "grid must be at least 3x3, got {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.ds
    }

    /// Signed distance of row `j`'s center from the tube axis. Computed from
    /// the axis position in row units so mirrored rows give exactly
    /// opposite values.
    #[inline]
    pub fn y_center(&self, j: usize) -> f64 {
        (j as f64 - self.axis_position()) * self.ds
    }

    /// Axis location in fractional row units, snapped to the nearest half
    /// row when within rounding distance of it.
    pub fn axis_position(&self) -> f64 {
        let a = -self.origin.1 / self.ds;
        let snapped = (2.0 * a).round() / 2.0;
        if (a - snapped).abs() < 1e-9 {
            snapped
        } else {
            a
        }
    }

    /// Row whose center is closest to the tube axis (the upper one when the
    /// axis falls on a row boundary).
    pub fn axis_row(&self) -> usize {
        let j = (self.axis_position() + 1e-9).round();
        j.clamp(0.0, self.ny as f64 - 1.0) as usize
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellType {
    Air,
    Wall,
    /// Glottal end plane; drives the adjacent edge with a prescribed velocity.
    Excitation,
    /// Mouth end plane; pressure held at zero.
    Open,
    Outside,
}

impl CellType {
    /// Cells that belong to the tube interior for depth-map purposes.
    #[inline]
    pub fn is_inside(self) -> bool {
        matches!(self, CellType::Air | CellType::Excitation | CellType::Open)
    }

    pub fn symbol(self) -> char {
        match self {
            CellType::Air => '.',
            CellType::Wall => '#',
            CellType::Excitation => 'E',
            CellType::Open => 'O',
            CellType::Outside => ' ',
        }
    }
}

pub type CellRaster = Grid2<CellType>;

/// Renders a raster as text, top row first.
pub fn render_cells(cells: &CellRaster) -> String {
    let mut out = String::with_capacity((cells.nx() + 1) * cells.ny());
    for j in (0..cells.ny()).rev() {
        out.extend(cells.row(j).iter().map(|c| c.symbol()));
        out.push('\n');
    }
    out
}

/// Columns occupied by the tube along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct TubeColumns {
    pub glottis: usize,
    pub mouth: usize,
}

fn tube_columns(length: f64, grid: &GridSpec) -> Option<TubeColumns> {
    let ds = grid.ds;
    // Excitation column: last center left of the glottis, so its right edge
    // lies within half a cell of x = 0.
    let g = ((0.0 - grid.origin.0) / ds - 1e-9).ceil() - 1.0;
    let m = ((length - grid.origin.0) / ds).round();
    if g < 1.0 || m > grid.nx as f64 - 2.0 || m < g + 2.0 {
        return None;
    }
    Some(TubeColumns {
        glottis: g as usize,
        mouth: m as usize,
    })
}

/// Rows `j` whose centers satisfy `|y| < r`, or `None` if any falls on the
/// outer grid ring.
fn inside_rows(r: f64, grid: &GridSpec) -> Option<std::ops::Range<usize>> {
    let ds = grid.ds;
    // |(j - axis) ds| < r  <=>  axis - r/ds < j < axis + r/ds
    let axis = grid.axis_position();
    let lo = (axis - r / ds).floor() + 1.0;
    let hi = (axis + r / ds).ceil() - 1.0;
    if hi < lo {
        return Some(0..0);
    }
    if lo < 1.0 || hi > grid.ny as f64 - 2.0 {
        return None;
    }
    let (lo, hi) = (lo as usize, hi as usize);
    // strict inequality at exact ties
    let lo = if grid.y_center(lo).abs() >= r { lo + 1 } else { lo };
    let hi = if grid.y_center(hi).abs() >= r { hi - 1 } else { hi };
    Some(lo..hi + 1)
}

fn required_dims(af: &AreaFunction, ds: f64) -> (usize, usize) {
    let cols = ((af.length() + 1.5 * ds) / ds).round() as usize + 2;
    let r = af.max_radius();
    let ny = (3..)
        .find(|&ny| {
            GridSpec::new(ds, cols.max(3), ny)
                .map(|g| inside_rows(r, &g).is_some())
                .unwrap_or(false)
        })
        .unwrap_or(usize::MAX);
    (cols.max(3), ny)
}

/// Rasterizes the mid-sagittal contour of the straight tube described by
/// `af`: cells whose centers lie strictly within `|y| < r(x)` are inside,
/// the first inside column becomes the excitation plane, the last the open
/// mouth plane, and the 8-neighborhood ring around the inside set is wall.
pub fn build_contour(af: &AreaFunction, grid: &GridSpec) -> Result<CellRaster, GeometryError> {
    grid.validate()?;
    let too_small = || {
        let (required_nx, required_ny) = required_dims(af, grid.ds);
        GeometryError::DomainTooSmall {
            nx: grid.nx,
            ny: grid.ny,
            required_nx,
            required_ny,
        }
    };
    let cols = tube_columns(af.length(), grid).ok_or_else(too_small)?;
    let mut cells = Grid2::filled(grid.nx, grid.ny, CellType::Outside);
    for i in cols.glottis..=cols.mouth {
        let x = grid.x_center(i).clamp(0.0, af.length());
        let r = af.radius_at(x);
        let rows = inside_rows(r, grid).ok_or_else(too_small)?;
        if rows.is_empty() {
            return Err(GeometryError::Constriction { x });
        }
        let kind = if i == cols.glottis {
            CellType::Excitation
        } else if i == cols.mouth {
            CellType::Open
        } else {
            CellType::Air
        };
        for j in rows {
            cells[(i, j)] = kind;
        }
    }
    let inside = cells.map(|c| c.is_inside());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if inside[(i, j)] {
                continue;
            }
            let touches = (-1..=1isize).any(|dj| {
                (-1..=1isize).any(|di| {
                    inside
                        .get(i as isize + di, j as isize + dj)
                        .copied()
                        .unwrap_or(false)
                })
            });
            if touches {
                cells[(i, j)] = CellType::Wall;
            }
        }
    }
    Ok(cells)
}

pub(crate) fn glottis_and_mouth(cells: &CellRaster) -> Option<TubeColumns> {
    let mut glottis = None;
    let mut mouth = None;
    for (i, _, c) in cells.indexed() {
        match c {
            CellType::Excitation => glottis = Some(glottis.map_or(i, |g: usize| g.min(i))),
            CellType::Open => mouth = Some(mouth.map_or(i, |m: usize| m.max(i))),
            _ => {}
        }
    }
    Some(TubeColumns {
        glottis: glottis?,
        mouth: mouth?,
    })
}
