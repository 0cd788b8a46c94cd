use serde::{Deserialize, Serialize};

use super::{
    build_contour, build_depth_map, AreaFunction, CellRaster, CellType, DepthMap, GeometryError,
    GridSpec, DEFAULT_OPEN_SPACE_DEPTH,
};
use crate::grid::Grid2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of sound, m/s.
    pub c: f64,
    /// Air density, kg/m³.
    pub rho: f64,
    /// Wall admittance, dimensionless, in `[0, 1]`.
    pub mu: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            c: 350.0,
            rho: 1.14,
            mu: 0.005,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.c > 0.0 && self.c.is_finite()) || !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(GeometryError::Validation(format!(
                "c and rho must be positive, got c = {}, rho = {}",
                self.c, self.rho
            )));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(GeometryError::Validation(format!(
                "wall admittance must lie in [0, 1], got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainOptions {
    /// `None` = automatic floor.
    pub min_depth: Option<f64>,
    pub open_space_depth: f64,
    /// Rescale radii to match the first circular cross mode before
    /// contouring.
    pub scale_radii: bool,
}

impl Default for DomainOptions {
    fn default() -> Self {
        Self {
            min_depth: None,
            open_space_depth: DEFAULT_OPEN_SPACE_DEPTH,
            scale_radii: true,
        }
    }
}

/// Complete, immutable problem definition for the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDomain {
    grid: GridSpec,
    cells: CellRaster,
    depth: DepthMap,
    constants: PhysicalConstants,
}

impl SimDomain {
    pub fn new(
        grid: GridSpec,
        cells: CellRaster,
        depth: DepthMap,
        constants: PhysicalConstants,
    ) -> Result<Self, GeometryError> {
        grid.validate()?;
        constants.validate()?;
        let dims = (grid.nx, grid.ny);
        if cells.dims() != dims
            || depth.d_bar.dims() != dims
            || depth.d_x.dims() != dims
            || depth.d_y.dims() != dims
        {
            return Err(GeometryError::Validation(
                "cell raster and depth map must match the grid dimensions".into(),
            ));
        }
        for (i, j, c) in cells.indexed() {
            let on_ring = i == 0 || j == 0 || i + 1 == grid.nx || j + 1 == grid.ny;
            if on_ring && c.is_inside() {
                return Err(GeometryError::Validation(format!(
                    "{c:?} cell at ({i}, {j}) lies on the outer grid ring"
                )));
            }
            let d = [depth.d_bar[(i, j)], depth.d_x[(i, j)], depth.d_y[(i, j)]];
            if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(GeometryError::Validation(format!(
                    "invalid depth at ({i}, {j}): {d:?}"
                )));
            }
            if *c == CellType::Air && depth.d_bar[(i, j)] == 0.0 {
                return Err(GeometryError::Validation(format!(
                    "air cell ({i}, {j}) has zero center depth"
                )));
            }
        }
        Ok(Self {
            grid,
            cells,
            depth,
            constants,
        })
    }

    /// Closed rectangular box: `nx × ny` grid whose interior is air with
    /// uniform depth, surrounded by one ring of wall.
    pub fn uniform_box(
        nx: usize,
        ny: usize,
        ds: f64,
        depth: f64,
        constants: PhysicalConstants,
    ) -> Result<Self, GeometryError> {
        let grid = GridSpec::new(ds, nx, ny)?;
        let cells = Grid2::from_fn(nx, ny, |i, j| {
            if i == 0 || j == 0 || i + 1 == nx || j + 1 == ny {
                CellType::Wall
            } else {
                CellType::Air
            }
        });
        let depth = DepthMap::uniform(&cells, depth, DEFAULT_OPEN_SPACE_DEPTH);
        Self::new(grid, cells, depth, constants)
    }

    /// Same geometry with both end planes turned into wall (and their
    /// depths zeroed), giving a closed cavity.
    pub fn sealed(&self) -> Self {
        let mut out = self.clone();
        for k in 0..out.cells.as_slice().len() {
            let c = &mut out.cells.as_mut_slice()[k];
            if matches!(c, CellType::Excitation | CellType::Open) {
                *c = CellType::Wall;
                out.depth.d_bar.as_mut_slice()[k] = 0.0;
                out.depth.d_x.as_mut_slice()[k] = 0.0;
                out.depth.d_y.as_mut_slice()[k] = 0.0;
            }
        }
        out
    }

    pub fn with_constants(&self, constants: PhysicalConstants) -> Result<Self, GeometryError> {
        constants.validate()?;
        Ok(Self {
            constants,
            ..self.clone()
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cells(&self) -> &CellRaster {
        &self.cells
    }

    pub fn depth(&self) -> &DepthMap {
        &self.depth
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn count(&self, kind: CellType) -> usize {
        self.cells.as_slice().iter().filter(|c| **c == kind).count()
    }

    /// Column index of the open mouth plane, if the domain has one.
    pub fn mouth_column(&self) -> Option<usize> {
        super::contour::glottis_and_mouth(&self.cells).map(|t| t.mouth)
    }
}

/// Builds the full simulation domain for a straight tube: optional radius
/// scaling, contour rasterization, depth-map extraction.
pub fn assemble_domain(
    af: &AreaFunction,
    grid: &GridSpec,
    constants: PhysicalConstants,
    options: &DomainOptions,
) -> Result<SimDomain, GeometryError> {
    constants.validate()?;
    let scaled;
    let af = if options.scale_radii {
        scaled = af.scale_radii();
        &scaled
    } else {
        af
    };
    let cells = build_contour(af, grid)?;
    let depth = build_depth_map(af, &cells, grid, options.min_depth, options.open_space_depth)?;
    SimDomain::new(*grid, cells, depth, constants)
}
