//! Tube geometry: area functions, mid-sagittal contours and depth maps.

mod area;
mod contour;
mod depth;
mod domain;

pub use area::{parse_area_function, AreaFunction, AreaSample, CIRCULAR_MODE_SCALE};
pub use contour::{build_contour, render_cells, CellRaster, CellType, GridSpec};
pub use depth::{
    build_depth_map, center_depths, chord_depth, depth_map_from_mesh, min_raw_nonzero,
    raw_edge_depths, smooth_edges, DepthMap, TriangleMesh, AUTO_MIN_DEPTH_FRACTION,
    DEFAULT_OPEN_SPACE_DEPTH,
};
pub use domain::{assemble_domain, DomainOptions, PhysicalConstants, SimDomain};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("axial positions must be strictly increasing (sample {index})")]
    NonIncreasing { index: usize },
    #[error("sample {index} has non-positive area {area}")]
    NonPositiveArea { index: usize, area: f64 },
    #[error("an area function needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("tube does not fit a {nx}x{ny} grid; needs at least {required_nx}x{required_ny}")]
    DomainTooSmall {
        nx: usize,
        ny: usize,
        required_nx: usize,
        required_ny: usize,
    },
    #[error("section at x = {x} m is narrower than one cell")]
    Constriction { x: f64 },
    #[error("{0}")]
    Validation(String),
    #[error("not implemented: {0}")]
    NotImplemented(&'static str),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
