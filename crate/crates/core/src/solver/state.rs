use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::geometry::{CellType, SimDomain};
use crate::grid::Grid2;

/// Pressure at cell centers, velocity components on the right (`vx`) and
/// top (`vy`) edges of each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub p: Grid2<f64>,
    pub vx: Grid2<f64>,
    pub vy: Grid2<f64>,
    pub step_index: u64,
}

impl FieldState {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            p: Grid2::filled(nx, ny, 0.0),
            vx: Grid2::filled(nx, ny, 0.0),
            vy: Grid2::filled(nx, ny, 0.0),
            step_index: 0,
        }
    }

    pub fn for_domain(domain: &SimDomain) -> Self {
        Self::zeros(domain.grid().nx, domain.grid().ny)
    }

    pub fn is_finite(&self) -> bool {
        [&self.p, &self.vx, &self.vy]
            .iter()
            .all(|g| g.as_slice().iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WallForm {
    /// `v_b = μ p_w / (ρc)`: admittance normalized by the characteristic
    /// impedance of air.
    #[default]
    Physical,
    /// `v_b = ρc μ p_w`; not a velocity dimensionally, kept for comparison.
    RhoCMu,
}

impl WallForm {
    /// Wall-normal velocity per pascal of fronting pressure.
    pub fn admittance(self, mu: f64, rho: f64, c: f64) -> f64 {
        match self {
            WallForm::Physical => mu / (rho * c),
            WallForm::RhoCMu => rho * c * mu,
        }
    }
}

impl std::str::FromStr for WallForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "physical" => Ok(WallForm::Physical),
            "rho-c-mu" => Ok(WallForm::RhoCMu),
            other => Err(format!("unknown wall form {other:?} (physical | rho-c-mu)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// A velocity sample with β < 1 whose prescribed velocity is nonzero or
/// depends on the field:
/// `v_b = vb_static + wall_coef · p[cell] + excitation_coef · u(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySource {
    pub axis: Axis,
    /// Flat index of the velocity sample.
    pub edge: usize,
    /// Flat index of the air cell fronting a wall (unused when
    /// `wall_coef == 0`).
    pub cell: usize,
    pub wall_coef: f64,
    pub excitation_coef: f64,
    pub vb_static: f64,
}

/// Per-velocity-sample β blend and prescribed velocities.
///
/// β = 1 runs the momentum equation, β = 0 enforces `v = v_b`. Wall edges
/// facing air get `v_b = Y p_w n` with `n` pointing into the wall;
/// excitation edges get the input signal along the inward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub beta_x: Grid2<f64>,
    pub beta_y: Grid2<f64>,
    pub vb_x: Grid2<f64>,
    pub vb_y: Grid2<f64>,
    wall_admittance: f64,
    wall_edges: Vec<(Axis, usize, usize, f64)>,
    excitation_edges: Vec<(Axis, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeKind {
    Momentum,
    /// Wall on the `+` side (sign +1) or `−` side (sign −1) of an air cell.
    Wall { air_is_low: bool },
    Excitation { source_is_low: bool },
    Fixed,
}

fn classify(low: CellType, high: CellType) -> EdgeKind {
    use CellType::*;
    let fluid = |c: CellType| matches!(c, Air | Open);
    match (low, high) {
        (a, b) if fluid(a) && fluid(b) => EdgeKind::Momentum,
        (Air, Wall) => EdgeKind::Wall { air_is_low: true },
        (Wall, Air) => EdgeKind::Wall { air_is_low: false },
        (Excitation, Air) => EdgeKind::Excitation { source_is_low: true },
        (Air, Excitation) => EdgeKind::Excitation { source_is_low: false },
        _ => EdgeKind::Fixed,
    }
}

impl BoundaryField {
    /// Static-geometry boundary field: β ∈ {0, 1}, walls locally reactive
    /// with admittance from `domain`'s μ, excitation on the glottal plane.
    pub fn from_domain(domain: &SimDomain, wall_form: WallForm) -> Self {
        let grid = domain.grid();
        let (nx, ny) = (grid.nx, grid.ny);
        let cells = domain.cells();
        let k = domain.constants();
        let mut out = Self {
            beta_x: Grid2::filled(nx, ny, 0.0),
            beta_y: Grid2::filled(nx, ny, 0.0),
            vb_x: Grid2::filled(nx, ny, 0.0),
            vb_y: Grid2::filled(nx, ny, 0.0),
            wall_admittance: wall_form.admittance(k.mu, k.rho, k.c),
            wall_edges: Vec::new(),
            excitation_edges: Vec::new(),
        };
        for j in 0..ny {
            for i in 0..nx {
                let here = cells[(i, j)];
                let edge = cells.idx(i, j);
                let neighbors = [
                    (Axis::X, (i + 1 < nx).then(|| (cells.idx(i + 1, j), cells[(i + 1, j)]))),
                    (Axis::Y, (j + 1 < ny).then(|| (cells.idx(i, j + 1), cells[(i, j + 1)]))),
                ];
                for (axis, next) in neighbors {
                    let Some((next_idx, next_kind)) = next else {
                        continue;
                    };
                    let beta = match axis {
                        Axis::X => &mut out.beta_x,
                        Axis::Y => &mut out.beta_y,
                    };
                    match classify(here, next_kind) {
                        EdgeKind::Momentum => beta.as_mut_slice()[edge] = 1.0,
                        EdgeKind::Wall { air_is_low } => {
                            let (air, sign) = if air_is_low { (edge, 1.0) } else { (next_idx, -1.0) };
                            out.wall_edges.push((axis, edge, air, sign));
                        }
                        EdgeKind::Excitation { source_is_low } => {
                            let sign = if source_is_low { 1.0 } else { -1.0 };
                            out.excitation_edges.push((axis, edge, sign));
                        }
                        EdgeKind::Fixed => {}
                    }
                }
            }
        }
        out
    }

    /// Forces a velocity sample to a fixed value (β = 0).
    pub fn prescribe(&mut self, axis: Axis, i: usize, j: usize, value: f64) {
        let (beta, vb) = match axis {
            Axis::X => (&mut self.beta_x, &mut self.vb_x),
            Axis::Y => (&mut self.beta_y, &mut self.vb_y),
        };
        beta[(i, j)] = 0.0;
        vb[(i, j)] = value;
    }

    /// Sets an arbitrary β in `[0, 1]`. Intermediate values blend momentum
    /// and prescription; the shipped scenarios only use 0 and 1.
    pub fn set_beta(&mut self, axis: Axis, i: usize, j: usize, beta: f64) -> Result<(), SolverError> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(SolverError::InvalidParameter(format!("beta {beta} outside [0, 1]")));
        }
        match axis {
            Axis::X => self.beta_x[(i, j)] = beta,
            Axis::Y => self.beta_y[(i, j)] = beta,
        }
        Ok(())
    }

    pub fn wall_admittance(&self) -> f64 {
        self.wall_admittance
    }

    pub fn wall_edge_count(&self) -> usize {
        self.wall_edges.len()
    }

    pub fn excitation_edge_count(&self) -> usize {
        self.excitation_edges.len()
    }

    /// All samples whose prescribed velocity may be nonzero, sorted by
    /// axis-independent row then edge index.
    pub(crate) fn sources(&self) -> Vec<BoundarySource> {
        let mut map: std::collections::BTreeMap<(usize, u8), BoundarySource> = Default::default();
        let key = |axis: Axis, edge: usize| (edge, matches!(axis, Axis::Y) as u8);
        let blank = |axis, edge| BoundarySource {
            axis,
            edge,
            cell: 0,
            wall_coef: 0.0,
            excitation_coef: 0.0,
            vb_static: 0.0,
        };
        for &(axis, edge, cell, sign) in &self.wall_edges {
            let s = map.entry(key(axis, edge)).or_insert_with(|| blank(axis, edge));
            s.cell = cell;
            s.wall_coef = sign * self.wall_admittance;
        }
        for &(axis, edge, sign) in &self.excitation_edges {
            map.entry(key(axis, edge))
                .or_insert_with(|| blank(axis, edge))
                .excitation_coef = sign;
        }
        for (axis, vb) in [(Axis::X, &self.vb_x), (Axis::Y, &self.vb_y)] {
            for (edge, &v) in vb.as_slice().iter().enumerate() {
                if v != 0.0 {
                    map.entry(key(axis, edge))
                        .or_insert_with(|| blank(axis, edge))
                        .vb_static = v;
                }
            }
        }
        map.into_values()
            .filter(|s| s.wall_coef != 0.0 || s.excitation_coef != 0.0 || s.vb_static != 0.0)
            .collect()
    }
}
