//! Precomputed per-sample coefficients and the row-band update kernels.
//!
//! Pressure (cells): `p ← p − ρc²Δt/(Δs D̄) · (Dx vx|→ − Dx vx|← + Dy vy|↑ − Dy vy|↓)`
//! Velocity (edges): `v ← (β v − β² Δt ∇p/ρ + Δt(1−β) v_b) / (β + Δt(1−β))`
//!
//! Both kernels work on a contiguous band of rows and only read the field
//! written by the other phase, so any row partition gives the same result.

use std::ops::Range;

use super::state::{Axis, BoundaryField, BoundarySource, FieldState};
use super::SolverError;
use crate::geometry::{CellType, SimDomain};

/// Whether the pressure update carries the depth weights or is the plain
/// 2D scheme with the depth arithmetic left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Depth,
    Flat,
}

#[derive(Debug, Clone, Copy)]
struct Source {
    src: BoundarySource,
    blend: f64,
}

#[derive(Debug, Clone)]
pub struct Stepper {
    nx: usize,
    ny: usize,
    dt: f64,
    // pressure coefficient per cell, zero where pressure is not solved
    kp_depth: Vec<f64>,
    kp_flat: Vec<f64>,
    dx: Vec<f64>,
    dy: Vec<f64>,
    ax: Vec<f64>,
    bx: Vec<f64>,
    ay: Vec<f64>,
    by: Vec<f64>,
    sources: Vec<Source>,
    // sources[row_start[j]..row_start[j + 1]] live on row j
    row_start: Vec<usize>,
}

fn blend_coefficients(beta: f64, dt: f64, rho: f64, ds: f64) -> (f64, f64, f64) {
    let den = beta + dt * (1.0 - beta);
    (
        beta / den,
        beta * beta * dt / (rho * ds * den),
        dt * (1.0 - beta) / den,
    )
}

impl Stepper {
    pub fn new(domain: &SimDomain, boundary: &BoundaryField, dt: f64) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let grid = domain.grid();
        let (nx, ny, ds) = (grid.nx, grid.ny, grid.ds);
        if boundary.beta_x.dims() != (nx, ny) || boundary.beta_y.dims() != (nx, ny) {
            return Err(SolverError::Domain("boundary field does not match the grid".into()));
        }
        let k = domain.constants();
        let depth = domain.depth();
        let flat_coef = k.rho * k.c * k.c * dt / ds;
        let mut kp_depth = vec![0.0; nx * ny];
        let mut kp_flat = vec![0.0; nx * ny];
        for (idx, c) in domain.cells().as_slice().iter().enumerate() {
            if *c == CellType::Air {
                let d = depth.d_bar.as_slice()[idx];
                if !(d > 0.0) {
                    return Err(SolverError::Domain(format!(
                        "air cell {idx} has center depth {d}"
                    )));
                }
                kp_depth[idx] = flat_coef / d;
                kp_flat[idx] = flat_coef;
            }
        }
        let split = |beta: &[f64]| -> (Vec<f64>, Vec<f64>) {
            beta.iter()
                .map(|&b| {
                    let (a, g, _) = blend_coefficients(b, dt, k.rho, ds);
                    (a, g)
                })
                .unzip()
        };
        let (ax, bx) = split(boundary.beta_x.as_slice());
        let (ay, by) = split(boundary.beta_y.as_slice());

        let sources: Vec<Source> = boundary
            .sources()
            .into_iter()
            .map(|src| {
                let beta = match src.axis {
                    Axis::X => boundary.beta_x.as_slice()[src.edge],
                    Axis::Y => boundary.beta_y.as_slice()[src.edge],
                };
                Source {
                    src,
                    blend: blend_coefficients(beta, dt, k.rho, ds).2,
                }
            })
            .filter(|s| s.blend != 0.0)
            .collect();
        let row_start: Vec<usize> = (0..=ny)
            .map(|j| sources.partition_point(|s| s.src.edge / nx < j))
            .collect();

        Ok(Self {
            nx,
            ny,
            dt,
            kp_depth,
            kp_flat,
            dx: depth.d_x.as_slice().to_vec(),
            dy: depth.d_y.as_slice().to_vec(),
            ax,
            bx,
            ay,
            by,
            sources,
            row_start,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Continuity update on rows `rows`; `p_band` holds exactly those rows.
    #[inline]
    pub(crate) fn pressure_band(
        &self,
        mode: KernelMode,
        rows: Range<usize>,
        p_band: &mut [f64],
        vx: &[f64],
        vy: &[f64],
    ) {
        match mode {
            KernelMode::Depth => self.pressure_band_impl::<true>(rows, p_band, vx, vy),
            KernelMode::Flat => self.pressure_band_impl::<false>(rows, p_band, vx, vy),
        }
    }

    fn pressure_band_impl<const DEPTH: bool>(
        &self,
        rows: Range<usize>,
        p_band: &mut [f64],
        vx: &[f64],
        vy: &[f64],
    ) {
        let nx = self.nx;
        let kp = if DEPTH { &self.kp_depth } else { &self.kp_flat };
        let first = rows.start;
        // the outer ring never holds air
        for j in rows.start.max(1)..rows.end.min(self.ny - 1) {
            let base = j * nx;
            let below = base - nx;
            // columns 1..nx-1 against their left neighbors 0..nx-2
            let n = nx - 2;
            let pr = &mut p_band[(j - first) * nx + 1..][..n];
            let kr = &kp[base + 1..][..n];
            let vx_r = &vx[base + 1..][..n];
            let vx_l = &vx[base..][..n];
            let vy_t = &vy[base + 1..][..n];
            let vy_b = &vy[below + 1..][..n];
            if DEPTH {
                let dx_r = &self.dx[base + 1..][..n];
                let dx_l = &self.dx[base..][..n];
                let dy_t = &self.dy[base + 1..][..n];
                let dy_b = &self.dy[below + 1..][..n];
                for i in 0..n {
                    let div = dx_r[i] * vx_r[i] - dx_l[i] * vx_l[i] + dy_t[i] * vy_t[i] - dy_b[i] * vy_b[i];
                    pr[i] -= kr[i] * div;
                }
            } else {
                for i in 0..n {
                    let div = vx_r[i] - vx_l[i] + vy_t[i] - vy_b[i];
                    pr[i] -= kr[i] * div;
                }
            }
        }
    }

    /// Momentum / β-blend update of both velocity components on rows
    /// `rows`, followed by the prescribed-velocity contributions of those
    /// rows. `u` is the current excitation sample.
    pub(crate) fn velocity_band(
        &self,
        rows: Range<usize>,
        vx_band: &mut [f64],
        vy_band: &mut [f64],
        p: &[f64],
        u: f64,
    ) {
        let nx = self.nx;
        let first = rows.start;
        for j in rows.clone() {
            let base = j * nx;
            let off = (j - first) * nx;
            let pr = &p[base..base + nx];
            let vxr = &mut vx_band[off..off + nx];
            let (a, b) = (&self.ax[base..base + nx], &self.bx[base..base + nx]);
            let n = nx - 1;
            let (v, a_, b_, pl, pn) = (&mut vxr[..n], &a[..n], &b[..n], &pr[..n], &pr[1..][..n]);
            for i in 0..n {
                v[i] = a_[i] * v[i] - b_[i] * (pn[i] - pl[i]);
            }
            vxr[nx - 1] *= a[nx - 1];

            let vyr = &mut vy_band[off..off + nx];
            let (a, b) = (&self.ay[base..base + nx], &self.by[base..base + nx]);
            if j + 1 < self.ny {
                let pu = &p[base + nx..base + 2 * nx];
                let (v, a, b, pu) = (&mut vyr[..nx], &a[..nx], &b[..nx], &pu[..nx]);
                for i in 0..nx {
                    v[i] = a[i] * v[i] - b[i] * (pu[i] - pr[i]);
                }
            } else {
                for i in 0..nx {
                    vyr[i] *= a[i];
                }
            }
        }
        let band_base = first * nx;
        for s in &self.sources[self.row_start[rows.start]..self.row_start[rows.end]] {
            let src = &s.src;
            let vb = src.vb_static + src.wall_coef * p[src.cell] + src.excitation_coef * u;
            let v = match src.axis {
                Axis::X => &mut vx_band[src.edge - band_base],
                Axis::Y => &mut vy_band[src.edge - band_base],
            };
            *v += s.blend * vb;
        }
    }

    /// Advances pressure from `v(n)` to `p(n+1)` over the whole grid.
    pub fn step_pressure(&self, state: &mut FieldState) {
        self.step_pressure_mode(state, KernelMode::Depth);
    }

    pub fn step_pressure_mode(&self, state: &mut FieldState, mode: KernelMode) {
        let FieldState { p, vx, vy, .. } = state;
        self.pressure_band(mode, 0..self.ny, p.as_mut_slice(), vx.as_slice(), vy.as_slice());
    }

    /// Advances velocity from `v(n)` to `v(n+1)` using `p(n+1)` and the
    /// excitation sample `u`.
    pub fn step_velocity(&self, state: &mut FieldState, u: f64) {
        let FieldState { p, vx, vy, .. } = state;
        self.velocity_band(0..self.ny, vx.as_mut_slice(), vy.as_mut_slice(), p.as_slice(), u);
    }

    /// One full leapfrog step: pressure, then velocity.
    pub fn step(&self, state: &mut FieldState, u: f64) {
        self.step_pressure(state);
        self.step_velocity(state, u);
        state.step_index += 1;
    }
}

pub(crate) fn band_is_finite(rows: Range<usize>, nx: usize, fields: [&[f64]; 3]) -> bool {
    let r = rows.start * nx..rows.end * nx;
    fields.iter().all(|f| f[r.clone()].iter().all(|v| v.is_finite()))
}
