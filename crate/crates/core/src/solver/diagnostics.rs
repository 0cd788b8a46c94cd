//! Discrete acoustic energy of the depth-weighted staggered scheme.

use super::kernel::Stepper;
use super::state::FieldState;
use crate::geometry::SimDomain;
use crate::grid::Grid2;

/// Potential energy `Σ d̄ p² / (2ρc²) · ds²` over the pressure cells.
pub fn potential_energy(domain: &SimDomain, p: &Grid2<f64>) -> f64 {
    let k = domain.constants();
    let ds2 = domain.grid().ds.powi(2);
    let sum: f64 = domain
        .depth()
        .d_bar
        .as_slice()
        .iter()
        .zip(p.as_slice())
        .map(|(d, p)| d * p * p)
        .sum();
    sum * ds2 / (2.0 * k.rho * k.c * k.c)
}

/// Kinetic energy `Σ d_e ρ a·b / 2 · ds²` over the velocity edges. With
/// `a == b` this is the instantaneous form; with `a = v^n`, `b = v^{n+1}`
/// it is the time-staggered form the leapfrog scheme conserves exactly.
pub fn kinetic_energy(domain: &SimDomain, a: (&Grid2<f64>, &Grid2<f64>), b: (&Grid2<f64>, &Grid2<f64>)) -> f64 {
    let k = domain.constants();
    let ds2 = domain.grid().ds.powi(2);
    let depth = domain.depth();
    let dot = |d: &Grid2<f64>, x: &Grid2<f64>, y: &Grid2<f64>| -> f64 {
        d.as_slice()
            .iter()
            .zip(x.as_slice().iter().zip(y.as_slice()))
            .map(|(d, (x, y))| d * x * y)
            .sum()
    };
    (dot(&depth.d_x, a.0, b.0) + dot(&depth.d_y, a.1, b.1)) * k.rho * ds2 / 2.0
}

/// Instantaneous energy with pressure and velocity taken at the same step
/// index (they are half a step apart in time).
pub fn instantaneous_energy(domain: &SimDomain, state: &FieldState) -> f64 {
    potential_energy(domain, &state.p)
        + kinetic_energy(domain, (&state.vx, &state.vy), (&state.vx, &state.vy))
}

/// Steps `state` freely (zero excitation) and returns the staggered energy
/// after each step.
pub fn energy_history(
    domain: &SimDomain,
    stepper: &Stepper,
    state: &mut FieldState,
    steps: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        stepper.step_pressure(state);
        let (vx_old, vy_old) = (state.vx.clone(), state.vy.clone());
        stepper.step_velocity(state, 0.0);
        state.step_index += 1;
        out.push(
            potential_energy(domain, &state.p)
                + kinetic_energy(domain, (&vx_old, &vy_old), (&state.vx, &state.vy)),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PhysicalConstants;
    use crate::solver::{max_stable_dt, BoundaryField, WallForm};

    #[test]
    fn sealed_box_conserves_staggered_energy() {
        let dom = SimDomain::uniform_box(24, 20, 1e-3, 0.37, PhysicalConstants { mu: 0.0, ..Default::default() })
            .unwrap()
            .sealed();
        let dt = max_stable_dt(1e-3, 350.0).unwrap();
        let stepper = Stepper::new(&dom, &BoundaryField::from_domain(&dom, WallForm::Physical), dt).unwrap();
        let mut state = FieldState::for_domain(&dom);
        state.p[(10, 9)] = 1.0;
        let e0 = potential_energy(&dom, &state.p);
        let hist = energy_history(&dom, &stepper, &mut state, 500);
        for e in hist {
            assert!((e - e0).abs() <= 1e-12 * e0, "{e} vs {e0}");
        }
    }
}
