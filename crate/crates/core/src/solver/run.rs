use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::kernel::{band_is_finite, KernelMode, Stepper};
use super::state::{BoundaryField, FieldState, WallForm};
use super::{max_stable_dt, ExcitationSignal, SolverError};
use crate::geometry::{CellType, SimDomain};

/// Relative slack on the stability bound so that `dt` computed as exactly
/// the bound is never rejected by rounding.
const CFL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub dt: f64,
    pub duration: f64,
    pub diagnostics_interval: u64,
    pub wall_form: WallForm,
}

impl SimParams {
    /// Time step at the stability bound of `domain`.
    pub fn at_cfl(domain: &SimDomain, duration: f64) -> Result<Self, SolverError> {
        Ok(Self {
            dt: max_stable_dt(domain.grid().ds, domain.constants().c)?,
            duration,
            diagnostics_interval: 1000,
            wall_form: WallForm::Physical,
        })
    }

    pub fn validate(&self, domain: &SimDomain) -> Result<(), SolverError> {
        if !(self.duration > 0.0) {
            return Err(SolverError::InvalidParameter(format!(
                "duration must be > 0, got {}",
                self.duration
            )));
        }
        if self.diagnostics_interval == 0 {
            return Err(SolverError::InvalidParameter("diagnostics interval must be ≥ 1".into()));
        }
        let limit = max_stable_dt(domain.grid().ds, domain.constants().c)?;
        if !(self.dt > 0.0) || self.dt > limit * (1.0 + CFL_SLACK) {
            return Err(SolverError::Cfl { dt: self.dt, limit });
        }
        Ok(())
    }

    /// `⌈duration / dt⌉`, ignoring rounding noise in the quotient.
    pub fn step_count(&self) -> usize {
        (self.duration / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn rate(&self) -> f64 {
        1.0 / self.dt
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecords {
    pub dt: f64,
    pub probes: Vec<(usize, usize)>,
    /// One pressure series per probe, one sample per step.
    pub samples: Vec<Vec<f64>>,
    pub steps: usize,
    pub workers: usize,
    /// Stepping-loop wall time.
    pub wall_seconds: f64,
}

impl ProbeRecords {
    pub fn rate(&self) -> f64 {
        1.0 / self.dt
    }

    /// CSV with header `step,time_s,probe0,...`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "step,time_s")?;
        for k in 0..self.samples.len() {
            write!(out, ",probe{k}")?;
        }
        writeln!(out)?;
        for n in 0..self.steps {
            write!(out, "{},{:e}", n, n as f64 * self.dt)?;
            for s in &self.samples {
                write!(out, ",{:e}", s[n])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn check_probes(domain: &SimDomain, probes: &[(usize, usize)]) -> Result<(), SolverError> {
    for &(i, j) in probes {
        let on_air = domain
            .cells()
            .get(i as isize, j as isize)
            .is_some_and(|c| *c == CellType::Air);
        if !on_air {
            return Err(SolverError::ProbeOffAir { i, j });
        }
    }
    Ok(())
}

struct Prepared {
    stepper: Stepper,
    steps: usize,
    flat_probes: Vec<usize>,
}

fn prepare(
    domain: &SimDomain,
    params: &SimParams,
    excitation: &ExcitationSignal,
    probes: &[(usize, usize)],
) -> Result<Prepared, SolverError> {
    params.validate(domain)?;
    check_probes(domain, probes)?;
    let steps = params.step_count();
    if excitation.len() < steps {
        return Err(SolverError::ExcitationTooShort {
            len: excitation.len(),
            needed: steps,
        });
    }
    if excitation.samples().iter().any(|v| !v.is_finite()) {
        return Err(SolverError::InvalidParameter("excitation has non-finite samples".into()));
    }
    let boundary = BoundaryField::from_domain(domain, params.wall_form);
    let stepper = Stepper::new(domain, &boundary, params.dt)?;
    let nx = domain.grid().nx;
    Ok(Prepared {
        stepper,
        steps,
        flat_probes: probes.iter().map(|&(i, j)| j * nx + i).collect(),
    })
}

/// Serial leapfrog loop: each step updates pressure, records every probe,
/// then updates velocity with the current excitation sample.
pub fn run(
    domain: &SimDomain,
    params: &SimParams,
    excitation: &ExcitationSignal,
    probes: &[(usize, usize)],
) -> Result<ProbeRecords, SolverError> {
    let prep = prepare(domain, params, excitation, probes)?;
    let mut state = FieldState::for_domain(domain);
    let mut samples = vec![Vec::with_capacity(prep.steps); probes.len()];
    let u = excitation.samples();
    let start = Instant::now();
    for (n, &un) in u[..prep.steps].iter().enumerate() {
        prep.stepper.step_pressure(&mut state);
        let p = state.p.as_slice();
        for (rec, &k) in samples.iter_mut().zip(&prep.flat_probes) {
            rec.push(p[k]);
        }
        prep.stepper.step_velocity(&mut state, un);
        state.step_index += 1;
        if (n as u64 + 1).is_multiple_of(params.diagnostics_interval) && !state.is_finite() {
            return Err(SolverError::Divergence { step: n as u64 + 1 });
        }
    }
    Ok(ProbeRecords {
        dt: params.dt,
        probes: probes.to_vec(),
        samples,
        steps: prep.steps,
        workers: 1,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Multithreaded loop with the grid split into contiguous row bands, one
/// per worker, and a barrier between the pressure and velocity phases.
/// Every sample is computed by the same arithmetic as in [`run`], so the
/// probe records are bitwise identical.
pub fn run_parallel(
    domain: &SimDomain,
    params: &SimParams,
    excitation: &ExcitationSignal,
    probes: &[(usize, usize)],
    workers: usize,
) -> Result<ProbeRecords, SolverError> {
    if workers == 0 {
        return Err(SolverError::InvalidParameter("worker count must be ≥ 1".into()));
    }
    let prep = prepare(domain, params, excitation, probes)?;
    let mut state = FieldState::for_domain(domain);
    let start = Instant::now();
    let samples = stepping_loop(
        &prep.stepper,
        KernelMode::Depth,
        &mut state,
        excitation.samples(),
        prep.steps,
        &prep.flat_probes,
        workers,
        params.diagnostics_interval,
    )?;
    Ok(ProbeRecords {
        dt: params.dt,
        probes: probes.to_vec(),
        samples,
        steps: prep.steps,
        workers,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Times `steps` steps of the bare stepping loop on a zero field with the
/// given kernel mode and worker count; outputs are discarded.
pub fn time_stepping(
    domain: &SimDomain,
    params: &SimParams,
    mode: KernelMode,
    steps: usize,
    workers: usize,
) -> Result<f64, SolverError> {
    if workers == 0 {
        return Err(SolverError::InvalidParameter("worker count must be ≥ 1".into()));
    }
    params.validate(domain)?;
    let boundary = BoundaryField::from_domain(domain, params.wall_form);
    let stepper = Stepper::new(domain, &boundary, params.dt)?;
    let mut state = FieldState::for_domain(domain);
    // nonzero input keeps the arithmetic honest (no denormal shortcuts)
    let u: Vec<f64> = (0..steps).map(|n| if n < 64 { 1.0 } else { 0.0 }).collect();
    let start = Instant::now();
    if workers == 1 {
        for &un in &u {
            stepper.step_pressure_mode(&mut state, mode);
            stepper.step_velocity(&mut state, un);
        }
    } else {
        stepping_loop(&stepper, mode, &mut state, &u, steps, &[], workers, u64::MAX)?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(&state);
    Ok(elapsed)
}

/// Sense-free spinning barrier: spins briefly, then yields so that
/// oversubscribed workers still make progress.
struct SpinBarrier {
    parties: usize,
    arrived: AtomicUsize,
    generation: AtomicUsize,
}

impl SpinBarrier {
    fn new(parties: usize) -> Self {
        Self {
            parties,
            arrived: AtomicUsize::new(0),
            generation: AtomicUsize::new(0),
        }
    }

    fn wait(&self) {
        let gen = self.generation.load(Ordering::Acquire);
        if self.arrived.fetch_add(1, Ordering::AcqRel) + 1 == self.parties {
            self.arrived.store(0, Ordering::Relaxed);
            self.generation.fetch_add(1, Ordering::Release);
            return;
        }
        let mut spins = 0u32;
        while self.generation.load(Ordering::Acquire) == gen {
            if spins < 128 {
                std::hint::spin_loop();
                spins += 1;
            } else {
                std::thread::yield_now();
            }
        }
    }
}

#[derive(Clone, Copy)]
struct SharedField {
    ptr: *mut f64,
    len: usize,
}

// SAFETY: workers only touch disjoint row bands mutably, and only read a
// field during the phase in which no worker writes it; the barrier orders
// the phases.
unsafe impl Send for SharedField {}
unsafe impl Sync for SharedField {}

impl SharedField {
    fn new(slice: &mut [f64]) -> Self {
        Self {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
        }
    }

    /// # Safety
    /// No other reference may write to the field while the slice lives.
    unsafe fn all(&self) -> &[f64] {
        std::slice::from_raw_parts(self.ptr, self.len)
    }

    /// # Safety
    /// `range` must be disjoint from every other live reference.
    #[allow(clippy::mut_from_ref)]
    unsafe fn band(&self, range: std::ops::Range<usize>) -> &mut [f64] {
        debug_assert!(range.end <= self.len);
        std::slice::from_raw_parts_mut(self.ptr.add(range.start), range.len())
    }
}

fn row_bands(ny: usize, workers: usize) -> Vec<std::ops::Range<usize>> {
    let (q, r) = (ny / workers, ny % workers);
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let len = q + usize::from(w < r);
            let band = start..start + len;
            start += len;
            band
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn stepping_loop(
    stepper: &Stepper,
    mode: KernelMode,
    state: &mut FieldState,
    u: &[f64],
    steps: usize,
    flat_probes: &[usize],
    workers: usize,
    diagnostics_interval: u64,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let (nx, ny) = stepper.dims();
    let bands = row_bands(ny, workers);
    let p = SharedField::new(state.p.as_mut_slice());
    let vx = SharedField::new(state.vx.as_mut_slice());
    let vy = SharedField::new(state.vy.as_mut_slice());
    let barrier = SpinBarrier::new(workers);
    let diverged_at = AtomicU64::new(u64::MAX);

    let worker = |w: usize| -> Vec<Vec<f64>> {
        let rows = bands[w].clone();
        let cells = rows.start * nx..rows.end * nx;
        let mut records = if w == 0 {
            vec![Vec::with_capacity(steps); flat_probes.len()]
        } else {
            Vec::new()
        };
        for (n, &un) in u[..steps].iter().enumerate() {
            // SAFETY: pressure phase; this worker alone writes its band of
            // p, velocity is read-only until the barrier.
            unsafe {
                stepper.pressure_band(mode, rows.clone(), p.band(cells.clone()), vx.all(), vy.all());
            }
            barrier.wait();
            // SAFETY: velocity phase; p is read-only, velocity bands disjoint.
            unsafe {
                let pa = p.all();
                if w == 0 {
                    for (rec, &k) in records.iter_mut().zip(flat_probes) {
                        rec.push(pa[k]);
                    }
                }
                stepper.velocity_band(rows.clone(), vx.band(cells.clone()), vy.band(cells.clone()), pa, un);
            }
            let step = n as u64 + 1;
            if step.is_multiple_of(diagnostics_interval) {
                // SAFETY: own band only, written by this worker.
                let ok = unsafe {
                    band_is_finite(
                        0..rows.len(),
                        nx,
                        [&*p.band(cells.clone()), &*vx.band(cells.clone()), &*vy.band(cells.clone())],
                    )
                };
                if !ok {
                    diverged_at.fetch_min(step, Ordering::AcqRel);
                }
            }
            barrier.wait();
            if diverged_at.load(Ordering::Acquire) <= step {
                break;
            }
        }
        records
    };

    let records = std::thread::scope(|scope| {
        let handles: Vec<_> = (1..workers).map(|w| scope.spawn(move || worker(w))).collect();
        let mine = worker(0);
        for h in handles {
            h.join().expect("solver worker panicked");
        }
        mine
    });
    state.step_index += steps as u64;
    match diverged_at.into_inner() {
        u64::MAX => Ok(records),
        step => Err(SolverError::Divergence { step }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_cover_rows() {
        for ny in [1, 5, 45, 64] {
            for w in 1..10 {
                let b = row_bands(ny, w);
                assert_eq!(b.len(), w);
                assert_eq!(b[0].start, 0);
                assert_eq!(b[w - 1].end, ny);
                for k in 1..w {
                    assert_eq!(b[k - 1].end, b[k].start);
                }
            }
        }
    }

    #[test]
    fn step_count_is_ceiling() {
        let p = SimParams {
            dt: 1.0 / 661_500.0,
            duration: 0.05,
            diagnostics_interval: 1000,
            wall_form: WallForm::Physical,
        };
        assert_eq!(p.step_count(), 33_075);
        let p = SimParams { duration: 0.05 + 0.5e-6, ..p };
        assert_eq!(p.step_count(), 33_076);
    }
}
