use serde::Serialize;

use super::config::RunConfig;
use super::pipeline::{build_domain, load_area_function, sim_params};
use super::HarnessError;
use crate::geometry::{AreaFunction, SimDomain};
use crate::solver::{time_stepping, KernelMode, SimParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParallelTiming {
    pub workers: usize,
    pub seconds: f64,
    /// Serial depth-weighted time over this time.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub nx: usize,
    pub ny: usize,
    pub steps: usize,
    pub repeats: usize,
    /// Plain 2D kernel, serial.
    pub flat_serial_s: f64,
    /// Depth-weighted kernel, serial.
    pub depth_serial_s: f64,
    pub parallel: Vec<ParallelTiming>,
    /// `100 (t_depth − t_flat) / t_flat`.
    pub overhead_percent: f64,
    pub steps_per_second: f64,
    pub available_cores: usize,
}

impl BenchReport {
    pub fn speedup_at(&self, workers: usize) -> Option<f64> {
        self.parallel.iter().find(|p| p.workers == workers).map(|p| p.speedup)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "grid {}x{}, {} steps, best of {} (cores available: {})\n\
             plain 2D serial   {:>9.3} s\n\
             2.5D serial       {:>9.3} s  ({:+.2}% vs plain 2D, {:.0} steps/s)\n",
            self.nx,
            self.ny,
            self.steps,
            self.repeats,
            self.available_cores,
            self.flat_serial_s,
            self.depth_serial_s,
            self.overhead_percent,
            self.steps_per_second,
        );
        for p in &self.parallel {
            s.push_str(&format!(
                "2.5D {:>2} workers   {:>9.3} s  (speedup {:.2}x)\n",
                p.workers, p.seconds, p.speedup
            ));
        }
        s
    }
}

fn best_of(
    repeats: usize,
    domain: &SimDomain,
    params: &SimParams,
    mode: KernelMode,
    steps: usize,
    workers: usize,
) -> Result<f64, HarnessError> {
    let mut best = f64::INFINITY;
    for _ in 0..repeats {
        best = best.min(time_stepping(domain, params, mode, steps, workers)?);
    }
    Ok(best)
}

/// Times the bare stepping loop for the plain and depth-weighted kernels
/// and for each worker count on the same domain. Flat and depth serial
/// runs are interleaved so slow drifts in machine load hit both alike.
pub fn benchmark_domain(
    domain: &SimDomain,
    params: &SimParams,
    steps: usize,
    worker_counts: &[usize],
    repeats: usize,
) -> Result<BenchReport, HarnessError> {
    if repeats == 0 {
        return Err(HarnessError::Config("benchmark repeats must be ≥ 1".into()));
    }
    if steps == 0 {
        return Err(HarnessError::Config("benchmark steps must be ≥ 1".into()));
    }
    let mut flat = f64::INFINITY;
    let mut depth = f64::INFINITY;
    for _ in 0..repeats {
        flat = flat.min(best_of(1, domain, params, KernelMode::Flat, steps, 1)?);
        depth = depth.min(best_of(1, domain, params, KernelMode::Depth, steps, 1)?);
    }
    let parallel = worker_counts
        .iter()
        .map(|&w| {
            let seconds = best_of(repeats, domain, params, KernelMode::Depth, steps, w)?;
            Ok(ParallelTiming {
                workers: w,
                seconds,
                speedup: depth / seconds,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let g = domain.grid();
    Ok(BenchReport {
        nx: g.nx,
        ny: g.ny,
        steps,
        repeats,
        flat_serial_s: flat,
        depth_serial_s: depth,
        parallel,
        overhead_percent: 100.0 * (depth - flat) / flat,
        steps_per_second: steps as f64 / depth,
        available_cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
    })
}

/// Benchmark on the configured geometry; `steps` defaults to the run's
/// step count.
pub fn run_benchmark(
    config: &RunConfig,
    af: Option<&AreaFunction>,
    worker_counts: &[usize],
    steps: Option<usize>,
    repeats: usize,
) -> Result<BenchReport, HarnessError> {
    let loaded;
    let af = match af {
        Some(af) => af,
        None => {
            loaded = load_area_function(config)?;
            &loaded
        }
    };
    let domain = build_domain(config, af)?;
    let params = sim_params(config)?;
    let steps = steps.unwrap_or_else(|| params.step_count());
    benchmark_domain(&domain, &params, steps, worker_counts, repeats)
}
