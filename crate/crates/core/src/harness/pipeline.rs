use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::io::{resample, write_json, write_wav, write_with, LISTENING_RATE};
use super::HarnessError;
use crate::analysis::{
    compare_formants, find_formants, transfer_function, FormantComparison, FormantOptions, FormantSet,
    TransferFunction,
};
use crate::geometry::{assemble_domain, AreaFunction, CellType, GridSpec, PhysicalConstants, SimDomain};
use crate::oracle::{chain_from_area_function, oracle_transfer_function, SegmentChain};
use crate::solver::{make_pulse, run, run_parallel, ExcitationSignal, ProbeRecords, SimParams, WallForm};

/// Everything computed for one configuration, before any file output.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub domain: SimDomain,
    pub params: SimParams,
    pub mic: (usize, usize),
    pub excitation: ExcitationSignal,
    pub records: ProbeRecords,
    pub transfer: TransferFunction,
    pub formants: FormantSet,
}

impl Simulation {
    pub fn mic_record(&self) -> &[f64] {
        &self.records.samples[0]
    }
}

pub fn load_area_function(config: &RunConfig) -> Result<AreaFunction, HarnessError> {
    let path = config
        .area_function
        .as_ref()
        .ok_or_else(|| HarnessError::Config("no area function given".into()))?;
    Ok(AreaFunction::from_path(path)?)
}

pub fn build_domain(config: &RunConfig, af: &AreaFunction) -> Result<SimDomain, HarnessError> {
    config.validate()?;
    let grid = GridSpec::new(config.ds, config.nx, config.ny)?;
    Ok(assemble_domain(af, &grid, config.constants(), &config.domain_options())?)
}

/// Microphone cell: on the tube axis, `round(offset / ds)` columns inside
/// the mouth plane.
pub fn mic_position(domain: &SimDomain, offset: f64) -> Result<(usize, usize), HarnessError> {
    let mouth = domain
        .mouth_column()
        .ok_or_else(|| HarnessError::Config("domain has no mouth plane".into()))?;
    let cells = (offset / domain.grid().ds).round() as usize;
    let row = domain.grid().axis_row();
    let col = mouth.checked_sub(cells).ok_or_else(|| {
        HarnessError::Config(format!("microphone offset {offset} m lies outside the grid"))
    })?;
    if domain.cells()[(col, row)] != CellType::Air {
        return Err(HarnessError::Config(format!(
            "microphone offset {offset} m puts the probe at ({col}, {row}), which is not air"
        )));
    }
    Ok((col, row))
}

pub fn sim_params(config: &RunConfig) -> Result<SimParams, HarnessError> {
    Ok(SimParams {
        dt: config.resolved_dt()?,
        duration: config.duration_s,
        diagnostics_interval: config.diagnostics_interval,
        wall_form: config.wall_form,
    })
}

/// Geometry, solver and analysis for `af` without touching the disk.
pub fn simulate(config: &RunConfig, af: &AreaFunction) -> Result<Simulation, HarnessError> {
    let domain = build_domain(config, af)?;
    let params = sim_params(config)?;
    params.validate(&domain)?;
    let mic = mic_position(&domain, config.mic_offset_m)?;
    let steps = params.step_count();
    let pulse = make_pulse(params.dt, &config.pulse.spec())?;
    let excitation = pulse.clone().zero_padded(steps);
    let records = if config.workers == 1 {
        run(&domain, &params, &excitation, &[mic])?
    } else {
        run_parallel(&domain, &params, &excitation, &[mic], config.workers)?
    };
    let a = &config.analysis;
    let record = &records.samples[0];
    let transfer = transfer_function(
        record,
        records.rate(),
        &a.spectrum_options(record.len() as f64 * params.dt),
        a.deconvolve.then_some(pulse.samples()),
    )?;
    let formants = find_formants(&transfer, &formant_options(config))?;
    Ok(Simulation {
        domain,
        params,
        mic,
        excitation,
        records,
        transfer,
        formants,
    })
}

pub fn formant_options(config: &RunConfig) -> FormantOptions {
    let a = &config.analysis;
    FormantOptions {
        count: a.formant_count,
        f_min: a.f_min_hz,
        f_max: a.f_max_hz,
        prominence_db: a.prominence_db,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub area_function: String,
    pub nx: usize,
    pub ny: usize,
    pub ds: f64,
    pub dt: f64,
    pub sample_rate_hz: f64,
    pub steps: usize,
    pub duration_s: f64,
    pub workers: usize,
    pub stepping_seconds: f64,
    pub mic: (usize, usize),
    pub mouth_column: Option<usize>,
    pub constants: PhysicalConstants,
    pub wall_form: WallForm,
    pub scale_radii: bool,
    pub min_depth: f64,
    pub air_cells: usize,
    pub wall_cells: usize,
    pub excitation: String,
    pub formants_hz: Vec<f64>,
    pub config: RunConfig,
}

impl RunMetadata {
    pub fn new(config: &RunConfig, af: &AreaFunction, sim: &Simulation) -> Self {
        let g = sim.domain.grid();
        Self {
            area_function: af.name().to_string(),
            nx: g.nx,
            ny: g.ny,
            ds: g.ds,
            dt: sim.params.dt,
            sample_rate_hz: sim.params.rate(),
            steps: sim.records.steps,
            duration_s: sim.records.steps as f64 * sim.params.dt,
            workers: sim.records.workers,
            stepping_seconds: sim.records.wall_seconds,
            mic: sim.mic,
            mouth_column: sim.domain.mouth_column(),
            constants: *sim.domain.constants(),
            wall_form: sim.params.wall_form,
            scale_radii: config.scale_radii,
            min_depth: sim.domain.depth().min_depth,
            air_cells: sim.domain.count(CellType::Air),
            wall_cells: sim.domain.count(CellType::Wall),
            excitation: sim.excitation.description.clone(),
            formants_hz: sim.formants.frequencies.clone(),
            config: config.clone(),
        }
    }
}

pub const PROBE_CSV: &str = "probes.csv";
pub const PROBE_WAV: &str = "probe.wav";
pub const LISTENING_WAV: &str = "probe_44k.wav";
pub const TRANSFER_CSV: &str = "transfer_function.csv";
pub const FORMANTS_JSON: &str = "formants.json";
pub const METADATA_JSON: &str = "metadata.json";

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes probe CSV and WAVs, transfer-function CSV, formant and metadata
/// JSON to `dir`; returns the written paths.
pub fn write_artifacts(
    config: &RunConfig,
    af: &AreaFunction,
    sim: &Simulation,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    let path = |name: &str| dir.join(name);
    write_with(&path(PROBE_CSV), |w| sim.records.write_csv(w))?;
    let rate = sim.params.rate();
    write_wav(&path(PROBE_WAV), sim.mic_record(), rate.round() as u32)?;
    write_wav(
        &path(LISTENING_WAV),
        &resample(sim.mic_record(), rate, LISTENING_RATE as f64),
        LISTENING_RATE,
    )?;
    write_with(&path(TRANSFER_CSV), |w| {
        sim.transfer.write_csv(w, Some(config.analysis.export_max_hz))
    })?;
    write_json(&path(FORMANTS_JSON), &sim.formants)?;
    write_json(&path(METADATA_JSON), &RunMetadata::new(config, af, sim))?;
    Ok([PROBE_CSV, PROBE_WAV, LISTENING_WAV, TRANSFER_CSV, FORMANTS_JSON, METADATA_JSON]
        .iter()
        .map(|n| path(n))
        .collect())
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub simulation: Simulation,
    pub artifacts: Vec<PathBuf>,
}

/// Loads the area function, simulates, and writes all artifacts to the
/// configured output directory.
pub fn run_pipeline(config: &RunConfig) -> Result<PipelineOutput, HarnessError> {
    config.validate()?;
    let af = load_area_function(config)?;
    let simulation = simulate(config, &af)?;
    let artifacts = write_artifacts(config, &af, &simulation, &config.output_dir)?;
    Ok(PipelineOutput {
        simulation,
        artifacts,
    })
}

pub fn oracle_chain(config: &RunConfig, af: &AreaFunction) -> Result<SegmentChain, HarnessError> {
    Ok(chain_from_area_function(af, config.oracle.segment_length_m, config.c, config.rho)?)
}

/// Reference spectrum and formants of the unscaled area function.
pub fn oracle_reference(
    config: &RunConfig,
    af: &AreaFunction,
) -> Result<(TransferFunction, FormantSet), HarnessError> {
    config.validate()?;
    let chain = oracle_chain(config, af)?;
    let tf = oracle_transfer_function(&chain, config.analysis.f_max_hz, config.oracle.sweep_step_hz)?;
    let opts = FormantOptions {
        f_min: config.analysis.f_min_hz.max(config.oracle.sweep_step_hz),
        ..formant_options(config)
    };
    let formants = find_formants(&tf, &opts)?;
    Ok((tf, formants))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub simulated: FormantSet,
    pub oracle: FormantSet,
    pub comparison: FormantComparison,
}

impl OracleComparison {
    pub fn table(&self, label: &str) -> String {
        self.comparison.table(label)
    }
}

/// Pairs the lowest formants of both paths; when either found fewer than
/// requested the table covers the common count and is flagged.
pub fn pair_formants(simulated: &FormantSet, oracle: &FormantSet) -> Result<FormantComparison, HarnessError> {
    let n = simulated.len().min(oracle.len());
    let mut cmp = compare_formants(&simulated.truncated(n), &oracle.truncated(n))?;
    cmp.shortfall |= simulated.len() != oracle.len();
    Ok(cmp)
}

/// Runs the simulation and the oracle on the same area function.
pub fn compare_with_oracle(config: &RunConfig, af: &AreaFunction) -> Result<(Simulation, OracleComparison), HarnessError> {
    let sim = simulate(config, af)?;
    let (_, oracle) = oracle_reference(config, af)?;
    let comparison = pair_formants(&sim.formants, &oracle)?;
    let out = OracleComparison {
        simulated: sim.formants.clone(),
        oracle,
        comparison,
    };
    Ok((sim, out))
}

pub const COMPARISON_TXT: &str = "comparison.txt";
pub const COMPARISON_JSON: &str = "comparison.json";

/// [`compare_with_oracle`] plus the simulation artifacts and the table in
/// text and JSON form.
pub fn run_oracle_comparison(config: &RunConfig) -> Result<OracleComparison, HarnessError> {
    config.validate()?;
    let af = load_area_function(config)?;
    let (sim, cmp) = compare_with_oracle(config, &af)?;
    let dir = &config.output_dir;
    write_artifacts(config, &af, &sim, dir)?;
    let table = cmp.table(af.name());
    write_with(&dir.join(COMPARISON_TXT), |w| w.write_all(table.as_bytes()))?;
    write_json(&dir.join(COMPARISON_JSON), &cmp)?;
    Ok(cmp)
}
