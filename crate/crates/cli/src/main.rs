use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fdtd25d::analysis::{compare_formants, FormantSet};
use fdtd25d::geometry::{render_cells, AreaFunction};
use fdtd25d::harness::{
    build_domain, load_area_function, oracle_reference, run_benchmark, run_oracle_comparison,
    run_pipeline, write_json, write_with, HarnessError, RunConfig, TimeStep, WindowKind,
};
use fdtd25d::solver::WallForm;

#[derive(Parser)]
#[command(name = "fdtd25d", version, about = "2.5D FDTD simulation of straight tubes from area functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, then write probe CSV/WAV, transfer function and formants.
    Run(RunArgs),
    /// Chain-matrix reference spectrum and formants only.
    Oracle(RunArgs),
    /// Simulation and reference side by side, as a formant error table.
    Compare(CompareArgs),
    /// Time the plain 2D, 2.5D serial and 2.5D parallel stepping loops.
    Bench(BenchArgs),
    /// Export the contour and depth map of the configured geometry.
    Depthmap(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    area_function: Option<PathBuf>,
    #[arg(long)]
    ds: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Seconds, or "auto" for the stability bound.
    #[arg(long)]
    dt: Option<TimeStep>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    mic_offset: Option<f64>,
    /// physical | rho-c-mu
    #[arg(long)]
    wall_form: Option<WallForm>,
    /// Skip the circular-section radius scaling.
    #[arg(long)]
    no_scaling: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// rectangular | hann | exponential
    #[arg(long)]
    window: Option<WindowKind>,
    /// Divide the response spectrum by the pulse spectrum.
    #[arg(long)]
    deconvolve: bool,
    #[arg(long)]
    formants: Option<usize>,
    #[arg(long)]
    pulse_low: Option<f64>,
    #[arg(long)]
    pulse_high: Option<f64>,
    #[arg(long)]
    pulse_length: Option<usize>,
    #[arg(long)]
    pulse_amplitude: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Compare two formant JSON files (measured, reference) instead of
    /// running anything.
    #[arg(long, num_args = 2, value_names = ["MEASURED", "REFERENCE"])]
    files: Option<Vec<PathBuf>>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Worker counts for the parallel timings.
    #[arg(long = "threads", value_delimiter = ',', default_value = "1,2,4,8")]
    threads: Vec<usize>,
    /// Defaults to the configured run length.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { $field = v; })*
            };
        }
        set! {
            ds => cfg.ds,
            nx => cfg.nx,
            ny => cfg.ny,
            dt => cfg.dt,
            duration => cfg.duration_s,
            c => cfg.c,
            rho => cfg.rho,
            mu => cfg.mu,
            mic_offset => cfg.mic_offset_m,
            wall_form => cfg.wall_form,
            workers => cfg.workers,
            output => cfg.output_dir,
            window => cfg.analysis.window,
            formants => cfg.analysis.formant_count,
            pulse_low => cfg.pulse.low_cut_hz,
            pulse_high => cfg.pulse.high_cut_hz,
            pulse_length => cfg.pulse.length,
            pulse_amplitude => cfg.pulse.amplitude,
        }
        if let Some(af) = &self.area_function {
            cfg.area_function = Some(af.clone());
        }
        if self.no_scaling {
            cfg.scale_radii = false;
        }
        if self.deconvolve {
            cfg.analysis.deconvolve = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn ensure_dir(path: &std::path::Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = args.config()?;
    let out = run_pipeline(&cfg)?;
    let sim = &out.simulation;
    log::info!(
        "{} steps in {:.2} s on {} worker(s)",
        sim.records.steps,
        sim.records.wall_seconds,
        sim.records.workers
    );
    println!("formants (Hz): {}", format_freqs(&sim.formants));
    for p in &out.artifacts {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn format_freqs(fs: &FormantSet) -> String {
    let list: Vec<String> = fs.frequencies.iter().map(|f| format!("{f:.1}")).collect();
    let mut s = list.join(", ");
    if fs.shortfall {
        s.push_str(" (shortfall)");
    }
    s
}

fn cmd_oracle(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = args.config()?;
    let af = load_area_function(&cfg)?;
    let (tf, formants) = oracle_reference(&cfg, &af)?;
    ensure_dir(&cfg.output_dir)?;
    write_with(&cfg.output_dir.join("oracle_transfer_function.csv"), |w| tf.write_csv(w, None))?;
    write_json(&cfg.output_dir.join("oracle_formants.json"), &formants)?;
    println!("oracle formants (Hz): {}", format_freqs(&formants));
    Ok(())
}

fn read_formants(path: &PathBuf) -> anyhow::Result<FormantSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
        .map_err(Into::into)
}

fn cmd_compare(args: &CompareArgs) -> anyhow::Result<()> {
    if let Some(files) = &args.files {
        let measured = read_formants(&files[0])?;
        let reference = read_formants(&files[1])?;
        let cmp = compare_formants(&measured, &reference).map_err(HarnessError::from)?;
        print!("{}", cmp.table("Δ"));
        return Ok(());
    }
    let cfg = args.run.config()?;
    let cmp = run_oracle_comparison(&cfg)?;
    let label = cfg
        .area_function
        .as_ref()
        .and_then(|p| p.file_stem())
        .map_or_else(|| "tube".to_string(), |s| s.to_string_lossy().into_owned());
    print!("{}", cmp.table(&label));
    println!("max |Δ%| = {:.2}", cmp.comparison.max_abs_percent());
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let cfg = args.run.config()?;
    let report = run_benchmark(&cfg, None, &args.threads, args.steps, args.repeats)?;
    print!("{}", report.summary());
    if let Some(path) = &args.json {
        write_json(path, &report)?;
    }
    Ok(())
}

fn cmd_depthmap(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = args.config()?;
    let af: AreaFunction = load_area_function(&cfg)?;
    let domain = build_domain(&cfg, &af)?;
    ensure_dir(&cfg.output_dir)?;
    let csv = cfg.output_dir.join("depth_map.csv");
    write_with(&csv, |w| domain.depth().write_csv(domain.grid(), w))?;
    let cells = cfg.output_dir.join("cells.txt");
    write_with(&cells, |w| w.write_all(render_cells(domain.cells()).as_bytes()))?;
    println!("wrote {}\nwrote {}", csv.display(), cells.display());
    Ok(())
}

/// Error chain joined by ": ", skipping causes already quoted by the
/// message above them.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<HarnessError>())
        .map_or(2, |h| h.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Depthmap(a) => cmd_depthmap(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
