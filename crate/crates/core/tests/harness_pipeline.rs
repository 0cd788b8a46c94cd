use std::path::{Path, PathBuf};

use fdtd25d::harness::{
    compare_with_oracle, load_area_function, run_benchmark, run_pipeline, HarnessError, RunConfig, TimeStep,
    WindowKind,
};
use fdtd25d::solver::WallForm;
use proptest::prelude::*;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn short_run(out: &Path) -> RunConfig {
    RunConfig {
        area_function: Some(fixtures().join("uniform.txt")),
        duration_s: 0.005,
        output_dir: out.to_path_buf(),
        ..Default::default()
    }
}

const ARTIFACTS: [&str; 6] = [
    "probes.csv",
    "probe.wav",
    "probe_44k.wav",
    "transfer_function.csv",
    "formants.json",
    "metadata.json",
];

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&short_run(dir.path())).unwrap();
    let names: Vec<String> = out
        .artifacts
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ARTIFACTS);
    for p in &out.artifacts {
        assert!(std::fs::metadata(p).unwrap().len() > 0, "{}", p.display());
    }
    let steps = out.simulation.records.steps;
    let csv = std::fs::read_to_string(dir.path().join("probes.csv")).unwrap();
    assert!(csv.starts_with("step,time_s,probe0"));
    assert_eq!(csv.lines().count(), steps + 1);

    let wav = hound::WavReader::open(dir.path().join("probe.wav")).unwrap();
    assert_eq!(wav.spec().channels, 1);
    assert_eq!(wav.spec().sample_rate, (1.0 / out.simulation.params.dt).round() as u32);
    assert_eq!(wav.len() as usize, steps);
    let listening = hound::WavReader::open(dir.path().join("probe_44k.wav")).unwrap();
    assert_eq!(listening.spec().sample_rate, 44_100);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["steps"], steps);
    assert_eq!(meta["nx"], 270);
    let tf = std::fs::read_to_string(dir.path().join("transfer_function.csv")).unwrap();
    assert_eq!(tf.lines().next(), Some("freq_hz,magnitude_db"));
    let last: f64 = tf.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last <= 20_000.0);
}

#[test]
fn identical_configs_give_identical_probe_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&short_run(a.path())).unwrap();
    let mut parallel = short_run(b.path());
    parallel.workers = 3;
    run_pipeline(&parallel).unwrap();
    let read = |d: &Path| std::fs::read(d.join("probes.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn benchmark_leaves_no_files_behind() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("never");
    let cfg = RunConfig {
        output_dir: target.clone(),
        ..short_run(&target)
    };
    let report = run_benchmark(&cfg, None, &[1, 2], Some(200), 1).unwrap();
    assert_eq!(report.steps, 200);
    assert_eq!(report.parallel.len(), 2);
    assert!(report.flat_serial_s > 0.0 && report.depth_serial_s > 0.0);
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn uniform_fixture_agrees_with_the_reference() {
    let cfg = RunConfig::load(&fixtures().join("uniform.toml")).unwrap();
    let af = load_area_function(&cfg).unwrap();
    let (_, cmp) = compare_with_oracle(&cfg, &af).unwrap();
    assert!(cmp.comparison.rows.len() >= 4);
    assert!(cmp.comparison.max_abs_percent() <= 2.0, "{}", cmp.table("uniform"));
}

#[test]
fn shipped_configs_load_and_validate() {
    for name in ["uniform.toml", "two_tube.toml", "cosine_horn.toml"] {
        let cfg = RunConfig::load(&fixtures().join(name)).unwrap();
        cfg.validate().unwrap();
        let af = cfg.area_function.as_ref().unwrap();
        assert!(af.is_absolute() && af.exists(), "{}", af.display());
    }
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut missing = short_run(dir.path());
    missing.area_function = Some(dir.path().join("absent.txt"));
    assert_eq!(run_pipeline(&missing).unwrap_err().exit_code(), 2);

    let mut bad = short_run(dir.path());
    bad.duration_s = 0.0;
    assert!(matches!(run_pipeline(&bad), Err(HarnessError::Config(_))));
    assert_eq!(run_pipeline(&bad).unwrap_err().exit_code(), 1);

    let mut unstable = short_run(dir.path());
    unstable.dt = TimeStep::Fixed(2e-6);
    assert_eq!(run_pipeline(&unstable).unwrap_err().exit_code(), 1);

    assert!(RunConfig::from_toml("nx = 10\nbogus = 1\n").is_err());
}

fn configs() -> impl Strategy<Value = RunConfig> {
    (
        (1e-4f64..2e-3, 10usize..500, 10usize..200, prop::option::of(1e-7f64..1e-5)),
        (1e-3f64..0.2, 300.0f64..360.0, 1.0f64..1.3, 0.0f64..0.1),
        (any::<bool>(), prop::option::of(1e-5f64..1e-3), 1usize..9, 0usize..3),
        (16usize..4096, 0.0f64..200.0, 5000.0f64..22000.0, 1usize..12),
    )
        .prop_map(|((ds, nx, ny, dt), (dur, c, rho, mu), (literal, min_depth, workers, window), (pulse, lo, hi, count))| {
            let mut cfg = RunConfig {
                area_function: Some(PathBuf::from("tubes/a.txt")),
                ds,
                nx,
                ny,
                dt: dt.map_or(TimeStep::default(), TimeStep::Fixed),
                duration_s: dur,
                c,
                rho,
                mu,
                wall_form: if literal { WallForm::RhoCMu } else { WallForm::Physical },
                scale_radii: !literal,
                min_depth,
                workers,
                output_dir: PathBuf::from("out/x"),
                ..Default::default()
            };
            cfg.analysis.window = [WindowKind::Rectangular, WindowKind::Hann, WindowKind::Exponential][window];
            cfg.analysis.formant_count = count;
            cfg.pulse.length = pulse;
            cfg.pulse.low_cut_hz = lo;
            cfg.pulse.high_cut_hz = hi;
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_survives_a_toml_round_trip(cfg in configs()) {
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }
}
