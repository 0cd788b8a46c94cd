use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::analysis::{SpectrumOptions, SpectrumWindow, DEFAULT_PAD, DEFAULT_PROMINENCE_DB};
use crate::geometry::{DomainOptions, PhysicalConstants, DEFAULT_OPEN_SPACE_DEPTH};
use crate::solver::{max_stable_dt, PulseSpec, WallForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// `dt = "auto"` (stability bound) or an explicit step in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Auto(AutoKeyword),
    Fixed(f64),
}

impl Default for TimeStep {
    fn default() -> Self {
        TimeStep::Auto(AutoKeyword::Auto)
    }
}

impl std::str::FromStr for TimeStep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            Ok(TimeStep::default())
        } else {
            s.parse::<f64>()
                .map(TimeStep::Fixed)
                .map_err(|_| format!("dt must be \"auto\" or seconds, got {s:?}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub length: usize,
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub amplitude: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        let d = PulseSpec::default();
        Self {
            length: d.length,
            low_cut_hz: d.low_cut,
            high_cut_hz: d.high_cut,
            amplitude: d.amplitude,
        }
    }
}

impl PulseConfig {
    pub fn spec(&self) -> PulseSpec {
        PulseSpec {
            length: self.length,
            low_cut: self.low_cut_hz,
            high_cut: self.high_cut_hz,
            amplitude: self.amplitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    Hann,
    /// Exponential decay reaching `end_attenuation_db` at the last sample.
    Exponential,
}

impl std::str::FromStr for WindowKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rectangular" => Ok(WindowKind::Rectangular),
            "hann" => Ok(WindowKind::Hann),
            "exponential" => Ok(WindowKind::Exponential),
            other => Err(format!("unknown window {other:?} (rectangular | hann | exponential)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub pad_to: usize,
    pub window: WindowKind,
    pub end_attenuation_db: f64,
    pub deconvolve: bool,
    pub formant_count: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub prominence_db: f64,
    /// Upper frequency of the exported transfer-function CSV.
    pub export_max_hz: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            pad_to: DEFAULT_PAD,
            window: WindowKind::Exponential,
            end_attenuation_db: 80.0,
            deconvolve: false,
            formant_count: 8,
            f_min_hz: 50.0,
            f_max_hz: 10_000.0,
            prominence_db: DEFAULT_PROMINENCE_DB,
            export_max_hz: 20_000.0,
        }
    }
}

impl AnalysisConfig {
    /// Spectrum options for a record of `duration` seconds.
    pub fn spectrum_options(&self, duration: f64) -> SpectrumOptions {
        let window = match self.window {
            WindowKind::Rectangular => SpectrumWindow::Rectangular,
            WindowKind::Hann => SpectrumWindow::Hann,
            WindowKind::Exponential => SpectrumWindow::ExponentialDecay {
                time_constant_s: duration / (self.end_attenuation_db / 20.0 * std::f64::consts::LN_10),
            },
        };
        SpectrumOptions {
            pad_to: self.pad_to,
            window,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub segment_length_m: f64,
    pub sweep_step_hz: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            segment_length_m: 0.5e-3,
            sweep_step_hz: 1.0,
        }
    }
}

/// Complete description of one simulation run. Every field has a default
/// so a file naming only `area_function` reproduces the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub area_function: Option<PathBuf>,
    pub ds: f64,
    pub nx: usize,
    pub ny: usize,
    pub dt: TimeStep,
    pub duration_s: f64,
    pub c: f64,
    pub rho: f64,
    pub mu: f64,
    pub mic_offset_m: f64,
    pub wall_form: WallForm,
    pub scale_radii: bool,
    pub min_depth: Option<f64>,
    pub open_space_depth: f64,
    pub workers: usize,
    pub diagnostics_interval: u64,
    pub output_dir: PathBuf,
    pub pulse: PulseConfig,
    pub analysis: AnalysisConfig,
    pub oracle: OracleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let k = PhysicalConstants::default();
        Self {
            area_function: None,
            ds: 0.74e-3,
            nx: 270,
            ny: 45,
            dt: TimeStep::default(),
            duration_s: 0.05,
            c: k.c,
            rho: k.rho,
            mu: k.mu,
            mic_offset_m: 3e-3,
            wall_form: WallForm::Physical,
            scale_radii: true,
            min_depth: None,
            open_space_depth: DEFAULT_OPEN_SPACE_DEPTH,
            workers: 1,
            diagnostics_interval: 1000,
            output_dir: PathBuf::from("out"),
            pulse: PulseConfig::default(),
            analysis: AnalysisConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Loads a config file; a relative `area_function` path is resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(af), Some(dir)) = (cfg.area_function.as_mut(), path.parent()) {
            if af.is_relative() {
                *af = dir.join(&*af);
            }
        }
        Ok(cfg)
    }

    pub fn constants(&self) -> PhysicalConstants {
        PhysicalConstants {
            c: self.c,
            rho: self.rho,
            mu: self.mu,
        }
    }

    pub fn domain_options(&self) -> DomainOptions {
        DomainOptions {
            min_depth: self.min_depth,
            open_space_depth: self.open_space_depth,
            scale_radii: self.scale_radii,
        }
    }

    pub fn resolved_dt(&self) -> Result<f64, HarnessError> {
        match self.dt {
            TimeStep::Auto(_) => Ok(max_stable_dt(self.ds, self.c)?),
            TimeStep::Fixed(dt) => Ok(dt),
        }
    }

    /// Range checks that need no files; CFL is left to the solver.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let positive = [
            ("ds", self.ds),
            ("duration_s", self.duration_s),
            ("c", self.c),
            ("rho", self.rho),
            ("open_space_depth", self.open_space_depth),
            ("oracle.segment_length_m", self.oracle.segment_length_m),
            ("oracle.sweep_step_hz", self.oracle.sweep_step_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be ≥ 0, got {}", self.mu));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be > 0, got {dt}"));
            }
        }
        if !(self.mic_offset_m >= self.ds) {
            return bad(format!(
                "mic_offset_m {} must be at least one cell ({} m)",
                self.mic_offset_m, self.ds
            ));
        }
        if self.workers == 0 {
            return bad("workers must be ≥ 1".into());
        }
        if self.diagnostics_interval == 0 {
            return bad("diagnostics_interval must be ≥ 1".into());
        }
        if self.min_depth.is_some_and(|d| !(d > 0.0)) {
            return bad("min_depth must be > 0".into());
        }
        let a = &self.analysis;
        if a.formant_count == 0 {
            return bad("analysis.formant_count must be ≥ 1".into());
        }
        if !(a.f_min_hz >= 0.0 && a.f_min_hz < a.f_max_hz) {
            return bad("analysis band needs 0 ≤ f_min_hz < f_max_hz".into());
        }
        if !a.pad_to.is_power_of_two() {
            return bad(format!("analysis.pad_to {} is not a power of two", a.pad_to));
        }
        if a.window == WindowKind::Exponential && !(a.end_attenuation_db > 0.0) {
            return bad("analysis.end_attenuation_db must be > 0".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let cfg = RunConfig::from_toml("area_function = \"a.txt\"\n").unwrap();
        assert_eq!(cfg.ds, 0.74e-3);
        assert_eq!((cfg.nx, cfg.ny), (270, 45));
        assert_eq!((cfg.c, cfg.rho, cfg.mu), (350.0, 1.14, 0.005));
        assert_eq!(cfg.duration_s, 0.05);
        assert_eq!(cfg.mic_offset_m, 3e-3);
        assert_eq!(cfg.dt, TimeStep::default());
        assert!((cfg.resolved_dt().unwrap() - 1.495e-6).abs() < 5e-10);
        cfg.validate().unwrap();
    }

    #[test]
    fn explicit_values_and_comments() {
        let text = "# literal step\ndt = 1.5e-6\nwall_form = \"rho-c-mu\"\n[pulse]\nhigh_cut_hz = 12000.0\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.dt, TimeStep::Fixed(1.5e-6));
        assert_eq!(cfg.wall_form, WallForm::RhoCMu);
        assert_eq!(cfg.pulse.high_cut_hz, 12_000.0);
        assert!(RunConfig::from_toml("bogus = 1\n").is_err());
    }

    #[test]
    fn rejects_bad_ranges() {
        let zero = RunConfig {
            duration_s: 0.0,
            ..Default::default()
        };
        assert!(matches!(zero.validate(), Err(HarnessError::Config(_))));
        let mic = RunConfig {
            mic_offset_m: 1e-4,
            ..Default::default()
        };
        assert!(mic.validate().is_err());
    }

    #[test]
    fn exponential_window_reaches_target_attenuation() {
        let opts = AnalysisConfig::default().spectrum_options(0.05);
        let SpectrumWindow::ExponentialDecay { time_constant_s } = opts.window else {
            panic!("expected exponential window");
        };
        let end_db = 20.0 * (-0.05 / time_constant_s).exp().log10();
        assert!((end_db + 80.0).abs() < 1e-9);
    }
}
