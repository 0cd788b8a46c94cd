//! Transfer-function spectra and formant picking.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Magnitudes are clamped to this floor before conversion.
pub const DB_FLOOR: f64 = -300.0;
pub const DEFAULT_PAD: usize = 1 << 21;
pub const DEFAULT_PROMINENCE_DB: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("record is empty")]
    EmptyRecord,
    #[error("pad length {pad} must be a power of two ≥ record length {len}")]
    BadPad { pad: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no spectrum samples between {f_min} and {f_max} Hz")]
    EmptyBand { f_min: f64, f_max: f64 },
    #[error("formant count mismatch: measured {measured}, reference {reference}")]
    CountMismatch { measured: usize, reference: usize },
}

/// Taper applied to the record before the FFT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectrumWindow {
    #[default]
    Rectangular,
    /// Symmetric Hann over the record length.
    Hann,
    /// `exp(−t/τ)`: adds a uniform −1/(πτ) Hz bandwidth to every resonance
    /// without moving it, so an undamped ringing record yields Lorentzian
    /// peaks instead of truncation sidelobes.
    ExponentialDecay { time_constant_s: f64 },
}

impl SpectrumWindow {
    fn weight(self, n: usize, len: usize, rate: f64) -> f64 {
        match self {
            SpectrumWindow::Rectangular => 1.0,
            SpectrumWindow::Hann => {
                if len < 2 {
                    1.0
                } else {
                    let x = std::f64::consts::PI * n as f64 / (len - 1) as f64;
                    x.sin().powi(2)
                }
            }
            SpectrumWindow::ExponentialDecay { time_constant_s } => {
                (-(n as f64) / (rate * time_constant_s)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub pad_to: usize,
    pub window: SpectrumWindow,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            pad_to: DEFAULT_PAD,
            window: SpectrumWindow::Rectangular,
        }
    }
}

/// Zero-padded complex spectrum of `record` (bins `0..pad_to`).
pub fn spectrum(record: &[f64], pad_to: usize) -> Result<Vec<Complex64>, AnalysisError> {
    if record.is_empty() {
        return Err(AnalysisError::EmptyRecord);
    }
    if !pad_to.is_power_of_two() || pad_to < record.len() {
        return Err(AnalysisError::BadPad {
            pad: pad_to,
            len: record.len(),
        });
    }
    let mut buf: Vec<Complex64> = record.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(pad_to, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(pad_to).process(&mut buf);
    Ok(buf)
}

pub fn to_db(magnitude: f64) -> f64 {
    if magnitude > 0.0 {
        (20.0 * magnitude.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    pub freqs: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    pub resolution: f64,
    pub source_rate: f64,
}

impl TransferFunction {
    /// Wraps an arbitrary sampled magnitude curve (e.g. an oracle sweep).
    pub fn from_curve(freqs: Vec<f64>, magnitude_db: Vec<f64>, source_rate: f64) -> Result<Self, AnalysisError> {
        if freqs.len() != magnitude_db.len() || freqs.is_empty() {
            return Err(AnalysisError::InvalidParameter(
                "frequency and magnitude arrays must be non-empty and equal length".into(),
            ));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(AnalysisError::InvalidParameter("frequencies must increase".into()));
        }
        let resolution = if freqs.len() > 1 { freqs[1] - freqs[0] } else { 0.0 };
        Ok(Self {
            freqs,
            magnitude_db,
            resolution,
            source_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// CSV with header `freq_hz,magnitude_db`, rows up to `f_max` if given.
    pub fn write_csv<W: Write>(&self, mut out: W, f_max: Option<f64>) -> std::io::Result<()> {
        writeln!(out, "freq_hz,magnitude_db")?;
        for (f, m) in self.freqs.iter().zip(&self.magnitude_db) {
            if f_max.is_some_and(|fm| *f > fm) {
                break;
            }
            writeln!(out, "{f:.6},{m:.6}")?;
        }
        Ok(())
    }
}

/// Magnitude spectrum in dB of the windowed, zero-padded record from 0 Hz
/// to Nyquist. With `excitation` the spectrum is divided by the pulse
/// spectrum (same padding, no window); bins where the pulse is more than
/// 200 dB below its peak are set to the floor.
pub fn transfer_function(
    record: &[f64],
    rate: f64,
    options: &SpectrumOptions,
    excitation: Option<&[f64]>,
) -> Result<TransferFunction, AnalysisError> {
    if !(rate > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!("rate must be > 0, got {rate}")));
    }
    if let SpectrumWindow::ExponentialDecay { time_constant_s } = options.window {
        if !(time_constant_s > 0.0) {
            return Err(AnalysisError::InvalidParameter(
                "exponential window time constant must be > 0".into(),
            ));
        }
    }
    let len = record.len();
    let windowed: Vec<f64> = record
        .iter()
        .enumerate()
        .map(|(n, v)| v * options.window.weight(n, len, rate))
        .collect();
    let spec = spectrum(&windowed, options.pad_to)?;
    let bins = options.pad_to / 2 + 1;
    let mut mags: Vec<f64> = spec[..bins].iter().map(|c| c.norm()).collect();
    if let Some(pulse) = excitation {
        let ps = spectrum(pulse, options.pad_to)?;
        let peak = ps[..bins].iter().fold(0.0f64, |m, c| m.max(c.norm()));
        for (m, p) in mags.iter_mut().zip(&ps[..bins]) {
            let pn = p.norm();
            *m = if pn > peak * 1e-10 { *m / pn } else { 0.0 };
        }
    }
    let resolution = rate / options.pad_to as f64;
    Ok(TransferFunction {
        freqs: (0..bins).map(|k| k as f64 * resolution).collect(),
        magnitude_db: mags.into_iter().map(to_db).collect(),
        resolution,
        source_rate: rate,
    })
}

/// `Σ x²` and `(1/N) Σ |X|²` of the zero-padded record.
pub fn parseval_energies(record: &[f64], pad_to: usize) -> Result<(f64, f64), AnalysisError> {
    let spec = spectrum(record, pad_to)?;
    let time: f64 = record.iter().map(|v| v * v).sum();
    let freq: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / pad_to as f64;
    Ok((time, freq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormantSet {
    pub frequencies: Vec<f64>,
    /// Interpolated peak level; `None` for reference sets without levels.
    pub magnitudes_db: Vec<Option<f64>>,
    /// Fewer peaks were found than requested.
    pub shortfall: bool,
}

impl FormantSet {
    pub fn from_frequencies(frequencies: Vec<f64>) -> Self {
        let n = frequencies.len();
        Self {
            frequencies,
            magnitudes_db: vec![None; n],
            shortfall: false,
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            frequencies: self.frequencies[..n].to_vec(),
            magnitudes_db: self.magnitudes_db[..n].to_vec(),
            shortfall: self.shortfall,
        }
    }
}

/// Local maxima of `y` as `(index, prominence)`. Plateaus count once at
/// their middle sample. Prominence follows the usual topographic rule: the
/// peak height minus the higher of the two lowest points reached before
/// meeting strictly higher ground (or the slice end) on each side.
pub fn peak_prominences(y: &[f64]) -> Vec<(usize, f64)> {
    let mut peaks = Vec::new();
    let n = y.len();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut k = i;
            while k + 1 < n && y[k + 1] == y[i] {
                k += 1;
            }
            if k + 1 < n && y[k + 1] < y[i] {
                peaks.push((i + k) / 2);
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    peaks
        .into_iter()
        .map(|p| {
            let h = y[p];
            let mut left_min = h;
            for &v in y[..p].iter().rev() {
                if v > h {
                    break;
                }
                left_min = left_min.min(v);
            }
            let mut right_min = h;
            for &v in &y[p + 1..] {
                if v > h {
                    break;
                }
                right_min = right_min.min(v);
            }
            (p, h - left_min.max(right_min))
        })
        .collect()
}

/// Vertex offset (in samples, within ±½) and level of the parabola through
/// three equally spaced points around a local maximum.
pub fn parabolic_vertex(a: f64, b: f64, c: f64) -> (f64, f64) {
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return (0.0, b);
    }
    let off = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
    (off, b - 0.25 * (a - c) * off)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormantOptions {
    pub count: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub prominence_db: f64,
}

impl Default for FormantOptions {
    fn default() -> Self {
        Self {
            count: 8,
            f_min: 50.0,
            f_max: 10_000.0,
            prominence_db: DEFAULT_PROMINENCE_DB,
        }
    }
}

/// Lowest `count` peaks in `[f_min, f_max]` whose prominence (measured
/// within the band) reaches `prominence_db`, each refined by parabolic
/// interpolation on the dB curve.
pub fn find_formants(tf: &TransferFunction, options: &FormantOptions) -> Result<FormantSet, AnalysisError> {
    let FormantOptions {
        count,
        f_min,
        f_max,
        prominence_db,
    } = *options;
    if count == 0 {
        return Err(AnalysisError::InvalidParameter("formant count must be ≥ 1".into()));
    }
    if !(f_min < f_max) {
        return Err(AnalysisError::InvalidParameter(format!(
            "f_min {f_min} must be below f_max {f_max}"
        )));
    }
    let lo = tf.freqs.partition_point(|&f| f < f_min);
    let hi = tf.freqs.partition_point(|&f| f <= f_max);
    if lo >= hi {
        return Err(AnalysisError::EmptyBand { f_min, f_max });
    }
    let band = &tf.magnitude_db[lo..hi];
    let mut frequencies = Vec::new();
    let mut magnitudes_db = Vec::new();
    for (k, prom) in peak_prominences(band) {
        if prom < prominence_db {
            continue;
        }
        let (off, level) = parabolic_vertex(band[k - 1], band[k], band[k + 1]);
        let idx = lo + k;
        let step = 0.5 * (tf.freqs[idx + 1] - tf.freqs[idx - 1]);
        frequencies.push(tf.freqs[idx] + off * step);
        magnitudes_db.push(Some(level));
        if frequencies.len() == count {
            break;
        }
    }
    Ok(FormantSet {
        shortfall: frequencies.len() < count,
        frequencies,
        magnitudes_db,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormantDelta {
    pub index: usize,
    pub measured_hz: f64,
    pub reference_hz: f64,
    pub delta_hz: f64,
    pub delta_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormantComparison {
    pub rows: Vec<FormantDelta>,
    pub shortfall: bool,
}

impl FormantComparison {
    pub fn max_abs_percent(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(r.delta_percent.abs()))
    }

    /// Formants across, one row of Hz differences and one of percentages.
    pub fn table(&self, label: &str) -> String {
        let mut s = String::new();
        let _ = write!(s, "{label:<8}");
        for r in &self.rows {
            let _ = write!(s, "{:>10}", format!("F{}", r.index + 1));
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", "Hz");
        for r in &self.rows {
            let _ = write!(s, "{:>10}", format!("{:.0}Hz", r.delta_hz));
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", "%");
        for r in &self.rows {
            let _ = write!(s, "{:>10}", format!("{:.2}%", r.delta_percent));
        }
        s.push('\n');
        if self.shortfall {
            s.push_str("(shortfall: fewer formants found than requested)\n");
        }
        s
    }
}

/// Signed differences `measured − reference`, absolute and relative to
/// the reference.
pub fn compare_formants(measured: &FormantSet, reference: &FormantSet) -> Result<FormantComparison, AnalysisError> {
    if measured.len() != reference.len() {
        return Err(AnalysisError::CountMismatch {
            measured: measured.len(),
            reference: reference.len(),
        });
    }
    let rows = measured
        .frequencies
        .iter()
        .zip(&reference.frequencies)
        .enumerate()
        .map(|(index, (&m, &r))| FormantDelta {
            index,
            measured_hz: m,
            reference_hz: r,
            delta_hz: m - r,
            delta_percent: 100.0 * (m - r) / r,
        })
        .collect();
    Ok(FormantComparison {
        rows,
        shortfall: measured.shortfall || reference.shortfall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sinusoid_peak_lands_on_its_frequency() {
        let rate = 661_500.0;
        let x: Vec<f64> = (0..33_075).map(|n| (2.0 * PI * 1000.0 * n as f64 / rate).sin()).collect();
        let tf = transfer_function(&x, rate, &SpectrumOptions::default(), None).unwrap();
        assert_relative_eq!(tf.resolution, 661_500.0 / 2_097_152.0, max_relative = 1e-15);
        assert!((tf.resolution - 0.3155).abs() < 1e-4);
        let (k, _) = tf
            .magnitude_db
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        assert!((tf.freqs[k] - 1000.0).abs() <= tf.resolution / 2.0);
    }

    #[test]
    fn silent_record_sits_on_floor() {
        let tf = transfer_function(&[0.0; 100], 1000.0, &SpectrumOptions { pad_to: 256, ..Default::default() }, None)
            .unwrap();
        assert_eq!(tf.len(), 129);
        assert!(tf.magnitude_db.iter().all(|&v| v == DB_FLOOR));
        assert_eq!(tf.freqs[128], 500.0);
    }

    #[test]
    fn pad_must_be_power_of_two() {
        assert_eq!(
            spectrum(&[1.0; 10], 100).unwrap_err(),
            AnalysisError::BadPad { pad: 100, len: 10 }
        );
        assert_eq!(spectrum(&[1.0; 10], 8).unwrap_err(), AnalysisError::BadPad { pad: 8, len: 10 });
        assert_eq!(spectrum(&[], 8).unwrap_err(), AnalysisError::EmptyRecord);
    }

    #[test]
    fn lorentzian_peaks_are_recovered() {
        let res = 0.5;
        let freqs: Vec<f64> = (0..10_000).map(|k| k as f64 * res).collect();
        let mag: Vec<f64> = freqs
            .iter()
            .map(|&f| {
                let l = |f0: f64, w: f64| 1.0 / (1.0 + ((f - f0) / w).powi(2));
                to_db(l(500.0, 30.0) + l(1500.0, 40.0) + l(2500.0, 50.0))
            })
            .collect();
        let tf = TransferFunction::from_curve(freqs, mag, 10_000.0).unwrap();
        let fs = find_formants(&tf, &FormantOptions { count: 3, f_min: 100.0, f_max: 4000.0, ..Default::default() }).unwrap();
        assert!(!fs.shortfall);
        for (got, want) in fs.frequencies.iter().zip([500.0, 1500.0, 2500.0]) {
            // tails of the other peaks shift the true maxima slightly
            assert!((got - want).abs() < 2.0 * res + 1.0, "{got} vs {want}");
        }
    }

    #[test]
    fn monotone_spectrum_has_no_formants() {
        let freqs: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        let mag: Vec<f64> = freqs.iter().map(|f| -f * 0.01).collect();
        let tf = TransferFunction::from_curve(freqs, mag, 2000.0).unwrap();
        let fs = find_formants(&tf, &FormantOptions { count: 3, f_min: 0.0, f_max: 999.0, ..Default::default() }).unwrap();
        assert!(fs.is_empty() && fs.shortfall);
        assert!(matches!(
            find_formants(&tf, &FormantOptions { count: 3, f_min: 2000.0, f_max: 3000.0, ..Default::default() }),
            Err(AnalysisError::EmptyBand { .. })
        ));
    }

    #[test]
    fn prominence_matches_hand_values() {
        let y = [0.0, 3.0, 1.0, 5.0, 5.0, 5.0, 2.0, 4.0, 0.0];
        assert_eq!(peak_prominences(&y), vec![(1, 2.0), (4, 5.0), (7, 2.0)]);
    }

    #[test]
    fn comparison_values() {
        let m = FormantSet::from_frequencies(vec![704.0]);
        let r = FormantSet::from_frequencies(vec![700.0]);
        let c = compare_formants(&m, &r).unwrap();
        assert_relative_eq!(c.rows[0].delta_hz, 4.0);
        assert!((c.rows[0].delta_percent - 0.57).abs() < 0.005);
        assert!(c.table("/a/").contains("0.57%"));
        let same = compare_formants(&r, &r).unwrap();
        assert_eq!(same.max_abs_percent(), 0.0);
        assert_eq!(
            compare_formants(&FormantSet::from_frequencies(vec![500.0]), &FormantSet::from_frequencies(vec![500.0, 1500.0]))
                .unwrap_err(),
            AnalysisError::CountMismatch { measured: 1, reference: 2 }
        );
    }

    #[test]
    fn exponential_window_turns_ringing_into_one_peak() {
        let rate = 20_000.0;
        let x: Vec<f64> = (0..1000).map(|n| (2.0 * PI * 1234.0 * n as f64 / rate).cos()).collect();
        let opts = SpectrumOptions {
            pad_to: 1 << 16,
            window: SpectrumWindow::ExponentialDecay { time_constant_s: 0.01 },
        };
        let tf = transfer_function(&x, rate, &opts, None).unwrap();
        let fs = find_formants(&tf, &FormantOptions { count: 3, f_min: 100.0, f_max: 5000.0, ..Default::default() }).unwrap();
        assert_eq!(fs.len(), 1);
        assert!((fs.frequencies[0] - 1234.0).abs() < 1.0);
    }
}
