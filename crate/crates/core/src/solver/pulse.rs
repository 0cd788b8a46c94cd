use std::f64::consts::PI;

use super::SolverError;

/// Prescribed glottal velocity, one sample (m/s) per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSignal {
    samples: Vec<f64>,
    pub description: String,
}

impl ExcitationSignal {
    pub fn new(samples: Vec<f64>, description: impl Into<String>) -> Self {
        Self {
            samples,
            description: description.into(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![0.0; len], "silence")
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends zeros up to `len` samples.
    pub fn zero_padded(mut self, len: usize) -> Self {
        if self.samples.len() < len {
            self.samples.resize(len, 0.0);
        }
        self
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.samples.iter().map(|v| v * factor).collect(),
            format!("{} x{factor}", self.description),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub length: usize,
    pub low_cut: f64,
    pub high_cut: f64,
    pub amplitude: f64,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            length: 2048,
            low_cut: 20.0,
            high_cut: 20_000.0,
            amplitude: 1.0,
        }
    }
}

/// Blackman transition width (≈ 74 dB stopband) in Hz for `length` taps.
pub fn blackman_transition(rate: f64, length: usize) -> f64 {
    5.5 * rate / length as f64
}

fn blackman(n: usize, len: usize) -> f64 {
    if len == 1 {
        return 1.0;
    }
    let x = 2.0 * PI * n as f64 / (len - 1) as f64;
    0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos()
}

/// Ideal low-pass impulse response at cutoff `fc` (Hz), centered.
fn sinc_lowpass(fc: f64, rate: f64, n: usize, len: usize) -> f64 {
    let t = n as f64 - 0.5 * (len - 1) as f64;
    let w = 2.0 * fc / rate;
    if t == 0.0 {
        w
    } else {
        (PI * w * t).sin() / (PI * t)
    }
}

/// Band-passed velocity pulse: a Blackman-windowed sinc with its design
/// cutoffs pushed half a transition width outside `[low_cut, high_cut]`
/// so the band edges sit on the flat part of the response. When the
/// requested low cut is below what `length` taps can resolve the pulse is
/// a pure low-pass and passes DC. Peak sample magnitude equals
/// `amplitude`.
pub fn make_pulse(dt: f64, spec: &PulseSpec) -> Result<ExcitationSignal, SolverError> {
    let PulseSpec {
        length,
        low_cut,
        high_cut,
        amplitude,
    } = *spec;
    if !(dt > 0.0) {
        return Err(SolverError::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let rate = 1.0 / dt;
    let nyquist = 0.5 * rate;
    if !(0.0 <= low_cut && low_cut < high_cut && high_cut < nyquist) {
        return Err(SolverError::InvalidParameter(format!(
            "pulse band [{low_cut}, {high_cut}] Hz must satisfy 0 ≤ low < high < Nyquist ({nyquist} Hz)"
        )));
    }
    if length == 0 {
        return Err(SolverError::InvalidParameter("pulse length must be ≥ 1".into()));
    }
    if !amplitude.is_finite() {
        return Err(SolverError::InvalidParameter("pulse amplitude must be finite".into()));
    }
    let half_tw = 0.5 * blackman_transition(rate, length);
    let f_hi = (high_cut + half_tw).min(nyquist);
    let f_lo = low_cut - half_tw;
    let mut h: Vec<f64> = (0..length)
        .map(|n| {
            let mut v = sinc_lowpass(f_hi, rate, n, length);
            if f_lo > 0.0 {
                v -= sinc_lowpass(f_lo, rate, n, length);
            }
            v * blackman(n, length)
        })
        .collect();
    let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
    h.iter_mut().for_each(|v| *v *= scale);
    let shape = if f_lo > 0.0 { "band-pass" } else { "low-pass (low cut below resolution)" };
    Ok(ExcitationSignal::new(
        h,
        format!(
            "Blackman windowed-sinc {shape} pulse, {length} samples, {low_cut}-{high_cut} Hz, peak {amplitude} m/s"
        ),
    ))
}
