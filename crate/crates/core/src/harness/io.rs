use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::HarnessError;

pub const LISTENING_RATE: u32 = 44_100;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Runs `body` on a buffered writer for `path` and flushes it.
pub fn write_with<F>(path: &Path, body: F) -> Result<(), HarnessError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut out = create(path)?;
    body(&mut out).and_then(|_| out.flush()).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Config(e.to_string()))?;
    write_with(path, |w| writeln!(w, "{text}"))
}

/// Mono 32-bit float WAV.
pub fn write_wav(path: &Path, samples: &[f64], rate: u32) -> Result<(), HarnessError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let wav_err = |e: hound::Error| HarnessError::Wav {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in samples {
        w.write_sample(s as f32).map_err(wav_err)?;
    }
    w.finalize().map_err(wav_err)
}

/// Band-limited resampling by direct evaluation of a Blackman-windowed
/// sinc interpolator with cutoff at 0.45 of the lower of the two rates.
pub fn resample(x: &[f64], rate_in: f64, rate_out: f64) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let cutoff = 0.45 * rate_in.min(rate_out);
    // normalized to input samples
    let g = 2.0 * cutoff / rate_in;
    let half = (32.0 / g).ceil();
    let len_out = ((x.len() as f64) * rate_out / rate_in).floor() as usize;
    (0..len_out)
        .map(|m| {
            let t = m as f64 * rate_in / rate_out;
            let lo = (t - half).ceil().max(0.0) as usize;
            let hi = ((t + half).floor() as usize).min(x.len() - 1);
            (lo..=hi)
                .map(|n| {
                    let tau = t - n as f64;
                    let sinc = if tau == 0.0 { g } else { (PI * g * tau).sin() / (PI * tau) };
                    let w = 0.42 + 0.5 * (PI * tau / half).cos() + 0.08 * (2.0 * PI * tau / half).cos();
                    x[n] * sinc * w
                })
                .sum()
        })
        .collect()
}
