//! Lossless plane-wave reference for straight tubes.
//!
//! Each uniform segment of length `l` and area `A` maps mouth-side
//! pressure and volume velocity to the glottis side through
//!
//! ```text
//! [p_in]   [ cos kl       j Z sin kl ] [p_out]
//! [U_in] = [ j sin kl / Z   cos kl   ] [U_out],   Z = ρc/A, k = 2πf/c
//! ```
//!
//! With a zero-pressure mouth, `U_in = T22 U_out`, so the glottis-to-mouth
//! volume velocity transfer is `1/|T22|` of the chain product `T`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{find_formants, to_db, AnalysisError, FormantOptions, FormantSet, TransferFunction};
use crate::geometry::AreaFunction;

/// Cap on the lossless response so exact poles stay finite.
pub const MAX_RESPONSE: f64 = 1e12;
pub const DEFAULT_SWEEP_STEP: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("segment length {segment} m exceeds tube length {length} m")]
    SegmentTooLong { segment: f64, length: f64 },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length: f64,
    pub area: f64,
}

/// Piecewise-uniform tube, glottis first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentChain {
    segments: Vec<Segment>,
    pub c: f64,
    pub rho: f64,
}

pub type Matrix2 = [[Complex64; 2]; 2];

fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn determinant(m: &Matrix2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl SegmentChain {
    pub fn new(segments: Vec<Segment>, c: f64, rho: f64) -> Result<Self, OracleError> {
        if segments.is_empty() {
            return Err(OracleError::InvalidParameter("chain needs at least one segment".into()));
        }
        if let Some(s) = segments.iter().find(|s| !(s.length > 0.0 && s.area > 0.0)) {
            return Err(OracleError::InvalidParameter(format!(
                "segment length and area must be > 0, got {s:?}"
            )));
        }
        if !(c > 0.0 && rho > 0.0) {
            return Err(OracleError::InvalidParameter("c and rho must be > 0".into()));
        }
        Ok(Self { segments, c, rho })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn segment_matrix(&self, s: &Segment, freq: f64) -> Matrix2 {
        let kl = 2.0 * std::f64::consts::PI * freq / self.c * s.length;
        let z = self.rho * self.c / s.area;
        let (sin, cos) = kl.sin_cos();
        let j = Complex64::new(0.0, 1.0);
        [
            [Complex64::new(cos, 0.0), j * z * sin],
            [j * sin / z, Complex64::new(cos, 0.0)],
        ]
    }

    /// Product of all segment matrices, glottis to mouth.
    pub fn matrix(&self, freq: f64) -> Matrix2 {
        self.segments
            .iter()
            .map(|s| self.segment_matrix(s, freq))
            .reduce(|acc, m| mul(&acc, &m))
            .expect("chain is non-empty")
    }
}

/// Uniform segments of `segment_length` sampling the area function at
/// their midpoints; the last segment absorbs the remainder so the chain
/// has the tube's exact length.
pub fn chain_from_area_function(
    af: &AreaFunction,
    segment_length: f64,
    c: f64,
    rho: f64,
) -> Result<SegmentChain, OracleError> {
    if !(segment_length > 0.0) {
        return Err(OracleError::InvalidParameter(format!(
            "segment length must be > 0, got {segment_length}"
        )));
    }
    let length = af.length();
    if segment_length > length * (1.0 + 1e-12) {
        return Err(OracleError::SegmentTooLong {
            segment: segment_length,
            length,
        });
    }
    let n = ((length / segment_length) - 1e-9).ceil().max(1.0) as usize;
    let segments = (0..n)
        .map(|k| {
            let x0 = k as f64 * segment_length;
            let x1 = if k + 1 == n { length } else { x0 + segment_length };
            Segment {
                length: x1 - x0,
                area: af.area_at(0.5 * (x0 + x1)),
            }
        })
        .collect();
    SegmentChain::new(segments, c, rho)
}

/// `|U_mouth / U_glottis|` for a velocity source at the glottis and a
/// zero-pressure mouth, capped at [`MAX_RESPONSE`].
pub fn input_output_response(chain: &SegmentChain, freqs: &[f64]) -> Result<Vec<f64>, OracleError> {
    if let Some(f) = freqs.iter().find(|f| !(**f > 0.0)) {
        return Err(OracleError::InvalidParameter(format!("frequencies must be > 0, got {f}")));
    }
    Ok(freqs
        .iter()
        .map(|&f| {
            let t22 = chain.matrix(f)[1][1].norm();
            if t22 * MAX_RESPONSE > 1.0 {
                1.0 / t22
            } else {
                MAX_RESPONSE
            }
        })
        .collect())
}

/// Response sampled every `step` Hz from `step` to `f_max` as a transfer
/// function in dB.
pub fn oracle_transfer_function(chain: &SegmentChain, f_max: f64, step: f64) -> Result<TransferFunction, OracleError> {
    if !(step > 0.0 && f_max > step) {
        return Err(OracleError::InvalidParameter(format!(
            "sweep needs 0 < step < f_max, got step {step}, f_max {f_max}"
        )));
    }
    let n = (f_max / step).floor() as usize;
    let freqs: Vec<f64> = (1..=n).map(|k| k as f64 * step).collect();
    let mags = input_output_response(chain, &freqs)?;
    Ok(TransferFunction::from_curve(
        freqs,
        mags.into_iter().map(to_db).collect(),
        2.0 * f_max,
    )?)
}

/// Formants of the chain from a 1 Hz sweep up to `f_max`.
pub fn oracle_formants(chain: &SegmentChain, f_max: f64, count: usize) -> Result<FormantSet, OracleError> {
    if count == 0 {
        return Err(OracleError::InvalidParameter("formant count must be ≥ 1".into()));
    }
    let tf = oracle_transfer_function(chain, f_max, DEFAULT_SWEEP_STEP)?;
    Ok(find_formants(
        &tf,
        &FormantOptions {
            count,
            f_min: DEFAULT_SWEEP_STEP,
            f_max,
            ..Default::default()
        },
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AreaSample;

    fn uniform() -> AreaFunction {
        AreaFunction::uniform(0.175, 2.0e-4).unwrap()
    }

    #[test]
    fn segment_counts() {
        let chain = chain_from_area_function(&uniform(), 0.005, 350.0, 1.14).unwrap();
        assert_eq!(chain.segments().len(), 35);
        assert!(chain.segments().iter().all(|s| (s.area - 2.0e-4).abs() < 1e-18));
        assert!((chain.length() - 0.175).abs() < 1e-15);
        assert!(matches!(
            chain_from_area_function(&uniform(), 1.0, 350.0, 1.14),
            Err(OracleError::SegmentTooLong { .. })
        ));
    }

    #[test]
    fn single_segment_matches_closed_form() {
        let chain = SegmentChain::new(vec![Segment { length: 0.175, area: 3e-4 }], 350.0, 1.14).unwrap();
        for f in [123.0, 777.0, 4321.0] {
            let want = 1.0 / (2.0 * std::f64::consts::PI * f * 0.175 / 350.0).cos().abs();
            let got = input_output_response(&chain, &[f]).unwrap()[0];
            assert!((got - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn uniform_tube_quarter_wave_formants() {
        let chain = chain_from_area_function(&uniform(), 0.005, 350.0, 1.14).unwrap();
        let fs = oracle_formants(&chain, 3000.0, 3).unwrap();
        for (got, k) in fs.frequencies.iter().zip(1..) {
            let want = (2 * k - 1) as f64 * 350.0 / (4.0 * 0.175);
            assert!((got - want).abs() <= 1.0, "{got} vs {want}");
        }
        assert!(oracle_formants(&chain, 3000.0, 0).is_err());
    }

    #[test]
    fn determinants_are_unity() {
        let af = AreaFunction::new(
            "horn",
            (0..8)
                .map(|k| AreaSample {
                    position: k as f64 * 0.02,
                    area: 1e-4 * (1.0 + k as f64),
                })
                .collect(),
        )
        .unwrap();
        let chain = chain_from_area_function(&af, 0.003, 350.0, 1.14).unwrap();
        for f in [50.0, 1000.0, 9000.0] {
            for s in chain.segments() {
                assert!((determinant(&chain.segment_matrix(s, f)) - 1.0).norm() < 1e-12);
            }
        }
    }
}
