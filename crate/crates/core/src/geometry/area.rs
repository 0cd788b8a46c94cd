use std::f64::consts::PI;
use std::path::Path;

use super::GeometryError;

/// Radius multiplier that moves the first transverse mode of a 2D
/// mid-sagittal channel onto the first non-planar mode of a circular duct
/// (cut-on `1.84 c / 2πr` against `c / 4r'`).
pub const CIRCULAR_MODE_SCALE: f64 = 0.5 * PI / 1.84;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaSample {
    /// Distance from the glottis, meters.
    pub position: f64,
    /// Cross-sectional area, square meters.
    pub area: f64,
}

/// Cross-sectional area of a straight circular tube sampled along its axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaFunction {
    name: String,
    samples: Vec<AreaSample>,
}

impl AreaFunction {
    pub fn new(name: impl Into<String>, samples: Vec<AreaSample>) -> Result<Self, GeometryError> {
        if samples.len() < 2 {
            return Err(GeometryError::TooFewSamples(samples.len()));
        }
        for (k, s) in samples.iter().enumerate() {
            if !s.position.is_finite() || !s.area.is_finite() {
                return Err(GeometryError::Validation(format!("sample {k} is not finite")));
            }
            if s.area <= 0.0 {
                return Err(GeometryError::NonPositiveArea { index: k, area: s.area });
            }
            if k > 0 && s.position <= samples[k - 1].position {
                return Err(GeometryError::NonIncreasing { index: k });
            }
        }
        if samples[0].position != 0.0 {
            return Err(GeometryError::Validation(format!(
                "first sample must sit at position 0, found {}",
                samples[0].position
            )));
        }
        Ok(Self {
            name: name.into(),
            samples,
        })
    }

    /// Uniform tube of the given length and area.
    pub fn uniform(length: f64, area: f64) -> Result<Self, GeometryError> {
        Self::new(
            "uniform",
            vec![
                AreaSample { position: 0.0, area },
                AreaSample { position: length, area },
            ],
        )
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, GeometryError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut af = parse_area_function(&text)?;
        if let Some(stem) = path.file_stem() {
            af.name = stem.to_string_lossy().into_owned();
        }
        Ok(af)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[AreaSample] {
        &self.samples
    }

    pub fn length(&self) -> f64 {
        self.samples[self.samples.len() - 1].position
    }

    /// Section radius at `x`, linearly interpolated in radius between
    /// samples and held constant beyond either end.
    pub fn radius_at(&self, x: f64) -> f64 {
        let s = &self.samples;
        if x <= s[0].position {
            return radius(s[0].area);
        }
        let last = s.len() - 1;
        if x >= s[last].position {
            return radius(s[last].area);
        }
        // first sample strictly beyond x
        let hi = s.partition_point(|p| p.position <= x);
        let (a, b) = (&s[hi - 1], &s[hi]);
        let t = (x - a.position) / (b.position - a.position);
        let (ra, rb) = (radius(a.area), radius(b.area));
        ra + t * (rb - ra)
    }

    pub fn area_at(&self, x: f64) -> f64 {
        let r = self.radius_at(x);
        PI * r * r
    }

    pub fn max_radius(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| radius(s.area))
            .fold(0.0, f64::max)
    }

    /// Multiplies every section radius by [`CIRCULAR_MODE_SCALE`], i.e. every
    /// area by its square. Not idempotent.
    pub fn scale_radii(&self) -> Self {
        let k2 = CIRCULAR_MODE_SCALE * CIRCULAR_MODE_SCALE;
        Self {
            name: self.name.clone(),
            samples: self
                .samples
                .iter()
                .map(|s| AreaSample {
                    position: s.position,
                    area: s.area * k2,
                })
                .collect(),
        }
    }

    /// Serializes in the same two-column format accepted by
    /// [`parse_area_function`].
    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n# position_m area_m2\n", self.name);
        for s in &self.samples {
            out.push_str(&format!("{:e} {:e}\n", s.position, s.area));
        }
        out
    }
}

#[inline]
fn radius(area: f64) -> f64 {
    (area / PI).sqrt()
}

/// Parses the plain-text area-function format: one sample per line, two
/// whitespace-separated fields (position in m, area in m²), `#` comments
/// and blank lines ignored.
pub fn parse_area_function(text: &str) -> Result<AreaFunction, GeometryError> {
    let mut samples = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GeometryError::Parse {
                line: line_no,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| GeometryError::Parse {
                line: line_no,
                message: format!("{s:?}: {e}"),
            })
        };
        samples.push(AreaSample {
            position: parse(fields[0])?,
            area: parse(fields[1])?,
        });
    }
    AreaFunction::new("area-function", samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_minimal_uniform_tube() {
        let af = parse_area_function("0.0 2.0e-4\n0.175 2.0e-4").unwrap();
        assert_eq!(af.samples().len(), 2);
        assert_eq!(af.length(), 0.175);
        assert_eq!(af.samples()[1].area, 2.0e-4);
    }

    #[test]
    fn parses_three_samples_with_comments() {
        let af = parse_area_function("# vowel-ish\n\n0.0 1e-4\n0.05 3e-4\n  # mid\n0.17 1e-4\n").unwrap();
        assert_eq!(af.samples().len(), 3);
        assert_eq!(af.length(), 0.17);
    }

    #[test]
    fn rejects_decreasing_positions() {
        let err = parse_area_function("0.05 1e-4\n0.0 1e-4").unwrap_err();
        assert!(matches!(err, GeometryError::NonIncreasing { index: 1 }), "{err}");
        let err = parse_area_function("0.01 1e-4\n0.05 1e-4").unwrap_err();
        assert!(matches!(err, GeometryError::Validation(_)), "{err}");
        let err = parse_area_function("0.0 1e-4\n0.05 1e-4\n0.05 2e-4").unwrap_err();
        assert!(matches!(err, GeometryError::NonIncreasing { index: 2 }), "{err}");
    }

    #[test]
    fn rejects_bad_lines_with_line_number() {
        let err = parse_area_function("0.0 1e-4\n0.1 abc\n").unwrap_err();
        assert!(matches!(err, GeometryError::Parse { line: 2, .. }), "{err}");
        let err = parse_area_function("# c\n0.0 1e-4 7\n").unwrap_err();
        assert!(matches!(err, GeometryError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_non_positive_area_and_short_input() {
        assert!(matches!(
            parse_area_function("0.0 1e-4\n0.1 0.0").unwrap_err(),
            GeometryError::NonPositiveArea { index: 1, .. }
        ));
        assert!(matches!(
            parse_area_function("0.0 1e-4").unwrap_err(),
            GeometryError::TooFewSamples(1)
        ));
        assert!(matches!(
            parse_area_function("").unwrap_err(),
            GeometryError::TooFewSamples(0)
        ));
    }

    #[test]
    fn scale_factor_value() {
        // k = 1.570 796 / 1.84 = 0.853 694, k² = 0.728 793
        let af = AreaFunction::uniform(0.175, 2.0e-4).unwrap().scale_radii();
        assert_relative_eq!(af.samples()[0].area, 1.457_59e-4, max_relative = 1e-5);
        assert_relative_eq!(CIRCULAR_MODE_SCALE, 0.853_694, max_relative = 1e-6);
    }

    #[test]
    fn scaling_is_not_idempotent() {
        let af = AreaFunction::uniform(0.175, 2.0e-4).unwrap();
        let once = af.scale_radii();
        let twice = once.scale_radii();
        assert_ne!(once, twice);
        assert!(twice.samples()[0].area < once.samples()[0].area);
    }

    #[test]
    fn radius_interpolates_linearly_in_radius() {
        let af = AreaFunction::new(
            "t",
            vec![
                AreaSample { position: 0.0, area: PI * 1e-6 },
                AreaSample { position: 0.1, area: PI * 9e-6 },
            ],
        )
        .unwrap();
        assert_relative_eq!(af.radius_at(0.05), 2e-3, max_relative = 1e-12);
        assert_relative_eq!(af.radius_at(-1.0), 1e-3, max_relative = 1e-12);
        assert_relative_eq!(af.radius_at(5.0), 3e-3, max_relative = 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let af = parse_area_function("0.0 1e-4\n0.05 3e-4\n0.17 1e-4").unwrap();
        let back = parse_area_function(&af.to_text()).unwrap();
        assert_eq!(af.samples(), back.samples());
    }
}
