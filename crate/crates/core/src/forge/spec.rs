use std::fmt;

use super::geometric::{mirror_h, rotate, DEFAULT_FILL, DEFAULT_MIN_VISIBLE};
use super::photometric::{blur, fog, illumination, rain, seasonal, sensor_noise, Glare, RainParams};
use super::raster::RasterImage;
use super::TransformResult;
use crate::annotation::NormBox;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriftKind {
    MirrorH,
    Rotate,
    Blur,
    Illumination,
    Fog,
    Rain,
    Seasonal,
    SensorNoise,
}

impl DriftKind {
    pub const ALL: [DriftKind; 8] = [
        DriftKind::MirrorH,
        DriftKind::Rotate,
        DriftKind::Blur,
        DriftKind::Illumination,
        DriftKind::Fog,
        DriftKind::Rain,
        DriftKind::Seasonal,
        DriftKind::SensorNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DriftKind::MirrorH => "mirror_h",
            DriftKind::Rotate => "rotate",
            DriftKind::Blur => "blur",
            DriftKind::Illumination => "illumination",
            DriftKind::Fog => "fog",
            DriftKind::Rain => "rain",
            DriftKind::Seasonal => "seasonal",
            DriftKind::SensorNoise => "sensor_noise",
        }
    }

    pub fn is_geometric(self) -> bool {
        matches!(self, DriftKind::MirrorH | DriftKind::Rotate)
    }
}

/// One transform with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftOp {
    MirrorH,
    Rotate {
        angle_deg: f64,
        fill: [u8; 3],
        min_visible: f64,
    },
    Blur {
        sigma: f64,
    },
    Illumination {
        gamma: f64,
        gain: f64,
        glare: Option<Glare>,
    },
    Fog {
        density: f64,
    },
    Rain(RainParams),
    Seasonal {
        temp_shift: f64,
    },
    SensorNoise {
        noise_sigma: f64,
        defocus_sigma: f64,
    },
}

fn require(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid(what()))
    }
}

fn finite_at_least(v: f64, lo: f64) -> bool {
    v.is_finite() && v >= lo
}

fn unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

impl DriftOp {
    pub fn kind(&self) -> DriftKind {
        match self {
            DriftOp::MirrorH => DriftKind::MirrorH,
            DriftOp::Rotate { .. } => DriftKind::Rotate,
            DriftOp::Blur { .. } => DriftKind::Blur,
            DriftOp::Illumination { .. } => DriftKind::Illumination,
            DriftOp::Fog { .. } => DriftKind::Fog,
            DriftOp::Rain(_) => DriftKind::Rain,
            DriftOp::Seasonal { .. } => DriftKind::Seasonal,
            DriftOp::SensorNoise { .. } => DriftKind::SensorNoise,
        }
    }

    pub fn is_geometric(&self) -> bool {
        self.kind().is_geometric()
    }

    /// Checks the parameter ranges of the transform.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DriftOp::MirrorH => Ok(()),
            DriftOp::Rotate {
                angle_deg,
                min_visible,
                ..
            } => {
                require(angle_deg > -180.0 && angle_deg <= 180.0, || {
                    format!("rotation angle {angle_deg} outside (-180, 180]")
                })?;
                require(unit(min_visible), || {
                    format!("min_visible {min_visible} outside [0, 1]")
                })
            }
            DriftOp::Blur { sigma } => require(finite_at_least(sigma, 0.0), || {
                format!("blur sigma {sigma} must be >= 0")
            }),
            DriftOp::Illumination { gamma, gain, glare } => {
                require(gamma.is_finite() && gamma > 0.0, || format!("gamma {gamma} must be > 0"))?;
                require(gain.is_finite() && gain > 0.0, || format!("gain {gain} must be > 0"))?;
                if let Some(g) = glare {
                    require(unit(g.intensity), || {
                        format!("glare intensity {} outside [0, 1]", g.intensity)
                    })?;
                    require(g.rx > 0.0 && g.ry > 0.0 && g.rx.is_finite() && g.ry.is_finite(), || {
                        "glare radii must be positive".to_string()
                    })?;
                    require(g.cx.is_finite() && g.cy.is_finite(), || {
                        "glare center must be finite".to_string()
                    })?;
                }
                Ok(())
            }
            DriftOp::Fog { density } => require(unit(density), || {
                format!("fog density {density} outside [0, 1]")
            }),
            DriftOp::Rain(p) => {
                require(p.length_px.is_finite() && p.length_px > 0.0, || {
                    format!("rain length {} must be > 0", p.length_px)
                })?;
                require(p.angle_deg.is_finite(), || "rain angle must be finite".to_string())?;
                require(unit(p.alpha), || format!("rain alpha {} outside [0, 1]", p.alpha))
            }
            DriftOp::Seasonal { temp_shift } => require((-1.0..=1.0).contains(&temp_shift), || {
                format!("seasonal shift {temp_shift} outside [-1, 1]")
            }),
            DriftOp::SensorNoise {
                noise_sigma,
                defocus_sigma,
            } => {
                require(finite_at_least(noise_sigma, 0.0), || {
                    format!("noise sigma {noise_sigma} must be >= 0")
                })?;
                require(finite_at_least(defocus_sigma, 0.0), || {
                    format!("defocus sigma {defocus_sigma} must be >= 0")
                })
            }
        }
    }

    /// Runs the transform. Photometric kinds copy the boxes through.
    pub fn apply<T: Scalar>(
        &self,
        image: &RasterImage,
        boxes: &[NormBox<T>],
        seed: u64,
    ) -> TransformResult<T> {
        let photometric = |image: RasterImage| TransformResult {
            image,
            boxes: boxes.to_vec(),
            dropped: 0,
        };
        match *self {
            DriftOp::MirrorH => mirror_h(image, boxes),
            DriftOp::Rotate {
                angle_deg,
                fill,
                min_visible,
            } => rotate(image, boxes, angle_deg, fill, min_visible),
            DriftOp::Blur { sigma } => photometric(blur(image, sigma)),
            DriftOp::Illumination { gamma, gain, glare } => {
                photometric(illumination(image, gamma, gain, glare))
            }
            DriftOp::Fog { density } => photometric(fog(image, density)),
            DriftOp::Rain(p) => photometric(rain(image, p, seed)),
            DriftOp::Seasonal { temp_shift } => photometric(seasonal(image, temp_shift)),
            DriftOp::SensorNoise {
                noise_sigma,
                defocus_sigma,
            } => photometric(sensor_noise(image, noise_sigma, defocus_sigma, seed)),
        }
    }
}

/// Renders the op as a spec-file line (without any `seed=` key).
impl fmt::Display for DriftOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind().name())?;
        match self {
            DriftOp::MirrorH => Ok(()),
            DriftOp::Rotate {
                angle_deg,
                fill,
                min_visible,
            } => write!(
                f,
                " angle={angle_deg} fill={},{},{} min_visible={min_visible}",
                fill[0], fill[1], fill[2]
            ),
            DriftOp::Blur { sigma } => write!(f, " sigma={sigma}"),
            DriftOp::Illumination { gamma, gain, glare } => {
                write!(f, " gamma={gamma} gain={gain}")?;
                if let Some(g) = glare {
                    write!(f, " glare={},{},{},{},{}", g.cx, g.cy, g.rx, g.ry, g.intensity)?;
                }
                Ok(())
            }
            DriftOp::Fog { density } => write!(f, " density={density}"),
            DriftOp::Rain(p) => write!(
                f,
                " count={} length={} angle={} alpha={}",
                p.streaks, p.length_px, p.angle_deg, p.alpha
            ),
            DriftOp::Seasonal { temp_shift } => write!(f, " shift={temp_shift}"),
            DriftOp::SensorNoise {
                noise_sigma,
                defocus_sigma,
            } => write!(f, " noise={noise_sigma} defocus={defocus_sigma}"),
        }
    }
}

/// A validated transform plus the seed its randomness derives from.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpec {
    op: DriftOp,
    seed: u64,
}

impl DriftSpec {
    pub fn new(op: DriftOp, seed: u64) -> Result<Self> {
        op.validate()?;
        Ok(DriftSpec { op, seed })
    }

    pub fn op(&self) -> &DriftOp {
        &self.op
    }

    pub fn kind(&self) -> DriftKind {
        self.op.kind()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

struct Params<'a> {
    line: usize,
    pairs: Vec<(&'a str, &'a str)>,
    used: Vec<bool>,
}

impl<'a> Params<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Spec {
            line: self.line,
            message: message.into(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        let i = self.pairs.iter().position(|(k, _)| *k == key)?;
        self.used[i] = true;
        Some(self.pairs[i].1)
    }

    fn num(&mut self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| self.err(format!("{key}: malformed number {v:?}"))),
        }
    }

    fn num_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        self.num(key)?
            .ok_or_else(|| self.err(format!("missing parameter {key}")))
    }

    fn list(&mut self, key: &str, n: usize) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let items: std::result::Result<Vec<f64>, _> = v.split(',').map(str::parse::<f64>).collect();
        match items {
            Ok(items) if items.len() == n => Ok(Some(items)),
            _ => Err(self.err(format!("{key}: expected {n} comma-separated numbers, got {v:?}"))),
        }
    }

    fn finish(&self) -> Result<()> {
        if let Some(i) = self.used.iter().position(|u| !u) {
            return Err(self.err(format!("unknown parameter {}", self.pairs[i].0)));
        }
        Ok(())
    }
}

fn parse_line(line: usize, text: &str, default_seed: u64) -> Result<DriftSpec> {
    let mut tokens = text.split_whitespace();
    let kind_name = tokens.next().unwrap_or_default();
    let mut pairs = Vec::new();
    for tok in tokens {
        let Some((k, v)) = tok.split_once('=') else {
            return Err(Error::Spec {
                line,
                message: format!("expected key=value, got {tok:?}"),
            });
        };
        if pairs.iter().any(|(p, _)| *p == k) {
            return Err(Error::Spec {
                line,
                message: format!("duplicate parameter {k}"),
            });
        }
        pairs.push((k, v));
    }
    let mut p = Params {
        line,
        used: vec![false; pairs.len()],
        pairs,
    };
    let Some(kind) = DriftKind::ALL.into_iter().find(|k| k.name() == kind_name) else {
        return Err(p.err(format!("unknown transform {kind_name:?}")));
    };
    let seed = match p.raw("seed") {
        None => default_seed,
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| p.err(format!("seed: malformed integer {v:?}")))?,
    };
    let op = match kind {
        DriftKind::MirrorH => DriftOp::MirrorH,
        DriftKind::Rotate => {
            let angle_deg = p.required("angle")?;
            let fill = match p.list("fill", 3)? {
                None => DEFAULT_FILL,
                Some(v) => {
                    if v.iter().any(|c| !(0.0..=255.0).contains(c) || c.fract() != 0.0) {
                        return Err(p.err("fill: channels must be integers in 0..=255"));
                    }
                    [v[0] as u8, v[1] as u8, v[2] as u8]
                }
            };
            let min_visible = p.num_or("min_visible", DEFAULT_MIN_VISIBLE)?;
            DriftOp::Rotate {
                angle_deg,
                fill,
                min_visible,
            }
        }
        DriftKind::Blur => DriftOp::Blur {
            sigma: p.required("sigma")?,
        },
        DriftKind::Illumination => {
            let gamma = p.num_or("gamma", 1.0)?;
            let gain = p.num_or("gain", 1.0)?;
            let glare = p.list("glare", 5)?.map(|v| Glare {
                cx: v[0],
                cy: v[1],
                rx: v[2],
                ry: v[3],
                intensity: v[4],
            });
            DriftOp::Illumination { gamma, gain, glare }
        }
        DriftKind::Fog => DriftOp::Fog {
            density: p.required("density")?,
        },
        DriftKind::Rain => {
            let count = p.required("count")?;
            if count < 0.0 || count.fract() != 0.0 || count > f64::from(u32::MAX) {
                return Err(p.err("count must be a non-negative integer"));
            }
            DriftOp::Rain(RainParams {
                streaks: count as u32,
                length_px: p.num_or("length", 12.0)?,
                angle_deg: p.num_or("angle", 10.0)?,
                alpha: p.num_or("alpha", 0.6)?,
            })
        }
        DriftKind::Seasonal => DriftOp::Seasonal {
            temp_shift: p.required("shift")?,
        },
        DriftKind::SensorNoise => DriftOp::SensorNoise {
            noise_sigma: p.num_or("noise", 0.0)?,
            defocus_sigma: p.num_or("defocus", 0.0)?,
        },
    };
    p.finish()?;
    DriftSpec::new(op, seed).map_err(|e| match e {
        Error::Invalid(message) => Error::Spec { line, message },
        other => other,
    })
}

/// Parses a drift pipeline: one transform per line as
/// `<kind> key=value ...`. Blank lines and `#` comments are skipped. A
/// `seed=<u64>` key overrides `default_seed` for that line.
pub fn parse_spec_file(text: &str, default_seed: u64) -> Result<Vec<DriftSpec>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or_default().trim();
            (!body.is_empty()).then_some((i + 1, body))
        })
        .map(|(line, body)| parse_line(line, body, default_seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let specs = parse_spec_file("fog density=0.4\nrotate angle=12 fill=128,128,128\n", 5).unwrap();
        assert_eq!(specs[0].op(), &DriftOp::Fog { density: 0.4 });
        assert_eq!(
            specs[1].op(),
            &DriftOp::Rotate {
                angle_deg: 12.0,
                fill: [128, 128, 128],
                min_visible: DEFAULT_MIN_VISIBLE
            }
        );
        assert!(specs.iter().all(|s| s.seed() == 5));
    }

    #[test]
    fn comments_defaults_and_seed_override() {
        let text = "# pipeline\n\nmirror_h\nrain count=30 seed=9  # heavy\nsensor_noise noise=3\n";
        let specs = parse_spec_file(text, 1).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[1].seed(), 9);
        assert_eq!(
            specs[2].op(),
            &DriftOp::SensorNoise {
                noise_sigma: 3.0,
                defocus_sigma: 0.0
            }
        );
    }

    #[test]
    fn errors_name_the_line() {
        for (text, needle) in [
            ("fog density=0.2\nsnow amount=1\n", "unknown transform"),
            ("fog\n", "missing parameter density"),
            ("fog density=1.5\n", "outside [0, 1]"),
            ("fog density=0.1 foo=1\n", "unknown parameter foo"),
            ("rotate angle=-180\n", "outside (-180, 180]"),
            ("blur sigma=abc\n", "malformed number"),
            ("rotate angle=3 fill=1,2\n", "expected 3"),
            ("rain count=2.5\n", "non-negative integer"),
        ] {
            let err = parse_spec_file(text, 0).unwrap_err();
            assert!(matches!(err, Error::Spec { .. }), "{text}: {err}");
            assert!(err.to_string().contains(needle), "{text}: {err}");
        }
        let err = parse_spec_file("fog density=0.2\nsnow amount=1\n", 0).unwrap_err();
        assert!(matches!(err, Error::Spec { line: 2, .. }));
    }

    #[test]
    fn display_round_trips() {
        let ops = [
            DriftOp::MirrorH,
            DriftOp::Rotate {
                angle_deg: -12.5,
                fill: [1, 2, 3],
                min_visible: 0.25,
            },
            DriftOp::Blur { sigma: 1.25 },
            DriftOp::Illumination {
                gamma: 2.2,
                gain: 0.6,
                glare: Some(Glare {
                    cx: 0.7,
                    cy: 0.2,
                    rx: 0.3,
                    ry: 0.1,
                    intensity: 0.9,
                }),
            },
            DriftOp::Fog { density: 0.35 },
            DriftOp::Rain(RainParams {
                streaks: 120,
                length_px: 14.0,
                angle_deg: -8.0,
                alpha: 0.5,
            }),
            DriftOp::Seasonal { temp_shift: -0.7 },
            DriftOp::SensorNoise {
                noise_sigma: 6.0,
                defocus_sigma: 0.8,
            },
        ];
        for op in ops {
            let parsed = parse_spec_file(&op.to_string(), 3).unwrap();
            assert_eq!(parsed[0].op(), &op);
        }
    }

    #[test]
    fn geometric_kinds() {
        let geo: Vec<_> = DriftKind::ALL.iter().filter(|k| k.is_geometric()).collect();
        assert_eq!(geo, [&DriftKind::MirrorH, &DriftKind::Rotate]);
    }
}
