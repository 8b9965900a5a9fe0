//! Analytic initial data and the shipped test corpus.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::io::load_field;
use crate::miura::from_log_potential;

/// `a·e^{iθ}·e^{−|z−c|²/w²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

impl GaussianTerm {
    pub fn new(amplitude: f64) -> Self {
        Self {
            amplitude,
            phase: 0.0,
            center: [0.0, 0.0],
            width: 1.0,
        }
    }

    pub fn at(mut self, x: f64, y: f64) -> Self {
        self.center = [x, y];
        self
    }

    pub fn with_width(mut self, w: f64) -> Self {
        self.width = w;
        self
    }

    pub fn with_phase(mut self, theta: f64) -> Self {
        self.phase = theta;
        self
    }

    /// Center and width divided by `λ`, amplitude multiplied by `factor`.
    fn dilated(self, lambda: f64, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            center: self.center.map(|c| c / lambda),
            width: self.width / lambda,
            ..self
        }
    }

    /// `λ·t(λz)`.
    pub fn rescaled(self, lambda: f64) -> Self {
        self.dilated(lambda, lambda)
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        let r2 = (z.re - self.center[0]).powi(2) + (z.im - self.center[1]).powi(2);
        Complex64::from_polar(self.amplitude, self.phase) * (-r2 / (self.width * self.width)).exp()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.amplitude.is_finite()
            && self.phase.is_finite()
            && self.center.iter().all(|c| c.is_finite())
            && self.width.is_finite()
            && self.width > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Usage(format!("invalid Gaussian term {self:?}")))
        }
    }
}

/// What a datum is meant to be used as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatumRole {
    /// A complex field for mNV or DS-II.
    Field,
    /// A field satisfying `Im ∂u = 0`.
    Constrained,
    /// A real NV potential.
    Potential,
}

/// A named analytic family, or a field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Datum {
    Gaussian(GaussianTerm),
    GaussianSum {
        terms: Vec<GaussianTerm>,
    },
    /// `u = 2∂̄φ` with real `φ` a sum of Gaussians (phases ignored).
    Constrained {
        phi: Vec<GaussianTerm>,
    },
    /// `q = −depth·e^{−|z|²/w²}`.
    DeepWell {
        depth: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// `q = −A·(1 + |z|²/w²)^{−3}`.
    NvFocusing {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
    File {
        path: PathBuf,
    },
}

impl Datum {
    pub fn role(&self) -> DatumRole {
        match self {
            Datum::Gaussian(_) | Datum::GaussianSum { .. } | Datum::File { .. } => DatumRole::Field,
            Datum::Constrained { .. } => DatumRole::Constrained,
            Datum::DeepWell { .. } | Datum::NvFocusing { .. } => DatumRole::Potential,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Datum::Gaussian(t) => t.validate(),
            Datum::GaussianSum { terms } | Datum::Constrained { phi: terms } => {
                if terms.is_empty() {
                    return Err(Error::Usage("empty Gaussian sum".into()));
                }
                terms.iter().try_for_each(GaussianTerm::validate)
            }
            Datum::DeepWell { depth: a, width }
            | Datum::NvFocusing {
                amplitude: a,
                width,
            } => {
                if a.is_finite() && width.is_finite() && *width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Usage(format!(
                        "invalid potential parameters {self:?}"
                    )))
                }
            }
            Datum::File { .. } => Ok(()),
        }
    }

    /// The datum of the rescaled solution: `λu(λz)` for fields and
    /// `λ²q(λz)` for potentials.
    pub fn rescaled(&self, lambda: f64) -> Result<Datum> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Usage(format!(
                "scale factor must be positive, got {lambda}"
            )));
        }
        let map = |terms: &[GaussianTerm], factor: f64| {
            terms.iter().map(|t| t.dilated(lambda, factor)).collect()
        };
        Ok(match self {
            Datum::Gaussian(t) => Datum::Gaussian(t.rescaled(lambda)),
            Datum::GaussianSum { terms } => Datum::GaussianSum {
                terms: map(terms, lambda),
            },
            Datum::Constrained { phi } => Datum::Constrained { phi: map(phi, 1.0) },
            Datum::DeepWell { depth, width } => Datum::DeepWell {
                depth: depth * lambda * lambda,
                width: width / lambda,
            },
            Datum::NvFocusing { amplitude, width } => Datum::NvFocusing {
                amplitude: amplitude * lambda * lambda,
                width: width / lambda,
            },
            Datum::File { .. } => {
                return Err(Error::Usage("a field file cannot be rescaled".into()))
            }
        })
    }

    /// Samples the datum on `grid`.
    pub fn sample(&self, grid: GridSpec) -> Result<Field> {
        self.validate()?;
        let sum = |terms: &[GaussianTerm]| {
            Field::from_fn(grid, |z| terms.iter().map(|t| t.eval(z)).sum())
        };
        match self {
            Datum::Gaussian(t) => Ok(sum(std::slice::from_ref(t))),
            Datum::GaussianSum { terms } => Ok(sum(terms)),
            Datum::Constrained { phi } => {
                let phi: Vec<GaussianTerm> = phi.iter().map(|t| t.with_phase(0.0)).collect();
                from_log_potential(&sum(&phi))
            }
            Datum::DeepWell { depth, width } => Ok(Field::from_real_fn(grid, |x, y| {
                -depth * (-(x * x + y * y) / (width * width)).exp()
            })),
            Datum::NvFocusing { amplitude, width } => Ok(Field::from_real_fn(grid, |x, y| {
                -amplitude * (1.0 + (x * x + y * y) / (width * width)).powi(-3)
            })),
            Datum::File { path } => {
                let f = load_field(path)?;
                f.expect_tag(SpaceTag::Physical)?;
                f.expect_grid(&grid)?;
                Ok(f)
            }
        }
    }
}

/// A named corpus member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub name: String,
    pub datum: Datum,
}

fn member(name: &str, datum: Datum) -> Member {
    Member {
        name: name.into(),
        datum,
    }
}

/// The shipped corpus of complex fields, constrained fields and
/// potentials.
pub fn corpus() -> Vec<Member> {
    let g = GaussianTerm::new;
    vec![
        member("unit-gaussian", Datum::Gaussian(g(1.0))),
        member("half-gaussian", Datum::Gaussian(g(0.5))),
        member("small-gaussian", Datum::Gaussian(g(0.1))),
        member(
            "shifted-gaussian",
            Datum::Gaussian(g(0.7).with_phase(0.6).at(0.4, -0.3).with_width(0.8)),
        ),
        member(
            "superposition",
            Datum::GaussianSum {
                terms: vec![
                    g(0.5).at(-0.6, 0.2),
                    g(0.4).with_phase(2.0).at(0.7, -0.4).with_width(0.7),
                ],
            },
        ),
        member("constrained-a", Datum::Constrained { phi: vec![g(0.5)] }),
        member(
            "constrained-b",
            Datum::Constrained {
                phi: vec![g(0.4).at(0.3, 0.2).with_width(0.9), g(-0.3).at(-0.5, -0.4)],
            },
        ),
        member(
            "constrained-small",
            Datum::Constrained { phi: vec![g(0.08)] },
        ),
        member(
            "deep-well",
            Datum::DeepWell {
                depth: 10.0,
                width: 1.0,
            },
        ),
    ]
}

pub fn corpus_member(name: &str) -> Option<Member> {
    corpus().into_iter().find(|m| m.name == name)
}

/// `count` seeded random superpositions of three Gaussians, each term with
/// modulus `amplitude·[0.5, 1]`, a random phase, a center in `[−1, 1]²` and
/// a width in `[0.7, 1.3]`.
pub fn gaussian_ensemble(count: usize, amplitude: f64, seed: u64) -> Vec<Member> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let terms = (0..3)
                .map(|_| {
                    GaussianTerm::new(amplitude * rng.random_range(0.5..1.0))
                        .with_phase(rng.random_range(0.0..std::f64::consts::TAU))
                        .at(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        .with_width(rng.random_range(0.7..1.3))
                })
                .collect();
            member(&format!("ensemble-{i:02}"), Datum::GaussianSum { terms })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miura::constraint_violation;

    #[test]
    fn corpus_samples_and_roles() {
        let grid = GridSpec::new(32, 8.0).unwrap();
        for m in corpus() {
            let f = m.datum.sample(grid).unwrap();
            assert!(f.max_abs() > 0.0, "{}", m.name);
            match m.datum.role() {
                DatumRole::Constrained => assert!(constraint_violation(&f).unwrap() < 1e-12),
                DatumRole::Potential => assert_eq!(f.imag_fraction(), 0.0),
                DatumRole::Field => {}
            }
        }
    }

    #[test]
    fn datum_json_roundtrip() {
        for m in corpus() {
            let s = serde_json::to_string(&m.datum).unwrap();
            let back: Datum = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m.datum);
        }
        let d: Datum = serde_json::from_str(r#"{"family":"gaussian","amplitude":0.5}"#).unwrap();
        assert_eq!(d, Datum::Gaussian(GaussianTerm::new(0.5)));
    }

    #[test]
    fn ensemble_is_seeded() {
        assert_eq!(gaussian_ensemble(3, 0.5, 9), gaussian_ensemble(3, 0.5, 9));
        assert_ne!(gaussian_ensemble(3, 0.5, 9), gaussian_ensemble(3, 0.5, 10));
    }

    #[test]
    fn rescaling_matches_dilated_samples() {
        let lam = 2.0;
        let (g, gs) = (
            GridSpec::new(32, 8.0).unwrap(),
            GridSpec::new(32, 4.0).unwrap(),
        );
        for m in corpus() {
            let a = m.datum.sample(g).unwrap();
            let b = m.datum.rescaled(lam).unwrap().sample(gs).unwrap();
            let power = if m.datum.role() == DatumRole::Potential {
                2
            } else {
                1
            };
            let expect = a.scale_re(lam.powi(power));
            assert!(
                b.values()
                    .iter()
                    .zip(expect.values())
                    .all(|(x, y)| (x - y).norm() < 1e-12),
                "{}",
                m.name
            );
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let grid = GridSpec::new(16, 4.0).unwrap();
        assert!(Datum::Gaussian(GaussianTerm::new(1.0).with_width(0.0))
            .sample(grid)
            .is_err());
        assert!(Datum::GaussianSum { terms: vec![] }.sample(grid).is_err());
        assert!(Datum::DeepWell {
            depth: f64::NAN,
            width: 1.0
        }
        .sample(grid)
        .is_err());
    }
}
