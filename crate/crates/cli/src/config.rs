//! Run configuration: TOML or JSON, validated before any compute.

use std::path::{Path, PathBuf};

use nvlab::corpus::Datum;
use nvlab::evolution::{EvolveParams, Model, ModelKind, Scheme};
use nvlab::miura::{EigenParams, NewtonParams};
use nvlab::scattering::JostParams;
use nvlab::validation::Scale;
use nvlab::{GridSpec, KGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGridConfig {
    pub nk: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_final: f64,
    pub dt: Option<f64>,
    pub scheme: String,
    /// Number of equal save intervals on `[0, t_final]`, ignored when
    /// `save_times` is given.
    pub saves: usize,
    pub save_times: Vec<f64>,
    pub dealias: bool,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_final: 0.05,
            dt: None,
            scheme: "ifrk4".into(),
            saves: 1,
            save_times: Vec::new(),
            dealias: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative residual for the Jost solves.
    pub jost: f64,
    /// Gate on `‖S(S u) − u‖₂/‖u‖₂`.
    pub involution: f64,
    /// Gate on `‖M⁻¹(M u) − u‖₂/‖u‖₂`.
    pub roundtrip: f64,
    /// Positivity tolerance relative to `1 + max|q|`.
    pub range: f64,
    /// Ritz residual for the eigenvalue certificate.
    pub eigen: f64,
    /// Target for `‖M(u) − q‖₂` in the Newton inversion.
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            jost: 1e-8,
            involution: 2e-2,
            roundtrip: 1e-8,
            range: 1e-6,
            eigen: 1e-8,
            newton: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub count: usize,
    pub amplitude: f64,
    pub lambdas: Vec<f64>,
    /// Node count of the physical grid; the box is `[-12/λ, 12/λ)²`.
    pub n: usize,
    /// Node count of the `k`-lattice; its box is `[-3λ, 3λ)²`.
    pub nk: usize,
    pub s: f64,
    pub r: f64,
    /// Time exponent of the space-time ratio; `0` skips it.
    pub p: f64,
    /// The space-time ratio integrates to `horizon/λ³`.
    pub horizon: f64,
    /// Save count of the space-time trajectory.
    pub samples: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            count: 20,
            amplitude: 0.5,
            lambdas: vec![0.5, 1.0, 2.0],
            n: 64,
            nk: 16,
            s: 0.25,
            r: 3.0,
            p: 6.0,
            horizon: 0.03,
            samples: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<String>,
    pub grid: GridConfig,
    pub kgrid: KGridConfig,
    pub model: String,
    pub datum: Option<Datum>,
    pub time: TimeConfig,
    pub tolerances: Tolerances,
    pub ensemble: EnsembleConfig,
    /// Gate ids for `validate`; empty runs all of them.
    pub gates: Vec<String>,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let desk = Scale::DESK;
        Self {
            command: None,
            grid: GridConfig {
                n: desk.n,
                half_width: desk.half_width,
            },
            kgrid: KGridConfig {
                nk: desk.nk,
                half_width: desk.k_half,
            },
            model: "mNV".into(),
            datum: None,
            time: TimeConfig::default(),
            tolerances: Tolerances::default(),
            ensemble: EnsembleConfig::default(),
            gates: Vec::new(),
            out: None,
            workers: 1,
            seed: 7,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl RunConfig {
    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(self.grid.n, self.grid.half_width)?)
    }

    pub fn kgrid(&self) -> Result<KGrid, CliError> {
        Ok(KGrid::new(self.kgrid.nk, self.kgrid.half_width)?)
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let kind: ModelKind = self.model.parse()?;
        Ok(Model::new(kind))
    }

    pub fn scheme(&self) -> Result<Scheme, CliError> {
        Ok(self.time.scheme.parse()?)
    }

    pub fn save_times(&self) -> Vec<f64> {
        if !self.time.save_times.is_empty() {
            return self.time.save_times.clone();
        }
        let m = self.time.saves.max(1);
        (0..=m)
            .map(|i| self.time.t_final * i as f64 / m as f64)
            .collect()
    }

    pub fn evolve_params(&self) -> Result<EvolveParams, CliError> {
        Ok(EvolveParams {
            scheme: self.scheme()?,
            dt: self.time.dt,
            dealias: self.time.dealias,
            save_times: self.save_times(),
            linear_only: false,
        })
    }

    pub fn jost(&self) -> JostParams {
        JostParams::with_tol(self.tolerances.jost)
    }

    pub fn eigen(&self) -> EigenParams {
        EigenParams {
            tol: self.tolerances.eigen,
            seed: self.seed,
            ..EigenParams::default()
        }
    }

    pub fn newton(&self) -> NewtonParams {
        NewtonParams {
            tol: self.tolerances.newton,
            ..NewtonParams::default()
        }
    }

    pub fn scale(&self) -> Scale {
        Scale {
            n: self.grid.n,
            half_width: self.grid.half_width,
            nk: self.kgrid.nk,
            k_half: self.kgrid.half_width,
        }
    }

    pub fn datum(&self) -> Result<&Datum, CliError> {
        self.datum
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [datum] section".into()))
    }

    /// Checks every numeric field against the module preconditions.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.kgrid()?;
        self.model()?;
        self.scheme()?;
        if !self.time.t_final.is_finite() {
            return Err(CliError::Config(format!(
                "time.t_final must be finite, got {}",
                self.time.t_final
            )));
        }
        if let Some(dt) = self.time.dt {
            positive("time.dt", dt)?;
        }
        if self.time.save_times.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Config("time.save_times must be finite".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.jost", t.jost),
            ("tolerances.involution", t.involution),
            ("tolerances.roundtrip", t.roundtrip),
            ("tolerances.range", t.range),
            ("tolerances.eigen", t.eigen),
            ("tolerances.newton", t.newton),
            ("ensemble.amplitude", self.ensemble.amplitude),
            ("ensemble.r", self.ensemble.r),
            ("ensemble.horizon", self.ensemble.horizon),
        ] {
            positive(name, v)?;
        }
        for &l in &self.ensemble.lambdas {
            positive("ensemble.lambdas", l)?;
        }
        if self.ensemble.count == 0 {
            return Err(CliError::Config("ensemble.count must be at least 1".into()));
        }
        if self.ensemble.p != 0.0 && self.ensemble.samples < 2 {
            return Err(CliError::Config(
                "ensemble.samples must be at least 2".into(),
            ));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        for g in &self.gates {
            if !nvlab::validation::Suite::ids().any(|id| id.eq_ignore_ascii_case(g)) {
                return Err(CliError::Config(format!("unknown gate {g:?}")));
            }
        }
        if let Some(d) = &self.datum {
            d.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, with the output path and the
    /// worker count left out.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            out: None,
            workers: 1,
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let toml_text = r#"
            model = "NV"
            [grid]
            n = 64
            half_width = 8.0
            [datum]
            family = "deep_well"
            depth = 10.0
        "#;
        let a: RunConfig = toml::from_str(toml_text).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.kgrid, RunConfig::default().kgrid);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("gird = 3").is_err());
    }

    #[test]
    fn hash_ignores_output_path_and_workers() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: Some("elsewhere".into()),
            workers: 8,
            ..a.clone()
        };
        let c = RunConfig {
            seed: 8,
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let mut c = RunConfig::default();
        c.grid.n = 100;
        assert!(matches!(
            c.validate(),
            Err(CliError::Config(_)) | Err(CliError::Lib(_))
        ));
        let mut c = RunConfig::default();
        c.time.dt = Some(-1.0);
        assert!(c.validate().is_err());
        let c = RunConfig {
            gates: vec!["A99".into()],
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
