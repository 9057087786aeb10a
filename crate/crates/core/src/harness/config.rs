use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{make_inplane_state, Fig1Params, Fig2Params, Fig3Params, RunSettings};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::hamiltonians::{KeplerParams, PhaseState};
use crate::integrator::{Sampling, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    MovingNucleus,
    FixedAnisotropy,
    RotatingAnisotropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarOrVec {
    Scalar(f64),
    Vector([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusConfig {
    pub rho: f64,
    pub t_loop_orbits: f64,
    #[serde(default)]
    pub axis: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

/// How the initial condition was given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Scalars `r0`, `v0`: start in the easy plane at colatitude `theta`.
    InPlane { r0: f64, v0: f64 },
    /// Explicit position and velocity vectors.
    Explicit { r: Vec3, v: Vec3 },
}

impl InitialState {
    pub fn resolve(&self, theta: f64, m: f64) -> Result<PhaseState> {
        match *self {
            InitialState::InPlane { r0, v0 } => make_inplane_state(r0, v0, theta, m),
            InitialState::Explicit { r, v } => Ok(PhaseState::new(r, v * m)),
        }
    }
}

/// A resolved, ready-to-run experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Experiment {
    Fig1(Fig1Params),
    Fig2(Fig2Params),
    Fig3(Fig3Params),
}

/// JSON experiment description. Unknown keys are rejected.
///
/// ```json
/// {"variant": "rotating_anisotropy", "omega0": 5, "theta": 1.0472, "tau": 10,
///  "r0": 1, "v0": 0.75, "output": {"csv": "run.csv"}}
/// ```
///
/// `r0` and `v0` are either scalars (in-plane start) or 3-vectors (explicit
/// position and velocity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: Variant,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default)]
    pub omega0: Option<f64>,
    #[serde(default)]
    r0: Option<ScalarOrVec>,
    #[serde(default)]
    v0: Option<ScalarOrVec>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub settle_orbits: Option<f64>,
    #[serde(default)]
    pub steps_per_orbit: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub r_min_guard: Option<f64>,
    /// Length of a fixed-anisotropy run in orbital periods.
    #[serde(default)]
    pub orbits: Option<f64>,
    /// Keep every n-th step in the trajectory output.
    #[serde(default)]
    pub sample_stride: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub nucleus: Option<NucleusConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {}", path.display(), strip(e))))
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        match (self.r0, self.v0) {
            (None, None) => Ok(InitialState::InPlane { r0: 1.0, v0: 0.75 }),
            (Some(ScalarOrVec::Scalar(r0)), Some(ScalarOrVec::Scalar(v0))) => {
                Ok(InitialState::InPlane { r0, v0 })
            }
            (Some(ScalarOrVec::Vector(r)), Some(ScalarOrVec::Vector(v))) => {
                let (r, v) = (Vec3::from_array(r), Vec3::from_array(v));
                if !(r.is_finite() && v.is_finite()) {
                    return Err(Error::InvalidConfig("r0 and v0 must be finite".into()));
                }
                Ok(InitialState::Explicit { r, v })
            }
            _ => Err(Error::InvalidConfig(
                "r0 and v0 must both be given, both as scalars or both as 3-vectors".into(),
            )),
        }
    }

    fn settings(&self) -> Result<RunSettings> {
        let mut s = RunSettings::default();
        if let Some(v) = self.scheme {
            s.scheme = v;
        }
        if let Some(v) = self.steps_per_orbit {
            s.steps_per_orbit = v;
        }
        if let Some(v) = self.dt {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("dt must be > 0, got {v}")));
            }
            s.dt = Some(v);
        }
        if let Some(v) = self.settle_orbits {
            s.settle_orbits = v;
        }
        if let Some(v) = self.r_min_guard {
            s.r_min_guard = v;
        }
        if let Some(n) = self.sample_stride {
            if n == 0 {
                return Err(Error::InvalidConfig("sample_stride must be >= 1".into()));
            }
            s.trace = Some(Sampling::Stride(n));
        } else if self.output.csv.is_some() {
            s.trace = Some(Sampling::Stride(100));
        }
        s.validate()?;
        Ok(s)
    }

    fn kepler(&self) -> Result<KeplerParams> {
        KeplerParams::new(self.m, self.q)
    }

    pub fn workers(&self) -> Result<usize> {
        match self.workers {
            Some(0) => Err(Error::InvalidConfig("workers must be >= 1".into())),
            Some(n) => Ok(n),
            None => Ok(1),
        }
    }

    /// Check consistency and build the runner parameters.
    pub fn resolve(&self) -> Result<Experiment> {
        let kepler = self.kepler()?;
        let settings = self.settings()?;
        let initial = self.initial_state()?;
        self.workers()?;
        if let Some(w) = self.omega0 {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidConfig(format!("omega0 must be >= 0, got {w}")));
            }
        }
        let reject = |key: &str, present: bool| {
            if present {
                Err(Error::InvalidConfig(format!(
                    "key `{key}` does not apply to variant {:?}",
                    self.variant
                )))
            } else {
                Ok(())
            }
        };
        match self.variant {
            Variant::MovingNucleus => {
                reject("tau", self.tau.is_some())?;
                reject("orbits", self.orbits.is_some())?;
                if self.omega0.unwrap_or(0.0) != 0.0 {
                    return Err(Error::InvalidConfig(
                        "moving_nucleus requires omega0 = 0".into(),
                    ));
                }
                let mut p = Fig1Params {
                    kepler,
                    settings,
                    relative_state0: initial.resolve(self.theta.unwrap_or(0.0), kepler.m)?,
                    ..Fig1Params::default()
                };
                if let Some(n) = &self.nucleus {
                    p.rho = n.rho;
                    p.t_loop_orbits = n.t_loop_orbits;
                    if let Some(a) = n.axis {
                        p.loop_axis = Vec3::from_array(a);
                    }
                }
                Ok(Experiment::Fig1(p))
            }
            Variant::FixedAnisotropy => {
                reject("tau", self.tau.is_some())?;
                reject("nucleus", self.nucleus.is_some())?;
                let defaults = Fig2Params::default();
                let state0 = match (self.r0, self.v0) {
                    (None, None) => defaults.state0,
                    _ => initial.resolve(self.theta.unwrap_or(0.0), kepler.m)?,
                };
                let orbits = self.orbits.unwrap_or(defaults.orbits);
                if !(orbits > 0.0 && orbits.is_finite()) {
                    return Err(Error::InvalidConfig(format!("orbits must be > 0, got {orbits}")));
                }
                Ok(Experiment::Fig2(Fig2Params {
                    omega0: self.omega0.unwrap_or(defaults.omega0),
                    kepler,
                    state0,
                    orbits,
                    settings,
                    ..defaults
                }))
            }
            Variant::RotatingAnisotropy => {
                reject("nucleus", self.nucleus.is_some())?;
                reject("orbits", self.orbits.is_some())?;
                let InitialState::InPlane { r0, v0 } = initial else {
                    return Err(Error::InvalidConfig(
                        "rotating_anisotropy starts in the easy plane: give r0 and v0 as scalars"
                            .into(),
                    ));
                };
                let theta = self.theta.ok_or_else(|| {
                    Error::InvalidConfig("rotating_anisotropy needs `theta`".into())
                })?;
                let mut p = Fig3Params::new(theta);
                p.kepler = kepler;
                p.r0 = r0;
                p.v0 = v0;
                p.settings = settings;
                if let Some(w) = self.omega0 {
                    p.omega0 = w;
                }
                if let Some(t) = self.tau {
                    p.tau = t;
                }
                Ok(Experiment::Fig3(p))
            }
        }
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::InvalidConfig(s) => s,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::from_json(r#"{"variant": "fixed_anisotropy", "omega_0": 1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("omega_0"), "{err}");
        let err = ExperimentConfig::from_json(
            r#"{"variant": "moving_nucleus", "nucleus": {"rho": 0.3, "t_loop_orbits": 5, "size": 1}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("size"), "{err}");
    }

    #[test]
    fn rotating_config_resolves() {
        let cfg = ExperimentConfig::from_json(
            r#"{"variant": "rotating_anisotropy", "m": 1, "q": 1, "omega0": 0.5, "theta": 0.7,
                "tau": 20, "r0": 1, "v0": 0.75, "settle_orbits": 3, "steps_per_orbit": 1000,
                "scheme": "verlet2"}"#,
        )
        .unwrap();
        let Experiment::Fig3(p) = cfg.resolve().unwrap() else {
            panic!("wrong experiment");
        };
        assert_eq!((p.theta, p.omega0, p.tau), (0.7, 0.5, 20.0));
        assert_eq!(p.settings.scheme, Scheme::Verlet2);
        assert_eq!(p.settings.settle_orbits, 3.0);
        assert_eq!(p.settings.steps_per_orbit, 1000.0);
    }

    #[test]
    fn vector_initial_state() {
        let cfg = ExperimentConfig::from_json(
            r#"{"variant": "fixed_anisotropy", "m": 2, "r0": [1, 0, 0.01], "v0": [0, 0.5, 0]}"#,
        )
        .unwrap();
        let Experiment::Fig2(p) = cfg.resolve().unwrap() else {
            panic!("wrong experiment");
        };
        assert_eq!(p.state0.r, Vec3::new(1.0, 0.0, 0.01));
        assert_eq!(p.state0.p, Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn inconsistent_configs_rejected() {
        for text in [
            r#"{"variant": "rotating_anisotropy", "r0": 1, "v0": 0.75}"#,
            r#"{"variant": "rotating_anisotropy", "theta": 1, "r0": [1,0,0], "v0": [0,1,0]}"#,
            r#"{"variant": "moving_nucleus", "omega0": 0.2}"#,
            r#"{"variant": "fixed_anisotropy", "r0": 1}"#,
            r#"{"variant": "fixed_anisotropy", "omega0": -1}"#,
            r#"{"variant": "fixed_anisotropy", "m": 0}"#,
            r#"{"variant": "fixed_anisotropy", "workers": 0}"#,
            r#"{"variant": "fixed_anisotropy", "tau": 3}"#,
        ] {
            let cfg = ExperimentConfig::from_json(text).unwrap();
            assert!(cfg.resolve().is_err(), "{text}");
        }
        assert!(ExperimentConfig::from_json(r#"{"variant": "spinning"}"#).is_err());
    }
}
