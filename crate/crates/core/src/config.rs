//! Run configuration read from a TOML file. Every table rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BuiltinProfile, PhysicalParams, Profile, Tolerances};
use crate::mesh::{LateralBoundary, MeshSpec};
use crate::solver::SolverSettings;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub profile: ProfileSource,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub tolerances: Option<ToleranceConfig>,
    #[serde(default)]
    pub study: Option<StudyConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A built-in deflection, or `name = "csv"` with a file of `x,u` rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSource {
    Flat,
    ParabolaTouch,
    Cosine { amplitude: f64 },
    Bump { amplitude: f64, half_width: f64 },
    Csv { path: PathBuf },
}

impl ProfileSource {
    pub fn builtin(&self) -> Option<BuiltinProfile> {
        Some(match *self {
            ProfileSource::Flat => BuiltinProfile::Flat,
            ProfileSource::ParabolaTouch => BuiltinProfile::ParabolaTouch,
            ProfileSource::Cosine { amplitude } => BuiltinProfile::Cosine { amplitude },
            ProfileSource::Bump { amplitude, half_width } => BuiltinProfile::Bump { amplitude, half_width },
            ProfileSource::Csv { .. } => return None,
        })
    }
}

impl From<BuiltinProfile> for ProfileSource {
    fn from(b: BuiltinProfile) -> Self {
        match b {
            BuiltinProfile::Flat => ProfileSource::Flat,
            BuiltinProfile::ParabolaTouch => ProfileSource::ParabolaTouch,
            BuiltinProfile::Cosine { amplitude } => ProfileSource::Cosine { amplitude },
            BuiltinProfile::Bump { amplitude, half_width } => ProfileSource::Bump { amplitude, half_width },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub n1: usize,
    pub n2: usize,
    #[serde(default)]
    pub lateral: LateralBoundary,
}

impl MeshConfig {
    pub fn spec(&self) -> MeshSpec {
        MeshSpec::new(self.n1, self.n2).with_lateral(self.lateral)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub eps_sign: f64,
    pub eps_touch: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Perturbation indices `n` of `v_n = u + w/n`.
    #[serde(default = "default_schedule")]
    pub schedule: Vec<usize>,
    /// The direction `w`; defaults to `cosine(−0.5)`.
    #[serde(default)]
    pub perturbation: Option<BuiltinProfile>,
    /// Mesh levels for refinement and κ-family studies.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_max_ratio")]
    pub max_ratio: f64,
    /// κ-family members; defaults to the standard five-profile family.
    #[serde(default)]
    pub family: Option<Vec<BuiltinProfile>>,
}

fn default_schedule() -> Vec<usize> {
    vec![1, 2, 4, 8, 16]
}

fn default_levels() -> Vec<usize> {
    vec![16, 32, 64]
}

fn default_kappa() -> f64 {
    10.0
}

fn default_max_ratio() -> f64 {
    1.5
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            schedule: default_schedule(),
            perturbation: None,
            levels: default_levels(),
            kappa: default_kappa(),
            max_ratio: default_max_ratio(),
            family: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().replace('\n', " ")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // CSV paths are relative to the config file
        if let ProfileSource::Csv { path: p } = &mut cfg.profile {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let m = &self.mesh;
        if m.nx < 4 || m.n1 == 0 || m.n2 == 0 {
            return Err(Error::Config(format!("mesh needs nx >= 4 and positive n1, n2; got {}, {}, {}", m.nx, m.n1, m.n2)));
        }
        if !(self.solver.cg_tol > 0.0) || self.solver.max_iter == 0 {
            return Err(Error::Config("solver.cg_tol and solver.max_iter must be positive".into()));
        }
        if let Some(t) = &self.tolerances {
            if !(t.eps_sign >= 0.0 && t.eps_touch >= 0.0) {
                return Err(Error::Config("tolerances must be non-negative".into()));
            }
        }
        if let Some(s) = &self.study {
            if s.schedule.iter().any(|&n| n == 0) || s.levels.iter().any(|&n| n < 4) || !(s.kappa > 0.0) {
                return Err(Error::Config("study schedule must be positive, levels >= 4, kappa > 0".into()));
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<Profile> {
        match &self.profile {
            ProfileSource::Csv { path } => {
                let profile = crate::io::read_profile_csv(path, self.params)?;
                if profile.nx() != self.mesh.nx {
                    return Err(Error::Config(format!(
                        "profile file has {} intervals but mesh.nx = {}",
                        profile.nx(),
                        self.mesh.nx
                    )));
                }
                Ok(profile)
            }
            other => other.builtin().unwrap().sample(self.params, self.mesh.nx),
        }
    }

    pub fn tolerances(&self, profile: &Profile) -> Tolerances {
        match self.tolerances {
            Some(t) => Tolerances { eps_sign: t.eps_sign, eps_touch: t.eps_touch },
            None => Tolerances::for_profile(profile),
        }
    }

    pub fn study(&self) -> StudyConfig {
        self.study.clone().unwrap_or_default()
    }
}
