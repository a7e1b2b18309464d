use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::PhysicalParams;
use crate::scheme::{ElasticStress, PressureUpdate, SchemeConfig, VelocityBc};
use crate::sparse::DEFAULT_TOL;

/// A complete, validated description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    /// Physical parameters; the nudging gains live in `nudging`.
    pub params: PhysicalParams,
    pub nudging: Nudging,
    pub reference: InitialConfig,
    pub assimilated: InitialConfig,
    pub boundary: VelocityBc,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test4: Option<Test4Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Subdivisions per side of the simulation mesh.
    pub n_fine: usize,
    /// Subdivisions per side of the observation mesh.
    pub n_obs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nudging {
    pub alpha_u: f64,
    pub alpha_phi: f64,
    pub alpha_psi: f64,
}

impl Nudging {
    pub fn uniform(alpha: f64) -> Self {
        Nudging {
            alpha_u: alpha,
            alpha_phi: alpha,
            alpha_psi: alpha,
        }
    }
}

/// Initial phase field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiInit {
    /// `1/2 + 1/2 tanh((r0 - |x - x0|) / sqrt(2 gamma))`.
    Droplet { x0: f64, y0: f64, r0: f64 },
    /// One minus the droplet.
    InvertedDroplet { x0: f64, y0: f64, r0: f64 },
    Zero,
}

/// Initial auxiliary field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiInit {
    /// `(-y, x)` rotated by `theta`:
    /// `(-(cos t y + sin t x), cos t x - sin t y)`.
    Rotation { theta: f64 },
    Zero,
}

/// Initial velocity; boundary values are overwritten by the boundary data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityInit {
    /// `(amplitude sin(pi y), 0)`.
    Shear { amplitude: f64 },
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub phi: PhiInit,
    pub psi: PsiInit,
    pub velocity: VelocityInit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "default_pressure")]
    pub pressure_update: PressureUpdate,
    #[serde(default = "default_stress")]
    pub elastic_stress: ElasticStress,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
}

fn default_pressure() -> PressureUpdate {
    PressureUpdate::Incremental
}

fn default_stress() -> ElasticStress {
    ElasticStress::EnergyConsistent
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            pressure_update: default_pressure(),
            elastic_stress: default_stress(),
            solver_tol: default_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Steps between CSV rows.
    #[serde(default = "one")]
    pub csv_every: usize,
    /// Steps between VTK snapshots; zero disables them.
    #[serde(default)]
    pub vtk_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn one() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            csv_every: 1,
            vtk_every: 0,
        }
    }
}

/// Two references whose phases agree after observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Test4Config {
    /// Amplitude of the unobservable perturbation.
    pub epsilon: f64,
}

/// Assimilated runs sharing one reference, varying one quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "over", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// Uniform nudging gain; overrides `[nudging]`.
    Alpha { values: Vec<f64> },
    /// Observation mesh; overrides `mesh.n_obs`.
    NObs { values: Vec<usize> },
}

impl RunConfig {
    pub fn steps(&self) -> usize {
        (self.time.t_final / self.time.dt + 1e-9).floor() as usize
    }

    /// Physical parameters with the nudging gains filled in.
    pub fn physical(&self) -> PhysicalParams {
        self.physical_with(self.nudging)
    }

    pub fn physical_with(&self, n: Nudging) -> PhysicalParams {
        PhysicalParams {
            alpha_u: n.alpha_u,
            alpha_phi: n.alpha_phi,
            alpha_psi: n.alpha_psi,
            ..self.params.clone()
        }
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let mut c = SchemeConfig::new(self.time.dt);
        c.bc = self.boundary;
        c.pressure = self.scheme.pressure_update;
        c.stress = self.scheme.elastic_stress;
        c.tol = self.scheme.solver_tol;
        c
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Validation(m));
        let m = self.mesh;
        if m.n_fine == 0 || m.n_obs == 0 {
            return bad("mesh sizes must be positive".into());
        }
        let obs: Vec<usize> = match &self.sweep {
            Some(Sweep::NObs { values }) => values.clone(),
            _ => vec![m.n_obs],
        };
        for n in obs {
            if n == 0 || m.n_fine % n != 0 {
                return bad(format!("n_fine = {} is not a multiple of n_obs = {n}", m.n_fine));
            }
        }
        let t = self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", t.dt));
        }
        if !(t.t_final >= t.dt && t.t_final.is_finite()) {
            return bad(format!("t_final = {} must be at least dt = {}", t.t_final, t.dt));
        }
        let p = &self.params;
        if p.alpha_u != 0.0 || p.alpha_phi != 0.0 || p.alpha_psi != 0.0 {
            return bad("nudging gains belong in [nudging], not [params]".into());
        }
        self.physical().validate().map_err(ConfigError::Validation)?;
        if !(self.scheme.solver_tol > 0.0 && self.scheme.solver_tol < 1.0) {
            return bad(format!("solver_tol must lie in (0, 1), got {}", self.scheme.solver_tol));
        }
        if let VelocityBc::MovingLid { u0 } = self.boundary {
            if !u0.is_finite() {
                return bad("lid velocity must be finite".into());
            }
        }
        for (name, ic) in [("reference", &self.reference), ("assimilated", &self.assimilated)] {
            if let PhiInit::Droplet { r0, .. } | PhiInit::InvertedDroplet { r0, .. } = ic.phi {
                if !(r0 > 0.0) {
                    return bad(format!("{name}: droplet radius must be positive"));
                }
            }
        }
        if self.output.csv_every == 0 {
            return bad("csv_every must be at least 1".into());
        }
        if let Some(t4) = self.test4 {
            if !(t4.epsilon > 0.0 && t4.epsilon.is_finite()) {
                return bad("test4.epsilon must be positive".into());
            }
            if self.sweep.is_some() {
                return bad("[test4] and [sweep] are exclusive".into());
            }
        }
        match &self.sweep {
            Some(Sweep::Alpha { values }) => {
                if values.is_empty() || values.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                    return bad("sweep values must be nonnegative and nonempty".into());
                }
            }
            Some(Sweep::NObs { values }) if values.is_empty() => {
                return bad("sweep values must be nonempty".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        if text.trim().is_empty() {
            return Err(ConfigError::Parse("empty configuration".into()));
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Reads and validates a TOML run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_toml(&text)
}
