use std::fmt;
use std::str::FromStr;

use crate::model::PhysicalParams;
use crate::scheme::VelocityBc;

use super::config::{
    InitialConfig, MeshConfig, Nudging, OutputConfig, PhiInit, PsiInit, RunConfig, SchemeSection, Sweep,
    Test4Config, TimeConfig, VelocityInit,
};

/// Problem size of a preset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// 32 mesh, observations on 16, `T = 20`.
    Desk,
    /// 64 mesh, observations on 32, `T = 100`.
    Full,
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(format!("unknown scale '{s}' (expected desk or full)")),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        })
    }
}

pub const REFERENCE_DROPLET: PhiInit = PhiInit::Droplet {
    x0: 0.5,
    y0: 0.5,
    r0: 0.18,
};

/// Reference data shared by all tests.
pub fn reference_initial() -> InitialConfig {
    InitialConfig {
        phi: REFERENCE_DROPLET,
        psi: PsiInit::Rotation { theta: 0.0 },
        velocity: VelocityInit::Zero,
    }
}

/// The mismatched assimilated start.
pub fn mismatched_initial() -> InitialConfig {
    InitialConfig {
        phi: PhiInit::Droplet {
            x0: 0.65,
            y0: 0.35,
            r0: 0.22,
        },
        psi: PsiInit::Rotation { theta: 0.6 },
        velocity: VelocityInit::Shear { amplitude: 0.2 },
    }
}

/// Inverted phase and sign-reversed auxiliary field.
pub fn opposite_initial() -> InitialConfig {
    InitialConfig {
        phi: PhiInit::InvertedDroplet {
            x0: 0.5,
            y0: 0.5,
            r0: 0.18,
        },
        psi: PsiInit::Rotation {
            theta: std::f64::consts::PI,
        },
        velocity: VelocityInit::Shear { amplitude: 0.2 },
    }
}

fn params() -> PhysicalParams {
    PhysicalParams::default().without_nudging()
}

/// Configuration of test `1..=6`.
pub fn preset(test: u8, scale: Scale) -> Option<RunConfig> {
    let (n_fine, n_obs, t_final) = match scale {
        Scale::Desk => (32, 16, 20.0),
        Scale::Full => (64, 32, 100.0),
    };
    let mut cfg = RunConfig {
        mesh: MeshConfig { n_fine, n_obs },
        time: TimeConfig { dt: 0.01, t_final },
        params: params(),
        nudging: Nudging::uniform(1.0),
        reference: reference_initial(),
        assimilated: mismatched_initial(),
        boundary: VelocityBc::NoSlip,
        scheme: SchemeSection::default(),
        output: OutputConfig {
            dir: format!("out/test{test}").into(),
            csv_every: 10,
            vtk_every: 0,
        },
        test4: None,
        sweep: None,
    };
    let lid = |cfg: &mut RunConfig| {
        cfg.boundary = VelocityBc::MovingLid { u0: 2.0 };
        cfg.params.re = 100.0;
    };
    match test {
        1 => {}
        2 => cfg.assimilated = opposite_initial(),
        3 => lid(&mut cfg),
        4 => {
            lid(&mut cfg);
            cfg.mesh.n_obs = 8;
            cfg.test4 = Some(Test4Config { epsilon: 10.0 });
        }
        5 => {
            lid(&mut cfg);
            cfg.sweep = Some(Sweep::Alpha {
                values: vec![1.0, 0.1, 0.01],
            });
        }
        6 => {
            lid(&mut cfg);
            cfg.sweep = Some(Sweep::NObs {
                values: vec![n_obs / 4, n_obs / 2, n_obs],
            });
        }
        _ => return None,
    }
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate_and_round_trip() {
        for scale in [Scale::Desk, Scale::Full] {
            for t in 1..=6 {
                let cfg = preset(t, scale).unwrap();
                cfg.validate().unwrap();
                let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
                assert_eq!(back, cfg, "test {t} {scale}");
            }
        }
        assert!(preset(7, Scale::Desk).is_none());
    }

    #[test]
    fn first_preset_parameters() {
        let cfg = preset(1, Scale::Desk).unwrap();
        assert_eq!(cfg.params.re, 3000.0);
        assert_eq!(cfg.time.dt, 0.01);
        assert_eq!(cfg.params.lambda_e, 0.5);
        assert_eq!(cfg.steps(), 2000);
        assert_eq!(preset(1, Scale::Full).unwrap().steps(), 10000);
    }

    #[test]
    fn scale_parses() {
        assert_eq!("desk".parse::<Scale>().unwrap(), Scale::Desk);
        assert!("huge".parse::<Scale>().is_err());
    }
}
