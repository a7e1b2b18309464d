use crate::error::FemError;
use crate::fem::Field;
use crate::scheme::{SimState, Spaces, VelocityBc};

use super::config::{InitialConfig, PhiInit, PsiInit, RunConfig, VelocityInit};

/// Which of the two trajectories of a twin run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Reference,
    Assimilated,
}

/// `1/2 + 1/2 tanh((r0 - |x - x0|) / w)`.
pub fn droplet(x: f64, y: f64, x0: f64, y0: f64, r0: f64, width: f64) -> f64 {
    let r = (x - x0).hypot(y - y0);
    0.5 + 0.5 * ((r0 - r) / width).tanh()
}

pub fn phase_field(spaces: &Spaces, init: PhiInit, gamma: f64) -> Result<Field, FemError> {
    let w = (2.0 * gamma).sqrt();
    match init {
        PhiInit::Droplet { x0, y0, r0 } => Field::interpolate(&spaces.scalar, |x, y, _| droplet(x, y, x0, y0, r0, w)),
        PhiInit::InvertedDroplet { x0, y0, r0 } => {
            Field::interpolate(&spaces.scalar, |x, y, _| 1.0 - droplet(x, y, x0, y0, r0, w))
        }
        PhiInit::Zero => Ok(Field::zeros(&spaces.scalar)),
    }
}

pub fn aux_field(spaces: &Spaces, init: PsiInit) -> Result<Field, FemError> {
    match init {
        PsiInit::Rotation { theta } => {
            let (s, c) = theta.sin_cos();
            Field::interpolate(&spaces.aux, |x, y, k| {
                if k == 0 {
                    -(c * y + s * x)
                } else {
                    c * x - s * y
                }
            })
        }
        PsiInit::Zero => Ok(Field::zeros(&spaces.aux)),
    }
}

/// Interpolated velocity with the boundary data written over the boundary dofs.
pub fn velocity_field(spaces: &Spaces, init: VelocityInit, bc: VelocityBc) -> Result<Field, FemError> {
    let mut v = match init {
        VelocityInit::Shear { amplitude } => Field::interpolate(&spaces.velocity, |_, y, k| {
            if k == 0 {
                amplitude * (std::f64::consts::PI * y).sin()
            } else {
                0.0
            }
        })?,
        VelocityInit::Zero => Field::zeros(&spaces.velocity),
    };
    let mask = spaces.velocity.dirichlet_mask();
    let sides = spaces.velocity.dof_sides().to_vec();
    for c in 0..2 {
        let comp = v.component_mut(c);
        for (i, &m) in mask.iter().enumerate() {
            if m {
                comp[i] = bc.value(sides[i], c);
            }
        }
    }
    Ok(v)
}

/// State at `t = 0` with zero pressure and chemical potential.
pub fn initial_state(spaces: &Spaces, ic: &InitialConfig, bc: VelocityBc, gamma: f64) -> Result<SimState, FemError> {
    let mut s = SimState::zero(spaces);
    s.phi = phase_field(spaces, ic.phi, gamma)?;
    s.zeta = aux_field(spaces, ic.psi)?;
    s.v = velocity_field(spaces, ic.velocity, bc)?;
    Ok(s)
}

pub fn make_initial_state(cfg: &RunConfig, which: Which, spaces: &Spaces) -> Result<SimState, FemError> {
    let ic = match which {
        Which::Reference => &cfg.reference,
        Which::Assimilated => &cfg.assimilated,
    };
    initial_state(spaces, ic, cfg.boundary, cfg.params.gamma)
}
