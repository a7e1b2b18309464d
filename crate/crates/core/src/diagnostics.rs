//! Energies, synchronization errors and phase mass of simulation states.

use crate::error::FemError;
use crate::fem::{integrate, l2_error, Field};
use crate::model::PhysicalParams;
use crate::scheme::{ledger_dissipation, ledger_energy, Ledger, SimState};

/// Kinetic, mixing and elastic energies and their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Energies {
    pub kinetic: f64,
    pub mixing: f64,
    pub elastic: f64,
    pub total: f64,
}

/// `L2` differences between two states. The pressure difference is
/// reported for completeness only: pressure is defined up to a constant and
/// carries no synchronization information.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SyncErrors {
    pub e_u: f64,
    pub e_phi: f64,
    pub e_psi: f64,
    pub e_pi: f64,
}

/// One row of the run output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    pub errors: SyncErrors,
    pub reference: Energies,
    pub assimilated: Energies,
    pub mass_ref: f64,
    pub mass_da: f64,
    /// Ledger energy and dissipation of the assimilated state.
    pub ledger_energy: f64,
    pub ledger_dissipation: f64,
    /// Stability functionals of the step that produced the assimilated
    /// state; `None` on the initial row.
    pub ledger: Option<Ledger>,
}

impl StepRecord {
    pub fn new(reference: &SimState, assimilated: &SimState, params: &PhysicalParams, ledger: Option<Ledger>) -> Self {
        StepRecord {
            n: assimilated.n,
            t: assimilated.t,
            errors: sync_errors(reference, assimilated).expect("twin states share their spaces"),
            reference: energies(reference, params),
            assimilated: energies(assimilated, params),
            mass_ref: phase_mass(reference),
            mass_da: phase_mass(assimilated),
            ledger_energy: ledger.map_or_else(|| ledger_energy(assimilated, params), |l| l.e_new),
            ledger_dissipation: ledger.map_or_else(|| ledger_dissipation(assimilated, params), |l| l.d),
            ledger,
        }
    }

    pub fn is_finite(&self) -> bool {
        let e = &self.errors;
        let en = |x: &Energies| [x.kinetic, x.mixing, x.elastic, x.total];
        let mut all = vec![
            self.t,
            e.e_u,
            e.e_phi,
            e.e_psi,
            e.e_pi,
            self.mass_ref,
            self.mass_da,
            self.ledger_energy,
            self.ledger_dissipation,
        ];
        all.extend(en(&self.reference));
        all.extend(en(&self.assimilated));
        if let Some(l) = self.ledger {
            all.push(l.s);
        }
        all.iter().all(|v| v.is_finite())
    }
}

fn sq(g: [f64; 2]) -> f64 {
    g[0] * g[0] + g[1] * g[1]
}

/// Energies of a state, evaluated with the uncapped phase.
pub fn energies(s: &SimState, p: &PhysicalParams) -> Energies {
    let space = s.phi.space();
    let nq = space.tab().nq();
    let vq = [s.v.qp_values(0), s.v.qp_values(1)];
    let phi = s.phi.qp_values(0);
    let gphi = s.phi.qp_grads(0);
    let gz = [s.zeta.qp_grads(0), s.zeta.qp_grads(1)];
    let kinetic = 0.5 * p.rho * integrate(space, |t, q| {
        let k = t * nq + q;
        vq[0][k] * vq[0][k] + vq[1][k] * vq[1][k]
    });
    let mixing = integrate(space, |t, q| {
        let k = t * nq + q;
        let w = phi[k] * (1.0 - phi[k]);
        0.5 * p.lambda * sq(gphi[k]) + 4.0 * p.lambda * p.gamma * w * w
    });
    let elastic = 0.5 * p.lambda_e * integrate(space, |t, q| {
        let k = t * nq + q;
        (1.0 - phi[k]) * (sq(gz[0][k]) + sq(gz[1][k]))
    });
    Energies {
        kinetic,
        mixing,
        elastic,
        total: kinetic + mixing + elastic,
    }
}

/// `L2` differences of velocity, phase, auxiliary field and pressure.
pub fn sync_errors(a: &SimState, b: &SimState) -> Result<SyncErrors, FemError> {
    Ok(SyncErrors {
        e_u: l2_error(&a.v, &b.v)?,
        e_phi: l2_error(&a.phi, &b.phi)?,
        e_psi: l2_error(&a.zeta, &b.zeta)?,
        e_pi: l2_error(&a.pi, &b.pi)?,
    })
}

/// `int phi`.
pub fn phase_mass(s: &SimState) -> f64 {
    field_mass(&s.phi)
}

pub(crate) fn field_mass(f: &Field) -> f64 {
    let m = f.space().mean_vector();
    m.iter().zip(f.coeffs()).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_mesh;
    use crate::scheme::Spaces;
    use std::sync::Arc;

    fn spaces(n: usize) -> Spaces {
        Spaces::new(Arc::new(build_uniform_mesh(n).unwrap()))
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let s = SimState::zero(&spaces(4));
        assert_eq!(energies(&s, &PhysicalParams::default()), Energies::default());
        assert_eq!(phase_mass(&s), 0.0);
    }

    #[test]
    fn uniform_mixture_energy() {
        let sp = spaces(4);
        let mut s = SimState::zero(&sp);
        s.phi = Field::constant(&sp.scalar, 0.5);
        let p = PhysicalParams::default();
        let e = energies(&s, &p);
        assert!((e.mixing - 0.25).abs() < 1e-13);
        assert_eq!(e.kinetic, 0.0);
        assert!((phase_mass(&s) - 0.5).abs() < 1e-14);
        s.phi = Field::constant(&sp.scalar, 1.0);
        assert!((phase_mass(&s) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shear_kinetic_energy() {
        let sp = spaces(6);
        let mut s = SimState::zero(&sp);
        s.v = Field::interpolate(&sp.velocity, |_, y, c| if c == 0 { y } else { 0.0 }).unwrap();
        let e = energies(&s, &PhysicalParams::default());
        assert!((e.kinetic - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn rotation_elastic_energy() {
        // |grad zeta|^2 = 2 and phi = 0
        let sp = spaces(4);
        let mut s = SimState::zero(&sp);
        s.zeta = Field::interpolate(&sp.aux, |x, y, c| if c == 0 { -y } else { x }).unwrap();
        let p = PhysicalParams::default();
        assert!((energies(&s, &p).elastic - p.lambda_e).abs() < 1e-13);
    }

    #[test]
    fn sync_errors_of_shifted_phase() {
        let sp = spaces(4);
        let a = SimState::zero(&sp);
        let mut b = a.clone();
        b.phi = Field::constant(&sp.scalar, 0.3);
        let e = sync_errors(&a, &b).unwrap();
        assert!((e.e_phi - 0.3).abs() < 1e-14);
        assert_eq!((e.e_u, e.e_psi, e.e_pi), (0.0, 0.0, 0.0));
        assert_eq!(sync_errors(&b, &a).unwrap(), e);
        assert_eq!(sync_errors(&a, &a).unwrap(), SyncErrors::default());
    }
}
