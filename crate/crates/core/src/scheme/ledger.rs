use crate::fem::{integrate, l2_norm, Field};
use crate::model::{f, PhysicalParams};

use super::{capped_qp, NudgeSources, SimState};

/// Energy, dissipation and source functionals of one step `n -> n + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ledger {
    /// `E^n`
    pub e_prev: f64,
    /// `E^{n+1}`
    pub e_new: f64,
    /// `D^{n+1}`
    pub d: f64,
    /// `S^n`
    pub s: f64,
}

impl Ledger {
    /// `(E^{n+1} + dt D^{n+1} - E^n) / (dt (E^n + S^n))`; zero when the
    /// denominator vanishes.
    pub fn ratio(&self, dt: f64) -> f64 {
        let den = dt * (self.e_prev + self.s);
        if den > 0.0 {
            (self.e_new + dt * self.d - self.e_prev) / den
        } else {
            0.0
        }
    }
}

fn sq(g: [f64; 2]) -> f64 {
    g[0] * g[0] + g[1] * g[1]
}

fn norm2(x: &Field) -> f64 {
    let n = l2_norm(x);
    n * n
}

/// `(rho Re / 2) |v|^2 + |phi|^2 / 2 + |zeta|^2 / 2`.
pub fn ledger_energy(s: &SimState, p: &PhysicalParams) -> f64 {
    0.5 * p.rho * p.re * norm2(&s.v) + 0.5 * norm2(&s.phi) + 0.5 * norm2(&s.zeta)
}

/// Dissipation of the new state.
pub fn ledger_dissipation(s: &SimState, p: &PhysicalParams) -> f64 {
    let space = s.phi.space();
    let nq = space.tab().nq();
    let hat = capped_qp(&s.phi);
    let gv = [s.v.qp_grads(0), s.v.qp_grads(1)];
    let vq = [s.v.qp_values(0), s.v.qp_values(1)];
    let gz = [s.zeta.qp_grads(0), s.zeta.qp_grads(1)];
    let rest = integrate(space, |t, q| {
        let k = t * nq + q;
        let h = hat[k];
        0.5 * p.eta(h) * (sq(gv[0][k]) + sq(gv[1][k]))
            + 0.5 * p.resistance(h) * (vq[0][k] * vq[0][k] + vq[1][k] * vq[1][k])
            + p.eps * p.nu(h) * (sq(gz[0][k]) + sq(gz[1][k]))
    });
    p.tau / (4.0 * p.lambda) * norm2(&s.xi) + rest
}

/// Source functional from the old state, the nudging terms, and the new
/// state's coupling terms.
pub fn ledger_source(prev: &SimState, new: &SimState, nudge: &NudgeSources, p: &PhysicalParams) -> f64 {
    let space = prev.phi.space();
    let nq = space.tab().nq();
    let hat_old = capped_qp(&prev.phi);
    let gz_old = [prev.zeta.qp_grads(0), prev.zeta.qp_grads(1)];
    let hat = capped_qp(&new.phi);
    let gz = [new.zeta.qp_grads(0), new.zeta.qp_grads(1)];
    let xi = new.xi.qp_values(0);
    let gphi = new.phi.qp_grads(0);
    let pointwise = integrate(space, |t, q| {
        let k = t * nq + q;
        let fo = f(hat_old[k]);
        let e_old = p.nu_prime(hat_old[k]) * (sq(gz_old[0][k]) + sq(gz_old[1][k]));
        let g2 = sq(gphi[k]);
        let cap = xi[k] * xi[k] * g2;
        let e_new = p.nu_prime(hat[k]) * (sq(gz[0][k]) + sq(gz[1][k]));
        let (a, b) = (gz[0][k], gz[1][k]);
        let s00 = a[0] * a[0] + b[0] * b[0];
        let s01 = a[0] * a[1] + b[0] * b[1];
        let s11 = a[1] * a[1] + b[1] * b[1];
        let nu = p.nu(hat[k]);
        let stress = nu * nu * (s00 * s00 + 2.0 * s01 * s01 + s11 * s11);
        fo * fo + e_old * e_old + cap + e_new * e_new * g2 + stress
    });
    let pi_ext = prev
        .pi
        .lin_comb(2.0, &prev.pi_prev, -1.0)
        .expect("pressure fields share a space");
    norm2(&nudge.g_phi) + norm2(&nudge.g_psi) + norm2(&nudge.g_u) + norm2(&pi_ext) + pointwise
}

/// The three functionals of one step.
pub fn stability_ledger(prev: &SimState, new: &SimState, nudge: &NudgeSources, p: &PhysicalParams) -> Ledger {
    Ledger {
        e_prev: ledger_energy(prev, p),
        e_new: ledger_energy(new, p),
        d: ledger_dissipation(new, p),
        s: ledger_source(prev, new, nudge, p),
    }
}
