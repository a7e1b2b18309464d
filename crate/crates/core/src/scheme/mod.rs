//! The splitting time stepper: Cahn–Hilliard step, auxiliary-field step,
//! momentum step with extrapolated pressure, and pressure Poisson update.

mod ledger;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ObservationError, SchemeError, SolveError, Substep};
use crate::fem::{
    assemble_grad_load, assemble_load, assemble_stiffness, transport_matrix, Field, Space,
};
use crate::mesh::{Mesh, Side, SideSet};
use crate::model::{cap, f, PhysicalParams};
use crate::observation::ObservationOperator;
use crate::sparse::{
    bicgstab_with, solve_zero_mean, BlockSystem, CsrMatrix, DirichletReduction, Ilu0, LinearSolver, Method,
    Preconditioner, DEFAULT_TOL,
};

pub use ledger::{ledger_dissipation, ledger_energy, ledger_source, stability_ledger, Ledger};

/// The four finite element spaces of one trajectory.
#[derive(Clone, Debug)]
pub struct Spaces {
    pub mesh: Arc<Mesh>,
    /// Quadratic scalars: phase and chemical potential.
    pub scalar: Arc<Space>,
    /// Quadratic vectors with Dirichlet conditions on all sides.
    pub velocity: Arc<Space>,
    /// Quadratic vectors with natural boundary conditions.
    pub aux: Arc<Space>,
    /// Linear scalars for the pressure.
    pub pressure: Arc<Space>,
}

impl Spaces {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        Spaces {
            scalar: Space::new(mesh.clone(), 2, 1, SideSet::EMPTY),
            velocity: Space::new(mesh.clone(), 2, 2, SideSet::ALL),
            aux: Space::new(mesh.clone(), 2, 2, SideSet::EMPTY),
            pressure: Space::new(mesh.clone(), 1, 1, SideSet::EMPTY),
            mesh,
        }
    }
}

/// Velocity boundary data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityBc {
    NoSlip,
    /// Tangential velocity `u0` on the whole top side, corners included.
    MovingLid { u0: f64 },
}

impl VelocityBc {
    pub fn value(&self, sides: SideSet, component: usize) -> f64 {
        match *self {
            VelocityBc::MovingLid { u0 } if component == 0 && sides.contains(Side::Top) => u0,
            _ => 0.0,
        }
    }
}

/// Form of the pressure Poisson update
/// `(grad pi', grad q) = a (rho Re / dt) (div v', q) + b (grad pi, grad q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureUpdate {
    /// `a = +1, b = -1`.
    Literal,
    /// `a = -1, b = -1`.
    FlippedDivergence,
    /// `a = -1, b = +1`: the standard incremental projection update.
    Incremental,
}

impl PressureUpdate {
    fn coefficients(self) -> (f64, f64) {
        match self {
            PressureUpdate::Literal => (1.0, -1.0),
            PressureUpdate::FlippedDivergence => (-1.0, -1.0),
            PressureUpdate::Incremental => (-1.0, 1.0),
        }
    }
}

/// Sign of the auxiliary-field stress `(nu (grad zeta)^T grad zeta, grad w)`
/// on the right-hand side of the momentum step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElasticStress {
    /// `+`: the work of the stress cancels the transport of the elastic
    /// energy, so the coupled energy law holds.
    EnergyConsistent,
    /// `-`: anti-restoring; shear of the auxiliary field feeds the flow.
    Literal,
}

impl ElasticStress {
    fn sign(self) -> f64 {
        match self {
            ElasticStress::EnergyConsistent => 1.0,
            ElasticStress::Literal => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub dt: f64,
    pub bc: VelocityBc,
    pub pressure: PressureUpdate,
    pub stress: ElasticStress,
    /// Relative residual target of every linear solve.
    pub tol: f64,
}

impl SchemeConfig {
    pub fn new(dt: f64) -> Self {
        SchemeConfig {
            dt,
            bc: VelocityBc::NoSlip,
            pressure: PressureUpdate::Incremental,
            stress: ElasticStress::EnergyConsistent,
            tol: DEFAULT_TOL,
        }
    }
}

/// State of one trajectory at time level `n`.
#[derive(Clone, Debug)]
pub struct SimState {
    pub v: Field,
    pub pi: Field,
    pub pi_prev: Field,
    pub phi: Field,
    pub xi: Field,
    pub zeta: Field,
    pub t: f64,
    pub n: usize,
}

impl SimState {
    pub fn zero(spaces: &Spaces) -> Self {
        SimState {
            v: Field::zeros(&spaces.velocity),
            pi: Field::zeros(&spaces.pressure),
            pi_prev: Field::zeros(&spaces.pressure),
            phi: Field::zeros(&spaces.scalar),
            xi: Field::zeros(&spaces.scalar),
            zeta: Field::zeros(&spaces.aux),
            t: 0.0,
            n: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.v, &self.pi, &self.pi_prev, &self.phi, &self.xi, &self.zeta]
            .iter()
            .all(|f| f.is_finite())
    }
}

/// Feedback terms `alpha I_H(reference - assimilated)` for one step.
#[derive(Clone, Debug)]
pub struct NudgeSources {
    pub g_phi: Field,
    pub g_psi: Field,
    pub g_u: Field,
}

impl NudgeSources {
    pub fn zero(spaces: &Spaces) -> Self {
        NudgeSources {
            g_phi: Field::zeros(&spaces.scalar),
            g_psi: Field::zeros(&spaces.aux),
            g_u: Field::zeros(&spaces.velocity),
        }
    }

    /// Builds the sources from the time-level-`n` states of both trajectories.
    pub fn build(
        op: &ObservationOperator,
        params: &PhysicalParams,
        reference: &SimState,
        assimilated: &SimState,
    ) -> Result<Self, ObservationError> {
        let term = |alpha: f64, a: &Field, b: &Field| -> Result<Field, ObservationError> {
            if alpha == 0.0 {
                Ok(Field::zeros(a.space()))
            } else {
                Ok(op.observe_difference(a, b)?.map(|x| alpha * x))
            }
        };
        Ok(NudgeSources {
            g_phi: term(params.alpha_phi, &reference.phi, &assimilated.phi)?,
            g_psi: term(params.alpha_psi, &reference.zeta, &assimilated.zeta)?,
            g_u: term(params.alpha_u, &reference.v, &assimilated.v)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        [&self.g_phi, &self.g_psi, &self.g_u]
            .iter()
            .all(|g| g.coeffs().iter().all(|&x| x == 0.0))
    }
}

/// Truncated phase at the standard quadrature points: the nodal values are
/// capped, the capped field is evaluated, and the result is capped again.
pub fn capped_qp(phi: &Field) -> Vec<f64> {
    phi.map(cap).qp_values(0).into_iter().map(cap).collect()
}

/// Time stepper for a fixed mesh, parameter set and step size.
#[derive(Debug)]
pub struct Scheme {
    spaces: Spaces,
    params: PhysicalParams,
    config: SchemeConfig,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    p_stiffness: CsrMatrix,
    velocity_mask: Vec<bool>,
    velocity_bc: [Vec<f64>; 2],
}

impl Scheme {
    pub fn new(spaces: Spaces, params: PhysicalParams, config: SchemeConfig) -> Self {
        let mass = spaces.scalar.scalar_mass().clone();
        let stiffness = assemble_stiffness(&spaces.scalar, None).expect("own space");
        let p_stiffness = assemble_stiffness(&spaces.pressure, None).expect("own space");
        let velocity_mask = spaces.velocity.dirichlet_mask();
        let sides = spaces.velocity.dof_sides();
        let velocity_bc = [0, 1].map(|c| sides.iter().map(|&s| config.bc.value(s, c)).collect());
        Scheme {
            spaces,
            params,
            config,
            mass,
            stiffness,
            p_stiffness,
            velocity_mask,
            velocity_bc,
        }
    }

    pub fn spaces(&self) -> &Spaces {
        &self.spaces
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    /// Writes the boundary values into a velocity field.
    pub fn impose_velocity_bc(&self, v: &mut Field) {
        for c in 0..2 {
            let comp = v.component_mut(c);
            for (i, &m) in self.velocity_mask.iter().enumerate() {
                if m {
                    comp[i] = self.velocity_bc[c][i];
                }
            }
        }
    }

    fn transport(&self, v: &Field) -> CsrMatrix {
        transport_matrix(v, &self.spaces.scalar).expect("velocity on the scheme mesh")
    }

    fn solver<'a>(&self, a: &'a CsrMatrix, substep: Substep, step: usize) -> Result<LinearSolver<'a>, SchemeError> {
        LinearSolver::new(a, Method::BiCgStab).map_err(|source| SchemeError::Solver { substep, step, source })
    }

    fn tagged<T>(r: Result<T, SolveError>, substep: Substep, step: usize) -> Result<T, SchemeError> {
        r.map_err(|source| SchemeError::Solver { substep, step, source })
    }

    fn finite(field: &Field, substep: Substep, step: usize) -> Result<(), SchemeError> {
        if field.is_finite() {
            Ok(())
        } else {
            Err(SchemeError::NonFinite { substep, step })
        }
    }

    /// Matrix of the coupled phase / chemical potential system, unknowns
    /// ordered `(phi; xi)`.
    pub fn ch_matrix(&self, v: &Field) -> CsrMatrix {
        self.ch_matrix_with(&self.transport(v).transpose())
    }

    fn ch_matrix_with(&self, ct: &CsrMatrix) -> CsrMatrix {
        let dt = self.config.dt;
        let a00 = CsrMatrix::linear_combination(&[(1.0 / dt, &self.mass), (-1.0, ct)]);
        BlockSystem::new([
            [(1.0, &a00), (self.params.tau, &self.stiffness)],
            [(-self.params.lambda, &self.stiffness), (1.0, &self.mass)],
        ])
        .to_csr()
    }

    /// Cahn–Hilliard step; returns `(phi_new, xi_new)`.
    pub fn ch_step(&self, s: &SimState, g_phi: &Field) -> Result<(Field, Field), SchemeError> {
        self.ch_step_with(s, g_phi, &self.transport(&s.v))
    }

    fn ch_step_with(&self, s: &SimState, g_phi: &Field, c: &CsrMatrix) -> Result<(Field, Field), SchemeError> {
        let (step, sub) = (s.n, Substep::CahnHilliard);
        let p = &self.params;
        let dt = self.config.dt;
        let ct = c.transpose();
        let a = self.ch_matrix_with(&ct);
        let precond = Self::tagged(ChPreconditioner::new(&self.mass, &self.stiffness, &ct, dt, p), sub, step)?;

        let mphi = self.mass.mul_vec(s.phi.coeffs());
        let mg = self.mass.mul_vec(g_phi.coeffs());
        let mut rhs: Vec<f64> = mphi.iter().zip(&mg).map(|(a, b)| a / dt + b).collect();

        let hat = capped_qp(&s.phi);
        let gz0 = s.zeta.qp_grads(0);
        let gz1 = s.zeta.qp_grads(1);
        let nq = self.spaces.scalar.tab().nq();
        let rhs1 = assemble_load(&self.spaces.scalar, |t, q, _| {
            let k = t * nq + q;
            let grad2 = sq(gz0[k]) + sq(gz1[k]);
            p.lambda * p.gamma * f(hat[k]) + 0.5 * p.nu_prime(hat[k]) * grad2
        });
        rhs.extend_from_slice(&rhs1);

        let mut x0 = s.phi.coeffs().to_vec();
        x0.extend_from_slice(s.xi.coeffs());
        let (mut x, _) = Self::tagged(bicgstab_with(&a, &rhs, Some(&x0), self.config.tol, &precond), sub, step)?;
        let x_xi = x.split_off(self.mass.nrows());
        let phi = Field::new(self.spaces.scalar.clone(), x);
        let xi = Field::new(self.spaces.scalar.clone(), x_xi);
        Self::finite(&phi, sub, step)?;
        Self::finite(&xi, sub, step)?;
        Ok((phi, xi))
    }

    /// Matrix of the auxiliary-field step for one component.
    pub fn psi_matrix(&self, v: &Field, phi_new: &Field) -> CsrMatrix {
        self.psi_matrix_with(&self.transport(v), phi_new)
    }

    fn psi_matrix_with(&self, c: &CsrMatrix, phi_new: &Field) -> CsrMatrix {
        let p = &self.params;
        let nu: Vec<f64> = capped_qp(phi_new).iter().map(|&h| p.eps * p.nu(h)).collect();
        debug_assert!(nu.iter().all(|&x| x >= 0.0 && x <= p.eps * p.lambda_e));
        let k_nu = assemble_stiffness(&self.spaces.scalar, Some(&nu)).expect("own space");
        CsrMatrix::linear_combination(&[(1.0 / self.config.dt, &self.mass), (1.0, c), (1.0, &k_nu)])
    }

    /// Auxiliary-field step.
    pub fn psi_step(&self, s: &SimState, phi_new: &Field, g_psi: &Field) -> Result<Field, SchemeError> {
        self.psi_step_with(s, phi_new, g_psi, &self.transport(&s.v))
    }

    fn psi_step_with(&self, s: &SimState, phi_new: &Field, g_psi: &Field, c: &CsrMatrix) -> Result<Field, SchemeError> {
        let (step, sub) = (s.n, Substep::AuxiliaryField);
        let a = self.psi_matrix_with(c, phi_new);
        let solver = self.solver(&a, sub, step)?;
        let dt = self.config.dt;
        let mut zeta = Field::zeros(&self.spaces.aux);
        for j in 0..2 {
            let mz = self.mass.mul_vec(s.zeta.component(j));
            let mg = self.mass.mul_vec(g_psi.component(j));
            let rhs: Vec<f64> = mz.iter().zip(&mg).map(|(a, b)| a / dt + b).collect();
            let x = Self::tagged(solver.solve(&rhs, Some(s.zeta.component(j)), self.config.tol), sub, step)?;
            zeta.component_mut(j).copy_from_slice(&x);
        }
        Self::finite(&zeta, sub, step)?;
        Ok(zeta)
    }

    /// Momentum matrix for one velocity component, before boundary
    /// elimination.
    pub fn ns_matrix(&self, v: &Field, phi_new: &Field) -> CsrMatrix {
        self.ns_matrix_with(&self.transport(v), phi_new)
    }

    fn ns_matrix_with(&self, c: &CsrMatrix, phi_new: &Field) -> CsrMatrix {
        let p = &self.params;
        let hat = capped_qp(phi_new);
        let eta: Vec<f64> = hat.iter().map(|&h| p.eta(h)).collect();
        let resist: Vec<f64> = hat.iter().map(|&h| p.resistance(h)).collect();
        debug_assert!({
            let (lo, hi) = p.eta_bounds();
            eta.iter().all(|&e| e >= lo * (1.0 - 1e-12) && e <= hi * (1.0 + 1e-12))
        });
        let k_eta = assemble_stiffness(&self.spaces.scalar, Some(&eta)).expect("own space");
        let m_res = crate::fem::assemble_mass(&self.spaces.scalar, Some(&resist)).expect("own space");
        let rr = p.rho * p.re;
        CsrMatrix::linear_combination(&[
            (rr / self.config.dt, &self.mass),
            (rr, c),
            (1.0, &k_eta),
            (1.0, &m_res),
        ])
    }

    /// Momentum step; returns the new velocity.
    pub fn ns_step(
        &self,
        s: &SimState,
        phi_new: &Field,
        xi_new: &Field,
        zeta_new: &Field,
        g_u: &Field,
    ) -> Result<Field, SchemeError> {
        self.ns_step_with(s, phi_new, xi_new, zeta_new, g_u, &self.transport(&s.v))
    }

    fn ns_step_with(
        &self,
        s: &SimState,
        phi_new: &Field,
        xi_new: &Field,
        zeta_new: &Field,
        g_u: &Field,
        c: &CsrMatrix,
    ) -> Result<Field, SchemeError> {
        let (step, sub) = (s.n, Substep::NavierStokes);
        let p = &self.params;
        let dt = self.config.dt;
        let rr = p.rho * p.re;
        let ns = self.spaces.scalar.scalar_dof_count();
        let a = self.ns_matrix_with(c, phi_new);
        let reduction = DirichletReduction::new(&a, &self.velocity_mask);
        let solver = self.solver(reduction.matrix(), sub, step)?;

        let nq = self.spaces.scalar.tab().nq();
        let hat = capped_qp(phi_new);
        let pi_ext = s.pi.lin_comb(2.0, &s.pi_prev, -1.0)?;
        let pq = pi_ext.qp_values(0);
        let xq = xi_new.qp_values(0);
        let gphi = phi_new.qp_grads(0);
        let gz = [zeta_new.qp_grads(0), zeta_new.qp_grads(1)];
        // Vector space with one component per velocity component, used only
        // for component-blocked load assembly.
        let vs = &self.spaces.aux;
        let body = assemble_load(vs, |t, q, comp| {
            let k = t * nq + q;
            let h = hat[k];
            let grad2 = sq(gz[0][k]) + sq(gz[1][k]);
            (xq[k] - 0.5 * p.nu_prime(h) * grad2) * gphi[k][comp]
        });
        let sign = self.config.stress.sign();
        let stress = assemble_grad_load(vs, |t, q, comp| {
            let k = t * nq + q;
            let nu = sign * p.nu(hat[k]);
            let (g0, g1) = (gz[0][k], gz[1][k]);
            // row `comp` of (grad zeta)^T grad zeta
            let s_row = [g0[comp] * g0[0] + g1[comp] * g1[0], g0[comp] * g0[1] + g1[comp] * g1[1]];
            let mut flux = [nu * s_row[0], nu * s_row[1]];
            flux[comp] += pq[k];
            flux
        });

        let mut v = Field::zeros(&self.spaces.velocity);
        for comp in 0..2 {
            let mv = self.mass.mul_vec(s.v.component(comp));
            let mg = self.mass.mul_vec(g_u.component(comp));
            let mut rhs: Vec<f64> = (0..ns)
                .map(|i| rr / dt * mv[i] + mg[i] + body[comp * ns + i] + stress[comp * ns + i])
                .collect();
            reduction.apply_rhs(&mut rhs, &self.velocity_bc[comp]);
            let x = Self::tagged(solver.solve(&rhs, Some(s.v.component(comp)), self.config.tol), sub, step)?;
            v.component_mut(comp).copy_from_slice(&x);
        }
        // boundary rows are only solved to the residual tolerance
        self.impose_velocity_bc(&mut v);
        Self::finite(&v, sub, step)?;
        Ok(v)
    }

    /// Pressure Poisson update; returns the new pressure iterate.
    pub fn pressure_correction(&self, s: &SimState, v_new: &Field) -> Result<Field, SchemeError> {
        let (step, sub) = (s.n, Substep::Pressure);
        let p = &self.params;
        let (a, b) = self.config.pressure.coefficients();
        let beta = a * p.rho * p.re / self.config.dt;
        let nq = self.spaces.pressure.tab().nq();
        let g0 = v_new.qp_grads(0);
        let g1 = v_new.qp_grads(1);
        let div = crate::fem::assemble_load_scalar(&self.spaces.pressure, |t, q| {
            let k = t * nq + q;
            g0[k][0] + g1[k][1]
        });
        let kp = self.p_stiffness.mul_vec(s.pi.coeffs());
        let rhs: Vec<f64> = div.iter().zip(&kp).map(|(d, k)| beta * d + b * k).collect();
        let sol = Self::tagged(
            solve_zero_mean(&self.p_stiffness, self.spaces.pressure.mean_vector(), &rhs, self.config.tol),
            sub,
            step,
        )?;
        let pi = Field::new(self.spaces.pressure.clone(), sol.x);
        Self::finite(&pi, sub, step)?;
        Ok(pi)
    }

    /// One full step `n -> n + 1`.
    pub fn advance(&self, s: &SimState, nudge: &NudgeSources) -> Result<SimState, SchemeError> {
        let c = self.transport(&s.v);
        let (phi, xi) = self.ch_step_with(s, &nudge.g_phi, &c)?;
        let zeta = self.psi_step_with(s, &phi, &nudge.g_psi, &c)?;
        let v = self.ns_step_with(s, &phi, &xi, &zeta, &nudge.g_u, &c)?;
        let pi = self.pressure_correction(s, &v)?;
        Ok(SimState {
            v,
            pi_prev: s.pi.clone(),
            pi,
            phi,
            xi,
            zeta,
            t: (s.n + 1) as f64 * self.config.dt,
            n: s.n + 1,
        })
    }
}

/// An incomplete factorization improved by a fixed number of Richardson
/// sweeps, so that it remains a fixed linear operator.
struct Refined {
    a: CsrMatrix,
    ilu: Ilu0,
    sweeps: usize,
}

impl Refined {
    fn new(a: CsrMatrix, sweeps: usize) -> Result<Self, SolveError> {
        let ilu = Ilu0::new(&a)?;
        Ok(Refined { a, ilu, sweeps })
    }

    fn solve_into(&self, r: &[f64], z: &mut [f64], res: &mut [f64], d: &mut [f64]) {
        self.ilu.solve_into(r, z);
        for _ in 0..self.sweeps {
            self.a.mul_vec_into(z, res);
            res.iter_mut().zip(r).for_each(|(a, b)| *a = b - *a);
            self.ilu.solve_into(res, d);
            z.iter_mut().zip(d.iter()).for_each(|(a, b)| *a += b);
        }
    }
}

/// With `s = sqrt(lambda / (dt tau))` and `e = sqrt(dt tau lambda)`, the
/// row/column scaling `diag(dt, -1/s) A diag(1, -s)` turns the phase system
/// into `[[Mt, -e K], [e K, M]]` with `Mt = M + dt B`. The preconditioner is
/// the block LDU factorization pivoting on `M`, with the Schur complement
/// `Mt + e^2 K M^-1 K` replaced by `(Mt + e K) M^-1 (M + e K)`.
struct ChPreconditioner<'a> {
    mass: &'a CsrMatrix,
    stiffness: &'a CsrMatrix,
    mass_ilu: Ilu0,
    transport_sum: Refined,
    sum: Refined,
    e: f64,
    dt: f64,
    s: f64,
}

const CH_SWEEPS: usize = 2;

impl<'a> ChPreconditioner<'a> {
    fn new(
        mass: &'a CsrMatrix,
        stiffness: &'a CsrMatrix,
        ct: &CsrMatrix,
        dt: f64,
        p: &PhysicalParams,
    ) -> Result<Self, SolveError> {
        let e = (dt * p.tau * p.lambda).sqrt();
        let transport_sum = Refined::new(
            CsrMatrix::linear_combination(&[(1.0, mass), (-dt, ct), (e, stiffness)]),
            CH_SWEEPS,
        )?;
        let sum = Refined::new(CsrMatrix::linear_combination(&[(1.0, mass), (e, stiffness)]), CH_SWEEPS)?;
        Ok(ChPreconditioner {
            mass,
            stiffness,
            mass_ilu: Ilu0::new(mass)?,
            transport_sum,
            sum,
            e,
            dt,
            s: (p.lambda / (dt * p.tau)).sqrt(),
        })
    }
}

impl Preconditioner for ChPreconditioner<'_> {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len() / 2;
        let f: Vec<f64> = r[..n].iter().map(|v| v * self.dt).collect();
        let g: Vec<f64> = r[n..].iter().map(|v| -v / self.s).collect();
        let mut tmp = vec![0.0; n];
        let mut tmp2 = vec![0.0; n];
        let mut res = vec![0.0; n];
        let mut d = vec![0.0; n];

        // forward: f + e K M^-1 g
        self.mass_ilu.solve_into(&g, &mut tmp);
        self.stiffness.mul_vec_into(&tmp, &mut tmp2);
        let rf: Vec<f64> = f.iter().zip(&tmp2).map(|(a, b)| a + self.e * b).collect();

        // Schur solve
        let (x, y) = z.split_at_mut(n);
        self.transport_sum.solve_into(&rf, &mut tmp, &mut res, &mut d);
        self.mass.mul_vec_into(&tmp, &mut tmp2);
        self.sum.solve_into(&tmp2, x, &mut res, &mut d);

        // back substitution: M^-1 (g - e K x)
        self.stiffness.mul_vec_into(x, &mut tmp);
        tmp.iter_mut().zip(&g).for_each(|(t, gi)| *t = gi - self.e * *t);
        self.mass_ilu.solve_into(&tmp, y);
        y.iter_mut().for_each(|v| *v *= -self.s);
    }
}

fn sq(g: [f64; 2]) -> f64 {
    g[0] * g[0] + g[1] * g[1]
}
