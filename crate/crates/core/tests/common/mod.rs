//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nsch_da::fem::{
    assemble_load_scalar, assemble_stiffness, assemble_transport_scalar, assemble_transport_vector, integrate,
    transport_matrix, Field, QuadratureRule, Space,
};
use nsch_da::mesh::{build_uniform_mesh, SideSet};
use nsch_da::observation::build_observation;
use nsch_da::sparse::{solve, solve_zero_mean, CsrMatrix, DirichletReduction};

pub fn mesh(n: usize) -> Arc<nsch_da::mesh::Mesh> {
    Arc::new(build_uniform_mesh(n).unwrap())
}

pub fn space(n: usize, degree: usize, comps: usize, dirichlet: SideSet) -> Arc<Space> {
    Space::new(mesh(n), degree, comps, dirichlet)
}

/// Physical coordinates of the standard quadrature points, `t * nq + q`.
pub fn qp_points(space: &Space) -> Vec<[f64; 2]> {
    let rule = QuadratureRule::degree4();
    let m = space.mesh();
    let mut out = Vec::new();
    for tri in m.triangles() {
        let v = tri.map(|i| m.vertices()[i]);
        for l in &rule.points {
            out.push([
                l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
                l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
            ]);
        }
    }
    out
}

/// `||u_h - u||` against the exact function, by quadrature.
pub fn exact_error(uh: &Field, u: impl Fn(f64, f64) -> f64) -> f64 {
    let pts = qp_points(uh.space());
    let vals = uh.qp_values(0);
    integrate(uh.space(), |t, q| {
        let k = t * uh.space().tab().nq() + q;
        let d = vals[k] - u(pts[k][0], pts[k][1]);
        d * d
    })
    .sqrt()
}

/// `log2(e_k / e_{k+1})` for successive halvings.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Errors of `-lap u = 2 pi^2 u`, `u = sin(pi x) sin(pi y)`, zero Dirichlet data.
pub fn poisson_errors(degree: usize, sizes: &[usize]) -> Vec<f64> {
    let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    sizes
        .iter()
        .map(|&n| {
            let s = space(n, degree, 1, SideSet::ALL);
            let k = assemble_stiffness(&s, None).unwrap();
            let pts = qp_points(&s);
            let nq = s.tab().nq();
            let mut b = assemble_load_scalar(&s, |t, q| {
                let p = pts[t * nq + q];
                2.0 * PI * PI * u(p[0], p[1])
            });
            let red = DirichletReduction::new(&k, &s.dirichlet_mask());
            let zero = vec![0.0; b.len()];
            red.apply_rhs(&mut b, &zero);
            let x = solve(red.matrix(), &b, 1e-12).unwrap();
            exact_error(&Field::new(s, x), u)
        })
        .collect()
}

/// Errors of the pure Neumann problem with `u = cos(pi x) cos(pi y)`, fixed by
/// a zero mean.
pub fn neumann_errors(degree: usize, sizes: &[usize]) -> Vec<f64> {
    let u = |x: f64, y: f64| (PI * x).cos() * (PI * y).cos();
    sizes
        .iter()
        .map(|&n| {
            let s = space(n, degree, 1, SideSet::EMPTY);
            let k = assemble_stiffness(&s, None).unwrap();
            let pts = qp_points(&s);
            let nq = s.tab().nq();
            let b = assemble_load_scalar(&s, |t, q| {
                let p = pts[t * nq + q];
                2.0 * PI * PI * u(p[0], p[1])
            });
            let sol = solve_zero_mean(&k, s.mean_vector(), &b, 1e-12).unwrap();
            exact_error(&Field::new(s, sol.x), u)
        })
        .collect()
}

/// `||w - I_H w||` for `w = sin(pi x) sin(pi y)` on a 64 mesh.
pub fn observation_errors(coarse: &[usize]) -> Vec<f64> {
    let fine = space(64, 2, 1, SideSet::EMPTY);
    let w = Field::interpolate(&fine, |x, y, _| (PI * x).sin() * (PI * y).sin()).unwrap();
    coarse
        .iter()
        .map(|&n| {
            let op = build_observation(&fine, &space(n, 2, 1, SideSet::EMPTY)).unwrap();
            let iw = op.observe(&w).unwrap();
            nsch_da::fem::l2_error(&w, &iw).unwrap()
        })
        .collect()
}

/// Deterministic pseudo-random numbers in `[-1, 1)` (splitmix64).
pub fn noise(seed: u64, len: usize) -> Vec<f64> {
    let mut s = seed;
    (0..len)
        .map(|_| {
            s = s.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            2.0 * (z >> 11) as f64 / (1u64 << 53) as f64 - 1.0
        })
        .collect()
}

/// The three transport operators for a velocity field: scalar (`b_phi`),
/// auxiliary vector (`b_psi`) and velocity (`c`).
pub fn transport_operators(n: usize, velocity_coeffs: &[f64]) -> Vec<(&'static str, CsrMatrix, Arc<Space>)> {
    let m = mesh(n);
    let vel_space = Space::new(m.clone(), 2, 2, SideSet::ALL);
    let a = Field::new(vel_space.clone(), velocity_coeffs.to_vec());
    let scalar = Space::new(m.clone(), 2, 1, SideSet::EMPTY);
    let aux = Space::new(m, 2, 2, SideSet::EMPTY);
    vec![
        ("b_phi", assemble_transport_scalar(&a, &scalar).unwrap(), scalar.clone()),
        ("b_psi", assemble_transport_vector(&a, &aux).unwrap(), aux),
        ("c", assemble_transport_vector(&a, &vel_space).unwrap(), vel_space.clone()),
        ("c_scalar", transport_matrix(&a, &scalar).unwrap(), scalar),
    ]
}

/// `|r^T B r| / ||r||_M^2`.
pub fn skew_defect(b: &CsrMatrix, space: &Space, r: &[f64]) -> f64 {
    let m = space.scalar_mass();
    let ns = space.scalar_dof_count();
    let mnorm: f64 = (0..space.components())
        .map(|c| m.quad_form(&r[c * ns..(c + 1) * ns]))
        .sum();
    b.quad_form(r).abs() / mnorm
}

/// `-1/2 int (a.grad s) r - (a.grad r) s`, by quadrature on the fields.
pub fn transport_form(a: &Field, r: &Field, s: &Field) -> f64 {
    let sp = r.space();
    let nq = sp.tab().nq();
    let (a0, a1) = (a.qp_values(0), a.qp_values(1));
    let (rv, sv) = (r.qp_values(0), s.qp_values(0));
    let (gr, gs) = (r.qp_grads(0), s.qp_grads(0));
    integrate(sp, |t, q| {
        let k = t * nq + q;
        let ags = a0[k] * gs[k][0] + a1[k] * gs[k][1];
        let agr = a0[k] * gr[k][0] + a1[k] * gr[k][1];
        -0.5 * (ags * rv[k] - agr * sv[k])
    })
}
