//! Assembly of the bilinear and linear forms.
//!
//! Coefficients and load densities are sampled at the standard quadrature
//! points and indexed `t * nq + q` (triangle `t`, point `q`). The transport
//! forms use the degree-5 rule, which integrates them exactly for quadratic
//! velocities and test functions.

use crate::error::FemError;
use crate::sparse::CsrMatrix;

use super::space::{Field, Space, Tabulation};

fn assemble_scalar_with<F>(space: &Space, tab: &Tabulation, mut local: F) -> CsrMatrix
where
    F: FnMut(usize, f64, &[[f64; 2]], &mut [f64]),
{
    let (ptr, idx, pos) = space.pattern();
    let ns = space.scalar_dof_count();
    let nloc = tab.nloc;
    let mut values = vec![0.0; idx.len()];
    let mut loc = vec![0.0; nloc * nloc];
    let mut grads = Vec::new();
    let mesh = space.mesh();
    for t in 0..mesh.num_triangles() {
        let geom = mesh.geometry(t);
        tab.grads(geom, &mut grads);
        loc.iter_mut().for_each(|v| *v = 0.0);
        local(t, geom.area, &grads, &mut loc);
        let p = &pos[t * nloc * nloc..(t + 1) * nloc * nloc];
        for (k, &v) in loc.iter().enumerate() {
            values[p[k]] += v;
        }
    }
    CsrMatrix::new(ns, ns, ptr.to_vec(), idx.to_vec(), values).pruned()
}

fn check_qp(space: &Space, data: Option<&[f64]>) -> Result<(), FemError> {
    match data {
        Some(w) if w.len() != space.mesh().num_triangles() * space.tab().nq() => Err(FemError::MeshMismatch),
        _ => Ok(()),
    }
}

fn expand(space: &Space, scalar: CsrMatrix) -> CsrMatrix {
    if space.components() == 1 {
        scalar
    } else {
        CsrMatrix::block_diag(&[&scalar, &scalar])
    }
}

pub(crate) fn scalar_mass(space: &Space, weight: Option<&[f64]>) -> CsrMatrix {
    let tab = space.tab();
    let (nq, n) = (tab.nq(), tab.nloc);
    assemble_scalar_with(space, tab, |t, area, _, loc| {
        for q in 0..nq {
            let w = tab.weights[q] * area * weight.map_or(1.0, |w| w[t * nq + q]);
            if w == 0.0 {
                continue;
            }
            let v = &tab.vals[q * n..(q + 1) * n];
            for a in 0..n {
                for b in 0..n {
                    loc[a * n + b] += w * v[a] * v[b];
                }
            }
        }
    })
}

pub(crate) fn scalar_stiffness(space: &Space, coeff: Option<&[f64]>) -> CsrMatrix {
    let tab = space.tab();
    let (nq, n) = (tab.nq(), tab.nloc);
    assemble_scalar_with(space, tab, |t, area, g, loc| {
        for q in 0..nq {
            let w = tab.weights[q] * area * coeff.map_or(1.0, |c| c[t * nq + q]);
            if w == 0.0 {
                continue;
            }
            let g = &g[q * n..(q + 1) * n];
            for a in 0..n {
                for b in 0..n {
                    loc[a * n + b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
    })
}

/// Mass matrix `int w u v`; block-diagonal for vector spaces. `weight` holds
/// values at the standard quadrature points.
pub fn assemble_mass(space: &Space, weight: Option<&[f64]>) -> Result<CsrMatrix, FemError> {
    check_qp(space, weight)?;
    let scalar = match weight {
        None => space.scalar_mass().clone(),
        Some(_) => scalar_mass(space, weight),
    };
    Ok(expand(space, scalar))
}

/// Stiffness matrix `int c grad u . grad v`; block-diagonal for vector spaces.
pub fn assemble_stiffness(space: &Space, coeff: Option<&[f64]>) -> Result<CsrMatrix, FemError> {
    check_qp(space, coeff)?;
    Ok(expand(space, scalar_stiffness(space, coeff)))
}

/// Scalar transport matrix for one component in antisymmetric form,
/// `C_ij = 1/2 int (a . grad phi_j) phi_i - (a . grad phi_i) phi_j`.
///
/// Integrating by parts, this is `int (a . grad phi_j) phi_i + 1/2 (div a)
/// phi_j phi_i` up to the boundary term `-1/2 int (a . n) phi_j phi_i`, so the
/// two agree whenever `a . n = 0`. The antisymmetric form stays exactly
/// skew when the boundary data leak a normal component (lid corners).
pub fn transport_matrix(velocity: &Field, space: &Space) -> Result<CsrMatrix, FemError> {
    let vs = velocity.space();
    if !vs.mesh().same_as(space.mesh()) {
        return Err(FemError::MeshMismatch);
    }
    if vs.components() != 2 || vs.degree() != space.degree() {
        return Err(FemError::SpaceMismatch("transport velocity"));
    }
    let tab = space.tab_transport();
    let (nq, n) = (tab.nq(), tab.nloc);
    let a0 = velocity.qp_values_with(vs.tab_transport(), 0);
    let a1 = velocity.qp_values_with(vs.tab_transport(), 1);
    Ok(assemble_scalar_with(space, tab, |t, area, g, loc| {
        for q in 0..nq {
            let k = t * nq + q;
            let w = tab.weights[q] * area;
            let a = [0.5 * w * a0[k], 0.5 * w * a1[k]];
            let v = &tab.vals[q * n..(q + 1) * n];
            let g = &g[q * n..(q + 1) * n];
            let mut adv = [0.0; 6];
            for j in 0..n {
                adv[j] = a[0] * g[j][0] + a[1] * g[j][1];
            }
            for i in 0..n {
                for j in 0..n {
                    loc[i * n + j] += adv[j] * v[i] - adv[i] * v[j];
                }
            }
        }
    }))
}

/// Matrix of `b_phi(a; r, s) = -(r a, grad s) - 1/2 ((div a) r, s)` with rows
/// indexed by the test function `s`, in the antisymmetric form of
/// [`transport_matrix`]. Equal to `-C^T`.
pub fn assemble_transport_scalar(velocity: &Field, space: &Space) -> Result<CsrMatrix, FemError> {
    if space.components() != 1 {
        return Err(FemError::SpaceMismatch("scalar transport target"));
    }
    Ok(transport_matrix(velocity, space)?.transpose().scaled(-1.0))
}

/// Matrix of `((a . grad) z, w) + 1/2 ((div a) z, w)` on a vector space, in
/// the antisymmetric form of [`transport_matrix`]: the same scalar operator
/// acting on every component.
pub fn assemble_transport_vector(velocity: &Field, space: &Space) -> Result<CsrMatrix, FemError> {
    if space.components() != 2 {
        return Err(FemError::SpaceMismatch("vector transport target"));
    }
    let c = transport_matrix(velocity, space)?;
    Ok(CsrMatrix::block_diag(&[&c, &c]))
}

/// `L_i = int density * phi_i` for a scalar space.
pub fn assemble_load_scalar(space: &Space, mut density: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    assemble_load(space, |t, q, _| density(t, q))
}

/// Load vector `L[c][i] = int density_c * phi_i`, component-blocked.
/// `density(t, q, c)` is evaluated at the standard quadrature points.
pub fn assemble_load(space: &Space, mut density: impl FnMut(usize, usize, usize) -> f64) -> Vec<f64> {
    let tab = space.tab();
    let (nq, n) = (tab.nq(), tab.nloc);
    let ns = space.scalar_dof_count();
    let mut out = vec![0.0; space.dof_count()];
    let mesh = space.mesh();
    for c in 0..space.components() {
        let part = &mut out[c * ns..(c + 1) * ns];
        for t in 0..mesh.num_triangles() {
            let area = mesh.geometry(t).area;
            let dofs = space.element_dofs(t);
            for q in 0..nq {
                let d = density(t, q, c);
                if d == 0.0 {
                    continue;
                }
                let w = tab.weights[q] * area * d;
                for (k, &dof) in dofs.iter().enumerate() {
                    part[dof] += w * tab.vals[q * n + k];
                }
            }
        }
    }
    out
}

/// Load vector `L[c][i] = int flux_c . grad phi_i`, component-blocked.
pub fn assemble_grad_load(space: &Space, mut flux: impl FnMut(usize, usize, usize) -> [f64; 2]) -> Vec<f64> {
    let tab = space.tab();
    let (nq, n) = (tab.nq(), tab.nloc);
    let ns = space.scalar_dof_count();
    let mut out = vec![0.0; space.dof_count()];
    let mesh = space.mesh();
    let mut grads = Vec::new();
    for t in 0..mesh.num_triangles() {
        let geom = mesh.geometry(t);
        tab.grads(geom, &mut grads);
        let dofs = space.element_dofs(t);
        for c in 0..space.components() {
            for q in 0..nq {
                let f = flux(t, q, c);
                if f == [0.0, 0.0] {
                    continue;
                }
                let w = tab.weights[q] * geom.area;
                for (k, &dof) in dofs.iter().enumerate() {
                    let g = grads[q * n + k];
                    out[c * ns + dof] += w * (f[0] * g[0] + f[1] * g[1]);
                }
            }
        }
    }
    out
}

/// `int f` with `f(t, q)` sampled at the standard quadrature points.
pub fn integrate(space: &Space, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    let tab = space.tab();
    let mesh = space.mesh();
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let area = mesh.geometry(t).area;
        let mut s = 0.0;
        for (q, w) in tab.weights.iter().enumerate() {
            s += w * f(t, q);
        }
        total += area * s;
    }
    total
}

/// `(a, b)_{L2}` summed over components.
pub fn inner_l2(a: &Field, b: &Field) -> Result<f64, FemError> {
    if !a.space().same_layout(b.space()) {
        return Err(FemError::SpaceMismatch("L2 inner product"));
    }
    let m = a.space().scalar_mass();
    Ok((0..a.space().components())
        .map(|c| m.bilinear(a.component(c), b.component(c)))
        .sum())
}

pub fn l2_norm(field: &Field) -> f64 {
    inner_l2(field, field).expect("same field").max(0.0).sqrt()
}

pub fn l2_error(a: &Field, b: &Field) -> Result<f64, FemError> {
    Ok(l2_norm(&a.lin_comb(1.0, b, -1.0)?))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::{build_uniform_mesh, SideSet};

    fn space(n: usize, degree: usize, comps: usize) -> Arc<Space> {
        Space::new(Arc::new(build_uniform_mesh(n).unwrap()), degree, comps, SideSet::EMPTY)
    }

    #[test]
    fn p1_element_mass_matrix() {
        let s = space(1, 1, 1);
        let m = assemble_mass(&s, None).unwrap();
        // Vertex 1 = (1,0) belongs to the lower triangle only, vertex 0 to both.
        let a = 0.5;
        assert!((m.get(1, 1) - a / 12.0 * 2.0).abs() < 1e-16);
        assert!((m.get(1, 3) - a / 12.0).abs() < 1e-16);
        assert_eq!(m.get(1, 2), 0.0);
        assert!((m.get(0, 0) - 2.0 * a / 12.0 * 2.0).abs() < 1e-16);
    }

    #[test]
    fn mass_integrates_unity() {
        for (n, d) in [(1, 1), (3, 2), (8, 2)] {
            let s = space(n, d, 1);
            let one = vec![1.0; s.dof_count()];
            assert!((assemble_mass(&s, None).unwrap().quad_form(&one) - 1.0).abs() < 1e-13);
            let load = assemble_load_scalar(&s, |_, _| 1.0);
            assert!((load.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
        let s = space(2, 2, 1);
        let zero = vec![0.0; s.mesh().num_triangles() * s.tab().nq()];
        assert_eq!(assemble_mass(&s, Some(&zero)).unwrap().nnz(), 0);
        assert!(assemble_mass(&s, Some(&zero[1..])).is_err());
    }

    #[test]
    fn stiffness_kernel_and_energy() {
        let s = space(4, 2, 1);
        let k = assemble_stiffness(&s, None).unwrap();
        let c = vec![3.0; s.dof_count()];
        assert!(k.mul_vec(&c).iter().all(|v| v.abs() < 1e-12));
        let x = Field::interpolate(&s, |x, _, _| x).unwrap();
        assert!((k.quad_form(x.coeffs()) - 1.0).abs() < 1e-12);
        let two = vec![2.0; s.mesh().num_triangles() * s.tab().nq()];
        let k2 = assemble_stiffness(&s, Some(&two)).unwrap();
        let diff = CsrMatrix::linear_combination(&[(1.0, &k2), (-2.0, &k)]);
        assert!(diff.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn transport_of_constant_velocity() {
        let s = space(3, 2, 1);
        let v = space(3, 2, 2);
        let a = Field::interpolate(&v, |_, _, c| if c == 0 { 0.7 } else { -0.4 }).unwrap();
        let b = assemble_transport_scalar(&a, &s).unwrap();
        let r = Field::interpolate(&s, |x, y, _| x * x - y).unwrap();
        let sfun = Field::interpolate(&s, |x, y, _| x * y + 1.0).unwrap();
        let val = b.bilinear(sfun.coeffs(), r.coeffs());
        // -1/2 int (a . grad s) r - (a . grad r) s, r = x^2 - y, s = x y + 1
        let exact = 31.0 / 40.0;
        assert!((val - exact).abs() < 1e-13, "{val} vs {exact}");
    }

    #[test]
    fn zero_velocity_gives_zero_transport() {
        let s = space(3, 2, 2);
        let z = Field::zeros(&s);
        assert_eq!(assemble_transport_vector(&z, &s).unwrap().nnz(), 0);
    }

    #[test]
    fn l2_examples() {
        let s = space(8, 2, 1);
        let one = Field::constant(&s, 1.0);
        assert!((l2_norm(&one) - 1.0).abs() < 1e-13);
        let x = Field::interpolate(&s, |x, _, _| x).unwrap();
        assert!((l2_norm(&x) - (1.0f64 / 3.0).sqrt()).abs() < 1e-13);
        assert_eq!(l2_error(&x, &x).unwrap(), 0.0);
    }
}
