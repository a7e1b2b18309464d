use std::sync::{Arc, OnceLock};

use crate::error::FemError;
use crate::mesh::{Mesh, SideSet, TriangleGeometry};
use crate::sparse::CsrMatrix;

use super::quadrature::QuadratureRule;

/// Values and barycentric derivatives of the local basis at the points of a
/// quadrature rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub nloc: usize,
    pub weights: Vec<f64>,
    /// `vals[q * nloc + k]`
    pub vals: Vec<f64>,
    /// `dlam[q * nloc + k][m]` is the derivative of basis `k` with respect to
    /// barycentric coordinate `m`.
    pub dlam: Vec<[f64; 3]>,
}

impl Tabulation {
    pub fn new(degree: usize, rule: &QuadratureRule) -> Self {
        let nloc = local_count(degree);
        let mut vals = Vec::with_capacity(rule.len() * nloc);
        let mut dlam = Vec::with_capacity(rule.len() * nloc);
        for p in &rule.points {
            let (v, d) = basis(degree, *p);
            vals.extend_from_slice(&v[..nloc]);
            dlam.extend_from_slice(&d[..nloc]);
        }
        Tabulation {
            nloc,
            weights: rule.weights.clone(),
            vals,
            dlam,
        }
    }

    pub fn nq(&self) -> usize {
        self.weights.len()
    }

    /// Physical basis gradients on one element, laid out like `vals`.
    pub fn grads(&self, geom: &TriangleGeometry, out: &mut Vec<[f64; 2]>) {
        out.clear();
        let g = &geom.grad_bary;
        for d in &self.dlam {
            out.push([
                d[0] * g[0][0] + d[1] * g[1][0] + d[2] * g[2][0],
                d[0] * g[0][1] + d[1] * g[1][1] + d[2] * g[2][1],
            ]);
        }
    }
}

fn local_count(degree: usize) -> usize {
    match degree {
        1 => 3,
        2 => 6,
        _ => panic!("unsupported degree {degree}"),
    }
}

/// Local basis values and barycentric derivatives at barycentric point `l`.
/// Quadratic ordering: three vertex functions, then edges (0,1), (1,2), (2,0).
pub fn basis(degree: usize, l: [f64; 3]) -> ([f64; 6], [[f64; 3]; 6]) {
    let mut v = [0.0; 6];
    let mut d = [[0.0; 3]; 6];
    match degree {
        1 => {
            for k in 0..3 {
                v[k] = l[k];
                d[k][k] = 1.0;
            }
        }
        2 => {
            for k in 0..3 {
                v[k] = l[k] * (2.0 * l[k] - 1.0);
                d[k][k] = 4.0 * l[k] - 1.0;
            }
            for e in 0..3 {
                let (a, b) = (e, (e + 1) % 3);
                v[3 + e] = 4.0 * l[a] * l[b];
                d[3 + e][a] = 4.0 * l[b];
                d[3 + e][b] = 4.0 * l[a];
            }
        }
        _ => panic!("unsupported degree {degree}"),
    }
    (v, d)
}

/// A continuous Lagrange space of degree 1 or 2 with one or two components.
///
/// Scalar dofs are the mesh vertices followed, for degree 2, by the edge
/// midpoints in edge order. Vector fields are stored component-blocked.
#[derive(Debug)]
pub struct Space {
    mesh: Arc<Mesh>,
    degree: usize,
    components: usize,
    dirichlet: SideSet,
    coords: Vec<[f64; 2]>,
    sides: Vec<SideSet>,
    element_dofs: Vec<usize>,
    pattern_ptr: Vec<usize>,
    pattern_idx: Vec<usize>,
    element_pos: Vec<usize>,
    tab_std: Tabulation,
    tab_transport: Tabulation,
    mass: OnceLock<CsrMatrix>,
    mean: OnceLock<Vec<f64>>,
}

impl Space {
    /// Panics unless `degree` is 1 or 2 and `components` is 1 or 2.
    pub fn new(mesh: Arc<Mesh>, degree: usize, components: usize, dirichlet: SideSet) -> Arc<Space> {
        assert!(degree == 1 || degree == 2, "degree must be 1 or 2");
        assert!(components == 1 || components == 2, "one or two components");
        let nv = mesh.num_vertices();
        let mut coords = mesh.vertices().to_vec();
        let mut sides = mesh.vertex_sides().to_vec();
        if degree == 2 {
            for e in 0..mesh.num_edges() {
                coords.push(mesh.edge_midpoint(e));
            }
            sides.extend_from_slice(mesh.edge_sides());
        }
        let nloc = local_count(degree);
        let mut element_dofs = Vec::with_capacity(mesh.num_triangles() * nloc);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            element_dofs.extend_from_slice(tri);
            if degree == 2 {
                element_dofs.extend(mesh.triangle_edges()[t].iter().map(|&e| nv + e));
            }
        }
        let ns = coords.len();
        let (pattern_ptr, pattern_idx, element_pos) = build_pattern(ns, nloc, &element_dofs);
        Arc::new(Space {
            degree,
            components,
            dirichlet,
            coords,
            sides,
            element_dofs,
            pattern_ptr,
            pattern_idx,
            element_pos,
            tab_std: Tabulation::new(degree, &QuadratureRule::degree4()),
            tab_transport: Tabulation::new(degree, &QuadratureRule::degree5()),
            mass: OnceLock::new(),
            mean: OnceLock::new(),
            mesh,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn dirichlet_sides(&self) -> SideSet {
        self.dirichlet
    }

    /// Number of dofs per component.
    pub fn scalar_dof_count(&self) -> usize {
        self.coords.len()
    }

    pub fn dof_count(&self) -> usize {
        self.components * self.coords.len()
    }

    /// Coordinates of the scalar dofs.
    pub fn dof_coordinates(&self) -> &[[f64; 2]] {
        &self.coords
    }

    /// Boundary sides on which each scalar dof lies.
    pub fn dof_sides(&self) -> &[SideSet] {
        &self.sides
    }

    pub fn local_count(&self) -> usize {
        local_count(self.degree)
    }

    /// Scalar dofs of triangle `t` in local basis order.
    pub fn element_dofs(&self, t: usize) -> &[usize] {
        let n = self.local_count();
        &self.element_dofs[t * n..(t + 1) * n]
    }

    /// Constraint flags for one component.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        self.sides.iter().map(|s| s.intersects(self.dirichlet)).collect()
    }

    /// Constraint flags for all components.
    pub fn full_dirichlet_mask(&self) -> Vec<bool> {
        let m = self.dirichlet_mask();
        (0..self.components).flat_map(|_| m.iter().copied()).collect()
    }

    /// Tabulation for the standard degree-4 rule.
    pub fn tab(&self) -> &Tabulation {
        &self.tab_std
    }

    /// Tabulation for the degree-5 rule used by the transport forms.
    pub fn tab_transport(&self) -> &Tabulation {
        &self.tab_transport
    }

    /// Same mesh, degree and component count.
    pub fn same_layout(&self, other: &Space) -> bool {
        self.mesh.same_as(&other.mesh)
            && self.degree == other.degree
            && self.components == other.components
    }

    pub(crate) fn pattern(&self) -> (&[usize], &[usize], &[usize]) {
        (&self.pattern_ptr, &self.pattern_idx, &self.element_pos)
    }

    /// Unweighted scalar mass matrix, assembled once.
    pub fn scalar_mass(&self) -> &CsrMatrix {
        self.mass.get_or_init(|| super::assembly::scalar_mass(self, None))
    }

    /// `m_i = integral of basis_i`.
    pub fn mean_vector(&self) -> &[f64] {
        self.mean
            .get_or_init(|| super::assembly::assemble_load_scalar(self, |_, _| 1.0))
    }
}

fn build_pattern(ns: usize, nloc: usize, element_dofs: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); ns];
    for dofs in element_dofs.chunks(nloc) {
        for &a in dofs {
            rows[a].extend_from_slice(dofs);
        }
    }
    let mut ptr = Vec::with_capacity(ns + 1);
    ptr.push(0);
    let mut idx = Vec::new();
    for r in &mut rows {
        r.sort_unstable();
        r.dedup();
        idx.extend_from_slice(r);
        ptr.push(idx.len());
    }
    let mut pos = Vec::with_capacity(element_dofs.len() * nloc);
    for dofs in element_dofs.chunks(nloc) {
        for &a in dofs {
            let row = &idx[ptr[a]..ptr[a + 1]];
            for &b in dofs {
                pos.push(ptr[a] + row.binary_search(&b).expect("pattern entry"));
            }
        }
    }
    (ptr, idx, pos)
}

/// A coefficient vector bound to a space.
#[derive(Clone, Debug)]
pub struct Field {
    space: Arc<Space>,
    coeffs: Vec<f64>,
}

impl Field {
    /// Panics if the length does not match the space.
    pub fn new(space: Arc<Space>, coeffs: Vec<f64>) -> Field {
        assert_eq!(coeffs.len(), space.dof_count(), "coefficient length");
        Field { space, coeffs }
    }

    pub fn zeros(space: &Arc<Space>) -> Field {
        Field::constant(space, 0.0)
    }

    pub fn constant(space: &Arc<Space>, c: f64) -> Field {
        Field {
            coeffs: vec![c; space.dof_count()],
            space: space.clone(),
        }
    }

    /// Nodal interpolant of `f(x, y, component)`.
    pub fn interpolate<F: Fn(f64, f64, usize) -> f64>(space: &Arc<Space>, f: F) -> Result<Field, FemError> {
        let ns = space.scalar_dof_count();
        let mut coeffs = Vec::with_capacity(space.dof_count());
        for c in 0..space.components() {
            for (dof, &[x, y]) in space.dof_coordinates().iter().enumerate() {
                let v = f(x, y, c);
                if !v.is_finite() {
                    return Err(FemError::NonFinite { dof: c * ns + dof, x, y });
                }
                coeffs.push(v);
            }
        }
        Ok(Field {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let ns = self.space.scalar_dof_count();
        &self.coeffs[c * ns..(c + 1) * ns]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let ns = self.space.scalar_dof_count();
        &mut self.coeffs[c * ns..(c + 1) * ns]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }

    /// Nodewise map, e.g. truncation.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Result<Field, FemError> {
        if !self.space.same_layout(&other.space) {
            return Err(FemError::SpaceMismatch("linear combination"));
        }
        Ok(Field {
            space: self.space.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// Value of component `c` at barycentric point `l` of triangle `t`.
    pub fn eval(&self, t: usize, l: [f64; 3], c: usize) -> f64 {
        let (v, _) = basis(self.space.degree, l);
        let comp = self.component(c);
        self.space
            .element_dofs(t)
            .iter()
            .zip(v.iter())
            .map(|(&d, &b)| comp[d] * b)
            .sum()
    }

    /// Gradient of component `c` at barycentric point `l` of triangle `t`.
    pub fn grad(&self, t: usize, l: [f64; 3], c: usize) -> [f64; 2] {
        let (_, d) = basis(self.space.degree, l);
        let g = &self.space.mesh.geometry(t).grad_bary;
        let comp = self.component(c);
        let mut out = [0.0; 2];
        for (k, &dof) in self.space.element_dofs(t).iter().enumerate() {
            let u = comp[dof];
            for m in 0..3 {
                out[0] += u * d[k][m] * g[m][0];
                out[1] += u * d[k][m] * g[m][1];
            }
        }
        out
    }

    /// Value at a physical point.
    pub fn eval_at(&self, p: [f64; 2], c: usize) -> f64 {
        let (t, l) = self.space.mesh.locate(p);
        self.eval(t, l, c)
    }

    /// Values of component `c` at the standard quadrature points, indexed
    /// `t * nq + q`.
    pub fn qp_values(&self, c: usize) -> Vec<f64> {
        self.qp_values_with(self.space.tab(), c)
    }

    pub fn qp_grads(&self, c: usize) -> Vec<[f64; 2]> {
        self.qp_grads_with(self.space.tab(), c)
    }

    pub(crate) fn qp_values_with(&self, tab: &Tabulation, c: usize) -> Vec<f64> {
        let comp = self.component(c);
        let (nq, nloc) = (tab.nq(), tab.nloc);
        let nt = self.space.mesh.num_triangles();
        let mut out = Vec::with_capacity(nt * nq);
        for t in 0..nt {
            let dofs = self.space.element_dofs(t);
            for q in 0..nq {
                let b = &tab.vals[q * nloc..(q + 1) * nloc];
                out.push(dofs.iter().zip(b).map(|(&d, &v)| comp[d] * v).sum());
            }
        }
        out
    }

    pub(crate) fn qp_grads_with(&self, tab: &Tabulation, c: usize) -> Vec<[f64; 2]> {
        let comp = self.component(c);
        let (nq, nloc) = (tab.nq(), tab.nloc);
        let nt = self.space.mesh.num_triangles();
        let mut out = Vec::with_capacity(nt * nq);
        let mut grads = Vec::new();
        for t in 0..nt {
            tab.grads(self.space.mesh.geometry(t), &mut grads);
            let dofs = self.space.element_dofs(t);
            for q in 0..nq {
                let mut g = [0.0; 2];
                for k in 0..nloc {
                    let u = comp[dofs[k]];
                    g[0] += u * grads[q * nloc + k][0];
                    g[1] += u * grads[q * nloc + k][1];
                }
                out.push(g);
            }
        }
        out
    }

    /// Sets the constrained dofs to `f(x, y, component)`.
    pub fn apply_dirichlet<F: Fn(f64, f64, usize) -> f64>(&mut self, f: F) {
        let mask = self.space.dirichlet_mask();
        let ns = self.space.scalar_dof_count();
        for c in 0..self.space.components() {
            for (i, &m) in mask.iter().enumerate() {
                if m {
                    let [x, y] = self.space.coords[i];
                    self.coeffs[c * ns + i] = f(x, y, c);
                }
            }
        }
    }
}
