//! Uniform triangulations of the unit square.
//!
//! Every cell of the `n x n` grid is split along its lower-left to upper-right
//! diagonal, so meshes whose resolutions divide one another are geometrically
//! nested. Vertices are numbered row-major, `index = j * (n + 1) + i`.

use std::fmt;
use std::io::{self, Write};

use crate::error::MeshError;

/// One side of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Top, Side::Left, Side::Right];

    fn bit(self) -> u8 {
        match self {
            Side::Bottom => 1,
            Side::Top => 2,
            Side::Left => 4,
            Side::Right => 8,
        }
    }
}

/// A small set of [`Side`] labels.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SideSet(u8);

impl SideSet {
    pub const EMPTY: SideSet = SideSet(0);
    pub const ALL: SideSet = SideSet(15);

    pub fn of(sides: &[Side]) -> Self {
        SideSet(sides.iter().fold(0, |acc, s| acc | s.bit()))
    }

    pub fn contains(self, side: Side) -> bool {
        self.0 & side.bit() != 0
    }

    pub fn insert(&mut self, side: Side) {
        self.0 |= side.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn intersects(self, other: SideSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Side labels of a point of the closed unit square.
    pub fn of_point(p: [f64; 2]) -> Self {
        const TOL: f64 = 1e-12;
        let mut set = SideSet::EMPTY;
        if p[1].abs() < TOL {
            set.insert(Side::Bottom);
        }
        if (p[1] - 1.0).abs() < TOL {
            set.insert(Side::Top);
        }
        if p[0].abs() < TOL {
            set.insert(Side::Left);
        }
        if (p[0] - 1.0).abs() < TOL {
            set.insert(Side::Right);
        }
        set
    }
}

impl fmt::Debug for SideSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(Side::ALL.iter().filter(|s| self.contains(**s)))
            .finish()
    }
}

/// Geometry of one triangle: area and the (constant) gradients of its
/// barycentric coordinates.
#[derive(Clone, Copy, Debug)]
pub struct TriangleGeometry {
    pub area: f64,
    pub grad_bary: [[f64; 2]; 3],
}

#[derive(Clone, Debug)]
pub struct Mesh {
    n_side: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// Local edge `k` of a triangle joins local vertices `k` and `(k + 1) % 3`.
    triangle_edges: Vec<[usize; 3]>,
    vertex_sides: Vec<SideSet>,
    edge_sides: Vec<SideSet>,
    geometry: Vec<TriangleGeometry>,
}

/// Builds the uniform `n_side x n_side` triangulation of the unit square.
pub fn build_uniform_mesh(n_side: usize) -> Result<Mesh, MeshError> {
    if n_side == 0 {
        return Err(MeshError::ZeroSubdivisions);
    }
    let n = n_side;
    let np = n + 1;
    let h = 1.0 / n as f64;
    let vid = |i: usize, j: usize| j * np + i;

    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            // exact endpoints so boundary detection never depends on round-off
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            vertices.push([x, y]);
        }
    }

    let n_horizontal = np * n;
    let n_vertical = n * np;
    let horizontal = |i: usize, j: usize| j * n + i;
    let vertical = |i: usize, j: usize| n_horizontal + j * np + i;
    let diagonal = |i: usize, j: usize| n_horizontal + n_vertical + j * n + i;

    let mut edges = vec![[0usize; 2]; n_horizontal + n_vertical + n * n];
    for j in 0..np {
        for i in 0..n {
            edges[horizontal(i, j)] = [vid(i, j), vid(i + 1, j)];
        }
    }
    for j in 0..n {
        for i in 0..np {
            edges[vertical(i, j)] = [vid(i, j), vid(i, j + 1)];
        }
    }
    for j in 0..n {
        for i in 0..n {
            edges[diagonal(i, j)] = [vid(i, j), vid(i + 1, j + 1)];
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut triangle_edges = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangle_edges.push([horizontal(i, j), vertical(i + 1, j), diagonal(i, j)]);
            triangles.push([v00, v11, v01]);
            triangle_edges.push([diagonal(i, j), horizontal(i, j + 1), vertical(i, j)]);
        }
    }

    let vertex_sides: Vec<SideSet> = vertices.iter().map(|&p| SideSet::of_point(p)).collect();
    let edge_sides = edges
        .iter()
        .map(|&[a, b]| {
            let (sa, sb) = (vertex_sides[a], vertex_sides[b]);
            SideSet(sa.0 & sb.0)
        })
        .collect();

    let geometry = triangles
        .iter()
        .map(|t| triangle_geometry(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
        .collect();

    Ok(Mesh {
        n_side,
        vertices,
        triangles,
        edges,
        triangle_edges,
        vertex_sides,
        edge_sides,
        geometry,
    })
}

fn triangle_geometry(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> TriangleGeometry {
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let grad_bary = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    TriangleGeometry {
        area: 0.5 * det,
        grad_bary,
    }
}

/// True iff `fine` refines `coarse`: the resolutions divide and every coarse
/// vertex coincides with a fine vertex.
pub fn is_nested(coarse: &Mesh, fine: &Mesh) -> bool {
    if fine.n_side % coarse.n_side != 0 {
        return false;
    }
    let ratio = fine.n_side / coarse.n_side;
    let nc = coarse.n_side + 1;
    let nf = fine.n_side + 1;
    (0..nc).all(|j| {
        (0..nc).all(|i| {
            let pc = coarse.vertices[j * nc + i];
            let pf = fine.vertices[j * ratio * nf + i * ratio];
            (pc[0] - pf[0]).abs() <= 1e-14 && (pc[1] - pf[1]).abs() <= 1e-14
        })
    })
}

impl Mesh {
    pub fn n_side(&self) -> usize {
        self.n_side
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn vertex_sides(&self) -> &[SideSet] {
        &self.vertex_sides
    }

    pub fn edge_sides(&self) -> &[SideSet] {
        &self.edge_sides
    }

    pub fn geometry(&self, triangle: usize) -> &TriangleGeometry {
        &self.geometry[triangle]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Midpoint of edge `e`, i.e. the location of its quadratic node.
    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Meshes produced by [`build_uniform_mesh`] are determined by `n_side`.
    pub fn same_as(&self, other: &Mesh) -> bool {
        std::ptr::eq(self, other) || self.n_side == other.n_side
    }

    /// Finds a triangle containing `p` and the barycentric coordinates of `p`
    /// in it. Points outside the closed unit square are clamped onto it.
    pub fn locate(&self, p: [f64; 2]) -> (usize, [f64; 3]) {
        let n = self.n_side;
        let nf = n as f64;
        let sx = (p[0].clamp(0.0, 1.0) * nf).min(nf);
        let sy = (p[1].clamp(0.0, 1.0) * nf).min(nf);
        let i = (sx.floor() as usize).min(n - 1);
        let j = (sy.floor() as usize).min(n - 1);
        let xi = sx - i as f64;
        let eta = sy - j as f64;
        let cell = j * n + i;
        if eta <= xi {
            (2 * cell, [1.0 - xi, xi - eta, eta])
        } else {
            (2 * cell + 1, [1.0 - eta, xi, eta - xi])
        }
    }

    /// Writes the mesh as a legacy ASCII VTK unstructured grid.
    pub fn write_vtk<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "uniform triangulation n_side={}", self.n_side)?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.vertices.len())?;
        for p in &self.vertices {
            writeln!(out, "{} {} 0", p[0], p[1])?;
        }
        let nt = self.triangles.len();
        writeln!(out, "CELLS {} {}", nt, 4 * nt)?;
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(out, "CELL_TYPES {}", nt)?;
        for _ in 0..nt {
            writeln!(out, "5")?;
        }
        Ok(())
    }
}
