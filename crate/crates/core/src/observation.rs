//! Coarse-grid observation operator.
//!
//! A fine field is sampled at the nodes of the coarse space (injection) and
//! the resulting coarse field is evaluated back at the fine nodes. On nested
//! meshes the composite map is a projection onto the coarse-representable
//! fields.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{FemError, ObservationError};
use crate::fem::{basis, Field, Space};
use crate::mesh::is_nested;
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug)]
pub struct ObservationOperator {
    fine: Arc<Space>,
    coarse: Arc<Space>,
    /// Coarse dof -> fine dof at the same location.
    injection: Vec<usize>,
    restriction: CsrMatrix,
    prolongation: CsrMatrix,
    composite: CsrMatrix,
}

/// Integer key of a point on the half-lattice of spacing `1 / (2 n)`.
fn lattice_key(p: [f64; 2], n: usize) -> (i64, i64) {
    let s = 2.0 * n as f64;
    ((p[0] * s).round() as i64, (p[1] * s).round() as i64)
}

/// Builds `I_H = P R` for scalar spaces of equal degree and components.
pub fn build_observation(fine: &Arc<Space>, coarse: &Arc<Space>) -> Result<ObservationOperator, ObservationError> {
    let (fm, cm) = (fine.mesh(), coarse.mesh());
    if !is_nested(cm, fm) {
        return Err(ObservationError::NotNested {
            coarse: cm.n_side(),
            fine: fm.n_side(),
        });
    }
    if fine.degree() != coarse.degree() || fine.components() != coarse.components() {
        return Err(ObservationError::DegreeMismatch);
    }
    let nf = fine.scalar_dof_count();
    let nc = coarse.scalar_dof_count();
    let lookup: HashMap<(i64, i64), usize> = fine
        .dof_coordinates()
        .iter()
        .enumerate()
        .map(|(i, &p)| (lattice_key(p, fm.n_side()), i))
        .collect();
    let mut injection = Vec::with_capacity(nc);
    for &p in coarse.dof_coordinates() {
        match lookup.get(&lattice_key(p, fm.n_side())) {
            Some(&i) => injection.push(i),
            None => {
                return Err(ObservationError::NotNested {
                    coarse: cm.n_side(),
                    fine: fm.n_side(),
                })
            }
        }
    }
    let restriction = CsrMatrix::new(nc, nf, (0..=nc).collect(), injection.clone(), vec![1.0; nc]);

    let mut p_trip = Vec::new();
    for (i, &x) in fine.dof_coordinates().iter().enumerate() {
        let (t, l) = cm.locate(x);
        let (v, _) = basis(coarse.degree(), l);
        for (k, &dof) in coarse.element_dofs(t).iter().enumerate() {
            // Basis values at nested nodes are exact multiples of 1/8; drop
            // round-off so that coarse nodes map to unit rows.
            let val = if v[k].abs() < 1e-13 { 0.0 } else { v[k] };
            p_trip.push((i, dof, val));
        }
    }
    let prolongation = CsrMatrix::from_triplets(nf, nc, &p_trip);
    let comp_trip: Vec<(usize, usize, f64)> = p_trip.iter().map(|&(i, j, v)| (i, injection[j], v)).collect();
    let composite = CsrMatrix::from_triplets(nf, nf, &comp_trip);
    Ok(ObservationOperator {
        fine: fine.clone(),
        coarse: coarse.clone(),
        injection,
        restriction,
        prolongation,
        composite,
    })
}

impl ObservationOperator {
    pub fn fine(&self) -> &Arc<Space> {
        &self.fine
    }

    pub fn coarse(&self) -> &Arc<Space> {
        &self.coarse
    }

    pub fn restriction(&self) -> &CsrMatrix {
        &self.restriction
    }

    pub fn prolongation(&self) -> &CsrMatrix {
        &self.prolongation
    }

    /// Scalar matrix of `I_H`; vector fields are observed componentwise.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.composite
    }

    /// Fine dofs sampled by the restriction.
    pub fn sampled_dofs(&self) -> &[usize] {
        &self.injection
    }

    /// `I_H field`, applied to every component. The field may live on any
    /// space with the fine mesh and degree.
    pub fn observe(&self, field: &Field) -> Result<Field, ObservationError> {
        let s = field.space();
        if !s.mesh().same_as(self.fine.mesh()) || s.degree() != self.fine.degree() {
            return Err(FemError::SpaceMismatch("observation input").into());
        }
        let mut out = Field::zeros(s);
        for c in 0..s.components() {
            let y = self.composite.mul_vec(field.component(c));
            out.component_mut(c).copy_from_slice(&y);
        }
        Ok(out)
    }

    /// `I_H (a - b)`.
    pub fn observe_difference(&self, a: &Field, b: &Field) -> Result<Field, ObservationError> {
        self.observe(&a.lin_comb(1.0, b, -1.0)?)
    }
}
