mod common;

use common::*;
use nsch_da::fem::{assemble_mass, assemble_transport_scalar, Field};
use nsch_da::mesh::SideSet;

/// Mass matrix of the P1 element `t`, from a global assembly weighted by
/// the indicator of `t`.
fn p1_element_mass(n: usize, t: usize) -> (f64, [[f64; 3]; 3]) {
    let s = space(n, 1, 1, SideSet::EMPTY);
    let nq = s.tab().nq();
    let w: Vec<f64> = (0..s.mesh().num_triangles() * nq)
        .map(|k| if k / nq == t { 1.0 } else { 0.0 })
        .collect();
    let m = assemble_mass(&s, Some(&w)).unwrap();
    let dofs = s.element_dofs(t);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m.get(dofs[i], dofs[j]);
        }
    }
    (s.mesh().geometry(t).area, out)
}

#[test]
fn p1_element_mass_matrix() {
    for (n, t) in [(1, 0), (1, 1), (3, 7), (5, 20)] {
        let (area, m) = p1_element_mass(n, t);
        for i in 0..3 {
            for j in 0..3 {
                let want = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                assert!((m[i][j] - want).abs() <= 4.0 * f64::EPSILON * want, "n={n} t={t} ({i},{j})");
            }
        }
    }
}

#[test]
fn dirichlet_poisson_converges() {
    let p1 = orders(&poisson_errors(1, &[8, 16, 32, 64]));
    assert!(p1.iter().all(|&o| o >= 1.9), "P1 orders {p1:?}");
    let p2 = orders(&poisson_errors(2, &[8, 16, 32, 64]));
    assert!(p2.iter().all(|&o| o >= 2.8), "P2 orders {p2:?}");
}

#[test]
fn neumann_poisson_converges() {
    let p1 = orders(&neumann_errors(1, &[8, 16, 32, 64]));
    assert!(p1.iter().all(|&o| o >= 1.9), "P1 orders {p1:?}");
    let p2 = orders(&neumann_errors(2, &[8, 16, 32, 64]));
    assert!(p2.iter().all(|&o| o >= 2.8), "P2 orders {p2:?}");
}

#[test]
fn observation_error_order() {
    let e = observation_errors(&[8, 16, 32]);
    let o = orders(&e);
    assert!(o.iter().all(|&x| x >= 1.9), "orders {o:?} errors {e:?}");
}

#[test]
fn transport_matrix_matches_quadrature_of_the_form() {
    // linear velocity: the integrand is of degree 4 and the reference
    // quadrature is exact
    let n = 5;
    let vel = space(n, 2, 2, SideSet::ALL);
    let a = Field::interpolate(&vel, |x, y, c| if c == 0 { 0.3 + x - 2.0 * y } else { 1.5 * x + y }).unwrap();
    let sc = space(n, 2, 1, SideSet::EMPTY);
    let b = assemble_transport_scalar(&a, &sc).unwrap();
    for seed in 0..4 {
        let r = Field::new(sc.clone(), noise(2 * seed, sc.dof_count()));
        let s = Field::new(sc.clone(), noise(2 * seed + 1, sc.dof_count()));
        let want = transport_form(&a, &r, &s);
        let got = b.bilinear(s.coeffs(), r.coeffs());
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
    }
}
