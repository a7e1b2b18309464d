//! Sparse matrices and the linear solvers used by every substep.

mod csr;
mod solve;

pub use csr::{CsrMatrix, DirichletReduction};
pub use solve::{
    bicgstab_with, solve, solve_zero_mean, Ilu0, LinearSolver, Method, Preconditioner, ZeroMeanSolution, DEFAULT_TOL,
};

/// A 2x2 block operator `[[a00 A00, a01 A01], [a10 A10, a11 A11]]`.
#[derive(Clone, Copy, Debug)]
pub struct BlockSystem<'a> {
    pub blocks: [[(f64, &'a CsrMatrix); 2]; 2],
}

impl<'a> BlockSystem<'a> {
    /// Panics if the block dimensions are not conformal.
    pub fn new(blocks: [[(f64, &'a CsrMatrix); 2]; 2]) -> Self {
        for r in 0..2 {
            assert_eq!(blocks[r][0].1.nrows(), blocks[r][1].1.nrows(), "block row {r}");
        }
        for c in 0..2 {
            assert_eq!(blocks[0][c].1.ncols(), blocks[1][c].1.ncols(), "block column {c}");
        }
        BlockSystem { blocks }
    }

    pub fn row_split(&self) -> usize {
        self.blocks[0][0].1.nrows()
    }

    /// Assembles the monolithic matrix in block order.
    pub fn to_csr(&self) -> CsrMatrix {
        let n0 = self.blocks[0][0].1.nrows();
        let n1 = self.blocks[1][0].1.nrows();
        let c0 = self.blocks[0][0].1.ncols();
        let c1 = self.blocks[0][1].1.ncols();
        let mut row_ptr = Vec::with_capacity(n0 + n1 + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (br, nr) in [(0usize, n0), (1, n1)] {
            for i in 0..nr {
                for (bc, off) in [(0usize, 0usize), (1, c0)] {
                    let (s, m) = self.blocks[br][bc];
                    let (cols, vals) = m.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        let sv = s * v;
                        if sv != 0.0 {
                            col_idx.push(j + off);
                            values.push(sv);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix::new(n0 + n1, c0 + c1, row_ptr, col_idx, values)
    }

    /// Assembles the matrix with unknowns interleaved, `(x0_0, x1_0, x0_1,
    /// x1_1, ...)`. Requires square blocks of equal size.
    pub fn to_csr_interleaved(&self) -> CsrMatrix {
        let n = self.blocks[0][0].1.nrows();
        for r in 0..2 {
            for c in 0..2 {
                let m = self.blocks[r][c].1;
                assert!(m.nrows() == n && m.ncols() == n, "interleaving needs equal square blocks");
            }
        }
        let mut row_ptr = Vec::with_capacity(2 * n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            for br in 0..2 {
                merged.clear();
                for bc in 0..2 {
                    let (s, m) = self.blocks[br][bc];
                    let (cols, vals) = m.row(i);
                    merged.extend(cols.iter().zip(vals).map(|(&j, &v)| (2 * j + bc, s * v)));
                }
                merged.sort_unstable_by_key(|e| e.0);
                for &(j, v) in &merged {
                    if v != 0.0 {
                        col_idx.push(j);
                        values.push(v);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix::new(2 * n, 2 * n, row_ptr, col_idx, values)
    }

    /// `(a; b) -> (a_0, b_0, a_1, b_1, ...)`.
    pub fn interleave(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).flat_map(|(&x, &y)| [x, y]).collect()
    }

    /// Inverse of [`BlockSystem::interleave`].
    pub fn deinterleave(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (x.iter().step_by(2).copied().collect(), x.iter().skip(1).step_by(2).copied().collect())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.to_csr().mul_vec(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_assembly_matches_blockwise_product() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0), (0, 1, 3.0)]);
        let b = CsrMatrix::identity(2);
        let sys = BlockSystem::new([[(1.0, &a), (2.0, &b)], [(-1.0, &b), (0.5, &a)]]);
        let m = sys.to_csr();
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = m.mul_vec(&x);
        let ax1 = a.mul_vec(&x[..2]);
        let ax2 = a.mul_vec(&x[2..]);
        assert_eq!(y[0], ax1[0] + 2.0 * x[2]);
        assert_eq!(y[1], ax1[1] + 2.0 * x[3]);
        assert_eq!(y[2], -x[0] + 0.5 * ax2[0]);
        assert_eq!(y[3], -x[1] + 0.5 * ax2[1]);
        assert_eq!(sys.row_split(), 2);

        let il = sys.to_csr_interleaved();
        let xi = BlockSystem::interleave(&x[..2], &x[2..]);
        let (y0, y1) = BlockSystem::deinterleave(&il.mul_vec(&xi));
        assert_eq!(y0, y[..2].to_vec());
        assert_eq!(y1, y[2..].to_vec());
    }
}
