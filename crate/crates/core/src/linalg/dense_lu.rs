use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;

use super::PIVOT_TOLERANCE;
use crate::sparse::CsrMatrix;

/// Partial-pivoting LU of a dense square matrix that refuses to factor
/// numerically singular input.
pub struct DenseLu {
    lu: LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl DenseLu {
    /// `scale` is the magnitude pivots are compared against; pass the
    /// largest entry of the original (not Schur-reduced) system.
    pub fn factor(m: DMatrix<Complex64>, scale: f64) -> Option<Self> {
        assert!(m.is_square());
        let n = m.nrows();
        let lu = m.lu();
        let threshold = PIVOT_TOLERANCE * scale.max(f64::MIN_POSITIVE);
        let u = lu.u();
        if (0..n).any(|i| !(u[(i, i)].norm() > threshold)) {
            return None;
        }
        Some(Self { lu, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut DMatrix<Complex64>) {
        let ok = self.lu.solve_mut(b);
        debug_assert!(ok);
    }

    pub fn solve_vec(&self, b: &mut DVector<Complex64>) {
        let ok = self.lu.solve_mut(b);
        debug_assert!(ok);
    }
}

/// Solves `a x = b` densely with iterative refinement, or `None` when `a` is
/// numerically singular.
pub fn dense_solve(a: &CsrMatrix, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let lu = DenseLu::factor(a.to_dense(), a.max_abs())?;
    let solve = |r: &[Complex64]| -> Vec<Complex64> {
        let mut x = DVector::from_column_slice(r);
        lu.solve_vec(&mut x);
        x.iter().copied().collect()
    };
    let mut x = solve(b);
    super::refine(a, b, &mut x, solve);
    Some(x)
}
