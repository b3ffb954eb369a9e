//! Iterative refinement with residuals accumulated in double-double
//! arithmetic, so that components many orders of magnitude below the largest
//! one still come out with full relative precision.

use num_complex::Complex64;

use crate::sparse::CsrMatrix;

const MAX_STEPS: usize = 8;

#[derive(Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = two_sum(s, e + self.lo);
        self.hi = hi;
        self.lo = lo;
    }

    fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.add(e);
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `b - A x` with every row accumulated in double-double.
pub fn residual(a: &CsrMatrix, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|r| {
            let (cols, vals) = a.row(r);
            let mut re = DoubleDouble::default();
            let mut im = DoubleDouble::default();
            re.add(b[r].re);
            im.add(b[r].im);
            for (&c, v) in cols.iter().zip(vals) {
                let y = x[c];
                re.add_prod(-v.re, y.re);
                re.add_prod(v.im, y.im);
                im.add_prod(-v.re, y.im);
                im.add_prod(-v.im, y.re);
            }
            Complex64::new(re.value(), im.value())
        })
        .collect()
}

/// Refines `x` in place until corrections stop changing it.
pub fn refine<F>(a: &CsrMatrix, b: &[Complex64], x: &mut [Complex64], solve: F)
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    for _ in 0..MAX_STEPS {
        let r = residual(a, x, b);
        let d = solve(&r);
        let mut changed = false;
        for (xi, di) in x.iter_mut().zip(&d) {
            let next = *xi + di;
            if next != *xi {
                changed = true;
            }
            *xi = next;
        }
        let settled = x
            .iter()
            .zip(&d)
            .all(|(xi, di)| di.norm() <= 1e-3 * f64::EPSILON * xi.norm());
        if !changed || settled {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_residual_is_exact_for_cancelling_terms() {
        let a = CsrMatrix::from_triplets(
            1,
            3,
            [
                (0, 0, Complex64::new(1.0, 0.0)),
                (0, 1, Complex64::new(1e-20, 0.0)),
                (0, 2, Complex64::new(-1.0, 0.0)),
            ],
        );
        let x = [Complex64::new(1.0, 0.0); 3];
        let r = residual(&a, &x, &[Complex64::new(0.0, 0.0)]);
        assert_eq!(r[0].re, -1e-20);
    }

    #[test]
    fn recovers_tiny_components() {
        // lower-bidiagonal chain whose solution spans 30 orders of magnitude
        let n = 8;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, Complex64::new(1.0, 0.3)));
            if i > 0 {
                t.push((i, i - 1, Complex64::new(-1e-4, 0.0)));
            }
        }
        t.push((0, n - 1, Complex64::new(1e-3, 0.0)));
        let a = CsrMatrix::from_triplets(n, n, t);
        let dense = a.to_dense();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect();
        let lu = dense.clone().lu();
        let solve = |r: &[Complex64]| -> Vec<Complex64> {
            lu.solve(&nalgebra::DVector::from_column_slice(r)).unwrap().iter().copied().collect()
        };
        let mut x = solve(&b);
        refine(&a, &b, &mut x, solve);
        // forward substitution is exact here up to rounding per component
        let z = Complex64::new(1.0, 0.3);
        let mut expect = vec![Complex64::new(0.0, 0.0); n];
        let mut cur = Complex64::new(1.0, 0.0) / z;
        for e in expect.iter_mut() {
            *e = cur;
            cur = cur * Complex64::new(1e-4, 0.0) / z;
        }
        let corr = 1.0 + 1e-3 * expect[n - 1] / z;
        for (xi, ei) in x.iter().zip(&expect) {
            let ei = ei / corr;
            assert!((xi - ei).norm() <= 1e-14 * ei.norm(), "{xi} vs {ei}");
        }
    }
}
