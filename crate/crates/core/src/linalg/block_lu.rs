//! Block-tridiagonal direct solver built on a breadth-first level structure.
//!
//! Unknowns are grouped into the level sets of a breadth-first search over
//! the symmetrized sparsity pattern, which makes the matrix block
//! tridiagonal. Rows listed as `keep_together` (dense constraint rows such as
//! a trace functional) are excluded from the search, and every level their
//! support touches is merged into a single pivot block. Elimination then runs
//! from both ends of the chain toward that block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::dense_lu::DenseLu;
use crate::sparse::CsrMatrix;

type Coupling = Vec<(usize, usize, Complex64)>;

pub struct BlockLu {
    n: usize,
    blocks: Vec<Vec<usize>>,
    pivot: usize,
    factors: Vec<DenseLu>,
    /// `upper[k]` holds `A[k, k+1]` with block-local indices.
    upper: Vec<Coupling>,
    /// `lower[k]` holds `A[k+1, k]` with block-local indices.
    lower: Vec<Coupling>,
}

impl BlockLu {
    /// Returns `None` if the matrix is numerically singular or a block
    /// Schur complement breaks down.
    pub fn factor(a: &CsrMatrix, keep_together: &[usize]) -> Option<Self> {
        assert!(a.is_square());
        let n = a.nrows();
        if n == 0 {
            return None;
        }
        let (blocks, pivot) = level_blocks(a, keep_together);
        let nb = blocks.len();

        let mut where_ = vec![(0usize, 0usize); n];
        for (k, b) in blocks.iter().enumerate() {
            for (l, &g) in b.iter().enumerate() {
                where_[g] = (k, l);
            }
        }

        let mut diag: Vec<DMatrix<Complex64>> = blocks
            .iter()
            .map(|b| DMatrix::zeros(b.len(), b.len()))
            .collect();
        let mut upper: Vec<Coupling> = vec![Vec::new(); nb.saturating_sub(1)];
        let mut lower: Vec<Coupling> = vec![Vec::new(); nb.saturating_sub(1)];
        let mut scale = 0.0_f64;
        for (r, c, v) in a.triplets() {
            scale = scale.max(v.norm());
            let (br, lr) = where_[r];
            let (bc, lc) = where_[c];
            if br == bc {
                diag[br][(lr, lc)] = v;
            } else if bc == br + 1 {
                upper[br].push((lr, lc, v));
            } else if br == bc + 1 {
                lower[bc].push((lr, lc, v));
            } else {
                return None;
            }
        }

        let mut factors: Vec<Option<DenseLu>> = (0..nb).map(|_| None).collect();
        let mut diag: Vec<Option<DMatrix<Complex64>>> = diag.drain(..).map(Some).collect();

        for k in (pivot + 1..nb).rev() {
            let mut s = diag[k].take().unwrap();
            if k + 1 < nb {
                let from = factors[k + 1].as_ref().unwrap();
                let x = solve_coupling(from, &lower[k], blocks[k + 1].len(), blocks[k].len());
                subtract_product(&mut s, &upper[k], &x);
            }
            factors[k] = Some(DenseLu::factor(s, scale)?);
        }
        for k in 0..=pivot {
            let mut s = diag[k].take().unwrap();
            if k > 0 {
                let from = factors[k - 1].as_ref().unwrap();
                let x = solve_coupling(from, &upper[k - 1], blocks[k - 1].len(), blocks[k].len());
                subtract_product(&mut s, &lower[k - 1], &x);
            }
            if k == pivot && k + 1 < nb {
                let from = factors[k + 1].as_ref().unwrap();
                let x = solve_coupling(from, &lower[k], blocks[k + 1].len(), blocks[k].len());
                subtract_product(&mut s, &upper[k], &x);
            }
            factors[k] = Some(DenseLu::factor(s, scale)?);
        }

        Some(Self {
            n,
            blocks,
            pivot,
            factors: factors.into_iter().map(Option::unwrap).collect(),
            upper,
            lower,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let nb = self.blocks.len();
        let t = self.pivot;
        let mut y: Vec<DVector<Complex64>> = self
            .blocks
            .iter()
            .map(|blk| DVector::from_iterator(blk.len(), blk.iter().map(|&g| b[g])))
            .collect();
        let mut z: Vec<DVector<Complex64>> = vec![DVector::zeros(0); nb];

        for k in (t + 1..nb).rev() {
            if k + 1 < nb {
                apply_sub(&mut y[k], &self.upper[k], &z[k + 1]);
            }
            z[k] = y[k].clone();
            self.factors[k].solve_vec(&mut z[k]);
        }
        for k in 0..t {
            if k > 0 {
                apply_sub(&mut y[k], &self.lower[k - 1], &z[k - 1]);
            }
            z[k] = y[k].clone();
            self.factors[k].solve_vec(&mut z[k]);
        }

        let mut x: Vec<DVector<Complex64>> = vec![DVector::zeros(0); nb];
        let mut yt = y[t].clone();
        if t > 0 {
            apply_sub(&mut yt, &self.lower[t - 1], &z[t - 1]);
        }
        if t + 1 < nb {
            apply_sub(&mut yt, &self.upper[t], &z[t + 1]);
        }
        self.factors[t].solve_vec(&mut yt);
        x[t] = yt;

        for k in (0..t).rev() {
            let mut v = y[k].clone();
            apply_sub(&mut v, &self.upper[k], &x[k + 1]);
            self.factors[k].solve_vec(&mut v);
            x[k] = v;
        }
        for k in t + 1..nb {
            let mut v = y[k].clone();
            apply_sub(&mut v, &self.lower[k - 1], &x[k - 1]);
            self.factors[k].solve_vec(&mut v);
            x[k] = v;
        }

        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (blk, xs) in self.blocks.iter().zip(&x) {
            for (&g, &v) in blk.iter().zip(xs.iter()) {
                out[g] = v;
            }
        }
        out
    }

    /// Solve with iterative refinement against `a`.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = self.solve(b);
        super::refine(a, b, &mut x, |r| self.solve(r));
        x
    }
}

/// `S⁻¹ C` where `C` is the sparse coupling (`rows × cols`) made dense.
fn solve_coupling(lu: &DenseLu, coupling: &Coupling, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut x = DMatrix::zeros(rows, cols);
    for &(r, c, v) in coupling {
        x[(r, c)] = v;
    }
    lu.solve_in_place(&mut x);
    x
}

/// `s -= C x` with `C` sparse.
fn subtract_product(s: &mut DMatrix<Complex64>, coupling: &Coupling, x: &DMatrix<Complex64>) {
    for j in 0..s.ncols() {
        let xc = x.column(j);
        let mut sc = s.column_mut(j);
        for &(r, c, v) in coupling {
            sc[r] -= v * xc[c];
        }
    }
}

fn apply_sub(y: &mut DVector<Complex64>, coupling: &Coupling, x: &DVector<Complex64>) {
    for &(r, c, v) in coupling {
        y[r] -= v * x[c];
    }
}

/// Level sets in breadth-first order, with the pivot block index.
fn level_blocks(a: &CsrMatrix, keep_together: &[usize]) -> (Vec<Vec<usize>>, usize) {
    let n = a.nrows();
    let mut skip = vec![false; n];
    for &r in keep_together {
        skip[r] = true;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        if skip[r] {
            continue;
        }
        for &c in a.row(r).0 {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut done = vec![false; n];
    let mut stamp = vec![0u32; n];
    let mut epoch = 0u32;
    for start in 0..n {
        if done[start] {
            continue;
        }
        let mut best = bfs(&adj, start, &mut stamp, &mut epoch);
        loop {
            let last = best.last().unwrap();
            let cand = *last
                .iter()
                .min_by_key(|&&v| (adj[v].len(), v))
                .unwrap();
            let trial = bfs(&adj, cand, &mut stamp, &mut epoch);
            if trial.len() > best.len() {
                best = trial;
            } else {
                break;
            }
        }
        for lvl in &best {
            for &v in lvl {
                done[v] = true;
            }
        }
        levels.extend(best);
    }

    if keep_together.is_empty() {
        let p = levels.len() - 1;
        return (levels, p);
    }
    let mut level_of = vec![0usize; n];
    for (k, lvl) in levels.iter().enumerate() {
        for &v in lvl {
            level_of[v] = k;
        }
    }
    let mut lo = usize::MAX;
    let mut hi = 0;
    for &r in keep_together {
        for &c in a.row(r).0.iter().chain(std::iter::once(&r)) {
            lo = lo.min(level_of[c]);
            hi = hi.max(level_of[c]);
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(levels.len() - (hi - lo));
    let mut merged = Vec::new();
    for (k, lvl) in levels.into_iter().enumerate() {
        if k < lo || k > hi {
            blocks.push(lvl);
        } else {
            merged.extend(lvl);
            if k == hi {
                blocks.push(std::mem::take(&mut merged));
            }
        }
    }
    (blocks, lo)
}

fn bfs(adj: &[Vec<usize>], root: usize, stamp: &mut [u32], epoch: &mut u32) -> Vec<Vec<usize>> {
    *epoch += 1;
    let e = *epoch;
    stamp[root] = e;
    let mut levels = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if stamp[w] != e {
                    stamp[w] = e;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}
