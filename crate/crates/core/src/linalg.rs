//! Exact linear algebra over `ℚ`: echelon forms, ranks, kernels, determinants.
//!
//! Matrices are row-major `Vec<Vec<Rational>>`. Sizes here stay in the low
//! hundreds, so plain Gaussian elimination with rational entries is enough.

use num_traits::{One, Zero};

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form, processing columns left to right.
///
/// Returns the nonzero rows and their pivot columns. The pivot set is the
/// lexicographically first maximal set of independent columns, so the rank of
/// the first `k` columns equals the number of pivots below `k`.
pub fn rref(rows: &[Vec<Rational>], ncols: usize) -> (Matrix, Vec<usize>) {
    let mut a: Matrix = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for x in a[r].iter_mut().skip(c) {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : A x = 0}`.
pub fn kernel(rows: &[Vec<Rational>], ncols: usize) -> Matrix {
    let (r, pivots) = rref(rows, ncols);
    let mut is_pivot = vec![None; ncols];
    for (i, &p) in pivots.iter().enumerate() {
        is_pivot[p] = Some(i);
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut v = vec![Rational::zero(); ncols];
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r[i][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn determinant(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    let mut a: Matrix = rows.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let pivot_row = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &pivot_row[c];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x -= &f * p;
            }
        }
    }
    det
}

/// Basis of the row space (echelon rows).
pub fn row_space(rows: &[Vec<Rational>], ncols: usize) -> Matrix {
    rref(rows, ncols).0
}

/// Whether `v` lies in the row span of `rows`.
pub fn in_span(rows: &[Vec<Rational>], v: &[Rational], ncols: usize) -> bool {
    let r = rank(rows, ncols);
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank(&ext, ncols) == r
}

/// Basis of the intersection of two row spaces.
pub fn intersect(u: &[Vec<Rational>], w: &[Vec<Rational>], ncols: usize) -> Matrix {
    let u = row_space(u, ncols);
    let w = row_space(w, ncols);
    if u.is_empty() || w.is_empty() {
        return Vec::new();
    }
    // x·U = y·W  ⇔  [Uᵀ | -Wᵀ] (x, y)ᵀ = 0
    let ku = u.len();
    let kw = w.len();
    let system: Matrix = (0..ncols)
        .map(|c| {
            u.iter()
                .map(|row| row[c].clone())
                .chain(w.iter().map(|row| -row[c].clone()))
                .collect()
        })
        .collect();
    let coeffs = kernel(&system, ku + kw);
    let vecs: Matrix = coeffs
        .iter()
        .map(|x| {
            let mut v = vec![Rational::zero(); ncols];
            for (xi, row) in x.iter().take(ku).zip(&u) {
                if xi.is_zero() {
                    continue;
                }
                for (vc, rc) in v.iter_mut().zip(row) {
                    *vc += xi * rc;
                }
            }
            v
        })
        .collect();
    row_space(&vecs, ncols)
}
