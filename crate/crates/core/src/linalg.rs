//! Integer and rational matrix plumbing: Smith and Hermite normal forms
//! with unimodular transforms, integer kernels, and exact symmetric
//! decompositions. All small and dense; exactness over asymptotics.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::{Int, Rational};
use crate::{Error, Result};

/// Row-major integer matrix.
pub type IMat = Vec<Vec<Int>>;
/// Row-major rational matrix.
pub type QMat = Vec<Vec<Rational>>;

pub fn imat_identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect()
}

pub fn imat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let k = b.len();
    let m = if k > 0 { b[0].len() } else { 0 };
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub fn imat_to_q(a: &IMat) -> QMat {
    a.iter()
        .map(|r| r.iter().map(|c| Rational::from(c.clone())).collect())
        .collect()
}

pub fn qmat_identity(n: usize) -> QMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn qmat_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let k = b.len();
    let m = if k > 0 { b[0].len() } else { 0 };
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub fn qmat_vec(a: &QMat, x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(c, v)| c * v).sum())
        .collect()
}

pub fn qmat_transpose(a: &QMat) -> QMat {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Exact inverse by Gauss-Jordan elimination; `None` when singular.
pub fn qmat_inv(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let mut work: Vec<Vec<Rational>> = a
        .iter()
        .zip(qmat_identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !work[r][col].is_zero())?;
        work.swap(col, pivot);
        let p = work[col][col].clone();
        for c in work[col].iter_mut() {
            *c /= &p;
        }
        for r in 0..n {
            if r != col && !work[r][col].is_zero() {
                let f = work[r][col].clone();
                for c in 0..2 * n {
                    let t = &f * &work[col][c];
                    work[r][c] -= t;
                }
            }
        }
    }
    Some(work.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn qmat_det(a: &QMat) -> Rational {
    let n = a.len();
    let mut work = a.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !work[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            work.swap(col, pivot);
            det = -det;
        }
        let p = work[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if !work[r][col].is_zero() {
                let f = &work[r][col] / &p;
                for c in col..n {
                    let t = &f * &work[col][c];
                    work[r][c] -= t;
                }
            }
        }
    }
    det
}

/// True iff each matrix's columns are integer combinations of the other's
/// (exact equality of the spanned `Z`-modules). Both must be square and
/// invertible.
pub fn same_column_span(a: &QMat, b: &QMat) -> bool {
    let (Some(ai), Some(bi)) = (qmat_inv(a), qmat_inv(b)) else {
        return false;
    };
    let x = qmat_mul(&ai, b);
    let y = qmat_mul(&bi, a);
    x.iter().flatten().all(|c| c.is_integer()) && y.iter().flatten().all(|c| c.is_integer())
}

/// Smith normal form `u * a * v = diag`, with `u`, `v` unimodular and the
/// diagonal entries nonnegative satisfying `d_1 | d_2 | ...`.
#[derive(Debug, Clone)]
pub struct Snf {
    pub u: IMat,
    pub v: IMat,
    pub diag: Vec<Int>,
    pub rows: usize,
    pub cols: usize,
}

pub fn smith_normal_form(a: &IMat) -> Snf {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut m = a.to_vec();
    let mut u = imat_identity(rows);
    let mut v = imat_identity(cols);

    let mut t = 0;
    while t < rows.min(cols) {
        // Find a pivot of minimal absolute value in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero()
                    && pivot
                        .map(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        u.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }

        let mut clean = true;
        for i in t + 1..rows {
            if !m[i][t].is_zero() {
                let q = m[i][t].div_floor(&m[t][t]);
                for j in 0..cols {
                    let s = &q * &m[t][j];
                    m[i][j] -= s;
                }
                for j in 0..rows {
                    let s = &q * &u[t][j];
                    u[i][j] -= s;
                }
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
        }
        for j in t + 1..cols {
            if !m[t][j].is_zero() {
                let q = m[t][j].div_floor(&m[t][t]);
                for i in 0..rows {
                    let s = &q * &m[i][t];
                    m[i][j] -= s;
                }
                for i in 0..cols {
                    let s = &q * &v[i][t];
                    v[i][j] -= s;
                }
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        // Enforce divisibility of the remaining block by the pivot.
        let mut divides = true;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&m[i][j] % &m[t][t]).is_zero() {
                    // add row i to row t and restart elimination at t
                    for jj in 0..cols {
                        let s = m[i][jj].clone();
                        m[t][jj] += s;
                    }
                    for jj in 0..rows {
                        let s = u[i][jj].clone();
                        u[t][jj] += s;
                    }
                    divides = false;
                    break 'outer;
                }
            }
        }
        if !divides {
            continue;
        }
        if m[t][t].is_negative() {
            for j in 0..cols {
                m[t][j] = -m[t][j].clone();
            }
            for j in 0..rows {
                u[t][j] = -u[t][j].clone();
            }
        }
        t += 1;
    }

    let diag = (0..rows.min(cols)).map(|i| m[i][i].clone()).collect();
    Snf { u, v, diag, rows, cols }
}

/// Basis (as columns) of the integer kernel of `a`.
pub fn integer_kernel(a: &IMat) -> IMat {
    let snf = smith_normal_form(a);
    let rank = snf.diag.iter().filter(|d| !d.is_zero()).count();
    let cols = snf.cols;
    // kernel = span of the last cols-rank columns of v
    (0..cols)
        .map(|i| (rank..cols).map(|j| snf.v[i][j].clone()).collect())
        .collect()
}

/// Column-style Hermite basis of the `Z`-module spanned by the columns of
/// `a` (must have full row rank). Returns a square matrix whose columns are
/// a basis.
pub fn column_lattice_basis(a: &IMat) -> Result<IMat> {
    let rows = a.len();
    let snf = smith_normal_form(a);
    if snf.diag.iter().filter(|d| !d.is_zero()).count() < rows {
        return Err(Error::DegenerateGram);
    }
    // u * a * v = d  =>  columns of a span u^{-1} * d * Z^cols;
    // a basis is u^{-1} * diag(d_1..d_rows) restricted to the first rows cols.
    let u_inv = qmat_inv(&imat_to_q(&snf.u)).expect("unimodular");
    let mut basis = vec![vec![Int::zero(); rows]; rows];
    for (i, row) in basis.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let q = &u_inv[i][j] * Rational::from(snf.diag[j].clone());
            debug_assert!(q.is_integer());
            *cell = q.to_integer();
        }
    }
    Ok(basis)
}

/// Kernel of the map `Z^n -> Z^k / (moduli)` given by the integer matrix
/// `p` (k x n): the lattice `{ x : p x = 0 mod moduli }`, returned as an
/// n x n basis (columns).
pub fn preimage_lattice(p: &IMat, moduli: &[Int]) -> IMat {
    let k = p.len();
    let n = if k > 0 { p[0].len() } else { 0 };
    // Stack [p | diag(moduli)] and take the first-block part of its kernel.
    let mut stacked = vec![vec![Int::zero(); n + k]; k];
    for i in 0..k {
        for j in 0..n {
            stacked[i][j] = p[i][j].clone();
        }
        stacked[i][n + i] = moduli[i].clone();
    }
    let ker = integer_kernel(&stacked);
    let gen_count = if ker.is_empty() { 0 } else { ker[0].len() };
    let mut gens = vec![vec![Int::zero(); gen_count]; n];
    for i in 0..n {
        for j in 0..gen_count {
            gens[i][j] = ker[i][j].clone();
        }
    }
    column_lattice_basis(&gens).expect("kernel lattice has full rank")
}

/// Exact symmetric decomposition `b = l * diag(pivots) * l^T` with `l` unit
/// lower triangular, produced without row permutations.
///
/// Fails with `NotSemidefinite` when a zero pivot has a nonzero residual
/// row, or with a negative pivot in `definite` mode via
/// `NotPositiveDefinite`.
pub fn symmetric_ldl(b: &QMat, require_definite: bool) -> Result<(Vec<Rational>, QMat)> {
    let n = b.len();
    for (i, row) in b.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotHermitian);
        }
        for (j, c) in row.iter().enumerate() {
            if *c != b[j][i] {
                return Err(Error::NotHermitian);
            }
        }
    }
    let mut a = b.to_vec();
    let mut l = qmat_identity(n);
    let mut pivots = Vec::with_capacity(n);
    for i in 0..n {
        let d = a[i][i].clone();
        if d.is_zero() {
            if require_definite {
                return Err(Error::NotPositiveDefinite);
            }
            // PSD requires the whole residual row to vanish
            if (i..n).any(|j| !a[i][j].is_zero()) {
                return Err(Error::NotSemidefinite);
            }
            pivots.push(Rational::zero());
            continue;
        }
        if d.is_negative() {
            return Err(if require_definite {
                Error::NotPositiveDefinite
            } else {
                Error::NotSemidefinite
            });
        }
        pivots.push(d.clone());
        for j in i + 1..n {
            let f = &a[i][j] / &d;
            l[j][i] = f.clone();
            for k in j..n {
                let t = &f * &a[i][k];
                a[j][k] -= &t;
                if j != k {
                    a[k][j] = a[j][k].clone();
                }
            }
        }
    }
    Ok((pivots, l))
}
