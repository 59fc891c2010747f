//! Even lattices over `Z` and Hermitian lattices over an imaginary
//! quadratic order: Gram data, duals, discriminant groups, and the
//! trace-form dictionary between the two categories.
//!
//! A Hermitian lattice of rank `r` over the order of discriminant `-d`
//! becomes an orthogonal `Z`-lattice of rank `2r` on the basis
//! `e_1..e_r, w e_1..w e_r` with `w = (d + sqrt(-d))/2`; both sides share
//! one dual and one discriminant group, and the crate checks that equality
//! rather than assuming it.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::{frac_mod1, rat, Int, KElement, Order, Rational};
use crate::fqm::{Elt, Fqm, Subgroup};
use crate::linalg::{
    column_lattice_basis, imat_to_q, qmat_det, qmat_inv, qmat_mul, qmat_vec, same_column_span,
    smith_normal_form, symmetric_ldl, IMat, QMat,
};
use crate::{Error, Result};

/// Integral lattice given by a symmetric Gram matrix of pairings.
#[derive(Debug, Clone, PartialEq)]
pub struct ZLattice {
    rank: usize,
    gram: QMat,
    positive_definite: bool,
}

impl ZLattice {
    pub fn new(gram: QMat) -> Result<ZLattice> {
        let rank = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != rank {
                return Err(Error::NotHermitian);
            }
            for (j, c) in row.iter().enumerate() {
                if *c != gram[j][i] {
                    return Err(Error::NotHermitian);
                }
            }
        }
        let positive_definite = symmetric_ldl(&gram, true).is_ok();
        Ok(ZLattice { rank, gram, positive_definite })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<ZLattice> {
        ZLattice::new(
            rows.iter()
                .map(|r| r.iter().map(|&c| rat(c, 1)).collect())
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &QMat {
        &self.gram
    }

    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    /// Even: integral pairings with even diagonal.
    pub fn is_even(&self) -> bool {
        self.gram.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, c)| c.is_integer() && (i != j || (c / rat(2, 1)).is_integer()))
        })
    }

    pub fn det(&self) -> Rational {
        qmat_det(&self.gram)
    }

    /// `(a, b)` for coordinate vectors in the lattice basis.
    pub fn bilinear(&self, a: &[Rational], b: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    acc += ai * bj * &self.gram[i][j];
                }
            }
        }
        acc
    }

    /// Quadratic value `a^2 / 2`.
    pub fn norm_half(&self, a: &[Rational]) -> Rational {
        self.bilinear(a, a) / rat(2, 1)
    }

    /// Signature: inertia counts `(positive, negative)` of the form.
    pub fn signature(&self) -> Result<(usize, usize)> {
        fn pivots_of(g: &QMat) -> Option<Vec<Rational>> {
            let n = g.len();
            let mut a = g.clone();
            let mut pivots = Vec::new();
            for i in 0..n {
                let pr = match (i..n).find(|&r| !a[r][r].is_zero()) {
                    Some(p) => p,
                    None => {
                        // all remaining diagonals zero: create one from a
                        // nonzero off-diagonal entry (symmetric row+col add)
                        let (r, c) = (i..n)
                            .flat_map(|r| (r + 1..n).map(move |c| (r, c)))
                            .find(|&(r, c)| !a[r][c].is_zero())?;
                        for k in 0..n {
                            let t = a[c][k].clone();
                            a[r][k] += t;
                        }
                        for k in 0..n {
                            let t = a[k][c].clone();
                            a[k][r] += t;
                        }
                        r
                    }
                };
                a.swap(i, pr);
                for row in a.iter_mut() {
                    row.swap(i, pr);
                }
                let d = a[i][i].clone();
                if d.is_zero() {
                    return None;
                }
                pivots.push(d.clone());
                for r in i + 1..n {
                    let f = &a[r][i] / &d;
                    for c in i..n {
                        let t = &f * &a[i][c];
                        a[r][c] -= t;
                    }
                }
                // restore symmetry of the trailing block
                for r in i + 1..n {
                    for c in i + 1..r {
                        a[r][c] = a[c][r].clone();
                    }
                }
            }
            Some(pivots)
        }
        let pivots = pivots_of(&self.gram).ok_or(Error::DegenerateGram)?;
        let pos = pivots.iter().filter(|p| p.is_positive()).count();
        let neg = pivots.iter().filter(|p| p.is_negative()).count();
        Ok((pos, neg))
    }
}

/// Discriminant group `L^*/L` of an even nondegenerate lattice, with the
/// exact projection and section between dual vectors and classes.
#[derive(Debug, Clone)]
pub struct DiscriminantGroup {
    pub fqm: Fqm,
    /// dual-vector coordinates (in the lattice basis) per generator
    pub gen_vectors: Vec<Vec<Rational>>,
    gram_int: IMat,
    u: IMat,
    orders: Vec<u64>,
    kept: Vec<usize>,
}

impl DiscriminantGroup {
    /// Class of a dual vector given by rational coordinates in the lattice
    /// basis; errors when the vector does not pair integrally with the
    /// lattice.
    pub fn project(&self, c: &[Rational]) -> Result<Elt> {
        let n = self.gram_int.len();
        assert_eq!(c.len(), n);
        let mut m = Vec::with_capacity(n);
        for row in &self.gram_int {
            let v: Rational = row
                .iter()
                .zip(c)
                .map(|(g, x)| Rational::from(g.clone()) * x)
                .sum();
            if !v.is_integer() {
                return Err(Error::NotIntegral);
            }
            m.push(v.to_integer());
        }
        let residues: Vec<u64> = self
            .kept
            .iter()
            .zip(&self.orders)
            .map(|(&row, &ord)| {
                let mut acc = Int::zero();
                for (j, mj) in m.iter().enumerate() {
                    acc += &self.u[row][j] * mj;
                }
                u64::try_from(acc.mod_floor(&Int::from(ord))).expect("residue fits")
            })
            .collect();
        Ok(Elt::new(residues))
    }

    /// A dual vector representing the class.
    pub fn lift(&self, e: &Elt) -> Vec<Rational> {
        let n = self.gram_int.len();
        let mut acc = vec![Rational::zero(); n];
        for (i, &r) in e.residues.iter().enumerate() {
            for (slot, a) in acc.iter_mut().enumerate() {
                *a += &self.gen_vectors[i][slot] * rat(r as i64, 1);
            }
        }
        acc
    }
}

/// `L^*/L` with its `Q/Z`-valued quadratic form, via the Smith normal form
/// of the Gram matrix.
pub fn discriminant_group(l: &ZLattice) -> Result<DiscriminantGroup> {
    if !l.is_even() {
        return Err(Error::NotEven);
    }
    if l.det().is_zero() {
        return Err(Error::DegenerateGram);
    }
    let n = l.rank();
    let gram_int: IMat = l
        .gram()
        .iter()
        .map(|row| row.iter().map(|c| c.to_integer()).collect())
        .collect();
    let snf = smith_normal_form(&gram_int);
    let kept: Vec<usize> = (0..n).filter(|&i| snf.diag[i] > Int::one()).collect();
    let orders: Vec<u64> = kept
        .iter()
        .map(|&i| u64::try_from(snf.diag[i].clone()).expect("order fits"))
        .collect();
    // generator i: dual vector (1/d_i) * (column i of V)
    let gen_vectors: Vec<Vec<Rational>> = kept
        .iter()
        .map(|&i| {
            (0..n)
                .map(|r| Rational::new(snf.v[r][i].clone(), snf.diag[i].clone()))
                .collect()
        })
        .collect();
    let qvals: Vec<Rational> = gen_vectors.iter().map(|v| frac_mod1(&l.norm_half(v))).collect();
    let gram: QMat = gen_vectors
        .iter()
        .map(|a| {
            gen_vectors
                .iter()
                .map(|b| frac_mod1(&l.bilinear(a, b)))
                .collect()
        })
        .collect();
    let fqm = Fqm::new(orders.clone(), qvals, gram)?;
    Ok(DiscriminantGroup { fqm, gen_vectors, gram_int, u: snf.u, orders, kept })
}

/// Hermitian lattice over the order of discriminant `-d`, given by the
/// Gram data `hgram[i][j] = <e_j, e_i>` with entries in the inverse
/// different.
#[derive(Debug, Clone)]
pub struct OLattice {
    order: Order,
    rank: usize,
    hgram: Vec<Vec<KElement>>,
}

impl OLattice {
    pub fn new(order: Order, hgram: Vec<Vec<KElement>>) -> Result<OLattice> {
        let rank = hgram.len();
        for row in &hgram {
            if row.len() != rank {
                return Err(Error::NotHermitian);
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                if hgram[i][j].d() != order.d() {
                    return Err(Error::MixedContext);
                }
                if hgram[i][j] != hgram[j][i].conj() {
                    return Err(Error::NotHermitian);
                }
                if !hgram[i][j].in_inv_different() {
                    return Err(Error::NotIntegral);
                }
            }
            if !hgram[i][i].is_rational() {
                return Err(Error::NotHermitian);
            }
        }
        Ok(OLattice { order, rank, hgram })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn hgram(&self) -> &Vec<Vec<KElement>> {
        &self.hgram
    }

    /// Even: `|lambda|^2` integral on the lattice, i.e. integral diagonal.
    pub fn is_even(&self) -> bool {
        (0..self.rank).all(|i| self.hgram[i][i].x.is_integer())
    }

    /// `<a, b>` for coordinate vectors over `K` in the lattice basis
    /// (linear in `a`, conjugate-linear in `b`).
    pub fn pairing(&self, a: &[KElement], b: &[KElement]) -> KElement {
        let mut acc = self.order.zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    // <e_i, e_j> = hgram[j][i]
                    acc = acc.add(&ai.mul(&bj.conj()).mul(&self.hgram[j][i]));
                }
            }
        }
        acc
    }

    /// `|a|^2` as a rational.
    pub fn norm(&self, a: &[KElement]) -> Rational {
        let p = self.pairing(a, a);
        debug_assert!(p.is_rational());
        p.x
    }
}

/// The orthogonal `Z`-lattice of doubled rank underlying a Hermitian
/// lattice, on the basis `e_1..e_r, w e_1..w e_r`.
pub fn trace_form(m: &OLattice) -> ZLattice {
    let r = m.rank();
    let order = m.order();
    let omega = order.omega();
    let one = order.one();
    let scal = |a: usize| if a < r { one.clone() } else { omega.clone() };
    let gram: QMat = (0..2 * r)
        .map(|a| {
            (0..2 * r)
                .map(|b| {
                    let i = a % r;
                    let j = b % r;
                    // <alpha e_i, beta e_j> = alpha conj(beta) <e_i, e_j>
                    scal(a).mul(&scal(b).conj()).mul(&m.hgram()[j][i]).trace()
                })
                .collect()
        })
        .collect();
    ZLattice::new(gram).expect("trace form is symmetric")
}

/// Hermitian signature `(b_+, b_-)` of the lattice.
pub fn hermitian_signature(m: &OLattice) -> Result<(usize, usize)> {
    if m.rank() == 0 {
        return Ok((0, 0));
    }
    let (p, n) = trace_form(m).signature()?;
    debug_assert!(p % 2 == 0 && n % 2 == 0);
    Ok((p / 2, n / 2))
}

/// Transition matrix to the dual basis: column `k` holds the coordinates
/// of the dual vector `delta_k` (defined by `<delta_k, e_i> =
/// delta_{ik}/sqrt(-d)`) in the lattice basis.
#[derive(Debug, Clone)]
pub struct DualData {
    pub dual_basis: Vec<Vec<KElement>>,
}

/// Gaussian elimination over `K`.
fn kmat_inv(order: &Order, a: &[Vec<KElement>]) -> Option<Vec<Vec<KElement>>> {
    let n = a.len();
    let mut work: Vec<Vec<KElement>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            for j in 0..n {
                row.push(if i == j { order.one() } else { order.zero() });
            }
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !work[r][col].is_zero())?;
        work.swap(col, pivot);
        let p = work[col][col].clone();
        for c in work[col].iter_mut() {
            *c = c.div(&p);
        }
        for r in 0..n {
            if r != col && !work[r][col].is_zero() {
                let f = work[r][col].clone();
                for c in 0..2 * n {
                    let t = f.mul(&work[col][c]);
                    work[r][c] = work[r][c].sub(&t);
                }
            }
        }
    }
    Some(work.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Expands a `K`-coordinate vector (lattice basis) into rational
/// coordinates on the `Z`-basis `e_1..e_r, w e_1..w e_r`.
pub fn k_coords_to_z(order: &Order, v: &[KElement]) -> Vec<Rational> {
    // x + y sqrt(-d) = (x - y d) * 1 + 2 y * w
    let d = rat(order.d() as i64, 1);
    let r = v.len();
    let mut out = vec![Rational::zero(); 2 * r];
    for (i, c) in v.iter().enumerate() {
        out[i] = &c.x - &c.y * &d;
        out[r + i] = &c.y + &c.y;
    }
    out
}

/// Reads a `Z`-basis coordinate vector back as `K`-coordinates.
pub fn z_coords_to_k(order: &Order, v: &[Rational]) -> Vec<KElement> {
    let r = v.len() / 2;
    let omega = order.omega();
    (0..r)
        .map(|i| {
            order
                .from_rational(v[i].clone())
                .add(&omega.scale(&v[r + i]))
        })
        .collect()
}

/// Dual basis with respect to the Hermitian pairing into the inverse
/// different. The result is checked (not assumed) to span the same
/// `Z`-module as the dual of the trace form.
pub fn dual_olattice(m: &OLattice) -> Result<DualData> {
    let order = m.order();
    let r = m.rank();
    let s: Vec<Vec<KElement>> = m.hgram().clone();
    let s_inv = kmat_inv(&order, &s).ok_or(Error::DegenerateGram)?;
    let inv_sqrt = order.sqrt_neg_d().inv();
    // C = S^{-1} / sqrt(-d): columns are the dual basis vectors
    let dual_basis: Vec<Vec<KElement>> = (0..r)
        .map(|i| (0..r).map(|j| s_inv[i][j].mul(&inv_sqrt)).collect())
        .collect();
    // defining property
    for k in 0..r {
        let col: Vec<KElement> = (0..r).map(|i| dual_basis[i][k].clone()).collect();
        for i in 0..r {
            let mut e = vec![order.zero(); r];
            e[i] = order.one();
            let expect = if i == k { inv_sqrt.clone() } else { order.zero() };
            assert_eq!(m.pairing(&col, &e), expect, "dual basis property");
        }
    }
    // the Hermitian dual and the Z-dual of the trace form agree as sets
    let trace = trace_form(m);
    if r > 0 {
        let gz_inv = qmat_inv(trace.gram()).ok_or(Error::DegenerateGram)?;
        let omega = order.omega();
        let mut herm_cols: Vec<Vec<Rational>> = Vec::with_capacity(2 * r);
        for k in 0..r {
            let col: Vec<KElement> = (0..r).map(|i| dual_basis[i][k].clone()).collect();
            herm_cols.push(k_coords_to_z(&order, &col));
            let wcol: Vec<KElement> = col.iter().map(|c| c.mul(&omega)).collect();
            herm_cols.push(k_coords_to_z(&order, &wcol));
        }
        let herm_mat: QMat = (0..2 * r)
            .map(|row| herm_cols.iter().map(|c| c[row].clone()).collect())
            .collect();
        assert!(
            same_column_span(&herm_mat, &gz_inv),
            "Hermitian dual must equal the orthogonal dual"
        );
    }
    Ok(DualData { dual_basis })
}

/// Hermitian lattice bundled with its derived orthogonal data.
#[derive(Debug, Clone)]
pub struct HermitianContext {
    pub olat: OLattice,
    pub trace: ZLattice,
    pub disc: DiscriminantGroup,
    pub dual: DualData,
    pub signature: (usize, usize),
}

impl HermitianContext {
    pub fn new(olat: OLattice) -> Result<HermitianContext> {
        if !olat.is_even() {
            return Err(Error::NotEven);
        }
        let trace = trace_form(&olat);
        let disc = discriminant_group(&trace)?;
        let dual = dual_olattice(&olat)?;
        let signature = hermitian_signature(&olat)?;
        Ok(HermitianContext { olat, trace, disc, dual, signature })
    }

    /// Multiplication by a `K`-scalar as an integer matrix on the `Z`-basis
    /// `e_i, w e_i`; errors when the scalar does not preserve the lattice.
    pub fn scalar_matrix(&self, s: &KElement) -> Result<IMat> {
        let r = self.olat.rank();
        let d = self.olat.order().d();
        // s * e_i = (x - y d) e_i + 2y (w e_i)
        // s * (w e_i) = -y (d^2 + d)/2 e_i + (x + y d) (w e_i)
        let entries = [
            (&s.x - &s.y * rat(d as i64, 1), &s.y + &s.y),
            (
                -(&s.y * rat((d * d + d) as i64, 2)),
                &s.x + &s.y * rat(d as i64, 1),
            ),
        ];
        let mut mat = vec![vec![Int::zero(); 2 * r]; 2 * r];
        for i in 0..r {
            for (block, (a, b)) in entries.iter().enumerate() {
                if !a.is_integer() || !b.is_integer() {
                    return Err(Error::ActionUndefined);
                }
                let col = block * r + i;
                mat[i][col] = a.to_integer();
                mat[r + i][col] = b.to_integer();
            }
        }
        Ok(mat)
    }

    /// Action of a `K`-scalar on the discriminant group (generator images).
    pub fn scalar_action(&self, s: &KElement) -> Result<Vec<Elt>> {
        let mat = self.scalar_matrix(s)?;
        let matq = imat_to_q(&mat);
        self.disc
            .gen_vectors
            .iter()
            .map(|v| self.disc.project(&qmat_vec(&matq, v)))
            .collect()
    }
}

/// Result of adapting a bilinear lattice to a Hermitian structure.
#[derive(Debug, Clone)]
pub struct HermitianStructure {
    pub olat: OLattice,
    /// columns: the `O`-basis vectors inside the original `Z`-basis
    pub basis: IMat,
    pub j: IMat,
}

/// Searches for vectors `v_1..v_r` such that `v_1, .., v_r, w v_1, ..,
/// w v_r` is a `Z`-basis of `Z^n`, where `omega_mat` is the integral
/// action of `w`. Bounded-coefficient depth-first search.
pub fn find_free_basis(omega_mat: &IMat) -> Option<Vec<Vec<Int>>> {
    let n = omega_mat.len();
    if n % 2 != 0 {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let r = n / 2;
    let apply = |v: &[Int]| -> Vec<Int> {
        (0..n)
            .map(|i| (0..n).map(|j| &omega_mat[i][j] * &v[j]).sum())
            .collect()
    };

    fn primitive(cols: &[Vec<Int>], n: usize) -> bool {
        let mat: IMat = (0..n)
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        let snf = smith_normal_form(&mat);
        snf.diag.len() == cols.len() && snf.diag.iter().all(|d| d.is_one())
    }

    fn rec(
        candidates: &[Vec<Int>],
        r: usize,
        n: usize,
        apply: &dyn Fn(&[Int]) -> Vec<Int>,
        cols: &mut Vec<Vec<Int>>,
        chosen: &mut Vec<Vec<Int>>,
        start: usize,
    ) -> bool {
        if chosen.len() == r {
            return true;
        }
        for (idx, cand) in candidates.iter().enumerate().skip(start) {
            cols.push(cand.clone());
            cols.push(apply(cand));
            if primitive(cols, n) {
                chosen.push(cand.clone());
                if rec(candidates, r, n, apply, cols, chosen, idx + 1) {
                    return true;
                }
                chosen.pop();
            }
            cols.pop();
            cols.pop();
        }
        false
    }

    for bound in 1..=2i64 {
        let width = (2 * bound + 1) as u64;
        let total = width.pow(n as u32);
        let mut candidates: Vec<Vec<Int>> = Vec::new();
        for mut t in 0..total {
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push(Int::from((t % width) as i64 - bound));
                t /= width;
            }
            if let Some(first) = v.iter().find(|c| !c.is_zero()) {
                if first.is_positive() {
                    candidates.push(v);
                }
            }
        }
        let mut cols = Vec::new();
        let mut chosen = Vec::new();
        if rec(&candidates, r, n, &apply, &mut cols, &mut chosen, 0) {
            return Some(chosen);
        }
    }
    None
}

/// Reconstructs a Hermitian lattice from a bilinear one and a compatible
/// complex structure `J` with `J^2 = -d`.
pub fn hermitian_from_bilinear(l: &ZLattice, j: &IMat) -> Result<HermitianStructure> {
    let n = l.rank();
    if j.len() != n || j.iter().any(|r| r.len() != n) || n % 2 != 0 || n == 0 {
        return Err(Error::BadComplexStructure);
    }
    // J^2 = -d Id determines d
    let j2 = crate::linalg::imat_mul(j, j);
    let mut d_opt: Option<Int> = None;
    for i in 0..n {
        for k in 0..n {
            if i == k {
                let v = -j2[i][k].clone();
                match &d_opt {
                    None => d_opt = Some(v),
                    Some(d) if *d == v => {}
                    _ => return Err(Error::BadComplexStructure),
                }
            } else if !j2[i][k].is_zero() {
                return Err(Error::BadComplexStructure);
            }
        }
    }
    let d_int = d_opt.ok_or(Error::BadComplexStructure)?;
    if !d_int.is_positive() {
        return Err(Error::BadComplexStructure);
    }
    let d: u64 = u64::try_from(d_int).map_err(|_| Error::BadComplexStructure)?;
    let order = Order::new(d)?;
    // the order acts integrally: (d + J)/2 integral
    let mut omega_mat = vec![vec![Int::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            let mut v = j[i][k].clone();
            if i == k {
                v += Int::from(d);
            }
            if v.is_odd() {
                return Err(Error::BadComplexStructure);
            }
            omega_mat[i][k] = v / Int::from(2);
        }
    }
    // compatibility (J a, J b) = d (a, b) on the basis
    let g = l.gram();
    let jq = imat_to_q(j);
    let jt_g_j = qmat_mul(&qmat_mul(&crate::linalg::qmat_transpose(&jq), g), &jq);
    for i in 0..n {
        for k in 0..n {
            if jt_g_j[i][k] != &g[i][k] * rat(d as i64, 1) {
                return Err(Error::PairingNotCompatible);
            }
        }
    }
    let basis_vecs = find_free_basis(&omega_mat).ok_or(Error::NotProvablyProjective)?;
    let r = n / 2;
    let to_q = |v: &[Int]| -> Vec<Rational> {
        v.iter().map(|c| Rational::from(c.clone())).collect()
    };
    let apply_j = |v: &[Int]| -> Vec<Rational> {
        (0..n)
            .map(|i| Rational::from((0..n).map(|k| &j[i][k] * &v[k]).sum::<Int>()))
            .collect()
    };
    // hgram[i][j] = <v_j, v_i> = (v_j, v_i)/2 - sqrt(-d) (J v_j, v_i)/(2d)
    let hgram: Vec<Vec<KElement>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|jj| {
                    let x = l.bilinear(&to_q(&basis_vecs[jj]), &to_q(&basis_vecs[i])) / rat(2, 1);
                    let y = -l.bilinear(&apply_j(&basis_vecs[jj]), &to_q(&basis_vecs[i]))
                        / rat(2 * d as i64, 1);
                    order.elem(x, y)
                })
                .collect()
        })
        .collect();
    let olat = OLattice::new(order, hgram)?;
    let basis: IMat = (0..n)
        .map(|row| basis_vecs.iter().map(|v| v[row].clone()).collect())
        .collect();
    Ok(HermitianStructure { olat, basis, j: j.clone() })
}

/// Eigencomponents of a `K`-coefficient vector under the complex structure:
/// `lam = lam_C + lam_Cbar` with `J` acting as `+-sqrt(-d)` on the parts.
pub fn project_components(
    order: &Order,
    j: &IMat,
    lam: &[KElement],
) -> (Vec<KElement>, Vec<KElement>) {
    let n = lam.len();
    let d = order.d();
    let jl: Vec<KElement> = (0..n)
        .map(|i| {
            let mut acc = order.zero();
            for (k, l) in lam.iter().enumerate() {
                if !j[i][k].is_zero() {
                    acc = acc.add(&l.scale(&Rational::from(j[i][k].clone())));
                }
            }
            acc
        })
        .collect();
    let sqrt = order.sqrt_neg_d();
    let half = rat(1, 2);
    let inv2d = rat(1, 2 * d as i64);
    let plus: Vec<KElement> = (0..n)
        .map(|i| lam[i].scale(&half).sub(&sqrt.mul(&jl[i]).scale(&inv2d)))
        .collect();
    let minus: Vec<KElement> = (0..n).map(|i| lam[i].sub(&plus[i])).collect();
    (plus, minus)
}

/// Even overlattice attached to an isotropic subgroup of the discriminant
/// group: `Lambda/L = I`.
#[derive(Debug, Clone)]
pub struct Overlattice {
    pub lattice: ZLattice,
    /// columns express the overlattice basis in the original basis
    pub basis_in_l: QMat,
}

pub fn overlattice(l: &ZLattice, disc: &DiscriminantGroup, iso: &Subgroup) -> Result<Overlattice> {
    if !iso.is_isotropic(&disc.fqm) {
        return Err(Error::NotIsotropic);
    }
    let n = l.rank();
    let mut cols: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|r| if r == i { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    for e in iso.iter(&disc.fqm) {
        cols.push(disc.lift(&e));
    }
    // common denominator
    let mut den = Int::one();
    for c in cols.iter().flatten() {
        den = den.lcm(c.denom());
    }
    let scaled: IMat = (0..n)
        .map(|row| {
            cols.iter()
                .map(|c| (&c[row] * Rational::from(den.clone())).to_integer())
                .collect()
        })
        .collect();
    let hnf = column_lattice_basis(&scaled)?;
    let basis_in_l: QMat = (0..n)
        .map(|row| {
            (0..n)
                .map(|col| Rational::new(hnf[row][col].clone(), den.clone()))
                .collect()
        })
        .collect();
    let bt = crate::linalg::qmat_transpose(&basis_in_l);
    let gram = qmat_mul(&qmat_mul(&bt, l.gram()), &basis_in_l);
    let lat = ZLattice::new(gram)?;
    if !lat.is_even() {
        return Err(Error::NotEven);
    }
    Ok(Overlattice { lattice: lat, basis_in_l })
}
