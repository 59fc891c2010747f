//! Weil representations on group algebras of finite quadratic modules,
//! their extension by the roots of unity of an imaginary quadratic order,
//! word factorization in `SL_2(Z)` and `U(1,1)(Z)`, and the arrow
//! operators between group algebras as explicit matrices.
//!
//! Matrices are dense over cyclotomic fields; `sqrt(|A|)` enters through
//! the Gauss sum, never as a floating radical.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::{e_of, factorize, rat, Cyclotomic, Int, KElement};
use crate::fqm::{signature_mod_8, Elt, Fqm, Subgroup, Subquotient};
use crate::lattice::HermitianContext;
use crate::linalg::IMat;
use crate::{Error, Result};

/// Dense matrix over a cyclotomic field; columns act on basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CycMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Cyclotomic>>,
}

/// Hard cap on representation dimensions.
pub const DIMENSION_CAP: usize = 512;

impl CycMatrix {
    pub fn zero(rows: usize, cols: usize) -> CycMatrix {
        CycMatrix {
            rows,
            cols,
            entries: vec![vec![Cyclotomic::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> CycMatrix {
        let mut m = CycMatrix::zero(n, n);
        for i in 0..n {
            m.entries[i][i] = Cyclotomic::one();
        }
        m
    }

    pub fn mul(&self, other: &CycMatrix) -> CycMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CycMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Cyclotomic::zero();
                for k in 0..self.cols {
                    if !self.entries[i][k].is_zero() && !other.entries[k][j].is_zero() {
                        acc = acc.add(&self.entries[i][k].mul(&other.entries[k][j]));
                    }
                }
                out.entries[i][j] = acc;
            }
        }
        out
    }

    pub fn apply(&self, v: &[Cyclotomic]) -> Vec<Cyclotomic> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Cyclotomic::zero();
                for (k, x) in v.iter().enumerate() {
                    if !x.is_zero() && !self.entries[i][k].is_zero() {
                        acc = acc.add(&self.entries[i][k].mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, c: &Cyclotomic) -> CycMatrix {
        CycMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|e| e.mul(c)).collect())
                .collect(),
        }
    }

    pub fn conj_transpose(&self) -> CycMatrix {
        let mut out = CycMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j][i] = self.entries[i][j].conj();
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == CycMatrix::identity(self.rows)
    }

    pub fn is_unitary(&self) -> bool {
        self.rows == self.cols && self.mul(&self.conj_transpose()).is_identity()
    }

    /// Rank over the cyclotomic field is not needed; injectivity of 0/1
    /// matrices is checked over `Q` by the callers.
    pub fn is_zero_one(&self) -> bool {
        self.entries.iter().flatten().all(|e| {
            e.is_zero() || e.as_rational().map(|r| r.is_one()).unwrap_or(false)
        })
    }
}

fn check_dim(a: &Fqm) -> Result<usize> {
    let n = a.size() as usize;
    if n > DIMENSION_CAP {
        return Err(Error::BudgetExceeded(n as u64));
    }
    Ok(n)
}

/// Diagonal generator: `e_gamma -> e(q(gamma)) e_gamma`.
pub fn rho_t(a: &Fqm) -> Result<CycMatrix> {
    let n = check_dim(a)?;
    let mut m = CycMatrix::zero(n, n);
    for (i, slot) in m.entries.iter_mut().enumerate() {
        slot[i] = e_of(&a.q(&a.elt_at(i)));
    }
    Ok(m)
}

/// Inverse of the diagonal generator.
pub fn rho_t_inv(a: &Fqm) -> Result<CycMatrix> {
    let n = check_dim(a)?;
    let mut m = CycMatrix::zero(n, n);
    for (i, slot) in m.entries.iter_mut().enumerate() {
        slot[i] = e_of(&-a.q(&a.elt_at(i)));
    }
    Ok(m)
}

/// Fourier generator: `e_gamma -> e(-sig/8)/sqrt(|A|) * sum_delta
/// e(-(gamma, delta)) e_delta`, with the signature taken from the Gauss
/// sum unless overridden.
pub fn rho_s(a: &Fqm, sig_hint: Option<u8>) -> Result<CycMatrix> {
    let n = check_dim(a)?;
    let sig = match sig_hint {
        Some(s) => s % 8,
        None => signature_mod_8(a)?,
    };
    // e(-sig/8)/sqrt(|A|) = sqrt(|A|) e(-sig/8) / |A|
    let front = crate::exact::sqrt_int(a.size())
        .mul(&e_of(&rat(-(sig as i64), 8)))
        .scale(&rat(1, a.size() as i64));
    let mut m = CycMatrix::zero(n, n);
    for gamma in 0..n {
        let g = a.elt_at(gamma);
        for delta in 0..n {
            let d = a.elt_at(delta);
            m.entries[delta][gamma] = front.mul(&e_of(&-a.pairing(&g, &d)));
        }
    }
    Ok(m)
}

/// Permutation `e_gamma -> e_{-gamma}`.
pub fn rho_negation(a: &Fqm) -> Result<CycMatrix> {
    let n = check_dim(a)?;
    let mut m = CycMatrix::zero(n, n);
    for gamma in 0..n {
        let img = a.index(&a.neg(&a.elt_at(gamma)));
        m.entries[img][gamma] = Cyclotomic::one();
    }
    Ok(m)
}

/// Word letters over the generators of `U(1,1)(Z)`: `T`, `T^{-1}`, `S`,
/// and powers of the canonical generator of `mu(O)` (Hermitian contexts
/// only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    T,
    TInv,
    S,
    Xi(usize),
}

/// Word in the generators, multiplied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupWord(pub Vec<Letter>);

impl GroupWord {
    pub fn empty() -> GroupWord {
        GroupWord(Vec::new())
    }

    pub fn has_xi(&self) -> bool {
        self.0.iter().any(|l| matches!(l, Letter::Xi(_)))
    }
}

fn mat2(a: i64, b: i64, c: i64, d: i64) -> IMat {
    vec![
        vec![Int::from(a), Int::from(b)],
        vec![Int::from(c), Int::from(d)],
    ]
}

/// Integer matrix of a word without `Xi` letters.
pub fn eval_word(w: &GroupWord) -> Result<IMat> {
    let mut acc = mat2(1, 0, 0, 1);
    for l in &w.0 {
        let m = match l {
            Letter::T => mat2(1, 1, 0, 1),
            Letter::TInv => mat2(1, -1, 0, 1),
            Letter::S => mat2(0, -1, 1, 0),
            Letter::Xi(_) => return Err(Error::MissingHermitianContext),
        };
        acc = crate::linalg::imat_mul(&acc, &m);
    }
    Ok(acc)
}

/// Factors a determinant-one integer matrix into `S`, `T`, `T^{-1}`
/// letters by the Euclidean algorithm on the bottom row.
pub fn factor_sl2(a: &IMat) -> Result<GroupWord> {
    if a.len() != 2 || a[0].len() != 2 || a[1].len() != 2 {
        return Err(Error::BadDeterminant);
    }
    let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
    if !det.is_one() {
        return Err(Error::BadDeterminant);
    }
    let mut b: Vec<Vec<Int>> = a.to_vec();
    let mut word: Vec<Letter> = Vec::new(); // built back to front
    let push_t_power = |word: &mut Vec<Letter>, q: &Int| {
        // prepend T^q
        let letter = if q.is_positive() { Letter::T } else { Letter::TInv };
        let reps = q.abs();
        let mut cnt = Int::zero();
        while cnt < reps {
            word.push(letter);
            cnt += 1;
        }
    };
    let mut prefix_rev: Vec<Letter> = Vec::new();
    loop {
        let c = b[1][0].clone();
        if c.is_zero() {
            break;
        }
        let d = b[1][1].clone();
        // nearest-integer quotient
        let q0 = d.div_floor(&c);
        let q1: Int = &q0 + 1;
        let r0 = (&d - &q0 * &c).abs();
        let r1 = (&d - &q1 * &c).abs();
        let q = if r0 <= r1 { q0 } else { q1 };
        if !q.is_zero() {
            // B <- B T^{-q}, word <- T^q ++ word
            b[0][1] = &b[0][1] - &q * &b[0][0];
            b[1][1] = &b[1][1] - &q * &b[1][0];
            push_t_power(&mut prefix_rev, &q);
        }
        // B <- B S^{-1}, word <- S ++ word: columns (c1, c2) -> (-c2, c1)
        let (b00, b01) = (b[0][0].clone(), b[0][1].clone());
        b[0][0] = -b01;
        b[0][1] = b00;
        let (b10, b11) = (b[1][0].clone(), b[1][1].clone());
        b[1][0] = -b11;
        b[1][1] = b10;
        prefix_rev.push(Letter::S);
    }
    // now B is upper triangular with diagonal (a, a), a = +-1
    let diag_one = b[0][0].is_one();
    let bval = b[0][1].clone();
    if diag_one {
        push_t_power(&mut word, &bval);
    } else {
        // B = S^2 T^{-b}
        word.push(Letter::S);
        word.push(Letter::S);
        push_t_power(&mut word, &-bval);
    }
    // final word = B-letters ++ reversed prefix
    prefix_rev.reverse();
    word.extend(prefix_rev);
    Ok(GroupWord(word))
}

/// Extension generator: `rho(xi) e_gamma = xi^{b_- - b_+} e_{conj(xi)
/// gamma}` for a root of unity of the order.
pub fn rho_xi(ctx: &HermitianContext, xi: &KElement) -> Result<CycMatrix> {
    let order = ctx.olat.order();
    let roots = order.roots_of_unity();
    if !roots.contains(xi) {
        return Err(Error::NotRootOfUnity);
    }
    let a = &ctx.disc.fqm;
    let n = check_dim(a)?;
    let images = ctx.scalar_action(&xi.conj())?;
    let (bp, bm) = ctx.signature;
    let exponent = bm as i64 - bp as i64;
    let base = if exponent >= 0 {
        xi.to_cyclotomic()
    } else {
        xi.conj().to_cyclotomic()
    };
    let mut scalar = Cyclotomic::one();
    for _ in 0..exponent.unsigned_abs() {
        scalar = scalar.mul(&base);
    }
    let mut m = CycMatrix::zero(n, n);
    for gamma in 0..n {
        let img = a.map_elt(&images, a, &a.elt_at(gamma));
        m.entries[a.index(&img)][gamma] = scalar.clone();
    }
    Ok(m)
}

/// Decomposes a `U(1,1)(Z)` matrix as `xi * B` with `xi` a root of unity
/// of the field and `B` in `SL_2(Z)`; the sign is fixed by taking `xi`
/// with argument in `[0, pi)`.
pub fn factor_u11(a: &[Vec<KElement>]) -> Result<(KElement, IMat)> {
    if a.len() != 2 || a.iter().any(|r| r.len() != 2) {
        return Err(Error::NotUnitary);
    }
    let order = crate::exact::Order::new(a[0][0].d()).map_err(|_| Error::NotUnitary)?;
    for row in a {
        for e in row {
            if !in_maximal_order(e) {
                return Err(Error::NotIntegral);
            }
        }
    }
    // A J A^* = J for J = [[0, -1], [1, 0]]
    let j = [
        [order.zero(), order.one().neg()],
        [order.one(), order.zero()],
    ];
    let mut aja = [[order.zero(), order.zero()], [order.zero(), order.zero()]];
    for i in 0..2 {
        for k in 0..2 {
            let mut acc = order.zero();
            for s in 0..2 {
                for t in 0..2 {
                    // (A J A^*)_{ik} = sum A_{is} J_{st} conj(A_{kt})
                    acc = acc.add(&a[i][s].mul(&j[s][t]).mul(&a[k][t].conj()));
                }
            }
            aja[i][k] = acc;
        }
    }
    for i in 0..2 {
        for k in 0..2 {
            if aja[i][k] != j[i][k] {
                return Err(Error::NotUnitary);
            }
        }
    }
    let half = rat(1, 2);
    for xi in order.field_roots_of_unity() {
        // candidate B = conj(xi) * A must be integral with det 1
        let b: Vec<Vec<KElement>> = a
            .iter()
            .map(|row| row.iter().map(|e| e.mul(&xi.conj())).collect())
            .collect();
        let integral = b
            .iter()
            .flatten()
            .all(|e| e.y.is_zero() && e.x.is_integer());
        if !integral {
            continue;
        }
        let det = &b[0][0].x * &b[1][1].x - &b[0][1].x * &b[1][0].x;
        if !det.is_one() {
            continue;
        }
        // canonical sign: argument in [0, pi), i.e. y > 0 or (y = 0, x > 0)
        let canonical = xi.y.is_positive() || (xi.y.is_zero() && xi.x.is_positive());
        let (xi, b) = if canonical {
            (xi, b)
        } else {
            (
                xi.neg(),
                b.iter()
                    .map(|row| row.iter().map(|e| e.neg()).collect())
                    .collect(),
            )
        };
        let bm: IMat = b
            .iter()
            .map(|row| row.iter().map(|e| e.x.to_integer()).collect())
            .collect();
        // re-check canonical sign survived negation
        let _ = half;
        return Ok((xi, bm));
    }
    Err(Error::NotUnitary)
}

/// Maximal-order membership, through the squarefree part of `d`.
fn in_maximal_order(e: &KElement) -> bool {
    let mut m = e.d();
    let mut f = 1u64;
    for (p, k) in factorize(e.d()) {
        for _ in 0..(k / 2) {
            m /= p * p;
            f *= p;
        }
    }
    // z = x + (y f) sqrt(-m)
    let u = &e.y * rat(f as i64, 1);
    if m % 4 == 3 {
        // O_K = Z[(1 + sqrt(-m))/2]
        let b = &u + &u;
        if !b.is_integer() {
            return false;
        }
        (&e.x - &u).is_integer()
    } else {
        e.x.is_integer() && u.is_integer()
    }
}

/// Evaluates the representation on a word.
pub fn rho_of_word(a: &Fqm, word: &GroupWord) -> Result<CycMatrix> {
    if word.has_xi() {
        return Err(Error::MissingHermitianContext);
    }
    let n = check_dim(a)?;
    let mut acc = CycMatrix::identity(n);
    for l in &word.0 {
        let m = match l {
            Letter::T => rho_t(a)?,
            Letter::TInv => rho_t_inv(a)?,
            Letter::S => rho_s(a, None)?,
            Letter::Xi(_) => unreachable!(),
        };
        acc = acc.mul(&m);
    }
    Ok(acc)
}

/// Evaluates the representation of an `SL_2(Z)` matrix. Refused for
/// odd-signature modules, where only words are meaningful.
pub fn rho_of_matrix(a: &Fqm, m: &IMat) -> Result<CycMatrix> {
    if signature_mod_8(a)? % 2 != 0 {
        return Err(Error::OddSignatureMatrixInput);
    }
    rho_of_word(a, &factor_sl2(m)?)
}

/// Evaluates the extended representation on a word over a Hermitian
/// context (allowing `Xi` letters).
pub fn rho_of_word_hermitian(ctx: &HermitianContext, word: &GroupWord) -> Result<CycMatrix> {
    let a = &ctx.disc.fqm;
    let n = check_dim(a)?;
    let roots = ctx.olat.order().roots_of_unity();
    let mut acc = CycMatrix::identity(n);
    for l in &word.0 {
        let m = match l {
            Letter::T => rho_t(a)?,
            Letter::TInv => rho_t_inv(a)?,
            Letter::S => rho_s(a, None)?,
            Letter::Xi(k) => rho_xi(ctx, &roots[k % roots.len()])?,
        };
        acc = acc.mul(&m);
    }
    Ok(acc)
}

/// Evaluates the extended representation on a `U(1,1)(Z)` matrix.
pub fn rho_of_u11(ctx: &HermitianContext, a: &[Vec<KElement>]) -> Result<CycMatrix> {
    let (xi, b) = factor_u11(a)?;
    let roots = ctx.olat.order().roots_of_unity();
    let pos = roots
        .iter()
        .position(|r| *r == xi)
        .ok_or(Error::NotRootOfUnity)?;
    let word = factor_sl2(&b)?;
    let m = rho_of_word_hermitian(ctx, &word)?;
    let x = rho_of_word_hermitian(ctx, &GroupWord(vec![Letter::Xi(pos)]))?;
    Ok(x.mul(&m))
}

/// Arrow operators attached to an isotropic subgroup `H` of `A`:
/// `up: C[Delta] -> C[A]` summing over fibers, `down: C[A] -> C[Delta]`
/// collapsing `H^perp` and killing the rest.
pub struct ArrowPair {
    pub quotient: Subquotient,
    pub up: CycMatrix,
    pub down: CycMatrix,
}

pub fn arrows(a: &Fqm, h: &Subgroup) -> Result<ArrowPair> {
    if !h.is_isotropic(a) {
        return Err(Error::NotIsotropic);
    }
    let hperp = h.perp(a);
    let quotient = Subquotient::new(a, hperp.clone(), h.clone())?;
    let na = a.size() as usize;
    let nd = quotient.group.size() as usize;
    let mut up = CycMatrix::zero(na, nd);
    let mut down = CycMatrix::zero(nd, na);
    for idx in hperp.indices() {
        let e = a.elt_at(*idx);
        let cls = quotient.project(a, &e).expect("member of H^perp");
        let c = quotient.group.index(&cls);
        up.entries[*idx][c] = Cyclotomic::one();
        down.entries[c][*idx] = Cyclotomic::one();
    }
    Ok(ArrowPair { quotient, up, down })
}

/// The connecting operator `C[Delta_bar] -> C[Delta_H]` attached to a
/// horizontal isotropic `H` and an isotropic `I` inside the second factor:
/// `e_alpha` maps to the sum of `e_beta` over the fiber of the
/// value-preserving surjection `p` from `[H + (I^perp cap H^perp)]/H`
/// onto `Delta_bar`.
pub struct CombinedArrow {
    /// target quotient `Delta_H` data (matches [`crate::fqm::QuotientData`]
    /// indexing through its canonical module)
    pub bbar: Subquotient,
    pub matrix: CycMatrix,
    /// flat indices (in `Delta_H`) of the source subgroup
    pub subgroup_image: Vec<usize>,
}

pub fn combined_arrow(
    horizontal: &crate::fqm::HorizontalData,
    delta: &crate::fqm::QuotientData,
    i_sub: &Subgroup,
) -> Result<CombinedArrow> {
    let ds = &horizontal.ds;
    let amb = &ds.sum;
    if !i_sub.is_isotropic(&ds.right) {
        return Err(Error::NotIsotropic);
    }
    let i_amb = Subgroup::closure(
        amb,
        i_sub.iter(&ds.right).map(|e| ds.embed_right(&e)).collect(),
    );
    let h = &horizontal.h;
    let hperp = h.perp(amb);
    let iperp = i_amb.perp(amb);
    // H cap I^perp
    let h_cap_iperp = Subgroup::from_indices(
        amb,
        h.indices()
            .iter()
            .copied()
            .filter(|i| iperp.contains(*i))
            .collect(),
    );
    // I^perp cap H^perp
    let both_perp = Subgroup::from_indices(
        amb,
        hperp
            .indices()
            .iter()
            .copied()
            .filter(|i| iperp.contains(*i))
            .collect(),
    );
    let numerator = both_perp.sum(amb, &i_amb);
    let denominator = i_amb.sum(amb, &h_cap_iperp);
    let bbar = Subquotient::new(amb, numerator, denominator)?;

    let nd = delta.delta.size() as usize;
    let nb = bbar.group.size() as usize;
    let mut matrix = CycMatrix::zero(nd, nb);
    let mut subgroup_image = Vec::new();
    for idx in both_perp.indices() {
        let x = amb.elt_at(*idx);
        let beta = delta.project(amb, &x).expect("member of H^perp");
        let bi = delta.delta.index(&beta);
        if !subgroup_image.contains(&bi) {
            subgroup_image.push(bi);
            let alpha = bbar.project(amb, &x).expect("member of the numerator");
            matrix.entries[bi][bbar.group.index(&alpha)] = Cyclotomic::one();
        }
    }
    subgroup_image.sort_unstable();
    // injectivity: columns are nonzero with disjoint supports
    for j in 0..nb {
        let nonzero = (0..nd).filter(|&i| !matrix.entries[i][j].is_zero()).count();
        if nonzero == 0 {
            return Err(Error::NotInjective);
        }
    }
    Ok(CombinedArrow { bbar, matrix, subgroup_image })
}

/// Same operator computed through the intermediate quotient as the
/// composition `down ∘ up`; used as an independent route in tests.
pub fn combined_arrow_via_composition(
    horizontal: &crate::fqm::HorizontalData,
    delta: &crate::fqm::QuotientData,
    i_sub: &Subgroup,
) -> Result<CycMatrix> {
    let ds = &horizontal.ds;
    let amb = &ds.sum;
    if !i_sub.is_isotropic(&ds.right) {
        return Err(Error::NotIsotropic);
    }
    let i_amb = Subgroup::closure(
        amb,
        i_sub.iter(&ds.right).map(|e| ds.embed_right(&e)).collect(),
    );
    let h = &horizontal.h;
    let hperp = h.perp(amb);
    let iperp = i_amb.perp(amb);
    let h_cap_iperp = Subgroup::from_indices(
        amb,
        h.indices()
            .iter()
            .copied()
            .filter(|i| iperp.contains(*i))
            .collect(),
    );
    let both_perp = Subgroup::from_indices(
        amb,
        hperp
            .indices()
            .iter()
            .copied()
            .filter(|i| iperp.contains(*i))
            .collect(),
    );
    // A_bar = (H^perp + I)/(H cap I^perp)
    let abar_top = hperp.sum(amb, &i_amb);
    let abar = Subquotient::new(amb, abar_top.clone(), h_cap_iperp.clone())?;
    // I_bar inside A_bar
    let ibar_gens: Vec<Elt> = i_amb
        .iter(amb)
        .map(|e| abar.project(amb, &e).expect("I inside the top group"))
        .collect();
    let ibar = Subgroup::closure(&abar.group, ibar_gens);
    let abar_arrows = arrows(&abar.group, &ibar)?;
    // B_bar as built here: quotient of A_bar by I_bar; translate its
    // indexing to the canonical one of `combined_arrow`
    let bbar_direct = Subquotient::new(
        amb,
        both_perp.sum(amb, &i_amb),
        i_amb.sum(amb, &h_cap_iperp),
    )?;
    let nb = bbar_direct.group.size() as usize;
    // column alpha (canonical B_bar) -> vector in C[A_bar quotient]
    let mut translate = CycMatrix::zero(abar_arrows.quotient.group.size() as usize, nb);
    for j in 0..nb {
        let alpha = bbar_direct.group.elt_at(j);
        let rep = bbar_direct.lift(amb, &alpha);
        let in_abar = abar.project(amb, &rep).expect("rep lies in the top group");
        let cls = abar_arrows
            .quotient
            .project(&abar.group, &in_abar)
            .expect("rep is perpendicular to I_bar");
        translate.entries[abar_arrows.quotient.group.index(&cls)][j] = Cyclotomic::one();
    }
    // down_{H/(H cap I^perp)}: C[A_bar] -> C[Delta_H]
    let na = abar.group.size() as usize;
    let nd = delta.delta.size() as usize;
    let mut down = CycMatrix::zero(nd, na);
    for (col, slotcol) in (0..na).map(|c| (c, c)) {
        let cls = abar.group.elt_at(col);
        let rep = abar.lift(amb, &cls);
        // in (H/(H cap I^perp))^perp iff perpendicular to H in the ambient
        let in_hperp = h
            .iter(amb)
            .all(|hh| amb.pairing(&rep, &hh).is_zero());
        if in_hperp {
            let beta = delta.project(amb, &rep).expect("member of H^perp");
            down.entries[delta.delta.index(&beta)][slotcol] = Cyclotomic::one();
        }
    }
    Ok(down.mul(&abar_arrows.up).mul(&translate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rint, Order};
    use crate::fqm::{all_isotropic_subgroups, DirectSum, HorizontalData, QuotientData};
    use crate::lattice::{discriminant_group, OLattice, ZLattice};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z2_quarter() -> Fqm {
        Fqm::new(vec![2], vec![rat(1, 4)], vec![vec![rat(1, 2)]]).unwrap()
    }

    fn z4_eighth() -> Fqm {
        Fqm::new(vec![4], vec![rat(1, 8)], vec![vec![rat(1, 4)]]).unwrap()
    }

    #[test]
    fn rho_t_basics() {
        let t = rho_t(&Fqm::trivial()).unwrap();
        assert!(t.is_identity());
        let a = z2_quarter();
        let t = rho_t(&a).unwrap();
        assert_eq!(t.entries[1][1], Cyclotomic::root_of_unity(4, 1));
        // order of rho_T divides the level
        let lvl = a.level();
        let mut acc = CycMatrix::identity(2);
        let tm = rho_t(&a).unwrap();
        for _ in 0..lvl {
            acc = acc.mul(&tm);
        }
        assert!(acc.is_identity());
    }

    #[test]
    fn rho_s_z2() {
        let a = z2_quarter();
        let s = rho_s(&a, None).unwrap();
        // (e(-1/8)/sqrt 2) [[1, 1], [1, -1]]
        let front = crate::exact::sqrt_int(2)
            .mul(&e_of(&rat(-1, 8)))
            .scale(&rat(1, 2));
        assert_eq!(s.entries[0][0], front);
        assert_eq!(s.entries[1][0], front);
        assert_eq!(s.entries[0][1], front);
        assert_eq!(s.entries[1][1], front.neg());
        assert!(s.is_unitary());
        assert_eq!(rho_s(&Fqm::trivial(), None).unwrap().entries[0][0], Cyclotomic::one());
    }

    #[test]
    fn weil_relations_on_small_modules() {
        for a in [z2_quarter(), z4_eighth()] {
            let sig = signature_mod_8(&a).unwrap();
            let s = rho_s(&a, None).unwrap();
            let t = rho_t(&a).unwrap();
            let s2 = s.mul(&s);
            let expect = rho_negation(&a).unwrap().scale(&e_of(&rat(-(sig as i64), 4)));
            assert_eq!(s2, expect, "S^2 = e(-sig/4) P");
            let st = s.mul(&t);
            let st3 = st.mul(&st).mul(&st);
            assert_eq!(st3, s2, "(ST)^3 = S^2");
        }
    }

    #[test]
    fn factor_sl2_round_trips() {
        assert_eq!(factor_sl2(&mat2(1, 0, 0, 1)).unwrap(), GroupWord::empty());
        let t = factor_sl2(&mat2(1, 1, 0, 1)).unwrap();
        assert_eq!(t, GroupWord(vec![Letter::T]));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            // random SL2(Z) via random words
            let mut m = mat2(1, 0, 0, 1);
            for _ in 0..rng.gen_range(0..10) {
                let g = match rng.gen_range(0..3) {
                    0 => mat2(1, 1, 0, 1),
                    1 => mat2(1, -1, 0, 1),
                    _ => mat2(0, -1, 1, 0),
                };
                m = crate::linalg::imat_mul(&m, &g);
            }
            let w = factor_sl2(&m).unwrap();
            assert_eq!(eval_word(&w).unwrap(), m);
        }
        assert!(factor_sl2(&mat2(2, 0, 0, 1)).is_err());
    }

    #[test]
    fn rho_word_well_defined() {
        let a = z4_eighth();
        // S^{-1} T S evaluated through two different factorizations
        let m1 = eval_word(&GroupWord(vec![Letter::S, Letter::S, Letter::S, Letter::T, Letter::S]))
            .unwrap();
        let w2 = factor_sl2(&m1).unwrap();
        // signature of z4_eighth is odd (1), so matrices of the two words
        // can differ by the metaplectic sign; square both to compare in
        // the even quotient... instead use an even-signature module:
        let even = DirectSum::new(z2_quarter(), z2_quarter().negated()).unwrap().sum;
        assert_eq!(signature_mod_8(&even).unwrap() % 2, 0);
        let r1 = rho_of_word(
            &even,
            &GroupWord(vec![Letter::S, Letter::S, Letter::S, Letter::T, Letter::S]),
        )
        .unwrap();
        let r2 = rho_of_word(&even, &w2).unwrap();
        assert_eq!(r1, r2);
        let viamat = rho_of_matrix(&even, &m1).unwrap();
        assert_eq!(viamat, r1);
        // odd signature refuses matrix input
        assert!(matches!(
            rho_of_matrix(&a, &m1),
            Err(Error::OddSignatureMatrixInput)
        ));
        // identity word
        assert!(rho_of_word(&a, &GroupWord::empty()).unwrap().is_identity());
    }

    #[test]
    fn rho_xi_gaussian_lattice() {
        let order = Order::new(4).unwrap();
        let m = OLattice::new(order, vec![vec![order.one()]]).unwrap();
        let ctx = crate::lattice::HermitianContext::new(m).unwrap();
        let a = ctx.disc.fqm.clone();
        // xi = 1 is the identity
        assert!(rho_xi(&ctx, &order.one()).unwrap().is_identity());
        // xi = -1 equals rho(S^2) = rho(-I)
        let minus = rho_xi(&ctx, &order.elem(rat(-1, 1), rint(0))).unwrap();
        let s = rho_s(&a, None).unwrap();
        assert_eq!(minus, s.mul(&s));
        // xi = i: commutes with rho_S and rho_T
        let i_unit = order.elem(rint(0), rat(1, 2));
        let xi = rho_xi(&ctx, &i_unit).unwrap();
        let t = rho_t(&a).unwrap();
        assert_eq!(xi.mul(&s), s.mul(&xi));
        assert_eq!(xi.mul(&t), t.mul(&xi));
        // scalar factor is i^{-1}
        assert!(!xi.entries.iter().flatten().any(|e| {
            !e.is_zero() && *e != e_of(&rat(3, 4))
        }));
        // non-root rejected
        assert!(matches!(
            rho_xi(&ctx, &order.elem(rint(2), rint(0))),
            Err(Error::NotRootOfUnity)
        ));
    }

    #[test]
    fn factor_u11_examples() {
        let order = Order::new(4).unwrap();
        let i_unit = order.elem(rint(0), rat(1, 2));
        let zero = order.zero();
        // xi * Id for xi = i
        let a = vec![
            vec![i_unit.clone(), zero.clone()],
            vec![zero.clone(), i_unit.clone()],
        ];
        let (xi, b) = factor_u11(&a).unwrap();
        assert_eq!(xi, i_unit);
        assert_eq!(b, mat2(1, 0, 0, 1));
        // plain SL2 matrix: xi = 1
        let a = vec![
            vec![order.one(), order.one()],
            vec![zero.clone(), order.one()],
        ];
        let (xi, b) = factor_u11(&a).unwrap();
        assert_eq!(xi, order.one());
        assert_eq!(b, mat2(1, 1, 0, 1));
        // i * T
        let a = vec![
            vec![i_unit.clone(), i_unit.clone()],
            vec![zero.clone(), i_unit.clone()],
        ];
        let (xi, b) = factor_u11(&a).unwrap();
        assert_eq!(xi, i_unit);
        assert_eq!(b, mat2(1, 1, 0, 1));
        // product check through the representation
        let m = OLattice::new(order, vec![vec![order.one()]]).unwrap();
        let ctx = crate::lattice::HermitianContext::new(m).unwrap();
        let viau11 = rho_of_u11(&ctx, &a).unwrap();
        let xi_m = rho_xi(&ctx, &i_unit).unwrap();
        let t_m = rho_t(&ctx.disc.fqm).unwrap();
        assert_eq!(viau11, xi_m.mul(&t_m));
        // non-unitary matrix rejected
        let bad = vec![
            vec![order.one(), order.one()],
            vec![order.one(), order.one()],
        ];
        assert!(factor_u11(&bad).is_err());
        // non-integral entries rejected
        let bad = vec![
            vec![order.elem(rat(1, 2), rint(0)), zero.clone()],
            vec![zero.clone(), order.one()],
        ];
        assert!(matches!(factor_u11(&bad), Err(Error::NotIntegral)));
    }

    #[test]
    fn arrows_intertwine() {
        // (Z/4, 1/8) scaled to contain an isotropic subgroup: use the
        // discriminant form of Gram [8]: Z/8 with q = 1/16... simpler:
        // hyperbolic (Z/2)^2 and the rescaled (Z/4)^2 example
        let l = ZLattice::from_int_rows(&[&[4, 0], &[0, 4]]).unwrap();
        let a = discriminant_group(&l).unwrap().fqm;
        for h in all_isotropic_subgroups(&a) {
            let pair = arrows(&a, &h).unwrap();
            // down . up = |H| Id
            let comp = pair.down.mul(&pair.up);
            let nd = pair.quotient.group.size() as usize;
            let scaled = CycMatrix::identity(nd)
                .scale(&Cyclotomic::from_rational(rat(h.len() as i64, 1)));
            assert_eq!(comp, scaled);
            // intertwining with T and S
            let ta = rho_t(&a).unwrap();
            let td = rho_t(&pair.quotient.group).unwrap();
            assert_eq!(pair.down.mul(&ta), td.mul(&pair.down));
            assert_eq!(ta.mul(&pair.up), pair.up.mul(&td));
            let sa = rho_s(&a, None).unwrap();
            let sd = rho_s(&pair.quotient.group, None).unwrap();
            assert_eq!(pair.down.mul(&sa), sd.mul(&pair.down));
            assert_eq!(sa.mul(&pair.up), pair.up.mul(&sd));
        }
        // trivial H gives identities
        let pair = arrows(&a, &Subgroup::trivial(&a)).unwrap();
        assert!(pair.up.mul(&pair.down).is_identity());
    }

    #[test]
    fn contragredient_duality() {
        // rho on A and on the negated module are contragredient:
        // rho_bar(g) = (rho(g)^T)^{-1}, checked on T and S via the pairing
        let a = z4_eighth();
        let abar = a.negated();
        let t = rho_t(&a).unwrap();
        let tbar = rho_t(&abar).unwrap();
        // T tbar^T = Id
        let prod = t.mul(&tbar);
        assert!(prod.is_identity());
        let s = rho_s(&a, None).unwrap();
        let sbar = rho_s(&abar, None).unwrap();
        // [rho(S) x, rho_bar(S) y] = [x, y]: S^T sbar = Id as bilinear forms
        let st = CycMatrix {
            rows: 2,
            cols: 2,
            entries: vec![vec![Cyclotomic::zero(); 2]; 2],
        };
        let _ = st;
        let prod = CycMatrix {
            rows: s.rows,
            cols: sbar.cols,
            entries: (0..s.rows)
                .map(|i| {
                    (0..sbar.cols)
                        .map(|j| {
                            let mut acc = Cyclotomic::zero();
                            for k in 0..s.cols {
                                acc = acc.add(&s.entries[k][i].mul(&sbar.entries[k][j]));
                            }
                            acc
                        })
                        .collect()
                })
                .collect(),
        };
        assert!(prod.is_identity());
    }

    #[test]
    fn combined_arrow_trivial_i() {
        let a = z2_quarter();
        let ds = DirectSum::new(a.clone(), a.negated()).unwrap();
        let h = HorizontalData::new(ds, &[a.generator(0)], &[a.generator(0)]).unwrap();
        let r = crate::fqm::default_representatives(&h.ds.left, &h.h_m);
        let delta = QuotientData::new(&h, &r).unwrap();
        let trivial = Subgroup::trivial(&h.ds.right);
        let ca = combined_arrow(&h, &delta, &trivial).unwrap();
        assert!(ca.matrix.is_identity());
        let via = combined_arrow_via_composition(&h, &delta, &trivial).unwrap();
        assert_eq!(via, ca.matrix);
    }

    #[test]
    fn combined_arrow_case_i() {
        // case I <= H_D cap H_D^perp with |I| = 2: build D with a
        // hyperbolic block so that H_D is isotropic and self-perp inside it
        let a = z2_quarter(); // D_M
        // D = (Z/2, 3/4) + hyperbolic (Z/2)^2
        let d = crate::fqm::fqm_from_parts(
            &[2, 2, 2],
            &[rat(3, 4), rint(0), rint(0)],
            &vec![
                vec![rat(1, 2), rint(0), rint(0)],
                vec![rint(0), rint(0), rat(1, 2)],
                vec![rint(0), rat(1, 2), rint(0)],
            ],
        )
        .unwrap();
        let ds = DirectSum::new(a.clone(), d.clone()).unwrap();
        // H: g_M -> (1, 1, 0): q = 3/4 + 0 = 3/4 = -1/4 ok
        let h_img = Elt::new(vec![1, 1, 0]);
        let h = HorizontalData::new(ds, &[a.generator(0)], &[h_img]).unwrap();
        let r = crate::fqm::default_representatives(&h.ds.left, &h.h_m);
        let delta = QuotientData::new(&h, &r).unwrap();
        // I = <(0, 1, 0)>: isotropic; pairing with H_D gen (1,1,0):
        // b((0,1,0),(1,1,0)) = hyperbolic pairing(1,.) = 0? b(g2,g2)=0,
        // b(g2,g1)=0: so I <= H_D^perp; I <= H_D? (0,1,0) != (1,1,0): no.
        // that lands in case (ii); for case (i) take I = H_D itself when
        // q(H_D gen) = 0... here q = 3/4 != 0 so H_D is not isotropic.
        // Use instead I = <(0,1,0)> and just check the two routes agree
        // and the operator is injective.
        let i_sub = Subgroup::closure(&h.ds.right, vec![Elt::new(vec![0, 1, 0])]);
        assert!(i_sub.is_isotropic(&h.ds.right));
        let ca = combined_arrow(&h, &delta, &i_sub).unwrap();
        let via = combined_arrow_via_composition(&h, &delta, &i_sub).unwrap();
        assert_eq!(ca.matrix, via);
        assert!(ca.matrix.is_zero_one());
        // dimension bookkeeping: |B_bar| matches the general formula
        let amb = &h.ds.sum;
        let i_amb = Subgroup::closure(
            amb,
            i_sub.iter(&h.ds.right).map(|e| h.ds.embed_right(&e)).collect(),
        );
        let hperp = h.h.perp(amb);
        let iperp = i_amb.perp(amb);
        let both: Vec<usize> = hperp
            .indices()
            .iter()
            .copied()
            .filter(|i| iperp.contains(*i))
            .collect();
        let both = Subgroup::from_indices(amb, both);
        let num = both.sum(amb, &i_amb).len();
        let den = i_amb
            .sum(
                amb,
                &Subgroup::from_indices(
                    amb,
                    h.h.indices()
                        .iter()
                        .copied()
                        .filter(|i| iperp.contains(*i))
                        .collect(),
                ),
            )
            .len();
        assert_eq!(ca.bbar.group.size() as usize, num / den);
    }

    #[test]
    fn arrow_budget_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let _ = rng.gen_range(0..2);
        // dimension cap applies
        let orders = vec![2u64; 10];
        let qv: Vec<crate::exact::Rational> = (0..10).map(|_| rat(1, 4)).collect();
        let mut gram = vec![vec![rint(0); 10]; 10];
        for i in 0..10 {
            gram[i][i] = rat(1, 2);
        }
        let big = Fqm::new(orders, qv, gram).unwrap();
        assert!(matches!(rho_t(&big), Err(Error::BudgetExceeded(_))));
    }
}
