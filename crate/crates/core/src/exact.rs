//! Exact scalars: arbitrary-precision rationals, cyclotomic numbers, and
//! elements of an imaginary quadratic field `K = Q(sqrt(-d))`.
//!
//! Cyclotomic numbers are stored in the power basis `zeta_N^0 ..
//! zeta_N^(phi(N)-1)` of `Q(zeta_N)`, reduced modulo the N-th cyclotomic
//! polynomial, so equality of canonical forms is equality of values.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Exact rational scalar. Always stored reduced with positive denominator.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integer.
pub type Int = BigInt;

/// `p/q` as a [`Rational`]; panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(Int::from(p), Int::from(q))
}

/// `n` as a [`Rational`].
pub fn rint(n: i64) -> Rational {
    Rational::from(Int::from(n))
}

/// Representative of `z` mod 1 in `[0, 1)`.
pub fn frac_mod1(z: &Rational) -> Rational {
    let f = z.fract();
    if f.is_negative() {
        f + Rational::one()
    } else {
        f
    }
}

/// True iff `z` is an integer.
pub fn is_integral(z: &Rational) -> bool {
    z.is_integer()
}

/// Floor of a rational as a `BigInt`.
pub fn rational_floor(z: &Rational) -> Int {
    z.floor().to_integer()
}

/// Ceiling of a rational as a `BigInt`.
pub fn rational_ceil(z: &Rational) -> Int {
    z.ceil().to_integer()
}

/// Euler totient by trial division; inputs here are tiny.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n > 0);
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Prime factorization `[(p, multiplicity)]` by trial division.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0);
    let mut n = n;
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

// Cyclotomic polynomials Phi_N, dense ascending integer coefficients.
// Computed once per order via Phi_N = (x^N - 1) / prod_{d | N, d < N} Phi_d.
static CYCLO_POLYS: Mutex<Option<std::collections::HashMap<u64, Vec<Int>>>> = Mutex::new(None);

fn int_poly_div_exact(num: &[Int], den: &[Int]) -> Vec<Int> {
    // Exact division of integer polynomials, denominator monic.
    assert!(den.last().map(|c| c.is_one()).unwrap_or(false));
    let mut rem: Vec<Int> = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len().saturating_sub(dn);
    let mut quot = vec![Int::zero(); qn.max(1)];
    for i in (dn..rem.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dn] = c.clone();
        for (j, dc) in den.iter().enumerate() {
            let t = &c * dc;
            rem[i - dn + j] -= t;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact poly division");
    quot
}

/// Dense coefficients of the N-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u64) -> Vec<Int> {
    {
        let guard = CYCLO_POLYS.lock().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(p) = map.get(&n) {
                return p.clone();
            }
        }
    }
    let poly = if n == 1 {
        vec![Int::from(-1), Int::from(1)]
    } else {
        let mut num = vec![Int::zero(); (n + 1) as usize];
        num[0] = Int::from(-1);
        num[n as usize] = Int::from(1);
        let mut cur = num;
        for d in divisors(n) {
            if d < n {
                let phi_d = cyclotomic_polynomial(d);
                cur = int_poly_div_exact(&cur, &phi_d);
            }
        }
        cur
    };
    let mut guard = CYCLO_POLYS.lock().unwrap();
    guard
        .get_or_insert_with(std::collections::HashMap::new)
        .insert(n, poly.clone());
    poly
}

/// Element of `Q(zeta_N)` in the reduced power basis.
#[derive(Debug, Clone)]
pub struct Cyclotomic {
    order: u64,
    // exponent -> coefficient; exponents < phi(order), no zero values
    coeffs: BTreeMap<u64, Rational>,
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Cyclotomic { order: 1, coeffs: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Cyclotomic::from_rational(Rational::one())
    }

    pub fn from_rational(c: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(0, c);
        }
        Cyclotomic { order: 1, coeffs }
    }

    /// `zeta_N^k`, canonicalized.
    pub fn root_of_unity(n: u64, k: i64) -> Self {
        assert!(n > 0);
        let k = k.rem_euclid(n as i64) as u64;
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, Rational::one());
        let mut out = Cyclotomic { order: n, coeffs };
        out.reduce();
        out
    }

    /// Construct from raw `(order, exponent -> coefficient)` data; exponents
    /// may be arbitrary and get folded into the canonical basis.
    pub fn from_coeffs(order: u64, raw: impl IntoIterator<Item = (u64, Rational)>) -> Self {
        assert!(order > 0);
        let mut coeffs: BTreeMap<u64, Rational> = BTreeMap::new();
        for (e, c) in raw {
            if c.is_zero() {
                continue;
            }
            let e = e % order;
            let entry = coeffs.entry(e).or_insert_with(Rational::zero);
            *entry += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        let mut out = Cyclotomic { order, coeffs };
        out.reduce();
        out
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Canonical coefficients (exponent, value), exponents < phi(order).
    pub fn coeffs(&self) -> impl Iterator<Item = (&u64, &Rational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Some(c)` iff the value is the rational number `c`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs.is_empty() {
            return Some(Rational::zero());
        }
        if self.coeffs.len() == 1 {
            if let Some(c) = self.coeffs.get(&0) {
                return Some(c.clone());
            }
        }
        None
    }

    fn reduce(&mut self) {
        let phi = euler_phi(self.order);
        if self.coeffs.keys().next_back().map(|&e| e < phi).unwrap_or(true) {
            return;
        }
        // Dense remainder modulo Phi_N.
        let n = self.order;
        let poly = cyclotomic_polynomial(n);
        let deg = poly.len() - 1;
        let top = *self.coeffs.keys().next_back().unwrap() as usize;
        let mut dense = vec![Rational::zero(); top + 1];
        for (&e, c) in &self.coeffs {
            dense[e as usize] = c.clone();
        }
        for i in (deg..=top).rev() {
            if dense[i].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut dense[i], Rational::zero());
            for (j, pc) in poly.iter().enumerate().take(deg) {
                if !pc.is_zero() {
                    let t = &c * Rational::from(pc.clone());
                    dense[i - deg + j] -= t;
                }
            }
        }
        self.coeffs = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e as u64, c))
            .collect();
    }

    /// Rewrite in `Q(zeta_M)` for `N | M`.
    pub fn embed(&self, m: u64) -> Self {
        assert!(m % self.order == 0, "embedding target must be a multiple of the order");
        if m == self.order {
            return self.clone();
        }
        let f = m / self.order;
        Cyclotomic::from_coeffs(m, self.coeffs.iter().map(|(&e, c)| (e * f, c.clone())))
    }

    /// Rewrite both operands in `Q(zeta_lcm)`.
    pub fn embed_common(a: &Cyclotomic, b: &Cyclotomic) -> (Cyclotomic, Cyclotomic) {
        let l = a.order.lcm(&b.order);
        (a.embed(l), b.embed(l))
    }

    pub fn add(&self, other: &Cyclotomic) -> Cyclotomic {
        let (mut a, b) = Cyclotomic::embed_common(self, other);
        for (e, c) in b.coeffs {
            let entry = a.coeffs.entry(e).or_insert_with(Rational::zero);
            *entry += c;
        }
        a.coeffs.retain(|_, c| !c.is_zero());
        a
    }

    pub fn sub(&self, other: &Cyclotomic) -> Cyclotomic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Cyclotomic) -> Cyclotomic {
        if self.is_zero() || other.is_zero() {
            return Cyclotomic::zero();
        }
        let (a, b) = Cyclotomic::embed_common(self, other);
        let n = a.order;
        let mut acc: BTreeMap<u64, Rational> = BTreeMap::new();
        for (&e1, c1) in &a.coeffs {
            for (&e2, c2) in &b.coeffs {
                let e = (e1 + e2) % n;
                let entry = acc.entry(e).or_insert_with(Rational::zero);
                *entry += c1 * c2;
            }
        }
        Cyclotomic::from_coeffs(n, acc)
    }

    pub fn scale(&self, c: &Rational) -> Cyclotomic {
        if c.is_zero() {
            return Cyclotomic::zero();
        }
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|(&e, v)| (e, v * c)).collect(),
        }
    }

    /// Galois action `zeta -> zeta^a` for `gcd(a, order) = 1`.
    pub fn galois(&self, a: u64) -> Cyclotomic {
        assert_eq!(a.gcd(&self.order), 1);
        Cyclotomic::from_coeffs(
            self.order,
            self.coeffs.iter().map(|(&e, c)| ((e * a) % self.order, c.clone())),
        )
    }

    /// Complex conjugation `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Cyclotomic {
        if self.order == 1 {
            return self.clone();
        }
        self.galois(self.order - 1)
    }

    /// `x * conj(x)`, a totally real element (rational for roots of unity
    /// combinations that are Gauss sums of the right modulus).
    pub fn abs_square(&self) -> Cyclotomic {
        self.mul(&self.conj())
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Cyclotomic::embed_common(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclotomic {}

impl std::fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(e, c)| {
                if *e == 0 {
                    format!("{c}")
                } else if c.is_one() {
                    format!("z{}^{}", self.order, e)
                } else {
                    format!("{c}*z{}^{}", self.order, e)
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// `e(z) = exp(2*pi*i*z)` for rational `z`, as an exact root of unity.
pub fn e_of(z: &Rational) -> Cyclotomic {
    let z = frac_mod1(z);
    let n: u64 = z.denom().try_into().expect("root-of-unity order overflows u64");
    let k: u64 = z.numer().try_into().expect("root-of-unity exponent overflows u64");
    Cyclotomic::root_of_unity(n, k as i64)
}

/// Exact positive square root of a positive integer, inside `Q(zeta)`.
///
/// Square parts come out as rationals; `sqrt(2)` uses `zeta_8 - zeta_8^3`
/// and `sqrt(p)` for odd primes comes from the quadratic Gauss sum.
pub fn sqrt_int(n: u64) -> Cyclotomic {
    assert!(n > 0);
    let mut square_part = Int::one();
    let mut out = Cyclotomic::one();
    for (p, e) in factorize(n) {
        square_part *= Int::from(p).pow(e / 2);
        if e % 2 == 1 {
            out = out.mul(&sqrt_prime(p));
        }
    }
    out.scale(&Rational::from(square_part))
}

fn sqrt_prime(p: u64) -> Cyclotomic {
    if p == 2 {
        let a = Cyclotomic::root_of_unity(8, 1);
        let b = Cyclotomic::root_of_unity(8, 3);
        return a.sub(&b);
    }
    // Quadratic Gauss sum: sum_x e(x^2/p) equals sqrt(p) for p = 1 mod 4
    // and i*sqrt(p) for p = 3 mod 4.
    let mut g = Cyclotomic::zero();
    for x in 0..p {
        let sq = ((x as u128 * x as u128) % p as u128) as i64;
        g = g.add(&Cyclotomic::root_of_unity(p, sq));
    }
    if p % 4 == 1 {
        g
    } else {
        g.mul(&Cyclotomic::root_of_unity(4, 3))
    }
}

/// Discriminant context: the order `O` of discriminant `-d` inside
/// `K = Q(sqrt(-d))`, spanned over `Z` by `1` and `omega = (d + sqrt(-d))/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Order {
    d: u64,
}

impl Order {
    /// Only discriminants of orders are allowed: `d = 0 or 3 mod 4`, `d > 0`.
    pub fn new(d: u64) -> Result<Order> {
        if d == 0 || (d % 4 != 0 && d % 4 != 3) {
            return Err(Error::BadComplexStructure);
        }
        Ok(Order { d })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn elem(&self, x: Rational, y: Rational) -> KElement {
        KElement { d: self.d, x, y }
    }

    pub fn from_rational(&self, x: Rational) -> KElement {
        self.elem(x, Rational::zero())
    }

    pub fn zero(&self) -> KElement {
        self.from_rational(Rational::zero())
    }

    pub fn one(&self) -> KElement {
        self.from_rational(Rational::one())
    }

    /// `sqrt(-d)` as an element of `K`.
    pub fn sqrt_neg_d(&self) -> KElement {
        self.elem(Rational::zero(), Rational::one())
    }

    /// `omega = (d + sqrt(-d)) / 2`, the second basis vector of `O`.
    pub fn omega(&self) -> KElement {
        self.elem(rat(self.d as i64, 2), rat(1, 2))
    }

    /// The group `mu(O)` of roots of unity in this order, listed as a cycle
    /// generated by the canonical generator (angle `1/|mu|`).
    pub fn roots_of_unity(&self) -> Vec<KElement> {
        let gen = match self.d {
            3 => self.elem(rat(1, 2), rat(1, 2)),  // e(1/6)
            4 => self.elem(Rational::zero(), rat(1, 2)), // i
            _ => self.elem(rat(-1, 1), Rational::zero()),
        };
        let mut out = vec![self.one()];
        let mut cur = gen.clone();
        while cur != self.one() {
            out.push(cur.clone());
            cur = cur.mul(&gen);
        }
        out
    }

    /// Roots of unity of the field `K` (those of the maximal order).
    pub fn field_roots_of_unity(&self) -> Vec<KElement> {
        // d = f^2 * m with m squarefree; mu_K is nontrivial exactly for
        // K = Q(i) (m = 1, sqrt(-d) = f*i) and K = Q(sqrt(-3)) (m = 3).
        let mut m = self.d;
        let mut f = 1u64;
        for (p, e) in factorize(self.d) {
            for _ in 0..(e / 2) {
                m /= p * p;
                f *= p;
            }
        }
        let gen = if m == 1 {
            self.elem(Rational::zero(), Rational::new(Int::one(), Int::from(f)))
        } else if m == 3 {
            self.elem(rat(1, 2), Rational::new(Int::one(), Int::from(2 * f)))
        } else {
            self.elem(rat(-1, 1), Rational::zero())
        };
        let mut out = vec![self.one()];
        let mut cur = gen.clone();
        let mut steps = 0;
        while cur != self.one() {
            out.push(cur.clone());
            cur = cur.mul(&gen);
            steps += 1;
            assert!(steps <= 6, "root-of-unity cycle too long");
        }
        out
    }
}

/// Element `x + y*sqrt(-d)` of `K = Q(sqrt(-d))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KElement {
    d: u64,
    pub x: Rational,
    pub y: Rational,
}

impl KElement {
    pub fn d(&self) -> u64 {
        self.d
    }

    fn check(&self, other: &KElement) {
        assert_eq!(self.d, other.d, "KElement operands over different orders");
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn add(&self, o: &KElement) -> KElement {
        self.check(o);
        KElement { d: self.d, x: &self.x + &o.x, y: &self.y + &o.y }
    }

    pub fn sub(&self, o: &KElement) -> KElement {
        self.check(o);
        KElement { d: self.d, x: &self.x - &o.x, y: &self.y - &o.y }
    }

    pub fn neg(&self) -> KElement {
        KElement { d: self.d, x: -self.x.clone(), y: -self.y.clone() }
    }

    pub fn mul(&self, o: &KElement) -> KElement {
        self.check(o);
        let d = Rational::from(Int::from(self.d));
        KElement {
            d: self.d,
            x: &self.x * &o.x - &d * &self.y * &o.y,
            y: &self.x * &o.y + &self.y * &o.x,
        }
    }

    pub fn scale(&self, c: &Rational) -> KElement {
        KElement { d: self.d, x: &self.x * c, y: &self.y * c }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> KElement {
        let n = self.norm();
        assert!(!n.is_zero(), "division by zero in K");
        KElement { d: self.d, x: &self.x / &n, y: -(&self.y / &n) }
    }

    pub fn div(&self, o: &KElement) -> KElement {
        self.mul(&o.inv())
    }

    pub fn conj(&self) -> KElement {
        KElement { d: self.d, x: self.x.clone(), y: -self.y.clone() }
    }

    pub fn trace(&self) -> Rational {
        &self.x + &self.x
    }

    pub fn norm(&self) -> Rational {
        let d = Rational::from(Int::from(self.d));
        &self.x * &self.x + d * &self.y * &self.y
    }

    /// Membership in `O = Z + Z*omega`, `omega = (d + sqrt(-d))/2`.
    pub fn in_order(&self) -> bool {
        // x + y sqrt(-d) = a + b omega  with  b = 2y,  a = x - b d / 2
        let b = &self.y + &self.y;
        if !b.is_integer() {
            return false;
        }
        let a = &self.x - &b * rat(self.d as i64, 2);
        a.is_integer()
    }

    /// Membership in the inverse different `D^{-1} = (1/sqrt(-d)) O`,
    /// spanned over `Z` by `1/sqrt(-d)` and `(1 + sqrt(-d))/2`.
    pub fn in_inv_different(&self) -> bool {
        // x + y sqrt(-d) = a * (-sqrt(-d)/d) + b * (1 + sqrt(-d))/2:
        // b = 2x, a = d (x - y)
        let b = &self.x + &self.x;
        if !b.is_integer() {
            return false;
        }
        let a = rat(self.d as i64, 1) * (&self.x - &self.y);
        a.is_integer()
    }

    /// Image under the fixed embedding `sqrt(-d) -> sqrt(d) * i` as an exact
    /// cyclotomic, defined whenever `y * sqrt(d)` is rational after pulling
    /// out the square part of `d`.
    pub fn to_cyclotomic(&self) -> Cyclotomic {
        // sqrt(-d) = sqrt(d) * e(1/4)
        let i = Cyclotomic::root_of_unity(4, 1);
        let sd = sqrt_int(self.d);
        Cyclotomic::from_rational(self.x.clone()).add(&sd.mul(&i).scale(&self.y))
    }
}

impl std::fmt::Display for KElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}*sqrt(-{})", self.x, self.y, self.d)
    }
}
