//! Exact arithmetic in cyclotomic fields.
//!
//! A [`Cyclotomic`] is stored as a conductor `n` together with rational
//! coefficients on a fixed basis of `Q(ζ_n)`.  The basis is a product basis
//! built prime by prime (Zumbroich style): an exponent `k` is a basis exponent
//! when, for every prime power `p^e ∥ n`, the most significant base-`p` digit
//! of `k mod p^e` is nonzero (odd `p`) or zero (`p = 2`).  Every value is kept
//! in canonical form — reduced to that basis at its *minimal* conductor — so
//! structural equality is field equality and rendering is deterministic.
//!
//! Rationals are `num_rational::BigRational`; nothing in this module ever
//! touches floating point.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number (always stored reduced, positive denominator).
pub type Rational = num_rational::BigRational;

/// Conductor cap applied when values are read from text.
pub const DEFAULT_CONDUCTOR_CAP: u64 = 120;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("cannot parse cyclotomic `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("conductor {n} exceeds the configured cap {cap}")]
    ConductorCap { n: u64, cap: u64 },
    #[error("galois exponent {k} is not coprime to conductor {n}")]
    NotCoprime { k: i64, n: u64 },
    #[error("value {0} is not rational")]
    NotRational(String),
}

/// Build a rational from a numerator/denominator pair of machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Build an integral rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Element of a cyclotomic field, in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclotomic {
    n: u64,
    coeffs: BTreeMap<u64, Rational>,
}

pub(crate) fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
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

fn is_basis_exponent(k: u64, primes: &[(u64, u32)]) -> bool {
    primes.iter().all(|&(p, e)| {
        let pe = p.pow(e);
        let top = (k % pe) / p.pow(e - 1);
        if p == 2 {
            top == 0
        } else {
            top != 0
        }
    })
}

/// Rewrite a dense coefficient vector at conductor `n` (n ≢ 2 mod 4) onto the
/// basis.  Each prime is handled in one sweep: the replacement terms only move
/// the digit belonging to that prime, so earlier primes stay reduced.
fn reduce_dense(n: u64, v: &mut [Rational]) {
    for (p, e) in factor(n) {
        let pe = p.pow(e);
        let top = p.pow(e - 1);
        let step = n / p;
        for k in 0..n {
            let digit = (k % pe) / top;
            let forbidden = if p == 2 { digit == 1 } else { digit == 0 };
            if !forbidden || v[k as usize].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut v[k as usize], Rational::zero());
            for j in 1..p {
                let idx = ((k + j * step) % n) as usize;
                v[idx] -= &c;
            }
        }
    }
}

/// ζ_{2m}^k = (−1)^k ζ_m^{k(m+1)/2} for odd m.
fn halve(n: u64, v: Vec<Rational>) -> (u64, Vec<Rational>) {
    let m = n / 2;
    let mut w = vec![Rational::zero(); m as usize];
    for (k, c) in v.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let k = k as u64;
        let idx = ((k % m) * m.div_ceil(2) % m) as usize;
        if k.is_multiple_of(2) {
            w[idx] += c;
        } else {
            w[idx] -= c;
        }
    }
    (m, w)
}

/// Bring `(n, v)` to a conductor that is not ≡ 2 mod 4 and reduce onto the basis.
fn settle(n: u64, v: Vec<Rational>) -> (u64, Vec<Rational>) {
    let (n, mut v) = if n % 4 == 2 { halve(n, v) } else { (n, v) };
    reduce_dense(n, &mut v);
    (n, v)
}

fn embed(m: u64, w: &[Rational], n: u64) -> Vec<Rational> {
    let f = n / m;
    let mut v = vec![Rational::zero(); n as usize];
    for (j, c) in w.iter().enumerate() {
        if !c.is_zero() {
            v[(j as u64 * f) as usize] += c;
        }
    }
    v
}

/// Try to express the reduced vector `v` at conductor `n` in `Q(ζ_{n/p})`.
fn descend(n: u64, v: &[Rational], p: u64) -> Option<(u64, Vec<Rational>)> {
    let m = n / p;
    let mut w = vec![Rational::zero(); m as usize];
    if (n / p).is_multiple_of(p) {
        // The basis exponents divisible by p span exactly Q(ζ_{n/p}).
        for (k, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !(k as u64).is_multiple_of(p) {
                return None;
            }
            w[k / p as usize] += c;
        }
    } else {
        // Average over Gal(Q(ζ_n)/Q(ζ_m)); the non-p-divisible part of the
        // trace collapses onto the single automorphism with s ≡ 0 (mod p).
        let minv = mod_inverse(m % p, p).expect("p does not divide m");
        let t0 = (p - minv) % p;
        let s0 = 1 + t0 * m;
        let pm1 = Rational::from_integer(BigInt::from(p - 1));
        for (k, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = k as u64;
            if k.is_multiple_of(p) {
                w[(k / p) as usize] += c;
            } else {
                let e = (k as u128 * s0 as u128 % n as u128) as u64;
                w[(e / p) as usize] -= c / &pm1;
            }
        }
    }
    let (m2, w2) = settle(m, w);
    let back = {
        let mut b = embed(m2, &w2, n);
        reduce_dense(n, &mut b);
        b
    };
    if back.as_slice() == v {
        Some((m2, w2))
    } else {
        None
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let g = (a as i64).extended_gcd(&(m as i64));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i64) as u64)
}

impl Cyclotomic {
    /// Canonicalize an arbitrary dense vector of coefficients of `ζ_n^k`.
    fn from_dense(n: u64, v: Vec<Rational>) -> Self {
        assert!(n >= 1 && v.len() as u64 == n);
        let (mut n, mut v) = settle(n, v);
        'outer: loop {
            for (p, _) in factor(n) {
                if let Some((m, w)) = descend(n, &v, p) {
                    n = m;
                    v = w;
                    continue 'outer;
                }
            }
            break;
        }
        debug_assert!({
            let primes = factor(n);
            v.iter().enumerate().all(|(k, c)| c.is_zero() || is_basis_exponent(k as u64, &primes))
        });
        let coeffs = v
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u64, c))
            .collect();
        Cyclotomic { n, coeffs }
    }

    /// Canonical value of `Σ c_k ζ_n^k`; exponents are taken modulo `n`.
    pub fn from_terms<I>(n: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = (u64, Rational)>,
    {
        assert!(n >= 1, "conductor must be positive");
        let mut v = vec![Rational::zero(); n as usize];
        for (k, c) in terms {
            v[(k % n) as usize] += c;
        }
        Self::from_dense(n, v)
    }

    pub fn zero() -> Self {
        Cyclotomic { n: 1, coeffs: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_integer(v: i64) -> Self {
        Self::from_rational(int(v))
    }

    pub fn from_rational(r: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(0, r);
        }
        Cyclotomic { n: 1, coeffs }
    }

    /// `ζ_n^k`.
    pub fn root_of_unity(n: u64, k: u64) -> Self {
        Self::from_terms(n, [(k, Rational::one())])
    }

    /// Smallest `n` with the value in `Q(ζ_n)`.
    pub fn conductor(&self) -> u64 {
        self.n
    }

    /// Canonical `(exponent, coefficient)` pairs, sorted by exponent.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.n == 1
    }

    pub fn to_rational(&self) -> Result<Rational, ExactError> {
        if self.n == 1 {
            Ok(self.coeffs.get(&0).cloned().unwrap_or_else(Rational::zero))
        } else {
            Err(ExactError::NotRational(self.to_string()))
        }
    }

    /// Integer value, if the element is a rational integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        let r = self.to_rational().ok()?;
        r.is_integer().then(|| r.to_integer())
    }

    pub fn is_real(&self) -> bool {
        self.conj() == *self
    }

    /// Lift to conductor `n` (a multiple of the current one) as a dense vector.
    fn dense_at(&self, n: u64) -> Vec<Rational> {
        debug_assert_eq!(n % self.n, 0);
        let f = n / self.n;
        let mut v = vec![Rational::zero(); n as usize];
        for (k, c) in &self.coeffs {
            v[(k * f) as usize] += c;
        }
        v
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Cyclotomic {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c * r)).collect(),
        }
    }

    /// Image under the automorphism `ζ_n ↦ ζ_n^k`, `n` the conductor.
    pub fn galois(&self, k: i64) -> Result<Self, ExactError> {
        let n = self.n;
        let kk = k.rem_euclid(n as i64) as u64;
        if n > 1 && kk.gcd(&n) != 1 {
            return Err(ExactError::NotCoprime { k, n });
        }
        if n == 1 {
            return Ok(self.clone());
        }
        Ok(Self::from_terms(
            n,
            self.coeffs
                .iter()
                .map(|(e, c)| ((*e as u128 * kk as u128 % n as u128) as u64, c.clone())),
        ))
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        self.galois(-1).expect("-1 is a unit")
    }

    /// `x · conj(x)`, which is always real.
    pub fn norm_sq(&self) -> Self {
        self * &self.conj()
    }

    /// Parse the text grammar, refusing conductors above `cap`.
    pub fn parse_with_cap(s: &str, cap: u64) -> Result<Self, ExactError> {
        parse(s, cap)
    }
}

impl Default for Cyclotomic {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Cyclotomic {
    fn from(v: i64) -> Self {
        Self::from_integer(v)
    }
}

impl From<Rational> for Cyclotomic {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

fn add_impl(a: &Cyclotomic, b: &Cyclotomic, sign: bool) -> Cyclotomic {
    if b.is_zero() {
        return a.clone();
    }
    if a.n == 1 && b.n == 1 {
        let x = a.to_rational().unwrap();
        let y = b.to_rational().unwrap();
        return Cyclotomic::from_rational(if sign { x - y } else { x + y });
    }
    let n = a.n.lcm(&b.n);
    let mut v = a.dense_at(n);
    let f = n / b.n;
    for (k, c) in &b.coeffs {
        if sign {
            v[(k * f) as usize] -= c;
        } else {
            v[(k * f) as usize] += c;
        }
    }
    Cyclotomic::from_dense(n, v)
}

fn mul_impl(a: &Cyclotomic, b: &Cyclotomic) -> Cyclotomic {
    if a.is_zero() || b.is_zero() {
        return Cyclotomic::zero();
    }
    if a.n == 1 {
        return b.scale(&a.to_rational().unwrap());
    }
    if b.n == 1 {
        return a.scale(&b.to_rational().unwrap());
    }
    let n = a.n.lcm(&b.n);
    let (fa, fb) = (n / a.n, n / b.n);
    let mut v = vec![Rational::zero(); n as usize];
    for (i, x) in &a.coeffs {
        for (j, y) in &b.coeffs {
            v[((i * fa + j * fb) % n) as usize] += x * y;
        }
    }
    Cyclotomic::from_dense(n, v)
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Cyclotomic> for &Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: &Cyclotomic) -> Cyclotomic {
                $body(self, rhs)
            }
        }
        impl $tr<Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: Cyclotomic) -> Cyclotomic {
                $body(&self, &rhs)
            }
        }
        impl $tr<&Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: &Cyclotomic) -> Cyclotomic {
                $body(&self, rhs)
            }
        }
        impl $tr<Cyclotomic> for &Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: Cyclotomic) -> Cyclotomic {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| add_impl(a, b, false));
binop!(Sub, sub, |a, b| add_impl(a, b, true));
binop!(Mul, mul, mul_impl);

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

impl AddAssign<&Cyclotomic> for Cyclotomic {
    fn add_assign(&mut self, rhs: &Cyclotomic) {
        *self = add_impl(self, rhs, false);
    }
}

/// Sums many terms at a shared conductor and canonicalizes once; much cheaper
/// than repeated `+` when adding up a character table column.
#[derive(Debug, Clone)]
pub struct Accumulator {
    n: u64,
    v: Vec<Rational>,
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator { n: 1, v: vec![Rational::zero()] }
    }
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `weight · x`.
    pub fn add_scaled(&mut self, x: &Cyclotomic, weight: &Rational) {
        if x.is_zero() || weight.is_zero() {
            return;
        }
        if !self.n.is_multiple_of(x.n) {
            let n = self.n.lcm(&x.n);
            let old = std::mem::take(&mut self.v);
            self.v = embed(self.n, &old, n);
            self.n = n;
        }
        let f = self.n / x.n;
        for (k, c) in &x.coeffs {
            self.v[(k * f) as usize] += c * weight;
        }
    }

    pub fn finish(self) -> Cyclotomic {
        Cyclotomic::from_dense(self.n, self.v)
    }
}

impl std::iter::Sum for Cyclotomic {
    fn sum<I: Iterator<Item = Cyclotomic>>(iter: I) -> Self {
        let mut acc = Accumulator::new();
        let one = Rational::one();
        for x in iter {
            acc.add_scaled(&x, &one);
        }
        acc.finish()
    }
}

fn write_coeff_term(f: &mut fmt::Formatter<'_>, first: bool, c: &Rational, atom: Option<String>) -> fmt::Result {
    let neg = c.is_negative();
    let mag = c.abs();
    if neg {
        f.write_str("-")?;
    } else if !first {
        f.write_str("+")?;
    }
    match atom {
        None => write!(f, "{}", mag),
        Some(a) if mag.is_one() => f.write_str(&a),
        Some(a) => write!(f, "{}*{}", mag, a),
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in &self.coeffs {
            let atom = (*k != 0).then(|| format!("z{}^{}", self.n, k));
            write_coeff_term(f, first, c, atom)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic({})", self)
    }
}

impl FromStr for Cyclotomic {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s, DEFAULT_CONDUCTOR_CAP)
    }
}

impl serde::Serialize for Cyclotomic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Serialize a rational in its exact `a/b` text form (for `#[serde(serialize_with)]`).
pub fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn parse(input: &str, cap: u64) -> Result<Cyclotomic, ExactError> {
    let err = |reason: &str| ExactError::Parse { input: input.to_string(), reason: reason.to_string() };
    let s = input.as_bytes();
    if s.is_empty() {
        return Err(err("empty value"));
    }
    let mut i = 0;
    let digits = |i: &mut usize| -> Option<BigInt> {
        let start = *i;
        while *i < s.len() && s[*i].is_ascii_digit() {
            *i += 1;
        }
        (start < *i).then(|| input[start..*i].parse().unwrap())
    };
    // Terms are collected per root order and combined at the lcm.
    let mut terms: Vec<(u64, u64, Rational)> = Vec::new();
    let mut first = true;
    while i < s.len() {
        let mut sign = 1;
        match s[i] {
            b'+' | b'-' => {
                if s[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            }
            _ if !first => return Err(err("expected `+` or `-` between terms")),
            _ => {}
        }
        first = false;
        let mut coeff = Rational::one();
        let mut have_coeff = false;
        if let Some(num) = digits(&mut i) {
            have_coeff = true;
            coeff = Rational::from_integer(num);
            if i < s.len() && s[i] == b'/' {
                i += 1;
                let den = digits(&mut i).ok_or_else(|| err("missing denominator"))?;
                if den.is_zero() {
                    return Err(err("zero denominator"));
                }
                coeff /= Rational::from_integer(den);
            }
            if i < s.len() && s[i] == b'*' {
                i += 1;
                if i >= s.len() || s[i] != b'z' {
                    return Err(err("expected `z<n>^<k>` after `*`"));
                }
            }
        }
        if sign < 0 {
            coeff = -coeff;
        }
        if i < s.len() && s[i] == b'z' {
            i += 1;
            let n = digits(&mut i).ok_or_else(|| err("missing root order after `z`"))?;
            let n = n.to_u64().filter(|n| *n >= 1).ok_or_else(|| err("invalid root order"))?;
            if n > cap {
                return Err(ExactError::ConductorCap { n, cap });
            }
            let k = if i < s.len() && s[i] == b'^' {
                i += 1;
                let k = digits(&mut i).ok_or_else(|| err("missing exponent after `^`"))?;
                (k % BigInt::from(n)).to_u64().unwrap()
            } else {
                1
            };
            terms.push((n, k, coeff));
        } else if have_coeff {
            terms.push((1, 0, coeff));
        } else {
            return Err(err("expected a number or `z<n>^<k>`"));
        }
    }
    let n = terms.iter().fold(1u64, |acc, t| acc.lcm(&t.0));
    Ok(Cyclotomic::from_terms(n, terms.into_iter().map(|(m, k, c)| (k * (n / m), c))))
}
