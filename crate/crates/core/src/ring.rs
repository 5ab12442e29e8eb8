//! Sparse exact polynomials in `Z[a, λ, H_1..H_k]` modulo
//! `a^4 = 0`, `H_i^4 = 0` and `λ^n = -(s1 a λ^(n-1) + s2 a^2 λ^(n-2) + s3 a^3 λ^(n-3))`.
//!
//! Every polynomial carries the number of point variables it was built for, and
//! arithmetic between polynomials of different rings is rejected. Products are
//! normalized eagerly, so stored polynomials always satisfy the exponent bounds
//! `a <= 3`, `H_i <= 3`, `λ <= n - 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Maximum number of point variables `H_i` supported by a ring.
pub const MAX_POINTS: usize = 4;

/// Largest exponent of `a` or of any `H_i` that survives normalization.
pub const NILPOTENT_CAP: u32 = 3;

/// Parameters of the quotient ring for a fixed curve degree and point count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSpec {
    pub d: u32,
    /// Rank of the space of degree-`d` forms on a plane, `1 + d(d+3)/2`.
    pub n: u32,
    pub s1: BigInt,
    pub s2: BigInt,
    pub s3: BigInt,
    pub k: usize,
}

impl RingSpec {
    pub fn new(d: u32, s: [BigInt; 3], k: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "curve degree must be positive".into(),
            ));
        }
        if k > MAX_POINTS {
            return Err(Error::Structural(format!(
                "at most {MAX_POINTS} point variables are supported, got {k}"
            )));
        }
        let [s1, s2, s3] = s;
        Ok(RingSpec {
            d,
            n: 1 + d * (d + 3) / 2,
            s1,
            s2,
            s3,
            k,
        })
    }

    /// Same curve data with a different number of point variables.
    pub fn with_points(&self, k: usize) -> Result<Self> {
        RingSpec::new(
            self.d,
            [self.s1.clone(), self.s2.clone(), self.s3.clone()],
            k,
        )
    }

    fn chern(&self, i: u32) -> &BigInt {
        match i {
            1 => &self.s1,
            2 => &self.s2,
            _ => &self.s3,
        }
    }

    /// The monomial `a^3 λ^(n-1) ∏ H_i^3` whose coefficient is the intersection number.
    pub fn top_monomial(&self) -> Monomial {
        let mut h = [0u8; MAX_POINTS];
        for e in h.iter_mut().take(self.k) {
            *e = NILPOTENT_CAP as u8;
        }
        Monomial {
            a: NILPOTENT_CAP as u8,
            lambda: self.n - 1,
            h,
        }
    }

    /// Degree of the top class (every generator has degree one).
    pub fn top_degree(&self) -> u32 {
        NILPOTENT_CAP + (self.n - 1) + NILPOTENT_CAP * self.k as u32
    }
}

/// Exponent vector `a^a λ^lambda ∏ H_i^h[i]`.
///
/// The derived order is lexicographic on `(a, lambda, h)`, which fixes the
/// order of terms in serialized output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    pub a: u8,
    pub lambda: u32,
    pub h: [u8; MAX_POINTS],
}

impl Monomial {
    pub fn new(a: u32, lambda: u32, h: &[u32]) -> Self {
        let mut out = Monomial {
            a: clamp(a),
            lambda,
            h: [0; MAX_POINTS],
        };
        for (slot, &e) in out.h.iter_mut().zip(h) {
            *slot = clamp(e);
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.a as u32 + self.lambda + self.h.iter().map(|&e| e as u32).sum::<u32>()
    }

    fn vanishes(&self) -> bool {
        self.a as u32 > NILPOTENT_CAP || self.h.iter().any(|&e| e as u32 > NILPOTENT_CAP)
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut h = [0u8; MAX_POINTS];
        for (i, slot) in h.iter_mut().enumerate() {
            *slot = self.h[i].saturating_add(other.h[i]);
        }
        Monomial {
            a: self.a.saturating_add(other.a),
            lambda: self.lambda + other.lambda,
            h,
        }
    }
}

// Exponents above the cap all behave identically (the monomial is zero), so
// saturating into u8 loses nothing.
fn clamp(e: u32) -> u8 {
    e.min(u8::MAX as u32) as u8
}

/// An element of the ring: a finite map from monomials to nonzero integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    points: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl Polynomial {
    pub fn zero(spec: &RingSpec) -> Self {
        Polynomial {
            points: spec.k,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(spec: &RingSpec) -> Self {
        Self::constant(spec, BigInt::one())
    }

    pub fn constant(spec: &RingSpec, c: impl Into<BigInt>) -> Self {
        Self::term(spec, c, Monomial::default())
    }

    /// A single term. Exponents are not reduced here; call [`normalize`] if
    /// the monomial may lie outside normal form.
    pub fn term(spec: &RingSpec, c: impl Into<BigInt>, m: Monomial) -> Self {
        let mut p = Self::zero(spec);
        p.add_term(m, c.into());
        p
    }

    pub fn a(spec: &RingSpec) -> Self {
        Self::term(spec, 1, Monomial::new(1, 0, &[]))
    }

    pub fn lambda(spec: &RingSpec) -> Self {
        Self::term(spec, 1, Monomial::new(0, 1, &[]))
    }

    /// The point class `H_i` (zero-based index).
    pub fn h(spec: &RingSpec, i: usize) -> Result<Self> {
        if i >= spec.k {
            return Err(Error::Structural(format!(
                "point variable H{} requested in a ring with {} point variables",
                i + 1,
                spec.k
            )));
        }
        let mut m = Monomial::default();
        m.h[i] = 1;
        Ok(Self::term(spec, 1, m))
    }

    /// `a^n1 λ^n2 H_1^n3`, normalized.
    pub fn insertion(spec: &RingSpec, n1: u32, n2: u32, n3: u32) -> Self {
        let h: &[u32] = if spec.k > 0 { &[n3] } else { &[] };
        if spec.k == 0 && n3 > 0 {
            return Self::zero(spec);
        }
        normalize(&Self::term(spec, 1, Monomial::new(n1, n2, h)), spec)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// `Some(g)` when every term has total degree `g`; the zero polynomial is
    /// homogeneous of every degree and reports `None`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        let first = degrees.next()?;
        degrees.all(|g| g == first).then_some(first)
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn check(&self, spec: &RingSpec) -> Result<()> {
        if self.points != spec.k {
            return Err(Error::Structural(format!(
                "polynomial has {} point variables but the ring has {}",
                self.points, spec.k
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.combine(other, BigInt::one())
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.combine(other, -BigInt::one())
    }

    fn combine(&self, other: &Polynomial, sign: BigInt) -> Result<Polynomial> {
        if self.points != other.points {
            return Err(Error::Structural(format!(
                "cannot add polynomials with {} and {} point variables",
                self.points, other.points
            )));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c * &sign);
        }
        Ok(out)
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> Polynomial {
        let c = c.into();
        let mut out = Polynomial {
            points: self.points,
            terms: BTreeMap::new(),
        };
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            out.terms.insert(*m, v * &c);
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(-1)
    }
}

/// Rewrites `p` to its normal form.
///
/// Terms with `a^4` or `H_i^4` are dropped. A term with `λ^m`, `m >= n`, is
/// replaced by `-(s1 a λ^(m-1) + s2 a^2 λ^(m-2) + s3 a^3 λ^(m-3))`; each rewrite
/// raises the power of `a`, so the process stops after at most three rounds.
pub fn normalize(p: &Polynomial, spec: &RingSpec) -> Polynomial {
    let mut out = Polynomial {
        points: p.points,
        terms: BTreeMap::new(),
    };
    for (m, c) in &p.terms {
        push_reduced(&mut out, *m, c.clone(), spec);
    }
    out
}

fn push_reduced(out: &mut Polynomial, m: Monomial, c: BigInt, spec: &RingSpec) {
    if m.vanishes() || c.is_zero() {
        return;
    }
    if m.lambda < spec.n {
        out.add_term(m, c);
        return;
    }
    for i in 1..=NILPOTENT_CAP {
        let s = spec.chern(i);
        if s.is_zero() {
            continue;
        }
        let next = Monomial {
            a: m.a.saturating_add(i as u8),
            lambda: m.lambda - i,
            h: m.h,
        };
        push_reduced(out, next, -(s * &c), spec);
    }
}

/// Normalized product. Commutative and associative on normal forms.
pub fn mul(lhs: &Polynomial, rhs: &Polynomial, spec: &RingSpec) -> Result<Polynomial> {
    lhs.check(spec)?;
    rhs.check(spec)?;
    let mut out = Polynomial::zero(spec);
    for (ml, cl) in &lhs.terms {
        for (mr, cr) in &rhs.terms {
            push_reduced(&mut out, ml.times(mr), cl * cr, spec);
        }
    }
    Ok(out)
}

/// `base^e` by repeated squaring; `pow(p, 0) = 1`.
pub fn pow(base: &Polynomial, e: u32, spec: &RingSpec) -> Result<Polynomial> {
    base.check(spec)?;
    let mut result = Polynomial::one(spec);
    let mut square = base.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &square, spec)?;
        }
        e >>= 1;
        if e > 0 {
            square = mul(&square, &square, spec)?;
        }
    }
    Ok(result)
}

/// Product of several factors, left to right.
pub fn product<'a>(
    factors: impl IntoIterator<Item = &'a Polynomial>,
    spec: &RingSpec,
) -> Result<Polynomial> {
    factors
        .into_iter()
        .try_fold(Polynomial::one(spec), |acc, f| mul(&acc, f, spec))
}

/// Coefficient of `a^3 λ^(n-1) ∏ H_i^3`; zero when that monomial is absent.
pub fn top_coefficient(p: &Polynomial, spec: &RingSpec) -> BigInt {
    if p.points != spec.k {
        return BigInt::zero();
    }
    p.coefficient(&spec.top_monomial())
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors = Vec::new();
        if self.a > 0 {
            factors.push(format!("a^{}", self.a));
        }
        if self.lambda > 0 {
            factors.push(format!("l^{}", self.lambda));
        }
        for (i, &e) in self.h.iter().enumerate() {
            if e > 0 {
                factors.push(format!("H{}^{}", i + 1, e));
            }
        }
        if factors.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", factors.join("*"))
        }
    }
}

/// Terms in ascending monomial order, each with an explicit coefficient,
/// e.g. `-1*a^1*l^2 - 1*a^2*l^1`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            write!(f, "{}*{}", c.abs(), m)?;
        }
        Ok(())
    }
}
