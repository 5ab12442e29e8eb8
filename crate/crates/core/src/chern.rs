//! Chern numbers of `Sym^d` of the dual tautological 3-plane bundle over the
//! dual projective space, computed from formal Chern roots.
//!
//! With roots `x1, x2, x3` satisfying `e1 = a`, `e2 = a^2`, `e3 = a^3`, the
//! bundle `Sym^d` has roots `i x1 + j x2 + k x3` for `i + j + k = d`. Power sums
//! of these roots are expanded as symmetric polynomials in the `x`, rewritten
//! through the monomial symmetric basis in terms of `e1, e2, e3` via Newton's
//! identities, and converted back to elementary symmetric values (the Chern
//! classes) with Newton's identities again.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::ring::{RingSpec, MAX_POINTS};

/// `c(Sym^d γ*) = 1 + s1 a + s2 a^2 + s3 a^3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymChern {
    pub d: u32,
    pub s1: BigInt,
    pub s2: BigInt,
    pub s3: BigInt,
}

impl SymChern {
    pub fn as_array(&self) -> [BigInt; 3] {
        [self.s1.clone(), self.s2.clone(), self.s3.clone()]
    }
}

type Exponents = [u32; 3];

/// Power sum `Σ_{i+j+k=d} (i x1 + j x2 + k x3)^m` as a polynomial in the `x`.
fn root_power_sum(d: u32, m: u32) -> BTreeMap<Exponents, BigInt> {
    let mut out: BTreeMap<Exponents, BigInt> = BTreeMap::new();
    for i in 0..=d {
        for j in 0..=d - i {
            let k = d - i - j;
            // multinomial expansion of (i x1 + j x2 + k x3)^m
            for p in 0..=m {
                for q in 0..=m - p {
                    let r = m - p - q;
                    let coeff = binomial(BigInt::from(m), BigInt::from(p))
                        * binomial(BigInt::from(m - p), BigInt::from(q))
                        * BigInt::from(i).pow(p)
                        * BigInt::from(j).pow(q)
                        * BigInt::from(k).pow(r);
                    if !coeff.is_zero() {
                        *out.entry([p, q, r]).or_default() += coeff;
                    }
                }
            }
        }
    }
    out
}

/// Values of the power sums `p_1, p_2, p_3` of `x1, x2, x3` (as multiples of
/// `a^m`) from Newton's identities with `e_m = 1`.
fn x_power_sums() -> [BigRational; 4] {
    let e = [
        BigRational::one(),
        BigRational::one(),
        BigRational::one(),
        BigRational::one(),
    ];
    let mut p: [BigRational; 4] = Default::default();
    p[0] = BigRational::from_integer(3.into());
    // p_m = Σ_{i=1}^{m-1} (-1)^(i-1) e_i p_{m-i} + (-1)^(m-1) m e_m
    for m in 1..=3usize {
        let mut acc = BigRational::zero();
        for i in 1..m {
            let term = &e[i] * &p[m - i];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let last = &e[m] * BigRational::from_integer((m as i64).into());
        if m % 2 == 1 {
            acc += last;
        } else {
            acc -= last;
        }
        p[m] = acc;
    }
    p
}

/// Value of the monomial symmetric function `m_λ(x1, x2, x3)` for the
/// partitions of weight at most three.
fn monomial_symmetric_value(partition: &[u32], p: &[BigRational; 4]) -> BigRational {
    let two = BigRational::from_integer(2.into());
    let three = BigRational::from_integer(3.into());
    let six = BigRational::from_integer(6.into());
    match partition {
        [m] => p[*m as usize].clone(),
        [1, 1] => (&p[1] * &p[1] - &p[2]) / two,
        [2, 1] => &p[1] * &p[2] - &p[3],
        [1, 1, 1] => (&p[1] * &p[1] * &p[1] - three * &p[1] * &p[2] + two * &p[3]) / six,
        _ => unreachable!("partition {partition:?} has weight above three"),
    }
}

/// Rewrites a symmetric polynomial of degree `m <= 3` in `x` as an integer
/// multiple of `a^m`.
fn evaluate_symmetric(poly: &BTreeMap<Exponents, BigInt>, p: &[BigRational; 4]) -> BigRational {
    let mut total = BigRational::zero();
    // Each orbit is represented by its sorted (descending) exponent vector.
    for (exps, coeff) in poly {
        let mut sorted = *exps;
        sorted.sort_unstable_by(|x, y| y.cmp(x));
        if sorted != *exps {
            continue;
        }
        let partition: Vec<u32> = sorted.iter().copied().filter(|&e| e > 0).collect();
        if partition.is_empty() {
            continue;
        }
        total += BigRational::from_integer(coeff.clone()) * monomial_symmetric_value(&partition, p);
    }
    total
}

fn exact_integer(q: BigRational, what: &str) -> BigInt {
    assert!(q.is_integer(), "{what} is not an integer: {q}");
    q.to_integer()
}

/// Chern numbers `(s1, s2, s3)` of `Sym^d` for `d >= 1`.
pub fn sym_cubic_chern(d: u32) -> SymChern {
    assert!(d >= 1, "curve degree must be positive");
    let p = x_power_sums();
    let root_sums: Vec<BigRational> = (1..=3)
        .map(|m| evaluate_symmetric(&root_power_sum(d, m), &p))
        .collect();
    let (p1, p2, p3) = (&root_sums[0], &root_sums[1], &root_sums[2]);

    // Newton's identities on the root side: c1 = p1, 2 c2 = c1 p1 - p2,
    // 3 c3 = c2 p1 - c1 p2 + p3.
    let c1 = p1.clone();
    let c2 = (&c1 * p1 - p2) / BigRational::from_integer(2.into());
    let c3 = (&c2 * p1 - &c1 * p2 + p3) / BigRational::from_integer(3.into());

    SymChern {
        d,
        s1: exact_integer(c1, "c1"),
        s2: exact_integer(c2, "c2"),
        s3: exact_integer(c3, "c3"),
    }
}

/// A widely quoted closed form for `s2`; wrong at `d = 1`, kept for that check.
pub fn quoted_s2(d: u32) -> BigRational {
    let d = BigInt::from(d);
    let num = &d * (&d + 1) * (&d + 2) * (&d + 3) * (&d * &d + 2);
    BigRational::new(num, 6.into())
}

/// Independent check of [`sym_cubic_chern`]: with `a = 1` the formal roots
/// are the roots of `t^3 - t^2 + t - 1`, namely `1, i, -i`, so the roots of
/// `Sym^d` are the Gaussian integers `i + (j - k) i`. Expands `∏ (1 + t z)`
/// up to `t^3` directly.
pub fn chern_by_gaussian_roots(d: u32) -> [BigInt; 3] {
    let mut e: [(BigInt, BigInt); 4] = Default::default();
    e[0].0 = BigInt::one();
    for i in 0..=d as i64 {
        for j in 0..=(d as i64 - i) {
            let k = d as i64 - i - j;
            let (zr, zi) = (BigInt::from(i), BigInt::from(j - k));
            for m in (1..=3).rev() {
                let (re, im) = e[m - 1].clone();
                e[m].0 += &re * &zr - &im * &zi;
                e[m].1 += &re * &zi + &im * &zr;
            }
        }
    }
    for (_, im) in &e[1..] {
        assert!(im.is_zero(), "imaginary part survived");
    }
    [e[1].0.clone(), e[2].0.clone(), e[3].0.clone()]
}

/// Ring parameters for curves of degree `d` with `k` marked points.
pub fn ring_spec(d: u32, k: usize) -> Result<RingSpec> {
    if k > MAX_POINTS {
        return Err(crate::Error::Structural(format!(
            "k = {k} exceeds {MAX_POINTS}"
        )));
    }
    if d == 0 {
        return Err(crate::Error::InvalidArgument(
            "curve degree must be positive".into(),
        ));
    }
    RingSpec::new(d, sym_cubic_chern(d).as_array(), k)
}
