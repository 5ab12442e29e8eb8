//! Node counts from the Bell-polynomial algorithm: `N(A1^m)` is the sum over
//! the monomials of the complete Bell polynomial `P_m` of products of the
//! universal classes `b_i`, each placed at its own point.
//!
//! This is an independent route to the ordered counts of
//! [`crate::recursion`], used as a cross-check.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::chern::ring_spec;
use crate::classes::{build_classes, ClassLibrary};
use crate::error::{Error, Result};
use crate::ring::{
    mul, pow, product, top_coefficient, Monomial, Polynomial, RingSpec, NILPOTENT_CAP,
};
use crate::singularity::Configuration;

/// Largest `m` for which `b_m` is tabulated.
pub const MAX_NODES: u32 = 4;

/// `(coefficient, v, w1, w2)` exponents of `b_1 .. b_4`.
const B_TERMS: [&[(i64, u32, u32, u32)]; 4] = [
    &[(1, 3, 0, 0), (1, 2, 1, 0), (1, 1, 0, 1)],
    &[
        (-7, 4, 0, 0),
        (-13, 3, 1, 0),
        (-6, 2, 2, 0),
        (-7, 2, 0, 1),
        (-6, 1, 1, 1),
    ],
    &[
        (138, 5, 0, 0),
        (394, 4, 1, 0),
        (376, 3, 2, 0),
        (138, 3, 0, 1),
        (120, 2, 3, 0),
        (256, 2, 1, 1),
        (120, 1, 2, 1),
    ],
    &[
        (-4824, 6, 0, 0),
        (-19134, 5, 1, 0),
        (-28842, 4, 2, 0),
        (-3888, 4, 0, 1),
        (-19572, 3, 3, 0),
        (-12438, 3, 1, 1),
        (-5040, 2, 4, 0),
        (-13596, 2, 2, 1),
        (936, 2, 0, 2),
        (-5040, 1, 3, 1),
        (936, 1, 1, 2),
    ],
];

/// One monomial `coefficient · a_{p1} a_{p2} ...` of a Bell polynomial; part
/// `j` goes to point `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellTerm {
    pub coefficient: u64,
    /// Non-increasing.
    pub parts: Vec<u32>,
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

fn partitions(n: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    for p in (1..=max_part.min(n)).rev() {
        prefix.push(p);
        partitions(n - p, p, prefix, out);
        prefix.pop();
    }
}

/// Monomials of the complete Bell polynomial `P_m`: the coefficient of a
/// partition counts the set partitions of `{1..m}` with those block sizes.
pub fn bell_terms(m: u32) -> Vec<BellTerm> {
    let mut parts = Vec::new();
    partitions(m, m, &mut Vec::new(), &mut parts);
    parts
        .into_iter()
        .map(|parts| {
            let mut multiplicity: BTreeMap<u32, u32> = BTreeMap::new();
            for &p in &parts {
                *multiplicity.entry(p).or_default() += 1;
            }
            let denom: u64 = parts.iter().map(|&p| factorial(p)).product::<u64>()
                * multiplicity
                    .values()
                    .map(|&k| factorial(k))
                    .product::<u64>();
            BellTerm {
                coefficient: factorial(m) / denom,
                parts,
            }
        })
        .collect()
}

/// `b_i(v, w1, w2)` at the given point, with `v = λ + d H`, `w1 = a - 3H`,
/// `w2 = a^2 - 2aH + 3H^2`.
pub fn bell_b(i: u32, point: usize, lib: &ClassLibrary) -> Result<Polynomial> {
    if !(1..=MAX_NODES).contains(&i) {
        return Err(Error::Unsupported(format!(
            "b_{i} is only known for 1 <= i <= {MAX_NODES}"
        )));
    }
    let spec = lib.spec();
    let (v, w1, w2) = (lib.v(point)?, lib.w1(point)?, lib.w2(point)?);
    let mut total = Polynomial::zero(spec);
    for &(c, ev, e1, e2) in B_TERMS[(i - 1) as usize] {
        let term = product(
            [
                &pow(&v, ev, spec)?,
                &pow(&w1, e1, spec)?,
                &pow(&w2, e2, spec)?,
            ],
            spec,
        )?;
        total = total.add(&term.scale(c))?;
    }
    Ok(total)
}

/// Evaluates Bell terms against `H_L^r H_p^s` for fixed `(d, r, s)`.
///
/// The point factors `(a + H_i) b_{p_i}` are multiplied first. Only their
/// monomials with every `H_i` at the cap survive extraction, and against the
/// point-free conditions each such `a^i λ^j` contributes a smooth count.
pub struct KpEvaluator {
    d: u32,
    plain: RingSpec,
    conditions: Polynomial,
}

impl KpEvaluator {
    pub fn new(d: u32, r: u32, s: u32) -> Result<Self> {
        let plain = ring_spec(d, 0)?;
        let conditions = build_classes(&plain).conditions(r, s)?;
        Ok(KpEvaluator {
            d,
            plain,
            conditions,
        })
    }

    /// `∫ ∏_j (a + H_{point_j}) b_{parts_j}(point_j) · H_L^r H_p^s`, with
    /// `points[j]` the point carrying part `j`.
    pub fn integral(&self, parts: &[u32], points: &[usize]) -> Result<BigInt> {
        let k = parts.len();
        if points.len() != k {
            return Err(Error::InvalidArgument("one point per part".into()));
        }
        let spec = ring_spec(self.d, k)?;
        let lib = build_classes(&spec);
        let mut factors = Vec::with_capacity(2 * k);
        for (&part, &point) in parts.iter().zip(points) {
            factors.push(lib.incidence(point)?);
            factors.push(bell_b(part, point, &lib)?);
        }
        let local = product(factors.iter(), &spec)?;

        let mut total = BigInt::zero();
        for (m, c) in local.terms() {
            if m.h[..k].iter().any(|&e| e as u32 != NILPOTENT_CAP) {
                continue;
            }
            let ins = Polynomial::term(&self.plain, 1, Monomial::new(m.a as u32, m.lambda, &[]));
            let top = top_coefficient(&mul(&self.conditions, &ins, &self.plain)?, &self.plain);
            total += c * top;
        }
        Ok(total)
    }
}

/// Ordered `N(A1^m; r, s)` by the Bell-polynomial algorithm.
pub fn kp_nodal(d: u32, m: u32, r: u32, s: u32) -> Result<BigInt> {
    if !(1..=MAX_NODES).contains(&m) {
        return Err(Error::Unsupported(format!(
            "the Bell-class algorithm covers 1 <= m <= {MAX_NODES}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidArgument(
            "curve degree must be positive".into(),
        ));
    }
    let config = Configuration::nodes(m);
    if config.condition_budget(d) != Some(r + 2 * s) {
        return Err(Error::Dimension(format!(
            "r + 2s must equal d(d+3)/2 + 3 - m for d = {d}, m = {m}, got {}",
            r + 2 * s
        )));
    }
    let eval = KpEvaluator::new(d, r, s)?;
    let mut total = BigInt::zero();
    for term in bell_terms(m) {
        let points: Vec<usize> = (0..term.parts.len()).collect();
        total += eval.integral(&term.parts, &points)? * BigInt::from(term.coefficient);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::n_a1_direct;

    fn term(coefficient: u64, parts: &[u32]) -> BellTerm {
        BellTerm {
            coefficient,
            parts: parts.to_vec(),
        }
    }

    #[test]
    fn bell_polynomials_up_to_four() {
        assert_eq!(bell_terms(1), vec![term(1, &[1])]);
        assert_eq!(bell_terms(2), vec![term(1, &[2]), term(1, &[1, 1])]);
        assert_eq!(
            bell_terms(3),
            vec![term(1, &[3]), term(3, &[2, 1]), term(1, &[1, 1, 1])]
        );
        assert_eq!(
            bell_terms(4),
            vec![
                term(1, &[4]),
                term(4, &[3, 1]),
                term(3, &[2, 2]),
                term(6, &[2, 1, 1]),
                term(1, &[1, 1, 1, 1]),
            ]
        );
        // Bell numbers
        let totals: Vec<u64> = (1..=6)
            .map(|m| bell_terms(m).iter().map(|t| t.coefficient).sum())
            .collect();
        assert_eq!(totals, vec![1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn first_class_is_the_node_euler_class() {
        for d in 1..=5 {
            let spec = ring_spec(d, 1).unwrap();
            let lib = build_classes(&spec);
            assert_eq!(bell_b(1, 0, &lib).unwrap(), lib.euler_a1(0).unwrap());
        }
    }

    #[test]
    fn second_class_leading_term() {
        let spec = ring_spec(3, 1).unwrap();
        let lib = build_classes(&spec);
        let b2 = bell_b(2, 0, &lib).unwrap();
        assert_eq!(b2.coefficient(&Monomial::new(0, 4, &[0])), BigInt::from(-7));
        assert!(bell_b(5, 0, &lib).is_err());
        assert!(bell_b(0, 0, &lib).is_err());
    }

    #[test]
    fn one_node_values() {
        assert_eq!(kp_nodal(4, 1, 16, 0).unwrap(), BigInt::from(258300));
        assert_eq!(kp_nodal(2, 1, 1, 3).unwrap(), BigInt::from(3));
        for d in 1..=5 {
            for s in 0..=3 {
                let Some(r) = Configuration::nodes(1).r_for(d, s) else {
                    continue;
                };
                assert_eq!(
                    kp_nodal(d, 1, r, s).unwrap(),
                    n_a1_direct(d, r, s, 0, 0, 0).unwrap()
                );
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(kp_nodal(9, 5, 10, 3), Err(Error::Unsupported(_))));
        assert!(matches!(kp_nodal(4, 2, 16, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn point_labels_are_exchangeable() {
        let eval = KpEvaluator::new(5, 15, 3).unwrap();
        let base = eval.integral(&[2, 1], &[0, 1]).unwrap();
        assert_eq!(eval.integral(&[2, 1], &[1, 0]).unwrap(), base);
        assert_eq!(eval.integral(&[1, 2], &[0, 1]).unwrap(), base);
        let eval = KpEvaluator::new(6, 23, 2).unwrap();
        let base = eval.integral(&[2, 1, 1], &[0, 1, 2]).unwrap();
        for perm in [[1, 2, 0], [2, 0, 1], [0, 2, 1]] {
            assert_eq!(eval.integral(&[2, 1, 1], &perm).unwrap(), base);
        }
    }

    #[test]
    fn two_nodes_agree_with_the_recursion() {
        let e = crate::recursion::Engine::new();
        let cond = crate::recursion::Conditions::new(4, 15, 0);
        let want = e
            .eval_node_series(1, cond, crate::recursion::Insertions::NONE)
            .unwrap();
        assert_eq!(kp_nodal(4, 2, 15, 0).unwrap(), want);
    }
}
