//! Standard classes on the curve space and the two intersection numbers that
//! are evaluated directly from the ring: the smooth count `N(r, s, n1, n2)` and
//! the one-node count `N(A1, r, s, n1, n2, n3)`.

use num_bigint::BigInt;

use crate::chern::ring_spec;
use crate::error::{Error, Result};
use crate::ring::{mul, pow, product, top_coefficient, Polynomial, RingSpec};

/// Divisor class used for "the marked point lies on the marked plane".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Incidence {
    /// `a + H`, the Euler class of `γ*_{P̂³} ⊗ γ*_{P³}`.
    #[default]
    PlanePoint,
    /// `λ + H`, kept for the disambiguation check only.
    LambdaPoint,
}

/// Classes built once per ring.
#[derive(Debug, Clone)]
pub struct ClassLibrary {
    spec: RingSpec,
    /// Curves meeting a line: `λ + d a`.
    pub h_l: Polynomial,
    /// Curves through a point: `λ a`.
    pub h_p: Polynomial,
}

pub fn build_classes(spec: &RingSpec) -> ClassLibrary {
    let a = Polynomial::a(spec);
    let lambda = Polynomial::lambda(spec);
    let h_l = lambda.add(&a.scale(spec.d)).expect("same ring");
    let h_p = mul(&lambda, &a, spec).expect("same ring");
    ClassLibrary {
        spec: spec.clone(),
        h_l,
        h_p,
    }
}

impl ClassLibrary {
    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    fn h(&self, i: usize) -> Result<Polynomial> {
        Polynomial::h(&self.spec, i)
    }

    /// `a + H_i`.
    pub fn incidence(&self, i: usize) -> Result<Polynomial> {
        self.incidence_with(i, Incidence::PlanePoint)
    }

    pub fn incidence_with(&self, i: usize, kind: Incidence) -> Result<Polynomial> {
        let h = self.h(i)?;
        match kind {
            Incidence::PlanePoint => Polynomial::a(&self.spec).add(&h),
            Incidence::LambdaPoint => Polynomial::lambda(&self.spec).add(&h),
        }
    }

    /// `v = λ + d H_i`.
    pub fn v(&self, i: usize) -> Result<Polynomial> {
        Polynomial::lambda(&self.spec).add(&self.h(i)?.scale(self.spec.d))
    }

    /// `w1 = a - 3 H_i = -c1(W)`.
    pub fn w1(&self, i: usize) -> Result<Polynomial> {
        Polynomial::a(&self.spec).sub(&self.h(i)?.scale(3))
    }

    /// `w2 = a^2 - 2 a H_i + 3 H_i^2 = c2(W)`.
    pub fn w2(&self, i: usize) -> Result<Polynomial> {
        let sp = &self.spec;
        let a = Polynomial::a(sp);
        let h = self.h(i)?;
        mul(&a, &a, sp)?
            .sub(&mul(&a, &h, sp)?.scale(2))?
            .add(&mul(&h, &h, sp)?.scale(3))
    }

    /// Euler class of the node conditions at point `i`:
    /// `(λ + dH)((λ + dH)^2 - (3H - a)(λ + dH) + a^2 - 2aH + 3H^2)`.
    pub fn euler_a1(&self, i: usize) -> Result<Polynomial> {
        let sp = &self.spec;
        let v = self.v(i)?;
        let h = self.h(i)?;
        let c1_w = h.scale(3).sub(&Polynomial::a(sp))?;
        let inner = mul(&v, &v, sp)?
            .sub(&mul(&c1_w, &v, sp)?)?
            .add(&self.w2(i)?)?;
        mul(&v, &inner, sp)
    }

    /// `H_L^r H_p^s`.
    pub fn conditions(&self, r: u32, s: u32) -> Result<Polynomial> {
        let sp = &self.spec;
        mul(&pow(&self.h_l, r, sp)?, &pow(&self.h_p, s, sp)?, sp)
    }
}

/// `N(r, s, n1, n2)`: coefficient of `a^3 λ^(n-1)` in
/// `(λ + d a)^r (λ a)^s a^n1 λ^n2`.
pub fn n_plain(d: u32, r: u32, s: u32, n1: u32, n2: u32) -> Result<BigInt> {
    let spec = ring_spec(d, 0)?;
    let lib = build_classes(&spec);
    let p = mul(
        &lib.conditions(r, s)?,
        &Polynomial::insertion(&spec, n1, n2, 0),
        &spec,
    )?;
    Ok(top_coefficient(&p, &spec))
}

/// The integrand of the one-node count with the insertions factored out:
/// `incidence · H_L^r · H_p^s · euler_A1` in the one-point ring.
#[derive(Debug, Clone)]
pub struct NodeIntegrand {
    spec: RingSpec,
    base: Polynomial,
}

impl NodeIntegrand {
    pub fn new(d: u32, r: u32, s: u32) -> Result<Self> {
        Self::with_incidence(d, r, s, Incidence::PlanePoint)
    }

    pub fn with_incidence(d: u32, r: u32, s: u32, incidence: Incidence) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "curve degree must be positive".into(),
            ));
        }
        let spec = ring_spec(d, 1)?;
        let lib = build_classes(&spec);
        let base = product(
            [
                &lib.incidence_with(0, incidence)?,
                &lib.conditions(r, s)?,
                &lib.euler_a1(0)?,
            ],
            &spec,
        )?;
        Ok(NodeIntegrand { spec, base })
    }

    /// `N(A1, r, s, n1, n2, n3)`.
    pub fn evaluate(&self, n1: u32, n2: u32, n3: u32) -> Result<BigInt> {
        let ins = Polynomial::insertion(&self.spec, n1, n2, n3);
        Ok(top_coefficient(
            &mul(&self.base, &ins, &self.spec)?,
            &self.spec,
        ))
    }
}

/// `N(A1, r, s, n1, n2, n3)`: coefficient of `λ^(n-1) a^3 H^3` in
/// `(a + H) H_L^r H_p^s a^n1 λ^n2 H^n3 · euler_A1`.
pub fn n_a1_direct(d: u32, r: u32, s: u32, n1: u32, n2: u32, n3: u32) -> Result<BigInt> {
    NodeIntegrand::new(d, r, s)?.evaluate(n1, n2, n3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Monomial;

    #[test]
    fn line_class_for_cubics() {
        let spec = ring_spec(3, 1).unwrap();
        let lib = build_classes(&spec);
        let mut want = Polynomial::lambda(&spec);
        want = want.add(&Polynomial::a(&spec).scale(3)).unwrap();
        assert_eq!(lib.h_l, want);
        assert_eq!(
            lib.h_p,
            Polynomial::term(&spec, 1, Monomial::new(1, 1, &[0]))
        );
    }

    #[test]
    fn w2_expansion() {
        let spec = ring_spec(2, 1).unwrap();
        let lib = build_classes(&spec);
        let w2 = lib.w2(0).unwrap();
        assert_eq!(w2.to_string(), "3*H1^2 - 2*a^1*H1^1 + 1*a^2");
    }

    #[test]
    fn euler_class_is_first_bell_class() {
        for d in 1..=6 {
            let spec = ring_spec(d, 1).unwrap();
            let lib = build_classes(&spec);
            let (v, w1, w2) = (lib.v(0).unwrap(), lib.w1(0).unwrap(), lib.w2(0).unwrap());
            let v2 = mul(&v, &v, &spec).unwrap();
            let b1 = pow(&v, 3, &spec)
                .unwrap()
                .add(&mul(&v2, &w1, &spec).unwrap())
                .unwrap()
                .add(&mul(&v, &w2, &spec).unwrap())
                .unwrap();
            assert_eq!(lib.euler_a1(0).unwrap(), b1, "d = {d}");
        }
    }

    #[test]
    fn point_classes_need_points() {
        let spec = ring_spec(3, 0).unwrap();
        let lib = build_classes(&spec);
        assert!(matches!(lib.incidence(0), Err(Error::Structural(_))));
        let spec = ring_spec(3, 2).unwrap();
        let lib = build_classes(&spec);
        assert!(lib.incidence(1).is_ok());
        assert!(lib.incidence(2).is_err());
    }

    #[test]
    fn smooth_counts() {
        assert_eq!(n_plain(2, 2, 3, 0, 0).unwrap(), BigInt::from(1));
        assert_eq!(n_plain(3, 8, 2, 0, 0).unwrap(), BigInt::from(14));
        assert_eq!(n_plain(2, 6, 1, 0, 0).unwrap(), BigInt::from(18));
        // a^4 = 0 and degree mismatch
        assert_eq!(n_plain(3, 4, 2, 4, 0).unwrap(), BigInt::from(0));
        assert_eq!(n_plain(3, 7, 2, 0, 0).unwrap(), BigInt::from(0));
    }

    #[test]
    fn one_node_counts() {
        assert_eq!(n_a1_direct(2, 1, 3, 0, 0, 0).unwrap(), BigInt::from(3));
        assert_eq!(n_a1_direct(4, 10, 3, 0, 0, 0).unwrap(), BigInt::from(27));
        assert_eq!(
            n_a1_direct(4, 16, 0, 0, 0, 0).unwrap(),
            BigInt::from(258300)
        );
        assert_eq!(n_a1_direct(4, 10, 3, 0, 0, 4).unwrap(), BigInt::from(0));
    }

    #[test]
    fn literal_lambda_incidence_gives_five() {
        let p = NodeIntegrand::with_incidence(2, 1, 3, Incidence::LambdaPoint).unwrap();
        assert_eq!(p.evaluate(0, 0, 0).unwrap(), BigInt::from(5));
    }
}
