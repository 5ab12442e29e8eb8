//! The recursion tower for `N(A1^δ A1)`, `N(A1^δ 𝒫X, θ)`, `N(A1^δ X̂, θ)` and
//! `N(A1^δ X)`.
//!
//! Every family is reduced to a finite linear combination of other queries
//! (a [`Rule`]); the engine evaluates rules bottom-up with a shared memo table.
//! `N(A1, r, s, n1, n2, n3)` with no extra nodes is the only family read
//! directly off the ring.
//!
//! Each memoized value carries a `proven` bit. With `force` disabled a failed
//! degree guard is an error; with `force` enabled the computation proceeds and
//! every value depending on the failed guard is marked unproven.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::classes::{n_plain, NodeIntegrand};
use crate::error::{Error, Result};
use crate::singularity::{Configuration, Singularity, MAX_CODIM};

/// Hard stop for runaway recursion; the deepest chain on the supported range
/// is far below this.
pub const MAX_DEPTH: usize = 512;

/// Multiplicity of the triple-point boundary, divided by `deg(𝒫D4 → D4)`.
const TRIPLE_POINT_COEFF: i64 = exact_div_const(18, 3);

const fn exact_div_const(num: i64, den: i64) -> i64 {
    assert!(num % den == 0);
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `N(A1^δ A1, r, s, n1, n2, n3)`.
    Nodes,
    /// `N(A1^δ 𝒫X, r, s, n1, n2, n3, θ)`.
    Marked,
    /// `N(A1^δ X̂, r, s, n1, n2, n3, θ)`.
    Hat,
    /// `N(A1^δ X, r, s, n1, n2, n3)`.
    Plain,
}

impl Family {
    fn tag(self) -> &'static str {
        match self {
            Family::Nodes => "NODES",
            Family::Marked => "P",
            Family::Hat => "HAT",
            Family::Plain => "PLAIN",
        }
    }
}

/// Curve degree and the numbers of line and point conditions. These never
/// change along a recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conditions {
    pub d: u32,
    pub r: u32,
    pub s: u32,
}

impl Conditions {
    pub fn new(d: u32, r: u32, s: u32) -> Self {
        Conditions { d, r, s }
    }

    fn di(&self) -> i64 {
        self.d as i64
    }
}

/// Extra insertions `a^n1 λ^n2 H^n3 λ_W^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Insertions {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub theta: u32,
}

impl Insertions {
    pub const NONE: Insertions = Insertions {
        n1: 0,
        n2: 0,
        n3: 0,
        theta: 0,
    };

    pub fn new(n1: u32, n2: u32, n3: u32, theta: u32) -> Self {
        Insertions { n1, n2, n3, theta }
    }

    fn a(self, k: u32) -> Self {
        Insertions {
            n1: self.n1 + k,
            ..self
        }
    }

    fn lambda(self, k: u32) -> Self {
        Insertions {
            n2: self.n2 + k,
            ..self
        }
    }

    fn h(self, k: u32) -> Self {
        Insertions {
            n3: self.n3 + k,
            ..self
        }
    }

    fn theta(self, theta: u32) -> Self {
        Insertions { theta, ..self }
    }

    /// `a^4 = 0` and `H^4 = 0`.
    pub fn vanishes(&self) -> bool {
        self.n1 >= 4 || self.n3 >= 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Query {
    pub family: Family,
    pub sing: Singularity,
    pub delta: u32,
    pub cond: Conditions,
    pub ins: Insertions,
}

impl Query {
    pub fn nodes(delta: u32, cond: Conditions, ins: Insertions) -> Self {
        Query {
            family: Family::Nodes,
            sing: Singularity::A1,
            delta,
            cond,
            ins: ins.theta(0),
        }
    }

    pub fn marked(delta: u32, sing: Singularity, cond: Conditions, ins: Insertions) -> Self {
        Query {
            family: Family::Marked,
            sing,
            delta,
            cond,
            ins,
        }
    }

    pub fn hat(delta: u32, sing: Singularity, cond: Conditions, ins: Insertions) -> Self {
        Query {
            family: Family::Hat,
            sing,
            delta,
            cond,
            ins,
        }
    }

    pub fn plain(delta: u32, sing: Singularity, cond: Conditions, ins: Insertions) -> Self {
        Query {
            family: Family::Plain,
            sing,
            delta,
            cond,
            ins: ins.theta(0),
        }
    }

    /// `N(A1^δ A1)` is stored once whether it was asked for as a node series
    /// or as a plain singularity of type A1.
    pub fn canonical(self) -> Self {
        match (self.family, self.sing) {
            (Family::Plain, Singularity::A1) | (Family::Nodes, _) => {
                Query::nodes(self.delta, self.cond, self.ins)
            }
            (Family::Plain, _) => Query {
                ins: self.ins.theta(0),
                ..self
            },
            _ => self,
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Conditions { d, r, s } = self.cond;
        let Insertions { n1, n2, n3, theta } = self.ins;
        write!(
            f,
            "{}|{}|delta={}|d={d}|r={r}|s={s}|n={n1},{n2},{n3}|theta={theta}",
            self.family.tag(),
            self.sing,
            self.delta
        )
    }
}

impl FromStr for Query {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed query key `{text}`"));
        let fields: Vec<&str> = text.split('|').collect();
        let [family, sing, delta, d, r, s, n, theta] = fields.as_slice() else {
            return Err(bad());
        };
        let family = match *family {
            "NODES" => Family::Nodes,
            "P" => Family::Marked,
            "HAT" => Family::Hat,
            "PLAIN" => Family::Plain,
            _ => return Err(bad()),
        };
        let num = |field: &str, key: &str| -> Result<u32> {
            field
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(bad)
        };
        let ns: Vec<u32> = n
            .strip_prefix("n=")
            .ok_or_else(bad)?
            .split(',')
            .map(|v| v.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [n1, n2, n3] = ns.as_slice() else {
            return Err(bad());
        };
        Ok(Query {
            family,
            sing: sing.parse()?,
            delta: num(delta, "delta")?,
            cond: Conditions::new(num(d, "d")?, num(r, "r")?, num(s, "s")?),
            ins: Insertions::new(*n1, *n2, *n3, num(theta, "theta")?),
        })
    }
}

/// A computed intersection number together with whether every guard on its
/// call path held.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Count {
    pub value: BigInt,
    pub proven: bool,
}

impl Count {
    fn zero() -> Self {
        Count {
            value: BigInt::zero(),
            proven: true,
        }
    }
}

/// How a query reduces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Zero,
    /// Read off the one-point ring.
    Direct,
    Linear(Vec<(i64, Query)>),
    /// Exact division by a projection degree.
    Quotient(Query, u32),
}

fn binom(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    num_integer::binomial(n as i64, k as i64)
}

fn exact_div(value: &BigInt, divisor: &BigInt, what: impl FnOnce() -> String) -> Result<BigInt> {
    let (q, rem) = value.div_rem(divisor);
    if !rem.is_zero() {
        return Err(Error::NonExactDivision(format!(
            "{} = {value} by {divisor}",
            what()
        )));
    }
    Ok(q)
}

#[derive(Debug, Default)]
pub struct EngineStats {
    pub memo_entries: usize,
    pub max_depth: usize,
    pub evaluations: usize,
}

/// Memoizing evaluator. Safe to share between threads.
#[derive(Debug, Default)]
pub struct Engine {
    force: bool,
    memo: Mutex<HashMap<Query, Count>>,
    integrands: Mutex<HashMap<Conditions, Arc<NodeIntegrand>>>,
    max_depth: AtomicUsize,
    evaluations: AtomicUsize,
}

/// A user-facing characteristic number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicNumber {
    pub value: BigInt,
    /// `false` when some degree guard was overridden with `force`.
    pub proven: bool,
}

impl Engine {
    pub fn new() -> Self {
        Engine::default()
    }

    /// An engine that computes below the proven degree bounds and marks such
    /// values unproven instead of failing.
    pub fn forced() -> Self {
        Engine {
            force: true,
            ..Engine::default()
        }
    }

    pub fn is_forced(&self) -> bool {
        self.force
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats {
            memo_entries: self.memo.lock().unwrap().len(),
            max_depth: self.max_depth.load(Ordering::Relaxed),
            evaluations: self.evaluations.load(Ordering::Relaxed),
        }
    }

    /// Snapshot of the memo table in canonical order.
    pub fn memo_entries(&self) -> Vec<(Query, Count)> {
        let memo = self.memo.lock().unwrap();
        let mut out: Vec<(Query, Count)> = memo.iter().map(|(q, c)| (*q, c.clone())).collect();
        out.sort_by_key(|x| x.0);
        out
    }

    /// Seeds the memo table. Unproven entries are ignored unless the engine
    /// is forced; existing entries are never overwritten.
    pub fn preload(&self, entries: impl IntoIterator<Item = (Query, Count)>) {
        let mut memo = self.memo.lock().unwrap();
        for (q, c) in entries {
            if c.proven || self.force {
                memo.entry(q.canonical()).or_insert(c);
            }
        }
    }

    fn guard(&self, holds: bool, message: impl FnOnce() -> String) -> Result<bool> {
        if holds {
            Ok(true)
        } else if self.force {
            Ok(false)
        } else {
            Err(Error::OutsideProvenRange(message()))
        }
    }

    fn integrand(&self, cond: Conditions) -> Result<Arc<NodeIntegrand>> {
        if let Some(p) = self.integrands.lock().unwrap().get(&cond) {
            return Ok(Arc::clone(p));
        }
        let built = Arc::new(NodeIntegrand::new(cond.d, cond.r, cond.s)?);
        Ok(Arc::clone(
            self.integrands.lock().unwrap().entry(cond).or_insert(built),
        ))
    }

    /// Evaluates any query, returning the value and its provenance.
    pub fn evaluate(&self, query: &Query) -> Result<Count> {
        self.eval_at(query, 0)
    }

    fn eval_at(&self, query: &Query, depth: usize) -> Result<Count> {
        let q = query.canonical();
        if q.ins.vanishes() {
            return Ok(Count::zero());
        }
        if let Some(hit) = self.memo.lock().unwrap().get(&q) {
            return Ok(hit.clone());
        }
        if depth > MAX_DEPTH {
            return Err(Error::RecursionLimit(MAX_DEPTH));
        }
        self.max_depth.fetch_max(depth, Ordering::Relaxed);
        self.evaluations.fetch_add(1, Ordering::Relaxed);

        let (rule, proven) = self.rule(&q)?;
        let count = self.apply(&q, rule, proven, depth)?;

        let mut memo = self.memo.lock().unwrap();
        let stored = memo.entry(q).or_insert_with(|| count.clone());
        debug_assert_eq!(stored.value, count.value, "memo value changed for {q}");
        Ok(count)
    }

    fn apply(&self, q: &Query, rule: Rule, proven: bool, depth: usize) -> Result<Count> {
        match rule {
            Rule::Zero => Ok(Count {
                value: BigInt::zero(),
                proven,
            }),
            Rule::Direct => {
                let value = self
                    .integrand(q.cond)?
                    .evaluate(q.ins.n1, q.ins.n2, q.ins.n3)?;
                Ok(Count { value, proven })
            }
            Rule::Linear(terms) => self.combine(&terms, proven, depth),
            Rule::Quotient(sub, divisor) => {
                let inner = self.eval_at(&sub, depth + 1)?;
                let value = exact_div(&inner.value, &BigInt::from(divisor), || {
                    format!("projection degree division of {sub}")
                })?;
                Ok(Count {
                    value,
                    proven: proven && inner.proven,
                })
            }
        }
    }

    fn combine(&self, terms: &[(i64, Query)], proven: bool, depth: usize) -> Result<Count> {
        let mut total = Count {
            value: BigInt::zero(),
            proven,
        };
        for (coeff, sub) in terms {
            if *coeff == 0 {
                continue;
            }
            let c = self.eval_at(sub, depth + 1)?;
            total.value += c.value * BigInt::from(*coeff);
            total.proven &= c.proven;
        }
        Ok(total)
    }

    /// The reduction for a canonical query, with the guard outcome.
    pub fn rule(&self, q: &Query) -> Result<(Rule, bool)> {
        let q = q.canonical();
        match q.family {
            Family::Nodes => self.nodes_rule(&q),
            Family::Marked => self.marked_rule(&q),
            Family::Hat => Ok((hat_rule(&q), true)),
            Family::Plain => plain_rule(&q).map(|r| (r, true)),
        }
    }

    fn nodes_rule(&self, q: &Query) -> Result<(Rule, bool)> {
        let (delta, d) = (q.delta, q.cond.d);
        if delta == 0 {
            return Ok((Rule::Direct, true));
        }
        if delta > 3 {
            return Err(Error::Unsupported(format!(
                "N(A1^δ A1) is available for δ <= 3, got δ = {delta}"
            )));
        }
        #[allow(clippy::int_plus_one)]
        let proven = self.guard(d >= 2 * delta + 1, || {
            format!(
                "N(A1^{delta} A1) needs d >= 2δ+1 = {}, got d = {d}",
                2 * delta + 1
            )
        })?;
        let mut terms = eul_terms(delta, q.cond, q.ins);
        terms.extend(
            boundary_terms(delta, q.cond, q.ins)
                .into_iter()
                .map(|(c, t)| (-c, t)),
        );
        Ok((Rule::Linear(terms), proven))
    }

    fn marked_rule(&self, q: &Query) -> Result<(Rule, bool)> {
        let Query {
            sing,
            delta,
            cond,
            ins,
            ..
        } = *q;
        let d = cond.di();
        let p =
            |delta: u32, sing: Singularity, ins: Insertions| Query::marked(delta, sing, cond, ins);
        let max_delta = match sing {
            Singularity::A1 | Singularity::A2 => 2,
            Singularity::A3 => 1,
            Singularity::A4 | Singularity::D4 => 0,
        };
        if delta > max_delta {
            return Err(Error::Unsupported(format!(
                "N(A1^δ 𝒫{sing}) is available for δ <= {max_delta}, got δ = {delta}"
            )));
        }
        let min_degree = |need: u32| {
            self.guard(cond.d >= need, || {
                format!(
                    "N(A1^{delta} 𝒫{sing}) needs d >= {need}, got d = {}",
                    cond.d
                )
            })
        };
        use Singularity::*;
        let terms = match sing {
            A1 => match ins.theta {
                0 => {
                    return Ok((
                        Rule::Linear(vec![(2, Query::nodes(delta, cond, ins))]),
                        true,
                    ))
                }
                1 => {
                    let proven = min_degree(2 * delta + 2)?;
                    let node = |ins| Query::nodes(delta, cond, ins);
                    let mut terms = vec![
                        (1, node(ins.lambda(1))),
                        (d - 6, node(ins.h(1))),
                        (2, node(ins.a(1))),
                    ];
                    if delta >= 2 {
                        terms.push((-2 * binom(delta, 2), p(delta - 2, D4, ins.theta(0))));
                    }
                    return Ok((Rule::Linear(terms), proven));
                }
                _ => return Ok((Rule::Linear(lambda_w_terms(q)), true)),
            },
            A2 => {
                if delta == 2 && ins.theta > 0 {
                    return Err(Error::Unsupported(
                        "N(A1^2 𝒫A2, θ) needs a further correction term when θ > 0".into(),
                    ));
                }
                let mut terms = vec![
                    (1, p(delta, A1, ins.a(1))),
                    (1, p(delta, A1, ins.lambda(1))),
                    (d - 3, p(delta, A1, ins.h(1))),
                ];
                if delta >= 1 {
                    terms.push((-2 * binom(delta, 1), p(delta - 1, A3, ins)));
                    terms.push((-3 * binom(delta, 1), Query::hat(delta - 1, D4, cond, ins)));
                }
                if delta >= 2 {
                    terms.push((-4 * binom(delta, 2), p(delta - 2, D4, ins)));
                }
                (terms, min_degree(2 * delta + 2)?)
            }
            A3 => {
                let theta = ins.theta;
                let mut terms = vec![
                    (1, p(delta, A2, ins.lambda(1))),
                    (3, p(delta, A2, ins.theta(theta + 1))),
                    (d, p(delta, A2, ins.h(1))),
                ];
                if delta >= 1 {
                    terms.push((-2 * binom(delta, 1), p(delta - 1, A4, ins)));
                }
                (terms, min_degree(2 * delta + 3)?)
            }
            A4 => {
                let theta = ins.theta;
                let terms = vec![
                    (2, p(0, A3, ins.lambda(1))),
                    (2, p(0, A3, ins.theta(theta + 1))),
                    (2, p(0, A3, ins.a(1))),
                    (2 * d - 6, p(0, A3, ins.h(1))),
                ];
                (terms, min_degree(4)?)
            }
            D4 => {
                let theta = ins.theta;
                let terms = vec![
                    (1, p(0, A3, ins.lambda(1))),
                    (-2, p(0, A3, ins.theta(theta + 1))),
                    (2, p(0, A3, ins.a(1))),
                    (d - 6, p(0, A3, ins.h(1))),
                ];
                (terms, min_degree(3)?)
            }
        };
        Ok((Rule::Linear(terms.0), terms.1))
    }

    pub fn eval_node_series(
        &self,
        delta: u32,
        cond: Conditions,
        ins: Insertions,
    ) -> Result<BigInt> {
        if delta > 3 {
            return Err(Error::Unsupported(format!("δ = {delta} > 3")));
        }
        Ok(self.evaluate(&Query::nodes(delta, cond, ins))?.value)
    }

    /// The Euler-class part of `N(A1^δ A1)`, `1 <= δ <= 3`.
    pub fn eul_term(&self, delta: u32, cond: Conditions, ins: Insertions) -> Result<BigInt> {
        check_series_delta(delta)?;
        Ok(self.combine(&eul_terms(delta, cond, ins), true, 0)?.value)
    }

    /// The boundary correction of `N(A1^δ A1)`, `1 <= δ <= 3`.
    pub fn boundary_term(&self, delta: u32, cond: Conditions, ins: Insertions) -> Result<BigInt> {
        check_series_delta(delta)?;
        Ok(self
            .combine(&boundary_terms(delta, cond, ins), true, 0)?
            .value)
    }

    pub fn eval_pa1(&self, delta: u32, cond: Conditions, ins: Insertions) -> Result<BigInt> {
        Ok(self
            .evaluate(&Query::marked(delta, Singularity::A1, cond, ins))?
            .value)
    }

    pub fn eval_pa2(&self, delta: u32, cond: Conditions, ins: Insertions) -> Result<BigInt> {
        Ok(self
            .evaluate(&Query::marked(delta, Singularity::A2, cond, ins))?
            .value)
    }

    pub fn eval_pa3(&self, delta: u32, cond: Conditions, ins: Insertions) -> Result<BigInt> {
        Ok(self
            .evaluate(&Query::marked(delta, Singularity::A3, cond, ins))?
            .value)
    }

    pub fn eval_pa4(&self, cond: Conditions, ins: Insertions) -> Result<BigInt> {
        Ok(self
            .evaluate(&Query::marked(0, Singularity::A4, cond, ins))?
            .value)
    }

    pub fn eval_pd4(&self, cond: Conditions, ins: Insertions) -> Result<BigInt> {
        Ok(self
            .evaluate(&Query::marked(0, Singularity::D4, cond, ins))?
            .value)
    }

    pub fn eval_hat(
        &self,
        delta: u32,
        sing: Singularity,
        cond: Conditions,
        ins: Insertions,
    ) -> Result<BigInt> {
        Ok(self.evaluate(&Query::hat(delta, sing, cond, ins))?.value)
    }

    pub fn eval_plain_sing(
        &self,
        delta: u32,
        sing: Singularity,
        cond: Conditions,
        ins: Insertions,
    ) -> Result<BigInt> {
        Ok(self.evaluate(&Query::plain(delta, sing, cond, ins))?.value)
    }

    /// Eliminates `λ_W^2 = -(3H - a) λ_W - (a^2 - 2aH + 3H^2)` from a marked
    /// query with `θ >= 2`; each sub-query goes back through the family's own
    /// evaluator.
    pub fn lambda_w_reduce(&self, q: &Query) -> Result<BigInt> {
        if q.family != Family::Marked || q.ins.theta < 2 {
            return Err(Error::InvalidArgument(format!(
                "λ_W reduction applies to marked queries with θ >= 2, got {q}"
            )));
        }
        if q.ins.vanishes() {
            return Ok(BigInt::zero());
        }
        Ok(self.combine(&lambda_w_terms(q), true, 0)?.value)
    }

    /// `N(A1^δ X; r, s)` for a configuration. Unordered counts divide the
    /// ordered one by `(number of nodes)!`.
    pub fn characteristic_number(
        &self,
        d: u32,
        config: Configuration,
        r: u32,
        s: u32,
        ordered: bool,
    ) -> Result<CharacteristicNumber> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "curve degree must be positive".into(),
            ));
        }
        let codim = config.codim();
        if codim > MAX_CODIM {
            return Err(Error::Unsupported(format!(
                "total codimension δ + c = {codim} exceeds {MAX_CODIM}"
            )));
        }
        let budget = config.condition_budget(d);
        if budget != Some(r + 2 * s) {
            return Err(Error::Dimension(format!(
                "r + 2s must equal d(d+3)/2 + 3 - (δ + c) = {} for d = {d} and {config}, got r + 2s = {}",
                budget.map_or_else(|| "a negative number".to_string(), |b| b.to_string()),
                r + 2 * s
            )));
        }
        let d_min = config.d_min();
        let mut proven = self.guard(d >= d_min, || {
            format!("{config} is proven for d >= d_min = {d_min}, got d = {d}")
        })?;

        let cond = Conditions::new(d, r, s);
        let value = match config.split() {
            None => n_plain(d, r, s, 0, 0)?,
            Some((delta, sing)) => {
                let c = self.evaluate(&Query::plain(delta, sing, cond, Insertions::NONE))?;
                proven &= c.proven;
                c.value
            }
        };
        let value = if ordered {
            value
        } else {
            let factorial: BigInt = (1..=config.nodes).map(BigInt::from).product();
            exact_div(&value, &factorial, || format!("unordering {config}"))?
        };
        Ok(CharacteristicNumber { value, proven })
    }
}

fn check_series_delta(delta: u32) -> Result<()> {
    if !(1..=3).contains(&delta) {
        return Err(Error::Unsupported(format!(
            "the node recursion needs 1 <= δ <= 3, got {delta}"
        )));
    }
    Ok(())
}

fn hat_rule(q: &Query) -> Rule {
    let Query {
        sing,
        delta,
        cond,
        ins,
        ..
    } = *q;
    match ins.theta {
        0 => Rule::Zero,
        1 => Rule::Linear(vec![(1, Query::plain(delta, sing, cond, ins.theta(0)))]),
        t => Rule::Linear(vec![
            (1, Query::hat(delta, sing, cond, ins.lambda(1).theta(t - 1))),
            (-1, Query::hat(delta, sing, cond, ins.h(1).theta(t - 2))),
        ]),
    }
}

fn plain_rule(q: &Query) -> Result<Rule> {
    let max_delta = match q.sing {
        Singularity::A1 => 3,
        Singularity::A2 => 2,
        Singularity::A3 => 1,
        Singularity::A4 | Singularity::D4 => 0,
    };
    if q.delta > max_delta {
        return Err(Error::Unsupported(format!(
            "N(A1^δ {}) is available for δ <= {max_delta}, got δ = {}",
            q.sing, q.delta
        )));
    }
    let marked = Query::marked(q.delta, q.sing, q.cond, q.ins.theta(0));
    Ok(Rule::Quotient(marked, q.sing.proj_degree()))
}

/// `Eul(δ, r, s, n1, n2, n3)`: a fixed combination of `N(A1^(δ-1) A1)` with the
/// last point's `H` pushed into `a` and `λ`.
fn eul_terms(delta: u32, cond: Conditions, ins: Insertions) -> Vec<(i64, Query)> {
    let d = cond.di();
    let base = Insertions {
        n3: 0,
        theta: 0,
        ..ins
    };
    let n = |da: u32, dl: u32| Query::nodes(delta - 1, cond, base.a(da).lambda(dl));
    match ins.n3 {
        0 => vec![
            (d - 2 * d * d + d * d * d, n(1, 0)),
            (3 - 6 * d + 3 * d * d, n(0, 1)),
        ],
        1 => vec![
            (d * d - d, n(2, 0)),
            (3 * d * d - 4 * d + 1, n(1, 1)),
            (3 * d - 3, n(0, 2)),
        ],
        2 => vec![
            (d, n(3, 0)),
            (2 * d - 1, n(2, 1)),
            (3 * d - 2, n(1, 2)),
            (1, n(0, 3)),
        ],
        3 => vec![(1, n(3, 1)), (1, n(2, 2)), (1, n(1, 3))],
        _ => Vec::new(),
    }
}

/// `C(δ,1) B1 + C(δ,2) B2 + C(δ,3) B3`.
fn boundary_terms(delta: u32, cond: Conditions, ins: Insertions) -> Vec<(i64, Query)> {
    use Singularity::*;
    let ins = ins.theta(0);
    let d = cond.di();
    let c1 = binom(delta, 1);
    let mut terms = vec![
        (c1, Query::nodes(delta - 1, cond, ins.lambda(1))),
        (c1 * d, Query::nodes(delta - 1, cond, ins.h(1))),
        (c1 * 3, Query::marked(delta - 1, A2, cond, ins)),
    ];
    if delta >= 2 {
        terms.push((binom(delta, 2) * 4, Query::marked(delta - 2, A3, cond, ins)));
    }
    if delta >= 3 {
        terms.push((
            binom(delta, 3) * TRIPLE_POINT_COEFF,
            Query::marked(delta - 3, D4, cond, ins),
        ));
    }
    terms
}

fn lambda_w_terms(q: &Query) -> Vec<(i64, Query)> {
    let t = q.ins.theta;
    let with = |ins: Insertions| Query { ins, ..*q };
    vec![
        (-3, with(q.ins.h(1).theta(t - 1))),
        (1, with(q.ins.a(1).theta(t - 1))),
        (-1, with(q.ins.a(2).theta(t - 2))),
        (2, with(q.ins.a(1).h(1).theta(t - 2))),
        (-3, with(q.ins.h(2).theta(t - 2))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(d: u32, r: u32, s: u32) -> Conditions {
        Conditions::new(d, r, s)
    }

    const NO: Insertions = Insertions::NONE;

    #[test]
    fn node_series_values() {
        let e = Engine::new();
        assert_eq!(
            e.eval_node_series(0, c(4, 16, 0), NO).unwrap(),
            258300.into()
        );
        assert_eq!(e.eval_node_series(1, c(3, 4, 3), NO).unwrap(), 42.into());
        assert!(matches!(
            e.eval_node_series(4, c(9, 10, 3), NO),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            e.eval_node_series(1, c(2, 2, 2), NO),
            Err(Error::OutsideProvenRange(_))
        ));
    }

    #[test]
    fn eul_minus_boundary_is_the_series() {
        let e = Engine::new();
        let cond = c(3, 4, 3);
        let eul = e.eul_term(1, cond, NO).unwrap();
        let bd = e.boundary_term(1, cond, NO).unwrap();
        assert_eq!(eul - bd, 42.into());
        assert_eq!(
            e.eul_term(1, cond, Insertions::new(0, 0, 4, 0)).unwrap(),
            0.into()
        );
    }

    #[test]
    fn eul_coefficients_for_conics() {
        let terms = eul_terms(1, c(2, 0, 0), NO);
        assert_eq!(terms[0].0, 2);
        assert_eq!(terms[0].1.ins, Insertions::new(1, 0, 0, 0));
    }

    #[test]
    fn boundary_has_binomial_structure() {
        assert_eq!(boundary_terms(1, c(5, 0, 0), NO).len(), 3);
        let three = boundary_terms(3, c(7, 0, 0), NO);
        assert_eq!(three.len(), 5);
        assert_eq!(
            three[4],
            (6, Query::marked(0, Singularity::D4, c(7, 0, 0), NO))
        );
        assert_eq!(three[3].0, 3 * 4);
    }

    #[test]
    fn marked_node_values() {
        let e = Engine::new();
        assert_eq!(e.eval_pa1(0, c(2, 1, 3), NO).unwrap(), 6.into());
        assert_eq!(e.eval_pa1(0, c(4, 10, 3), NO).unwrap(), 54.into());
        assert!(e.eval_pa1(3, c(9, 10, 3), NO).is_err());
    }

    #[test]
    fn cusp_values() {
        let e = Engine::new();
        assert_eq!(e.eval_pa2(0, c(3, 10, 0), NO).unwrap(), 17760.into());
        assert_eq!(e.eval_pa2(0, c(3, 4, 3), NO).unwrap(), 24.into());
        let two_nodes = Engine::forced();
        assert_eq!(
            two_nodes.eval_pa2(2, c(4, 13, 0), NO).unwrap(),
            21226368.into()
        );
        let theta = Insertions::new(0, 0, 0, 1);
        assert!(matches!(
            e.eval_pa2(2, c(7, 10, 3), theta),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            Engine::forced().eval_pa2(2, c(7, 10, 3), theta),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tacnode_and_a4_values() {
        let e = Engine::new();
        assert_eq!(e.eval_pa3(0, c(3, 3, 3), NO).unwrap(), 42.into());
        assert_eq!(e.eval_pa4(c(4, 7, 3), NO).unwrap(), 420.into());
        assert_eq!(e.eval_pa4(c(5, 13, 3), NO).unwrap(), 1200.into());
        assert_eq!(
            e.eval_pa4(c(4, 7, 3), Insertions::new(0, 0, 4, 0)).unwrap(),
            0.into()
        );
        assert!(matches!(
            e.eval_pa4(c(3, 2, 3), NO),
            Err(Error::OutsideProvenRange(_))
        ));
        assert!(matches!(
            e.eval_pa3(2, c(9, 2, 3), NO),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn triple_point_values() {
        let e = Engine::new();
        // r + 2s = 9 + 3 - 4 = 8 for cubics.
        assert_eq!(e.eval_pd4(c(3, 2, 3), NO).unwrap(), 45.into());
        assert_eq!(
            e.eval_plain_sing(0, Singularity::D4, c(3, 2, 3), NO)
                .unwrap(),
            15.into()
        );
        assert_eq!(e.eval_pd4(c(4, 7, 3), NO).unwrap(), 180.into());
        assert_eq!(
            e.eval_pd4(c(4, 7, 3), Insertions::new(4, 0, 0, 0)).unwrap(),
            0.into()
        );
        assert!(matches!(
            e.eval_pd4(c(2, 0, 3), NO),
            Err(Error::OutsideProvenRange(_))
        ));
    }

    #[test]
    fn hat_family() {
        let e = Engine::new();
        let cond = c(3, 2, 3);
        assert_eq!(e.eval_hat(0, Singularity::D4, cond, NO).unwrap(), 0.into());
        let one = Insertions::new(0, 0, 0, 1);
        assert_eq!(
            e.eval_hat(0, Singularity::D4, cond, one).unwrap(),
            e.eval_plain_sing(0, Singularity::D4, cond, NO).unwrap()
        );
        let lower = c(3, 1, 3);
        let two = Insertions::new(0, 0, 0, 2);
        assert_eq!(
            e.eval_hat(0, Singularity::D4, lower, two).unwrap(),
            e.eval_plain_sing(0, Singularity::D4, lower, Insertions::new(0, 1, 0, 0))
                .unwrap()
        );
    }

    #[test]
    fn plain_a1_is_the_node_series() {
        let e = Engine::new();
        let cond = c(4, 12, 2);
        let q1 = Query::plain(0, Singularity::A1, cond, NO);
        let q2 = Query::nodes(0, cond, NO);
        assert_eq!(q1.canonical(), q2);
        assert_eq!(e.evaluate(&q1).unwrap().value, 792.into());
        assert!(e
            .eval_plain_sing(1, Singularity::A4, c(8, 30, 3), NO)
            .is_err());
    }

    #[test]
    fn lambda_w_reduction_matches_direct_formulas() {
        let e = Engine::new();
        // With δ >= 1 the D̂4 correction of 𝒫A2 does not obey the λ_W relation, so
        // the two sides differ at θ >= 2; no supported query reaches that case.
        for (sing, delta) in [(Singularity::A2, 0), (Singularity::A3, 0)] {
            for d in 5..=6 {
                for theta in 2..=3 {
                    for n3 in 0..3 {
                        let budget = d * (d + 3) / 2 + 3 - delta - sing.codim();
                        let r = budget - 4 - n3 - theta;
                        let q = Query::marked(
                            delta,
                            sing,
                            c(d, r, 2),
                            Insertions::new(0, 0, n3, theta),
                        );
                        assert_eq!(
                            e.lambda_w_reduce(&q).unwrap(),
                            e.evaluate(&q).unwrap().value,
                            "{q}"
                        );
                    }
                }
            }
        }
        let shallow = Query::marked(0, Singularity::A2, c(3, 1, 1), Insertions::new(0, 0, 0, 1));
        assert!(e.lambda_w_reduce(&shallow).is_err());
        let vanishing = Query::marked(0, Singularity::A1, c(3, 1, 1), Insertions::new(2, 0, 3, 2));
        assert_eq!(e.lambda_w_reduce(&vanishing).unwrap(), 0.into());
    }

    #[test]
    fn characteristic_numbers() {
        let e = Engine::new();
        let a2: Configuration = "A2".parse().unwrap();
        assert_eq!(
            e.characteristic_number(3, a2, 8, 1, true).unwrap().value,
            2064.into()
        );
        let one_node = Configuration::new(0, Some(Singularity::A1));
        assert_eq!(
            e.characteristic_number(4, one_node, 12, 2, true)
                .unwrap()
                .value,
            792.into()
        );

        let cusp_two_nodes: Configuration = "A1^2 A2".parse().unwrap();
        assert!(matches!(
            e.characteristic_number(4, cusp_two_nodes, 13, 0, false),
            Err(Error::OutsideProvenRange(_))
        ));
        let forced = Engine::forced();
        let got = forced
            .characteristic_number(4, cusp_two_nodes, 13, 0, false)
            .unwrap();
        assert_eq!(got.value, 10613184.into());
        assert!(!got.proven);

        let err = e.characteristic_number(3, a2, 9, 1, true).unwrap_err();
        assert!(err.to_string().contains("r + 2s must equal"), "{err}");
    }

    #[test]
    fn two_node_cubics_are_line_plus_conic() {
        // 7 points in the plane: a line through 2 of them and a conic through the rest.
        let e = Engine::new();
        let c2 = Configuration::nodes(2);
        assert_eq!(
            e.characteristic_number(3, c2, 4, 3, false).unwrap().value,
            21.into()
        );
        assert_eq!(
            e.characteristic_number(3, c2, 4, 3, true).unwrap().value,
            42.into()
        );
    }

    #[test]
    fn triple_point_cubics_are_concurrent_lines() {
        // 5 points in the plane: 5 choices for the point on the third line, 3 pairings.
        let e = Engine::forced();
        let d4 = Configuration::new(0, Some(Singularity::D4));
        assert_eq!(
            e.characteristic_number(3, d4, 2, 3, true).unwrap().value,
            15.into()
        );
    }

    #[test]
    fn query_keys_round_trip() {
        let q = Query::marked(1, Singularity::A3, c(6, 20, 1), Insertions::new(1, 2, 3, 4));
        assert_eq!(q.to_string().parse::<Query>().unwrap(), q);
        assert!("P|A3|delta=1".parse::<Query>().is_err());
    }
}
