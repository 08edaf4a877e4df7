//! Exact arithmetic in the level-n tower rings and their residue rings mod p.
//!
//! A level-`n` ring is generated over the integers by `Π = p^(1/p^n)`,
//! `X = x^(1/p^n)` and `Y = y^(1/p^n)`. Elements are kept in normal form with
//! respect to two rewrite rules:
//!
//! * `Π^(p^n) -> p` (an integer carry), always;
//! * `Y^(d p^n) -> -p^d - X^(d p^n)`, in [`RingMode::Quotient`] only.
//!
//! The leading terms `Π^(p^n)` and `Y^(d p^n)` involve disjoint variables and
//! have unit coefficients, so the system is confluent and the normal form is
//! canonical: the ring is a free Z-module on `Π^a X^b Y^c` with `a < p^n`
//! (and `c < d p^n` in quotient mode). Polynomial representatives stand in for
//! the power series of the underlying rings; nothing here truncates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::{self, Exec};
use crate::valuation::{binom, Prime};

/// Products with more term pairs than this are split across threads.
const PARALLEL_MUL_THRESHOLD: usize = 40_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("operands live in different rings: {0} vs {1}")]
    CtxMismatch(TowerCtx, TowerCtx),
    #[error("cannot embed level {from} into lower level {to}")]
    LevelDown { from: u32, to: u32 },
    #[error("not divisible: offending monomial {0}")]
    NotDivisible(Monomial),
    #[error("quotient mode requires the relation degree {degree} to be prime to p = {p}")]
    DegreeNotCoprime { degree: u32, p: Prime },
    #[error("relation degree must be positive")]
    ZeroDegree,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("expected a polynomial in X and Y only, found {0}")]
    NotPurePolynomial(Monomial),
}

/// `Free` models the unconstrained tower; `Quotient` imposes `p^d + x^d + y^d = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingMode {
    Free,
    Quotient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TowerCtx {
    p: Prime,
    level: u32,
    degree: u32,
    mode: RingMode,
}

impl TowerCtx {
    pub fn new(p: Prime, level: u32, degree: u32, mode: RingMode) -> Result<Self, TowerError> {
        if degree == 0 {
            return Err(TowerError::ZeroDegree);
        }
        if mode == RingMode::Quotient && u64::from(degree).gcd(&p.get()) != 1 {
            return Err(TowerError::DegreeNotCoprime { degree, p });
        }
        Ok(TowerCtx {
            p,
            level,
            degree,
            mode,
        })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mode(&self) -> RingMode {
        self.mode
    }

    /// Same ring family at another level.
    pub fn at_level(&self, level: u32) -> TowerCtx {
        TowerCtx { level, ..*self }
    }

    /// `p^n`: the exponent at which `Π` wraps to `p`.
    pub fn pi_order(&self) -> u32 {
        self.p.pow_u32(self.level)
    }

    /// `d p^n` in quotient mode.
    pub fn y_bound(&self) -> Option<u32> {
        match self.mode {
            RingMode::Free => None,
            RingMode::Quotient => Some(self.degree * self.pi_order()),
        }
    }

    /// Whether two contexts describe the same ring family (ignoring level).
    pub fn same_family(&self, other: &TowerCtx) -> bool {
        self.p == other.p && self.degree == other.degree && self.mode == other.mode
    }
}

impl fmt::Display for TowerCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}(p={}, d={}, level={})",
            self.mode, self.p, self.degree, self.level
        )
    }
}

/// `Π^pi X^x Y^y`. Ordered lexicographically with `Y > X > Π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Monomial {
    pub pi: u32,
    pub x: u32,
    pub y: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { pi: 0, x: 0, y: 0 };

    pub fn new(pi: u32, x: u32, y: u32) -> Self {
        Monomial { pi, x, y }
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.pi <= other.pi && self.x <= other.x && self.y <= other.y
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x, self.pi).cmp(&(other.y, other.x, other.pi))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (name, e) in [("P", self.pi), ("X", self.x), ("Y", self.y)] {
            match e {
                0 => {}
                1 => parts.push(name.to_string()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

type TermMap = BTreeMap<Monomial, BigInt>;

/// Element of a level-n tower ring in normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerElem {
    ctx: TowerCtx,
    terms: TermMap,
}

/// Accumulates raw (possibly non-normal) terms and rewrites them on insertion.
struct Normalizer {
    ctx: TowerCtx,
    pi_order: u64,
    y_bound: Option<u64>,
    p: BigInt,
    p_to_d: BigInt,
    acc: HashMap<Monomial, BigInt>,
}

impl Normalizer {
    fn new(ctx: TowerCtx) -> Self {
        Normalizer {
            ctx,
            pi_order: u64::from(ctx.pi_order()),
            y_bound: ctx.y_bound().map(u64::from),
            p: ctx.p.as_bigint(),
            p_to_d: ctx.p.pow(ctx.degree),
            acc: HashMap::new(),
        }
    }

    fn insert(&mut self, m: Monomial, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.acc.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
    }

    fn push(&mut self, pi: u64, x: u64, y: u64, mut coeff: BigInt) {
        let carry = pi / self.pi_order;
        let pi = pi % self.pi_order;
        match carry {
            0 => {}
            1 => coeff *= &self.p,
            c => coeff *= num_traits::pow(self.p.clone(), c as usize),
        }
        match self.y_bound {
            Some(bound) if y >= bound => {
                let q = y / bound;
                let y = y % bound;
                // Y^(qD) = (-1)^q (p^d + X^D)^q
                let sign = if q.is_multiple_of(2) { 1 } else { -1 };
                if q == 1 {
                    let neg = -coeff;
                    self.insert(mono(pi, x + bound, y), neg.clone());
                    self.insert(mono(pi, x, y), neg * &self.p_to_d);
                } else {
                    for k in 0..=q {
                        let c = BigInt::from(binom(q, k).expect("k <= q"))
                            * num_traits::pow(self.p_to_d.clone(), (q - k) as usize)
                            * &coeff
                            * sign;
                        self.insert(mono(pi, x + bound * k, y), c);
                    }
                }
            }
            _ => self.insert(mono(pi, x, y), coeff),
        }
    }

    fn finish(self) -> TowerElem {
        TowerElem {
            ctx: self.ctx,
            terms: self.acc.into_iter().collect(),
        }
    }
}

fn mono(pi: u64, x: u64, y: u64) -> Monomial {
    let c = |v: u64| u32::try_from(v).expect("exponent exceeds u32");
    Monomial::new(c(pi), c(x), c(y))
}

impl TowerElem {
    pub fn zero(ctx: TowerCtx) -> Self {
        TowerElem {
            ctx,
            terms: TermMap::new(),
        }
    }

    pub fn one(ctx: TowerCtx) -> Self {
        Self::constant(ctx, BigInt::one())
    }

    pub fn constant(ctx: TowerCtx, c: impl Into<BigInt>) -> Self {
        Self::monomial(ctx, c, Monomial::ONE)
    }

    /// `c * Π^pi X^x Y^y`, normalized (exponents may be out of range).
    pub fn monomial(ctx: TowerCtx, c: impl Into<BigInt>, m: Monomial) -> Self {
        Self::normalize(ctx, [(m, c.into())])
    }

    pub fn pi(ctx: TowerCtx) -> Self {
        Self::monomial(ctx, 1, Monomial::new(1, 0, 0))
    }

    pub fn x(ctx: TowerCtx) -> Self {
        Self::monomial(ctx, 1, Monomial::new(0, 1, 0))
    }

    pub fn y(ctx: TowerCtx) -> Self {
        Self::monomial(ctx, 1, Monomial::new(0, 0, 1))
    }

    /// Reduce an arbitrary term list under the rewrite rules.
    pub fn normalize<I>(ctx: TowerCtx, raw: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, BigInt)>,
    {
        let mut n = Normalizer::new(ctx);
        for (m, c) in raw {
            n.push(m.pi.into(), m.x.into(), m.y.into(), c);
        }
        n.finish()
    }

    /// Build from terms already known to be in normal form; zero coefficients are dropped.
    pub(crate) fn from_normal_terms(ctx: TowerCtx, terms: TermMap) -> Self {
        let mut terms = terms;
        terms.retain(|_, c| !c.is_zero());
        debug_assert!(terms.keys().all(|m| {
            m.pi < ctx.pi_order() && ctx.y_bound().is_none_or(|b| m.y < b)
        }));
        TowerElem { ctx, terms }
    }

    pub fn ctx(&self) -> TowerCtx {
        self.ctx
    }

    pub fn level(&self) -> u32 {
        self.ctx.level
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

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// True when the element is an integer constant.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    fn check_ctx(&self, other: &TowerElem) -> Result<(), TowerError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(TowerError::CtxMismatch(self.ctx, other.ctx))
        }
    }

    pub fn add(&self, other: &TowerElem) -> Result<TowerElem, TowerError> {
        self.check_ctx(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let e = terms.entry(*m).or_default();
            *e += c;
        }
        Ok(TowerElem::from_normal_terms(self.ctx, terms))
    }

    pub fn sub(&self, other: &TowerElem) -> Result<TowerElem, TowerError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TowerElem {
        TowerElem {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> TowerElem {
        if k.is_zero() {
            return TowerElem::zero(self.ctx);
        }
        TowerElem {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &TowerElem) -> Result<TowerElem, TowerError> {
        self.mul_with(other, Exec::default())
    }

    /// Product with an explicit execution mode.
    pub fn mul_with(&self, other: &TowerElem, exec: Exec) -> Result<TowerElem, TowerError> {
        self.check_ctx(other)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        if small.is_zero() {
            return Ok(TowerElem::zero(self.ctx));
        }
        let ctx = self.ctx;
        let left: Vec<(&Monomial, &BigInt)> = large.terms.iter().collect();
        let fold = |chunk: &[(&Monomial, &BigInt)]| {
            let mut n = Normalizer::new(ctx);
            for (m1, c1) in chunk {
                for (m2, c2) in &small.terms {
                    n.push(
                        u64::from(m1.pi) + u64::from(m2.pi),
                        u64::from(m1.x) + u64::from(m2.x),
                        u64::from(m1.y) + u64::from(m2.y),
                        *c1 * c2,
                    );
                }
            }
            n
        };
        let combine = |mut a: Normalizer, b: Normalizer| {
            if a.acc.len() < b.acc.len() {
                return merge(b, a);
            }
            for (m, c) in b.acc {
                a.insert(m, c);
            }
            a
        };
        fn merge(mut a: Normalizer, b: Normalizer) -> Normalizer {
            for (m, c) in b.acc {
                a.insert(m, c);
            }
            a
        }
        let work = left.len() * small.len();
        let n = if exec.is_parallel() && work > PARALLEL_MUL_THRESHOLD {
            let threads = 4 * std::thread::available_parallelism().map_or(1, |n| n.get());
            let chunk = left.len().div_ceil(threads);
            par::fold_chunks(exec, &left, chunk, fold, combine)
        } else {
            Some(fold(&left))
        };
        Ok(n.map_or_else(|| TowerElem::zero(ctx), Normalizer::finish))
    }

    pub fn pow(&self, e: u64) -> TowerElem {
        self.pow_with(e, Exec::default())
    }

    /// Square-and-multiply; every intermediate product is normalized.
    pub fn pow_with(&self, mut e: u64, exec: Exec) -> TowerElem {
        let mut result = TowerElem::one(self.ctx);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_with(&base, exec).expect("same ctx");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_with(&base, exec).expect("same ctx");
            }
        }
        result
    }

    /// Image under the inclusion of level `n` into level `to_level`.
    pub fn embed(&self, to_level: u32) -> Result<TowerElem, TowerError> {
        if to_level < self.ctx.level {
            return Err(TowerError::LevelDown {
                from: self.ctx.level,
                to: to_level,
            });
        }
        let f = self.ctx.p.pow_u32(to_level - self.ctx.level);
        let ctx = self.ctx.at_level(to_level);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (Monomial::new(m.pi * f, m.x * f, m.y * f), c.clone()))
            .collect();
        Ok(TowerElem { ctx, terms })
    }

    /// Inverse of [`TowerElem::embed`] by one level, when every exponent is a
    /// multiple of `p`.
    pub fn descend(&self) -> Option<TowerElem> {
        let level = self.ctx.level.checked_sub(1)?;
        let p = self.ctx.p.pow_u32(1);
        if !self.terms.keys().all(|m| m.pi % p == 0 && m.x % p == 0 && m.y % p == 0) {
            return None;
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (Monomial::new(m.pi / p, m.x / p, m.y / p), c.clone()))
            .collect();
        Some(TowerElem {
            ctx: self.ctx.at_level(level),
            terms,
        })
    }

    /// Exact quotient by `Π^j`.
    ///
    /// Works term by term: `λ Π^a` is divisible by `Π^j` iff `p^t | λ` where
    /// `t = ceil((j - a) / p^n)`, which is the iterated single-step rule
    /// `(λ_0, …, λ_{p^n-1}) -> (λ_1, …, λ_{p^n-1}, λ_0 / p)` applied `j` times.
    pub fn pi_divide(&self, j: u64) -> Result<TowerElem, TowerError> {
        if j == 0 {
            return Ok(self.clone());
        }
        let order = u64::from(self.ctx.pi_order());
        let mut terms = TermMap::new();
        for (m, c) in &self.terms {
            let a = u64::from(m.pi);
            let (t, new_a) = if a >= j {
                (0, a - j)
            } else {
                let t = (j - a).div_ceil(order);
                (t, a + t * order - j)
            };
            let coeff = if t == 0 {
                c.clone()
            } else {
                let pt = num_traits::pow(self.ctx.p.as_bigint(), t as usize);
                let (q, r) = c.div_rem(&pt);
                if !r.is_zero() {
                    return Err(TowerError::NotDivisible(*m));
                }
                q
            };
            terms.insert(Monomial::new(new_a as u32, m.x, m.y), coeff);
        }
        Ok(TowerElem { ctx: self.ctx, terms })
    }

    /// Exact quotient by `p` (every coefficient must be divisible).
    pub fn p_divide(&self) -> Result<TowerElem, TowerError> {
        self.divide_coefficients(&self.ctx.p.as_bigint())
    }

    pub(crate) fn divide_coefficients(&self, d: &BigInt) -> Result<TowerElem, TowerError> {
        let mut terms = TermMap::new();
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return Err(TowerError::NotDivisible(*m));
            }
            terms.insert(*m, q);
        }
        Ok(TowerElem { ctx: self.ctx, terms })
    }

    /// Largest `k` with `Π^k` dividing the element; `None` for zero.
    pub fn pi_valuation(&self) -> Option<u64> {
        let order = u64::from(self.ctx.pi_order());
        self.terms
            .iter()
            .map(|(m, c)| {
                let v = crate::valuation::vp(self.ctx.p, c)
                    .finite()
                    .expect("stored coefficients are nonzero");
                v * order + u64::from(m.pi)
            })
            .min()
    }

    /// Map each coefficient through `f` (the monomial is passed alongside).
    pub(crate) fn map_coefficients<F>(&self, f: F) -> TowerElem
    where
        F: Fn(&Monomial, &BigInt) -> BigInt,
    {
        let terms = self.terms.iter().map(|(m, c)| (*m, f(m, c))).collect();
        TowerElem::from_normal_terms(self.ctx, terms)
    }

    pub fn reduce_mod_p(&self) -> ResidueElem {
        let p = self.ctx.p.as_bigint();
        ResidueElem(self.map_coefficients(|_, c| c.mod_floor(&p)))
    }

    /// Terms as `[a, b, c, "coeff"]` rows, in ascending monomial order.
    pub fn to_json_terms(&self) -> Vec<serde_json::Value> {
        self.terms
            .iter()
            .map(|(m, c)| serde_json::json!([m.pi, m.x, m.y, c.to_string()]))
            .collect()
    }

    /// Inverse of [`TowerElem::to_json_terms`]; the terms are renormalized.
    pub fn from_json_terms(ctx: TowerCtx, rows: &[serde_json::Value]) -> Option<TowerElem> {
        let mut raw = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array()?;
            if row.len() != 4 {
                return None;
            }
            let e = |i: usize| row[i].as_u64().and_then(|v| u32::try_from(v).ok());
            let c: BigInt = row[3].as_str()?.parse().ok()?;
            raw.push((Monomial::new(e(0)?, e(1)?, e(2)?), c));
        }
        Some(TowerElem::normalize(ctx, raw))
    }

    /// Rendering in the expression grammar accepted by [`crate::expr`].
    pub fn to_expr(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let n = self.ctx.pi_order();
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            for (name, e) in [("p", m.pi), ("x", m.x), ("y", m.y)] {
                if e == 0 {
                    continue;
                }
                let g = e.gcd(&n);
                let (num, den) = (e / g, n / g);
                factors.push(if den == 1 {
                    if num == 1 {
                        name.to_string()
                    } else {
                        format!("{name}^{num}")
                    }
                } else {
                    format!("{name}^({num}/{den})")
                });
            }
            let mag = c.abs();
            let body = match (factors.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => factors.join("*"),
                (false, false) => format!("{}*{}", mag, factors.join("*")),
            };
            match (i, c.is_negative()) {
                (0, true) => out.push_str(&format!("-{body}")),
                (0, false) => out.push_str(&body),
                (_, true) => out.push_str(&format!(" - {body}")),
                (_, false) => out.push_str(&format!(" + {body}")),
            }
        }
        out
    }
}

impl fmt::Display for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                if *m == Monomial::ONE {
                    c.to_string()
                } else if c.is_one() {
                    m.to_string()
                } else {
                    format!("{c}*{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Image of a tower element in the residue ring `R/pR`: coefficients in
/// `[0, p)`, and `Π^(p^n) = p` is zero there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueElem(TowerElem);

impl ResidueElem {
    pub fn zero(ctx: TowerCtx) -> Self {
        ResidueElem(TowerElem::zero(ctx))
    }

    pub fn one(ctx: TowerCtx) -> Self {
        TowerElem::one(ctx).reduce_mod_p()
    }

    pub fn ctx(&self) -> TowerCtx {
        self.0.ctx
    }

    pub fn level(&self) -> u32 {
        self.0.ctx.level
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// The coefficient-wise integer lift.
    pub fn lift(&self) -> &TowerElem {
        &self.0
    }

    pub fn into_lift(self) -> TowerElem {
        self.0
    }

    pub fn add(&self, other: &ResidueElem) -> Result<ResidueElem, TowerError> {
        Ok(self.0.add(&other.0)?.reduce_mod_p())
    }

    pub fn sub(&self, other: &ResidueElem) -> Result<ResidueElem, TowerError> {
        Ok(self.0.sub(&other.0)?.reduce_mod_p())
    }

    pub fn neg(&self) -> ResidueElem {
        self.0.neg().reduce_mod_p()
    }

    pub fn mul(&self, other: &ResidueElem) -> Result<ResidueElem, TowerError> {
        Ok(self.0.mul(&other.0)?.reduce_mod_p())
    }

    pub fn pow(&self, e: u64) -> ResidueElem {
        let mut result = ResidueElem::one(self.ctx());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same ctx");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same ctx");
            }
        }
        result
    }

    pub fn embed(&self, to_level: u32) -> Result<ResidueElem, TowerError> {
        Ok(ResidueElem(self.0.embed(to_level)?))
    }

    /// `e^p`, computed by honest exponentiation.
    pub fn frobenius_residue(&self) -> ResidueElem {
        self.pow(self.ctx().p.get())
    }

    /// Reduction modulo `Π`: keeps only `Π`-free terms. The result lives in
    /// `F_p[X, Y]` (modulo the relation, in quotient mode).
    pub fn mod_pi(&self) -> ResidueElem {
        let terms = self
            .0
            .terms
            .iter()
            .filter(|(m, _)| m.pi == 0)
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        ResidueElem(TowerElem::from_normal_terms(self.0.ctx, terms))
    }
}

impl fmt::Display for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Single-divisor division in `F_p[X, Y]` under lex order `Y > X`.
///
/// Both operands are read as plain polynomials (their stored representatives);
/// no quotient relation is applied during the division. Over a field a single
/// polynomial is a Gröbner basis of the ideal it generates, so the remainder
/// is zero exactly when `h` divides `g`. Returns the quotient in that case.
pub fn poly_divides(h: &ResidueElem, g: &ResidueElem) -> Result<Option<ResidueElem>, TowerError> {
    h.0.check_ctx(&g.0)?;
    if h.is_zero() {
        return Err(TowerError::ZeroDivisor);
    }
    for m in h.0.terms.keys().chain(g.0.terms.keys()) {
        if m.pi != 0 {
            return Err(TowerError::NotPurePolynomial(*m));
        }
    }
    let ctx = h.ctx();
    let p = ctx.p.get();
    let fp = |c: &BigInt| {
        c.mod_floor(&BigInt::from(p))
            .to_u64()
            .expect("residue coefficient fits")
    };
    let divisor: Vec<(Monomial, u64)> = h.0.terms.iter().map(|(m, c)| (*m, fp(c))).collect();
    let (lead_m, lead_c) = *divisor.last().expect("nonzero divisor");
    let lead_inv = mod_inverse(lead_c, p);

    let mut rest: BTreeMap<Monomial, u64> = g.0.terms.iter().map(|(m, c)| (*m, fp(c))).collect();
    rest.retain(|_, c| *c != 0);
    let mut quotient: BTreeMap<Monomial, u64> = BTreeMap::new();
    while let Some((&m, &c)) = rest.last_key_value() {
        if !lead_m.divides(&m) {
            return Ok(None);
        }
        let shift = Monomial::new(0, m.x - lead_m.x, m.y - lead_m.y);
        let factor = c * lead_inv % p;
        *quotient.entry(shift).or_default() += factor;
        for (dm, dc) in &divisor {
            let target = Monomial::new(0, dm.x + shift.x, dm.y + shift.y);
            let sub = factor * dc % p;
            let e = rest.entry(target).or_default();
            *e = (*e + p - sub) % p;
            if *e == 0 {
                rest.remove(&target);
            }
        }
    }
    let q = TowerElem::normalize(
        ctx,
        quotient
            .into_iter()
            .map(|(m, c)| (m, BigInt::from(c % p))),
    );
    Ok(Some(q.reduce_mod_p()))
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a is a unit
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}
