//! Truncated Witt vectors `W_N(A)` over a coefficient ring `A`.
//!
//! Arithmetic evaluates the universal sum, product and negation polynomials,
//! which are derived once per `(p, N)` from the ghost components and shared
//! through a process-wide cache. Over rings of characteristic `p` the
//! coefficients are reduced modulo `p` before evaluation.
//!
//! [`theorem`] holds the map `u` to the p-adic completion and the successive
//! approximation that divides by `P - p`.

mod component;
mod poly;
pub mod theorem;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

pub use component::{Fp, WittComponent};
pub use poly::{ghost_poly, witt_polynomials, IntPoly, WittPolys};
pub use theorem::{divide_by_p_minus_p, p_tilde_minus_p, u_map, u_precision, WittDivision};

use crate::fontaine::{Decision, FontaineElem, FontaineError};
use crate::par::{self, Exec};
use crate::tower::TowerError;
use crate::valuation::Prime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Fontaine(#[from] FontaineError),
    #[error("Witt vectors over different contexts")]
    Mismatch,
    #[error("expected {expected} coordinates, got {got}")]
    Length { expected: usize, got: usize },
    #[error("Witt length must be at least 1")]
    ZeroLength,
    #[error("coefficient ring is not perfect")]
    NotPerfect,
    #[error("coordinatewise Frobenius needs a ring of characteristic p")]
    NotCharP,
    #[error("not divisible by p: first coordinate is nonzero")]
    NotDivisibleByP,
    #[error("could not decide whether the first coordinate vanishes")]
    Undetermined,
    #[error("iteration {iteration}: not divisible by P at component {component}")]
    NotDivisible { iteration: usize, component: usize },
    #[error("iteration {iteration}: {source}")]
    Division {
        iteration: usize,
        #[source]
        source: FontaineError,
    },
    #[error("component depth exhausted after {achieved} iterations")]
    DepthExhausted { achieved: usize },
    #[error("precision {requested} exceeds the available {available}")]
    PrecisionExceeded { requested: u32, available: u32 },
    #[error("roundtrip check {0}")]
    Roundtrip(&'static str),
}

/// Prime, length and the universal polynomials.
#[derive(Clone)]
pub struct WittCtx {
    p: Prime,
    len: usize,
    polys: Arc<WittPolys>,
    reduced: Arc<WittPolys>,
    exec: Exec,
}

impl fmt::Debug for WittCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WittCtx")
            .field("p", &self.p)
            .field("len", &self.len)
            .finish_non_exhaustive()
    }
}

/// Contexts agree when they share the same polynomial table.
impl PartialEq for WittCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.len == other.len && Arc::ptr_eq(&self.polys, &other.polys)
    }
}

impl Eq for WittCtx {}

fn reduce_polys(p: Prime, w: &WittPolys) -> WittPolys {
    let red = |v: &[IntPoly]| v.iter().map(|q| q.reduce_mod(p)).collect();
    WittPolys {
        sum: red(&w.sum),
        prod: red(&w.prod),
        neg: red(&w.neg),
    }
}

impl WittCtx {
    /// Context with cached universal polynomials.
    pub fn new(p: Prime, len: usize) -> Result<Self, WittError> {
        if len == 0 {
            return Err(WittError::ZeroLength);
        }
        let polys = poly::cached(p, len);
        Ok(Self::build(p, len, polys))
    }

    /// Context over caller-supplied polynomials, bypassing the cache. Meant
    /// for negative controls that deliberately corrupt the table.
    pub fn from_polys(p: Prime, polys: WittPolys) -> Result<Self, WittError> {
        let len = polys.sum.len();
        if len == 0 {
            return Err(WittError::ZeroLength);
        }
        if polys.prod.len() != len || polys.neg.len() != len {
            return Err(WittError::Length {
                expected: len,
                got: polys.prod.len().min(polys.neg.len()),
            });
        }
        Ok(Self::build(p, len, Arc::new(polys)))
    }

    fn build(p: Prime, len: usize, polys: Arc<WittPolys>) -> Self {
        let reduced = Arc::new(reduce_polys(p, &polys));
        WittCtx {
            p,
            len,
            polys,
            reduced,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn polys(&self) -> &WittPolys {
        &self.polys
    }

    fn table<C: WittComponent>(&self, like: &C) -> &WittPolys {
        if like.char_p() == Some(self.p) {
            &self.reduced
        } else {
            &self.polys
        }
    }
}

/// Evaluates `poly` at `vars`. Terms touching a structurally zero variable are
/// skipped, but the result never claims more precision than the variables
/// the polynomial involves. Term products are fanned out for heavy
/// coefficient rings.
fn eval<C: WittComponent>(poly: &IntPoly, vars: &[C], exec: Exec) -> Result<C, WittError> {
    let zero_vars: Vec<bool> = vars.iter().map(C::is_exact_zero).collect();
    let live: Vec<(&[u32], &BigInt)> = poly
        .terms()
        .filter(|(e, _)| e.iter().zip(&zero_vars).all(|(&k, &z)| k == 0 || !z))
        .collect();

    let needed: BTreeSet<(usize, u32)> = live
        .iter()
        .flat_map(|(e, _)| e.iter().enumerate().filter(|(_, &k)| k > 1).map(|(i, &k)| (i, k)))
        .collect();
    let needed: Vec<(usize, u32)> = needed.into_iter().collect();
    let exec = if C::HEAVY { exec } else { Exec::Sequential };
    let powers: HashMap<(usize, u32), C> = needed
        .iter()
        .copied()
        .zip(par::map(exec, &needed, |&(i, k)| vars[i].pow(u64::from(k))))
        .map(|(key, v)| v.map(|v| (key, v)))
        .collect::<Result<_, _>>()?;

    let term = |(e, c): &(&[u32], &BigInt)| -> Result<C, WittError> {
        let mut acc: Option<C> = None;
        for (i, &k) in e.iter().enumerate() {
            let f = match k {
                0 => continue,
                1 => &vars[i],
                _ => &powers[&(i, k)],
            };
            acc = Some(match acc {
                None => f.clone(),
                Some(a) => a.mul(f)?,
            });
        }
        let c_elem = vars[0].int_like(c);
        match acc {
            None => Ok(c_elem),
            Some(a) if c.is_one() => Ok(a),
            Some(a) if (-*c).is_one() => Ok(a.neg()),
            Some(a) => a.mul(&c_elem),
        }
    };
    let terms = par::map(exec, &live, term);
    let mut sum: Option<C> = None;
    for t in terms {
        let t = t?;
        sum = Some(match sum {
            None => t,
            Some(s) => s.add(&t)?,
        });
    }
    let used = poly.max_exponents();
    let out = sum.unwrap_or_else(|| vars[0].zero_like());
    Ok(vars
        .iter()
        .zip(&used)
        .filter(|(_, &k)| k > 0)
        .fold(out, |acc, (v, _)| acc.meet_precision(v)))
}

/// A Witt vector `(a_0, …, a_(N-1))`.
#[derive(Debug, Clone)]
pub struct WittVec<C> {
    ctx: WittCtx,
    comps: Vec<C>,
}

impl<C: WittComponent> WittVec<C> {
    pub fn new(ctx: &WittCtx, comps: Vec<C>) -> Result<Self, WittError> {
        if comps.len() != ctx.len {
            return Err(WittError::Length {
                expected: ctx.len,
                got: comps.len(),
            });
        }
        Ok(WittVec {
            ctx: ctx.clone(),
            comps,
        })
    }

    pub fn zero(ctx: &WittCtx, like: &C) -> Self {
        WittVec {
            ctx: ctx.clone(),
            comps: vec![like.zero_like(); ctx.len],
        }
    }

    pub fn one(ctx: &WittCtx, like: &C) -> Self {
        Self::teichmuller(ctx, like.one_like())
    }

    /// `τ(a) = (a, 0, 0, …)`.
    pub fn teichmuller(ctx: &WittCtx, a: C) -> Self {
        let mut comps = vec![a.zero_like(); ctx.len];
        comps[0] = a;
        WittVec {
            ctx: ctx.clone(),
            comps,
        }
    }

    /// The image of an integer, by double-and-add on `1`.
    pub fn from_integer(ctx: &WittCtx, n: &BigInt, like: &C) -> Result<Self, WittError> {
        let one = Self::one(ctx, like);
        let mut acc = Self::zero(ctx, like);
        let mag = n.magnitude();
        for i in (0..mag.bits()).rev() {
            acc = acc.add(&acc)?;
            if mag.bit(i) {
                acc = acc.add(&one)?;
            }
        }
        Ok(if n.is_negative() { acc.neg()? } else { acc })
    }

    pub fn ctx(&self) -> &WittCtx {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> &[C] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> Option<&C> {
        self.comps.get(i)
    }

    pub fn into_components(self) -> Vec<C> {
        self.comps
    }

    fn check(&self, other: &Self) -> Result<(), WittError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(WittError::Mismatch)
        }
    }

    fn apply(&self, table: &[IntPoly], vars: &[C]) -> Result<Self, WittError> {
        let comps = table
            .iter()
            .map(|q| eval(q, vars, self.ctx.exec))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WittVec {
            ctx: self.ctx.clone(),
            comps,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, WittError> {
        self.check(other)?;
        let vars: Vec<C> = self.comps.iter().chain(&other.comps).cloned().collect();
        self.apply(&self.ctx.table(&self.comps[0]).sum, &vars)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, WittError> {
        self.check(other)?;
        let vars: Vec<C> = self.comps.iter().chain(&other.comps).cloned().collect();
        self.apply(&self.ctx.table(&self.comps[0]).prod, &vars)
    }

    pub fn neg(&self) -> Result<Self, WittError> {
        let vars: Vec<C> = self.comps.iter().chain(&self.comps).cloned().collect();
        self.apply(&self.ctx.table(&self.comps[0]).neg, &vars)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, WittError> {
        self.add(&other.neg()?)
    }

    /// `V(x) = (0, x_0, …, x_(N-2))`.
    pub fn verschiebung(&self) -> Self {
        let mut comps = Vec::with_capacity(self.len());
        comps.push(self.comps[0].zero_like());
        comps.extend(self.comps[..self.len() - 1].iter().cloned());
        WittVec {
            ctx: self.ctx.clone(),
            comps,
        }
    }

    /// `F(x) = (x_0^p, x_1^p, …)`, valid in characteristic `p`.
    pub fn frobenius(&self) -> Result<Self, WittError> {
        if self.comps[0].char_p() != Some(self.ctx.p) {
            return Err(WittError::NotCharP);
        }
        let p = self.ctx.p.get();
        let comps = self
            .comps
            .iter()
            .map(|c| c.pow(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WittVec {
            ctx: self.ctx.clone(),
            comps,
        })
    }

    /// `p x` as `V(F(x))`.
    pub fn times_p(&self) -> Result<Self, WittError> {
        Ok(self.frobenius()?.verschiebung())
    }

    /// `x ⊕ x ⊕ … ⊕ x` with `k` summands, one addition at a time.
    pub fn repeated_add(&self, k: u64) -> Result<Self, WittError> {
        let mut acc = Self::zero(&self.ctx, &self.comps[0]);
        for _ in 0..k {
            acc = acc.add(self)?;
        }
        Ok(acc)
    }

    /// Inverse of `v ↦ p v = (0, v_0^p, …, v_(N-2)^p)` over a perfect ring.
    /// The last coordinate of the result is not determined by `x` and is set
    /// to zero.
    pub fn p_divide(&self) -> Result<Self, WittError> {
        match self.comps[0].decide_zero() {
            Decision::Holds => {}
            Decision::Fails => return Err(WittError::NotDivisibleByP),
            Decision::Undetermined => return Err(WittError::Undetermined),
        }
        let mut comps = self.comps[1..]
            .iter()
            .map(C::proot)
            .collect::<Result<Vec<_>, _>>()?;
        let like = comps.first().unwrap_or(&self.comps[0]).zero_like();
        comps.push(like);
        Ok(WittVec {
            ctx: self.ctx.clone(),
            comps,
        })
    }

    /// Coordinatewise comparison.
    pub fn decide_eq(&self, other: &Self) -> Result<Decision, WittError> {
        self.check(other)?;
        let mut d = Decision::Holds;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            d = d.and(a.decide_eq(b)?);
            if d == Decision::Fails {
                break;
            }
        }
        Ok(d)
    }

    pub fn is_zero_decision(&self) -> Decision {
        self.comps
            .iter()
            .fold(Decision::Holds, |d, c| d.and(c.decide_zero()))
    }
}

impl WittVec<BigInt> {
    /// Ghost components `w_i = Σ_(j<=i) p^j a_j^(p^(i-j))`.
    pub fn ghost(&self) -> Vec<BigInt> {
        let p = self.ctx.p;
        (0..self.len())
            .map(|i| {
                (0..=i)
                    .map(|j| {
                        let e = p.pow_u32((i - j) as u32) as usize;
                        p.pow(j as u32) * num_traits::pow(self.comps[j].clone(), e)
                    })
                    .sum()
            })
            .collect()
    }
}

impl WittVec<FontaineElem> {
    /// Smallest Fontaine depth among the coordinates.
    pub fn depth(&self) -> usize {
        self.comps.iter().map(FontaineElem::depth).min().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.comps.iter().map(FontaineElem::to_json).collect())
    }
}

impl<C: fmt::Display> fmt::Display for WittVec<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, n: usize) -> WittCtx {
        WittCtx::new(Prime::new(p).unwrap(), n).unwrap()
    }

    fn fp(c: &WittCtx, vals: &[i64]) -> WittVec<Fp> {
        let comps = vals.iter().map(|&v| Fp::new(c.p(), &BigInt::from(v))).collect();
        WittVec::new(c, comps).unwrap()
    }

    fn ints(c: &WittCtx, vals: &[i64]) -> WittVec<BigInt> {
        WittVec::new(c, vals.iter().map(|&v| BigInt::from(v)).collect()).unwrap()
    }

    #[test]
    fn one_plus_one_in_w2_f2() {
        let c = ctx(2, 2);
        let one = fp(&c, &[1, 0]);
        assert_eq!(one.add(&one).unwrap().components(), fp(&c, &[0, 1]).components());
    }

    #[test]
    fn additive_order_of_one() {
        for (p, n) in [(2u64, 3usize), (3, 3), (5, 2)] {
            let c = ctx(p, n);
            let one = Fp::new(c.p(), &BigInt::one());
            let one = WittVec::one(&c, &one);
            let order = p.pow(n as u32);
            assert!(one.repeated_add(order).unwrap().is_zero_decision().holds());
            assert!(!one.repeated_add(order / p).unwrap().is_zero_decision().holds());
        }
    }

    #[test]
    fn ghost_is_additive_and_multiplicative() {
        let c = ctx(3, 3);
        let x = ints(&c, &[4, -2, 7]);
        let y = ints(&c, &[-5, 3, 1]);
        let gx = x.ghost();
        let gy = y.ghost();
        let gs = x.add(&y).unwrap().ghost();
        let gm = x.mul(&y).unwrap().ghost();
        let gn = x.neg().unwrap().ghost();
        for i in 0..3 {
            assert_eq!(gs[i], &gx[i] + &gy[i]);
            assert_eq!(gm[i], &gx[i] * &gy[i]);
            assert_eq!(gn[i], -&gx[i]);
        }
        assert_eq!(ints(&c, &[2, 0, 0]).ghost(), vec![2.into(), 8.into(), 512.into()]);
    }

    #[test]
    fn from_integer_matches_repeated_add() {
        let c = ctx(5, 2);
        let like = Fp::new(c.p(), &BigInt::one());
        let one = WittVec::one(&c, &like);
        for n in [0i64, 1, 7, 24, 25, -3] {
            let a = WittVec::from_integer(&c, &BigInt::from(n), &like).unwrap();
            let b = if n >= 0 {
                one.repeated_add(n as u64).unwrap()
            } else {
                one.repeated_add((-n) as u64).unwrap().neg().unwrap()
            };
            assert!(a.decide_eq(&b).unwrap().holds(), "n = {n}");
        }
    }

    #[test]
    fn p_divide_inverts_times_p() {
        let c = ctx(3, 3);
        let x = fp(&c, &[2, 1, 2]);
        let px = x.times_p().unwrap();
        assert!(px.decide_eq(&x.repeated_add(3).unwrap()).unwrap().holds());
        let back = px.p_divide().unwrap();
        assert_eq!(back.components(), fp(&c, &[2, 1, 0]).components());
        assert!(matches!(x.p_divide(), Err(WittError::NotDivisibleByP)));
    }

    #[test]
    fn tampered_table_breaks_ghost() {
        let p = Prime::new(2).unwrap();
        let mut polys = ctx(2, 2).polys().clone();
        polys.sum[1] = polys.sum[1].add(&IntPoly::var(4, 0));
        let bad = WittCtx::from_polys(p, polys).unwrap();
        let x = ints(&bad, &[1, 1]);
        let g = x.add(&x).unwrap().ghost();
        assert_ne!(g[1], BigInt::from(2) * &x.ghost()[1]);
        assert!(matches!(ints(&bad, &[1, 1]).add(&ints(&ctx(2, 2), &[1, 1])), Err(WittError::Mismatch)));
    }

    #[test]
    fn frobenius_needs_char_p() {
        let c = ctx(2, 2);
        assert!(matches!(ints(&c, &[1, 1]).frobenius(), Err(WittError::NotCharP)));
    }
}
