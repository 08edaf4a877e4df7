//! Localized elements `r / Π^j` and root-closure membership certificates.
//!
//! An element `x` of the localization lies in the root closure when some
//! `x^(p^m)` is already integral. Since `p = Π^(p^n)` at level `n`, every
//! p-power denominator is a Π-power, so divisibility checks stay exact and
//! one-dimensional. Membership is only ever *semi*-decided: a failed search is
//! bound-relative, except for the structural refutation documented on
//! [`Membership::Refuted`].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use serde_json::json;
use thiserror::Error;

use crate::tower::{poly_divides, Monomial, ResidueElem, RingMode, TowerCtx, TowerElem, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error("hypothesis not met: a^(p^{n}) is not divisible by p")]
    HypothesisNotMet { n: u32 },
    #[error("level {level} has no root p^(1/p^{n})")]
    LevelTooLow { level: u32, n: u32 },
    #[error("no certificate for a/p^(1/p^{n}) with m <= {n}: this contradicts the kernel lemma")]
    LemmaViolated { n: u32 },
    #[error("no certificate found up to m = {m_max}")]
    NoCertificate { m_max: u32 },
    #[error("sum has no certificate with m <= {bound}: this contradicts the closure bound")]
    BoundViolated { bound: u64 },
    #[error("summands are refuted members of the root closure")]
    NotCertified,
}

/// `num / Π^denom_exp` at `num`'s level, with `denom_exp` minimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalElem {
    num: TowerElem,
    denom_exp: u64,
}

impl LocalElem {
    /// Builds `num / Π^j` and cancels common factors of `Π`.
    pub fn new(num: TowerElem, j: u64) -> Self {
        match num.pi_valuation() {
            None => LocalElem {
                num,
                denom_exp: 0,
            },
            Some(v) => {
                let s = v.min(j);
                LocalElem {
                    num: num.pi_divide(s).expect("valuation bounds the division"),
                    denom_exp: j - s,
                }
            }
        }
    }

    pub fn integral(num: TowerElem) -> Self {
        LocalElem { num, denom_exp: 0 }
    }

    pub fn zero(ctx: TowerCtx) -> Self {
        Self::integral(TowerElem::zero(ctx))
    }

    pub fn one(ctx: TowerCtx) -> Self {
        Self::integral(TowerElem::one(ctx))
    }

    pub fn num(&self) -> &TowerElem {
        &self.num
    }

    pub fn denom_exp(&self) -> u64 {
        self.denom_exp
    }

    pub fn ctx(&self) -> TowerCtx {
        self.num.ctx()
    }

    pub fn level(&self) -> u32 {
        self.num.level()
    }

    pub fn is_integral(&self) -> bool {
        self.denom_exp == 0
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The exponent `k` with `p^k x` integral (smallest such `k`).
    pub fn p_denominator_exp(&self) -> u64 {
        self.denom_exp.div_ceil(u64::from(self.ctx().pi_order()))
    }

    pub fn add(&self, other: &LocalElem) -> Result<LocalElem, TowerError> {
        let j = self.denom_exp.max(other.denom_exp);
        let a = mul_pi_power(&self.num, j - self.denom_exp);
        let b = mul_pi_power(&other.num, j - other.denom_exp);
        Ok(LocalElem::new(a.add(&b)?, j))
    }

    pub fn sub(&self, other: &LocalElem) -> Result<LocalElem, TowerError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LocalElem {
        LocalElem {
            num: self.num.neg(),
            denom_exp: self.denom_exp,
        }
    }

    pub fn mul(&self, other: &LocalElem) -> Result<LocalElem, TowerError> {
        Ok(LocalElem::new(
            self.num.mul(&other.num)?,
            self.denom_exp + other.denom_exp,
        ))
    }

    pub fn scale(&self, k: &BigInt) -> LocalElem {
        LocalElem::new(self.num.scale(k), self.denom_exp)
    }

    pub fn pow(&self, e: u64) -> LocalElem {
        LocalElem::new(self.num.pow(e), self.denom_exp * e)
    }

    /// `x / Π^k`.
    pub fn div_pi(&self, k: u64) -> LocalElem {
        LocalElem::new(self.num.clone(), self.denom_exp + k)
    }

    /// `x * Π^k`.
    pub fn mul_pi(&self, k: u64) -> LocalElem {
        let cancel = k.min(self.denom_exp);
        LocalElem::new(mul_pi_power(&self.num, k - cancel), self.denom_exp - cancel)
    }

    /// `x / p`.
    pub fn div_p(&self) -> LocalElem {
        self.div_pi(u64::from(self.ctx().pi_order()))
    }

    pub fn embed(&self, to_level: u32) -> Result<LocalElem, TowerError> {
        let f = u64::from(self.ctx().p().pow_u32(to_level.saturating_sub(self.level())));
        Ok(LocalElem {
            num: self.num.embed(to_level)?,
            denom_exp: self.denom_exp * f,
        })
    }

    /// Re-expresses the element at the lowest level `>= floor` that contains it.
    pub fn descend_to(&self, floor: u32) -> LocalElem {
        let p = u64::from(self.ctx().p().pow_u32(1));
        let mut cur = self.clone();
        while cur.level() > floor && cur.denom_exp.is_multiple_of(p) {
            match cur.num.descend() {
                Some(num) => {
                    cur = LocalElem {
                        num,
                        denom_exp: cur.denom_exp / p,
                    }
                }
                None => break,
            }
        }
        cur
    }

    /// Embeds both operands to their common level.
    pub fn align(&self, other: &LocalElem) -> Result<(LocalElem, LocalElem), TowerError> {
        let level = self.level().max(other.level());
        Ok((self.embed(level)?, other.embed(level)?))
    }

    /// Canonical representative of the class of `x` modulo `p^k R`.
    ///
    /// A term `λ Π^a` of the numerator lies in `p^k Π^j R` iff
    /// `p^n v_p(λ) + a >= j + k p^n`, so each coefficient is reduced modulo
    /// `p^e` with `e = ceil((j + k p^n - a) / p^n)`. If the reduced numerator
    /// becomes Π-divisible the denominator shrinks and the reduction repeats.
    pub fn reduce_mod_p_power(&self, k: u32) -> LocalElem {
        let ctx = self.ctx();
        let order = u64::from(ctx.pi_order());
        let p = ctx.p();
        let mut cur = self.clone();
        loop {
            let j = cur.denom_exp;
            let num = cur.num.map_coefficients(|m: &Monomial, c: &BigInt| {
                let need = j + u64::from(k) * order - u64::from(m.pi);
                let e = need.div_ceil(order);
                c.mod_floor(&p.pow(e as u32))
            });
            let next = LocalElem::new(num, j);
            if next.denom_exp == j {
                return next;
            }
            cur = next;
        }
    }

    /// Reduction of the numerator modulo `Π`, as a polynomial in `X, Y` over `F_p`.
    pub fn numerator_mod_pi(&self) -> ResidueElem {
        self.num.reduce_mod_p().mod_pi()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "level": self.level(),
            "denom_exp": self.denom_exp,
            "num_terms": self.num.to_json_terms(),
        })
    }

    /// Inverse of [`LocalElem::to_json`]; the family comes from the caller.
    pub fn from_json(family: TowerCtx, v: &serde_json::Value) -> Option<LocalElem> {
        let level = u32::try_from(v.get("level")?.as_u64()?).ok()?;
        let num = TowerElem::from_json_terms(family.at_level(level), v.get("num_terms")?.as_array()?)?;
        Some(LocalElem::new(num, v.get("denom_exp")?.as_u64()?))
    }

    /// Rendering in the expression grammar.
    pub fn to_expr(&self) -> String {
        if self.denom_exp == 0 {
            return self.num.to_expr();
        }
        let n = u64::from(self.ctx().pi_order());
        let g = self.denom_exp.gcd(&n);
        let den = if n / g == 1 {
            format!("p^{}", self.denom_exp / g)
        } else {
            format!("p^({}/{})", self.denom_exp / g, n / g)
        };
        format!("({})/{}", self.num.to_expr(), den)
    }
}

impl fmt::Display for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom_exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / P^{}", self.num, self.denom_exp)
        }
    }
}

/// `e * Π^k`, normalized.
pub(crate) fn mul_pi_power(e: &TowerElem, k: u64) -> TowerElem {
    if k == 0 {
        return e.clone();
    }
    let k = u32::try_from(k).expect("Π exponent exceeds u32");
    TowerElem::normalize(
        e.ctx(),
        e.terms()
            .map(|(m, c)| (Monomial::new(m.pi + k, m.x, m.y), c.clone())),
    )
}

/// Witness that `elem^(p^m)` is integral: `witness = num^(p^m) / Π^(j p^m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureCert {
    pub elem: LocalElem,
    pub m: u32,
    pub witness: TowerElem,
}

impl ClosureCert {
    /// Re-checks the certificate from scratch: raises the numerator by plain
    /// square-and-multiply and compares against `Π^(j p^m) * witness`.
    pub fn validate(&self) -> bool {
        let ctx = self.elem.ctx();
        if self.witness.ctx() != ctx {
            return false;
        }
        let e = ctx.p().get().checked_pow(self.m);
        let Some(e) = e else { return false };
        let lhs = self.elem.num.pow(e);
        let rhs = mul_pi_power(&self.witness, self.elem.denom_exp * e);
        lhs == rhs
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "m": self.m,
            "denom_exp": self.elem.denom_exp,
            "level": self.elem.level(),
            "num_terms": self.elem.num.to_json_terms(),
            "witness_terms": self.witness.to_json_terms(),
        })
    }

    /// Rebuilds a certificate from its JSON detail; the ring family comes from the caller.
    pub fn from_json(family: TowerCtx, v: &serde_json::Value) -> Option<ClosureCert> {
        let level = u32::try_from(v.get("level")?.as_u64()?).ok()?;
        let ctx = family.at_level(level);
        let m = u32::try_from(v.get("m")?.as_u64()?).ok()?;
        let j = v.get("denom_exp")?.as_u64()?;
        let num = TowerElem::from_json_terms(ctx, v.get("num_terms")?.as_array()?)?;
        let witness = TowerElem::from_json_terms(ctx, v.get("witness_terms")?.as_array()?)?;
        Some(ClosureCert {
            elem: LocalElem { num, denom_exp: j },
            m,
            witness,
        })
    }
}

/// Outcome of a bounded membership search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Certified(ClosureCert),
    /// No `m <= m_max` works. Not a proof of non-membership.
    NoCertificate { m_max: u32 },
    /// Genuine non-membership: the numerator is not nilpotent modulo `Π`, so
    /// no power of it is ever divisible by `Π`. The obstruction is the
    /// numerator's image in `F_p[X, Y]` (modulo the relation).
    Refuted { obstruction: ResidueElem },
}

impl Membership {
    pub fn cert(&self) -> Option<&ClosureCert> {
        match self {
            Membership::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn into_cert(self) -> Option<ClosureCert> {
        match self {
            Membership::Certified(c) => Some(c),
            _ => None,
        }
    }
}

/// Whether the image of `r` in `R_n / Π R_n` is nilpotent.
///
/// `R_n / Π = F_p[X, Y] / ((X^d + Y^d)^(p^n))` in quotient mode (and a
/// polynomial ring in free mode). With `gcd(d, p) = 1` the form `X^d + Y^d`
/// is squarefree, so the nilradical is generated by it for `n >= 1` and is
/// zero at level 0 or in free mode.
fn nilpotent_mod_pi(r: &ResidueElem) -> bool {
    if r.is_zero() {
        return true;
    }
    let ctx = r.ctx();
    if ctx.mode() == RingMode::Free || ctx.level() == 0 {
        return false;
    }
    let d = ctx.degree();
    let h = TowerElem::normalize(
        ctx,
        [
            (Monomial::new(0, d, 0), BigInt::from(1)),
            (Monomial::new(0, 0, d), BigInt::from(1)),
        ],
    )
    .reduce_mod_p();
    poly_divides(&h, r)
        .expect("both operands are pure polynomials")
        .is_some()
}

/// First `m` in `0..=bound` with `elem^(p^m)` integral.
fn search(elem: &LocalElem, bound: u64) -> Option<ClosureCert> {
    let p = elem.ctx().p().get();
    let j = elem.denom_exp;
    let mut power = elem.num.clone();
    let mut scale = 1u64;
    for m in 0..=bound {
        if m > 0 {
            power = power.pow(p);
            scale = scale.checked_mul(p)?;
        }
        if let Ok(witness) = power.pi_divide(j * scale) {
            return Some(ClosureCert {
                elem: elem.clone(),
                m: u32::try_from(m).ok()?,
                witness,
            });
        }
    }
    None
}

/// Smallest `m <= m_max` with `c^(p^m)` integral, as a certificate.
pub fn membership(c: &LocalElem, m_max: u32) -> Membership {
    if c.denom_exp > 0 && !nilpotent_mod_pi(&c.numerator_mod_pi()) {
        return Membership::Refuted {
            obstruction: c.numerator_mod_pi(),
        };
    }
    match search(c, u64::from(m_max)) {
        Some(cert) => Membership::Certified(cert),
        None => Membership::NoCertificate { m_max },
    }
}

/// Exponent bound `2 k p^n + n + 1` for a sum of closure elements, where
/// `n` is the larger certificate exponent and `p^k` clears both denominators.
pub fn closure_add_bound(s: &ClosureCert, t: &ClosureCert) -> u64 {
    let p = s.elem.ctx().p().get();
    let n = s.m.max(t.m);
    let k = s.elem.p_denominator_exp().max(t.elem.p_denominator_exp());
    p.checked_pow(n)
        .and_then(|pn| pn.checked_mul(2 * k))
        .and_then(|v| v.checked_add(u64::from(n) + 1))
        .unwrap_or(u64::MAX)
}

/// Certificate for `s + t`.
///
/// The search runs `m = 0, 1, …` up to [`closure_add_bound`]; it must succeed
/// by then, so exhausting the bound is reported as [`ClosureError::BoundViolated`].
pub fn closure_add(s: &ClosureCert, t: &ClosureCert) -> Result<ClosureCert, ClosureError> {
    let sum = s.elem.add(&t.elem)?;
    let bound = closure_add_bound(s, t);
    search(&sum, bound).ok_or(ClosureError::BoundViolated { bound })
}

/// Certificate for `s * t`: `(st)^(p^n) = s^(p^n) t^(p^n)` with `n` the larger exponent.
pub fn closure_mul(s: &ClosureCert, t: &ClosureCert) -> Result<ClosureCert, ClosureError> {
    let prod = s.elem.mul(&t.elem)?;
    search(&prod, u64::from(s.m.max(t.m))).ok_or(ClosureError::BoundViolated {
        bound: u64::from(s.m.max(t.m)),
    })
}

/// Constructive kernel lemma: if `a^(p^n) ∈ pR` then `a / p^(1/p^n)` has a
/// closure certificate with `m <= n` (indeed `(a/Π_n)^(p^n) = a^(p^n)/p`).
pub fn kernel_lemma_factor(a: &TowerElem, n: u32, m_max: u32) -> Result<ClosureCert, ClosureError> {
    let ctx = a.ctx();
    if n > ctx.level() {
        return Err(ClosureError::LevelTooLow {
            level: ctx.level(),
            n,
        });
    }
    let p = ctx.p();
    if a.pow(u64::from(p.pow_u32(n))).p_divide().is_err() {
        return Err(ClosureError::HypothesisNotMet { n });
    }
    let pi_n = u64::from(p.pow_u32(ctx.level() - n));
    let elem = LocalElem::new(a.clone(), pi_n);
    let bound = m_max.min(n);
    match search(&elem, u64::from(bound)) {
        Some(cert) => Ok(cert),
        None if m_max >= n => Err(ClosureError::LemmaViolated { n }),
        None => Err(ClosureError::NoCertificate { m_max }),
    }
}

/// Independent check of a membership claim at a given exponent.
pub fn is_integral_power(elem: &LocalElem, m: u32) -> bool {
    let p = elem.ctx().p().get();
    let e = p.pow(m);
    let power = elem.num.pow(e);
    power.pi_divide(elem.denom_exp * e).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Prime;

    fn ctx(p: u64, level: u32) -> TowerCtx {
        TowerCtx::new(Prime::new(p).unwrap(), level, 3, RingMode::Quotient).unwrap()
    }

    /// `Π^3 + X^3 + Y^3` at the given level.
    fn u(c: TowerCtx) -> TowerElem {
        TowerElem::normalize(
            c,
            [
                (Monomial::new(3, 0, 0), BigInt::from(1)),
                (Monomial::new(0, 3, 0), BigInt::from(1)),
                (Monomial::new(0, 0, 3), BigInt::from(1)),
            ],
        )
    }

    #[test]
    fn canonical_form_cancels_pi() {
        let c = ctx(5, 1);
        let e = LocalElem::new(TowerElem::constant(c, 5), 2);
        assert_eq!(e.denom_exp(), 0);
        assert_eq!(e.num(), &TowerElem::monomial(c, 1, Monomial::new(3, 0, 0)));
        let x = LocalElem::new(TowerElem::x(c), 2);
        assert_eq!(x.denom_exp(), 2);
    }

    #[test]
    fn c1_is_certified_at_m1() {
        let c = ctx(5, 1);
        let c1 = LocalElem::new(u(c), 1);
        let cert = membership(&c1, 2).into_cert().expect("member");
        assert_eq!(cert.m, 1);
        assert!(cert.validate());
        // u^5 / 5, hand-checked on one coefficient: X^3 Y^12 has multinomial 5 in u^5
        assert_eq!(cert.witness.coeff(&Monomial::new(0, 3, 12)), BigInt::from(1));
    }

    #[test]
    fn integral_elements_certify_at_m0() {
        let c = ctx(5, 1);
        let cert = membership(&LocalElem::integral(TowerElem::x(c)), 3)
            .into_cert()
            .unwrap();
        assert_eq!(cert.m, 0);
        assert_eq!(cert.witness, TowerElem::x(c));
    }

    #[test]
    fn x_over_pi_is_refuted() {
        let c = ctx(5, 1);
        let e = LocalElem::new(TowerElem::x(c), 1);
        assert!(matches!(membership(&e, 3), Membership::Refuted { .. }));
        assert!(search(&e, 3).is_none(), "the bounded search agrees");
    }

    #[test]
    fn closure_add_examples() {
        let c = ctx(5, 1);
        let x = membership(&LocalElem::integral(TowerElem::x(c)), 0).into_cert().unwrap();
        let y = membership(&LocalElem::integral(TowerElem::y(c)), 0).into_cert().unwrap();
        assert_eq!(closure_add(&x, &y).unwrap().m, 0);

        let c1 = membership(&LocalElem::new(u(c), 1), 2).into_cert().unwrap();
        let s = closure_add(&c1, &x).unwrap();
        assert_eq!(s.m, 1);
        assert!(s.validate());
        let d = closure_add(&c1, &c1).unwrap();
        assert_eq!(d.m, 1);
        assert_eq!(d.witness, c1.witness.scale(&BigInt::from(32)));
    }

    #[test]
    fn kernel_lemma_examples() {
        let c = ctx(5, 1);
        let cert = kernel_lemma_factor(&TowerElem::pi(c), 1, 3).unwrap();
        assert_eq!(cert.m, 0);
        assert_eq!(cert.elem, LocalElem::one(c));

        let cert = kernel_lemma_factor(&u(c), 1, 3).unwrap();
        assert_eq!(cert.m, 1);
        assert_eq!(cert.elem, LocalElem::new(u(c), 1));

        assert_eq!(
            kernel_lemma_factor(&TowerElem::x(c), 1, 3),
            Err(ClosureError::HypothesisNotMet { n: 1 })
        );
    }

    #[test]
    fn kernel_lemma_at_level_two() {
        let c = ctx(5, 2);
        let cert = kernel_lemma_factor(&u(c), 2, 5).unwrap();
        assert_eq!(cert.m, 2);
        assert!(cert.validate());
    }

    #[test]
    fn reduction_mod_p_is_canonical() {
        let c = ctx(5, 1);
        let x = LocalElem::new(u(c), 1);
        let shifted = x.add(&LocalElem::integral(TowerElem::constant(c, 5).mul(&TowerElem::y(c)).unwrap())).unwrap();
        assert_eq!(x.reduce_mod_p_power(1), shifted.reduce_mod_p_power(1));
        // p * (anything integral) is zero mod pR
        let z = LocalElem::integral(TowerElem::x(c).scale(&BigInt::from(10)));
        assert!(z.reduce_mod_p_power(1).is_zero());
        // (5 / Π) = Π^4 stays nonzero mod p
        let w = LocalElem::new(TowerElem::constant(c, 5), 1).reduce_mod_p_power(1);
        assert_eq!(w.num(), &TowerElem::monomial(c, 1, Monomial::new(4, 0, 0)));
    }

    #[test]
    fn tampered_certificate_fails_validation() {
        let c = ctx(5, 1);
        let mut cert = membership(&LocalElem::new(u(c), 1), 2).into_cert().unwrap();
        cert.witness = cert.witness.add(&TowerElem::one(c)).unwrap();
        assert!(!cert.validate());
    }

    #[test]
    fn cert_json_roundtrip() {
        let c = ctx(5, 1);
        let cert = membership(&LocalElem::new(u(c), 1), 2).into_cert().unwrap();
        let back = ClosureCert::from_json(c.at_level(0), &cert.to_json()).unwrap();
        assert_eq!(back, cert);
    }
}
