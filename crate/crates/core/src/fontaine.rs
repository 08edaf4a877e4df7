//! Truncated Fontaine-ring elements as Frobenius-compatible sequences.
//!
//! A depth-`N` element is a list `r_0, …, r_N` of classes modulo `p` with
//! `r_(i+1)^p = r_i`; component `i` lives at tower level `>= i`, and
//! comparisons embed to the larger level. Each component is stored as a
//! [`LocalElem`] reduced modulo `pR` (see [`LocalElem::reduce_mod_p_power`]).
//!
//! Two component models share the representation:
//!
//! * [`ComponentMode::PlainR`]: classes in `R/pR`. Representatives are
//!   integral and canonical, so equality is exact.
//! * [`ComponentMode::ClosureCerts`]: classes in `C(R)/pC(R)`. The root closure
//!   has no finite presentation here, so congruence modulo `p C(R)` is
//!   semi-decided by a bounded certificate search and may come back
//!   [`Decision::Undetermined`].
//!
//! Operations that take p-th roots shift the sequence and lose one level of
//! depth; [`FontaineElem::divide_by_p_element`] documents its own consumption.

use std::fmt;

use num_bigint::BigInt;
use serde_json::json;
use thiserror::Error;

use crate::closure::{kernel_lemma_factor, membership, ClosureCert, ClosureError, LocalElem, Membership};
use crate::tower::{ResidueElem, TowerCtx, TowerElem, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FontaineError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error("operands belong to different Fontaine rings")]
    Mismatch,
    #[error("depth exhausted")]
    DepthExhausted,
    #[error("component {0} is not integral in plain mode")]
    NotIntegral(usize),
    #[error("not divisible by P: component {0} has no factor p^(1/p^n)")]
    NotDivisible(usize),
    #[error("congruence at component {index} ({step}) could not be decided within the certificate bound")]
    UndeterminedCongruence { index: usize, step: Step },
    #[error("congruence at component {index} ({step}) fails: this contradicts the division argument")]
    CongruenceFailed { index: usize, step: Step },
    #[error("precision {requested} exceeds the available {available}")]
    PrecisionExceeded { requested: u32, available: u32 },
}

/// Outcome of a possibly semi-decided comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Holds,
    Fails,
    Undetermined,
}

impl Decision {
    pub fn holds(self) -> bool {
        self == Decision::Holds
    }

    /// Conjunction: any failure wins, then any undetermined.
    pub fn and(self, other: Decision) -> Decision {
        match (self, other) {
            (Decision::Fails, _) | (_, Decision::Fails) => Decision::Fails,
            (Decision::Undetermined, _) | (_, Decision::Undetermined) => Decision::Undetermined,
            _ => Decision::Holds,
        }
    }

    pub fn from_bool(b: bool) -> Decision {
        if b {
            Decision::Holds
        } else {
            Decision::Fails
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Holds => "holds",
            Decision::Fails => "fails",
            Decision::Undetermined => "undetermined",
        }
    }
}

/// Steps of the division-by-`P` algorithm that carry a congruence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// `s_(n+1)^p ≡ s_n` modulo `p^(1 - 1/p^n)`.
    RootCongruence,
    /// `t_n^p ≡ t_(n-1)` modulo `p`.
    Compatibility,
    /// `r_n ≡ p^(1/p^n) t_n` modulo `p`.
    Product,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::RootCongruence => "root congruence",
            Step::Compatibility => "compatibility",
            Step::Product => "product",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentMode {
    PlainR,
    ClosureCerts { m_max: u32 },
}

impl ComponentMode {
    pub fn name(self) -> &'static str {
        match self {
            ComponentMode::PlainR => "plain",
            ComponentMode::ClosureCerts { .. } => "closure",
        }
    }
}

/// A truncated element of the Fontaine ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FontaineElem {
    family: TowerCtx,
    mode: ComponentMode,
    comps: Vec<LocalElem>,
}

/// Value of `θ` known modulo `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicValue {
    pub value: LocalElem,
    pub precision: u32,
}

impl PadicValue {
    pub fn new(value: LocalElem, precision: u32) -> Self {
        PadicValue {
            value: value.reduce_mod_p_power(precision),
            precision,
        }
    }

    pub fn level(&self) -> u32 {
        self.value.level()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Equality at the coarser of the two precisions, after embedding.
    pub fn congruent(&self, other: &PadicValue) -> Result<bool, TowerError> {
        let k = self.precision.min(other.precision);
        let (a, b) = self.value.align(&other.value)?;
        Ok(a.sub(&b)?.reduce_mod_p_power(k).is_zero())
    }

    pub fn add(&self, other: &PadicValue) -> Result<PadicValue, TowerError> {
        let (a, b) = self.value.align(&other.value)?;
        Ok(PadicValue::new(a.add(&b)?, self.precision.min(other.precision)))
    }

    pub fn mul(&self, other: &PadicValue) -> Result<PadicValue, TowerError> {
        let (a, b) = self.value.align(&other.value)?;
        Ok(PadicValue::new(a.mul(&b)?, self.precision.min(other.precision)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "precision": self.precision, "value": self.value.to_json() })
    }
}

impl fmt::Display for PadicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod p^{}", self.value, self.precision)
    }
}

/// Result of dividing by `P`, with the algorithm's intermediate data.
#[derive(Debug, Clone)]
pub struct PDivision {
    /// `t` with `P t = e`, at depth one less than the input.
    pub quotient: FontaineElem,
    /// `s_n` with `r_n = p^(1/p^n) s_n` on representatives.
    pub factors: Vec<LocalElem>,
    /// Closure certificates for the `s_n` (closure mode only).
    pub certs: Vec<ClosureCert>,
    /// Every congruence the algorithm checked, with its outcome.
    pub checks: Vec<(Step, usize, Decision)>,
}

impl FontaineElem {
    /// Builds an element from component representatives; each is reduced mod `p`.
    pub fn from_components(
        family: TowerCtx,
        mode: ComponentMode,
        comps: Vec<LocalElem>,
    ) -> Result<Self, FontaineError> {
        if comps.is_empty() {
            return Err(FontaineError::DepthExhausted);
        }
        let family = family.at_level(0);
        let mut out = Vec::with_capacity(comps.len());
        for (i, c) in comps.into_iter().enumerate() {
            if !c.ctx().same_family(&family) {
                return Err(FontaineError::Mismatch);
            }
            let c = if c.level() < i as u32 {
                c.embed(i as u32)?
            } else {
                c
            };
            let c = c.reduce_mod_p_power(1).descend_to(i as u32);
            if mode == ComponentMode::PlainR && !c.is_integral() {
                return Err(FontaineError::NotIntegral(i));
            }
            out.push(c);
        }
        Ok(FontaineElem {
            family,
            mode,
            comps: out,
        })
    }

    pub fn from_residues(
        family: TowerCtx,
        mode: ComponentMode,
        comps: Vec<ResidueElem>,
    ) -> Result<Self, FontaineError> {
        Self::from_components(
            family,
            mode,
            comps
                .into_iter()
                .map(|r| LocalElem::integral(r.into_lift()))
                .collect(),
        )
    }

    fn from_fn<F>(family: TowerCtx, mode: ComponentMode, depth: usize, f: F) -> Self
    where
        F: Fn(TowerCtx) -> TowerElem,
    {
        let comps = (0..=depth)
            .map(|i| LocalElem::integral(f(family.at_level(i as u32))))
            .collect();
        Self::from_components(family, mode, comps).expect("integral components")
    }

    /// The sequences `P = (p^(1/p^n))`, `X = (x^(1/p^n))`, `Y = (y^(1/p^n))`.
    pub fn generators(
        family: TowerCtx,
        depth: usize,
        mode: ComponentMode,
    ) -> (FontaineElem, FontaineElem, FontaineElem) {
        (
            Self::from_fn(family, mode, depth, TowerElem::pi),
            Self::from_fn(family, mode, depth, TowerElem::x),
            Self::from_fn(family, mode, depth, TowerElem::y),
        )
    }

    pub fn zero(family: TowerCtx, depth: usize, mode: ComponentMode) -> Self {
        Self::from_fn(family, mode, depth, TowerElem::zero)
    }

    pub fn one(family: TowerCtx, depth: usize, mode: ComponentMode) -> Self {
        Self::from_fn(family, mode, depth, TowerElem::one)
    }

    /// Image of an integer (only its class mod `p` matters).
    pub fn integer(family: TowerCtx, depth: usize, mode: ComponentMode, n: &BigInt) -> Self {
        Self::from_fn(family, mode, depth, |c| TowerElem::constant(c, n.clone()))
    }

    pub fn family(&self) -> TowerCtx {
        self.family
    }

    pub fn mode(&self) -> ComponentMode {
        self.mode
    }

    pub fn depth(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn components(&self) -> &[LocalElem] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> Option<&LocalElem> {
        self.comps.get(i)
    }

    /// Component `i` as a residue, when it is integral.
    pub fn residue(&self, i: usize) -> Option<ResidueElem> {
        let c = self.comps.get(i)?;
        c.is_integral().then(|| c.num().reduce_mod_p())
    }

    pub fn truncate(&self, depth: usize) -> FontaineElem {
        let mut out = self.clone();
        out.comps.truncate(depth + 1);
        out
    }

    fn check(&self, other: &FontaineElem) -> Result<(), FontaineError> {
        if self.family == other.family && self.mode == other.mode {
            Ok(())
        } else {
            Err(FontaineError::Mismatch)
        }
    }

    fn zip_with<F>(&self, other: &FontaineElem, f: F) -> Result<FontaineElem, FontaineError>
    where
        F: Fn(&LocalElem, &LocalElem) -> Result<LocalElem, TowerError>,
    {
        self.check(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| {
                let (a, b) = a.align(b)?;
                Ok(f(&a, &b)?.reduce_mod_p_power(1))
            })
            .enumerate()
            .map(|(i, c)| c.map(|c| c.descend_to(i as u32)))
            .collect::<Result<Vec<_>, TowerError>>()?;
        Ok(FontaineElem {
            family: self.family,
            mode: self.mode,
            comps,
        })
    }

    fn map<F>(&self, f: F) -> FontaineElem
    where
        F: Fn(&LocalElem) -> LocalElem,
    {
        FontaineElem {
            family: self.family,
            mode: self.mode,
            comps: self
                .comps
                .iter()
                .enumerate()
                .map(|(i, c)| f(c).reduce_mod_p_power(1).descend_to(i as u32))
                .collect(),
        }
    }

    /// Componentwise sum, truncated to the smaller depth.
    pub fn add(&self, other: &FontaineElem) -> Result<FontaineElem, FontaineError> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &FontaineElem) -> Result<FontaineElem, FontaineError> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &FontaineElem) -> Result<FontaineElem, FontaineError> {
        self.zip_with(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> FontaineElem {
        self.map(LocalElem::neg)
    }

    pub fn scale(&self, k: &BigInt) -> FontaineElem {
        self.map(|c| c.scale(k))
    }

    pub fn pow(&self, e: u64) -> FontaineElem {
        self.map(|c| c.pow(e))
    }

    /// `e^p`, computed componentwise.
    pub fn frobenius(&self) -> FontaineElem {
        self.pow(self.family.p().get())
    }

    /// The p-th root `(r_1, r_2, …)`; depth drops by one.
    pub fn proot(&self) -> Result<FontaineElem, FontaineError> {
        if self.comps.len() < 2 {
            return Err(FontaineError::DepthExhausted);
        }
        Ok(FontaineElem {
            family: self.family,
            mode: self.mode,
            comps: self.comps[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c.descend_to(i as u32))
                .collect(),
        })
    }

    /// Whether two classes modulo `p` agree.
    fn congruent_mod_p(&self, a: &LocalElem, b: &LocalElem) -> Result<Decision, FontaineError> {
        let (a, b) = a.align(b)?;
        let diff = a.sub(&b)?.reduce_mod_p_power(1);
        if diff.is_zero() {
            return Ok(Decision::Holds);
        }
        Ok(match self.mode {
            ComponentMode::PlainR => Decision::Fails,
            ComponentMode::ClosureCerts { m_max } => decide_membership(&diff.div_p(), m_max),
        })
    }

    /// Componentwise comparison at the common depth.
    pub fn compare(&self, other: &FontaineElem) -> Result<Decision, FontaineError> {
        self.check(other)?;
        let mut d = Decision::Holds;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            d = d.and(self.congruent_mod_p(a, b)?);
            if d == Decision::Fails {
                break;
            }
        }
        Ok(d)
    }

    /// Whether every class is zero.
    pub fn is_zero_decision(&self) -> Decision {
        let zero = LocalElem::zero(self.family);
        self.comps.iter().fold(Decision::Holds, |d, c| {
            d.and(
                self.congruent_mod_p(c, &zero)
                    .expect("same family"),
            )
        })
    }

    /// Frobenius compatibility `r_(i+1)^p = r_i` for every `i`.
    pub fn compat_decision(&self) -> Decision {
        let p = self.family.p().get();
        let mut d = Decision::Holds;
        for w in self.comps.windows(2) {
            let lifted = w[1].pow(p);
            d = d.and(self.congruent_mod_p(&lifted, &w[0]).expect("same family"));
        }
        d
    }

    pub fn check_compat(&self) -> bool {
        self.compat_decision().holds()
    }

    /// `ū(e) = r_0`.
    pub fn bar_u(&self) -> &LocalElem {
        &self.comps[0]
    }

    /// `θ(e) = lim r_n^(p^n)` modulo `p^k`, from component `k - 1`.
    ///
    /// Two lifts of `r_n` differing by `p δ` have `p^n`-th powers congruent
    /// modulo `p^(n+1)`, and `r_(n+1)^p ≡ r_n`, so `r_(k-1)^(p^(k-1))` already
    /// determines `θ` modulo `p^k`; `k <= N + 1` is the available precision.
    pub fn theta(&self, k: u32) -> Result<PadicValue, FontaineError> {
        let depth = self.depth() as u32;
        if k == 0 || k > depth + 1 {
            return Err(FontaineError::PrecisionExceeded {
                requested: k,
                available: depth + 1,
            });
        }
        Ok(theta_from_lift(&self.comps[k as usize - 1], k - 1, k))
    }

    /// Divides by `P`, following the constructive injectivity argument.
    ///
    /// 1. Factor each `r_n = p^(1/p^n) s_n` on representatives: exact division
    ///    in plain mode (fails with [`FontaineError::NotDivisible`] when `R` is
    ///    not root closed enough), via the kernel lemma with certificates in
    ///    closure mode.
    /// 2. Set `t_n = s_(n+1)^p`.
    /// 3. Check `s_(n+1)^p ≡ s_n` modulo `p^(1 - 1/p^n)`.
    /// 4. Check `t_n^p ≡ t_(n-1)` modulo `p`.
    /// 5. Check `P t = e` at depth `N - 1`.
    ///
    /// Consumes one level of depth.
    pub fn divide_by_p_element(&self) -> Result<PDivision, FontaineError> {
        let depth = self.depth();
        if depth == 0 {
            return Err(FontaineError::DepthExhausted);
        }
        let p = self.family.p();
        let mut checks = Vec::new();
        if !self
            .congruent_mod_p(&self.comps[0], &LocalElem::zero(self.family))?
            .holds()
        {
            return Err(FontaineError::NotDivisible(0));
        }

        // step 1
        let mut factors = Vec::with_capacity(depth + 1);
        let mut certs = Vec::new();
        for (n, r) in self.comps.iter().enumerate() {
            let shift = u64::from(p.pow_u32(r.level() - n as u32));
            match self.mode {
                ComponentMode::PlainR => {
                    let s = r
                        .num()
                        .pi_divide(shift)
                        .map_err(|_| FontaineError::NotDivisible(n))?;
                    factors.push(LocalElem::integral(s));
                }
                ComponentMode::ClosureCerts { m_max } => {
                    let cert = if r.is_integral() {
                        match kernel_lemma_factor(r.num(), n as u32, m_max) {
                            Ok(c) => c,
                            Err(ClosureError::HypothesisNotMet { .. }) => {
                                return Err(FontaineError::NotDivisible(n))
                            }
                            Err(e) => return Err(e.into()),
                        }
                    } else {
                        match membership(&r.div_pi(shift), m_max) {
                            Membership::Certified(c) => c,
                            Membership::Refuted { .. } => return Err(FontaineError::NotDivisible(n)),
                            Membership::NoCertificate { .. } => {
                                return Err(FontaineError::UndeterminedCongruence {
                                    index: n,
                                    step: Step::Product,
                                })
                            }
                        }
                    };
                    factors.push(cert.elem.clone());
                    certs.push(cert);
                }
            }
        }

        // step 2
        let t: Vec<LocalElem> = factors[1..].iter().map(|s| s.pow(p.get())).collect();

        // step 3
        for n in 0..depth {
            let (tn, sn) = t[n].align(&factors[n])?;
            let shift = u64::from(p.pow_u32(tn.level() - n as u32));
            let k = (u64::from(p.pow_u32(n as u32)) - 1) * shift;
            let q = tn.sub(&sn)?.div_pi(k);
            let d = match self.mode {
                ComponentMode::PlainR => Decision::from_bool(q.is_integral()),
                ComponentMode::ClosureCerts { m_max } => decide_membership(&q, m_max),
            };
            record(&mut checks, Step::RootCongruence, n, d)?;
        }

        // step 4
        for n in 1..depth {
            let d = self.congruent_mod_p(&t[n].pow(p.get()), &t[n - 1])?;
            record(&mut checks, Step::Compatibility, n, d)?;
        }

        let quotient = FontaineElem::from_components(self.family, self.mode, t)?;

        // step 5
        let (big_p, _, _) = FontaineElem::generators(self.family, depth - 1, self.mode);
        let product = big_p.mul(&quotient)?;
        for n in 0..depth {
            let d = self.congruent_mod_p(&product.comps[n], &self.comps[n])?;
            record(&mut checks, Step::Product, n, d)?;
        }

        Ok(PDivision {
            quotient,
            factors,
            certs,
            checks,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "mode": self.mode.name(),
            "depth": self.depth(),
            "components": self.comps.iter().map(LocalElem::to_json).collect::<Vec<_>>(),
        })
    }
}

impl FontaineElem {
    /// Inverse of [`FontaineElem::to_json`]. The mode is supplied by the
    /// caller since the certificate bound is not serialized.
    pub fn from_json(
        family: TowerCtx,
        mode: ComponentMode,
        v: &serde_json::Value,
    ) -> Option<FontaineElem> {
        let comps = v
            .get("components")?
            .as_array()?
            .iter()
            .map(|c| LocalElem::from_json(family, c))
            .collect::<Option<Vec<_>>>()?;
        FontaineElem::from_components(family, mode, comps).ok()
    }
}

impl fmt::Display for FontaineElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn record(
    checks: &mut Vec<(Step, usize, Decision)>,
    step: Step,
    index: usize,
    d: Decision,
) -> Result<(), FontaineError> {
    checks.push((step, index, d));
    match d {
        Decision::Holds => Ok(()),
        Decision::Fails => Err(FontaineError::CongruenceFailed { index, step }),
        Decision::Undetermined => Err(FontaineError::UndeterminedCongruence { index, step }),
    }
}

fn decide_membership(x: &LocalElem, m_max: u32) -> Decision {
    if x.is_integral() {
        return Decision::Holds;
    }
    match membership(x, m_max) {
        Membership::Certified(_) => Decision::Holds,
        Membership::Refuted { .. } => Decision::Fails,
        Membership::NoCertificate { .. } => Decision::Undetermined,
    }
}

/// `lift^(p^n)` modulo `p^k` for a lift of the depth-`n` component.
pub fn theta_from_lift(lift: &LocalElem, n: u32, k: u32) -> PadicValue {
    let p = lift.ctx().p().get();
    let e = p.checked_pow(n).expect("depth is small");
    PadicValue::new(lift.pow(e), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::RingMode;
    use crate::valuation::Prime;

    fn family(p: u64) -> TowerCtx {
        TowerCtx::new(Prime::new(p).unwrap(), 0, 3, RingMode::Quotient).unwrap()
    }

    fn eta(depth: usize, mode: ComponentMode) -> FontaineElem {
        let (p, x, y) = FontaineElem::generators(family(5), depth, mode);
        p.pow(3).add(&x.pow(3)).unwrap().add(&y.pow(3)).unwrap()
    }

    #[test]
    fn generators_are_compatible() {
        let (p, x, y) = FontaineElem::generators(family(5), 3, ComponentMode::PlainR);
        assert!(p.check_compat() && x.check_compat() && y.check_compat());
        assert!(p.bar_u().is_zero());
        assert_eq!(p.component(2).unwrap().num(), &TowerElem::pi(family(5).at_level(2)));
        assert_eq!(x.bar_u().num(), &TowerElem::x(family(5)));
    }

    #[test]
    fn eta_is_compatible_and_in_kernel() {
        let e = eta(3, ComponentMode::PlainR);
        assert!(e.check_compat());
        assert!(e.bar_u().is_zero());
    }

    #[test]
    fn incompatible_sequence_is_detected() {
        let f = family(5);
        let e = FontaineElem::from_components(
            f,
            ComponentMode::PlainR,
            vec![
                LocalElem::integral(TowerElem::x(f)),
                LocalElem::integral(TowerElem::y(f.at_level(1))),
            ],
        )
        .unwrap();
        assert!(!e.check_compat());
    }

    #[test]
    fn frobenius_matches_repeated_products() {
        let (p, x, _) = FontaineElem::generators(family(5), 3, ComponentMode::PlainR);
        let e = p.add(&x).unwrap();
        let by_products = (1..5).fold(e.clone(), |acc, _| acc.mul(&e).unwrap());
        assert_eq!(e.frobenius(), by_products);
        assert_eq!(e.frobenius().proot().unwrap(), e.truncate(2));
    }

    #[test]
    fn p_times_root_of_p() {
        let (p, _, _) = FontaineElem::generators(family(5), 3, ComponentMode::PlainR);
        let prod = p.mul(&p.proot().unwrap()).unwrap();
        let f = family(5);
        for n in 0..3 {
            let c = f.at_level(n as u32 + 1);
            let expected = TowerElem::pi(c).pow(5).mul(&TowerElem::pi(c)).unwrap();
            let got = prod.component(n).unwrap().embed(n as u32 + 1).unwrap();
            assert_eq!(got, LocalElem::integral(expected).reduce_mod_p_power(1));
        }
    }

    #[test]
    fn theta_examples() {
        let (p, x, _) = FontaineElem::generators(family(5), 3, ComponentMode::PlainR);
        let t = p.theta(2).unwrap();
        assert_eq!(t.value.num().as_integer(), Some(BigInt::from(5)));
        let t = x.theta(4).unwrap();
        let expected = LocalElem::integral(TowerElem::x(family(5)).embed(3).unwrap());
        assert_eq!(t.value, expected);
        assert!(FontaineElem::zero(family(5), 3, ComponentMode::PlainR).theta(3).unwrap().is_zero());
        assert!(matches!(p.theta(5), Err(FontaineError::PrecisionExceeded { .. })));
    }

    #[test]
    fn theta_is_lift_independent() {
        let (p, x, y) = FontaineElem::generators(family(5), 2, ComponentMode::PlainR);
        let e = p.add(&x.mul(&y).unwrap()).unwrap();
        let top = e.component(2).unwrap();
        let other = top
            .add(&LocalElem::integral(TowerElem::y(top.ctx()).scale(&BigInt::from(5))))
            .unwrap();
        assert_ne!(top, &other);
        assert_eq!(theta_from_lift(top, 2, 3), theta_from_lift(&other, 2, 3));
    }

    #[test]
    fn divide_p_times_x() {
        let (p, x, _) = FontaineElem::generators(family(5), 3, ComponentMode::PlainR);
        let q = p.mul(&x).unwrap().divide_by_p_element().unwrap();
        assert_eq!(q.quotient, x.truncate(2));
    }

    #[test]
    fn eta_not_divisible_in_plain_mode() {
        let e = eta(3, ComponentMode::PlainR);
        assert_eq!(e.divide_by_p_element().unwrap_err(), FontaineError::NotDivisible(1));
    }

    #[test]
    fn eta_divisible_with_closure_certificates() {
        let mode = ComponentMode::ClosureCerts { m_max: 5 };
        let e = eta(3, mode);
        let d = e.divide_by_p_element().unwrap();
        assert_eq!(d.quotient.depth(), 2);
        assert!(d.checks.iter().all(|(_, _, dec)| dec.holds()));
        let ms: Vec<u32> = d.certs.iter().map(|c| c.m).collect();
        assert_eq!(ms, vec![0, 1, 2, 3]);
        assert!(d.certs.iter().all(ClosureCert::validate));
        let (p, _, _) = FontaineElem::generators(family(5), 2, mode);
        assert_eq!(p.mul(&d.quotient).unwrap().compare(&e.truncate(2)).unwrap(), Decision::Holds);
    }

    #[test]
    fn divide_requires_kernel_of_bar_u() {
        let (_, x, _) = FontaineElem::generators(family(5), 2, ComponentMode::PlainR);
        assert_eq!(x.divide_by_p_element().unwrap_err(), FontaineError::NotDivisible(0));
    }
}
