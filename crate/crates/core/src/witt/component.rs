//! Coefficient rings for Witt vectors.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::WittError;
use crate::fontaine::{Decision, FontaineElem};
use crate::tower::ResidueElem;
use crate::valuation::Prime;

/// Operations the Witt layer needs from a coefficient ring.
///
/// Constants are produced relative to an existing element (`*_like`) so that
/// context such as the tower family or Fontaine depth is carried along.
pub trait WittComponent: Clone + fmt::Debug + Send + Sync {
    /// Worth fanning polynomial evaluation out to worker threads.
    const HEAVY: bool = false;

    /// `Some(p)` for rings of characteristic `p`, where Witt coefficients can
    /// be reduced modulo `p` and Frobenius is coordinatewise.
    fn char_p(&self) -> Option<Prime>;
    fn int_like(&self, n: &BigInt) -> Self;
    fn add(&self, other: &Self) -> Result<Self, WittError>;
    fn mul(&self, other: &Self) -> Result<Self, WittError>;
    fn neg(&self) -> Self;
    fn decide_zero(&self) -> Decision;

    /// Cheap structural zero test; `false` is always a safe answer.
    fn is_exact_zero(&self) -> bool {
        false
    }

    /// Drops whatever precision `self` has beyond `other`'s.
    fn meet_precision(self, _other: &Self) -> Self {
        self
    }

    fn zero_like(&self) -> Self {
        self.int_like(&BigInt::zero())
    }

    fn one_like(&self) -> Self {
        self.int_like(&BigInt::one())
    }

    fn sub(&self, other: &Self) -> Result<Self, WittError> {
        self.add(&other.neg())
    }

    fn pow(&self, mut e: u64) -> Result<Self, WittError> {
        let mut acc = self.one_like();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The p-th root in a perfect ring.
    fn proot(&self) -> Result<Self, WittError> {
        Err(WittError::NotPerfect)
    }

    fn decide_eq(&self, other: &Self) -> Result<Decision, WittError> {
        Ok(self.sub(other)?.decide_zero())
    }
}

/// Integers: the torsion-free ring on which ghost components are injective.
impl WittComponent for BigInt {
    fn char_p(&self) -> Option<Prime> {
        None
    }

    fn int_like(&self, n: &BigInt) -> Self {
        n.clone()
    }

    fn add(&self, other: &Self) -> Result<Self, WittError> {
        Ok(self + other)
    }

    fn mul(&self, other: &Self) -> Result<Self, WittError> {
        Ok(self * other)
    }

    fn neg(&self) -> Self {
        -self
    }

    fn decide_zero(&self) -> Decision {
        Decision::from_bool(self.is_zero())
    }

    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }

    fn pow(&self, e: u64) -> Result<Self, WittError> {
        Ok(num_traits::pow(self.clone(), e as usize))
    }
}

/// An element of the prime field with `p` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    p: Prime,
    v: u64,
}

impl Fp {
    pub fn new(p: Prime, v: &BigInt) -> Self {
        let v = v
            .mod_floor(&p.as_bigint())
            .to_u64()
            .expect("residue fits in u64");
        Fp { p, v }
    }

    pub fn value(self) -> u64 {
        self.v
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl WittComponent for Fp {
    fn char_p(&self) -> Option<Prime> {
        Some(self.p)
    }

    fn int_like(&self, n: &BigInt) -> Self {
        Fp::new(self.p, n)
    }

    fn add(&self, other: &Self) -> Result<Self, WittError> {
        let p = self.p.get();
        Ok(Fp {
            p: self.p,
            v: ((u128::from(self.v) + u128::from(other.v)) % u128::from(p)) as u64,
        })
    }

    fn mul(&self, other: &Self) -> Result<Self, WittError> {
        let p = self.p.get();
        Ok(Fp {
            p: self.p,
            v: ((u128::from(self.v) * u128::from(other.v)) % u128::from(p)) as u64,
        })
    }

    fn neg(&self) -> Self {
        Fp {
            p: self.p,
            v: (self.p.get() - self.v) % self.p.get(),
        }
    }

    fn decide_zero(&self) -> Decision {
        Decision::from_bool(self.v == 0)
    }

    fn is_exact_zero(&self) -> bool {
        self.v == 0
    }

    /// Frobenius is the identity on the prime field.
    fn proot(&self) -> Result<Self, WittError> {
        Ok(*self)
    }
}

/// `R/pR`: not perfect, so no p-th roots.
impl WittComponent for ResidueElem {
    const HEAVY: bool = true;

    fn char_p(&self) -> Option<Prime> {
        Some(self.ctx().p())
    }

    fn int_like(&self, n: &BigInt) -> Self {
        crate::tower::TowerElem::constant(self.ctx(), n.clone()).reduce_mod_p()
    }

    fn add(&self, other: &Self) -> Result<Self, WittError> {
        Ok(ResidueElem::add(self, other)?)
    }

    fn mul(&self, other: &Self) -> Result<Self, WittError> {
        Ok(ResidueElem::mul(self, other)?)
    }

    fn neg(&self) -> Self {
        ResidueElem::neg(self)
    }

    fn decide_zero(&self) -> Decision {
        Decision::from_bool(self.is_zero())
    }

    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }

    fn pow(&self, e: u64) -> Result<Self, WittError> {
        Ok(ResidueElem::pow(self, e))
    }
}

impl WittComponent for FontaineElem {
    const HEAVY: bool = true;

    fn char_p(&self) -> Option<Prime> {
        Some(self.family().p())
    }

    fn int_like(&self, n: &BigInt) -> Self {
        FontaineElem::integer(self.family(), self.depth(), self.mode(), n)
    }

    fn add(&self, other: &Self) -> Result<Self, WittError> {
        Ok(FontaineElem::add(self, other)?)
    }

    fn mul(&self, other: &Self) -> Result<Self, WittError> {
        Ok(FontaineElem::mul(self, other)?)
    }

    fn neg(&self) -> Self {
        FontaineElem::neg(self)
    }

    fn decide_zero(&self) -> Decision {
        self.is_zero_decision()
    }

    fn is_exact_zero(&self) -> bool {
        self.components().iter().all(|c| c.is_zero())
    }

    fn meet_precision(self, other: &Self) -> Self {
        if other.depth() < self.depth() {
            self.truncate(other.depth())
        } else {
            self
        }
    }

    fn pow(&self, e: u64) -> Result<Self, WittError> {
        Ok(FontaineElem::pow(self, e))
    }

    fn proot(&self) -> Result<Self, WittError> {
        Ok(FontaineElem::proot(self)?)
    }

    fn decide_eq(&self, other: &Self) -> Result<Decision, WittError> {
        Ok(self.compare(other)?)
    }
}
