//! Exact integer utilities: p-adic valuations and binomial coefficients.
//!
//! Everything here works on arbitrary-precision integers and is used as the
//! oracle layer for the ring code, so no modular shortcuts are taken.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("binomial coefficient C({n}, {k}) requested with k > n")]
    BinomialRange { n: u64, k: u64 },
    #[error("index {i} outside 1..={upper}")]
    IndexRange { i: u64, upper: String },
}

/// A rational prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(value: u64) -> Result<Self, ValuationError> {
        if is_prime(value) {
            Ok(Prime(value))
        } else {
            Err(ValuationError::NotPrime(value))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^e` as a big integer.
    pub fn pow(self, e: u32) -> BigInt {
        num_traits::pow(self.as_bigint(), e as usize)
    }

    /// `p^e` as a machine integer; panics on overflow.
    pub fn pow_u32(self, e: u32) -> u32 {
        u32::try_from(self.0)
            .ok()
            .and_then(|p| p.checked_pow(e))
            .expect("prime power exceeds u32")
    }
}

impl TryFrom<u64> for Prime {
    type Error = ValuationError;

    fn try_from(value: u64) -> Result<Self, Self::Error> {
        Prime::new(value)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Exponent of the largest power of `p` dividing an integer; infinite for 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// p-adic valuation of `n`.
pub fn vp(p: Prime, n: &BigInt) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let p = p.as_bigint();
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        m = q;
        v += 1;
    }
}

/// p-adic valuation of a machine integer.
pub fn vp_u64(p: Prime, mut n: u64) -> Valuation {
    if n == 0 {
        return Valuation::Infinite;
    }
    let mut v = 0;
    while n.is_multiple_of(p.0) {
        n /= p.0;
        v += 1;
    }
    Valuation::Finite(v)
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binom(n: u64, k: u64) -> Result<BigUint, ValuationError> {
    if k > n {
        return Err(ValuationError::BinomialRange { n, k });
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc *= n - i;
        acc /= i + 1;
    }
    Ok(acc)
}

/// Valuation of `C(p^m, i)` predicted from the valuation of `i` alone:
/// if `p^r || i` then `p^(m-r) || C(p^m, i)`.
pub fn binom_valuation(p: Prime, m: u32, i: u64) -> Result<Valuation, ValuationError> {
    let upper = BigUint::from(p.0).pow(m);
    if i == 0 || BigUint::from(i) > upper {
        return Err(ValuationError::IndexRange {
            i,
            upper: upper.to_string(),
        });
    }
    let r = vp_u64(p, i).finite().expect("i is nonzero");
    Ok(Valuation::Finite(u64::from(m) - r))
}
