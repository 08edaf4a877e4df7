//! Sparse integer polynomials and the universal Witt polynomials.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::par::{self, Exec};
use crate::valuation::Prime;

/// A polynomial in a fixed number of variables with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IntPoly {
    pub fn zero(nvars: usize) -> Self {
        IntPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        Self::term(nvars, c, &[])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(nvars, 1, &[(i, 1)])
    }

    /// `c * Π x_i^e_i` from `(i, e_i)` pairs.
    pub fn term(nvars: usize, c: impl Into<BigInt>, powers: &[(usize, u32)]) -> Self {
        let c = c.into();
        let mut out = Self::zero(nvars);
        if c.is_zero() {
            return out;
        }
        let mut exps = vec![0; nvars];
        for &(i, e) in powers {
            exps[i] += e;
        }
        out.terms.insert(exps, c);
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    fn push(&mut self, exps: Vec<u32>, c: BigInt) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.push(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> IntPoly {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        let mut out = Self::zero(self.nvars);
        if k.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect();
        out
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.push(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> IntPoly {
        let mut acc = Self::constant(self.nvars, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division of every coefficient by `d`, or `None`.
    pub fn div_exact(&self, d: &BigInt) -> Option<IntPoly> {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.terms.insert(e.clone(), q);
        }
        Some(out)
    }

    /// Coefficients reduced into `0..p`, dropping the ones that vanish.
    pub fn reduce_mod(&self, p: Prime) -> IntPoly {
        let p = p.as_bigint();
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let r = c.mod_floor(&p);
            if !r.is_zero() {
                out.terms.insert(e.clone(), r);
            }
        }
        out
    }

    /// Largest exponent of each variable.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0; self.nvars];
        for e in self.terms.keys() {
            for (m, x) in out.iter_mut().zip(e) {
                *m = (*m).max(*x);
            }
        }
        out
    }

    /// Evaluates at big integers.
    pub fn eval_int(&self, vals: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in vals.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(v.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("t{i}")
                    } else {
                        format!("t{i}^{k}")
                    }
                })
                .collect();
            let a = c.abs();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Universal sum, product and negation polynomials for `W_N`.
///
/// Variables `0..N` are the first operand's coordinates and `N..2N` the
/// second's; negation only uses the first block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittPolys {
    pub sum: Vec<IntPoly>,
    pub prod: Vec<IntPoly>,
    pub neg: Vec<IntPoly>,
}

/// `w_i(T_off, …) = Σ_(j<=i) p^j T_(off+j)^(p^(i-j))` in `nvars` variables.
pub fn ghost_poly(p: Prime, i: usize, offset: usize, nvars: usize) -> IntPoly {
    let mut out = IntPoly::zero(nvars);
    for j in 0..=i {
        let e = p.pow_u32((i - j) as u32);
        out = out.add(&IntPoly::term(nvars, p.pow(j as u32), &[(offset + j, e)]));
    }
    out
}

/// Solves `Σ_(j<=i) p^j Q_j^(p^(i-j)) = target_i` for every `i`, asserting
/// that each division by `p^i` is exact.
fn solve_ghost(p: Prime, targets: Vec<IntPoly>) -> Vec<IntPoly> {
    let mut out: Vec<IntPoly> = Vec::with_capacity(targets.len());
    for (i, target) in targets.into_iter().enumerate() {
        let mut rest = target;
        for (j, q) in out.iter().enumerate() {
            let e = u64::from(p.pow_u32((i - j) as u32));
            rest = rest.sub(&q.pow(e).scale(&p.pow(j as u32)));
        }
        let q = rest
            .div_exact(&p.pow(i as u32))
            .unwrap_or_else(|| panic!("ghost recursion: division by p^{i} is not exact"));
        out.push(q);
    }
    out
}

/// Computes the universal polynomials from the ghost recursion.
pub fn witt_polynomials(p: Prime, n: usize) -> WittPolys {
    let nv = 2 * n;
    let wx: Vec<IntPoly> = (0..n).map(|i| ghost_poly(p, i, 0, nv)).collect();
    let wy: Vec<IntPoly> = (0..n).map(|i| ghost_poly(p, i, n, nv)).collect();
    let (sum, (prod, neg)) = par::join(
        Exec::Parallel,
        || solve_ghost(p, wx.iter().zip(&wy).map(|(a, b)| a.add(b)).collect()),
        || {
            par::join(
                Exec::Parallel,
                || solve_ghost(p, wx.iter().zip(&wy).map(|(a, b)| a.mul(b)).collect()),
                || solve_ghost(p, wx.iter().map(IntPoly::neg).collect()),
            )
        },
    );
    WittPolys { sum, prod, neg }
}

type Cell = Arc<OnceLock<Arc<WittPolys>>>;

/// Process-wide cache: one cell per `(p, N)`; the first caller computes,
/// later callers block on the same cell and then share the result.
pub(crate) fn cached(p: Prime, n: usize) -> Arc<WittPolys> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Cell>>> = OnceLock::new();
    let cell = {
        let mut map = CACHE
            .get_or_init(Default::default)
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        map.entry((p.get(), n)).or_default().clone()
    };
    cell.get_or_init(|| Arc::new(witt_polynomials(p, n))).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn p2_length2_by_hand() {
        let w = witt_polynomials(p(2), 2);
        // variables: X0 = t0, X1 = t1, Y0 = t2, Y1 = t3
        let x0 = IntPoly::var(4, 0);
        let x1 = IntPoly::var(4, 1);
        let y0 = IntPoly::var(4, 2);
        let y1 = IntPoly::var(4, 3);
        assert_eq!(w.sum[0], x0.add(&y0));
        assert_eq!(w.prod[0], x0.mul(&y0));
        assert_eq!(w.sum[1], x1.add(&y1).sub(&x0.mul(&y0)));
        let m1 = x0
            .pow(2)
            .mul(&y1)
            .add(&x1.mul(&y0.pow(2)))
            .add(&x1.mul(&y1).scale(&BigInt::from(2)));
        assert_eq!(w.prod[1], m1);
        // -(a0, a1) at p = 2: (-a0, -a1 - a0^2)
        assert_eq!(w.neg[1], x1.neg().sub(&x0.pow(2)));
    }

    #[test]
    fn odd_negation_is_coordinatewise() {
        let w = witt_polynomials(p(3), 3);
        for (i, n) in w.neg.iter().enumerate() {
            assert_eq!(n, &IntPoly::var(6, i).neg());
        }
    }

    #[test]
    fn cache_returns_shared_instance() {
        let a = cached(p(3), 2);
        let b = cached(p(3), 2);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, witt_polynomials(p(3), 2));
    }

    #[test]
    fn ghost_of_sum_at_integers() {
        let w = witt_polynomials(p(5), 2);
        let vals: Vec<BigInt> = [3, -7, 11, 2].iter().map(|&v| BigInt::from(v)).collect();
        let ghost = |a: &BigInt, b: &BigInt| num_traits::pow(a.clone(), 5) + BigInt::from(5) * b;
        let s0 = w.sum[0].eval_int(&vals);
        let s1 = w.sum[1].eval_int(&vals);
        assert_eq!(ghost(&s0, &s1), ghost(&vals[0], &vals[1]) + ghost(&vals[2], &vals[3]));
    }
}
