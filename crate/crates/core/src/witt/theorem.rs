//! The map `u: W_N(E) → R̂` and division by `P̃ - p` in `W_N(E)`.

use super::{WittCtx, WittError, WittVec};
use crate::closure::LocalElem;
use crate::fontaine::{Decision, FontaineElem, FontaineError, PDivision, PadicValue};

/// `τ(P) - p`, with `P` at the depth and mode of `like`.
pub fn p_tilde_minus_p(ctx: &WittCtx, like: &FontaineElem) -> Result<WittVec<FontaineElem>, WittError> {
    let (big_p, _, _) = FontaineElem::generators(like.family(), like.depth(), like.mode());
    let p = WittVec::from_integer(ctx, &ctx.p().as_bigint(), like)?;
    WittVec::teichmuller(ctx, big_p).sub(&p)
}

/// Largest `K` for which [`u_map`] is defined on `x`.
///
/// `x` is only known modulo `V^N`, and `u(V^N y) = p^N u(F^(-N) y)`, so no
/// more than `N` digits are meaningful. Each coordinate also limits `K` by
/// its own depth.
pub fn u_precision(x: &WittVec<FontaineElem>) -> u32 {
    x.components()
        .iter()
        .map(|a| a.depth() as u32 + 1)
        .fold(x.len() as u32, u32::min)
}

/// `u(x) = Σ_i p^i θ(a_i^(1/p^i))` modulo `p^k`, from `x = Σ V^i τ(a_i)` and
/// `V = p F^(-1)`.
pub fn u_map(x: &WittVec<FontaineElem>, k: u32) -> Result<PadicValue, WittError> {
    let available = u_precision(x);
    if k == 0 || k > available {
        return Err(WittError::PrecisionExceeded {
            requested: k,
            available,
        });
    }
    let p = x.ctx().p();
    let first = &x.components()[0];
    let mut acc = LocalElem::zero(first.family());
    for (i, a) in x.components().iter().enumerate().take(k as usize) {
        let mut root = a.clone();
        for _ in 0..i {
            root = root.proot()?;
        }
        let t = root.theta(k - i as u32)?;
        let (s, v) = acc.align(&t.value.scale(&p.pow(i as u32)))?;
        acc = s.add(&v)?;
    }
    Ok(PadicValue::new(acc, k))
}

/// Outcome of [`divide_by_p_minus_p`].
#[derive(Debug, Clone)]
pub struct WittDivision {
    /// `w` with `(τ(P) - p) w = x` at depth [`WittDivision::depth`].
    pub quotient: WittVec<FontaineElem>,
    /// The division by `P` performed at each iteration.
    pub steps: Vec<PDivision>,
    /// Fontaine depth at which the product identity was checked.
    pub depth: usize,
}

fn lift_error(iteration: usize, e: FontaineError) -> WittError {
    match e {
        FontaineError::NotDivisible(component) => WittError::NotDivisible {
            iteration,
            component,
        },
        FontaineError::DepthExhausted => WittError::DepthExhausted { achieved: iteration },
        source => WittError::Division { iteration, source },
    }
}

/// Solves `(τ(P) - p) w = x` by successive approximation.
///
/// Loop state: `x = (τ(P) - p) w + p^k v`. At step `k` the first coordinate
/// `v_0` lies in the kernel of `ū`, so `v_0 = P f`; then
/// `v - (τ(P) - p) τ(f)` has vanishing first coordinate and is `p v'`.
/// `w` grows by `p^k τ(f) = V^k F^k τ(f)`. After `N` steps `p^N v = 0` in
/// `W_N`.
///
/// Each step spends one level of Fontaine depth on the division by `P` and
/// one on the division by `p`, so the result holds at depth
/// `depth(x) - (2N - 1)`. The product is always re-checked before
/// returning. Divisibility by `P` needs a root-closed component model; in
/// plain mode the first obstruction surfaces as
/// [`WittError::NotDivisible`].
pub fn divide_by_p_minus_p(x: &WittVec<FontaineElem>) -> Result<WittDivision, WittError> {
    let ctx = x.ctx();
    let n = ctx.len();
    let mut v = x.clone();
    let mut w: Option<WittVec<FontaineElem>> = None;
    let mut steps = Vec::with_capacity(n);

    for k in 0..n {
        let div = v.components()[0]
            .divide_by_p_element()
            .map_err(|e| lift_error(k, e))?;
        let y = WittVec::teichmuller(ctx, div.quotient.clone());
        let mut term = y.clone();
        for _ in 0..k {
            term = term.frobenius()?.verschiebung();
        }
        w = Some(match w {
            None => term,
            Some(w) => w.add(&term)?,
        });
        if k + 1 < n {
            let factor = p_tilde_minus_p(ctx, &div.quotient)?;
            let z = v.sub(&factor.mul(&y)?)?;
            v = z.p_divide().map_err(|e| match e {
                WittError::Fontaine(FontaineError::DepthExhausted) => {
                    WittError::DepthExhausted { achieved: k + 1 }
                }
                WittError::NotDivisibleByP => WittError::Roundtrip("failed: remainder not divisible by p"),
                other => other,
            })?;
        }
        steps.push(div);
    }

    let w = w.expect("length is at least 1");
    let depth = w.depth();
    let factor = p_tilde_minus_p(ctx, &w.components()[0])?;
    match factor.mul(&w)?.decide_eq(x)? {
        Decision::Holds => Ok(WittDivision {
            quotient: w,
            steps,
            depth,
        }),
        Decision::Fails => Err(WittError::Roundtrip("failed")),
        Decision::Undetermined => Err(WittError::Roundtrip("undetermined")),
    }
}
