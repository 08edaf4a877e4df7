//! Seeded random generators for the property suites, tests and benches.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::closure::LocalElem;
use crate::fontaine::{ComponentMode, FontaineElem};
use crate::tower::{Monomial, TowerCtx, TowerElem};
use crate::witt::{Fp, WittCtx, WittVec};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random element with up to `terms` monomials, exponents below `max_exp`
/// (the Π exponent below `p^level`) and coefficients in `-bound..=bound`.
pub fn tower_elem(ctx: TowerCtx, rng: &mut SampleRng, terms: usize, max_exp: u32, bound: i64) -> TowerElem {
    let pi_max = ctx.pi_order();
    let raw: Vec<(Monomial, BigInt)> = (0..terms)
        .map(|_| {
            let m = Monomial::new(
                rng.gen_range(0..pi_max),
                rng.gen_range(0..max_exp.max(1)),
                rng.gen_range(0..max_exp.max(1)),
            );
            (m, BigInt::from(rng.gen_range(-bound..=bound)))
        })
        .collect();
    TowerElem::normalize(ctx, raw)
}

/// Random integer Witt vector with coordinates in `-bound..=bound`.
pub fn int_witt(ctx: &WittCtx, rng: &mut SampleRng, bound: i64) -> WittVec<BigInt> {
    let comps = (0..ctx.len())
        .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
        .collect();
    WittVec::new(ctx, comps).expect("length matches")
}

/// Random Witt vector over the prime field.
pub fn fp_witt(ctx: &WittCtx, rng: &mut SampleRng) -> WittVec<Fp> {
    let p = ctx.p();
    let comps = (0..ctx.len())
        .map(|_| Fp::new(p, &BigInt::from(rng.gen_range(0..p.get()))))
        .collect();
    WittVec::new(ctx, comps).expect("length matches")
}

/// Random Fontaine element: a polynomial in `P`, `X`, `Y` with coefficients
/// in `0..p`, optionally followed by `roots` p-th roots (generated at a
/// larger depth so the result still has depth `depth`).
pub fn fontaine_elem(
    family: TowerCtx,
    depth: usize,
    mode: ComponentMode,
    rng: &mut SampleRng,
    terms: usize,
    max_exp: u32,
    roots: usize,
) -> FontaineElem {
    let p = family.p().get();
    let (big_p, x, y) = FontaineElem::generators(family, depth + roots, mode);
    let mut acc = FontaineElem::zero(family, depth + roots, mode);
    for _ in 0..terms {
        let c = BigInt::from(rng.gen_range(1..p));
        let m = big_p
            .pow(rng.gen_range(0..=max_exp).into())
            .mul(&x.pow(rng.gen_range(0..=max_exp).into()))
            .and_then(|m| m.mul(&y.pow(rng.gen_range(0..=max_exp).into())))
            .expect("same ring");
        acc = acc.add(&m.scale(&c)).expect("same ring");
    }
    for _ in 0..roots {
        acc = acc.proot().expect("depth was padded");
    }
    acc
}

/// Random Witt vector over Fontaine elements.
pub fn fontaine_witt(
    ctx: &WittCtx,
    family: TowerCtx,
    depth: usize,
    mode: ComponentMode,
    rng: &mut SampleRng,
) -> WittVec<FontaineElem> {
    let comps = (0..ctx.len())
        .map(|_| {
            let roots = rng.gen_range(0..=1);
            fontaine_elem(family, depth, mode, rng, 2, 2, roots)
        })
        .collect();
    WittVec::new(ctx, comps).expect("length matches")
}

/// `(Π r_1 + (X^d + Y^d) r_2) / Π` at level 1 of a quotient-mode family,
/// which always lies in the root closure.
pub fn closure_candidate(family: TowerCtx, rng: &mut SampleRng) -> LocalElem {
    let ctx = family.at_level(1);
    let d = ctx.degree();
    let r1 = tower_elem(ctx, rng, 3, 3, 3);
    let r2 = tower_elem(ctx, rng, 3, 3, 3);
    let g = TowerElem::x(ctx)
        .pow(d.into())
        .add(&TowerElem::y(ctx).pow(d.into()))
        .expect("same ring");
    let num = TowerElem::pi(ctx)
        .mul(&r1)
        .and_then(|a| g.mul(&r2).and_then(|b| a.add(&b)))
        .expect("same ring");
    LocalElem::new(num, 1)
}
