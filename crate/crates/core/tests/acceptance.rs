//! Acceptance criteria. Each criterion prints one PASS/FAIL line with its
//! runtime; the process exits non-zero if any criterion fails.
//!
//! Reference values are recomputed here with independent oracles (Legendre's
//! formula, direct ghost sums, plain repeated multiplication) rather than
//! read back from the library.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use rootclose_core::closure::{closure_add, closure_add_bound, is_integral_power, membership};
use rootclose_core::report::{self, Config, Status};
use rootclose_core::sample;
use rootclose_core::valuation::{binom_valuation, vp, Valuation};
use rootclose_core::witt::{divide_by_p_minus_p, p_tilde_minus_p, u_map, u_precision, Fp, WittError};
use rootclose_core::{
    ClosureCert, ComponentMode, FontaineElem, Prime, RingMode, TowerCtx, WittCtx, WittVec,
};

type Outcome = Result<String, String>;

fn prime(p: u64) -> Prime {
    Prime::new(p).expect("prime")
}

fn family(p: u64, d: u32) -> TowerCtx {
    TowerCtx::new(prime(p), 0, d, RingMode::Quotient).expect("valid family")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Legendre: `v_p(n!) = Σ_k floor(n / p^k)`.
fn legendre(p: u64, n: u64) -> u64 {
    let mut total = 0;
    let mut q = n / p;
    while q > 0 {
        total += q;
        q /= p;
    }
    total
}

fn binomial_lemma() -> Outcome {
    let mut count = 0;
    for (p, m_top) in [(2u64, 5u32), (3, 5), (5, 4)] {
        let pr = prime(p);
        for m in 0..=m_top {
            let n = p.pow(m);
            for i in 1..=n {
                let oracle = legendre(p, n) - legendre(p, i) - legendre(p, n - i);
                let mut i_val = 0;
                let mut j = i;
                while j % p == 0 {
                    j /= p;
                    i_val += 1;
                }
                ensure(oracle == u64::from(m) - i_val, || {
                    format!("oracle disagrees with m - v_p(i) at p={p} m={m} i={i}")
                })?;
                let lib = binom_valuation(pr, m, i).map_err(|e| e.to_string())?;
                ensure(lib == Valuation::Finite(oracle), || {
                    format!("binom_valuation p={p} m={m} i={i}: {lib:?} vs {oracle}")
                })?;
                let exact = rootclose_core::valuation::binom(n, i).map_err(|e| e.to_string())?;
                let direct = vp(pr, &BigInt::from(exact));
                ensure(direct == Valuation::Finite(oracle), || {
                    format!("vp(binom) p={p} m={m} i={i}: {direct:?} vs {oracle}")
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} binomials checked"))
}

fn closure_addition() -> Outcome {
    let fam = family(2, 3);
    let mut rng = sample::rng(2024);
    let pairs = 100;
    let mut max_m = 0;
    for k in 0..pairs {
        let a = sample::closure_candidate(fam, &mut rng);
        let b = sample::closure_candidate(fam, &mut rng);
        let s = membership(&a, 1).into_cert().ok_or(format!("pair {k}: first operand not certified"))?;
        let t = membership(&b, 1).into_cert().ok_or(format!("pair {k}: second operand not certified"))?;
        let sum = closure_add(&s, &t).map_err(|e| format!("pair {k}: {e}"))?;
        let bound = closure_add_bound(&s, &t);
        ensure(sum.m <= 5 && u64::from(sum.m) <= bound, || {
            format!("pair {k}: m = {} exceeds 5 or bound {bound}", sum.m)
        })?;
        ensure(sum.validate() && is_integral_power(&sum.elem, sum.m), || {
            format!("pair {k}: certificate does not re-validate")
        })?;
        ensure(sum.m == 0 || !is_integral_power(&sum.elem, sum.m - 1), || {
            format!("pair {k}: m = {} is not minimal", sum.m)
        })?;
        max_m = max_m.max(sum.m);
    }
    Ok(format!("{pairs} pairs certified, max m = {max_m}"))
}

/// `w_n = Σ_{i<=n} p^i x_i^(p^(n-i))`, computed directly.
fn ghost_oracle(p: u64, xs: &[BigInt]) -> Vec<BigInt> {
    (0..xs.len())
        .map(|n| {
            let mut acc = BigInt::zero();
            for (i, x) in xs.iter().enumerate().take(n + 1) {
                let mut power = x.clone();
                for _ in 0..(n - i) {
                    let base = power.clone();
                    power = (1..p).fold(base.clone(), |acc, _| acc * &base);
                }
                acc += BigInt::from(p).pow(i as u32) * power;
            }
            acc
        })
        .collect()
}

fn witt_ghost() -> Outcome {
    let mut rng = sample::rng(77);
    let per = 200;
    for (p, n) in [(2u64, 3usize), (3, 3), (5, 2)] {
        let ctx = WittCtx::new(prime(p), n).map_err(|e| e.to_string())?;
        for s in 0..per {
            let x = sample::int_witt(&ctx, &mut rng, 40);
            let y = sample::int_witt(&ctx, &mut rng, 40);
            let gx = ghost_oracle(p, x.components());
            let gy = ghost_oracle(p, y.components());
            let sum = x.add(&y).map_err(|e| e.to_string())?;
            let prod = x.mul(&y).map_err(|e| e.to_string())?;
            let neg = x.neg().map_err(|e| e.to_string())?;
            let gs = ghost_oracle(p, sum.components());
            let gm = ghost_oracle(p, prod.components());
            let gn = ghost_oracle(p, neg.components());
            for i in 0..n {
                ensure(
                    gs[i] == &gx[i] + &gy[i] && gm[i] == &gx[i] * &gy[i] && gn[i] == -&gx[i],
                    || format!("p={p} N={n} sample {s}: ghost identity fails at index {i} for x={x} y={y}"),
                )?;
            }
            ensure(x.ghost() == gx, || format!("p={p} N={n}: library ghost differs from oracle"))?;
        }
        let like = Fp::new(ctx.p(), &BigInt::one());
        let one = WittVec::one(&ctx, &like);
        let order = p.pow(n as u32);
        let mut acc = WittVec::zero(&ctx, &like);
        for k in 1..=order {
            acc = acc.add(&one).map_err(|e| e.to_string())?;
            let zero = acc.is_zero_decision().holds();
            ensure(zero == (k == order), || {
                format!("p={p} N={n}: k·1 zero at k={k} (expected only at {order})")
            })?;
        }
    }
    Ok(format!("{} samples per case; additive order of 1 is p^N", per))
}

fn status_of<'a>(rep: &'a report::Report, prefix: &str) -> Result<&'a report::Check, String> {
    rep.check(prefix).ok_or_else(|| format!("missing check {prefix}"))
}

fn worked_example() -> Outcome {
    let cfg = Config::default();
    ensure(
        (cfg.p, cfg.degree, cfg.depth, cfg.m_max) == (5, 3, 3, 5),
        || "unexpected default configuration".into(),
    )?;
    let rep = report::run_example_suite(&cfg).map_err(|e| e.to_string())?;
    for name in ["E1", "E2", "E3", "E4", "E5", "E6"] {
        let c = status_of(&rep, name)?;
        ensure(c.status == Status::Pass, || format!("{name} is {:?}: {}", c.status, c.details))?;
    }
    let e2 = &status_of(&rep, "E2")?.details;
    ensure(e2["bar_u"] == "0" && e2["r0"] == "0", || format!("E2 details {e2}"))?;

    let e3 = &status_of(&rep, "E3")?.details;
    ensure(
        e3["component"] == 1 && e3["negative_check"]["divides"] == false,
        || format!("E3 details {e3}"),
    )?;

    let fam = cfg.family().map_err(|e| e.to_string())?;
    let e4 = &status_of(&rep, "E4")?.details;
    let certs = e4["certificates"].as_array().ok_or("E4 has no certificates")?;
    ensure(certs.len() == 2, || format!("expected c_1 and c_2, got {}", certs.len()))?;
    for entry in certs {
        let n = entry["n"].as_u64().ok_or("E4 entry without n")? as u32;
        let cert = ClosureCert::from_json(fam, &entry["certificate"]).ok_or("unreadable certificate")?;
        ensure(cert.m == n, || format!("c_{n} certified with m = {}", cert.m))?;
        ensure(cert.elem == report::c_n(fam, n), || format!("c_{n} certificate is for another element"))?;
        ensure(cert.validate() && is_integral_power(&cert.elem, n), || {
            format!("c_{n} certificate does not re-validate")
        })?;
        ensure(!is_integral_power(&cert.elem, n - 1), || format!("c_{n} is integral below m = {n}"))?;
    }

    let e5 = &status_of(&rep, "E5")?.details;
    ensure(
        e5["product_depth"] == 2 && e5["product"] == "holds" && e5["mode"] == "closure",
        || format!("E5 details {e5}"),
    )?;
    let checks = e5["checks"].as_array().ok_or("E5 has no checks")?;
    ensure(
        checks.iter().all(|c| c["decision"] == "holds"),
        || "E5 has undetermined or failing congruences at m_max = 5".into(),
    )?;
    for c in e5["certificates"].as_array().ok_or("E5 has no certificates")? {
        let cert = ClosureCert::from_json(fam, c).ok_or("unreadable E5 certificate")?;
        ensure(cert.validate() && is_integral_power(&cert.elem, cert.m), || {
            "E5 certificate does not re-validate".into()
        })?;
    }

    let again = report::revalidate(&rep.to_json_string()).map_err(|e| e.to_string())?;
    ensure(again.passed(), || "report does not revalidate".into())?;
    Ok("E1-E6 pass; c_1, c_2 certified at m = 1, 2; report revalidates".into())
}

fn truncated(x: &WittVec<FontaineElem>, depth: usize) -> WittVec<FontaineElem> {
    let comps = x.components().iter().map(|c| c.truncate(depth)).collect();
    WittVec::new(x.ctx(), comps).expect("same length")
}

fn witt_roundtrip() -> Outcome {
    let mut rng = sample::rng(11);
    let samples = 20;
    let mode = ComponentMode::ClosureCerts { m_max: 5 };
    let mut summary = Vec::new();
    for (p, d, n, depth) in [(5u64, 3u32, 2usize, 4usize), (2, 3, 3, 6), (3, 2, 3, 6)] {
        let fam = family(p, d);
        let ctx = WittCtx::new(prime(p), n).map_err(|e| e.to_string())?;
        let mut achieved = usize::MAX;
        for s in 0..samples {
            let w = sample::fontaine_witt(&ctx, fam, depth, mode, &mut rng);
            let factor = p_tilde_minus_p(&ctx, &w.components()[0]).map_err(|e| e.to_string())?;
            let x = factor.mul(&w).map_err(|e| e.to_string())?;
            let tag = |e: WittError| format!("p={p} N={n} sample {s}: {e}");
            let k = u_precision(&x);
            ensure(k >= 1, || format!("p={p} N={n} sample {s}: no precision"))?;
            let u = u_map(&x, k).map_err(tag)?;
            ensure(u.is_zero(), || format!("p={p} N={n} sample {s}: u(x) != 0 mod p^{k}"))?;
            let out = divide_by_p_minus_p(&x).map_err(tag)?;
            ensure(out.depth + 2 * n - 1 == depth, || {
                format!("p={p} N={n} sample {s}: depth {} after division", out.depth)
            })?;
            let back = factor.mul(&out.quotient).map_err(tag)?;
            let eq = truncated(&back, out.depth)
                .decide_eq(&truncated(&x, out.depth))
                .map_err(tag)?;
            ensure(eq.holds(), || {
                format!("p={p} N={n} sample {s}: product identity is {}", eq.as_str())
            })?;
            achieved = achieved.min(out.depth);
        }
        summary.push(format!("W_{n} p={p}: depth {achieved}"));
    }
    Ok(format!("{samples} samples each; {}", summary.join(", ")))
}

fn plain_negative_control() -> Outcome {
    let fam = family(5, 3);
    let ctx = WittCtx::new(prime(5), 2).map_err(|e| e.to_string())?;
    let eta = report::eta(fam, 4, ComponentMode::PlainR);
    let x = WittVec::teichmuller(&ctx, eta);
    match divide_by_p_minus_p(&x) {
        Err(WittError::NotDivisible {
            iteration: 0,
            component: 1,
        }) => Ok("NotDivisible at iteration 0, component 1".into()),
        Err(e) => Err(format!("wrong error: {e}")),
        Ok(_) => Err("division succeeded over R".into()),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 6] = [
        ("binomial valuation lemma, exhaustive", 10, binomial_lemma),
        ("closure addition at p = 2, m <= 5", 30, closure_addition),
        ("integer Witt vectors: ghost map and additive order", 60, witt_ghost),
        ("worked example E1-E6 at p = 5", 120, worked_example),
        ("division by P - p in W_N over the closure", 120, witt_roundtrip),
        ("tau(eta) is not divisible over R", 10, plain_negative_control),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= Duration::from_secs(*budget) {
                Ok(msg)
            } else {
                Err(format!("{msg}; exceeded {budget}s budget"))
            }
        });
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS A{} {name} ({secs:.2}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL A{} {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
