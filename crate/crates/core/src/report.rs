//! Verification suites and machine-readable reports.
//!
//! Every passing record embeds the data needed to check it again from scratch
//! (certificates, witnesses, components in the expression grammar);
//! [`revalidate`] does exactly that.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::closure::{closure_add, closure_add_bound, membership, ClosureCert, LocalElem, Membership};
use crate::expr::{parse_expr, ExprError};
use crate::fontaine::{ComponentMode, Decision, FontaineElem, FontaineError};
use crate::par::{self, Exec};
use crate::sample;
use crate::tower::{poly_divides, RingMode, TowerCtx, TowerElem, TowerError};
use crate::valuation::{binom, binom_valuation, vp, Prime};
use crate::witt::{
    divide_by_p_minus_p, p_tilde_minus_p, u_map, u_precision, Fp, IntPoly, WittComponent, WittCtx,
    WittError, WittVec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub p: u64,
    pub degree: u32,
    pub depth: usize,
    pub witt_len: usize,
    pub m_max: u32,
    pub seed: u64,
    pub format: Format,
    /// Runs the closure-mode division of the example suite in plain mode
    /// instead, as a negative control.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub plain_e5: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            p: 5,
            degree: 3,
            depth: 3,
            witt_len: 2,
            m_max: 5,
            seed: 0,
            format: Format::Json,
            plain_e5: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("the example needs a prime p > 3, got {0}")]
    PrimeTooSmall(u64),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error("depth must be at least 2, got {0}")]
    DepthTooSmall(usize),
    #[error("Witt length must be at least 1")]
    WittLength,
}

impl Config {
    /// The level-0 ring family, checking only what every suite needs.
    pub fn family(&self) -> Result<TowerCtx, ConfigError> {
        let p = Prime::new(self.p).map_err(|_| ConfigError::NotPrime(self.p))?;
        Ok(TowerCtx::new(p, 0, self.degree, RingMode::Quotient)?)
    }

    /// Full validation for the example suite.
    pub fn validate_example(&self) -> Result<TowerCtx, ConfigError> {
        let family = self.family()?;
        if self.p <= 3 {
            return Err(ConfigError::PrimeTooSmall(self.p));
        }
        if self.depth < 2 {
            return Err(ConfigError::DepthTooSmall(self.depth));
        }
        if self.witt_len == 0 {
            return Err(ConfigError::WittLength);
        }
        Ok(family)
    }

    fn closure_mode(&self) -> ComponentMode {
        ComponentMode::ClosureCerts { m_max: self.m_max }
    }

    /// Fontaine depth for the Witt roundtrip: each of the `L` iterations uses
    /// two levels except the last, and one level must remain.
    pub fn witt_depth(&self) -> usize {
        self.depth.max(2 * self.witt_len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undetermined,
}

impl Status {
    pub fn from_decision(d: Decision) -> Status {
        match d {
            Decision::Holds => Status::Pass,
            Decision::Fails => Status::Fail,
            Decision::Undetermined => Status::Undetermined,
        }
    }

    fn from_bool(b: bool) -> Status {
        if b {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Undetermined => "UNDETERMINED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub details: Value,
}

impl Check {
    fn new(name: &str, status: Status, details: Value) -> Check {
        Check {
            name: name.into(),
            status,
            details,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Example,
    Props,
    Eval,
    Revalidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: Suite,
    pub config: Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: Suite, config: Config, checks: Vec<Check>) -> Report {
        Report {
            suite,
            config,
            timestamp: None,
            checks,
        }
    }

    /// All records pass; undetermined counts as not passing.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn check(&self, name_prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name.starts_with(name_prefix))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "suite={:?} p={} degree={} depth={} witt_len={} m_max={} seed={}",
            self.suite, c.p, c.degree, c.depth, c.witt_len, c.m_max, c.seed
        );
        for check in &self.checks {
            let _ = writeln!(out, "{:<13} {}", check.status.label(), check.name);
            if check.status != Status::Pass {
                let _ = writeln!(out, "              {}", check.details);
            }
        }
        let passed = self.checks.iter().filter(|c| c.status == Status::Pass).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Json => self.to_json_string() + "\n",
            Format::Text => self.to_text(),
        }
    }
}

/// `η = P^d + X^d + Y^d`, whose components are `p^(d/p^n) + x^(d/p^n) + y^(d/p^n)`.
pub fn eta(family: TowerCtx, depth: usize, mode: ComponentMode) -> FontaineElem {
    let d = u64::from(family.degree());
    let (p, x, y) = FontaineElem::generators(family, depth, mode);
    p.pow(d)
        .add(&x.pow(d))
        .and_then(|s| s.add(&y.pow(d)))
        .expect("same ring")
}

/// `c_n = (p^(d/p^n) + x^(d/p^n) + y^(d/p^n)) / p^(1/p^n)` at level `n`.
pub fn c_n(family: TowerCtx, n: u32) -> LocalElem {
    let ctx = family.at_level(n);
    let d = u64::from(family.degree());
    let num = TowerElem::pi(ctx)
        .pow(d)
        .add(&TowerElem::x(ctx).pow(d))
        .and_then(|s| s.add(&TowerElem::y(ctx).pow(d)))
        .expect("same ring");
    LocalElem::new(num, 1)
}

fn exprs(e: &FontaineElem) -> Vec<String> {
    e.components().iter().map(LocalElem::to_expr).collect()
}

fn parse_components(family: TowerCtx, mode: ComponentMode, v: &Value) -> Option<FontaineElem> {
    let comps = v
        .as_array()?
        .iter()
        .map(|s| parse_expr(s.as_str()?, family).ok())
        .collect::<Option<Vec<_>>>()?;
    FontaineElem::from_components(family, mode, comps).ok()
}

fn e1(cfg: &Config, family: TowerCtx) -> Check {
    let e = eta(family, cfg.depth, ComponentMode::PlainR);
    let p = family.p().get();
    let per_index: Vec<bool> = e
        .components()
        .windows(2)
        .map(|w| {
            let diff = w[1].pow(p).align(&w[0]).and_then(|(a, b)| a.sub(&b));
            diff.map(|d| d.reduce_mod_p_power(1).is_zero()).unwrap_or(false)
        })
        .collect();
    Check::new(
        "E1 eta is Frobenius-compatible",
        Status::from_bool(e.check_compat() && per_index.iter().all(|&b| b)),
        json!({ "components": exprs(&e), "compatible": per_index }),
    )
}

fn r0_input(family: TowerCtx) -> String {
    let d = family.degree();
    format!("p^{d} + x^{d} + y^{d}")
}

fn e2(cfg: &Config, family: TowerCtx) -> Check {
    let e = eta(family, cfg.depth, ComponentMode::PlainR);
    let r0 = c_n(family, 0).num().clone();
    let zero = e.bar_u().is_zero() && r0.reduce_mod_p().is_zero();
    Check::new(
        "E2 bar_u(eta) = 0",
        Status::from_bool(zero),
        json!({ "r0_input": r0_input(family), "r0": r0.to_expr(), "bar_u": e.bar_u().to_expr() }),
    )
}

/// `X^d + Y^d` and `X^(dp) + Y^(dp)` as plain polynomials modulo `p`.
fn divisibility_pair(family: TowerCtx) -> Result<(crate::tower::ResidueElem, crate::tower::ResidueElem), TowerError> {
    let free = TowerCtx::new(family.p(), 1, family.degree(), RingMode::Free)?;
    let d = u64::from(family.degree());
    let dp = d * family.p().get();
    let g = TowerElem::x(free).pow(d).add(&TowerElem::y(free).pow(d))?;
    let h = TowerElem::x(free).pow(dp).add(&TowerElem::y(free).pow(dp))?;
    Ok((g.reduce_mod_p(), h.reduce_mod_p()))
}

fn e3(cfg: &Config, family: TowerCtx) -> Check {
    let e = eta(family, cfg.depth, ComponentMode::PlainR);
    let outcome = e.divide_by_p_element();
    let component = match &outcome {
        Err(FontaineError::NotDivisible(n)) => Some(*n),
        _ => None,
    };
    let negative = divisibility_pair(family).and_then(|(g, h)| {
        Ok((g.clone(), h.clone(), poly_divides(&h, &g)?.is_some()))
    });
    let (status, negative) = match negative {
        Ok((g, h, divides)) => (
            Status::from_bool(component == Some(1) && !divides),
            json!({
                "dividend": g.lift().to_expr(),
                "divisor": h.lift().to_expr(),
                "divides": divides,
            }),
        ),
        Err(err) => (Status::Fail, json!({ "error": err.to_string() })),
    };
    let error = match outcome {
        Ok(_) => "division unexpectedly succeeded".to_string(),
        Err(err) => err.to_string(),
    };
    Check::new(
        "E3 eta is not divisible by P over R",
        status,
        json!({ "error": error, "component": component, "negative_check": negative }),
    )
}

fn e4(cfg: &Config, family: TowerCtx) -> Check {
    let mut status = Status::Pass;
    let mut certs = Vec::new();
    for n in 1..cfg.depth as u32 {
        let c = c_n(family, n);
        let entry = match membership(&c, cfg.m_max) {
            Membership::Certified(cert) => {
                if !(cert.validate() && cert.m == n) {
                    status = Status::Fail;
                }
                json!({ "n": n, "expr": c.to_expr(), "certificate": cert.to_json() })
            }
            Membership::NoCertificate { m_max } => {
                if status == Status::Pass {
                    status = Status::Undetermined;
                }
                json!({ "n": n, "expr": c.to_expr(), "no_certificate_up_to": m_max })
            }
            Membership::Refuted { obstruction } => {
                status = Status::Fail;
                json!({ "n": n, "expr": c.to_expr(), "obstruction": obstruction.lift().to_expr() })
            }
        };
        certs.push(entry);
    }
    Check::new(
        "E4 c_n lie in the root closure",
        status,
        json!({ "m_max": cfg.m_max, "certificates": certs }),
    )
}

fn e5(cfg: &Config, family: TowerCtx) -> Check {
    let mode = if cfg.plain_e5 {
        ComponentMode::PlainR
    } else {
        cfg.closure_mode()
    };
    let e = eta(family, cfg.depth, mode);
    let name = "E5 eta is divisible by P over the root closure";
    let div = match e.divide_by_p_element() {
        Ok(d) => d,
        Err(err) => {
            let component = match err {
                FontaineError::NotDivisible(n) => Some(n),
                _ => None,
            };
            let status = match err {
                FontaineError::UndeterminedCongruence { .. } => Status::Undetermined,
                _ => Status::Fail,
            };
            return Check::new(
                name,
                status,
                json!({ "mode": mode.name(), "error": err.to_string(), "component": component }),
            );
        }
    };
    let (big_p, _, _) = FontaineElem::generators(family, cfg.depth - 1, mode);
    let product = big_p
        .mul(&div.quotient)
        .and_then(|prod| prod.compare(&e.truncate(cfg.depth - 1)));
    let product = product.unwrap_or(Decision::Fails);
    let all = div
        .checks
        .iter()
        .fold(product, |d, (_, _, c)| d.and(*c));
    let certs_ok = div.certs.iter().all(ClosureCert::validate);
    let status = if certs_ok {
        Status::from_decision(all)
    } else {
        Status::Fail
    };
    Check::new(
        name,
        status,
        json!({
            "mode": mode.name(),
            "product_depth": cfg.depth - 1,
            "product": product.as_str(),
            "quotient": exprs(&div.quotient),
            "certificates": div.certs.iter().map(ClosureCert::to_json).collect::<Vec<_>>(),
            "checks": div.checks.iter().map(|(step, index, d)| json!({
                "step": step.to_string(),
                "index": index,
                "decision": d.as_str(),
            })).collect::<Vec<_>>(),
        }),
    )
}

/// `(τ(P) - p) ⊗ τ(X)` at the roundtrip depth.
fn e6_input(cfg: &Config, family: TowerCtx) -> Result<WittVec<FontaineElem>, WittError> {
    let ctx = WittCtx::new(family.p(), cfg.witt_len)?;
    let (_, x, _) = FontaineElem::generators(family, cfg.witt_depth(), cfg.closure_mode());
    p_tilde_minus_p(&ctx, &x)?.mul(&WittVec::teichmuller(&ctx, x))
}

fn e6(cfg: &Config, family: TowerCtx) -> Check {
    let name = "E6 Witt roundtrip through P - p";
    let run = || -> Result<Value, WittError> {
        let x = e6_input(cfg, family)?;
        let k = u_precision(&x);
        let u = u_map(&x, k)?;
        let out = divide_by_p_minus_p(&x)?;
        let certs: Vec<Value> = out
            .steps
            .iter()
            .flat_map(|s| s.certs.iter().map(ClosureCert::to_json))
            .collect();
        Ok(json!({
            "witt_len": cfg.witt_len,
            "fontaine_depth": cfg.witt_depth(),
            "precision": k,
            "u_is_zero": u.is_zero(),
            "achieved_depth": out.depth,
            "quotient": out.quotient.components().iter().map(exprs).collect::<Vec<_>>(),
            "certificates": certs,
        }))
    };
    match run() {
        Ok(details) => {
            let ok = details["u_is_zero"].as_bool() == Some(true);
            Check::new(name, Status::from_bool(ok), details)
        }
        Err(err) => Check::new(name, Status::Fail, json!({ "error": err.to_string() })),
    }
}

/// Runs the six example checks; they execute concurrently and are reported in
/// order.
pub fn run_example_suite(cfg: &Config) -> Result<Report, ConfigError> {
    let family = cfg.validate_example()?;
    type Step = fn(&Config, TowerCtx) -> Check;
    let steps: [Step; 6] = [e1, e2, e3, e4, e5, e6];
    let checks = par::map(Exec::Parallel, &steps, |f| f(cfg, family));
    Ok(Report::new(Suite::Example, cfg.clone(), checks))
}

/// Hooks for negative controls in the property suites.
#[derive(Debug, Clone, Default)]
pub struct PropsHooks {
    /// Corrupts one coefficient of the universal sum polynomials used by the
    /// ghost-oracle check.
    pub tamper_witt: bool,
}

fn tally(name: &str, samples: usize, failures: Vec<String>, extra: Value) -> Check {
    let mut details = json!({
        "samples": samples,
        "failures": failures.len(),
        "first_failures": failures.iter().take(3).collect::<Vec<_>>(),
    });
    if let (Value::Object(d), Value::Object(e)) = (&mut details, extra) {
        d.extend(e);
    }
    Check::new(name, Status::from_bool(failures.is_empty()), details)
}

fn props_binomial() -> Check {
    let mut samples = 0;
    let mut failures = Vec::new();
    for (p, m_top) in [(2u64, 5u32), (3, 5), (5, 4)] {
        let prime = Prime::new(p).expect("prime");
        for m in 0..=m_top {
            let n = p.pow(m);
            for i in 1..=n {
                samples += 1;
                let predicted = binom_valuation(prime, m, i).expect("in range");
                let actual = vp(prime, &BigInt::from(binom(n, i).expect("in range")));
                if predicted != actual {
                    failures.push(format!("p={p} m={m} i={i}"));
                }
            }
        }
    }
    tally("valuation: binomial lemma (exhaustive)", samples, failures, json!({}))
}

fn props_valuation(seed: u64) -> Check {
    let mut rng = sample::rng(seed ^ 0x01);
    let mut failures = Vec::new();
    let samples = 500;
    for _ in 0..samples {
        let p = Prime::new([2u64, 3, 5, 7][rng.gen_range(0..4)]).expect("prime");
        let a = BigInt::from(rng.gen_range(1i64..1_000_000)) * p.pow(rng.gen_range(0..6));
        let b = BigInt::from(rng.gen_range(-1_000_000i64..1_000_000)) * p.pow(rng.gen_range(0..6));
        if vp(p, &(&a * &b)) != vp(p, &a) + vp(p, &b) {
            failures.push(format!("p={p} a={a} b={b}"));
        }
    }
    tally("valuation: multiplicativity (sampled)", samples, failures, json!({}))
}

fn props_closure(seed: u64) -> Check {
    let family = TowerCtx::new(Prime::new(2).expect("prime"), 0, 3, RingMode::Quotient).expect("valid");
    let mut rng = sample::rng(seed ^ 0x02);
    let samples = 100;
    let pairs: Vec<(LocalElem, LocalElem)> = (0..samples)
        .map(|_| {
            (
                sample::closure_candidate(family, &mut rng),
                sample::closure_candidate(family, &mut rng),
            )
        })
        .collect();
    let results = par::map(Exec::Parallel, &pairs, |(a, b)| -> Result<u32, String> {
        let s = membership(a, 1).into_cert().ok_or("first operand not certified")?;
        let t = membership(b, 1).into_cert().ok_or("second operand not certified")?;
        let bound = closure_add_bound(&s, &t);
        let sum = closure_add(&s, &t).map_err(|e| e.to_string())?;
        if !sum.validate() || u64::from(sum.m) > bound {
            return Err(format!("m = {} against bound {bound}", sum.m));
        }
        Ok(sum.m)
    });
    let max_m = results.iter().filter_map(|r| r.as_ref().ok()).max().copied();
    let failures = results.into_iter().filter_map(Result::err).collect();
    tally(
        "closure: addition bound at p = 2 (sampled)",
        samples,
        failures,
        json!({ "max_m": max_m }),
    )
}

fn tampered(ctx: &WittCtx) -> WittCtx {
    let mut polys = ctx.polys().clone();
    let nv = 2 * ctx.len();
    polys.sum[ctx.len() - 1] = polys.sum[ctx.len() - 1].add(&IntPoly::var(nv, 0));
    WittCtx::from_polys(ctx.p(), polys).expect("same shape")
}

fn props_ghost(seed: u64, hooks: &PropsHooks) -> Check {
    let mut rng = sample::rng(seed ^ 0x03);
    let mut failures = Vec::new();
    let per = 200;
    let cases = [(2u64, 3usize), (3, 3), (5, 2)];
    for (p, n) in cases {
        let mut ctx = WittCtx::new(Prime::new(p).expect("prime"), n).expect("length");
        if hooks.tamper_witt {
            ctx = tampered(&ctx);
        }
        for _ in 0..per {
            let x = sample::int_witt(&ctx, &mut rng, 50);
            let y = sample::int_witt(&ctx, &mut rng, 50);
            let (gx, gy) = (x.ghost(), y.ghost());
            let gs = x.add(&y).expect("same ctx").ghost();
            let gm = x.mul(&y).expect("same ctx").ghost();
            for i in 0..n {
                if gs[i] != &gx[i] + &gy[i] || gm[i] != &gx[i] * &gy[i] {
                    failures.push(format!("p={p} N={n} x={x} y={y} index {i}"));
                    break;
                }
            }
        }
    }
    tally(
        "witt: ghost components are additive and multiplicative (sampled)",
        per * cases.len(),
        failures,
        json!({ "tampered": hooks.tamper_witt }),
    )
}

fn props_witt_fp(seed: u64) -> Check {
    let mut rng = sample::rng(seed ^ 0x04);
    let mut failures = Vec::new();
    let mut samples = 0;
    for (p, n) in [(2u64, 3usize), (3, 3), (5, 2)] {
        let ctx = WittCtx::new(Prime::new(p).expect("prime"), n).expect("length");
        let like = Fp::new(ctx.p(), &BigInt::from(1));
        let one = WittVec::one(&ctx, &like);
        let order = p.pow(n as u32);
        samples += 1;
        let full = one.repeated_add(order).expect("same ctx").is_zero_decision();
        let short = one.repeated_add(order / p).expect("same ctx").is_zero_decision();
        if full != Decision::Holds || short != Decision::Fails {
            failures.push(format!("p={p} N={n}: additive order of 1 is not p^N"));
        }
        for _ in 0..20 {
            samples += 1;
            let x = sample::fp_witt(&ctx, &mut rng);
            let y = sample::fp_witt(&ctx, &mut rng);
            let z = sample::fp_witt(&ctx, &mut rng);
            let eq = |a: &WittVec<Fp>, b: &WittVec<Fp>| a.decide_eq(b).expect("same ctx").holds();
            let ok = (|| -> Result<bool, WittError> {
                let assoc = eq(&x.add(&y)?.add(&z)?, &x.add(&y.add(&z)?)?)
                    && eq(&x.mul(&y)?.mul(&z)?, &x.mul(&y.mul(&z)?)?);
                let comm = eq(&x.add(&y)?, &y.add(&x)?) && eq(&x.mul(&y)?, &y.mul(&x)?);
                let dist = eq(&x.mul(&y.add(&z)?)?, &x.mul(&y)?.add(&x.mul(&z)?)?);
                let vf = eq(&x.times_p()?, &x.repeated_add(p)?);
                let neg = x.add(&x.neg()?)?.is_zero_decision().holds();
                let tau = {
                    let (a, b) = (x.components()[0], y.components()[0]);
                    eq(
                        &WittVec::teichmuller(&ctx, a).mul(&WittVec::teichmuller(&ctx, b))?,
                        &WittVec::teichmuller(&ctx, a.mul(&b)?),
                    )
                };
                Ok(assoc && comm && dist && vf && neg && tau)
            })();
            if !matches!(ok, Ok(true)) {
                failures.push(format!("p={p} N={n} x={x} y={y} z={z}"));
            }
        }
    }
    tally(
        "witt: ring axioms, additive order and p = VF over the prime field (sampled)",
        samples,
        failures,
        json!({}),
    )
}

fn props_fontaine(seed: u64) -> Check {
    let mut rng = sample::rng(seed ^ 0x05);
    let mut failures = Vec::new();
    let samples = 20;
    for (p, d) in [(5u64, 3u32), (3, 2)] {
        let family = TowerCtx::new(Prime::new(p).expect("prime"), 0, d, RingMode::Quotient).expect("valid");
        let mode = ComponentMode::PlainR;
        let (big_p, _, _) = FontaineElem::generators(family, 3, mode);
        for _ in 0..samples / 2 {
            let e = sample::fontaine_elem(family, 3, mode, &mut rng, 3, 3, 1);
            let ok = (|| -> Result<bool, FontaineError> {
                let by_products = (1..p).try_fold(e.clone(), |acc, _| acc.mul(&e))?;
                let frob = e.frobenius();
                let pe = big_p.mul(&e)?;
                let back = pe.divide_by_p_element()?.quotient;
                Ok(e.check_compat()
                    && frob == by_products
                    && frob.proot()? == e.truncate(2)
                    && back.compare(&e)?.holds())
            })();
            if !matches!(ok, Ok(true)) {
                failures.push(format!("p={p} e={e}: {ok:?}"));
            }
        }
    }
    tally(
        "fontaine: compatibility, Frobenius and division by P (sampled)",
        samples,
        failures,
        json!({}),
    )
}

fn props_u(seed: u64) -> Check {
    let mut rng = sample::rng(seed ^ 0x06);
    let mut failures = Vec::new();
    let samples = 10;
    let family = TowerCtx::new(Prime::new(3).expect("prime"), 0, 2, RingMode::Quotient).expect("valid");
    let ctx = WittCtx::new(family.p(), 2).expect("length");
    for _ in 0..samples {
        let x = sample::fontaine_witt(&ctx, family, 3, ComponentMode::PlainR, &mut rng);
        let y = sample::fontaine_witt(&ctx, family, 3, ComponentMode::PlainR, &mut rng);
        let ok = (|| -> Result<bool, WittError> {
            let s = x.add(&y)?;
            let m = x.mul(&y)?;
            let k = u_precision(&s).min(u_precision(&m)).min(u_precision(&x)).min(u_precision(&y));
            let (ux, uy) = (u_map(&x, k)?, u_map(&y, k)?);
            let add = u_map(&s, k)?.congruent(&ux.add(&uy)?)?;
            let mul = u_map(&m, k)?.congruent(&ux.mul(&uy)?)?;
            Ok(add && mul)
        })();
        if !matches!(ok, Ok(true)) {
            failures.push(format!("x={x} y={y}: {ok:?}"));
        }
    }
    tally("witt: u is a ring homomorphism (sampled)", samples, failures, json!({}))
}

/// Runs the property suites with the configured seed.
pub fn run_property_suites(cfg: &Config) -> Report {
    run_property_suites_with(cfg, &PropsHooks::default())
}

pub fn run_property_suites_with(cfg: &Config, hooks: &PropsHooks) -> Report {
    let seed = cfg.seed;
    let jobs: Vec<usize> = (0..8).collect();
    let checks = par::map(Exec::Parallel, &jobs, |&i| match i {
        0 => props_binomial(),
        1 => props_valuation(seed),
        2 => props_closure(seed),
        3 => props_ghost(seed, hooks),
        4 => props_witt_fp(seed),
        5 => props_fontaine(seed),
        6 => props_u(seed),
        _ => props_roundtrip(seed),
    });
    Report::new(Suite::Props, cfg.clone(), checks)
}

fn props_roundtrip(seed: u64) -> Check {
    let mut rng = sample::rng(seed ^ 0x07);
    let mut failures = Vec::new();
    let samples = 4;
    let family = TowerCtx::new(Prime::new(2).expect("prime"), 0, 3, RingMode::Quotient).expect("valid");
    let ctx = WittCtx::new(family.p(), 2).expect("length");
    let mode = ComponentMode::ClosureCerts { m_max: 4 };
    for _ in 0..samples {
        let w = sample::fontaine_witt(&ctx, family, 4, mode, &mut rng);
        let ok = (|| -> Result<bool, WittError> {
            let x = p_tilde_minus_p(&ctx, &w.components()[0])?.mul(&w)?;
            let zero = u_map(&x, u_precision(&x))?.is_zero();
            divide_by_p_minus_p(&x)?;
            Ok(zero)
        })();
        if !matches!(ok, Ok(true)) {
            failures.push(format!("w={w}: {ok:?}"));
        }
    }
    tally("witt: division by P - p roundtrip (sampled)", samples, failures, json!({}))
}

/// Parses an expression and, if asked, searches for a closure certificate.
pub fn run_eval(cfg: &Config, text: &str, check_closure: bool) -> Result<Report, EvalError> {
    let family = cfg.family()?;
    let e = parse_expr(text, family)?;
    let mut details = json!({
        "expr": text,
        "normal_form": e.to_expr(),
        "value": e.to_json(),
        "integral": e.is_integral(),
    });
    let mut checks = Vec::new();
    if check_closure {
        let (status, extra) = match membership(&e, cfg.m_max) {
            Membership::Certified(cert) => (
                Status::from_bool(cert.validate()),
                json!({ "membership": "certified", "certificate": cert.to_json() }),
            ),
            Membership::NoCertificate { m_max } => (
                Status::Undetermined,
                json!({ "membership": "no certificate", "m_max": m_max }),
            ),
            Membership::Refuted { obstruction } => (
                Status::Fail,
                json!({ "membership": "refuted", "obstruction": obstruction.lift().to_expr() }),
            ),
        };
        if let (Value::Object(d), Value::Object(x)) = (&mut details, extra) {
            d.extend(x);
        }
        checks.push(Check::new("closure membership", status, details));
    } else {
        checks.push(Check::new("parse", Status::Pass, details));
    }
    Ok(Report::new(Suite::Eval, cfg.clone(), checks))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Error)]
pub enum RevalidateError {
    #[error("report is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("revalidation of a revalidation report is not supported")]
    Nested,
}

/// Every object with `m`, `denom_exp` and `witness_terms` under `v`.
fn collect_certs<'a>(v: &'a Value, out: &mut Vec<&'a Value>) {
    match v {
        Value::Object(map) => {
            if map.contains_key("m") && map.contains_key("witness_terms") && map.contains_key("denom_exp") {
                out.push(v);
            }
            map.values().for_each(|x| collect_certs(x, out));
        }
        Value::Array(items) => items.iter().for_each(|x| collect_certs(x, out)),
        _ => {}
    }
}

fn recheck_certs(family: TowerCtx, details: &Value) -> (usize, bool) {
    let mut certs = Vec::new();
    collect_certs(details, &mut certs);
    let ok = certs
        .iter()
        .all(|c| ClosureCert::from_json(family, c).is_some_and(|c| c.validate()));
    (certs.len(), ok)
}

/// Independent recomputation of one example record from its embedded data.
fn recheck_example(cfg: &Config, family: TowerCtx, check: &Check) -> Result<bool, String> {
    let d = &check.details;
    let tag = check.name.split_whitespace().next().unwrap_or_default();
    match tag {
        "E1" => {
            let e = parse_components(family, ComponentMode::PlainR, &d["components"])
                .ok_or("components do not parse")?;
            Ok(e.depth() == cfg.depth && e.check_compat())
        }
        "E2" => {
            let r0 = parse_expr(d["r0"].as_str().ok_or("missing r0")?, family).map_err(|e| e.to_string())?;
            let input = d["r0_input"].as_str().ok_or("missing r0_input")?;
            let direct = parse_expr(input, family).map_err(|e| e.to_string())?;
            Ok(input == r0_input(family)
                && r0 == direct
                && r0.is_integral()
                && r0.num().reduce_mod_p().is_zero())
        }
        "E3" => {
            let neg = &d["negative_check"];
            let free = TowerCtx::new(family.p(), 1, family.degree(), RingMode::Free).map_err(|e| e.to_string())?;
            let parse = |k: &str| -> Result<crate::tower::ResidueElem, String> {
                let s = neg[k].as_str().ok_or("missing polynomial")?;
                let e = parse_expr(s, free).map_err(|e| e.to_string())?;
                Ok(e.embed(1).map_err(|e| e.to_string())?.num().reduce_mod_p())
            };
            let (g, h) = (parse("dividend")?, parse("divisor")?);
            let (g0, h0) = divisibility_pair(family).map_err(|e| e.to_string())?;
            let divides = poly_divides(&h, &g).map_err(|e| e.to_string())?.is_some();
            let plain = eta(family, cfg.depth, ComponentMode::PlainR).divide_by_p_element();
            Ok(g == g0 && h == h0 && !divides && matches!(plain, Err(FontaineError::NotDivisible(1))))
        }
        "E4" => {
            let certs = d["certificates"].as_array().ok_or("missing certificates")?;
            let mut ok = certs.len() + 1 == cfg.depth;
            for (i, entry) in certs.iter().enumerate() {
                let n = i as u32 + 1;
                let cert = ClosureCert::from_json(family, &entry["certificate"]).ok_or("malformed certificate")?;
                let expected = parse_expr(entry["expr"].as_str().ok_or("missing expr")?, family)
                    .map_err(|e| e.to_string())?;
                let same = cert.elem.align(&expected).map(|(a, b)| a == b).unwrap_or(false);
                ok &= same && cert.elem == c_n(family, n) && cert.m == n && cert.validate();
            }
            Ok(ok)
        }
        "E5" => {
            let mode = cfg.closure_mode();
            let t = parse_components(family, mode, &d["quotient"]).ok_or("quotient does not parse")?;
            let depth = t.depth();
            let (big_p, _, _) = FontaineElem::generators(family, depth, mode);
            let e = eta(family, depth, mode);
            let product = big_p.mul(&t).and_then(|pt| pt.compare(&e)).map_err(|e| e.to_string())?;
            Ok(depth + 1 == cfg.depth && product.holds())
        }
        "E6" => {
            let mode = cfg.closure_mode();
            let coords = d["quotient"].as_array().ok_or("missing quotient")?;
            let comps = coords
                .iter()
                .map(|c| parse_components(family, mode, c))
                .collect::<Option<Vec<_>>>()
                .ok_or("quotient does not parse")?;
            let ctx = WittCtx::new(family.p(), cfg.witt_len).map_err(|e| e.to_string())?;
            let w = WittVec::new(&ctx, comps).map_err(|e| e.to_string())?;
            let x = e6_input(cfg, family).map_err(|e| e.to_string())?;
            let lhs = p_tilde_minus_p(&ctx, &w.components()[0])
                .and_then(|f| f.mul(&w))
                .and_then(|prod| prod.decide_eq(&x))
                .map_err(|e| e.to_string())?;
            Ok(lhs.holds() && d["achieved_depth"].as_u64() == Some(w.depth() as u64))
        }
        _ => Err(format!("unknown record {}", check.name)),
    }
}

/// Re-checks a report from its JSON text.
///
/// Example reports are re-verified record by record from the embedded data;
/// property reports are re-run from their seed; eval reports have their
/// expression re-parsed and certificate re-validated. A record passes only if
/// it passed originally and the recomputation confirms it.
pub fn revalidate(text: &str) -> Result<Report, RevalidateError> {
    let original: Report = serde_json::from_str(text)?;
    let cfg = original.config.clone();
    let family = cfg.family()?;
    let rerun = match original.suite {
        Suite::Props => Some(run_property_suites(&cfg)),
        Suite::Revalidate => return Err(RevalidateError::Nested),
        _ => None,
    };
    let checks = original
        .checks
        .iter()
        .enumerate()
        .map(|(i, check)| {
            let (count, certs_ok) = recheck_certs(family, &check.details);
            let recomputed: Result<bool, String> = match original.suite {
                Suite::Example => recheck_example(&cfg, family, check),
                Suite::Props => Ok(rerun
                    .as_ref()
                    .and_then(|r| r.checks.get(i))
                    .is_some_and(|c| c.name == check.name && c.status == check.status)),
                Suite::Eval => {
                    let text = check.details["expr"].as_str().unwrap_or_default();
                    run_eval(&cfg, text, check.name == "closure membership")
                        .map(|r| r.checks.first().map(|c| c.status) == Some(check.status))
                        .map_err(|e| e.to_string())
                }
                Suite::Revalidate => unreachable!(),
            };
            let confirmed = matches!(recomputed, Ok(true)) && certs_ok;
            let status = match check.status {
                Status::Pass if confirmed => Status::Pass,
                Status::Undetermined => Status::Undetermined,
                _ => Status::Fail,
            };
            Check::new(
                &check.name,
                status,
                json!({
                    "original": check.status,
                    "certificates_checked": count,
                    "certificates_valid": certs_ok,
                    "recomputed": match recomputed {
                        Ok(b) => json!(b),
                        Err(e) => json!(e),
                    },
                }),
            )
        })
        .collect();
    Ok(Report::new(Suite::Revalidate, cfg, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_rejects_small_primes() {
        let cfg = Config {
            p: 2,
            ..Config::default()
        };
        assert_eq!(run_example_suite(&cfg).unwrap_err(), ConfigError::PrimeTooSmall(2));
        let cfg = Config {
            p: 9,
            ..Config::default()
        };
        assert_eq!(run_example_suite(&cfg).unwrap_err(), ConfigError::NotPrime(9));
    }

    #[test]
    fn c_n_matches_parser() {
        let family = Config::default().family().unwrap();
        let parsed = parse_expr("(p^(3/5)+x^(3/5)+y^(3/5))/p^(1/5)", family).unwrap();
        assert_eq!(parsed, c_n(family, 1));
    }

    #[test]
    fn eval_reports_membership() {
        let cfg = Config::default();
        let r = run_eval(&cfg, "(p^(3/5)+x^(3/5)+y^(3/5))/p^(1/5)", true).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks[0].details["certificate"]["m"], 1);
        let r = run_eval(&cfg, "x/p", true).unwrap();
        assert_eq!(r.checks[0].status, Status::Fail);
        let r = run_eval(&cfg, "x/p", false).unwrap();
        assert!(r.passed());
        assert!(revalidate(&r.to_json_string()).unwrap().passed());
    }

    #[test]
    fn example_suite_passes_and_revalidates() {
        let r = run_example_suite(&Config::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let again = revalidate(&r.to_json_string()).unwrap();
        assert!(again.passed(), "{}", again.to_text());
        assert_eq!(r.to_json_string(), run_example_suite(&Config::default()).unwrap().to_json_string());
    }

    #[test]
    fn plain_e5_fails_at_component_one() {
        let cfg = Config {
            plain_e5: true,
            ..Config::default()
        };
        let r = run_example_suite(&cfg).unwrap();
        let e5 = r.check("E5").unwrap();
        assert_eq!(e5.status, Status::Fail);
        assert_eq!(e5.details["component"], 1);
    }

    #[test]
    fn props_pass_and_tamper_is_caught() {
        let cfg = Config::default();
        let r = run_property_suites(&cfg);
        assert!(r.passed(), "{}", r.to_text());
        let bad = run_property_suites_with(&cfg, &PropsHooks { tamper_witt: true });
        let ghost = bad.check("witt: ghost").unwrap();
        assert_eq!(ghost.status, Status::Fail);
        let other = run_property_suites(&Config { seed: 99, ..cfg });
        let statuses = |r: &Report| r.checks.iter().map(|c| c.status).collect::<Vec<_>>();
        assert_eq!(statuses(&r), statuses(&other));
    }
}
