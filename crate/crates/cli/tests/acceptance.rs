//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion, and exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use krivine_core::elliptic::{
    certificate_grid, ellip_e, ellip_e_quadrature, ellip_k, ellip_k_quadrature, krivine_complex_f,
    legendre_residual, solve_x0,
};
use krivine_core::identities::verify;
use krivine_core::khintchine::{
    khintchine_accelerated_many, khintchine_partial, khintchine_partials,
};
use krivine_core::series::{
    double_series, double_series_partial, fourier_a, fourier_a_quadrature, parseval_closure, recurrence_check,
};
use krivine_core::{BigReal, IdentityId, PrecisionContext, Result};
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

fn ctx(d: u32) -> PrecisionContext {
    PrecisionContext::new(d).unwrap()
}

fn ten_to(exp: i32, bits: u32) -> Float {
    Float::with_val(bits, 10u32).pow(exp)
}

fn diff(a: &Float, b: &Float) -> Float {
    Float::with_val(a.prec().max(b.prec()), a - b).abs()
}

fn sci(x: &Float) -> String {
    format!("{:.2e}", x.to_f64())
}

/// π by Machin's formula, independent of the library's constant.
fn machin_pi(bits: u32) -> Float {
    let atan_inv = |q: u32| {
        let x = Float::with_val(bits, q).recip();
        let x2 = Float::with_val(bits, x.square_ref());
        let eps = Float::with_val(bits, 1u32) >> (bits + 4);
        let mut power = x;
        let mut sum = Float::new(bits);
        let mut k = 0u32;
        loop {
            let term = Float::with_val(bits, &power / (2 * k + 1));
            if k % 2 == 0 {
                sum += &term;
            } else {
                sum -= &term;
            }
            if term < eps {
                return sum;
            }
            power *= &x2;
            k += 1;
        }
    };
    atan_inv(5) * 16u32 - atan_inv(239) * 4u32
}

fn log_l(bits: u32) -> Float {
    (Float::with_val(bits, 2u32).sqrt() + 1u32).ln()
}

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Check {
            ok: true,
            detail: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let what = what.into();
        if ok {
            self.detail.push_str(&what);
        } else {
            self.ok = false;
            self.detail.push_str(&format!("FAILED {what}"));
        }
    }
}

fn criterion_1() -> Result<Check> {
    let c = ctx(30);
    let bits = c.working_bits();
    let mut check = Check::new();
    let started = Instant::now();
    let v = double_series(&c)?;
    let elapsed = started.elapsed();
    let l = log_l(bits);
    let target = machin_pi(bits) / 16u32 - l.square() / 4u32;
    let residual = diff(v.value.as_float(), &target);
    check.require(residual < ten_to(-30, bits), format!("residual {}", sci(&residual)));
    check.require(v.converged, format!("tail bound {}", sci(v.tail_bound.as_float())));
    check.require(elapsed < Duration::from_secs(30), format!("{:.1}s", elapsed.as_secs_f64()));
    let brute = double_series_partial(100_000, &c);
    let gap = diff(brute.as_float(), v.value.as_float());
    check.require(gap < ten_to(-15, bits), format!("N=1e5 brute force gap {}", sci(&gap)));
    Ok(check)
}

fn criterion_2() -> Result<Check> {
    let c = ctx(30);
    let bits = c.working_bits();
    let mut check = Check::new();
    let p = parseval_closure(&c)?;
    let target = Float::with_val(bits, 8u32) / machin_pi(bits);
    let residual = diff(p.value.as_float(), &target);
    check.require(residual < ten_to(-25, bits), format!("residual {}", sci(&residual)));
    Ok(check)
}

fn criterion_3() -> Result<Check> {
    let mut check = Check::new();
    let c = ctx(30);
    let bits = c.working_bits();
    let mut worst = Float::new(bits);
    for n in 0..=8 {
        let closed = fourier_a(n, &c).value;
        let quad = fourier_a_quadrature(n, &c)?.value;
        worst.max_mut(&diff(closed.as_float(), quad.as_float()));
    }
    check.require(worst < ten_to(-25, bits), format!("coefficients n=0..8 max gap {}", sci(&worst)));
    let c = ctx(40);
    let bits = c.working_bits();
    let mut worst = Float::new(bits);
    for n in 1..=100 {
        worst.max_mut(recurrence_check(n, &c)?.as_float());
    }
    check.require(worst < ten_to(-30, bits), format!("recurrence n=1..100 max {}", sci(&worst)));
    Ok(check)
}

fn criterion_4() -> Result<Check> {
    let c = ctx(40);
    let bits = c.working_bits();
    let tol = ten_to(-30, bits);
    let mut check = Check::new();
    let def = verify(IdentityId::KgDefinition, &c);
    let def_res = def.residual.clone().map(BigReal::into_float).unwrap_or_else(|| Float::with_val(bits, 1u32));
    check.require(def_res < tol, format!("definition {}", sci(&def_res)));

    // both series forms, evaluated here from the library's double series
    let pi = machin_pi(bits);
    let kg = Float::with_val(bits, &pi / (log_l(bits) * 2u32));
    let v = double_series(&c)?.value.into_float();
    let radicand = Float::with_val(bits, &pi - Float::with_val(bits, &v * 16u32));
    let kg_form = diff(&(Float::with_val(bits, &pi / radicand.sqrt())), &kg);
    let v_form = diff(
        &v,
        &(Float::with_val(bits, &pi / 16u32) * (1u32 - Float::with_val(bits, &pi / Float::with_val(bits, kg.square_ref())))),
    );
    check.require(kg_form < tol, format!("K_G form {}", sci(&kg_form)));
    check.require(v_form < tol, format!("V form {}", sci(&v_form)));
    let report = verify(IdentityId::KgFromSeries, &c);
    check.require(report.passed, "KG_FROM_SERIES report");
    Ok(check)
}

fn criterion_5() -> Result<Check> {
    let c = ctx(30);
    let bits = c.working_bits();
    let tol = ten_to(-25, bits);
    let mut check = Check::new();
    let started = Instant::now();
    let ids = [
        IdentityId::AppendixA1,
        IdentityId::AppendixA2Corrected,
        IdentityId::AppendixA3,
        IdentityId::AppendixA4,
        IdentityId::FixedPoint(1),
        IdentityId::FixedPoint(2),
        IdentityId::FixedPoint(3),
        IdentityId::FixedPoint(4),
    ];
    let pi2 = machin_pi(bits).square();
    let four_l2 = log_l(bits).square() * 4u32;
    for id in ids {
        let r = verify(id, &c);
        let Some(residual) = r.residual.clone() else {
            check.require(false, format!("{id}: {:?}", r.params.get("error")));
            continue;
        };
        check.require(residual.as_float() < &tol, format!("{id} {}", sci(residual.as_float())));
        // the constant sides of the appendix identities against independent π and L
        let expected_lhs = match id {
            IdentityId::AppendixA2Corrected => Some(Float::with_val(bits, &pi2 + &four_l2)),
            IdentityId::AppendixA1 | IdentityId::AppendixA3 | IdentityId::AppendixA4 => Some(pi2.clone()),
            _ => None,
        };
        if let (Some(want), Some(lhs)) = (expected_lhs, r.lhs.as_ref()) {
            let gap = diff(lhs.as_float(), &want);
            check.require(gap < tol, format!("{id} lhs oracle {}", sci(&gap)));
        }
    }
    let elapsed = started.elapsed();
    check.require(elapsed < Duration::from_secs(60), format!("{:.1}s", elapsed.as_secs_f64()));
    Ok(check)
}

fn criterion_6() -> Result<Check> {
    let c = ctx(30);
    let bits = c.working_bits();
    let tol = ten_to(-25, bits);
    let mut check = Check::new();
    let ulp = Float::with_val(bits, 1u32) >> (bits - 2);
    let half_pi = Float::with_val(bits, Constant::Pi) / 2u32;
    let zero = c.real(0);
    let one = c.real(1);
    let k0 = diff(ellip_k(&zero, &c)?.as_float(), &half_pi);
    let e0 = diff(ellip_e(&zero, &c)?.as_float(), &half_pi);
    let e1 = diff(ellip_e(&one, &c)?.as_float(), one.as_float());
    check.require(k0 <= ulp && e0 <= ulp && e1.is_zero(), "K(0)=E(0)=pi/2, E(1)=1");
    let mut legendre = Float::new(bits);
    let mut agm_vs_quad = Float::new(bits);
    for k in certificate_grid(&c) {
        if !k.is_zero() {
            legendre.max_mut(legendre_residual(&k, &c)?.as_float());
        }
        agm_vs_quad.max_mut(&diff(ellip_k(&k, &c)?.as_float(), ellip_k_quadrature(&k, &c)?.as_float()));
        agm_vs_quad.max_mut(&diff(ellip_e(&k, &c)?.as_float(), ellip_e_quadrature(&k, &c)?.as_float()));
    }
    check.require(legendre < tol, format!("Legendre max {}", sci(&legendre)));
    check.require(agm_vs_quad < tol, format!("AGM vs quadrature max {}", sci(&agm_vs_quad)));
    Ok(check)
}

fn criterion_7() -> Result<Check> {
    let mut check = Check::new();
    let c40 = ctx(40);
    let bits = c40.working_bits();
    let r40 = solve_x0(&c40)?;
    let f = krivine_complex_f(&r40.x0, &c40)?.into_float().abs();
    check.require(f < ten_to(-30, bits), format!("|f(x0)| {}", sci(&f)));
    let r20 = solve_x0(&ctx(20))?;
    let drift = diff(r20.x0.as_float(), r40.x0.as_float());
    check.require(drift < ten_to(-20, bits), format!("x0 drift 20->40 digits {}", sci(&drift)));
    let h = verify(IdentityId::HaagerupConsistency, &ctx(30));
    let hr = h.residual.map(BigReal::into_float).unwrap_or_else(|| Float::with_val(bits, 1u32));
    check.require(hr < ten_to(-25, bits), format!("Haagerup routes {}", sci(&hr)));
    Ok(check)
}

fn criterion_8() -> Result<Check> {
    let c = ctx(12);
    let mut check = Check::new();
    let points: Vec<u64> = vec![1, 2, 3, 10, 100, 1_000, 10_000, 100_000];
    let partials = khintchine_partials(&points, &c)?;
    let monotone = partials.windows(2).all(|w| w[0].1.as_float() < w[1].1.as_float());
    check.require(monotone, "partial products increasing");
    let acc = khintchine_accelerated_many(&[1_000_000, 2_000_000], &c)?;
    let (a, b) = (&acc[0], &acc[1]);
    let rel = Float::with_val(c.working_bits(), diff(a.value.as_float(), b.value.as_float()) / b.value.as_float());
    check.require(rel.to_f64() < 5e-7, format!("1e6 vs 2e6 relative gap {:.2e}", rel.to_f64()));
    check.require(
        a.value.to_decimal(6) == b.value.to_decimal(6),
        format!("6 digits {} / {}", a.value.to_decimal(6), b.value.to_decimal(6)),
    );
    // the tail estimate is positive and below the rigorous integral bound
    let mut within = true;
    for n in [1_000u64, 100_000] {
        let plain = khintchine_partial(n, &c)?;
        let acc = &khintchine_accelerated_many(&[n], &c)?[0];
        let correction = acc.tail_estimate.as_float();
        within &= correction.is_sign_positive() && correction < plain.tail_estimate.as_float();
    }
    check.require(within, "tail estimate inside integral bound");
    Ok(check)
}

fn criterion_9() -> Check {
    let mut check = Check::new();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_krivine"))
            .args(["verify", "all", "--digits", "20", "--format", "json"])
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    check.require(first.status.code() == Some(0), format!("exit {:?}", first.status.code()));
    check.require(first.stdout == second.stdout, "byte-identical JSON");
    check.require(!first.stdout.is_empty(), format!("{} bytes", first.stdout.len()));
    check
}

type Criterion = Box<dyn Fn() -> Result<Check>>;

fn main() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 double series identity", Box::new(criterion_1)),
        ("2 Parseval closure", Box::new(criterion_2)),
        ("3 coefficient oracle", Box::new(criterion_3)),
        ("4 K_G identities", Box::new(criterion_4)),
        ("5 integral identities and fixed points", Box::new(criterion_5)),
        ("6 elliptic certificates", Box::new(criterion_6)),
        ("7 complex-case root", Box::new(criterion_7)),
        ("8 Khintchine product", Box::new(criterion_8)),
        ("9 CLI determinism", Box::new(|| Ok(criterion_9()))),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let (ok, detail) = match run() {
            Ok(check) => (check.ok, check.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} criterion {name} ({:.1}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
