//! Khintchine's constant from the product
//! `K = Π_{n≥1} (1 + 1/(n(n+2)))^{ln n / ln 2}`.
//!
//! Products are accumulated as a compensated sum of logarithms and
//! exponentiated once. The log-sum converges like `(ln N)/N`, so the
//! accelerated form adds an Euler-Maclaurin estimate of the remaining tail.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{BigReal, CompensatedSum, PrecisionContext};

/// Largest `target_digits` the single-correction tail supports.
pub const MAX_TARGET_DIGITS: u32 = 8;
const START_TERMS: u64 = 1 << 10;
const MAX_TERMS: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductResult {
    pub value: BigReal,
    pub terms_used: u64,
    /// For a plain partial product: an upper bound on `K - P_N` from the
    /// integral comparison. For an accelerated product: the correction
    /// added on top of `P_N`.
    pub tail_estimate: BigReal,
    pub accelerated: bool,
}

/// `(ln n / ln 2) · ln(1 + 1/(n(n+2)))`.
fn log_factor(n: u64, bits: u32, ln2: &Float) -> Float {
    if n == 1 {
        return Float::new(bits);
    }
    let denom = Float::with_val(bits, n as u128 * (n as u128 + 2));
    let step = denom.recip().ln_1p();
    Float::with_val(bits, n).ln() * step / ln2
}

/// Log-sums `Σ_{n≤N}` recorded at each checkpoint, in ascending order.
fn log_sums_at(checkpoints: &[u64], bits: u32) -> Vec<Float> {
    let ln2 = Float::with_val(bits, 2u32).ln();
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    let mut acc = CompensatedSum::new(bits);
    let mut out = Vec::with_capacity(sorted.len());
    let mut n = 0u64;
    for &target in &sorted {
        while n < target {
            n += 1;
            acc.add(&log_factor(n, bits, &ln2));
        }
        out.push(acc.value());
    }
    out
}

/// `(ln N + 1) / (N ln 2)`, which dominates `Σ_{n>N}` of the log factors
/// because `ln(1 + y) ≤ y` and `1/(n(n+2)) < 1/n²`.
pub fn log_tail_bound(n: u64, ctx: &PrecisionContext) -> BigReal {
    let bits = ctx.working_bits();
    let nf = Float::with_val(bits, n);
    let ln2 = Float::with_val(bits, 2u32).ln();
    let value = (Float::with_val(bits, nf.ln_ref()) + 1u32) / (nf * ln2);
    BigReal::finite(value)
}

/// Π_{n=1}^{N} of the factors.
pub fn khintchine_partial(n: u64, ctx: &PrecisionContext) -> Result<ProductResult> {
    if n == 0 {
        return Err(Error::Domain("product needs at least one factor".into()));
    }
    let bits = ctx.working_bits();
    let log_sum = log_sums_at(&[n], bits).pop().expect("one checkpoint");
    let value = log_sum.exp();
    // K - P_N = P_N (e^{tail} - 1) ≤ P_N (e^{bound} - 1)
    let bound = log_tail_bound(n, ctx).into_float().exp_m1() * &value;
    Ok(ProductResult {
        value: BigReal::new(value)?,
        terms_used: n,
        tail_estimate: BigReal::new(bound)?,
        accelerated: false,
    })
}

/// Partial products at several `N` in one pass, ascending by `N`.
pub fn khintchine_partials(checkpoints: &[u64], ctx: &PrecisionContext) -> Result<Vec<(u64, BigReal)>> {
    if checkpoints.contains(&0) {
        return Err(Error::Domain("product needs at least one factor".into()));
    }
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let sums = log_sums_at(&sorted, ctx.working_bits());
    sorted
        .into_iter()
        .zip(sums)
        .map(|(n, s)| Ok((n, BigReal::new(s.exp())?)))
        .collect()
}

/// `∫_N^∞ ln t / (t(t+2)) dt`, expanding `1/(t(t+2)) = Σ_j (-2)^j / t^{j+2}`
/// and integrating term by term: `∫_N^∞ ln t · t^{-(j+2)} dt
/// = ((j+1) ln N + 1) / ((j+1)² N^{j+1})`.
fn asymptotic_integral(n: u64, bits: u32) -> Float {
    let nf = Float::with_val(bits, n);
    let ln_n = Float::with_val(bits, nf.ln_ref());
    let threshold = Float::with_val(bits, 1u32) >> (bits + 8);
    let mut sum = Float::new(bits);
    // (-2)^j / N^{j+1}
    let mut scale = Float::with_val(bits, nf.recip_ref());
    for j in 0u32.. {
        let jp1 = j + 1;
        let numer = Float::with_val(bits, &ln_n * jp1) + 1u32;
        let term = numer * &scale / (jp1 * jp1);
        let small = term.clone().abs() < threshold;
        sum += term;
        if small {
            break;
        }
        scale *= -2i32;
        scale /= &nf;
    }
    sum
}

/// Euler-Maclaurin estimate of `Σ_{n>N}` of the log factors, using the
/// asymptotic integrand `h(t) = ln t / (ln 2 · t(t+2))`:
/// `Σ_{n>N} h(n) ≈ ∫_N^∞ h - h(N)/2`.
pub fn log_tail_estimate(n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "tail expansion needs N ≥ 3, got {n}"
        )));
    }
    let bits = ctx.working_bits();
    let ln2 = Float::with_val(bits, 2u32).ln();
    let nf = Float::with_val(bits, n);
    let h_n = Float::with_val(bits, nf.ln_ref()) / (Float::with_val(bits, &nf * (n + 2)));
    let value = (asymptotic_integral(n, bits) - h_n / 2u32) / ln2;
    BigReal::new(value)
}

/// `P_N · exp(tail estimate)` at a fixed `N`.
pub fn khintchine_accelerated_at(n: u64, ctx: &PrecisionContext) -> Result<ProductResult> {
    Ok(khintchine_accelerated_many(&[n], ctx)?.pop().expect("one checkpoint"))
}

/// Accelerated products at several `N` from a single pass over the factors,
/// ascending by `N`.
pub fn khintchine_accelerated_many(checkpoints: &[u64], ctx: &PrecisionContext) -> Result<Vec<ProductResult>> {
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let bits = ctx.working_bits();
    let sums = log_sums_at(&sorted, bits);
    sorted
        .into_iter()
        .zip(sums)
        .map(|(n, log_sum)| {
            let tail = log_tail_estimate(n, ctx)?.into_float();
            let partial = Float::with_val(bits, log_sum.exp_ref());
            let value = (log_sum + tail).exp();
            let correction = Float::with_val(bits, &value - &partial);
            Ok(ProductResult {
                value: BigReal::new(value)?,
                terms_used: n,
                tail_estimate: BigReal::new(correction)?,
                accelerated: true,
            })
        })
        .collect()
}

/// Accelerated product, doubling `N` from 1024 until two successive values
/// agree within `10^-target_digits`.
pub fn khintchine_accelerated(ctx: &PrecisionContext, target_digits: u32) -> Result<ProductResult> {
    if target_digits == 0 || target_digits > MAX_TARGET_DIGITS {
        return Err(Error::Domain(format!(
            "target digits must be in 1..={MAX_TARGET_DIGITS}, got {target_digits}"
        )));
    }
    let bits = ctx.working_bits();
    let threshold = Float::with_val(bits, 10u32).pow(target_digits).recip();
    let mut n = START_TERMS;
    let mut previous = khintchine_accelerated_at(n, ctx)?;
    while n < MAX_TERMS {
        n *= 2;
        let current = khintchine_accelerated_at(n, ctx)?;
        if current.value.abs_diff(&previous.value).as_float() < &threshold {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NoConvergence(format!(
        "accelerated product not stable to {target_digits} digits by N = {n}"
    )))
}
