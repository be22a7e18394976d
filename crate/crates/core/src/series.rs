//! The alternating quarter-integer series, its tails, the Fourier
//! coefficients of `1/cos(x/4)` on `[-π, π]`, and the double series of
//! squared tails.
//!
//! Notation used throughout:
//!
//! ```text
//! c_k = (-1)^k (1/(4k-1) - 1/(4k-3)) = (-1)^(k+1) · 2/((4k-3)(4k-1))
//! S_n = c_1 + ... + c_n                 S = lim S_n = (√2/2) ln(1+√2)
//! T_n = Σ_{k>n} c_k = S - S_n           a_n = (8√2/π) T_n
//! V   = Σ_{n≥1} T_n²
//! ```
//!
//! `T_n` carries the sign of `c_{n+1}`, so `T_1 < 0`.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{ln_one_plus_sqrt2, pi, sqrt2, BigReal, CompensatedSum, PrecisionContext};
use crate::quadrature::{QuadratureResult, TanhSinh};

/// Default cap on outer terms for plain truncation.
pub const DEFAULT_MAX_TERMS: u64 = 10_000_000;
/// Auto mode truncates plainly only when this many outer terms suffice.
pub const DEFAULT_DIRECT_LIMIT: u64 = 100_000;
/// Outer terms summed explicitly before the Laplace tail takes over.
pub const DEFAULT_LAPLACE_HEAD: u64 = 1_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesResult {
    pub value: BigReal,
    pub terms_used: u64,
    /// Upper bound on the error left by truncation (or by the tail
    /// evaluation, for the accelerated routes).
    pub tail_bound: BigReal,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficient {
    pub n: u64,
    pub value: BigReal,
}

/// How the outer sum `Σ_{n>N} T_n²` is disposed of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OuterTail {
    /// Sum until the majorant `Σ_{n>N} c_{n+1}²` is below tolerance.
    Truncate,
    /// Sum a fixed head, then evaluate the remaining tail exactly through
    /// its Laplace-transform representation.
    Laplace,
    /// `Truncate` when it needs at most `direct_limit` terms, `Laplace`
    /// otherwise.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OuterSumOptions {
    pub max_terms: u64,
    pub tail: OuterTail,
    pub direct_limit: u64,
    pub laplace_head: u64,
}

impl Default for OuterSumOptions {
    fn default() -> Self {
        OuterSumOptions {
            max_terms: DEFAULT_MAX_TERMS,
            tail: OuterTail::Auto,
            direct_limit: DEFAULT_DIRECT_LIMIT,
            laplace_head: DEFAULT_LAPLACE_HEAD,
        }
    }
}

impl OuterSumOptions {
    pub fn with_max_terms(mut self, max_terms: u64) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn with_tail(mut self, tail: OuterTail) -> Self {
        self.tail = tail;
        self
    }
}

fn term_float(k: u64, bits: u32) -> Float {
    debug_assert!(k >= 1);
    let denom = (4 * k as u128 - 3) * (4 * k as u128 - 1);
    let magnitude = Float::with_val(bits, 2u32) / Float::with_val(bits, denom);
    if k % 2 == 1 {
        magnitude
    } else {
        -magnitude
    }
}

/// `2/((4k-3)(4k-1))`, the magnitude of `c_k`.
fn term_magnitude(k: u64, bits: u32) -> Float {
    term_float(k, bits).abs()
}

/// `c_k = (-1)^k (1/(4k-1) - 1/(4k-3))`.
pub fn inner_term(k: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    if k == 0 {
        return Err(Error::Domain("inner term index starts at 1".into()));
    }
    Ok(BigReal::finite(term_float(k, ctx.working_bits())))
}

fn partial_sum_float(n: u64, bits: u32) -> Float {
    let mut acc = CompensatedSum::new(bits);
    for k in 1..=n {
        acc.add(&term_float(k, bits));
    }
    acc.value()
}

/// `S_n`, summed in ascending `k` with compensation; `S_0 = 0`.
pub fn partial_sum_s(n: u64, ctx: &PrecisionContext) -> BigReal {
    BigReal::finite(partial_sum_float(n, ctx.working_bits()))
}

fn limit_s_float(bits: u32) -> Float {
    sqrt2(bits) / 2u32 * ln_one_plus_sqrt2(bits)
}

/// `S = (√2/2) ln(1 + √2)`.
pub fn limit_s(ctx: &PrecisionContext) -> BigReal {
    BigReal::finite(limit_s_float(ctx.working_bits()))
}

/// Extra bits so that `S - S_n` keeps full working precision up to index `n`.
fn cancellation_bits(n: u64) -> u32 {
    2 * (64 - n.leading_zeros()) + 8
}

fn closed_tail_float(n: u64, bits: u32) -> Float {
    let wide = bits + cancellation_bits(n);
    let t = limit_s_float(wide) - partial_sum_float(n, wide);
    Float::with_val(bits, t)
}

/// `T_n = S - S_n` by the closed route. The only error is rounding, so the
/// reported tail bound is zero.
pub fn inner_tail(n: u64, ctx: &PrecisionContext) -> SeriesResult {
    let bits = ctx.working_bits();
    SeriesResult {
        value: BigReal::finite(closed_tail_float(n, bits)),
        terms_used: n.max(1),
        tail_bound: BigReal::finite(Float::new(bits)),
        converged: true,
    }
}

/// `T_n` by summing `c_{n+1}, c_{n+2}, ...` directly.
///
/// Plain alternating summation would need `~1/√tol` terms, so the tail is
/// summed with the Cohen-Villegas-Zagier weights. The magnitudes
/// `|c_{n+1+j}| = ∫₀¹ y^j dμ(y)` form a moment sequence of a positive
/// measure (`x = y^{1/4}`, `dμ ∝ x^{4n}(1 - x²) dx`), for which the
/// weighted sum over `J` terms is off by at most `2|c_{n+1}| / (3+√8)^J`.
pub fn inner_tail_direct(n: u64, ctx: &PrecisionContext) -> Result<SeriesResult> {
    let bits = ctx.working_bits() + 16;
    let tol = ctx.tolerance().as_float();
    let lead = term_magnitude(n + 1, bits);
    let ratio = Float::with_val(bits, 8u32).sqrt() + 3u32;
    // smallest J with 2·lead / ratio^J < tol
    let needed = Float::with_val(bits, &lead * 2u32) / tol;
    let j_float = (needed.ln() / ratio.clone().ln()).ceil().to_f64().max(1.0);
    if !j_float.is_finite() || j_float > 1.0e6 {
        return Err(Error::MaxTermsExceeded {
            needed: if j_float.is_finite() { j_float as u64 } else { u64::MAX },
            cap: 1_000_000,
        });
    }
    let j_terms = j_float as u64;
    let bound = Float::with_val(bits, &lead * 2u32) / ratio.clone().pow(j_terms as u32);

    let mut d = ratio.pow(j_terms as u32);
    let d_inv = Float::with_val(bits, d.recip_ref());
    d = (d + d_inv) / 2u32;
    let mut b = Float::with_val(bits, -1);
    let mut c = Float::with_val(bits, -&d);
    let mut s = Float::new(bits);
    let jt = j_terms as i64;
    for k in 0..j_terms {
        c = Float::with_val(bits, &b - &c);
        s += Float::with_val(bits, &c * term_magnitude(n + 1 + k, bits));
        let ki = k as i64;
        b *= (ki + jt) * (ki - jt);
        b /= Float::with_val(bits, ki as f64 + 0.5) * (ki + 1);
    }
    let mut value = s / d;
    if n % 2 == 1 {
        value = -value;
    }
    let out = ctx.working_bits();
    Ok(SeriesResult {
        value: BigReal::new(Float::with_val(out, value))?,
        terms_used: j_terms,
        tail_bound: BigReal::finite(Float::with_val(out, &bound)),
        converged: bound < *tol,
    })
}

fn a0_float(bits: u32) -> Float {
    ln_one_plus_sqrt2(bits) * 8u32 / pi(bits)
}

fn coefficient_scale(bits: u32) -> Float {
    sqrt2(bits) * 8u32 / pi(bits)
}

/// Fourier coefficient `a_n` of `1/cos(x/4)`: `(8/π) ln(1+√2)` for `n = 0`,
/// `(8√2/π) T_n` otherwise.
pub fn fourier_a(n: u64, ctx: &PrecisionContext) -> FourierCoefficient {
    let bits = ctx.working_bits();
    let value = if n == 0 {
        a0_float(bits)
    } else {
        coefficient_scale(bits) * closed_tail_float(n, bits)
    };
    FourierCoefficient {
        n,
        value: BigReal::finite(value),
    }
}

/// `a_n = (8/π) ∫₀^{π/4} cos(4nt)/cos t dt` by quadrature.
pub fn fourier_a_quadrature(n: u64, ctx: &PrecisionContext) -> Result<QuadratureResult> {
    let bits = ctx.working_bits();
    let quarter_pi = pi(bits) / 4u32;
    let freq = Float::with_val(bits, n) * 4u32;
    let r = TanhSinh::new(ctx).integrate(
        |t| {
            let arg = Float::with_val(t.prec(), &freq * t);
            arg.cos() / t.clone().cos()
        },
        &Float::new(bits),
        &quarter_pi,
    )?;
    let scale = Float::with_val(bits, 8u32) / pi(bits);
    Ok(QuadratureResult {
        value: BigReal::new(Float::with_val(bits, r.value.as_float() * &scale))?,
        error_estimate: BigReal::new(Float::with_val(bits, r.error_estimate.as_float() * &scale))?,
        evaluations: r.evaluations,
        levels: r.levels,
    })
}

/// `|a_n - a_{n-1} - (8√2/π)(-1)^n (1/(4n-3) - 1/(4n-1))|`.
pub fn recurrence_check(n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    if n == 0 {
        return Err(Error::Domain("recurrence index starts at 1".into()));
    }
    let bits = ctx.working_bits();
    let current = fourier_a(n, ctx).value.into_float();
    let previous = fourier_a(n - 1, ctx).value.into_float();
    let bracket = Float::with_val(bits, 4 * n - 3).recip() - Float::with_val(bits, 4 * n - 1).recip();
    let mut step = coefficient_scale(bits) * bracket;
    if n % 2 == 1 {
        step = -step;
    }
    let residual = (current - previous - step).abs();
    BigReal::new(residual)
}

/// Rigorous majorant of the outer tail: `Σ_{n>N} T_n² ≤ Σ_{n>N} c_{n+1}²
/// ≤ ∫_N^∞ 4/(4x+1)^4 dx = 1/(3(4N+1)³)`.
pub fn outer_tail_bound(n: u64, bits: u32) -> Float {
    let base = Float::with_val(bits, n) * 4u32 + 1u32;
    (base.pow(3u32) * 3u32).recip()
}

/// Smallest `N` with `outer_tail_bound(N) < tol`, saturating at `u64::MAX`.
pub fn outer_terms_needed(tol: &Float) -> u64 {
    let bits = tol.prec().max(64);
    let x = (Float::with_val(bits, tol * 3u32).recip()).cbrt();
    let guess = ((x - 1u32) / 4u32).ceil().to_f64();
    if !guess.is_finite() || guess >= 1.0e18 {
        return u64::MAX;
    }
    let mut n = guess.max(0.0) as u64;
    while outer_tail_bound(n, bits) >= *tol {
        n += 1;
    }
    while n > 0 && outer_tail_bound(n - 1, bits) < *tol {
        n -= 1;
    }
    n
}

/// `Σ_{n=1}^{N} T_n²` with closed-route tails, at `bits` plus cancellation guard.
fn head_sum(terms: u64, bits: u32) -> Float {
    head_sums_at(&[terms], bits).pop().expect("one checkpoint")
}

/// Head sums recorded at each ascending checkpoint in a single pass.
fn head_sums_at(sorted: &[u64], bits: u32) -> Vec<Float> {
    let last = sorted.last().copied().unwrap_or(0);
    let wide = bits + cancellation_bits(last);
    let s = limit_s_float(wide);
    let mut partial = CompensatedSum::new(wide);
    let mut acc = CompensatedSum::new(wide);
    let mut out = Vec::with_capacity(sorted.len());
    let mut n = 0u64;
    for &target in sorted {
        while n < target {
            n += 1;
            partial.add(&term_float(n, wide));
            let t = Float::with_val(wide, &s - partial.value());
            acc.add(&t.square());
        }
        out.push(Float::with_val(bits, acc.value()));
    }
    out
}

fn sorted_checkpoints(checkpoints: &[u64]) -> Vec<u64> {
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted
}

/// `Σ_{n=1}^{N} T_n²` at several `N` from one pass, ascending by `N`.
pub fn double_series_partials(checkpoints: &[u64], ctx: &PrecisionContext) -> Vec<(u64, BigReal)> {
    let sorted = sorted_checkpoints(checkpoints);
    let sums = head_sums_at(&sorted, ctx.working_bits());
    sorted.into_iter().zip(sums.into_iter().map(BigReal::finite)).collect()
}

/// `S_N` at several `N` from one pass, ascending by `N`.
pub fn partial_sums_s(checkpoints: &[u64], ctx: &PrecisionContext) -> Vec<(u64, BigReal)> {
    let bits = ctx.working_bits();
    let sorted = sorted_checkpoints(checkpoints);
    let mut acc = CompensatedSum::new(bits);
    let mut k = 0u64;
    let mut out = Vec::with_capacity(sorted.len());
    for target in sorted {
        while k < target {
            k += 1;
            acc.add(&term_float(k, bits));
        }
        out.push((target, BigReal::finite(acc.value())));
    }
    out
}

/// Brute-force partial double sum `Σ_{n=1}^{N} T_n²` (no tail handling).
pub fn double_series_partial(terms: u64, ctx: &PrecisionContext) -> BigReal {
    BigReal::finite(head_sum(terms, ctx.working_bits()))
}

/// `Σ_{n>N} T_n²` evaluated exactly.
///
/// `|T_n| = ¼∫₀^∞ e^{-nt} w(t) dt` with `w(t) = sinh(t/4)/cosh(t/2)`, so
/// summing the geometric series in `n` and substituting `t = uv`,
/// `s = u(1-v)` gives
///
/// ```text
/// Σ_{n>N} T_n² = 1/16 ∫₀^∞ e^{-(N+1)u} u/(1-e^{-u}) ∫₀¹ w(uv) w(u(1-v)) dv du
/// ```
///
/// With `u = τ/M`, `M = N+1`, and `ŵ(t) = w(t)/t` the outer integrand is
/// O(1) and smooth, and the tail is `I / (16 M³)` with
/// `I = ∫₀^∞ e^{-τ} τ² Ŵ(τ/M) / φ(τ/M) dτ`, `φ(z) = (1-e^{-z})/z`,
/// `Ŵ(u) = ∫₀¹ ŵ(uv) ŵ(u(1-v)) v(1-v) dv`.
fn laplace_tail(head: u64, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    let bits = ctx.working_bits();
    let m = Float::with_val(bits, head + 1);
    let inner = TanhSinh::new(ctx);
    let outer = TanhSinh::new(ctx);
    let w_hat = |t: &Float| -> Float {
        let p = t.prec();
        let quarter = Float::with_val(p, t / 4u32);
        let half = Float::with_val(p, t / 2u32);
        quarter.sinh() / half.cosh() / t
    };
    // inner errors surface through this cell so the outer closure stays `Fn`
    let failure: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let integrand = |tau: &Float| -> Float {
        let p = tau.prec();
        let u = Float::with_val(p, tau / &m);
        let w_big = inner.integrate(
            |v| {
                let q = v.prec();
                let one_minus_v = Float::with_val(q, 1u32 - v);
                let left = w_hat(&Float::with_val(q, &u * v));
                let right = w_hat(&Float::with_val(q, &u * &one_minus_v));
                left * right * v * one_minus_v
            },
            &Float::new(p),
            &Float::with_val(p, 1u32),
        );
        let w_big = match w_big {
            Ok(r) => r.value.into_float(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return Float::with_val(p, rug::float::Special::Nan);
            }
        };
        let phi = Float::with_val(p, -&u).exp_m1() / &u;
        let phi = -phi;
        let decay = Float::with_val(p, -tau).exp();
        decay * tau.clone().square() * w_big / phi
    };
    let result = outer.integrate_to_infinity(integrand, &Float::new(bits));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let result = result?;
    let scale = (m.pow(3u32) * 16u32).recip();
    let value = Float::with_val(bits, result.value.as_float() * &scale);
    let error = Float::with_val(bits, result.error_estimate.as_float() * &scale);
    Ok((value, error))
}

/// `V = Σ_{n≥1} T_n²` with default options.
pub fn double_series(ctx: &PrecisionContext) -> Result<SeriesResult> {
    double_series_with(ctx, &OuterSumOptions::default())
}

pub fn double_series_with(ctx: &PrecisionContext, opts: &OuterSumOptions) -> Result<SeriesResult> {
    let bits = ctx.working_bits();
    let tol = ctx.tolerance().as_float();
    let needed = outer_terms_needed(tol);
    let truncate = match opts.tail {
        OuterTail::Truncate => true,
        OuterTail::Laplace => false,
        OuterTail::Auto => needed <= opts.direct_limit.min(opts.max_terms),
    };
    if truncate {
        if needed > opts.max_terms {
            return Err(Error::MaxTermsExceeded {
                needed,
                cap: opts.max_terms,
            });
        }
        let bound = outer_tail_bound(needed, bits);
        return Ok(SeriesResult {
            value: BigReal::finite(head_sum(needed, bits)),
            terms_used: needed.max(1),
            converged: bound < *tol,
            tail_bound: BigReal::finite(bound),
        });
    }
    let head = opts.laplace_head.min(opts.max_terms).max(1);
    let (tail, tail_error) = laplace_tail(head, ctx)?;
    let value = head_sum(head, bits) + tail;
    Ok(SeriesResult {
        value: BigReal::new(value)?,
        terms_used: head,
        converged: tail_error < *tol,
        tail_bound: BigReal::finite(tail_error),
    })
}

/// `a_0²/2 + Σ_{n≥1} a_n²`, which Parseval equates to `8/π`.
///
/// Uses `a_n = (8√2/π) T_n`, so the sum is `a_0²/2 + (128/π²) V` and
/// inherits the truncation discipline of [`double_series_with`].
pub fn parseval_closure(ctx: &PrecisionContext) -> Result<SeriesResult> {
    parseval_closure_with(ctx, &OuterSumOptions::default())
}

pub fn parseval_closure_with(ctx: &PrecisionContext, opts: &OuterSumOptions) -> Result<SeriesResult> {
    let raised = ctx.with_extra_guard(2);
    let v = double_series_with(&raised, opts)?;
    let bits = ctx.working_bits();
    let p = pi(raised.working_bits());
    let scale = Float::with_val(raised.working_bits(), 128u32) / p.square();
    let a0 = a0_float(raised.working_bits());
    let value = a0.square() / 2u32 + Float::with_val(raised.working_bits(), v.value.as_float() * &scale);
    let bound = Float::with_val(bits, v.tail_bound.as_float() * &scale);
    Ok(SeriesResult {
        value: BigReal::new(Float::with_val(bits, value))?,
        terms_used: v.terms_used,
        converged: bound < *ctx.tolerance().as_float(),
        tail_bound: BigReal::finite(bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn checkpoint_passes_match_single_calls() {
        let c = ctx(20);
        for (n, v) in double_series_partials(&[50, 5, 50], &c) {
            assert_eq!(v, double_series_partial(n, &c));
        }
        let s = partial_sums_s(&[3, 1, 0], &c);
        assert_eq!(s.len(), 3);
        for (n, v) in s {
            assert_eq!(v, partial_sum_s(n, &c));
        }
    }

    #[test]
    fn first_inner_terms() {
        let c = ctx(20);
        let two_thirds = c.float(2) / 3u32;
        assert_eq!(*inner_term(1, &c).unwrap().as_float(), two_thirds);
        let minus = -(c.float(2) / 35u32);
        assert_eq!(*inner_term(2, &c).unwrap().as_float(), minus);
        assert!(matches!(inner_term(0, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn inner_term_magnitude_simplifies() {
        let c = ctx(30);
        for k in 1..=100u64 {
            let direct = {
                let a = c.float(4 * k - 1).recip() - c.float(4 * k - 3).recip();
                if k % 2 == 0 { a } else { -a }
            };
            let got = inner_term(k, &c).unwrap().into_float();
            let diff = (got - &direct).abs();
            assert!(diff < 1e-38, "k={k}");
            let closed = c.float(2) / c.float((4 * k - 3) * (4 * k - 1));
            assert!((direct.abs() - closed).abs() < 1e-38);
        }
    }

    #[test]
    fn small_partial_sums() {
        let c = ctx(20);
        assert!(partial_sum_s(0, &c).is_zero());
        assert_eq!(partial_sum_s(1, &c).to_decimal(12), "0.666666666667");
        assert_eq!(partial_sum_s(2, &c).to_decimal(11), "0.60952380952");
        let exact = c.float(64) / 105u32;
        assert!((partial_sum_s(2, &c).into_float() - exact).abs() < 1e-28);
    }

    #[test]
    fn first_tail_is_negative() {
        let c = ctx(20);
        let t1 = inner_tail(1, &c);
        assert!(t1.value.is_sign_negative());
        assert!(t1.tail_bound.is_zero());
        assert!(t1.converged);
        assert_eq!(inner_tail(0, &c).value, limit_s(&c));
    }

    #[test]
    fn recurrence_rejects_zero() {
        let c = ctx(12);
        assert!(matches!(recurrence_check(0, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn outer_bound_is_a_majorant_of_squared_terms() {
        // Σ_{n>N} c_{n+1}² summed far out must sit below the closed bound
        let bits = 128;
        for big_n in [1u64, 5, 40] {
            let mut s = Float::new(bits);
            for n in (big_n + 1)..(big_n + 20_000) {
                s += term_magnitude(n + 1, bits).square();
            }
            assert!(s < outer_tail_bound(big_n, bits), "N={big_n}");
        }
    }

    #[test]
    fn terms_needed_for_1e12_within_budget() {
        let tol = Float::with_val(128, 10).pow(-12);
        let n = outer_terms_needed(&tol);
        assert!(n <= 100_000, "{n}");
        assert!(outer_tail_bound(n, 128) < tol);
        assert!(outer_tail_bound(n - 1, 128) >= tol);
    }

    #[test]
    fn truncation_honours_term_cap() {
        let c = ctx(30);
        let opts = OuterSumOptions::default()
            .with_tail(OuterTail::Truncate)
            .with_max_terms(1000);
        match double_series_with(&c, &opts) {
            Err(Error::MaxTermsExceeded { needed, cap }) => {
                assert_eq!(cap, 1000);
                assert!(needed > 1000);
            }
            other => panic!("expected MaxTermsExceeded, got {other:?}"),
        }
    }
}
