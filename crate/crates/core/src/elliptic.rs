//! Complete elliptic integrals by the arithmetic-geometric mean, their
//! imaginary-modulus values, Haagerup's expression, and the root of the
//! complex-case equation.
//!
//! Every function takes the modulus `k`, not the parameter `m = k²`:
//!
//! ```text
//! K(k) = ∫₀^{π/2} dθ / √(1 - k² sin²θ)
//! E(k) = ∫₀^{π/2} √(1 - k² sin²θ) dθ
//! ```

use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{pi, sqrt2, BigReal, PrecisionContext};
use crate::quadrature::TanhSinh;

/// Below this distance from 1 the AGM companion sum cancels badly, so E is
/// taken from its defining integral instead.
const E_QUADRATURE_THRESHOLD: f64 = 1e-5;
const AGM_GUARD_BITS: u32 = 16;
const MAX_ROOT_ITERATIONS: u32 = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticPair {
    pub k: BigReal,
    /// `true` when `k` stands for the imaginary modulus `i·k`.
    pub imaginary: bool,
    pub k_val: BigReal,
    pub e_val: BigReal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootResult {
    pub x0: BigReal,
    pub residual: BigReal,
    pub iterations: u32,
    pub bracket: (BigReal, BigReal),
    /// `8 / (π (x₀ + 1))`
    pub kc_upper: BigReal,
}

fn complementary_modulus(k: &Float) -> Float {
    let bits = k.prec();
    let one_minus = Float::with_val(bits, 1u32 - k);
    let one_plus = Float::with_val(bits, 1u32 + k);
    (one_minus * one_plus).sqrt()
}

/// AGM with the companion sequence `c_n`; returns `(K, E)` for `0 ≤ k < 1`.
fn agm_pair(k: &Float, bits: u32) -> (Float, Float) {
    let wide = bits + AGM_GUARD_BITS;
    let k = Float::with_val(wide, k);
    let mut a = Float::with_val(wide, 1u32);
    let mut b = complementary_modulus(&k);
    // Σ 2^{n-1} c_n², starting from c_0 = k
    let mut weight = Float::with_val(wide, 0.5f64);
    let mut sum = Float::with_val(wide, k.square_ref()) * &weight;
    let threshold = Float::with_val(wide, 1u32) >> (wide + 4);
    loop {
        let c = Float::with_val(wide, &a - &b) / 2u32;
        let next_a = Float::with_val(wide, &a + &b) / 2u32;
        let next_b = Float::with_val(wide, &a * &b).sqrt();
        a = next_a;
        b = next_b;
        weight *= 2u32;
        let contribution = c.square() * &weight;
        let done = contribution <= threshold;
        sum += contribution;
        if done {
            break;
        }
    }
    let k_val = pi(wide) / (a * 2u32);
    let e_val = Float::with_val(wide, &k_val * Float::with_val(wide, 1u32 - &sum));
    (Float::with_val(bits, k_val), Float::with_val(bits, e_val))
}

fn check_modulus(k: &Float, allow_one: bool) -> Result<()> {
    let ok = !k.is_sign_negative() && if allow_one { *k <= 1u32 } else { *k < 1u32 };
    if ok {
        Ok(())
    } else {
        let range = if allow_one { "[0, 1]" } else { "[0, 1)" };
        Err(Error::Domain(format!("modulus must lie in {range}, got {k}")))
    }
}

/// K(k) = π / (2 AGM(1, √(1-k²))).
pub fn ellip_k(k: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_modulus(k.as_float(), false)?;
    let (k_val, _) = agm_pair(k.as_float(), ctx.working_bits());
    BigReal::new(k_val)
}

/// E(k) from the AGM companion sum; E(1) = 1 exactly.
pub fn ellip_e(k: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let kf = k.as_float();
    check_modulus(kf, true)?;
    let bits = ctx.working_bits();
    if *kf == 1u32 {
        return Ok(BigReal::finite(Float::with_val(bits, 1u32)));
    }
    if Float::with_val(bits, 1u32 - kf) < E_QUADRATURE_THRESHOLD {
        return ellip_e_quadrature(k, ctx);
    }
    let (_, e_val) = agm_pair(kf, bits);
    BigReal::new(e_val)
}

pub fn ellip_pair(k: &BigReal, ctx: &PrecisionContext) -> Result<EllipticPair> {
    Ok(EllipticPair {
        k: k.clone(),
        imaginary: false,
        k_val: ellip_k(k, ctx)?,
        e_val: ellip_e(k, ctx)?,
    })
}

fn sin_squared(theta: &Float) -> Float {
    theta.clone().sin().square()
}

fn quarter_period(bits: u32) -> Float {
    pi(bits) / 2u32
}

/// K(k) from its defining integral.
pub fn ellip_k_quadrature(k: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_modulus(k.as_float(), false)?;
    let bits = ctx.working_bits();
    let k2 = Float::with_val(bits, k.as_float().square_ref());
    let r = TanhSinh::new(ctx).integrate(
        |theta| (1u32 - Float::with_val(theta.prec(), &k2 * sin_squared(theta))).recip_sqrt(),
        &Float::new(bits),
        &quarter_period(bits),
    )?;
    Ok(r.value)
}

/// E(k) from its defining integral.
pub fn ellip_e_quadrature(k: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_modulus(k.as_float(), true)?;
    let bits = ctx.working_bits();
    let k2 = Float::with_val(bits, k.as_float().square_ref());
    let r = TanhSinh::new(ctx).integrate(
        |theta| (1u32 - Float::with_val(theta.prec(), &k2 * sin_squared(theta))).sqrt(),
        &Float::new(bits),
        &quarter_period(bits),
    )?;
    Ok(r.value)
}

fn inv_sqrt2(bits: u32) -> Float {
    sqrt2(bits).recip()
}

/// K(i) = ∫₀^{π/2} dθ/√(1 + sin²θ) = K(1/√2)/√2.
pub fn ellip_k_imag(ctx: &PrecisionContext) -> BigReal {
    let bits = ctx.working_bits();
    let (k_val, _) = agm_pair(&inv_sqrt2(bits + AGM_GUARD_BITS), bits);
    BigReal::finite(k_val / sqrt2(bits))
}

/// E(i) = ∫₀^{π/2} √(1 + sin²θ) dθ = √2 · E(1/√2).
pub fn ellip_e_imag(ctx: &PrecisionContext) -> BigReal {
    let bits = ctx.working_bits();
    let (_, e_val) = agm_pair(&inv_sqrt2(bits + AGM_GUARD_BITS), bits);
    BigReal::finite(e_val * sqrt2(bits))
}

pub fn ellip_pair_imag(ctx: &PrecisionContext) -> EllipticPair {
    EllipticPair {
        k: ctx.real(1u32),
        imaginary: true,
        k_val: ellip_k_imag(ctx),
        e_val: ellip_e_imag(ctx),
    }
}

/// ∫₀^{π/2} (1 + sin²θ)^{±1/2} dθ by quadrature; `inverse` picks the sign.
fn imag_integral(ctx: &PrecisionContext, inverse: bool) -> Result<BigReal> {
    let bits = ctx.working_bits();
    let r = TanhSinh::new(ctx).integrate(
        |theta| {
            let base = sin_squared(theta) + 1u32;
            if inverse {
                base.recip_sqrt()
            } else {
                base.sqrt()
            }
        },
        &Float::new(bits),
        &quarter_period(bits),
    )?;
    Ok(r.value)
}

pub fn ellip_k_imag_quadrature(ctx: &PrecisionContext) -> Result<BigReal> {
    imag_integral(ctx, true)
}

pub fn ellip_e_imag_quadrature(ctx: &PrecisionContext) -> Result<BigReal> {
    imag_integral(ctx, false)
}

/// Haagerup's value `1 / (2K(i) - E(i))`.
pub fn haagerup_bound(ctx: &PrecisionContext) -> BigReal {
    let bits = ctx.working_bits();
    let denom = Float::with_val(bits, ellip_k_imag(ctx).as_float() * 2u32) - ellip_e_imag(ctx).as_float();
    BigReal::finite(denom.recip())
}

/// `[∫₀^{π/2} cos²θ / √(1 + sin²θ) dθ]⁻¹` by direct quadrature.
pub fn haagerup_bound_quadrature(ctx: &PrecisionContext) -> Result<BigReal> {
    let bits = ctx.working_bits();
    let r = TanhSinh::new(ctx).integrate(
        |theta| {
            let cos2 = theta.clone().cos().square();
            cos2 / (sin_squared(theta) + 1u32).sqrt()
        },
        &Float::new(bits),
        &quarter_period(bits),
    )?;
    BigReal::new(r.value.into_float().recip())
}

fn check_open_unit(x: &Float) -> Result<()> {
    if x.is_sign_positive() && !x.is_zero() && *x < 1u32 {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must lie in (0, 1), got {x}")))
    }
}

/// `(1/x)[E(x) - (1 - x²) K(x)]`, evaluated with extra bits to absorb the
/// `O(x²)` cancellation for small `x`.
pub fn krivine_elliptic_combination(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_open_unit(x.as_float())?;
    let bits = ctx.working_bits();
    let wide = bits + 32;
    let xw = Float::with_val(wide, x.as_float());
    let (k_val, e_val) = agm_pair(&xw, wide);
    let one_minus_x2 = 1u32 - Float::with_val(wide, xw.square_ref());
    let combo = (e_val - one_minus_x2 * k_val) / &xw;
    BigReal::new(Float::with_val(bits, combo))
}

/// `x ∫₀^{π/2} cos²θ / √(1 - x² sin²θ) dθ`, the middle member of the
/// complex-case equation, by quadrature.
pub fn krivine_middle_quadrature(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_open_unit(x.as_float())?;
    let bits = ctx.working_bits();
    let x2 = Float::with_val(bits, x.as_float().square_ref());
    let r = TanhSinh::new(ctx).integrate(
        |theta| {
            let cos2 = theta.clone().cos().square();
            cos2 * (1u32 - Float::with_val(theta.prec(), &x2 * sin_squared(theta))).recip_sqrt()
        },
        &Float::new(bits),
        &quarter_period(bits),
    )?;
    BigReal::new(r.value.into_float() * x.as_float())
}

/// `f(x) = (1/x)[E(x) - (1-x²)K(x)] - π(x+1)/8`, whose root in (0, 1) is x₀.
pub fn krivine_complex_f(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let combo = krivine_elliptic_combination(x, ctx)?.into_float();
    let bits = ctx.working_bits();
    let rhs = pi(bits) * Float::with_val(bits, x.as_float() + 1u32) / 8u32;
    BigReal::new(combo - rhs)
}

/// Default bracket for [`solve_x0`].
pub const ROOT_BRACKET: (f64, f64) = (0.01, 0.99);

/// Solves `krivine_complex_f(x) = 0` on (0.01, 0.99) by Brent's method,
/// with plain bisection as a fallback if Brent stalls.
pub fn solve_x0(ctx: &PrecisionContext) -> Result<RootResult> {
    let bits = ctx.working_bits();
    let low = ctx.real(ROOT_BRACKET.0);
    let high = ctx.real(ROOT_BRACKET.1);
    let f = |x: &Float| -> Result<Float> {
        Ok(krivine_complex_f(&BigReal::new(x.clone())?, ctx)?.into_float())
    };
    let (x0, iterations) = brent(&f, low.as_float(), high.as_float(), bits)?;
    let residual = f(&x0)?.abs();
    if residual >= *ctx.tolerance().as_float() {
        return Err(Error::NoConvergence(format!(
            "root residual {} is above tolerance",
            residual.to_f64()
        )));
    }
    let kc_upper = Float::with_val(bits, 8u32) / (pi(bits) * Float::with_val(bits, &x0 + 1u32));
    Ok(RootResult {
        x0: BigReal::new(x0)?,
        residual: BigReal::new(residual)?,
        iterations,
        bracket: (low, high),
        kc_upper: BigReal::new(kc_upper)?,
    })
}

fn same_sign(a: &Float, b: &Float) -> bool {
    (a.is_sign_negative() == b.is_sign_negative()) && !a.is_zero() && !b.is_zero()
}

/// Brent's bracketed root finder on `[lo, hi]`, iterating until the bracket
/// is a few ulps wide at `bits`.
fn brent<F>(f: &F, lo: &Float, hi: &Float, bits: u32) -> Result<(Float, u32)>
where
    F: Fn(&Float) -> Result<Float>,
{
    let mut a = Float::with_val(bits, lo);
    let mut b = Float::with_val(bits, hi);
    let mut fa = f(&a)?;
    let mut fb = f(&b)?;
    if same_sign(&fa, &fb) {
        return Err(Error::BracketFailure {
            low: a.to_string_radix(10, Some(10)),
            high: b.to_string_radix(10, Some(10)),
        });
    }
    let eps = Float::with_val(bits, 1u32) >> (bits - 4);
    let mut c = a.clone();
    let mut fc = fa.clone();
    let mut d = Float::with_val(bits, &b - &a);
    let mut e = d.clone();
    for iteration in 1..=MAX_ROOT_ITERATIONS {
        if same_sign(&fb, &fc) {
            c = a.clone();
            fc = fa.clone();
            d = Float::with_val(bits, &b - &a);
            e = d.clone();
        }
        if fc.cmp_abs(&fb) == Some(std::cmp::Ordering::Less) {
            a = b.clone();
            b = c.clone();
            c = a.clone();
            fa = fb.clone();
            fb = fc.clone();
            fc = fa.clone();
        }
        let tol1 = Float::with_val(bits, &eps * b.clone().abs()) + &eps;
        let xm = Float::with_val(bits, &c - &b) / 2u32;
        if fb.is_zero() || xm.clone().abs() <= tol1 {
            return Ok((b, iteration));
        }
        if e.clone().abs() >= tol1 && fa.cmp_abs(&fb) == Some(std::cmp::Ordering::Greater) {
            let s = Float::with_val(bits, &fb / &fa);
            let (mut p, mut q);
            if a == c {
                p = Float::with_val(bits, &xm * &s) * 2u32;
                q = Float::with_val(bits, 1u32 - &s);
            } else {
                let qq = Float::with_val(bits, &fa / &fc);
                let r = Float::with_val(bits, &fb / &fc);
                let term1 = Float::with_val(bits, &xm * &qq) * 2u32 * Float::with_val(bits, &qq - &r);
                let term2 = Float::with_val(bits, &b - &a) * Float::with_val(bits, &r - 1u32);
                p = s.clone() * (term1 - term2);
                q = Float::with_val(bits, &qq - 1u32) * Float::with_val(bits, &r - 1u32) * Float::with_val(bits, &s - 1u32);
            }
            if p.is_sign_positive() {
                q = -q;
            }
            p = p.abs();
            let min1 = Float::with_val(bits, &xm * &q) * 3u32 - Float::with_val(bits, &tol1 * &q).abs();
            let min2 = Float::with_val(bits, &e * &q).abs();
            let bound = if min1 < min2 { min1 } else { min2 };
            if Float::with_val(bits, &p * 2u32) < bound {
                e = d.clone();
                d = p / q;
            } else {
                d = xm.clone();
                e = d.clone();
            }
        } else {
            d = xm.clone();
            e = d.clone();
        }
        a = b.clone();
        fa = fb.clone();
        if d.clone().abs() > tol1 {
            b += &d;
        } else if xm.is_sign_positive() {
            b += &tol1;
        } else {
            b -= &tol1;
        }
        fb = f(&b)?;
    }
    bisect(f, &b, &c, bits).map(|(x, n)| (x, MAX_ROOT_ITERATIONS + n))
}

fn bisect<F>(f: &F, lo: &Float, hi: &Float, bits: u32) -> Result<(Float, u32)>
where
    F: Fn(&Float) -> Result<Float>,
{
    let mut lo = Float::with_val(bits, lo);
    let mut hi = Float::with_val(bits, hi);
    let f_lo = f(&lo)?;
    let mut iterations = 0;
    for _ in 0..(bits + 8) {
        iterations += 1;
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(&mid)?;
        if f_mid.is_zero() {
            return Ok((mid, iterations));
        }
        if same_sign(&f_mid, &f_lo) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((Float::with_val(bits, &lo + &hi) / 2u32, iterations))
}

/// `|E(k)K(k') + E(k')K(k) - K(k)K(k') - π/2|` with `k' = √(1 - k²)`.
pub fn legendre_residual(k: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let kf = k.as_float();
    if kf.is_zero() || kf.is_sign_negative() || *kf >= 1u32 {
        return Err(Error::Domain(format!(
            "Legendre relation needs 0 < k < 1 so that K(k') is finite, got {kf}"
        )));
    }
    let bits = ctx.working_bits();
    let wide = bits + 16;
    let kw = Float::with_val(wide, kf);
    let kp = complementary_modulus(&kw);
    let (big_k, big_e) = agm_pair(&kw, wide);
    let (big_kp, big_ep) = agm_pair(&kp, wide);
    let lhs = Float::with_val(wide, &big_e * &big_kp) + Float::with_val(wide, &big_ep * &big_k)
        - Float::with_val(wide, &big_k * &big_kp);
    let residual = (lhs - pi(wide) / 2u32).abs();
    BigReal::new(Float::with_val(bits, residual))
}

/// Moduli on which the AGM, quadrature and Legendre checks run.
pub fn certificate_grid(ctx: &PrecisionContext) -> Vec<BigReal> {
    let bits = ctx.working_bits();
    let mut grid: Vec<BigReal> = (0..=9u32)
        .map(|i| BigReal::finite(Float::with_val(bits, i) / 10u32))
        .collect();
    grid.push(BigReal::finite(inv_sqrt2(bits)));
    grid.push(BigReal::finite(Float::with_val(bits, 999u32) / 1000u32));
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn zero_modulus_is_a_quarter_period() {
        let c = ctx(30);
        let half_pi = Float::with_val(c.working_bits(), pi(c.working_bits()) / 2u32);
        let zero = c.real(0);
        assert_eq!(*ellip_k(&zero, &c).unwrap().as_float(), half_pi);
        assert_eq!(*ellip_e(&zero, &c).unwrap().as_float(), half_pi);
    }

    #[test]
    fn e_at_one_is_exactly_one() {
        let c = ctx(30);
        assert_eq!(*ellip_e(&c.real(1), &c).unwrap().as_float(), 1u32);
    }

    #[test]
    fn domain_errors() {
        let c = ctx(12);
        assert!(matches!(ellip_k(&c.real(1), &c), Err(Error::Domain(_))));
        assert!(matches!(ellip_k(&c.real(-0.1), &c), Err(Error::Domain(_))));
        assert!(matches!(ellip_e(&c.real(1.01), &c), Err(Error::Domain(_))));
        assert!(matches!(krivine_complex_f(&c.real(0), &c), Err(Error::Domain(_))));
        assert!(matches!(krivine_complex_f(&c.real(1), &c), Err(Error::Domain(_))));
        assert!(matches!(legendre_residual(&c.real(0), &c), Err(Error::Domain(_))));
    }

    #[test]
    fn endpoint_signs_bracket_the_root() {
        let c = ctx(20);
        assert!(krivine_complex_f(&c.real(0.01), &c).unwrap().is_sign_negative());
        assert!(!krivine_complex_f(&c.real(0.99), &c).unwrap().is_sign_negative());
    }

    #[test]
    fn e_switches_to_quadrature_next_to_one() {
        let c = ctx(20);
        let k = c.real(1.0 - 1e-7);
        let e = ellip_e(&k, &c).unwrap();
        // E(k) ≈ 1 + (k'^2/2)(ln(4/k') - 1/2) for k' → 0
        assert!(e.to_f64() > 1.0 && e.to_f64() < 1.0 + 1e-5);
    }

    #[test]
    fn brent_rejects_unbracketed_interval() {
        let f = |x: &Float| -> Result<Float> { Ok(Float::with_val(x.prec(), x.square_ref()) + 1u32) };
        let lo = Float::with_val(64, 0);
        let hi = Float::with_val(64, 1);
        assert!(matches!(brent(&f, &lo, &hi, 64), Err(Error::BracketFailure { .. })));
    }
}
