//! Tanh-sinh (double-exponential) quadrature at arbitrary precision.
//!
//! Finite intervals use `x = (a+b)/2 + (b-a)/2 · tanh(π/2 · sinh t)`; the
//! half line `(a, ∞)` composes the same map with `x = a - ln(1 - u)`, which
//! works out to `x = a + ln(1 + e^{2s})` with `s = π/2 · sinh t`. Nodes are
//! stored through the complement `c = 1/(1 + e^{2s})` so abscissae next to
//! an endpoint keep full relative accuracy, and the integrand is never
//! evaluated at an endpoint.
//!
//! Each level halves the step; the error estimate is ten times the change
//! between the two deepest levels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{pi, BigReal, PrecisionContext};

pub const DEFAULT_MAX_LEVEL: u32 = 12;
const MIN_LEVEL: u32 = 3;
const SAFETY_FACTOR: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: BigReal,
    pub error_estimate: BigReal,
    pub evaluations: u64,
    pub levels: u32,
}

/// One abscissa `t ≥ 0` of the transformed rule. The mirror node `-t` is
/// implied by symmetry.
#[derive(Debug)]
struct Abscissa {
    /// π · cosh t
    pi_cosh: Float,
    /// 1 / (1 + e^{2s})
    c: Float,
    /// 1 - c = 1 / (1 + e^{-2s})
    one_minus_c: Float,
    /// ln(1 + e^{-2s})
    softplus_neg: Float,
    /// 2s
    two_s: Float,
    is_origin: bool,
}

type NodeKey = (u32, u32);

fn node_cache() -> &'static Mutex<HashMap<NodeKey, Arc<Vec<Abscissa>>>> {
    static CACHE: OnceLock<Mutex<HashMap<NodeKey, Arc<Vec<Abscissa>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Largest `t` worth visiting: beyond it `c · π cosh t` is far below `2^-bits`.
fn t_max(bits: u32) -> f64 {
    let s_max = (bits as f64 + 16.0) * std::f64::consts::LN_2 / 2.0 + 4.0;
    (2.0 * s_max / std::f64::consts::PI).asinh()
}

/// Nodes introduced at `level`: all `k·h` for level 0 (h = 1), odd multiples
/// of `h = 2^-level` afterwards.
fn level_nodes(bits: u32, level: u32) -> Arc<Vec<Abscissa>> {
    let key = (bits, level);
    if let Some(nodes) = node_cache().lock().expect("node cache poisoned").get(&key) {
        return Arc::clone(nodes);
    }
    let nodes = Arc::new(build_level(bits, level));
    node_cache()
        .lock()
        .expect("node cache poisoned")
        .entry(key)
        .or_insert_with(|| Arc::clone(&nodes));
    nodes
}

fn build_level(bits: u32, level: u32) -> Vec<Abscissa> {
    let limit = t_max(bits);
    let half_pi = pi(bits) / 2u32;
    let steps_per_unit = 1u64 << level;
    let (start, stride) = if level == 0 { (0u64, 1u64) } else { (1u64, 2u64) };
    let mut nodes = Vec::new();
    let mut k = start;
    loop {
        let t_f = k as f64 / steps_per_unit as f64;
        if t_f > limit {
            break;
        }
        let t = Float::with_val(bits, k) / steps_per_unit;
        let (sinh_t, cosh_t) = t.sinh_cosh(Float::new(bits));
        let s = Float::with_val(bits, &half_pi * &sinh_t);
        let two_s = Float::with_val(bits, &s * 2u32);
        let q = Float::with_val(bits, -&two_s).exp();
        let one_plus_q = Float::with_val(bits, &q + 1u32);
        let c = Float::with_val(bits, &q / &one_plus_q);
        let one_minus_c = Float::with_val(bits, one_plus_q.recip_ref());
        let softplus_neg = q.ln_1p();
        let pi_cosh = Float::with_val(bits, &half_pi * 2u32) * cosh_t;
        nodes.push(Abscissa {
            pi_cosh,
            c,
            one_minus_c,
            softplus_neg,
            two_s,
            is_origin: k == 0,
        });
        k += stride;
    }
    nodes
}

/// Tanh-sinh integrator bound to a working precision and tolerance.
#[derive(Clone, Debug)]
pub struct TanhSinh {
    bits: u32,
    tolerance: Float,
    max_level: u32,
}

impl TanhSinh {
    pub fn new(ctx: &PrecisionContext) -> Self {
        TanhSinh {
            bits: ctx.working_bits(),
            tolerance: ctx.tolerance().as_float().clone(),
            max_level: DEFAULT_MAX_LEVEL,
        }
    }

    pub fn with_tolerance(mut self, tolerance: &Float) -> Self {
        self.tolerance = Float::with_val(self.bits, tolerance);
        self
    }

    pub fn with_max_level(mut self, max_level: u32) -> Self {
        self.max_level = max_level.max(MIN_LEVEL);
        self
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// ∫ₐᵇ f(x) dx.
    pub fn integrate<F>(&self, f: F, a: &Float, b: &Float) -> Result<QuadratureResult>
    where
        F: Fn(&Float) -> Float,
    {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Domain(format!(
                "integration bounds must satisfy a < b, got [{a}, {b}]"
            )));
        }
        let bits = self.bits;
        let a = Float::with_val(bits, a);
        let b = Float::with_val(bits, b);
        let width = Float::with_val(bits, &b - &a);
        let mid = Float::with_val(bits, &a + &b) / 2u32;
        self.refine(|node, acc, evals| {
            if node.is_origin {
                let w = Float::with_val(bits, &node.pi_cosh * &width) / 4u32;
                *acc += eval(&f, &mid, evals)? * w;
                return Ok(());
            }
            let offset = Float::with_val(bits, &width * &node.c);
            let weight = Float::with_val(bits, &node.pi_cosh * &node.c) * &node.one_minus_c * &width;
            let left = Float::with_val(bits, &a + &offset);
            if left > a && left < b {
                *acc += eval(&f, &left, evals)? * &weight;
            }
            let right = Float::with_val(bits, &b - &offset);
            if right > a && right < b {
                *acc += eval(&f, &right, evals)? * &weight;
            }
            Ok(())
        })
    }

    /// ∫ₐ^∞ f(x) dx for integrands with eventual exponential decay.
    pub fn integrate_to_infinity<F>(&self, f: F, a: &Float) -> Result<QuadratureResult>
    where
        F: Fn(&Float) -> Float,
    {
        if !a.is_finite() {
            return Err(Error::Domain(format!("lower limit must be finite, got {a}")));
        }
        let bits = self.bits;
        let a = Float::with_val(bits, a);
        self.refine(|node, acc, evals| {
            if node.is_origin {
                // s = 0: x = a + ln 2, dx/dt = π/2
                let x = Float::with_val(bits, &a + Float::with_val(bits, 2u32).ln());
                let w = Float::with_val(bits, &node.pi_cosh / 2u32);
                *acc += eval(&f, &x, evals)? * w;
                return Ok(());
            }
            // s > 0 side: x = a + 2s + ln(1 + e^{-2s}), dx/dt = π cosh t · (1 - c)
            let far = Float::with_val(bits, &a + &node.two_s) + &node.softplus_neg;
            let w_far = Float::with_val(bits, &node.pi_cosh * &node.one_minus_c);
            *acc += eval(&f, &far, evals)? * w_far;
            // s < 0 side: x = a + ln(1 + e^{-2|s|}), dx/dt = π cosh t · c
            let near = Float::with_val(bits, &a + &node.softplus_neg);
            if near > a {
                let w_near = Float::with_val(bits, &node.pi_cosh * &node.c);
                *acc += eval(&f, &near, evals)? * w_near;
            }
            Ok(())
        })
    }

    fn refine<G>(&self, mut visit: G) -> Result<QuadratureResult>
    where
        G: FnMut(&Abscissa, &mut Float, &mut u64) -> Result<()>,
    {
        let bits = self.bits;
        let mut evaluations = 0u64;
        let mut estimate = Float::new(bits);
        let mut previous: Option<Float> = None;
        let mut last_error = Float::with_val(bits, rug::float::Special::Infinity);
        for level in 0..=self.max_level {
            let nodes = level_nodes(bits, level);
            let mut raw = Float::new(bits);
            for node in nodes.iter() {
                visit(node, &mut raw, &mut evaluations)?;
            }
            // step h = 2^-level
            raw >>= level;
            if level == 0 {
                estimate = raw;
            } else {
                estimate = Float::with_val(bits, &estimate / 2u32) + raw;
            }
            if let Some(prev) = &previous {
                last_error = Float::with_val(bits, &estimate - prev).abs() * SAFETY_FACTOR;
                if level >= MIN_LEVEL && last_error < self.tolerance {
                    return Ok(QuadratureResult {
                        value: BigReal::new(estimate)?,
                        error_estimate: BigReal::new(last_error)?,
                        evaluations,
                        levels: level,
                    });
                }
            }
            previous = Some(estimate.clone());
        }
        Err(Error::NoConvergence(format!(
            "tanh-sinh reached level {} with error estimate {}",
            self.max_level,
            last_error.to_f64()
        )))
    }
}

fn eval<F: Fn(&Float) -> Float>(f: &F, x: &Float, evaluations: &mut u64) -> Result<Float> {
    *evaluations += 1;
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFiniteEvaluation(x.to_string_radix(10, Some(20))))
    }
}

/// ∫ₐᵇ f at the context's precision and tolerance.
pub fn integrate<F>(f: F, a: &Float, b: &Float, ctx: &PrecisionContext) -> Result<QuadratureResult>
where
    F: Fn(&Float) -> Float,
{
    TanhSinh::new(ctx).integrate(f, a, b)
}

/// ∫ₐ^∞ f at the context's precision and tolerance.
pub fn integrate_to_infinity<F>(f: F, a: &Float, ctx: &PrecisionContext) -> Result<QuadratureResult>
where
    F: Fn(&Float) -> Float,
{
    TanhSinh::new(ctx).integrate_to_infinity(f, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{const_l, const_pi};

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn identity_function_on_unit_interval() {
        let c = ctx(30);
        let r = integrate(|x| x.clone(), &c.float(0), &c.float(1), &c).unwrap();
        let err = Float::with_val(c.working_bits(), r.value.as_float() - 0.5f64).abs();
        assert!(err < 1e-30, "{err}");
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn secant_gives_log_one_plus_sqrt2() {
        let c = ctx(30);
        let upper = Float::with_val(c.working_bits(), const_pi(&c).as_float() / 4u32);
        let r = integrate(|t| t.clone().sec(), &c.float(0), &upper, &c).unwrap();
        let diff = r.value.abs_diff(&const_l(&c));
        assert!(diff.to_f64() < 1e-30, "{diff}");
        assert_eq!(r.value.to_decimal(10), "0.8813735870");
    }

    #[test]
    fn sec_squared_quarter_over_period_is_eight() {
        let c = ctx(30);
        let p = const_pi(&c).into_float();
        let r = integrate(
            |t| {
                let q = Float::with_val(t.prec(), t / 4u32);
                q.sec().square()
            },
            &Float::with_val(c.working_bits(), -&p),
            &p,
            &c,
        )
        .unwrap();
        assert!(r.value.abs_diff(&c.real(8)).to_f64() < 1e-30);
    }

    #[test]
    fn exponential_decay_to_infinity() {
        let c = ctx(30);
        let r = integrate_to_infinity(|x| Float::with_val(x.prec(), -x).exp(), &c.float(0), &c)
            .unwrap();
        assert!(r.value.abs_diff(&c.real(1)).to_f64() < 1e-30);
    }

    #[test]
    fn log_singularity_at_endpoint() {
        let c = ctx(30);
        let r = integrate(|x| -x.clone().ln(), &c.float(0), &c.float(1), &c).unwrap();
        assert!(r.value.abs_diff(&c.real(1)).to_f64() < 1e-30);
    }

    #[test]
    fn reversed_bounds_are_rejected() {
        let c = ctx(12);
        let e = integrate(|x| x.clone(), &c.float(1), &c.float(0), &c).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let c = ctx(12);
        let e = integrate(
            |x| Float::with_val(x.prec(), x - 0.5f64).recip(),
            &c.float(0),
            &c.float(1),
            &c,
        )
        .unwrap_err();
        assert!(matches!(e, Error::NonFiniteEvaluation(_)));
    }

    #[test]
    fn level_cap_produces_no_convergence() {
        let c = ctx(30);
        // |x - 1/3|^(1/2) has an interior kink; three levels cannot resolve it
        let e = TanhSinh::new(&c)
            .with_max_level(3)
            .integrate(
                |x| Float::with_val(x.prec(), x - Float::with_val(x.prec(), 1) / 3u32).abs().sqrt(),
                &c.float(0),
                &c.float(1),
            )
            .unwrap_err();
        assert!(matches!(e, Error::NoConvergence(_)));
    }
}
