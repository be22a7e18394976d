//! Registry of verifiable identities and the residual reports they produce.
//!
//! Each [`IdentityId`] maps to one evaluator that computes both sides through
//! the owning modules. Evaluation failures never abort a suite; they surface
//! as a failed report with an `error` entry in `params`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rug::Float;

use crate::elliptic::{
    certificate_grid, ellip_k, ellip_e, haagerup_bound, haagerup_bound_quadrature,
    krivine_elliptic_combination, krivine_middle_quadrature, solve_x0,
};
use crate::error::{Error, Result};
use crate::khintchine::khintchine_accelerated_many;
use crate::numeric::{const_kg, ln_one_plus_sqrt2, pi, BigReal, PrecisionContext};
use crate::quadrature::TanhSinh;
use crate::series::{
    double_series_with, fourier_a, fourier_a_quadrature, parseval_closure_with, recurrence_check,
    OuterSumOptions,
};

/// Residual of `KG_FROM_SERIES` is at most this multiple of the residual of
/// `PARSEVAL_DOUBLE_SERIES` computed from the same double-series value
/// (`dK/dV = 8π/(2L)³ ≈ 4.6`).
pub const KG_FROM_SERIES_CLOSURE_FACTOR: u32 = 5;

/// Fixed tolerance for the Khintchine stability check.
pub const KHINTCHINE_TOLERANCE: f64 = 1e-6;

/// Doubling pair compared by `KHINTCHINE_STABILITY`.
pub const KHINTCHINE_CHECKPOINTS: (u64, u64) = (1 << 16, 1 << 17);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    ParsevalDoubleSeries,
    ParsevalClosure,
    KgDefinition,
    KgFromSeries,
    Recurrence(u64),
    CoeffVsQuadrature(u64),
    AppendixA1,
    AppendixA2Corrected,
    AppendixA3,
    AppendixA4,
    FixedPoint(u8),
    HaagerupConsistency,
    KrivineComplexMiddleEquality,
    LegendreRelation,
    KhintchineStability,
}

impl IdentityId {
    /// The registry, in report order.
    pub fn all() -> Vec<IdentityId> {
        use IdentityId::*;
        vec![
            ParsevalDoubleSeries,
            ParsevalClosure,
            KgDefinition,
            KgFromSeries,
            Recurrence(1),
            Recurrence(7),
            Recurrence(100),
            CoeffVsQuadrature(0),
            CoeffVsQuadrature(1),
            CoeffVsQuadrature(8),
            AppendixA1,
            AppendixA2Corrected,
            AppendixA3,
            AppendixA4,
            FixedPoint(1),
            FixedPoint(2),
            FixedPoint(3),
            FixedPoint(4),
            HaagerupConsistency,
            KrivineComplexMiddleEquality,
            LegendreRelation,
            KhintchineStability,
        ]
    }

    /// The relation being checked, in plain notation.
    pub fn formula(&self) -> &'static str {
        use IdentityId::*;
        match self {
            ParsevalDoubleSeries => "sum_n T_n^2 = pi/16 - L^2/4",
            ParsevalClosure => "a_0^2/2 + sum_n a_n^2 = 8/pi",
            KgDefinition => "K_G = pi / (2 ln(1+sqrt 2))",
            KgFromSeries => "K_G = pi / sqrt(pi - 16 V), V = (pi/16)(1 - pi/K_G^2)",
            Recurrence(_) => "a_n - a_{n-1} = (8 sqrt2/pi)(-1)^n (1/(4n-3) - 1/(4n-1))",
            CoeffVsQuadrature(_) => "a_n = (8/pi) int_0^{pi/4} cos(4nt)/cos t dt",
            AppendixA1 => "pi^2 = 4L^2 + 8 int_L^inf asinh(csch x) dx",
            AppendixA2Corrected => "pi^2 + 4L^2 = 8 int_0^L asinh(csch x) dx",
            AppendixA3 => "pi^2 = 4L^2 + 8 int_L^inf acosh(coth x) dx",
            AppendixA4 => "pi^2 = 4L^2 + 8 int_L^inf atanh(sech x) dx",
            FixedPoint(1) => "K_G = 1/sqrt(1 - (8/pi^2) int_{pi/(2K_G)}^inf asinh(csch x) dx)",
            FixedPoint(2) => "K_G = 1/sqrt((8/pi^2) int_0^{pi/(2K_G)} asinh(csch x) dx - 1)",
            FixedPoint(3) => "K_G = 1/sqrt(1 - (8/pi^2) int_{pi/(2K_G)}^inf acosh(coth x) dx)",
            FixedPoint(_) => "K_G = 1/sqrt(1 - (8/pi^2) int_{pi/(2K_G)}^inf atanh(sech x) dx)",
            HaagerupConsistency => "1/(2K(i) - E(i)) = 1/int_0^{pi/2} cos^2/sqrt(1+sin^2)",
            KrivineComplexMiddleEquality => {
                "x int_0^{pi/2} cos^2/sqrt(1-x^2 sin^2) = (E(x) - (1-x^2)K(x))/x"
            }
            LegendreRelation => "E K' + E' K - K K' = pi/2",
            KhintchineStability => "accelerated Khintchine product stable under N doubling",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            IdentityId::Recurrence(0) => Err(Error::Domain("RECURRENCE index starts at 1".into())),
            IdentityId::FixedPoint(k) if !(1..=4).contains(&k) => {
                Err(Error::Domain(format!("FIXED_POINT index must be 1..4, got {k}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use IdentityId::*;
        match self {
            ParsevalDoubleSeries => f.write_str("PARSEVAL_DOUBLE_SERIES"),
            ParsevalClosure => f.write_str("PARSEVAL_CLOSURE"),
            KgDefinition => f.write_str("KG_DEFINITION"),
            KgFromSeries => f.write_str("KG_FROM_SERIES"),
            Recurrence(n) => write!(f, "RECURRENCE({n})"),
            CoeffVsQuadrature(n) => write!(f, "COEFF_VS_QUADRATURE({n})"),
            AppendixA1 => f.write_str("APPENDIX_A1"),
            AppendixA2Corrected => f.write_str("APPENDIX_A2_CORRECTED"),
            AppendixA3 => f.write_str("APPENDIX_A3"),
            AppendixA4 => f.write_str("APPENDIX_A4"),
            FixedPoint(k) => write!(f, "FIXED_POINT_{k}"),
            HaagerupConsistency => f.write_str("HAAGERUP_CONSISTENCY"),
            KrivineComplexMiddleEquality => f.write_str("KRIVINE_COMPLEX_MIDDLE_EQUALITY"),
            LegendreRelation => f.write_str("LEGENDRE_RELATION"),
            KhintchineStability => f.write_str("KHINTCHINE_STABILITY"),
        }
    }
}

fn parse_index(name: &str, prefix: &str) -> Option<std::result::Result<u64, String>> {
    let inner = name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.trim().parse::<u64>().map_err(|e| format!("bad index in {name}: {e}")))
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use IdentityId::*;
        let name = s.trim().to_ascii_uppercase();
        let id = match name.as_str() {
            "PARSEVAL_DOUBLE_SERIES" => ParsevalDoubleSeries,
            "PARSEVAL_CLOSURE" => ParsevalClosure,
            "KG_DEFINITION" => KgDefinition,
            "KG_FROM_SERIES" => KgFromSeries,
            "APPENDIX_A1" => AppendixA1,
            "APPENDIX_A2_CORRECTED" => AppendixA2Corrected,
            "APPENDIX_A3" => AppendixA3,
            "APPENDIX_A4" => AppendixA4,
            "FIXED_POINT_1" => FixedPoint(1),
            "FIXED_POINT_2" => FixedPoint(2),
            "FIXED_POINT_3" => FixedPoint(3),
            "FIXED_POINT_4" => FixedPoint(4),
            "HAAGERUP_CONSISTENCY" => HaagerupConsistency,
            "KRIVINE_COMPLEX_MIDDLE_EQUALITY" => KrivineComplexMiddleEquality,
            "LEGENDRE_RELATION" => LegendreRelation,
            "KHINTCHINE_STABILITY" => KhintchineStability,
            other => {
                let parsed = parse_index(other, "RECURRENCE")
                    .map(|r| r.map(Recurrence))
                    .or_else(|| parse_index(other, "COEFF_VS_QUADRATURE").map(|r| r.map(CoeffVsQuadrature)));
                match parsed {
                    Some(Ok(id)) => id,
                    Some(Err(msg)) => return Err(Error::Domain(msg)),
                    None => return Err(Error::Domain(format!("unknown identity {s:?}"))),
                }
            }
        };
        id.validate()?;
        Ok(id)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub id: IdentityId,
    pub lhs: Option<BigReal>,
    pub rhs: Option<BigReal>,
    pub residual: Option<BigReal>,
    pub tolerance: BigReal,
    pub digits_agreed: u32,
    pub passed: bool,
    pub params: BTreeMap<String, String>,
    pub runtime_ms: u64,
}

/// Acceptance threshold for `id`: the context tolerance, except for the
/// Khintchine check which is pinned at `1e-6`.
pub fn tolerance_for(id: IdentityId, ctx: &PrecisionContext) -> BigReal {
    match id {
        IdentityId::KhintchineStability => ctx.real(KHINTCHINE_TOLERANCE),
        _ => ctx.tolerance().clone(),
    }
}

/// `floor(-log10(residual / max(|lhs|, |rhs|, 1)))`, or `digits` for an
/// exact match.
fn digits_agreed(lhs: &Float, rhs: &Float, residual: &Float, digits: u32) -> u32 {
    if residual.is_zero() {
        return digits;
    }
    let bits = residual.prec().max(64);
    let mut scale = Float::with_val(bits, 1u32);
    for side in [lhs, rhs] {
        let a = Float::with_val(bits, side.abs_ref());
        if a > scale {
            scale = a;
        }
    }
    let rel = Float::with_val(bits, residual / &scale);
    let agreed = -rel.log10();
    if agreed.is_sign_negative() {
        0
    } else {
        agreed.floor().to_f64() as u32
    }
}

/// Evaluated sides of an identity, before it is judged.
struct Sides {
    lhs: Float,
    rhs: Float,
    /// Overrides `|lhs - rhs|` when several relations are folded into one
    /// report.
    residual: Option<Float>,
    params: BTreeMap<String, String>,
}

impl Sides {
    fn new(lhs: Float, rhs: Float) -> Self {
        Sides {
            lhs,
            rhs,
            residual: None,
            params: BTreeMap::new(),
        }
    }

    fn param(mut self, key: &str, value: impl Into<String>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

pub fn verify(id: IdentityId, ctx: &PrecisionContext) -> IdentityReport {
    verify_with(id, ctx, &OuterSumOptions::default())
}

/// As [`verify`], with explicit limits for the outer double-series sum.
pub fn verify_with(id: IdentityId, ctx: &PrecisionContext, opts: &OuterSumOptions) -> IdentityReport {
    let started = Instant::now();
    let tolerance = tolerance_for(id, ctx);
    let outcome = id.validate().and_then(|_| evaluate(id, ctx, opts));
    let runtime_ms = started.elapsed().as_millis() as u64;
    let digits = ctx.digits();
    match outcome {
        Ok(sides) => {
            let bits = ctx.working_bits();
            let residual = sides
                .residual
                .unwrap_or_else(|| Float::with_val(bits, &sides.lhs - &sides.rhs).abs());
            let passed = residual < *tolerance.as_float();
            let agreed = digits_agreed(&sides.lhs, &sides.rhs, &residual, digits);
            let mut params = sides.params;
            params.insert("formula".into(), id.formula().into());
            IdentityReport {
                id,
                lhs: Some(BigReal::finite(sides.lhs)),
                rhs: Some(BigReal::finite(sides.rhs)),
                residual: Some(BigReal::finite(residual)),
                tolerance,
                digits_agreed: agreed,
                passed,
                params,
                runtime_ms,
            }
        }
        Err(err) => {
            let mut params = BTreeMap::new();
            params.insert("formula".into(), id.formula().into());
            params.insert("error".into(), err.to_string());
            let kind = if err.is_convergence_failure() { "not_converged" } else { "evaluation" };
            params.insert("error_kind".into(), kind.into());
            IdentityReport {
                id,
                lhs: None,
                rhs: None,
                residual: None,
                tolerance,
                digits_agreed: 0,
                passed: false,
                params,
                runtime_ms,
            }
        }
    }
}

/// Every registered identity, or the given subset in the given order.
pub fn verify_all(ctx: &PrecisionContext, ids: Option<&[IdentityId]>) -> Vec<IdentityReport> {
    verify_all_with(ctx, ids, &OuterSumOptions::default())
}

pub fn verify_all_with(
    ctx: &PrecisionContext,
    ids: Option<&[IdentityId]>,
    opts: &OuterSumOptions,
) -> Vec<IdentityReport> {
    let ids = match ids {
        Some(list) => list.to_vec(),
        None => IdentityId::all(),
    };
    ids.into_iter().map(|id| verify_with(id, ctx, opts)).collect()
}

fn evaluate(id: IdentityId, ctx: &PrecisionContext, opts: &OuterSumOptions) -> Result<Sides> {
    use IdentityId::*;
    let bits = ctx.working_bits();
    let digits = ctx.digits();
    match id {
        ParsevalDoubleSeries => {
            let v = double_series_with(ctx, opts)?;
            let rhs = target_double_series(bits);
            Ok(Sides::new(v.value.into_float(), rhs)
                .param("terms_used", v.terms_used.to_string())
                .param("tail_bound", v.tail_bound.to_decimal(digits))
                .param("converged", v.converged.to_string()))
        }
        ParsevalClosure => {
            let p = parseval_closure_with(ctx, opts)?;
            let rhs = Float::with_val(bits, 8u32) / pi(bits);
            Ok(Sides::new(p.value.into_float(), rhs)
                .param("terms_used", p.terms_used.to_string())
                .param("tail_bound", p.tail_bound.to_decimal(digits)))
        }
        KgDefinition => {
            // independent route: ln(1 + √2) through the logarithm, not asinh
            let root2 = Float::with_val(bits, 2u32).sqrt();
            let l = (root2 + 1u32).ln();
            let lhs = pi(bits) / (l * 2u32);
            Ok(Sides::new(lhs, const_kg(ctx).into_float()))
        }
        KgFromSeries => {
            let v = double_series_with(ctx, opts)?.value.into_float();
            let p = pi(bits);
            let kg = const_kg(ctx).into_float();
            // K_G = π / √(π - 16V)
            let radicand = Float::with_val(bits, &p - Float::with_val(bits, &v * 16u32));
            let kg_from_v = Float::with_val(bits, &p / radicand.sqrt());
            // V = (π/16)(1 - π/K_G²)
            let v_from_kg = Float::with_val(bits, &p / 16u32) * (1u32 - Float::with_val(bits, &p / kg.clone().square()));
            let form_v = Float::with_val(bits, &v - &v_from_kg).abs();
            let form_k = Float::with_val(bits, &kg_from_v - &kg).abs();
            let mut sides = Sides::new(kg_from_v, kg).param("residual_v_form", BigReal::finite(form_v.clone()).to_decimal(digits));
            sides = sides.param("residual_kg_form", BigReal::finite(form_k.clone()).to_decimal(digits));
            sides.residual = Some(form_v.max(&form_k));
            Ok(sides)
        }
        Recurrence(n) => {
            let residual = recurrence_check(n, ctx)?.into_float();
            let lhs = fourier_a(n, ctx).value.into_float() - fourier_a(n - 1, ctx).value.as_float();
            let rhs = Float::with_val(bits, &lhs - &residual);
            let mut sides = Sides::new(lhs, rhs).param("n", n.to_string());
            sides.residual = Some(residual);
            Ok(sides)
        }
        CoeffVsQuadrature(n) => {
            let closed = fourier_a(n, ctx).value.into_float();
            let quad = fourier_a_quadrature(n, ctx)?;
            Ok(Sides::new(closed, quad.value.into_float())
                .param("n", n.to_string())
                .param("quadrature_error_estimate", quad.error_estimate.to_decimal(3))
                .param("quadrature_levels", quad.levels.to_string()))
        }
        AppendixA1 | AppendixA3 | AppendixA4 => {
            let l = ln_one_plus_sqrt2(bits);
            let kind = match id {
                AppendixA1 => Hyperbolic::AsinhCsch,
                AppendixA3 => Hyperbolic::AcoshCoth,
                _ => Hyperbolic::AtanhSech,
            };
            let integral = upper_integral(kind, &l, ctx)?;
            let lhs = pi(bits).square();
            let rhs = Float::with_val(bits, l.square_ref()) * 4u32 + integral * 8u32;
            Ok(Sides::new(lhs, rhs))
        }
        AppendixA2Corrected => {
            let l = ln_one_plus_sqrt2(bits);
            let integral = lower_integral(&l, ctx)?;
            let lhs = pi(bits).square() + Float::with_val(bits, l.square_ref()) * 4u32;
            Ok(Sides::new(lhs, integral * 8u32).param("as-printed", "ambiguous"))
        }
        FixedPoint(k) => {
            let kg = const_kg(ctx).into_float();
            let p = pi(bits);
            let limit = Float::with_val(bits, &p / Float::with_val(bits, &kg * 2u32));
            let scale = Float::with_val(bits, 8u32) / Float::with_val(bits, p.square_ref());
            let radicand = match k {
                2 => lower_integral(&limit, ctx)? * scale - 1u32,
                _ => {
                    let kind = match k {
                        1 => Hyperbolic::AsinhCsch,
                        3 => Hyperbolic::AcoshCoth,
                        _ => Hyperbolic::AtanhSech,
                    };
                    1u32 - upper_integral(kind, &limit, ctx)? * scale
                }
            };
            if radicand.is_sign_negative() || radicand.is_zero() {
                return Err(Error::Domain(format!(
                    "fixed-point radicand is not positive: {}",
                    radicand.to_f64()
                )));
            }
            Ok(Sides::new(kg, radicand.recip_sqrt()))
        }
        HaagerupConsistency => {
            let agm = haagerup_bound(ctx).into_float();
            let quad = haagerup_bound_quadrature(ctx)?.into_float();
            Ok(Sides::new(agm, quad))
        }
        KrivineComplexMiddleEquality => {
            let root = solve_x0(ctx)?;
            let half = ctx.real(0.5);
            let mut worst = Float::new(bits);
            for x in [&half, &root.x0] {
                let combo = krivine_elliptic_combination(x, ctx)?.into_float();
                let middle = krivine_middle_quadrature(x, ctx)?.into_float();
                let r = Float::with_val(bits, &combo - &middle).abs();
                if r > worst {
                    worst = r;
                }
            }
            let combo = krivine_elliptic_combination(&root.x0, ctx)?.into_float();
            let middle = krivine_middle_quadrature(&root.x0, ctx)?.into_float();
            let mut sides = Sides::new(middle, combo)
                .param("x", root.x0.to_decimal(digits))
                .param("also_checked_x", "0.5");
            sides.residual = Some(worst);
            Ok(sides)
        }
        LegendreRelation => {
            let half_pi = pi(bits) / 2u32;
            let mut worst: Option<(Float, Float, String)> = None;
            for k in certificate_grid(ctx).into_iter().filter(|k| !k.is_zero()) {
                let kf = k.as_float();
                let kp = BigReal::new((1u32 - Float::with_val(bits, kf.square_ref())).sqrt())?;
                let (big_k, big_e) = (ellip_k(&k, ctx)?.into_float(), ellip_e(&k, ctx)?.into_float());
                let (big_kp, big_ep) = (ellip_k(&kp, ctx)?.into_float(), ellip_e(&kp, ctx)?.into_float());
                let lhs = Float::with_val(bits, &big_e * &big_kp) + Float::with_val(bits, &big_ep * &big_k)
                    - Float::with_val(bits, &big_k * &big_kp);
                let r = Float::with_val(bits, &lhs - &half_pi).abs();
                let replace = match &worst {
                    None => true,
                    Some((_, w, _)) => r > *w,
                };
                if replace {
                    worst = Some((lhs, r, k.to_decimal(6)));
                }
            }
            let (lhs, residual, k) = worst.expect("grid has non-zero moduli");
            let mut sides = Sides::new(lhs, half_pi).param("worst_k", k);
            sides.residual = Some(residual);
            Ok(sides)
        }
        KhintchineStability => {
            let (small, large) = KHINTCHINE_CHECKPOINTS;
            let results = khintchine_accelerated_many(&[small, large], ctx)?;
            let (a, b) = (&results[0], &results[1]);
            Ok(Sides::new(b.value.as_float().clone(), a.value.as_float().clone())
                .param("n_lhs", b.terms_used.to_string())
                .param("n_rhs", a.terms_used.to_string()))
        }
    }
}

/// `π/16 - L²/4`.
fn target_double_series(bits: u32) -> Float {
    let l = ln_one_plus_sqrt2(bits);
    pi(bits) / 16u32 - l.square() / 4u32
}

/// Three forms of the same function on `x > 0`.
#[derive(Clone, Copy, Debug)]
enum Hyperbolic {
    AsinhCsch,
    AcoshCoth,
    AtanhSech,
}

fn hyperbolic(kind: Hyperbolic, x: &Float) -> Float {
    let bits = x.prec();
    match kind {
        Hyperbolic::AsinhCsch => Float::with_val(bits, x.sinh_ref()).recip().asinh(),
        Hyperbolic::AcoshCoth => {
            // coth x = 1 + d with d = 2/expm1(2x); acosh(1 + d) = log1p(d + √(d(2+d)))
            let d = Float::with_val(bits, x * 2u32).exp_m1().recip() * 2u32;
            let root = Float::with_val(bits, &d * Float::with_val(bits, &d + 2u32)).sqrt();
            (d + root).ln_1p()
        }
        Hyperbolic::AtanhSech => Float::with_val(bits, x.cosh_ref()).recip().atanh(),
    }
}

fn upper_integral(kind: Hyperbolic, from: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let r = TanhSinh::new(ctx).integrate_to_infinity(|x| hyperbolic(kind, x), from)?;
    Ok(r.value.into_float())
}

/// `∫₀^to asinh(csch x) dx`; the integrand has a logarithmic singularity at 0.
fn lower_integral(to: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let zero = Float::new(ctx.working_bits());
    let r = TanhSinh::new(ctx).integrate(|x| hyperbolic(Hyperbolic::AsinhCsch, x), &zero, to)?;
    Ok(r.value.into_float())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for id in IdentityId::all() {
            let parsed: IdentityId = id.to_string().parse().unwrap();
            assert_eq!(parsed, id);
        }
        assert_eq!("recurrence(42)".parse::<IdentityId>().unwrap(), IdentityId::Recurrence(42));
    }

    #[test]
    fn bad_names_rejected() {
        for bad in ["RECURRENCE(0)", "FIXED_POINT_5", "RECURRENCE(x)", "NOPE", "COEFF_VS_QUADRATURE"] {
            assert!(bad.parse::<IdentityId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn hyperbolic_forms_agree() {
        let bits = 200;
        for v in ["0.1", "0.8813", "3", "40"] {
            let x = Float::with_val(bits, Float::parse(v).unwrap());
            let a = hyperbolic(Hyperbolic::AsinhCsch, &x);
            let b = hyperbolic(Hyperbolic::AcoshCoth, &x);
            let c = hyperbolic(Hyperbolic::AtanhSech, &x);
            let rel = |p: &Float, q: &Float| (Float::with_val(bits, p - q) / q).abs().to_f64();
            assert!(rel(&a, &b) < 1e-55, "{v}");
            assert!(rel(&a, &c) < 1e-55, "{v}");
        }
    }

    #[test]
    fn digits_agreed_is_relative() {
        let bits = 128;
        let big = Float::with_val(bits, 1000u32);
        let res = Float::with_val(bits, 2e-7);
        assert_eq!(digits_agreed(&big, &big, &res, 30), 9);
        let small = Float::with_val(bits, 0.001);
        assert_eq!(digits_agreed(&small, &small, &res, 30), 6);
        assert_eq!(digits_agreed(&small, &small, &Float::new(bits), 30), 30);
    }

    #[test]
    fn definition_report() {
        let r = verify(IdentityId::KgDefinition, &ctx(15));
        assert!(r.passed);
        assert!(r.residual.unwrap().as_float() < r.tolerance.as_float());
        assert_eq!(r.params["formula"], IdentityId::KgDefinition.formula());
    }

    #[test]
    fn invalid_index_becomes_failed_report() {
        let r = verify(IdentityId::FixedPoint(9), &ctx(15));
        assert!(!r.passed);
        assert!(r.lhs.is_none());
        assert!(r.params.contains_key("error"));
    }

    #[test]
    fn subsets() {
        let c = ctx(15);
        assert!(verify_all(&c, Some(&[])).is_empty());
        let one = verify_all(&c, Some(&[IdentityId::KgDefinition]));
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].id, IdentityId::KgDefinition);
    }

    #[test]
    fn khintchine_has_fixed_tolerance() {
        assert_eq!(tolerance_for(IdentityId::KhintchineStability, &ctx(40)).to_f64(), 1e-6);
    }
}
