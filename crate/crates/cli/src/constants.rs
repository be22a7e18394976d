use std::fmt;
use std::str::FromStr;

use krivine_core::elliptic::{haagerup_bound, solve_x0};
use krivine_core::khintchine::{khintchine_accelerated, MAX_TARGET_DIGITS};
use krivine_core::series::{fourier_a, limit_s};
use krivine_core::{const_kg, const_l, const_pi, BigReal, PrecisionContext, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantId {
    Pi,
    L,
    S,
    Kg,
    A0,
    Haagerup,
    X0,
    KcUpper,
    Khintchine,
}

impl ConstantId {
    pub const ALL: [ConstantId; 9] = [
        ConstantId::Pi,
        ConstantId::L,
        ConstantId::S,
        ConstantId::Kg,
        ConstantId::A0,
        ConstantId::Haagerup,
        ConstantId::X0,
        ConstantId::KcUpper,
        ConstantId::Khintchine,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConstantId::Pi => "PI",
            ConstantId::L => "L",
            ConstantId::S => "S",
            ConstantId::Kg => "KG",
            ConstantId::A0 => "A0",
            ConstantId::Haagerup => "HAAGERUP",
            ConstantId::X0 => "X0",
            ConstantId::KcUpper => "KC_UPPER",
            ConstantId::Khintchine => "KHINTCHINE",
        }
    }

    pub fn formula(&self) -> &'static str {
        match self {
            ConstantId::Pi => "pi",
            ConstantId::L => "L = ln(1+sqrt 2)",
            ConstantId::S => "S = sum_k (-1)^(k+1) 2/((4k-3)(4k-1)) = (sqrt2/2) L",
            ConstantId::Kg => "K_G = pi / (2 ln(1+sqrt 2))",
            ConstantId::A0 => "a_0 = (8 sqrt2/pi) S",
            ConstantId::Haagerup => "1 / (2K(i) - E(i))",
            ConstantId::X0 => "root in (0,1) of (E(x) - (1-x^2)K(x))/x = pi(x+1)/8",
            ConstantId::KcUpper => "8 / (pi (x0 + 1))",
            ConstantId::Khintchine => "prod_n (1 + 1/(n(n+2)))^(log2 n)",
        }
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstantId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let upper = s.trim().to_ascii_uppercase();
        ConstantId::ALL
            .into_iter()
            .find(|c| c.name() == upper)
            .ok_or_else(|| format!("unknown constant {s:?}"))
    }
}

pub struct Computed {
    pub value: BigReal,
    pub terms_used: Option<u64>,
    pub params: Vec<(String, String)>,
}

impl Computed {
    fn plain(value: BigReal) -> Self {
        Computed {
            value,
            terms_used: None,
            params: Vec::new(),
        }
    }
}

pub fn compute(id: ConstantId, ctx: &PrecisionContext) -> Result<Computed> {
    Ok(match id {
        ConstantId::Pi => Computed::plain(const_pi(ctx)),
        ConstantId::L => Computed::plain(const_l(ctx)),
        ConstantId::S => Computed::plain(limit_s(ctx)),
        ConstantId::Kg => Computed::plain(const_kg(ctx)),
        ConstantId::A0 => Computed::plain(fourier_a(0, ctx).value),
        ConstantId::Haagerup => Computed::plain(haagerup_bound(ctx)),
        ConstantId::X0 | ConstantId::KcUpper => {
            let root = solve_x0(ctx)?;
            let value = if id == ConstantId::X0 { root.x0 } else { root.kc_upper };
            Computed {
                value,
                terms_used: None,
                params: vec![
                    ("root_residual".into(), root.residual.to_decimal(3)),
                    ("iterations".into(), root.iterations.to_string()),
                ],
            }
        }
        ConstantId::Khintchine => {
            let r = khintchine_accelerated(ctx, MAX_TARGET_DIGITS)?;
            Computed {
                value: r.value,
                terms_used: Some(r.terms_used),
                params: vec![("stable_digits".into(), MAX_TARGET_DIGITS.to_string())],
            }
        }
    })
}
