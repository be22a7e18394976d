//! Convergence traces: partial values at decade checkpoints and their
//! distance from the converged value.

use std::fmt;
use std::str::FromStr;

use krivine_core::khintchine::{khintchine_accelerated, khintchine_partials, MAX_TARGET_DIGITS};
use krivine_core::series::{double_series_partials, double_series_with, limit_s, partial_sums_s, OuterSumOptions};
use krivine_core::{BigReal, PrecisionContext, Result};
use serde::Serialize;

use crate::render::{csv_writer, finish_csv};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceTarget {
    DoubleSeries,
    PartialSumS,
    KhintchinePartial,
}

impl TraceTarget {
    pub const ALL: [TraceTarget; 3] = [
        TraceTarget::DoubleSeries,
        TraceTarget::PartialSumS,
        TraceTarget::KhintchinePartial,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TraceTarget::DoubleSeries => "double_series",
            TraceTarget::PartialSumS => "partial_sum_S",
            TraceTarget::KhintchinePartial => "khintchine_partial",
        }
    }
}

impl fmt::Display for TraceTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TraceTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        TraceTarget::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown trace target {s:?}"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub index: u64,
    pub value: String,
    pub residual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub target: String,
    pub limit: String,
    pub converged: bool,
    pub rows: Vec<TraceRow>,
}

/// `1, 10, 100, …` up to `max_terms`, plus `max_terms` itself.
pub fn checkpoints(max_terms: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = 1u64;
    while n <= max_terms {
        out.push(n);
        match n.checked_mul(10) {
            Some(next) => n = next,
            None => break,
        }
    }
    if out.last() != Some(&max_terms) {
        out.push(max_terms);
    }
    out
}

pub fn run(target: TraceTarget, ctx: &PrecisionContext, max_terms: u64) -> Result<Trace> {
    let points = checkpoints(max_terms);
    let (limit, partials): (BigReal, Vec<(u64, BigReal)>) = match target {
        TraceTarget::DoubleSeries => {
            let opts = OuterSumOptions::default().with_max_terms(max_terms);
            let limit = double_series_with(ctx, &opts)?.value;
            (limit, double_series_partials(&points, ctx))
        }
        TraceTarget::PartialSumS => (limit_s(ctx), partial_sums_s(&points, ctx)),
        TraceTarget::KhintchinePartial => {
            let limit = khintchine_accelerated(ctx, MAX_TARGET_DIGITS)?.value;
            (limit, khintchine_partials(&points, ctx)?)
        }
    };
    let digits = ctx.digits();
    let mut converged = false;
    let rows = partials
        .into_iter()
        .map(|(index, value)| {
            let residual = value.abs_diff(&limit);
            converged = residual.as_float() < ctx.tolerance().as_float();
            TraceRow {
                index,
                value: value.to_decimal(digits),
                residual: residual.to_decimal(digits),
            }
        })
        .collect();
    Ok(Trace {
        target: target.name().to_string(),
        limit: limit.to_decimal(digits),
        converged,
        rows,
    })
}

pub fn to_csv(trace: &Trace) -> String {
    let mut w = csv_writer();
    for row in &trace.rows {
        w.serialize(row).expect("in-memory write");
    }
    finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decade_checkpoints() {
        assert_eq!(checkpoints(1000), vec![1, 10, 100, 1000]);
        assert_eq!(checkpoints(1), vec![1]);
        assert_eq!(checkpoints(250), vec![1, 10, 100, 250]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let ctx = PrecisionContext::new(12).unwrap();
        let trace = run(TraceTarget::PartialSumS, &ctx, 100).unwrap();
        let csv = to_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,value,residual");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,0.666666666667"));
    }

    #[test]
    fn target_names() {
        assert_eq!("PARTIAL_SUM_S".parse::<TraceTarget>().unwrap(), TraceTarget::PartialSumS);
        assert!("series".parse::<TraceTarget>().is_err());
    }
}
