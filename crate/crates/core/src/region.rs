//! Region membership for a single state and exhaustive scans over a rational
//! grid of the simplex.

use std::io::Write;

use num::{BigInt, One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalysis::{
    best_catalyzed_probability, necessary_condition_failure, search_catalyst, BestCatalyzed, SearchBudget,
    SearchOutcome,
};
use crate::error::{Error, Result};
use crate::majorization::{check_threshold, majorizes, transform_probability};
use crate::multicopy::{in_m, in_m_lambda, Certificate, CopyBudget};
use crate::outcome::Tri;
use crate::rational::{format_rational, Rational};
use crate::spectrum::SpectrumVector;

pub const MAX_SCAN_SAMPLES: usize = 1_000_000;

pub type CopyVerdict = Tri<u32, Certificate>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionVerdict {
    #[serde(rename = "in_S")]
    pub in_s: bool,
    #[serde(rename = "in_T")]
    pub in_t: SearchOutcome,
    #[serde(rename = "in_M")]
    pub in_m: CopyVerdict,
    #[serde(rename = "P", serialize_with = "crate::rational::serialize")]
    pub probability: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub best_catalyzed_lower_bound: Rational,
    /// `x ≺ y`, `x_1 < y_1` and `x_n > y_n`: the interior condition that keeps
    /// `x` in `T(y)` under small perturbations.
    #[serde(rename = "interior_T_sufficient")]
    pub interior_t_sufficient: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaVerdict {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub lambda: Rational,
    #[serde(rename = "in_S_lambda")]
    pub in_s: bool,
    #[serde(rename = "in_T_lambda")]
    pub in_t: SearchOutcome,
    #[serde(rename = "in_M_lambda")]
    pub in_m: CopyVerdict,
    /// `P(x → y) ≥ λ` and `x_n > λ y_n`.
    #[serde(rename = "interior_T_lambda_sufficient")]
    pub interior_t_sufficient: bool,
}

/// Catalysis verdict at `λ`, skipping the search when the best enumerated
/// probability already falls short.
fn catalysis_verdict(
    x: &SpectrumVector,
    y: &SpectrumVector,
    lambda: &Rational,
    best: &BestCatalyzed,
    search: &SearchBudget,
) -> Result<SearchOutcome> {
    if let Some(reason) = necessary_condition_failure(x, y, lambda) {
        return Ok(Tri::No(reason));
    }
    if best.lower_bound < *lambda {
        return Ok(Tri::Unknown);
    }
    search_catalyst(x, y, lambda, search)
}

pub fn classify(
    x: &SpectrumVector,
    y: &SpectrumVector,
    lambda: Option<&Rational>,
    search: &SearchBudget,
    copies: &CopyBudget,
) -> Result<RegionVerdict> {
    if let Some(l) = lambda {
        check_threshold(l)?;
        if !l.is_positive() {
            return Err(Error::InvalidThreshold("λ must be positive".into()));
        }
    }
    let n = x.dim().max(y.dim());
    let (xp, yp) = (x.padded(n), y.padded(n));
    let in_s = majorizes(&xp, &yp)?.holds;
    let probability = transform_probability(&xp, &yp)?.value;
    let best = best_catalyzed_probability(x, y, search)?;
    let in_t = catalysis_verdict(x, y, &Rational::one(), &best, search)?;
    let in_m = in_m(x, y, copies)?;
    let interior_t_sufficient = in_s && xp.largest() < yp.largest() && xp.smallest() > yp.smallest();
    let lambda = match lambda {
        None => None,
        Some(l) => {
            let scaled_tail = l * yp.smallest();
            let in_s_l = probability >= *l;
            Some(LambdaVerdict {
                lambda: l.clone(),
                in_s: in_s_l,
                in_t: catalysis_verdict(x, y, l, &best, search)?,
                in_m: in_m_lambda(x, y, l, copies)?,
                interior_t_sufficient: in_s_l && *xp.smallest() > scaled_tail,
            })
        }
    };
    Ok(RegionVerdict {
        in_s,
        in_t,
        in_m,
        probability,
        best_catalyzed_lower_bound: best.lower_bound,
        interior_t_sufficient,
        lambda,
    })
}

/// Checks the containments every verdict must satisfy. Returns a description
/// of the first violated one.
pub fn nesting_violation(v: &RegionVerdict) -> Option<String> {
    if v.in_s && !v.in_t.is_yes() {
        return Some("in S but catalysis search did not succeed".into());
    }
    if v.in_s && !matches!(v.in_m, Tri::Yes(1)) {
        return Some("in S but not convertible with one copy".into());
    }
    if v.in_t.is_yes() && v.best_catalyzed_lower_bound != Rational::one() {
        return Some("catalyst found but best catalysed probability is below 1".into());
    }
    if let Some(l) = &v.lambda {
        if v.in_s && !l.in_s {
            return Some("in S but not in S^λ".into());
        }
        if l.in_s && !l.in_t.is_yes() {
            return Some("in S^λ but λ-catalysis search did not succeed".into());
        }
        if l.in_s && !l.in_m.is_yes() {
            return Some("in S^λ but not in M^λ with one copy".into());
        }
        if v.in_t.is_yes() && !l.in_t.is_yes() {
            return Some("in T but not in T^λ".into());
        }
        // a catalyst reaching P > λ places x in M^λ
        let beats = l.in_t.yes().is_some_and(|c| c.achieved_probability > l.lambda)
            || (l.lambda < Rational::one() && v.in_t.is_yes());
        if beats && l.in_m.is_no() {
            return Some("catalysable above λ yet certified outside M^λ".into());
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanConfig {
    pub target: SpectrumVector,
    #[serde(serialize_with = "crate::rational::serialize_opt")]
    pub lambda: Option<Rational>,
    pub resolution: u64,
    pub search: SearchBudget,
    pub copies: CopyBudget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanRow {
    pub x: SpectrumVector,
    pub verdict: RegionVerdict,
}

/// Every nonincreasing `x` with entries in `(1/resolution)ℤ`, `dim(x) =
/// dim(y)` and `Σx = Σy`, in descending lexicographic order.
pub fn scan_samples(target: &SpectrumVector, resolution: u64) -> Result<Vec<SpectrumVector>> {
    if resolution < 2 {
        return Err(Error::PreconditionFailed("resolution must be at least 2".into()));
    }
    let scaled = target.mass() * Rational::from_integer(BigInt::from(resolution));
    if !scaled.is_integer() {
        return Ok(Vec::new());
    }
    let total: u64 = scaled
        .to_integer()
        .try_into()
        .map_err(|_| Error::BudgetExceeded("mass times resolution is too large".into()))?;
    let mut parts = Vec::new();
    let mut out = Vec::new();
    enumerate(total, target.dim(), total, &mut parts, &mut out)?;
    let q = BigInt::from(resolution);
    Ok(out
        .into_iter()
        .map(|p| {
            let comps = p.into_iter().map(|a| Rational::new(BigInt::from(a), q.clone())).collect();
            SpectrumVector::from_sorted(comps).expect("parts are nonincreasing")
        })
        .collect())
}

fn enumerate(rest: u64, slots: usize, cap: u64, parts: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) -> Result<()> {
    if slots == 1 {
        if rest <= cap {
            if out.len() == MAX_SCAN_SAMPLES {
                return Err(Error::BudgetExceeded(format!("more than {MAX_SCAN_SAMPLES} samples")));
            }
            parts.push(rest);
            out.push(parts.clone());
            parts.pop();
        }
        return Ok(());
    }
    let lo = rest.div_ceil(slots as u64);
    for a in (lo..=cap.min(rest)).rev() {
        parts.push(a);
        enumerate(rest - a, slots - 1, a, parts, out)?;
        parts.pop();
    }
    Ok(())
}

/// Classifies every grid sample. Aborts on the first nesting violation.
pub fn region_scan(config: &ScanConfig) -> Result<Vec<ScanRow>> {
    let samples = scan_samples(&config.target, config.resolution)?;
    log::info!("classifying {} samples", samples.len());
    let rows = samples
        .into_par_iter()
        .map(|x| {
            let verdict = classify(&x, &config.target, config.lambda.as_ref(), &config.search, &config.copies)?;
            if let Some(problem) = nesting_violation(&verdict) {
                return Err(Error::InvariantViolation(format!("at x = {x}: {problem}")));
            }
            Ok(ScanRow { x, verdict })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

pub fn scan_header(dim: usize, with_lambda: bool) -> Vec<String> {
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x_{i}")).collect();
    header.extend(
        ["P", "in_S", "in_T", "in_M", "interior_T_sufficient", "best_catalyzed"]
            .iter()
            .map(|s| s.to_string()),
    );
    if with_lambda {
        header.extend(
            ["lambda", "in_S_lambda", "in_T_lambda", "in_M_lambda", "interior_T_lambda_sufficient"]
                .iter()
                .map(|s| s.to_string()),
        );
    }
    header
}

fn record(row: &ScanRow) -> Vec<String> {
    let v = &row.verdict;
    let mut out: Vec<String> = row.x.components().iter().map(format_rational).collect();
    out.push(format_rational(&v.probability));
    out.push(v.in_s.to_string());
    out.push(v.in_t.label().into());
    out.push(v.in_m.label().into());
    out.push(v.interior_t_sufficient.to_string());
    out.push(format_rational(&v.best_catalyzed_lower_bound));
    if let Some(l) = &v.lambda {
        out.push(format_rational(&l.lambda));
        out.push(l.in_s.to_string());
        out.push(l.in_t.label().into());
        out.push(l.in_m.label().into());
        out.push(l.interior_t_sufficient.to_string());
    }
    out
}

pub fn write_scan_csv<W: Write>(config: &ScanConfig, rows: &[ScanRow], sink: W) -> Result<()> {
    let io = |e: csv::Error| Error::Parse(format!("csv output: {e}"));
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    writer
        .write_record(scan_header(config.target.dim(), config.lambda.is_some()))
        .map_err(io)?;
    for row in rows {
        writer.write_record(record(row)).map_err(io)?;
    }
    writer.flush().map_err(|e| Error::Parse(format!("csv output: {e}")))?;
    Ok(())
}
