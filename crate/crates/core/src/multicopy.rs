//! Multiple-copy convertibility `x^{⊗k} → y^{⊗k}` and the finite
//! certificates that rule it out for every `k` at once.
//!
//! Three certificate shapes are recognised:
//!
//! * [`HeadCertificate`]: equal largest components with equal multiplicity
//!   `t`, first prefix violation at `d`, and `x_1 x_d ≥ x_{t+1}²` (same for
//!   `y`). The largest `t^k + k·t^{k-1}(d-t)` entries of both tensor powers are
//!   then known in closed form and their sums keep the violation.
//! * [`TailCertificate`]: the mirror image on the smallest components.
//! * [`ProbTailCertificate`]: `x_n = λ y_n`, last tail deficit against
//!   `λ E_l(y)` at `d`; bounds `P(x^{⊗k} → y^{⊗k}) < λ^k` for all `k`.
//!
//! The tail shapes additionally require a strictly positive smallest
//! component: with a zero tail every product touching it vanishes and the
//! closed-form tail sums no longer isolate the deficit.

use num::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorization::{majorizes, transform_probability, MajorizationVerdict, TransformProbability};
use crate::outcome::Tri;
use crate::rational::Rational;
use crate::spectrum::{tensor_spectra, tensor_power, RunLengthSpectrum, SpectrumVector, DEFAULT_RUN_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CopyBudget {
    pub k_max: u32,
    pub run_cap: usize,
}

impl Default for CopyBudget {
    fn default() -> Self {
        CopyBudget {
            k_max: 6,
            run_cap: DEFAULT_RUN_CAP,
        }
    }
}

impl CopyBudget {
    pub fn with_k_max(k_max: u32) -> Self {
        CopyBudget {
            k_max,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeadCertificate {
    pub t: usize,
    pub d: usize,
    /// `x_1 = y_1`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub leading: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub x_d: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub y_d: Rational,
    /// `x_{t+1}`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub x_next: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub y_next: Rational,
    /// `Σ_{i≤d} x_i - Σ_{i≤d} y_i > 0`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub prefix_excess: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailCertificate {
    pub t: usize,
    pub d: usize,
    /// `x_n = y_n > 0`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub trailing: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub x_d: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub y_d: Rational,
    /// `x_{n-t}`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub x_prev: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub y_prev: Rational,
    /// `E_d(y) - E_d(x) > 0`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub tail_deficit: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbTailCertificate {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub lambda: Rational,
    pub t: usize,
    pub d: usize,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub x_last: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub y_last: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub x_d: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub y_d: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub x_prev: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub y_prev: Rational,
    /// `λ E_d(y) - E_d(x) > 0`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub tail_deficit: Rational,
    /// `P(x → y) < λ`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub probability: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Head(HeadCertificate),
    Tail(TailCertificate),
    ProbTail(ProbTailCertificate),
}

impl Certificate {
    /// Re-derives the certificate from `(x, y)` and checks it is identical.
    pub fn verify(&self, x: &SpectrumVector, y: &SpectrumVector) -> bool {
        match self {
            Certificate::Head(c) => c.verify(x, y),
            Certificate::Tail(c) => c.verify(x, y),
            Certificate::ProbTail(c) => c.verify(x, y),
        }
    }
}

impl HeadCertificate {
    pub fn verify(&self, x: &SpectrumVector, y: &SpectrumVector) -> bool {
        head_certificate(x, y).as_ref() == Some(self)
    }
}

impl TailCertificate {
    pub fn verify(&self, x: &SpectrumVector, y: &SpectrumVector) -> bool {
        tail_certificate(x, y).as_ref() == Some(self)
    }
}

impl ProbTailCertificate {
    pub fn verify(&self, x: &SpectrumVector, y: &SpectrumVector) -> bool {
        matches!(prob_tail_certificate(x, y, &self.lambda), Ok(Some(ref c)) if c == self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "evidence", rename_all = "snake_case")]
pub enum CopyOutcome {
    Found(u32),
    NoneWithinBudget,
    CertifiedNever(Certificate),
}

/// Zero-pads to a common dimension; `None` if the masses differ.
fn common_frame(x: &SpectrumVector, y: &SpectrumVector) -> Option<(SpectrumVector, SpectrumVector)> {
    if x.mass() != y.mass() {
        return None;
    }
    let n = x.dim().max(y.dim());
    Some((x.padded(n), y.padded(n)))
}

fn comp(v: &SpectrumVector, i: usize) -> &Rational {
    v.get(i).expect("index within dimension")
}

fn tail(v: &SpectrumVector, l: usize) -> Rational {
    v.components()[l - 1..].iter().sum()
}

pub fn head_certificate(x: &SpectrumVector, y: &SpectrumVector) -> Option<HeadCertificate> {
    let (x, y) = common_frame(x, y)?;
    if x.largest() != y.largest() {
        return None;
    }
    let verdict = majorizes(&x, &y).ok()?;
    let d = verdict.failing_index? as usize;
    let t = x.leading_multiplicity();
    if y.leading_multiplicity() != t {
        return None;
    }
    debug_assert!(t < d && d < x.dim());
    let leading = x.largest().clone();
    let (x_d, y_d) = (comp(&x, d), comp(&y, d));
    let (x_next, y_next) = (comp(&x, t + 1), comp(&y, t + 1));
    if &leading * x_d < x_next * x_next || &leading * y_d < y_next * y_next {
        return None;
    }
    Some(HeadCertificate {
        t,
        d,
        x_d: x_d.clone(),
        y_d: y_d.clone(),
        x_next: x_next.clone(),
        y_next: y_next.clone(),
        prefix_excess: verdict.prefix_gap?,
        leading,
    })
}

pub fn tail_certificate(x: &SpectrumVector, y: &SpectrumVector) -> Option<TailCertificate> {
    let (x, y) = common_frame(x, y)?;
    let n = x.dim();
    if x.smallest() != y.smallest() || !x.smallest().is_positive() {
        return None;
    }
    // d = max{l : E_l(x) < E_l(y)}
    let d = (1..=n).rev().find(|&l| tail(&x, l) < tail(&y, l))?;
    let t = x.trailing_multiplicity();
    if y.trailing_multiplicity() != t || t >= n {
        return None;
    }
    let trailing = x.smallest().clone();
    let (x_d, y_d) = (comp(&x, d), comp(&y, d));
    let (x_prev, y_prev) = (comp(&x, n - t), comp(&y, n - t));
    if &trailing * x_d > x_prev * x_prev || &trailing * y_d > y_prev * y_prev {
        return None;
    }
    Some(TailCertificate {
        t,
        d,
        x_d: x_d.clone(),
        y_d: y_d.clone(),
        x_prev: x_prev.clone(),
        y_prev: y_prev.clone(),
        tail_deficit: tail(&y, d) - tail(&x, d),
        trailing,
    })
}

/// Probabilistic tail certificate at threshold `λ ∈ (0, 1)`.
pub fn prob_tail_certificate(
    x: &SpectrumVector,
    y: &SpectrumVector,
    lambda: &Rational,
) -> Result<Option<ProbTailCertificate>> {
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(Error::InvalidThreshold(format!(
            "probabilistic tail certificates need λ in (0, 1), got {lambda}"
        )));
    }
    let Some((x, y)) = common_frame(x, y) else {
        return Ok(None);
    };
    let n = x.dim();
    if !y.smallest().is_positive() || *x.smallest() != lambda * y.smallest() {
        return Ok(None);
    }
    let probability = transform_probability(&x, &y)?.value;
    if probability >= *lambda {
        return Ok(None);
    }
    // d = max{l : E_l(x) < λ E_l(y)}
    let Some(d) = (1..=n).rev().find(|&l| tail(&x, l) < lambda * tail(&y, l)) else {
        return Ok(None);
    };
    let t = x.trailing_multiplicity();
    if y.trailing_multiplicity() != t || t >= n {
        return Ok(None);
    }
    let (x_last, y_last) = (x.smallest().clone(), y.smallest().clone());
    let (x_d, y_d) = (comp(&x, d), comp(&y, d));
    let (x_prev, y_prev) = (comp(&x, n - t), comp(&y, n - t));
    if &x_last * x_d > x_prev * x_prev || &y_last * y_d > y_prev * y_prev {
        return Ok(None);
    }
    Ok(Some(ProbTailCertificate {
        lambda: lambda.clone(),
        t,
        d,
        x_last,
        y_last,
        x_d: x_d.clone(),
        y_d: y_d.clone(),
        x_prev: x_prev.clone(),
        y_prev: y_prev.clone(),
        tail_deficit: lambda * tail(&y, d) - tail(&x, d),
        probability,
    }))
}

/// First deterministic certificate that applies, head before tail.
pub fn never_certificate(x: &SpectrumVector, y: &SpectrumVector) -> Option<Certificate> {
    head_certificate(x, y)
        .map(Certificate::Head)
        .or_else(|| tail_certificate(x, y).map(Certificate::Tail))
}

fn check_mass(x: &SpectrumVector, y: &SpectrumVector) -> Result<()> {
    let (mx, my) = (x.mass(), y.mass());
    if mx != my {
        return Err(Error::mass_mismatch(&mx, &my));
    }
    Ok(())
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::PreconditionFailed("copy number k must be at least 1".into()));
    }
    Ok(())
}

/// `x^{⊗k} ≺ y^{⊗k}`, evaluated on run-length spectra.
pub fn multicopy_majorizes(
    x: &SpectrumVector,
    y: &SpectrumVector,
    k: u32,
    run_cap: usize,
) -> Result<MajorizationVerdict> {
    check_k(k)?;
    check_mass(x, y)?;
    majorizes(&tensor_power(x, k, run_cap)?, &tensor_power(y, k, run_cap)?)
}

/// Exact `P(x^{⊗k} → y^{⊗k})`. The per-copy rate is its `k`-th root, which is
/// never formed; compare against `λ^k` instead.
pub fn multicopy_probability(
    x: &SpectrumVector,
    y: &SpectrumVector,
    k: u32,
    run_cap: usize,
) -> Result<TransformProbability> {
    check_k(k)?;
    check_mass(x, y)?;
    transform_probability(&tensor_power(x, k, run_cap)?, &tensor_power(y, k, run_cap)?)
}

/// Walks `k = 1..=k_max`, growing both tensor powers by one factor per step.
/// Stops at the first `k` where `accept` holds; `Ok(None)` when none does or
/// the run cap is hit.
fn scan_powers<F>(x: &SpectrumVector, y: &SpectrumVector, budget: &CopyBudget, mut accept: F) -> Result<Option<u32>>
where
    F: FnMut(u32, &RunLengthSpectrum, &RunLengthSpectrum) -> Result<bool>,
{
    let (bx, by) = (x.to_runs(), y.to_runs());
    let (mut px, mut py) = (bx.clone(), by.clone());
    for k in 1..=budget.k_max {
        if k > 1 {
            match (tensor_spectra(&px, &bx, budget.run_cap), tensor_spectra(&py, &by, budget.run_cap)) {
                (Ok(nx), Ok(ny)) => {
                    px = nx;
                    py = ny;
                }
                (Err(e), _) | (_, Err(e)) => {
                    log::debug!("stopping copy scan at k = {k}: {e}");
                    return Ok(None);
                }
            }
        }
        if accept(k, &px, &py)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// `x ∈ M(y)` under a copy budget.
pub fn in_m(x: &SpectrumVector, y: &SpectrumVector, budget: &CopyBudget) -> Result<Tri<u32, Certificate>> {
    check_mass(x, y)?;
    if let Some(cert) = never_certificate(x, y) {
        return Ok(Tri::No(cert));
    }
    let found = scan_powers(x, y, budget, |_, px, py| Ok(majorizes(px, py)?.holds))?;
    Ok(found.map_or(Tri::Unknown, Tri::Yes))
}

/// `x ∈ M^λ(y)`: some `k ≤ k_max` with `P(x^{⊗k} → y^{⊗k}) ≥ λ^k`.
pub fn in_m_lambda(
    x: &SpectrumVector,
    y: &SpectrumVector,
    lambda: &Rational,
    budget: &CopyBudget,
) -> Result<Tri<u32, Certificate>> {
    if !lambda.is_positive() || *lambda > Rational::one() {
        return Err(Error::InvalidThreshold(format!("λ must lie in (0, 1], got {lambda}")));
    }
    if lambda.is_one() {
        return in_m(x, y, budget);
    }
    check_mass(x, y)?;
    if let Some(cert) = prob_tail_certificate(x, y, lambda)? {
        return Ok(Tri::No(Certificate::ProbTail(cert)));
    }
    let mut power = Rational::one();
    let found = scan_powers(x, y, budget, |_, px, py| {
        power *= lambda;
        Ok(transform_probability(px, py)?.value >= power)
    })?;
    Ok(found.map_or(Tri::Unknown, Tri::Yes))
}

/// Smallest copy number that works, a proof that none does, or neither.
pub fn min_copies(x: &SpectrumVector, y: &SpectrumVector, budget: &CopyBudget) -> Result<CopyOutcome> {
    Ok(match in_m(x, y, budget)? {
        Tri::Yes(k) => CopyOutcome::Found(k),
        Tri::No(cert) => CopyOutcome::CertifiedNever(cert),
        Tri::Unknown => CopyOutcome::NoneWithinBudget,
    })
}

/// `λ^k` as an exact rational.
pub fn lambda_power(lambda: &Rational, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, _| acc * lambda)
}
