//! Explicit states that catalysis reaches but no number of copies does.
//!
//! Both constructors split the target into a fixed block and a remainder
//! `ȳ`, build a point `x̄` strictly inside the catalysable region of `ȳ`,
//! push it by `δ` across the multiple-copy boundary, and glue the blocks back
//! together. The catalyst side is found by search, which is why `δ` is
//! retried at smaller values when the search comes back empty.

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::catalysis::{search_catalyst, verify_catalyst, verify_catalyst_prob, CatalystResult, SearchBudget};
use crate::error::{Error, Result};
use crate::multicopy::{head_certificate, prob_tail_certificate, Certificate};
use crate::outcome::Tri;
use crate::rational::{int, Rational};
use crate::spectrum::SpectrumVector;

/// Number of times `δ` is halved after the first failed search.
pub const DELTA_RETRIES: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessParams {
    pub t: usize,
    pub d: usize,
    pub m: usize,
    /// Number of entries sharing the `ε` correction: `d - t - 1` for the
    /// deterministic shape, `n - t - d` for the probabilistic one.
    pub spread: usize,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub epsilon: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub delta: Rational,
    #[serde(serialize_with = "crate::rational::serialize_opt")]
    pub lambda: Option<Rational>,
    /// `ỹ_1`, the first entry of `x̄`.
    #[serde(serialize_with = "crate::rational::serialize_opt")]
    pub head_component: Option<Rational>,
    /// `x'_1`, the first entry of the glued witness before re-sorting.
    #[serde(serialize_with = "crate::rational::serialize_opt")]
    pub x_prime_first: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "evidence", rename_all = "lowercase")]
pub enum CatalysisEvidence {
    Found(CatalystResult),
    Unknown,
}

impl CatalysisEvidence {
    pub fn found(&self) -> Option<&CatalystResult> {
        match self {
            CatalysisEvidence::Found(c) => Some(c),
            CatalysisEvidence::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessBundle {
    pub target: SpectrumVector,
    pub witness: SpectrumVector,
    pub params: WitnessParams,
    pub non_membership: Certificate,
    pub catalysis_evidence: CatalysisEvidence,
}

/// The unperturbed point, its `δ`-shifted version, and the reduced target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocks {
    pub x_bar: SpectrumVector,
    pub x_bar_prime: SpectrumVector,
    pub y_bar: SpectrumVector,
}

fn at(y: &SpectrumVector, i: usize) -> Rational {
    y.components()[i - 1].clone()
}

fn fail(msg: impl Into<String>) -> Error {
    Error::PreconditionFailed(msg.into())
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new((num as i64).into(), (den as i64).into())
}

fn halve(r: &Rational) -> Rational {
    r / int(2)
}

// ---------------------------------------------------------------------------
// Deterministic shape: equal heads, violation right after the second plateau.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicShape {
    pub t: usize,
    pub d: usize,
    pub m: usize,
    pub spread: usize,
    /// Strict upper bound on `ε`.
    pub epsilon_bound: Rational,
}

pub fn deterministic_shape(y: &SpectrumVector) -> Result<DeterministicShape> {
    let n = y.dim();
    let t = y.leading_multiplicity();
    if t >= n {
        return Err(fail("y has no strict drop below its largest component, so d is undefined"));
    }
    let next = at(y, t + 1);
    let d = (t + 2..=n)
        .find(|&i| at(y, i) < next)
        .ok_or_else(|| fail("the run of y_{t+1} reaches the last component, so d is undefined"))?;
    let m = y.trailing_multiplicity();
    if d >= n - m {
        return Err(fail(format!("d < n - m is violated (d = {d}, n - m = {})", n - m)));
    }
    if y.largest() * at(y, d) < &next * &next {
        return Err(fail("y_1 y_d >= y_{t+1}^2 is violated"));
    }
    let spread = d - t - 1;
    let first = ratio(spread, spread + 1) * (at(y, d - 1) - at(y, d));
    let second = ratio(m, m + 1) * (at(y, n - m) - at(y, n - m + 1));
    Ok(DeterministicShape {
        t,
        d,
        m,
        spread,
        epsilon_bound: first.min(second),
    })
}

/// `x̄`, `x̄'` and `ȳ = (y_{t+1}, …, y_n)`. No sorting is applied: parameters
/// that break the nonincreasing order are rejected.
pub fn deterministic_blocks(
    y: &SpectrumVector,
    shape: &DeterministicShape,
    epsilon: &Rational,
    delta: &Rational,
) -> Result<Blocks> {
    if !epsilon.is_positive() || *epsilon >= shape.epsilon_bound {
        return Err(fail(format!("ε must lie in (0, {})", shape.epsilon_bound)));
    }
    if !delta.is_positive() {
        return Err(fail("δ must be positive"));
    }
    let DeterministicShape { t, d, m, spread, .. } = *shape;
    let n = y.dim();
    let y_bar = y.components()[t..].to_vec();
    // position i of y maps to index i - t - 1 of the reduced block
    let idx = |i: usize| i - t - 1;
    let mut x_bar = y_bar.clone();
    let share = epsilon / ratio(spread, 1);
    for i in t + 1..d {
        x_bar[idx(i)] -= &share;
    }
    x_bar[idx(d)] += epsilon;
    x_bar[idx(n - m)] -= epsilon;
    let tail_share = epsilon / ratio(m, 1);
    for i in n - m + 1..=n {
        x_bar[idx(i)] += &tail_share;
    }
    let mut shifted = x_bar.clone();
    shifted[idx(d)] += delta;
    shifted[idx(n - m)] -= delta;
    let ordered = |v: Vec<Rational>, what: &str| {
        SpectrumVector::from_sorted(v)
            .ok_or_else(|| fail(format!("ε = {epsilon}, δ = {delta} leave {what} out of order")))
    };
    Ok(Blocks {
        x_bar: ordered(x_bar, "x̄")?,
        x_bar_prime: ordered(shifted, "x̄'")?,
        y_bar: SpectrumVector::from_sorted(y_bar).expect("suffix of a sorted vector"),
    })
}

fn deterministic_candidate(
    y: &SpectrumVector,
    shape: &DeterministicShape,
    epsilon: &Rational,
    delta: &Rational,
) -> Result<(Blocks, SpectrumVector, Certificate)> {
    let blocks = deterministic_blocks(y, shape, epsilon, delta)?;
    let mut glued = y.components()[..shape.t].to_vec();
    glued.extend_from_slice(blocks.x_bar_prime.components());
    let x = SpectrumVector::from_sorted(glued)
        .ok_or_else(|| fail("x̄' exceeds the fixed head block"))?;
    let cert = head_certificate(&x, y)
        .ok_or_else(|| Error::InvariantViolation(format!("no head certificate for witness {x}")))?;
    Ok((blocks, x, Certificate::Head(cert)))
}

/// Builds `x ∈ T(y) \ M(y)`. Requires the second plateau of `y` to end at
/// `d < n - m` and `y_1 y_d ≥ y_{t+1}²`.
pub fn construct_deterministic_witness(
    y: &SpectrumVector,
    epsilon: Option<&Rational>,
    delta: Option<&Rational>,
    budget: &SearchBudget,
) -> Result<WitnessBundle> {
    let shape = deterministic_shape(y)?;
    let epsilon = epsilon.cloned().unwrap_or_else(|| halve(&shape.epsilon_bound));
    let delta0 = delta.cloned().unwrap_or_else(|| &epsilon / int(4));
    let params = |delta: &Rational| WitnessParams {
        t: shape.t,
        d: shape.d,
        m: shape.m,
        spread: shape.spread,
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        lambda: None,
        head_component: None,
        x_prime_first: None,
    };

    let mut delta = delta0.clone();
    for attempt in 0..=DELTA_RETRIES {
        let (blocks, x, cert) = deterministic_candidate(y, &shape, &epsilon, &delta)?;
        if let Tri::Yes(hit) = search_catalyst(&blocks.x_bar_prime, &blocks.y_bar, &Rational::one(), budget)? {
            if !verify_catalyst(&x, y, &hit.catalyst)?.holds {
                return Err(Error::InvariantViolation(format!(
                    "catalyst {} for the reduced pair does not lift",
                    hit.catalyst
                )));
            }
            let achieved = verify_catalyst_prob(&x, y, &hit.catalyst)?.value;
            log::debug!("catalyst {} found after {attempt} retries", hit.catalyst);
            return Ok(WitnessBundle {
                target: y.clone(),
                witness: x,
                params: params(&delta),
                non_membership: cert,
                catalysis_evidence: CatalysisEvidence::Found(CatalystResult {
                    dimension: hit.catalyst.dim(),
                    catalyst: hit.catalyst,
                    achieved_probability: achieved,
                }),
            });
        }
        delta = halve(&delta);
    }
    log::warn!("no catalyst within budget after {DELTA_RETRIES} δ-halvings; catalysis evidence is unknown");
    let (_, x, cert) = deterministic_candidate(y, &shape, &epsilon, &delta0)?;
    Ok(WitnessBundle {
        target: y.clone(),
        witness: x,
        params: params(&delta0),
        non_membership: cert,
        catalysis_evidence: CatalysisEvidence::Unknown,
    })
}

/// `(a, ȳ) / (a + Σ ȳ)`. Without `a`, uses twice the least `a` for which the
/// result meets the deterministic witness hypotheses with a single largest
/// component.
pub fn augment_target(y_bar: &SpectrumVector, a: Option<&Rational>) -> Result<SpectrumVector> {
    let n = y_bar.dim() + 1;
    let lead = y_bar.largest().clone();
    if !lead.is_positive() {
        return Err(fail("ȳ is zero"));
    }
    // with a single head, y_{t+1} = ȳ_1 and the drop index is shifted by one
    let d = (2..=y_bar.dim())
        .find(|&i| at(y_bar, i) < lead)
        .map(|i| i + 1)
        .ok_or_else(|| fail("ȳ is constant, so d is undefined"))?;
    let m = y_bar.trailing_multiplicity();
    if d >= n - m {
        return Err(fail(format!("d < n - m is violated (d = {d}, n - m = {})", n - m)));
    }
    let y_d = at(y_bar, d - 1);
    if y_d.is_zero() {
        return Err(fail("y_d = 0, so no finite a gives y_1 y_d >= y_{t+1}^2"));
    }
    let a = match a {
        Some(a) => a.clone(),
        None => int(2) * &lead * &lead / y_d,
    };
    let mut raw = vec![a];
    raw.extend_from_slice(y_bar.components());
    SpectrumVector::new(raw)?.normalized()
}

// ---------------------------------------------------------------------------
// Probabilistic shape: the tail is scaled by λ, the head absorbs the excess.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilisticShape {
    pub t: usize,
    pub d: usize,
    pub m: usize,
    pub spread: usize,
    pub epsilon_bound: Rational,
}

pub fn probabilistic_shape(y: &SpectrumVector, lambda: &Rational) -> Result<ProbabilisticShape> {
    if !(lambda.is_positive() && *lambda < Rational::one()) {
        return Err(Error::InvalidThreshold(format!("λ = {lambda} must lie in (0, 1)")));
    }
    let n = y.dim();
    let m = y.leading_multiplicity();
    let t = y.trailing_multiplicity();
    if t >= n {
        return Err(fail("y is constant"));
    }
    if !y.smallest().is_positive() {
        return Err(fail("the smallest component of y must be positive"));
    }
    let low = at(y, n - t);
    let d = (1..n - t)
        .rev()
        .find(|&i| at(y, i) > low)
        .ok_or_else(|| fail("no component above the y_{n-t} plateau, so d is undefined"))?;
    if d <= m + 1 {
        return Err(fail(format!("d > m + 1 is violated (d = {d}, m = {m})")));
    }
    if y.smallest() * at(y, d) > &low * &low {
        return Err(fail("y_n y_d <= y_{n-t}^2 is violated"));
    }
    let spread = n - t - d;
    let first = lambda * ratio(m, m + 1) * (at(y, m) - at(y, m + 1));
    let second = lambda * ratio(spread, spread + 1) * (at(y, d) - at(y, d + 1));
    Ok(ProbabilisticShape {
        t,
        d,
        m,
        spread,
        epsilon_bound: first.min(second),
    })
}

/// `x̄` (nonincreasing by construction), `x̄'↓` and `ȳ = (y_1, …, y_{n-t})`.
pub fn probabilistic_blocks(
    y: &SpectrumVector,
    lambda: &Rational,
    shape: &ProbabilisticShape,
    epsilon: &Rational,
    delta: &Rational,
) -> Result<Blocks> {
    if !epsilon.is_positive() || *epsilon >= shape.epsilon_bound {
        return Err(fail(format!("ε must lie in (0, {})", shape.epsilon_bound)));
    }
    if !delta.is_positive() {
        return Err(fail("δ must be positive"));
    }
    let ProbabilisticShape { t, d, m, spread, .. } = *shape;
    let n = y.dim();
    let y_bar = y.components()[..n - t].to_vec();
    let lead_share = epsilon / ratio(m, 1);
    let head_component: Rational =
        at(y, 1) + (Rational::one() - lambda) * y_bar[1..].iter().sum::<Rational>() - &lead_share;
    let mut x_bar: Vec<Rational> = y_bar.iter().map(|v| lambda * v).collect();
    x_bar[0] = head_component;
    for entry in &mut x_bar[1..m] {
        *entry -= &lead_share;
    }
    x_bar[m] += epsilon;
    x_bar[d - 1] -= epsilon;
    let tail_share = epsilon / ratio(spread, 1);
    for entry in &mut x_bar[d..] {
        *entry += &tail_share;
    }
    let mut shifted = x_bar.clone();
    shifted[m] += delta;
    shifted[d - 1] -= delta;
    let x_bar = SpectrumVector::from_sorted(x_bar)
        .ok_or_else(|| fail(format!("ε = {epsilon} leaves x̄ out of order")))?;
    Ok(Blocks {
        x_bar,
        x_bar_prime: SpectrumVector::new(shifted)?,
        y_bar: SpectrumVector::from_sorted(y_bar).expect("prefix of a sorted vector"),
    })
}

fn probabilistic_candidate(
    y: &SpectrumVector,
    lambda: &Rational,
    shape: &ProbabilisticShape,
    epsilon: &Rational,
    delta: &Rational,
) -> Result<(Blocks, SpectrumVector, Rational, Certificate)> {
    let blocks = probabilistic_blocks(y, lambda, shape, epsilon, delta)?;
    let n = y.dim();
    let tail = &y.components()[n - shape.t..];
    let mut glued = blocks.x_bar_prime.components().to_vec();
    glued[0] += (Rational::one() - lambda) * tail.iter().sum::<Rational>();
    let x_prime_first = glued[0].clone();
    glued.extend(tail.iter().map(|v| lambda * v));
    let x = SpectrumVector::new(glued)?;
    let cert = prob_tail_certificate(&x, y, lambda)?
        .ok_or_else(|| Error::InvariantViolation(format!("no probabilistic tail certificate for witness {x}")))?;
    Ok((blocks, x, x_prime_first, Certificate::ProbTail(cert)))
}

/// Builds `x ∈ T^λ(y) \ M^λ(y)`.
pub fn construct_probabilistic_witness(
    y: &SpectrumVector,
    lambda: &Rational,
    epsilon: Option<&Rational>,
    delta: Option<&Rational>,
    budget: &SearchBudget,
) -> Result<WitnessBundle> {
    let shape = probabilistic_shape(y, lambda)?;
    let epsilon = epsilon.cloned().unwrap_or_else(|| halve(&shape.epsilon_bound));
    let delta0 = delta.cloned().unwrap_or_else(|| &epsilon / int(4));
    let params = |delta: &Rational, blocks: &Blocks, x_prime_first: Rational| WitnessParams {
        t: shape.t,
        d: shape.d,
        m: shape.m,
        spread: shape.spread,
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        lambda: Some(lambda.clone()),
        head_component: Some(blocks.x_bar.largest().clone()),
        x_prime_first: Some(x_prime_first),
    };

    let mut delta = delta0.clone();
    for attempt in 0..=DELTA_RETRIES {
        let (blocks, x, first, cert) = probabilistic_candidate(y, lambda, &shape, &epsilon, &delta)?;
        if let Tri::Yes(hit) = search_catalyst(&blocks.x_bar_prime, &blocks.y_bar, lambda, budget)? {
            let achieved = verify_catalyst_prob(&x, y, &hit.catalyst)?.value;
            if achieved < *lambda {
                return Err(Error::InvariantViolation(format!(
                    "catalyst {} reaches only {achieved} on the padded pair",
                    hit.catalyst
                )));
            }
            log::debug!("catalyst {} found after {attempt} retries", hit.catalyst);
            return Ok(WitnessBundle {
                target: y.clone(),
                witness: x,
                params: params(&delta, &blocks, first),
                non_membership: cert,
                catalysis_evidence: CatalysisEvidence::Found(CatalystResult {
                    dimension: hit.catalyst.dim(),
                    catalyst: hit.catalyst,
                    achieved_probability: achieved,
                }),
            });
        }
        delta = halve(&delta);
    }
    log::warn!("no catalyst within budget after {DELTA_RETRIES} δ-halvings; catalysis evidence is unknown");
    let (blocks, x, first, cert) = probabilistic_candidate(y, lambda, &shape, &epsilon, &delta0)?;
    Ok(WitnessBundle {
        target: y.clone(),
        witness: x,
        params: params(&delta0, &blocks, first),
        non_membership: cert,
        catalysis_evidence: CatalysisEvidence::Unknown,
    })
}
