//! Catalyst-assisted conversion `x ⊗ c → y ⊗ c`.
//!
//! The search space is the set of normalized, nonincreasing catalysts with
//! strictly positive components whose common denominator is at most
//! `max_denominator`. Candidates are visited by dimension, then in descending
//! lexicographic order of their components, so the first hit is well defined
//! no matter how the work is split across threads.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorization::{check_threshold, majorizes, transform_probability, MajorizationVerdict, TransformProbability};
use crate::outcome::Tri;
use crate::rational::Rational;
use crate::spectrum::{direct_sum, tensor, tensor_vector, SpectrumVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SearchBudget {
    pub max_dim: usize,
    pub max_denominator: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_dim: 3,
            max_denominator: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalystResult {
    pub catalyst: SpectrumVector,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub achieved_probability: Rational,
    pub dimension: usize,
}

impl CatalystResult {
    fn new(catalyst: SpectrumVector, achieved_probability: Rational) -> Self {
        CatalystResult {
            dimension: catalyst.dim(),
            catalyst,
            achieved_probability,
        }
    }
}

/// Why no catalyst can reach the threshold. The extreme products
/// `x_1 c_1`, `x_n c_r` of `x ⊗ c` scale uniformly with the catalyst, so
/// these comparisons are catalyst-independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Impossible {
    LeadingExceedsTarget {
        #[serde(serialize_with = "crate::rational::serialize")]
        x_first: Rational,
        #[serde(serialize_with = "crate::rational::serialize")]
        y_first: Rational,
    },
    TrailingBelowTarget {
        #[serde(serialize_with = "crate::rational::serialize")]
        x_last: Rational,
        #[serde(serialize_with = "crate::rational::serialize")]
        y_last: Rational,
    },
    TrailingBelowThreshold {
        #[serde(serialize_with = "crate::rational::serialize")]
        x_last: Rational,
        #[serde(serialize_with = "crate::rational::serialize")]
        scaled_y_last: Rational,
    },
}

pub type SearchOutcome = Tri<CatalystResult, Impossible>;

fn check_mass(x: &SpectrumVector, y: &SpectrumVector) -> Result<()> {
    let (mx, my) = (x.mass(), y.mass());
    if mx != my {
        return Err(Error::mass_mismatch(&mx, &my));
    }
    Ok(())
}

fn same_dim(x: &SpectrumVector, y: &SpectrumVector) -> (SpectrumVector, SpectrumVector) {
    let n = x.dim().max(y.dim());
    (x.padded(n), y.padded(n))
}

pub fn verify_catalyst(x: &SpectrumVector, y: &SpectrumVector, c: &SpectrumVector) -> Result<MajorizationVerdict> {
    check_mass(x, y)?;
    let (x, y) = same_dim(x, y);
    majorizes(&tensor(&x, c), &tensor(&y, c))
}

pub fn verify_catalyst_prob(
    x: &SpectrumVector,
    y: &SpectrumVector,
    c: &SpectrumVector,
) -> Result<TransformProbability> {
    check_mass(x, y)?;
    let (x, y) = same_dim(x, y);
    transform_probability(&tensor(&x, c), &tensor(&y, c))
}

/// Compositions of `total` into `parts` positive nonincreasing integers,
/// each at most `cap`.
fn partitions(total: u64, parts: usize, cap: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if parts == 0 {
        if total == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    let rest = parts as u64 - 1;
    if total < parts as u64 {
        return;
    }
    let hi = cap.min(total - rest);
    // largest part must be at least ceil(total / parts)
    let lo = total.div_ceil(parts as u64);
    for a in (lo..=hi).rev() {
        prefix.push(a);
        partitions(total - a, parts - 1, a, prefix, out);
        prefix.pop();
    }
}

fn build_candidates(budget: SearchBudget) -> Vec<SpectrumVector> {
    let mut out = Vec::new();
    for dim in 1..=budget.max_dim {
        let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::new();
        for denom in 1..=budget.max_denominator {
            let mut raw = Vec::new();
            partitions(denom, dim, denom, &mut Vec::new(), &mut raw);
            let q = BigInt::from(denom);
            for p in raw {
                seen.insert(p.into_iter().map(|a| Rational::new(BigInt::from(a), q.clone())).collect());
            }
        }
        out.extend(
            seen.into_iter()
                .rev()
                .map(|c| SpectrumVector::from_sorted(c).expect("partitions are nonincreasing")),
        );
    }
    out
}

/// Every catalyst the search visits, in visiting order. Cached per budget.
pub fn catalyst_candidates(budget: SearchBudget) -> Arc<Vec<SpectrumVector>> {
    static CACHE: OnceLock<Mutex<HashMap<SearchBudget, Arc<Vec<SpectrumVector>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache lock").get(&budget) {
        return hit.clone();
    }
    let built = Arc::new(build_candidates(budget));
    cache
        .lock()
        .expect("cache lock")
        .entry(budget)
        .or_insert(built)
        .clone()
}

/// Catalyst-independent reasons the threshold is out of reach.
pub fn necessary_condition_failure(
    x: &SpectrumVector,
    y: &SpectrumVector,
    lambda: &Rational,
) -> Option<Impossible> {
    let (x, y) = same_dim(x, y);
    if lambda.is_one() {
        if x.largest() > y.largest() {
            return Some(Impossible::LeadingExceedsTarget {
                x_first: x.largest().clone(),
                y_first: y.largest().clone(),
            });
        }
        if x.smallest() < y.smallest() {
            return Some(Impossible::TrailingBelowTarget {
                x_last: x.smallest().clone(),
                y_last: y.smallest().clone(),
            });
        }
    } else if y.smallest().is_positive() {
        let scaled = lambda * y.smallest();
        if *x.smallest() < scaled {
            return Some(Impossible::TrailingBelowThreshold {
                x_last: x.smallest().clone(),
                scaled_y_last: scaled,
            });
        }
    }
    None
}

fn reaches(x: &SpectrumVector, y: &SpectrumVector, c: &SpectrumVector, lambda: &Rational) -> bool {
    let (tx, ty) = (tensor(x, c), tensor(y, c));
    if lambda.is_one() {
        majorizes(&tx, &ty).map(|v| v.holds).unwrap_or(false)
    } else {
        transform_probability(&tx, &ty)
            .map(|p| p.value >= *lambda)
            .unwrap_or(false)
    }
}

/// First enumerated catalyst with `P(x ⊗ c → y ⊗ c) ≥ λ`.
pub fn search_catalyst(
    x: &SpectrumVector,
    y: &SpectrumVector,
    lambda: &Rational,
    budget: &SearchBudget,
) -> Result<SearchOutcome> {
    check_threshold(lambda)?;
    if lambda.is_zero() {
        return Err(Error::InvalidThreshold("λ must be positive".into()));
    }
    check_mass(x, y)?;
    if let Some(reason) = necessary_condition_failure(x, y, lambda) {
        return Ok(Tri::No(reason));
    }
    let (xp, yp) = same_dim(x, y);
    let candidates = catalyst_candidates(*budget);
    let hit = candidates
        .par_iter()
        .position_first(|c| reaches(&xp, &yp, c, lambda));
    Ok(match hit {
        Some(i) => {
            let c = candidates[i].clone();
            let achieved = verify_catalyst_prob(x, y, &c)?.value;
            Tri::Yes(CatalystResult::new(c, achieved))
        }
        None => Tri::Unknown,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BestCatalyzed {
    /// Certified lower bound on `sup_c P(x ⊗ c → y ⊗ c)`.
    #[serde(serialize_with = "crate::rational::serialize")]
    pub lower_bound: Rational,
    pub witness: CatalystResult,
}

/// `min(1, x_n / y_n)`, an upper bound on every catalysed probability.
/// Only the first term binds when `y_n = 0`.
pub fn catalysis_ceiling(x: &SpectrumVector, y: &SpectrumVector) -> Rational {
    let (x, y) = same_dim(x, y);
    let one = Rational::one();
    if y.smallest().is_positive() {
        let ratio = x.smallest() / y.smallest();
        if ratio < one {
            return ratio;
        }
    }
    one
}

/// Best probability over the enumerated family (including `c = (1)`).
pub fn best_catalyzed_probability(
    x: &SpectrumVector,
    y: &SpectrumVector,
    budget: &SearchBudget,
) -> Result<BestCatalyzed> {
    check_mass(x, y)?;
    let (xp, yp) = same_dim(x, y);
    let ceiling = catalysis_ceiling(x, y);
    let unit = SpectrumVector::unit();
    let direct = transform_probability(&xp, &yp)?.value;
    let mut best = BestCatalyzed {
        lower_bound: direct.clone(),
        witness: CatalystResult::new(unit, direct),
    };
    if best.lower_bound >= ceiling {
        return Ok(best);
    }
    let candidates = catalyst_candidates(*budget);
    // chunks keep the scan order while allowing an exit once the ceiling is hit
    for chunk in candidates.chunks(256) {
        let values: Vec<Rational> = chunk
            .par_iter()
            .map(|c| {
                transform_probability(&tensor(&xp, c), &tensor(&yp, c))
                    .map(|p| p.value)
                    .unwrap_or_else(|_| Rational::zero())
            })
            .collect();
        for (c, value) in chunk.iter().zip(values) {
            if value > best.lower_bound {
                best = BestCatalyzed {
                    lower_bound: value.clone(),
                    witness: CatalystResult::new(c.clone(), value),
                };
            }
        }
        if best.lower_bound >= ceiling {
            break;
        }
    }
    Ok(best)
}

/// Given catalysts for `x → y` and `x' → y'`, returns `c ⊗ c'` as a catalyst
/// for `x ⊕ x' → y ⊕ y'`.
pub fn compose_catalysts(
    x: &SpectrumVector,
    y: &SpectrumVector,
    c: &SpectrumVector,
    x2: &SpectrumVector,
    y2: &SpectrumVector,
    c2: &SpectrumVector,
) -> Result<CatalystResult> {
    if !verify_catalyst(x, y, c)?.holds {
        return Err(Error::PreconditionFailed("first catalyst does not verify".into()));
    }
    if !verify_catalyst(x2, y2, c2)?.holds {
        return Err(Error::PreconditionFailed("second catalyst does not verify".into()));
    }
    let (x, y) = same_dim(x, y);
    let (x2, y2) = same_dim(x2, y2);
    let combined = tensor_vector(c, c2);
    let xs = direct_sum(&x, &x2);
    let ys = direct_sum(&y, &y2);
    let achieved = verify_catalyst_prob(&xs, &ys, &combined)?.value;
    Ok(CatalystResult::new(combined, achieved))
}

/// Pads a `λ`-catalysable pair with an extra block `z`:
/// returns `(x' ⊕ λz, y ⊕ z)` where `x'` is `x` with `(1 - λ) Σ z` added to
/// its largest component. The same catalyst keeps `P ≥ λ`.
pub fn pad_with_scaled_tail(
    x: &SpectrumVector,
    y: &SpectrumVector,
    c: &SpectrumVector,
    z: &SpectrumVector,
    lambda: &Rational,
) -> Result<(SpectrumVector, SpectrumVector)> {
    check_threshold(lambda)?;
    let achieved = verify_catalyst_prob(x, y, c)?.value;
    if achieved < *lambda {
        return Err(Error::PreconditionFailed(format!(
            "catalyst reaches only {achieved}, below λ = {lambda}"
        )));
    }
    let mut head = x.components().to_vec();
    head[0] += (Rational::one() - lambda) * z.mass();
    let boosted = SpectrumVector::from_sorted(head).expect("raising the largest entry keeps order");
    let padded = direct_sum(&boosted, &z.scaled(lambda));
    let target = direct_sum(y, z);
    Ok((padded, target))
}

/// True when some further catalyst strictly improves on `c`, i.e.
/// `P(x ⊗ c → y ⊗ c) < min(1, x_n / y_n)`.
pub fn improvable(x: &SpectrumVector, y: &SpectrumVector, c: &SpectrumVector) -> Result<bool> {
    let achieved = verify_catalyst_prob(x, y, c)?.value;
    Ok(achieved < catalysis_ceiling(x, y))
}
