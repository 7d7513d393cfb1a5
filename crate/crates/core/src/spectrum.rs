//! Schmidt-coefficient vectors and their compressed tensor-power spectra.
//!
//! A [`SpectrumVector`] is always stored in nonincreasing order. Total mass is
//! not forced to one; relations that need equal mass check it themselves.
//!
//! Tensor products are kept as [`RunLengthSpectrum`]s: a list of distinct
//! values with multiplicities. `x^{⊗k}` for `n = 5, k = 6` has 15625 entries
//! but at most `C(10, 6) = 210` distinct values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

pub const DEFAULT_RUN_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpectrumVector {
    components: Vec<Rational>,
}

/// Sorts `raw` into nonincreasing order after validating it.
pub fn canonicalize(raw: Vec<Rational>) -> Result<SpectrumVector> {
    SpectrumVector::new(raw)
}

impl SpectrumVector {
    pub fn new(mut raw: Vec<Rational>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, value)) = raw.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(Error::NegativeComponent {
                index: index + 1,
                value: format_rational(value),
            });
        }
        raw.sort_unstable_by(|a, b| b.cmp(a));
        Ok(SpectrumVector { components: raw })
    }

    /// Builds from components that the caller guarantees are nonincreasing.
    /// Returns `None` if they are not.
    pub fn from_sorted(components: Vec<Rational>) -> Option<Self> {
        if components.is_empty()
            || components.iter().any(|c| c.is_negative())
            || components.windows(2).any(|w| w[0] < w[1])
        {
            return None;
        }
        Some(SpectrumVector { components })
    }

    pub fn from_strs<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let raw = items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw)
    }

    /// Parses the JSON text form: an array of exact number strings.
    pub fn from_json(text: &str) -> Result<Self> {
        let items: Vec<String> =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("vector JSON: {e}")))?;
        Self::from_strs(&items)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("string array serializes")
    }

    /// The single-entry vector `(1)`.
    pub fn unit() -> Self {
        SpectrumVector {
            components: vec![Rational::one()],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Rational] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Rational> {
        self.components
    }

    /// 1-based access, matching the usual `x_i` convention.
    pub fn get(&self, i: usize) -> Option<&Rational> {
        i.checked_sub(1).and_then(|i| self.components.get(i))
    }

    pub fn largest(&self) -> &Rational {
        &self.components[0]
    }

    pub fn smallest(&self) -> &Rational {
        self.components.last().expect("nonempty")
    }

    pub fn mass(&self) -> Rational {
        self.components.iter().sum()
    }

    /// Number of components equal to the largest one.
    pub fn leading_multiplicity(&self) -> usize {
        let top = self.largest();
        self.components.iter().take_while(|c| *c == top).count()
    }

    /// Number of components equal to the smallest one.
    pub fn trailing_multiplicity(&self) -> usize {
        let bottom = self.smallest();
        self.components.iter().rev().take_while(|c| *c == bottom).count()
    }

    /// Appends zeros up to dimension `n` (no-op if already that long).
    pub fn padded(&self, n: usize) -> SpectrumVector {
        let mut components = self.components.clone();
        if components.len() < n {
            components.resize(n, Rational::zero());
        }
        SpectrumVector { components }
    }

    pub fn scaled(&self, factor: &Rational) -> SpectrumVector {
        assert!(!factor.is_negative(), "scaling by a negative factor");
        SpectrumVector {
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }

    /// Rescales to unit mass. Fails on the zero vector.
    pub fn normalized(&self) -> Result<SpectrumVector> {
        let mass = self.mass();
        if mass.is_zero() {
            return Err(Error::PreconditionFailed("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(&mass.recip()))
    }

    pub fn to_runs(&self) -> RunLengthSpectrum {
        let mut runs: Vec<(Rational, u64)> = Vec::new();
        for c in &self.components {
            match runs.last_mut() {
                Some((v, m)) if v == c => *m += 1,
                _ => runs.push((c.clone(), 1)),
            }
        }
        RunLengthSpectrum {
            total_count: self.components.len() as u64,
            runs,
        }
    }
}

impl fmt::Display for SpectrumVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for SpectrumVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_json(s)
    }
}

impl Serialize for SpectrumVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.components.len()))?;
        for c in &self.components {
            seq.serialize_element(&format_rational(c))?;
        }
        seq.end()
    }
}

/// Distinct values in strictly decreasing order, each with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthSpectrum {
    runs: Vec<(Rational, u64)>,
    total_count: u64,
}

impl RunLengthSpectrum {
    /// Groups an arbitrary multiset of nonnegative values.
    pub fn from_multiset<I: IntoIterator<Item = (Rational, u64)>>(items: I) -> Self {
        let mut grouped: BTreeMap<Rational, u64> = BTreeMap::new();
        for (value, count) in items {
            if count > 0 {
                *grouped.entry(value).or_insert(0) += count;
            }
        }
        let total_count = grouped.values().sum();
        RunLengthSpectrum {
            runs: grouped.into_iter().rev().collect(),
            total_count,
        }
    }

    pub fn runs(&self) -> &[(Rational, u64)] {
        &self.runs
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    pub fn mass(&self) -> Rational {
        self.runs
            .iter()
            .map(|(v, m)| v * BigInt::from(*m))
            .sum()
    }

    pub fn smallest(&self) -> &Rational {
        &self.runs.last().expect("nonempty").0
    }

    /// Adds zero entries until `total_count == count`.
    pub fn padded(&self, count: u64) -> RunLengthSpectrum {
        if count <= self.total_count {
            return self.clone();
        }
        let extra = count - self.total_count;
        let mut runs = self.runs.clone();
        match runs.last_mut() {
            Some((v, m)) if v.is_zero() => *m += extra,
            _ => runs.push((Rational::zero(), extra)),
        }
        RunLengthSpectrum {
            runs,
            total_count: count,
        }
    }

    /// Flat nonincreasing list. Only sensible for small spectra.
    pub fn expand(&self) -> Vec<Rational> {
        self.runs
            .iter()
            .flat_map(|(v, m)| std::iter::repeat(v.clone()).take(*m as usize))
            .collect()
    }

    pub fn to_vector(&self) -> SpectrumVector {
        SpectrumVector {
            components: self.expand(),
        }
    }
}

impl From<&SpectrumVector> for RunLengthSpectrum {
    fn from(x: &SpectrumVector) -> Self {
        x.to_runs()
    }
}

fn tensor_runs(a: &RunLengthSpectrum, b: &RunLengthSpectrum) -> RunLengthSpectrum {
    RunLengthSpectrum::from_multiset(
        a.runs
            .iter()
            .flat_map(|(va, ma)| b.runs.iter().map(move |(vb, mb)| (va * vb, ma * mb))),
    )
}

/// Multiset of all pairwise products `x_i * y_j`.
pub fn tensor(x: &SpectrumVector, y: &SpectrumVector) -> RunLengthSpectrum {
    tensor_runs(&x.to_runs(), &y.to_runs())
}

/// Like [`tensor`] but over already-compressed operands, enforcing a run cap.
pub fn tensor_spectra(
    a: &RunLengthSpectrum,
    b: &RunLengthSpectrum,
    run_cap: usize,
) -> Result<RunLengthSpectrum> {
    let out = tensor_runs(a, b);
    if out.run_count() > run_cap {
        return Err(Error::BudgetExceeded(format!(
            "tensor product has {} distinct values (cap {run_cap})",
            out.run_count()
        )));
    }
    Ok(out)
}

pub fn direct_sum(x: &SpectrumVector, y: &SpectrumVector) -> SpectrumVector {
    let mut components = Vec::with_capacity(x.dim() + y.dim());
    components.extend_from_slice(&x.components);
    components.extend_from_slice(&y.components);
    components.sort_unstable_by(|a, b| b.cmp(a));
    SpectrumVector { components }
}

/// `x^{⊗k}` as a run-length spectrum, failing once the number of distinct
/// values exceeds `run_cap`.
pub fn tensor_power(x: &SpectrumVector, k: u32, run_cap: usize) -> Result<RunLengthSpectrum> {
    if k == 0 {
        return Err(Error::PreconditionFailed("tensor power needs k >= 1".into()));
    }
    let base = x.to_runs();
    if base.run_count() > run_cap {
        return Err(Error::BudgetExceeded(format!(
            "{} distinct values (cap {run_cap})",
            base.run_count()
        )));
    }
    let mut acc = base.clone();
    for _ in 1..k {
        acc = tensor_spectra(&acc, &base, run_cap)?;
    }
    Ok(acc)
}

/// Canonical form of the flattened tensor product.
pub fn tensor_vector(x: &SpectrumVector, y: &SpectrumVector) -> SpectrumVector {
    tensor(x, y).to_vector()
}
