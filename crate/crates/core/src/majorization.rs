//! Majorization and maximal single-shot conversion probability.
//!
//! Both relations are evaluated on run-length spectra. Over a stretch where
//! both operands have constant components, prefix and tail sums are affine in
//! the index, so:
//!
//! * the prefix difference is affine and its first crossing above zero can be
//!   solved for directly;
//! * the tail-sum ratio `E_l(x) / E_l(y)` is monotone, so its minimum sits at
//!   a stretch endpoint (or one before the endpoint, when `E_l(y)` reaches
//!   zero there).

use std::borrow::Cow;

use num::{BigInt, One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{is_unit_interval, Rational};
use crate::spectrum::{RunLengthSpectrum, SpectrumVector};

/// Anything that can be viewed as a run-length spectrum.
pub trait AsRuns {
    fn as_runs(&self) -> Cow<'_, RunLengthSpectrum>;
}

impl AsRuns for RunLengthSpectrum {
    fn as_runs(&self) -> Cow<'_, RunLengthSpectrum> {
        Cow::Borrowed(self)
    }
}

impl AsRuns for SpectrumVector {
    fn as_runs(&self) -> Cow<'_, RunLengthSpectrum> {
        Cow::Owned(self.to_runs())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MajorizationVerdict {
    pub holds: bool,
    /// Smallest `l` whose prefix sum of `x` exceeds that of `y`.
    pub failing_index: Option<u64>,
    #[serde(serialize_with = "crate::rational::serialize_opt")]
    pub prefix_gap: Option<Rational>,
}

impl MajorizationVerdict {
    fn holds() -> Self {
        MajorizationVerdict {
            holds: true,
            failing_index: None,
            prefix_gap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformProbability {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub value: Rational,
    pub minimizing_index: u64,
}

/// `E_l(x) = Σ_{i ≥ l} x_i`, 1-based.
pub fn tail_sum(x: &SpectrumVector, l: usize) -> Result<Rational> {
    if l == 0 || l > x.dim() {
        return Err(Error::IndexOutOfRange {
            index: l,
            len: x.dim(),
        });
    }
    Ok(x.components()[l - 1..].iter().sum())
}

/// Both operands padded with zeros to a common length, after a mass check.
fn aligned(x: &RunLengthSpectrum, y: &RunLengthSpectrum) -> Result<(RunLengthSpectrum, RunLengthSpectrum, Rational)> {
    let (mx, my) = (x.mass(), y.mass());
    if mx != my {
        return Err(Error::mass_mismatch(&mx, &my));
    }
    let n = x.total_count().max(y.total_count());
    Ok((x.padded(n), y.padded(n), mx))
}

/// Maximal stretches on which both spectra are constant.
struct Segments<'a> {
    x: &'a [(Rational, u64)],
    y: &'a [(Rational, u64)],
    ix: usize,
    iy: usize,
    left_x: u64,
    left_y: u64,
}

impl<'a> Segments<'a> {
    fn new(x: &'a RunLengthSpectrum, y: &'a RunLengthSpectrum) -> Self {
        Segments {
            x: x.runs(),
            y: y.runs(),
            ix: 0,
            iy: 0,
            left_x: x.runs().first().map_or(0, |r| r.1),
            left_y: y.runs().first().map_or(0, |r| r.1),
        }
    }
}

impl<'a> Iterator for Segments<'a> {
    /// (x value, y value, length)
    type Item = (&'a Rational, &'a Rational, u64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.ix >= self.x.len() || self.iy >= self.y.len() {
            return None;
        }
        let len = self.left_x.min(self.left_y);
        let item = (&self.x[self.ix].0, &self.y[self.iy].0, len);
        self.left_x -= len;
        self.left_y -= len;
        if self.left_x == 0 {
            self.ix += 1;
            self.left_x = self.x.get(self.ix).map_or(0, |r| r.1);
        }
        if self.left_y == 0 {
            self.iy += 1;
            self.left_y = self.y.get(self.iy).map_or(0, |r| r.1);
        }
        Some(item)
    }
}

/// Decides `x ≺ y`. Shorter operand is zero-padded; masses must agree.
pub fn majorizes<A, B>(x: &A, y: &B) -> Result<MajorizationVerdict>
where
    A: AsRuns + ?Sized,
    B: AsRuns + ?Sized,
{
    let (x, y, _) = aligned(&x.as_runs(), &y.as_runs())?;
    // diff = Σ_{i≤pos} x_i - Σ_{i≤pos} y_i, kept ≤ 0 while the relation holds
    let mut diff = Rational::zero();
    let mut pos: u64 = 0;
    for (vx, vy, len) in Segments::new(&x, &y) {
        let slope = vx - vy;
        if slope.is_positive() {
            // smallest j ≥ 1 with diff + j·slope > 0
            let j = (-&diff / &slope).floor().to_integer() + BigInt::one();
            if j <= BigInt::from(len) {
                let gap = &diff + &slope * &j;
                let j: u64 = j.try_into().expect("bounded by segment length");
                return Ok(MajorizationVerdict {
                    holds: false,
                    failing_index: Some(pos + j),
                    prefix_gap: Some(gap),
                });
            }
        }
        diff += slope * BigInt::from(len);
        pos += len;
    }
    Ok(MajorizationVerdict::holds())
}

/// Maximal probability of converting `x` into `y`:
/// `min_l E_l(x) / E_l(y)` over `l` with `E_l(y) > 0`.
///
/// Indices with `E_l(y) = 0` are skipped. When `E_l(x) = 0` but `E_l(y) > 0`
/// the ratio, and hence the result, is zero. Ties go to the smallest `l`.
pub fn transform_probability<A, B>(x: &A, y: &B) -> Result<TransformProbability>
where
    A: AsRuns + ?Sized,
    B: AsRuns + ?Sized,
{
    let (x, y, mass) = aligned(&x.as_runs(), &y.as_runs())?;
    let n = x.total_count();

    // Candidate prefix lengths p (tail index l = p + 1): every segment start,
    // every segment end and the position just before each end.
    let mut best: Option<(Rational, u64)> = None;
    let mut consider = |p: u64, px: &Rational, py: &Rational| {
        if p >= n {
            return;
        }
        let ey = &mass - py;
        if !ey.is_positive() {
            return;
        }
        let ratio = (&mass - px) / ey;
        let l = p + 1;
        match &best {
            Some((v, bl)) if *v < ratio || (*v == ratio && *bl <= l) => {}
            _ => best = Some((ratio, l)),
        }
    };

    let (mut px, mut py) = (Rational::zero(), Rational::zero());
    let mut pos = 0u64;
    for (vx, vy, len) in Segments::new(&x, &y) {
        consider(pos, &px, &py);
        let bx = BigInt::from(len);
        let end_x = &px + vx * &bx;
        let end_y = &py + vy * &bx;
        if len > 1 {
            consider(pos + len - 1, &(&end_x - vx), &(&end_y - vy));
        }
        pos += len;
        px = end_x;
        py = end_y;
        consider(pos, &px, &py);
    }

    let (value, minimizing_index) = best.unwrap_or((Rational::one(), 1));
    Ok(TransformProbability {
        value,
        minimizing_index,
    })
}

/// `x ∈ S(y)`.
pub fn in_s(x: &SpectrumVector, y: &SpectrumVector) -> Result<bool> {
    Ok(majorizes(x, y)?.holds)
}

/// `x ∈ S^λ(y)`: `P(x → y) ≥ λ`.
pub fn in_s_lambda(x: &SpectrumVector, y: &SpectrumVector, lambda: &Rational) -> Result<bool> {
    check_threshold(lambda)?;
    Ok(transform_probability(x, y)?.value >= *lambda)
}

pub(crate) fn check_threshold(lambda: &Rational) -> Result<()> {
    if is_unit_interval(lambda) {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(format!("λ = {lambda} is outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn v(items: &[(i64, i64)]) -> SpectrumVector {
        SpectrumVector::new(items.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    fn jp99() -> (SpectrumVector, SpectrumVector) {
        (
            v(&[(2, 5), (2, 5), (1, 10), (1, 10)]),
            v(&[(1, 2), (1, 4), (1, 4), (0, 1)]),
        )
    }

    // Direct evaluation over every l, kept independent of the breakpoint path.
    fn brute_majorizes(x: &[Rational], y: &[Rational]) -> Option<(u64, Rational)> {
        let (mut sx, mut sy) = (Rational::zero(), Rational::zero());
        for (i, (a, b)) in x.iter().zip(y).enumerate() {
            sx += a;
            sy += b;
            if sx > sy {
                return Some((i as u64 + 1, &sx - &sy));
            }
        }
        None
    }

    fn brute_probability(x: &[Rational], y: &[Rational]) -> (Rational, u64) {
        let mut best: Option<(Rational, u64)> = None;
        for l in 0..x.len() {
            let ex: Rational = x[l..].iter().sum();
            let ey: Rational = y[l..].iter().sum();
            if ey.is_zero() {
                continue;
            }
            let r = ex / ey;
            if best.as_ref().map_or(true, |(b, _)| r < *b) {
                best = Some((r, l as u64 + 1));
            }
        }
        best.unwrap()
    }

    #[test]
    fn tail_sum_examples() {
        let (x, _) = jp99();
        assert_eq!(tail_sum(&x, 3).unwrap(), rat(1, 5));
        assert_eq!(tail_sum(&x, 1).unwrap(), x.mass());
        assert_eq!(tail_sum(&x, 4).unwrap(), rat(1, 10));
        assert!(matches!(tail_sum(&x, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(tail_sum(&x, 5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn jp99_pair_is_not_majorized() {
        let (x, y) = jp99();
        let verdict = majorizes(&x, &y).unwrap();
        assert!(!verdict.holds);
        assert_eq!(verdict.failing_index, Some(2));
        assert_eq!(verdict.prefix_gap, Some(rat(1, 20)));
    }

    #[test]
    fn reflexive_and_uniform() {
        let (x, y) = jp99();
        assert!(majorizes(&x, &x).unwrap().holds);
        let uniform = v(&[(1, 4), (1, 4), (1, 4), (1, 4)]);
        assert!(majorizes(&uniform, &y).unwrap().holds);
        assert!(majorizes(&uniform, &x).unwrap().holds);
    }

    #[test]
    fn mass_mismatch_is_reported() {
        let x = v(&[(1, 2), (1, 2)]);
        let y = v(&[(1, 2), (1, 4)]);
        assert!(matches!(majorizes(&x, &y), Err(Error::MassMismatch { .. })));
        assert!(matches!(transform_probability(&x, &y), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn dimension_mismatch_is_zero_padded() {
        let x = v(&[(1, 2), (1, 2)]);
        let y = v(&[(1, 2), (1, 2), (0, 1)]);
        assert!(majorizes(&x, &y).unwrap().holds);
        assert!(majorizes(&y, &x).unwrap().holds);
    }

    #[test]
    fn probability_examples() {
        let (x, y) = jp99();
        let p = transform_probability(&x, &y).unwrap();
        assert_eq!(p.value, rat(4, 5));
        assert_eq!(p.minimizing_index, 3);

        let a = v(&[(1, 2), (1, 2)]);
        let b = v(&[(4, 5), (1, 5)]);
        assert_eq!(transform_probability(&a, &b).unwrap().value, int(1));

        let p = transform_probability(&b, &a).unwrap();
        assert_eq!(p.value, rat(2, 5));
        assert_eq!(p.minimizing_index, 2);
    }

    #[test]
    fn probability_zero_when_target_has_higher_rank() {
        let x = v(&[(1, 1), (0, 1)]);
        let y = v(&[(1, 2), (1, 2)]);
        assert_eq!(transform_probability(&x, &y).unwrap().value, int(0));
        assert!(!in_s_lambda(&x, &y, &rat(1, 2)).unwrap());
    }

    #[test]
    fn lambda_membership() {
        let (x, y) = jp99();
        assert!(in_s_lambda(&x, &y, &rat(4, 5)).unwrap());
        assert!(!in_s_lambda(&x, &y, &rat(81, 100)).unwrap());
        assert!(in_s_lambda(&x, &x, &int(1)).unwrap());
        assert!(!in_s(&x, &y).unwrap());
        assert!(matches!(
            in_s_lambda(&x, &y, &rat(3, 2)),
            Err(Error::InvalidThreshold(_))
        ));
    }

    #[test]
    fn failing_index_inside_long_run() {
        // x has a long flat run; the first violation falls mid-run.
        let x = v(&[(1, 5), (1, 5), (1, 5), (1, 5), (1, 5)]);
        let y = v(&[(1, 4), (1, 4), (1, 4), (1, 4), (0, 1)]);
        assert!(majorizes(&x, &y).unwrap().holds);
        let verdict = majorizes(&y, &x).unwrap();
        assert_eq!(verdict.failing_index, Some(1));
        let flat = brute_majorizes(y.components(), x.components()).unwrap();
        assert_eq!(verdict.failing_index, Some(flat.0));
        assert_eq!(verdict.prefix_gap, Some(flat.1));
    }

    #[test]
    fn breakpoints_match_brute_force_on_fixed_cases() {
        let cases = [
            (vec![(3, 10), (3, 10), (3, 10), (1, 10)], vec![(1, 2), (1, 6), (1, 6), (1, 6)]),
            (vec![(1, 3), (1, 3), (1, 3), (0, 1)], vec![(1, 2), (1, 4), (1, 8), (1, 8)]),
            (vec![(1, 2), (1, 4), (1, 4), (0, 1)], vec![(2, 5), (2, 5), (1, 10), (1, 10)]),
        ];
        for (a, b) in cases {
            let (x, y) = (v(&a), v(&b));
            let fast = transform_probability(&x, &y).unwrap();
            let slow = brute_probability(x.components(), y.components());
            assert_eq!((fast.value, fast.minimizing_index), slow);
            let verdict = majorizes(&x, &y).unwrap();
            let flat = brute_majorizes(x.components(), y.components());
            assert_eq!(verdict.failing_index, flat.as_ref().map(|f| f.0));
            assert_eq!(verdict.prefix_gap, flat.map(|f| f.1));
        }
    }
}
