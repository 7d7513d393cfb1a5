//! Flat-enumeration oracles and random instance generators shared by the
//! integration targets. Nothing here calls into the run-length code paths.

#![allow(dead_code)]

use num::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::Rng;
use schmidt_core::rational::rat;
use schmidt_core::{Rational, SpectrumVector};

pub fn vec_of(items: &[(i64, i64)]) -> SpectrumVector {
    SpectrumVector::new(items.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
}

fn sorted_desc(mut v: Vec<Rational>) -> Vec<Rational> {
    v.sort_by(|a, b| b.cmp(a));
    v
}

/// Every product `a_{i1} ⋯ a_{ik}`, sorted nonincreasing.
pub fn flat_power(a: &[Rational], k: u32) -> Vec<Rational> {
    let mut acc = vec![Rational::one()];
    for _ in 0..k {
        acc = acc.iter().flat_map(|p| a.iter().map(move |q| p * q)).collect();
    }
    sorted_desc(acc)
}

pub fn flat_tensor(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    sorted_desc(a.iter().flat_map(|p| b.iter().map(move |q| p * q)).collect())
}

fn padded(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let n = a.len().max(b.len());
    let mut a = sorted_desc(a.to_vec());
    let mut b = sorted_desc(b.to_vec());
    a.resize(n, Rational::zero());
    b.resize(n, Rational::zero());
    (a, b)
}

/// `(holds, first failing prefix length)` by checking every prefix.
pub fn flat_majorizes(a: &[Rational], b: &[Rational]) -> (bool, Option<usize>) {
    let (a, b) = padded(a, b);
    let (mut sa, mut sb) = (Rational::zero(), Rational::zero());
    for l in 0..a.len() {
        sa += &a[l];
        sb += &b[l];
        if sa > sb {
            return (false, Some(l + 1));
        }
    }
    (true, None)
}

/// `min_l E_l(a) / E_l(b)` over every `l` with `E_l(b) > 0`, smallest `l`
/// on ties.
pub fn flat_probability(a: &[Rational], b: &[Rational]) -> (Rational, usize) {
    let (a, b) = padded(a, b);
    let n = a.len();
    let mut best: Option<(Rational, usize)> = None;
    for l in 1..=n {
        let ea: Rational = a[l - 1..].iter().sum();
        let eb: Rational = b[l - 1..].iter().sum();
        if !eb.is_positive() {
            continue;
        }
        let r = ea / eb;
        if best.as_ref().is_none_or(|(v, _)| r < *v) {
            best = Some((r, l));
        }
    }
    best.unwrap_or((Rational::one(), 1))
}

pub fn pow(l: &Rational, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, _| acc * l)
}

/// Random composition of `total` into `n` nonnegative integer parts.
pub fn composition(rng: &mut StdRng, total: i64, n: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(0..=total)).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Random normalized vector with entries in `(1/den)ℤ`.
pub fn random_vector(rng: &mut StdRng, n: usize, den: i64) -> SpectrumVector {
    SpectrumVector::new(composition(rng, den, n).into_iter().map(|a| rat(a, den)).collect()).unwrap()
}

/// Same, but every entry strictly positive (needs `den ≥ n`).
pub fn random_positive(rng: &mut StdRng, n: usize, den: i64) -> SpectrumVector {
    let parts = composition(rng, den - n as i64, n);
    SpectrumVector::new(parts.into_iter().map(|a| rat(a + 1, den)).collect()).unwrap()
}

/// Random `x ≺ y` obtained by applying a few T-transforms to `y`.
pub fn majorized_by(rng: &mut StdRng, y: &SpectrumVector) -> SpectrumVector {
    let mut c = y.components().to_vec();
    let n = c.len();
    if n < 2 {
        return y.clone();
    }
    for _ in 0..rng.gen_range(1..=3) {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let t = rat(rng.gen_range(0..=4), 4);
        let (a, b) = (c[i].clone(), c[j].clone());
        c[i] = &t * &a + (Rational::one() - &t) * &b;
        c[j] = &t * &b + (Rational::one() - &t) * &a;
    }
    SpectrumVector::new(c).unwrap()
}

/// `(x, y)` sharing the largest component with equal multiplicity.
pub fn shared_head_pair(rng: &mut StdRng, n: usize, den: i64) -> (SpectrumVector, SpectrumVector) {
    loop {
        let y = random_vector(rng, n, den);
        let t = y.leading_multiplicity();
        if t >= n - 1 {
            continue;
        }
        let head = y.largest().clone();
        let rest_mass: i64 = {
            let r: Rational = y.components()[t..].iter().sum();
            (r * Rational::from_integer(den.into())).to_integer().try_into().unwrap()
        };
        let parts = composition(rng, rest_mass, n - t);
        let mut comps: Vec<Rational> = vec![head.clone(); t];
        comps.extend(parts.into_iter().map(|a| rat(a, den)));
        let x = SpectrumVector::new(comps).unwrap();
        if x.leading_multiplicity() == t && *x.largest() == head {
            return (x, y);
        }
    }
}

/// `(x, y)` whose smallest components equal `scale · y_n > 0`, with equal
/// trailing multiplicity. `scale = 1` gives the deterministic tail shape.
pub fn shared_tail_pair(
    rng: &mut StdRng,
    n: usize,
    den: i64,
    scale: &Rational,
) -> (SpectrumVector, SpectrumVector) {
    loop {
        let y = random_positive(rng, n, den);
        let t = y.trailing_multiplicity();
        if t >= n - 1 {
            continue;
        }
        let low = scale * y.smallest();
        let rest = Rational::one() - &low * Rational::from_integer((t as i64).into());
        // spread the remaining mass over n - t entries above `low`
        let fine = den * 4;
        let weights = composition(rng, fine, n - t);
        let free = &rest - &low * Rational::from_integer(((n - t) as i64).into());
        if !free.is_positive() {
            continue;
        }
        let mut comps: Vec<Rational> = weights
            .into_iter()
            .map(|w| &low + &free * rat(w, fine))
            .collect();
        comps.extend(std::iter::repeat_n(low.clone(), t));
        let x = SpectrumVector::new(comps).unwrap();
        if x.trailing_multiplicity() == t && *x.smallest() == low {
            return (x, y);
        }
    }
}
