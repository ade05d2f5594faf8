//! Elements of a free abelian monoid, stored as factorizations over prime handles.

use crate::error::{invalid, Error, Result};
use std::fmt;

/// How norms are keyed. Dense grids key an element by its integer norm,
/// graded grids by its degree (norm `q^degree`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grid {
    Dense,
    Graded { q: u64 },
}

impl Grid {
    pub fn identity(self) -> u64 {
        match self {
            Grid::Dense => 1,
            Grid::Graded { .. } => 0,
        }
    }

    pub fn is_dense(self) -> bool {
        matches!(self, Grid::Dense)
    }

    /// Key of the product of two elements with keys `a` and `b`.
    pub fn mul(self, a: u64, b: u64) -> Option<u64> {
        match self {
            Grid::Dense => a.checked_mul(b),
            Grid::Graded { .. } => a.checked_add(b),
        }
    }

    pub fn pow(self, a: u64, k: u32) -> Option<u64> {
        match self {
            Grid::Dense => a.checked_pow(k),
            Grid::Graded { .. } => a.checked_mul(k as u64),
        }
    }

    /// Largest key `y` with `a * y <= x`, or `None` if even the identity does not fit.
    pub fn quotient(self, x: u64, a: u64) -> Option<u64> {
        match self {
            Grid::Dense => {
                if a == 0 || a > x {
                    None
                } else {
                    Some(x / a)
                }
            }
            Grid::Graded { .. } => x.checked_sub(a),
        }
    }

    /// Largest key `y` with `y^k <= x`.
    pub fn root(self, x: u64, k: u32) -> u64 {
        match self {
            Grid::Dense => iroot(x, k),
            Grid::Graded { .. } => x / k as u64,
        }
    }

    /// Natural log of the norm with this key.
    pub fn ln_norm(self, key: u64) -> f64 {
        match self {
            Grid::Dense => (key as f64).ln(),
            Grid::Graded { q } => key as f64 * (q as f64).ln(),
        }
    }

    /// The norm itself as a float.
    pub fn norm_value(self, key: u64) -> f64 {
        match self {
            Grid::Dense => key as f64,
            Grid::Graded { q } => (q as f64).powf(key as f64),
        }
    }
}

/// A norm key tagged with its grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NormKey {
    pub grid: Grid,
    pub key: u64,
}

impl fmt::Display for NormKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.grid {
            Grid::Dense => write!(f, "{}", self.key),
            Grid::Graded { .. } => write!(f, "d{}", self.key),
        }
    }
}

/// floor(x^(1/k))
pub fn iroot(x: u64, k: u32) -> u64 {
    if k == 0 {
        panic!("iroot with k = 0");
    }
    if k == 1 || x < 2 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64) as u64;
    while r > 0 && r.checked_pow(k).map_or(true, |v| v > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeHandle {
    /// Position in the instance's enumeration of primes, ordered by norm.
    pub index: u64,
    pub norm: u64,
}

impl PrimeHandle {
    pub fn new(index: u64, norm: u64) -> Self {
        PrimeHandle { index, norm }
    }
}

pub type Term = (PrimeHandle, u32);

pub fn check_h(h: u32) -> Result<()> {
    if !(2..=64).contains(&h) {
        return invalid(format!("h must be in 2..=64, got {h}"));
    }
    Ok(())
}

pub fn omega(terms: &[Term]) -> u32 {
    terms.len() as u32
}

pub fn big_omega(terms: &[Term]) -> u32 {
    terms.iter().map(|t| t.1).sum()
}

pub fn is_h_free(terms: &[Term], h: u32) -> bool {
    terms.iter().all(|t| t.1 < h)
}

pub fn is_h_full(terms: &[Term], h: u32) -> bool {
    terms.iter().all(|t| t.1 >= h)
}

pub fn moebius(terms: &[Term]) -> i32 {
    if terms.iter().any(|t| t.1 > 1) {
        0
    } else if terms.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn norm_of(terms: &[Term], grid: Grid) -> Result<u64> {
    let mut n = grid.identity();
    for &(p, e) in terms {
        let pe = grid.pow(p.norm, e).ok_or(Error::Overflow("element norm"))?;
        n = grid.mul(n, pe).ok_or(Error::Overflow("element norm"))?;
    }
    Ok(n)
}

/// An element, as prime handles with positive multiplicities sorted by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Factorization {
    terms: Vec<Term>,
}

impl Factorization {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(mut terms: Vec<Term>) -> Result<Self> {
        if terms.iter().any(|t| t.1 == 0) {
            return invalid("zero multiplicity in factorization");
        }
        terms.sort_unstable_by_key(|t| t.0.index);
        if terms.windows(2).any(|w| w[0].0.index == w[1].0.index) {
            return invalid("repeated prime in factorization");
        }
        Ok(Factorization { terms })
    }

    pub(crate) fn from_sorted(terms: &[Term]) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0.index < w[1].0.index));
        Factorization { terms: terms.to_vec() }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm(&self, grid: Grid) -> Result<u64> {
        norm_of(&self.terms, grid)
    }

    pub fn omega(&self) -> u32 {
        omega(&self.terms)
    }

    pub fn big_omega(&self) -> u32 {
        big_omega(&self.terms)
    }

    pub fn moebius(&self) -> i32 {
        moebius(&self.terms)
    }

    pub fn is_h_free(&self, h: u32) -> Result<bool> {
        check_h(h)?;
        Ok(is_h_free(&self.terms, h))
    }

    pub fn is_h_full(&self, h: u32) -> Result<bool> {
        check_h(h)?;
        Ok(is_h_full(&self.terms, h))
    }

    pub fn mul(&self, other: &Factorization) -> Factorization {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0.index < b[j].0.index) {
                terms.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0.index < a[i].0.index {
                terms.push(b[j]);
                j += 1;
            } else {
                terms.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        Factorization { terms }
    }

    /// Splits into the part with multiplicities below `h` and the part with
    /// multiplicities at least `h`. The two parts are coprime and the first is
    /// h-free, the second h-full.
    pub fn split_free_full(&self, h: u32) -> Result<(Factorization, Factorization)> {
        check_h(h)?;
        let (lo, hi): (Vec<Term>, Vec<Term>) = self.terms.iter().partition(|t| t.1 < h);
        Ok((Factorization { terms: lo }, Factorization { terms: hi }))
    }
}

/// Evaluates sum over d with d^h | m of mu(d) and compares it with [m is h-free].
/// Returns the sum; errors if the identity fails.
pub fn moebius_identity_check(m: &Factorization, h: u32) -> Result<i64> {
    check_h(h)?;
    let caps: Vec<u32> = m.terms.iter().map(|t| t.1 / h).collect();
    let mut exps = vec![0u32; caps.len()];
    let mut total = 0i64;
    loop {
        let d: Vec<Term> = m
            .terms
            .iter()
            .zip(&exps)
            .filter(|(_, &e)| e > 0)
            .map(|(t, &e)| (t.0, e))
            .collect();
        total += moebius(&d) as i64;
        let mut k = 0;
        while k < caps.len() && exps[k] == caps[k] {
            exps[k] = 0;
            k += 1;
        }
        if k == caps.len() {
            break;
        }
        exps[k] += 1;
    }
    let expected = is_h_free(&m.terms, h) as i64;
    if total != expected {
        return Err(Error::Consistency(format!(
            "moebius sum {total} but h-free indicator {expected}"
        )));
    }
    Ok(total)
}
