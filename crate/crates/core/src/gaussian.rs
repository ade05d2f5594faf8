//! Nonzero ideals of the Gaussian integers, keyed by absolute norm.

use crate::error::Result;
use crate::instance::{DfsSource, ElementSource, Monoid};
use crate::integers::check_table;
use crate::monoid::{Grid, PrimeHandle};
use crate::sieve::PrimeBitmap;
use std::f64::consts::PI;

/// Prime ideals with norm <= limit: (1+i) of norm 2, two conjugates of norm p
/// for p = 1 mod 4, and (p) of norm p^2 for p = 3 mod 4.
pub fn gaussian_prime_stream(limit: u64) -> Vec<PrimeHandle> {
    let sieve = PrimeBitmap::new(limit.max(4));
    let mut norms = Vec::new();
    sieve.for_each_prime(2, limit, |p| match p % 4 {
        1 => {
            norms.push(p);
            norms.push(p);
        }
        3 => {
            if p.checked_mul(p).is_some_and(|n| n <= limit) {
                norms.push(p * p);
            }
        }
        _ => norms.push(p),
    });
    norms.sort_unstable();
    norms
        .into_iter()
        .enumerate()
        .map(|(i, n)| PrimeHandle::new(i as u64, n))
        .collect()
}

/// a[n] = number of ideals of norm n, for n <= x.
pub fn ideal_counts(x: u64) -> Result<Vec<u128>> {
    check_table(x)?;
    let x = x as usize;
    let mut a = vec![0u32; x + 1];
    if x >= 1 {
        a[1] = 1;
    }
    for p in gaussian_prime_stream(x as u64) {
        let n = p.norm as usize;
        for m in 1..=x / n {
            a[m * n] += a[m];
        }
    }
    Ok(a.into_iter().map(u128::from).collect())
}

/// Number of ideals with norm <= x.
pub fn ideal_count(x: u64) -> Result<u128> {
    Ok(ideal_counts(x)?.iter().sum())
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Gaussian;

impl Monoid for Gaussian {
    fn name(&self) -> String {
        "gaussian".into()
    }

    fn grid(&self) -> Grid {
        Grid::Dense
    }

    fn kappa(&self) -> f64 {
        PI / 4.0
    }

    fn theta(&self) -> f64 {
        1.0 / 3.0
    }

    fn primes(&self, bound: u64) -> Result<Vec<PrimeHandle>> {
        check_table(bound)?;
        Ok(gaussian_prime_stream(bound))
    }

    fn for_each_prime_class(&self, bound: u64, f: &mut dyn FnMut(u64, f64)) -> Result<()> {
        check_table(bound)?;
        let sieve = PrimeBitmap::new(bound.max(4));
        let inert: Vec<u64> = sieve
            .primes_upto(crate::monoid::iroot(bound, 2))
            .into_iter()
            .filter(|p| p % 4 == 3)
            .map(|p| p * p)
            .collect();
        let mut k = 0;
        sieve.for_each_prime(2, bound, |p| {
            while k < inert.len() && inert[k] < p {
                f(inert[k], 1.0);
                k += 1;
            }
            match p % 4 {
                1 => f(p, 2.0),
                3 => {}
                _ => f(p, 1.0),
            }
        });
        for &n in &inert[k..] {
            f(n, 1.0);
        }
        Ok(())
    }

    fn max_primes_per_norm(&self) -> f64 {
        2.0
    }

    fn norm_counts(&self, bound: u64) -> Result<Vec<u128>> {
        ideal_counts(bound)
    }

    fn elements(&self, bound: u64) -> Result<Box<dyn ElementSource + '_>> {
        Ok(Box::new(DfsSource {
            primes: self.primes(bound)?,
            grid: Grid::Dense,
            bound,
        }))
    }
}
