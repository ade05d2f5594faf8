//! The interface every concrete monoid provides, plus shared enumeration helpers.

use crate::error::Result;
use crate::monoid::{Factorization, Grid, PrimeHandle, Term};

pub trait Monoid: Send + Sync {
    fn name(&self) -> String;
    fn grid(&self) -> Grid;
    /// Leading constant of the element count I(x) ~ kappa x.
    fn kappa(&self) -> f64;
    /// Error exponent: I(x) = kappa x + O(x^theta).
    fn theta(&self) -> f64;

    /// Primes with norm key <= bound, in index order.
    fn primes(&self, bound: u64) -> Result<Vec<PrimeHandle>>;

    /// Calls `f(key, count)` for every norm key <= bound that carries primes,
    /// in increasing key order.
    fn for_each_prime_class(&self, bound: u64, f: &mut dyn FnMut(u64, f64)) -> Result<()>;

    /// Keys up to which `for_each_prime_class` is exact. `None` means every key.
    fn exact_prime_classes(&self) -> Option<u64> {
        None
    }

    /// Most primes sharing one norm, on dense grids.
    fn max_primes_per_norm(&self) -> f64 {
        1.0
    }

    /// Element counts per norm key: entry `k` is the number of elements with key `k`.
    fn norm_counts(&self, bound: u64) -> Result<Vec<u128>>;

    /// A source covering every element with norm key <= bound exactly once.
    fn elements(&self, bound: u64) -> Result<Box<dyn ElementSource + '_>>;

    /// Number of elements with norm key <= bound.
    fn element_count(&self, bound: u64) -> Result<u128> {
        let c = self.norm_counts(bound)?;
        Ok(c.iter().sum())
    }
}

/// Elements split into independent tasks. Visiting every task once visits
/// every element once; the order inside a task is fixed.
pub trait ElementSource: Sync {
    fn tasks(&self) -> usize;
    fn visit(&self, task: usize, f: &mut dyn FnMut(u64, &[Term])) -> Result<()>;
}

/// Depth-first enumeration over a norm-sorted list of primes.
pub struct DfsSource {
    pub primes: Vec<PrimeHandle>,
    pub grid: Grid,
    pub bound: u64,
}

impl DfsSource {
    fn branch(&self, cur: u64, start: usize, stack: &mut Vec<Term>, f: &mut dyn FnMut(u64, &[Term])) {
        let grid = self.grid;
        let Some(room) = grid.quotient(self.bound, cur) else {
            return;
        };
        for j in start..self.primes.len() {
            let p = self.primes[j];
            if p.norm > room {
                break;
            }
            self.powers(cur, j, stack, f);
        }
    }

    fn powers(&self, cur: u64, j: usize, stack: &mut Vec<Term>, f: &mut dyn FnMut(u64, &[Term])) {
        let p = self.primes[j];
        let mut n = cur;
        let mut e = 0;
        while let Some(m) = self.grid.mul(n, p.norm).filter(|&m| m <= self.bound) {
            n = m;
            e += 1;
            stack.push((p, e));
            f(n, stack);
            self.branch(n, j + 1, stack, f);
            stack.pop();
        }
    }
}

impl ElementSource for DfsSource {
    fn tasks(&self) -> usize {
        let room = self.bound;
        1 + self.primes.partition_point(|p| p.norm <= room)
    }

    fn visit(&self, task: usize, f: &mut dyn FnMut(u64, &[Term])) -> Result<()> {
        if task == 0 {
            if self.grid.identity() <= self.bound {
                f(self.grid.identity(), &[]);
            }
            return Ok(());
        }
        let mut stack = Vec::with_capacity(16);
        self.powers(self.grid.identity(), task - 1, &mut stack, f);
        Ok(())
    }
}

/// Every element up to a bound, sorted by norm, factorizations in one flat buffer.
#[derive(Clone, Debug, Default)]
pub struct ElementTable {
    norms: Vec<u64>,
    offsets: Vec<usize>,
    terms: Vec<Term>,
}

impl ElementTable {
    pub fn build(source: &dyn ElementSource) -> Result<Self> {
        let mut raw: Vec<(u64, usize, usize)> = Vec::new();
        let mut terms = Vec::new();
        for t in 0..source.tasks() {
            source.visit(t, &mut |n, ts| {
                raw.push((n, terms.len(), ts.len()));
                terms.extend_from_slice(ts);
            })?;
        }
        raw.sort_by_key(|r| r.0);
        let mut table = ElementTable {
            norms: Vec::with_capacity(raw.len()),
            offsets: Vec::with_capacity(raw.len() + 1),
            terms: Vec::with_capacity(terms.len()),
        };
        table.offsets.push(0);
        for (n, s, l) in raw {
            table.norms.push(n);
            table.terms.extend_from_slice(&terms[s..s + l]);
            table.offsets.push(table.terms.len());
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn norm(&self, i: usize) -> u64 {
        self.norms[i]
    }

    pub fn norms(&self) -> &[u64] {
        &self.norms
    }

    pub fn terms(&self, i: usize) -> &[Term] {
        &self.terms[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn factorization(&self, i: usize) -> Factorization {
        Factorization::from_sorted(self.terms(i))
    }

    /// Number of elements with norm key <= y.
    pub fn count_upto(&self, y: u64) -> usize {
        self.norms.partition_point(|&n| n <= y)
    }
}
