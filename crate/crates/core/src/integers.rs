//! The positive integers under multiplication.

use crate::error::{invalid, Error, Result};
use crate::instance::{ElementSource, Monoid};
use crate::monoid::{iroot, Factorization, Grid, PrimeHandle, Term};
use crate::sieve::PrimeBitmap;

/// Largest omega of any integer below 2^32.
const MAX_TERMS: usize = 10;

#[derive(Clone, Copy, Debug)]
pub struct IntegerOptions {
    /// Sieve segment length, in odd numbers.
    pub segment: usize,
    /// Integers factored per block; one block is one unit of parallel work.
    pub block: usize,
    /// Upper bound on table memory in bytes.
    pub memory_budget: u64,
}

impl Default for IntegerOptions {
    fn default() -> Self {
        IntegerOptions {
            segment: 1 << 22,
            block: 1 << 18,
            memory_budget: 2 << 30,
        }
    }
}

/// Sieve tables for factoring every integer up to `limit`.
pub struct IntegerInstance {
    limit: u64,
    block: usize,
    table: PrimeBitmap,
    base: Vec<u32>,
}

impl IntegerInstance {
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_options(limit, IntegerOptions::default())
    }

    pub fn with_options(limit: u64, opts: IntegerOptions) -> Result<Self> {
        if limit > u32::MAX as u64 {
            return Err(Error::Resource {
                what: "integer sieve limit",
                requested: limit,
                budget: u32::MAX as u64,
            });
        }
        let need = PrimeBitmap::footprint(limit);
        if need > opts.memory_budget {
            return Err(Error::Resource {
                what: "prime table bytes",
                requested: need,
                budget: opts.memory_budget,
            });
        }
        if opts.block == 0 {
            return invalid("block size must be positive");
        }
        let table = PrimeBitmap::with_segment(limit.max(4), opts.segment);
        let base = table
            .primes_upto(iroot(limit, 2))
            .into_iter()
            .map(|p| p as u32)
            .collect();
        Ok(IntegerInstance {
            limit,
            block: opts.block,
            table,
            base,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn table(&self) -> &PrimeBitmap {
        &self.table
    }

    fn handle(&self, p: u64) -> PrimeHandle {
        PrimeHandle::new(self.table.pi(p) - 1, p)
    }

    pub fn prime_stream(&self) -> Vec<PrimeHandle> {
        self.table
            .primes_upto(self.limit)
            .into_iter()
            .enumerate()
            .map(|(i, p)| PrimeHandle::new(i as u64, p))
            .collect()
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 || n > self.limit {
            return invalid(format!("{n} outside 1..={}", self.limit));
        }
        let mut terms = Vec::new();
        let mut r = n;
        for (k, &p) in self.base.iter().enumerate() {
            let p = p as u64;
            if p * p > r {
                break;
            }
            let mut e = 0;
            while r % p == 0 {
                r /= p;
                e += 1;
            }
            if e > 0 {
                terms.push((PrimeHandle::new(k as u64, p), e));
            }
        }
        if r > 1 {
            terms.push((self.handle(r), 1));
        }
        Factorization::new(terms)
    }

    /// Factors every n in [lo, hi] and calls `f(n, terms)` in increasing order.
    pub fn for_each_factorization(&self, lo: u64, hi: u64, f: &mut dyn FnMut(u64, &[Term])) -> Result<()> {
        if lo == 0 || hi > self.limit {
            return invalid(format!("range {lo}..={hi} outside 1..={}", self.limit));
        }
        let mut start = lo;
        while start <= hi {
            let end = hi.min(start + self.block as u64 - 1);
            self.factor_block(start, end, f);
            start = end + 1;
        }
        Ok(())
    }

    fn factor_block(&self, lo: u64, hi: u64, f: &mut dyn FnMut(u64, &[Term])) {
        let len = (hi - lo + 1) as usize;
        let mut rem: Vec<u32> = (lo..=hi).map(|n| n as u32).collect();
        let mut cnt = vec![0u8; len];
        let mut slot_k = vec![0u32; len * MAX_TERMS];
        let mut slot_e = vec![0u8; len * MAX_TERMS];
        for (k, &p) in self.base.iter().enumerate() {
            if (p as u64) * (p as u64) > hi {
                break;
            }
            let first = lo.div_ceil(p as u64) * p as u64;
            let mut j = (first - lo) as usize;
            while j < len {
                let mut r = rem[j] / p;
                let mut e = 1u8;
                while r % p == 0 {
                    r /= p;
                    e += 1;
                }
                rem[j] = r;
                let c = cnt[j] as usize;
                slot_k[j * MAX_TERMS + c] = k as u32;
                slot_e[j * MAX_TERMS + c] = e;
                cnt[j] += 1;
                j += p as usize;
            }
        }
        let mut buf: Vec<Term> = Vec::with_capacity(MAX_TERMS);
        for j in 0..len {
            buf.clear();
            for c in 0..cnt[j] as usize {
                let k = slot_k[j * MAX_TERMS + c] as usize;
                let p = self.base[k] as u64;
                buf.push((PrimeHandle::new(k as u64, p), slot_e[j * MAX_TERMS + c] as u32));
            }
            if rem[j] > 1 {
                buf.push((self.handle(rem[j] as u64), 1));
            }
            f(lo + j as u64, &buf);
        }
    }
}

/// The integers as a [`Monoid`]; sieve tables are built per request.
#[derive(Clone, Copy, Debug, Default)]
pub struct Integers {
    pub options: IntegerOptions,
}

impl Integers {
    pub fn new() -> Self {
        Self::default()
    }
}

struct IntSource {
    inst: IntegerInstance,
    bound: u64,
}

impl ElementSource for IntSource {
    fn tasks(&self) -> usize {
        self.bound.div_ceil(self.inst.block as u64) as usize
    }

    fn visit(&self, task: usize, f: &mut dyn FnMut(u64, &[Term])) -> Result<()> {
        let lo = 1 + task as u64 * self.inst.block as u64;
        let hi = self.bound.min(lo + self.inst.block as u64 - 1);
        if lo <= hi {
            self.inst.factor_block(lo, hi, f);
        }
        Ok(())
    }
}

impl Monoid for Integers {
    fn name(&self) -> String {
        "z".into()
    }

    fn grid(&self) -> Grid {
        Grid::Dense
    }

    fn kappa(&self) -> f64 {
        1.0
    }

    fn theta(&self) -> f64 {
        0.0
    }

    fn primes(&self, bound: u64) -> Result<Vec<PrimeHandle>> {
        Ok(IntegerInstance::with_options(bound, self.options)?.prime_stream())
    }

    fn for_each_prime_class(&self, bound: u64, f: &mut dyn FnMut(u64, f64)) -> Result<()> {
        let inst = IntegerInstance::with_options(bound, self.options)?;
        inst.table.for_each_prime(2, bound, |p| f(p, 1.0));
        Ok(())
    }

    fn norm_counts(&self, bound: u64) -> Result<Vec<u128>> {
        check_table(bound)?;
        let mut v = vec![1u128; bound as usize + 1];
        v[0] = 0;
        Ok(v)
    }

    fn element_count(&self, bound: u64) -> Result<u128> {
        Ok(bound as u128)
    }

    fn elements(&self, bound: u64) -> Result<Box<dyn ElementSource + '_>> {
        let inst = IntegerInstance::with_options(bound, self.options)?;
        Ok(Box::new(IntSource { inst, bound }))
    }
}

pub(crate) fn check_table(bound: u64) -> Result<()> {
    const MAX: u64 = 1 << 31;
    if bound > MAX {
        return Err(Error::Resource {
            what: "per-norm table length",
            requested: bound,
            budget: MAX,
        });
    }
    Ok(())
}
