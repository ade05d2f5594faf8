//! Exact counts, moments and normal-order violation counts over subsets of a monoid.

use crate::error::{invalid, Error, Result};
use crate::instance::{ElementTable, Monoid};
use crate::monoid::{big_omega, check_h, is_h_free, is_h_full, omega, Grid, PrimeHandle, Term};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subset {
    All,
    HFree(u32),
    HFull(u32),
    /// Neither h-free nor h-full.
    Neither(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arith {
    Omega,
    BigOmega,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Statistic {
    Count,
    Moment { of: Arith, k: u32 },
    /// Fraction of members with |f(m) - s loglog N(m)| > epsilon s loglog N(m),
    /// where s = h for Omega over h-full elements and 1 otherwise.
    Violation { of: Arith, epsilon: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HfullRoute {
    /// Enumerate a0^h a1^(h+1) ... a_{h-1}^(2h-1).
    #[default]
    Tuples,
    /// Stream every element and keep the h-full ones.
    Filter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusRequest {
    pub subset: Subset,
    pub excluded: Vec<PrimeHandle>,
    pub statistic: Statistic,
    pub checkpoints: Vec<u64>,
    pub workers: usize,
    pub route: HfullRoute,
}

impl CensusRequest {
    pub fn new(subset: Subset, statistic: Statistic, checkpoints: &[u64]) -> Self {
        CensusRequest {
            subset,
            excluded: Vec::new(),
            statistic,
            checkpoints: checkpoints.to_vec(),
            workers: 1,
            route: HfullRoute::Tuples,
        }
    }

    pub fn excluding(mut self, primes: &[PrimeHandle]) -> Self {
        self.excluded = primes.to_vec();
        self
    }

    pub fn workers(mut self, w: usize) -> Self {
        self.workers = w;
        self
    }

    pub fn route(mut self, r: HfullRoute) -> Self {
        self.route = r;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CensusValue {
    Integer(u128),
    Fraction { num: u128, den: u128 },
}

impl CensusValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            CensusValue::Integer(v) => v as f64,
            CensusValue::Fraction { den: 0, .. } => f64::NAN,
            CensusValue::Fraction { num, den } => num as f64 / den as f64,
        }
    }

    pub fn integer(&self) -> Option<u128> {
        match *self {
            CensusValue::Integer(v) => Some(v),
            _ => None,
        }
    }
}

impl std::fmt::Display for CensusValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CensusValue::Integer(v) => write!(f, "{v}"),
            CensusValue::Fraction { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusResult {
    pub rows: Vec<(u64, CensusValue)>,
}

impl CensusResult {
    pub fn value(&self, x: u64) -> Option<CensusValue> {
        self.rows.iter().find(|r| r.0 == x).map(|r| r.1)
    }

    pub fn last(&self) -> CensusValue {
        self.rows.last().expect("census has at least one checkpoint").1
    }
}

pub fn subset_h(s: Subset) -> Option<u32> {
    match s {
        Subset::All => None,
        Subset::HFree(h) | Subset::HFull(h) | Subset::Neither(h) => Some(h),
    }
}

fn member(s: Subset, t: &[Term]) -> bool {
    match s {
        Subset::All => true,
        Subset::HFree(h) => is_h_free(t, h),
        Subset::HFull(h) => is_h_full(t, h),
        Subset::Neither(h) => !is_h_free(t, h) && !is_h_full(t, h),
    }
}

struct Plan {
    grid: Grid,
    cps: Vec<u64>,
    stat: Statistic,
    scale: f64,
}

#[derive(Clone)]
struct Acc {
    a: Vec<u128>,
    b: Vec<u128>,
}

impl Acc {
    fn new(n: usize) -> Self {
        Acc { a: vec![0; n], b: vec![0; n] }
    }

    fn merge(mut self, o: Acc) -> Acc {
        for (x, y) in self.a.iter_mut().zip(o.a) {
            *x += y;
        }
        for (x, y) in self.b.iter_mut().zip(o.b) {
            *x += y;
        }
        self
    }
}

impl Plan {
    fn bucket(&self, n: u64) -> Option<usize> {
        let b = self.cps.partition_point(|&c| c < n);
        (b < self.cps.len()).then_some(b)
    }

    fn add(&self, acc: &mut Acc, n: u64, om: u32, big: u32) {
        let Some(b) = self.bucket(n) else { return };
        match self.stat {
            Statistic::Count => acc.a[b] += 1,
            Statistic::Moment { of, k } => {
                let f = match of {
                    Arith::Omega => om,
                    Arith::BigOmega => big,
                } as u128;
                acc.a[b] += f.pow(k);
            }
            Statistic::Violation { of, epsilon } => {
                let ln = self.grid.ln_norm(n);
                if ln <= 1.0 {
                    return;
                }
                let l = self.scale * ln.ln();
                let f = match of {
                    Arith::Omega => om,
                    Arith::BigOmega => big,
                } as f64;
                acc.b[b] += 1;
                if (f - l).abs() > epsilon * l {
                    acc.a[b] += 1;
                }
            }
        }
    }

    fn finish(&self, acc: Acc) -> CensusResult {
        let mut rows = Vec::with_capacity(self.cps.len());
        let (mut a, mut b) = (0u128, 0u128);
        for (i, &c) in self.cps.iter().enumerate() {
            a += acc.a[i];
            b += acc.b[i];
            let v = match self.stat {
                Statistic::Violation { .. } => CensusValue::Fraction { num: a, den: b },
                _ => CensusValue::Integer(a),
            };
            rows.push((c, v));
        }
        CensusResult { rows }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn excluded_hit(excl: &[u64], t: &[Term]) -> bool {
    !excl.is_empty() && t.iter().any(|x| excl.binary_search(&x.0.index).is_ok())
}

pub fn run(inst: &dyn Monoid, req: &CensusRequest) -> Result<CensusResult> {
    if req.checkpoints.is_empty() {
        return invalid("no checkpoints");
    }
    if req.workers == 0 {
        return invalid("workers must be at least 1");
    }
    if let Some(h) = subset_h(req.subset) {
        check_h(h)?;
    }
    match req.statistic {
        Statistic::Moment { k, .. } if !(1..=2).contains(&k) => return invalid("moment order must be 1 or 2"),
        Statistic::Violation { epsilon, .. } if !(epsilon > 0.0 && epsilon.is_finite()) => {
            return invalid("epsilon must be positive")
        }
        _ => {}
    }
    let mut cps = req.checkpoints.clone();
    cps.sort_unstable();
    cps.dedup();
    let scale = match (req.subset, req.statistic) {
        (Subset::HFull(h), Statistic::Violation { of: Arith::BigOmega, .. }) => h as f64,
        _ => 1.0,
    };
    let plan = Plan { grid: inst.grid(), cps, stat: req.statistic, scale };
    let mut excl: Vec<u64> = req.excluded.iter().map(|p| p.index).collect();
    excl.sort_unstable();
    let pool = pool(req.workers)?;
    match (req.subset, req.route) {
        (Subset::HFull(h), HfullRoute::Tuples) => pool.install(|| hfull_tuples(inst, h, &plan, &excl)),
        _ => pool.install(|| stream(inst, req.subset, &plan, &excl)),
    }
}

fn stream(inst: &dyn Monoid, subset: Subset, plan: &Plan, excl: &[u64]) -> Result<CensusResult> {
    let xmax = *plan.cps.last().unwrap();
    let src = inst.elements(xmax)?;
    let n = plan.cps.len();
    let acc = (0..src.tasks())
        .into_par_iter()
        .try_fold(
            || Acc::new(n),
            |mut acc, t| {
                src.visit(t, &mut |norm, terms| {
                    if member(subset, terms) && !excluded_hit(excl, terms) {
                        plan.add(&mut acc, norm, omega(terms), big_omega(terms));
                    }
                })?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| Acc::new(n), |a, b| Ok(a.merge(b)))?;
    Ok(plan.finish(acc))
}

struct Tuples<'a> {
    h: u32,
    grid: Grid,
    table: &'a ElementTable,
    usable: Vec<bool>,
    allowed_prefix: Vec<u64>,
    allowed: Vec<bool>,
    plan: &'a Plan,
    xmax: u64,
}

impl Tuples<'_> {
    fn allowed_upto(&self, y: u64) -> u64 {
        self.allowed_prefix[self.table.count_upto(y)]
    }

    // chosen: (prime, exponent h+j) for the squarefree parts picked so far
    fn level(&self, j: u32, base: u64, chosen: &mut Vec<Term>, acc: &mut Acc, first: Option<usize>) {
        if j == 0 {
            self.finish_a0(base, chosen, acc);
            return;
        }
        let e = self.h + j;
        let Some(room) = self.grid.quotient(self.xmax, base) else { return };
        let top = self.grid.root(room, e);
        let range = match first {
            Some(i) => i..i + 1,
            None => 0..self.table.count_upto(top),
        };
        for i in range {
            if !self.usable[i] || self.table.norm(i) > top {
                continue;
            }
            let ts = self.table.terms(i);
            if ts.iter().any(|t| chosen.iter().any(|c| c.0.index == t.0.index)) {
                continue;
            }
            let nb = self.grid.mul(base, self.grid.pow(self.table.norm(i), e).unwrap()).unwrap();
            let len = chosen.len();
            chosen.extend(ts.iter().map(|t| (t.0, e)));
            self.level(j - 1, nb, chosen, acc, None);
            chosen.truncate(len);
        }
    }

    fn finish_a0(&self, base: u64, chosen: &[Term], acc: &mut Acc) {
        let h = self.h;
        if let Statistic::Count = self.plan.stat {
            // counts are cumulative per checkpoint here; finish() is bypassed
            for (k, &c) in self.plan.cps.iter().enumerate() {
                if let Some(r) = self.grid.quotient(c, base) {
                    acc.a[k] += self.allowed_upto(self.grid.root(r, h)) as u128;
                }
            }
            return;
        }
        let room = self.grid.quotient(self.xmax, base).unwrap();
        let top = self.grid.root(room, h);
        let mut sorted: Vec<Term> = chosen.to_vec();
        sorted.sort_unstable_by_key(|t| t.0.index);
        let mut merged: Vec<Term> = Vec::with_capacity(16);
        for i in 0..self.table.count_upto(top) {
            if !self.allowed[i] {
                continue;
            }
            let n = self.grid.mul(base, self.grid.pow(self.table.norm(i), h).unwrap()).unwrap();
            merged.clear();
            let a0 = self.table.terms(i);
            let (mut p, mut q) = (0, 0);
            while p < a0.len() || q < sorted.len() {
                if q == sorted.len() || (p < a0.len() && a0[p].0.index < sorted[q].0.index) {
                    merged.push((a0[p].0, a0[p].1 * h));
                    p += 1;
                } else if p == a0.len() || sorted[q].0.index < a0[p].0.index {
                    merged.push(sorted[q]);
                    q += 1;
                } else {
                    merged.push((a0[p].0, a0[p].1 * h + sorted[q].1));
                    p += 1;
                    q += 1;
                }
            }
            self.plan.add(acc, n, omega(&merged), big_omega(&merged));
        }
    }
}

fn hfull_tuples(inst: &dyn Monoid, h: u32, plan: &Plan, excl: &[u64]) -> Result<CensusResult> {
    let grid = inst.grid();
    let xmax = *plan.cps.last().unwrap();
    let table = ElementTable::build(inst.elements(grid.root(xmax, h))?.as_ref())?;
    let allowed: Vec<bool> = (0..table.len()).map(|i| !excluded_hit(excl, table.terms(i))).collect();
    let usable: Vec<bool> = (0..table.len())
        .map(|i| allowed[i] && table.terms(i).iter().all(|t| t.1 == 1))
        .collect();
    let mut allowed_prefix = Vec::with_capacity(table.len() + 1);
    allowed_prefix.push(0u64);
    for &a in &allowed {
        allowed_prefix.push(allowed_prefix.last().unwrap() + a as u64);
    }
    let tp = Tuples { h, grid, table: &table, usable, allowed_prefix, allowed, plan, xmax };
    let n = plan.cps.len();
    let outer = grid.root(xmax, 2 * h - 1);
    let tasks = table.count_upto(outer);
    let acc = (0..tasks)
        .into_par_iter()
        .fold(
            || Acc::new(n),
            |mut acc, i| {
                let mut chosen = Vec::with_capacity(16);
                tp.level(h - 1, grid.identity(), &mut chosen, &mut acc, Some(i));
                acc
            },
        )
        .reduce(|| Acc::new(n), Acc::merge);
    if let Statistic::Count = plan.stat {
        let rows = plan.cps.iter().zip(acc.a).map(|(&c, v)| (c, CensusValue::Integer(v))).collect();
        return Ok(CensusResult { rows });
    }
    Ok(plan.finish(acc))
}

pub fn count_subset(inst: &dyn Monoid, subset: Subset, excluded: &[PrimeHandle], x: u64) -> Result<u128> {
    let req = CensusRequest::new(subset, Statistic::Count, &[x]).excluding(excluded);
    Ok(run(inst, &req)?.last().integer().unwrap())
}

pub fn moment(inst: &dyn Monoid, subset: Subset, of: Arith, k: u32, x: u64) -> Result<u128> {
    let req = CensusRequest::new(subset, Statistic::Moment { of, k }, &[x]);
    Ok(run(inst, &req)?.last().integer().unwrap())
}

pub fn violation_fraction(inst: &dyn Monoid, subset: Subset, of: Arith, epsilon: f64, x: u64) -> Result<f64> {
    let req = CensusRequest::new(subset, Statistic::Violation { of, epsilon }, &[x]);
    Ok(run(inst, &req)?.last().as_f64())
}

/// All primes of the instance whose norm key is in `norms`.
pub fn primes_with_norms(inst: &dyn Monoid, norms: &[u64]) -> Result<Vec<PrimeHandle>> {
    let Some(&top) = norms.iter().max() else { return Ok(Vec::new()) };
    let ps = inst.primes(top)?;
    let out: Vec<PrimeHandle> = ps.into_iter().filter(|p| norms.contains(&p.norm)).collect();
    for n in norms {
        if !out.iter().any(|p| p.norm == *n) {
            return invalid(format!("no prime of norm {n}"));
        }
    }
    Ok(out)
}
