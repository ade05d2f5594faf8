//! Graded monoids: F_q[x] and instances defined by a table of prime counts per degree.

use crate::error::{invalid, Error, Result};
use crate::instance::{DfsSource, ElementSource, Monoid};
use crate::monoid::{Factorization, Grid, PrimeHandle};

/// Most prime handles or elements a graded enumeration will materialize.
pub const ENUMERATION_BUDGET: u128 = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
enum Profile {
    Polynomial,
    /// pi[d] for d in 0..=d_max; pi[0] is always 0.
    Table(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedInstance {
    q: u64,
    profile: Profile,
    kappa: f64,
    theta: f64,
}

pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut r = q;
            while r % p == 0 {
                r /= p;
            }
            return r == 1;
        }
        p += 1;
    }
    true
}

fn mobius_small(n: u64) -> i128 {
    let mut r = n;
    let mut s = 1;
    let mut p = 2;
    while p * p <= r {
        if r % p == 0 {
            r /= p;
            if r % p == 0 {
                return 0;
            }
            s = -s;
        }
        p += 1;
    }
    if r > 1 {
        s = -s;
    }
    s
}

/// Number of monic irreducible polynomials of degree d over F_q.
pub fn irreducible_count(q: u64, d: u32) -> Result<u128> {
    if !is_prime_power(q) {
        return invalid(format!("{q} is not a prime power"));
    }
    if d == 0 {
        return invalid("degree must be positive");
    }
    let mut total: i128 = 0;
    for e in 1..=d {
        if d % e != 0 {
            continue;
        }
        let mu = mobius_small(e as u64);
        if mu == 0 {
            continue;
        }
        let t = (q as i128)
            .checked_pow(d / e)
            .ok_or(Error::Overflow("irreducible count"))?;
        total += mu * t;
    }
    Ok((total / d as i128) as u128)
}

/// The same count as a float, valid while q^d stays inside f64 range.
fn irreducible_count_f64(q: u64, d: u64) -> f64 {
    let lq = (q as f64).ln();
    let mut s = 0.0;
    for e in 1..=d {
        if d % e == 0 {
            let mu = mobius_small(e) as f64;
            if mu != 0.0 {
                s += mu * ((d / e) as f64 * lq - d as f64 * lq).exp();
            }
        }
    }
    s * (d as f64 * lq).exp() / d as f64
}

impl GradedInstance {
    /// F_q[x] with its monic polynomials.
    pub fn polynomial(q: u64) -> Result<Self> {
        if !is_prime_power(q) {
            return invalid(format!("{q} is not a prime power"));
        }
        Ok(GradedInstance {
            q,
            profile: Profile::Polynomial,
            kappa: q as f64 / (q as f64 - 1.0),
            theta: 0.0,
        })
    }

    /// An instance given by prime counts per degree; `pi[d-1]` primes of degree d.
    pub fn synthetic(q: u64, pi: &[u64], kappa: f64, theta: f64) -> Result<Self> {
        if q < 2 {
            return invalid("grid base q must be at least 2");
        }
        if !(kappa > 0.0) || !(0.0..1.0).contains(&theta) {
            return invalid("need kappa > 0 and 0 <= theta < 1");
        }
        let mut table = vec![0];
        table.extend_from_slice(pi);
        Ok(GradedInstance {
            q,
            profile: Profile::Table(table),
            kappa,
            theta,
        })
    }

    /// Reads lines `q <base>`, `kappa <v>`, `theta <v>` and `d <degree> <count>`.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse_definition(text: &str) -> Result<Self> {
        let (mut q, mut kappa, mut theta) = (None, None, None);
        let mut pi: Vec<u64> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line}", ln + 1));
            let f: Vec<&str> = line.split_whitespace().collect();
            match (f[0], f.len()) {
                ("q", 2) => q = Some(f[1].parse::<u64>().map_err(|_| bad("bad q"))?),
                ("kappa", 2) => kappa = Some(f[1].parse::<f64>().map_err(|_| bad("bad kappa"))?),
                ("theta", 2) => theta = Some(f[1].parse::<f64>().map_err(|_| bad("bad theta"))?),
                ("d", 3) => {
                    let d: usize = f[1].parse().map_err(|_| bad("bad degree"))?;
                    let c: u64 = f[2].parse().map_err(|_| bad("bad count"))?;
                    if d == 0 {
                        return Err(bad("degree must be positive"));
                    }
                    if pi.len() < d {
                        pi.resize(d, 0);
                    }
                    pi[d - 1] = c;
                }
                _ => return Err(bad("unrecognized line")),
            }
        }
        let q = q.ok_or_else(|| Error::Parse("missing q".into()))?;
        let kappa = kappa.ok_or_else(|| Error::Parse("missing kappa".into()))?;
        let theta = theta.unwrap_or(0.0);
        Self::synthetic(q, &pi, kappa, theta)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Exact number of primes of degree d.
    pub fn prime_count(&self, d: u64) -> Result<u128> {
        match &self.profile {
            Profile::Polynomial => irreducible_count(self.q, d as u32),
            Profile::Table(t) => Ok(t.get(d as usize).copied().unwrap_or(0) as u128),
        }
    }

    /// Number of elements of each degree 0..=n.
    pub fn element_counts(&self, n: u64) -> Result<Vec<u128>> {
        let n = n as usize;
        let pi: Vec<i128> = (0..=n as u64)
            .map(|d| if d == 0 { Ok(0) } else { self.prime_count(d).map(|v| v as i128) })
            .collect::<Result<_>>()?;
        let of = || Error::Overflow("graded element count");
        // n c_n = sum_k b_k c_{n-k}, b_k = sum_{d | k} d pi_d
        let mut b = vec![0i128; n + 1];
        for d in 1..=n {
            let w = (d as i128).checked_mul(pi[d]).ok_or_else(of)?;
            for k in (d..=n).step_by(d) {
                b[k] = b[k].checked_add(w).ok_or_else(of)?;
            }
        }
        let mut c = vec![0i128; n + 1];
        c[0] = 1;
        for m in 1..=n {
            let mut s: i128 = 0;
            for k in 1..=m {
                let t = b[k].checked_mul(c[m - k]).ok_or_else(of)?;
                s = s.checked_add(t).ok_or_else(of)?;
            }
            if s % m as i128 != 0 {
                return Err(Error::Consistency(format!("non-integral element count at degree {m}")));
            }
            c[m] = s / m as i128;
        }
        Ok(c.into_iter().map(|v| v as u128).collect())
    }
}

/// Every element of degree <= n, with its degree.
pub fn graded_enumerate(inst: &GradedInstance, n: u64) -> Result<Vec<(u64, Factorization)>> {
    let src = inst.elements(n)?;
    let mut out = Vec::new();
    for t in 0..src.tasks() {
        src.visit(t, &mut |d, ts| out.push((d, Factorization::from_sorted(ts))))?;
    }
    Ok(out)
}

impl Monoid for GradedInstance {
    fn name(&self) -> String {
        match self.profile {
            Profile::Polynomial => format!("fq:{}", self.q),
            Profile::Table(_) => format!("graded:{}", self.q),
        }
    }

    fn grid(&self) -> Grid {
        Grid::Graded { q: self.q }
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn theta(&self) -> f64 {
        self.theta
    }

    fn primes(&self, bound: u64) -> Result<Vec<PrimeHandle>> {
        let mut total: u128 = 0;
        for d in 1..=bound {
            total += self.prime_count(d)?;
            if total > ENUMERATION_BUDGET {
                return Err(Error::Resource {
                    what: "graded prime handles",
                    requested: total.min(u64::MAX as u128) as u64,
                    budget: ENUMERATION_BUDGET as u64,
                });
            }
        }
        let mut v = Vec::with_capacity(total as usize);
        for d in 1..=bound {
            for _ in 0..self.prime_count(d)? {
                v.push(PrimeHandle::new(v.len() as u64, d));
            }
        }
        Ok(v)
    }

    fn for_each_prime_class(&self, bound: u64, f: &mut dyn FnMut(u64, f64)) -> Result<()> {
        let lq = (self.q as f64).ln();
        if bound as f64 * lq > 700.0 {
            return invalid(format!("degree cutoff {bound} too large for q = {}", self.q));
        }
        for d in 1..=bound {
            let c = match &self.profile {
                Profile::Polynomial => irreducible_count_f64(self.q, d),
                Profile::Table(t) => t.get(d as usize).copied().unwrap_or(0) as f64,
            };
            if c > 0.0 {
                f(d, c);
            }
        }
        Ok(())
    }

    fn exact_prime_classes(&self) -> Option<u64> {
        match &self.profile {
            Profile::Polynomial => None,
            Profile::Table(t) => Some(t.len() as u64 - 1),
        }
    }

    fn norm_counts(&self, bound: u64) -> Result<Vec<u128>> {
        self.element_counts(bound)
    }

    fn elements(&self, bound: u64) -> Result<Box<dyn ElementSource + '_>> {
        let total: u128 = self.element_counts(bound)?.iter().sum();
        if total > ENUMERATION_BUDGET {
            return Err(Error::Resource {
                what: "graded elements",
                requested: total.min(u64::MAX as u128) as u64,
                budget: ENUMERATION_BUDGET as u64,
            });
        }
        Ok(Box::new(DfsSource {
            primes: self.primes(bound)?,
            grid: self.grid(),
            bound,
        }))
    }
}
