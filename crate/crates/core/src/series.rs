//! Exact polynomial identities and Dirichlet-type series for counting h-full elements.

use crate::error::{invalid, Error, Result};
use crate::instance::Monoid;
use crate::monoid::{check_h, Grid};

fn of() -> Error {
    Error::Overflow("series coefficient")
}

pub fn poly_mul(a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let mut r = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let t = x.checked_mul(y).ok_or_else(of)?;
            r[i + j] = r[i + j].checked_add(t).ok_or_else(of)?;
        }
    }
    Ok(r)
}

fn one_minus_vj(j: usize) -> Vec<i128> {
    let mut f = vec![0; j + 1];
    f[0] = 1;
    f[j] = -1;
    f
}

/// Coefficients alpha_r in
/// (1 + v^h/(1-v)) prod_{j=h}^{2h-1} (1 - v^j) = 1 - v^{2h+2} + sum_r alpha_r v^r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaPolynomial {
    pub h: u32,
    /// Nonzero (r, alpha_r), r increasing, 2h+3 <= r <= (3h^2+h-2)/2.
    pub alpha: Vec<(u32, i64)>,
}

impl AlphaPolynomial {
    pub fn max_degree(h: u32) -> u32 {
        (3 * h * h + h - 2) / 2
    }

    /// The whole right-hand side as a coefficient vector.
    pub fn local_polynomial(&self) -> Vec<i128> {
        let h = self.h as usize;
        let top = self.alpha.last().map_or(2 * h + 2, |a| a.0 as usize);
        let mut v = vec![0i128; top + 1];
        v[0] = 1;
        v[2 * h + 2] = -1;
        for &(r, a) in &self.alpha {
            v[r as usize] += a as i128;
        }
        v
    }

    /// Whether every |alpha_r| <= h 2^h.
    pub fn within_bound(&self) -> bool {
        let b = self.h as i64 * (1i64 << self.h);
        self.alpha.iter().all(|a| a.1.abs() <= b)
    }
}

pub fn alpha_coeffs(h: u32) -> Result<AlphaPolynomial> {
    check_h(h)?;
    if h > 20 {
        return invalid("alpha coefficients are computed for h <= 20");
    }
    let hu = h as usize;
    // (1 + v^h/(1-v)) = (1 - v + v^h)/(1 - v)
    let mut p = vec![0i128; hu + 1];
    p[0] = 1;
    p[1] -= 1;
    p[hu] += 1;
    for j in hu..2 * hu {
        p = poly_mul(&p, &one_minus_vj(j))?;
    }
    // exact division by (1 - v): prefix sums, the total must vanish
    let mut q = Vec::with_capacity(p.len());
    let mut acc = 0i128;
    for &c in &p {
        acc = acc.checked_add(c).ok_or_else(of)?;
        q.push(acc);
    }
    if q.pop() != Some(0) {
        return Err(Error::Consistency("product not divisible by 1 - v".into()));
    }
    while q.last() == Some(&0) {
        q.pop();
    }
    let lead = 2 * hu + 2;
    let ok = q.len() > lead
        && q[0] == 1
        && q[1..lead].iter().all(|&c| c == 0)
        && q[lead] == -1
        && q.len() - 1 <= AlphaPolynomial::max_degree(h) as usize;
    if !ok {
        return Err(Error::Consistency(format!("unexpected shape of the h = {h} product")));
    }
    let alpha = q
        .iter()
        .enumerate()
        .skip(lead + 1)
        .filter(|(_, &c)| c != 0)
        .map(|(r, &c)| i64::try_from(c).map(|c| (r as u32, c)).map_err(|_| of()))
        .collect::<Result<Vec<_>>>()?;
    if alpha.first().is_some_and(|a| a.0 < 2 * h + 3) {
        return Err(Error::Consistency("alpha term below degree 2h+3".into()));
    }
    Ok(AlphaPolynomial { h, alpha })
}

/// Checks a set of alpha coefficients against the identity by expanding the
/// left side as a power series, independently of how they were computed.
pub fn check_alpha_identity(a: &AlphaPolynomial) -> Result<()> {
    let h = a.h as usize;
    let order = AlphaPolynomial::max_degree(a.h) as usize + 4;
    let mut lhs = vec![0i128; order + 1];
    lhs[0] = 1;
    for c in lhs.iter_mut().skip(h) {
        *c = 1;
    }
    for j in h..2 * h {
        for k in (j..=order).rev() {
            lhs[k] -= lhs[k - j];
        }
    }
    let mut rhs = a.local_polynomial();
    if rhs.len() > order + 1 {
        return Err(Error::Consistency("alpha degree exceeds the bound".into()));
    }
    rhs.resize(order + 1, 0);
    if let Some(k) = (0..=order).find(|&k| lhs[k] != rhs[k]) {
        return Err(Error::Consistency(format!(
            "alpha identity fails for h = {} at v^{k}: {} vs {}",
            a.h, lhs[k], rhs[k]
        )));
    }
    Ok(())
}

/// Checks that the local polynomial times prod_{j=h}^{2h-1} 1/(1-v^j)
/// is 1 + v^h/(1-v) up to v^order.
pub fn local_factor_check(h: u32, order: usize) -> Result<()> {
    let a = alpha_coeffs(h)?;
    let mut s = a.local_polynomial();
    s.resize(order + 1, 0);
    s.truncate(order + 1);
    for j in h as usize..2 * h as usize {
        for k in j..=order {
            s[k] = s[k].checked_add(s[k - j]).ok_or_else(of)?;
        }
    }
    for (k, &c) in s.iter().enumerate() {
        let want = if k == 0 || k >= h as usize { 1 } else { 0 };
        if c != want {
            return Err(Error::Consistency(format!("local factor differs at v^{k}")));
        }
    }
    Ok(())
}

/// Coefficients c(n) for norm keys n <= bound, nonzero entries only, keys increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientStream {
    pub grid: Grid,
    pub bound: u64,
    pub entries: Vec<(u64, i128)>,
}

impl CoefficientStream {
    fn from_unsorted(grid: Grid, bound: u64, mut raw: Vec<(u64, i128)>) -> Result<Self> {
        raw.sort_unstable_by_key(|e| e.0);
        let mut entries: Vec<(u64, i128)> = Vec::with_capacity(raw.len());
        for (k, c) in raw {
            match entries.last_mut() {
                Some(last) if last.0 == k => last.1 = last.1.checked_add(c).ok_or_else(of)?,
                _ => entries.push((k, c)),
            }
        }
        entries.retain(|e| e.1 != 0);
        Ok(CoefficientStream { grid, bound, entries })
    }

    pub fn get(&self, key: u64) -> i128 {
        match self.entries.binary_search_by_key(&key, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    /// Coefficients by degree 0..=bound; meant for graded grids.
    pub fn dense(&self) -> Vec<i128> {
        let mut v = vec![0; self.bound as usize + 1];
        for &(k, c) in &self.entries {
            v[k as usize] = c;
        }
        v
    }

    pub fn partial_sums(&self) -> Result<PartialSums> {
        let mut acc = 0i128;
        let mut cum = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            acc = acc.checked_add(e.1).ok_or_else(of)?;
            cum.push(acc);
        }
        Ok(PartialSums {
            keys: self.entries.iter().map(|e| e.0).collect(),
            cum,
        })
    }

    /// Dirichlet product, truncated at the smaller bound.
    pub fn convolve(&self, other: &CoefficientStream) -> Result<CoefficientStream> {
        let bound = self.bound.min(other.bound);
        let grid = self.grid;
        let mut raw = Vec::new();
        for &(a, ca) in &self.entries {
            let Some(room) = grid.quotient(bound, a) else { break };
            for &(b, cb) in &other.entries {
                if b > room {
                    break;
                }
                raw.push((grid.mul(a, b).ok_or_else(of)?, ca.checked_mul(cb).ok_or_else(of)?));
            }
        }
        Self::from_unsorted(grid, bound, raw)
    }
}

#[derive(Clone, Debug)]
pub struct PartialSums {
    keys: Vec<u64>,
    cum: Vec<i128>,
}

impl PartialSums {
    /// Sum of coefficients with key <= y.
    pub fn at(&self, y: u64) -> i128 {
        let i = self.keys.partition_point(|&k| k <= y);
        if i == 0 {
            0
        } else {
            self.cum[i - 1]
        }
    }
}

/// l_h: the Dirichlet product of the element counts stretched by exponents h..2h-1.
pub fn lh_series(inst: &dyn Monoid, h: u32, x: u64) -> Result<CoefficientStream> {
    check_h(h)?;
    let grid = inst.grid();
    let counts = inst.norm_counts(grid.root(x, h))?;
    let mut cur = vec![(grid.identity(), 1i128)];
    for j in (h..2 * h).rev() {
        let top = grid.root(x, j);
        let stretched: Vec<(u64, i128)> = counts
            .iter()
            .enumerate()
            .take(top as usize + 1)
            .filter(|(_, &c)| c > 0)
            .map(|(m, &c)| Ok((grid.pow(m as u64, j).ok_or_else(of)?, i128::try_from(c).map_err(|_| of())?)))
            .collect::<Result<_>>()?;
        let mut raw = Vec::new();
        for &(n, c) in &cur {
            let Some(room) = grid.quotient(x, n) else { continue };
            for &(s, a) in &stretched {
                if s > room {
                    break;
                }
                raw.push((grid.mul(n, s).ok_or_else(of)?, c.checked_mul(a).ok_or_else(of)?));
            }
        }
        cur = CoefficientStream::from_unsorted(grid, x, raw)?.entries;
    }
    Ok(CoefficientStream { grid, bound: x, entries: cur })
}

/// g_h: multiplicative, with local factor the alpha polynomial at v = N(p)^{-s}.
pub fn gh_series(inst: &dyn Monoid, alpha: &AlphaPolynomial, x: u64) -> Result<CoefficientStream> {
    let grid = inst.grid();
    let h = alpha.h;
    let local: Vec<(u32, i128)> = alpha
        .local_polynomial()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| (k as u32, c))
        .collect();
    let primes = inst.primes(grid.root(x, 2 * h + 2))?;
    let mut raw = vec![(grid.identity(), 1i128)];
    fn dfs(
        grid: Grid,
        x: u64,
        primes: &[crate::monoid::PrimeHandle],
        local: &[(u32, i128)],
        start: usize,
        n: u64,
        c: i128,
        raw: &mut Vec<(u64, i128)>,
    ) -> Result<()> {
        for (i, p) in primes.iter().enumerate().skip(start) {
            let Some(room) = grid.quotient(x, n) else { return Ok(()) };
            if local.first().map_or(true, |&(k, _)| grid.pow(p.norm, k).map_or(true, |v| v > room)) {
                break;
            }
            for &(k, a) in local {
                match grid.pow(p.norm, k) {
                    Some(v) if v <= room => {
                        let m = grid.mul(n, v).ok_or_else(of)?;
                        let cm = c.checked_mul(a).ok_or_else(of)?;
                        raw.push((m, cm));
                        dfs(grid, x, primes, local, i + 1, m, cm, raw)?;
                    }
                    _ => break,
                }
            }
        }
        Ok(())
    }
    dfs(grid, x, &primes, &local, 0, grid.identity(), 1, &mut raw)?;
    CoefficientStream::from_unsorted(grid, x, raw)
}

/// The h-full counting series g_h * l_h; coefficient n is the number of h-full
/// elements of norm n.
pub fn hfull_series(inst: &dyn Monoid, h: u32, x: u64) -> Result<CoefficientStream> {
    let alpha = alpha_coeffs(h)?;
    gh_series(inst, &alpha, x)?.convolve(&lh_series(inst, h, x)?)
}

/// Number of h-full elements of norm <= x, as sum over m of g_h(m) T_h(x/m).
pub fn hfull_count_by_convolution(inst: &dyn Monoid, h: u32, x: u64) -> Result<u128> {
    let alpha = alpha_coeffs(h)?;
    hfull_count_with_alpha(inst, &alpha, x)
}

pub fn hfull_count_with_alpha(inst: &dyn Monoid, alpha: &AlphaPolynomial, x: u64) -> Result<u128> {
    let grid = inst.grid();
    let t = lh_series(inst, alpha.h, x)?.partial_sums()?;
    let g = gh_series(inst, alpha, x)?;
    let mut total = 0i128;
    for &(m, c) in &g.entries {
        let y = grid.quotient(x, m).expect("g_h support lies below x");
        total = total.checked_add(c.checked_mul(t.at(y)).ok_or_else(of)?).ok_or_else(of)?;
    }
    u128::try_from(total).map_err(|_| Error::Consistency(format!("negative h-full count {total}")))
}

/// T_h(x) = sum of l_h(n) over n <= x.
pub fn t_sum(inst: &dyn Monoid, h: u32, x: u64) -> Result<u128> {
    let s = lh_series(inst, h, x)?.partial_sums()?.at(x);
    Ok(s as u128)
}
