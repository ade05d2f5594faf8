//! Prime-sum and Euler-product constants, with truncation tails.

use crate::error::{invalid, Error, Result};
use crate::instance::Monoid;
use crate::monoid::{check_h, Grid};
use crate::summation::Sum;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Primes needed below a cutoff before a constant is trusted.
pub const MIN_PRIMES: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantEstimate {
    pub value: f64,
    /// Bound on |value - true value|; a heuristic size when `rigorous` is false.
    pub tail_bound: f64,
    /// Norm key up to which primes were summed.
    pub cutoff: u64,
    pub rigorous: bool,
}

impl ConstantEstimate {
    pub fn exact(value: f64) -> Self {
        ConstantEstimate { value, tail_bound: 0.0, cutoff: 0, rigorous: true }
    }
}

/// Exponential integral E1(z) for z > 0.
pub fn e1(z: f64) -> f64 {
    assert!(z > 0.0, "E1 needs z > 0");
    if z <= 1.0 {
        let mut s = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -z / k as f64;
            let add = -term / k as f64;
            s += add;
            if add.abs() < 1e-17 * s.abs() {
                break;
            }
        }
        return -EULER_GAMMA - z.ln() + s;
    }
    // continued fraction, modified Lentz
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// Cutoff used when the caller gives none.
pub fn default_cutoff(inst: &dyn Monoid) -> u64 {
    match inst.grid() {
        Grid::Dense => 10_000_000,
        Grid::Graded { q } => ((200.0 * 2f64.ln() / (q as f64).ln()) as u64).max(16),
    }
}

struct Summand<'a> {
    /// Term as a function of ln N.
    f: Box<dyn Fn(f64) -> f64 + 'a>,
    /// Terms decay like `lead * N^-alpha` ...
    alpha: f64,
    lead: f64,
    /// ... and stay below `cmax * N^-alpha` beyond the cutoff.
    cmax: f64,
}

struct Evaluated {
    sum: f64,
    estimate: f64,
    bound: f64,
    rigorous: bool,
}

fn prime_sums(inst: &dyn Monoid, cutoff: u64, summands: &[Summand]) -> Result<Vec<Evaluated>> {
    let grid = inst.grid();
    let mut sums = vec![Sum::new(); summands.len()];
    let mut primes = 0.0;
    inst.for_each_prime_class(cutoff, &mut |key, count| {
        let ln = grid.ln_norm(key);
        primes += count;
        for (s, acc) in summands.iter().zip(sums.iter_mut()) {
            acc.add(count * (s.f)(ln));
        }
    })?;
    if primes < MIN_PRIMES {
        return Err(Error::TooFewPrimes { found: primes as u64, needed: MIN_PRIMES as u64 });
    }
    Ok(summands
        .iter()
        .zip(sums)
        .map(|(s, acc)| {
            let (estimate, bound, rigorous) = tail(inst, cutoff, s.alpha, s.lead, s.cmax);
            Evaluated { sum: acc.value(), estimate, bound, rigorous }
        })
        .collect())
}

/// Tail of sum over N(p) > cutoff of c N(p)^-alpha: (estimate, bound, bound is rigorous).
fn tail(inst: &dyn Monoid, cutoff: u64, alpha: f64, lead: f64, cmax: f64) -> (f64, f64, bool) {
    match inst.grid() {
        Grid::Dense => {
            let x = cutoff as f64;
            // prime norms have density 1/ln t
            let est = lead * e1((alpha - 1.0) * x.ln());
            let bound = cmax * inst.max_primes_per_norm() * x.powf(1.0 - alpha) / (alpha - 1.0);
            (est, bound, true)
        }
        Grid::Graded { q } => {
            // pi_d <= Q^d / d, with equality in the limit
            let lq = (q as f64).ln();
            let mut s = Sum::new();
            let mut d = cutoff + 1;
            loop {
                let t = (d as f64 * (1.0 - alpha) * lq).exp() / d as f64;
                s.add(t);
                if t < 1e-18 * s.value() || d > cutoff + 100_000 {
                    break;
                }
                d += 1;
            }
            let s = s.value();
            (lead * s, cmax * s, inst.exact_prime_classes().is_none())
        }
    }
}

fn cutoff_norm(inst: &dyn Monoid, cutoff: u64) -> f64 {
    inst.grid().norm_value(cutoff)
}

/// zeta of the monoid at real s > 1, by its Euler product.
pub fn zeta_value(inst: &dyn Monoid, s: f64, cutoff: u64) -> Result<ConstantEstimate> {
    if !(s > 1.0) {
        return invalid(format!("zeta needs s > 1, got {s}"));
    }
    let x = cutoff_norm(inst, cutoff);
    let sm = Summand {
        f: Box::new(move |ln| -(-(-s * ln).exp()).ln_1p()),
        alpha: s,
        lead: 1.0,
        cmax: 1.0 / (1.0 - x.powf(-s)),
    };
    let e = &prime_sums(inst, cutoff, &[sm])?[0];
    Ok(from_log(e, cutoff))
}

fn from_log(e: &Evaluated, cutoff: u64) -> ConstantEstimate {
    let value = (e.sum + e.estimate).exp();
    ConstantEstimate {
        value,
        tail_bound: e.sum.exp() * e.bound.exp_m1(),
        cutoff,
        rigorous: e.rigorous,
    }
}

fn plain(e: &Evaluated, cutoff: u64) -> ConstantEstimate {
    ConstantEstimate {
        value: e.sum + e.estimate,
        tail_bound: e.bound,
        cutoff,
        rigorous: e.rigorous,
    }
}

/// The Mertens constant A in sum_{N(p) <= x} 1/N(p) = loglog x + A + O(1/log x).
///
/// E(x) = sum - loglog x is taken at the cutoff and at x1 with log x1 = 7/8 log x,
/// then extrapolated linearly in 1/log x. The error is heuristic.
pub fn mertens_a(inst: &dyn Monoid, cutoff: u64) -> Result<ConstantEstimate> {
    let grid = inst.grid();
    let x1 = match grid {
        Grid::Dense => (cutoff as f64).powf(7.0 / 8.0).floor() as u64,
        Grid::Graded { .. } => cutoff * 7 / 8,
    };
    if x1 < 2 || x1 >= cutoff {
        return invalid(format!("cutoff {cutoff} too small for the Mertens constant"));
    }
    let (mut s1, mut s2) = (Sum::new(), Sum::new());
    let mut primes = 0.0;
    inst.for_each_prime_class(cutoff, &mut |key, count| {
        let t = count * (-grid.ln_norm(key)).exp();
        if key <= x1 {
            s1.add(t);
        } else {
            s2.add(t);
        }
        primes += count;
    })?;
    let (l1, l2) = (grid.ln_norm(x1), grid.ln_norm(cutoff));
    let window = s2.value();
    let expect = (l2 / l1).ln();
    if (window - expect).abs() > 0.5 * expect {
        return Err(Error::NonConvergent(format!(
            "sum of 1/N(p) over ({x1}, {cutoff}] is {window:.4}, loglog growth predicts {expect:.4}"
        )));
    }
    if primes < MIN_PRIMES {
        return Err(Error::TooFewPrimes { found: primes as u64, needed: MIN_PRIMES as u64 });
    }
    let e1v = s1.value() - l1.ln();
    let e2v = s1.value() + window - l2.ln();
    let a = (e2v * l2 - e1v * l1) / (l2 - l1);
    Ok(ConstantEstimate {
        value: a,
        tail_bound: (e2v - e1v).abs() * l2 / (l2 - l1),
        cutoff,
        rigorous: false,
    })
}

/// B = -pi^2/6 on dense grids, (loglog Q)^2 - pi^2/6 on graded ones.
pub fn const_b(grid: Grid) -> ConstantEstimate {
    let z2 = PI * PI / 6.0;
    match grid {
        Grid::Dense => ConstantEstimate::exact(-z2),
        Grid::Graded { q } => ConstantEstimate::exact((q as f64).ln().ln().powi(2) - z2),
    }
}

fn combine_quadratic(c1: &ConstantEstimate, b: &ConstantEstimate, s: &Evaluated, cutoff: u64) -> ConstantEstimate {
    let v = c1.value;
    let e = c1.tail_bound;
    ConstantEstimate {
        value: v * v + v + b.value - (s.sum + s.estimate),
        tail_bound: (2.0 * v + 1.0).abs() * e + e * e + s.bound,
        cutoff,
        rigorous: false,
    }
}

/// (C1, C2) for the h-free moments.
pub fn const_c(inst: &dyn Monoid, h: u32, cutoff: u64) -> Result<(ConstantEstimate, ConstantEstimate)> {
    check_h(h)?;
    let a = mertens_a(inst, cutoff)?;
    let x = cutoff_norm(inst, cutoff);
    let hf = h as f64;
    let sums = prime_sums(
        inst,
        cutoff,
        &[
            Summand {
                f: Box::new(move |ln| {
                    let u = (-ln).exp();
                    let uh = (-hf * ln).exp();
                    uh * (1.0 - u) / (1.0 - uh)
                }),
                alpha: hf,
                lead: 1.0,
                cmax: 1.0,
            },
            Summand {
                f: Box::new(move |ln| {
                    let u = (-ln).exp();
                    let r = u * (1.0 - (-(hf - 1.0) * ln).exp()) / (1.0 - (-hf * ln).exp());
                    r * r
                }),
                alpha: 2.0,
                lead: 1.0,
                cmax: 1.0 / (1.0 - x.powf(-hf)).powi(2),
            },
        ],
    )?;
    let c1 = ConstantEstimate {
        value: a.value - (sums[0].sum + sums[0].estimate),
        tail_bound: a.tail_bound + sums[0].bound,
        cutoff,
        rigorous: false,
    };
    let c2 = combine_quadratic(&c1, &const_b(inst.grid()), &sums[1], cutoff);
    Ok((c1, c2))
}

/// gamma_h = prod_p (1 + (N - N^{1/h}) / (N^2 (N^{1/h} - 1))).
pub fn gamma_h(inst: &dyn Monoid, h: u32, cutoff: u64) -> Result<ConstantEstimate> {
    check_h(h)?;
    let hf = h as f64;
    let x = cutoff_norm(inst, cutoff);
    let sm = Summand {
        f: Box::new(move |ln| {
            let u = (-ln).exp();
            let w = (-ln / hf).exp();
            (u * (w - u) / (1.0 - w)).ln_1p()
        }),
        alpha: 1.0 + 1.0 / hf,
        lead: 1.0,
        cmax: 1.0 / (1.0 - x.powf(-1.0 / hf)),
    };
    let e = &prime_sums(inst, cutoff, &[sm])?[0];
    Ok(from_log(e, cutoff))
}

fn l_summand<'a>(h: u32, r: u32, x: f64) -> Summand<'a> {
    let hf = h as f64;
    let a = r as f64 / hf;
    Summand {
        f: Box::new(move |ln| {
            let u = (-ln).exp();
            let w = (-ln / hf).exp();
            (-a * ln).exp() / (1.0 - w + u)
        }),
        alpha: a,
        lead: 1.0,
        cmax: 1.0 / (1.0 - x.powf(-1.0 / hf)),
    }
}

/// L_h(r) = sum_p 1/(N^{r/h-1} (N - N^{1-1/h} + 1)), r > h.
pub fn l_h(inst: &dyn Monoid, h: u32, r: u32, cutoff: u64) -> Result<ConstantEstimate> {
    check_h(h)?;
    if r <= h {
        return invalid(format!("L_h(r) needs r > h, got r = {r}, h = {h}"));
    }
    let x = cutoff_norm(inst, cutoff);
    let e = &prime_sums(inst, cutoff, &[l_summand(h, r, x)])?[0];
    Ok(plain(e, cutoff))
}

/// (D1, D2) for the h-full moments.
pub fn const_d(inst: &dyn Monoid, h: u32, cutoff: u64) -> Result<(ConstantEstimate, ConstantEstimate)> {
    check_h(h)?;
    let a = mertens_a(inst, cutoff)?;
    let x = cutoff_norm(inst, cutoff);
    let hf = h as f64;
    let sums = prime_sums(
        inst,
        cutoff,
        &[
            l_summand(h, h + 1, x),
            l_summand(h, 2 * h, x),
            Summand {
                f: Box::new(move |ln| {
                    let u = (-ln).exp();
                    let w = (-ln / hf).exp();
                    let r = u / (1.0 - w + u);
                    r * r
                }),
                alpha: 2.0,
                lead: 1.0,
                cmax: 1.0 / (1.0 - x.powf(-1.0 / hf)).powi(2),
            },
        ],
    )?;
    let v = |e: &Evaluated| e.sum + e.estimate;
    let d1 = ConstantEstimate {
        value: a.value - hf.ln() + v(&sums[0]) - v(&sums[1]),
        tail_bound: a.tail_bound + sums[0].bound + sums[1].bound,
        cutoff,
        rigorous: false,
    };
    let d2 = combine_quadratic(&d1, &const_b(inst.grid()), &sums[2], cutoff);
    Ok((d1, d2))
}

/// A' in sum_{N(m) <= x} 1/N(m) = kappa log x + A' + O(x^{theta-1}); dense grids only.
pub fn a_prime(inst: &dyn Monoid, cutoff: u64) -> Result<ConstantEstimate> {
    if !inst.grid().is_dense() {
        return invalid("A' is defined on dense grids only");
    }
    if inst.name() == "z" {
        return Ok(ConstantEstimate::exact(EULER_GAMMA));
    }
    // A' = S(Y) - kappa log Y - (I(Y) - kappa Y)/Y + int_Y^inf (I(t) - kappa t) t^-2 dt
    let counts = inst.norm_counts(cutoff)?;
    let mut s = Sum::new();
    let mut total: u128 = 0;
    for (n, &c) in counts.iter().enumerate().skip(1) {
        if c > 0 {
            s.add(c as f64 / n as f64);
            total += c;
        }
    }
    let (k, y) = (inst.kappa(), cutoff as f64);
    let value = s.value() - k * y.ln() - (total as f64 - k * y) / y;
    let th = inst.theta();
    Ok(ConstantEstimate {
        value,
        tail_bound: y.powf(th - 1.0) / (1.0 - th),
        cutoff,
        rigorous: false,
    })
}
