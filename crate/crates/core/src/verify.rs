//! Theorem predictions against exact census values, and numeric lemma checks.

use crate::census::{self, Arith, CensusRequest, Statistic, Subset};
use crate::constants::{self, ConstantEstimate};
use crate::error::{invalid, Error, Result};
use crate::instance::Monoid;
use crate::monoid::{check_h, Grid, PrimeHandle};
use crate::series;
use crate::summation::Sum;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremId {
    HfreeCount,
    HfullCount,
    HfreeOmega1,
    HfreeOmega2,
    HfullOmega1,
    HfullOmega2,
    TSum,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::HfreeCount,
        TheoremId::HfullCount,
        TheoremId::HfreeOmega1,
        TheoremId::HfreeOmega2,
        TheoremId::HfullOmega1,
        TheoremId::HfullOmega2,
        TheoremId::TSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::HfreeCount => "hfree-count",
            TheoremId::HfullCount => "hfull-count",
            TheoremId::HfreeOmega1 => "hfree-omega1",
            TheoremId::HfreeOmega2 => "hfree-omega2",
            TheoremId::HfullOmega1 => "hfull-omega1",
            TheoremId::HfullOmega2 => "hfull-omega2",
            TheoremId::TSum => "tsum",
        }
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown theorem {s}")))
    }
}

/// x^power (log x)^log_pow (loglog x)^loglog_pow
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    pub power: f64,
    pub log_pow: i32,
    pub loglog_pow: i32,
}

impl Shape {
    const fn new(power: f64, log_pow: i32, loglog_pow: i32) -> Self {
        Shape { power, log_pow, loglog_pow }
    }

    pub fn eval(&self, grid: Grid, x: u64) -> f64 {
        let lx = grid.ln_norm(x);
        (self.power * lx).exp() * lx.powi(self.log_pow) * lx.ln().powi(self.loglog_pow)
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

/// Error term of the h-free count.
pub fn r_s(theta: f64, h: u32) -> Shape {
    let inv = 1.0 / h as f64;
    if same(theta, inv) {
        Shape::new(inv, 1, 0)
    } else if theta > inv {
        Shape::new(theta, 0, 0)
    } else {
        Shape::new(inv, 0, 0)
    }
}

/// Error term of the h-full count and of T_h.
pub fn r_n(theta: f64, h: u32) -> Shape {
    let hf = h as f64;
    let p = 1.0 / (hf + 1.0);
    if theta > hf / (hf + 1.0) + 1e-12 {
        Shape::new(theta / hf, 0, 0)
    } else if (1..h).any(|i| same(theta, hf / (hf + i as f64))) {
        Shape::new(p, 1, 0)
    } else {
        Shape::new(p, 0, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub theorem: TheoremId,
    pub h: u32,
    pub grid: Grid,
    pub main_terms: Vec<(ConstantEstimate, Shape)>,
    pub error: Shape,
}

impl Prediction {
    pub fn eval(&self, x: u64) -> f64 {
        self.main_terms
            .iter()
            .map(|(c, s)| c.value * s.eval(self.grid, x))
            .collect::<Sum>()
            .value()
    }

    pub fn error_scale(&self, x: u64) -> f64 {
        self.error.eval(self.grid, x)
    }
}

fn times(a: ConstantEstimate, b: ConstantEstimate) -> ConstantEstimate {
    ConstantEstimate {
        value: a.value * b.value,
        tail_bound: a.value.abs() * b.tail_bound + b.value.abs() * a.tail_bound + a.tail_bound * b.tail_bound,
        cutoff: a.cutoff.max(b.cutoff),
        rigorous: a.rigorous && b.rigorous,
    }
}

fn affine(a: ConstantEstimate, k: f64, c: f64) -> ConstantEstimate {
    ConstantEstimate { value: k * a.value + c, tail_bound: k.abs() * a.tail_bound, ..a }
}

/// prod over excluded primes of (N^h - N^{h-1})/(N^h - 1).
pub fn hfree_restriction(grid: Grid, h: u32, excluded: &[PrimeHandle]) -> f64 {
    excluded
        .iter()
        .map(|p| {
            let n = grid.norm_value(p.norm);
            let nh = n.powi(h as i32);
            (nh - nh / n) / (nh - 1.0)
        })
        .product()
}

/// prod over excluded primes of 1/(1 + N^-1/(1 - N^{-1/h})).
pub fn hfull_restriction(grid: Grid, h: u32, excluded: &[PrimeHandle]) -> f64 {
    excluded
        .iter()
        .map(|p| {
            let n = grid.norm_value(p.norm);
            1.0 / (1.0 + (1.0 / n) / (1.0 - n.powf(-1.0 / h as f64)))
        })
        .product()
}

pub fn predict(
    theorem: TheoremId,
    inst: &dyn Monoid,
    h: u32,
    excluded: &[PrimeHandle],
    cutoff: u64,
) -> Result<Prediction> {
    check_h(h)?;
    let grid = inst.grid();
    let counting = matches!(theorem, TheoremId::HfreeCount | TheoremId::HfullCount);
    if !excluded.is_empty() && !counting {
        return invalid("excluded primes apply to the counting theorems only");
    }
    let hf = h as f64;
    let kappa = ConstantEstimate::exact(inst.kappa());
    let x1 = Shape::new(1.0, 0, 0);
    let xh = Shape::new(1.0 / hf, 0, 0);
    let free_lead = || -> Result<ConstantEstimate> {
        let z = constants::zeta_value(inst, hf, cutoff)?;
        let rz = ConstantEstimate {
            value: 1.0 / z.value,
            tail_bound: z.tail_bound / (z.value * (z.value - z.tail_bound)),
            ..z
        };
        Ok(times(kappa, rz))
    };
    let full_lead = || -> Result<ConstantEstimate> { Ok(times(kappa, constants::gamma_h(inst, h, cutoff)?)) };
    let with = |s: Shape, l: i32| Shape { loglog_pow: l, ..s };
    let (main_terms, error) = match theorem {
        TheoremId::HfreeCount => {
            let r = ConstantEstimate::exact(hfree_restriction(grid, h, excluded));
            (vec![(times(free_lead()?, r), x1)], r_s(inst.theta(), h))
        }
        TheoremId::HfullCount => {
            let r = ConstantEstimate::exact(hfull_restriction(grid, h, excluded));
            (vec![(times(full_lead()?, r), xh)], r_n(inst.theta(), h))
        }
        TheoremId::HfreeOmega1 => {
            let k = free_lead()?;
            let (c1, _) = constants::const_c(inst, h, cutoff)?;
            (vec![(k, with(x1, 1)), (times(k, c1), x1)], Shape::new(1.0, -1, 0))
        }
        TheoremId::HfreeOmega2 => {
            let k = free_lead()?;
            let (c1, c2) = constants::const_c(inst, h, cutoff)?;
            (
                vec![(k, with(x1, 2)), (times(k, affine(c1, 2.0, 1.0)), with(x1, 1)), (times(k, c2), x1)],
                Shape::new(1.0, -1, 1),
            )
        }
        TheoremId::HfullOmega1 => {
            let k = full_lead()?;
            let (d1, _) = constants::const_d(inst, h, cutoff)?;
            (vec![(k, with(xh, 1)), (times(k, d1), xh)], Shape::new(1.0 / hf, -1, 0))
        }
        TheoremId::HfullOmega2 => {
            let k = full_lead()?;
            let (d1, d2) = constants::const_d(inst, h, cutoff)?;
            (
                vec![(k, with(xh, 2)), (times(k, affine(d1, 2.0, 1.0)), with(xh, 1)), (times(k, d2), xh)],
                Shape::new(1.0 / hf, -1, 1),
            )
        }
        TheoremId::TSum => {
            let mut c = kappa;
            for i in 1..h {
                c = times(c, constants::zeta_value(inst, 1.0 + i as f64 / hf, cutoff)?);
            }
            (vec![(c, xh)], r_n(inst.theta(), h))
        }
    };
    Ok(Prediction { theorem, h, grid, main_terms, error })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualRow {
    pub x: u64,
    /// Exact left side, as printed.
    pub exact_text: String,
    pub exact: f64,
    pub predicted: f64,
    pub residual: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualTable {
    pub grid: Grid,
    pub rows: Vec<ResidualRow>,
}

impl ResidualTable {
    pub fn normalized(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.normalized).collect()
    }
}

fn census_for(theorem: TheoremId, h: u32) -> Option<(Subset, Statistic)> {
    let m = |k| Statistic::Moment { of: Arith::Omega, k };
    Some(match theorem {
        TheoremId::HfreeCount => (Subset::HFree(h), Statistic::Count),
        TheoremId::HfullCount => (Subset::HFull(h), Statistic::Count),
        TheoremId::HfreeOmega1 => (Subset::HFree(h), m(1)),
        TheoremId::HfreeOmega2 => (Subset::HFree(h), m(2)),
        TheoremId::HfullOmega1 => (Subset::HFull(h), m(1)),
        TheoremId::HfullOmega2 => (Subset::HFull(h), m(2)),
        TheoremId::TSum => return None,
    })
}

fn check_checkpoints(grid: Grid, cps: &[u64]) -> Result<()> {
    if cps.is_empty() {
        return invalid("no checkpoints");
    }
    if cps.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("checkpoints must increase");
    }
    if grid.ln_norm(cps[0]) <= 1.0 {
        return invalid("checkpoints must exceed e so that loglog x is positive");
    }
    Ok(())
}

pub fn residual_table(
    theorem: TheoremId,
    inst: &dyn Monoid,
    h: u32,
    excluded: &[PrimeHandle],
    checkpoints: &[u64],
    workers: usize,
    cutoff: u64,
) -> Result<ResidualTable> {
    let grid = inst.grid();
    check_checkpoints(grid, checkpoints)?;
    let pred = predict(theorem, inst, h, excluded, cutoff)?;
    let exact: Vec<u128> = match census_for(theorem, h) {
        Some((subset, stat)) => {
            let req = CensusRequest::new(subset, stat, checkpoints).excluding(excluded).workers(workers);
            census::run(inst, &req)?.rows.iter().map(|r| r.1.integer().unwrap()).collect()
        }
        None => {
            let xmax = *checkpoints.last().unwrap();
            let sums = series::lh_series(inst, h, xmax)?.partial_sums()?;
            checkpoints.iter().map(|&x| sums.at(x) as u128).collect()
        }
    };
    let rows = checkpoints
        .iter()
        .zip(exact)
        .map(|(&x, e)| {
            let predicted = pred.eval(x);
            let residual = e as f64 - predicted;
            ResidualRow {
                x,
                exact_text: e.to_string(),
                exact: e as f64,
                predicted,
                residual,
                normalized: residual / pred.error_scale(x),
            }
        })
        .collect();
    Ok(ResidualTable { grid, rows })
}

/// Least-squares slope of log|residual| against log x.
pub fn fit_error_exponent(table: &ResidualTable) -> Result<f64> {
    let rows = &table.rows;
    if rows.len() < 4 {
        return invalid("need at least 4 checkpoints to fit an exponent");
    }
    let g = table.grid;
    let span = g.ln_norm(rows.last().unwrap().x) - g.ln_norm(rows[0].x);
    if span < 3.0 * 10f64.ln() - 1e-9 {
        return invalid("checkpoints must span at least 3 decades");
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.residual != 0.0)
        .map(|r| (g.ln_norm(r.x), r.residual.abs().ln()))
        .collect();
    if pts.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    if pts.len() < 2 {
        return invalid("fewer than 2 nonzero residuals");
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// max |v| <= factor * median |v|
pub fn envelope_bounded(values: &[f64], factor: f64) -> bool {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let mut a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = a.len();
    let median = if n % 2 == 1 { a[n / 2] } else { 0.5 * (a[n / 2 - 1] + a[n / 2]) };
    a[n - 1] <= factor * median
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaId {
    MertensPart4,
    Saidakeq,
    Sumplogp,
    Sumnwpx2,
    BoundnmPart5,
}

impl LemmaId {
    pub const ALL: [LemmaId; 5] =
        [LemmaId::MertensPart4, LemmaId::Saidakeq, LemmaId::Sumplogp, LemmaId::Sumnwpx2, LemmaId::BoundnmPart5];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::MertensPart4 => "mertens-part4",
            LemmaId::Saidakeq => "saidakeq",
            LemmaId::Sumplogp => "sumplogp",
            LemmaId::Sumnwpx2 => "sumnwpx2",
            LemmaId::BoundnmPart5 => "boundnm-part5",
        }
    }
}

impl FromStr for LemmaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lemma {s}")))
    }
}

/// Evaluates a lemma's left side exactly (up to float rounding), subtracts its
/// main term and divides by its error shape.
pub fn lemma_check(lemma: LemmaId, inst: &dyn Monoid, checkpoints: &[u64], cutoff: u64) -> Result<ResidualTable> {
    let grid = inst.grid();
    check_checkpoints(grid, checkpoints)?;
    let xmax = *checkpoints.last().unwrap();
    let row = |x: u64, lhs: f64, rhs: f64, scale: f64| ResidualRow {
        x,
        exact_text: format!("{lhs}"),
        exact: lhs,
        predicted: rhs,
        residual: lhs - rhs,
        normalized: (lhs - rhs) / scale,
    };
    if lemma == LemmaId::BoundnmPart5 {
        let ap = constants::a_prime(inst, cutoff)?;
        let counts = inst.norm_counts(xmax)?;
        let shape = Shape::new(inst.theta() - 1.0, 0, 0);
        let mut s = Sum::new();
        let mut next = 0;
        let mut rows = Vec::new();
        for (n, &c) in counts.iter().enumerate().skip(1) {
            s.add(c as f64 / n as f64);
            while next < checkpoints.len() && checkpoints[next] == n as u64 {
                let x = checkpoints[next];
                let rhs = inst.kappa() * (x as f64).ln() + ap.value;
                rows.push(row(x, s.value(), rhs, shape.eval(grid, x)));
                next += 1;
            }
        }
        return Ok(ResidualTable { grid, rows });
    }
    let a = constants::mertens_a(inst, cutoff)?.value;
    let b = constants::const_b(grid).value;
    let mut keys = Vec::new();
    let mut inv = Vec::new();
    inst.for_each_prime_class(xmax, &mut |k, c| {
        keys.push(k);
        inv.push(c * (-grid.ln_norm(k)).exp());
    })?;
    let mut prefix = Vec::with_capacity(inv.len());
    let mut acc = Sum::new();
    for &v in &inv {
        acc.add(v);
        prefix.push(acc.value());
    }
    let upto = |y: u64| -> f64 {
        let i = keys.partition_point(|&k| k <= y);
        if i == 0 { 0.0 } else { prefix[i - 1] }
    };
    // N(p) <= x/2 on dense grids, x/q on graded ones
    let top = |x: u64| match grid {
        Grid::Dense => x / 2,
        Grid::Graded { .. } => x.saturating_sub(1),
    };
    let mut rows = Vec::new();
    for &x in checkpoints {
        let lx = grid.ln_norm(x);
        let l = lx.ln();
        let ll_over_l = Shape::new(0.0, -1, 1).eval(grid, x);
        let r = match lemma {
            LemmaId::MertensPart4 => row(x, upto(x), l + a, 1.0 / lx),
            LemmaId::Sumplogp => {
                let s: Sum = keys
                    .iter()
                    .zip(&inv)
                    .take_while(|(&k, _)| k <= top(x))
                    .map(|(&k, &v)| v / (lx - grid.ln_norm(k)))
                    .collect();
                row(x, s.value(), 0.0, ll_over_l)
            }
            LemmaId::Sumnwpx2 => {
                let s: Sum = keys
                    .iter()
                    .zip(&inv)
                    .take_while(|(&k, _)| k <= top(x))
                    .map(|(&k, &v)| v * (lx - grid.ln_norm(k)).ln())
                    .collect();
                row(x, s.value(), l * l + a * l + b, ll_over_l)
            }
            LemmaId::Saidakeq => {
                let s: Sum = keys
                    .iter()
                    .zip(&inv)
                    .take_while(|(&k, _)| k <= top(x))
                    .map(|(&k, &v)| v * upto(grid.quotient(x, k).unwrap()))
                    .collect();
                row(x, s.value(), l * l + 2.0 * a * l + a * a + b, ll_over_l)
            }
            LemmaId::BoundnmPart5 => unreachable!(),
        };
        rows.push(r);
    }
    Ok(ResidualTable { grid, rows })
}
