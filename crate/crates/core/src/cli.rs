//! Command-line front end. Every command writes CSV with a versioned header comment.

use crate::census::{self, Arith, CensusRequest, Statistic, Subset};
use crate::constants::{self, ConstantEstimate};
use crate::error::{invalid, Error, Result};
use crate::gaussian::Gaussian;
use crate::graded::GradedInstance;
use crate::instance::Monoid;
use crate::integers::Integers;
use crate::monoid::{check_h, Grid};
use crate::series;
use crate::verify::{self, LemmaId, ResidualTable, TheoremId};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::io::Write;

pub const CSV_VERSION: &str = "hmonoid-csv/1";

#[derive(Parser, Debug)]
#[command(name = "hmonoid", version, about = "Exact censuses of h-free and h-full elements in free abelian monoids")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// z, gaussian, fq:<q>, or a graded definition file
    #[arg(long, global = true, default_value = "z")]
    instance: String,
    #[arg(long, global = true, default_value_t = 2)]
    h: u32,
    /// A single norm key: decimal (1e6, 10^6) or d<N> for degrees
    #[arg(long, global = true)]
    x: Option<String>,
    /// Comma-separated norm keys
    #[arg(long, global = true, value_delimiter = ',')]
    checkpoints: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = SubsetArg::Hfree)]
    subset: SubsetArg,
    /// Comma-separated prime norms to exclude
    #[arg(long, global = true, value_delimiter = ',')]
    exclude: Vec<String>,
    #[arg(long, global = true, default_value_t = 0.5)]
    epsilon: f64,
    /// Prime-sum cutoff for constants (norm key)
    #[arg(long, global = true)]
    cutoff: Option<String>,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write CSV here instead of standard output
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[arg(long, global = true, hide = true)]
    inject_alpha_fault: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SubsetArg {
    All,
    Hfree,
    Hfull,
    Neither,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ArithArg {
    Omega,
    Bigomega,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the constants entering the theorems
    Constants,
    /// Count elements of a subset
    Count,
    /// Sum omega^k or Omega^k over a subset
    Moments {
        #[arg(long, value_enum, default_value_t = ArithArg::Omega)]
        statistic: ArithArg,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Fraction of elements far from the normal order loglog N
    Violations {
        #[arg(long, value_enum, default_value_t = ArithArg::Omega)]
        statistic: ArithArg,
    },
    /// Coefficients of the local polynomial for h-full counting
    Alpha,
    /// Count h-full elements by series convolution and compare with the census
    Convolve,
    /// Residuals of a theorem's prediction
    Verify {
        #[arg(long)]
        theorem: String,
    },
    /// Residuals of a lemma's asymptotic
    Lemma {
        #[arg(long)]
        lemma: String,
    },
}

pub fn parse_instance(name: &str) -> Result<Box<dyn Monoid>> {
    match name {
        "z" | "integers" => Ok(Box::new(Integers::new())),
        "gaussian" | "zi" => Ok(Box::new(Gaussian)),
        _ => {
            if let Some(q) = name.strip_prefix("fq:") {
                let q = q.parse().map_err(|_| Error::InvalidArgument(format!("bad q in {name}")))?;
                return Ok(Box::new(GradedInstance::polynomial(q)?));
            }
            let path = name.strip_prefix("graded:").unwrap_or(name);
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("unknown instance {name}: {e}")))?;
            Ok(Box::new(GradedInstance::parse_definition(&text)?))
        }
    }
}

/// Parses a norm key: `d<N>` on graded grids, an integer, `<m>e<k>` or `10^k` on dense ones.
pub fn parse_key(s: &str, grid: Grid) -> Result<u64> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("bad norm key {s:?}"));
    match grid {
        Grid::Graded { .. } => s.strip_prefix('d').and_then(|d| d.parse().ok()).ok_or_else(bad),
        Grid::Dense => {
            if s.starts_with('d') {
                return invalid(format!("degree key {s} on a dense grid"));
            }
            let (m, k) = if let Some((m, k)) = s.split_once(['e', 'E']) {
                (m, k)
            } else if let Some(k) = s.strip_prefix("10^") {
                ("1", k)
            } else {
                (s, "0")
            };
            let m: u64 = m.parse().map_err(|_| bad())?;
            let k: u32 = k.parse().map_err(|_| bad())?;
            10u64.checked_pow(k).and_then(|p| p.checked_mul(m)).ok_or_else(bad)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Consistency(_) => 2,
        _ => 1,
    }
}

/// Runs the command line `args` (without the program name). Returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("hmonoid")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(&cli) {
        Ok(csv) => {
            let res = match &cli.common.out {
                Some(p) => std::fs::write(p, csv.as_bytes()),
                None => out.write_all(csv.as_bytes()),
            };
            match res {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn checkpoints(c: &Common, grid: Grid) -> Result<Vec<u64>> {
    let mut v: Vec<u64> = c.checkpoints.iter().map(|s| parse_key(s, grid)).collect::<Result<_>>()?;
    if let Some(x) = &c.x {
        v.push(parse_key(x, grid)?);
    }
    if v.is_empty() {
        return invalid("give --x or --checkpoints");
    }
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

fn subset(c: &Common) -> Subset {
    match c.subset {
        SubsetArg::All => Subset::All,
        SubsetArg::Hfree => Subset::HFree(c.h),
        SubsetArg::Hfull => Subset::HFull(c.h),
        SubsetArg::Neither => Subset::Neither(c.h),
    }
}

fn subset_name(s: Subset) -> String {
    match s {
        Subset::All => "all".into(),
        Subset::HFree(h) => format!("hfree{h}"),
        Subset::HFull(h) => format!("hfull{h}"),
        Subset::Neither(h) => format!("neither{h}"),
    }
}

fn key_text(grid: Grid, k: u64) -> String {
    crate::monoid::NormKey { grid, key: k }.to_string()
}

fn header(cmd: &str, c: &Common, inst: &dyn Monoid) -> String {
    format!("# {CSV_VERSION} {cmd} instance={} h={}\n", inst.name(), c.h)
}

fn faulty_alpha(h: u32) -> Result<series::AlphaPolynomial> {
    let mut a = series::alpha_coeffs(h)?;
    match a.alpha.first_mut() {
        Some(t) => t.1 += 1,
        None => a.alpha.push((2 * h + 3, 1)),
    }
    Ok(a)
}

fn execute(cli: &Cli) -> Result<String> {
    let c = &cli.common;
    check_h(c.h)?;
    if c.workers == 0 {
        return invalid("--workers must be at least 1");
    }
    let inst = parse_instance(&c.instance)?;
    let inst = inst.as_ref();
    let grid = inst.grid();
    let cutoff = match &c.cutoff {
        Some(s) => parse_key(s, grid)?,
        None => constants::default_cutoff(inst),
    };
    let excl_keys: Vec<u64> = c.exclude.iter().map(|s| parse_key(s, grid)).collect::<Result<_>>()?;
    let excluded = census::primes_with_norms(inst, &excl_keys)?;
    let mut s = String::new();
    match &cli.cmd {
        Cmd::Constants => {
            s += &header("constants", c, inst);
            s += "name,value,tail_bound,cutoff,kind\n";
            let h = c.h;
            let mut rows: Vec<(String, ConstantEstimate)> = vec![
                (format!("zeta({h})"), constants::zeta_value(inst, h as f64, cutoff)?),
                ("A".into(), constants::mertens_a(inst, cutoff)?),
                ("B".into(), constants::const_b(grid)),
            ];
            let (c1, c2) = constants::const_c(inst, h, cutoff)?;
            rows.push(("C1".into(), c1));
            rows.push(("C2".into(), c2));
            rows.push((format!("gamma_{h}"), constants::gamma_h(inst, h, cutoff)?));
            rows.push((format!("L_{h}({})", h + 1), constants::l_h(inst, h, h + 1, cutoff)?));
            rows.push((format!("L_{h}({})", 2 * h), constants::l_h(inst, h, 2 * h, cutoff)?));
            let (d1, d2) = constants::const_d(inst, h, cutoff)?;
            rows.push(("D1".into(), d1));
            rows.push(("D2".into(), d2));
            if grid.is_dense() {
                let ap_cut = cutoff.min(1_000_000);
                rows.push(("A'".into(), constants::a_prime(inst, ap_cut)?));
            }
            for (name, e) in rows {
                let kind = if e.rigorous { "rigorous" } else { "heuristic" };
                let cut = if e.cutoff == 0 { "-".to_string() } else { key_text(grid, e.cutoff) };
                writeln!(s, "{name},{},{},{cut},{kind}", e.value, e.tail_bound).unwrap();
            }
        }
        Cmd::Count | Cmd::Moments { .. } | Cmd::Violations { .. } => {
            let (name, stat) = match cli.cmd {
                Cmd::Count => ("count".to_string(), Statistic::Count),
                Cmd::Moments { statistic, k } => {
                    let of = arith(statistic);
                    (format!("{}^{k}", arith_name(of)), Statistic::Moment { of, k })
                }
                Cmd::Violations { statistic } => {
                    let of = arith(statistic);
                    (format!("violations({},{})", arith_name(of), c.epsilon), Statistic::Violation { of, epsilon: c.epsilon })
                }
                _ => unreachable!(),
            };
            let cmd = match cli.cmd {
                Cmd::Count => "count",
                Cmd::Moments { .. } => "moments",
                _ => "violations",
            };
            let sub = subset(c);
            let req = CensusRequest::new(sub, stat, &checkpoints(c, grid)?)
                .excluding(&excluded)
                .workers(c.workers);
            let res = census::run(inst, &req)?;
            s += &header(cmd, c, inst);
            s += "x,subset,statistic,value\n";
            for (x, v) in res.rows {
                writeln!(s, "{},{},{name},{v}", key_text(grid, x), subset_name(sub)).unwrap();
            }
        }
        Cmd::Alpha => {
            let a = if c.inject_alpha_fault { faulty_alpha(c.h)? } else { series::alpha_coeffs(c.h)? };
            series::check_alpha_identity(&a)?;
            s += &format!("# {CSV_VERSION} alpha h={}\n", c.h);
            s += "r,alpha\n";
            for (r, v) in &a.alpha {
                writeln!(s, "{r},{v}").unwrap();
            }
        }
        Cmd::Convolve => {
            let a = if c.inject_alpha_fault { faulty_alpha(c.h)? } else { series::alpha_coeffs(c.h)? };
            let cps = checkpoints(c, grid)?;
            let req = CensusRequest::new(Subset::HFull(c.h), Statistic::Count, &cps).workers(c.workers);
            let census = census::run(inst, &req)?;
            s += &header("convolve", c, inst);
            s += "x,convolution,census,agree\n";
            let mut bad = Vec::new();
            for (x, v) in census.rows {
                let conv = series::hfull_count_with_alpha(inst, &a, x)?;
                let cen = v.integer().unwrap();
                writeln!(s, "{},{conv},{cen},{}", key_text(grid, x), conv == cen).unwrap();
                if conv != cen {
                    bad.push(key_text(grid, x));
                }
            }
            if !bad.is_empty() {
                return Err(Error::Consistency(format!(
                    "convolution and census disagree at {}",
                    bad.join(",")
                )));
            }
        }
        Cmd::Verify { theorem } => {
            let t: TheoremId = theorem.parse()?;
            let table = verify::residual_table(t, inst, c.h, &excluded, &checkpoints(c, grid)?, c.workers, cutoff)?;
            s += &header(&format!("verify {}", t.name()), c, inst);
            residual_csv(&mut s, &table);
        }
        Cmd::Lemma { lemma } => {
            let l: LemmaId = lemma.parse()?;
            let table = verify::lemma_check(l, inst, &checkpoints(c, grid)?, cutoff)?;
            s += &header(&format!("lemma {}", l.name()), c, inst);
            residual_csv(&mut s, &table);
        }
    }
    Ok(s)
}

fn residual_csv(s: &mut String, t: &ResidualTable) {
    s.push_str("x,exact,predicted,residual,normalized\n");
    for r in &t.rows {
        writeln!(
            s,
            "{},{},{},{},{}",
            key_text(t.grid, r.x),
            r.exact_text,
            r.predicted,
            r.residual,
            r.normalized
        )
        .unwrap();
    }
    if let Ok(e) = verify::fit_error_exponent(t) {
        writeln!(s, "# fitted_exponent={e}").unwrap();
    }
}

fn arith(a: ArithArg) -> Arith {
    match a {
        ArithArg::Omega => Arith::Omega,
        ArithArg::Bigomega => Arith::BigOmega,
    }
}

fn arith_name(a: Arith) -> &'static str {
    match a {
        Arith::Omega => "omega",
        Arith::BigOmega => "bigomega",
    }
}
