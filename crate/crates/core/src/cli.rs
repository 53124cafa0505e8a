//! `mmm` command line: simulate, sweep, estimate and verify.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure,
//! 3 simulation error.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::costmodel::{self, App, CostInputs, Formula, Variant};
use crate::division::{naive_division, optimized_division};
use crate::error::Error;
use crate::field::Field;
use crate::gcd::{naive_gcd, optimized_gcd};
use crate::machine::{Fault, Machine, MachineParams};
use crate::metrics::{antichain_bound, graham_brent_bound, ProgramRun};
use crate::multiplication::plain_multiplication;
use crate::oracle::{oracle_divmod, oracle_gcd, oracle_mul};
use crate::poly::Poly;
use crate::rational::{int, parse_rational};
use crate::report::{emit, emit_records, Format, ReportRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_SIM: i32 = 3;

/// Default prime: 7·2^26 + 1.
pub const DEFAULT_PRIME: u64 = 469_762_049;

#[derive(Debug, Parser)]
#[command(name = "mmm", version, about = "Many-core machine model simulator and cost model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one algorithm and report measured against predicted metrics.
    Run(RunArgs),
    /// Run or evaluate over a parameter grid (`a:b:*k`, `a:b:+k`, `x,y,z`).
    Sweep(SweepArgs),
    /// Evaluate the closed-form model only, and say which variant wins.
    Estimate(RunArgs),
    /// Cross-check simulated outputs against the serial oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AppArg {
    Division,
    Multiplication,
    Gcd,
    Radix,
}

impl From<AppArg> for App {
    fn from(a: AppArg) -> App {
        match a {
            AppArg::Division => App::Division,
            AppArg::Multiplication => App::Multiplication,
            AppArg::Gcd => App::Gcd,
            AppArg::Radix => App::Radix,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Naive,
    Optimized,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Naive => Variant::Naive,
            VariantArg::Optimized => Variant::Optimized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    pub app: AppArg,
    #[arg(long, value_enum, default_value = "naive")]
    pub variant: VariantArg,
    /// Terms of the first operand (deg + 1); number of keys for radix.
    #[arg(long, default_value_t = 64)]
    pub n: u64,
    /// Terms of the second operand.
    #[arg(long, default_value_t = 32)]
    pub m: u64,
    /// Threads per block (naive variants, multiplication, radix).
    #[arg(long, default_value_t = 4)]
    pub l: u64,
    /// Steps per kernel / program parameter.
    #[arg(long, default_value_t = 2)]
    pub s: u64,
    /// Key bit-size (radix).
    #[arg(long, default_value_t = 32)]
    pub c: u64,
    /// Prime modulus of the coefficient field.
    #[arg(long = "p", default_value_t = DEFAULT_PRIME)]
    pub p: u64,
    /// Transfer cost of one word, e.g. 4 or 3/2.
    #[arg(long = "U", default_value = "4")]
    pub u: String,
    /// Local memory words per SM.
    #[arg(long = "Z", default_value_t = 1024)]
    pub z: u64,
    /// Number of SMs for the Graham-Brent bound.
    #[arg(long = "P")]
    pub sms: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub app: AppArg,
    #[arg(long, value_enum, default_value = "naive")]
    pub variant: VariantArg,
    #[arg(long, default_value = "64")]
    pub n: String,
    #[arg(long, default_value = "32")]
    pub m: String,
    #[arg(long, default_value = "4")]
    pub l: String,
    #[arg(long, default_value = "2")]
    pub s: String,
    #[arg(long, default_value = "32")]
    pub c: String,
    #[arg(long = "p", default_value_t = DEFAULT_PRIME)]
    pub p: u64,
    #[arg(long = "U", default_value = "4")]
    pub u: String,
    #[arg(long = "Z", default_value = "1024")]
    pub z: String,
    #[arg(long = "P")]
    pub sms: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Evaluate one named model formula over the grid instead.
    #[arg(long)]
    pub formula: Option<String>,
    /// Print the names of all model formulas and exit.
    #[arg(long)]
    pub list_formulas: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Application to verify; all simulated ones when omitted.
    pub app: Option<AppArg>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Field modulus; alternates between 7 and 101 when omitted.
    #[arg(long = "p")]
    pub p: Option<u64>,
    /// Largest operand size.
    #[arg(long, default_value_t = 64)]
    pub max_n: usize,
    #[arg(long = "Z", default_value_t = 1024)]
    pub z: usize,
    /// Corrupt one global word: `ARRAY:LAUNCH:INDEX` (testing aid).
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

/// Validated parameters of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub app: App,
    pub variant: Variant,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub s: usize,
    pub c: usize,
    pub p: u64,
    pub u: BigRational,
    pub z: usize,
    pub sms: Option<u64>,
    pub seed: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verify(String),
    Sim(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Sim(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn to_usize(v: u64, name: &str) -> Result<usize, Failure> {
    usize::try_from(v).map_err(|_| usage(format!("--{name} is too large")))
}

impl Config {
    /// Checks every precondition of the target algorithm (or model).
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        MachineParams::new(self.u.clone(), self.z)?;
        if self.app != App::Radix {
            Field::new(self.p)?;
        }
        if self.n < 1 || self.m < 1 {
            return bad("n and m must be at least 1".into());
        }
        if matches!(self.app, App::Division | App::Gcd) && self.n < self.m {
            return bad(format!("need n >= m (n = {}, m = {})", self.n, self.m));
        }
        if self.l < 1 || self.s < 1 {
            return bad("l and s must be at least 1".into());
        }
        let (l, s, z) = (self.l, self.s, self.z);
        match (self.app, self.variant) {
            (App::Division, Variant::Naive) if 2 * l > z => bad(format!("2l = {} exceeds Z = {z}", 2 * l)),
            (App::Division, Variant::Optimized) if 7 * s > z => {
                bad(format!("7s = {} exceeds Z = {z}", 7 * s))
            }
            (App::Multiplication, _) if 2 * s * l + 2 * s - 1 > z => {
                bad(format!("2sl + 2s - 1 = {} exceeds Z = {z}", 2 * s * l + 2 * s - 1))
            }
            (App::Gcd, Variant::Naive) if l + 7 > z => bad(format!("l = {l} too large for Z = {z}")),
            (App::Gcd, Variant::Optimized) if s < 2 => bad("optimized gcd needs s > 1".into()),
            (App::Gcd, Variant::Optimized) if 8 * s + 9 > z => {
                bad(format!("8s + 9 = {} exceeds Z = {z}", 8 * s + 9))
            }
            (App::Radix, _) => {
                if s >= 64 || 8 * l as u128 + (1u128 << s) > z as u128 {
                    bad(format!("8l + 2^s exceeds Z = {z}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }?;
        if self.sms == Some(0) {
            return bad("P must be at least 1".into());
        }
        Ok(())
    }

    fn inputs(&self) -> CostInputs {
        CostInputs {
            n: int(self.n as i64),
            m: int(self.m as i64),
            l: int(self.l as i64),
            s: int(self.s as i64),
            c: int(self.c as i64),
            u: self.u.clone(),
            z: int(self.z as i64),
        }
    }

    fn describe(&self) -> String {
        format!(
            "{} {} (n = {}, m = {}, l = {}, s = {})",
            self.app, self.variant, self.n, self.m, self.l, self.s
        )
    }

    /// Block size the simulated kernels use.
    fn block_size(&self) -> usize {
        match (self.app, self.variant) {
            (App::Division | App::Gcd, Variant::Optimized) => 3 * self.s,
            _ => self.l,
        }
    }
}

fn from_run_args(a: &RunArgs) -> Result<Config, Failure> {
    let u = parse_rational(&a.u).ok_or_else(|| usage(format!("--U: not a number: {}", a.u)))?;
    Ok(Config {
        app: a.app.into(),
        variant: a.variant.into(),
        n: to_usize(a.n, "n")?,
        m: to_usize(a.m, "m")?,
        l: to_usize(a.l, "l")?,
        s: to_usize(a.s, "s")?,
        c: to_usize(a.c, "c")?,
        p: a.p,
        u,
        z: to_usize(a.z, "Z")?,
        sms: a.sms,
        seed: a.seed,
    })
}

/// Simulates one configuration; returns the run and the block size used.
pub fn simulate(cfg: &Config) -> Result<ProgramRun, Error> {
    simulate_on(cfg, Machine::new(MachineParams::new(cfg.u.clone(), cfg.z)?))
}

fn simulate_on(cfg: &Config, mut machine: Machine) -> Result<ProgramRun, Error> {
    let field = Field::new(cfg.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a = Poly::random(&mut rng, &field, cfg.n);
    let b = Poly::random(&mut rng, &field, cfg.m);
    let mm = &mut machine;
    let run = match (cfg.app, cfg.variant) {
        (App::Division, Variant::Naive) => naive_division(mm, &field, &a, &b, cfg.l).map(|o| o.run),
        (App::Division, Variant::Optimized) => {
            optimized_division(mm, &field, &a, &b, cfg.s).map(|o| o.run)
        }
        (App::Gcd, Variant::Naive) => naive_gcd(mm, &field, &a, &b, cfg.l).map(|o| o.run),
        (App::Gcd, Variant::Optimized) => optimized_gcd(mm, &field, &a, &b, cfg.s).map(|o| o.run),
        (App::Multiplication, _) => {
            plain_multiplication(mm, &field, &a, &b, cfg.s, cfg.l).map(|o| o.run)
        }
        (App::Radix, _) => {
            return Err(Error::InvalidInput(
                "radix sort is covered by the cost model only; use `estimate`".into(),
            ))
        }
    };
    run.map_err(|e| e.context(cfg.describe()))
}

/// Measured metrics of a simulation next to the model's predictions.
pub fn run_experiment(cfg: &Config) -> Result<ReportRow, Error> {
    let run = simulate(cfg)?;
    let pm = &run.metrics;
    let mut row = base_row(cfg);
    row.w_meas = Some(int(pm.w as i64));
    row.s_meas = Some(int(pm.s as i64));
    row.o_meas = Some(pm.o.clone());
    row.n_meas = Some(int(pm.structure.n as i64));
    row.l_meas = Some(int(pm.structure.l as i64));
    row.c_meas = Some(pm.c.clone());
    row.k = Some(int(pm.structure.k as i64));
    row.t_bound = Some(match cfg.sms {
        Some(p) => graham_brent_bound(pm, p)?,
        None => antichain_bound(pm)?,
    });
    if let Ok(t) = costmodel::cost(cfg.app, cfg.variant, &cfg.inputs()) {
        fill_predicted(&mut row, &t);
    }
    Ok(row)
}

fn base_row(cfg: &Config) -> ReportRow {
    ReportRow {
        app: cfg.app.to_string(),
        variant: cfg.variant.to_string(),
        n: Some(int(cfg.n as i64)),
        m: Some(int(cfg.m as i64)),
        l: Some(int(cfg.block_size() as i64)),
        s: Some(int(cfg.s as i64)),
        u: Some(cfg.u.clone()),
        z: Some(int(cfg.z as i64)),
        ..Default::default()
    }
}

fn fill_predicted(row: &mut ReportRow, t: &costmodel::CostTuple) {
    row.w_pred = Some(t.w.clone());
    row.s_pred = Some(t.s.clone());
    row.o_pred = Some(t.o.clone());
    row.n_pred = Some(t.n.clone());
    row.l_pred = Some(t.l.clone());
    row.c_pred = Some(t.c.clone());
}

/// Model-only rows for both variants, plus which one wins.
pub fn estimate(cfg: &Config) -> Result<(Vec<ReportRow>, Option<Variant>), Error> {
    let inputs = cfg.inputs();
    let threshold = costmodel::threshold_check(cfg.app, &inputs).ok();
    let mut rows = Vec::new();
    for variant in [Variant::Naive, Variant::Optimized] {
        let mut c = cfg.clone();
        c.variant = variant;
        let mut inp = inputs.clone();
        // multiplication and radix: the naive algorithm is s = 1
        if matches!(cfg.app, App::Multiplication | App::Radix) && variant == Variant::Naive {
            c.s = 1;
            inp.s = int(1);
        }
        let mut row = base_row(&c);
        row.l = Some(inp.l.clone());
        if let Ok(t) = costmodel::cost(cfg.app, variant, &inp) {
            let k = match (cfg.app, variant) {
                (App::Division | App::Gcd, Variant::Naive) => Some(&inp.m / &inp.l),
                (App::Division, Variant::Optimized) => Some(&inp.m / (int(2) * &inp.s)),
                (App::Gcd, Variant::Optimized) => Some(&inp.m / &inp.s),
                _ => None,
            };
            row.t_bound = match (cfg.sms, &k) {
                (Some(p), _) => t.time_bound(&int(p as i64)).ok(),
                (None, Some(k)) => t.time_bound(k).ok(),
                _ => None,
            };
            row.k = k;
            fill_predicted(&mut row, &t);
        }
        row.ratio = threshold.as_ref().map(|t| t.ratio.clone());
        rows.push(row);
    }
    let winner = threshold.map(|t| {
        if t.optimized_wins {
            Variant::Optimized
        } else {
            Variant::Naive
        }
    });
    Ok((rows, winner))
}

/// Expands `a:b:*k`, `a:b:+k`, `a:b:k`, `a:b`, `x,y,z` or a single value.
pub fn parse_range(spec: &str) -> Result<Vec<BigRational>, Error> {
    let bad = || Error::InvalidInput(format!("bad range `{spec}`"));
    let num = |s: &str| parse_rational(s).ok_or_else(bad);
    if spec.contains(',') {
        return spec.split(',').map(num).collect();
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b] | [a, b, _] => {
            let (start, end) = (num(a)?, num(b)?);
            let step = parts.get(2).copied().unwrap_or("+1");
            let (mul, k) = match step.strip_prefix('*') {
                Some(k) => (true, num(k)?),
                None => (false, num(step.trim_start_matches('+'))?),
            };
            if (mul && k <= int(1)) || (!mul && k <= int(0)) || (mul && start <= int(0)) {
                return Err(bad());
            }
            let mut out = Vec::new();
            let mut v = start;
            while v <= end {
                out.push(v.clone());
                v = if mul { &v * &k } else { &v + &k };
                if out.len() > 100_000 {
                    return Err(bad());
                }
            }
            Ok(out)
        }
        _ => Err(bad()),
    }
}

fn integers(spec: &str, name: &str) -> Result<Vec<usize>, Failure> {
    let values = parse_range(spec).map_err(|e| usage(format!("--{name}: {e}")))?;
    values
        .iter()
        .map(|v| {
            v.is_integer()
                .then(|| v.to_integer().try_into().ok())
                .flatten()
                .ok_or_else(|| usage(format!("--{name}: {v} is not a non-negative integer")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct FormulaRow {
    formula: String,
    n: usize,
    m: usize,
    l: usize,
    s: usize,
    c: usize,
    #[serde(rename = "U", serialize_with = "crate::rational::ser_rational")]
    u: BigRational,
    #[serde(rename = "Z")]
    z: usize,
    value: String,
}

const FORMULA_COLUMNS: &[&str] = &["formula", "n", "m", "l", "s", "c", "U", "Z", "value"];

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.list_formulas {
        for f in costmodel::formulas() {
            writeln!(out, "{}", f.name()).map_err(|e| usage(e.to_string()))?;
        }
        return Ok(());
    }
    let formula: Option<Formula> = match &a.formula {
        Some(name) => Some(
            costmodel::formula(name).ok_or_else(|| usage(format!("unknown formula `{name}`")))?,
        ),
        None => None,
    };
    let us = parse_range(&a.u).map_err(|e| usage(format!("--U: {e}")))?;
    let (ns, ms, ls, ss, cs, zs) = (
        integers(&a.n, "n")?,
        integers(&a.m, "m")?,
        integers(&a.l, "l")?,
        integers(&a.s, "s")?,
        integers(&a.c, "c")?,
        integers(&a.z, "Z")?,
    );
    let mut grid = Vec::new();
    for &n in &ns {
        for &m in &ms {
            for &l in &ls {
                for &s in &ss {
                    for &c in &cs {
                        for u in &us {
                            for &z in &zs {
                                grid.push(Config {
                                    app: a.app.into(),
                                    variant: a.variant.into(),
                                    n,
                                    m,
                                    l,
                                    s,
                                    c,
                                    p: a.p,
                                    u: u.clone(),
                                    z,
                                    sms: a.sms,
                                    seed: a.seed,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    let format: Format = a.format.into();
    if let Some(f) = formula {
        let rows: Vec<FormulaRow> = grid
            .iter()
            .map(|cfg| FormulaRow {
                formula: f.name(),
                n: cfg.n,
                m: cfg.m,
                l: cfg.l,
                s: cfg.s,
                c: cfg.c,
                u: cfg.u.clone(),
                z: cfg.z,
                value: f
                    .eval(&cfg.inputs())
                    .map(|v| crate::rational::format_rational(&v))
                    .unwrap_or_default(),
            })
            .collect();
        let bytes = emit_records(&rows, FORMULA_COLUMNS, format)?;
        return out.write_all(&bytes).map_err(|e| usage(e.to_string()));
    }
    // every grid point is checked before anything runs
    for cfg in &grid {
        cfg.validate().map_err(|e| usage(format!("{}: {e}", cfg.describe())))?;
    }
    let mut rows = Vec::new();
    for cfg in &grid {
        if cfg.app == App::Radix {
            rows.extend(estimate(cfg)?.0);
        } else {
            rows.push(run_experiment(cfg)?);
        }
    }
    out.write_all(&emit(&rows, format)?)
        .map_err(|e| usage(e.to_string()))
}

/// Outcome of verifying one algorithm variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyLine {
    pub app: App,
    pub variant: Variant,
    pub trials: usize,
    pub failures: usize,
    /// Description of the first mismatch, if any.
    pub first_failure: Option<String>,
}

/// Parameters of a verification campaign.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub apps: Vec<App>,
    pub trials: usize,
    pub seed: u64,
    pub p: Option<u64>,
    pub max_n: usize,
    pub z: usize,
    pub fault: Option<Fault>,
}

impl VerifyConfig {
    pub fn new(apps: Vec<App>, trials: usize, seed: u64) -> Self {
        VerifyConfig {
            apps,
            trials,
            seed,
            p: None,
            max_n: 64,
            z: 1024,
            fault: None,
        }
    }
}

/// Runs every simulated variant of the requested applications on seeded
/// random inputs and compares against the oracles.
pub fn verify(cfg: &VerifyConfig) -> Result<Vec<VerifyLine>, Error> {
    let params = MachineParams::new(int(4), cfg.z)?;
    let machine = || {
        let m = Machine::new(params.clone());
        match &cfg.fault {
            Some(f) => m.with_fault(f.clone()),
            None => m,
        }
    };
    if cfg.max_n < 1 {
        return Err(Error::InvalidInput("max-n must be at least 1".into()));
    }
    let mut lines = Vec::new();
    for &app in &cfg.apps {
        let variants: &[Variant] = match app {
            App::Multiplication => &[Variant::Optimized],
            App::Radix => {
                return Err(Error::InvalidInput(
                    "radix sort is covered by the cost model only".into(),
                ))
            }
            _ => &[Variant::Naive, Variant::Optimized],
        };
        for &variant in variants {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut line = VerifyLine {
                app,
                variant,
                trials: cfg.trials,
                failures: 0,
                first_failure: None,
            };
            for trial in 0..cfg.trials {
                let p = cfg.p.unwrap_or(if trial % 2 == 0 { 7 } else { 101 });
                let field = Field::new(p)?;
                let m = rng.gen_range(1..=cfg.max_n);
                let n = rng.gen_range(m..=cfg.max_n);
                let mut a = Poly::random(&mut rng, &field, n);
                let mut b = Poly::random(&mut rng, &field, m);
                let (ok, what) = match (app, variant) {
                    (App::Division, _) => {
                        let want = oracle_divmod(&field, &a, &b)?;
                        let out = if variant == Variant::Naive {
                            let l = rng.gen_range(1..=(cfg.z / 2).clamp(1, 16));
                            naive_division(&mut machine(), &field, &a, &b, l)?
                        } else {
                            let s = rng.gen_range(1..=(cfg.z / 7).clamp(1, 8));
                            optimized_division(&mut machine(), &field, &a, &b, s)?
                        };
                        ((out.q.clone(), out.r.clone()) == want, format!("q = {}, r = {}", out.q, out.r))
                    }
                    (App::Multiplication, _) => {
                        let s = [1, 2, 4, 8][trial % 4];
                        let l = rng.gen_range(1..=8);
                        let out = plain_multiplication(&mut machine(), &field, &a, &b, s, l)?;
                        (out.f == oracle_mul(&field, &a, &b), format!("f = {}", out.f))
                    }
                    (App::Gcd, _) => {
                        if trial % 2 == 1 {
                            // plant a common factor
                            let k = rng.gen_range(1..=m);
                            let g = Poly::random(&mut rng, &field, k);
                            let u = Poly::random(&mut rng, &field, n - k + 1);
                            let v = Poly::random(&mut rng, &field, m - k + 1);
                            a = oracle_mul(&field, &g, &u);
                            b = oracle_mul(&field, &g, &v);
                        }
                        let want = oracle_gcd(&field, &a, &b)?;
                        let out = if variant == Variant::Naive {
                            let l = rng.gen_range(1..=16);
                            naive_gcd(&mut machine(), &field, &a, &b, l)?
                        } else {
                            let s = [2, 4, 8, 16][trial % 4];
                            optimized_gcd(&mut machine(), &field, &a, &b, s)?
                        };
                        let g = out.g.monic(&field);
                        (g == want, format!("g = {g}, expected {want}"))
                    }
                    (App::Radix, _) => unreachable!(),
                };
                if !ok {
                    line.failures += 1;
                    line.first_failure.get_or_insert_with(|| {
                        format!("trial {trial} over GF({p}): a = {a}, b = {b}: {what}")
                    });
                }
            }
            lines.push(line);
        }
    }
    Ok(lines)
}

fn parse_fault(spec: &str) -> Result<Fault, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || usage(format!("--inject-fault expects ARRAY:LAUNCH:INDEX, got `{spec}`"));
    match parts.as_slice() {
        [array, launch, index] => Ok(Fault {
            array: array.to_string(),
            after_launch: launch.parse().map_err(|_| bad())?,
            index: index.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| usage(e.to_string());
    match cli.command {
        Command::Run(a) => {
            let cfg = from_run_args(&a)?;
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            if cfg.app == App::Radix {
                return Err(usage("radix sort is covered by the cost model only; use `estimate`"));
            }
            let row = run_experiment(&cfg)?;
            out.write_all(&emit(&[row], a.format.into())?).map_err(io)
        }
        Command::Estimate(a) => {
            let cfg = from_run_args(&a)?;
            MachineParams::new(cfg.u.clone(), cfg.z).map_err(|e| usage(e.to_string()))?;
            let (rows, winner) = estimate(&cfg)?;
            out.write_all(&emit(&rows, a.format.into())?).map_err(io)?;
            if let Some(w) = winner {
                writeln!(err, "winner={w}").map_err(io)?;
            }
            Ok(())
        }
        Command::Sweep(a) => sweep(&a, out),
        Command::Verify(a) => {
            let apps = match a.app {
                Some(app) => vec![app.into()],
                None => vec![App::Division, App::Multiplication, App::Gcd],
            };
            if apps.contains(&App::Radix) {
                return Err(usage("radix sort is covered by the cost model only"));
            }
            let mut cfg = VerifyConfig::new(apps, a.trials, a.seed);
            cfg.p = a.p;
            cfg.max_n = a.max_n;
            cfg.z = a.z;
            if let Some(p) = a.p {
                Field::new(p).map_err(|e| usage(e.to_string()))?;
            }
            if a.z < 64 {
                return Err(usage("verify needs Z >= 64"));
            }
            cfg.fault = a.inject_fault.as_deref().map(parse_fault).transpose()?;
            let lines = verify(&cfg)?;
            let mut failed = false;
            for l in &lines {
                writeln!(
                    out,
                    "{} {}: {} trials, {} failures",
                    l.app, l.variant, l.trials, l.failures
                )
                .map_err(io)?;
                if let Some(f) = &l.first_failure {
                    writeln!(err, "{} {} mismatch: {f}", l.app, l.variant).map_err(io)?;
                    failed = true;
                }
            }
            if failed {
                Err(Failure::Verify("oracle mismatch".into()))
            } else {
                Ok(())
            }
        }
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_VERIFY
        }
        Err(Failure::Sim(e)) => {
            let _ = writeln!(err, "simulation error: {e}");
            EXIT_SIM
        }
    }
}
