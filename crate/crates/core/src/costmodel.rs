//! Closed-form work, span, overhead and DAG quantities for every algorithm,
//! plus the running-time ratios between naive and optimized variants.
//!
//! Everything is exact: inputs are rationals, and `log2` is only taken of
//! exact powers of two.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{int, log2_exact, ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum App {
    Division,
    Multiplication,
    Gcd,
    Radix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Naive,
    Optimized,
}

impl App {
    pub const ALL: [App; 4] = [App::Division, App::Multiplication, App::Gcd, App::Radix];

    pub fn name(self) -> &'static str {
        match self {
            App::Division => "division",
            App::Multiplication => "multiplication",
            App::Gcd => "gcd",
            App::Radix => "radix",
        }
    }
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Naive => "naive",
            Variant::Optimized => "optimized",
        }
    }
}

impl fmt::Display for App {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for App {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        App::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown application `{s}`")))
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Variant::Naive),
            "optimized" => Ok(Variant::Optimized),
            _ => Err(Error::InvalidInput(format!("unknown variant `{s}`"))),
        }
    }
}

/// Model parameters. `n`, `m` are term counts (`n = deg(a)+1`); `c` is the
/// key bit-size for radix sort. All fields are rationals so that
/// substitutions like `ℓ = Z/2` stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct CostInputs {
    pub n: BigRational,
    pub m: BigRational,
    pub l: BigRational,
    pub s: BigRational,
    pub c: BigRational,
    pub u: BigRational,
    pub z: BigRational,
}

impl CostInputs {
    pub fn from_ints(n: i64, m: i64, l: i64, s: i64, u: i64, z: i64) -> Self {
        CostInputs {
            n: int(n),
            m: int(m),
            l: int(l),
            s: int(s),
            c: int(32),
            u: int(u),
            z: int(z),
        }
    }

    pub fn with_c(mut self, c: i64) -> Self {
        self.c = int(c);
        self
    }
}

impl Default for CostInputs {
    fn default() -> Self {
        CostInputs::from_ints(1, 1, 1, 1, 4, 1024)
    }
}

/// The six model quantities of one program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostTuple {
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub w: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub s: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub o: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub n: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub l: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub c: BigRational,
}

impl CostTuple {
    /// `(N/K + L)·C`.
    pub fn time_bound(&self, k: &BigRational) -> Result<BigRational> {
        if !k.is_positive() {
            return Err(Error::InvalidCostInput("K must be positive".into()));
        }
        Ok((&self.n / k + &self.l) * &self.c)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidCostInput(msg.into())
}

fn positive(name: &str, v: &BigRational) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive")))
    }
}

fn log2(name: &str, v: &BigRational) -> Result<BigRational> {
    log2_exact(v)
        .map(int)
        .ok_or_else(|| bad(format!("{name} = {v} is not a power of two")))
}

fn sizes(p: &CostInputs) -> Result<()> {
    positive("m", &p.m)?;
    positive("U", &p.u)?;
    if p.n < p.m {
        return Err(bad("n must be at least m"));
    }
    Ok(())
}

pub fn division_cost(variant: Variant, p: &CostInputs) -> Result<CostTuple> {
    sizes(p)?;
    let mu = &p.n - &p.m + int(1);
    let (m, u) = (&p.m, &p.u);
    Ok(match variant {
        Variant::Naive => {
            let l = &p.l;
            positive("l", l)?;
            CostTuple {
                w: &mu * m * (int(2) * l + int(1)) / l,
                s: int(3) * &mu,
                o: int(5) * &mu * m * u / l,
                n: &mu * m / l,
                l: mu.clone(),
                c: int(3) + int(5) * u,
            }
        }
        Variant::Optimized => {
            let s = &p.s;
            positive("s", s)?;
            CostTuple {
                w: &mu * m * (int(9) * s + int(1)) / (int(4) * s),
                s: int(3) * &mu,
                o: int(9) * &mu * m * u / (int(2) * s * s),
                n: &mu * m / (int(2) * s * s),
                l: &mu / s,
                c: int(3) * s + int(9) * u,
            }
        }
    })
}

pub fn multiplication_cost(p: &CostInputs) -> Result<CostTuple> {
    positive("n", &p.n)?;
    positive("m", &p.m)?;
    positive("l", &p.l)?;
    positive("s", &p.s)?;
    let (n, m, l, s, u) = (&p.n, &p.m, &p.l, &p.s, &p.u);
    let lg = log2("m/s", &(m / s))?;
    let delta = n + s - int(1);
    Ok(CostTuple {
        w: (int(2) * m - ratio(1, 2)) * &delta,
        s: int(2) * s * s + s * &lg - s,
        o: &delta * (int(5) * m * s + int(2) * m - int(3) * s * s) * u / (s * s * l),
        n: &delta * (int(2) * m - s) / (s * s * l),
        l: lg + int(1),
        c: s * (int(2) * s - int(1)) + int(2) * u * (s + int(1)),
    })
}

pub fn gcd_cost(variant: Variant, p: &CostInputs) -> Result<CostTuple> {
    sizes(p)?;
    let (n, m, u) = (&p.n, &p.m, &p.u);
    Ok(match variant {
        Variant::Naive => {
            let l = &p.l;
            positive("l", l)?;
            CostTuple {
                w: m * (int(2) * n * l + n + l - int(1)) / l,
                s: int(3) * (m + n - int(2)),
                o: int(5) * m * u * (n + l + int(1)) / l,
                n: m * (n + l + int(1)) / l,
                l: m + n - int(2),
                c: int(3) + int(5) * u,
            }
        }
        Variant::Optimized => {
            let s = &p.s;
            positive("s", s)?;
            let nu = ratio(9, 4) + int(6) / s;
            let w = nu * m * m
                + (ratio(9, 2) * n + n / (int(2) * s) + ratio(87, 8) * s + ratio(23, 2)) * m
                - ratio(345, 16) * s * s
                - ratio(77, 4) * s;
            CostTuple {
                w,
                s: int(3) * n + int(3) * m,
                o: int(8) * m * u * (n + s) / (s * s),
                n: m * n / (s * s) + m / s,
                l: n / s + m / s,
                c: int(3) * s + int(8) * u,
            }
        }
    })
}

fn pow2(s: &BigRational) -> Result<BigRational> {
    let e = s
        .to_integer()
        .to_u32()
        .filter(|_| s.is_integer())
        .ok_or_else(|| bad("radix s must be a small non-negative integer"))?;
    Ok(BigRational::from_integer(BigInt::one() << e))
}

/// Radix sort model; `s = 1` is the naive algorithm.
pub fn radix_cost(p: &CostInputs) -> Result<CostTuple> {
    positive("n", &p.n)?;
    positive("l", &p.l)?;
    positive("s", &p.s)?;
    positive("c", &p.c)?;
    let (n, l, s, c, u) = (&p.n, &p.l, &p.s, &p.c, &p.u);
    let two_s = pow2(s)?;
    if int(8) * l + &two_s > p.z {
        return Err(bad(format!("8l + 2^s = {} exceeds Z = {}", int(8) * l + &two_s, p.z)));
    }
    let lg = log2("l", l)?;
    let w = c
        * ((int(22) * s * l + s + int(12)) / (int(4) * s * l)
            + (&two_s + int(20) * &two_s * l) / (int(16) * s * l * l)
            + int(1))
        * n
        + c * (int(16) + int(192) * l) / (int(16) * s);
    let span = c * (int(8) * &lg + int(16) / s * &lg + int(41) + int(54) / s);
    let o = c
        * u
        * (int(9) / (int(2) * s * l) * n + int(17) * &two_s / (int(16) * s * l * l) * n
            - int(1) / s);
    Ok(CostTuple {
        w,
        s: span,
        o,
        n: c / s * (int(1) / (int(2) * l) + &two_s / (int(8) * l * l)) * n,
        l: int(5) * c / s,
        c: s * (int(41) + int(8) * lg) + int(12) + int(9) * u,
    })
}

/// Cost tuple of `app`/`variant`; radix and multiplication have one variant
/// each, parameterized by `s`.
pub fn cost(app: App, variant: Variant, p: &CostInputs) -> Result<CostTuple> {
    match app {
        App::Division => division_cost(variant, p),
        App::Gcd => gcd_cost(variant, p),
        App::Multiplication => multiplication_cost(p),
        App::Radix => radix_cost(p),
    }
}

// ---- ratios --------------------------------------------------------------

/// `T₁/Tₛ` for division at `ℓ = Z/2`, `s = Z/7`.
pub fn division_ratio(u: &BigRational, z: &BigRational) -> BigRational {
    (int(3) + int(5) * u) * z / (int(3) * (z + int(21) * u))
}

/// `W₁/Wₛ = 8(Z+1)/(9Z+7)`.
pub fn division_work_ratio(z: &BigRational) -> BigRational {
    int(8) * (z + int(1)) / (int(9) * z + int(7))
}

/// `O₁/Oₛ = 20Z/441`.
pub fn division_overhead_ratio(z: &BigRational) -> BigRational {
    int(20) * z / int(441)
}

/// GCD ratio at `ℓ = Z/2`, `s = Z/6`, `m = n`.
pub fn gcd_ratio(n: &BigRational, u: &BigRational, z: &BigRational) -> BigRational {
    (int(6) * n - int(2) + z) * (int(3) + int(5) * u) * z
        / ((int(18) * n + z) * (z + int(16) * u))
}

/// Limit of [`gcd_ratio`] as `n → ∞`.
pub fn gcd_ratio_limit(u: &BigRational, z: &BigRational) -> BigRational {
    (int(3) + int(5) * u) * z / (int(3) * (z + int(16) * u))
}

/// `O₁/Oₛ` for GCD at `ℓ = Z/2`, `s = Z/6`, `m = n`.
pub fn gcd_overhead_ratio(n: &BigRational, z: &BigRational) -> BigRational {
    ratio(5, 48) * z * (int(2) * n + int(2) + z) / (int(6) * n + z)
}

/// Radix `R` in closed form (requires `ℓ` a power of two, `s` a small integer).
pub fn radix_ratio(l: &BigRational, s: &BigRational, u: &BigRational) -> Result<BigRational> {
    let lg = log2("l", l)?;
    let two_s = pow2(s)?;
    Ok((int(14) * l + int(2)) * (int(53) + int(8) * &lg + int(9) * u) * s
        / ((int(14) * l + two_s) * (int(41) * s + int(8) * s * &lg + int(12) + int(9) * u)))
}

/// Quotient of leading terms of the radix ratio at `s = log2 ℓ`:
/// `7(8 log ℓ + 9U) / (60 log ℓ)`.
pub fn radix_leading_quotient(l: &BigRational, u: &BigRational) -> Result<BigRational> {
    let lg = log2("l", l)?;
    if !lg.is_positive() {
        return Err(bad("l must exceed 1"));
    }
    Ok(int(7) * (int(8) * &lg + int(9) * u) / (int(60) * lg))
}

/// Multiplication `R` with `m = n`.
pub fn multiplication_ratio(n: &BigRational, s: &BigRational, u: &BigRational) -> Result<BigRational> {
    let lgn = log2("n", n)?;
    let lgns = log2("n/s", &(n / s))?;
    Ok((n * lgn + int(3) * n - int(1)) * (int(1) + int(4) * u)
        / ((n * lgns + int(3) * n - s) * (int(2) * u * s + int(2) * u + int(2) * s * s - s)))
}

/// The simplified form `2 log n / (s log(n/s))`.
pub fn multiplication_ratio_essential(n: &BigRational, s: &BigRational) -> Result<BigRational> {
    let lgn = log2("n", n)?;
    let lgns = log2("n/s", &(n / s))?;
    if lgns.is_zero() {
        return Err(bad("s must be smaller than n"));
    }
    Ok(int(2) * lgn / (s * lgns))
}

/// Outcome of comparing the naive and optimized variants of an application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Threshold {
    /// Whether the optimized variant has the smaller time estimate.
    pub optimized_wins: bool,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub ratio: BigRational,
}

/// Decides which variant wins: division and GCD via the large-`n` ratio in
/// `U`, `Z`; radix via the leading quotient in `ℓ`, `U`; multiplication via
/// `R(n, s, U)`.
pub fn threshold_check(app: App, p: &CostInputs) -> Result<Threshold> {
    let r = match app {
        App::Division => division_ratio(&p.u, &p.z),
        App::Gcd => gcd_ratio_limit(&p.u, &p.z),
        App::Radix => radix_leading_quotient(&p.l, &p.u)?,
        App::Multiplication => multiplication_ratio(&p.n, &p.s, &p.u)?,
    };
    Ok(Threshold {
        optimized_wins: r > BigRational::one(),
        ratio: r,
    })
}

// ---- registry --------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    W,
    S,
    O,
    N,
    L,
    C,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::W,
        Component::S,
        Component::O,
        Component::N,
        Component::L,
        Component::C,
    ];

    fn pick(self, t: &CostTuple) -> BigRational {
        match self {
            Component::W => t.w.clone(),
            Component::S => t.s.clone(),
            Component::O => t.o.clone(),
            Component::N => t.n.clone(),
            Component::L => t.l.clone(),
            Component::C => t.c.clone(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Component::W => "W",
            Component::S => "S",
            Component::O => "O",
            Component::N => "N",
            Component::L => "L",
            Component::C => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    Division,
    DivisionWork,
    DivisionOverhead,
    Gcd,
    GcdLimit,
    GcdOverhead,
    Radix,
    RadixLeading,
    Multiplication,
    MultiplicationEssential,
}

impl RatioKind {
    pub const ALL: [RatioKind; 10] = [
        RatioKind::Division,
        RatioKind::DivisionWork,
        RatioKind::DivisionOverhead,
        RatioKind::Gcd,
        RatioKind::GcdLimit,
        RatioKind::GcdOverhead,
        RatioKind::Radix,
        RatioKind::RadixLeading,
        RatioKind::Multiplication,
        RatioKind::MultiplicationEssential,
    ];

    fn name(self) -> &'static str {
        match self {
            RatioKind::Division => "ratio.division",
            RatioKind::DivisionWork => "ratio.division.W",
            RatioKind::DivisionOverhead => "ratio.division.O",
            RatioKind::Gcd => "ratio.gcd",
            RatioKind::GcdLimit => "ratio.gcd.limit",
            RatioKind::GcdOverhead => "ratio.gcd.O",
            RatioKind::Radix => "ratio.radix",
            RatioKind::RadixLeading => "ratio.radix.leading",
            RatioKind::Multiplication => "ratio.multiplication",
            RatioKind::MultiplicationEssential => "ratio.multiplication.essential",
        }
    }

    fn eval(self, p: &CostInputs) -> Result<BigRational> {
        Ok(match self {
            RatioKind::Division => division_ratio(&p.u, &p.z),
            RatioKind::DivisionWork => division_work_ratio(&p.z),
            RatioKind::DivisionOverhead => division_overhead_ratio(&p.z),
            RatioKind::Gcd => gcd_ratio(&p.n, &p.u, &p.z),
            RatioKind::GcdLimit => gcd_ratio_limit(&p.u, &p.z),
            RatioKind::GcdOverhead => gcd_overhead_ratio(&p.n, &p.z),
            RatioKind::Radix => radix_ratio(&p.l, &p.s, &p.u)?,
            RatioKind::RadixLeading => radix_leading_quotient(&p.l, &p.u)?,
            RatioKind::Multiplication => multiplication_ratio(&p.n, &p.s, &p.u)?,
            RatioKind::MultiplicationEssential => multiplication_ratio_essential(&p.n, &p.s)?,
        })
    }
}

/// A named closed-form quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Cost(App, Variant, Component),
    Ratio(RatioKind),
}

impl Formula {
    /// e.g. `division.naive.W`, `radix.S`, `ratio.gcd.limit`.
    pub fn name(&self) -> String {
        match self {
            Formula::Cost(app @ (App::Division | App::Gcd), v, c) => {
                format!("{app}.{v}.{}", c.name())
            }
            Formula::Cost(app, _, c) => format!("{app}.{}", c.name()),
            Formula::Ratio(k) => k.name().to_string(),
        }
    }

    pub fn eval(&self, p: &CostInputs) -> Result<BigRational> {
        match *self {
            Formula::Cost(app, v, c) => Ok(c.pick(&cost(app, v, p)?)),
            Formula::Ratio(k) => k.eval(p),
        }
    }
}

/// Every formula the model knows, in a stable order.
pub fn formulas() -> Vec<Formula> {
    let mut out = Vec::new();
    for app in App::ALL {
        let variants: &[Variant] = match app {
            App::Division | App::Gcd => &[Variant::Naive, Variant::Optimized],
            _ => &[Variant::Optimized],
        };
        for &v in variants {
            for c in Component::ALL {
                out.push(Formula::Cost(app, v, c));
            }
        }
    }
    out.extend(RatioKind::ALL.into_iter().map(Formula::Ratio));
    out
}

pub fn formula(name: &str) -> Option<Formula> {
    formulas().into_iter().find(|f| f.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        ratio(n, d)
    }

    fn tuple(w: BigRational, s: i64, o: i64, n: BigRational, l: i64, c: i64) -> CostTuple {
        CostTuple {
            w,
            s: int(s),
            o: int(o),
            n,
            l: int(l),
            c: int(c),
        }
    }

    #[test]
    fn division_examples() {
        let p = CostInputs::from_ints(17, 8, 4, 2, 4, 1024);
        assert_eq!(
            division_cost(Variant::Naive, &p).unwrap(),
            tuple(int(180), 30, 400, int(20), 10, 23)
        );
        assert_eq!(
            division_cost(Variant::Optimized, &p).unwrap(),
            tuple(int(190), 30, 360, int(10), 5, 42)
        );
        let one = CostInputs::from_ints(17, 8, 1, 1, 4, 1024);
        assert_ne!(
            division_cost(Variant::Naive, &one).unwrap(),
            division_cost(Variant::Optimized, &one).unwrap()
        );
        assert!(division_cost(Variant::Naive, &CostInputs::from_ints(3, 8, 4, 2, 4, 64)).is_err());
    }

    #[test]
    fn multiplication_examples() {
        let p = CostInputs::from_ints(8, 8, 4, 2, 4, 1024);
        assert_eq!(
            multiplication_cost(&p).unwrap(),
            tuple(r(279, 2), 10, 189, r(63, 8), 3, 30)
        );
        let p = CostInputs::from_ints(8, 6, 4, 2, 4, 1024);
        assert!(multiplication_cost(&p).is_err());
    }

    #[test]
    fn gcd_examples() {
        let p = CostInputs::from_ints(8, 8, 4, 2, 4, 1024);
        assert_eq!(
            gcd_cost(Variant::Naive, &p).unwrap(),
            tuple(int(150), 42, 520, int(26), 14, 23)
        );
        assert_eq!(
            gcd_cost(Variant::Optimized, &p).unwrap(),
            tuple(r(3125, 4), 48, 640, int(20), 8, 38)
        );
        let p = CostInputs::from_ints(100, 30, 4, 5, 4, 1024);
        assert_eq!(gcd_cost(Variant::Optimized, &p).unwrap().s, int(390));
    }

    #[test]
    fn radix_examples() {
        let p = CostInputs::from_ints(65536, 1, 64, 4, 4, 1024);
        let t = radix_cost(&p).unwrap();
        assert_eq!((t.n, t.l, t.c), (int(4352), int(40), int(404)));
        let p = CostInputs::from_ints(65536, 1, 64, 32, 4, i64::MAX);
        assert_eq!(radix_cost(&p).unwrap().l, int(5));
        let p = CostInputs::from_ints(65536, 1, 48, 4, 4, 1024);
        assert!(radix_cost(&p).is_err());
        let p = CostInputs::from_ints(65536, 1, 128, 4, 4, 1024);
        assert!(radix_cost(&p).is_err(), "8·128 + 16 > 1024");
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(division_ratio(&int(4), &int(128)), r(2944, 636));
        assert_eq!(gcd_ratio_limit(&int(4), &int(128)), r(2944, 576));
        assert_eq!(
            multiplication_ratio_essential(&int(4096), &int(4)).unwrap(),
            r(3, 5)
        );
        assert_eq!(
            multiplication_ratio(&int(64), &int(1), &int(4)).unwrap(),
            int(1)
        );
    }

    #[test]
    fn thresholds() {
        let mut p = CostInputs {
            z: int(13),
            u: r(3, 2),
            ..CostInputs::default()
        };
        assert!(threshold_check(App::Division, &p).unwrap().optimized_wins);
        p.z = int(9);
        assert!(!threshold_check(App::Gcd, &p).unwrap().optimized_wins);
        p.u = int(4);
        p.l = BigRational::from_integer(BigInt::one() << 32);
        assert!(threshold_check(App::Radix, &p).unwrap().optimized_wins);
        p.l = BigRational::from_integer(BigInt::one() << 64);
        assert!(!threshold_check(App::Radix, &p).unwrap().optimized_wins);
    }

    /// The closed-form ratios are `T₁/Tₛ` with `K₁ = m/ℓ` and `Kₛ = m/(2s)` (division)
    /// or `Kₛ = m/s` (gcd).
    #[test]
    fn ratios_follow_from_tuples() {
        for z in [14i64, 28, 70, 140, 448] {
            for u in [r(3, 2), int(4), int(100)] {
                let zr = int(z);
                let mut p = CostInputs::from_ints(1000, 500, 1, 1, 1, z);
                p.u = u.clone();
                p.l = &zr / int(2);
                p.s = &zr / int(7);
                let t1 = division_cost(Variant::Naive, &p).unwrap();
                let ts = division_cost(Variant::Optimized, &p).unwrap();
                let k1 = &p.m / &p.l;
                let ks = &p.m / (int(2) * &p.s);
                let got = t1.time_bound(&k1).unwrap() / ts.time_bound(&ks).unwrap();
                assert_eq!(got, division_ratio(&u, &zr));

                let mut g = p.clone();
                g.m = g.n.clone();
                g.s = &zr / int(6);
                let t1 = gcd_cost(Variant::Naive, &g).unwrap();
                let ts = gcd_cost(Variant::Optimized, &g).unwrap();
                let got = t1.time_bound(&(&g.m / &g.l)).unwrap()
                    / ts.time_bound(&(&g.m / &g.s)).unwrap();
                assert_eq!(got, gcd_ratio(&g.n, &u, &zr));
            }
        }
    }

    #[test]
    fn registry_is_enumerable() {
        let all = formulas();
        assert_eq!(all.len(), 2 * 6 + 6 + 2 * 6 + 6 + RatioKind::ALL.len());
        let names: std::collections::HashSet<_> = all.iter().map(|f| f.name()).collect();
        assert_eq!(names.len(), all.len());
        let f = formula("division.naive.C").unwrap();
        assert_eq!(f.eval(&CostInputs::from_ints(17, 8, 4, 2, 4, 64)).unwrap(), int(23));
        assert!(formula("nope").is_none());
        assert_eq!(
            formula("ratio.division").unwrap().eval(&CostInputs::from_ints(1, 1, 1, 1, 4, 128)).unwrap(),
            r(2944, 636)
        );
    }
}
