//! Euclidean GCD on the simulated machine.
//!
//! Both variants keep `st = [deg a, deg b]` in global memory and perform the
//! same elementary step: the operand with the larger degree (ties go to `a`)
//! is reduced by the other, or has its degree decremented when its leading
//! coefficient is already zero. Work stops once either degree reaches 0.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::machine::{BlockCtx, KernelSpec, Machine, Word};
use crate::metrics::ProgramRun;
use crate::poly::Poly;

#[derive(Debug, Clone)]
pub struct GcdOutput {
    /// A greatest common divisor, not normalized.
    pub g: Poly,
    pub run: ProgramRun,
}

// Step kinds decided by the leader thread.
const STOP: Word = 0;
const REDUCE: Word = 1;
const DROP_X: Word = 2;
const DROP_Y: Word = 3;

fn check_operands(a: &Poly, b: &Poly) -> Result<(usize, usize)> {
    let db = b
        .degree()
        .ok_or_else(|| Error::InvalidInput("gcd needs a nonzero second operand".into()))?;
    match a.degree() {
        Some(da) if da >= db => Ok((da + 1, db + 1)),
        _ => Err(Error::InvalidInput("gcd needs deg(a) >= deg(b)".into())),
    }
}

fn words(p: &Poly) -> Vec<Word> {
    p.coeffs().iter().map(|&c| c as Word).collect()
}

/// Picks the result once one of the degrees has reached 0 (host side).
fn conclude(a: &[Word], b: &[Word]) -> Poly {
    let pa = Poly::new(a.iter().map(|&c| c as u64).collect());
    let pb = Poly::new(b.iter().map(|&c| c as u64).collect());
    if pa.is_zero() {
        pb
    } else if pb.is_zero() {
        pa
    } else {
        // one of them is a nonzero constant
        Poly::constant(1)
    }
}

/// Decides one step from the current degrees and leading coefficients.
/// Returns `(kind, x_is_a)`.
fn decide(st_a: i64, st_b: i64, lead_a: Word, lead_b: Word) -> (Word, bool) {
    if st_a <= 0 || st_b <= 0 {
        return (STOP, true);
    }
    let x_is_a = st_a >= st_b;
    let (lx, ly) = if x_is_a { (lead_a, lead_b) } else { (lead_b, lead_a) };
    let kind = if lx == 0 {
        DROP_X
    } else if ly == 0 {
        DROP_Y
    } else {
        REDUCE
    };
    (kind, x_is_a)
}

/// One step per kernel, `n+m−2` kernels of `⌈m/ℓ⌉` blocks.
pub fn naive_gcd(
    machine: &mut Machine,
    field: &Field,
    a: &Poly,
    b: &Poly,
    l: usize,
) -> Result<GcdOutput> {
    let (n, m) = check_operands(a, b)?;
    if l < 1 {
        return Err(Error::InvalidInput("l must be at least 1".into()));
    }
    machine.take_runs();
    let aa = machine.upload("a", words(a));
    let bb = machine.upload("b", words(b));
    let st = machine.upload("st", vec![(n - 1) as Word, (m - 1) as Word]);
    let grid = m.div_ceil(l);
    let launches = (n + m - 2).max(1);

    let kernel = |blk: &mut BlockCtx<'_>| -> Result<()> {
        // st_a, st_b, lead_a, lead_b, kind, factor, x_is_a
        let c = blk.alloc(7)?;
        blk.simd(|th| {
            if th.t() == 0 {
                let v = th.read(st, 0)?;
                th.st(c, 0, v)?;
            }
            if th.t() == 1 % l {
                let v = th.read(st, 1)?;
                th.st(c, 1, v)?;
            }
            Ok(())
        })?;
        blk.simd(|th| {
            let (sa, sb) = (th.ld(c, 0)?, th.ld(c, 1)?);
            if sa <= 0 || sb <= 0 {
                return Ok(());
            }
            if th.t() == 2 % l {
                let v = th.read(aa, sa)?;
                th.st(c, 2, v)?;
            }
            if th.t() == 3 % l {
                let v = th.read(bb, sb)?;
                th.st(c, 3, v)?;
            }
            Ok(())
        })?;
        blk.simd(|th| {
            if th.t() != 0 {
                return Ok(());
            }
            let (sa, sb) = (th.ld(c, 0)?, th.ld(c, 1)?);
            let (la, lb) = (th.ld(c, 2)?, th.ld(c, 3)?);
            let (kind, x_is_a) = decide(sa, sb, la, lb);
            if kind == REDUCE {
                let (lx, ly) = if x_is_a { (la, lb) } else { (lb, la) };
                let f = th.div(field, lx, ly)?;
                th.st(c, 5, f)?;
            }
            th.st(c, 4, kind)?;
            th.st(c, 6, x_is_a as Word)
        })?;
        blk.simd(|th| {
            let kind = th.ld(c, 4)?;
            if kind == STOP {
                return Ok(());
            }
            let x_is_a = th.ld(c, 6)? == 1;
            let (sa, sb) = (th.ld(c, 0)?, th.ld(c, 1)?);
            let (x, y, sx, sy, xi) = if x_is_a {
                (aa, bb, sa, sb, 0)
            } else {
                (bb, aa, sb, sa, 1)
            };
            let j = th.rank() as i64;
            if j > sy {
                return Ok(());
            }
            if kind == REDUCE {
                let f = th.ld(c, 5)?;
                let yj = th.read(y, j)?;
                let pos = j + sx - sy;
                let xv = th.read(x, pos)?;
                let p = th.mul(field, yj, f);
                let v = th.sub(field, xv, p);
                th.write(x, pos, v)?;
            }
            if j == sy {
                match kind {
                    DROP_Y => th.write(st, 1 - xi, sy - 1)?,
                    _ => th.write(st, xi, sx - 1)?,
                }
            }
            Ok(())
        })
    };
    for _ in 0..launches {
        machine.launch(KernelSpec::new("naive_gcd", grid, l), &kernel)?;
    }
    let g = conclude(machine.array(aa)?, machine.array(bb)?);
    let u = machine.params().u.clone();
    let run = ProgramRun::from_chain(machine.take_runs(), &u)?;
    Ok(GcdOutput { g, run })
}

/// Up to `s` steps per kernel, `⌈(n+m−2)/s⌉` kernels of `⌈m/s⌉` blocks of
/// `3s` threads.
///
/// Positions are counted down from the degrees at kernel entry. Every block
/// replays the step sequence on the s-heads of both operands, and applies the
/// same steps to its window of `3s` positions; a block's output positions sit
/// at least `s` away from the window ends, which covers how far a value can
/// drift in `s` steps.
pub fn optimized_gcd(
    machine: &mut Machine,
    field: &Field,
    a: &Poly,
    b: &Poly,
    s: usize,
) -> Result<GcdOutput> {
    let (n, m) = check_operands(a, b)?;
    if s < 2 {
        return Err(Error::InvalidInput("optimized gcd needs s > 1".into()));
    }
    machine.take_runs();
    let aa = machine.upload("a", words(a));
    let bb = machine.upload("b", words(b));
    let st = machine.upload("st", vec![(n - 1) as Word, (m - 1) as Word]);
    let grid = m.div_ceil(s);
    let launches = (n + m - 2).div_ceil(s).max(1);
    let si = s as i64;

    // control words
    const EA: usize = 0;
    const EB: usize = 1;
    const DA: usize = 2;
    const DB: usize = 3;
    const KIND: usize = 4;
    const F: usize = 5;
    const XA: usize = 6;
    const EX: usize = 7;
    const SHIFT: usize = 8;

    let kernel = |blk: &mut BlockCtx<'_>| -> Result<()> {
        let base = (blk.block_id() * s) as i64;
        let ha = blk.alloc(s)?;
        let hb = blk.alloc(s)?;
        let wa = blk.alloc(3 * s)?;
        let wb = blk.alloc(3 * s)?;
        let c = blk.alloc(9)?;
        blk.simd(|th| {
            if th.t() < 2 {
                let v = th.read(st, th.t() as i64)?;
                th.st(c, DA + th.t(), v)?;
            }
            Ok(())
        })?;
        blk.simd(|th| {
            let (da, db) = (th.ld(c, DA)?, th.ld(c, DB)?);
            let t = th.t() as i64;
            if t < si {
                if da - t >= 0 {
                    let v = th.read(aa, da - t)?;
                    th.st(ha, t as usize, v)?;
                }
                if db - t >= 0 {
                    let v = th.read(bb, db - t)?;
                    th.st(hb, t as usize, v)?;
                }
            }
            let p = base + t;
            if da - p >= 0 {
                let v = th.read(aa, da - p)?;
                th.st(wa, t as usize, v)?;
            }
            if db - p >= 0 {
                let v = th.read(bb, db - p)?;
                th.st(wb, t as usize, v)?;
            }
            Ok(())
        })?;
        for _ in 0..s {
            blk.simd(|th| {
                if th.t() != 0 {
                    return Ok(());
                }
                let (ea, eb) = (th.ld(c, EA)?, th.ld(c, EB)?);
                let (da, db) = (th.ld(c, DA)?, th.ld(c, DB)?);
                let (sa, sb) = (da - ea, db - eb);
                let live = sa > 0 && sb > 0;
                let (la, lb) = if live {
                    (th.ld(ha, ea as usize)?, th.ld(hb, eb as usize)?)
                } else {
                    (0, 0)
                };
                let (kind, x_is_a) = decide(sa, sb, la, lb);
                let (ex, ey) = if x_is_a { (ea, eb) } else { (eb, ea) };
                if kind == REDUCE {
                    let (lx, ly) = if x_is_a { (la, lb) } else { (lb, la) };
                    let f = th.div(field, lx, ly)?;
                    th.st(c, F, f)?;
                }
                let (xi, yi) = if x_is_a { (EA, EB) } else { (EB, EA) };
                match kind {
                    REDUCE | DROP_X => th.st(c, xi, ex + 1)?,
                    DROP_Y => th.st(c, yi, ey + 1)?,
                    _ => {}
                }
                th.st(c, KIND, kind)?;
                th.st(c, XA, x_is_a as Word)?;
                th.st(c, EX, ex)?;
                th.st(c, SHIFT, ey - ex)
            })?;
            if blk.local(c)[KIND] != REDUCE {
                // decisions are visible to every thread; nothing to apply
                continue;
            }
            blk.simd(|th| {
                let f = th.ld(c, F)?;
                let ex = th.ld(c, EX)?;
                let shift = th.ld(c, SHIFT)?;
                let (hx, hy, wx, wy) = if th.ld(c, XA)? == 1 {
                    (ha, hb, wa, wb)
                } else {
                    (hb, ha, wb, wa)
                };
                let t = th.t() as i64;
                if t < si && t >= ex {
                    let src = t + shift;
                    if (0..si).contains(&src) {
                        let (x, y) = (th.ld(hx, t as usize)?, th.ld(hy, src as usize)?);
                        let p = th.mul(field, y, f);
                        let v = th.sub(field, x, p);
                        th.st(hx, t as usize, v)?;
                    }
                }
                let p = base + t;
                let src = t + shift;
                if p >= ex && (0..3 * si).contains(&src) {
                    let (x, y) = (th.ld(wx, t as usize)?, th.ld(wy, src as usize)?);
                    let prod = th.mul(field, y, f);
                    let v = th.sub(field, x, prod);
                    th.st(wx, t as usize, v)?;
                }
                Ok(())
            })?;
        }
        let beta = blk.block_id();
        blk.simd(|th| {
            let t = th.t();
            let owns = if beta == 0 { t < 2 * s } else { (s..2 * s).contains(&t) };
            let (da, db) = (th.ld(c, DA)?, th.ld(c, DB)?);
            if owns {
                let p = base + t as i64;
                if da - p >= 0 {
                    let v = th.ld(wa, t)?;
                    th.write(aa, da - p, v)?;
                }
                if db - p >= 0 {
                    let v = th.ld(wb, t)?;
                    th.write(bb, db - p, v)?;
                }
            }
            if beta == 0 && t == 2 * s {
                let (ea, eb) = (th.ld(c, EA)?, th.ld(c, EB)?);
                th.write(st, 0, da - ea)?;
                th.write(st, 1, db - eb)?;
            }
            Ok(())
        })
    };
    for _ in 0..launches {
        machine.launch(KernelSpec::new("opt_gcd", grid, 3 * s), &kernel)?;
    }
    let g = conclude(machine.array(aa)?, machine.array(bb)?);
    let u = machine.params().u.clone();
    let run = ProgramRun::from_chain(machine.take_runs(), &u)?;
    Ok(GcdOutput { g, run })
}
