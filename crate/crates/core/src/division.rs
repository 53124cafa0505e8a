//! Plain division on the simulated machine: one division step per kernel
//! (naive) or `s` steps per kernel with locally staged s-heads (optimized).

use crate::error::{Error, Result};
use crate::field::Field;
use crate::machine::{ArrayId, BlockCtx, KernelSpec, Machine, Word};
use crate::metrics::ProgramRun;
use crate::poly::Poly;

/// Quotient, remainder and the instrumented run that produced them.
#[derive(Debug, Clone)]
pub struct DivisionOutput {
    pub q: Poly,
    pub r: Poly,
    pub run: ProgramRun,
}

fn check_operands(a: &Poly, b: &Poly) -> Result<(usize, usize)> {
    let db = b
        .degree()
        .ok_or_else(|| Error::InvalidInput("division by the zero polynomial".into()))?;
    match a.degree() {
        Some(da) if da >= db => Ok((da + 1, db + 1)),
        _ => Err(Error::InvalidInput(
            "dividend degree must be at least divisor degree".into(),
        )),
    }
}

fn words(p: &Poly) -> Vec<Word> {
    p.coeffs().iter().map(|&c| c as Word).collect()
}

fn to_poly(cells: &[Word]) -> Poly {
    Poly::new(cells.iter().map(|&c| c as u64).collect())
}

fn finish(machine: &mut Machine, q: ArrayId, a: ArrayId, db: usize) -> Result<DivisionOutput> {
    let q = to_poly(machine.array(q)?);
    // Host-side trimming of the remainder, not charged.
    let r = to_poly(&machine.array(a)?[..db]);
    let u = machine.params().u.clone();
    let run = ProgramRun::from_chain(machine.take_runs(), &u)?;
    Ok(DivisionOutput { q, r, run })
}

/// One division step per kernel, `⌈m/ℓ⌉` blocks of `ℓ` threads.
pub fn naive_division(
    machine: &mut Machine,
    field: &Field,
    a: &Poly,
    b: &Poly,
    l: usize,
) -> Result<DivisionOutput> {
    let (n, m) = check_operands(a, b)?;
    if l < 1 || 2 * l > machine.params().z {
        return Err(Error::InvalidInput(format!(
            "naive division needs 1 <= l and 2l <= Z (l = {l}, Z = {})",
            machine.params().z
        )));
    }
    machine.take_runs();
    let db = m - 1;
    let aa = machine.upload("a", words(a));
    let bb = machine.upload("b", words(b));
    let qq = machine.alloc("q", n - m + 1);
    let grid = m.div_ceil(l);
    let lead_t = 1 % l;

    for i in (db..n).rev() {
        let kernel = |blk: &mut BlockCtx<'_>| -> Result<()> {
            // [0] = a[i], then the factor; [1] = b[db]
            let sh = blk.alloc(2)?;
            blk.simd(|th| {
                if th.t() == 0 {
                    let v = th.read(aa, i as i64)?;
                    th.st(sh, 0, v)?;
                }
                if th.t() == lead_t {
                    let v = th.read(bb, db as i64)?;
                    th.st(sh, 1, v)?;
                }
                Ok(())
            })?;
            blk.simd(|th| {
                if th.t() == 0 {
                    let (x, y) = (th.ld(sh, 0)?, th.ld(sh, 1)?);
                    let f = th.div(field, x, y)?;
                    th.st(sh, 0, f)?;
                }
                Ok(())
            })?;
            blk.simd(|th| {
                let j = th.rank();
                if j > db {
                    return Ok(());
                }
                let f = th.ld(sh, 0)?;
                let bj = th.read(bb, j as i64)?;
                let pos = (j + i - db) as i64;
                let av = th.read(aa, pos)?;
                let p = th.mul(field, bj, f);
                let nv = th.sub(field, av, p);
                th.write(aa, pos, nv)?;
                if j == 0 {
                    th.write(qq, (i - db) as i64, f)?;
                }
                Ok(())
            })
        };
        machine.launch(KernelSpec::new("naive_div", grid, l), &kernel)?;
    }
    finish(machine, qq, aa, db)
}

/// `s` division steps per kernel, `⌈m/(2s)⌉` blocks of `3s` threads.
///
/// The first `s` threads of each block keep the s-heads of `a` and `b` in
/// local memory and derive the `s` quotient coefficients; the remaining `2s`
/// threads each update one coefficient of the block's window of `a`.
pub fn optimized_division(
    machine: &mut Machine,
    field: &Field,
    a: &Poly,
    b: &Poly,
    s: usize,
) -> Result<DivisionOutput> {
    let (n, m) = check_operands(a, b)?;
    if s < 1 {
        return Err(Error::InvalidInput("s must be at least 1".into()));
    }
    let z = machine.params().z;
    if 7 * s > z {
        return Err(Error::LocalOverflow {
            kernel: "opt_div".into(),
            block: 0,
            requested: 7 * s,
            capacity: z,
        });
    }
    machine.take_runs();
    let db = m - 1;
    let aa = machine.upload("a", words(a));
    let bb = machine.upload("b", words(b));
    let qq = machine.alloc("q", n - m + 1);
    let grid = m.div_ceil(2 * s);
    let (si, dbi) = (s as i64, db as i64);

    let mut i = n - 1;
    loop {
        let ii = i as i64;
        let kernel = |blk: &mut BlockCtx<'_>| -> Result<()> {
            let beta = blk.block_id() as i64;
            let sac = blk.alloc(s)?;
            let sbc = blk.alloc(s)?;
            let sa = blk.alloc(2 * s)?;
            let sb = blk.alloc(3 * s)?;
            blk.simd(|th| {
                let t = th.t() as i64;
                if t < si {
                    if ii - t >= 0 {
                        let v = th.read(aa, ii - t)?;
                        th.st(sac, t as usize, v)?;
                    }
                    if dbi - t >= 0 {
                        let v = th.read(bb, dbi - t)?;
                        th.st(sbc, t as usize, v)?;
                    }
                } else {
                    let pos = ii - 2 * si * beta - t;
                    if pos >= 0 {
                        let v = th.read(aa, pos)?;
                        th.st(sa, (t - si) as usize, v)?;
                    }
                }
                let pos = dbi - 2 * si * beta - t;
                if pos >= 0 {
                    let v = th.read(bb, pos)?;
                    th.st(sb, t as usize, v)?;
                }
                Ok(())
            })?;
            for k in 0..s {
                if i < k + db {
                    break;
                }
                blk.simd(|th| {
                    if th.t() == k {
                        let v = th.ld(sac, k)?;
                        if v != 0 {
                            let lead = th.read(bb, dbi)?;
                            let f = th.div(field, v, lead)?;
                            th.st(sac, k, f)?;
                        }
                    }
                    Ok(())
                })?;
                blk.simd(|th| {
                    let f = th.ld(sac, k)?;
                    let t = th.t();
                    if f == 0 || t <= k {
                        return Ok(());
                    }
                    if t < s {
                        let (x, y) = (th.ld(sac, t)?, th.ld(sbc, t - k)?);
                        let p = th.mul(field, y, f);
                        let v = th.sub(field, x, p);
                        th.st(sac, t, v)?;
                    } else {
                        let (x, y) = (th.ld(sa, t - s)?, th.ld(sb, t - k)?);
                        let p = th.mul(field, y, f);
                        let v = th.sub(field, x, p);
                        th.st(sa, t - s, v)?;
                    }
                    Ok(())
                })?;
            }
            blk.simd(|th| {
                let t = th.t() as i64;
                if t >= si {
                    let pos = ii - 2 * si * beta - t;
                    if pos >= 0 {
                        let v = th.ld(sa, (t - si) as usize)?;
                        th.write(aa, pos, v)?;
                    }
                } else if beta == 0 {
                    let v = th.ld(sac, t as usize)?;
                    if ii - t >= dbi {
                        th.write(qq, ii - t - dbi, v)?;
                    } else if ii - t >= 0 {
                        th.write(aa, ii - t, v)?;
                    }
                }
                Ok(())
            })
        };
        machine.launch(KernelSpec::new("opt_div", grid, 3 * s), &kernel)?;
        if i < db + s {
            break;
        }
        i -= s;
    }
    finish(machine, qq, aa, db)
}
