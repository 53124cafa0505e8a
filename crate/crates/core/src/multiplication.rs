//! Long multiplication on the simulated machine.
//!
//! Phase one fills an `X × y` matrix `M` (`y = n+s−1`) whose row `r` holds
//! `a · (b[rs] + … + b[rs+s−1] X^{s−1})`; row `r` stands for the window
//! `f[rs .. rs+y)`. Phase two merges rows pairwise: at step `i` the lower row
//! `k` of each pair flushes its first `2^i s` entries into `f` and adds the rest
//! into its partner `k + 2^i`. The last step folds the surviving pair into `f`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::machine::{BlockCtx, KernelSpec, Machine, Word};
use crate::metrics::ProgramRun;
use crate::poly::Poly;

#[derive(Debug, Clone)]
pub struct MulOutput {
    pub f: Poly,
    pub run: ProgramRun,
}

fn words(p: &Poly) -> Vec<Word> {
    p.coeffs().iter().map(|&c| c as Word).collect()
}

/// Local words needed by one multiplication-phase block.
pub fn mul_block_footprint(s: usize, l: usize) -> usize {
    s + (l * s + s - 1)
}

pub fn plain_multiplication(
    machine: &mut Machine,
    field: &Field,
    a: &Poly,
    b: &Poly,
    s: usize,
    l: usize,
) -> Result<MulOutput> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::InvalidInput("operands must be nonzero".into()));
    }
    if s < 1 || l < 1 {
        return Err(Error::InvalidInput("s and l must be at least 1".into()));
    }
    let z = machine.params().z;
    if 2 * s * l + 2 * s - 1 > z {
        return Err(Error::LocalOverflow {
            kernel: "mul".into(),
            block: 0,
            requested: 2 * s * l + 2 * s - 1,
            capacity: z,
        });
    }
    machine.take_runs();
    let (n, m) = (a.len(), b.len());
    let x = m.div_ceil(s);
    let big_x = x.next_power_of_two();
    let steps = big_x.trailing_zeros() as usize;
    let y = n + s - 1;
    let aa = machine.upload("a", words(a));
    let bb = machine.upload("b", words(b));
    let ff = machine.alloc("f", (big_x - 1) * s + y);
    let mm = if big_x > 1 {
        machine.alloc("M", big_x * y)
    } else {
        ff
    };
    let sl = s * l;
    let (ni, mi, si) = (n as i64, m as i64, s as i64);

    let row_blocks = y.div_ceil(sl);
    let mul = |blk: &mut BlockCtx<'_>| -> Result<()> {
        let r = blk.block_id() / row_blocks;
        let c0 = (blk.block_id() % row_blocks) * sl;
        let na = sl + s - 1;
        let ab = blk.alloc(na)?;
        let bs = blk.alloc(s)?;
        blk.simd(|th| {
            let mut e = th.t();
            while e < na + s {
                if e < na {
                    let idx = c0 as i64 - (si - 1) + e as i64;
                    if (0..ni).contains(&idx) {
                        let v = th.read(aa, idx)?;
                        th.st(ab, e, v)?;
                    }
                } else {
                    let idx = (r * s + e - na) as i64;
                    if idx < mi {
                        let v = th.read(bb, idx)?;
                        th.st(bs, e - na, v)?;
                    }
                }
                e += l;
            }
            Ok(())
        })?;
        blk.simd(|th| {
            for h in 0..s {
                let off = s * th.t() + h;
                let c = c0 + off;
                if c >= y {
                    break;
                }
                let mut acc = 0;
                for k in 0..s {
                    let (u, v) = (th.ld(ab, off + s - 1 - k)?, th.ld(bs, k)?);
                    let p = th.mul(field, u, v);
                    acc = if k == 0 { p } else { th.add(field, acc, p) };
                }
                th.write(mm, (r * y + c) as i64, acc)?;
            }
            Ok(())
        })
    };
    machine.launch(KernelSpec::new("mul", x * row_blocks, l), &mul)?;

    for i in 0..steps {
        let half = 1usize << i;
        let span = half * s;
        let last = i + 1 == steps;
        let len = if last { y + span } else { y };
        let per_pair = len.div_ceil(sl);
        let pairs = x.div_ceil(2 * half);
        let add = |blk: &mut BlockCtx<'_>| -> Result<()> {
            let p = blk.block_id() / per_pair;
            let h0 = (blk.block_id() % per_pair) * sl;
            let k = half - 1 + 2 * half * p;
            let k2 = k + half;
            let partner_live = 2 * half * p + half < x;
            let (rk, rk2) = ((k * y) as i64, (k2 * y) as i64);
            let fk = (k * s) as i64;
            blk.simd(|th| {
                for j in 0..s {
                    let h = h0 + s * th.t() + j;
                    if h >= len {
                        break;
                    }
                    let hi = h as i64;
                    if last {
                        let mut v = th.read(ff, fk + hi)?;
                        if h < y {
                            let w = th.read(mm, rk + hi)?;
                            v = th.add(field, v, w);
                        }
                        if h >= span && partner_live {
                            let w = th.read(mm, rk2 + hi - span as i64)?;
                            v = th.add(field, v, w);
                        }
                        th.write(ff, fk + hi, v)?;
                    } else if h < span {
                        let (u, w) = (th.read(ff, fk + hi)?, th.read(mm, rk + hi)?);
                        let v = th.add(field, u, w);
                        th.write(ff, fk + hi, v)?;
                    } else {
                        let dst = rk2 + hi - span as i64;
                        let w = th.read(mm, rk + hi)?;
                        let v = if partner_live {
                            let u = th.read(mm, dst)?;
                            th.add(field, u, w)
                        } else {
                            w
                        };
                        th.write(mm, dst, v)?;
                    }
                }
                Ok(())
            })
        };
        machine.launch(KernelSpec::new(format!("add{i}"), pairs * per_pair, l), &add)?;
    }

    let f = Poly::new(machine.array(ff)?.iter().map(|&c| c as u64).collect());
    let u = machine.params().u.clone();
    let run = ProgramRun::from_chain(machine.take_runs(), &u)?;
    Ok(MulOutput { f, run })
}
