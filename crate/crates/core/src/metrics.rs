//! Work, span and parallelism overhead of blocks and programs, and the
//! Graham-Brent style running-time bounds built from them.

use std::collections::HashMap;

use num::{BigInt, BigRational, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MmmProgram, StructuralMetrics};
use crate::machine::{overhead, BlockCounters, KernelRunRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockMetrics {
    pub w: u64,
    pub s: u64,
    pub alpha: u64,
    pub beta: u64,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub o: BigRational,
}

pub fn block_metrics(c: &BlockCounters, u: &BigRational) -> BlockMetrics {
    BlockMetrics {
        w: c.work,
        s: c.span,
        alpha: c.max_reads,
        beta: c.max_writes,
        o: overhead(c.max_reads, c.max_writes, u),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramMetrics {
    pub w: u64,
    pub s: u64,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub o: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub c: BigRational,
    pub structure: StructuralMetrics,
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Combines per-block metrics (indexed by kernel, then block) into program totals.
pub fn aggregate(program: &MmmProgram, blocks: &[Vec<BlockMetrics>]) -> Result<ProgramMetrics> {
    let structure = program.structural_metrics()?;
    if blocks.len() != program.len() {
        return Err(Error::MissingMetrics(blocks.len().min(program.len())));
    }
    for (i, (spec, bm)) in program.kernels().iter().zip(blocks).enumerate() {
        if bm.len() != spec.grid {
            return Err(Error::MissingMetrics(i));
        }
    }
    let w = blocks.iter().flatten().map(|b| b.w).sum();
    // few distinct overheads occur, so group before touching rationals
    let mut by_o: Vec<(&BigRational, (u64, u64))> = Vec::new();
    for b in blocks.iter().flatten() {
        match by_o.iter_mut().rev().find(|(o, _)| *o == &b.o) {
            Some((_, e)) => {
                e.0 += 1;
                e.1 = e.1.max(b.s);
            }
            None => by_o.push((&b.o, (1, b.s))),
        }
    }
    let o = by_o
        .iter()
        .fold(BigRational::zero(), |acc, (o, (count, _))| acc + *o * int(*count));
    let kernel_span: Vec<u64> = blocks
        .iter()
        .map(|bm| bm.iter().map(|b| b.s).max().unwrap_or(0))
        .collect();
    let s = program.max_path_weight(|k| kernel_span[k])?;
    let c = by_o
        .iter()
        .map(|(o, (_, s))| int(*s) + *o)
        .max()
        .unwrap_or_else(BigRational::zero);
    Ok(ProgramMetrics {
        w,
        s,
        o,
        c,
        structure,
    })
}

/// A simulated program: the kernel DAG, per-block metrics, and their aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct ProgramRun {
    pub program: MmmProgram,
    pub blocks: Vec<Vec<BlockMetrics>>,
    pub counters: Vec<KernelRunRecord>,
    pub metrics: ProgramMetrics,
}

impl ProgramRun {
    /// Builds the chain program formed by consecutive launches.
    pub fn from_chain(runs: Vec<KernelRunRecord>, u: &BigRational) -> Result<Self> {
        let program = MmmProgram::chain(runs.iter().map(|r| r.spec.clone()));
        let mut cache: HashMap<u64, BigRational> = HashMap::new();
        let blocks: Vec<Vec<BlockMetrics>> = runs
            .iter()
            .map(|r| {
                r.blocks
                    .iter()
                    .map(|c| {
                        let o = cache
                            .entry(c.max_reads + c.max_writes)
                            .or_insert_with(|| overhead(c.max_reads, c.max_writes, u));
                        BlockMetrics {
                            w: c.work,
                            s: c.span,
                            alpha: c.max_reads,
                            beta: c.max_writes,
                            o: o.clone(),
                        }
                    })
                    .collect()
            })
            .collect();
        let metrics = aggregate(&program, &blocks)?;
        Ok(ProgramRun {
            program,
            blocks,
            counters: runs,
            metrics,
        })
    }

    /// Largest `α + β` of any block of any launch.
    pub fn max_block_transfers(&self) -> u64 {
        self.blocks
            .iter()
            .flatten()
            .map(|b| b.alpha + b.beta)
            .max()
            .unwrap_or(0)
    }

    /// Sum of per-thread operation counts over the whole program.
    pub fn total_ops(&self) -> u64 {
        self.counters
            .iter()
            .flat_map(|r| r.blocks.iter())
            .map(|b| b.work)
            .sum()
    }
}

/// `(N/P + L)·C` for `P` SMs.
pub fn graham_brent_bound(pm: &ProgramMetrics, sms: u64) -> Result<BigRational> {
    if sms < 1 {
        return Err(Error::InvalidParams("P must be at least 1".into()));
    }
    Ok(bound(pm.structure.n, sms, pm.structure.l, &pm.c))
}

/// `(N/K + L)·C` with `K` the widest antichain of the thread-block DAG.
pub fn antichain_bound(pm: &ProgramMetrics) -> Result<BigRational> {
    if pm.structure.k < 1 {
        return Err(Error::InvalidParams("K must be at least 1".into()));
    }
    Ok(bound(pm.structure.n, pm.structure.k, pm.structure.l, &pm.c))
}

/// `L·C`, the limit of the bound as the SM count grows without bound.
pub fn unbounded_sms_limit(pm: &ProgramMetrics) -> BigRational {
    int(pm.structure.l) * &pm.c
}

fn bound(n: u64, div: u64, l: u64, c: &BigRational) -> BigRational {
    (BigRational::new(BigInt::from(n), BigInt::from(div)) + int(l)) * c
}
