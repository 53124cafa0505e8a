//! The abstract many-core machine.
//!
//! A kernel launch runs `grid` thread-blocks of `block_dim` threads. Each block
//! executes as a sequence of SIMD statements ([`BlockCtx::simd`]): every thread
//! runs the statement against the local memory as it stood before the
//! statement, and local writes are committed when all threads are done. Global
//! reads see memory as it stood before the launch; global writes are buffered
//! and committed when every block has finished, after the CREW check. Both
//! rules make the outcome independent of the order in which blocks run.
//!
//! Counters follow the unit-cost model: each field operation is one local
//! operation (σ); each global word read (α) or written (β) is one transfer.
//! Index arithmetic, comparisons and local loads/stores are free.


use num::{BigInt, BigRational, One};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;

/// One machine word of global or local memory.
pub type Word = i64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineParams {
    /// Cost of transferring one word between global and local memory, in
    /// units of one local operation.
    pub u: BigRational,
    /// Words of local memory per SM.
    pub z: usize,
    /// Number of SMs, when a concrete machine size is wanted.
    pub sms: Option<usize>,
}

impl MachineParams {
    pub fn new(u: BigRational, z: usize) -> Result<Self> {
        if u <= BigRational::one() {
            return Err(Error::InvalidParams(format!("U must exceed 1, got {u}")));
        }
        if z < 1 {
            return Err(Error::InvalidParams("Z must be at least 1".into()));
        }
        Ok(MachineParams { u, z, sms: None })
    }

    pub fn from_ints(u: i64, z: usize) -> Result<Self> {
        Self::new(BigRational::from_integer(BigInt::from(u)), z)
    }

    pub fn with_sms(mut self, p: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidParams("P must be at least 1".into()));
        }
        self.sms = Some(p);
        Ok(self)
    }
}

/// Global rank of thread `t` of block `block_id`: `t + block_id * block_dim`.
pub fn thread_rank(block_id: usize, t: usize, block_dim: usize) -> Result<usize> {
    if t >= block_dim {
        return Err(Error::ThreadOutOfRange { t, block_dim });
    }
    Ok(t + block_id * block_dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrayId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalId(usize);

#[derive(Debug, Clone)]
struct GlobalArray {
    name: String,
    cells: Vec<Word>,
}

#[derive(Debug, Clone, Default)]
pub struct GlobalMem {
    arrays: Vec<GlobalArray>,
}

impl GlobalMem {
    fn array(&self, id: ArrayId) -> Result<&GlobalArray> {
        self.arrays.get(id.0).ok_or(Error::UnknownArray(id.0))
    }
}

/// Name and launch geometry of a kernel: `name<<<grid, block_dim>>>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelSpec {
    pub name: String,
    pub grid: usize,
    pub block_dim: usize,
}

impl KernelSpec {
    pub fn new(name: impl Into<String>, grid: usize, block_dim: usize) -> Self {
        KernelSpec {
            name: name.into(),
            grid,
            block_dim,
        }
    }
}

/// Body of a kernel, executed once per thread-block.
pub trait Kernel {
    fn run_block(&self, blk: &mut BlockCtx<'_>) -> Result<()>;
}

impl<F> Kernel for F
where
    F: Fn(&mut BlockCtx<'_>) -> Result<()>,
{
    fn run_block(&self, blk: &mut BlockCtx<'_>) -> Result<()> {
        self(blk)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ThreadCounters {
    /// Local (field) operations.
    pub ops: u64,
    /// Global words read.
    pub reads: u64,
    /// Global words written.
    pub writes: u64,
}

/// Raw counters of one completed thread-block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BlockCounters {
    pub work: u64,
    pub span: u64,
    pub max_reads: u64,
    pub max_writes: u64,
    /// Largest `reads + writes` of any single thread.
    pub max_thread_accesses: u64,
    pub local_words: usize,
    pub active_threads: usize,
}

impl BlockCounters {
    fn from_threads(threads: &[ThreadCounters], local_words: usize) -> Self {
        let mut c = BlockCounters {
            local_words,
            ..Default::default()
        };
        for th in threads {
            c.work += th.ops;
            c.span = c.span.max(th.ops);
            c.max_reads = c.max_reads.max(th.reads);
            c.max_writes = c.max_writes.max(th.writes);
            c.max_thread_accesses = c.max_thread_accesses.max(th.reads + th.writes);
            if th.ops + th.reads + th.writes > 0 {
                c.active_threads += 1;
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelRunRecord {
    pub spec: KernelSpec,
    /// Indexed by block id.
    pub blocks: Vec<BlockCounters>,
}

/// Order in which the blocks of a launch are evaluated. Results never depend
/// on it; it exists so that this can be tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockOrder {
    #[default]
    Forward,
    Reverse,
    Shuffled(u64),
}

#[derive(Debug, Clone)]
struct PendingWrite {
    array: ArrayId,
    index: usize,
    value: Word,
    rank: usize,
}

pub struct Machine {
    params: MachineParams,
    mem: GlobalMem,
    order: BlockOrder,
    launches: u64,
    runs: Vec<KernelRunRecord>,
    fault: Option<Fault>,
}

/// A deliberate corruption of one global word, applied right after the
/// launch with index `after_launch` (counted in [`Machine::runs`]) commits.
/// Used to check that verification catches a broken algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub after_launch: usize,
    pub array: String,
    pub index: usize,
}

impl Machine {
    pub fn new(params: MachineParams) -> Self {
        Machine {
            params,
            mem: GlobalMem::default(),
            order: BlockOrder::Forward,
            launches: 0,
            runs: Vec::new(),
            fault: None,
        }
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn with_block_order(mut self, order: BlockOrder) -> Self {
        self.order = order;
        self
    }

    pub fn params(&self) -> &MachineParams {
        &self.params
    }

    /// Allocates a zero-filled global array.
    pub fn alloc(&mut self, name: &str, len: usize) -> ArrayId {
        self.upload(name, vec![0; len])
    }

    /// Allocates a global array holding `cells`. Host-side, uncounted.
    pub fn upload(&mut self, name: &str, cells: Vec<Word>) -> ArrayId {
        self.mem.arrays.push(GlobalArray {
            name: name.to_string(),
            cells,
        });
        ArrayId(self.mem.arrays.len() - 1)
    }

    pub fn array(&self, id: ArrayId) -> Result<&[Word]> {
        Ok(&self.mem.array(id)?.cells)
    }

    /// Host-side overwrite of a global array, uncounted.
    pub fn store(&mut self, id: ArrayId, cells: Vec<Word>) -> Result<()> {
        let arr = self.mem.arrays.get_mut(id.0).ok_or(Error::UnknownArray(id.0))?;
        arr.cells = cells;
        Ok(())
    }

    /// Records of every launch so far, in launch order.
    pub fn runs(&self) -> &[KernelRunRecord] {
        &self.runs
    }

    fn apply_fault(&mut self) {
        let Some(fault) = &self.fault else { return };
        if fault.after_launch + 1 != self.runs.len() {
            return;
        }
        // latest array of that name
        let target = self.mem.arrays.iter_mut().rev().find(|a| a.name == fault.array);
        if let Some(cell) = target.and_then(|a| a.cells.get_mut(fault.index)) {
            *cell = if *cell == 0 { 1 } else { *cell - 1 };
        }
    }

    pub fn take_runs(&mut self) -> Vec<KernelRunRecord> {
        std::mem::take(&mut self.runs)
    }

    /// Runs every thread of every block of `kernel` to completion.
    pub fn launch(&mut self, spec: KernelSpec, kernel: &dyn Kernel) -> Result<&KernelRunRecord> {
        if spec.grid < 1 || spec.block_dim < 1 {
            return Err(Error::InvalidLaunch {
                kernel: spec.name,
                reason: "grid and block size must be at least 1".into(),
            });
        }
        if spec.block_dim > self.params.z {
            return Err(Error::InvalidLaunch {
                reason: format!(
                    "{} threads per block exceed Z = {}",
                    spec.block_dim, self.params.z
                ),
                kernel: spec.name,
            });
        }

        let mut order: Vec<usize> = (0..spec.grid).collect();
        match self.order {
            BlockOrder::Forward => {}
            BlockOrder::Reverse => order.reverse(),
            BlockOrder::Shuffled(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.launches);
                order.shuffle(&mut rng);
            }
        }
        self.launches += 1;

        let mut per_block: Vec<Option<(BlockCounters, Vec<PendingWrite>)>> =
            vec![None; spec.grid];
        for &block_id in &order {
            let mut ctx = BlockCtx::new(&spec, block_id, self.params.z, &self.mem);
            kernel.run_block(&mut ctx)?;
            let counters = BlockCounters::from_threads(&ctx.counters, ctx.local_high_water);
            per_block[block_id] = Some((counters, ctx.global_writes));
        }

        // CREW check and commit. The stable sort keeps block order within an
        // address, so diagnostics are stable and a thread's last write wins.
        let mut blocks = Vec::with_capacity(spec.grid);
        let mut writes = Vec::new();
        for entry in per_block {
            let (counters, w) = entry.expect("every block ran");
            blocks.push(counters);
            writes.extend(w);
        }
        writes.sort_by_key(|w| (w.array.0, w.index));
        for pair in writes.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if (a.array, a.index) == (b.array, b.index) && a.rank != b.rank {
                return Err(Error::CrewViolation {
                    kernel: spec.name.clone(),
                    array: self.mem.array(a.array)?.name.clone(),
                    index: a.index,
                    first: a.rank,
                    second: b.rank,
                });
            }
        }
        for w in writes {
            self.mem.arrays[w.array.0].cells[w.index] = w.value;
        }

        self.runs.push(KernelRunRecord { spec, blocks });
        self.apply_fault();
        Ok(self.runs.last().expect("just pushed"))
    }
}

#[derive(Debug, Clone)]
struct PendingLocal {
    local: LocalId,
    index: usize,
    value: Word,
    t: usize,
}

/// Execution context of one thread-block.
pub struct BlockCtx<'m> {
    kernel: &'m str,
    block_id: usize,
    block_dim: usize,
    z: usize,
    mem: &'m GlobalMem,
    locals: Vec<Vec<Word>>,
    local_high_water: usize,
    counters: Vec<ThreadCounters>,
    global_writes: Vec<PendingWrite>,
    pending: Vec<PendingLocal>,
}

impl<'m> BlockCtx<'m> {
    fn new(spec: &'m KernelSpec, block_id: usize, z: usize, mem: &'m GlobalMem) -> Self {
        BlockCtx {
            kernel: &spec.name,
            block_id,
            block_dim: spec.block_dim,
            z,
            mem,
            locals: Vec::new(),
            local_high_water: 0,
            counters: vec![ThreadCounters::default(); spec.block_dim],
            global_writes: Vec::new(),
            pending: Vec::new(),
        }
    }

    pub fn block_id(&self) -> usize {
        self.block_id
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    /// Reserves `words` of local memory, zero-filled.
    pub fn alloc(&mut self, words: usize) -> Result<LocalId> {
        let requested = self.local_high_water + words;
        if requested > self.z {
            return Err(Error::LocalOverflow {
                kernel: self.kernel.to_string(),
                block: self.block_id,
                requested,
                capacity: self.z,
            });
        }
        self.local_high_water = requested;
        self.locals.push(vec![0; words]);
        Ok(LocalId(self.locals.len() - 1))
    }

    /// Host-side view of a local array between statements.
    pub fn local(&self, id: LocalId) -> &[Word] {
        &self.locals[id.0]
    }

    /// Executes one SIMD statement on every thread of the block.
    pub fn simd<F>(&mut self, mut body: F) -> Result<()>
    where
        F: FnMut(&mut ThreadCtx<'_>) -> Result<()>,
    {
        let mut pending = std::mem::take(&mut self.pending);
        pending.clear();
        for t in 0..self.block_dim {
            let mut th = ThreadCtx {
                kernel: self.kernel,
                block_id: self.block_id,
                block_dim: self.block_dim,
                t,
                mem: self.mem,
                locals: &self.locals,
                counters: &mut self.counters[t],
                local_writes: &mut pending,
                global_writes: &mut self.global_writes,
            };
            body(&mut th)?;
        }
        pending.sort_by_key(|w| (w.local.0, w.index));
        for pair in pending.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if (a.local, a.index) == (b.local, b.index) && a.t != b.t {
                return Err(Error::CrewViolation {
                    kernel: self.kernel.to_string(),
                    array: format!("local#{}", a.local.0),
                    index: a.index,
                    first: self.block_id * self.block_dim + a.t,
                    second: self.block_id * self.block_dim + b.t,
                });
            }
        }
        for w in &pending {
            self.locals[w.local.0][w.index] = w.value;
        }
        self.pending = pending;
        Ok(())
    }
}

/// Execution context of one thread within one SIMD statement.
pub struct ThreadCtx<'a> {
    kernel: &'a str,
    block_id: usize,
    block_dim: usize,
    t: usize,
    mem: &'a GlobalMem,
    locals: &'a [Vec<Word>],
    counters: &'a mut ThreadCounters,
    local_writes: &'a mut Vec<PendingLocal>,
    global_writes: &'a mut Vec<PendingWrite>,
}

impl ThreadCtx<'_> {
    /// Thread id within the block.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn block_id(&self) -> usize {
        self.block_id
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    /// Rank over all threads of the launch.
    pub fn rank(&self) -> usize {
        self.t + self.block_id * self.block_dim
    }

    #[inline]
    fn bounds(&self, array: ArrayId, index: i64) -> Result<usize> {
        let arr = self.mem.array(array)?;
        if index < 0 || index as usize >= arr.cells.len() {
            return Err(self.global_oob(array, index));
        }
        Ok(index as usize)
    }

    #[cold]
    fn global_oob(&self, array: ArrayId, index: i64) -> Error {
        let arr = &self.mem.arrays[array.0];
        Error::OutOfBounds {
            kernel: self.kernel.to_string(),
            array: arr.name.clone(),
            index,
            len: arr.cells.len(),
            block: self.block_id,
        }
    }

    /// Reads one global word (one transfer).
    pub fn read(&mut self, array: ArrayId, index: i64) -> Result<Word> {
        let i = self.bounds(array, index)?;
        self.counters.reads += 1;
        Ok(self.mem.arrays[array.0].cells[i])
    }

    /// Writes one global word (one transfer), visible after the launch.
    pub fn write(&mut self, array: ArrayId, index: i64, value: Word) -> Result<()> {
        let index = self.bounds(array, index)?;
        self.counters.writes += 1;
        let rank = self.rank();
        self.global_writes.push(PendingWrite {
            array,
            index,
            value,
            rank,
        });
        Ok(())
    }

    #[cold]
    fn local_oob(&self, id: LocalId, index: usize) -> Error {
        Error::OutOfBounds {
            kernel: self.kernel.to_string(),
            array: format!("local#{}", id.0),
            index: index as i64,
            len: self.locals[id.0].len(),
            block: self.block_id,
        }
    }

    #[inline]
    pub fn ld(&self, id: LocalId, index: usize) -> Result<Word> {
        match self.locals[id.0].get(index) {
            Some(&v) => Ok(v),
            None => Err(self.local_oob(id, index)),
        }
    }

    /// Local store, visible from the next statement on.
    #[inline]
    pub fn st(&mut self, id: LocalId, index: usize, value: Word) -> Result<()> {
        if index >= self.locals[id.0].len() {
            return Err(self.local_oob(id, index));
        }
        self.local_writes.push(PendingLocal {
            local: id,
            index,
            value,
            t: self.t,
        });
        Ok(())
    }

    pub fn add(&mut self, f: &Field, a: Word, b: Word) -> Word {
        self.counters.ops += 1;
        f.add(a as u64, b as u64) as Word
    }

    pub fn sub(&mut self, f: &Field, a: Word, b: Word) -> Word {
        self.counters.ops += 1;
        f.sub(a as u64, b as u64) as Word
    }

    pub fn mul(&mut self, f: &Field, a: Word, b: Word) -> Word {
        self.counters.ops += 1;
        f.mul(a as u64, b as u64) as Word
    }

    /// `a * b^{-1}`, one local operation.
    pub fn div(&mut self, f: &Field, a: Word, b: Word) -> Result<Word> {
        self.counters.ops += 1;
        Ok(f.div(a as u64, b as u64)? as Word)
    }

    pub fn inv(&mut self, f: &Field, a: Word) -> Result<Word> {
        self.counters.ops += 1;
        Ok(f.inv(a as u64)? as Word)
    }
}

/// `(α + β)·U` as an exact rational.
pub fn overhead(reads: u64, writes: u64, u: &BigRational) -> BigRational {
    BigRational::from_integer(BigInt::from(reads + writes)) * u
}

impl Default for MachineParams {
    fn default() -> Self {
        MachineParams {
            u: BigRational::from_integer(BigInt::from(4)),
            z: 1024,
            sms: None,
        }
    }
}
