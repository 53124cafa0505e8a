//! Kernel DAG of a program and the structural quantities of its thread-block DAG.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct KernelId(pub usize);

/// Kernel DAG: vertices are kernel launches, edges are precedence constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MmmProgram {
    kernels: Vec<KernelSpec>,
    edges: Vec<(KernelId, KernelId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructuralMetrics {
    /// Vertices of the thread-block DAG.
    pub n: u64,
    /// Kernels on a longest path, counted as vertices.
    pub l: u64,
    /// Largest number of blocks in an antichain.
    pub k: u64,
    /// Parallel steps (antichain layers of the kernel DAG).
    pub pi: u64,
}

impl MmmProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sequential program where every kernel depends on the previous one.
    pub fn chain(specs: impl IntoIterator<Item = KernelSpec>) -> Self {
        let mut prog = MmmProgram::new();
        let mut prev = None;
        for spec in specs {
            let id = prog.add_kernel(spec);
            if let Some(p) = prev {
                prog.add_edge(p, id).expect("ids are valid");
            }
            prev = Some(id);
        }
        prog
    }

    pub fn add_kernel(&mut self, spec: KernelSpec) -> KernelId {
        self.kernels.push(spec);
        KernelId(self.kernels.len() - 1)
    }

    pub fn add_edge(&mut self, from: KernelId, to: KernelId) -> Result<()> {
        for id in [from, to] {
            if id.0 >= self.kernels.len() {
                return Err(Error::UnknownKernel(id.0));
            }
        }
        self.edges.push((from, to));
        Ok(())
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    pub fn edges(&self) -> &[(KernelId, KernelId)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub(crate) fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.kernels.len()];
        for &(a, b) in &self.edges {
            succ[a.0].push(b.0);
        }
        succ
    }

    /// Kahn's algorithm; fails on a cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.kernels.len();
        let succ = self.successors();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.edges {
            indeg[b.0] += 1;
        }
        let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &w in succ[v].iter().rev() {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Cycle);
        }
        Ok(order)
    }

    /// Longest-path level of each kernel, counting vertices (sources are level 1).
    pub fn levels(&self) -> Result<Vec<u64>> {
        let order = self.topological_order()?;
        let succ = self.successors();
        let mut level = vec![1u64; self.kernels.len()];
        for v in order {
            for &w in &succ[v] {
                level[w] = level[w].max(level[v] + 1);
            }
        }
        Ok(level)
    }

    /// Maximum over paths of the summed vertex weights.
    pub fn max_path_weight<T, F>(&self, weight: F) -> Result<T>
    where
        T: Clone + PartialOrd + std::ops::Add<Output = T> + Default,
        F: Fn(usize) -> T,
    {
        let order = self.topological_order()?;
        let succ = self.successors();
        let mut best: Vec<T> = (0..self.kernels.len()).map(&weight).collect();
        let mut overall = T::default();
        for v in order {
            if best[v] > overall {
                overall = best[v].clone();
            }
            for &w in &succ[v] {
                let cand = best[v].clone() + weight(w);
                if cand > best[w] {
                    best[w] = cand;
                }
            }
        }
        Ok(overall)
    }

    /// Number of antichain layers found by repeatedly peeling off the minimal
    /// elements. Independent of [`Self::levels`].
    pub fn parallel_steps(&self) -> Result<u64> {
        let n = self.kernels.len();
        let mut preds = vec![0usize; n];
        for &(_, b) in &self.edges {
            preds[b.0] += 1;
        }
        let succ = self.successors();
        let mut removed = vec![false; n];
        let mut left = n;
        let mut steps = 0;
        while left > 0 {
            let layer: Vec<usize> = (0..n).filter(|&v| !removed[v] && preds[v] == 0).collect();
            if layer.is_empty() {
                return Err(Error::Cycle);
            }
            for &v in &layer {
                removed[v] = true;
                left -= 1;
                for &w in &succ[v] {
                    preds[w] -= 1;
                }
            }
            steps += 1;
        }
        Ok(steps)
    }

    /// Reachability matrix (strict: a kernel does not reach itself).
    fn reachability(&self) -> Result<Vec<Vec<bool>>> {
        let order = self.topological_order()?;
        let succ = self.successors();
        let n = self.kernels.len();
        let mut reach = vec![vec![false; n]; n];
        for &v in order.iter().rev() {
            for &w in &succ[v] {
                reach[v][w] = true;
                let row = reach[w].clone();
                for (x, r) in row.into_iter().enumerate() {
                    if r {
                        reach[v][x] = true;
                    }
                }
            }
        }
        Ok(reach)
    }

    /// Largest number of thread-blocks along an antichain, computed by summing
    /// block counts per level. Exact only when every two kernels on different
    /// levels are comparable; otherwise [`Error::NotLevelDecomposable`].
    pub fn antichain_width(&self) -> Result<u64> {
        let level = self.levels()?;
        let reach = self.reachability()?;
        let n = self.kernels.len();
        for a in 0..n {
            for b in (a + 1)..n {
                if level[a] != level[b] && !reach[a][b] && !reach[b][a] {
                    return Err(Error::NotLevelDecomposable);
                }
            }
        }
        let depth = level.iter().copied().max().unwrap_or(0) as usize;
        let mut sums = vec![0u64; depth + 1];
        for (v, spec) in self.kernels.iter().enumerate() {
            sums[level[v] as usize] += spec.grid as u64;
        }
        Ok(sums.into_iter().max().unwrap_or(0))
    }

    pub fn structural_metrics(&self) -> Result<StructuralMetrics> {
        if self.kernels.is_empty() {
            return Err(Error::EmptyProgram);
        }
        let n = self.kernels.iter().map(|k| k.grid as u64).sum();
        let l = self.levels()?.into_iter().max().unwrap_or(0);
        let k = self.antichain_width()?;
        let pi = self.parallel_steps()?;
        Ok(StructuralMetrics { n, l, k, pi })
    }

    /// Deterministic text dump: one `kernel` line per vertex then one `edge` line per edge.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, k) in self.kernels.iter().enumerate() {
            let _ = writeln!(out, "kernel {i} {}<<<{},{}>>>", k.name, k.grid, k.block_dim);
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "edge {} {}", a.0, b.0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(grid: usize) -> KernelSpec {
        KernelSpec::new("k", grid, 4)
    }

    #[test]
    fn division_chain() {
        // n = 33, m = 16, l = 4: n - m + 1 = 18 kernels of 4 blocks each
        let prog = MmmProgram::chain((0..18).map(|_| spec(4)));
        assert_eq!(prog.len(), 18);
        assert_eq!(prog.edges().len(), 17);
        let sm = prog.structural_metrics().unwrap();
        assert_eq!(sm, StructuralMetrics { n: 72, l: 18, k: 4, pi: 18 });
    }

    #[test]
    fn single_and_empty() {
        let prog = MmmProgram::chain([spec(10)]);
        assert_eq!(
            prog.structural_metrics().unwrap(),
            StructuralMetrics { n: 10, l: 1, k: 10, pi: 1 }
        );
        assert_eq!(MmmProgram::new().structural_metrics(), Err(Error::EmptyProgram));
    }

    #[test]
    fn diamond_and_cycle() {
        let mut p = MmmProgram::new();
        let ids: Vec<_> = [1, 3, 5, 2].iter().map(|&g| p.add_kernel(spec(g))).collect();
        p.add_edge(ids[0], ids[1]).unwrap();
        p.add_edge(ids[0], ids[2]).unwrap();
        p.add_edge(ids[1], ids[3]).unwrap();
        p.add_edge(ids[2], ids[3]).unwrap();
        assert_eq!(
            p.structural_metrics().unwrap(),
            StructuralMetrics { n: 11, l: 3, k: 8, pi: 3 }
        );
        p.add_edge(ids[3], ids[0]).unwrap();
        assert_eq!(p.structural_metrics(), Err(Error::Cycle));
        assert_eq!(p.add_edge(KernelId(9), ids[0]), Err(Error::UnknownKernel(9)));
    }

    #[test]
    fn non_level_decomposable_is_rejected() {
        // a -> b -> c and an isolated d: d is on level 1 but incomparable with b, c.
        let mut p = MmmProgram::new();
        let a = p.add_kernel(spec(1));
        let b = p.add_kernel(spec(1));
        let c = p.add_kernel(spec(1));
        p.add_kernel(spec(1));
        p.add_edge(a, b).unwrap();
        p.add_edge(b, c).unwrap();
        assert_eq!(p.antichain_width(), Err(Error::NotLevelDecomposable));
    }

    #[test]
    fn dump_is_stable() {
        let p = MmmProgram::chain([KernelSpec::new("a", 2, 3), KernelSpec::new("b", 1, 3)]);
        assert_eq!(p.dump(), "kernel 0 a<<<2,3>>>\nkernel 1 b<<<1,3>>>\nedge 0 1\n");
    }

    fn random_dag() -> impl Strategy<Value = MmmProgram> {
        (1usize..=10)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(1usize..6, n),
                    proptest::collection::vec(any::<bool>(), n * n),
                )
            })
            .prop_map(|(grids, bits)| {
                let n = grids.len();
                let mut p = MmmProgram::new();
                let ids: Vec<_> = grids.into_iter().map(|g| p.add_kernel(spec(g))).collect();
                for a in 0..n {
                    for b in (a + 1)..n {
                        if bits[a * n + b] {
                            p.add_edge(ids[a], ids[b]).unwrap();
                        }
                    }
                }
                p
            })
    }

    /// Exhaustive maximum-weight antichain.
    fn brute_force_width(p: &MmmProgram) -> u64 {
        let n = p.len();
        let reach = p.reachability().unwrap();
        let mut best = 0;
        for mask in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            let antichain = members
                .iter()
                .all(|&a| members.iter().all(|&b| a == b || !reach[a][b]));
            if antichain {
                best = best.max(members.iter().map(|&v| p.kernels()[v].grid as u64).sum());
            }
        }
        best
    }

    proptest! {
        #[test]
        fn mirsky_parallel_steps_equal_longest_path(p in random_dag()) {
            let l = p.levels().unwrap().into_iter().max().unwrap();
            prop_assert_eq!(p.parallel_steps().unwrap(), l);
        }

        #[test]
        fn level_width_matches_exhaustive_antichains(p in random_dag()) {
            if let Ok(k) = p.antichain_width() {
                prop_assert_eq!(k, brute_force_width(&p));
            }
        }

        #[test]
        fn block_count_ignores_edges(p in random_dag()) {
            let n_before: u64 = p.kernels().iter().map(|k| k.grid as u64).sum();
            if let Ok(sm) = p.structural_metrics() {
                prop_assert_eq!(sm.n, n_before);
            }
            let mut q = MmmProgram::chain(p.kernels().iter().cloned());
            for &(a, b) in p.edges() {
                q.add_edge(a, b).unwrap();
            }
            prop_assert_eq!(q.structural_metrics().unwrap().n, n_before);
        }
    }
}
