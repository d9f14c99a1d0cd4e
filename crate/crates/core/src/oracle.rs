//! Exact small-scale solvers used as ground truth: optimal BPC packing,
//! brute-force BIS and brute-force MaxSize.

use crate::bis::BisProblem;
use crate::error::{capability, param, Result};
use crate::model::{validate_packing, ConflictInstance, ItemId, Packing};

/// Default item limit of [`opt_bpc_exact`].
pub const DEFAULT_EXACT_LIMIT: usize = 18;
/// Default vertex limit of [`bis_brute`].
pub const DEFAULT_BIS_LIMIT: usize = 20;

/// Optimal packing and its bin count.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub packing: Packing,
    pub opt: usize,
}

/// Optimal BPC packing by branch and bound. Fails with a capability error
/// when the instance has more than `limit_n` items.
pub fn opt_bpc_exact(inst: &ConflictInstance, limit_n: usize) -> Result<ExactSolution> {
    if inst.len() > limit_n {
        return capability(format!(
            "exact oracle limited to {limit_n} items, instance has {}",
            inst.len()
        ));
    }
    let items = inst.items();
    let sizes: Vec<u64> = items.iter().map(|&v| inst.size(v)).collect();
    let conflict = |a: usize, b: usize| inst.conflicts(items[a], items[b]);
    let bins = exact_pack_local(inst.unit(), &sizes, &conflict, None).expect("no node limit");
    let opt = bins.len();
    let bins = bins
        .into_iter()
        .map(|b| {
            let mut b: Vec<ItemId> = b.into_iter().map(|i| items[i]).collect();
            b.sort_unstable();
            b
        })
        .collect();
    Ok(ExactSolution {
        packing: Packing::new(bins, "exact"),
        opt,
    })
}

/// Searches for a packing with at most `max_bins` bins, exploring at most
/// `node_limit` search nodes. `Ok(None)` means none exists or the search gave up.
pub fn pack_within(
    inst: &ConflictInstance,
    max_bins: usize,
    node_limit: u64,
) -> Result<Option<Packing>> {
    if inst.len() > 128 {
        return capability("bounded exact search is limited to 128 items");
    }
    let items = inst.items();
    let sizes: Vec<u64> = items.iter().map(|&v| inst.size(v)).collect();
    let conflict = |a: usize, b: usize| inst.conflicts(items[a], items[b]);
    let mut search = Search::new(inst.unit(), &sizes, &conflict);
    search.best = max_bins + 1;
    search.node_limit = Some(node_limit);
    let found = search.run();
    Ok(found.map(|bins| {
        Packing::new(
            bins.into_iter()
                .map(|b| {
                    let mut b: Vec<ItemId> = b.into_iter().map(|i| items[i]).collect();
                    b.sort_unstable();
                    b
                })
                .collect(),
            "exact-bounded",
        )
    }))
}

/// Optimal packing of local items `0..sizes.len()` where `conflict(a, b)`
/// forbids sharing a bin. Returns `None` only when a node limit was given and
/// exhausted before optimality was proven. At most 128 items.
pub fn exact_pack_local(
    unit: u64,
    sizes: &[u64],
    conflict: &dyn Fn(usize, usize) -> bool,
    node_limit: Option<u64>,
) -> Option<Vec<Vec<usize>>> {
    assert!(
        sizes.len() <= 128,
        "exact search supports at most 128 items"
    );
    let mut search = Search::new(unit, sizes, conflict);
    search.node_limit = node_limit;
    let greedy = search.first_fit();
    search.best = greedy.len();
    search.best_bins = Some(greedy);
    if search.best > search.lower_bound() {
        search.run();
    }
    if search.aborted {
        return None;
    }
    search.best_bins
}

struct Search {
    unit: u64,
    /// Items in search order (size descending).
    sizes: Vec<u64>,
    order: Vec<usize>,
    nbr: Vec<u128>,
    twin_of_prev: Vec<bool>,
    suffix: Vec<u64>,
    best: usize,
    best_bins: Option<Vec<Vec<usize>>>,
    node_limit: Option<u64>,
    nodes: u64,
    aborted: bool,
}

impl Search {
    fn new(unit: u64, sizes: &[u64], conflict: &dyn Fn(usize, usize) -> bool) -> Self {
        let n = sizes.len();
        let degree: Vec<usize> = (0..n)
            .map(|a| (0..n).filter(|&b| b != a && conflict(a, b)).count())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&a| (std::cmp::Reverse(sizes[a]), std::cmp::Reverse(degree[a]), a));
        let mut nbr = vec![0u128; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && conflict(order[i], order[j]) {
                    nbr[i] |= 1 << j;
                }
            }
        }
        let sorted: Vec<u64> = order.iter().map(|&a| sizes[a]).collect();
        let twin_of_prev = (0..n)
            .map(|i| {
                i > 0 && sorted[i] == sorted[i - 1] && {
                    let mask = !((1u128 << i) | (1u128 << (i - 1)));
                    nbr[i] & mask == nbr[i - 1] & mask
                }
            })
            .collect();
        let mut suffix = vec![0u64; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + sorted[i];
        }
        Search {
            unit,
            sizes: sorted,
            order,
            nbr,
            twin_of_prev,
            suffix,
            best: usize::MAX,
            best_bins: None,
            node_limit: None,
            nodes: 0,
            aborted: false,
        }
    }

    fn incompatible(&self, i: usize, j: usize) -> bool {
        self.nbr[i] >> j & 1 == 1 || self.sizes[i] + self.sizes[j] > self.unit
    }

    /// max(⌈s(I)⌉, largest greedy clique of the incompatibility graph).
    fn lower_bound(&self) -> usize {
        let n = self.sizes.len();
        let by_size = self.suffix[0].div_ceil(self.unit) as usize;
        let mut clique_bound = 0;
        for start in 0..n {
            let mut clique = vec![start];
            for j in 0..n {
                if j != start && clique.iter().all(|&c| self.incompatible(c, j)) {
                    clique.push(j);
                }
            }
            clique_bound = clique_bound.max(clique.len());
        }
        by_size.max(clique_bound)
    }

    /// Conflict-aware first fit in search order.
    fn first_fit(&self) -> Vec<Vec<usize>> {
        let mut loads: Vec<u64> = Vec::new();
        let mut masks: Vec<u128> = Vec::new();
        let mut bins: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.sizes.len() {
            let s = self.sizes[i];
            match (0..bins.len()).find(|&b| loads[b] + s <= self.unit && masks[b] >> i & 1 == 0) {
                Some(b) => {
                    loads[b] += s;
                    masks[b] |= self.nbr[i];
                    bins[b].push(self.order[i]);
                }
                None => {
                    loads.push(s);
                    masks.push(self.nbr[i]);
                    bins.push(vec![self.order[i]]);
                }
            }
        }
        bins
    }

    fn run(&mut self) -> Option<Vec<Vec<usize>>> {
        let n = self.sizes.len();
        let mut state = State {
            loads: Vec::new(),
            masks: Vec::new(),
            assign: vec![0; n],
        };
        let lb = self.lower_bound();
        self.dfs(0, &mut state, lb);
        if self.aborted {
            return None;
        }
        self.best_bins.clone()
    }

    fn dfs(&mut self, i: usize, st: &mut State, lb: usize) {
        if self.aborted || self.best <= lb {
            return;
        }
        self.nodes += 1;
        if let Some(limit) = self.node_limit {
            if self.nodes > limit {
                self.aborted = true;
                return;
            }
        }
        let n = self.sizes.len();
        let open = st.loads.len();
        if i == n {
            if open < self.best {
                self.best = open;
                let mut bins = vec![Vec::new(); open];
                for (k, &b) in st.assign.iter().enumerate() {
                    bins[b].push(self.order[k]);
                }
                self.best_bins = Some(bins);
            }
            return;
        }
        let free: u64 = st.loads.iter().map(|&l| self.unit - l).sum();
        let overflow = self.suffix[i].saturating_sub(free);
        if open + overflow.div_ceil(self.unit) as usize >= self.best {
            return;
        }
        let s = self.sizes[i];
        let rest = if i + 1 >= 128 { 0 } else { !0u128 << (i + 1) };
        let start = if self.twin_of_prev[i] {
            st.assign[i - 1]
        } else {
            0
        };
        let mut tried: Vec<(u64, u128)> = Vec::new();
        for b in start..open {
            if st.loads[b] + s > self.unit || st.masks[b] >> i & 1 == 1 {
                continue;
            }
            let key = (st.loads[b], st.masks[b] & rest);
            if tried.contains(&key) {
                continue;
            }
            tried.push(key);
            st.loads[b] += s;
            let saved = st.masks[b];
            st.masks[b] |= self.nbr[i];
            st.assign[i] = b;
            self.dfs(i + 1, st, lb);
            st.loads[b] -= s;
            st.masks[b] = saved;
            if self.aborted || self.best <= lb {
                return;
            }
        }
        if open + 1 < self.best {
            st.loads.push(s);
            st.masks.push(self.nbr[i]);
            st.assign[i] = open;
            self.dfs(i + 1, st, lb);
            st.loads.pop();
            st.masks.pop();
        }
    }
}

struct State {
    loads: Vec<u64>,
    masks: Vec<u128>,
    assign: Vec<usize>,
}

/// Maximum-weight independent set within the budget by exhaustive search.
/// Ties go to the lexicographically smallest sorted id set.
pub fn bis_brute(problem: &BisProblem, limit_n: usize) -> Result<(Vec<ItemId>, u64)> {
    let verts = problem.graph.items();
    if verts.len() > limit_n {
        return capability(format!(
            "brute-force BIS limited to {limit_n} vertices, problem has {}",
            verts.len()
        ));
    }
    struct Ctx<'a> {
        p: &'a BisProblem,
        verts: &'a [ItemId],
        suffix: Vec<u64>,
        cur: Vec<ItemId>,
        best: Vec<ItemId>,
        best_w: u64,
    }
    fn go(c: &mut Ctx, i: usize, w: u64) {
        if w > c.best_w || (w == c.best_w && c.cur < c.best) {
            c.best_w = w;
            c.best = c.cur.clone();
        }
        if i == c.verts.len() || w + c.suffix[i] < c.best_w {
            return;
        }
        let v = c.verts[i];
        let wv = c.p.weights[v];
        if w + wv <= c.p.budget && c.p.graph.compatible_with(v, &c.cur) {
            c.cur.push(v);
            go(c, i + 1, w + wv);
            c.cur.pop();
        }
        go(c, i + 1, w);
    }
    let mut suffix = vec![0u64; verts.len() + 1];
    for i in (0..verts.len()).rev() {
        suffix[i] = suffix[i + 1] + problem.weights[verts[i]];
    }
    let mut ctx = Ctx {
        p: problem,
        verts,
        suffix,
        cur: Vec::new(),
        best: Vec::new(),
        best_w: 0,
    };
    go(&mut ctx, 0, 0);
    Ok((ctx.best, ctx.best_w))
}

/// Limits of [`maxsize_brute`].
#[derive(Clone, Copy, Debug)]
pub struct MaxSizeLimits {
    pub max_unpacked: usize,
    pub max_bins: usize,
}

impl Default for MaxSizeLimits {
    fn default() -> Self {
        MaxSizeLimits {
            max_unpacked: 12,
            max_bins: 4,
        }
    }
}

/// Largest total size (in units) of unpacked items that can be added to the
/// bins of `initial`, with an augmented packing attaining it.
pub fn maxsize_brute(
    inst: &ConflictInstance,
    initial: &Packing,
    limits: MaxSizeLimits,
) -> Result<(u64, Packing)> {
    if !validate_packing(inst, initial, false).feasible {
        return param("initial packing is infeasible");
    }
    let packed = initial.items();
    let mut free: Vec<ItemId> = inst
        .items()
        .iter()
        .copied()
        .filter(|v| packed.binary_search(v).is_err())
        .collect();
    if free.len() > limits.max_unpacked || initial.bin_count() > limits.max_bins {
        return capability(format!(
            "brute-force MaxSize limited to {} unpacked items and {} bins",
            limits.max_unpacked, limits.max_bins
        ));
    }
    free.sort_by_key(|&v| (std::cmp::Reverse(inst.size(v)), v));
    struct Ctx<'a> {
        inst: &'a ConflictInstance,
        free: Vec<ItemId>,
        suffix: Vec<u64>,
        bins: Vec<Vec<ItemId>>,
        loads: Vec<u64>,
        best: u64,
        best_bins: Vec<Vec<ItemId>>,
    }
    fn go(c: &mut Ctx, i: usize, added: u64) {
        if added > c.best {
            c.best = added;
            c.best_bins = c.bins.clone();
        }
        if i == c.free.len() || added + c.suffix[i] <= c.best {
            return;
        }
        let v = c.free[i];
        let s = c.inst.size(v);
        for b in 0..c.bins.len() {
            if c.loads[b] + s <= c.inst.unit() && c.inst.compatible_with(v, &c.bins[b]) {
                c.bins[b].push(v);
                c.loads[b] += s;
                go(c, i + 1, added + s);
                c.bins[b].pop();
                c.loads[b] -= s;
            }
        }
        go(c, i + 1, added);
    }
    let mut suffix = vec![0u64; free.len() + 1];
    for i in (0..free.len()).rev() {
        suffix[i] = suffix[i + 1] + inst.size(free[i]);
    }
    let loads = initial.bins.iter().map(|b| inst.size_of(b)).collect();
    let mut ctx = Ctx {
        inst,
        free,
        suffix,
        bins: initial.bins.clone(),
        loads,
        best: 0,
        best_bins: initial.bins.clone(),
    };
    go(&mut ctx, 0, 0);
    Ok((ctx.best, Packing::new(ctx.best_bins, "maxsize-brute")))
}
