//! Graph-class recognition with certificates, minimum colouring, maximum
//! weight independent sets and general maximum matching.
//!
//! Everything here works on the conflict graph of a [`ConflictInstance`] and
//! returns item ids. Internally the induced graph is relabelled to dense local
//! indices.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{capability, Result};
use crate::model::{ConflictInstance, GraphClass, ItemId};

/// Induced conflict graph with dense local indices.
#[derive(Clone, Debug)]
pub struct LocalGraph {
    pub ids: Vec<ItemId>,
    pub adj: Vec<Vec<usize>>,
}

impl LocalGraph {
    pub fn new(inst: &ConflictInstance) -> Self {
        let ids = inst.items().to_vec();
        let mut local = vec![usize::MAX; inst.id_bound()];
        for (i, &v) in ids.iter().enumerate() {
            local[v] = i;
        }
        let adj = ids
            .iter()
            .map(|&v| inst.neighbors(v).map(|u| local[u]).collect())
            .collect();
        LocalGraph { ids, adj }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                for &u in &self.adj[comp[i]] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn to_ids(&self, set: &[usize]) -> Vec<ItemId> {
        let mut out: Vec<ItemId> = set.iter().map(|&i| self.ids[i]).collect();
        out.sort_unstable();
        out
    }
}

/// Split partition: `clique` is a clique and `independent` an independent set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPartition {
    pub clique: Vec<ItemId>,
    pub independent: Vec<ItemId>,
}

/// Recognised classes of a conflict graph. A certificate is present exactly
/// when the graph belongs to the class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphClassInfo {
    /// Bipartition (X, Y).
    pub bipartition: Option<(Vec<ItemId>, Vec<ItemId>)>,
    pub split: Option<SplitPartition>,
    /// Connected components, each a clique.
    pub cluster: Option<Vec<Vec<ItemId>>>,
    /// Parts of a complete multipartite graph.
    pub multipartite: Option<Vec<Vec<ItemId>>>,
    /// Perfect elimination ordering, first-eliminated vertex first.
    pub peo: Option<Vec<ItemId>>,
    pub edgeless: bool,
}

impl GraphClassInfo {
    pub fn is_bipartite(&self) -> bool {
        self.bipartition.is_some()
    }

    pub fn is_split(&self) -> bool {
        self.split.is_some()
    }

    pub fn is_cluster(&self) -> bool {
        self.cluster.is_some()
    }

    pub fn is_complete_multipartite(&self) -> bool {
        self.multipartite.is_some()
    }

    pub fn is_chordal(&self) -> bool {
        self.peo.is_some()
    }

    pub fn has_class(&self, class: GraphClass) -> bool {
        match class {
            GraphClass::Bipartite => self.is_bipartite(),
            GraphClass::Split => self.is_split(),
            GraphClass::Cluster => self.is_cluster(),
            GraphClass::CompleteMultipartite => self.is_complete_multipartite(),
            GraphClass::Chordal => self.is_chordal(),
            GraphClass::Edgeless => self.edgeless,
        }
    }

    pub fn classes(&self) -> Vec<GraphClass> {
        GraphClass::ALL
            .into_iter()
            .filter(|&c| self.has_class(c))
            .collect()
    }

    /// Whether [`minimum_coloring`] and [`max_weight_independent_set`] accept
    /// this graph.
    pub fn is_supported(&self) -> bool {
        self.edgeless
            || self.is_bipartite()
            || self.is_split()
            || self.is_cluster()
            || self.is_complete_multipartite()
            || self.is_chordal()
    }

    /// Certificates restricted to the items of `sub`. Every supported class
    /// is closed under induced subgraphs.
    pub fn restrict(&self, sub: &ConflictInstance) -> GraphClassInfo {
        let keep = |set: &Vec<ItemId>| -> Vec<ItemId> {
            set.iter().copied().filter(|&v| sub.contains(v)).collect()
        };
        let keep_parts = |parts: &Vec<Vec<ItemId>>| -> Vec<Vec<ItemId>> {
            parts.iter().map(keep).filter(|p| !p.is_empty()).collect()
        };
        GraphClassInfo {
            bipartition: self.bipartition.as_ref().map(|(x, y)| (keep(x), keep(y))),
            split: self.split.as_ref().map(|s| SplitPartition {
                clique: keep(&s.clique),
                independent: keep(&s.independent),
            }),
            cluster: self.cluster.as_ref().map(keep_parts),
            multipartite: self.multipartite.as_ref().map(keep_parts),
            peo: self.peo.as_ref().map(keep),
            edgeless: self.edgeless || sub.edge_count() == 0,
        }
    }

    /// Checks every present certificate against `inst`.
    pub fn verify(&self, inst: &ConflictInstance) -> std::result::Result<(), String> {
        let covers = |sets: &[&Vec<ItemId>], what: &str| -> std::result::Result<(), String> {
            let mut all: Vec<ItemId> = sets.iter().flat_map(|s| s.iter().copied()).collect();
            all.sort_unstable();
            if all != inst.items() {
                return Err(format!("{what} does not partition the items"));
            }
            Ok(())
        };
        let clique = |set: &[ItemId]| {
            set.iter()
                .enumerate()
                .all(|(i, &u)| set[i + 1..].iter().all(|&v| inst.conflicts(u, v)))
        };
        if let Some((x, y)) = &self.bipartition {
            covers(&[x, y], "bipartition")?;
            if !inst.is_independent(x) || !inst.is_independent(y) {
                return Err("bipartition side has an internal edge".into());
            }
        }
        if let Some(s) = &self.split {
            covers(&[&s.clique, &s.independent], "split partition")?;
            if !clique(&s.clique) || !inst.is_independent(&s.independent) {
                return Err("split partition is not clique + independent set".into());
            }
        }
        if let Some(comps) = &self.cluster {
            covers(&comps.iter().collect::<Vec<_>>(), "cluster components")?;
            let mut internal = 0;
            for c in comps {
                if !clique(c) {
                    return Err("cluster component is not a clique".into());
                }
                internal += c.len() * c.len().saturating_sub(1) / 2;
            }
            if internal != inst.edge_count() {
                return Err("edge between cluster components".into());
            }
        }
        if let Some(parts) = &self.multipartite {
            covers(&parts.iter().collect::<Vec<_>>(), "multipartite parts")?;
            let mut cross = 0;
            for (i, p) in parts.iter().enumerate() {
                if p.is_empty() || !inst.is_independent(p) {
                    return Err("multipartite part is empty or not independent".into());
                }
                for q in &parts[i + 1..] {
                    cross += p.len() * q.len();
                }
            }
            if cross != inst.edge_count() {
                return Err("missing edge between multipartite parts".into());
            }
        }
        if let Some(order) = &self.peo {
            covers(&[order], "elimination ordering")?;
            let mut pos = vec![usize::MAX; inst.id_bound()];
            for (i, &v) in order.iter().enumerate() {
                pos[v] = i;
            }
            for (i, &v) in order.iter().enumerate() {
                let later: Vec<ItemId> = inst.neighbors(v).filter(|&u| pos[u] > i).collect();
                if !clique(&later) {
                    return Err(format!("item {v} is not simplicial in the ordering"));
                }
            }
        }
        if self.edgeless && inst.edge_count() != 0 {
            return Err("graph declared edgeless has edges".into());
        }
        Ok(())
    }
}

/// Recognises every supported class and attaches certificates. A class hint on
/// the instance is advisory: when it disagrees with recognition the verified
/// certificates win.
pub fn recognize(inst: &ConflictInstance) -> GraphClassInfo {
    let g = LocalGraph::new(inst);
    let info = GraphClassInfo {
        bipartition: bipartition(&g).map(|(x, y)| (g.to_ids(&x), g.to_ids(&y))),
        split: split_partition(&g).map(|(k, s)| SplitPartition {
            clique: g.to_ids(&k),
            independent: g.to_ids(&s),
        }),
        cluster: cluster_components(&g).map(|c| c.iter().map(|p| g.to_ids(p)).collect()),
        multipartite: multipartite_parts(&g).map(|c| c.iter().map(|p| g.to_ids(p)).collect()),
        peo: perfect_elimination_ordering(&g).map(|o| o.iter().map(|&i| g.ids[i]).collect()),
        edgeless: g.edge_count() == 0,
    };
    if let Some(hint) = inst.class_hint() {
        if !info.has_class(hint) {
            log::warn!("class hint '{hint}' does not match the conflict graph; ignoring it");
        }
    }
    debug_assert_eq!(info.verify(inst), Ok(()));
    info
}

fn bipartition(g: &LocalGraph) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut color = vec![u8::MAX; g.len()];
    let mut queue = VecDeque::new();
    for s in 0..g.len() {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &u in &g.adj[v] {
                if color[u] == u8::MAX {
                    color[u] = 1 - color[v];
                    queue.push_back(u);
                } else if color[u] == color[v] {
                    return None;
                }
            }
        }
    }
    let (x, y) = (0..g.len()).partition(|&v| color[v] == 0);
    Some((x, y))
}

/// Degree-sequence test: with degrees d_1 ≥ … ≥ d_n and m the largest i with
/// d_i ≥ i − 1, the graph is split iff Σ_{i≤m} d_i = m(m−1) + Σ_{i>m} d_i, and
/// then the m highest-degree vertices form a clique.
fn split_partition(g: &LocalGraph) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.adj[v].len()), v));
    let deg = |i: usize| g.adj[order[i]].len();
    let m = (0..g.len()).take_while(|&i| deg(i) >= i).count();
    let head: usize = (0..m).map(deg).sum();
    let tail: usize = (m..g.len()).map(deg).sum();
    if head != m * m.saturating_sub(1) + tail {
        return None;
    }
    let mut k = order[..m].to_vec();
    let mut s = order[m..].to_vec();
    k.sort_unstable();
    s.sort_unstable();
    let is_clique = k
        .iter()
        .enumerate()
        .all(|(i, &a)| k[i + 1..].iter().all(|&b| g.has_edge(a, b)));
    let is_indep = s
        .iter()
        .all(|&a| g.adj[a].iter().all(|b| k.binary_search(b).is_ok()));
    (is_clique && is_indep).then_some((k, s))
}

fn cluster_components(g: &LocalGraph) -> Option<Vec<Vec<usize>>> {
    let comps = g.components();
    comps
        .iter()
        .all(|c| c.iter().all(|&v| g.adj[v].len() == c.len() - 1))
        .then_some(comps)
}

/// Non-adjacency must be an equivalence relation; its classes are the parts.
fn multipartite_parts(g: &LocalGraph) -> Option<Vec<Vec<usize>>> {
    let n = g.len();
    let mut part = vec![usize::MAX; n];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        if part[v] != usize::MAX {
            continue;
        }
        let p: Vec<usize> = (0..n).filter(|&u| u == v || !g.has_edge(u, v)).collect();
        for &u in &p {
            if part[u] != usize::MAX {
                return None;
            }
            part[u] = parts.len();
        }
        parts.push(p);
    }
    let cross: usize = {
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().sum();
        sizes.iter().map(|&s| s * (total - s)).sum::<usize>() / 2
    };
    let ok = cross == g.edge_count()
        && parts
            .iter()
            .all(|p| p.iter().all(|&a| p.iter().all(|&b| !g.has_edge(a, b))));
    ok.then_some(parts)
}

/// Maximum cardinality search; the reverse visiting order is a perfect
/// elimination ordering iff the graph is chordal.
fn perfect_elimination_ordering(g: &LocalGraph) -> Option<Vec<usize>> {
    let n = g.len();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut visit = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !done[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unvisited vertex");
        done[v] = true;
        visit.push(v);
        for &u in &g.adj[v] {
            if !done[u] {
                weight[u] += 1;
            }
        }
    }
    visit.reverse();
    let mut pos = vec![0; n];
    for (i, &v) in visit.iter().enumerate() {
        pos[v] = i;
    }
    for &v in &visit {
        let later: Vec<usize> = g.adj[v]
            .iter()
            .copied()
            .filter(|&u| pos[u] > pos[v])
            .collect();
        if let Some(&parent) = later.iter().min_by_key(|&&u| pos[u]) {
            if later.iter().any(|&u| u != parent && !g.has_edge(parent, u)) {
                return None;
            }
        }
    }
    Some(visit)
}

const SUPPORTED: &str = "bipartite, split, cluster, complete multipartite, chordal, edgeless";

/// Minimum colouring for a supported class. Colour classes are returned as
/// sorted item sets, non-empty, in a deterministic order.
pub fn minimum_coloring(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
) -> Result<Vec<Vec<ItemId>>> {
    if inst.is_empty() {
        return Ok(Vec::new());
    }
    let nonempty = |sets: Vec<Vec<ItemId>>| sets.into_iter().filter(|s| !s.is_empty()).collect();
    if info.edgeless {
        return Ok(vec![inst.items().to_vec()]);
    }
    if let Some((x, y)) = &info.bipartition {
        return Ok(nonempty(vec![x.clone(), y.clone()]));
    }
    if let Some(parts) = &info.multipartite {
        return Ok(nonempty(parts.clone()));
    }
    if let Some(order) = chordal_order(info) {
        let mut color = vec![usize::MAX; inst.id_bound()];
        let mut classes: Vec<Vec<ItemId>> = Vec::new();
        for &v in order.iter().rev() {
            let used: Vec<usize> = inst.neighbors(v).map(|u| color[u]).collect();
            let c = (0..).find(|c| !used.contains(c)).expect("free colour");
            if c == classes.len() {
                classes.push(Vec::new());
            }
            color[v] = c;
            classes[c].push(v);
        }
        for c in &mut classes {
            c.sort_unstable();
        }
        return Ok(classes);
    }
    capability(format!(
        "no colouring certificate; supported classes: {SUPPORTED}"
    ))
}

/// A perfect elimination ordering from the chordal, split or cluster
/// certificate.
fn chordal_order(info: &GraphClassInfo) -> Option<Vec<ItemId>> {
    if let Some(order) = &info.peo {
        return Some(order.clone());
    }
    if let Some(s) = &info.split {
        return Some(s.independent.iter().chain(&s.clique).copied().collect());
    }
    info.cluster.as_ref().map(|c| c.concat())
}

/// Maximum weight independent set for a supported class. `weights` is
/// indexed by item id. Only positive-weight items are returned; the result
/// is sorted.
pub fn max_weight_independent_set(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    weights: &[u64],
) -> Result<Vec<ItemId>> {
    let positive = |set: &[ItemId]| -> Vec<ItemId> {
        set.iter().copied().filter(|&v| weights[v] > 0).collect()
    };
    let best_of = |groups: &[Vec<ItemId>], whole_group: bool| -> Vec<ItemId> {
        let mut best: Vec<ItemId> = Vec::new();
        let mut best_w = 0u64;
        for g in groups {
            let cand = if whole_group {
                positive(g)
            } else {
                g.iter()
                    .copied()
                    .filter(|&v| weights[v] > 0)
                    .max_by_key(|&v| (weights[v], std::cmp::Reverse(v)))
                    .into_iter()
                    .collect()
            };
            let w: u64 = cand.iter().map(|&v| weights[v]).sum();
            if w > best_w {
                best_w = w;
                best = cand;
            }
        }
        best
    };
    if inst.is_empty() {
        return Ok(Vec::new());
    }
    if info.edgeless {
        return Ok(positive(inst.items()));
    }
    if let Some(comps) = &info.cluster {
        let mut out: Vec<ItemId> = comps
            .iter()
            .flat_map(|c| best_of(std::slice::from_ref(c), false))
            .collect();
        out.sort_unstable();
        return Ok(out);
    }
    if let Some(parts) = &info.multipartite {
        return Ok(best_of(parts, true));
    }
    if let Some(order) = chordal_order(info) {
        return Ok(mwis_chordal(inst, &order, weights));
    }
    if let Some((x, _)) = &info.bipartition {
        return Ok(mwis_bipartite(inst, x, weights));
    }
    capability(format!(
        "no independent-set certificate; supported classes: {SUPPORTED}"
    ))
}

/// Frank's algorithm: a forward pass along the elimination ordering that
/// discounts later neighbours, then a greedy backward pass over the
/// vertices that kept positive residual weight.
fn mwis_chordal(inst: &ConflictInstance, order: &[ItemId], weights: &[u64]) -> Vec<ItemId> {
    let mut pos = vec![usize::MAX; inst.id_bound()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut residual: Vec<u64> = order.iter().map(|&v| weights[v]).collect();
    let mut red = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let r = residual[i];
        if r == 0 {
            continue;
        }
        red.push(v);
        for u in inst.neighbors(v) {
            if pos[u] > i {
                residual[pos[u]] = residual[pos[u]].saturating_sub(r);
            }
        }
    }
    let mut chosen: Vec<ItemId> = Vec::new();
    for &v in red.iter().rev() {
        if inst.compatible_with(v, &chosen) {
            chosen.push(v);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Complement of a minimum weight vertex cover, found as a minimum s-t cut.
fn mwis_bipartite(inst: &ConflictInstance, x_side: &[ItemId], weights: &[u64]) -> Vec<ItemId> {
    let g = LocalGraph::new(inst);
    let n = g.len();
    let (s, t) = (n, n + 1);
    let mut in_x = vec![false; n];
    for (i, &v) in g.ids.iter().enumerate() {
        in_x[i] = x_side.binary_search(&v).is_ok();
    }
    let inf: u128 = g.ids.iter().map(|&v| weights[v] as u128).sum::<u128>() + 1;
    let mut flow = MaxFlow::new(n + 2);
    for i in 0..n {
        let w = weights[g.ids[i]] as u128;
        if in_x[i] {
            flow.add_edge(s, i, w);
            for &j in &g.adj[i] {
                flow.add_edge(i, j, inf);
            }
        } else {
            flow.add_edge(i, t, w);
        }
    }
    flow.max_flow(s, t);
    let reach = flow.source_side(s);
    let mut out: Vec<ItemId> = (0..n)
        .filter(|&i| weights[g.ids[i]] > 0 && (in_x[i] == reach[i]))
        .map(|i| g.ids[i])
        .collect();
    out.sort_unstable();
    out
}

/// Dinic's maximum flow.
pub struct MaxFlow {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u128>,
    level: Vec<usize>,
    iter: Vec<usize>,
}

impl MaxFlow {
    pub fn new(n: usize) -> Self {
        MaxFlow {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, c: u128) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = usize::MAX);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.head[v] {
                let u = self.to[e];
                if self.cap[e] > 0 && self.level[u] == usize::MAX {
                    self.level[u] = self.level[v] + 1;
                    q.push_back(u);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, f: u128) -> u128 {
        if v == t {
            return f;
        }
        while self.iter[v] < self.head[v].len() {
            let e = self.head[v][self.iter[v]];
            let u = self.to[e];
            if self.cap[e] > 0 && self.level[u] == self.level[v] + 1 {
                let d = self.dfs(u, t, f.min(self.cap[e]));
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> u128 {
        let mut total = 0;
        loop {
            self.bfs(s);
            if self.level[t] == usize::MAX {
                return total;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, u128::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }

    /// Vertices reachable from `s` in the residual graph.
    pub fn source_side(&mut self, s: usize) -> Vec<bool> {
        self.bfs(s);
        self.level.iter().map(|&l| l != usize::MAX).collect()
    }
}

/// Maximum cardinality matching of an arbitrary graph on vertices `0..n`
/// (Edmonds' blossom algorithm). Pairs are returned as `(a, b)` with `a < b`,
/// sorted.
pub fn maximum_matching_general(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let mut m = Blossom::new(adj);
    for v in 0..n {
        if m.mate[v] == usize::MAX {
            if let Some(&u) = m.adj[v].iter().find(|&&u| m.mate[u] == usize::MAX) {
                m.mate[v] = u;
                m.mate[u] = v;
            }
        }
    }
    for v in 0..n {
        if m.mate[v] == usize::MAX {
            m.augment_from(v);
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .filter(|&v| m.mate[v] != usize::MAX && v < m.mate[v])
        .map(|v| (v, m.mate[v]))
        .collect();
    pairs.sort_unstable();
    pairs
}

struct Blossom {
    adj: Vec<Vec<usize>>,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
}

const NONE: usize = usize::MAX;

impl Blossom {
    fn new(adj: Vec<Vec<usize>>) -> Self {
        let n = adj.len();
        Blossom {
            adj,
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.used.iter_mut().for_each(|u| *u = false);
        self.parent.iter_mut().for_each(|p| *p = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            for k in 0..self.adj[v].len() {
                let to = self.adj[v][k];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|b| *b = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                q.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    q.push_back(next);
                }
            }
        }
        None
    }

    fn augment_from(&mut self, root: usize) {
        if let Some(mut v) = self.find_path(root) {
            while v != NONE {
                let pv = self.parent[v];
                let ppv = self.mate[pv];
                self.mate[v] = pv;
                self.mate[pv] = v;
                v = ppv;
            }
        }
    }
}
