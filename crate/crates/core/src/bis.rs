//! Bounded independent set: maximise w(S) over independent sets S with
//! w(S) ≤ β. A PTAS for every class with an exact MWIS routine, an FPTAS for
//! split graphs, and the knapsack FPTAS both rely on.

use crate::error::{capability, param, Result};
use crate::graphs::{max_weight_independent_set, GraphClassInfo};
use crate::model::{ConflictInstance, ItemId};

/// Default cap on ⌈1/ε⌉ for [`bis_ptas`].
pub const DEFAULT_ENUMERATION_CAP: usize = 6;

/// A BIS instance. The conflict graph of `graph` is the input graph; item
/// sizes of `graph` are ignored, `weights` (indexed by item id) are used.
#[derive(Clone, Debug)]
pub struct BisProblem {
    pub graph: ConflictInstance,
    pub weights: Vec<u64>,
    pub budget: u64,
    pub info: GraphClassInfo,
}

impl BisProblem {
    pub fn new(
        graph: ConflictInstance,
        weights: Vec<u64>,
        budget: u64,
        info: GraphClassInfo,
    ) -> Result<Self> {
        if weights.len() < graph.id_bound() {
            return param("weights must cover every item id");
        }
        Ok(BisProblem {
            graph,
            weights,
            budget,
            info,
        })
    }

    pub fn weight_of(&self, set: &[ItemId]) -> u64 {
        set.iter().map(|&v| self.weights[v]).sum()
    }

    /// Whether `set` is independent and within budget.
    pub fn is_feasible(&self, set: &[ItemId]) -> bool {
        set.iter().all(|&v| self.graph.contains(v))
            && self.graph.is_independent(set)
            && self.weight_of(set) <= self.budget
    }
}

/// How [`knapsack`] solves its dynamic program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KnapsackMode {
    /// Exact capacity DP when the table is small, profit scaling otherwise.
    Auto,
    /// Exact DP over (gcd-reduced) capacities.
    Exact,
    /// Profit scaling with K = ε·P_max/n.
    Scaled,
}

const EXACT_TABLE_LIMIT: u64 = 4_000_000;

/// 0/1 knapsack with profit at least (1 − ε)·OPT. Returns sorted indices into
/// `profits`/`costs`.
pub fn knapsack_fptas(profits: &[u64], costs: &[u64], budget: u64, eps: f64) -> Result<Vec<usize>> {
    knapsack(profits, costs, budget, eps, KnapsackMode::Auto)
}

pub fn knapsack(
    profits: &[u64],
    costs: &[u64],
    budget: u64,
    eps: f64,
    mode: KnapsackMode,
) -> Result<Vec<usize>> {
    if !(eps > 0.0 && eps < 1.0) {
        return param(format!("eps must lie in (0, 1), got {eps}"));
    }
    if profits.len() != costs.len() {
        return param("profits and costs differ in length");
    }
    let cand: Vec<usize> = (0..profits.len())
        .filter(|&i| costs[i] <= budget && profits[i] > 0)
        .collect();
    if cand.is_empty() {
        return Ok(Vec::new());
    }
    let g = cand
        .iter()
        .fold(0u64, |g, &i| num_integer::gcd(g, costs[i]));
    let g = g.max(1);
    let cap = budget / g;
    let exact_fits = (cand.len() as u64).saturating_mul(cap + 1) <= EXACT_TABLE_LIMIT;
    let total_cost: u64 = cand.iter().map(|&i| costs[i]).sum();
    let mut picked = if total_cost <= budget {
        cand.clone()
    } else {
        match mode {
            KnapsackMode::Exact => exact_dp(&cand, profits, costs, g, cap),
            KnapsackMode::Auto if exact_fits => exact_dp(&cand, profits, costs, g, cap),
            _ => scaled_dp(&cand, profits, costs, budget, eps),
        }
    };
    picked.sort_unstable();
    Ok(picked)
}

fn exact_dp(cand: &[usize], profits: &[u64], costs: &[u64], g: u64, cap: u64) -> Vec<usize> {
    let cap = cap as usize;
    let n = cand.len();
    let mut best = vec![0u64; cap + 1];
    let mut take = vec![false; n * (cap + 1)];
    for (k, &i) in cand.iter().enumerate() {
        let c = (costs[i] / g) as usize;
        let p = profits[i];
        for b in (c..=cap).rev() {
            let with = best[b - c] + p;
            if with > best[b] {
                best[b] = with;
                take[k * (cap + 1) + b] = true;
            }
        }
    }
    let mut out = Vec::new();
    let mut b = cap;
    for k in (0..n).rev() {
        if take[k * (cap + 1) + b] {
            out.push(cand[k]);
            b -= (costs[cand[k]] / g) as usize;
        }
    }
    out
}

/// Minimum cost to reach each scaled profit; profits rounded down to
/// multiples of K = ε·P_max/n.
fn scaled_dp(cand: &[usize], profits: &[u64], costs: &[u64], budget: u64, eps: f64) -> Vec<usize> {
    let n = cand.len();
    let pmax = cand.iter().map(|&i| profits[i]).max().unwrap_or(0) as f64;
    let k = (eps * pmax / n as f64).max(f64::MIN_POSITIVE);
    let scaled: Vec<usize> = cand
        .iter()
        .map(|&i| (profits[i] as f64 / k).floor() as usize)
        .collect();
    let top: usize = scaled.iter().sum();
    let mut cost = vec![u64::MAX; top + 1];
    cost[0] = 0;
    let mut take = vec![false; n * (top + 1)];
    for j in 0..n {
        let p = scaled[j];
        let c = costs[cand[j]];
        for q in (p..=top).rev() {
            if cost[q - p] != u64::MAX && cost[q - p] + c < cost[q] {
                cost[q] = cost[q - p] + c;
                take[j * (top + 1) + q] = true;
            }
        }
    }
    let mut q = (0..=top).rev().find(|&q| cost[q] <= budget).unwrap_or(0);
    let mut out = Vec::new();
    for j in (0..n).rev() {
        if q > 0 && take[j * (top + 1) + q] {
            out.push(cand[j]);
            q -= scaled[j];
        }
    }
    out
}

/// PTAS for BIS. Enumerates independent sets F with |F| ≤ ⌊1/ε⌋ and
/// w(F) ≤ β, completes each with a maximum weight independent set among the
/// light vertices (w ≤ ε·β) not adjacent to F, and evicts minimum-weight
/// vertices of the completion until the budget holds.
pub fn bis_ptas(problem: &BisProblem, eps: f64, cap: usize) -> Result<Vec<ItemId>> {
    if !(eps > 0.0 && eps < 1.0) {
        return param(format!("eps must lie in (0, 1), got {eps}"));
    }
    let rounds = (1.0 / eps).ceil() as usize;
    if rounds > cap {
        return param(format!(
            "eps = {eps} needs enumeration depth {rounds} above the cap {cap}; use eps ≥ 1/{cap}"
        ));
    }
    if !problem.info.is_supported() {
        return capability("no independent-set certificate for the BIS graph");
    }
    let g = &problem.graph;
    let beta = problem.budget;
    let light = |v: ItemId| problem.weights[v] as f64 <= eps * beta as f64;
    let pool: Vec<ItemId> = g
        .items()
        .iter()
        .copied()
        .filter(|&v| problem.weights[v] > 0 && problem.weights[v] <= beta)
        .collect();
    let max_f = (1.0 / eps).floor() as usize;

    let mut best: Vec<ItemId> = Vec::new();
    let mut best_w = 0u64;
    let mut f: Vec<ItemId> = Vec::new();
    let mut evaluate = |f: &[ItemId]| -> Result<()> {
        let wf = problem.weight_of(f);
        let residual = g.keep(
            g.items()
                .iter()
                .copied()
                .filter(|&v| light(v) && !f.contains(&v) && g.compatible_with(v, f)),
        );
        let info = problem.info.restrict(&residual);
        let mut s = max_weight_independent_set(&residual, &info, &problem.weights)?;
        let mut total = wf + problem.weight_of(&s);
        let triggered = total > beta;
        while total > beta {
            let (pos, &z) = s
                .iter()
                .enumerate()
                .min_by_key(|(_, &v)| (problem.weights[v], v))
                .expect("S is non-empty while over budget");
            total -= problem.weights[z];
            s.remove(pos);
        }
        if triggered {
            debug_assert!(total as f64 >= beta as f64 * (1.0 - eps) - 1e-9);
        }
        if total > best_w {
            best_w = total;
            best = f.iter().chain(&s).copied().collect();
        }
        Ok(())
    };
    enumerate_subsets(g, &pool, problem, max_f, 0, &mut f, 0, &mut evaluate)?;
    best.sort_unstable();
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_subsets(
    g: &ConflictInstance,
    pool: &[ItemId],
    problem: &BisProblem,
    max_size: usize,
    from: usize,
    cur: &mut Vec<ItemId>,
    weight: u64,
    visit: &mut dyn FnMut(&[ItemId]) -> Result<()>,
) -> Result<()> {
    visit(cur)?;
    if cur.len() == max_size {
        return Ok(());
    }
    for i in from..pool.len() {
        let v = pool[i];
        let w = weight + problem.weights[v];
        if w <= problem.budget && g.compatible_with(v, cur) {
            cur.push(v);
            enumerate_subsets(g, pool, problem, max_size, i + 1, cur, w, visit)?;
            cur.pop();
        }
    }
    Ok(())
}

/// FPTAS for BIS on split graphs: the best of a knapsack over the
/// independent side and, for each clique vertex v with w(v) ≤ β, v plus a
/// knapsack over its non-neighbours on the independent side with budget
/// β − w(v).
pub fn bis_fptas_split(problem: &BisProblem, eps: f64) -> Result<Vec<ItemId>> {
    let Some(split) = &problem.info.split else {
        return capability("split FPTAS needs a split partition of the BIS graph");
    };
    if !(eps > 0.0 && eps < 1.0) {
        return param(format!("eps must lie in (0, 1), got {eps}"));
    }
    let w = &problem.weights;
    let beta = problem.budget;
    let pick = |pool: &[ItemId], budget: u64| -> Result<Vec<ItemId>> {
        let p: Vec<u64> = pool.iter().map(|&v| w[v]).collect();
        Ok(knapsack_fptas(&p, &p, budget, eps)?
            .into_iter()
            .map(|i| pool[i])
            .collect())
    };
    let mut best = pick(&split.independent, beta)?;
    let mut best_w = problem.weight_of(&best);
    for &v in &split.clique {
        if w[v] > beta {
            continue;
        }
        let pool: Vec<ItemId> = split
            .independent
            .iter()
            .copied()
            .filter(|&u| !problem.graph.conflicts(u, v))
            .collect();
        let mut cand = pick(&pool, beta - w[v])?;
        cand.push(v);
        let cw = problem.weight_of(&cand);
        if cw > best_w {
            best_w = cw;
            best = cand;
        }
    }
    best.sort_unstable();
    Ok(best)
}
