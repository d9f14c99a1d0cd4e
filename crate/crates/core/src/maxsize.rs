//! The maximization problem: grow the bins of a partial packing with
//! unpacked items of maximum total size. Each bin is a separate bounded
//! independent set problem over the unpacked items compatible with it, so the
//! whole problem is a separable assignment problem with a BIS oracle per bin.

use serde::{Deserialize, Serialize};

use crate::bis::{bis_fptas_split, bis_ptas, BisProblem, DEFAULT_ENUMERATION_CAP};
use crate::error::{capability, param, Result};
use crate::graphs::GraphClassInfo;
use crate::lp::{self, LinearProgram};
use crate::model::{validate_packing, ConflictInstance, ItemId, Packing};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxSizeStrategy {
    /// One bin after the other, each solved by the BIS oracle.
    #[default]
    GreedySequential,
    /// Configuration LP by column generation plus randomized rounding.
    ConfigLp,
}

impl MaxSizeStrategy {
    pub fn name(self) -> &'static str {
        match self {
            MaxSizeStrategy::GreedySequential => "greedy-sequential",
            MaxSizeStrategy::ConfigLp => "config-lp",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MaxSizeConfig {
    pub strategy: MaxSizeStrategy,
    /// Accuracy of the BIS PTAS.
    pub eps: f64,
    pub bis_cap: usize,
    /// Accuracy of the split-graph FPTAS, used when a split partition exists.
    pub split_eps: f64,
    /// Seed of the randomized rounding.
    pub seed: u64,
}

impl Default for MaxSizeConfig {
    fn default() -> Self {
        MaxSizeConfig {
            strategy: MaxSizeStrategy::GreedySequential,
            eps: 1.0 / 6.0,
            bis_cap: DEFAULT_ENUMERATION_CAP,
            split_eps: 0.05,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MaxSizeResult {
    pub augmented: Packing,
    pub added_items: Vec<ItemId>,
    /// Added size in instance units.
    pub added_size: u64,
    pub strategy: MaxSizeStrategy,
    /// Approximation ratio the strategy guarantees with the oracle used.
    pub guarantee: f64,
}

/// The single-bin problem of bin `bin`: unpacked items with no conflict in
/// the bin, weights equal to sizes, budget equal to the free capacity.
pub fn bin_subproblem(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    bin: &[ItemId],
    unpacked: &[ItemId],
) -> BisProblem {
    let graph = inst.keep(
        unpacked
            .iter()
            .copied()
            .filter(|&v| inst.compatible_with(v, bin)),
    );
    let weights = (0..inst.id_bound()).map(|v| inst.size(v)).collect();
    let budget = inst.unit() - inst.size_of(bin);
    let info = info.restrict(&graph);
    BisProblem {
        graph,
        weights,
        budget,
        info,
    }
}

/// Ratio of the single-bin oracle chosen for `info`.
fn oracle_ratio(info: &GraphClassInfo, cfg: &MaxSizeConfig) -> f64 {
    if info.is_split() {
        1.0 - cfg.split_eps
    } else {
        1.0 - cfg.eps
    }
}

fn solve_bin(problem: &BisProblem, cfg: &MaxSizeConfig) -> Result<Vec<ItemId>> {
    if problem.graph.is_empty() || problem.budget == 0 {
        return Ok(Vec::new());
    }
    if problem.info.is_split() {
        bis_fptas_split(problem, cfg.split_eps)
    } else {
        bis_ptas(problem, cfg.eps, cfg.bis_cap)
    }
}

pub fn max_size(
    inst: &ConflictInstance,
    initial: &Packing,
    info: &GraphClassInfo,
    cfg: &MaxSizeConfig,
) -> Result<MaxSizeResult> {
    let report = validate_packing(inst, initial, false);
    if !report.feasible {
        return param(format!(
            "initial packing is infeasible: {}",
            report.violations[0].detail
        ));
    }
    if !info.is_supported() {
        return capability(
            "maximization needs a BIS oracle; the conflict graph has no supported class",
        );
    }
    let unpacked: Vec<ItemId> = inst
        .items()
        .iter()
        .copied()
        .filter(|v| report.covered_items.binary_search(v).is_err())
        .collect();
    let beta = oracle_ratio(info, cfg);
    let (augmented, strategy) = match cfg.strategy {
        MaxSizeStrategy::GreedySequential => {
            (greedy(inst, initial, info, &unpacked, cfg)?, cfg.strategy)
        }
        MaxSizeStrategy::ConfigLp => config_lp(inst, initial, info, &unpacked, cfg)?,
    };
    let guarantee = match strategy {
        MaxSizeStrategy::GreedySequential => beta / (1.0 + beta),
        MaxSizeStrategy::ConfigLp => (1.0 - (-1.0f64).exp()) * beta,
    };
    let mut added_items: Vec<ItemId> = augmented
        .bins
        .iter()
        .zip(&initial.bins)
        .flat_map(|(a, b)| a[b.len()..].iter().copied())
        .collect();
    added_items.sort_unstable();
    let added_size = inst.size_of(&added_items);
    Ok(MaxSizeResult {
        augmented,
        added_items,
        added_size,
        strategy,
        guarantee,
    })
}

fn greedy(
    inst: &ConflictInstance,
    initial: &Packing,
    info: &GraphClassInfo,
    unpacked: &[ItemId],
    cfg: &MaxSizeConfig,
) -> Result<Packing> {
    let mut left = unpacked.to_vec();
    let mut out = initial.clone();
    for bin in &mut out.bins {
        if left.is_empty() {
            break;
        }
        let problem = bin_subproblem(inst, info, bin, &left);
        let chosen = solve_bin(&problem, cfg)?;
        left.retain(|v| chosen.binary_search(v).is_err());
        bin.extend(chosen);
    }
    Ok(out)
}

/// Exact pricing is used when a bin has at most this many candidate items.
const EXACT_PRICING_LIMIT: usize = 24;

fn config_lp(
    inst: &ConflictInstance,
    initial: &Packing,
    info: &GraphClassInfo,
    unpacked: &[ItemId],
    cfg: &MaxSizeConfig,
) -> Result<(Packing, MaxSizeStrategy)> {
    let t = initial.bin_count();
    let fallback = greedy(inst, initial, info, unpacked, cfg)?;
    if t == 0 || unpacked.is_empty() {
        return Ok((fallback, MaxSizeStrategy::ConfigLp));
    }
    let unit = inst.unit() as f64;
    let mut row_of = vec![usize::MAX; inst.id_bound()];
    for (k, &v) in unpacked.iter().enumerate() {
        row_of[v] = t + k;
    }
    let candidates: Vec<Vec<ItemId>> = initial
        .bins
        .iter()
        .map(|b| {
            unpacked
                .iter()
                .copied()
                .filter(|&v| inst.compatible_with(v, b))
                .collect()
        })
        .collect();
    let free: Vec<u64> = initial
        .bins
        .iter()
        .map(|b| inst.unit() - inst.size_of(b))
        .collect();

    let mut columns: Vec<(usize, Vec<ItemId>)> = Vec::new();
    for (j, (a, b)) in fallback.bins.iter().zip(&initial.bins).enumerate() {
        if a.len() > b.len() {
            columns.push((j, a[b.len()..].to_vec()));
        }
    }
    let cap = 10 * (t + unpacked.len());
    let mut iterations = 0;
    let solution = loop {
        let mut lp = LinearProgram::new(columns.len());
        let mut rows = vec![vec![0.0; columns.len()]; t + unpacked.len()];
        for (c, (j, set)) in columns.iter().enumerate() {
            lp.objective[c] = inst.size_of(set) as f64 / unit;
            rows[*j][c] = 1.0;
            for &v in set {
                rows[row_of[v]][c] = 1.0;
            }
        }
        for r in rows {
            lp.add_row(r, 1.0);
        }
        let sol = lp::solve(&lp, 50 * (lp.rows.len() + lp.num_vars()) + 100)?;
        iterations += 1;
        if iterations > cap {
            log::warn!("configuration LP hit its iteration cap; using the greedy strategy");
            let mut p = fallback;
            p.add_flag("config-lp-fallback");
            return Ok((p, MaxSizeStrategy::GreedySequential));
        }
        let mut added = false;
        for j in 0..t {
            let profit: Vec<f64> = candidates[j]
                .iter()
                .map(|&v| inst.size(v) as f64 / unit - sol.duals[row_of[v]])
                .collect();
            let set = price(inst, &candidates[j], &profit, free[j]);
            let value: f64 = set
                .iter()
                .map(|v| profit[candidates[j].binary_search(v).expect("candidate")])
                .sum();
            if value - sol.duals[j] > lp::TOL && !columns.iter().any(|(b, s)| *b == j && *s == set)
            {
                columns.push((j, set));
                added = true;
            }
        }
        if !added {
            break sol;
        }
    };

    let mut rng = Rng::new(cfg.seed);
    let mut taken = vec![false; inst.id_bound()];
    let mut out = initial.clone();
    for (j, bin) in out.bins.iter_mut().enumerate() {
        let u = rng.unit();
        let mut acc = 0.0;
        for (c, (b, set)) in columns.iter().enumerate() {
            if *b != j {
                continue;
            }
            acc += solution.x[c];
            if u < acc {
                for &v in set {
                    if !taken[v] {
                        taken[v] = true;
                        bin.push(v);
                    }
                }
                break;
            }
        }
    }
    Ok((out, MaxSizeStrategy::ConfigLp))
}

/// Independent set of `cand` within `budget` maximising the total of
/// `profit`. Exact branch and bound for small candidate sets, otherwise
/// greedy by profit density.
fn price(inst: &ConflictInstance, cand: &[ItemId], profit: &[f64], budget: u64) -> Vec<ItemId> {
    let mut idx: Vec<usize> = (0..cand.len()).filter(|&k| profit[k] > lp::TOL).collect();
    let density = |k: usize| profit[k] / inst.size(cand[k]).max(1) as f64;
    idx.sort_by(|&a, &b| density(b).total_cmp(&density(a)).then(a.cmp(&b)));
    let mut chosen: Vec<ItemId> = Vec::new();
    if idx.len() > EXACT_PRICING_LIMIT {
        let mut load = 0;
        for &k in &idx {
            let v = cand[k];
            if load + inst.size(v) <= budget && inst.compatible_with(v, &chosen) {
                load += inst.size(v);
                chosen.push(v);
            }
        }
        chosen.sort_unstable();
        return chosen;
    }
    struct Ctx<'a> {
        inst: &'a ConflictInstance,
        cand: &'a [ItemId],
        profit: &'a [f64],
        idx: Vec<usize>,
        budget: u64,
        cur: Vec<ItemId>,
        best: Vec<ItemId>,
        best_p: f64,
    }
    fn bound(c: &Ctx, i: usize, load: u64) -> f64 {
        // Fractional knapsack relaxation over the remaining items.
        let mut room = (c.budget - load) as f64;
        let mut b = 0.0;
        for &k in &c.idx[i..] {
            let s = c.inst.size(c.cand[k]) as f64;
            if s <= room {
                room -= s;
                b += c.profit[k];
            } else {
                b += c.profit[k] * room / s;
                break;
            }
        }
        b
    }
    fn go(c: &mut Ctx, i: usize, load: u64, p: f64) {
        if p > c.best_p + 1e-12 {
            c.best_p = p;
            c.best = c.cur.clone();
        }
        if i == c.idx.len() || p + bound(c, i, load) <= c.best_p + 1e-12 {
            return;
        }
        let k = c.idx[i];
        let v = c.cand[k];
        let s = c.inst.size(v);
        if load + s <= c.budget && c.inst.compatible_with(v, &c.cur) {
            c.cur.push(v);
            go(c, i + 1, load + s, p + c.profit[k]);
            c.cur.pop();
        }
        go(c, i + 1, load, p);
    }
    let mut ctx = Ctx {
        inst,
        cand,
        profit,
        idx,
        budget,
        cur: Vec::new(),
        best: Vec::new(),
        best_p: 0.0,
    };
    go(&mut ctx, 0, 0, 0.0);
    chosen = ctx.best;
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::recognize;
    use num_rational::Ratio;

    fn inst(tenths: &[u64], edges: &[(usize, usize)]) -> ConflictInstance {
        let s: Vec<_> = tenths.iter().map(|&t| Ratio::new(t, 10)).collect();
        ConflictInstance::new(&s, edges).unwrap()
    }

    fn both() -> [MaxSizeConfig; 2] {
        [
            MaxSizeConfig::default(),
            MaxSizeConfig {
                strategy: MaxSizeStrategy::ConfigLp,
                ..Default::default()
            },
        ]
    }

    #[test]
    fn one_empty_bin() {
        let i = inst(&[7, 6, 3], &[]);
        for cfg in both() {
            let r = max_size(&i, &Packing::new(vec![vec![]], "t"), &recognize(&i), &cfg).unwrap();
            assert_eq!(r.added_size, 10);
            assert_eq!(r.added_items, vec![0, 2]);
        }
    }

    #[test]
    fn nothing_unpacked() {
        let i = inst(&[7, 3], &[]);
        let p = Packing::new(vec![vec![0, 1]], "t");
        for cfg in both() {
            let r = max_size(&i, &p, &recognize(&i), &cfg).unwrap();
            assert_eq!(r.added_size, 0);
            assert_eq!(r.augmented.bins, p.bins);
        }
    }

    #[test]
    fn conflict_steers_item() {
        let i = inst(&[6, 6, 3], &[(2, 0)]);
        let p = Packing::new(vec![vec![0], vec![1]], "t");
        for cfg in both() {
            let r = max_size(&i, &p, &recognize(&i), &cfg).unwrap();
            assert_eq!(r.augmented.bins, vec![vec![0], vec![1, 2]]);
        }
    }

    #[test]
    fn subproblem_structure() {
        let i = inst(&[6, 2, 3, 1], &[(0, 1)]);
        let info = recognize(&i);
        let p = bin_subproblem(&i, &info, &[0], &[1, 2, 3]);
        assert_eq!(p.graph.items(), &[2, 3]);
        assert_eq!(p.budget, i.unit() - i.size(0));
    }

    #[test]
    fn rejects_infeasible_initial() {
        let i = inst(&[6, 6], &[]);
        let p = Packing::new(vec![vec![0, 1]], "t");
        assert!(matches!(
            max_size(&i, &p, &recognize(&i), &MaxSizeConfig::default()),
            Err(crate::Error::Parameter(_))
        ));
    }
}
