//! Top-level packing algorithms for bin packing with conflicts.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{capability, param, Error, Result};
use crate::graphs::{maximum_matching_general, minimum_coloring, recognize, GraphClassInfo};
use crate::lp::{self, LinearProgram};
use crate::maxsize::{max_size, MaxSizeConfig, MaxSizeStrategy};
use crate::model::{
    concat_packings, is_large, is_medium, is_small, is_tiny, validate_packing, ConflictInstance,
    ItemId, Packing,
};
use crate::oracle;
use crate::packing_classic::{asymptotic_bp_items, class_sums, ffd_items};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AssignConfig {
    /// Items of size at most this are tiny.
    pub tiny_eps: Ratio<u64>,
    /// Largest number of bins of an enumerated big-item packing.
    pub max_bins: usize,
    /// Enumeration is skipped above this many big items.
    pub max_big_items: usize,
}

impl Default for AssignConfig {
    fn default() -> Self {
        AssignConfig {
            tiny_eps: Ratio::new(1, 10_000),
            max_bins: 6,
            max_big_items: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Accuracy of the BIS PTAS inside the maximization step.
    pub eps: f64,
    /// Cap on ⌈1/eps⌉ for the PTAS enumeration.
    pub bis_cap: usize,
    /// Accuracy of the split-graph FPTAS.
    pub split_eps: f64,
    /// Classic bin packing runs exactly up to this many items.
    pub exact_threshold: usize,
    pub maxsize_strategy: MaxSizeStrategy,
    pub seed: u64,
    pub assign: AssignConfig,
    /// `abs_bpb` solves exactly up to this many items.
    pub exact_fallback_n: usize,
    /// Node budget of the OPT ≤ 3 search in `abs_bpb` on larger instances.
    pub small_opt_nodes: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1.0 / 6.0,
            bis_cap: crate::bis::DEFAULT_ENUMERATION_CAP,
            split_eps: 0.05,
            exact_threshold: crate::packing_classic::DEFAULT_EXACT_THRESHOLD,
            maxsize_strategy: MaxSizeStrategy::GreedySequential,
            seed: 0,
            assign: AssignConfig::default(),
            exact_fallback_n: 16,
            small_opt_nodes: 200_000,
        }
    }
}

impl SolverConfig {
    pub fn maxsize(&self) -> MaxSizeConfig {
        MaxSizeConfig {
            strategy: self.maxsize_strategy,
            eps: self.eps,
            bis_cap: self.bis_cap,
            split_eps: self.split_eps,
            seed: self.seed,
        }
    }
}

/// Algorithms selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    ColorSets,
    MaxSolve,
    MatchingPack,
    ApproxBpc,
    SplitApprox,
    AbsBpb,
    MultipartitePack,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::ColorSets,
        Algorithm::MaxSolve,
        Algorithm::MatchingPack,
        Algorithm::ApproxBpc,
        Algorithm::SplitApprox,
        Algorithm::AbsBpb,
        Algorithm::MultipartitePack,
        Algorithm::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ColorSets => "color_sets",
            Algorithm::MaxSolve => "max_solve",
            Algorithm::MatchingPack => "matching_pack",
            Algorithm::ApproxBpc => "approx_bpc",
            Algorithm::SplitApprox => "split_approx",
            Algorithm::AbsBpb => "abs_bpb",
            Algorithm::MultipartitePack => "multipartite_pack",
            Algorithm::Exact => "exact",
        }
    }

    /// Whether the algorithm accepts a graph with these certificates.
    pub fn applicable(self, info: &GraphClassInfo) -> bool {
        match self {
            Algorithm::SplitApprox => info.is_split(),
            Algorithm::AbsBpb => info.is_bipartite(),
            Algorithm::MultipartitePack => info.is_complete_multipartite(),
            Algorithm::Exact => true,
            _ => info.is_supported(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        let key = match key.as_str() {
            "matching" => "matching_pack",
            "multipartite" => "multipartite_pack",
            other => other,
        };
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::Parameter(format!("unknown algorithm '{s}'")))
    }
}

/// Runs `algo` on `inst` with freshly recognised certificates.
pub fn solve(inst: &ConflictInstance, algo: Algorithm, cfg: &SolverConfig) -> Result<Packing> {
    let info = recognize(inst);
    run(inst, &info, algo, cfg)
}

pub fn run(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    algo: Algorithm,
    cfg: &SolverConfig,
) -> Result<Packing> {
    let p = match algo {
        Algorithm::ColorSets => color_sets(inst, info, cfg),
        Algorithm::MaxSolve => max_solve(inst, info, cfg),
        Algorithm::MatchingPack => matching_pack(inst, info, cfg),
        Algorithm::ApproxBpc => approx_bpc(inst, info, cfg),
        Algorithm::SplitApprox => split_approx(inst, info, cfg),
        Algorithm::AbsBpb => abs_bpb(inst, info, cfg),
        Algorithm::MultipartitePack => multipartite_pack(inst, info, cfg),
        Algorithm::Exact => {
            oracle::opt_bpc_exact(inst, oracle::DEFAULT_EXACT_LIMIT).map(|s| s.packing)
        }
    }?;
    debug_assert!(
        validate_packing(inst, &p, true).feasible,
        "{algo} returned an invalid packing"
    );
    Ok(p.with_source(algo.name()))
}

/// Packs each colour class of a minimum colouring on its own, with the better
/// of FFD and the exact-for-small classic packer, and concatenates.
pub fn color_sets(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<Packing> {
    let classes = minimum_coloring(inst, info)?;
    let mut out = Packing::empty("color_sets");
    for class in &classes {
        let a = ffd_items(inst, class);
        let b = asymptotic_bp_items(inst, class, cfg.exact_threshold);
        let best = if b.bin_count() < a.bin_count() { b } else { a };
        out = concat_packings(&out, &best);
    }
    debug_assert!(color_sets_bound_holds(inst, classes.len(), out.bin_count()));
    Ok(out.with_source("color_sets"))
}

/// `#B ≤ χ + |L| + (3/2)s(M) + (4/3)s(S)`, exactly.
pub fn color_sets_bound_holds(inst: &ConflictInstance, chi: usize, bins: usize) -> bool {
    let d = inst.unit() as u128;
    let (l, m, s) = class_sums(inst, inst.items());
    6 * d * bins as u128 <= 6 * d * (chi as u128 + l) + 9 * m + 8 * s
}

/// `#B ≤ OPT + χ + (4/3)s(S)`, exactly.
pub fn matching_bound_holds(inst: &ConflictInstance, opt: usize, chi: usize, bins: usize) -> bool {
    let d = inst.unit() as u128;
    let (_, _, s) = class_sums(inst, inst.items());
    3 * d * bins as u128 <= 3 * d * (opt + chi) as u128 + 4 * s
}

/// Large items in singleton bins, grown by the maximization step; whatever is
/// left goes to [`color_sets`].
pub fn max_solve(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<Packing> {
    let large: Vec<Vec<ItemId>> = inst
        .items()
        .iter()
        .filter(|&&v| is_large(inst, v))
        .map(|&v| vec![v])
        .collect();
    let grown = max_size(
        inst,
        &Packing::new(large, "max_solve"),
        info,
        &cfg.maxsize(),
    )?;
    let rest = inst.remove(grown.augmented.items());
    let tail = color_sets(&rest, &info.restrict(&rest), cfg)?;
    Ok(concat_packings(&grown.augmented, &tail).with_source("max_solve"))
}

/// Pairs large and medium items by a maximum matching of the auxiliary graph
/// (compatible pairs that fit together), then packs small items with
/// [`color_sets`].
pub fn matching_pack(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<Packing> {
    if !info.is_supported() {
        return capability("matching packer needs a colouring certificate");
    }
    let lm: Vec<ItemId> = inst
        .items()
        .iter()
        .copied()
        .filter(|&v| !is_small(inst, v))
        .collect();
    let mut edges = Vec::new();
    for (a, &u) in lm.iter().enumerate() {
        for (b, &v) in lm.iter().enumerate().skip(a + 1) {
            if inst.size(u) + inst.size(v) <= inst.unit() && !inst.conflicts(u, v) {
                edges.push((a, b));
            }
        }
    }
    let matching = maximum_matching_general(lm.len(), &edges);
    let mut matched = vec![false; lm.len()];
    let mut bins: Vec<Vec<ItemId>> = Vec::new();
    for &(a, b) in &matching {
        matched[a] = true;
        matched[b] = true;
        bins.push(vec![lm[a], lm[b]]);
    }
    for (a, &v) in lm.iter().enumerate() {
        if !matched[a] {
            bins.push(vec![v]);
        }
    }
    let smalls = inst.remove(lm.iter().copied());
    let tail = color_sets(&smalls, &info.restrict(&smalls), cfg)?;
    Ok(concat_packings(&Packing::new(bins, "matching_pack"), &tail).with_source("matching_pack"))
}

/// Best of [`color_sets`], [`max_solve`] and [`matching_pack`]; ties go to the
/// earlier one.
pub fn approx_bpc(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<Packing> {
    let candidates = [
        color_sets(inst, info, cfg)?,
        max_solve(inst, info, cfg)?,
        matching_pack(inst, info, cfg)?,
    ];
    let best = candidates
        .into_iter()
        .reduce(|a, b| if b.bin_count() < a.bin_count() { b } else { a })
        .expect("three candidates");
    Ok(best.with_source("approx_bpc"))
}

/// Split-graph algorithm: clique items in singleton bins plus α empty bins,
/// grown by the maximization step with the split FPTAS, remaining
/// (independent) items by FFD; the best α wins. Empty bins are dropped from
/// the result.
pub fn split_approx(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<Packing> {
    let Some(split) = &info.split else {
        return capability("split_approx needs a split partition of the conflict graph");
    };
    if inst.is_empty() {
        return Ok(Packing::empty("split_approx"));
    }
    let total = inst.total_size();
    if inst.edge_count() == 0 && total <= inst.unit() {
        return Ok(Packing::new(vec![inst.items().to_vec()], "split_approx"));
    }
    let max_alpha = (2 * total).div_ceil(inst.unit()) as usize + 1;
    let mut best: Option<Packing> = None;
    for alpha in 0..=max_alpha {
        let mut bins: Vec<Vec<ItemId>> = split.clique.iter().map(|&v| vec![v]).collect();
        bins.extend(std::iter::repeat_n(Vec::new(), alpha));
        let grown = max_size(
            inst,
            &Packing::new(bins, "split_approx"),
            info,
            &cfg.maxsize(),
        )?;
        let rest: Vec<ItemId> = {
            let packed = grown.augmented.items();
            inst.items()
                .iter()
                .copied()
                .filter(|v| packed.binary_search(v).is_err())
                .collect()
        };
        let cand = concat_packings(&grown.augmented, &ffd_items(inst, &rest)).without_empty_bins();
        if best
            .as_ref()
            .is_none_or(|b| cand.bin_count() < b.bin_count())
        {
            best = Some(cand);
        }
    }
    Ok(best
        .expect("alpha range is non-empty")
        .with_source("split_approx"))
}

/// One part after the other, each packed with the better of FFD and the
/// exact-for-small classic packer.
pub fn multipartite_pack(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<Packing> {
    let Some(parts) = &info.multipartite else {
        return capability("multipartite_pack needs the parts of a complete multipartite graph");
    };
    let mut out = Packing::empty("multipartite_pack");
    for part in parts {
        let a = ffd_items(inst, part);
        let b = asymptotic_bp_items(inst, part, cfg.exact_threshold);
        let best = if b.bin_count() < a.bin_count() { b } else { a };
        out = concat_packings(&out, &best);
    }
    Ok(out.with_source("multipartite_pack"))
}

/// The assignment LP of tiny items `w` into the bins of a big-item packing:
/// maximise Σ x_{i,v} subject to the residual capacity of every bin,
/// Σ_i x_{i,v} ≤ 1, and x_{i,v} = 0 when v conflicts with bin i.
#[derive(Clone, Debug)]
pub struct AssignmentLp {
    pub bins: Vec<Vec<ItemId>>,
    pub w: Vec<ItemId>,
    /// Free capacity of each bin, in units.
    pub residual: Vec<u64>,
    /// Q_i: items of `w` compatible with bin i.
    pub eligible: Vec<Vec<ItemId>>,
    /// Variable k is x_{vars[k].0, vars[k].1}.
    pub vars: Vec<(usize, ItemId)>,
    pub lp: LinearProgram,
}

#[derive(Clone, Debug)]
pub struct AssignmentSolution {
    /// Value of each variable of [`AssignmentLp::vars`].
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Vec<usize>,
    pub fractional_items: Vec<ItemId>,
    pub integral_items: Vec<ItemId>,
}

const INTEGRAL_TOL: f64 = 1e-7;

pub fn build_assignment_lp(
    inst: &ConflictInstance,
    big: &Packing,
    w: &[ItemId],
) -> Result<AssignmentLp> {
    let packed = big.items();
    if let Some(v) = w.iter().find(|v| packed.binary_search(v).is_ok()) {
        return param(format!("item {v} is both in W and in the big-item packing"));
    }
    if let Some(v) = w.iter().find(|&&v| !inst.contains(v)) {
        return param(format!("item {v} of W is not part of the instance"));
    }
    let unit = inst.unit() as f64;
    let residual: Vec<u64> = big
        .bins
        .iter()
        .map(|b| inst.unit().saturating_sub(inst.size_of(b)))
        .collect();
    let eligible: Vec<Vec<ItemId>> = big
        .bins
        .iter()
        .map(|b| {
            w.iter()
                .copied()
                .filter(|&v| inst.compatible_with(v, b))
                .collect()
        })
        .collect();
    let vars: Vec<(usize, ItemId)> = eligible
        .iter()
        .enumerate()
        .flat_map(|(i, q)| q.iter().map(move |&v| (i, v)))
        .collect();
    let mut lp = LinearProgram::new(vars.len());
    lp.objective = vec![1.0; vars.len()];
    lp.upper = vec![1.0; vars.len()];
    for (i, &r) in residual.iter().enumerate() {
        let row = vars
            .iter()
            .map(|&(b, v)| {
                if b == i {
                    inst.size(v) as f64 / unit
                } else {
                    0.0
                }
            })
            .collect();
        lp.add_row(row, r as f64 / unit);
    }
    for &v in w {
        let row = vars
            .iter()
            .map(|&(_, u)| if u == v { 1.0 } else { 0.0 })
            .collect();
        lp.add_row(row, 1.0);
    }
    Ok(AssignmentLp {
        bins: big.bins.clone(),
        w: w.to_vec(),
        residual,
        eligible,
        vars,
        lp,
    })
}

impl AssignmentLp {
    /// A basic optimal solution.
    pub fn solve(&self) -> Result<AssignmentSolution> {
        let iters = 50 * (self.lp.rows.len() + self.lp.num_vars()) + 100;
        let sol = lp::solve(&self.lp, iters)?;
        let mut fractional: Vec<ItemId> = self
            .vars
            .iter()
            .zip(&sol.x)
            .filter(|(_, &x)| x > INTEGRAL_TOL && x < 1.0 - INTEGRAL_TOL)
            .map(|(&(_, v), _)| v)
            .collect();
        fractional.sort_unstable();
        fractional.dedup();
        let integral = self
            .w
            .iter()
            .copied()
            .filter(|v| fractional.binary_search(v).is_err())
            .collect();
        Ok(AssignmentSolution {
            x: sol.x,
            objective: sol.objective,
            basis: sol.basis,
            fractional_items: fractional,
            integral_items: integral,
        })
    }
}

/// Solves the assignment LP to a basic solution, keeps every x = 1
/// assignment and then places fractional items first-fit where they still
/// fit. The bin count is unchanged.
pub fn round_assignment(
    inst: &ConflictInstance,
    big: &Packing,
    w: &[ItemId],
) -> Result<(Packing, AssignmentSolution)> {
    let alp = build_assignment_lp(inst, big, w)?;
    let sol = alp.solve()?;
    let mut bins = big.bins.clone();
    let mut loads: Vec<u64> = bins.iter().map(|b| inst.size_of(b)).collect();
    for (&(i, v), &x) in alp.vars.iter().zip(&sol.x) {
        if x >= 1.0 - INTEGRAL_TOL {
            bins[i].push(v);
            loads[i] += inst.size(v);
        }
    }
    for &v in &sol.fractional_items {
        let slot = (0..bins.len()).find(|&i| {
            loads[i] + inst.size(v) <= inst.unit() && alp.eligible[i].binary_search(&v).is_ok()
        });
        if let Some(i) = slot {
            bins[i].push(v);
            loads[i] += inst.size(v);
        }
    }
    Ok((Packing::new(bins, "round_assignment"), sol))
}

/// Enumerates packings of the big items (size above the tiny threshold),
/// assigns the tiny items of `w` by LP rounding and packs the rest with
/// [`color_sets`]; starts from, and never returns worse than, [`color_sets`]
/// on the whole instance.
pub fn assign(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    w: &[ItemId],
    cfg: &SolverConfig,
) -> Result<Packing> {
    let mut best = color_sets(inst, info, cfg)?;
    let big: Vec<ItemId> = crate::packing_classic::decreasing_order(
        inst,
        &inst
            .items()
            .iter()
            .copied()
            .filter(|&v| !is_tiny(inst, v, cfg.assign.tiny_eps))
            .collect::<Vec<_>>(),
    );
    if big.len() > cfg.assign.max_big_items {
        best.add_flag("enumeration-skipped");
        return Ok(best.with_source("assign"));
    }
    let mut search = BigPackings {
        inst,
        info,
        w,
        cfg,
        big: &big,
        best,
        error: None,
    };
    let mut bins = Vec::new();
    let mut loads = Vec::new();
    search.go(0, &mut bins, &mut loads);
    if let Some(e) = search.error {
        return Err(e);
    }
    Ok(search.best.with_source("assign"))
}

struct BigPackings<'a> {
    inst: &'a ConflictInstance,
    info: &'a GraphClassInfo,
    w: &'a [ItemId],
    cfg: &'a SolverConfig,
    big: &'a [ItemId],
    best: Packing,
    error: Option<Error>,
}

impl BigPackings<'_> {
    fn go(&mut self, i: usize, bins: &mut Vec<Vec<ItemId>>, loads: &mut Vec<u64>) {
        if self.error.is_some() || bins.len() >= self.best.bin_count() {
            return;
        }
        if i == self.big.len() {
            let spare = if self.w.is_empty() {
                0
            } else {
                self.cfg.assign.max_bins - bins.len()
            };
            for extra in 0..=spare {
                if bins.len() + extra >= self.best.bin_count() {
                    break;
                }
                let mut a = bins.clone();
                a.extend(std::iter::repeat_n(Vec::new(), extra));
                if let Err(e) = self.evaluate(Packing::new(a, "assign")) {
                    self.error = Some(e);
                    return;
                }
            }
            return;
        }
        let v = self.big[i];
        let s = self.inst.size(v);
        for b in 0..bins.len() {
            if loads[b] + s <= self.inst.unit() && self.inst.compatible_with(v, &bins[b]) {
                bins[b].push(v);
                loads[b] += s;
                self.go(i + 1, bins, loads);
                bins[b].pop();
                loads[b] -= s;
            }
        }
        if bins.len() < self.cfg.assign.max_bins {
            bins.push(vec![v]);
            loads.push(s);
            self.go(i + 1, bins, loads);
            bins.pop();
            loads.pop();
        }
    }

    fn evaluate(&mut self, a: Packing) -> Result<()> {
        let (c, _) = round_assignment(self.inst, &a, self.w)?;
        let rest = self.inst.remove(c.items());
        let tail = color_sets(&rest, &self.info.restrict(&rest), self.cfg)?;
        let cand = concat_packings(&c, &tail).without_empty_bins();
        if cand.bin_count() < self.best.bin_count() {
            self.best = cand;
        }
        Ok(())
    }
}

/// Bipartite algorithm: best of [`color_sets`], an exact packing for small
/// instances (or an OPT ≤ 3 search on larger ones), and [`assign`] on the tiny
/// items of either side of the bipartition.
pub fn abs_bpb(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<Packing> {
    let Some((x, y)) = &info.bipartition else {
        return capability("abs_bpb needs a bipartition of the conflict graph");
    };
    let mut flags = Vec::new();
    let mut candidates = vec![color_sets(inst, info, cfg)?];
    if inst.len() <= cfg.exact_fallback_n {
        candidates.push(oracle::opt_bpc_exact(inst, cfg.exact_fallback_n)?.packing);
    } else {
        match oracle::pack_within(inst, 3, cfg.small_opt_nodes)? {
            Some(p) => candidates.push(p),
            None => flags.push("small-opt-search-inconclusive"),
        }
    }
    for side in [x, y] {
        let w: Vec<ItemId> = side
            .iter()
            .copied()
            .filter(|&v| is_tiny(inst, v, cfg.assign.tiny_eps))
            .collect();
        candidates.push(assign(inst, info, &w, cfg)?);
    }
    let mut best = candidates
        .into_iter()
        .reduce(|a, b| if b.bin_count() < a.bin_count() { b } else { a })
        .expect("non-empty");
    for f in flags {
        best.add_flag(f);
    }
    Ok(best.with_source("abs_bpb"))
}

/// Large, medium and small item counts; convenience for reports.
pub fn class_counts(inst: &ConflictInstance) -> (usize, usize, usize) {
    let items = inst.items();
    (
        items.iter().filter(|&&v| is_large(inst, v)).count(),
        items.iter().filter(|&&v| is_medium(inst, v)).count(),
        items.iter().filter(|&&v| is_small(inst, v)).count(),
    )
}
