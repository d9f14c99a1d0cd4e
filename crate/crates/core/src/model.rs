//! Instances, packings and the packing algebra (concatenation, slot-wise
//! union, restriction to an item subset).
//!
//! Sizes are exact. Every instance fixes a common denominator `unit` for all of
//! its item sizes and stores each size as an integer numerator, so a bin of
//! items fits iff the sum of numerators is at most `unit`. All threshold tests
//! (1/2, 1/3, tiny-item cut-offs) are integer comparisons.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Dense item identifier. Restricted instances keep the identifiers of the
/// instance they were cut from.
pub type ItemId = usize;

/// Largest admissible common denominator of an instance's sizes.
pub const MAX_UNIT: u64 = 1 << 40;

/// Conflict-graph classes the solvers know about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphClass {
    Bipartite,
    Split,
    Cluster,
    CompleteMultipartite,
    Chordal,
    Edgeless,
}

impl GraphClass {
    pub const ALL: [GraphClass; 6] = [
        GraphClass::Bipartite,
        GraphClass::Split,
        GraphClass::Cluster,
        GraphClass::CompleteMultipartite,
        GraphClass::Chordal,
        GraphClass::Edgeless,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphClass::Bipartite => "bipartite",
            GraphClass::Split => "split",
            GraphClass::Cluster => "cluster",
            GraphClass::CompleteMultipartite => "complete-multipartite",
            GraphClass::Chordal => "chordal",
            GraphClass::Edgeless => "edgeless",
        }
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GraphClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GraphClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown graph class '{s}'")))
    }
}

#[derive(Debug)]
struct Universe {
    unit: u64,
    sizes: Vec<u64>,
    adj: Vec<Vec<ItemId>>,
    labels: Vec<String>,
}

/// A bin packing instance with a conflict graph.
///
/// Cloning is cheap: sizes and the full conflict graph are shared between an
/// instance and every restriction derived from it.
#[derive(Clone, Debug)]
pub struct ConflictInstance {
    universe: Arc<Universe>,
    items: Vec<ItemId>,
    member: Vec<bool>,
    class_hint: Option<GraphClass>,
}

impl ConflictInstance {
    /// Builds an instance from exact fractional sizes. Item `i` gets id `i`.
    pub fn new(sizes: &[Ratio<u64>], edges: &[(ItemId, ItemId)]) -> Result<Self> {
        let labels = (0..sizes.len()).map(|i| i.to_string()).collect();
        Self::with_labels(sizes, edges, labels)
    }

    pub fn with_labels(
        sizes: &[Ratio<u64>],
        edges: &[(ItemId, ItemId)],
        labels: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != sizes.len() {
            return param("label count differs from item count");
        }
        let mut unit = 1u64;
        for (i, s) in sizes.iter().enumerate() {
            if *s.denom() == 0 {
                return param(format!("item {i}: zero denominator"));
            }
            if s > &Ratio::from_integer(1) {
                return param(format!("item {i}: size {s} exceeds 1"));
            }
            unit = unit.lcm(s.denom());
            if unit > MAX_UNIT {
                return param(format!(
                    "common denominator of the sizes exceeds {MAX_UNIT}; use coarser fractions"
                ));
            }
        }
        let units: Vec<u64> = sizes
            .iter()
            .map(|s| s.numer() * (unit / s.denom()))
            .collect();
        Self::build(unit, units, edges, labels)
    }

    /// Builds an instance whose sizes are given as numerators over `unit`.
    pub fn from_units(unit: u64, sizes: Vec<u64>, edges: &[(ItemId, ItemId)]) -> Result<Self> {
        let labels = (0..sizes.len()).map(|i| i.to_string()).collect();
        Self::build(unit, sizes, edges, labels)
    }

    fn build(
        unit: u64,
        sizes: Vec<u64>,
        edges: &[(ItemId, ItemId)],
        labels: Vec<String>,
    ) -> Result<Self> {
        if unit == 0 || unit > MAX_UNIT {
            return param(format!("unit must lie in 1..={MAX_UNIT}"));
        }
        if let Some((i, s)) = sizes.iter().enumerate().find(|(_, &s)| s > unit) {
            return param(format!("item {i}: size {s}/{unit} exceeds 1"));
        }
        let n = sizes.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return param(format!("edge ({u}, {v}) references an unknown item"));
            }
            if u == v {
                return param(format!("self-loop on item {u}"));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return param(format!("duplicate edge at item {v}"));
            }
        }
        Ok(ConflictInstance {
            universe: Arc::new(Universe {
                unit,
                sizes,
                adj,
                labels,
            }),
            items: (0..n).collect(),
            member: vec![true; n],
            class_hint: None,
        })
    }

    pub fn with_class_hint(mut self, hint: Option<GraphClass>) -> Self {
        self.class_hint = hint;
        self
    }

    pub fn class_hint(&self) -> Option<GraphClass> {
        self.class_hint
    }

    /// Items of this instance in ascending id order.
    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Common denominator of all sizes; a bin holds at most `unit` size units.
    pub fn unit(&self) -> u64 {
        self.universe.unit
    }

    /// Number of ids in the underlying id space (ids of the root instance).
    pub fn id_bound(&self) -> usize {
        self.universe.sizes.len()
    }

    pub fn contains(&self, v: ItemId) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    /// Size numerator of `v` over [`unit`](Self::unit).
    pub fn size(&self, v: ItemId) -> u64 {
        self.universe.sizes[v]
    }

    pub fn size_ratio(&self, v: ItemId) -> Ratio<u64> {
        Ratio::new(self.size(v), self.unit())
    }

    pub fn size_f64(&self, v: ItemId) -> f64 {
        self.size(v) as f64 / self.unit() as f64
    }

    pub fn label(&self, v: ItemId) -> &str {
        &self.universe.labels[v]
    }

    /// Total size, in units, of `items`.
    pub fn size_of<'a>(&self, items: impl IntoIterator<Item = &'a ItemId>) -> u64 {
        items.into_iter().map(|&v| self.size(v)).sum()
    }

    /// s(I), in units.
    pub fn total_size(&self) -> u64 {
        self.size_of(&self.items)
    }

    /// Conflict test in the underlying graph; membership is not checked.
    pub fn conflicts(&self, u: ItemId, v: ItemId) -> bool {
        self.universe.adj[u].binary_search(&v).is_ok()
    }

    /// Neighbours of `v` inside this instance.
    pub fn neighbors(&self, v: ItemId) -> impl Iterator<Item = ItemId> + '_ {
        self.universe.adj[v]
            .iter()
            .copied()
            .filter(|&u| self.member[u])
    }

    pub fn degree(&self, v: ItemId) -> usize {
        self.neighbors(v).count()
    }

    /// Edges of the induced conflict graph as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(ItemId, ItemId)> {
        self.items
            .iter()
            .flat_map(|&u| {
                self.neighbors(u)
                    .filter(move |&v| u < v)
                    .map(move |v| (u, v))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.items.iter().map(|&v| self.degree(v)).sum::<usize>() / 2
    }

    /// Whether `set` is an independent set of the conflict graph.
    pub fn is_independent(&self, set: &[ItemId]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| !self.conflicts(u, v)))
    }

    /// Whether `v` has no conflict with any item of `set`.
    pub fn compatible_with(&self, v: ItemId, set: &[ItemId]) -> bool {
        set.iter().all(|&u| !self.conflicts(u, v))
    }

    /// `I ∩ T` or `I \ T`. Every id of `subset` must belong to the instance.
    pub fn restrict(&self, subset: &[ItemId], mode: RestrictMode) -> Result<Self> {
        if let Some(&v) = subset.iter().find(|&&v| !self.contains(v)) {
            return param(format!("item {v} is not part of the instance"));
        }
        Ok(match mode {
            RestrictMode::Intersect => self.keep(subset.iter().copied()),
            RestrictMode::Subtract => self.remove(subset.iter().copied()),
        })
    }

    /// Sub-instance on the members of `keep` (non-members are ignored).
    pub fn keep(&self, keep: impl IntoIterator<Item = ItemId>) -> Self {
        let mut member = vec![false; self.member.len()];
        for v in keep {
            if self.contains(v) {
                member[v] = true;
            }
        }
        self.with_member(member)
    }

    /// Sub-instance without the items of `remove`.
    pub fn remove(&self, remove: impl IntoIterator<Item = ItemId>) -> Self {
        let mut member = self.member.clone();
        for v in remove {
            if v < member.len() {
                member[v] = false;
            }
        }
        self.with_member(member)
    }

    fn with_member(&self, member: Vec<bool>) -> Self {
        let items = self.items.iter().copied().filter(|&v| member[v]).collect();
        ConflictInstance {
            universe: Arc::clone(&self.universe),
            items,
            member,
            class_hint: self.class_hint,
        }
    }

    /// Whether the items of `bin` fit in one bin.
    pub fn fits(&self, bin: &[ItemId]) -> bool {
        self.size_of(bin) <= self.unit()
    }
}

/// Restriction mode for [`ConflictInstance::restrict`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictMode {
    Intersect,
    Subtract,
}

/// Large / medium / small classification, plus tiny / big for a threshold ε.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ItemClasses {
    /// s > 1/2
    pub large: Vec<ItemId>,
    /// 1/3 < s ≤ 1/2
    pub medium: Vec<ItemId>,
    /// s ≤ 1/3
    pub small: Vec<ItemId>,
    /// s ≤ ε, present when ε was given
    pub tiny: Option<Vec<ItemId>>,
    pub big: Option<Vec<ItemId>>,
}

pub fn is_large(inst: &ConflictInstance, v: ItemId) -> bool {
    2 * inst.size(v) > inst.unit()
}

pub fn is_medium(inst: &ConflictInstance, v: ItemId) -> bool {
    3 * inst.size(v) > inst.unit() && 2 * inst.size(v) <= inst.unit()
}

pub fn is_small(inst: &ConflictInstance, v: ItemId) -> bool {
    3 * inst.size(v) <= inst.unit()
}

/// s(v) ≤ eps, exactly.
pub fn is_tiny(inst: &ConflictInstance, v: ItemId, eps: Ratio<u64>) -> bool {
    inst.size(v) as u128 * *eps.denom() as u128 <= *eps.numer() as u128 * inst.unit() as u128
}

pub fn classify_items(inst: &ConflictInstance, eps: Option<Ratio<u64>>) -> Result<ItemClasses> {
    if let Some(e) = eps {
        if e <= Ratio::from_integer(0) || e >= Ratio::new(1, 10) {
            return param(format!("eps must lie in (0, 0.1), got {e}"));
        }
    }
    let mut out = ItemClasses::default();
    for &v in inst.items() {
        if is_large(inst, v) {
            out.large.push(v);
        } else if is_medium(inst, v) {
            out.medium.push(v);
        } else {
            out.small.push(v);
        }
    }
    if let Some(e) = eps {
        let (tiny, big) = inst.items().iter().partition(|&&v| is_tiny(inst, v, e));
        out.tiny = Some(tiny);
        out.big = Some(big);
    }
    Ok(out)
}

/// An ordered list of bins. Bins may be empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    pub bins: Vec<Vec<ItemId>>,
    /// Tag of the algorithm that produced the packing.
    #[serde(default)]
    pub source: String,
    /// Fallbacks and degraded modes hit while producing the packing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl Packing {
    pub fn new(bins: Vec<Vec<ItemId>>, source: impl Into<String>) -> Self {
        Packing {
            bins,
            source: source.into(),
            flags: Vec::new(),
        }
    }

    pub fn empty(source: impl Into<String>) -> Self {
        Self::new(Vec::new(), source)
    }

    /// #B
    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    /// items(B), sorted.
    pub fn items(&self) -> Vec<ItemId> {
        let mut all: Vec<ItemId> = self.bins.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn add_flag(&mut self, flag: impl Into<String>) {
        let flag = flag.into();
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }

    pub fn without_empty_bins(mut self) -> Self {
        self.bins.retain(|b| !b.is_empty());
        self
    }

    /// Sorts items inside every bin; bin order is kept.
    pub fn normalized(mut self) -> Self {
        for b in &mut self.bins {
            b.sort_unstable();
        }
        self
    }

    fn merge_flags(&mut self, other: &Packing) {
        for f in &other.flags {
            self.add_flag(f.clone());
        }
    }
}

/// B ⊕ C: the bins of `b` followed by the bins of `c`.
pub fn concat_packings(b: &Packing, c: &Packing) -> Packing {
    let mut out = b.clone();
    out.bins.extend(c.bins.iter().cloned());
    out.merge_flags(c);
    out
}

/// B + C: slot-wise union. The result need not be a feasible packing.
pub fn union_packings(b: &Packing, c: &Packing) -> Result<Packing> {
    if b.bin_count() != c.bin_count() {
        return param(format!(
            "union needs equal bin counts, got {} and {}",
            b.bin_count(),
            c.bin_count()
        ));
    }
    let bins = b
        .bins
        .iter()
        .zip(&c.bins)
        .map(|(x, y)| x.iter().chain(y).copied().collect())
        .collect();
    let mut out = Packing::new(bins, b.source.clone());
    out.merge_flags(b);
    out.merge_flags(c);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Overflow,
    Conflict,
    DuplicateItem,
    UnknownItem,
    /// An instance item that no bin covers (only with `require_cover`).
    Uncovered,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Offending bin, absent for uncovered items.
    pub bin: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub covered_items: Vec<ItemId>,
}

/// Checks capacities, conflicts and item multiplicities of every bin. Never
/// fails; all problems are listed in the report.
pub fn validate_packing(
    inst: &ConflictInstance,
    packing: &Packing,
    require_cover: bool,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    for (bi, bin) in packing.bins.iter().enumerate() {
        let mut known = Vec::with_capacity(bin.len());
        for &v in bin {
            if !inst.contains(v) {
                violations.push(Violation {
                    bin: Some(bi),
                    kind: ViolationKind::UnknownItem,
                    detail: format!("item {v} is not part of the instance"),
                });
                continue;
            }
            if !seen.insert(v) {
                violations.push(Violation {
                    bin: Some(bi),
                    kind: ViolationKind::DuplicateItem,
                    detail: format!("item {} packed more than once", inst.label(v)),
                });
                continue;
            }
            known.push(v);
        }
        let load = inst.size_of(&known);
        if load > inst.unit() {
            violations.push(Violation {
                bin: Some(bi),
                kind: ViolationKind::Overflow,
                detail: format!("load {} exceeds capacity", Ratio::new(load, inst.unit())),
            });
        }
        for (i, &u) in known.iter().enumerate() {
            for &v in &known[i + 1..] {
                if inst.conflicts(u, v) {
                    violations.push(Violation {
                        bin: Some(bi),
                        kind: ViolationKind::Conflict,
                        detail: format!("items {} and {} conflict", inst.label(u), inst.label(v)),
                    });
                }
            }
        }
    }
    if require_cover {
        for &v in inst.items() {
            if !seen.contains(&v) {
                violations.push(Violation {
                    bin: None,
                    kind: ViolationKind::Uncovered,
                    detail: format!("item {} is not packed", inst.label(v)),
                });
            }
        }
    }
    ValidationReport {
        feasible: violations.is_empty(),
        violations,
        covered_items: seen.into_iter().collect(),
    }
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.35"` into an exact fraction.
pub fn parse_fraction(text: &str) -> Result<Ratio<u64>> {
    let t = text.trim();
    let bad = || Error::Parameter(format!("cannot parse size '{text}'"));
    if let Some((p, q)) = t.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10u64.pow(frac.len() as u32);
        let num: u64 = frac.parse().map_err(|_| bad())?;
        return Ok(Ratio::new(int * den + num, den));
    }
    if t.contains(['e', 'E']) {
        let x: f64 = t.parse().map_err(|_| bad())?;
        return parse_fraction(&format!("{x}"));
    }
    t.parse::<u64>().map(Ratio::from_integer).map_err(|_| bad())
}
