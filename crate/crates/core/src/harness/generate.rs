//! Seeded instance generators, one per supported graph class, plus the
//! three-dimensional-matching reduction that yields hard bipartite and split
//! instances.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graphs::recognize;
use crate::model::{parse_fraction, ConflictInstance, GraphClass, ItemId, Packing};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenClass {
    Bipartite,
    Split,
    Cluster,
    CompleteMultipartite,
    Chordal,
    Edgeless,
    B3dmReduction,
}

impl GenClass {
    pub fn name(self) -> &'static str {
        match self {
            GenClass::Bipartite => "bipartite",
            GenClass::Split => "split",
            GenClass::Cluster => "cluster",
            GenClass::CompleteMultipartite => "complete-multipartite",
            GenClass::Chordal => "chordal",
            GenClass::Edgeless => "edgeless",
            GenClass::B3dmReduction => "b3dm-reduction",
        }
    }

    /// Graph class the generated conflict graph is guaranteed to have.
    pub fn graph_class(self, variant: ReductionVariant) -> GraphClass {
        match self {
            GenClass::Bipartite => GraphClass::Bipartite,
            GenClass::Split => GraphClass::Split,
            GenClass::Cluster => GraphClass::Cluster,
            GenClass::CompleteMultipartite => GraphClass::CompleteMultipartite,
            GenClass::Chordal => GraphClass::Chordal,
            GenClass::Edgeless => GraphClass::Edgeless,
            GenClass::B3dmReduction => match variant {
                ReductionVariant::Bpb => GraphClass::Bipartite,
                ReductionVariant::Bps => GraphClass::Split,
            },
        }
    }
}

/// Item size distribution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SizeDist {
    /// Uniform over {k/20 : k = 1..20}.
    #[default]
    Twentieths,
    /// Uniform over the listed fractions ("p/q" or decimals).
    Discrete { values: Vec<String> },
    /// Uniform over [lo, hi], quantised to multiples of 1/1000.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionVariant {
    /// Bipartite conflicts.
    #[default]
    Bpb,
    /// Adds a clique on the triple items, giving a split graph.
    Bps,
}

fn default_max_degree() -> usize {
    3
}

/// Parameters of the matching reduction. Triples are either listed or drawn
/// at random with every element in at most `max_degree` triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionSpec {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    #[serde(default)]
    pub triples: Option<Vec<[usize; 3]>>,
    /// Number of random triples (ignored when `triples` is given).
    #[serde(default)]
    pub t: usize,
    /// Guess i of the maximum matching size; `None` uses the true optimum.
    #[serde(default)]
    pub guess: Option<usize>,
    #[serde(default)]
    pub variant: ReductionVariant,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

fn default_density() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub class: GenClass,
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default)]
    pub sizes: SizeDist,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reduction: Option<ReductionSpec>,
}

impl GeneratorSpec {
    pub fn new(class: GenClass, n: usize, density: f64, seed: u64) -> Self {
        GeneratorSpec {
            class,
            n,
            density,
            sizes: SizeDist::default(),
            seed,
            reduction: None,
        }
    }
}

/// Item roles of a reduction instance, as item ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionInfo {
    pub x: Vec<ItemId>,
    pub y: Vec<ItemId>,
    pub z: Vec<ItemId>,
    /// One item per triple, in triple order.
    pub t: Vec<ItemId>,
    pub p: Vec<ItemId>,
    pub q: Vec<ItemId>,
    pub triples: Vec<[usize; 3]>,
    pub guess: usize,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: ConflictInstance,
    pub class: GraphClass,
    pub reduction: Option<ReductionInfo>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    if !(0.0..=1.0).contains(&spec.density) {
        return param(format!("density must lie in [0, 1], got {}", spec.density));
    }
    let mut rng = Rng::new(spec.seed);
    if spec.class == GenClass::B3dmReduction {
        let r = spec
            .reduction
            .as_ref()
            .ok_or_else(|| Error::Parameter("b3dm-reduction needs a 'reduction' block".into()))?;
        return reduction(r, &mut rng);
    }
    let n = spec.n;
    let sizes = draw_sizes(&spec.sizes, n, &mut rng)?;
    let p = spec.density;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match spec.class {
        GenClass::Edgeless => {}
        GenClass::Bipartite => {
            let side: Vec<u64> = (0..n).map(|_| rng.below(2)).collect();
            for a in 0..n {
                for b in a + 1..n {
                    if side[a] != side[b] && rng.chance(p) {
                        edges.push((a, b));
                    }
                }
            }
        }
        GenClass::Split => {
            let k = if n == 0 {
                0
            } else {
                1 + rng.index(n.div_ceil(2))
            };
            let in_clique: Vec<bool> = shuffled_flags(n, k, &mut rng);
            for a in 0..n {
                for b in a + 1..n {
                    if (in_clique[a] && in_clique[b])
                        || ((in_clique[a] || in_clique[b]) && rng.chance(p))
                    {
                        edges.push((a, b));
                    }
                }
            }
        }
        GenClass::Cluster | GenClass::CompleteMultipartite => {
            // Vertex joins an existing group with probability `density`.
            let mut group = vec![0usize; n];
            let mut groups = 0;
            for g in group.iter_mut() {
                if groups > 0 && rng.chance(p) {
                    *g = rng.index(groups);
                } else {
                    *g = groups;
                    groups += 1;
                }
            }
            let same_group_edges = spec.class == GenClass::Cluster;
            for a in 0..n {
                for b in a + 1..n {
                    if (group[a] == group[b]) == same_group_edges {
                        edges.push((a, b));
                    }
                }
            }
        }
        GenClass::Chordal => {
            // Each new vertex is attached to a clique of earlier vertices, so
            // the reverse insertion order is a perfect elimination ordering.
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
            for v in 1..n {
                if rng.chance(0.1) {
                    continue;
                }
                let u = rng.index(v);
                let mut clique = vec![u];
                let cand = adj[u].clone();
                for w in cand {
                    if rng.chance(p) && clique.iter().all(|&c| adj[c].contains(&w)) {
                        clique.push(w);
                    }
                }
                for &c in &clique {
                    adj[c].push(v);
                    adj[v].push(c);
                    edges.push((c.min(v), c.max(v)));
                }
            }
        }
        GenClass::B3dmReduction => unreachable!(),
    }
    let class = spec.class.graph_class(ReductionVariant::Bpb);
    let instance = ConflictInstance::new(&sizes, &edges)?.with_class_hint(Some(class));
    check_class(&instance, class)?;
    Ok(Generated {
        instance,
        class,
        reduction: None,
    })
}

fn shuffled_flags(n: usize, k: usize, rng: &mut Rng) -> Vec<bool> {
    let mut flags: Vec<bool> = (0..n).map(|i| i < k).collect();
    for i in (1..n).rev() {
        let j = rng.index(i + 1);
        flags.swap(i, j);
    }
    flags
}

fn check_class(inst: &ConflictInstance, class: GraphClass) -> Result<()> {
    let info = recognize(inst);
    if !info.has_class(class) {
        return Err(Error::Internal(format!("generated graph is not {class}")));
    }
    info.verify(inst).map_err(Error::Internal)
}

pub fn draw_sizes(dist: &SizeDist, n: usize, rng: &mut Rng) -> Result<Vec<Ratio<u64>>> {
    match dist {
        SizeDist::Twentieths => Ok((0..n).map(|_| Ratio::new(1 + rng.below(20), 20)).collect()),
        SizeDist::Discrete { values } => {
            if values.is_empty() {
                return param("discrete size distribution needs at least one value");
            }
            let parsed = values
                .iter()
                .map(|v| parse_fraction(v))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..n).map(|_| parsed[rng.index(parsed.len())]).collect())
        }
        SizeDist::Uniform { lo, hi } => {
            if !(0.0 <= *lo && lo <= hi && *hi <= 1.0) {
                return param(format!(
                    "uniform sizes need 0 ≤ lo ≤ hi ≤ 1, got [{lo}, {hi}]"
                ));
            }
            let a = (lo * 1000.0).ceil() as u64;
            let b = (hi * 1000.0).floor() as u64;
            if a > b {
                return param("uniform size range contains no multiple of 1/1000");
            }
            Ok((0..n)
                .map(|_| Ratio::new(a + rng.below(b - a + 1), 1000))
                .collect())
        }
    }
}

fn random_triples(r: &ReductionSpec, rng: &mut Rng) -> Result<Vec<[usize; 3]>> {
    // Uniform choice among the triples still admissible; restarts on a dead end.
    for _ in 0..100 {
        let mut deg = [vec![0usize; r.x], vec![0usize; r.y], vec![0usize; r.z]];
        let mut out: Vec<[usize; 3]> = Vec::new();
        while out.len() < r.t {
            let mut open = Vec::new();
            for a in 0..r.x {
                for b in 0..r.y {
                    for c in 0..r.z {
                        let tr = [a, b, c];
                        if (0..3).all(|k| deg[k][tr[k]] < r.max_degree) && !out.contains(&tr) {
                            open.push(tr);
                        }
                    }
                }
            }
            if open.is_empty() {
                break;
            }
            let tr = open[rng.index(open.len())];
            for k in 0..3 {
                deg[k][tr[k]] += 1;
            }
            out.push(tr);
        }
        if out.len() == r.t {
            return Ok(out);
        }
    }
    param(format!(
        "could not draw {} distinct triples with element degree ≤ {}",
        r.t, r.max_degree
    ))
}

/// Largest set of pairwise disjoint triples, by exhaustive search. Ties go to
/// the lexicographically smallest list of triple indices.
pub fn max_3d_matching(triples: &[[usize; 3]]) -> Vec<usize> {
    fn go(tr: &[[usize; 3]], i: usize, cur: &mut Vec<usize>, best: &mut Vec<usize>) {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        if i == tr.len() || cur.len() + (tr.len() - i) <= best.len() {
            return;
        }
        let fits = cur.iter().all(|&c| (0..3).all(|k| tr[c][k] != tr[i][k]));
        if fits {
            cur.push(i);
            go(tr, i + 1, cur, best);
            cur.pop();
        }
        go(tr, i + 1, cur, best);
    }
    let mut best = Vec::new();
    go(triples, 0, &mut Vec::new(), &mut best);
    best
}

fn reduction(r: &ReductionSpec, rng: &mut Rng) -> Result<Generated> {
    if r.x == 0 && r.y == 0 && r.z == 0 {
        return param("reduction needs at least one element");
    }
    let triples = match &r.triples {
        Some(t) => t.clone(),
        None if r.x == 0 || r.y == 0 || r.z == 0 => {
            return param("random triples need x, y, z ≥ 1")
        }
        None => random_triples(r, rng)?,
    };
    for tr in &triples {
        if tr[0] >= r.x || tr[1] >= r.y || tr[2] >= r.z {
            return param(format!("triple {tr:?} references an unknown element"));
        }
    }
    let tt = triples.len();
    let guess = match r.guess {
        Some(g) => g,
        None => max_3d_matching(&triples).len(),
    };
    if guess > tt || 3 * guess > r.x + r.y + r.z {
        return param(format!(
            "guess {guess} leaves a negative number of filler items (|P| = t − i, |Q| = x + y + z − 3i)"
        ));
    }
    let np = tt - guess;
    let nq = r.x + r.y + r.z - 3 * guess;
    let mut next = 0;
    let mut block = |k: usize| {
        let ids: Vec<ItemId> = (next..next + k).collect();
        next += k;
        ids
    };
    let x = block(r.x);
    let y = block(r.y);
    let z = block(r.z);
    let t = block(tt);
    let p = block(np);
    let q = block(nq);
    let mut sizes = vec![Ratio::new(3, 20); r.x + r.y + r.z];
    sizes.extend(std::iter::repeat_n(Ratio::new(11, 20), tt));
    sizes.extend(std::iter::repeat_n(Ratio::new(9, 20), np));
    sizes.extend(std::iter::repeat_n(Ratio::new(17, 20), nq));
    let mut edges = Vec::new();
    for (k, tr) in triples.iter().enumerate() {
        for (side, &member) in [&x, &y, &z].iter().zip(tr) {
            for (e, &u) in side.iter().enumerate() {
                if e != member {
                    edges.push((u, t[k]));
                }
            }
        }
    }
    if r.variant == ReductionVariant::Bps {
        for a in 0..tt {
            for b in a + 1..tt {
                edges.push((t[a], t[b]));
            }
        }
    }
    let class = GenClass::B3dmReduction.graph_class(r.variant);
    let instance = ConflictInstance::new(&sizes, &edges)?.with_class_hint(Some(class));
    check_class(&instance, class)?;
    Ok(Generated {
        instance,
        class,
        reduction: Some(ReductionInfo {
            x,
            y,
            z,
            t,
            p,
            q,
            triples,
            guess,
        }),
    })
}

/// Bins {x, y, z, t} of the triples in `matching`.
pub fn useful_bins(info: &ReductionInfo, matching: &[usize]) -> Vec<Vec<ItemId>> {
    matching
        .iter()
        .map(|&k| {
            let [a, b, c] = info.triples[k];
            vec![info.x[a], info.y[b], info.z[c], info.t[k]]
        })
        .collect()
}

/// The packing in which every bin is full: a useful bin per matched triple,
/// {t, p} for every other triple and {u, q} for every unmatched element.
/// `matching` must be a matching of size equal to the guess.
pub fn reduction_packing(info: &ReductionInfo, matching: &[usize]) -> Result<Packing> {
    if matching.len() != info.guess {
        return param(format!(
            "matching has {} triples but the instance was built for guess {}",
            matching.len(),
            info.guess
        ));
    }
    let mut bins = useful_bins(info, matching);
    let unmatched_t = (0..info.t.len()).filter(|k| !matching.contains(k));
    for (k, &p) in unmatched_t.zip(&info.p) {
        bins.push(vec![info.t[k], p]);
    }
    let mut q = info.q.iter();
    for (side, coord) in [(&info.x, 0), (&info.y, 1), (&info.z, 2)] {
        for (e, &u) in side.iter().enumerate() {
            if matching.iter().all(|&k| info.triples[k][coord] != e) {
                let &filler = q
                    .next()
                    .ok_or_else(|| Error::Parameter("matching is not disjoint".into()))?;
                bins.push(vec![u, filler]);
            }
        }
    }
    Ok(Packing::new(bins, "reduction-optimal"))
}
