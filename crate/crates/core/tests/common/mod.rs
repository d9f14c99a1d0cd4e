#![allow(dead_code)]

use cbp_core::harness::{generate, GenClass, GeneratorSpec};
use cbp_core::model::ConflictInstance;
use cbp_core::rng::Rng;

pub const CLASSES: [GenClass; 6] = [
    GenClass::Bipartite,
    GenClass::Split,
    GenClass::Cluster,
    GenClass::CompleteMultipartite,
    GenClass::Chordal,
    GenClass::Edgeless,
];

/// Instance `k` of a seeded stream for `class`, with 1..=max_n items.
pub fn instance(class: GenClass, max_n: usize, seed: u64, k: u64) -> ConflictInstance {
    let mut rng = Rng::new(seed ^ (k.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let n = 1 + rng.index(max_n);
    let density = rng.unit();
    generate(&GeneratorSpec::new(class, n, density, rng.next_u64()))
        .unwrap()
        .instance
}

/// Items of `inst` as a bitmask over local indices, with pairwise conflicts.
pub fn local_conflicts(inst: &ConflictInstance) -> Vec<u32> {
    let items = inst.items();
    items
        .iter()
        .map(|&u| {
            items
                .iter()
                .enumerate()
                .filter(|&(_, &v)| inst.conflicts(u, v))
                .fold(0u32, |m, (j, _)| m | 1 << j)
        })
        .collect()
}

/// Minimum number of feasible bins by dynamic programming over subsets.
pub fn opt_by_subsets(inst: &ConflictInstance) -> usize {
    let items = inst.items();
    let n = items.len();
    assert!(n <= 16);
    let adj = local_conflicts(inst);
    let full = (1u32 << n) - 1;
    let mut feasible = vec![false; 1 << n];
    for m in 0..=full {
        let mut size = 0u64;
        let mut ok = true;
        for i in 0..n {
            if m >> i & 1 == 1 {
                size += inst.size(items[i]);
                ok &= adj[i] & m == 0;
            }
        }
        feasible[m as usize] = ok && size <= inst.unit();
    }
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for m in 1..=full {
        let low = m & m.wrapping_neg();
        let rest = m ^ low;
        let mut sub = rest;
        loop {
            let bin = sub | low;
            if feasible[bin as usize] {
                let prev = best[(m ^ bin) as usize];
                if prev != usize::MAX && prev + 1 < best[m as usize] {
                    best[m as usize] = prev + 1;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full as usize]
}

/// Largest clique, by enumerating vertex subsets.
pub fn clique_number(inst: &ConflictInstance) -> usize {
    let adj = local_conflicts(inst);
    let n = adj.len();
    (0u32..1 << n)
        .filter(|&m| (0..n).all(|i| m >> i & 1 == 0 || adj[i] | 1 << i | !m == u32::MAX))
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Chromatic number: the smallest k ≥ ω admitting a colouring, found by
/// backtracking where vertex i may only open colour `used`.
pub fn chromatic_number(inst: &ConflictInstance) -> usize {
    let adj = local_conflicts(inst);
    let n = adj.len();
    fn fits(adj: &[u32], colour: &mut [usize], i: usize, used: usize, k: usize) -> bool {
        if i == colour.len() {
            return true;
        }
        for c in 0..(used + 1).min(k) {
            if (0..i).all(|j| adj[i] >> j & 1 == 0 || colour[j] != c) {
                colour[i] = c;
                if fits(adj, colour, i + 1, used.max(c + 1), k) {
                    return true;
                }
            }
        }
        false
    }
    (clique_number(inst)..=n)
        .find(|&k| fits(&adj, &mut vec![0; n], 0, 0, k))
        .unwrap()
}
