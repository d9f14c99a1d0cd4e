mod common;

use num_rational::Ratio;
use proptest::prelude::*;

use cbp_core::bis::{bis_ptas, knapsack_fptas, BisProblem, DEFAULT_ENUMERATION_CAP};
use cbp_core::bpc::{self, Algorithm, SolverConfig};
use cbp_core::graphs::{
    max_weight_independent_set, maximum_matching_general, minimum_coloring, recognize,
};
use cbp_core::harness::{generate, GenClass, GeneratorSpec};
use cbp_core::lp::{solve, LinearProgram};
use cbp_core::model::{parse_fraction, validate_packing, ConflictInstance, ItemId, RestrictMode};
use cbp_core::oracle::opt_bpc_exact;

use common::{chromatic_number, local_conflicts, opt_by_subsets, CLASSES};

fn class_strategy() -> impl Strategy<Value = GenClass> {
    prop::sample::select(CLASSES.to_vec())
}

fn generated(max_n: usize) -> impl Strategy<Value = ConflictInstance> {
    (class_strategy(), 0..=max_n, 0.0..=1.0f64, any::<u64>()).prop_map(|(c, n, d, seed)| {
        generate(&GeneratorSpec::new(c, n, d, seed))
            .unwrap()
            .instance
    })
}

/// Arbitrary graphs, not restricted to a class.
fn arbitrary(max_n: usize) -> impl Strategy<Value = ConflictInstance> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(1u64..=20, n),
            prop::collection::vec(any::<bool>(), n * (n - 1) / 2),
        )
            .prop_map(move |(sizes, bits)| {
                let sizes: Vec<_> = sizes.iter().map(|&s| Ratio::new(s, 20)).collect();
                let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
                let edges: Vec<_> = pairs
                    .zip(bits)
                    .filter(|(_, e)| *e)
                    .map(|(p, _)| p)
                    .collect();
                ConflictInstance::new(&sizes, &edges).unwrap()
            })
    })
}

fn brute_mwis(inst: &ConflictInstance, w: &[u64]) -> u64 {
    let items = inst.items();
    let adj = local_conflicts(inst);
    (0u32..1 << items.len())
        .filter(|&m| (0..items.len()).all(|i| m >> i & 1 == 0 || adj[i] & m == 0))
        .map(|m| {
            (0..items.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| w[items[i]])
                .sum()
        })
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_oracle_matches_subset_dp(inst in arbitrary(9)) {
        prop_assert_eq!(opt_bpc_exact(&inst, 18).unwrap().opt, opt_by_subsets(&inst));
    }

    #[test]
    fn coloring_is_minimum(inst in generated(12)) {
        let info = recognize(&inst);
        let classes = minimum_coloring(&inst, &info).unwrap();
        for c in &classes {
            prop_assert!(inst.is_independent(c));
        }
        let covered: usize = classes.iter().map(Vec::len).sum();
        prop_assert_eq!(covered, inst.len());
        prop_assert_eq!(classes.len(), chromatic_number(&inst));
    }

    #[test]
    fn mwis_is_maximum(inst in generated(12), seed in any::<u64>()) {
        let info = recognize(&inst);
        let mut rng = cbp_core::rng::Rng::new(seed);
        let w: Vec<u64> = (0..inst.id_bound()).map(|_| rng.below(50)).collect();
        let set = max_weight_independent_set(&inst, &info, &w).unwrap();
        prop_assert!(inst.is_independent(&set));
        prop_assert_eq!(set.iter().map(|&v| w[v]).sum::<u64>(), brute_mwis(&inst, &w));
    }

    #[test]
    fn matching_is_maximum(n in 1usize..9, bits in prop::collection::vec(any::<bool>(), 36)) {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .zip(bits)
            .filter(|(_, e)| *e)
            .map(|(p, _)| p)
            .collect();
        let m = maximum_matching_general(n, &edges);
        let mut used = vec![false; n];
        for &(a, b) in &m {
            prop_assert!(edges.contains(&(a, b)));
            prop_assert!(!used[a] && !used[b]);
            used[a] = true;
            used[b] = true;
        }
        // Brute force over edge subsets.
        let best = (0u64..1 << edges.len())
            .filter(|&s| {
                let mut mask = 0u32;
                edges.iter().enumerate().filter(|(i, _)| s >> i & 1 == 1).all(|(_, &(a, b))| {
                    let ok = mask >> a & 1 == 0 && mask >> b & 1 == 0;
                    mask |= 1 << a | 1 << b;
                    ok
                })
            })
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap();
        prop_assert_eq!(m.len(), best);
    }

    #[test]
    fn opt_invariant_under_relabeling(inst in arbitrary(8), seed in any::<u64>()) {
        let n = inst.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = cbp_core::rng::Rng::new(seed);
        for i in (1..n).rev() {
            perm.swap(i, rng.index(i + 1));
        }
        let mut sizes = vec![Ratio::new(0, 1); n];
        for v in 0..n {
            sizes[perm[v]] = inst.size_ratio(v);
        }
        let edges: Vec<_> = inst.edges().iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let relabeled = ConflictInstance::new(&sizes, &edges).unwrap();
        prop_assert_eq!(opt_bpc_exact(&inst, 18).unwrap().opt, opt_bpc_exact(&relabeled, 18).unwrap().opt);
    }

    #[test]
    fn restriction_is_idempotent(inst in arbitrary(10), mask in any::<u16>()) {
        let subset: Vec<ItemId> = inst.items().iter().copied().filter(|&v| mask >> v & 1 == 1).collect();
        let once = inst.restrict(&subset, RestrictMode::Intersect).unwrap();
        let twice = once.restrict(&subset, RestrictMode::Intersect).unwrap();
        prop_assert_eq!(once.items(), twice.items());
        prop_assert_eq!(once.edges(), twice.edges());
        let rest = inst.restrict(&subset, RestrictMode::Subtract).unwrap();
        prop_assert!(rest.items().iter().all(|v| !subset.contains(v)));
        prop_assert_eq!(rest.len() + once.len(), inst.len());
        for (a, b) in once.edges() {
            prop_assert!(inst.conflicts(a, b));
        }
    }

    #[test]
    fn certificates_verify(inst in generated(16)) {
        let info = recognize(&inst);
        prop_assert!(info.verify(&inst).is_ok());
        prop_assert!(info.is_supported());
    }

    #[test]
    fn all_algorithms_feasible(inst in generated(14)) {
        let info = recognize(&inst);
        let cfg = SolverConfig::default();
        let opt = opt_bpc_exact(&inst, 18).unwrap().opt;
        for algo in Algorithm::ALL.into_iter().filter(|a| a.applicable(&info)) {
            let p = bpc::run(&inst, &info, algo, &cfg).unwrap();
            prop_assert!(validate_packing(&inst, &p, true).feasible, "{}", algo);
            prop_assert!(p.bin_count() >= opt);
        }
    }

    #[test]
    fn knapsack_within_eps(items in prop::collection::vec((1u64..100, 1u64..60), 1..12), budget in 0u64..300) {
        let profits: Vec<u64> = items.iter().map(|p| p.0).collect();
        let costs: Vec<u64> = items.iter().map(|p| p.1).collect();
        let pick = knapsack_fptas(&profits, &costs, budget, 0.2).unwrap();
        prop_assert!(pick.iter().map(|&i| costs[i]).sum::<u64>() <= budget);
        let got: u64 = pick.iter().map(|&i| profits[i]).sum();
        let best = (0u32..1 << items.len())
            .filter(|&m| (0..items.len()).filter(|i| m >> i & 1 == 1).map(|i| costs[i]).sum::<u64>() <= budget)
            .map(|m| (0..items.len()).filter(|i| m >> i & 1 == 1).map(|i| profits[i]).sum::<u64>())
            .max()
            .unwrap();
        prop_assert!(5 * got >= 4 * best);
    }

    #[test]
    fn bis_ptas_within_eps(inst in generated(12), seed in any::<u64>()) {
        let mut rng = cbp_core::rng::Rng::new(seed);
        let w: Vec<u64> = (0..inst.id_bound()).map(|_| 1 + rng.below(40)).collect();
        let total: u64 = w.iter().sum();
        let budget = rng.below(total + 1);
        let info = recognize(&inst);
        let p = BisProblem::new(inst.clone(), w.clone(), budget, info).unwrap();
        let s = bis_ptas(&p, 0.25, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!(p.is_feasible(&s));
        let (_, best) = cbp_core::oracle::bis_brute(&p, 20).unwrap();
        prop_assert!(4 * p.weight_of(&s) >= 3 * best);
    }

    #[test]
    fn fractional_knapsack_lp(items in prop::collection::vec((1u32..50, 1u32..20), 1..8), cap in 1u32..60) {
        // max Σ p x s.t. Σ c x ≤ cap, 0 ≤ x ≤ 1 has the greedy-by-density optimum.
        let mut lp = LinearProgram::new(items.len());
        lp.objective = items.iter().map(|p| p.0 as f64).collect();
        lp.upper = vec![1.0; items.len()];
        lp.add_row(items.iter().map(|p| p.1 as f64).collect(), cap as f64);
        let s = solve(&lp, 1000).unwrap();
        let mut order: Vec<_> = items.clone();
        order.sort_by(|a, b| (b.0 as f64 / b.1 as f64).total_cmp(&(a.0 as f64 / a.1 as f64)));
        let (mut left, mut value) = (cap as f64, 0.0);
        for (p, c) in order {
            let take = (left / c as f64).min(1.0);
            value += take * p as f64;
            left -= take * c as f64;
            if left <= 0.0 {
                break;
            }
        }
        prop_assert!((s.objective - value).abs() < 1e-6);
        let fractional = s.x.iter().filter(|&&x| x > 1e-9 && x < 1.0 - 1e-9).count();
        prop_assert!(fractional <= 1);
    }

    #[test]
    fn fraction_parsing_round_trips(p in 0u64..1000, q in 1u64..1000) {
        prop_assume!(p <= q);
        let r = Ratio::new(p, q);
        prop_assert_eq!(parse_fraction(&format!("{}/{}", r.numer(), r.denom())).unwrap(), r);
        prop_assert_eq!(parse_fraction(&format!("{}/{}", p, q)).unwrap(), r);
    }
}
