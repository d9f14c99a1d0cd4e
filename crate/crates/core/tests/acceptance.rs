//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;

use cbp_core::bis::{bis_fptas_split, bis_ptas, BisProblem, DEFAULT_ENUMERATION_CAP};
use cbp_core::bpc::{self, build_assignment_lp, round_assignment, Algorithm, SolverConfig};
use cbp_core::graphs::recognize;
use cbp_core::harness::generate::{max_3d_matching, reduction_packing, useful_bins};
use cbp_core::harness::suite::SuiteGroup;
use cbp_core::harness::{
    generate, run_suite, GenClass, GeneratorSpec, ReductionSpec, ReductionVariant, RunOptions,
    SizeDist, Suite,
};
use cbp_core::maxsize::{max_size, MaxSizeConfig, MaxSizeStrategy};
use cbp_core::model::{validate_packing, ConflictInstance, ItemId, Packing};
use cbp_core::oracle::{
    bis_brute, maxsize_brute, opt_bpc_exact, MaxSizeLimits, DEFAULT_EXACT_LIMIT,
};
use cbp_core::packing_classic::ffd;
use cbp_core::rng::Rng;

use common::{chromatic_number, instance, opt_by_subsets, CLASSES};

/// Tolerance for floating-point LP quantities.
const LP_TOL: f64 = 1e-6;
const FEASIBILITY_BUDGET: Duration = Duration::from_secs(120);
const CLASS_SUITE_BUDGET: Duration = Duration::from_secs(60);

type Q = Ratio<u128>;
type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn q(inst: &ConflictInstance, v: ItemId) -> Q {
    let r = inst.size_ratio(v);
    Q::new(*r.numer() as u128, *r.denom() as u128)
}

/// (|L|, s(M), s(S)) from exact sizes with thresholds 1/2 and 1/3.
fn class_sums(inst: &ConflictInstance) -> (Q, Q, Q) {
    let (half, third) = (Q::new(1, 2), Q::new(1, 3));
    let mut out = (Q::from(0), Q::from(0), Q::from(0));
    for &v in inst.items() {
        let s = q(inst, v);
        if s > half {
            out.0 += Q::from(1);
        } else if s > third {
            out.1 += s;
        } else {
            out.2 += s;
        }
    }
    out
}

fn supported_algorithms(inst: &ConflictInstance) -> Vec<Algorithm> {
    let info = recognize(inst);
    Algorithm::ALL
        .into_iter()
        .filter(|a| a.applicable(&info))
        .filter(|&a| a != Algorithm::Exact || inst.len() <= DEFAULT_EXACT_LIMIT)
        .collect()
}

fn feasibility() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let (mut instances, mut runs, mut bad) = (0, 0, Vec::new());
    for class in CLASSES {
        for k in 0..334 {
            let inst = instance(class, 20, 101, k);
            instances += 1;
            for algo in supported_algorithms(&inst) {
                runs += 1;
                let ok = bpc::solve(&inst, algo, &cfg)
                    .map(|p| validate_packing(&inst, &p, true).feasible)
                    .unwrap_or(false);
                if !ok {
                    bad.push(format!("{}#{k}/{algo}", class.name()));
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && t < FEASIBILITY_BUDGET,
        format!(
            "{instances} instances, {runs} runs, {} invalid {:?}, {:.1} s (budget {} s)",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>(),
            t.as_secs_f64(),
            FEASIBILITY_BUDGET.as_secs()
        ),
    )
}

fn ffd_bounds() -> Outcome {
    let mut rng = Rng::new(202);
    let mut violations = 0;
    let total = 10_000;
    for k in 0..total {
        let n = 1 + rng.index(30);
        let sizes = if k % 2 == 0 {
            SizeDist::Twentieths
        } else {
            SizeDist::Uniform { lo: 0.001, hi: 1.0 }
        };
        let mut spec = GeneratorSpec::new(GenClass::Edgeless, n, 0.0, rng.next_u64());
        spec.sizes = sizes;
        let inst = generate(&spec).unwrap().instance;
        let bins = Q::from(ffd(&inst).bin_count() as u128);
        let total_size: Q = inst.items().iter().map(|&v| q(&inst, v)).sum();
        let max = inst.items().iter().map(|&v| q(&inst, v)).max().unwrap();
        let (l, m, s) = class_sums(&inst);
        let first = bins <= (Q::from(1) + Q::from(2) * max) * total_size + Q::from(1);
        let second = bins <= l + Q::new(3, 2) * m + Q::new(4, 3) * s + Q::from(1);
        if !(first && second) {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{total} conflict-free instances, {violations} violations"),
    )
}

fn color_sets_bound() -> Outcome {
    let cfg = SolverConfig::default();
    let (mut runs, mut violations) = (0, 0);
    for class in CLASSES {
        for k in 0..100 {
            let inst = instance(class, 14, 303, k);
            let bins = Q::from(
                bpc::solve(&inst, Algorithm::ColorSets, &cfg)
                    .unwrap()
                    .bin_count() as u128,
            );
            let chi = Q::from(chromatic_number(&inst) as u128);
            let (l, m, s) = class_sums(&inst);
            runs += 1;
            if bins > chi + l + Q::new(3, 2) * m + Q::new(4, 3) * s {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{runs} runs, {violations} violations"),
    )
}

fn ratio_ceilings() -> Outcome {
    let cfg = SolverConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut oracle_mismatch = 0;
    for class in CLASSES {
        let start = Instant::now();
        let mut violations = 0;
        let mut worst: f64 = 1.0;
        for k in 0..200 {
            let inst = instance(class, 14, 404, k);
            let opt = opt_bpc_exact(&inst, 14).unwrap().opt;
            if inst.len() <= 12 && opt_by_subsets(&inst) != opt {
                oracle_mismatch += 1;
            }
            let mut check = |algo: Algorithm, ceiling: usize| {
                let bins = bpc::solve(&inst, algo, &cfg).unwrap().bin_count();
                if opt > 0 {
                    worst = worst.max(bins as f64 / opt as f64);
                }
                if bins > ceiling {
                    violations += 1;
                }
            };
            check(Algorithm::ApproxBpc, (2445 * opt).div_ceil(1000));
            match class {
                GenClass::Bipartite => check(Algorithm::AbsBpb, (5 * opt).div_ceil(3)),
                GenClass::Split => check(
                    Algorithm::SplitApprox,
                    ((1.0 + 2.0 / std::f64::consts::E) * opt as f64).ceil() as usize,
                ),
                GenClass::CompleteMultipartite => {
                    check(Algorithm::MultipartitePack, (3 * opt).div_ceil(2))
                }
                _ => {}
            }
        }
        let t = start.elapsed();
        ok &= violations == 0 && t < CLASS_SUITE_BUDGET;
        parts.push(format!(
            "{} {violations} viol, max ratio {worst:.3}, {:.1} s",
            class.name(),
            t.as_secs_f64()
        ));
    }
    ok &= oracle_mismatch == 0;
    outcome(
        ok,
        format!(
            "200 per class; {}; oracle cross-check mismatches {oracle_mismatch}",
            parts.join("; ")
        ),
    )
}

fn bis_problem(class: GenClass, seed: u64, k: u64) -> BisProblem {
    let graph = instance(class, 14, seed, k);
    let mut rng = Rng::new(seed.wrapping_mul(31) ^ k);
    let weights: Vec<u64> = (0..graph.id_bound()).map(|_| 1 + rng.below(100)).collect();
    let total: u64 = graph.items().iter().map(|&v| weights[v]).sum();
    let budget = rng.below(total + 1);
    let info = recognize(&graph);
    BisProblem::new(graph, weights, budget, info).unwrap()
}

fn bis_quality() -> Outcome {
    let (mut ptas_bad, mut fptas_bad) = (0, 0);
    for k in 0..500 {
        let p = bis_problem(CLASSES[k as usize % CLASSES.len()], 505, k);
        let (_, best) = bis_brute(&p, 20).unwrap();
        let s = bis_ptas(&p, 0.25, DEFAULT_ENUMERATION_CAP).unwrap();
        // w ≥ (1 − 1/4)·OPT
        if !p.is_feasible(&s) || 4 * p.weight_of(&s) < 3 * best {
            ptas_bad += 1;
        }
        let p = bis_problem(GenClass::Split, 506, k);
        let (_, best) = bis_brute(&p, 20).unwrap();
        let s = bis_fptas_split(&p, 0.1).unwrap();
        if !p.is_feasible(&s) || 10 * p.weight_of(&s) < 9 * best {
            fptas_bad += 1;
        }
    }
    outcome(
        ptas_bad + fptas_bad == 0,
        format!(
            "500 + 500 problems, ptas violations {ptas_bad}, split fptas violations {fptas_bad}"
        ),
    )
}

/// A supported instance with an initial packing of 1 to 4 partly filled bins
/// and at most 12 unpacked items.
fn maxsize_case(k: u64) -> (ConflictInstance, Packing) {
    let base = instance(CLASSES[k as usize % CLASSES.len()], 16, 606, k);
    let mut rng = Rng::new(606 ^ k);
    let mut order: Vec<ItemId> = base.items().to_vec();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.index(i + 1));
    }
    let nbins = (1 + rng.index(4)).min(order.len());
    let mut bins: Vec<Vec<ItemId>> = order[..nbins].iter().map(|&v| vec![v]).collect();
    let mut free = Vec::new();
    for &v in &order[nbins..] {
        let b = rng.index(nbins);
        let mut with = bins[b].clone();
        with.push(v);
        if rng.chance(0.3) && base.fits(&with) && base.is_independent(&with) {
            bins[b] = with;
        } else if free.len() < 12 {
            free.push(v);
        }
    }
    let inst = base.keep(bins.iter().flatten().chain(&free).copied());
    (inst, Packing::new(bins, "initial"))
}

fn maxsize_quality() -> Outcome {
    let target = 1.0 - (-1.0f64).exp() - 0.05;
    let (mut greedy_bad, mut lp_bad) = (0, 0);
    let mut worst_lp: f64 = f64::INFINITY;
    let (mut nontrivial, mut greedy_below) = (0, 0);
    for k in 0..100 {
        let (inst, initial) = maxsize_case(k);
        let info = recognize(&inst);
        let (best, _) = maxsize_brute(&inst, &initial, MaxSizeLimits::default()).unwrap();
        let greedy = max_size(&inst, &initial, &info, &MaxSizeConfig::default()).unwrap();
        nontrivial += usize::from(best > 0);
        greedy_below += usize::from(greedy.added_size < best);
        if 2 * greedy.added_size < best
            || !validate_packing(&inst, &greedy.augmented, false).feasible
        {
            greedy_bad += 1;
        }
        let mut sum = 0u64;
        for seed in 0..100 {
            let cfg = MaxSizeConfig {
                strategy: MaxSizeStrategy::ConfigLp,
                seed,
                ..MaxSizeConfig::default()
            };
            let r = max_size(&inst, &initial, &info, &cfg).unwrap();
            if !validate_packing(&inst, &r.augmented, false).feasible {
                lp_bad += 1;
            }
            sum += r.added_size;
        }
        if best > 0 {
            let mean = sum as f64 / 100.0 / best as f64;
            worst_lp = worst_lp.min(mean);
            if mean < target {
                lp_bad += 1;
            }
        }
    }
    outcome(
        greedy_bad + lp_bad == 0,
        format!(
            "100 cases ({nontrivial} with brute > 0, greedy below brute on {greedy_below}), greedy violations {greedy_bad}, config-lp violations {lp_bad} (worst mean/brute {worst_lp:.3}, target {target:.3})"
        ),
    )
}

fn rounding_structure() -> Outcome {
    let cfg = SolverConfig::default();
    let mut violations = 0;
    let mut max_frac = 0;
    for k in 0..200 {
        let inst = instance(CLASSES[k as usize % CLASSES.len()], 16, 707, k);
        let mut rng = Rng::new(707 ^ k);
        // W is an independent set, as one side of a bipartition is.
        let mut w: Vec<ItemId> = Vec::new();
        for &v in inst.items() {
            if rng.chance(0.6) && inst.compatible_with(v, &w) {
                w.push(v);
            }
        }
        let rest = inst.remove(w.iter().copied());
        let big = bpc::solve(&rest, Algorithm::ColorSets, &cfg).unwrap();
        let t = big.bin_count();
        let alp = build_assignment_lp(&inst, &big, &w).unwrap();
        let (rounded, sol) = round_assignment(&inst, &big, &w).unwrap();
        // The LP solution itself must satisfy every constraint.
        let mut feasible = sol.x.iter().all(|&x| (-LP_TOL..=1.0 + LP_TOL).contains(&x));
        for (row, &rhs) in alp.lp.rows.iter().zip(&alp.lp.rhs) {
            let lhs: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
            feasible &= lhs <= rhs + LP_TOL;
        }
        let placed = rounded.items().len() - big.items().len();
        max_frac = max_frac.max(sol.fractional_items.len());
        let ok = feasible
            && sol.fractional_items.len() <= t
            && rounded.bin_count() == t
            && placed as f64 >= sol.objective - t as f64 - LP_TOL
            && validate_packing(&inst, &rounded, false).feasible;
        if !ok {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("200 assignment LPs, {violations} violations, max fractional items {max_frac}"),
    )
}

fn multipartite_decomposition() -> Outcome {
    let mut violations = 0;
    for k in 0..100 {
        let inst = instance(GenClass::CompleteMultipartite, 16, 808, k);
        let info = recognize(&inst);
        let parts = info.multipartite.as_ref().unwrap();
        let opt = opt_bpc_exact(&inst, 16).unwrap().opt;
        let sum: usize = parts
            .iter()
            .map(|p| {
                opt_bpc_exact(&inst.keep(p.iter().copied()), 16)
                    .unwrap()
                    .opt
            })
            .sum();
        let independent = if inst.len() <= 12 {
            opt_by_subsets(&inst)
        } else {
            opt
        };
        if sum != opt || independent != opt {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("100 instances (n ≤ 16), {violations} violations"),
    )
}

fn reduction_generator() -> Outcome {
    let mut rng = Rng::new(909);
    let (mut generated, mut violations, mut bins_checked) = (0, 0, 0);
    let mut specs = vec![ReductionSpec {
        x: 2,
        y: 2,
        z: 2,
        triples: Some(vec![[0, 0, 0], [1, 1, 1], [0, 1, 0]]),
        t: 0,
        guess: Some(2),
        variant: ReductionVariant::Bpb,
        max_degree: 3,
    }];
    for k in 0..100 {
        let (x, y, z) = (1 + rng.index(4), 1 + rng.index(4), 1 + rng.index(4));
        let cap = (x * y * z).min(3 * x.min(y).min(z));
        specs.push(ReductionSpec {
            x,
            y,
            z,
            triples: None,
            t: 1 + rng.index(cap),
            guess: None,
            variant: if k % 2 == 0 {
                ReductionVariant::Bpb
            } else {
                ReductionVariant::Bps
            },
            max_degree: 3,
        });
    }
    for (k, r) in specs.into_iter().enumerate() {
        let mut spec = GeneratorSpec::new(GenClass::B3dmReduction, 0, 0.0, k as u64);
        spec.reduction = Some(r);
        let g = generate(&spec).unwrap();
        generated += 1;
        let inst = &g.instance;
        let info = g.reduction.unwrap();
        let matching = max_3d_matching(&info.triples);
        let mut ok = matching.len() == info.guess;
        for bin in useful_bins(&info, &matching) {
            bins_checked += 1;
            ok &= bin.iter().map(|&v| q(inst, v)).sum::<Q>() == Q::from(1);
        }
        let w = reduction_packing(&info, &matching).unwrap();
        ok &= validate_packing(inst, &w, true).feasible;
        ok &= w
            .bins
            .iter()
            .all(|b| b.iter().map(|&v| q(inst, v)).sum::<Q>() == Q::from(1));
        if !ok {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{generated} reductions, {bins_checked} useful bins, {violations} violations"),
    )
}

fn determinism() -> Outcome {
    let groups = CLASSES
        .iter()
        .map(|&c| SuiteGroup {
            spec: GeneratorSpec::new(c, 10, 0.4, 0),
            count: 4,
        })
        .collect();
    let suite = Suite {
        name: "determinism".into(),
        seed: 1010,
        algorithms: Algorithm::ALL.to_vec(),
        oracle: true,
        oracle_limit: 14,
        groups,
        files: Vec::new(),
        solver: SolverConfig::default(),
        timings: false,
    };
    let mut reports = Vec::new();
    for jobs in [1, 1, 3] {
        let dir = tempfile::tempdir().unwrap();
        run_suite(&suite, dir.path(), &RunOptions { jobs }).unwrap();
        let read = |name: &str| fs::read(dir.path().join(name)).unwrap();
        let mut instances: Vec<_> = fs::read_dir(dir.path().join("instances"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        instances.sort();
        let json: Vec<Vec<u8>> = instances.iter().map(|p| fs::read(p).unwrap()).collect();
        reports.push((read("report.csv"), read("summary.csv"), json));
    }
    let same = reports.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "3 bench runs (jobs 1, 1, 3), {} report bytes, identical: {same}",
            reports[0].0.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("feasibility suite", feasibility),
        ("FFD bounds", ffd_bounds),
        ("color_sets bound", color_sets_bound),
        ("oracle ratio ceilings", ratio_ceilings),
        ("BIS quality", bis_quality),
        ("MaxSize quality", maxsize_quality),
        ("assignment rounding structure", rounding_structure),
        ("multipartite decomposition", multipartite_decomposition),
        ("reduction generator", reduction_generator),
        ("determinism", determinism),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {:>2} {:<30} {}  {} [{:.1} s]",
            i + 1,
            name,
            if o.ok { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
