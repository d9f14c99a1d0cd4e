//! Benchmark suites: generate or load instances, run algorithms, compare with
//! the exact oracle, check the per-run bounds and persist the results.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate, GeneratorSpec};
use super::io::{read_instance, write_json, InstanceFile, PackingFile};
use crate::bpc::{
    self, color_sets_bound_holds, matching_bound_holds, round_assignment, Algorithm, SolverConfig,
};
use crate::error::{Error, Result};
use crate::graphs::{minimum_coloring, recognize, GraphClassInfo};
use crate::model::{is_small, validate_packing, ConflictInstance, ItemId};
use crate::oracle::opt_bpc_exact;
use crate::packing_classic::{ffd_bounds_hold, ffd_items};
use crate::rng::Rng;

pub const SEED_ENV: &str = "CBP_SEED";

pub const CSV_HEADER: [&str; 14] = [
    "instance_id",
    "class",
    "n",
    "algorithm",
    "bins",
    "opt",
    "ratio",
    "lemma2_ok",
    "lemma4_ok",
    "lemma8_ok",
    "lemma12_ok",
    "lemma16_ok",
    "fallback_flags",
    "micros",
];

pub const SUMMARY_HEADER: [&str; 6] = [
    "class",
    "algorithm",
    "runs",
    "with_opt",
    "max_ratio",
    "mean_ratio",
];

fn one() -> usize {
    1
}

fn default_oracle_limit() -> usize {
    14
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteGroup {
    #[serde(flatten)]
    pub spec: GeneratorSpec,
    #[serde(default = "one")]
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Suite {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub oracle: bool,
    /// The oracle runs only on instances with at most this many items.
    #[serde(default = "default_oracle_limit")]
    pub oracle_limit: usize,
    #[serde(default)]
    pub groups: Vec<SuiteGroup>,
    /// Instance files, relative to the suite file.
    #[serde(default)]
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Fill the `micros` column. Off by default so reports are reproducible.
    #[serde(default)]
    pub timings: bool,
}

impl Suite {
    /// Reads a suite file and applies the `CBP_SEED` override. Relative
    /// instance paths are resolved against the suite file's directory.
    pub fn load(path: &Path) -> Result<Suite> {
        let mut suite: Suite = super::io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for f in &mut suite.files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        suite.apply_env_seed()?;
        Ok(suite)
    }

    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| {
                Error::Parameter(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))
            })?;
        }
        Ok(())
    }
}

/// Bound checks of one run; `None` where a check does not apply.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundChecks {
    pub lemma2_ok: Option<bool>,
    pub lemma4_ok: Option<bool>,
    pub lemma8_ok: Option<bool>,
    pub lemma12_ok: Option<bool>,
    pub lemma16_ok: Option<bool>,
}

impl BoundChecks {
    pub fn all_ok(&self) -> bool {
        [
            self.lemma2_ok,
            self.lemma4_ok,
            self.lemma8_ok,
            self.lemma12_ok,
            self.lemma16_ok,
        ]
        .iter()
        .all(|c| c.unwrap_or(true))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance_id: String,
    pub class: String,
    pub n: usize,
    pub algorithm: String,
    pub bins: Option<usize>,
    pub opt: Option<usize>,
    pub ratio: Option<f64>,
    #[serde(flatten)]
    pub checks: BoundChecks,
    pub fallback_flags: Vec<String>,
    pub micros: Option<u128>,
}

impl RunRow {
    fn record(&self) -> Vec<String> {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let flag = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.instance_id.clone(),
            self.class.clone(),
            self.n.to_string(),
            self.algorithm.clone(),
            opt(self.bins),
            opt(self.opt),
            self.ratio.map(|r| format!("{r:.6}")).unwrap_or_default(),
            flag(self.checks.lemma2_ok),
            flag(self.checks.lemma4_ok),
            flag(self.checks.lemma8_ok),
            flag(self.checks.lemma12_ok),
            flag(self.checks.lemma16_ok),
            self.fallback_flags.join(";"),
            self.micros.map(|m| m.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
struct AlgorithmResult {
    algorithm: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    packing: Option<PackingFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
struct InstanceReport<'a> {
    instance_id: &'a str,
    class: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    opt: Option<usize>,
    config: &'a SolverConfig,
    instance: InstanceFile,
    results: Vec<AlgorithmResult>,
}

/// An instance queued for a suite run.
#[derive(Clone, Debug)]
pub struct SuiteInstance {
    pub id: String,
    pub class: String,
    pub seed: Option<u64>,
    pub instance: ConflictInstance,
}

/// Expands the generator groups and loads the instance files. Instance `k`
/// of group `g` gets the `k`-th draw of a stream seeded from the suite seed,
/// the group's own seed and `g`.
pub fn collect_instances(suite: &Suite) -> Result<Vec<SuiteInstance>> {
    let mut out = Vec::new();
    for (g, group) in suite.groups.iter().enumerate() {
        let mut rng = Rng::new(
            suite
                .seed
                .wrapping_add(group.spec.seed)
                .wrapping_add((g as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        for k in 0..group.count {
            let mut spec = group.spec.clone();
            spec.seed = rng.next_u64();
            let generated = generate(&spec)?;
            out.push(SuiteInstance {
                id: format!("g{g:02}-{}-{k:04}", spec.class.name()),
                class: spec.class.name().to_string(),
                seed: Some(spec.seed),
                instance: generated.instance,
            });
        }
    }
    for path in &suite.files {
        let instance = read_instance(path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let class = match instance.class_hint() {
            Some(c) => c.name().to_string(),
            None => recognize(&instance)
                .classes()
                .first()
                .map(|c| c.name().to_string())
                .unwrap_or_else(|| "unsupported".into()),
        };
        out.push(SuiteInstance {
            id: format!("file-{stem}"),
            class,
            seed: None,
            instance,
        });
    }
    Ok(out)
}

/// Runs every algorithm of the suite on one instance.
fn run_instance(suite: &Suite, si: &SuiteInstance) -> Result<(Vec<RunRow>, serde_json::Value)> {
    let inst = &si.instance;
    let info = recognize(inst);
    let opt = if suite.oracle && inst.len() <= suite.oracle_limit {
        Some(opt_bpc_exact(inst, suite.oracle_limit)?.opt)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for &algo in &suite.algorithms {
        let mut row = RunRow {
            instance_id: si.id.clone(),
            class: si.class.clone(),
            n: inst.len(),
            algorithm: algo.name().to_string(),
            bins: None,
            opt,
            ratio: None,
            checks: BoundChecks::default(),
            fallback_flags: Vec::new(),
            micros: None,
        };
        if !algo.applicable(&info) {
            row.fallback_flags.push("skipped".into());
            results.push(AlgorithmResult {
                algorithm: algo.name().into(),
                status: "skipped",
                bins: None,
                packing: None,
                error: None,
            });
            rows.push(row);
            continue;
        }
        let start = Instant::now();
        let outcome = bpc::run(inst, &info, algo, &suite.solver);
        let elapsed = start.elapsed().as_micros();
        if suite.timings {
            row.micros = Some(elapsed);
        }
        match outcome {
            Ok(p) => {
                let bins = p.bin_count();
                row.bins = Some(bins);
                row.ratio = opt.map(|o| if o == 0 { 1.0 } else { bins as f64 / o as f64 });
                row.fallback_flags = p.flags.clone();
                if !validate_packing(inst, &p, true).feasible {
                    row.fallback_flags.push("invalid-packing".into());
                }
                row.checks = bound_checks(inst, &info, algo, bins, opt, &suite.solver)?;
                results.push(AlgorithmResult {
                    algorithm: algo.name().into(),
                    status: "ok",
                    bins: Some(bins),
                    packing: Some(PackingFile::from_packing(inst, &p)),
                    error: None,
                });
            }
            Err(e) => {
                row.fallback_flags.push("error".into());
                results.push(AlgorithmResult {
                    algorithm: algo.name().into(),
                    status: "error",
                    bins: None,
                    packing: None,
                    error: Some(e.to_string()),
                });
            }
        }
        rows.push(row);
    }
    let report = InstanceReport {
        instance_id: &si.id,
        class: &si.class,
        seed: si.seed,
        opt,
        config: &suite.solver,
        instance: InstanceFile::from_instance(inst),
        results,
    };
    Ok((rows, serde_json::to_value(report)?))
}

/// The bound checks that apply to `algo`; see [`BoundChecks`].
pub fn bound_checks(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    algo: Algorithm,
    bins: usize,
    opt: Option<usize>,
    cfg: &SolverConfig,
) -> Result<BoundChecks> {
    let mut c = BoundChecks::default();
    match algo {
        Algorithm::ColorSets => {
            let classes = minimum_coloring(inst, info)?;
            c.lemma2_ok = Some(
                classes
                    .iter()
                    .all(|class| ffd_bounds_hold(inst, class, ffd_items(inst, class).bin_count())),
            );
            c.lemma4_ok = Some(color_sets_bound_holds(inst, classes.len(), bins));
        }
        Algorithm::MatchingPack => {
            if let Some(opt) = opt {
                let chi = minimum_coloring(inst, info)?.len();
                c.lemma8_ok = Some(matching_bound_holds(inst, opt, chi, bins));
            }
        }
        Algorithm::AbsBpb => c.lemma12_ok = Some(rounding_holds(inst, info, cfg)?),
        Algorithm::MultipartitePack => {
            if let (Some(opt), Some(parts)) = (opt, &info.multipartite) {
                let mut sum = 0;
                for part in parts {
                    sum += opt_bpc_exact(&inst.keep(part.iter().copied()), part.len())?.opt;
                }
                c.lemma16_ok = Some(sum == opt);
            }
        }
        _ => {}
    }
    Ok(c)
}

/// Rounds the assignment LP of the small items of one side of the
/// bipartition into a `color_sets` packing of the other items, and checks the
/// structure of the result: at most t fractional items, at least LP − t items
/// placed, the same t bins, and a feasible partial packing.
pub fn rounding_holds(
    inst: &ConflictInstance,
    info: &GraphClassInfo,
    cfg: &SolverConfig,
) -> Result<bool> {
    let Some((x, _)) = &info.bipartition else {
        return Ok(true);
    };
    let w: Vec<ItemId> = x.iter().copied().filter(|&v| is_small(inst, v)).collect();
    let rest = inst.remove(w.iter().copied());
    let big = bpc::color_sets(&rest, &info.restrict(&rest), cfg)?;
    let t = big.bin_count();
    let (rounded, sol) = round_assignment(inst, &big, &w)?;
    let placed = rounded.items().len() - big.items().len();
    Ok(rounded.bin_count() == t
        && sol.fractional_items.len() <= t
        && placed as f64 >= sol.objective - t as f64 - 1e-6
        && validate_packing(inst, &rounded, false).feasible)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
}

/// Runs `suite` and writes `report.csv`, `summary.csv` and
/// `instances/<id>.json` under `out`. Rows are sorted by (instance id,
/// algorithm) whatever the scheduling.
pub fn run_suite(suite: &Suite, out: &Path, opts: &RunOptions) -> Result<Vec<RunRow>> {
    let instances = collect_instances(suite)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let results: Vec<(Vec<RunRow>, serde_json::Value)> = pool.install(|| {
        instances
            .par_iter()
            .map(|si| run_instance(suite, si))
            .collect::<Result<_>>()
    })?;

    let inst_dir = out.join("instances");
    fs::create_dir_all(&inst_dir)?;
    let mut rows = Vec::new();
    for (si, (r, json)) in instances.iter().zip(results) {
        write_json(&inst_dir.join(format!("{}.json", si.id)), &json)?;
        rows.extend(r);
    }
    rows.sort_by(|a, b| (&a.instance_id, &a.algorithm).cmp(&(&b.instance_id, &b.algorithm)));
    write_report(&out.join("report.csv"), &rows)?;
    write_summary(&out.join("summary.csv"), &rows)?;
    Ok(rows)
}

pub fn write_report(path: &Path, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record(r.record()).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// One line of the summary table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub class: String,
    pub algorithm: String,
    pub runs: usize,
    /// Runs with an oracle value.
    pub with_opt: usize,
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
}

/// Per (class, algorithm) summary of the completed runs.
pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String), Vec<&RunRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.bins.is_some()) {
        groups
            .entry((r.class.clone(), r.algorithm.clone()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((class, algo), rs)| {
            let ratios: Vec<f64> = rs.iter().filter_map(|r| r.ratio).collect();
            let max = ratios.iter().copied().reduce(f64::max);
            let mean =
                (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
            SummaryRow {
                class,
                algorithm: algo,
                runs: rs.len(),
                with_opt: ratios.len(),
                max_ratio: max,
                mean_ratio: mean,
            }
        })
        .collect()
}

pub fn write_summary(path: &Path, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_error)?;
    let f = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for r in summarize(rows) {
        w.write_record([
            r.class,
            r.algorithm,
            r.runs.to_string(),
            r.with_opt.to_string(),
            f(r.max_ratio),
            f(r.mean_ratio),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Internal(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::GenClass;

    fn suite(groups: Vec<SuiteGroup>, algorithms: Vec<Algorithm>) -> Suite {
        Suite {
            name: "t".into(),
            seed: 5,
            algorithms,
            oracle: true,
            oracle_limit: 14,
            groups,
            files: Vec::new(),
            solver: SolverConfig::default(),
            timings: false,
        }
    }

    #[test]
    fn empty_suite_writes_headers() {
        let dir = tempfile::tempdir().unwrap();
        let rows = run_suite(
            &suite(vec![], vec![Algorithm::ColorSets]),
            dir.path(),
            &RunOptions::default(),
        )
        .unwrap();
        assert!(rows.is_empty());
        let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert_eq!(report.trim_end(), CSV_HEADER.join(","));
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.trim_end(), SUMMARY_HEADER.join(","));
    }

    #[test]
    fn one_bipartite_instance_two_rows() {
        let group = SuiteGroup {
            spec: GeneratorSpec::new(GenClass::Bipartite, 8, 0.4, 0),
            count: 1,
        };
        let s = suite(vec![group], vec![Algorithm::AbsBpb, Algorithm::ColorSets]);
        let dir = tempfile::tempdir().unwrap();
        let rows = run_suite(&s, dir.path(), &RunOptions { jobs: 1 }).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].algorithm, "abs_bpb");
        assert!(rows.iter().all(|r| r.ratio.is_some() && r.checks.all_ok()));
        assert!(dir
            .path()
            .join("instances")
            .join(format!("{}.json", rows[0].instance_id))
            .exists());
    }

    #[test]
    fn unsupported_pair_is_skipped() {
        let group = SuiteGroup {
            spec: GeneratorSpec::new(GenClass::Cluster, 6, 0.5, 0),
            count: 2,
        };
        let s = suite(
            vec![group],
            vec![
                Algorithm::SplitApprox,
                Algorithm::AbsBpb,
                Algorithm::MultipartitePack,
            ],
        );
        let dir = tempfile::tempdir().unwrap();
        let rows = run_suite(&s, dir.path(), &RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows.iter().filter(|r| r.bins.is_none()) {
            assert_eq!(r.fallback_flags, vec!["skipped".to_string()]);
        }
    }
}
