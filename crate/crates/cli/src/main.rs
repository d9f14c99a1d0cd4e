use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cbp_core::bpc::{self, Algorithm, SolverConfig};
use cbp_core::graphs::recognize;
use cbp_core::harness::generate::{max_3d_matching, reduction_packing, GeneratorSpec};
use cbp_core::harness::io::{read_json, write_json, PackingFile};
use cbp_core::harness::suite::summarize;
use cbp_core::harness::{generate, read_instance, run_suite, write_instance, RunOptions, Suite};
use cbp_core::model::{parse_fraction, validate_packing, ValidationReport};
use cbp_core::oracle::{opt_bpc_exact, DEFAULT_EXACT_LIMIT};
use cbp_core::Error;

/// Bin packing with conflict graphs.
#[derive(Parser)]
#[command(name = "cbp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pack an instance file and print the packing as JSON.
    Solve {
        /// color_sets, max_solve, matching_pack, approx_bpc, split_approx,
        /// abs_bpb, multipartite_pack or exact.
        #[arg(long)]
        algo: Algorithm,
        #[arg(long = "in")]
        input: PathBuf,
        /// Accuracy of the independent set subroutine, e.g. 1/6 or 0.1.
        #[arg(long)]
        eps: Option<String>,
        /// Also compute the optimum with the exact solver.
        #[arg(long)]
        oracle: bool,
        /// Write the packing here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate instance files from a generator spec.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark suite and write its reports.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Check a packing file against an instance file.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        packing: PathBuf,
    },
}

/// A generator spec file: the spec plus how many instances to draw.
#[derive(serde::Deserialize)]
struct SpecFile {
    #[serde(flatten)]
    spec: GeneratorSpec,
    #[serde(default)]
    count: Option<u64>,
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    packing: PackingFile,
    bin_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    opt: Option<usize>,
}

enum Failure {
    Core(Error),
    Infeasible,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).map_err(Error::from)?
    );
    Ok(())
}

fn solve(
    algo: Algorithm,
    input: &Path,
    eps: Option<&str>,
    oracle: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let inst = read_instance(input)?;
    let mut cfg = SolverConfig::default();
    if let Some(e) = eps {
        let r = parse_fraction(e)?;
        let v = *r.numer() as f64 / *r.denom() as f64;
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Parameter(format!("eps must lie in (0, 1), got {e}")).into());
        }
        cfg.eps = v;
    }
    let info = recognize(&inst);
    if !algo.applicable(&info) {
        return Err(Error::Capability(format!(
            "{algo} does not apply to this conflict graph (classes: {:?})",
            info.classes()
        ))
        .into());
    }
    let p = bpc::run(&inst, &info, algo, &cfg)?;
    let opt = if oracle {
        Some(opt_bpc_exact(&inst, DEFAULT_EXACT_LIMIT)?.opt)
    } else {
        None
    };
    let output = SolveOutput {
        packing: PackingFile::from_packing(&inst, &p),
        bin_count: p.bin_count(),
        opt,
    };
    match out {
        Some(path) => write_json(path, &output)?,
        None => print_json(&output)?,
    }
    Ok(())
}

fn generate_files(spec_path: &Path, out: &Path) -> Result<(), Failure> {
    let file: SpecFile = read_json(spec_path)?;
    std::fs::create_dir_all(out).map_err(Error::from)?;
    let count = file.count.unwrap_or(1);
    for k in 0..count {
        let mut spec = file.spec.clone();
        spec.seed = file.spec.seed.wrapping_add(k);
        let g = generate(&spec)?;
        let stem = format!("{}-{}", spec.class.name(), spec.seed);
        let path = out.join(format!("{stem}.json"));
        write_instance(&path, &g.instance)?;
        println!("{}", path.display());
        if let Some(info) = &g.reduction {
            let matching = max_3d_matching(&info.triples);
            if matching.len() == info.guess {
                let w = reduction_packing(info, &matching)?;
                let path = out.join(format!("{stem}.packing.json"));
                write_json(&path, &PackingFile::from_packing(&g.instance, &w))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn bench(suite_path: &Path, out: &Path, jobs: usize) -> Result<(), Failure> {
    let suite = Suite::load(suite_path)?;
    let rows = run_suite(&suite, out, &RunOptions { jobs })?;
    log::info!("{} rows written to {}", rows.len(), out.display());
    println!("class,algorithm,runs,with_opt,max_ratio,mean_ratio");
    let f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
    for r in summarize(&rows) {
        println!(
            "{},{},{},{},{},{}",
            r.class,
            r.algorithm,
            r.runs,
            r.with_opt,
            f(r.max_ratio),
            f(r.mean_ratio)
        );
    }
    Ok(())
}

fn verify(input: &Path, packing: &Path) -> Result<(), Failure> {
    let inst = read_instance(input)?;
    let file: PackingFile = read_json(packing)?;
    let report: ValidationReport = validate_packing(&inst, &file.to_packing(&inst), true);
    print_json(&report)?;
    if report.feasible {
        Ok(())
    } else {
        Err(Failure::Infeasible)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            algo,
            input,
            eps,
            oracle,
            out,
        } => solve(*algo, input, eps.as_deref(), *oracle, out.as_deref()),
        Command::Generate { spec, out } => generate_files(spec, out),
        Command::Bench { suite, out, jobs } => bench(suite, out, *jobs),
        Command::Verify { input, packing } => verify(input, packing),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible) => ExitCode::from(4),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parameter(_) | Error::Io(_) | Error::Json(_) => 2,
                Error::Capability(_) => 3,
                Error::Internal(_) => 1,
            })
        }
    }
}
