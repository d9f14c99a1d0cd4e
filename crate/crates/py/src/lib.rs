//! Python bindings. Instances are passed as a list of sizes (fraction strings
//! or floats) plus a list of conflict pairs over item indices.

use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cbp_core::bpc::{self, Algorithm, SolverConfig};
use cbp_core::graphs::recognize;
use cbp_core::harness::{generate as generate_instance, GeneratorSpec, InstanceFile, PackingFile};
use cbp_core::model::{parse_fraction, validate_packing, ConflictInstance, Packing};
use cbp_core::oracle::{opt_bpc_exact, DEFAULT_EXACT_LIMIT};
use cbp_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parameter(m) => PyValueError::new_err(m),
        Error::Capability(m) => PyNotImplementedError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn build(sizes: &[Bound<'_, PyAny>], edges: Vec<(usize, usize)>) -> PyResult<ConflictInstance> {
    let sizes = sizes
        .iter()
        .map(|s| parse_fraction(&s.str()?.to_cow()?).map_err(to_py))
        .collect::<PyResult<Vec<_>>>()?;
    ConflictInstance::new(&sizes, &edges).map_err(to_py)
}

/// Packs the items and returns the bins as lists of item indices.
#[pyfunction]
#[pyo3(signature = (sizes, edges, algorithm = "color_sets", eps = None))]
fn solve(
    sizes: Vec<Bound<'_, PyAny>>,
    edges: Vec<(usize, usize)>,
    algorithm: &str,
    eps: Option<f64>,
) -> PyResult<Vec<Vec<usize>>> {
    let inst = build(&sizes, edges)?;
    let algo: Algorithm = algorithm.parse().map_err(to_py)?;
    let mut cfg = SolverConfig::default();
    if let Some(e) = eps {
        if !(e > 0.0 && e < 1.0) {
            return Err(PyValueError::new_err(format!(
                "eps must lie in (0, 1), got {e}"
            )));
        }
        cfg.eps = e;
    }
    let p = bpc::solve(&inst, algo, &cfg).map_err(to_py)?;
    Ok(p.normalized().bins)
}

/// Optimal number of bins, by exhaustive search (at most 18 items).
#[pyfunction]
fn optimum(sizes: Vec<Bound<'_, PyAny>>, edges: Vec<(usize, usize)>) -> PyResult<usize> {
    let inst = build(&sizes, edges)?;
    Ok(opt_bpc_exact(&inst, DEFAULT_EXACT_LIMIT)
        .map_err(to_py)?
        .opt)
}

/// Whether `bins` is a feasible packing covering every item.
#[pyfunction]
fn verify(
    sizes: Vec<Bound<'_, PyAny>>,
    edges: Vec<(usize, usize)>,
    bins: Vec<Vec<usize>>,
) -> PyResult<bool> {
    let inst = build(&sizes, edges)?;
    Ok(validate_packing(&inst, &Packing::new(bins, "python"), true).feasible)
}

/// Names of the recognised graph classes of the conflict graph.
#[pyfunction]
fn graph_classes(
    sizes: Vec<Bound<'_, PyAny>>,
    edges: Vec<(usize, usize)>,
) -> PyResult<Vec<String>> {
    let inst = build(&sizes, edges)?;
    Ok(recognize(&inst)
        .classes()
        .iter()
        .map(|c| c.name().to_string())
        .collect())
}

/// Generates an instance from a generator spec given as JSON and returns
/// the instance file as JSON.
#[pyfunction]
fn generate(spec_json: &str) -> PyResult<String> {
    let spec: GeneratorSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let g = generate_instance(&spec).map_err(to_py)?;
    serde_json::to_string(&InstanceFile::from_instance(&g.instance))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Solves an instance file given as JSON; returns the packing file as JSON.
#[pyfunction]
#[pyo3(signature = (instance_json, algorithm = "color_sets"))]
fn solve_json(instance_json: &str, algorithm: &str) -> PyResult<String> {
    let file: InstanceFile =
        serde_json::from_str(instance_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let inst = file.to_instance().map_err(to_py)?;
    let algo: Algorithm = algorithm.parse().map_err(to_py)?;
    let p = bpc::solve(&inst, algo, &SolverConfig::default()).map_err(to_py)?;
    serde_json::to_string(&PackingFile::from_packing(&inst, &p))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn cbp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(optimum, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(graph_classes, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_json, m)?)?;
    m.add(
        "ALGORITHMS",
        Algorithm::ALL.iter().map(|a| a.name()).collect::<Vec<_>>(),
    )?;
    Ok(())
}
