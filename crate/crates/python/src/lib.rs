//! Python bindings: compile, verify and score circuits from Python using
//! the same JSON documents the CLI speaks.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dpqa_core::arch::ArchSpec;
use dpqa_core::circuit::{generate_graph_circuit, Circuit};
use dpqa_core::codegen::{lower, Program};
use dpqa_core::driver::{solve_hybrid, solve_optimal, DriverConfig};
use dpqa_core::fidelity::{estimate, LaserMode};

fn arch_from(arch_json: Option<&str>) -> PyResult<ArchSpec> {
    match arch_json {
        None => Ok(ArchSpec::default()),
        Some(text) => ArchSpec::from_json(text).map_err(|e| PyValueError::new_err(e.to_string())),
    }
}

/// The built-in machine description as JSON.
#[pyfunction]
fn default_arch() -> String {
    ArchSpec::default().to_json()
}

/// A random simple degree-regular graph circuit as JSON.
#[pyfunction]
#[pyo3(signature = (n, degree=3, seed=0))]
fn generate_circuit(n: u32, degree: u32, seed: u64) -> PyResult<String> {
    generate_graph_circuit(n, degree, seed)
        .map(|c| c.to_json())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Compiles a circuit; returns (program_json, stage_count).
#[pyfunction]
#[pyo3(signature = (circuit_json, arch_json=None, mode="auto", switch_frac=0.05))]
fn compile(
    circuit_json: &str,
    arch_json: Option<&str>,
    mode: &str,
    switch_frac: f64,
) -> PyResult<(String, usize)> {
    let circuit =
        Circuit::from_json(circuit_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let arch = arch_from(arch_json)?;
    let cfg = DriverConfig { switch_frac, ..DriverConfig::default() };
    let pick_optimal = match mode {
        "optimal" => true,
        "hybrid" => false,
        "auto" => circuit.num_gates() <= 40,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    let assignment = if pick_optimal {
        solve_optimal(&circuit, &arch, &cfg)
            .map(|r| r.assignment)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?
    } else {
        solve_hybrid(&circuit, &arch, &cfg)
            .map(|r| r.assignment)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?
    };
    let stages = assignment.stages;
    let program = lower(&assignment, &circuit, &arch)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((program.to_json(), stages))
}

/// Checks a program against the hardware rules; returns violations as JSON
/// strings (empty list = clean).
#[pyfunction]
#[pyo3(signature = (program_json, circuit_json, arch_json=None))]
fn verify(
    program_json: &str,
    circuit_json: &str,
    arch_json: Option<&str>,
) -> PyResult<Vec<String>> {
    let program =
        Program::from_json(program_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let circuit =
        Circuit::from_json(circuit_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let arch = arch_from(arch_json)?;
    let violations = dpqa_core::verifier::verify(&program, &circuit, &arch)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(violations.iter().map(|v| serde_json::to_string(v).unwrap()).collect())
}

/// Timing and infidelity report for a program, as JSON.
#[pyfunction]
#[pyo3(signature = (program_json, circuit_json, arch_json=None, laser="local"))]
fn fidelity(
    program_json: &str,
    circuit_json: &str,
    arch_json: Option<&str>,
    laser: &str,
) -> PyResult<String> {
    let program =
        Program::from_json(program_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let circuit =
        Circuit::from_json(circuit_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let arch = arch_from(arch_json)?;
    let mode = LaserMode::parse(laser).map_err(PyValueError::new_err)?;
    let report = estimate(&program, &circuit, &arch, mode)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(serde_json::to_string_pretty(&report).unwrap())
}

#[pymodule]
fn dpqa_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(default_arch, m)?)?;
    m.add_function(wrap_pyfunction!(generate_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    Ok(())
}
