//! Timing and infidelity estimates for a program: gate infidelity from the
//! per-gate two-qubit fidelity, movement-induced idle decoherence from the
//! movement-time law, and their ratio.

use serde::Serialize;
use thiserror::Error;

use crate::arch::{ArchSpec, PhysicalParams};
use crate::circuit::Circuit;
use crate::codegen::Program;
use crate::verifier::{simulate_positions, MalformedProgram};

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("movement distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error(transparent)]
    Malformed(#[from] MalformedProgram),
}

/// Which qubits the entangling laser exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaserMode {
    /// Plane-wide illumination: every trapped qubit accrues gate error at
    /// every stage (effective gate count N·S/2).
    Global,
    /// Individually addressable beams: only gate participants count.
    Local,
}

impl LaserMode {
    pub fn parse(text: &str) -> Result<LaserMode, String> {
        match text {
            "global" => Ok(LaserMode::Global),
            "local" => Ok(LaserMode::Local),
            other => Err(format!("unknown laser mode `{other}` (expected global|local)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityReport {
    pub n_qubits: u32,
    pub n_gates: u32,
    pub n_stages: u32,
    pub laser: String,
    /// Exposure counted as two-qubit gates (equals `n_gates` in local mode).
    pub effective_gates: f64,
    pub gate_fidelity_total: f64,
    pub gate_infidelity: f64,
    pub total_move_us: f64,
    pub total_transfer_us: f64,
    pub idle_us: Vec<f64>,
    /// Mean idle time relative to the coherence time.
    pub idle_fraction: f64,
    /// `1 - exp(-Σ_q idle_q / T_coh)` with exponential dephasing.
    pub movement_infidelity: f64,
    /// Gate over movement infidelity; absent when nothing moved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Whether the site pitch came from the built-in derivation rather
    /// than an explicit setting.
    pub pitch_um: f64,
    pub pitch_derived: bool,
}

/// Movement time for a travel distance `d_um`: `t0 * sqrt(d / d0)`, the
/// constant-heating profile.
pub fn move_time(d_um: f64, phys: &PhysicalParams) -> Result<f64, FidelityError> {
    if d_um < 0.0 {
        return Err(FidelityError::NegativeDistance(d_um));
    }
    Ok(phys.t0_us * (d_um / phys.d0_um).sqrt())
}

/// Estimates the infidelity decomposition of a verifier-clean program.
pub fn estimate(
    p: &Program,
    c: &Circuit,
    spec: &ArchSpec,
    laser: LaserMode,
) -> Result<FidelityReport, FidelityError> {
    let trace = simulate_positions(p, spec)?;
    let n_gates = p.executed_gates().len() as u32;
    let n_stages = p.n_stages;
    let effective_gates = match laser {
        LaserMode::Local => n_gates as f64,
        // All trapped qubits are illuminated at every stage; two shares make
        // a gate's worth of exposure.
        LaserMode::Global => p.n_qubits as f64 * n_stages as f64 / 2.0,
    };
    let f2q = spec.phys.f2q;
    let gate_fidelity_total = f2q.powf(effective_gates);
    let gate_infidelity = 1.0 - gate_fidelity_total;

    let t_coh_us = spec.phys.t_coh_s * 1e6;
    let idle_sum: f64 = trace.idle_us.iter().sum();
    let movement_infidelity = 1.0 - (-idle_sum / t_coh_us).exp();
    let mean_idle = if p.n_qubits > 0 {
        idle_sum / p.n_qubits as f64
    } else {
        0.0
    };
    let ratio = (movement_infidelity > 0.0).then(|| gate_infidelity / movement_infidelity);

    let derived_pitch = crate::arch::derive_pitch(&spec.phys, spec.r_stk, spec.c_stk);
    let _ = c;
    Ok(FidelityReport {
        n_qubits: p.n_qubits,
        n_gates,
        n_stages,
        laser: match laser {
            LaserMode::Global => "global".into(),
            LaserMode::Local => "local".into(),
        },
        effective_gates,
        gate_fidelity_total,
        gate_infidelity,
        total_move_us: trace.total_move_us,
        total_transfer_us: trace.total_transfer_us,
        idle_us: trace.idle_us,
        idle_fraction: mean_idle / t_coh_us,
        movement_infidelity,
        ratio,
        pitch_um: spec.site_pitch_um,
        pitch_derived: (spec.site_pitch_um - derived_pitch).abs() < 1e-9,
    })
}
