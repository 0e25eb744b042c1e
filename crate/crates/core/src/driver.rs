//! Drives a backend through the two compilation strategies.
//!
//! Optimal: starting from a lower bound, probe increasing stage counts until
//! the model becomes satisfiable; every smaller count holds an unsatisfiable
//! certificate, so the first solution is depth-minimal. Hybrid: repeatedly
//! solve a pinned two-stage step model maximizing the number of gates
//! executed next (bounded above by the maximum matching of the remaining
//! gates, decremented until satisfiable), peel those gates off, and finish
//! the small residue with the optimal procedure pinned to the current state.
//!
//! Solutions returned by a backend are never trusted: the driver re-evaluates
//! every assertion by substitution before using them.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::arch::ArchSpec;
use crate::backend::{BackendError, BackendKind, RawOutcome, SolverBackend};
use crate::circuit::{max_matching_bound, Circuit, Gate};
use crate::encode::{
    build_model, encode_at_least_gates, pin_initial_state, BuildOpts, EncodeError, QubitState,
};
use crate::model::{EvalFailure, Model};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("circuit error: {0}")]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error("solver timed out probing {stages} stages after {elapsed:?}")]
    Timeout { stages: usize, elapsed: Duration },
    #[error("stage count exceeded the gate count ({limit}); spatial bounds too small")]
    BoundsExhausted { limit: usize },
    #[error("backend returned a model that fails re-evaluation: {0:?}")]
    SolutionRejected(EvalFailure),
    #[error("peeling deadlock: no gate executable from the current state")]
    Deadlock,
}

/// A full per-qubit per-stage solution plus gate scheduling.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub n: u32,
    pub stages: usize,
    /// Indexed `[qubit][stage]`.
    pub states: Vec<Vec<QubitState>>,
    /// Stage of each gate of the circuit the assignment was produced for.
    pub gate_stage: Vec<u32>,
}

impl Assignment {
    pub fn state_at(&self, stage: usize) -> Vec<QubitState> {
        self.states.iter().map(|per_q| per_q[stage]).collect()
    }

    pub fn gates_at(&self, stage: usize) -> Vec<u32> {
        (0..self.gate_stage.len() as u32)
            .filter(|&j| self.gate_stage[j as usize] == stage as u32)
            .collect()
    }

    /// Re-evaluates the standard model for `c` at this stage count.
    pub fn revalidate(&self, c: &Circuit, spec: &ArchSpec) -> Result<(), DriverError> {
        let m = build_model(c, spec, self.stages, &BuildOpts::standard(spec))?;
        m.eval(&self.to_ints(&m)).map_err(DriverError::SolutionRejected)
    }

    fn to_ints(&self, m: &Model) -> Vec<i64> {
        let v = &m.vars;
        let mut ints = vec![0i64; m.ints.len()];
        for q in 0..self.n {
            for s in 0..self.stages {
                let st = self.states[q as usize][s];
                ints[v.x(q, s).0 as usize] = st.x as i64;
                ints[v.y(q, s).0 as usize] = st.y as i64;
                ints[v.a(q, s).0 as usize] = st.a as i64;
                ints[v.c(q, s).0 as usize] = st.c as i64;
                ints[v.r(q, s).0 as usize] = st.r as i64;
            }
        }
        for (j, &t) in self.gate_stage.iter().enumerate() {
            ints[v.t(j as u32).0 as usize] = t as i64;
        }
        ints
    }
}

/// Values of one solved model.
#[derive(Debug, Clone)]
pub struct ModelSolution {
    /// Indexed `[qubit][stage]`.
    pub states: Vec<Vec<QubitState>>,
    /// Stage per model gate (may hold the virtual index in step models).
    pub gate_stages: Vec<i64>,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Sat(ModelSolution),
    Unsat,
    Timeout(Duration),
}

/// One stage-count probe of the optimal loop.
#[derive(Debug, Clone)]
pub struct Probe {
    pub stages: usize,
    pub verdict: &'static str,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct OptimalResult {
    pub assignment: Assignment,
    pub s_opt: usize,
    pub lower_bound: usize,
    pub probes: Vec<Probe>,
}

#[derive(Debug, Clone)]
pub struct PeelRecord {
    pub matching_bound: usize,
    pub executed: Vec<u32>,
    /// Gate-free reorganization stages inserted before the executing stage
    /// (0 for a plain two-stage step).
    pub extra_stages: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct HybridResult {
    pub assignment: Assignment,
    pub peels: Vec<PeelRecord>,
    /// Stages inserted to unjam the machine: gate-free windows parking all
    /// atoms back into stationary traps when no gate was executable.
    pub recoveries: Vec<usize>,
    pub residual_probes: Vec<Probe>,
    pub switch_threshold: usize,
}

#[derive(Debug, Clone)]
pub struct DriverConfig {
    pub backend: BackendKind,
    /// Per-query budget in the optimal loop.
    pub check_timeout: Duration,
    /// Per-query budget for peel steps.
    pub peel_timeout: Duration,
    /// Whole-job budget.
    pub global_timeout: Option<Duration>,
    pub switch_frac: f64,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            backend: BackendKind::Native,
            check_timeout: Duration::from_secs(600),
            peel_timeout: Duration::from_secs(120),
            global_timeout: None,
            switch_frac: 0.05,
        }
    }
}

struct Budget {
    started: Instant,
    global: Option<Duration>,
}

impl Budget {
    fn new(global: Option<Duration>) -> Budget {
        Budget { started: Instant::now(), global }
    }

    fn slice(&self, per_query: Duration, stages: usize) -> Result<Duration, DriverError> {
        match self.global {
            None => Ok(per_query),
            Some(g) => {
                let used = self.started.elapsed();
                if used >= g {
                    return Err(DriverError::Timeout { stages, elapsed: used });
                }
                Ok(per_query.min(g - used))
            }
        }
    }
}

/// Checks one model, re-verifying sat answers by substitution.
pub fn check(
    m: &Model,
    timeout: Duration,
    backend: &dyn SolverBackend,
) -> Result<SolveOutcome, DriverError> {
    let started = Instant::now();
    match backend.check(m, timeout)? {
        RawOutcome::Unsat => Ok(SolveOutcome::Unsat),
        RawOutcome::Unknown => Ok(SolveOutcome::Timeout(started.elapsed())),
        RawOutcome::Sat { ints, .. } => {
            m.eval(&ints).map_err(DriverError::SolutionRejected)?;
            Ok(SolveOutcome::Sat(extract(m, &ints)))
        }
    }
}

fn extract(m: &Model, ints: &[i64]) -> ModelSolution {
    let v = &m.vars;
    let states = (0..v.n)
        .map(|q| {
            (0..v.s)
                .map(|s| QubitState {
                    x: ints[v.x(q, s).0 as usize] as u32,
                    y: ints[v.y(q, s).0 as usize] as u32,
                    a: ints[v.a(q, s).0 as usize] as u32,
                    c: ints[v.c(q, s).0 as usize] as u32,
                    r: ints[v.r(q, s).0 as usize] as u32,
                })
                .collect()
        })
        .collect();
    let gate_stages = (0..v.g).map(|j| ints[v.t(j).0 as usize]).collect();
    ModelSolution { states, gate_stages }
}

/// Stage-count lower bound: dependency depth, and gates over the largest
/// per-stage capacity (maximum matching, and ⌊N/2⌋ pairs).
pub fn stage_lower_bound(c: &Circuit) -> usize {
    let g = c.num_gates() as usize;
    if g == 0 {
        return 1;
    }
    let depth = c.dependency_depth().expect("validated circuit");
    let matching = max_matching_bound(c.num_qubits(), c.gates()).max(1);
    let cap = (c.num_qubits() as usize / 2).max(1);
    depth.max(g.div_ceil(matching)).max(g.div_ceil(cap)).max(1)
}

/// Depth-minimal compilation (§ optimal loop): linear scan over stage counts
/// starting at the lower bound, keeping an unsat certificate per probe.
pub fn solve_optimal(
    c: &Circuit,
    spec: &ArchSpec,
    cfg: &DriverConfig,
) -> Result<OptimalResult, DriverError> {
    let backend = cfg.backend.instantiate();
    let budget = Budget::new(cfg.global_timeout);
    let lb = stage_lower_bound(c);
    let limit = (c.num_gates() as usize).max(lb);
    let mut probes = Vec::new();
    for stages in lb..=limit {
        let m = build_model(c, spec, stages, &BuildOpts::standard(spec))?;
        let slice = budget.slice(cfg.check_timeout, stages)?;
        let started = Instant::now();
        match check(&m, slice, backend.as_ref())? {
            SolveOutcome::Sat(sol) => {
                probes.push(Probe { stages, verdict: "sat", wall: started.elapsed() });
                let assignment = Assignment {
                    n: c.num_qubits(),
                    stages,
                    states: sol.states,
                    gate_stage: sol.gate_stages.iter().map(|&t| t as u32).collect(),
                };
                return Ok(OptimalResult { assignment, s_opt: stages, lower_bound: lb, probes });
            }
            SolveOutcome::Unsat => {
                probes.push(Probe { stages, verdict: "unsat", wall: started.elapsed() });
            }
            SolveOutcome::Timeout(elapsed) => {
                return Err(DriverError::Timeout { stages, elapsed });
            }
        }
    }
    Err(DriverError::BoundsExhausted { limit })
}

/// Greedy peel state: gates still to execute and the machine state they
/// start from.
#[derive(Debug, Clone)]
pub struct PeelState {
    pub remaining: Vec<u32>,
    pub current: Vec<QubitState>,
}

/// Builds the residual circuit over `remaining` (original gate ids kept
/// aside in the returned map).
fn residual_circuit(c: &Circuit, remaining: &[u32]) -> Result<(Circuit, Vec<u32>), DriverError> {
    let pairs: Vec<(u32, u32)> = remaining
        .iter()
        .map(|&j| {
            let g = c.gate(j);
            (g.q_lo, g.q_hi)
        })
        .collect();
    let map: Vec<u32> = remaining.to_vec();
    let deps = if c.is_commutable() {
        None
    } else {
        let index_of = |j: u32| map.iter().position(|&x| x == j).map(|p| p as u32);
        Some(
            c.dependency_pairs()
                .into_iter()
                .filter_map(|(a, b)| Some((index_of(a)?, index_of(b)?)))
                .collect::<Vec<_>>(),
        )
    };
    let rc = Circuit::new(c.num_qubits(), &pairs, c.is_commutable(), deps)?;
    Ok((rc, map))
}

/// One peel window: `window` stages pinned to the current state, gates only
/// in the final stage, earlier stages free for reorganization (transfers and
/// moves). Returns executed original gate ids and the per-stage states after
/// the pin (stages `1..window`).
fn peel_window(
    st: &PeelState,
    c: &Circuit,
    spec: &ArchSpec,
    cfg: &DriverConfig,
    backend: &dyn SolverBackend,
    window: usize,
) -> Result<(Vec<u32>, Vec<Vec<QubitState>>, PeelRecord), DriverError> {
    assert!(!st.remaining.is_empty(), "peeling needs remaining gates");
    let (rc, map) = residual_circuit(c, &st.remaining)?;
    let gates: Vec<Gate> = rc.gates().to_vec();
    let bound = max_matching_bound(rc.num_qubits(), &gates).max(1);
    let started = Instant::now();
    let exec_stage = window - 1;
    for target in (1..=bound).rev() {
        let mut m = build_model(
            &rc,
            spec,
            window,
            &BuildOpts {
                allow_transfer: spec.transfers_allowed,
                gate_stage_lo: exec_stage,
                defer: true,
            },
        )?;
        pin_initial_state(&mut m, &st.current)?;
        encode_at_least_gates(&mut m, target, exec_stage, window)?;
        let slice = Budget::new(cfg.global_timeout).slice(cfg.peel_timeout, window)?;
        match check(&m, slice, backend)? {
            SolveOutcome::Sat(sol) => {
                let executed: Vec<u32> = sol
                    .gate_stages
                    .iter()
                    .enumerate()
                    .filter(|&(_, &t)| t == exec_stage as i64)
                    .map(|(idx, _)| map[idx])
                    .collect();
                debug_assert!(executed.len() >= target);
                let states: Vec<Vec<QubitState>> = (1..window)
                    .map(|s| sol.states.iter().map(|per_q| per_q[s]).collect())
                    .collect();
                let record = PeelRecord {
                    matching_bound: bound,
                    executed: executed.clone(),
                    extra_stages: window - 2,
                    wall: started.elapsed(),
                };
                return Ok((executed, states, record));
            }
            SolveOutcome::Unsat => continue,
            SolveOutcome::Timeout(elapsed) => {
                return Err(DriverError::Timeout { stages: window, elapsed });
            }
        }
    }
    Err(DriverError::Deadlock)
}

/// One peel: a two-stage model pinned to the current state, maximizing the
/// gates executed at the next stage by decrementing the matching bound until
/// satisfiable. Returns executed original gate ids and the new state.
pub fn peel_step(
    st: &PeelState,
    c: &Circuit,
    spec: &ArchSpec,
    cfg: &DriverConfig,
    backend: &dyn SolverBackend,
) -> Result<(Vec<u32>, Vec<QubitState>, PeelRecord), DriverError> {
    let (executed, mut states, record) = peel_window(st, c, spec, cfg, backend, 2)?;
    Ok((executed, states.pop().expect("one state"), record))
}

/// Widest window tried before declaring a routing deadlock. Line order and
/// stacking can block every remaining gate for one move; a drop, re-pick and
/// move dance needs up to three gate-free stages.
const MAX_PEEL_WINDOW: usize = 5;

/// Seed step of the hybrid: place the qubits and execute as many gates as
/// possible in stage 0 (no pinning yet).
fn seed_step(
    c: &Circuit,
    spec: &ArchSpec,
    cfg: &DriverConfig,
    backend: &dyn SolverBackend,
) -> Result<(Vec<u32>, Vec<QubitState>, PeelRecord), DriverError> {
    let gates: Vec<Gate> = c.gates().to_vec();
    let bound = max_matching_bound(c.num_qubits(), &gates).max(1);
    let started = Instant::now();
    for target in (1..=bound).rev() {
        let mut m = build_model(
            c,
            spec,
            1,
            &BuildOpts { allow_transfer: spec.transfers_allowed, gate_stage_lo: 0, defer: true },
        )?;
        encode_at_least_gates(&mut m, target, 0, 1)?;
        let slice = Budget::new(cfg.global_timeout).slice(cfg.peel_timeout, 1)?;
        match check(&m, slice, backend)? {
            SolveOutcome::Sat(sol) => {
                let executed: Vec<u32> = sol
                    .gate_stages
                    .iter()
                    .enumerate()
                    .filter(|&(_, &t)| t == 0)
                    .map(|(idx, _)| idx as u32)
                    .collect();
                let state: Vec<QubitState> = sol.states.iter().map(|per_q| per_q[0]).collect();
                let record = PeelRecord {
                    matching_bound: bound,
                    executed: executed.clone(),
                    extra_stages: 0,
                    wall: started.elapsed(),
                };
                return Ok((executed, state, record));
            }
            SolveOutcome::Unsat => continue,
            SolveOutcome::Timeout(elapsed) => {
                return Err(DriverError::Timeout { stages: 1, elapsed });
            }
        }
    }
    Err(DriverError::Deadlock)
}

/// Optimal solve of the residual circuit with stage 0 pinned; gates run in
/// stages `1..=k` for the smallest feasible `k`.
fn residual_optimal(
    rc: &Circuit,
    pinned: &[QubitState],
    spec: &ArchSpec,
    cfg: &DriverConfig,
    backend: &dyn SolverBackend,
    probes: &mut Vec<Probe>,
) -> Result<ModelSolution, DriverError> {
    let lb = stage_lower_bound(rc);
    // Starting from a pinned mid-program state may need a few gate-free
    // reorganization stages on top of the gate count.
    let limit = (rc.num_gates() as usize).max(lb) + 4;
    for k in lb..=limit {
        let mut m = build_model(
            rc,
            spec,
            1 + k,
            &BuildOpts { allow_transfer: spec.transfers_allowed, gate_stage_lo: 1, defer: false },
        )?;
        pin_initial_state(&mut m, pinned)?;
        let slice = Budget::new(cfg.global_timeout).slice(cfg.check_timeout, 1 + k)?;
        let started = Instant::now();
        match check(&m, slice, backend)? {
            SolveOutcome::Sat(sol) => {
                probes.push(Probe { stages: k, verdict: "sat", wall: started.elapsed() });
                return Ok(sol);
            }
            SolveOutcome::Unsat => {
                probes.push(Probe { stages: k, verdict: "unsat", wall: started.elapsed() });
            }
            SolveOutcome::Timeout(elapsed) => {
                return Err(DriverError::Timeout { stages: 1 + k, elapsed });
            }
        }
    }
    Err(DriverError::BoundsExhausted { limit })
}

/// Hybrid compilation: peel until at most `ceil(switch_frac · G)` gates
/// remain, then finish optimally from the pinned state and stitch the
/// fragments into one assignment covering every gate exactly once.
pub fn solve_hybrid(
    c: &Circuit,
    spec: &ArchSpec,
    cfg: &DriverConfig,
) -> Result<HybridResult, DriverError> {
    let backend = cfg.backend.instantiate();
    let g = c.num_gates() as usize;
    let threshold = ((cfg.switch_frac * g as f64).ceil() as usize).max(1);

    if g <= threshold {
        // Degenerate switchover: the whole circuit is the residue.
        let opt = solve_optimal(c, spec, cfg)?;
        return Ok(HybridResult {
            assignment: opt.assignment,
            peels: Vec::new(),
            recoveries: Vec::new(),
            residual_probes: opt.probes,
            switch_threshold: threshold,
        });
    }

    let mut peels = Vec::new();
    let (executed, state, record) = seed_step(c, spec, cfg, backend.as_ref())?;
    peels.push(record);
    let mut stage_states: Vec<Vec<QubitState>> = vec![state.clone()];
    let mut gate_stage: Vec<Option<u32>> = vec![None; g];
    for &j in &executed {
        gate_stage[j as usize] = Some(0);
    }
    let mut st = PeelState {
        remaining: (0..g as u32).filter(|&j| gate_stage[j as usize].is_none()).collect(),
        current: state,
    };

    let mut recoveries = Vec::new();
    while st.remaining.len() > threshold {
        let mut outcome = Err(DriverError::Deadlock);
        for window in 2..=MAX_PEEL_WINDOW {
            outcome = peel_window(&st, c, spec, cfg, backend.as_ref(), window);
            match &outcome {
                Err(DriverError::Deadlock) => continue,
                _ => break,
            }
        }
        let (executed, states, record) = outcome?;
        assert!(!executed.is_empty(), "each peel executes at least one gate");
        for k in 0..record.extra_stages {
            recoveries.push(stage_states.len() + k);
        }
        peels.push(record);
        let exec_stage = (stage_states.len() + states.len() - 1) as u32;
        for &j in &executed {
            debug_assert!(gate_stage[j as usize].is_none());
            gate_stage[j as usize] = Some(exec_stage);
        }
        stage_states.extend(states.iter().cloned());
        st.remaining.retain(|j| !executed.contains(j));
        st.current = states.last().expect("window has states").clone();
    }

    let mut residual_probes = Vec::new();
    if !st.remaining.is_empty() {
        let (rc, map) = residual_circuit(c, &st.remaining)?;
        let sol = residual_optimal(
            &rc,
            &st.current,
            spec,
            cfg,
            backend.as_ref(),
            &mut residual_probes,
        )?;
        let offset = stage_states.len() as u32;
        for (idx, &t) in sol.gate_stages.iter().enumerate() {
            // Model stages 1..=k map to global stages offset..offset+k-1.
            gate_stage[map[idx] as usize] = Some(offset + t as u32 - 1);
        }
        for s in 1..sol.states[0].len() {
            stage_states.push(sol.states.iter().map(|per_q| per_q[s]).collect());
        }
    }

    let stages = stage_states.len();
    let states: Vec<Vec<QubitState>> = (0..c.num_qubits() as usize)
        .map(|q| (0..stages).map(|s| stage_states[s][q]).collect())
        .collect();
    let assignment = Assignment {
        n: c.num_qubits(),
        stages,
        states,
        gate_stage: gate_stage
            .into_iter()
            .map(|t| t.expect("every gate scheduled"))
            .collect(),
    };
    // The stitched whole must satisfy the standard model for the full
    // circuit; any failure is a driver or encoder defect.
    assignment.revalidate(c, spec)?;

    Ok(HybridResult { assignment, peels, recoveries, residual_probes, switch_threshold: threshold })
}
