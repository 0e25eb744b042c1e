//! Independent physics-rule checker.
//!
//! Interprets a program purely in continuous coordinates — no encoder logic,
//! no site indices — and checks every hardware rule: trap occupancy,
//! stationary SLM atoms, rigid non-crossing AOD lines with minimum
//! separation, blockade and stray-interaction distances at every laser
//! pulse, aligned transfers, gate coverage and dependency order. Disagreement
//! between this module and the compiler is a release blocker, so nothing
//! here may be derived from the encoder's bookkeeping.

use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::arch::{ArchSpec, SITE_CLEARANCE};
use crate::circuit::Circuit;
use crate::codegen::{Instruction, Program};

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    TrapOverfilled,
    SlmMoved,
    LineTornApart,
    LineCrossing,
    MinSeparation,
    BlockadeUnsatisfied,
    InteractionExactness,
    StrayInteraction,
    TransferIllegal,
    GateCoverage,
    DependencyOrder,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub rule: Rule,
    /// Instruction index and kind, e.g. `#4 move` or `#7 rydberg(stage 2)`.
    pub at: String,
    pub qubits: Vec<u32>,
    pub lines: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_um: Option<f64>,
}

/// Structural defects, reported distinctly from physics violations.
#[derive(Debug, Error)]
pub enum MalformedProgram {
    #[error("program has no instructions")]
    Empty,
    #[error("instruction #{0}: program must start with exactly one init")]
    MisplacedInit(usize),
    #[error("instruction #{index}: qubit {qubit} initialized without a matching trap/line")]
    BadInit { index: usize, qubit: u32 },
    #[error("instruction #{index}: unknown line {line}")]
    UnknownLine { index: usize, line: u32 },
    #[error("instruction #{index}: line {line} is already active")]
    AlreadyActive { index: usize, line: u32 },
    #[error("instruction #{index}: move lists line {line} twice")]
    DuplicateLine { index: usize, line: u32 },
    #[error("instruction #{index}: duration {got} us below the movement-time law ({want} us)")]
    BadDuration { index: usize, got: f64, want: f64 },
    #[error("instruction #{index}: rydberg stage {got}, expected {want}")]
    StageOrder { index: usize, got: u32, want: u32 },
    #[error("instruction #{index}: unknown qubit {qubit}")]
    UnknownQubit { index: usize, qubit: u32 },
    #[error("instruction #{index}: unknown gate {gate}")]
    UnknownGate { index: usize, gate: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Binding {
    Slm(usize),
    Aod { col: u32, row: u32 },
}

/// Deterministic trace of a structurally sound program.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Qubit positions at each laser pulse (µm); a program without pulses
    /// has one snapshot of the initial placement.
    pub stage_positions: Vec<Vec<(f64, f64)>>,
    /// Idle time per qubit: total move plus transfer duration.
    pub idle_us: Vec<f64>,
    pub total_move_us: f64,
    pub total_transfer_us: f64,
    /// Stage at which each gate id appeared in a rydberg ledger.
    pub gate_stage: BTreeMap<u32, u32>,
}

struct Sim<'a> {
    spec: &'a ArchSpec,
    traps: Vec<(f64, f64)>,
    occupant: Vec<Option<u32>>,
    cols: BTreeMap<u32, f64>,
    rows: BTreeMap<u32, f64>,
    retired_cols: Vec<u32>,
    retired_rows: Vec<u32>,
    binding: Vec<Binding>,
    violations: Vec<Violation>,
    trace: Trace,
    next_stage: u32,
}

impl<'a> Sim<'a> {
    fn pos(&self, q: usize) -> (f64, f64) {
        match self.binding[q] {
            Binding::Slm(t) => self.traps[t],
            Binding::Aod { col, row } => (self.cols[&col], self.rows[&row]),
        }
    }

    fn flag(&mut self, rule: Rule, at: String, qubits: Vec<u32>, lines: Vec<u32>, d: Option<f64>) {
        self.violations.push(Violation { rule, at, qubits, lines, distance_um: d });
    }

    fn find_trap(&self, x: f64, y: f64) -> Option<usize> {
        self.traps
            .iter()
            .position(|&(tx, ty)| (tx - x).abs() <= TOL && (ty - y).abs() <= TOL)
    }

    /// No full-intensity mobile trap may rest on a stationary trap that
    /// holds an atom not bound to it: that is an unsanctioned transfer
    /// situation (atoms move between traps only via aligned activation and
    /// deactivation ramps).
    fn check_trap_slides(&mut self, at: &str) {
        let mut hits = Vec::new();
        for (&col, &cx) in &self.cols {
            for (&row, &ry) in &self.rows {
                for (t, &(tx, ty)) in self.traps.iter().enumerate() {
                    let Some(q) = self.occupant[t] else { continue };
                    if (tx - cx).abs() <= TOL && (ty - ry).abs() <= TOL {
                        hits.push((q, col, row));
                    }
                }
            }
        }
        for (q, col, row) in hits {
            self.flag(
                Rule::TransferIllegal,
                at.to_string(),
                vec![q],
                vec![col, row],
                None,
            );
        }
    }
}

/// Runs the program, collecting physics violations.
pub fn verify(p: &Program, c: &Circuit, spec: &ArchSpec) -> Result<Vec<Violation>, MalformedProgram> {
    let (mut sim, _) = run(p, Some(c), spec)?;
    // Gate coverage and dependency order over the whole ledger.
    let at = "end of program".to_string();
    for gate in c.gates() {
        match sim.trace.gate_stage.get(&gate.id) {
            None => sim.flag(Rule::GateCoverage, at.clone(), vec![gate.q_lo, gate.q_hi], vec![], None),
            Some(_) => {}
        }
    }
    for (j, j2) in c.dependency_pairs() {
        if let (Some(&a), Some(&b)) = (sim.trace.gate_stage.get(&j), sim.trace.gate_stage.get(&j2)) {
            if a >= b {
                sim.flag(Rule::DependencyOrder, at.clone(), vec![], vec![], None);
            }
        }
    }
    Ok(sim.violations)
}

/// Deterministic per-stage positions and idle times.
pub fn simulate_positions(p: &Program, spec: &ArchSpec) -> Result<Trace, MalformedProgram> {
    let (sim, _) = run(p, None, spec)?;
    Ok(sim.trace)
}

/// One animation frame: elapsed machine time and every qubit's position.
#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub t_us: f64,
    pub event: String,
    pub positions: Vec<[f64; 2]>,
}

/// Samples the program into animation frames: `frames_per_move` uniform
/// interpolation steps per move (both endpoints included), one frame per
/// laser pulse and transfer, and the initial placement.
pub fn animation_frames(
    p: &Program,
    spec: &ArchSpec,
    frames_per_move: usize,
) -> Result<Vec<Frame>, MalformedProgram> {
    // Validate structure first; the replay below assumes a sound program.
    let (_, _) = run(p, None, spec)?;
    let fpm = frames_per_move.max(1);
    let n = p.n_qubits as usize;
    let mut frames = Vec::new();
    let mut t_us = 0.0;

    // Lightweight replay mirroring the simulator's state machine.
    let (mut sim, _) = run(
        &Program { n_qubits: p.n_qubits, n_stages: 0, instructions: p.instructions[..1].to_vec() },
        None,
        spec,
    )?;
    let snap = |sim: &Sim| -> Vec<[f64; 2]> {
        (0..n).map(|q| { let (x, y) = sim.pos(q); [x, y] }).collect()
    };
    frames.push(Frame { t_us, event: "init".into(), positions: snap(&sim) });
    for (idx, instr) in p.instructions.iter().enumerate().skip(1) {
        match instr {
            Instruction::Init { .. } => return Err(MalformedProgram::MisplacedInit(idx)),
            Instruction::Move { cols, rows, duration_us } => {
                let col0 = sim.cols.clone();
                let row0 = sim.rows.clone();
                for k in 0..=fpm {
                    let tau = k as f64 / fpm as f64;
                    for lm in cols {
                        if col0.contains_key(&lm.id) {
                            sim.cols.insert(lm.id, lm.from_um + (lm.to_um - lm.from_um) * tau);
                        }
                    }
                    for lm in rows {
                        if row0.contains_key(&lm.id) {
                            sim.rows.insert(lm.id, lm.from_um + (lm.to_um - lm.from_um) * tau);
                        }
                    }
                    frames.push(Frame {
                        t_us: t_us + duration_us * tau,
                        event: "move".into(),
                        positions: snap(&sim),
                    });
                }
                t_us += duration_us;
            }
            Instruction::Activate { cols, rows } => {
                step_activate(&mut sim, idx, cols, rows)?;
                t_us += spec.phys.transfer_us;
                frames.push(Frame { t_us, event: "activate".into(), positions: snap(&sim) });
            }
            Instruction::Deactivate { cols, rows } => {
                step_deactivate(&mut sim, idx, cols, rows)?;
                t_us += spec.phys.transfer_us;
                frames.push(Frame { t_us, event: "deactivate".into(), positions: snap(&sim) });
            }
            Instruction::Rydberg { stage, gates } => {
                step_rydberg(&mut sim, idx, *stage, gates, None)?;
                frames.push(Frame {
                    t_us,
                    event: format!("rydberg stage {stage}"),
                    positions: snap(&sim),
                });
            }
        }
    }
    Ok(frames)
}

fn run<'a>(
    p: &Program,
    c: Option<&Circuit>,
    spec: &'a ArchSpec,
) -> Result<(Sim<'a>, ()), MalformedProgram> {
    let n = p.n_qubits as usize;
    let mut sim = Sim {
        spec,
        traps: Vec::new(),
        occupant: Vec::new(),
        cols: BTreeMap::new(),
        rows: BTreeMap::new(),
        retired_cols: Vec::new(),
        retired_rows: Vec::new(),
        binding: vec![Binding::Slm(usize::MAX); n],
        violations: Vec::new(),
        trace: Trace {
            stage_positions: Vec::new(),
            idle_us: vec![0.0; n],
            total_move_us: 0.0,
            total_transfer_us: 0.0,
            gate_stage: BTreeMap::new(),
        },
        next_stage: 0,
    };

    let Some(Instruction::Init { qubits, slm_traps, cols, rows }) = p.instructions.first() else {
        return Err(if p.instructions.is_empty() {
            MalformedProgram::Empty
        } else {
            MalformedProgram::MisplacedInit(0)
        });
    };
    let pitch = spec.site_pitch_um;
    for site in slm_traps {
        sim.traps.push((site[0] as f64 * pitch, site[1] as f64 * pitch));
        sim.occupant.push(None);
    }
    for lp in cols {
        sim.cols.insert(lp.id, lp.at_um);
    }
    for lp in rows {
        sim.rows.insert(lp.id, lp.at_um);
    }
    for init in qubits {
        let q = init.qubit as usize;
        if q >= n {
            return Err(MalformedProgram::UnknownQubit { index: 0, qubit: init.qubit });
        }
        if init.array == "aod" {
            let (Some(col), Some(row)) = (init.col, init.row) else {
                return Err(MalformedProgram::BadInit { index: 0, qubit: init.qubit });
            };
            if !sim.cols.contains_key(&col) || !sim.rows.contains_key(&row) {
                return Err(MalformedProgram::BadInit { index: 0, qubit: init.qubit });
            }
            // One atom per trap: same (col, row) pair twice is overfilling.
            for q2 in 0..q {
                if sim.binding[q2] == (Binding::Aod { col, row }) {
                    sim.flag(
                        Rule::TrapOverfilled,
                        "#0 init".into(),
                        vec![q2 as u32, init.qubit],
                        vec![col, row],
                        None,
                    );
                }
            }
            sim.binding[q] = Binding::Aod { col, row };
        } else {
            let (x, y) = (init.site[0] as f64 * pitch, init.site[1] as f64 * pitch);
            let Some(t) = sim.find_trap(x, y) else {
                return Err(MalformedProgram::BadInit { index: 0, qubit: init.qubit });
            };
            if let Some(prev) = sim.occupant[t] {
                sim.flag(
                    Rule::TrapOverfilled,
                    "#0 init".into(),
                    vec![prev, init.qubit],
                    vec![],
                    None,
                );
            }
            sim.occupant[t] = Some(init.qubit);
            sim.binding[q] = Binding::Slm(t);
        }
    }

    for (idx, instr) in p.instructions.iter().enumerate().skip(1) {
        match instr {
            Instruction::Init { .. } => return Err(MalformedProgram::MisplacedInit(idx)),
            Instruction::Move { cols, rows, duration_us } => {
                step_move(&mut sim, idx, cols, rows, *duration_us)?;
                sim.check_trap_slides(&format!("#{idx} move"));
            }
            Instruction::Activate { cols, rows } => {
                step_activate(&mut sim, idx, cols, rows)?;
                sim.check_trap_slides(&format!("#{idx} activate"));
            }
            Instruction::Deactivate { cols, rows } => {
                step_deactivate(&mut sim, idx, cols, rows)?;
                sim.check_trap_slides(&format!("#{idx} deactivate"));
            }
            Instruction::Rydberg { stage, gates } => {
                if *stage != sim.next_stage {
                    return Err(MalformedProgram::StageOrder {
                        index: idx,
                        got: *stage,
                        want: sim.next_stage,
                    });
                }
                sim.next_stage += 1;
                step_rydberg(&mut sim, idx, *stage, gates, c)?;
            }
        }
    }
    if sim.trace.stage_positions.is_empty() {
        let snapshot = (0..n).map(|q| sim.pos(q)).collect();
        sim.trace.stage_positions.push(snapshot);
    }
    Ok((sim, ()))
}

fn step_move(
    sim: &mut Sim,
    idx: usize,
    cols: &[crate::codegen::LineMove],
    rows: &[crate::codegen::LineMove],
    duration_us: f64,
) -> Result<(), MalformedProgram> {
    let at = format!("#{idx} move");
    let d_s = sim.spec.phys.d_s_um;

    // Begin/end maps per axis over all active lines.
    let mut moved_d_max: f64 = 0.0;
    for (axis_cols, listed) in [(true, cols), (false, rows)] {
        let active = if axis_cols { &sim.cols } else { &sim.rows };
        let retired = if axis_cols { &sim.retired_cols } else { &sim.retired_rows };
        let mut seen = Vec::new();
        for lm in listed {
            if seen.contains(&lm.id) {
                return Err(MalformedProgram::DuplicateLine { index: idx, line: lm.id });
            }
            seen.push(lm.id);
            match active.get(&lm.id) {
                None => {
                    if retired.contains(&lm.id) {
                        // The line was switched off; whatever sits there now
                        // is stationary SLM cargo.
                        sim.violations.push(Violation {
                            rule: Rule::SlmMoved,
                            at: at.clone(),
                            qubits: vec![],
                            lines: vec![lm.id],
                            distance_um: None,
                        });
                    } else {
                        return Err(MalformedProgram::UnknownLine { index: idx, line: lm.id });
                    }
                }
                Some(&cur) => {
                    if (cur - lm.from_um).abs() > TOL {
                        sim.violations.push(Violation {
                            rule: Rule::LineTornApart,
                            at: at.clone(),
                            qubits: vec![],
                            lines: vec![lm.id],
                            distance_um: Some((cur - lm.from_um).abs()),
                        });
                    }
                }
            }
        }
        // Pairwise order and separation on begin/end and sampled interior.
        let begins: Vec<(u32, f64)> = active.iter().map(|(&id, &um)| (id, um)).collect();
        let end_of = |id: u32, um: f64| -> f64 {
            listed.iter().find(|lm| lm.id == id).map_or(um, |lm| lm.to_um)
        };
        for i in 0..begins.len() {
            for j in i + 1..begins.len() {
                let (id_a, a0) = begins[i];
                let (id_b, b0) = begins[j];
                let (a1, b1) = (end_of(id_a, a0), end_of(id_b, b0));
                let d0 = b0 - a0;
                let d1 = b1 - a1;
                if d0 * d1 < 0.0 {
                    sim.violations.push(Violation {
                        rule: Rule::LineCrossing,
                        at: at.clone(),
                        qubits: vec![],
                        lines: vec![id_a, id_b],
                        distance_um: None,
                    });
                }
                // Linear motion: interior separation is bounded by the
                // endpoint separations; the sampled sweep is redundancy.
                for k in 0..=8 {
                    let tau = k as f64 / 8.0;
                    let d = (d0 + (d1 - d0) * tau).abs();
                    if d + TOL < d_s {
                        sim.violations.push(Violation {
                            rule: Rule::MinSeparation,
                            at: at.clone(),
                            qubits: vec![],
                            lines: vec![id_a, id_b],
                            distance_um: Some(d),
                        });
                        break;
                    }
                }
            }
        }
    }
    // Displacements of atoms riding the listed lines.
    for q in 0..sim.binding.len() {
        if let Binding::Aod { col, row } = sim.binding[q] {
            let dx = cols.iter().find(|lm| lm.id == col).map_or(0.0, |lm| lm.to_um - lm.from_um);
            let dy = rows.iter().find(|lm| lm.id == row).map_or(0.0, |lm| lm.to_um - lm.from_um);
            moved_d_max = moved_d_max.max(dx.hypot(dy));
        }
    }
    let law = sim.spec.phys.t0_us * (moved_d_max / sim.spec.phys.d0_um).sqrt();
    if duration_us + TOL < law {
        return Err(MalformedProgram::BadDuration { index: idx, got: duration_us, want: law });
    }
    for lm in cols {
        if sim.cols.contains_key(&lm.id) {
            sim.cols.insert(lm.id, lm.to_um);
        }
    }
    for lm in rows {
        if sim.rows.contains_key(&lm.id) {
            sim.rows.insert(lm.id, lm.to_um);
        }
    }
    sim.trace.total_move_us += duration_us;
    for idle in &mut sim.trace.idle_us {
        *idle += duration_us;
    }
    Ok(())
}

fn step_activate(
    sim: &mut Sim,
    idx: usize,
    cols: &[crate::codegen::LinePlace],
    rows: &[crate::codegen::LinePlace],
) -> Result<(), MalformedProgram> {
    let at = format!("#{idx} activate");
    for lp in cols {
        if sim.cols.contains_key(&lp.id) {
            return Err(MalformedProgram::AlreadyActive { index: idx, line: lp.id });
        }
        sim.cols.insert(lp.id, lp.at_um);
        sim.retired_cols.retain(|&l| l != lp.id);
    }
    for lp in rows {
        if sim.rows.contains_key(&lp.id) {
            return Err(MalformedProgram::AlreadyActive { index: idx, line: lp.id });
        }
        sim.rows.insert(lp.id, lp.at_um);
        sim.retired_rows.retain(|&l| l != lp.id);
    }
    // Pickup: any trap of a freshly completed intersection that coincides
    // with an occupied stationary trap captures its atom. Near misses within
    // half a separation are ambiguous tug-of-war.
    let new_cols: Vec<u32> = cols.iter().map(|lp| lp.id).collect();
    let new_rows: Vec<u32> = rows.iter().map(|lp| lp.id).collect();
    let mut captured: Vec<(usize, u32, u32)> = Vec::new();
    for (&cid, &cx) in sim.cols.iter() {
        for (&rid, &ry) in sim.rows.iter() {
            if !(new_cols.contains(&cid) || new_rows.contains(&rid)) {
                continue;
            }
            for (t, &(tx, ty)) in sim.traps.iter().enumerate() {
                let Some(q) = sim.occupant[t] else { continue };
                let d = (tx - cx).hypot(ty - ry);
                if d <= TOL {
                    captured.push((t, cid, rid));
                    let _ = q;
                } else if d < sim.spec.phys.d_s_um / 2.0 {
                    sim.violations.push(Violation {
                        rule: Rule::TransferIllegal,
                        at: at.clone(),
                        qubits: vec![q],
                        lines: vec![cid, rid],
                        distance_um: Some(d),
                    });
                }
            }
        }
    }
    for (t, cid, rid) in captured {
        let q = sim.occupant[t].take().expect("captured trap occupied");
        sim.binding[q as usize] = Binding::Aod { col: cid, row: rid };
    }
    sim.trace.total_transfer_us += sim.spec.phys.transfer_us;
    for idle in &mut sim.trace.idle_us {
        *idle += sim.spec.phys.transfer_us;
    }
    Ok(())
}

fn step_deactivate(
    sim: &mut Sim,
    idx: usize,
    cols: &[u32],
    rows: &[u32],
) -> Result<(), MalformedProgram> {
    let at = format!("#{idx} deactivate");
    for &id in cols.iter() {
        if !sim.cols.contains_key(&id) {
            return Err(MalformedProgram::UnknownLine { index: idx, line: id });
        }
    }
    for &id in rows.iter() {
        if !sim.rows.contains_key(&id) {
            return Err(MalformedProgram::UnknownLine { index: idx, line: id });
        }
    }
    // Atoms whose trap loses either line drop out.
    for q in 0..sim.binding.len() {
        if let Binding::Aod { col, row } = sim.binding[q] {
            if cols.contains(&col) || rows.contains(&row) {
                let (x, y) = (sim.cols[&col], sim.rows[&row]);
                match sim.find_trap(x, y) {
                    None => {
                        sim.violations.push(Violation {
                            rule: Rule::TransferIllegal,
                            at: at.clone(),
                            qubits: vec![q as u32],
                            lines: vec![col, row],
                            distance_um: None,
                        });
                        // The atom is lost; park it on a phantom trap so the
                        // simulation can continue deterministically.
                        sim.traps.push((x, y));
                        sim.occupant.push(Some(q as u32));
                        sim.binding[q] = Binding::Slm(sim.traps.len() - 1);
                    }
                    Some(t) => {
                        if let Some(prev) = sim.occupant[t] {
                            sim.violations.push(Violation {
                                rule: Rule::TrapOverfilled,
                                at: at.clone(),
                                qubits: vec![prev, q as u32],
                                lines: vec![],
                                distance_um: None,
                            });
                        }
                        sim.occupant[t] = Some(q as u32);
                        sim.binding[q] = Binding::Slm(t);
                    }
                }
            }
        }
    }
    for &id in cols {
        sim.cols.remove(&id);
        sim.retired_cols.push(id);
    }
    for &id in rows {
        sim.rows.remove(&id);
        sim.retired_rows.push(id);
    }
    sim.trace.total_transfer_us += sim.spec.phys.transfer_us;
    for idle in &mut sim.trace.idle_us {
        *idle += sim.spec.phys.transfer_us;
    }
    Ok(())
}

fn step_rydberg(
    sim: &mut Sim,
    idx: usize,
    stage: u32,
    gates: &[u32],
    c: Option<&Circuit>,
) -> Result<(), MalformedProgram> {
    let at = format!("#{idx} rydberg(stage {stage})");
    let n = sim.binding.len();
    let snapshot: Vec<(f64, f64)> = (0..n).map(|q| sim.pos(q)).collect();
    sim.trace.stage_positions.push(snapshot.clone());

    for &g in gates {
        if let Some(c) = c {
            if g >= c.num_gates() {
                return Err(MalformedProgram::UnknownGate { index: idx, gate: g });
            }
            if sim.trace.gate_stage.insert(g, stage).is_some() {
                sim.flag(Rule::GateCoverage, at.clone(), vec![], vec![], None);
            }
        } else {
            sim.trace.gate_stage.insert(g, stage);
        }
    }

    let Some(c) = c else { return Ok(()) };
    let r_b = sim.spec.phys.r_b_um;
    let stray = SITE_CLEARANCE * r_b;
    let scheduled: Vec<(u32, u32)> = gates
        .iter()
        .map(|&g| {
            let gate = c.gate(g);
            (gate.q_lo, gate.q_hi)
        })
        .collect();

    for &(a, b) in &scheduled {
        let (pa, pb) = (snapshot[a as usize], snapshot[b as usize]);
        let d = (pa.0 - pb.0).hypot(pa.1 - pb.1);
        if d > r_b + TOL {
            sim.flag(Rule::BlockadeUnsatisfied, at.clone(), vec![a, b], vec![], Some(d));
        }
    }
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if scheduled.contains(&(a, b)) || scheduled.contains(&(b, a)) {
                continue;
            }
            let (pa, pb) = (snapshot[a as usize], snapshot[b as usize]);
            let d = (pa.0 - pb.0).hypot(pa.1 - pb.1);
            if d < r_b - TOL {
                sim.flag(Rule::InteractionExactness, at.clone(), vec![a, b], vec![], Some(d));
            } else if d < stray - TOL {
                sim.flag(Rule::StrayInteraction, at.clone(), vec![a, b], vec![], Some(d));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{solve_hybrid, solve_optimal, DriverConfig};

    #[test]
    fn compiled_single_gate_is_clean() {
        let c = Circuit::new(2, &[(0, 1)], true, None).unwrap();
        let spec = ArchSpec::default();
        let r = solve_optimal(&c, &spec, &DriverConfig::default()).unwrap();
        let p = crate::codegen::lower(&r.assignment, &c, &spec).unwrap();
        let v = verify(&p, &c, &spec).unwrap();
        assert!(v.is_empty(), "violations: {v:?}");
    }

    #[test]
    fn compiled_hybrid_benchmark_is_clean() {
        let c = crate::circuit::generate_graph_circuit(10, 3, 1).unwrap();
        let spec = ArchSpec::default();
        let h = solve_hybrid(&c, &spec, &DriverConfig::default()).unwrap();
        let p = crate::codegen::lower(&h.assignment, &c, &spec).unwrap();
        let v = verify(&p, &c, &spec).unwrap();
        assert!(v.is_empty(), "violations: {v:?}");
    }

    #[test]
    fn init_only_program_positions() {
        let p = Program {
            n_qubits: 1,
            n_stages: 0,
            instructions: vec![Instruction::Init {
                qubits: vec![crate::codegen::QubitInit {
                    qubit: 0,
                    array: "slm".into(),
                    site: [2, 3],
                    col: None,
                    row: None,
                }],
                slm_traps: vec![[2, 3]],
                cols: vec![],
                rows: vec![],
            }],
        };
        let spec = ArchSpec::default();
        let t = simulate_positions(&p, &spec).unwrap();
        assert_eq!(t.stage_positions.len(), 1);
        assert_eq!(t.stage_positions[0][0], (2.0 * 27.0, 3.0 * 27.0));
        assert_eq!(t.idle_us, vec![0.0]);
    }

    #[test]
    fn full_speed_move_idles_everyone_200us() {
        // One column travelling 110 µm: the law gives exactly 200 µs.
        let spec = ArchSpec::default();
        let p = Program {
            n_qubits: 2,
            n_stages: 0,
            instructions: vec![
                Instruction::Init {
                    qubits: vec![
                        crate::codegen::QubitInit {
                            qubit: 0,
                            array: "slm".into(),
                            site: [0, 0],
                            col: None,
                            row: None,
                        },
                        crate::codegen::QubitInit {
                            qubit: 1,
                            array: "aod".into(),
                            site: [5, 0],
                            col: Some(0),
                            row: Some(0),
                        },
                    ],
                    slm_traps: vec![[0, 0]],
                    cols: vec![crate::codegen::LinePlace { id: 0, at_um: 136.0 }],
                    rows: vec![crate::codegen::LinePlace { id: 0, at_um: 1.0 }],
                },
                Instruction::Move {
                    cols: vec![crate::codegen::LineMove { id: 0, from_um: 136.0, to_um: 246.0 }],
                    rows: vec![],
                    duration_us: 200.0,
                },
            ],
        };
        let t = simulate_positions(&p, &spec).unwrap();
        assert_eq!(t.idle_us, vec![200.0, 200.0]);
    }

    #[test]
    fn crossing_columns_flagged() {
        let spec = ArchSpec::default();
        let p = Program {
            n_qubits: 2,
            n_stages: 0,
            instructions: vec![
                Instruction::Init {
                    qubits: vec![
                        crate::codegen::QubitInit {
                            qubit: 0,
                            array: "aod".into(),
                            site: [0, 0],
                            col: Some(0),
                            row: Some(0),
                        },
                        crate::codegen::QubitInit {
                            qubit: 1,
                            array: "aod".into(),
                            site: [1, 0],
                            col: Some(1),
                            row: Some(1),
                        },
                    ],
                    slm_traps: vec![],
                    cols: vec![
                        crate::codegen::LinePlace { id: 0, at_um: 1.0 },
                        crate::codegen::LinePlace { id: 1, at_um: 28.0 },
                    ],
                    rows: vec![
                        crate::codegen::LinePlace { id: 0, at_um: 1.0 },
                        crate::codegen::LinePlace { id: 1, at_um: 3.0 },
                    ],
                },
                Instruction::Move {
                    cols: vec![
                        crate::codegen::LineMove { id: 0, from_um: 1.0, to_um: 28.0 },
                        crate::codegen::LineMove { id: 1, from_um: 28.0, to_um: 1.0 },
                    ],
                    rows: vec![],
                    duration_us: 200.0,
                },
            ],
        };
        let v = verify(&p, &Circuit::new(2, &[], true, None).unwrap(), &spec).unwrap();
        assert!(v.iter().any(|x| x.rule == Rule::LineCrossing));
    }

    #[test]
    fn stray_third_atom_flagged() {
        // A pair executing a gate with a third atom 15 µm away.
        let spec = ArchSpec::default();
        let c = Circuit::new(3, &[(0, 1)], true, None).unwrap();
        let p = Program {
            n_qubits: 3,
            n_stages: 1,
            instructions: vec![
                Instruction::Init {
                    qubits: vec![
                        crate::codegen::QubitInit {
                            qubit: 0,
                            array: "slm".into(),
                            site: [0, 0],
                            col: None,
                            row: None,
                        },
                        crate::codegen::QubitInit {
                            qubit: 1,
                            array: "aod".into(),
                            site: [0, 0],
                            col: Some(0),
                            row: Some(0),
                        },
                        crate::codegen::QubitInit {
                            qubit: 2,
                            array: "aod".into(),
                            site: [0, 0],
                            col: Some(1),
                            row: Some(1),
                        },
                    ],
                    slm_traps: vec![[0, 0]],
                    cols: vec![
                        crate::codegen::LinePlace { id: 0, at_um: 2.0 },
                        crate::codegen::LinePlace { id: 1, at_um: 15.0 },
                    ],
                    rows: vec![
                        crate::codegen::LinePlace { id: 0, at_um: 0.0 },
                        crate::codegen::LinePlace { id: 1, at_um: 0.0 },
                    ],
                },
                Instruction::Rydberg { stage: 0, gates: vec![0] },
            ],
        };
        let v = verify(&p, &c, &spec).unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.rule == Rule::StrayInteraction), "got {v:?}");
    }
}
