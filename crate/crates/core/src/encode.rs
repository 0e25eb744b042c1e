//! Emits the machine constraints over the model variables.
//!
//! Circuit-independent families: variable bounds, stationary SLM atoms,
//! rigid AOD rows/columns, site order implying line order, no line crossing
//! across a move, maximal stacking, and the transfer rules. Circuit-dependent
//! families: gate collision, dependence, connectivity, one-atom-one-trap and
//! interaction exactness. Cardinality ("at least M gates in a stage range")
//! uses a sequential counter with unit-propagation-friendly clauses.

use std::sync::Arc;

use thiserror::Error;

use crate::arch::ArchSpec;
use crate::circuit::Circuit;
use crate::model::{Atom, AuxDef, Family, Formula, IntVar, Model, VarTable};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("stage count must be at least 1")]
    NoStages,
    #[error("architecture invalid: {0:?}")]
    InvalidSpec(Vec<String>),
    #[error("cardinality bound {m} exceeds gate count {g}")]
    BadCardinality { m: usize, g: usize },
    #[error("stage range [{lo}, {hi}) not within [0, {s})")]
    BadStageRange { lo: usize, hi: usize, s: usize },
    #[error("pinned state for qubit {qubit} out of bounds")]
    PinOutOfBounds { qubit: u32 },
    #[error("expected {expected} pinned states, got {got}")]
    PinCount { expected: usize, got: usize },
}

/// Build options beyond the architecture flags.
#[derive(Debug, Clone)]
pub struct BuildOpts {
    /// Permit atom transfers (otherwise array flags are frozen to stage 0).
    pub allow_transfer: bool,
    /// First stage at which gates may be scheduled. Step models pin stage 0
    /// to an existing machine state, where pairs whose gates already ran may
    /// legitimately sit together, so the circuit-dependent families start at
    /// stage 1 there.
    pub gate_stage_lo: usize,
    /// Adds one virtual stage index where gates may park unexecuted. Used by
    /// the peeling step models, which execute only a subset of the remaining
    /// gates per step.
    pub defer: bool,
}

impl BuildOpts {
    pub fn standard(spec: &ArchSpec) -> Self {
        BuildOpts { allow_transfer: spec.transfers_allowed, gate_stage_lo: 0, defer: false }
    }
}

/// Per-qubit machine state used to pin stage 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitState {
    pub x: u32,
    pub y: u32,
    pub a: u32,
    pub c: u32,
    pub r: u32,
}

pub fn build_model(
    c: &Circuit,
    spec: &ArchSpec,
    stages: usize,
    opts: &BuildOpts,
) -> Result<Model, EncodeError> {
    if stages < 1 {
        return Err(EncodeError::NoStages);
    }
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(EncodeError::InvalidSpec(violations));
    }
    let n = c.num_qubits();
    let g = c.num_gates();
    let vars = VarTable { n, s: stages, g };

    let mut ints = Vec::with_capacity(vars.core_count());
    for q in 0..n {
        for s in 0..stages {
            for (tag, hi) in
                [("x", spec.x), ("y", spec.y), ("a", 2), ("c", spec.c), ("r", spec.r)]
            {
                ints.push(IntVar { name: format!("{tag}_q{q}_s{s}"), lo: 0, hi: hi as i64 });
            }
        }
    }
    let t_hi = stages as i64 + i64::from(opts.defer);
    for j in 0..g {
        ints.push(IntVar { name: format!("t_{j}"), lo: opts.gate_stage_lo as i64, hi: t_hi });
    }

    let mut m = Model {
        vars,
        ints,
        bools: Vec::new(),
        assertions: Vec::new(),
        real_stages: stages,
        gate_stage_lo: opts.gate_stage_lo,
    };
    let v = m.vars.clone();
    let virt = stages as i64;

    // Stationary SLM: an SLM qubit keeps its site indices across a move.
    for q in 0..n {
        for s in 0..stages - 1 {
            m.assert(
                Family::SlmStationary,
                Formula::implies(
                    Formula::eqc(v.a(q, s), 0),
                    Formula::And(vec![
                        Formula::eq(v.x(q, s + 1), v.x(q, s)),
                        Formula::eq(v.y(q, s + 1), v.y(q, s)),
                    ]),
                ),
            );
        }
    }

    // AOD moves by whole rows/columns: an AOD qubit keeps its line indices.
    for q in 0..n {
        for s in 0..stages - 1 {
            m.assert(
                Family::AodRigid,
                Formula::implies(
                    Formula::eqc(v.a(q, s), 1),
                    Formula::And(vec![
                        Formula::eq(v.c(q, s + 1), v.c(q, s)),
                        Formula::eq(v.r(q, s + 1), v.r(q, s)),
                    ]),
                ),
            );
        }
    }

    // Site order implies row/column order, at every stage, both directions.
    for s in 0..stages {
        for i in 0..n {
            for i2 in i + 1..n {
                for (p, q) in [(i, i2), (i2, i)] {
                    m.assert(
                        Family::SiteOrder,
                        Formula::implies(
                            Formula::lt(v.x(p, s), v.x(q, s)),
                            Formula::lt(v.c(p, s), v.c(q, s)),
                        ),
                    );
                    m.assert(
                        Family::SiteOrder,
                        Formula::implies(
                            Formula::lt(v.y(p, s), v.y(q, s)),
                            Formula::lt(v.r(p, s), v.r(q, s)),
                        ),
                    );
                }
            }
        }
    }

    // No crossing: line order is preserved (weakly) across each move.
    for s in 0..stages - 1 {
        for i in 0..n {
            for i2 in i + 1..n {
                for (p, q) in [(i, i2), (i2, i)] {
                    let both_aod = vec![
                        Formula::eqc(v.a(p, s), 1),
                        Formula::eqc(v.a(q, s), 1),
                    ];
                    let mut col = both_aod.clone();
                    col.push(Formula::lt(v.c(p, s), v.c(q, s)));
                    m.assert(
                        Family::NoCross,
                        Formula::implies(
                            Formula::And(col),
                            Formula::le(v.x(p, s + 1), v.x(q, s + 1)),
                        ),
                    );
                    let mut row = both_aod;
                    row.push(Formula::lt(v.r(p, s), v.r(q, s)));
                    m.assert(
                        Family::NoCross,
                        Formula::implies(
                            Formula::And(row),
                            Formula::le(v.y(p, s + 1), v.y(q, s + 1)),
                        ),
                    );
                }
            }
        }
    }

    // Maximal stacking: lines at least a stacking factor apart cannot land on
    // the same site. Premises read the previous stage; the clamped stage-0
    // instance is the initial-placement rule, which does not apply to step
    // models whose stage 0 is a pinned mid-program state (lines may have
    // legally converged under older flags there).
    let stacking_start = if opts.gate_stage_lo >= 1 { 1 } else { 0 };
    for s in stacking_start..stages {
        let prev = s.saturating_sub(1);
        for i in 0..n {
            for i2 in i + 1..n {
                for (p, q) in [(i, i2), (i2, i)] {
                    m.assert(
                        Family::Stacking,
                        Formula::implies(
                            Formula::And(vec![
                                Formula::eqc(v.a(p, prev), 1),
                                Formula::eqc(v.a(q, prev), 1),
                                // c_p - c_q >= C_STK
                                Formula::Atom(Atom::Le(
                                    v.c(q, prev),
                                    v.c(p, prev),
                                    -(spec.c_stk as i64),
                                )),
                            ]),
                            Formula::lt(v.x(q, s), v.x(p, s)),
                        ),
                    );
                    m.assert(
                        Family::Stacking,
                        Formula::implies(
                            Formula::And(vec![
                                Formula::eqc(v.a(p, prev), 1),
                                Formula::eqc(v.a(q, prev), 1),
                                Formula::Atom(Atom::Le(
                                    v.r(q, prev),
                                    v.r(p, prev),
                                    -(spec.r_stk as i64),
                                )),
                            ]),
                            Formula::lt(v.y(q, s), v.y(p, s)),
                        ),
                    );
                }
            }
        }
    }

    if !opts.allow_transfer {
        // Freeze the array flag to its initial value.
        for q in 0..n {
            for s in 1..stages {
                m.assert(Family::Transfer, Formula::eq(v.a(q, s), v.a(q, 0)));
            }
        }
    } else {
        // Transfers are forbidden exactly when two atoms share the site.
        for s in 0..stages - 1 {
            for i in 0..n {
                for i2 in i + 1..n {
                    m.assert(
                        Family::Transfer,
                        Formula::implies(
                            Formula::And(vec![
                                Formula::eq(v.x(i, s + 1), v.x(i2, s + 1)),
                                Formula::eq(v.y(i, s + 1), v.y(i2, s + 1)),
                            ]),
                            Formula::And(vec![
                                Formula::eq(v.a(i, s + 1), v.a(i, s)),
                                Formula::eq(v.a(i2, s + 1), v.a(i2, s)),
                            ]),
                        ),
                    );
                }
            }
        }
        emit_transfer_realizability(&mut m, n, stages);
    }

    // Gate collision: gates sharing a qubit run at different stages.
    let gate_range = opts.gate_stage_lo..stages;
    for &(j, j2) in c.collision_pairs().iter() {
        if opts.defer {
            for s in gate_range.clone() {
                m.assert(
                    Family::Collision,
                    Formula::not(Formula::And(vec![
                        Formula::eqc(v.t(j), s as i64),
                        Formula::eqc(v.t(j2), s as i64),
                    ])),
                );
            }
        } else {
            m.assert(Family::Collision, Formula::not(Formula::eq(v.t(j), v.t(j2))));
        }
    }

    // Gate dependence: strict stage order; in defer models a gate whose
    // predecessor is still unexecuted parks in the virtual stage.
    for (j, j2) in c.dependency_pairs() {
        if opts.defer {
            m.assert(
                Family::Dependence,
                Formula::implies(
                    Formula::not(Formula::eqc(v.t(j2), virt)),
                    Formula::And(vec![
                        Formula::not(Formula::eqc(v.t(j), virt)),
                        Formula::lt(v.t(j), v.t(j2)),
                    ]),
                ),
            );
        } else {
            m.assert(Family::Dependence, Formula::lt(v.t(j), v.t(j2)));
        }
    }

    // Connectivity: an executing pair shares a site.
    for gate in c.gates() {
        for s in gate_range.clone() {
            m.assert(
                Family::Connectivity,
                Formula::implies(
                    Formula::eqc(v.t(gate.id), s as i64),
                    Formula::And(vec![
                        Formula::eq(v.x(gate.q_lo, s), v.x(gate.q_hi, s)),
                        Formula::eq(v.y(gate.q_lo, s), v.y(gate.q_hi, s)),
                    ]),
                ),
            );
        }
    }

    // One atom, one trap.
    for s in 0..stages {
        for i in 0..n {
            for i2 in i + 1..n {
                m.assert(
                    Family::OneAtomOneTrap,
                    Formula::implies(
                        Formula::And(vec![
                            Formula::eqc(v.a(i, s), 1),
                            Formula::eqc(v.a(i2, s), 1),
                        ]),
                        Formula::Or(vec![
                            Formula::not(Formula::eq(v.c(i, s), v.c(i2, s))),
                            Formula::not(Formula::eq(v.r(i, s), v.r(i2, s))),
                        ]),
                    ),
                );
                m.assert(
                    Family::OneAtomOneTrap,
                    Formula::implies(
                        Formula::And(vec![
                            Formula::eqc(v.a(i, s), 0),
                            Formula::eqc(v.a(i2, s), 0),
                        ]),
                        Formula::Or(vec![
                            Formula::not(Formula::eq(v.x(i, s), v.x(i2, s))),
                            Formula::not(Formula::eq(v.y(i, s), v.y(i2, s))),
                        ]),
                    ),
                );
            }
        }
    }

    // Interaction exactness: a colocated pair with pending gates executes one
    // of them now; a pair with no gates is never colocated. The laser fires
    // at every stage, so this covers all stages except a pinned stage 0
    // (where pairs whose gates already ran may still sit together).
    let exact_lo = if opts.gate_stage_lo >= 1 { 1 } else { 0 };
    let rho = c.interaction_map();
    for i in 0..n {
        for i2 in i + 1..n {
            let gates = rho.gates_on(i, i2);
            for s in exact_lo..stages {
                let coloc = Formula::And(vec![
                    Formula::eq(v.x(i, s), v.x(i2, s)),
                    Formula::eq(v.y(i, s), v.y(i2, s)),
                ]);
                if gates.is_empty() {
                    m.assert(
                        Family::ExactnessAbsent,
                        Formula::Or(vec![
                            Formula::not(Formula::eq(v.x(i, s), v.x(i2, s))),
                            Formula::not(Formula::eq(v.y(i, s), v.y(i2, s))),
                        ]),
                    );
                } else {
                    m.assert(
                        Family::ExactnessPresent,
                        Formula::implies(
                            coloc,
                            Formula::Or(
                                gates
                                    .iter()
                                    .map(|&j| Formula::eqc(v.t(j), s as i64))
                                    .collect(),
                            ),
                        ),
                    );
                }
            }
        }
    }

    Ok(m)
}

/// Transfers must be realizable with whole-line activate/deactivate.
///
/// A dropping atom needs its column or its row to drop every atom it holds
/// in the same window (switching a line off releases all of its atoms). A
/// picked-up atom needs a fresh column *and* a fresh row, not shared with
/// any other pickup of the window: the new trap must appear exactly on the
/// atom's stationary trap at the activation instant, and any line parked on
/// a second trap center would sweep a full-intensity trap across other
/// occupied stationary traps.
fn emit_transfer_realizability(m: &mut Model, n: u32, stages: usize) {
    let v = m.vars.clone();
    for q in 0..n {
        for s in 0..stages - 1 {
            let drop = Formula::And(vec![
                Formula::eqc(v.a(q, s), 1),
                Formula::eqc(v.a(q, s + 1), 0),
            ]);
            let pick = |qq: u32| {
                Formula::And(vec![
                    Formula::eqc(v.a(qq, s), 0),
                    Formula::eqc(v.a(qq, s + 1), 1),
                ])
            };

            let mut aux = |name: String, def: Formula| -> Formula {
                let id = m.new_aux(name, AuxDef::Gate(def));
                Formula::Aux(id)
            };

            let mut drop_defs = Vec::new();
            for line in ["c", "r"] {
                let line_of = |qq: u32, ss: usize| match line {
                    "c" => v.c(qq, ss),
                    _ => v.r(qq, ss),
                };
                let whole_line_drops = Formula::And(
                    (0..n)
                        .filter(|&q2| q2 != q)
                        .map(|q2| {
                            Formula::implies(
                                Formula::And(vec![
                                    Formula::eqc(v.a(q2, s), 1),
                                    Formula::eq(line_of(q2, s), line_of(q, s)),
                                ]),
                                Formula::eqc(v.a(q2, s + 1), 0),
                            )
                        })
                        .collect(),
                );
                drop_defs.push(whole_line_drops);
            }
            let col_drops = aux(format!("drpc_q{q}_s{s}"), drop_defs[0].clone());
            let row_drops = aux(format!("drpr_q{q}_s{s}"), drop_defs[1].clone());
            m.assert(
                Family::TransferRealizability,
                Formula::implies(
                    drop,
                    Formula::Or(vec![col_drops.clone(), row_drops.clone()]),
                ),
            );
            for (witness, def) in [(col_drops, drop_defs[0].clone()), (row_drops, drop_defs[1].clone())] {
                m.assert(Family::TransferRealizability, Formula::implies(witness, def));
            }

            // Pickup lines are fresh on both axes.
            for q2 in 0..n {
                if q2 == q {
                    continue;
                }
                for (line_s, line_next) in
                    [(v.c(q2, s), v.c(q, s + 1)), (v.r(q2, s), v.r(q, s + 1))]
                {
                    m.assert(
                        Family::TransferRealizability,
                        Formula::implies(
                            Formula::And(vec![pick(q), Formula::eqc(v.a(q2, s), 1)]),
                            Formula::not(Formula::eq(line_s, line_next)),
                        ),
                    );
                }
            }
            // Two pickups of one window never share a line.
            for q2 in q + 1..n {
                for (la, lb) in [(v.c(q, s + 1), v.c(q2, s + 1)), (v.r(q, s + 1), v.r(q2, s + 1))]
                {
                    m.assert(
                        Family::TransferRealizability,
                        Formula::implies(
                            Formula::And(vec![pick(q), pick(q2)]),
                            Formula::not(Formula::eq(la, lb)),
                        ),
                    );
                }
            }
        }
    }
}

/// Pins every stage-0 variable to the given machine state.
pub fn pin_initial_state(m: &mut Model, states: &[QubitState]) -> Result<(), EncodeError> {
    let v = m.vars.clone();
    if states.len() != v.n as usize {
        return Err(EncodeError::PinCount { expected: v.n as usize, got: states.len() });
    }
    for (q, st) in states.iter().enumerate() {
        let q = q as u32;
        for (var, val) in [
            (v.x(q, 0), st.x),
            (v.y(q, 0), st.y),
            (v.a(q, 0), st.a),
            (v.c(q, 0), st.c),
            (v.r(q, 0), st.r),
        ] {
            let decl = &m.ints[var.0 as usize];
            if (val as i64) < decl.lo || (val as i64) >= decl.hi {
                return Err(EncodeError::PinOutOfBounds { qubit: q });
            }
            m.assert(Family::Pin, Formula::eqc(var, val as i64));
        }
    }
    Ok(())
}

/// Requires at least `min_gates` gates scheduled in `[stage_lo, stage_hi)`,
/// realized as a sequential counter over per-gate indicators. The auxiliary
/// Booleans stay outside the core variable count.
pub fn encode_at_least_gates(
    m: &mut Model,
    min_gates: usize,
    stage_lo: usize,
    stage_hi: usize,
) -> Result<(), EncodeError> {
    let v = m.vars.clone();
    let g = v.g as usize;
    if min_gates > g {
        return Err(EncodeError::BadCardinality { m: min_gates, g });
    }
    if stage_lo >= stage_hi || stage_hi > m.real_stages {
        return Err(EncodeError::BadStageRange {
            lo: stage_lo,
            hi: stage_hi,
            s: m.real_stages,
        });
    }
    if min_gates == 0 {
        return Ok(());
    }

    let in_range = |j: u32| -> Formula {
        if stage_hi - stage_lo == 1 {
            Formula::eqc(v.t(j), stage_lo as i64)
        } else {
            Formula::Or(
                (stage_lo..stage_hi).map(|s| Formula::eqc(v.t(j), s as i64)).collect(),
            )
        }
    };

    let mut indicators = Vec::with_capacity(g);
    for j in 0..g as u32 {
        let f = in_range(j);
        let id = m.new_aux(format!("exe_{j}"), AuxDef::Gate(f.clone()));
        m.assert(Family::Cardinality, Formula::implies(Formula::Aux(id), f.clone()));
        m.assert(Family::Cardinality, Formula::implies(f, Formula::Aux(id)));
        indicators.push(id);
    }

    // At least M executed == at most G-M unexecuted.
    let k = g - min_gates;
    let misses: Arc<Vec<Formula>> = Arc::new(
        indicators.iter().map(|&id| Formula::not(Formula::Aux(id))).collect(),
    );
    if k == 0 {
        for &id in &indicators {
            m.assert(Family::Cardinality, Formula::Aux(id));
        }
        return Ok(());
    }

    // Sinz sequential counter, implication form only: rows[i][j] is true
    // whenever at least j+1 of the first i+1 candidate misses hold.
    let mut rows: Vec<Vec<Formula>> = Vec::with_capacity(g - 1);
    for i in 1..g {
        let row: Vec<Formula> = (1..=k)
            .map(|j| {
                let id = m.new_aux(
                    format!("cnt_{i}_{j}"),
                    AuxDef::CountGe { items: misses.clone(), prefix: i, level: j },
                );
                Formula::Aux(id)
            })
            .collect();
        let li = misses[i - 1].clone();
        m.assert(Family::Cardinality, Formula::implies(li.clone(), row[0].clone()));
        if let Some(prev) = rows.last() {
            for j in 0..k {
                m.assert(
                    Family::Cardinality,
                    Formula::implies(prev[j].clone(), row[j].clone()),
                );
            }
            for j in 1..k {
                m.assert(
                    Family::Cardinality,
                    Formula::implies(
                        Formula::And(vec![li.clone(), prev[j - 1].clone()]),
                        row[j].clone(),
                    ),
                );
            }
        }
        rows.push(row);
    }
    // Ban the (k+1)-th miss.
    for i in 2..=g {
        let li = misses[i - 1].clone();
        let prev_full = rows[i - 2][k - 1].clone();
        m.assert(
            Family::Cardinality,
            Formula::implies(Formula::And(vec![li, prev_full]), Formula::False),
        );
    }
    Ok(())
}
