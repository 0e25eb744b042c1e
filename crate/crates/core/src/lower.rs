//! Lowers a model to CNF for the built-in solver.
//!
//! Every bounded integer gets the regular encoding: direct value bits
//! `eq[d] ⟺ (v = d)` channeled with order bits `ge[t] ⟺ (v ≥ t)`. Comparison
//! atoms are reified once each (cached) into literals with
//! unit-propagation-friendly ternary definitions; formulas then distribute
//! into small clause sets without further auxiliaries.

use std::collections::HashMap;

use crate::model::{Atom, Formula, Model, VarId};
use crate::sat::{Lit, SatResult, Solver};

#[derive(Clone, Copy, PartialEq, Eq)]
enum LitC {
    True,
    False,
    Lit(Lit),
}

impl LitC {
    fn flip(self) -> LitC {
        match self {
            LitC::True => LitC::False,
            LitC::False => LitC::True,
            LitC::Lit(l) => LitC::Lit(l.flip()),
        }
    }
}

struct IntBits {
    lo: i64,
    hi: i64,
    /// ge[i] ⟺ v ≥ lo + 1 + i (empty when the domain is a single value).
    ge: Vec<crate::sat::Var>,
    /// eq[d - lo] ⟺ v = d.
    eq: Vec<crate::sat::Var>,
}

pub struct LoweredModel {
    pub solver: Solver,
    ints: Vec<IntBits>,
    bools: Vec<crate::sat::Var>,
    atom_cache: HashMap<Atom, LitC>,
}

impl LoweredModel {
    pub fn build(m: &Model) -> LoweredModel {
        let mut solver = Solver::new();
        let mut ints = Vec::with_capacity(m.ints.len());
        for iv in &m.ints {
            let d = (iv.hi - iv.lo) as usize;
            assert!(d >= 1, "empty domain for {}", iv.name);
            let ge: Vec<_> = (0..d.saturating_sub(1)).map(|_| solver.new_var()).collect();
            let eq: Vec<_> = if d == 1 { Vec::new() } else { (0..d).map(|_| solver.new_var()).collect() };
            // Order chain.
            for w in ge.windows(2) {
                solver.add_clause(&[Lit::neg(w[1]), Lit::pos(w[0])]);
            }
            // Channeling eq[d] ⟺ ge[d] ∧ ¬ge[d+1].
            for (k, &e) in eq.iter().enumerate() {
                let above = if k == 0 { LitC::True } else { LitC::Lit(Lit::pos(ge[k - 1])) };
                let below_next =
                    if k == d - 1 { LitC::True } else { LitC::Lit(Lit::neg(ge[k])) };
                add_clause_c(&mut solver, &[LitC::Lit(Lit::neg(e)), above]);
                add_clause_c(&mut solver, &[LitC::Lit(Lit::neg(e)), below_next]);
                add_clause_c(
                    &mut solver,
                    &[above.flip(), below_next.flip(), LitC::Lit(Lit::pos(e))],
                );
            }
            ints.push(IntBits { lo: iv.lo, hi: iv.hi, ge, eq });
        }
        let bools: Vec<_> = m.bools.iter().map(|_| solver.new_var()).collect();
        let mut lowered =
            LoweredModel { solver, ints, bools, atom_cache: HashMap::new() };
        for (_, f) in &m.assertions {
            lowered.assert_formula(f);
        }
        lowered
    }

    pub fn solve(&mut self, deadline: Option<std::time::Instant>) -> SatResult {
        self.solver.solve(deadline)
    }

    pub fn int_values(&self) -> Vec<i64> {
        self.ints
            .iter()
            .map(|b| b.lo + b.ge.iter().take_while(|&&v| self.solver.value(v)).count() as i64)
            .collect()
    }

    pub fn bool_values(&self) -> Vec<bool> {
        self.bools.iter().map(|&v| self.solver.value(v)).collect()
    }

    /// Literal for `v >= threshold` (constant-folded at domain edges).
    fn ge_lit(&self, v: VarId, threshold: i64) -> LitC {
        let b = &self.ints[v.0 as usize];
        if threshold <= b.lo {
            LitC::True
        } else if threshold >= b.hi {
            LitC::False
        } else {
            LitC::Lit(Lit::pos(b.ge[(threshold - b.lo - 1) as usize]))
        }
    }

    /// Literal for `v = value`.
    fn eq_lit(&self, v: VarId, value: i64) -> LitC {
        let b = &self.ints[v.0 as usize];
        if value < b.lo || value >= b.hi {
            LitC::False
        } else if b.hi - b.lo == 1 {
            LitC::True
        } else {
            LitC::Lit(Lit::pos(b.eq[(value - b.lo) as usize]))
        }
    }

    fn is_const(&self, v: VarId) -> Option<i64> {
        let b = &self.ints[v.0 as usize];
        (b.hi - b.lo == 1).then_some(b.lo)
    }

    fn atom_lit(&mut self, a: &Atom) -> LitC {
        if let Some(&l) = self.atom_cache.get(a) {
            return l;
        }
        let l = self.reify_atom(a);
        self.atom_cache.insert(*a, l);
        l
    }

    fn reify_atom(&mut self, a: &Atom) -> LitC {
        match *a {
            Atom::EqC(u, k) => self.eq_lit(u, k),
            Atom::Eq(u, v) => {
                if u == v {
                    return LitC::True;
                }
                if let Some(cu) = self.is_const(u) {
                    return self.eq_lit(v, cu);
                }
                if let Some(cv) = self.is_const(v) {
                    return self.eq_lit(u, cv);
                }
                let q = LitC::Lit(Lit::pos(self.solver.new_var()));
                let (lo_u, hi_u) = {
                    let b = &self.ints[u.0 as usize];
                    (b.lo, b.hi)
                };
                for d in lo_u..hi_u {
                    let eu = self.eq_lit(u, d);
                    let ev = self.eq_lit(v, d);
                    // q ∧ u=d → v=d
                    self.add_clause(&[q.flip(), eu.flip(), ev]);
                    // u=d ∧ v=d → q
                    self.add_clause(&[eu.flip(), ev.flip(), q]);
                }
                q
            }
            Atom::Le(u, v, k) => {
                if u == v {
                    return if k >= 0 { LitC::True } else { LitC::False };
                }
                if let Some(cu) = self.is_const(u) {
                    // cu <= v + k  ⟺  v >= cu - k
                    return self.ge_lit(v, cu - k);
                }
                if let Some(cv) = self.is_const(v) {
                    // u <= cv + k ⟺ ¬(u >= cv + k + 1)
                    return self.ge_lit(u, cv + k + 1).flip();
                }
                let p = LitC::Lit(Lit::pos(self.solver.new_var()));
                let (lo_u, hi_u) = {
                    let b = &self.ints[u.0 as usize];
                    (b.lo, b.hi)
                };
                let (lo_v, hi_v) = {
                    let b = &self.ints[v.0 as usize];
                    (b.lo, b.hi)
                };
                // p → (u ≥ t → v ≥ t - k) for all t.
                for t in lo_u..hi_u {
                    let a = self.ge_lit(u, t);
                    let b = self.ge_lit(v, t - k);
                    self.add_clause(&[p.flip(), a.flip(), b]);
                }
                // ¬p → (v ≥ t → u ≥ t + k + 1) for all t.
                for t in lo_v..hi_v {
                    let a = self.ge_lit(v, t);
                    let b = self.ge_lit(u, t + k + 1);
                    self.add_clause(&[p, a.flip(), b]);
                }
                p
            }
        }
    }

    fn add_clause(&mut self, lits: &[LitC]) {
        add_clause_c(&mut self.solver, lits);
    }

    fn assert_formula(&mut self, f: &Formula) {
        let clauses = self.cnf(f, false);
        for c in clauses {
            self.add_clause(&c);
        }
    }

    /// CNF of `f` (negated when `neg`), distributing ORs over ANDs. Formula
    /// shapes emitted by the encoder keep the expansion linear.
    fn cnf(&mut self, f: &Formula, neg: bool) -> Vec<Vec<LitC>> {
        match (f, neg) {
            (Formula::True, false) | (Formula::False, true) => Vec::new(),
            (Formula::True, true) | (Formula::False, false) => vec![Vec::new()],
            (Formula::Atom(a), _) => {
                let l = self.atom_lit(a);
                vec![vec![if neg { l.flip() } else { l }]]
            }
            (Formula::Aux(b), _) => {
                let l = LitC::Lit(Lit::pos(self.bools[b.0 as usize]));
                vec![vec![if neg { l.flip() } else { l }]]
            }
            (Formula::Not(g), _) => self.cnf(g, !neg),
            (Formula::And(gs), false) | (Formula::Or(gs), true) => {
                let mut out = Vec::new();
                for g in gs {
                    out.extend(self.cnf(g, neg));
                }
                out
            }
            (Formula::Or(gs), false) | (Formula::And(gs), true) => {
                let mut acc: Vec<Vec<LitC>> = vec![Vec::new()];
                for g in gs {
                    let part = self.cnf(g, neg);
                    let mut next = Vec::with_capacity(acc.len() * part.len().max(1));
                    for base in &acc {
                        for pc in &part {
                            let mut c = base.clone();
                            c.extend_from_slice(pc);
                            next.push(c);
                        }
                    }
                    acc = next;
                    assert!(acc.len() <= 1 << 16, "clause distribution blow-up");
                }
                acc
            }
            (Formula::Implies(a, b), false) => {
                self.cnf(&Formula::Or(vec![Formula::not((**a).clone()), (**b).clone()]), false)
            }
            (Formula::Implies(a, b), true) => {
                let mut out = self.cnf(a, false);
                out.extend(self.cnf(b, true));
                out
            }
        }
    }
}

fn add_clause_c(solver: &mut Solver, lits: &[LitC]) {
    let mut c = Vec::with_capacity(lits.len());
    for &l in lits {
        match l {
            LitC::True => return,
            LitC::False => {}
            LitC::Lit(x) => c.push(x),
        }
    }
    solver.add_clause(&c);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::ArchSpec;
    use crate::circuit::Circuit;
    use crate::encode::{build_model, pin_initial_state, BuildOpts, QubitState};

    fn solve_ints(m: &Model) -> Option<Vec<i64>> {
        let mut low = LoweredModel::build(m);
        match low.solve(None) {
            SatResult::Sat => Some(low.int_values()),
            SatResult::Unsat => None,
            SatResult::Unknown => panic!("no deadline set"),
        }
    }

    #[test]
    fn empty_circuit_single_stage_sat_and_model_evals() {
        let c = Circuit::new(3, &[], true, None).unwrap();
        let spec = ArchSpec::default();
        let m = build_model(&c, &spec, 1, &BuildOpts::standard(&spec)).unwrap();
        let ints = solve_ints(&m).expect("placing 3 idle qubits is satisfiable");
        m.eval(&ints).unwrap();
    }

    #[test]
    fn one_gate_one_stage_colocates() {
        let c = Circuit::new(2, &[(0, 1)], true, None).unwrap();
        let spec = ArchSpec::default();
        let m = build_model(&c, &spec, 1, &BuildOpts::standard(&spec)).unwrap();
        let ints = solve_ints(&m).expect("one gate fits in one stage");
        m.eval(&ints).unwrap();
        let v = &m.vars;
        assert_eq!(ints[v.x(0, 0).0 as usize], ints[v.x(1, 0).0 as usize]);
        assert_eq!(ints[v.y(0, 0).0 as usize], ints[v.y(1, 0).0 as usize]);
    }

    #[test]
    fn two_slm_pins_on_same_site_unsat() {
        let c = Circuit::new(2, &[], true, None).unwrap();
        let spec = ArchSpec::default();
        let mut m = build_model(&c, &spec, 1, &BuildOpts::standard(&spec)).unwrap();
        let st = QubitState { x: 3, y: 3, a: 0, c: 0, r: 0 };
        pin_initial_state(&mut m, &[st, st]).unwrap();
        assert!(solve_ints(&m).is_none());
    }

    #[test]
    fn distinct_slm_pins_sat() {
        let c = Circuit::new(2, &[], true, None).unwrap();
        let spec = ArchSpec::default();
        let mut m = build_model(&c, &spec, 1, &BuildOpts::standard(&spec)).unwrap();
        // Phantom c/r of SLM qubits still obey site order, so keep them
        // consistent with the x order.
        pin_initial_state(
            &mut m,
            &[
                QubitState { x: 1, y: 1, a: 0, c: 0, r: 0 },
                QubitState { x: 2, y: 1, a: 0, c: 1, r: 0 },
            ],
        )
        .unwrap();
        let ints = solve_ints(&m).expect("distinct sites satisfiable");
        m.eval(&ints).unwrap();
    }
}
