//! Constraint model over bounded integer variables.
//!
//! The model is the theory-level artifact: per-qubit per-stage site indices
//! `x, y`, array flag `a`, AOD line indices `c, r`, and a stage `t` per gate,
//! with assertions in linear integer arithmetic plus Boolean structure. It
//! can be handed to any backend (built-in finite-domain solver or an external
//! SMT-LIB2 process) and re-evaluated by substitution to audit solutions.

use std::collections::BTreeMap;

/// Index of a bounded integer variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(pub u32);

/// Index of an auxiliary Boolean variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoolId(pub u32);

#[derive(Debug, Clone)]
pub struct IntVar {
    pub name: String,
    /// Inclusive lower bound.
    pub lo: i64,
    /// Exclusive upper bound.
    pub hi: i64,
}

/// How an auxiliary Boolean gets its value when re-evaluating a solution by
/// substitution (backends are free to assign them any satisfying way; these
/// definitions give the canonical truthful value).
#[derive(Debug, Clone)]
pub enum AuxDef {
    /// Value is exactly the formula's value.
    Gate(Formula),
    /// Value is "at least `level` of the first `prefix` items are true"
    /// (sequential-counter state variable).
    CountGe { items: std::sync::Arc<Vec<Formula>>, prefix: usize, level: usize },
}

#[derive(Debug, Clone)]
pub struct BoolVar {
    pub name: String,
    pub def: AuxDef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    /// v1 <= v2 + k
    Le(VarId, VarId, i64),
    /// v1 == v2
    Eq(VarId, VarId),
    /// v == k
    EqC(VarId, i64),
}

#[derive(Debug, Clone)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Aux(BoolId),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn lt(a: VarId, b: VarId) -> Formula {
        Formula::Atom(Atom::Le(a, b, -1))
    }

    pub fn le(a: VarId, b: VarId) -> Formula {
        Formula::Atom(Atom::Le(a, b, 0))
    }

    pub fn eq(a: VarId, b: VarId) -> Formula {
        Formula::Atom(Atom::Eq(a, b))
    }

    pub fn eqc(a: VarId, k: i64) -> Formula {
        Formula::Atom(Atom::EqC(a, k))
    }
}

/// Constraint families, in emission (and dump) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Bounds,
    SlmStationary,
    AodRigid,
    SiteOrder,
    NoCross,
    Stacking,
    Transfer,
    TransferRealizability,
    Collision,
    Dependence,
    Connectivity,
    OneAtomOneTrap,
    ExactnessPresent,
    ExactnessAbsent,
    Pin,
    Cardinality,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Bounds => "bounds",
            Family::SlmStationary => "slm-stationary",
            Family::AodRigid => "aod-rigid",
            Family::SiteOrder => "site-order",
            Family::NoCross => "no-cross",
            Family::Stacking => "stacking",
            Family::Transfer => "transfer",
            Family::TransferRealizability => "transfer-realizability",
            Family::Collision => "collision",
            Family::Dependence => "dependence",
            Family::Connectivity => "connectivity",
            Family::OneAtomOneTrap => "one-atom-one-trap",
            Family::ExactnessPresent => "exactness-present",
            Family::ExactnessAbsent => "exactness-absent",
            Family::Pin => "pin",
            Family::Cardinality => "cardinality",
        }
    }
}

/// Lookup table for the core variables (the `5·N·S + G` of the encoding).
#[derive(Debug, Clone)]
pub struct VarTable {
    pub n: u32,
    pub s: usize,
    pub g: u32,
}

impl VarTable {
    #[inline]
    fn qs(&self, q: u32, s: usize, field: u32) -> VarId {
        debug_assert!(q < self.n && s < self.s);
        VarId((q as usize * self.s + s) as u32 * 5 + field)
    }

    pub fn x(&self, q: u32, s: usize) -> VarId {
        self.qs(q, s, 0)
    }
    pub fn y(&self, q: u32, s: usize) -> VarId {
        self.qs(q, s, 1)
    }
    pub fn a(&self, q: u32, s: usize) -> VarId {
        self.qs(q, s, 2)
    }
    pub fn c(&self, q: u32, s: usize) -> VarId {
        self.qs(q, s, 3)
    }
    pub fn r(&self, q: u32, s: usize) -> VarId {
        self.qs(q, s, 4)
    }
    pub fn t(&self, j: u32) -> VarId {
        debug_assert!(j < self.g);
        VarId((self.n as usize * self.s) as u32 * 5 + j)
    }

    pub fn core_count(&self) -> usize {
        5 * self.n as usize * self.s + self.g as usize
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub vars: VarTable,
    pub ints: Vec<IntVar>,
    pub bools: Vec<BoolVar>,
    pub assertions: Vec<(Family, Formula)>,
    /// Number of real (gate-carrying) stages; equals `vars.s` except in
    /// peel models, where one extra virtual stage index parks deferred gates.
    pub real_stages: usize,
    /// First stage at which gates may execute (1 in pinned step models).
    pub gate_stage_lo: usize,
}

impl Model {
    pub fn core_var_count(&self) -> usize {
        self.vars.core_count()
    }

    pub fn aux_bool_count(&self) -> usize {
        self.bools.len()
    }

    pub fn new_aux(&mut self, name: String, def: AuxDef) -> BoolId {
        let id = BoolId(self.bools.len() as u32);
        self.bools.push(BoolVar { name, def });
        id
    }

    pub fn assert(&mut self, family: Family, f: Formula) {
        self.assertions.push((family, f));
    }

    pub fn family_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        // Domain bounds are structural; report them alongside the rest.
        out.insert(Family::Bounds.name(), self.ints.len());
        for (fam, _) in &self.assertions {
            *out.entry(fam.name()).or_insert(0) += 1;
        }
        out
    }

    /// Evaluates every assertion under the given integer assignment,
    /// deriving auxiliary Booleans from their definitions. Returns the index
    /// of the first failing assertion, or the first variable out of bounds.
    pub fn eval(&self, ints: &[i64]) -> Result<(), EvalFailure> {
        assert_eq!(ints.len(), self.ints.len());
        for (i, (v, decl)) in ints.iter().zip(&self.ints).enumerate() {
            if *v < decl.lo || *v >= decl.hi {
                return Err(EvalFailure::OutOfBounds { var: i, value: *v });
            }
        }
        let mut memo: Vec<Option<bool>> = vec![None; self.bools.len()];
        for (idx, (fam, f)) in self.assertions.iter().enumerate() {
            if !self.eval_formula(f, ints, &mut memo) {
                return Err(EvalFailure::Assertion { index: idx, family: fam.name() });
            }
        }
        Ok(())
    }

    fn eval_formula(&self, f: &Formula, ints: &[i64], memo: &mut Vec<Option<bool>>) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => self.eval_atom(a, ints),
            Formula::Aux(b) => self.eval_aux(*b, ints, memo),
            Formula::Not(g) => !self.eval_formula(g, ints, memo),
            Formula::And(gs) => gs.iter().all(|g| self.eval_formula(g, ints, memo)),
            Formula::Or(gs) => gs.iter().any(|g| self.eval_formula(g, ints, memo)),
            Formula::Implies(a, b) => {
                !self.eval_formula(a, ints, memo) || self.eval_formula(b, ints, memo)
            }
        }
    }

    fn eval_atom(&self, a: &Atom, ints: &[i64]) -> bool {
        match *a {
            Atom::Le(u, v, k) => ints[u.0 as usize] <= ints[v.0 as usize] + k,
            Atom::Eq(u, v) => ints[u.0 as usize] == ints[v.0 as usize],
            Atom::EqC(u, k) => ints[u.0 as usize] == k,
        }
    }

    fn eval_aux(&self, b: BoolId, ints: &[i64], memo: &mut Vec<Option<bool>>) -> bool {
        if let Some(v) = memo[b.0 as usize] {
            return v;
        }
        let def = self.bools[b.0 as usize].def.clone();
        let v = match def {
            AuxDef::Gate(f) => self.eval_formula(&f, ints, memo),
            AuxDef::CountGe { items, prefix, level } => {
                let mut count = 0usize;
                for it in items.iter().take(prefix) {
                    if self.eval_formula(it, ints, memo) {
                        count += 1;
                        if count >= level {
                            break;
                        }
                    }
                }
                count >= level
            }
        };
        memo[b.0 as usize] = Some(v);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalFailure {
    OutOfBounds { var: usize, value: i64 },
    Assertion { index: usize, family: &'static str },
}
