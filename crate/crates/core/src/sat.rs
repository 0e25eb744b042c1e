//! A self-contained CDCL SAT solver: two-watched-literal propagation, 1UIP
//! conflict analysis with clause minimization, VSIDS branching with phase
//! saving, Luby restarts and activity/LBD-based learnt-clause reduction.
//!
//! Deterministic for a fixed clause stream: no randomness, no time-based
//! heuristics (the wall clock is only consulted for the optional deadline).

use std::time::Instant;

pub type Var = u32;

/// A literal: variable index with a sign bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit(var << 1 | negated as u32)
    }
    #[inline]
    pub fn pos(var: Var) -> Lit {
        Lit(var << 1)
    }
    #[inline]
    pub fn neg(var: Var) -> Lit {
        Lit(var << 1 | 1)
    }
    #[inline]
    pub fn var(self) -> Var {
        self.0 >> 1
    }
    #[inline]
    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }
    #[inline]
    pub fn flip(self) -> Lit {
        Lit(self.0 ^ 1)
    }
    #[inline]
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SatResult {
    Sat,
    Unsat,
    /// Deadline hit before a verdict.
    Unknown,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

const CREF_NONE: u32 = u32::MAX;
/// Clause arena layout: [size, meta, lit...]; meta bit0 = learnt, bit1 = deleted.
const HDR: usize = 2;

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

/// Binary max-heap over variable activities with position tracking.
struct VarHeap {
    heap: Vec<Var>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn new() -> Self {
        VarHeap { heap: Vec::new(), pos: Vec::new() }
    }

    fn contains(&self, v: Var) -> bool {
        (v as usize) < self.pos.len() && self.pos[v as usize] >= 0
    }

    fn push(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        if self.pos.len() <= v as usize {
            self.pos.resize(v as usize + 1, -1);
        }
        self.pos[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<Var> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn bumped(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            let i = self.pos[v as usize] as usize;
            self.sift_up(i, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[i] as usize] > act[self.heap[parent] as usize] {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && act[self.heap[l] as usize] > act[self.heap[best] as usize] {
                best = l;
            }
            if r < self.heap.len() && act[self.heap[r] as usize] > act[self.heap[best] as usize] {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a] as usize] = a as i32;
        self.pos[self.heap[b] as usize] = b as i32;
    }
}

pub struct Solver {
    n_vars: usize,
    db: Vec<u32>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    assign: Vec<LBool>,
    phase: Vec<bool>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    seen: Vec<bool>,
    unsat: bool,
    pub conflicts: u64,
    pub propagations: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            n_vars: 0,
            db: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assign: Vec::new(),
            phase: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: VarHeap::new(),
            seen: Vec::new(),
            unsat: false,
            conflicts: 0,
            propagations: 0,
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.n_vars as Var;
        self.n_vars += 1;
        self.assign.push(LBool::Undef);
        self.phase.push(false);
        self.level.push(0);
        self.reason.push(CREF_NONE);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.push(v, &self.activity);
        v
    }

    pub fn num_vars(&self) -> usize {
        self.n_vars
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> LBool {
        match self.assign[l.var() as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if l.is_neg() {
                    LBool::False
                } else {
                    LBool::True
                }
            }
            LBool::False => {
                if l.is_neg() {
                    LBool::True
                } else {
                    LBool::False
                }
            }
        }
    }

    /// Adds a clause, simplifying against the level-0 assignment. Returns
    /// false once the formula is unsatisfiable at level 0.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        if self.unsat {
            return false;
        }
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            debug_assert!((l.var() as usize) < self.n_vars);
            match self.lit_value(l) {
                LBool::True => return true,
                LBool::False => continue,
                LBool::Undef => {
                    if c.contains(&l.flip()) {
                        return true; // tautology
                    }
                    if !c.contains(&l) {
                        c.push(l);
                    }
                }
            }
        }
        match c.len() {
            0 => {
                self.unsat = true;
                false
            }
            1 => {
                self.enqueue(c[0], CREF_NONE);
                if self.propagate() != CREF_NONE {
                    self.unsat = true;
                }
                !self.unsat
            }
            _ => {
                self.attach(&c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: &[Lit], learnt: bool) -> u32 {
        let cref = self.db.len() as u32;
        self.db.push(lits.len() as u32);
        self.db.push(learnt as u32);
        for &l in lits {
            self.db.push(l.0);
        }
        self.watches[lits[0].flip().idx()].push(Watcher { cref, blocker: lits[1] });
        self.watches[lits[1].flip().idx()].push(Watcher { cref, blocker: lits[0] });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    #[inline]
    fn clause(&self, cref: u32) -> &[u32] {
        let base = cref as usize;
        let size = self.db[base] as usize;
        &self.db[base + HDR..base + HDR + size]
    }

    #[inline]
    fn is_deleted(&self, cref: u32) -> bool {
        self.db[cref as usize + 1] & 2 != 0
    }

    #[inline]
    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        debug_assert!(self.lit_value(l) == LBool::Undef);
        self.assign[l.var() as usize] = if l.is_neg() { LBool::False } else { LBool::True };
        self.level[l.var() as usize] = self.decision_level() as u32;
        self.reason[l.var() as usize] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> u32 {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            // p just became true, so p.flip() became false; its watchers live
            // under p's index.
            let widx = p.idx();
            let mut w = 0;
            'watches: while w < self.watches[widx].len() {
                let Watcher { cref, blocker } = self.watches[widx][w];
                if self.lit_value(blocker) == LBool::True {
                    w += 1;
                    continue;
                }
                if self.is_deleted(cref) {
                    self.watches[widx].swap_remove(w);
                    continue;
                }
                let base = cref as usize;
                let size = self.db[base] as usize;
                let false_lit = p.flip();
                // Normalize: false_lit at slot 1.
                if Lit(self.db[base + HDR]) == false_lit {
                    self.db.swap(base + HDR, base + HDR + 1);
                }
                debug_assert_eq!(Lit(self.db[base + HDR + 1]), false_lit);
                let first = Lit(self.db[base + HDR]);
                if first != blocker && self.lit_value(first) == LBool::True {
                    self.watches[widx][w].blocker = first;
                    w += 1;
                    continue;
                }
                for k in 2..size {
                    let lk = Lit(self.db[base + HDR + k]);
                    if self.lit_value(lk) != LBool::False {
                        self.db.swap(base + HDR + 1, base + HDR + k);
                        self.watches[lk.flip().idx()].push(Watcher { cref, blocker: first });
                        self.watches[widx].swap_remove(w);
                        continue 'watches;
                    }
                }
                // Unit or conflicting on `first`.
                if self.lit_value(first) == LBool::False {
                    self.qhead = self.trail.len();
                    return cref;
                }
                self.enqueue(first, cref);
                w += 1;
            }
        }
        CREF_NONE
    }

    fn bump_var(&mut self, v: Var) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut path = 0usize;
        let mut index = self.trail.len();
        let mut p: Option<Lit> = None;
        loop {
            let lits: Vec<Lit> = self.clause(confl).iter().map(|&x| Lit(x)).collect();
            let skip = usize::from(p.is_some());
            for &q in &lits[skip..] {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.level[v] as usize == self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let pl = self.trail[index];
            self.seen[pl.var() as usize] = false;
            path -= 1;
            if path == 0 {
                learnt[0] = pl.flip();
                break;
            }
            p = Some(pl);
            confl = self.reason[pl.var() as usize];
            // Keep slot 0 = the asserting literal of the reason clause.
            debug_assert_eq!(Lit(self.clause(confl)[0]), pl);
        }
        // Cheap minimization: drop literals implied by the rest of the clause.
        let keep: Vec<Lit> = learnt[1..]
            .iter()
            .copied()
            .filter(|&q| !self.redundant(q, &learnt))
            .collect();
        let mut out = vec![learnt[0]];
        out.extend(keep);
        for &q in &learnt {
            self.seen[q.var() as usize] = false;
        }
        // Backtrack level: highest level among the non-asserting literals.
        let mut bt = 0usize;
        let mut swap_idx = 0usize;
        for (i, &q) in out.iter().enumerate().skip(1) {
            let lv = self.level[q.var() as usize] as usize;
            if lv > bt {
                bt = lv;
                swap_idx = i;
            }
        }
        if out.len() > 1 {
            out.swap(1, swap_idx);
        }
        (out, bt)
    }

    /// A literal is redundant if its reason's literals are all already in the
    /// learnt clause (or fixed at level 0).
    fn redundant(&self, q: Lit, learnt: &[Lit]) -> bool {
        let r = self.reason[q.var() as usize];
        if r == CREF_NONE {
            return false;
        }
        self.clause(r).iter().skip(1).all(|&x| {
            let l = Lit(x);
            let v = l.var() as usize;
            self.level[v] == 0 || learnt.iter().any(|&k| k.var() == l.var())
        })
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let bound = self.trail_lim[lvl];
        for i in (bound..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.phase[v] = !l.is_neg();
            self.assign[v] = LBool::Undef;
            self.reason[v] = CREF_NONE;
            self.heap.push(l.var(), &self.activity);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(lvl);
        self.qhead = bound;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assign[v as usize] == LBool::Undef {
                return Some(Lit::new(v, !self.phase[v as usize]));
            }
        }
        None
    }

    fn reduce_db(&mut self) {
        // Order learnts worst-first: long clauses with low activity go first.
        let mut cand: Vec<u32> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| !self.is_deleted(c) && !self.locked(c))
            .collect();
        cand.sort_by_key(|&c| std::cmp::Reverse(self.db[c as usize]));
        let drop_n = cand.len() / 2;
        for &c in cand.iter().take(drop_n) {
            if self.db[c as usize] <= 2 {
                continue;
            }
            self.db[c as usize + 1] |= 2;
        }
        self.learnts.retain(|&c| self.db[c as usize + 1] & 2 == 0);
    }

    fn locked(&self, cref: u32) -> bool {
        let first = Lit(self.clause(cref)[0]);
        self.reason[first.var() as usize] == cref && self.lit_value(first) == LBool::True
    }

    fn luby(mut x: u64) -> u64 {
        let mut size = 1u64;
        let mut seq = 0u64;
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) / 2;
            seq -= 1;
            x %= size;
        }
        1u64 << seq
    }

    pub fn solve(&mut self, deadline: Option<Instant>) -> SatResult {
        if self.unsat {
            return SatResult::Unsat;
        }
        if self.propagate() != CREF_NONE {
            self.unsat = true;
            return SatResult::Unsat;
        }
        let mut restarts = 0u64;
        let mut conflict_budget = 128 * Self::luby(restarts);
        let mut conflicts_here = 0u64;
        let mut max_learnts = 4000usize.max(self.db.len() / 16);
        loop {
            let confl = self.propagate();
            if confl != CREF_NONE {
                self.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return SatResult::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], CREF_NONE);
                } else {
                    let cref = self.attach(&learnt, true);
                    self.enqueue(learnt[0], cref);
                }
                self.var_inc /= 0.95;
                if self.conflicts % 1024 == 0 {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            self.cancel_until(0);
                            return SatResult::Unknown;
                        }
                    }
                }
            } else {
                if conflicts_here >= conflict_budget {
                    restarts += 1;
                    conflict_budget = 128 * Self::luby(restarts);
                    conflicts_here = 0;
                    self.cancel_until(0);
                    continue;
                }
                if self.learnts.len() > max_learnts {
                    self.reduce_db();
                    max_learnts += max_learnts / 2;
                }
                match self.pick_branch() {
                    None => return SatResult::Sat,
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, CREF_NONE);
                    }
                }
            }
        }
    }

    /// Value of a variable in the satisfying assignment (after `Sat`).
    pub fn value(&self, v: Var) -> bool {
        matches!(self.assign[v as usize], LBool::True)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lits(solver_vars: &[Var], spec: &[i32]) -> Vec<Lit> {
        spec.iter()
            .map(|&s| {
                let v = solver_vars[(s.unsigned_abs() - 1) as usize];
                Lit::new(v, s < 0)
            })
            .collect()
    }

    #[test]
    fn trivial_sat() {
        let mut s = Solver::new();
        let vars: Vec<Var> = (0..3).map(|_| s.new_var()).collect();
        for c in [vec![1, 2], vec![-1, 3], vec![-2, -3]] {
            assert!(s.add_clause(&lits(&vars, &c)));
        }
        assert_eq!(s.solve(None), SatResult::Sat);
        // Check the model satisfies all clauses.
        for c in [vec![1, 2], vec![-1, 3], vec![-2, -3]] {
            assert!(lits(&vars, &c)
                .iter()
                .any(|&l| s.value(l.var()) != l.is_neg()));
        }
    }

    #[test]
    fn contradictory_units_unsat() {
        let mut s = Solver::new();
        let v = s.new_var();
        assert!(s.add_clause(&[Lit::pos(v)]));
        assert!(!s.add_clause(&[Lit::neg(v)]));
        assert_eq!(s.solve(None), SatResult::Unsat);
    }

    #[test]
    fn pigeonhole_three_in_two_unsat() {
        // 3 pigeons, 2 holes: var p(i,h) = 2i + h.
        let mut s = Solver::new();
        let vars: Vec<Var> = (0..6).map(|_| s.new_var()).collect();
        for i in 0..3 {
            s.add_clause(&[Lit::pos(vars[2 * i]), Lit::pos(vars[2 * i + 1])]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    s.add_clause(&[Lit::neg(vars[2 * i + h]), Lit::neg(vars[2 * j + h])]);
                }
            }
        }
        assert_eq!(s.solve(None), SatResult::Unsat);
    }

    /// Exhaustive oracle: try all assignments.
    fn brute_force(n: usize, clauses: &[Vec<i32>]) -> bool {
        'outer: for mask in 0u64..(1 << n) {
            for c in clauses {
                let sat = c.iter().any(|&l| {
                    let v = (l.unsigned_abs() - 1) as usize;
                    let val = mask >> v & 1 == 1;
                    if l > 0 {
                        val
                    } else {
                        !val
                    }
                });
                if !sat {
                    continue 'outer;
                }
            }
            return true;
        }
        false
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn agrees_with_exhaustive_oracle(
            n in 1usize..10,
            raw in proptest::collection::vec(
                proptest::collection::vec(1i32..=9, 1..4), 1..40),
        ) {
            // Clamp literals into range and randomize polarity from value parity.
            let clauses: Vec<Vec<i32>> = raw.iter().map(|c| {
                c.iter().map(|&x| {
                    let v = ((x as usize - 1) % n + 1) as i32;
                    if x % 2 == 0 { -v } else { v }
                }).collect()
            }).collect();
            let mut s = Solver::new();
            let vars: Vec<Var> = (0..n).map(|_| s.new_var()).collect();
            let mut ok = true;
            for c in &clauses {
                if !s.add_clause(&lits(&vars, c)) {
                    ok = false;
                    break;
                }
            }
            let result = if !ok { SatResult::Unsat } else { s.solve(None) };
            let expect = brute_force(n, &clauses);
            prop_assert_eq!(result == SatResult::Sat, expect);
            if result == SatResult::Sat {
                for c in &clauses {
                    prop_assert!(lits(&vars, c).iter()
                        .any(|&l| s.value(l.var()) != l.is_neg()));
                }
            }
        }
    }
}
