//! Textual SMT-LIB2 (QF_LIA) rendering of a model, with stable declaration
//! and assertion order so dumps can be golden-file tested and piped to an
//! external solver.

use crate::model::{Atom, Formula, Model};

fn int_lit(k: i64) -> String {
    if k < 0 {
        format!("(- {})", -k)
    } else {
        k.to_string()
    }
}

fn atom_sexpr(m: &Model, a: &Atom) -> String {
    match *a {
        Atom::Le(u, v, k) => {
            let un = &m.ints[u.0 as usize].name;
            let vn = &m.ints[v.0 as usize].name;
            match k {
                0 => format!("(<= {un} {vn})"),
                -1 => format!("(< {un} {vn})"),
                _ => format!("(<= {un} (+ {vn} {}))", int_lit(k)),
            }
        }
        Atom::Eq(u, v) => {
            format!("(= {} {})", m.ints[u.0 as usize].name, m.ints[v.0 as usize].name)
        }
        Atom::EqC(u, k) => format!("(= {} {})", m.ints[u.0 as usize].name, int_lit(k)),
    }
}

fn formula_sexpr(m: &Model, f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Atom(a) => atom_sexpr(m, a),
        Formula::Aux(b) => m.bools[b.0 as usize].name.clone(),
        Formula::Not(g) => format!("(not {})", formula_sexpr(m, g)),
        Formula::And(gs) => nary(m, "and", gs),
        Formula::Or(gs) => nary(m, "or", gs),
        Formula::Implies(a, b) => {
            format!("(=> {} {})", formula_sexpr(m, a), formula_sexpr(m, b))
        }
    }
}

fn nary(m: &Model, op: &str, gs: &[Formula]) -> String {
    match gs.len() {
        0 => if op == "and" { "true".into() } else { "false".into() },
        1 => formula_sexpr(m, &gs[0]),
        _ => {
            let parts: Vec<String> = gs.iter().map(|g| formula_sexpr(m, g)).collect();
            format!("({op} {})", parts.join(" "))
        }
    }
}

/// Renders the whole model, ending with `(check-sat)`.
pub fn dump(m: &Model) -> String {
    let mut out = String::new();
    out.push_str("(set-logic QF_LIA)\n");
    out.push_str(&format!(
        "; qubits={} stages={} gates={} core-vars={}\n",
        m.vars.n,
        m.vars.s,
        m.vars.g,
        m.core_var_count()
    ));
    for iv in &m.ints {
        out.push_str(&format!("(declare-const {} Int)\n", iv.name));
    }
    for bv in &m.bools {
        out.push_str(&format!("(declare-const {} Bool)\n", bv.name));
    }
    out.push_str("; family: bounds\n");
    for iv in &m.ints {
        out.push_str(&format!(
            "(assert (and (<= {} {}) (< {} {})))\n",
            int_lit(iv.lo),
            iv.name,
            iv.name,
            int_lit(iv.hi)
        ));
    }
    let mut last_family = None;
    for (fam, f) in &m.assertions {
        if last_family != Some(*fam) {
            out.push_str(&format!("; family: {}\n", fam.name()));
            last_family = Some(*fam);
        }
        out.push_str(&format!("(assert {})\n", formula_sexpr(m, f)));
    }
    out.push_str("(check-sat)\n");
    out
}
