use dpqa_core::sat::{Lit, SatResult, Solver};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn brute_force(n: usize, clauses: &[Vec<i32>]) -> bool {
    'outer: for mask in 0u64..(1 << n) {
        for c in clauses {
            let sat = c.iter().any(|&l| {
                let v = (l.unsigned_abs() - 1) as usize;
                let val = mask >> v & 1 == 1;
                if l > 0 { val } else { !val }
            });
            if !sat { continue 'outer; }
        }
        return true;
    }
    false
}

fn main() {
    let cases: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    for case in 0..cases {
        let n = rng.random_range(1..=14usize);
        let m = rng.random_range(1..=70usize);
        let clauses: Vec<Vec<i32>> = (0..m)
            .map(|_| {
                let len = rng.random_range(1..=4usize);
                (0..len)
                    .map(|_| {
                        let v = rng.random_range(1..=n as i32);
                        if rng.random_bool(0.5) { v } else { -v }
                    })
                    .collect()
            })
            .collect();
        let mut s = Solver::new();
        let vars: Vec<_> = (0..n).map(|_| s.new_var()).collect();
        let mut ok = true;
        for c in &clauses {
            let lits: Vec<Lit> = c
                .iter()
                .map(|&l| Lit::new(vars[(l.unsigned_abs() - 1) as usize], l < 0))
                .collect();
            if !s.add_clause(&lits) { ok = false; break; }
        }
        let got = if !ok { SatResult::Unsat } else { s.solve(None) };
        let expect = brute_force(n, &clauses);
        let got_sat = got == SatResult::Sat;
        if got_sat != expect {
            eprintln!("MISMATCH case {case}: n={n} clauses={clauses:?} got={got_sat} expect={expect}");
            std::process::exit(1);
        }
        if got_sat {
            for c in &clauses {
                let sat = c.iter().any(|&l| {
                    let v = vars[(l.unsigned_abs() - 1) as usize];
                    s.value(v) != (l < 0)
                });
                if !sat {
                    eprintln!("BAD MODEL case {case}");
                    std::process::exit(1);
                }
            }
        }
    }
    println!("fuzz: {cases} cases agree with the exhaustive oracle");
}
