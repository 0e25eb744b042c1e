//! Two-qubit-gate circuit IR and structural analyses.
//!
//! A circuit is a list of two-qubit gates over `n` qubits. Benchmarks are
//! *graph circuits*: one commuting entangling gate per edge of a random
//! regular graph. Non-commutable circuits carry a dependency DAG, either
//! given explicitly or derived from program order between gates that share
//! a qubit.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Attempts before the configuration-model sampler gives up.
const PAIRING_RETRY_CAP: usize = 10_000;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("gate {id} is a self-loop on qubit {q}")]
    SelfLoop { id: usize, q: u32 },
    #[error("gate {id} references qubit {q} but the circuit has {n} qubits")]
    QubitOutOfRange { id: usize, q: u32, n: u32 },
    #[error("dependency ({a}, {b}) references a gate outside 0..{g}")]
    DepOutOfRange { a: u32, b: u32, g: u32 },
    #[error("commutable circuits cannot carry explicit dependencies")]
    CommutableWithDeps,
    #[error("explicit dependencies contain a cycle")]
    CyclicDeps,
    #[error("cannot build a simple {degree}-regular graph on {n} nodes")]
    InfeasibleRegular { n: u32, degree: u32 },
    #[error("pairing-model sampler exceeded {0} retries")]
    RetryCapExceeded(usize),
    #[error("circuit document: {0}")]
    Schema(#[from] serde_json::Error),
}

/// A two-qubit entangling gate. Operands are stored with `q_lo < q_hi`;
/// ids are dense positional indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gate {
    pub id: u32,
    pub q_lo: u32,
    pub q_hi: u32,
}

impl Gate {
    pub fn touches(&self, q: u32) -> bool {
        self.q_lo == q || self.q_hi == q
    }

    pub fn shares_qubit(&self, other: &Gate) -> bool {
        self.touches(other.q_lo) || self.touches(other.q_hi)
    }
}

/// On-disk circuit document.
///
/// `deps` is only meaningful for non-commutable circuits; when absent, the
/// dependency DAG is derived from program order between gates sharing a
/// qubit.
#[derive(Debug, Serialize, Deserialize)]
pub struct CircuitDoc {
    pub n: u32,
    pub commutable: bool,
    pub gates: Vec<[u32; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deps: Option<Vec<[u32; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: u32,
    gates: Vec<Gate>,
    commutable: bool,
    explicit_deps: Option<Vec<(u32, u32)>>,
}

/// Per-pair gate lists: `rho(i, i')` holds every gate acting on exactly that
/// unordered qubit pair. Pairs that never interact are absent.
#[derive(Debug, Clone, Default)]
pub struct InteractionMap {
    rho: BTreeMap<(u32, u32), Vec<u32>>,
}

impl InteractionMap {
    pub fn gates_on(&self, i: u32, i2: u32) -> &[u32] {
        let key = (i.min(i2), i.max(i2));
        self.rho.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(u32, u32), &Vec<u32>)> {
        self.rho.iter()
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

impl Circuit {
    pub fn new(
        num_qubits: u32,
        pairs: &[(u32, u32)],
        commutable: bool,
        deps: Option<Vec<(u32, u32)>>,
    ) -> Result<Self, CircuitError> {
        let mut gates = Vec::with_capacity(pairs.len());
        for (id, &(a, b)) in pairs.iter().enumerate() {
            if a == b {
                return Err(CircuitError::SelfLoop { id, q: a });
            }
            for q in [a, b] {
                if q >= num_qubits {
                    return Err(CircuitError::QubitOutOfRange { id, q, n: num_qubits });
                }
            }
            gates.push(Gate { id: id as u32, q_lo: a.min(b), q_hi: a.max(b) });
        }
        if commutable && deps.as_ref().is_some_and(|d| !d.is_empty()) {
            return Err(CircuitError::CommutableWithDeps);
        }
        let g = gates.len() as u32;
        if let Some(d) = &deps {
            for &(a, b) in d {
                if a >= g || b >= g {
                    return Err(CircuitError::DepOutOfRange { a, b, g });
                }
            }
        }
        let c = Circuit { num_qubits, gates, commutable, explicit_deps: deps };
        // Reject cyclic explicit deps up front; depth is needed everywhere.
        c.dependency_depth()?;
        Ok(c)
    }

    /// Parses and validates a circuit document.
    pub fn from_json(text: &str) -> Result<Self, CircuitError> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        let pairs: Vec<(u32, u32)> = doc.gates.iter().map(|g| (g[0], g[1])).collect();
        let deps = doc.deps.map(|d| d.iter().map(|p| (p[0], p[1])).collect());
        Circuit::new(doc.n, &pairs, doc.commutable, deps)
    }

    pub fn to_json(&self) -> String {
        let doc = CircuitDoc {
            n: self.num_qubits,
            commutable: self.commutable,
            gates: self.gates.iter().map(|g| [g.q_lo, g.q_hi]).collect(),
            deps: self.explicit_deps.as_ref().map(|d| d.iter().map(|&(a, b)| [a, b]).collect()),
        };
        serde_json::to_string_pretty(&doc).expect("circuit serializes")
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn num_gates(&self) -> u32 {
        self.gates.len() as u32
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: u32) -> &Gate {
        &self.gates[id as usize]
    }

    pub fn is_commutable(&self) -> bool {
        self.commutable
    }

    /// The dependency DAG edges `(j, j')` meaning gate `j` must run strictly
    /// before gate `j'`. Explicit deps, when given, *are* the DAG; otherwise
    /// non-commutable circuits order consecutive gates sharing a qubit by
    /// program order. Commutable circuits have no ordering at all.
    pub fn dependency_pairs(&self) -> Vec<(u32, u32)> {
        if self.commutable {
            return Vec::new();
        }
        if let Some(d) = &self.explicit_deps {
            return d.clone();
        }
        let mut edges = BTreeSet::new();
        let mut last_on_qubit: BTreeMap<u32, u32> = BTreeMap::new();
        for g in &self.gates {
            for q in [g.q_lo, g.q_hi] {
                if let Some(&prev) = last_on_qubit.get(&q) {
                    edges.insert((prev, g.id));
                }
                last_on_qubit.insert(q, g.id);
            }
        }
        edges.into_iter().collect()
    }

    /// Length (in gates) of the longest chain in the dependency DAG; the
    /// depth lower-bounds the stage count of any valid schedule.
    pub fn dependency_depth(&self) -> Result<usize, CircuitError> {
        let g = self.gates.len();
        if g == 0 {
            return Ok(0);
        }
        if self.commutable {
            return Ok(1);
        }
        let edges = self.dependency_pairs();
        let mut succ: Vec<Vec<u32>> = vec![Vec::new(); g];
        let mut indeg = vec![0usize; g];
        for &(a, b) in &edges {
            succ[a as usize].push(b);
            indeg[b as usize] += 1;
        }
        let mut depth = vec![1usize; g];
        let mut queue: Vec<u32> =
            (0..g as u32).filter(|&j| indeg[j as usize] == 0).collect();
        let mut seen = 0;
        while let Some(j) = queue.pop() {
            seen += 1;
            for &k in &succ[j as usize] {
                depth[k as usize] = depth[k as usize].max(depth[j as usize] + 1);
                indeg[k as usize] -= 1;
                if indeg[k as usize] == 0 {
                    queue.push(k);
                }
            }
        }
        if seen != g {
            return Err(CircuitError::CyclicDeps);
        }
        Ok(depth.into_iter().max().unwrap_or(0))
    }

    /// The per-pair gate lists used by the interaction-exactness constraints.
    pub fn interaction_map(&self) -> InteractionMap {
        let mut rho = BTreeMap::new();
        for g in &self.gates {
            rho.entry((g.q_lo, g.q_hi)).or_insert_with(Vec::new).push(g.id);
        }
        InteractionMap { rho }
    }

    /// All unordered gate pairs sharing a qubit; such gates can never run in
    /// the same stage.
    pub fn collision_pairs(&self) -> BTreeSet<(u32, u32)> {
        let mut out = BTreeSet::new();
        for a in &self.gates {
            for b in &self.gates[a.id as usize + 1..] {
                if a.shares_qubit(b) {
                    out.insert((a.id, b.id));
                }
            }
        }
        out
    }
}

/// Maximum matching number of the multigraph formed by the given gates:
/// an upper bound on how many of them can run in a single stage.
pub fn max_matching_bound(num_qubits: u32, gates: &[Gate]) -> usize {
    let mut graph: UnGraph<(), ()> = UnGraph::default();
    let nodes: Vec<_> = (0..num_qubits).map(|_| graph.add_node(())).collect();
    let mut seen = HashSet::new();
    for g in gates {
        if seen.insert((g.q_lo, g.q_hi)) {
            graph.add_edge(nodes[g.q_lo as usize], nodes[g.q_hi as usize], ());
        }
    }
    maximum_matching(&graph).edges().count()
}

/// Samples a uniform simple `degree`-regular graph on `n` nodes via the
/// pairing model (rejecting self-loops and multi-edges) and returns its
/// graph circuit: one commuting gate per edge, edges sorted.
pub fn generate_graph_circuit(n: u32, degree: u32, seed: u64) -> Result<Circuit, CircuitError> {
    if degree >= n || (n as u64 * degree as u64) % 2 == 1 {
        return Err(CircuitError::InfeasibleRegular { n, degree });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<u32> = (0..n).flat_map(|v| std::iter::repeat(v).take(degree as usize)).collect();
    'attempt: for _ in 0..PAIRING_RETRY_CAP {
        stubs.shuffle(&mut rng);
        let mut edges = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !edges.insert((a, b)) {
                continue 'attempt;
            }
        }
        let pairs: Vec<(u32, u32)> = edges.into_iter().collect();
        return Circuit::new(n, &pairs, true, None);
    }
    Err(CircuitError::RetryCapExceeded(PAIRING_RETRY_CAP))
}
