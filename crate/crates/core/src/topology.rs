//! Coupling graphs: which qubit pairs may host an entangler.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::MAX_QUBITS;

/// Undirected, connected qubit-link graph. Edges are stored sorted as
/// (low, high) pairs so successor enumeration is deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingGraph {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl CouplingGraph {
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "qubit count {num_qubits} out of range 1..={MAX_QUBITS}"
            )));
        }
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop on qubit {a}")));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::Validation(format!(
                    "edge ({a},{b}) references a qubit >= {num_qubits}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !normalized.contains(&e) {
                normalized.push(e);
            }
        }
        normalized.sort_unstable();
        let graph = Self {
            num_qubits,
            edges: normalized,
        };
        if !graph.is_connected() {
            return Err(Error::Validation(
                "coupling graph is disconnected; generic synthesis is impossible".into(),
            ));
        }
        Ok(graph)
    }

    /// Nearest-neighbor chain 0-1-2-...-(n-1).
    pub fn linear(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, (1..num_qubits).map(|i| (i - 1, i)))
    }

    /// Fully connected graph on n qubits.
    pub fn all_to_all(num_qubits: usize) -> Result<Self> {
        let edges = (0..num_qubits)
            .flat_map(|a| ((a + 1)..num_qubits).map(move |b| (a, b)));
        Self::new(num_qubits, edges)
    }

    /// Load `{ "num_qubits": n, "edges": [[a,b],...] }`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            num_qubits: usize,
            edges: Vec<(usize, usize)>,
        }
        let file: File =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("topology JSON: {e}")))?;
        Self::new(file.num_qubits, file.edges)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Union-find reachability over the edge list.
    fn is_connected(&self) -> bool {
        if self.num_qubits == 1 {
            return true;
        }
        let mut parent: Vec<usize> = (0..self.num_qubits).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, 0);
        (1..self.num_qubits).all(|q| find(&mut parent, q) == root)
    }
}
