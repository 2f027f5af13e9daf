//! Exclusivity graphs: vertices are measurement events, edges join pairs of
//! exclusive events.
//!
//! Vertices are 0-based internally; labels (1-based numbers by default) are
//! the only thing that crosses the file-format boundary.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Exhaustive odd-hole search refuses graphs above this size.
pub const HOLE_SEARCH_CAP: usize = 20;

/// Undirected simple graph with per-vertex labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusivityGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    labels: Vec<String>,
}

impl ExclusivityGraph {
    /// Builds a graph from unordered vertex pairs. Rejects self-loops and
    /// out-of-range indices; duplicate pairs collapse.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph must have at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "edge ({a},{b}) out of range for {n} vertices"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let labels = (1..=n).map(|i| i.to_string()).collect();
        Ok(Self {
            n,
            edges: set,
            labels,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::invalid(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        if labels.iter().unique().count() != self.n {
            return Err(Error::invalid("vertex labels must be distinct"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn edgeless(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).tuple_combinations::<(_, _)>();
        Self::new(n, edges)
    }

    /// Cycle on `n >= 3` vertices: edges `{i, i+1 mod n}`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("cycle needs n >= 3, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&u| self.is_edge(v, u)).count()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same vertices, complemented edge set. Labels carry over.
    pub fn complement(&self) -> Self {
        let mut edges = BTreeSet::new();
        for (a, b) in (0..self.n).tuple_combinations() {
            if !self.edges.contains(&(a, b)) {
                edges.insert((a, b));
            }
        }
        Self {
            n: self.n,
            edges,
            labels: self.labels.clone(),
        }
    }

    /// OR (disjunction) product: vertex set is the Cartesian product and
    /// `(u1,u2) ~ (v1,v2)` iff `u1 ~ v1` or `u2 ~ v2`.
    ///
    /// Labels become `(a,b)` pairs of the component labels.
    pub fn or_product(&self, other: &Self) -> Self {
        let n1 = self.n;
        let n2 = other.n;
        let idx = |a: usize, b: usize| a * n2 + b;
        let mut edges = BTreeSet::new();
        for (u1, u2) in (0..n1).cartesian_product(0..n2) {
            for (v1, v2) in (0..n1).cartesian_product(0..n2) {
                let (p, q) = (idx(u1, u2), idx(v1, v2));
                if p < q && (self.is_edge(u1, v1) || other.is_edge(u2, v2)) {
                    edges.insert((p, q));
                }
            }
        }
        let labels = (0..n1)
            .cartesian_product(0..n2)
            .map(|(a, b)| format!("({},{})", self.labels[a], other.labels[b]))
            .collect();
        Self {
            n: n1 * n2,
            edges,
            labels,
        }
    }

    /// Per-vertex neighbor bitsets; only valid for `n <= 64`.
    pub(crate) fn adjacency_bitsets(&self) -> Vec<u64> {
        debug_assert!(self.n <= 64);
        let mut adj = vec![0u64; self.n];
        for &(a, b) in &self.edges {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        adj
    }

    /// Exhaustively lists induced odd holes (chordless odd cycles of length
    /// `5..=max_len`) in the graph and in its complement.
    ///
    /// The scan is over all odd-size vertex subsets, so it is capped at
    /// [`HOLE_SEARCH_CAP`] vertices.
    pub fn find_induced_odd_holes(&self, max_len: usize) -> Result<OddHoleScan> {
        if self.n > HOLE_SEARCH_CAP {
            return Err(Error::SizeLimit {
                n: self.n,
                cap: HOLE_SEARCH_CAP,
            });
        }
        let holes = induced_odd_holes(self, max_len);
        let complement_holes = induced_odd_holes(&self.complement(), max_len);
        let nonclassical = !holes.is_empty() || !complement_holes.is_empty();
        Ok(OddHoleScan {
            holes,
            complement_holes,
            nonclassical,
        })
    }
}

/// Result of the odd-hole diagnostic.
///
/// `nonclassical` is set when the graph or its complement contains an induced
/// odd hole of length at least five, i.e. when the scenario admits
/// probabilities outside the classical set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddHoleScan {
    /// Sorted vertex subsets inducing odd holes in the graph itself.
    pub holes: Vec<Vec<usize>>,
    /// Sorted vertex subsets inducing odd holes in the complement (antiholes).
    pub complement_holes: Vec<Vec<usize>>,
    pub nonclassical: bool,
}

fn induced_odd_holes(g: &ExclusivityGraph, max_len: usize) -> Vec<Vec<usize>> {
    let mut found = Vec::new();
    let mut size = 5;
    while size <= max_len.min(g.n()) {
        for subset in (0..g.n()).combinations(size) {
            if induces_chordless_cycle(g, &subset) {
                found.push(subset);
            }
        }
        size += 2;
    }
    found
}

/// A subset induces a chordless cycle iff every member has exactly two
/// neighbors inside the subset and the induced subgraph is connected.
fn induces_chordless_cycle(g: &ExclusivityGraph, subset: &[usize]) -> bool {
    let deg_in = |v: usize| subset.iter().filter(|&&u| g.is_edge(v, u)).count();
    if subset.iter().any(|&v| deg_in(v) != 2) {
        return false;
    }
    // 2-regular and connected means a single cycle.
    let mut seen = vec![false; subset.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for (j, &u) in subset.iter().enumerate() {
            if !seen[j] && g.is_edge(subset[i], u) {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == subset.len()
}
