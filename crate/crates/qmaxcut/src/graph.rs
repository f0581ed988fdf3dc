//! Graph data model, Erdős–Rényi sampling, the exact MaxCut oracle, and the
//! line-oriented graph file format.
//!
//! Bitstring convention: assignments are written most-significant-bit first,
//! so node `i` occupies bit `i` of the assignment integer and the *rightmost*
//! character of the string. This matches the basis-index convention of the
//! simulator ([`crate::sim`]).

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest node count accepted by the brute-force oracle.
pub const MAX_BRUTE_FORCE_NODES: usize = 24;

/// An undirected weighted graph stored as a dense symmetric adjacency matrix
/// with zero diagonal. All experiments in this crate use unit weights, but
/// arbitrary nonnegative weights are carried through every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    /// Row-major `num_nodes * num_nodes` weights; symmetric, zero diagonal.
    weights: Vec<f64>,
}

impl Graph {
    /// An edgeless graph on `num_nodes` nodes.
    pub fn empty(num_nodes: usize) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::validation("graph must have at least one node"));
        }
        Ok(Graph {
            num_nodes,
            weights: vec![0.0; num_nodes * num_nodes],
        })
    }

    /// Build a graph from `(i, j, weight)` edge records.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Graph::empty(num_nodes)?;
        for &(i, j, w) in edges {
            g.add_edge(i, j, w)?;
        }
        Ok(g)
    }

    /// The complete graph K_n with unit weights.
    pub fn complete(num_nodes: usize) -> Result<Self> {
        let mut g = Graph::empty(num_nodes)?;
        for i in 0..num_nodes {
            for j in (i + 1)..num_nodes {
                g.add_edge(i, j, 1.0)?;
            }
        }
        Ok(g)
    }

    /// The cycle graph C_n with unit weights.
    pub fn cycle(num_nodes: usize) -> Result<Self> {
        if num_nodes < 3 {
            return Err(Error::validation("cycle graph needs at least 3 nodes"));
        }
        let mut g = Graph::empty(num_nodes)?;
        for i in 0..num_nodes {
            let j = (i + 1) % num_nodes;
            g.add_edge(i.min(j), i.max(j), 1.0)?;
        }
        Ok(g)
    }

    /// Set the weight of edge `(i, j)`. Rejects self-loops, out-of-range
    /// indices, and negative or non-finite weights.
    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        if i >= self.num_nodes || j >= self.num_nodes {
            return Err(Error::validation(format!(
                "edge ({i}, {j}) out of range for {} nodes",
                self.num_nodes
            )));
        }
        if i == j {
            return Err(Error::validation(format!("self-loop on node {i}")));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::validation(format!(
                "edge ({i}, {j}) has invalid weight {weight}"
            )));
        }
        self.weights[i * self.num_nodes + j] = weight;
        self.weights[j * self.num_nodes + i] = weight;
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Weight of edge `(i, j)`; zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.num_nodes + j]
    }

    /// Edges `(i, j, weight)` with `i < j`, ascending lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_nodes).flat_map(move |i| {
            ((i + 1)..self.num_nodes).filter_map(move |j| {
                let w = self.weight(i, j);
                (w != 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Largest weighted degree over nodes; used to scale ascent steps.
    pub(crate) fn max_weighted_degree(&self) -> f64 {
        (0..self.num_nodes)
            .map(|i| (0..self.num_nodes).map(|j| self.weight(i, j)).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// An exact MaxCut solution: the cut weight together with one achieving
/// assignment (node 0 is always on side `0`).
#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub value: f64,
    pub assignment: String,
}

/// Cut weight of the assignment encoded in the bits of `bits`
/// (node `i` reads bit `i`).
pub fn cut_of_bits(graph: &Graph, bits: u64) -> f64 {
    graph
        .edges()
        .map(|(i, j, w)| {
            if ((bits >> i) ^ (bits >> j)) & 1 == 1 {
                w
            } else {
                0.0
            }
        })
        .sum()
}

/// Render an assignment integer as a bitstring, most significant bit first
/// (node 0 is the rightmost character).
pub fn bits_to_string(bits: u64, num_nodes: usize) -> String {
    let mut s = String::with_capacity(num_nodes);
    for i in (0..num_nodes).rev() {
        let _ = write!(s, "{}", (bits >> i) & 1);
    }
    s
}

/// Parse a bitstring written most significant bit first.
pub fn string_to_bits(assignment: &str) -> Result<u64> {
    let mut bits = 0u64;
    for (pos, c) in assignment.chars().enumerate() {
        bits <<= 1;
        match c {
            '0' => {}
            '1' => bits |= 1,
            _ => {
                return Err(Error::validation(format!(
                    "assignment character {c:?} at position {pos} is not 0/1"
                )))
            }
        }
    }
    Ok(bits)
}

/// Total weight of edges crossing the partition described by `assignment`.
pub fn cut_value(graph: &Graph, assignment: &str) -> Result<f64> {
    if assignment.len() != graph.num_nodes() {
        return Err(Error::validation(format!(
            "assignment length {} does not match {} nodes",
            assignment.len(),
            graph.num_nodes()
        )));
    }
    Ok(cut_of_bits(graph, string_to_bits(assignment)?))
}

/// Sample one graph from the Erdős–Rényi ensemble G(n, p): every unordered
/// pair becomes a unit-weight edge independently with probability
/// `edge_prob`. Deterministic for a given seed (ChaCha8 stream, pairs visited
/// in ascending lexicographic order).
pub fn sample_erdos_renyi(num_nodes: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::validation(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut g = Graph::empty(num_nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..num_nodes {
        for j in (i + 1)..num_nodes {
            if rng.random::<f64>() < edge_prob {
                g.add_edge(i, j, 1.0)?;
            }
        }
    }
    Ok(g)
}

/// Exact maximum cut by exhaustive enumeration.
///
/// Cut values are symmetric under complementing the assignment, so node 0 is
/// pinned to side `0` and only `2^(n-1)` assignments are visited. Ties are
/// broken in favor of the smallest assignment integer.
pub fn brute_force_maxcut(graph: &Graph) -> Result<CutResult> {
    let n = graph.num_nodes();
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(Error::Capacity {
            what: "brute-force node count",
            requested: n,
            max: MAX_BRUTE_FORCE_NODES,
        });
    }
    let edges: Vec<(usize, usize, f64)> = graph.edges().collect();
    let mut best_bits = 0u64;
    let mut best_value = 0.0f64;
    // Node 0 lives in bit 0; enumerating even integers keeps it on side 0.
    for k in 0..(1u64 << (n - 1)) {
        let bits = k << 1;
        let mut value = 0.0;
        for &(i, j, w) in &edges {
            if ((bits >> i) ^ (bits >> j)) & 1 == 1 {
                value += w;
            }
        }
        if value > best_value {
            best_value = value;
            best_bits = bits;
        }
    }
    Ok(CutResult {
        value: best_value,
        assignment: bits_to_string(best_bits, n),
    })
}

/// Write graphs in the line-oriented text format (see [`read_graphs`]).
pub fn write_graphs<W: Write>(graphs: &[Graph], writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for g in graphs {
        writeln!(w, "graph {}", g.num_nodes())?;
        for (i, j, weight) in g.edges() {
            writeln!(w, "edge {i} {j} {weight}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write graphs to a file path.
pub fn write_graphs_to_path<P: AsRef<Path>>(graphs: &[Graph], path: P) -> Result<()> {
    let file = fs::File::create(path)?;
    write_graphs(graphs, file)
}

/// Read graphs from the line-oriented text format:
///
/// ```text
/// graph <num_nodes>
/// edge <i> <j> <weight>      # one line per edge, i < j
/// ```
///
/// Multiple graphs are concatenated; `#` starts a comment line. Malformed
/// records are rejected with the offending line number.
pub fn read_graphs_from_str(text: &str) -> Result<Vec<Graph>> {
    let mut graphs: Vec<Graph> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("graph") => {
                let n: usize = fields
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "graph line missing node count"))?
                    .parse()
                    .map_err(|_| Error::parse(lineno, "invalid node count"))?;
                if fields.next().is_some() {
                    return Err(Error::parse(lineno, "trailing fields on graph line"));
                }
                graphs.push(Graph::empty(n).map_err(|e| Error::parse(lineno, e.to_string()))?);
            }
            Some("edge") => {
                let g = graphs
                    .last_mut()
                    .ok_or_else(|| Error::parse(lineno, "edge record before any graph header"))?;
                let mut next_field = |name: &str| {
                    fields
                        .next()
                        .ok_or_else(|| Error::parse(lineno, format!("edge line missing {name}")))
                        .map(str::to_owned)
                };
                let i: usize = next_field("source")?
                    .parse()
                    .map_err(|_| Error::parse(lineno, "invalid edge endpoint"))?;
                let j: usize = next_field("target")?
                    .parse()
                    .map_err(|_| Error::parse(lineno, "invalid edge endpoint"))?;
                let weight: f64 = next_field("weight")?
                    .parse()
                    .map_err(|_| Error::parse(lineno, "invalid edge weight"))?;
                if fields.next().is_some() {
                    return Err(Error::parse(lineno, "trailing fields on edge line"));
                }
                if i >= j {
                    return Err(Error::parse(
                        lineno,
                        format!("edge ({i}, {j}) must be listed with i < j"),
                    ));
                }
                if g.weight(i.min(j), i.max(j)) != 0.0 {
                    return Err(Error::parse(lineno, format!("duplicate edge ({i}, {j})")));
                }
                g.add_edge(i, j, weight)
                    .map_err(|e| Error::parse(lineno, e.to_string()))?;
            }
            Some(other) => {
                return Err(Error::parse(lineno, format!("unknown record {other:?}")));
            }
            None => unreachable!("blank lines are skipped"),
        }
    }
    Ok(graphs)
}

/// Read graphs from a file path.
pub fn read_graphs<P: AsRef<Path>>(path: P) -> Result<Vec<Graph>> {
    let text = fs::read_to_string(path)?;
    read_graphs_from_str(&text)
}
