//! Goemans-Williamson baseline: the MaxCut semidefinite relaxation solved in
//! low-rank Burer-Monteiro form by Riemannian gradient ascent, followed by
//! random-hyperplane rounding.
//!
//! The relaxation objective over unit vectors `v_i` is
//! `f(V) = (1/2) sum_{(i,j) in E} C_ij (1 - v_i . v_j)`; rounding draws a
//! standard-normal vector `r` and assigns node `i` to side `sign(v_i . r)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{bits_to_string, cut_of_bits, CutResult, Graph};

/// Default rounding rounds for [`gw_maxcut`].
pub const DEFAULT_ROUNDS: usize = 1000;
/// Default ascent iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 100_000;
/// Default Riemannian gradient-norm tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Default factorization rank `ceil(sqrt(2n)) + 1`; above the Barvinok-Pataki
/// bound, so the low-rank problem generically has no spurious local maxima.
pub fn default_rank(num_nodes: usize) -> usize {
    ((2.0 * num_nodes as f64).sqrt().ceil() as usize + 1).max(2)
}

/// A unit-norm embedding of graph nodes on the rank-dimensional sphere,
/// together with the relaxation value it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    num_nodes: usize,
    rank: usize,
    /// Row-major `num_nodes x rank`; every row has unit Euclidean norm.
    vectors: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl Embedding {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vector(&self, node: usize) -> &[f64] {
        &self.vectors[node * self.rank..(node + 1) * self.rank]
    }
}

fn objective(graph: &Graph, vectors: &[f64], rank: usize) -> f64 {
    graph
        .edges()
        .map(|(i, j, w)| {
            let dot: f64 = (0..rank)
                .map(|k| vectors[i * rank + k] * vectors[j * rank + k])
                .sum();
            0.5 * w * (1.0 - dot)
        })
        .sum()
}

fn normalize_rows(vectors: &mut [f64], rank: usize) {
    for row in vectors.chunks_mut(rank) {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            for x in row {
                *x /= norm;
            }
        } else {
            row[0] = 1.0;
            for x in &mut row[1..] {
                *x = 0.0;
            }
        }
    }
}

/// Maximize the relaxation objective over the product of unit spheres.
///
/// Rows start uniformly on the sphere (seeded). Each iteration is one
/// coordinate-maximization sweep: row `i` is replaced by the exact optimizer
/// given the others, the normalized `-sum_j C_ij v_j`, which increases the
/// objective monotonically without any step size. At the default
/// over-parameterized rank this converges to the relaxation optimum from
/// random starts. Terminates when the Riemannian gradient norm drops below
/// `tol`; hitting `max_iters` first is reported through `converged`, not an
/// error.
pub fn solve_relaxation(
    graph: &Graph,
    rank: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<Embedding> {
    if rank < 2 {
        return Err(Error::validation(format!("rank {rank} must be at least 2")));
    }
    if tol <= 0.0 {
        return Err(Error::validation(format!("tolerance {tol} must be positive")));
    }
    let n = graph.num_nodes();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Vec<f64> = (0..n * rank)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    normalize_rows(&mut vectors, rank);

    let mut converged = false;
    let mut iterations = 0;
    let mut pull = vec![0.0; rank];

    while iterations < max_iters {
        iterations += 1;

        for i in 0..n {
            pull.iter_mut().for_each(|x| *x = 0.0);
            for j in 0..n {
                let w = graph.weight(i, j);
                if w != 0.0 {
                    for k in 0..rank {
                        pull[k] += w * vectors[j * rank + k];
                    }
                }
            }
            let norm = pull.iter().map(|x| x * x).sum::<f64>().sqrt();
            // Isolated rows (or exactly balanced pulls) stay where they are;
            // any unit vector is optimal for them.
            if norm > 1e-300 {
                for k in 0..rank {
                    vectors[i * rank + k] = -pull[k] / norm;
                }
            }
        }

        // Riemannian gradient: tangent projection of -(1/2) sum_j C_ij v_j
        // per row, measured on the post-sweep iterate.
        let mut grad_norm_sq = 0.0;
        for i in 0..n {
            pull.iter_mut().for_each(|x| *x = 0.0);
            for j in 0..n {
                let w = graph.weight(i, j);
                if w != 0.0 {
                    for k in 0..rank {
                        pull[k] -= 0.5 * w * vectors[j * rank + k];
                    }
                }
            }
            let radial: f64 = (0..rank)
                .map(|k| pull[k] * vectors[i * rank + k])
                .sum();
            grad_norm_sq += (0..rank)
                .map(|k| {
                    let t = pull[k] - radial * vectors[i * rank + k];
                    t * t
                })
                .sum::<f64>();
        }
        if grad_norm_sq.sqrt() < tol {
            converged = true;
            break;
        }
    }

    let objective = objective(graph, &vectors, rank);
    Ok(Embedding {
        num_nodes: n,
        rank,
        vectors,
        objective,
        converged,
        iterations,
    })
}

/// Best-of-`rounds` random-hyperplane rounding of an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct GwResult {
    pub best_cut: CutResult,
    pub relaxation_value: f64,
    pub rounds: usize,
    pub converged: bool,
}

/// Round an embedding `rounds` times, keeping the best cut. Round `r` draws
/// its normal vector from ChaCha8 stream `r + 1` of `seed`, so parallel and
/// serial execution order agree.
pub fn round_hyperplane(
    embedding: &Embedding,
    graph: &Graph,
    rounds: usize,
    seed: u64,
) -> Result<GwResult> {
    if rounds == 0 {
        return Err(Error::validation("rounding needs at least one round"));
    }
    if embedding.num_nodes() != graph.num_nodes() {
        return Err(Error::validation(format!(
            "embedding has {} nodes but graph has {}",
            embedding.num_nodes(),
            graph.num_nodes()
        )));
    }
    let rank = embedding.rank();
    let mut best_bits = 0u64;
    let mut best_value = f64::NEG_INFINITY;
    for round in 0..rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(round as u64 + 1);
        let normal: Vec<f64> = (0..rank).map(|_| StandardNormal.sample(&mut rng)).collect();

        let mut bits = 0u64;
        for node in 0..graph.num_nodes() {
            let dot: f64 = embedding
                .vector(node)
                .iter()
                .zip(&normal)
                .map(|(v, r)| v * r)
                .sum();
            // Zero dot products land on side 0 for reproducibility.
            if dot > 0.0 {
                bits |= 1 << node;
            }
        }
        let value = cut_of_bits(graph, bits);
        if value > best_value {
            best_value = value;
            best_bits = bits;
        }
    }
    Ok(GwResult {
        best_cut: CutResult {
            value: best_value,
            assignment: bits_to_string(best_bits, graph.num_nodes()),
        },
        relaxation_value: embedding.objective,
        rounds,
        converged: embedding.converged,
    })
}

/// Full Goemans-Williamson run with default solver hyperparameters.
pub fn gw_maxcut(graph: &Graph, rounds: usize, seed: u64) -> Result<GwResult> {
    let embedding = solve_relaxation(
        graph,
        default_rank(graph.num_nodes()),
        DEFAULT_MAX_ITERS,
        DEFAULT_TOL,
        seed,
    )?;
    round_hyperplane(&embedding, graph, rounds, seed)
}
