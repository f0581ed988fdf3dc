//! The QAOA ansatz for MaxCut: state preparation, exact expected cut, and
//! analytic gradients with respect to all `2P` angles.
//!
//! For a graph with adjacency weights `C` and a `P`-step protocol, the
//! prepared state is
//!
//! ```text
//! V_P U_P ... V_1 U_1 H^(x n) |0...0>
//! ```
//!
//! where `U_p` applies `ZZPHASE(gamma_p * C_ij)` to every edge `(i, j)` in
//! ascending lexicographic order (all factors commute) and `V_p` applies
//! `RX(beta_p)` to every qubit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{cut_of_bits, Graph};
use crate::sim::{expectation_cut, Gate, StateVector};

/// The trainable QAOA angles: `P` mixer angles (betas) and `P` cost angles
/// (gammas). Values are periodic but never wrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    betas: Vec<f64>,
    gammas: Vec<f64>,
}

impl Protocol {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        if betas.len() != gammas.len() {
            return Err(Error::validation(format!(
                "{} betas but {} gammas",
                betas.len(),
                gammas.len()
            )));
        }
        Ok(Protocol { betas, gammas })
    }

    /// The zero-step protocol (Hadamard layer only).
    pub fn trivial() -> Self {
        Protocol {
            betas: Vec::new(),
            gammas: Vec::new(),
        }
    }

    /// Number of QAOA steps `P`.
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Flatten to `[beta_1..beta_P, gamma_1..gamma_P]`; gradients and
    /// optimizer state use the same layout.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = self.betas.clone();
        flat.extend_from_slice(&self.gammas);
        flat
    }

    /// Inverse of [`Protocol::flatten`].
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::validation(format!(
                "flattened protocol length {} is odd",
                flat.len()
            )));
        }
        let p = flat.len() / 2;
        Ok(Protocol {
            betas: flat[..p].to_vec(),
            gammas: flat[p..].to_vec(),
        })
    }
}

/// Gradient slot of a parameterized gate: index into the flattened protocol
/// plus the chain-rule scale (the edge weight for cost gates).
#[derive(Debug, Clone, Copy)]
struct ParamRef {
    slot: usize,
    scale: f64,
}

fn build_circuit(graph: &Graph, protocol: &Protocol) -> Vec<(Gate, Option<ParamRef>)> {
    let n = graph.num_nodes();
    let p = protocol.steps();
    let edges: Vec<(usize, usize, f64)> = graph.edges().collect();
    let mut gates = Vec::with_capacity(p * (edges.len() + n));
    for step in 0..p {
        let gamma = protocol.gammas[step];
        for &(i, j, w) in &edges {
            gates.push((
                Gate::ZZPhase {
                    a: i,
                    b: j,
                    theta: gamma * w,
                },
                Some(ParamRef {
                    slot: p + step,
                    scale: w,
                }),
            ));
        }
        let beta = protocol.betas[step];
        for q in 0..n {
            gates.push((
                Gate::RX { qubit: q, theta: beta },
                Some(ParamRef {
                    slot: step,
                    scale: 1.0,
                }),
            ));
        }
    }
    gates
}

/// Prepare the QAOA state for `graph` under `protocol`.
pub fn evolve(graph: &Graph, protocol: &Protocol) -> Result<StateVector> {
    let mut state = StateVector::zero(graph.num_nodes())?;
    state.hadamard_all();
    for (gate, _) in build_circuit(graph, protocol) {
        state.apply(&gate)?;
    }
    Ok(state)
}

/// Exact `<beta,gamma| H_C |beta,gamma>`; bounded by the brute-force optimum.
pub fn expected_cut(graph: &Graph, protocol: &Protocol) -> Result<f64> {
    expectation_cut(&evolve(graph, protocol)?, graph)
}

/// Exact partial derivatives of [`expected_cut`] with respect to the
/// flattened protocol `[d/dbeta_1.., d/dgamma_1..]`.
///
/// Computed by an adjoint reverse sweep: keep the evolved ket and the
/// cost-operator-applied adjoint state, un-apply gates from last to first,
/// and accumulate each gate's generator overlap. Cost is linear in circuit
/// length with two live state vectors.
pub fn gradient(graph: &Graph, protocol: &Protocol) -> Result<Vec<f64>> {
    let circuit = build_circuit(graph, protocol);
    let mut ket = evolve(graph, protocol)?;

    // bra = H_C |psi>, with H_C diagonal in cut values.
    let cut_table: Vec<f64> = (0..ket.dim())
        .map(|z| cut_of_bits(graph, z as u64))
        .collect();
    let mut bra = StateVector::from_amplitudes_unchecked(
        ket.amplitudes()
            .iter()
            .zip(&cut_table)
            .map(|(amp, cut)| amp * cut)
            .collect(),
    );

    let mut grad = vec![0.0; 2 * protocol.steps()];
    for (gate, param) in circuit.iter().rev() {
        let param = param.expect("every ansatz gate past the Hadamard layer is parameterized");
        match *gate {
            // d/dtheta RX = -(i/2) X * RX, so the contribution is
            // Im(<bra| X_q |ket>).
            Gate::RX { qubit, .. } => {
                grad[param.slot] += param.scale * x_overlap(&bra, &ket, qubit).im;
            }
            // d/dtheta ZZPHASE = -i A * ZZPHASE with A the projector onto
            // anti-aligned states: contribution 2*Im(<bra| A |ket>).
            Gate::ZZPhase { a, b, .. } => {
                grad[param.slot] += 2.0 * param.scale * antialigned_overlap(&bra, &ket, a, b).im;
            }
            other => panic!("unexpected ansatz gate {other:?}"),
        }
        let inverse = gate.inverse();
        ket.apply(&inverse)?;
        bra.apply(&inverse)?;
    }
    Ok(grad)
}

fn x_overlap(bra: &StateVector, ket: &StateVector, qubit: usize) -> Complex64 {
    let mask = 1usize << qubit;
    bra.amplitudes()
        .iter()
        .enumerate()
        .map(|(z, b)| b.conj() * ket.amplitudes()[z ^ mask])
        .sum()
}

fn antialigned_overlap(bra: &StateVector, ket: &StateVector, a: usize, b: usize) -> Complex64 {
    bra.amplitudes()
        .iter()
        .zip(ket.amplitudes())
        .enumerate()
        .filter(|(z, _)| ((z >> a) ^ (z >> b)) & 1 == 1)
        .map(|(_, (x, y))| x.conj() * y)
        .sum()
}

/// Mean expected cut over a batch of graphs, summed in ascending index order
/// for bitwise reproducibility.
pub fn batch_expected_cut(graphs: &[Graph], protocol: &Protocol) -> Result<f64> {
    validate_batch(graphs)?;
    let mut total = 0.0;
    for g in graphs {
        total += expected_cut(g, protocol)?;
    }
    Ok(total / graphs.len() as f64)
}

pub(crate) fn validate_batch(graphs: &[Graph]) -> Result<()> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::validation("graph batch is empty"))?;
    if let Some(bad) = graphs.iter().find(|g| g.num_nodes() != first.num_nodes()) {
        return Err(Error::validation(format!(
            "graph batch mixes {} and {} nodes",
            first.num_nodes(),
            bad.num_nodes()
        )));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn finite_difference_gradient(
    graph: &Graph,
    protocol: &Protocol,
    eps: f64,
) -> Vec<f64> {
    let flat = protocol.flatten();
    (0..flat.len())
        .map(|slot| {
            let mut plus = flat.clone();
            plus[slot] += eps;
            let mut minus = flat.clone();
            minus[slot] -= eps;
            let up = expected_cut(graph, &Protocol::from_flat(&plus).unwrap()).unwrap();
            let down = expected_cut(graph, &Protocol::from_flat(&minus).unwrap()).unwrap();
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Gradient agreement criterion: relative error 1e-5, absolute 1e-7 for
/// near-zero components.
#[cfg(test)]
pub(crate) fn gradients_agree(analytic: &[f64], reference: &[f64]) -> bool {
    analytic.iter().zip(reference).all(|(a, f)| {
        let tol = f64::max(1e-5 * f64::max(a.abs(), f.abs()), 1e-7);
        (a - f).abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{brute_force_maxcut, sample_erdos_renyi};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_edge() -> Graph {
        Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn random_protocol(steps: usize, seed: u64) -> Protocol {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let betas = (0..steps).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let gammas = (0..steps).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        Protocol::new(betas, gammas).unwrap()
    }

    #[test]
    fn zero_steps_gives_uniform_superposition() {
        let g = Graph::complete(3).unwrap();
        let state = evolve(&g, &Protocol::trivial()).unwrap();
        for amp in state.amplitudes() {
            assert_relative_eq!(amp.norm_sqr(), 1.0 / 8.0, max_relative = 1e-13);
        }
        assert_relative_eq!(
            expected_cut(&g, &Protocol::trivial()).unwrap(),
            1.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_betas_keep_distribution_uniform() {
        let g = sample_erdos_renyi(6, 0.5, 3).unwrap();
        let protocol = Protocol::new(vec![0.0; 3], vec![0.4, 0.9, 1.3]).unwrap();
        let e = expected_cut(&g, &protocol).unwrap();
        assert_relative_eq!(e, g.edge_count() as f64 / 2.0, epsilon = 1e-12);
        // Diagonal layers only change phases, so all gamma derivatives vanish.
        let grad = gradient(&g, &protocol).unwrap();
        for dgamma in &grad[3..] {
            assert!(dgamma.abs() < 1e-12, "gamma derivative {dgamma}");
        }
    }

    #[test]
    fn empty_graph_expected_cut_is_zero() {
        let g = Graph::empty(3).unwrap();
        let protocol = random_protocol(2, 5);
        assert_eq!(expected_cut(&g, &protocol).unwrap(), 0.0);
    }

    #[test]
    fn single_edge_closed_form_and_grid_optimum() {
        // Grid-search oracle on the 2-qubit simulator: the P = 1 optimum of a
        // single edge is 1.0, and the closed form (1 + sin(2b) sin(g)) / 2
        // matches the simulated expectation everywhere on the grid.
        let g = single_edge();
        let mut best = f64::NEG_INFINITY;
        for bi in 0..60 {
            let beta = std::f64::consts::PI * bi as f64 / 60.0;
            for gi in 0..120 {
                let gamma = 2.0 * std::f64::consts::PI * gi as f64 / 120.0;
                let protocol = Protocol::new(vec![beta], vec![gamma]).unwrap();
                let e = expected_cut(&g, &protocol).unwrap();
                let closed = (1.0 + (2.0 * beta).sin() * gamma.sin()) / 2.0;
                assert_relative_eq!(e, closed, epsilon = 1e-12);
                best = best.max(e);
            }
        }
        assert!(best <= 1.0 + 1e-12);
        assert!(best > 0.999, "grid best {best}");

        // The analytic optimum itself.
        let optimal = Protocol::new(
            vec![std::f64::consts::FRAC_PI_4],
            vec![std::f64::consts::FRAC_PI_2],
        )
        .unwrap();
        assert_relative_eq!(expected_cut(&g, &optimal).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences_single_edge() {
        let g = single_edge();
        let protocol = Protocol::new(vec![0.3], vec![0.7]).unwrap();
        let analytic = gradient(&g, &protocol).unwrap();
        let numeric = finite_difference_gradient(&g, &protocol, 1e-4);
        assert!(
            gradients_agree(&analytic, &numeric),
            "analytic {analytic:?} vs numeric {numeric:?}"
        );
        // Closed form: d/dbeta = cos(2b) sin(g), d/dgamma = sin(2b) cos(g) / 2.
        assert_relative_eq!(analytic[0], (0.6f64).cos() * (0.7f64).sin(), epsilon = 1e-12);
        assert_relative_eq!(
            analytic[1],
            (0.6f64).sin() * (0.7f64).cos() / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gradient_matches_finite_differences_random_graph() {
        let g = sample_erdos_renyi(6, 0.5, 7).unwrap();
        let protocol = random_protocol(3, 11);
        let analytic = gradient(&g, &protocol).unwrap();
        let numeric = finite_difference_gradient(&g, &protocol, 1e-4);
        assert!(
            gradients_agree(&analytic, &numeric),
            "analytic {analytic:?} vs numeric {numeric:?}"
        );
    }

    #[test]
    fn gradient_handles_weighted_edges() {
        let mut g = Graph::empty(3).unwrap();
        g.add_edge(0, 1, 0.5).unwrap();
        g.add_edge(1, 2, 2.25).unwrap();
        let protocol = random_protocol(2, 19);
        let analytic = gradient(&g, &protocol).unwrap();
        let numeric = finite_difference_gradient(&g, &protocol, 1e-4);
        assert!(
            gradients_agree(&analytic, &numeric),
            "analytic {analytic:?} vs numeric {numeric:?}"
        );
    }

    #[test]
    fn expected_cut_bounded_by_optimum() {
        for seed in 0..20 {
            let g = sample_erdos_renyi(7, 0.5, 100 + seed).unwrap();
            let opt = brute_force_maxcut(&g).unwrap().value;
            for pseed in 0..5 {
                let protocol = random_protocol(2, 1000 * seed + pseed);
                let e = expected_cut(&g, &protocol).unwrap();
                assert!(e >= -1e-12 && e <= opt + 1e-9, "cut {e} vs opt {opt}");
            }
        }
    }

    #[test]
    fn edge_application_order_is_immaterial() {
        let g = sample_erdos_renyi(6, 0.6, 23).unwrap();
        let protocol = random_protocol(2, 29);
        let reference = expected_cut(&g, &protocol).unwrap();

        // Re-run the evolution applying each layer's edges in reverse order.
        let mut state = StateVector::zero(g.num_nodes()).unwrap();
        state.hadamard_all();
        let edges: Vec<_> = g.edges().collect();
        for step in 0..protocol.steps() {
            for &(i, j, w) in edges.iter().rev() {
                state
                    .apply(&Gate::ZZPhase {
                        a: i,
                        b: j,
                        theta: protocol.gammas()[step] * w,
                    })
                    .unwrap();
            }
            for q in 0..g.num_nodes() {
                state
                    .apply(&Gate::RX {
                        qubit: q,
                        theta: protocol.betas()[step],
                    })
                    .unwrap();
            }
        }
        let permuted = expectation_cut(&state, &g).unwrap();
        assert!((reference - permuted).abs() < 1e-12);
    }

    #[test]
    fn parameters_are_2pi_periodic() {
        let g = sample_erdos_renyi(5, 0.5, 41).unwrap();
        let protocol = random_protocol(2, 43);
        let reference = expected_cut(&g, &protocol).unwrap();
        let tau = 2.0 * std::f64::consts::PI;

        let shifted_beta = Protocol::new(
            protocol.betas().iter().map(|b| b + tau).collect(),
            protocol.gammas().to_vec(),
        )
        .unwrap();
        assert!((expected_cut(&g, &shifted_beta).unwrap() - reference).abs() < 1e-12);

        let shifted_gamma = Protocol::new(
            protocol.betas().to_vec(),
            protocol.gammas().iter().map(|g| g + tau).collect(),
        )
        .unwrap();
        assert!((expected_cut(&g, &shifted_gamma).unwrap() - reference).abs() < 1e-12);
    }

    #[test]
    fn batch_mean_semantics() {
        let g = sample_erdos_renyi(5, 0.5, 51).unwrap();
        let protocol = random_protocol(2, 53);
        let single = expected_cut(&g, &protocol).unwrap();
        assert_eq!(
            batch_expected_cut(std::slice::from_ref(&g), &protocol).unwrap(),
            single
        );
        assert_relative_eq!(
            batch_expected_cut(&[g.clone(), g.clone()], &protocol).unwrap(),
            single,
            epsilon = 1e-15
        );
    }

    #[test]
    fn batch_of_er_graphs_at_zero_betas() {
        let graphs: Vec<Graph> = (0..100)
            .map(|seed| sample_erdos_renyi(10, 0.5, seed).unwrap())
            .collect();
        let protocol = Protocol::new(vec![0.0; 2], vec![0.3, 0.8]).unwrap();
        let mean_edges =
            graphs.iter().map(|g| g.edge_count() as f64).sum::<f64>() / graphs.len() as f64;
        assert_relative_eq!(
            batch_expected_cut(&graphs, &protocol).unwrap(),
            mean_edges / 2.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn batch_validation_errors() {
        let protocol = Protocol::trivial();
        assert!(batch_expected_cut(&[], &protocol).is_err());
        let mixed = [
            Graph::complete(3).unwrap(),
            Graph::complete(4).unwrap(),
        ];
        assert!(batch_expected_cut(&mixed, &protocol).is_err());
    }

    #[test]
    fn protocol_length_mismatch_rejected() {
        assert!(Protocol::new(vec![0.1], vec![0.1, 0.2]).is_err());
        assert!(Protocol::from_flat(&[0.1, 0.2, 0.3]).is_err());
    }
}
