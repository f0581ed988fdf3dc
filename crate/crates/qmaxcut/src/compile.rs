//! Circuit compilation for QAOA MaxCut: all-to-all connectivity with the
//! CNOT/RZ/CNOT cost-gate template, and a linear qubit array via the
//! brickwork swap network with fused parametric-swap (PSWAP) gates.
//!
//! Swap-network layout: each QAOA step runs `N` layers of odd-even
//! transpositions. Layer `l` pairs positions `(0,1), (2,3), ...` when `l` is
//! even and `(1,2), (3,4), ...` when `l` is odd. Every unordered pair of
//! logical qubits becomes adjacent exactly once per step, each meeting
//! receives one `PSWAP(gamma_p * C_ab)` (a plain SWAP when the edge is
//! absent), and the step reverses the logical order. Mixer `RX` layers act on
//! physical positions after each step; they are symmetric under qubit
//! permutation, so the bookkeeping stays in the final permutation.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::qaoa::{evolve, Protocol};
use crate::sim::{fidelity, Gate, StateVector};

/// Node-count cap for full-state equivalence checks.
pub const MAX_VERIFY_QUBITS: usize = 8;

/// An ordered gate sequence on physical qubits, plus the map from logical
/// qubit to its physical position after execution.
#[derive(Debug, Clone, PartialEq)]
pub struct GateList {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub final_permutation: Vec<usize>,
}

impl GateList {
    /// Run the circuit on the all-zeros state.
    pub fn simulate(&self) -> Result<StateVector> {
        let mut state = StateVector::zero(self.num_qubits)?;
        state.apply_all(&self.gates)?;
        Ok(state)
    }

    /// Count CNOTs, weighting PSWAP and SWAP as 3 CNOTs each.
    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .map(|gate| match gate {
                Gate::CNOT { .. } => 1,
                Gate::Swap { .. } | Gate::PSwap { .. } => 3,
                _ => 0,
            })
            .sum()
    }

    /// Write the line-oriented circuit text format: a `circuit` header, one
    /// gate per line, and a `perm` trailer. Angles carry 17 significant
    /// digits.
    pub fn write_text<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "circuit {}", self.num_qubits)?;
        for gate in &self.gates {
            match *gate {
                Gate::H { qubit } => writeln!(w, "H {qubit}")?,
                Gate::RX { qubit, theta } => writeln!(w, "RX {theta:.16e} {qubit}")?,
                Gate::RZ { qubit, theta } => writeln!(w, "RZ {theta:.16e} {qubit}")?,
                Gate::CNOT { control, target } => writeln!(w, "CNOT {control} {target}")?,
                Gate::Swap { a, b } => writeln!(w, "SWAP {a} {b}")?,
                Gate::ZZPhase { a, b, theta } => writeln!(w, "ZZPHASE {theta:.16e} {a} {b}")?,
                Gate::PSwap { a, b, theta } => writeln!(w, "PSWAP {theta:.16e} {a} {b}")?,
            }
        }
        write!(w, "perm")?;
        for p in &self.final_permutation {
            write!(w, " {p}")?;
        }
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_text_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_text(fs::File::create(path)?)
    }
}

/// Compile assuming every qubit pair can interact directly: a Hadamard
/// layer, then per step one CNOT / RZ(-gamma_p * C_ij) / CNOT triple per edge
/// followed by the RX mixer layer. CNOT count is `2 |E| P`.
pub fn compile_all_to_all(graph: &Graph, protocol: &Protocol) -> GateList {
    let n = graph.num_nodes();
    let mut gates: Vec<Gate> = (0..n).map(|qubit| Gate::H { qubit }).collect();
    for step in 0..protocol.steps() {
        let gamma = protocol.gammas()[step];
        for (i, j, w) in graph.edges() {
            gates.push(Gate::CNOT {
                control: i,
                target: j,
            });
            gates.push(Gate::RZ {
                qubit: j,
                theta: -gamma * w,
            });
            gates.push(Gate::CNOT {
                control: i,
                target: j,
            });
        }
        let beta = protocol.betas()[step];
        for qubit in 0..n {
            gates.push(Gate::RX { qubit, theta: beta });
        }
    }
    GateList {
        num_qubits: n,
        gates,
        final_permutation: (0..n).collect(),
    }
}

/// Compile for a linear qubit array using the brickwork swap network. Every
/// two-qubit gate touches adjacent positions and the CNOT count is exactly
/// `(3/2) N (N-1) P`.
pub fn compile_swap_network(graph: &Graph, protocol: &Protocol) -> Result<GateList> {
    let n = graph.num_nodes();
    if n < 2 {
        return Err(Error::validation(
            "swap network needs at least 2 qubits".to_owned(),
        ));
    }
    let mut gates: Vec<Gate> = (0..n).map(|qubit| Gate::H { qubit }).collect();
    let mut position_to_logical: Vec<usize> = (0..n).collect();

    for step in 0..protocol.steps() {
        let gamma = protocol.gammas()[step];
        for layer in 0..n {
            let mut pos = layer % 2;
            while pos + 1 < n {
                let (a, b) = (position_to_logical[pos], position_to_logical[pos + 1]);
                gates.push(Gate::PSwap {
                    a: pos,
                    b: pos + 1,
                    theta: gamma * graph.weight(a, b),
                });
                position_to_logical.swap(pos, pos + 1);
                pos += 2;
            }
        }
        let beta = protocol.betas()[step];
        for qubit in 0..n {
            gates.push(Gate::RX { qubit, theta: beta });
        }
    }

    let mut final_permutation = vec![0; n];
    for (pos, &logical) in position_to_logical.iter().enumerate() {
        final_permutation[logical] = pos;
    }
    Ok(GateList {
        num_qubits: n,
        gates,
        final_permutation,
    })
}

/// The fixed 3-CNOT lowering of `PSWAP(theta)` (global phase
/// `e^{i theta / 2}` aside): shared CNOTs of the SWAP and ZZ templates
/// cancel, leaving CNOT(a,b), RZ(-theta) on b, CNOT(b,a), CNOT(a,b).
pub fn pswap_lowering(a: usize, b: usize, theta: f64) -> [Gate; 4] {
    [
        Gate::CNOT {
            control: a,
            target: b,
        },
        Gate::RZ { qubit: b, theta: -theta },
        Gate::CNOT {
            control: b,
            target: a,
        },
        Gate::CNOT {
            control: a,
            target: b,
        },
    ]
}

/// Rewrite amplitudes of a physical-position state back to logical-qubit
/// order: bit `q` of the output index reads bit `permutation[q]` of the
/// input index.
pub fn unpermute_state(state: &StateVector, permutation: &[usize]) -> Result<StateVector> {
    let n = state.num_qubits();
    if permutation.len() != n {
        return Err(Error::validation(format!(
            "permutation length {} does not match {n} qubits",
            permutation.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in permutation {
        if p >= n || seen[p] {
            return Err(Error::validation(format!(
                "permutation {permutation:?} is not a bijection"
            )));
        }
        seen[p] = true;
    }
    let mut amps = vec![num_complex::Complex64::ZERO; state.dim()];
    for (physical, amp) in state.amplitudes().iter().enumerate() {
        let mut logical = 0usize;
        for (q, &pos) in permutation.iter().enumerate() {
            logical |= ((physical >> pos) & 1) << q;
        }
        amps[logical] = *amp;
    }
    StateVector::from_amplitudes(amps)
}

/// Simulate both compilations from the zero state, un-permute the
/// swap-network result, and return the smaller of its fidelities against the
/// all-to-all circuit and against the abstract evolution. Global phase is
/// ignored.
pub fn verify_equivalence(graph: &Graph, protocol: &Protocol) -> Result<f64> {
    let n = graph.num_nodes();
    if n > MAX_VERIFY_QUBITS {
        return Err(Error::Capacity {
            what: "equivalence-check node count",
            requested: n,
            max: MAX_VERIFY_QUBITS,
        });
    }
    let all_to_all = compile_all_to_all(graph, protocol).simulate()?;
    let reference = evolve(graph, protocol)?;
    if n < 2 {
        // No swap network exists on one qubit; compare the remaining pair.
        return fidelity(&all_to_all, &reference);
    }
    let network = compile_swap_network(graph, protocol)?;
    let routed = unpermute_state(&network.simulate()?, &network.final_permutation)?;
    let against_compiled = fidelity(&routed, &all_to_all)?;
    let against_reference = fidelity(&routed, &reference)?;
    Ok(against_compiled.min(against_reference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_erdos_renyi;
    use crate::sim::random_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_protocol(steps: usize, seed: u64) -> Protocol {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Protocol::new(
            (0..steps).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
            (0..steps).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn all_to_all_cnot_counts() {
        let k4 = Graph::complete(4).unwrap();
        let circuit = compile_all_to_all(&k4, &random_protocol(1, 1));
        assert_eq!(circuit.cnot_count(), 12);

        let empty = Graph::empty(5).unwrap();
        let circuit = compile_all_to_all(&empty, &random_protocol(3, 2));
        assert_eq!(circuit.cnot_count(), 0);

        let triangle = Graph::complete(3).unwrap();
        let circuit = compile_all_to_all(&triangle, &random_protocol(2, 3));
        assert_eq!(circuit.cnot_count(), 12);
    }

    #[test]
    fn swap_network_cnot_counts() {
        for (n, p, expected) in [(4usize, 1usize, 18usize), (6, 2, 90), (2, 1, 3)] {
            let g = sample_erdos_renyi(n, 0.5, n as u64).unwrap();
            let circuit = compile_swap_network(&g, &random_protocol(p, 7)).unwrap();
            assert_eq!(circuit.cnot_count(), expected, "n {n} p {p}");
        }
        // The count is graph-independent.
        for n in 2..=12usize {
            for p in 1..=4usize {
                let g = sample_erdos_renyi(n, 0.3, 50 + n as u64).unwrap();
                let circuit = compile_swap_network(&g, &random_protocol(p, 9)).unwrap();
                assert_eq!(circuit.cnot_count(), 3 * n * (n - 1) * p / 2);
            }
        }
    }

    #[test]
    fn cnot_count_weights() {
        let empty = GateList {
            num_qubits: 2,
            gates: vec![],
            final_permutation: vec![0, 1],
        };
        assert_eq!(empty.cnot_count(), 0);

        let cnots = GateList {
            num_qubits: 2,
            gates: vec![
                Gate::CNOT {
                    control: 0,
                    target: 1
                };
                5
            ],
            final_permutation: vec![0, 1],
        };
        assert_eq!(cnots.cnot_count(), 5);

        let pswaps = GateList {
            num_qubits: 2,
            gates: vec![
                Gate::PSwap {
                    a: 0,
                    b: 1,
                    theta: 0.3
                };
                2
            ],
            final_permutation: vec![0, 1],
        };
        assert_eq!(pswaps.cnot_count(), 6);
    }

    #[test]
    fn swap_network_stays_on_adjacent_positions() {
        let g = sample_erdos_renyi(7, 0.5, 4).unwrap();
        let circuit = compile_swap_network(&g, &random_protocol(2, 11)).unwrap();
        for gate in &circuit.gates {
            if let (a, Some(b)) = gate.qubits() {
                assert_eq!(a.abs_diff(b), 1, "gate {gate:?} is not nearest-neighbor");
            }
        }
    }

    #[test]
    fn every_logical_pair_meets_exactly_once_per_step() {
        // Replay the emitted PSWAPs of a one-step circuit over an
        // independent position map and collect the logical meetings.
        for n in 2..=12usize {
            let g = Graph::empty(n).unwrap();
            let circuit = compile_swap_network(&g, &random_protocol(1, 13)).unwrap();
            let mut positions: Vec<usize> = (0..n).collect();
            let mut meetings = std::collections::HashMap::new();
            for gate in &circuit.gates {
                if let Gate::PSwap { a, b, .. } = *gate {
                    let pair = (positions[a].min(positions[b]), positions[a].max(positions[b]));
                    *meetings.entry(pair).or_insert(0usize) += 1;
                    positions.swap(a, b);
                }
            }
            assert_eq!(meetings.len(), n * (n - 1) / 2, "n {n}");
            assert!(meetings.values().all(|&count| count == 1), "n {n}");
        }
    }

    #[test]
    fn three_qubit_step_pairs_in_brickwork_order() {
        let g = Graph::empty(3).unwrap();
        let circuit = compile_swap_network(&g, &random_protocol(1, 15)).unwrap();
        let pswap_positions: Vec<(usize, usize)> = circuit
            .gates
            .iter()
            .filter_map(|gate| match *gate {
                Gate::PSwap { a, b, .. } => Some((a, b)),
                _ => None,
            })
            .collect();
        assert_eq!(pswap_positions, vec![(0, 1), (1, 2), (0, 1)]);
    }

    #[test]
    fn final_permutation_reverses_per_step() {
        let g = Graph::empty(5).unwrap();
        let one = compile_swap_network(&g, &random_protocol(1, 17)).unwrap();
        assert_eq!(one.final_permutation, vec![4, 3, 2, 1, 0]);
        let two = compile_swap_network(&g, &random_protocol(2, 17)).unwrap();
        assert_eq!(two.final_permutation, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn all_to_all_permutation_is_identity() {
        let g = Graph::complete(4).unwrap();
        let circuit = compile_all_to_all(&g, &random_protocol(2, 19));
        assert_eq!(circuit.final_permutation, vec![0, 1, 2, 3]);
    }

    #[test]
    fn equivalence_at_zero_steps() {
        let g = sample_erdos_renyi(4, 0.5, 21).unwrap();
        let f = verify_equivalence(&g, &Protocol::trivial()).unwrap();
        assert!(f > 1.0 - 1e-12, "fidelity {f}");
    }

    #[test]
    fn equivalence_on_random_instances() {
        let g = sample_erdos_renyi(5, 0.5, 23).unwrap();
        let f = verify_equivalence(&g, &random_protocol(2, 25)).unwrap();
        assert!(f > 1.0 - 1e-10, "fidelity {f}");
    }

    #[test]
    fn equivalence_detects_a_corrupted_angle() {
        let g = sample_erdos_renyi(5, 0.6, 27).unwrap();
        let protocol = random_protocol(2, 29);
        let mut gammas = protocol.gammas().to_vec();
        gammas[1] += 0.05;
        let corrupted = Protocol::new(protocol.betas().to_vec(), gammas).unwrap();

        let network = compile_swap_network(&g, &protocol).unwrap();
        let routed = unpermute_state(&network.simulate().unwrap(), &network.final_permutation)
            .unwrap();
        let other = compile_all_to_all(&g, &corrupted).simulate().unwrap();
        let f = fidelity(&routed, &other).unwrap();
        assert!(f < 1.0 - 1e-4, "fidelity {f} did not drop");
    }

    #[test]
    fn equivalence_capacity_bound() {
        let g = Graph::empty(9).unwrap();
        assert!(matches!(
            verify_equivalence(&g, &Protocol::trivial()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn swap_network_rejects_single_qubit() {
        let g = Graph::empty(1).unwrap();
        assert!(compile_swap_network(&g, &Protocol::trivial()).is_err());
    }

    #[test]
    fn pswap_lowering_matches_the_fused_gate() {
        let theta = 0.77;
        for seed in 0..20 {
            let base = random_state(2, 60 + seed);
            let mut fused = base.clone();
            fused
                .apply(&Gate::PSwap { a: 0, b: 1, theta })
                .unwrap();
            let mut lowered = base.clone();
            lowered.apply_all(&pswap_lowering(0, 1, theta)).unwrap();
            let f = fidelity(&fused, &lowered).unwrap();
            assert!(f > 1.0 - 1e-12, "fidelity {f}");
        }
    }

    #[test]
    fn unpermute_moves_basis_states() {
        // Physical |100> (bit 2 set) with logical qubit 0 parked at
        // position 2 must come back as logical |001>.
        let state = StateVector::basis(3, 0b100).unwrap();
        let back = unpermute_state(&state, &[2, 1, 0]).unwrap();
        assert_eq!(back.amplitudes()[0b001], num_complex::Complex64::ONE);
        assert!(unpermute_state(&state, &[0, 0, 1]).is_err());
    }

    #[test]
    fn circuit_text_format() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let protocol = Protocol::new(vec![0.25], vec![0.5]).unwrap();
        let circuit = compile_swap_network(&g, &protocol).unwrap();
        let mut buf = Vec::new();
        circuit.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "circuit 2\n\
                        H 0\n\
                        H 1\n\
                        PSWAP 5.0000000000000000e-1 0 1\n\
                        RX 2.5000000000000000e-1 0\n\
                        RX 2.5000000000000000e-1 1\n\
                        perm 1 0\n";
        assert_eq!(text, expected);
    }
}
