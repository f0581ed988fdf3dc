//! Dense state-vector simulation: state allocation, gate application,
//! expectation values, measurement sampling, and fidelity.
//!
//! Conventions (fixed once, used by every module):
//! - Qubit `q` indexes bit `q` of the basis-state integer, least significant
//!   bit first. Bitstrings are rendered most significant bit first, so qubit 0
//!   is the rightmost character.
//! - `RX(theta) = exp(-i*theta*X/2)`, `RZ(theta) = exp(-i*theta*Z/2)`.
//! - `ZZPHASE(theta)` multiplies anti-aligned basis states (the two qubits'
//!   bits differ) by `exp(-i*theta)` and leaves aligned states unchanged.
//! - `PSWAP(theta) = SWAP * ZZPHASE(theta)`; the two factors commute.
//! - Sampling uses the ChaCha8 generator from `rand_chacha`, seeded
//!   explicitly, so every draw is reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{bits_to_string, Graph};

/// Dense simulation is capped at 24 qubits (256 MiB of amplitudes).
pub const MAX_QUBITS: usize = 24;

/// A quantum gate acting on one or two qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H { qubit: usize },
    RX { qubit: usize, theta: f64 },
    RZ { qubit: usize, theta: f64 },
    CNOT { control: usize, target: usize },
    Swap { a: usize, b: usize },
    ZZPhase { a: usize, b: usize, theta: f64 },
    PSwap { a: usize, b: usize, theta: f64 },
}

impl Gate {
    /// The qubit indices the gate touches.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H { qubit } | Gate::RX { qubit, .. } | Gate::RZ { qubit, .. } => (qubit, None),
            Gate::CNOT { control, target } => (control, Some(target)),
            Gate::Swap { a, b } | Gate::ZZPhase { a, b, .. } | Gate::PSwap { a, b, .. } => {
                (a, Some(b))
            }
        }
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::H { .. } | Gate::CNOT { .. } | Gate::Swap { .. } => *self,
            Gate::RX { qubit, theta } => Gate::RX {
                qubit,
                theta: -theta,
            },
            Gate::RZ { qubit, theta } => Gate::RZ {
                qubit,
                theta: -theta,
            },
            Gate::ZZPhase { a, b, theta } => Gate::ZZPhase { a, b, theta: -theta },
            Gate::PSwap { a, b, theta } => Gate::PSwap { a, b, theta: -theta },
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let (first, second) = self.qubits();
        if first >= num_qubits || second.is_some_and(|q| q >= num_qubits) {
            return Err(Error::validation(format!(
                "gate {self:?} addresses a qubit outside 0..{num_qubits}"
            )));
        }
        if second == Some(first) {
            return Err(Error::validation(format!(
                "two-qubit gate {self:?} needs distinct qubits"
            )));
        }
        Ok(())
    }
}

/// A pure quantum state of `num_qubits` qubits as `2^num_qubits` complex
/// amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// The computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: u64) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "qubit count",
                requested: num_qubits,
                max: MAX_QUBITS,
            });
        }
        let dim = 1usize << num_qubits;
        if index as usize >= dim {
            return Err(Error::validation(format!(
                "basis index {index} outside 0..{dim}"
            )));
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index as usize] = Complex64::ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// Wrap explicit amplitudes. The length must be a power of two within the
    /// capacity bound, and the squared norm must be 1 within 1e-6.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 || dim > (1 << MAX_QUBITS) {
            return Err(Error::validation(format!(
                "amplitude count {dim} is not a supported power of two"
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::validation(format!(
                "state is not normalized (squared norm {norm})"
            )));
        }
        Ok(StateVector {
            num_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    /// Wrap amplitudes without the normalization check. The adjoint sweep in
    /// the gradient computation runs gates over `H_C |psi>`, which is not a
    /// unit vector.
    pub(crate) fn from_amplitudes_unchecked(amps: Vec<Complex64>) -> Self {
        debug_assert!(amps.len().is_power_of_two() && amps.len() >= 2);
        StateVector {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Squared norm; stays within 1e-10 of 1 under gate application.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match *gate {
            Gate::H { qubit } => self.apply_hadamard(qubit),
            Gate::RX { qubit, theta } => self.apply_rx(qubit, theta),
            Gate::RZ { qubit, theta } => self.apply_rz(qubit, theta),
            Gate::CNOT { control, target } => self.apply_cnot(control, target),
            Gate::Swap { a, b } => self.apply_swap(a, b),
            Gate::ZZPhase { a, b, theta } => self.apply_zzphase(a, b, theta),
            Gate::PSwap { a, b, theta } => {
                self.apply_zzphase(a, b, theta);
                self.apply_swap(a, b);
            }
        }
        Ok(())
    }

    /// Apply a sequence of gates in order.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for gate in gates {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Hadamard on every qubit. On the zero state this produces the uniform
    /// superposition with all amplitudes `2^(-n/2)`.
    pub fn hadamard_all(&mut self) {
        for q in 0..self.num_qubits {
            self.apply_hadamard(q);
        }
    }

    fn apply_hadamard(&mut self, qubit: usize) {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        self.for_each_pair(qubit, |lo, hi| {
            (inv_sqrt2 * (lo + hi), inv_sqrt2 * (lo - hi))
        });
    }

    fn apply_rx(&mut self, qubit: usize, theta: f64) {
        let c = (theta / 2.0).cos();
        let ms = Complex64::new(0.0, -(theta / 2.0).sin());
        self.for_each_pair(qubit, |lo, hi| (c * lo + ms * hi, ms * lo + c * hi));
    }

    fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
        let phase1 = Complex64::from_polar(1.0, theta / 2.0);
        self.for_each_pair(qubit, |lo, hi| (phase0 * lo, phase1 * hi));
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for z in 0..self.amps.len() {
            if z & cmask != 0 && z & tmask == 0 {
                self.amps.swap(z, z | tmask);
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let amask = 1usize << a;
        let bmask = 1usize << b;
        for z in 0..self.amps.len() {
            if z & amask != 0 && z & bmask == 0 {
                self.amps.swap(z, z ^ (amask | bmask));
            }
        }
    }

    fn apply_zzphase(&mut self, a: usize, b: usize, theta: f64) {
        let phase = Complex64::from_polar(1.0, -theta);
        for (z, amp) in self.amps.iter_mut().enumerate() {
            if ((z >> a) ^ (z >> b)) & 1 == 1 {
                *amp *= phase;
            }
        }
    }

    /// Visit amplitude pairs that differ only in `qubit`, replacing
    /// `(bit=0, bit=1)` values with the closure's output.
    fn for_each_pair(
        &mut self,
        qubit: usize,
        f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64),
    ) {
        let step = 1usize << qubit;
        let mut base = 0;
        while base < self.amps.len() {
            for lo_idx in base..base + step {
                let hi_idx = lo_idx + step;
                let (lo, hi) = f(self.amps[lo_idx], self.amps[hi_idx]);
                self.amps[lo_idx] = lo;
                self.amps[hi_idx] = hi;
            }
            base += step << 1;
        }
    }
}

/// Exact expectation of the cut weight in `state`:
/// `sum_z |amp_z|^2 * cut(graph, z)`. No sampling is involved.
pub fn expectation_cut(state: &StateVector, graph: &Graph) -> Result<f64> {
    if graph.num_nodes() != state.num_qubits() {
        return Err(Error::validation(format!(
            "graph has {} nodes but state has {} qubits",
            graph.num_nodes(),
            state.num_qubits()
        )));
    }
    let edges: Vec<(usize, usize, f64)> = graph.edges().collect();
    let mut total = 0.0;
    for (z, amp) in state.amplitudes().iter().enumerate() {
        let prob = amp.norm_sqr();
        if prob == 0.0 {
            continue;
        }
        let mut cut = 0.0;
        for &(i, j, w) in &edges {
            if ((z >> i) ^ (z >> j)) & 1 == 1 {
                cut += w;
            }
        }
        total += prob * cut;
    }
    Ok(total)
}

/// Draw `count` bitstrings from the Born distribution `|amp_z|^2`,
/// deterministically for a given seed. Strings are rendered most significant
/// bit first, matching [`crate::graph::cut_value`].
pub fn sample_bitstrings(state: &StateVector, count: usize, seed: u64) -> Vec<String> {
    let mut cumulative = Vec::with_capacity(state.dim());
    let mut total = 0.0;
    for amp in state.amplitudes() {
        total += amp.norm_sqr();
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let z = cumulative.partition_point(|&c| c <= u).min(state.dim() - 1);
            bits_to_string(z as u64, state.num_qubits())
        })
        .collect()
}

/// `|<a|b>|^2`, insensitive to global phase.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::validation(format!(
            "fidelity between {}- and {}-qubit states",
            a.num_qubits(),
            b.num_qubits()
        )));
    }
    let overlap: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr())
}

#[cfg(test)]
pub(crate) fn random_state(num_qubits: usize, seed: u64) -> StateVector {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << num_qubits;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| {
            Complex64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(amps).unwrap()
}
