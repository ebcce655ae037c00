//! Logical masking: static probabilities, Monte Carlo sensitization,
//! edge sensitization and propagation weights.
//!
//! Vectors are simulated 64 at a time. Each primary input draws its bits
//! from its own ChaCha stream keyed by the seed, so vector `v` is a pure
//! function of `(seed, v)` and every partition of the work yields the same
//! counts.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{Circuit, GateId, GateKind, Source};
use crate::par::Exec;

/// Static probability of every primary input.
pub const INPUT_PROBABILITY: f64 = 0.5;

/// Default Monte Carlo vector count.
pub const DEFAULT_VECTORS: usize = 10_000;

/// Random input patterns, packed 64 per word.
#[derive(Clone, Debug)]
pub struct InputVectors {
    n_vectors: usize,
    words: usize,
    // input-major: bits[pi * words + w]
    bits: Vec<u64>,
}

impl InputVectors {
    pub fn generate(num_inputs: usize, n_vectors: usize, seed: u64) -> InputVectors {
        let words = n_vectors.div_ceil(64);
        let mut bits = Vec::with_capacity(num_inputs * words);
        for pi in 0..num_inputs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(pi as u64);
            bits.extend((0..words).map(|_| rng.next_u64()));
        }
        InputVectors {
            n_vectors,
            words,
            bits,
        }
    }

    /// All `2^n` patterns of `num_inputs` inputs, for exhaustive checks.
    pub fn exhaustive(num_inputs: usize) -> InputVectors {
        assert!(
            num_inputs < 32,
            "exhaustive enumeration limited to < 32 inputs"
        );
        let n_vectors = 1usize << num_inputs;
        let words = n_vectors.div_ceil(64);
        let mut bits = vec![0u64; num_inputs * words];
        for v in 0..n_vectors {
            for pi in 0..num_inputs {
                if (v >> pi) & 1 == 1 {
                    bits[pi * words + v / 64] |= 1 << (v % 64);
                }
            }
        }
        InputVectors {
            n_vectors,
            words,
            bits,
        }
    }

    pub fn n_vectors(&self) -> usize {
        self.n_vectors
    }

    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn word(&self, pi: usize, w: usize) -> u64 {
        self.bits[pi * self.words + w]
    }

    /// Mask of live vectors in word `w`.
    #[inline]
    pub fn mask(&self, w: usize) -> u64 {
        let live = self.n_vectors - w * 64;
        if live >= 64 {
            u64::MAX
        } else {
            (1u64 << live) - 1
        }
    }
}

#[inline]
fn eval_gate(
    kind: GateKind,
    inputs: &[Source],
    vectors: &InputVectors,
    w: usize,
    read: impl Fn(GateId) -> u64,
) -> u64 {
    kind.eval_words(inputs.iter().map(|src| match *src {
        Source::Input(i) => vectors.word(i, w),
        Source::Gate(d) => read(d),
    }))
}

/// Zero-delay fault-free simulation; result is word-major
/// (`values[w * num_gates + g]`).
pub fn simulate(circuit: &Circuit, vectors: &InputVectors) -> Vec<u64> {
    let n = circuit.num_gates();
    let mut values = vec![0u64; n * vectors.words()];
    for w in 0..vectors.words() {
        let col = &mut values[w * n..(w + 1) * n];
        for &g in circuit.topological_order() {
            let gate = circuit.gate(g);
            col[g] = eval_gate(gate.kind, &gate.inputs, vectors, w, |d| col[d]);
        }
    }
    values
}

/// Static probability of logic 1 per gate and the derived switching
/// activity `2·p·(1−p)`.
pub fn simulate_probabilities(
    circuit: &Circuit,
    vectors: &InputVectors,
    good: &[u64],
) -> (Vec<f64>, Vec<f64>) {
    let n = circuit.num_gates();
    let mut ones = vec![0u64; n];
    for w in 0..vectors.words() {
        let mask = vectors.mask(w);
        for (g, count) in ones.iter_mut().enumerate() {
            *count += u64::from((good[w * n + g] & mask).count_ones());
        }
    }
    let total = vectors.n_vectors() as f64;
    let p: Vec<f64> = ones.iter().map(|&c| c as f64 / total).collect();
    let activity = p.iter().map(|&x| 2.0 * x * (1.0 - x)).collect();
    (p, activity)
}

/// Gates strictly downstream of `g`, in topological order.
fn forward_cone(circuit: &Circuit, g: GateId, mark: &mut [bool]) -> Vec<GateId> {
    mark.iter_mut().for_each(|m| *m = false);
    let mut stack = vec![g];
    while let Some(x) = stack.pop() {
        for &s in circuit.fanout(x) {
            if !mark[s] {
                mark[s] = true;
                stack.push(s);
            }
        }
    }
    let order = circuit.topological_order();
    order[circuit.topo_position(g) + 1..]
        .iter()
        .copied()
        .filter(|&s| mark[s])
        .collect()
}

/// Fraction of vectors for which flipping gate `i` flips primary output `j`,
/// as a row-major `num_gates × num_outputs` matrix.
pub fn estimate_sensitization(
    circuit: &Circuit,
    vectors: &InputVectors,
    good: &[u64],
    exec: Exec,
) -> Vec<f64> {
    let n = circuit.num_gates();
    let n_out = circuit.num_outputs();
    let total = vectors.n_vectors() as f64;
    let rows = exec.map(n, |i| {
        let mut in_cone = vec![false; n];
        let cone = forward_cone(circuit, i, &mut in_cone);
        in_cone[i] = true;
        let mut faulty = vec![0u64; n];
        let mut counts = vec![0u64; n_out];
        for w in 0..vectors.words() {
            let col = &good[w * n..(w + 1) * n];
            faulty[i] = !col[i];
            for &g in &cone {
                let gate = circuit.gate(g);
                let v = eval_gate(gate.kind, &gate.inputs, vectors, w, |d| {
                    if in_cone[d] {
                        faulty[d]
                    } else {
                        col[d]
                    }
                });
                faulty[g] = v;
            }
            let mask = vectors.mask(w);
            for (j, &o) in circuit.output_gates().iter().enumerate() {
                if in_cone[o] {
                    counts[j] += u64::from(((faulty[o] ^ col[o]) & mask).count_ones());
                }
            }
        }
        counts
            .into_iter()
            .map(|c| c as f64 / total)
            .collect::<Vec<f64>>()
    });
    rows.concat()
}

/// Offsets of each gate's fan-out edges in edge-indexed arrays.
pub fn edge_offsets(circuit: &Circuit) -> Vec<usize> {
    let mut off = Vec::with_capacity(circuit.num_gates() + 1);
    let mut acc = 0;
    off.push(0);
    for g in 0..circuit.num_gates() {
        acc += circuit.fanout(g).len();
        off.push(acc);
    }
    off
}

/// Probability that successor `s` is sensitized to its input from `i`:
/// every other input net sits at its non-controlling value.
pub fn edge_sensitization(circuit: &Circuit, p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(circuit.num_edges());
    for i in 0..circuit.num_gates() {
        for &s in circuit.fanout(i) {
            out.push(sensitization_through(circuit, i, s, p));
        }
    }
    out
}

fn sensitization_through(circuit: &Circuit, i: GateId, s: GateId, p: &[f64]) -> f64 {
    let gate = circuit.gate(s);
    let one_prob = |src: &Source| match *src {
        Source::Input(_) => INPUT_PROBABILITY,
        Source::Gate(d) => p[d],
    };
    let mut others: Vec<Source> = Vec::with_capacity(gate.inputs.len());
    for src in &gate.inputs {
        if *src != Source::Gate(i) && !others.contains(src) {
            others.push(*src);
        }
    }
    match gate.kind {
        GateKind::And | GateKind::Nand => others.iter().map(one_prob).product(),
        GateKind::Or | GateKind::Nor => others.iter().map(|s| 1.0 - one_prob(s)).product(),
        GateKind::Xor | GateKind::Xnor | GateKind::Not | GateKind::Buf => 1.0,
    }
}

/// Propagation weights `π[e·J + j] = S_e·P_ij / Σ_k S_ik·P_kj` for edge
/// `e = (i → s)`. When every `S_ik·P_kj` vanishes but some `P_kj` does not,
/// the edge terms drop `S` and share `P_ij` by `P_kj` alone; zero when all
/// `P_kj` vanish.
pub fn propagation_weights(circuit: &Circuit, edge_s: &[f64], sens: &[f64]) -> Vec<f64> {
    let n_out = circuit.num_outputs();
    let offsets = edge_offsets(circuit);
    let mut pi = vec![0.0; circuit.num_edges() * n_out];
    for i in 0..circuit.num_gates() {
        let succ = circuit.fanout(i);
        for j in 0..n_out {
            let denom: f64 = succ
                .iter()
                .enumerate()
                .map(|(k, &s)| edge_s[offsets[i] + k] * sens[s * n_out + j])
                .sum();
            let p_ij = sens[i * n_out + j];
            if denom > 0.0 {
                for k in 0..succ.len() {
                    let e = offsets[i] + k;
                    pi[e * n_out + j] = edge_s[e] * p_ij / denom;
                }
                continue;
            }
            let fallback: f64 = succ.iter().map(|&s| sens[s * n_out + j]).sum();
            if fallback > 0.0 {
                for k in 0..succ.len() {
                    pi[(offsets[i] + k) * n_out + j] = p_ij / fallback;
                }
            }
        }
    }
    pi
}

/// Everything logical masking contributes to the analysis. Depends only on
/// the netlist and the vector stream, never on gate parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskingProfile {
    pub n_vectors: usize,
    pub seed: u64,
    n_outputs: usize,
    edge_offsets: Vec<usize>,
    /// Static probability of logic 1 per gate.
    pub p: Vec<f64>,
    pub activity: Vec<f64>,
    sens: Vec<f64>,
    edge_s: Vec<f64>,
    pi: Vec<f64>,
}

impl MaskingProfile {
    pub fn compute(circuit: &Circuit, n_vectors: usize, seed: u64, exec: Exec) -> MaskingProfile {
        let vectors = InputVectors::generate(circuit.inputs().len(), n_vectors.max(1), seed);
        let mut prof = MaskingProfile::from_vectors(circuit, &vectors, exec);
        prof.seed = seed;
        prof
    }

    pub fn from_vectors(circuit: &Circuit, vectors: &InputVectors, exec: Exec) -> MaskingProfile {
        let good = simulate(circuit, vectors);
        let (p, activity) = simulate_probabilities(circuit, vectors, &good);
        let sens = estimate_sensitization(circuit, vectors, &good, exec);
        MaskingProfile::from_parts(circuit, vectors.n_vectors(), p, activity, sens)
    }

    /// Builds the profile from externally supplied `p` and `P`.
    pub fn from_parts(
        circuit: &Circuit,
        n_vectors: usize,
        p: Vec<f64>,
        activity: Vec<f64>,
        sens: Vec<f64>,
    ) -> MaskingProfile {
        let edge_s = edge_sensitization(circuit, &p);
        let pi = propagation_weights(circuit, &edge_s, &sens);
        MaskingProfile {
            n_vectors,
            seed: 0,
            n_outputs: circuit.num_outputs(),
            edge_offsets: edge_offsets(circuit),
            p,
            activity,
            sens,
            edge_s,
            pi,
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// `P_ij`: probability a flip at gate `i` reaches primary output `j`.
    #[inline]
    pub fn sensitization(&self, i: GateId, j: usize) -> f64 {
        self.sens[i * self.n_outputs + j]
    }

    pub fn sensitization_matrix(&self) -> &[f64] {
        &self.sens
    }

    /// `S` for the `k`-th fan-out edge of gate `i`.
    #[inline]
    pub fn edge_sensitization(&self, i: GateId, k: usize) -> f64 {
        self.edge_s[self.edge_offsets[i] + k]
    }

    /// `π` for the `k`-th fan-out edge of gate `i` towards output `j`.
    #[inline]
    pub fn weight(&self, i: GateId, k: usize, j: usize) -> f64 {
        self.pi[(self.edge_offsets[i] + k) * self.n_outputs + j]
    }

    /// All `π` values for the `k`-th fan-out edge of gate `i`.
    #[inline]
    pub fn weights(&self, i: GateId, k: usize) -> &[f64] {
        let e = self.edge_offsets[i] + k;
        &self.pi[e * self.n_outputs..(e + 1) * self.n_outputs]
    }
}
