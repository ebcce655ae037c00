//! Slow reference implementations for tests. Each one is written
//! independently of the production code it checks.

use crate::aserta::attenuate;
use crate::gatelib::{CharTable, AXIS_NAMES};
use crate::netlist::{Circuit, GateId, GateKind, Source};
use crate::timing::TopologyMatrix;

fn eval_bool(kind: GateKind, ins: &[bool]) -> bool {
    let ones = ins.iter().filter(|&&b| b).count();
    match kind {
        GateKind::And => ones == ins.len(),
        GateKind::Nand => ones != ins.len(),
        GateKind::Or => ones > 0,
        GateKind::Nor => ones == 0,
        GateKind::Xor => ones % 2 == 1,
        GateKind::Xnor => ones % 2 == 0,
        GateKind::Not => !ins[0],
        GateKind::Buf => ins[0],
    }
}

/// Gate values for one input vector, optionally with gate `flip` inverted.
pub fn simulate_vector(circuit: &Circuit, inputs: &[bool], flip: Option<GateId>) -> Vec<bool> {
    let mut v = vec![false; circuit.num_gates()];
    for &g in circuit.topological_order() {
        let gate = circuit.gate(g);
        let ins: Vec<bool> = gate
            .inputs
            .iter()
            .map(|s| match *s {
                Source::Input(i) => inputs[i],
                Source::Gate(d) => v[d],
            })
            .collect();
        v[g] = eval_bool(gate.kind, &ins) ^ (flip == Some(g));
    }
    v
}

/// Exact static probabilities over all `2^n` input vectors.
pub fn exhaustive_probabilities(circuit: &Circuit) -> Vec<f64> {
    let n_in = circuit.inputs().len();
    assert!(n_in <= 20);
    let mut ones = vec![0u64; circuit.num_gates()];
    for v in 0..1u64 << n_in {
        let inputs: Vec<bool> = (0..n_in).map(|k| v >> k & 1 == 1).collect();
        for (c, b) in ones.iter_mut().zip(simulate_vector(circuit, &inputs, None)) {
            *c += u64::from(b);
        }
    }
    ones.iter()
        .map(|&c| c as f64 / (1u64 << n_in) as f64)
        .collect()
}

/// Exact sensitization probabilities, `num_gates × num_outputs` row-major.
pub fn exhaustive_sensitization(circuit: &Circuit) -> Vec<f64> {
    let n_in = circuit.inputs().len();
    assert!(n_in <= 20);
    let n = circuit.num_gates();
    let outs = circuit.output_gates();
    let mut counts = vec![0u64; n * outs.len()];
    for v in 0..1u64 << n_in {
        let inputs: Vec<bool> = (0..n_in).map(|k| v >> k & 1 == 1).collect();
        let good = simulate_vector(circuit, &inputs, None);
        for i in 0..n {
            let bad = simulate_vector(circuit, &inputs, Some(i));
            for (j, &o) in outs.iter().enumerate() {
                counts[i * outs.len() + j] += u64::from(good[o] != bad[o]);
            }
        }
    }
    counts
        .iter()
        .map(|&c| c as f64 / (1u64 << n_in) as f64)
        .collect()
}

/// Width after passing through each delay in turn.
pub fn chain_width(w: f64, delays: &[f64]) -> f64 {
    delays.iter().fold(w, |w, &d| attenuate(w, d))
}

/// `T·Δ` through an explicit dense matrix.
pub fn dense_path_sums(t: &TopologyMatrix, delta: &[f64]) -> Vec<f64> {
    let m = t.to_dense();
    let x = nalgebra::DVector::from_column_slice(delta);
    (m * x).iter().copied().collect()
}

/// Grid neighbours that break the expected trends: delay and wgen
/// non-increasing in size and vdd, non-decreasing in length and vth.
pub fn trend_violations(table: &CharTable) -> Vec<String> {
    let mut out = Vec::new();
    for e in table.entries() {
        let a = &e.axes;
        let lens = [
            a.size.len(),
            a.channel_length_nm.len(),
            a.vdd_v.len(),
            a.vth_v.len(),
            a.load_ff.len(),
        ];
        let mut stride = [1usize; 5];
        for k in (0..4).rev() {
            stride[k] = stride[k + 1] * lens[k + 1];
        }
        let total: usize = lens.iter().product();
        for off in 0..total {
            if !e.valid[off] {
                continue;
            }
            for (axis, rising) in [(0, false), (1, true), (2, false), (3, true)] {
                if (off / stride[axis]) % lens[axis] + 1 == lens[axis] {
                    continue;
                }
                let next = off + stride[axis];
                if !e.valid[next] {
                    continue;
                }
                for (name, v) in [("delay", &e.delay_ps), ("wgen", &e.wgen_ps)] {
                    let ok = if rising {
                        v[next] >= v[off]
                    } else {
                        v[next] <= v[off]
                    };
                    if !ok {
                        out.push(format!(
                            "{:?}/{} {name} along {} at offset {off}: {} -> {}",
                            e.kind, e.fanin, AXIS_NAMES[axis], v[off], v[next]
                        ));
                    }
                }
            }
        }
    }
    out
}
