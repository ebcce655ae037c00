//! Electrical masking: glitch attenuation through a gate and the one-pass
//! reverse-topological computation of expected output widths.

use super::logic::MaskingProfile;
use super::AnalysisError;
use crate::netlist::Circuit;

/// Default number of sample widths.
pub const DEFAULT_SAMPLES: usize = 10;

/// Width of a glitch after passing through a gate of delay `d`.
///
/// Fully filtered below `d`, passed unchanged from `2d`, and linear in
/// between; continuous at both breakpoints.
#[inline]
pub fn attenuate(w_in: f64, d: f64) -> f64 {
    if w_in < d {
        0.0
    } else if w_in < 2.0 * d {
        2.0 * (w_in - d)
    } else {
        w_in
    }
}

/// Where a width falls on a descending sample grid.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Slot {
    Exact(usize),
    /// Strictly between `samples[k]` and `samples[k + 1]`, at fraction `t`
    /// from the narrower one.
    Between(usize, f64),
    /// Proportional extension from sample `k` (widest or narrowest).
    Scaled(usize, f64),
}

fn locate(samples: &[f64], w: f64) -> Slot {
    let last = samples.len() - 1;
    if w >= samples[0] {
        return if w == samples[0] {
            Slot::Exact(0)
        } else {
            Slot::Scaled(0, w / samples[0])
        };
    }
    if w <= samples[last] {
        return if w == samples[last] {
            Slot::Exact(last)
        } else {
            Slot::Scaled(last, w / samples[last])
        };
    }
    // samples[0] > w > samples[last]
    let k = samples.partition_point(|&s| s > w);
    if samples[k] == w {
        return Slot::Exact(k);
    }
    let (wide, narrow) = (samples[k - 1], samples[k]);
    Slot::Between(k - 1, (w - narrow) / (wide - narrow))
}

#[inline]
fn read(slot: Slot, values: &[f64]) -> f64 {
    match slot {
        Slot::Exact(k) => values[k],
        Slot::Between(k, t) => values[k + 1] + t * (values[k] - values[k + 1]),
        Slot::Scaled(k, r) => values[k] * r,
    }
}

/// Piecewise-linear lookup of a per-sample table at width `w`. Below the
/// narrowest sample the table is extended linearly through the origin, above
/// the widest one proportionally.
pub fn interp_width(samples: &[f64], values: &[f64], w: f64) -> f64 {
    read(locate(samples, w), values)
}

/// Geometric grid from `widest` down to `narrowest`, descending.
pub fn geometric_samples(widest: f64, narrowest: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && widest > narrowest && narrowest > 0.0);
    let ratio = narrowest / widest;
    let mut out: Vec<f64> = (0..n)
        .map(|k| widest * ratio.powf(k as f64 / (n - 1) as f64))
        .collect();
    out[0] = widest;
    out[n - 1] = narrowest;
    out
}

/// Instrumentation for the single-pass claim.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PassCounters {
    pub gate_visits: u64,
    pub edge_traversals: u64,
    pub samples: u64,
}

impl PassCounters {
    pub fn edge_traversals_per_sample(&self) -> u64 {
        self.edge_traversals.checked_div(self.samples).unwrap_or(0)
    }
}

/// Expected glitch widths at the primary outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct GlitchProfile {
    /// Sample widths, descending; `samples[0]` is the widest.
    pub samples: Vec<f64>,
    n_outputs: usize,
    /// `WS[(i·J + j)·K + k]`.
    sampled: Vec<f64>,
    /// Generated width per gate.
    pub wgen: Vec<f64>,
    /// `W[i·J + j]`.
    expected: Vec<f64>,
    pub counters: PassCounters,
}

impl GlitchProfile {
    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// Expected width at output `j` for sample `k` injected at gate `i`.
    pub fn sampled(&self, i: usize, j: usize, k: usize) -> f64 {
        let n_k = self.samples.len();
        self.sampled[(i * self.n_outputs + j) * n_k + k]
    }

    pub fn sampled_row(&self, i: usize, j: usize) -> &[f64] {
        let n_k = self.samples.len();
        let at = (i * self.n_outputs + j) * n_k;
        &self.sampled[at..at + n_k]
    }

    /// Expected width at output `j` for the glitch generated at gate `i`.
    pub fn expected(&self, i: usize, j: usize) -> f64 {
        self.expected[i * self.n_outputs + j]
    }

    pub fn expected_row(&self, i: usize) -> &[f64] {
        &self.expected[i * self.n_outputs..(i + 1) * self.n_outputs]
    }

    /// Expected width at any width `w` injected at gate `i`.
    pub fn expected_at(&self, i: usize, j: usize, w: f64) -> f64 {
        interp_width(&self.samples, self.sampled_row(i, j), w)
    }
}

pub fn check_samples(samples: &[f64], delays: &[f64]) -> Result<(), AnalysisError> {
    if samples.len() < 2 {
        return Err(AnalysisError::Config(
            "need at least two sample widths".into(),
        ));
    }
    if !samples.iter().all(|&s| s > 0.0 && s.is_finite())
        || samples.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(AnalysisError::Config(
            "sample widths must be positive and strictly descending".into(),
        ));
    }
    if let Some(&bad) = delays.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
        return Err(AnalysisError::Config(format!(
            "gate delay {bad} ps must be positive"
        )));
    }
    let d_max = delays.iter().copied().fold(0.0, f64::max);
    if !(samples[0] > 2.0 * d_max) {
        return Err(AnalysisError::Config(format!(
            "widest sample {} ps must exceed twice the largest gate delay ({d_max} ps)",
            samples[0]
        )));
    }
    Ok(())
}

/// Computes `WS` and `W` in one pass over the gates in reverse topological
/// order.
///
/// A primary-output gate captures its own samples directly; when it also has
/// fan-out, the successor contributions are added on top (they can only reach
/// other outputs).
pub fn propagate_expected_widths(
    circuit: &Circuit,
    delays: &[f64],
    masking: &MaskingProfile,
    samples: &[f64],
    wgen: &[f64],
) -> Result<GlitchProfile, AnalysisError> {
    let n = circuit.num_gates();
    if delays.len() != n || wgen.len() != n {
        return Err(AnalysisError::Length {
            what: "delays/wgen",
            expected: n,
            found: delays.len().min(wgen.len()),
        });
    }
    check_samples(samples, delays)?;
    let n_out = circuit.num_outputs();
    let n_k = samples.len();
    let mut sampled = vec![0.0; n * n_out * n_k];
    let mut expected = vec![0.0; n * n_out];
    let mut counters = PassCounters {
        samples: n_k as u64,
        ..Default::default()
    };
    let mut acc = vec![0.0; n_out * n_k];

    for &i in circuit.topological_order().iter().rev() {
        counters.gate_visits += 1;
        acc.iter_mut().for_each(|v| *v = 0.0);
        if let Some(own) = circuit.output_index(i) {
            acc[own * n_k..(own + 1) * n_k].copy_from_slice(samples);
        }
        for (k, &ws_k) in samples.iter().enumerate() {
            for (e, &s) in circuit.fanout(i).iter().enumerate() {
                counters.edge_traversals += 1;
                let slot = locate(samples, attenuate(ws_k, delays[s]));
                let weights = masking.weights(i, e);
                for (j, &pi) in weights.iter().enumerate() {
                    if pi == 0.0 {
                        continue;
                    }
                    let at = (s * n_out + j) * n_k;
                    acc[j * n_k + k] += pi * read(slot, &sampled[at..at + n_k]);
                }
            }
        }
        let base = i * n_out * n_k;
        sampled[base..base + n_out * n_k].copy_from_slice(&acc);
        let slot = locate(samples, wgen[i]);
        for j in 0..n_out {
            expected[i * n_out + j] = read(slot, &acc[j * n_k..(j + 1) * n_k]);
        }
    }

    Ok(GlitchProfile {
        samples: samples.to_vec(),
        n_outputs: n_out,
        sampled,
        wgen: wgen.to_vec(),
        expected,
        counters,
    })
}
