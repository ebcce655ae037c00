//! Unreliability estimation.
//!
//! A particle strike at every gate output generates a glitch whose width
//! comes from the characterization table. Its expected captured width at
//! every primary output combines logical masking ([`logic`]) with
//! electrical attenuation ([`electrical`]). Capture probability is taken
//! proportional to width, so the size-weighted sum of expected widths is the
//! circuit's unreliability.

pub mod electrical;
pub mod logic;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gatelib::{Cell, CharTable, GateParams, LibError};
use crate::netlist::{Circuit, GateId};
use crate::par::Exec;
use crate::timing;

pub use electrical::{attenuate, propagate_expected_widths, GlitchProfile, PassCounters};
pub use logic::MaskingProfile;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Lib(#[from] LibError),
    #[error("analysis configuration: {0}")]
    Config(String),
    #[error("{what}: expected {expected} entries, found {found}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// What multiplies a gate's summed output widths in its unreliability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrikeWeight {
    /// Drive size.
    #[default]
    Size,
    /// Size times relative channel length.
    Area,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub n_vectors: usize,
    pub seed: u64,
    pub n_samples: usize,
    /// External load on every primary-output net, fF.
    pub po_load_ff: f64,
    pub strike_weight: StrikeWeight,
    /// Explicit sample widths (descending, ps); derived from the table when
    /// absent.
    pub samples: Option<Vec<f64>>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            n_vectors: logic::DEFAULT_VECTORS,
            seed: 1,
            n_samples: electrical::DEFAULT_SAMPLES,
            po_load_ff: 2.0,
            strike_weight: StrikeWeight::Size,
            samples: None,
        }
    }
}

/// Sample widths spanning the table entries used by `circuit`: the widest is
/// four times the largest characterized delay, the narrowest a quarter of the
/// smallest, geometrically spaced.
pub fn library_samples(
    circuit: &Circuit,
    table: &CharTable,
    n: usize,
) -> Result<Vec<f64>, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::Config(
            "need at least two sample widths".into(),
        ));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for gate in circuit.gates() {
        let entry = table.entry(gate.kind, gate.fanin_count())?;
        if let Some((a, b)) = entry.delay_range() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    if !(lo.is_finite() && hi > 0.0) {
        return Err(AnalysisError::Config(
            "table has no valid delays for this circuit".into(),
        ));
    }
    Ok(electrical::geometric_samples(4.0 * hi, 0.25 * lo, n))
}

/// Output load of gate `g` given the input capacitance of every gate:
/// successor pin capacitances plus the external load on primary outputs.
/// A gate nobody reads is treated as driving the external load.
pub fn gate_load(circuit: &Circuit, g: GateId, cin: &[f64], po_load_ff: f64) -> f64 {
    let pins: f64 = circuit
        .fanout(g)
        .iter()
        .zip(circuit.fanout_pins(g))
        .map(|(&s, &m)| f64::from(m) * cin[s])
        .sum();
    if circuit.is_output(g) || circuit.fanout(g).is_empty() {
        pins + po_load_ff
    } else {
        pins
    }
}

/// Cell values of every gate at its actual load, computed outputs-first.
pub fn characterize_gates(
    circuit: &Circuit,
    table: &CharTable,
    params: &[GateParams],
    po_load_ff: f64,
) -> Result<(Vec<f64>, Vec<Cell>), AnalysisError> {
    let n = circuit.num_gates();
    if params.len() != n {
        return Err(AnalysisError::Length {
            what: "assignment",
            expected: n,
            found: params.len(),
        });
    }
    let mut loads = vec![0.0; n];
    let mut cells: Vec<Option<Cell>> = vec![None; n];
    let mut cin = vec![0.0; n];
    for &g in circuit.topological_order().iter().rev() {
        let gate = circuit.gate(g);
        loads[g] = gate_load(circuit, g, &cin, po_load_ff);
        let cell = table
            .entry(gate.kind, gate.fanin_count())?
            .lookup_cell(&params[g], loads[g])?;
        cin[g] = cell.cin;
        cells[g] = Some(cell);
    }
    Ok((
        loads,
        cells
            .into_iter()
            .map(|c| c.expect("every gate visited"))
            .collect(),
    ))
}

/// Per-gate and total unreliability from expected output widths.
pub fn unreliability(glitch: &GlitchProfile, strike_weights: &[f64]) -> (Vec<f64>, f64) {
    let per_gate: Vec<f64> = strike_weights
        .iter()
        .enumerate()
        .map(|(i, &z)| z * glitch.expected_row(i).iter().sum::<f64>())
        .collect();
    let total = per_gate.iter().sum();
    (per_gate, total)
}

/// Full analysis result for one assignment.
#[derive(Clone, Debug)]
pub struct Report {
    pub masking: Arc<MaskingProfile>,
    pub loads_ff: Vec<f64>,
    pub cells: Vec<Cell>,
    pub glitch: GlitchProfile,
    pub arrival_ps: Vec<f64>,
    /// Unreliability contribution per gate.
    pub u_gate: Vec<f64>,
    /// Total unreliability.
    pub u: f64,
    /// Circuit delay, ps.
    pub t: f64,
    /// Energy per clock, fJ.
    pub e: f64,
    /// Area in minimum-device units.
    pub a: f64,
}

impl Report {
    pub fn delays(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.delay).collect()
    }
}

/// Analysis context for one circuit: logical masking and the sample grid are
/// computed once and shared by every assignment evaluated.
#[derive(Clone, Debug)]
pub struct Analyzer<'a> {
    pub circuit: &'a Circuit,
    pub table: &'a CharTable,
    pub config: AnalysisConfig,
    pub masking: Arc<MaskingProfile>,
    pub samples: Vec<f64>,
}

impl<'a> Analyzer<'a> {
    pub fn new(
        circuit: &'a Circuit,
        table: &'a CharTable,
        config: AnalysisConfig,
        exec: Exec,
    ) -> Result<Analyzer<'a>, AnalysisError> {
        if config.n_vectors == 0 {
            return Err(AnalysisError::Config("n_vectors must be >= 1".into()));
        }
        let masking = MaskingProfile::compute(circuit, config.n_vectors, config.seed, exec);
        Analyzer::with_masking(circuit, table, config, Arc::new(masking))
    }

    pub fn with_masking(
        circuit: &'a Circuit,
        table: &'a CharTable,
        config: AnalysisConfig,
        masking: Arc<MaskingProfile>,
    ) -> Result<Analyzer<'a>, AnalysisError> {
        let samples = match &config.samples {
            Some(s) => s.clone(),
            None => library_samples(circuit, table, config.n_samples)?,
        };
        Ok(Analyzer {
            circuit,
            table,
            config,
            masking,
            samples,
        })
    }

    pub fn evaluate(&self, params: &[GateParams]) -> Result<Report, AnalysisError> {
        let circuit = self.circuit;
        let (loads, cells) =
            characterize_gates(circuit, self.table, params, self.config.po_load_ff)?;
        let delays: Vec<f64> = cells.iter().map(|c| c.delay).collect();
        let wgen: Vec<f64> = cells.iter().map(|c| c.wgen).collect();
        let glitch =
            propagate_expected_widths(circuit, &delays, &self.masking, &self.samples, &wgen)?;
        let weights: Vec<f64> = params
            .iter()
            .map(|p| match self.config.strike_weight {
                StrikeWeight::Size => p.size,
                StrikeWeight::Area => p.area(),
            })
            .collect();
        let (u_gate, u) = unreliability(&glitch, &weights);
        let arrival = timing::arrival_times(circuit, &delays);
        let e = cells
            .iter()
            .zip(&self.masking.activity)
            .map(|(c, &act)| act * c.edyn + c.estat)
            .sum();
        let a = params.iter().map(GateParams::area).sum();
        Ok(Report {
            masking: Arc::clone(&self.masking),
            loads_ff: loads,
            cells,
            glitch,
            t: arrival.circuit_delay,
            arrival_ps: arrival.gate,
            u_gate,
            u,
            e,
            a,
        })
    }
}

/// One-shot analysis of a single assignment.
pub fn analyze(
    circuit: &Circuit,
    params: &[GateParams],
    table: &CharTable,
    config: &AnalysisConfig,
) -> Result<Report, AnalysisError> {
    Analyzer::new(circuit, table, config.clone(), Exec::default())?.evaluate(params)
}

#[derive(Debug, Error, PartialEq)]
pub enum CorrelationError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points")]
    TooShort,
    #[error("correlation undefined: a series has zero variance")]
    ZeroVariance,
}

/// Pearson correlation coefficient.
pub fn correlation(u: &[f64], v: &[f64]) -> Result<f64, CorrelationError> {
    if u.len() != v.len() {
        return Err(CorrelationError::LengthMismatch(u.len(), v.len()));
    }
    if u.len() < 2 {
        return Err(CorrelationError::TooShort);
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (&a, &b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(CorrelationError::ZeroVariance);
    }
    Ok((suv / (suu * svv).sqrt()).clamp(-1.0, 1.0))
}
