//! Unreliability-driven parameter assignment.
//!
//! The search runs over the free potentials of [`timing::build_nullspace`],
//! so every target delay assignment has the baseline's path delays. Targets
//! are realized by matching discrete library points outputs-first, then the
//! resulting circuit is analyzed and scored.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aserta::{gate_load, AnalysisConfig, AnalysisError, Analyzer, Report};
use crate::gatelib::{CharTable, GateParams, LibError, LibraryGrid, Quantity};
use crate::netlist::{Circuit, GateId};
use crate::par::Exec;
use crate::timing::{build_nullspace, NullspacePotentials};

/// Per-gate parameters, indexed by gate id.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment(pub Vec<GateParams>);

impl Assignment {
    pub fn uniform(circuit: &Circuit, p: GateParams) -> Assignment {
        Assignment(vec![p; circuit.num_gates()])
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AssignmentViolation {
    #[error("assignment has {found} entries for {expected} gates")]
    Length { expected: usize, found: usize },
    #[error("gate {gate} uses parameters not on the library grid")]
    OffGrid { gate: String },
    #[error("gate {driver} (vdd {driver_vdd} V) drives {driven} (vdd {driven_vdd} V)")]
    VddOrder {
        driver: String,
        driver_vdd: f64,
        driven: String,
        driven_vdd: f64,
    },
}

/// Grid membership of every gate and supply ordering on every edge.
pub fn validate_assignment(
    circuit: &Circuit,
    grid: &LibraryGrid,
    a: &Assignment,
) -> Result<(), AssignmentViolation> {
    if a.0.len() != circuit.num_gates() {
        return Err(AssignmentViolation::Length {
            expected: circuit.num_gates(),
            found: a.0.len(),
        });
    }
    for (g, p) in a.0.iter().enumerate() {
        if !grid.contains(p) {
            return Err(AssignmentViolation::OffGrid {
                gate: circuit.gate(g).name.clone(),
            });
        }
    }
    for g in 0..circuit.num_gates() {
        for &s in circuit.fanout(g) {
            if a.0[g].vdd < a.0[s].vdd {
                return Err(AssignmentViolation::VddOrder {
                    driver: circuit.gate(g).name.clone(),
                    driver_vdd: a.0[g].vdd,
                    driven: circuit.gate(s).name.clone(),
                    driven_vdd: a.0[s].vdd,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum OptError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Lib(#[from] LibError),
    #[error(transparent)]
    Assignment(#[from] AssignmentViolation),
    #[error("target delay {target} ps for gate {gate} must be positive")]
    Target { gate: String, target: f64 },
    #[error("no library point for gate {gate} at load {load_ff} fF with vdd >= {min_vdd} V")]
    NoCandidate {
        gate: String,
        load_ff: f64,
        min_vdd: f64,
    },
    #[error("optimizer configuration: {0}")]
    Config(String),
}

/// Library points realizing `target` delays, chosen outputs-first so each
/// gate's load is known from its already-assigned successors.
///
/// Points whose delay error is within `tolerance · target` of the best one
/// count as ties and are ranked by energy, then area, then grid order. An
/// exact delay match always wins.
pub fn match_parameters(
    circuit: &Circuit,
    target: &[f64],
    grid: &LibraryGrid,
    table: &CharTable,
    po_load_ff: f64,
    tolerance: f64,
) -> Result<Assignment, OptError> {
    let points: Vec<GateParams> = grid
        .points()
        .into_iter()
        .filter(|p| p.vth < p.vdd)
        .collect();
    match_with_points(circuit, target, &points, table, po_load_ff, tolerance)
}

fn match_with_points(
    circuit: &Circuit,
    target: &[f64],
    points: &[GateParams],
    table: &CharTable,
    po_load_ff: f64,
    tolerance: f64,
) -> Result<Assignment, OptError> {
    let n = circuit.num_gates();
    let mut chosen: Vec<Option<GateParams>> = vec![None; n];
    let mut cin = vec![0.0; n];
    let mut errs: Vec<(usize, f64)> = Vec::with_capacity(points.len());
    for &g in circuit.topological_order().iter().rev() {
        let gate = circuit.gate(g);
        if !(target[g] > 0.0) {
            return Err(OptError::Target {
                gate: gate.name.clone(),
                target: target[g],
            });
        }
        let entry = table.entry(gate.kind, gate.fanin_count())?;
        let load = gate_load(circuit, g, &cin, po_load_ff);
        let min_vdd = circuit
            .fanout(g)
            .iter()
            .map(|&s| chosen[s].expect("successors assigned first").vdd)
            .fold(0.0, f64::max);
        errs.clear();
        for (index, p) in points.iter().enumerate() {
            if p.vdd < min_vdd {
                continue;
            }
            if let Ok(delay) = entry.lookup(Quantity::Delay, p, load) {
                errs.push((index, (delay - target[g]).abs()));
            }
        }
        let Some(best_err) = errs.iter().map(|e| e.1).min_by(f64::total_cmp) else {
            return Err(OptError::NoCandidate {
                gate: gate.name.clone(),
                load_ff: load,
                min_vdd,
            });
        };
        let band = if best_err == 0.0 {
            0.0
        } else {
            best_err + tolerance * target[g]
        };
        let mut best: Option<(usize, f64)> = None;
        for &(index, err) in &errs {
            if err > band {
                continue;
            }
            let p = &points[index];
            let energy = entry
                .lookup_cell(p, load)
                .map_or(f64::INFINITY, |c| c.edyn + c.estat);
            let better = match best {
                None => true,
                Some((b, be)) => match energy.total_cmp(&be) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => p.area() < points[b].area(),
                },
            };
            if better {
                best = Some((index, energy));
            }
        }
        let p = points[best.expect("band contains the best point").0];
        cin[g] = entry.lookup(Quantity::Cin, &p, load)?;
        chosen[g] = Some(p);
    }
    Ok(Assignment(
        chosen
            .into_iter()
            .map(|p| p.expect("every gate visited"))
            .collect(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub u: f64,
    pub t: f64,
    pub e: f64,
    pub a: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            u: 1.0,
            t: 1.0,
            e: 0.25,
            a: 0.25,
        }
    }
}

impl CostWeights {
    pub fn sum(&self) -> f64 {
        self.u + self.t + self.e + self.a
    }
}

/// Unreliability, delay (ps), energy (fJ) and area of one circuit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub u: f64,
    pub t: f64,
    pub e: f64,
    pub a: f64,
}

impl Metrics {
    pub fn of(report: &Report) -> Metrics {
        Metrics {
            u: report.u,
            t: report.t,
            e: report.e,
            a: report.a,
        }
    }

    /// Each metric divided by `base`.
    pub fn ratios(&self, base: &Metrics) -> Metrics {
        Metrics {
            u: self.u / base.u,
            t: self.t / base.t,
            e: self.e / base.e,
            a: self.a / base.a,
        }
    }
}

pub fn evaluate_cost(m: &Metrics, weights: &CostWeights, base: &Metrics) -> f64 {
    let r = m.ratios(base);
    weights.u * r.u + weights.t * r.t + weights.e * r.e + weights.a * r.a
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeConfig {
    pub weights: CostWeights,
    pub grid: LibraryGrid,
    pub analysis: AnalysisConfig,
    /// Parameters of every gate in the baseline circuit.
    pub baseline: GateParams,
    pub initial_step_ps: f64,
    pub shrink: f64,
    pub min_step_ps: f64,
    /// Candidate evaluations after the baseline.
    pub max_evaluations: usize,
    /// States slower than this multiple of the baseline delay are rejected.
    pub delay_cap_ratio: f64,
    /// Relative delay band within which matching prefers cheaper points.
    pub match_tolerance: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            weights: CostWeights::default(),
            grid: LibraryGrid::default(),
            analysis: AnalysisConfig::default(),
            baseline: GateParams {
                size: 2.0,
                channel_length_nm: 70.0,
                vdd: 1.0,
                vth: 0.2,
            },
            initial_step_ps: 4.0,
            shrink: 0.5,
            min_step_ps: 0.25,
            max_evaluations: 4000,
            delay_cap_ratio: 1.25,
            match_tolerance: 0.05,
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<(), OptError> {
        let w = &self.weights;
        if ![w.u, w.t, w.e, w.a]
            .iter()
            .all(|&x| x >= 0.0 && x.is_finite())
        {
            return Err(OptError::Config(
                "cost weights must be finite and >= 0".into(),
            ));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(OptError::Config(format!(
                "shrink {} must be in (0, 1)",
                self.shrink
            )));
        }
        if !(self.min_step_ps > 0.0 && self.initial_step_ps >= self.min_step_ps) {
            return Err(OptError::Config(
                "need 0 < min_step_ps <= initial_step_ps".into(),
            ));
        }
        if !(self.match_tolerance >= 0.0) {
            return Err(OptError::Config("match_tolerance must be >= 0".into()));
        }
        if !(self.delay_cap_ratio >= 1.0) {
            return Err(OptError::Config("delay_cap_ratio must be >= 1".into()));
        }
        self.grid.validate()?;
        if !self.grid.contains(&self.baseline) {
            return Err(OptError::Config(
                "baseline parameters are not a grid point".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Baseline,
    Accepted,
    Rejected,
    /// Rejected for exceeding the delay cap.
    OverDelay,
    /// Could not be realized or analyzed.
    Discarded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRow {
    pub evaluation: usize,
    pub sigma_digest: String,
    pub step_ps: f64,
    pub outcome: Outcome,
    pub cost: Option<f64>,
    pub metrics: Option<Metrics>,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub baseline: Assignment,
    pub baseline_metrics: Metrics,
    pub best: Assignment,
    pub best_report: Report,
    pub best_cost: f64,
    pub sigma: Vec<f64>,
    pub n_free: usize,
    pub history: Vec<HistoryRow>,
}

impl OptimizeResult {
    pub fn ratios(&self) -> Metrics {
        Metrics::of(&self.best_report).ratios(&self.baseline_metrics)
    }
}

/// Short hex digest of a potential vector's exact bits.
pub fn sigma_digest(sigma: &[f64]) -> String {
    let mut h = Sha256::new();
    for s in sigma {
        h.update(s.to_bits().to_le_bytes());
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct Evaluated {
    assignment: Assignment,
    report: Report,
    metrics: Metrics,
    cost: f64,
}

struct Search<'a> {
    circuit: &'a Circuit,
    table: &'a CharTable,
    analyzer: Analyzer<'a>,
    points: Vec<GateParams>,
    ns: NullspacePotentials,
    d_base: Vec<f64>,
    base: Metrics,
    weights: CostWeights,
    match_tolerance: f64,
}

impl Search<'_> {
    fn evaluate(&self, sigma: &[f64]) -> Result<Evaluated, OptError> {
        let delta = self.ns.apply_potentials(sigma);
        let target: Vec<f64> = self.d_base.iter().zip(&delta).map(|(d, x)| d + x).collect();
        let assignment = match_with_points(
            self.circuit,
            &target,
            &self.points,
            self.table,
            self.analyzer.config.po_load_ff,
            self.match_tolerance,
        )?;
        let report = self.analyzer.evaluate(&assignment.0)?;
        let metrics = Metrics::of(&report);
        let cost = evaluate_cost(&metrics, &self.weights, &self.base);
        Ok(Evaluated {
            assignment,
            report,
            metrics,
            cost,
        })
    }
}

/// Pattern search over the free potentials.
///
/// Each sweep tries `±step` on every coordinate (negative first), evaluates
/// all candidates, and moves to the cheapest strictly improving one within
/// the delay cap, earliest candidate on ties. A sweep without improvement
/// shrinks the step.
pub fn optimize(
    circuit: &Circuit,
    table: &CharTable,
    config: &OptimizeConfig,
    exec: Exec,
) -> Result<OptimizeResult, OptError> {
    config.validate()?;
    let analyzer = Analyzer::new(circuit, table, config.analysis.clone(), exec)?;
    let baseline = Assignment::uniform(circuit, config.baseline);
    let base_report = analyzer.evaluate(&baseline.0)?;
    let base = Metrics::of(&base_report);
    if !(base.u > 0.0 && base.t > 0.0 && base.e > 0.0 && base.a > 0.0) {
        return Err(OptError::Config(format!(
            "baseline metrics must be positive, got {base:?}"
        )));
    }
    let search = Search {
        circuit,
        table,
        points: config
            .grid
            .points()
            .into_iter()
            .filter(|p| p.vth < p.vdd)
            .collect(),
        ns: build_nullspace(circuit),
        d_base: base_report.delays(),
        base,
        weights: config.weights,
        match_tolerance: config.match_tolerance,
        analyzer,
    };
    let n_free = search.ns.n_free();
    let t_cap = config.delay_cap_ratio * base.t;

    let mut sigma = vec![0.0; n_free];
    let mut current = Evaluated {
        assignment: baseline.clone(),
        report: base_report,
        metrics: base,
        cost: config.weights.sum(),
    };
    let mut history = vec![HistoryRow {
        evaluation: 0,
        sigma_digest: sigma_digest(&sigma),
        step_ps: 0.0,
        outcome: Outcome::Baseline,
        cost: Some(current.cost),
        metrics: Some(base),
    }];
    let mut step = config.initial_step_ps;
    let mut evaluations = 0;

    while n_free > 0 && step >= config.min_step_ps && evaluations < config.max_evaluations {
        let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(2 * n_free);
        for c in 0..n_free {
            for dir in [-1.0, 1.0] {
                let mut s = sigma.clone();
                s[c] += dir * step;
                candidates.push(s);
            }
        }
        candidates.truncate(config.max_evaluations - evaluations);
        let results = exec.map(candidates.len(), |k| search.evaluate(&candidates[k]));

        let mut winner: Option<usize> = None;
        for (k, r) in results.iter().enumerate() {
            if let Ok(ev) = r {
                if ev.metrics.t <= t_cap
                    && ev.cost < current.cost
                    && winner.is_none_or(|w| ev.cost < results[w].as_ref().expect("ok").cost)
                {
                    winner = Some(k);
                }
            }
        }
        let first_row = history.len();
        for (k, r) in results.iter().enumerate() {
            evaluations += 1;
            let (outcome, cost, metrics) = match r {
                Ok(ev) if ev.metrics.t > t_cap => {
                    (Outcome::OverDelay, Some(ev.cost), Some(ev.metrics))
                }
                Ok(ev) => (Outcome::Rejected, Some(ev.cost), Some(ev.metrics)),
                Err(e) => {
                    log::warn!("candidate {evaluations} discarded: {e}");
                    (Outcome::Discarded, None, None)
                }
            };
            history.push(HistoryRow {
                evaluation: evaluations,
                sigma_digest: sigma_digest(&candidates[k]),
                step_ps: step,
                outcome,
                cost,
                metrics,
            });
        }
        match winner {
            Some(w) => {
                history[first_row + w].outcome = Outcome::Accepted;
                sigma = candidates.swap_remove(w);
                current = results
                    .into_iter()
                    .nth(w)
                    .expect("winner index")
                    .expect("winner evaluated");
                log::debug!("accepted cost {:.6} at step {step} ps", current.cost);
            }
            None => step *= config.shrink,
        }
    }

    Ok(OptimizeResult {
        baseline,
        baseline_metrics: base,
        best: current.assignment,
        best_report: current.report,
        best_cost: current.cost,
        sigma,
        n_free,
        history,
    })
}

/// Realized minus target delay per gate for a delay assignment.
pub fn realization_error(
    circuit: &Circuit,
    table: &CharTable,
    target: &[f64],
    assignment: &Assignment,
    po_load_ff: f64,
) -> Result<Vec<f64>, OptError> {
    let (_, cells) = crate::aserta::characterize_gates(circuit, table, &assignment.0, po_load_ff)?;
    Ok(cells.iter().zip(target).map(|(c, t)| c.delay - t).collect())
}

/// Gates whose assignment differs from `base`.
pub fn changed_gates(base: &Assignment, other: &Assignment) -> Vec<GateId> {
    (0..base.0.len())
        .filter(|&g| base.0[g] != other.0[g])
        .collect()
}
