//! CSV writers. Every file starts with a `#` line naming its kind, the
//! column schema version, the settings digest and the seed; summary values
//! follow the rows as `# key=value` lines.

use std::fmt::Write;

use crate::aserta::Report;
use crate::netlist::Circuit;
use crate::sertopt::{Assignment, HistoryRow, Metrics, OptimizeResult};

pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvMeta {
    pub digest: String,
    pub seed: u64,
}

fn header(out: &mut String, what: &str, meta: &CsvMeta) {
    writeln!(
        out,
        "# sertol {what} schema={CSV_SCHEMA_VERSION} digest={} seed={}",
        meta.digest, meta.seed
    )
    .unwrap();
}

fn metrics_lines(out: &mut String, prefix: &str, m: &Metrics) {
    writeln!(out, "# {prefix}u={}", m.u).unwrap();
    writeln!(out, "# {prefix}t_ps={}", m.t).unwrap();
    writeln!(out, "# {prefix}e_fj={}", m.e).unwrap();
    writeln!(out, "# {prefix}a={}", m.a).unwrap();
}

/// One row per gate with its parameters and analysis results, optionally the
/// expected width at every primary output.
pub fn report_csv(
    circuit: &Circuit,
    params: &[crate::GateParams],
    report: &Report,
    per_output: bool,
    meta: &CsvMeta,
) -> String {
    let mut out = String::new();
    header(&mut out, "report", meta);
    out.push_str(
        "id,name,kind,fanin,size,length_nm,vdd_v,vth_v,load_ff,delay_ps,wgen_ps,arrival_ps,u_gate",
    );
    if per_output {
        for name in circuit.outputs() {
            write!(out, ",w_{name}").unwrap();
        }
    }
    out.push('\n');
    for (g, gate) in circuit.gates().iter().enumerate() {
        let p = &params[g];
        let c = &report.cells[g];
        write!(
            out,
            "{g},{},{},{},{},{},{},{},{},{},{},{},{}",
            gate.name,
            gate.kind,
            gate.fanin_count(),
            p.size,
            p.channel_length_nm,
            p.vdd,
            p.vth,
            report.loads_ff[g],
            c.delay,
            c.wgen,
            report.arrival_ps[g],
            report.u_gate[g]
        )
        .unwrap();
        if per_output {
            for w in report.glitch.expected_row(g) {
                write!(out, ",{w}").unwrap();
            }
        }
        out.push('\n');
    }
    metrics_lines(&mut out, "", &Metrics::of(report));
    writeln!(out, "# n_vectors={}", report.masking.n_vectors).unwrap();
    out
}

pub fn assignment_csv(circuit: &Circuit, a: &Assignment, meta: &CsvMeta) -> String {
    let mut out = String::new();
    header(&mut out, "assignment", meta);
    out.push_str("id,name,size,length_nm,vdd_v,vth_v\n");
    for (g, p) in a.0.iter().enumerate() {
        writeln!(
            out,
            "{g},{},{},{},{},{}",
            circuit.gate(g).name,
            p.size,
            p.channel_length_nm,
            p.vdd,
            p.vth
        )
        .unwrap();
    }
    out
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn history_csv(history: &[HistoryRow], meta: &CsvMeta) -> String {
    let mut out = String::new();
    header(&mut out, "history", meta);
    out.push_str("evaluation,sigma_digest,step_ps,outcome,cost,u,t_ps,e_fj,a\n");
    for h in history {
        let outcome = serde_json::to_value(h.outcome).expect("enum serializes");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            h.evaluation,
            h.sigma_digest,
            h.step_ps,
            outcome.as_str().expect("unit variant"),
            opt(h.cost),
            opt(h.metrics.map(|m| m.u)),
            opt(h.metrics.map(|m| m.t)),
            opt(h.metrics.map(|m| m.e)),
            opt(h.metrics.map(|m| m.a)),
        )
        .unwrap();
    }
    out
}

/// Summary of an optimization run as comment lines.
pub fn optimize_summary(r: &OptimizeResult) -> String {
    let mut out = String::new();
    metrics_lines(&mut out, "init_", &r.baseline_metrics);
    metrics_lines(&mut out, "final_", &Metrics::of(&r.best_report));
    let q = r.ratios();
    writeln!(out, "# u_ratio={}", q.u).unwrap();
    writeln!(out, "# t_ratio={}", q.t).unwrap();
    writeln!(out, "# e_ratio={}", q.e).unwrap();
    writeln!(out, "# a_ratio={}", q.a).unwrap();
    writeln!(out, "# cost={}", r.best_cost).unwrap();
    writeln!(out, "# free_potentials={}", r.n_free).unwrap();
    writeln!(out, "# evaluations={}", r.history.len() - 1).unwrap();
    out
}
