//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sertol::aserta::electrical::geometric_samples;
use sertol::aserta::{attenuate, propagate_expected_widths, Analyzer, MaskingProfile};
use sertol::gatelib::synth::default_table;
use sertol::netlist::{parse_bench, Circuit};
use sertol::oracle::{chain_width, exhaustive_sensitization, trend_violations};
use sertol::sertopt::{optimize, OptimizeConfig};
use sertol::timing::{arrival_times, build_nullspace, verify_nullspace};
use sertol::{AnalysisConfig, Exec, GateParams, LibraryGrid, Report};

/// Unreliability reduction of the first full c432 run, percent.
const GOLDEN_REDUCTION_PCT: f64 = 23.56;
const GOLDEN_SLACK_PCT: f64 = 2.0;

type Verdict = Result<String, String>;

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/testdata")
        .join(name)
}

fn circuit(name: &str) -> Circuit {
    parse_bench(&std::fs::read_to_string(testdata(name)).unwrap()).unwrap()
}

fn chain(n: usize) -> Circuit {
    let mut s = String::from("INPUT(a)\n");
    s.push_str(&format!("OUTPUT(g{n})\n"));
    for k in 1..=n {
        let src = if k == 1 {
            "a".to_string()
        } else {
            format!("g{}", k - 1)
        };
        s.push_str(&format!("g{k} = NOT({src})\n"));
    }
    parse_bench(&s).unwrap()
}

fn diamond() -> Circuit {
    parse_bench("INPUT(a)\nOUTPUT(g4)\ng1 = NOT(a)\ng2 = NOT(g1)\ng3 = BUF(g1)\ng4 = AND(g2, g3)\n")
        .unwrap()
}

fn nominal() -> GateParams {
    OptimizeConfig::default().baseline
}

fn baseline(c: &Circuit, seed: u64) -> Report {
    let table = default_table();
    let config = AnalysisConfig {
        seed,
        ..Default::default()
    };
    Analyzer::new(c, &table, config, Exec::Parallel)
        .unwrap()
        .evaluate(&vec![nominal(); c.num_gates()])
        .unwrap()
}

fn three_branch(w: f64, d: f64) -> f64 {
    if w >= 2.0 * d {
        w
    } else if w >= d {
        2.0 * (w - d)
    } else {
        0.0
    }
}

fn c1_attenuation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases: Vec<(f64, f64)> = (0..1000)
        .map(|_| (rng.random_range(0.0..200.0), rng.random_range(0.1..100.0)))
        .collect();
    for d in [1.0, 7.5, 30.0] {
        cases.push((d, d));
        cases.push((2.0 * d, d));
    }
    cases.extend([(20.0, 30.0), (50.0, 30.0), (70.0, 30.0)]);
    let bad = cases
        .iter()
        .filter(|&&(w, d)| attenuate(w, d) != three_branch(w, d))
        .count();
    if bad > 0 {
        return Err(format!("{bad} of {} pairs differ", cases.len()));
    }
    if attenuate(30.0, 30.0) != 0.0
        || attenuate(60.0, 30.0) != 60.0
        || attenuate(50.0, 30.0) != 40.0
    {
        return Err("boundary cases".into());
    }
    Ok(format!("{} pairs", cases.len()))
}

/// The widest-sample and normalization checks share analysis runs.
struct WidestSampleRuns {
    widest: f64,
    normalization: f64,
    checked: usize,
}

fn widest_sample_runs() -> WidestSampleRuns {
    let mut out = WidestSampleRuns {
        widest: 0.0,
        normalization: 0.0,
        checked: 0,
    };
    for name in ["c17.bench", "c432.bench"] {
        let c = circuit(name);
        for seed in 1..=3 {
            let r = baseline(&c, seed);
            let m = &r.masking;
            let ws1 = r.glitch.samples[0];
            for i in 0..c.num_gates() {
                for j in 0..c.num_outputs() {
                    let p = m.sensitization(i, j);
                    out.widest = out
                        .widest
                        .max((r.glitch.sampled(i, j, 0) - ws1 * p).abs() / ws1);
                    let succ = c.fanout(i);
                    let den: f64 = (0..succ.len())
                        .map(|k| m.edge_sensitization(i, k) * m.sensitization(succ[k], j))
                        .sum();
                    if den != 0.0 {
                        let s: f64 = (0..succ.len())
                            .map(|k| m.weight(i, k, j) * m.sensitization(succ[k], j))
                            .sum();
                        out.normalization = out.normalization.max((s - p).abs());
                        out.checked += 1;
                    }
                }
            }
        }
    }
    out
}

fn c4_exhaustive() -> Verdict {
    let mut details = Vec::new();
    for name in ["c17.bench", "adder4.bench", "muxpar.bench"] {
        let c = circuit(name);
        if c.inputs().len() > 12 {
            return Err(format!("{name} has {} inputs", c.inputs().len()));
        }
        let exact = exhaustive_sensitization(&c);
        let n = 10_000;
        let m = MaskingProfile::compute(&c, n, 1, Exec::Parallel);
        let ok = exact
            .iter()
            .zip(m.sensitization_matrix())
            .filter(|(&p, &q)| (p - q).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt())
            .count();
        let frac = ok as f64 / exact.len() as f64;
        details.push(format!("{name} {ok}/{}", exact.len()));
        if frac < 0.99 {
            return Err(details.join(", "));
        }
    }
    Ok(details.join(", "))
}

fn chain_w(n: usize, delays: &[f64], samples: &[f64], w: f64) -> f64 {
    let c = chain(n);
    let m = MaskingProfile::compute(&c, 64, 1, Exec::Sequential);
    let mut wgen = vec![samples[0]; n];
    wgen[0] = w;
    propagate_expected_widths(&c, delays, &m, samples, &wgen)
        .unwrap()
        .expected(0, 0)
}

fn c5_chain() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let generic = geometric_samples(400.0, 0.5, 10);
    let cell = generic.windows(2).map(|p| p[0] - p[1]).fold(0.0, f64::max);
    let mut worst_generic: f64 = 0.0;
    let mut trials = 0;
    for n in 2..=8 {
        for _ in 0..30 {
            let delays: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..50.0)).collect();
            let w = rng.random_range(1.0..200.0);
            let oracle = chain_width(w, &delays[1..]);
            let mut exact: Vec<f64> = (1..=n).map(|k| chain_width(w, &delays[1..k])).collect();
            exact.retain(|&x| x > 0.0);
            exact.push(301.0);
            exact.sort_by(|a, b| b.total_cmp(a));
            exact.dedup();
            let got = chain_w(n, &delays, &exact, w);
            if got != oracle {
                return Err(format!("length {n}: {got} vs {oracle} on an exact grid"));
            }
            let g = chain_w(n, &delays, &generic, w);
            worst_generic = worst_generic.max((g - oracle).abs());
            trials += 1;
        }
    }
    if worst_generic > cell {
        return Err(format!(
            "generic grid error {worst_generic} above cell {cell}"
        ));
    }
    Ok(format!(
        "{trials} chains exact; generic error {worst_generic:.3} <= cell {cell:.3} ps"
    ))
}

fn c6_nullspace() -> Verdict {
    let mut details = Vec::new();
    for (name, c) in [
        ("chain", chain(5)),
        ("diamond", diamond()),
        ("c17", circuit("c17.bench")),
        ("c432", circuit("c432.bench")),
    ] {
        let ns = build_nullspace(&c);
        let v = verify_nullspace(&c, &ns, 1000, 100_000, 6).map_err(|e| format!("{name}: {e}"))?;
        if v.paths <= 10_000 && v.rank.is_none() {
            return Err(format!("{name}: rank not checked"));
        }
        details.push(format!(
            "{name} paths={} free={} max|sum|={:.1e}",
            v.paths, v.n_free, v.max_abs_sum
        ));
    }
    Ok(details.join("; "))
}

fn c7_arrivals() -> Verdict {
    let c = circuit("c432.bench");
    let d = baseline(&c, 1).delays();
    let base = arrival_times(&c, &d);
    let ns = build_nullspace(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma: Vec<f64> = (0..ns.n_free())
            .map(|_| rng.random_range(-100.0..100.0))
            .collect();
        let moved: Vec<f64> = d
            .iter()
            .zip(ns.apply_potentials(&sigma))
            .map(|(a, b)| a + b)
            .collect();
        let a = arrival_times(&c, &moved);
        for (x, y) in a.output.iter().zip(&base.output) {
            worst = worst.max((x - y).abs());
        }
    }
    if worst > 1e-9 {
        return Err(format!("arrival moved by {worst} ps"));
    }
    Ok(format!("100 draws, max shift {worst:.1e} ps"))
}

/// Grid membership and supply ordering checked edge by edge.
fn assignment_problems(c: &Circuit, grid: &LibraryGrid, a: &[GateParams]) -> Vec<String> {
    let mut out = Vec::new();
    for (g, p) in a.iter().enumerate() {
        let on = grid.sizes.contains(&p.size)
            && grid.lengths_nm.contains(&p.channel_length_nm)
            && grid.vdds.contains(&p.vdd)
            && grid.vths.contains(&p.vth);
        if !on || p.vth >= p.vdd {
            out.push(format!("{} off grid", c.gate(g).name));
        }
    }
    for (s, gate) in c.gates().iter().enumerate() {
        for src in &gate.inputs {
            if let sertol::netlist::Source::Gate(d) = *src {
                if a[d].vdd < a[s].vdd {
                    out.push(format!("{} -> {} raises vdd", c.gate(d).name, gate.name));
                }
            }
        }
    }
    out
}

fn read_assignment_csv(path: &Path, c: &Circuit) -> Vec<GateParams> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    let mut out = vec![None; c.num_gates()];
    for rec in r.records() {
        let rec = rec.unwrap();
        let g = c.find_gate(&rec[1]).unwrap();
        let f = |k: usize| rec[k].parse::<f64>().unwrap();
        out[g] = Some(GateParams {
            size: f(2),
            channel_length_nm: f(3),
            vdd: f(4),
            vth: f(5),
        });
    }
    out.into_iter().map(Option::unwrap).collect()
}

fn c8_matching(c432_assignment: &Path) -> Verdict {
    let table = default_table();
    let grid = LibraryGrid::default();
    let mut runs = 0;
    for name in ["c17.bench", "adder4.bench", "muxpar.bench"] {
        let c = circuit(name);
        let config = OptimizeConfig {
            analysis: AnalysisConfig {
                n_vectors: 2048,
                ..Default::default()
            },
            max_evaluations: 200,
            ..Default::default()
        };
        let r = optimize(&c, &table, &config, Exec::Parallel).map_err(|e| e.to_string())?;
        let p = assignment_problems(&c, &grid, &r.best.0);
        if !p.is_empty() {
            return Err(format!("{name}: {}", p.join(", ")));
        }
        runs += 1;
    }
    let c = circuit("c432.bench");
    let a = read_assignment_csv(c432_assignment, &c);
    let p = assignment_problems(&c, &grid, &a);
    if !p.is_empty() {
        return Err(format!("c432: {}", p.join(", ")));
    }
    Ok(format!(
        "{} optimized assignments valid on every gate and edge",
        runs + 1
    ))
}

fn sertol(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sertol"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "sertol {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn field(summary: &str, key: &str) -> Result<f64, String> {
    summary
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("no {key} in {summary:?}"))
}

fn c9_regression(dir: &Path) -> Verdict {
    let net = testdata("c432.bench");
    let out = dir.join("opt4.csv");
    let hist = dir.join("hist4.csv");
    let s = sertol(&[
        "optimize",
        net.to_str().unwrap(),
        "--threads",
        "4",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--history",
        hist.to_str().unwrap(),
    ])?;
    let u = field(&s, "U/U_init")?;
    let t = field(&s, "T/T_init")?;
    let reduction = 100.0 * (1.0 - u);
    let line = format!("U/U_init={u:.4} (reduction {reduction:.2}%, golden {GOLDEN_REDUCTION_PCT}%) T/T_init={t:.4}");
    if u.is_nan() || u >= 1.0 || t > 1.25 || reduction < GOLDEN_REDUCTION_PCT - GOLDEN_SLACK_PCT {
        return Err(line);
    }
    Ok(line)
}

fn c10_counters() -> Verdict {
    let c = circuit("c432.bench");
    let r = baseline(&c, 1);
    let k = r.glitch.samples.len() as u64;
    let cnt = r.glitch.counters;
    let (v, e) = (c.num_gates() as u64, c.num_edges() as u64);
    if cnt.gate_visits != v || cnt.edge_traversals != e * k {
        return Err(format!("{cnt:?} for V={v} E={e} K={k}"));
    }
    Ok(format!("V={v} E={e} per sample, K={k}"))
}

fn c11_determinism(dir: &Path) -> Verdict {
    let net = testdata("c432.bench");
    let net = net.to_str().unwrap();
    let mut reports = Vec::new();
    for (k, threads) in ["1", "4", "1"].iter().enumerate() {
        let out = dir.join(format!("an{k}.csv"));
        sertol(&[
            "analyze",
            net,
            "--threads",
            threads,
            "--per-output",
            "--out",
            out.to_str().unwrap(),
        ])?;
        reports.push(std::fs::read(out).unwrap());
    }
    if reports.windows(2).any(|p| p[0] != p[1]) {
        return Err("analyze CSVs differ".into());
    }
    let out = dir.join("opt1.csv");
    let hist = dir.join("hist1.csv");
    sertol(&[
        "optimize",
        net,
        "--threads",
        "1",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--history",
        hist.to_str().unwrap(),
    ])?;
    for (a, b) in [("opt1.csv", "opt4.csv"), ("hist1.csv", "hist4.csv")] {
        if std::fs::read(dir.join(a)).unwrap() != std::fs::read(dir.join(b)).unwrap() {
            return Err(format!("{a} and {b} differ"));
        }
    }
    Ok("analyze x3 and optimize at 1 and 4 threads byte-identical".into())
}

fn c12_trends() -> Verdict {
    let v = trend_violations(&default_table());
    if !v.is_empty() {
        return Err(format!("{} violations, first: {}", v.len(), v[0]));
    }
    Ok("no violations".into())
}

struct Tally {
    failed: usize,
}

impl Tally {
    fn report(&mut self, n: usize, name: &str, limit: Duration, run: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        let verdict = match verdict {
            Ok(d) if took > limit => Err(format!("{d}; took {took:.1?}, limit {limit:?}")),
            v => v,
        };
        match verdict {
            Ok(d) => println!("PASS {n:>2} {name}: {d} [{took:.2?}]"),
            Err(d) => {
                self.failed += 1;
                println!("FAIL {n:>2} {name}: {d} [{took:.2?}]");
            }
        }
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let secs = Duration::from_secs;
    let mut t = Tally { failed: 0 };
    t.report(1, "attenuation branches", secs(1), c1_attenuation);

    let start = Instant::now();
    let runs = widest_sample_runs();
    let took = start.elapsed();
    t.report(2, "widest-sample identity", secs(30), || {
        if took > secs(30) {
            return Err(format!("analysis took {took:.1?}"));
        }
        if runs.widest > 1e-9 {
            return Err(format!("max relative gap {:.2e}", runs.widest));
        }
        Ok(format!(
            "max relative gap {:.2e} over c17, c432 x 3 seeds, analysis {took:.2?}",
            runs.widest
        ))
    });
    t.report(3, "weight normalization", secs(1), || {
        if runs.normalization > 1e-12 {
            return Err(format!("max gap {:.2e}", runs.normalization));
        }
        Ok(format!(
            "max gap {:.2e} over {} pairs",
            runs.normalization, runs.checked
        ))
    });
    t.report(4, "exhaustive sensitization", secs(10), c4_exhaustive);
    t.report(5, "inverter chain composition", secs(5), c5_chain);
    t.report(6, "path-sum null space", secs(60), c6_nullspace);
    t.report(7, "arrival preservation", secs(30), c7_arrivals);
    t.report(9, "c432 optimization", secs(600), || {
        c9_regression(dir.path())
    });
    t.report(8, "assignment validity", secs(600), || {
        c8_matching(&dir.path().join("opt4.csv"))
    });
    t.report(10, "propagation counters", secs(1), c10_counters);
    t.report(11, "determinism", secs(120), || c11_determinism(dir.path()));
    t.report(12, "characterization trends", secs(5), c12_trends);

    println!("acceptance: {} of 12 criteria failed", t.failed);
    if t.failed > 0 {
        std::process::exit(1);
    }
}
