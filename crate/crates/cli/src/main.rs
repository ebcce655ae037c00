mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use sertol::aserta::{correlation, AnalysisError, Analyzer};
use sertol::gatelib::synth::synth_characterize;
use sertol::netlist::{enumerate_paths, parse_bench, Circuit};
use sertol::output::{assignment_csv, history_csv, optimize_summary, report_csv, CsvMeta};
use sertol::sertopt::{optimize, validate_assignment, Assignment, OptError};
use sertol::timing::{build_nullspace, path_names};
use sertol::{CharTable, Exec, GateParams};

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "sertol",
    version,
    about = "Soft-error tolerance analysis and optimization"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Characterization table (JSON); overrides the config.
    #[arg(long, global = true)]
    lib: Option<PathBuf>,
    /// Main output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a characterization table.
    GenLib,
    /// Estimate unreliability of a netlist.
    Analyze {
        netlist: PathBuf,
        /// Per-gate parameters (assignment CSV); uniform baseline otherwise.
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Add expected-width columns for every primary output.
        #[arg(long)]
        per_output: bool,
    },
    /// Reassign gate parameters to reduce unreliability at fixed path delays.
    Optimize {
        netlist: PathBuf,
        /// History CSV, one row per evaluation.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// List PI-to-PO paths and the potential classes.
    Paths {
        netlist: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Pearson correlation of one column in two per-gate CSV files.
    Correlate {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "u_gate")]
        column: String,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: e.into(),
    }
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: e.into(),
    }
}

fn analysis_failure(e: AnalysisError) -> Failure {
    match e {
        AnalysisError::Config(_) => usage(e),
        _ => input(e),
    }
}

fn opt_failure(e: OptError) -> Failure {
    match e {
        OptError::Analysis(a) => analysis_failure(a),
        OptError::Config(_) => usage(e),
        OptError::Assignment(_) => internal(e),
        _ => input(e),
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .map_err(internal)?;
    }
    let mut cfg = config::load(cli.global.config.as_deref()).map_err(usage)?;
    if let Some(seed) = cli.global.seed {
        cfg.analysis.seed = seed;
    }
    if let Some(lib) = &cli.global.lib {
        cfg.library.path = Some(lib.clone());
    }
    match cli.command {
        Command::GenLib => gen_lib(&cfg, cli.global.out.as_deref()),
        Command::Analyze {
            netlist,
            assignment,
            per_output,
        } => {
            cfg.analysis.per_output_widths |= per_output;
            let out = cli.global.out.or(cfg.output.report.clone());
            analyze(&cfg, &netlist, assignment.as_deref(), out.as_deref())
        }
        Command::Optimize { netlist, history } => {
            let out = cli.global.out.or(cfg.output.assignment.clone());
            let history = history.or(cfg.output.history.clone());
            run_optimize(&cfg, &netlist, out.as_deref(), history.as_deref())
        }
        Command::Paths { netlist, cap } => paths(&cfg, &netlist, cap, cli.global.out.as_deref()),
        Command::Correlate { a, b, column } => correlate(&a, &b, &column),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(input),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Prints a summary to stdout, or to stderr when stdout carries data.
fn summary(data_on_stdout: bool, text: &str) {
    if data_on_stdout {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
}

fn read_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading netlist {}", path.display()))
        .map_err(input)?;
    parse_bench(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input)
}

fn synthesize(cfg: &RunConfig) -> Result<CharTable, Failure> {
    let grid = cfg.grid.grid();
    if grid.has_invalid_combinations() {
        return Err(usage(anyhow!(
            "grid contains threshold voltages at or above a supply voltage"
        )));
    }
    let lib = &cfg.library;
    synth_characterize(
        &lib.constants,
        &grid,
        lib.charge_fc,
        &lib.load_axis_ff,
        lib.max_fanin,
    )
    .map_err(usage)
}

/// The table and its serialized form (which feeds the settings digest).
fn load_table(cfg: &RunConfig) -> Result<(CharTable, String), Failure> {
    match &cfg.library.path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading library {}", p.display()))
                .map_err(input)?;
            let table = CharTable::from_json(&text)
                .with_context(|| format!("loading library {}", p.display()))
                .map_err(input)?;
            Ok((table, text))
        }
        None => {
            let table = synthesize(cfg)?;
            let json = table.to_json();
            Ok((table, json))
        }
    }
}

fn gen_lib(cfg: &RunConfig, out: Option<&Path>) -> Outcome {
    let table = synthesize(cfg)?;
    let out = out.unwrap_or(Path::new("lib.json"));
    table
        .save(out)
        .with_context(|| format!("writing {}", out.display()))
        .map_err(input)?;
    let mut s = String::new();
    let g = cfg.grid.grid();
    writeln!(s, "wrote {}", out.display()).unwrap();
    writeln!(s, "sizes: {:?}", g.sizes).unwrap();
    writeln!(s, "lengths_nm: {:?}", g.lengths_nm).unwrap();
    writeln!(s, "vdds_v: {:?}", g.vdds).unwrap();
    writeln!(s, "vths_v: {:?}", g.vths).unwrap();
    writeln!(s, "load_ff: {:?}", cfg.library.load_axis_ff).unwrap();
    writeln!(s, "charge_fc: {}", table.charge_fc).unwrap();
    let entries: Vec<String> = table
        .entries()
        .map(|e| format!("{}/{}", e.kind, e.fanin))
        .collect();
    writeln!(s, "entries ({}): {}", entries.len(), entries.join(" ")).unwrap();
    print!("{s}");
    Ok(())
}

fn read_assignment(path: &Path, circuit: &Circuit) -> Result<Assignment, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading assignment {}", path.display()))
        .map_err(input)?;
    let mut params: Vec<Option<GateParams>> = vec![None; circuit.num_gates()];
    for row in reader.deserialize::<AssignmentRow>() {
        let row = row
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(input)?;
        let g = circuit
            .find_gate(&row.name)
            .ok_or_else(|| input(anyhow!("assignment names unknown gate {}", row.name)))?;
        params[g] = Some(GateParams {
            size: row.size,
            channel_length_nm: row.length_nm,
            vdd: row.vdd_v,
            vth: row.vth_v,
        });
    }
    params
        .into_iter()
        .enumerate()
        .map(|(g, p)| {
            p.ok_or_else(|| input(anyhow!("assignment misses gate {}", circuit.gate(g).name)))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Assignment)
}

#[derive(serde::Deserialize)]
struct AssignmentRow {
    name: String,
    size: f64,
    length_nm: f64,
    vdd_v: f64,
    vth_v: f64,
}

fn analyze(
    cfg: &RunConfig,
    netlist: &Path,
    assignment: Option<&Path>,
    out: Option<&Path>,
) -> Outcome {
    let circuit = read_circuit(netlist)?;
    let (table, json) = load_table(cfg)?;
    let params = match assignment {
        Some(p) => read_assignment(p, &circuit)?,
        None => Assignment::uniform(&circuit, cfg.optimize_config().baseline),
    };
    let analyzer = Analyzer::new(&circuit, &table, cfg.analysis_config(), Exec::Parallel)
        .map_err(analysis_failure)?;
    let report = analyzer.evaluate(&params.0).map_err(analysis_failure)?;
    let meta = CsvMeta {
        digest: cfg.digest(&json),
        seed: cfg.analysis.seed,
    };
    let csv = report_csv(
        &circuit,
        &params.0,
        &report,
        cfg.analysis.per_output_widths,
        &meta,
    );
    write_or_print(out, &csv)?;
    summary(
        out.is_none(),
        &format!(
            "gates={} U={} T_ps={} E_fj={} A={} seed={} digest={}\n",
            circuit.num_gates(),
            report.u,
            report.t,
            report.e,
            report.a,
            meta.seed,
            meta.digest
        ),
    );
    Ok(())
}

fn run_optimize(
    cfg: &RunConfig,
    netlist: &Path,
    out: Option<&Path>,
    history: Option<&Path>,
) -> Outcome {
    let circuit = read_circuit(netlist)?;
    let (table, json) = load_table(cfg)?;
    let oc = cfg.optimize_config();
    let result = optimize(&circuit, &table, &oc, Exec::Parallel).map_err(opt_failure)?;
    validate_assignment(&circuit, &oc.grid, &result.best).map_err(internal)?;
    let meta = CsvMeta {
        digest: cfg.digest(&json),
        seed: cfg.analysis.seed,
    };
    let mut csv = assignment_csv(&circuit, &result.best, &meta);
    csv.push_str(&optimize_summary(&result));
    write_or_print(out, &csv)?;
    if let Some(h) = history {
        write_or_print(Some(h), &history_csv(&result.history, &meta))?;
    }
    let r = result.ratios();
    summary(
        out.is_none(),
        &format!(
            "U/U_init={} T/T_init={} E/E_init={} A/A_init={} evaluations={} seed={}\n",
            r.u,
            r.t,
            r.e,
            r.a,
            result.history.len() - 1,
            meta.seed
        ),
    );
    Ok(())
}

fn paths(cfg: &RunConfig, netlist: &Path, cap: Option<usize>, out: Option<&Path>) -> Outcome {
    let circuit = read_circuit(netlist)?;
    let paths = enumerate_paths(&circuit, cap.unwrap_or(cfg.paths.cap)).map_err(input)?;
    let ns = build_nullspace(&circuit);
    let mut s = String::new();
    writeln!(s, "# paths {}", paths.len()).unwrap();
    for p in &paths {
        writeln!(
            s,
            "{}: {}",
            circuit.inputs()[p.input],
            path_names(&circuit, &p.gates)
        )
        .unwrap();
    }
    writeln!(s, "# classes {} free {}", ns.n_classes(), ns.n_free()).unwrap();
    for (c, members) in ns.members().iter().enumerate() {
        let state = match ns.free_index(c) {
            Some(f) => format!("free {f}"),
            None => "pinned".to_string(),
        };
        let names: Vec<&str> = members
            .iter()
            .map(|&g| circuit.gate(g).name.as_str())
            .collect();
        writeln!(s, "class {c} ({state}): {}", names.join(" ")).unwrap();
    }
    write_or_print(out, &s)
}

fn read_column(path: &Path, column: &str) -> Result<Vec<(String, f64)>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)?;
    let headers = reader.headers().map_err(input)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| input(anyhow!("{} has no `{name}` column", path.display())))
    };
    let (id, col) = (find("id")?, find(column)?);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(input)?;
        let value: f64 = rec[col]
            .parse()
            .with_context(|| format!("{}: bad number `{}`", path.display(), &rec[col]))
            .map_err(input)?;
        out.push((rec[id].to_string(), value));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn correlate(a: &Path, b: &Path, column: &str) -> Outcome {
    let u = read_column(a, column)?;
    let v = read_column(b, column)?;
    if u.len() != v.len() || u.iter().zip(&v).any(|(x, y)| x.0 != y.0) {
        return Err(input(anyhow!(
            "{} and {} cover different gate ids",
            a.display(),
            b.display()
        )));
    }
    let xs: Vec<f64> = u.iter().map(|x| x.1).collect();
    let ys: Vec<f64> = v.iter().map(|x| x.1).collect();
    let r = correlation(&xs, &ys).map_err(input)?;
    println!("{r}");
    Ok(())
}
