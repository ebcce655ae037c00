//! Run configuration: a TOML file, then `SERTOL__SECTION__KEY` environment
//! overrides, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sertol::aserta::StrikeWeight;
use sertol::gatelib::synth::{DEFAULT_CHARGE_FC, DEFAULT_LOAD_AXIS_FF, DEFAULT_MAX_FANIN};
use sertol::sertopt::{CostWeights, OptimizeConfig};
use sertol::{AnalysisConfig, GateParams, LibraryGrid, ModelConstants};
use sha2::{Digest, Sha256};

pub const ENV_PREFIX: &str = "SERTOL__";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub library: LibrarySection,
    pub grid: GridSection,
    pub analysis: AnalysisSection,
    pub optimize: OptimizeSection,
    pub paths: PathsSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LibrarySection {
    /// Table file; synthesized from the model below when absent.
    pub path: Option<PathBuf>,
    pub charge_fc: f64,
    pub load_axis_ff: Vec<f64>,
    pub max_fanin: usize,
    pub constants: ModelConstants,
}

impl Default for LibrarySection {
    fn default() -> Self {
        LibrarySection {
            path: None,
            charge_fc: DEFAULT_CHARGE_FC,
            load_axis_ff: DEFAULT_LOAD_AXIS_FF.to_vec(),
            max_fanin: DEFAULT_MAX_FANIN,
            constants: ModelConstants::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub sizes: Vec<f64>,
    pub lengths_nm: Vec<f64>,
    pub vdds_v: Vec<f64>,
    pub vths_v: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = LibraryGrid::default();
        GridSection {
            sizes: g.sizes,
            lengths_nm: g.lengths_nm,
            vdds_v: g.vdds,
            vths_v: g.vths,
        }
    }
}

impl GridSection {
    pub fn grid(&self) -> LibraryGrid {
        LibraryGrid {
            sizes: self.sizes.clone(),
            lengths_nm: self.lengths_nm.clone(),
            vdds: self.vdds_v.clone(),
            vths: self.vths_v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub n_vectors: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub po_load_ff: f64,
    pub strike_weight: StrikeWeight,
    /// Explicit sample widths, widest first.
    pub samples_ps: Option<Vec<f64>>,
    /// Add one expected-width column per primary output to reports.
    pub per_output_widths: bool,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let a = AnalysisConfig::default();
        AnalysisSection {
            n_vectors: a.n_vectors,
            seed: a.seed,
            n_samples: a.n_samples,
            po_load_ff: a.po_load_ff,
            strike_weight: a.strike_weight,
            samples_ps: None,
            per_output_widths: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub weights: CostWeights,
    pub initial_step_ps: f64,
    pub shrink: f64,
    pub min_step_ps: f64,
    pub max_evaluations: usize,
    pub delay_cap_ratio: f64,
    pub match_tolerance: f64,
    pub baseline_size: f64,
    pub baseline_length_nm: f64,
    pub baseline_vdd_v: f64,
    pub baseline_vth_v: f64,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        let o = OptimizeConfig::default();
        OptimizeSection {
            weights: o.weights,
            initial_step_ps: o.initial_step_ps,
            shrink: o.shrink,
            min_step_ps: o.min_step_ps,
            max_evaluations: o.max_evaluations,
            delay_cap_ratio: o.delay_cap_ratio,
            match_tolerance: o.match_tolerance,
            baseline_size: o.baseline.size,
            baseline_length_nm: o.baseline.channel_length_nm,
            baseline_vdd_v: o.baseline.vdd,
            baseline_vth_v: o.baseline.vth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub cap: usize,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            cap: sertol::netlist::DEFAULT_PATH_CAP,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub report: Option<PathBuf>,
    pub assignment: Option<PathBuf>,
    pub history: Option<PathBuf>,
}

impl RunConfig {
    pub fn analysis_config(&self) -> AnalysisConfig {
        let a = &self.analysis;
        AnalysisConfig {
            n_vectors: a.n_vectors,
            seed: a.seed,
            n_samples: a.n_samples,
            po_load_ff: a.po_load_ff,
            strike_weight: a.strike_weight,
            samples: a.samples_ps.clone(),
        }
    }

    pub fn optimize_config(&self) -> OptimizeConfig {
        let o = &self.optimize;
        OptimizeConfig {
            weights: o.weights,
            grid: self.grid.grid(),
            analysis: self.analysis_config(),
            baseline: GateParams {
                size: o.baseline_size,
                channel_length_nm: o.baseline_length_nm,
                vdd: o.baseline_vdd_v,
                vth: o.baseline_vth_v,
            },
            initial_step_ps: o.initial_step_ps,
            shrink: o.shrink,
            min_step_ps: o.min_step_ps,
            max_evaluations: o.max_evaluations,
            delay_cap_ratio: o.delay_cap_ratio,
            match_tolerance: o.match_tolerance,
        }
    }

    /// Digest of every setting that can change results. Output locations are
    /// left out.
    pub fn digest(&self, table_json: &str) -> String {
        let mut settings = self.clone();
        settings.output = OutputSection::default();
        let text = toml::to_string(&settings).expect("config serializes");
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        h.update(Sha256::digest(table_json.as_bytes()));
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Parses the value text of an environment override as TOML, falling back
/// to a plain string.
fn env_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(root: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let parts: Vec<String> = key.split("__").map(str::to_ascii_lowercase).collect();
    if parts.iter().any(String::is_empty) {
        bail!("malformed override variable {ENV_PREFIX}{key}");
    }
    let (last, sections) = parts.split_last().expect("non-empty");
    let mut table = root;
    for s in sections {
        table = table
            .entry(s.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("override {ENV_PREFIX}{key}: `{s}` is not a section"))?;
    }
    table.insert(last.clone(), env_value(raw));
    Ok(())
}

/// Builds the configuration from optional file text and override pairs
/// (`SECTION__KEY`, value).
pub fn resolve<I>(text: Option<&str>, overrides: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut root: toml::Table = match text {
        Some(t) => toml::from_str(t).context("parsing config")?,
        None => toml::Table::new(),
    };
    let mut overrides: Vec<(String, String)> = overrides.into_iter().collect();
    overrides.sort();
    for (key, value) in &overrides {
        apply_override(&mut root, key, value)?;
    }
    let config: RunConfig = toml::Value::Table(root)
        .try_into()
        .context("invalid configuration")?;
    Ok(config)
}

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    let text = match path {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?,
        ),
        None => None,
    };
    let overrides = std::env::vars()
        .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|k| (k.to_string(), v)));
    resolve(text.as_deref(), overrides)
}
