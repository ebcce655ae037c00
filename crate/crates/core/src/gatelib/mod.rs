//! Per-gate electrical characterization.
//!
//! A [`CharTable`] holds, for every `(kind, fan-in)` pair, five-dimensional
//! lookup tables over (size, channel length, V_DD, V_th, load capacitance).
//! Tables come from the closed-form device model in [`synth`] or from a JSON
//! file written by [`CharTable::save`].

pub mod interp;
mod io;
pub mod synth;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::GateKind;

pub use synth::synth_characterize;

/// Channel length (nm) of a minimum-length device; lengths are expressed
/// relative to it throughout the model.
pub const L_MIN_NM: f64 = 70.0;

pub const SCHEMA_VERSION: u32 = 1;

pub const AXIS_NAMES: [&str; 5] = ["size", "channel_length_nm", "vdd_v", "vth_v", "load_ff"];

#[derive(Debug, Error)]
pub enum LibError {
    #[error("{axis} = {value} outside table range [{min}, {max}] for {kind}{fanin}")]
    OutOfRange {
        kind: GateKind,
        fanin: usize,
        axis: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("no table entry for {kind} with {fanin} inputs")]
    MissingEntry { kind: GateKind, fanin: usize },
    #[error("query touches non-physical grid points of {kind}{fanin}")]
    InvalidPoint { kind: GateKind, fanin: usize },
    #[error("invalid gate parameters: {0}")]
    InvalidParams(String),
    #[error("invalid library grid: {0}")]
    InvalidGrid(String),
    #[error("invalid model constants: {0}")]
    InvalidConstants(String),
    #[error("table parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("table schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("{kind}{fanin}: {quantity} grid has {found} values, axes imply {expected}")]
    Shape {
        kind: GateKind,
        fanin: usize,
        quantity: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{kind}{fanin}: axis {axis} is not strictly increasing")]
    NonMonotoneAxis {
        kind: GateKind,
        fanin: usize,
        axis: &'static str,
    },
    #[error("{kind}{fanin}: non-physical {quantity} value at grid index {index}")]
    NonPhysical {
        kind: GateKind,
        fanin: usize,
        quantity: &'static str,
        index: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Electrical parameters of one gate instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    /// Drive multiple; size 1 is a 100 nm wide device.
    pub size: f64,
    pub channel_length_nm: f64,
    pub vdd: f64,
    pub vth: f64,
}

impl GateParams {
    pub fn validate(&self) -> Result<(), LibError> {
        if !(self.size > 0.0) {
            return Err(LibError::InvalidParams(format!(
                "size {} must be > 0",
                self.size
            )));
        }
        if !(self.channel_length_nm >= L_MIN_NM) {
            return Err(LibError::InvalidParams(format!(
                "channel length {} nm below {L_MIN_NM} nm",
                self.channel_length_nm
            )));
        }
        if !(self.vth > 0.0 && self.vth < self.vdd) {
            return Err(LibError::InvalidParams(format!(
                "need 0 < vth ({}) < vdd ({})",
                self.vth, self.vdd
            )));
        }
        Ok(())
    }

    /// Layout area proxy in minimum-device units.
    pub fn area(&self) -> f64 {
        self.size * (self.channel_length_nm / L_MIN_NM)
    }

    fn coords(&self) -> [f64; 4] {
        [self.size, self.channel_length_nm, self.vdd, self.vth]
    }
}

/// Discrete parameter values available for assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LibraryGrid {
    pub sizes: Vec<f64>,
    pub lengths_nm: Vec<f64>,
    pub vdds: Vec<f64>,
    pub vths: Vec<f64>,
}

impl Default for LibraryGrid {
    fn default() -> Self {
        LibraryGrid {
            sizes: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            lengths_nm: vec![70.0, 100.0, 150.0, 250.0, 300.0],
            vdds: vec![0.8, 1.0, 1.2],
            vths: vec![0.1, 0.2, 0.3],
        }
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

impl LibraryGrid {
    pub fn validate(&self) -> Result<(), LibError> {
        for (name, list) in [
            ("sizes", &self.sizes),
            ("lengths_nm", &self.lengths_nm),
            ("vdds", &self.vdds),
            ("vths", &self.vths),
        ] {
            if list.is_empty() {
                return Err(LibError::InvalidGrid(format!("{name} is empty")));
            }
            if !strictly_increasing(list) {
                return Err(LibError::InvalidGrid(format!(
                    "{name} not strictly increasing"
                )));
            }
            if list[0] <= 0.0 {
                return Err(LibError::InvalidGrid(format!("{name} must be positive")));
            }
        }
        if self.lengths_nm[0] < L_MIN_NM {
            return Err(LibError::InvalidGrid(format!(
                "channel lengths must be >= {L_MIN_NM} nm"
            )));
        }
        Ok(())
    }

    /// Whether any (vdd, vth) combination on the grid is non-physical.
    pub fn has_invalid_combinations(&self) -> bool {
        self.vths.iter().any(|&t| self.vdds.iter().any(|&v| t >= v))
    }

    pub fn contains(&self, p: &GateParams) -> bool {
        self.sizes.contains(&p.size)
            && self.lengths_nm.contains(&p.channel_length_nm)
            && self.vdds.contains(&p.vdd)
            && self.vths.contains(&p.vth)
    }

    pub fn len(&self) -> usize {
        self.sizes.len() * self.lengths_nm.len() * self.vdds.len() * self.vths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All grid points in lexicographic (size, length, vdd, vth) order.
    pub fn points(&self) -> Vec<GateParams> {
        let mut out = Vec::with_capacity(self.len());
        for &size in &self.sizes {
            for &channel_length_nm in &self.lengths_nm {
                for &vdd in &self.vdds {
                    for &vth in &self.vths {
                        out.push(GateParams {
                            size,
                            channel_length_nm,
                            vdd,
                            vth,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Knobs of the synthetic device model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConstants {
    /// Velocity-saturation exponent.
    pub alpha: f64,
    /// Drive current (µA) per unit size at 1 V overdrive and minimum length.
    pub k_current_ua: f64,
    /// Input capacitance (fF) per unit size at minimum length.
    pub k_cin_ff: f64,
    /// Output self capacitance (fF) per unit size.
    pub k_self_ff: f64,
    /// Leakage energy (fJ per clock) scale at vth = 0.
    pub k_leak_fj: f64,
    pub subthreshold_slope_v: f64,
    pub t_clock_ps: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            alpha: 1.3,
            k_current_ua: 60.0,
            k_cin_ff: 0.15,
            k_self_ff: 0.3,
            k_leak_fj: 0.02,
            subthreshold_slope_v: 0.1,
            t_clock_ps: 1000.0,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<(), LibError> {
        let all = [
            ("alpha", self.alpha),
            ("k_current_ua", self.k_current_ua),
            ("k_cin_ff", self.k_cin_ff),
            ("k_self_ff", self.k_self_ff),
            ("k_leak_fj", self.k_leak_fj),
            ("subthreshold_slope_v", self.subthreshold_slope_v),
            ("t_clock_ps", self.t_clock_ps),
        ];
        if let Some((name, v)) = all.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(LibError::InvalidConstants(format!(
                "{name} = {v} must be positive"
            )));
        }
        if !(1.0..=2.0).contains(&self.alpha) {
            return Err(LibError::InvalidConstants(format!(
                "alpha = {} outside [1, 2]",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// Propagation delay, ps.
    Delay,
    /// Generated glitch width at the table's injected charge, ps.
    Wgen,
    /// Dynamic energy per transition, fJ.
    Edyn,
    /// Static energy per clock, fJ.
    Estat,
    /// Input capacitance per pin, fF.
    Cin,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Delay,
        Quantity::Wgen,
        Quantity::Edyn,
        Quantity::Estat,
        Quantity::Cin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Delay => "delay_ps",
            Quantity::Wgen => "wgen_ps",
            Quantity::Edyn => "edyn_fj",
            Quantity::Estat => "estat_fj",
            Quantity::Cin => "cin_ff",
        }
    }
}

/// All quantities at one operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub delay: f64,
    pub wgen: f64,
    pub edyn: f64,
    pub estat: f64,
    pub cin: f64,
}

impl Cell {
    pub fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::Delay => self.delay,
            Quantity::Wgen => self.wgen,
            Quantity::Edyn => self.edyn,
            Quantity::Estat => self.estat,
            Quantity::Cin => self.cin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    pub size: Vec<f64>,
    pub channel_length_nm: Vec<f64>,
    pub vdd_v: Vec<f64>,
    pub vth_v: Vec<f64>,
    pub load_ff: Vec<f64>,
}

impl Axes {
    fn as_slices(&self) -> [&[f64]; 5] {
        [
            &self.size,
            &self.channel_length_nm,
            &self.vdd_v,
            &self.vth_v,
            &self.load_ff,
        ]
    }

    pub fn point_count(&self) -> usize {
        self.as_slices().iter().map(|a| a.len()).product()
    }
}

/// Lookup tables for one `(kind, fan-in)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub kind: GateKind,
    pub fanin: usize,
    pub axes: Axes,
    pub delay_ps: Vec<f64>,
    pub wgen_ps: Vec<f64>,
    pub edyn_fj: Vec<f64>,
    pub estat_fj: Vec<f64>,
    pub cin_ff: Vec<f64>,
    /// `false` marks non-physical grid points (vth >= vdd).
    pub valid: Vec<bool>,
}

impl TableEntry {
    pub fn grid(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::Delay => &self.delay_ps,
            Quantity::Wgen => &self.wgen_ps,
            Quantity::Edyn => &self.edyn_fj,
            Quantity::Estat => &self.estat_fj,
            Quantity::Cin => &self.cin_ff,
        }
    }

    fn corners(&self, params: &GateParams, load_ff: f64) -> Result<Vec<(usize, f64)>, LibError> {
        let c = params.coords();
        let query = [c[0], c[1], c[2], c[3], load_ff];
        let axes = self.axes.as_slices();
        let corners = interp::corners(&axes, &query).map_err(|e| LibError::OutOfRange {
            kind: self.kind,
            fanin: self.fanin,
            axis: AXIS_NAMES[e.axis],
            value: e.value,
            min: axes[e.axis][0],
            max: axes[e.axis][axes[e.axis].len() - 1],
        })?;
        if corners.iter().any(|&(off, _)| !self.valid[off]) {
            return Err(LibError::InvalidPoint {
                kind: self.kind,
                fanin: self.fanin,
            });
        }
        Ok(corners)
    }

    pub fn lookup(&self, q: Quantity, params: &GateParams, load_ff: f64) -> Result<f64, LibError> {
        let values = self.grid(q);
        Ok(self
            .corners(params, load_ff)?
            .iter()
            .map(|&(off, w)| w * values[off])
            .sum())
    }

    /// All five quantities, sharing one cell search.
    pub fn lookup_cell(&self, params: &GateParams, load_ff: f64) -> Result<Cell, LibError> {
        let corners = self.corners(params, load_ff)?;
        let at = |v: &[f64]| corners.iter().map(|&(off, w)| w * v[off]).sum::<f64>();
        Ok(Cell {
            delay: at(&self.delay_ps),
            wgen: at(&self.wgen_ps),
            edyn: at(&self.edyn_fj),
            estat: at(&self.estat_fj),
            cin: at(&self.cin_ff),
        })
    }

    /// Whether the parameter point sits on valid grid rows at every load.
    pub fn is_valid_point(&self, params: &GateParams) -> bool {
        let lo = self.axes.load_ff[0];
        self.corners(params, lo).is_ok()
    }

    /// (min, max) delay over valid grid points.
    pub fn delay_range(&self) -> Option<(f64, f64)> {
        self.delay_ps
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .fold(None, |acc, (&d, _)| match acc {
                None => Some((d, d)),
                Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
            })
    }

    fn validate(&self) -> Result<(), LibError> {
        for (name, axis) in AXIS_NAMES.iter().zip(self.axes.as_slices()) {
            if axis.is_empty() || !strictly_increasing(axis) {
                return Err(LibError::NonMonotoneAxis {
                    kind: self.kind,
                    fanin: self.fanin,
                    axis: name,
                });
            }
        }
        let expected = self.axes.point_count();
        let shape = |quantity: &'static str, found: usize| {
            if found == expected {
                Ok(())
            } else {
                Err(LibError::Shape {
                    kind: self.kind,
                    fanin: self.fanin,
                    quantity,
                    expected,
                    found,
                })
            }
        };
        for q in Quantity::ALL {
            shape(q.name(), self.grid(q).len())?;
        }
        shape("valid", self.valid.len())?;
        for q in Quantity::ALL {
            for (index, (&v, &ok)) in self.grid(q).iter().zip(&self.valid).enumerate() {
                let bad = !v.is_finite()
                    || (ok
                        && match q {
                            Quantity::Delay | Quantity::Cin => v <= 0.0,
                            _ => v < 0.0,
                        });
                if bad {
                    return Err(LibError::NonPhysical {
                        kind: self.kind,
                        fanin: self.fanin,
                        quantity: q.name(),
                        index,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Characterization tables for a whole cell library at one injected charge.
#[derive(Clone, Debug, PartialEq)]
pub struct CharTable {
    pub charge_fc: f64,
    /// Model constants the table was synthesized from, if any.
    pub constants: Option<ModelConstants>,
    entries: BTreeMap<(GateKind, usize), TableEntry>,
}

impl CharTable {
    pub fn from_entries(
        charge_fc: f64,
        constants: Option<ModelConstants>,
        entries: Vec<TableEntry>,
    ) -> Result<CharTable, LibError> {
        let mut map = BTreeMap::new();
        for e in entries {
            e.validate()?;
            map.insert((e.kind, e.fanin), e);
        }
        Ok(CharTable {
            charge_fc,
            constants,
            entries: map,
        })
    }

    pub fn entry(&self, kind: GateKind, fanin: usize) -> Result<&TableEntry, LibError> {
        self.entries
            .get(&(kind, fanin))
            .ok_or(LibError::MissingEntry { kind, fanin })
    }

    pub fn entries(&self) -> impl Iterator<Item = &TableEntry> {
        self.entries.values()
    }

    pub fn lookup(
        &self,
        kind: GateKind,
        fanin: usize,
        q: Quantity,
        params: &GateParams,
        load_ff: f64,
    ) -> Result<f64, LibError> {
        self.entry(kind, fanin)?.lookup(q, params, load_ff)
    }
}
