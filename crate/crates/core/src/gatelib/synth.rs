//! Closed-form device model standing in for transistor-level
//! characterization.
//!
//! Units: currents in µA, capacitances in fF, charge in fC, voltages in V.
//! fF·V/µA is a nanosecond, hence the factor 1000 to report picoseconds.

use super::{
    Axes, CharTable, GateParams, LibError, LibraryGrid, ModelConstants, TableEntry, L_MIN_NM,
};
use crate::netlist::GateKind;

/// Injected charge used by default tables, fC.
pub const DEFAULT_CHARGE_FC: f64 = 16.0;

/// Default load-capacitance axis, fF.
pub const DEFAULT_LOAD_AXIS_FF: [f64; 9] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];

/// Largest fan-in characterized by default.
pub const DEFAULT_MAX_FANIN: usize = 9;

const NS_TO_PS: f64 = 1000.0;

/// Model outputs at one operating point, or `None` when vth >= vdd.
pub fn model_point(
    c: &ModelConstants,
    fanin: usize,
    p: &GateParams,
    load_ff: f64,
    charge_fc: f64,
) -> Option<[f64; 5]> {
    if p.vth >= p.vdd {
        return None;
    }
    let rel_len = p.channel_length_nm / L_MIN_NM;
    // Series stack of `fanin` devices divides the available current.
    let stack = fanin.max(1) as f64;
    let i_drive = c.k_current_ua * p.size / rel_len * (p.vdd - p.vth).powf(c.alpha) / stack;
    let c_node = c.k_self_ff * p.size + load_ff;
    let delay = NS_TO_PS * c_node * p.vdd / (2.0 * i_drive);
    let flip_charge = c_node * p.vdd / 2.0;
    let wgen = if charge_fc > flip_charge {
        NS_TO_PS * (charge_fc - flip_charge) / i_drive
    } else {
        0.0
    };
    let cin = c.k_cin_ff * p.size * rel_len;
    let edyn = c_node * p.vdd * p.vdd;
    let estat = c.k_leak_fj
        * (p.size / rel_len)
        * p.vdd
        * (-p.vth / c.subthreshold_slope_v).exp()
        * (c.t_clock_ps / 1000.0);
    Some([delay, wgen, edyn, estat, cin])
}

/// Characterizes NOT/BUF at fan-in 1 and every multi-input kind at fan-in
/// `2..=max_fanin` over `grid × load_axis_ff`.
pub fn synth_characterize(
    constants: &ModelConstants,
    grid: &LibraryGrid,
    charge_fc: f64,
    load_axis_ff: &[f64],
    max_fanin: usize,
) -> Result<CharTable, LibError> {
    constants.validate()?;
    grid.validate()?;
    if !(charge_fc > 0.0 && charge_fc.is_finite()) {
        return Err(LibError::InvalidParams(format!(
            "charge {charge_fc} fC must be > 0"
        )));
    }
    if load_axis_ff.is_empty()
        || load_axis_ff[0] <= 0.0
        || load_axis_ff.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(LibError::InvalidGrid(
            "load axis must be positive and strictly increasing".into(),
        ));
    }
    let axes = Axes {
        size: grid.sizes.clone(),
        channel_length_nm: grid.lengths_nm.clone(),
        vdd_v: grid.vdds.clone(),
        vth_v: grid.vths.clone(),
        load_ff: load_axis_ff.to_vec(),
    };
    let mut entries = Vec::new();
    for kind in GateKind::ALL {
        let fanins = if kind.is_single_input() {
            1..=1
        } else {
            2..=max_fanin
        };
        for fanin in fanins {
            entries.push(characterize_entry(constants, &axes, kind, fanin, charge_fc));
        }
    }
    CharTable::from_entries(charge_fc, Some(*constants), entries)
}

fn characterize_entry(
    c: &ModelConstants,
    axes: &Axes,
    kind: GateKind,
    fanin: usize,
    charge_fc: f64,
) -> TableEntry {
    let n = axes.point_count();
    let mut grids: [Vec<f64>; 5] = Default::default();
    for g in grids.iter_mut() {
        g.reserve(n);
    }
    let mut valid = Vec::with_capacity(n);
    for &size in &axes.size {
        for &channel_length_nm in &axes.channel_length_nm {
            for &vdd in &axes.vdd_v {
                for &vth in &axes.vth_v {
                    let p = GateParams {
                        size,
                        channel_length_nm,
                        vdd,
                        vth,
                    };
                    for &load in &axes.load_ff {
                        let point = model_point(c, fanin, &p, load, charge_fc);
                        valid.push(point.is_some());
                        for (g, v) in grids.iter_mut().zip(point.unwrap_or([0.0; 5])) {
                            g.push(v);
                        }
                    }
                }
            }
        }
    }
    let [delay_ps, wgen_ps, edyn_fj, estat_fj, cin_ff] = grids;
    TableEntry {
        kind,
        fanin,
        axes: axes.clone(),
        delay_ps,
        wgen_ps,
        edyn_fj,
        estat_fj,
        cin_ff,
        valid,
    }
}

/// Default table: default constants and grid, 16 fC, default load axis.
pub fn default_table() -> CharTable {
    synth_characterize(
        &ModelConstants::default(),
        &LibraryGrid::default(),
        DEFAULT_CHARGE_FC,
        &DEFAULT_LOAD_AXIS_FF,
        DEFAULT_MAX_FANIN,
    )
    .expect("default library parameters are valid")
}
