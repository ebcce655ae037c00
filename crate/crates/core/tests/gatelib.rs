use proptest::prelude::*;
use sertol::gatelib::synth::{default_table, synth_characterize, DEFAULT_LOAD_AXIS_FF};
use sertol::gatelib::Quantity;
use sertol::netlist::GateKind;
use sertol::oracle::trend_violations;
use sertol::{CharTable, GateParams, LibraryGrid, ModelConstants};

fn at(size: f64, l: f64, vdd: f64, vth: f64) -> GateParams {
    GateParams {
        size,
        channel_length_nm: l,
        vdd,
        vth,
    }
}

#[test]
fn default_table_follows_trends() {
    let v = trend_violations(&default_table());
    assert!(v.is_empty(), "{}", v.join("\n"));
}

#[test]
fn raising_vth_slows_and_widens() {
    let t = default_table();
    let e = t.entry(GateKind::Nand, 2).unwrap();
    let lo = e.lookup_cell(&at(2.0, 70.0, 1.0, 0.2), 1.0).unwrap();
    let hi = e.lookup_cell(&at(2.0, 70.0, 1.0, 0.3), 1.0).unwrap();
    assert!(lo.wgen > 0.0);
    assert!(hi.delay > lo.delay && hi.wgen > lo.wgen);
}

#[test]
fn wgen_grows_with_charge() {
    let grid = LibraryGrid::default();
    let c = ModelConstants::default();
    let small = synth_characterize(&c, &grid, 8.0, &DEFAULT_LOAD_AXIS_FF, 3).unwrap();
    let large = synth_characterize(&c, &grid, 16.0, &DEFAULT_LOAD_AXIS_FF, 3).unwrap();
    for (a, b) in small.entries().zip(large.entries()) {
        assert!(a.wgen_ps.iter().zip(&b.wgen_ps).all(|(x, y)| x <= y));
        assert_eq!(a.delay_ps, b.delay_ps);
    }
}

#[test]
fn characterization_is_deterministic() {
    let grid = LibraryGrid::default();
    let c = ModelConstants::default();
    let a = synth_characterize(&c, &grid, 16.0, &DEFAULT_LOAD_AXIS_FF, 4).unwrap();
    let b = synth_characterize(&c, &grid, 16.0, &DEFAULT_LOAD_AXIS_FF, 4).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

/// Index of the cell holding `x` and the two axis values bounding it.
fn bracket(axis: &[f64], x: f64) -> (usize, usize) {
    let i = axis.iter().rposition(|&a| a <= x).unwrap();
    (i, (i + 1).min(axis.len() - 1))
}

fn pick(axis: &[f64], t: f64) -> f64 {
    axis[0] + t * (axis[axis.len() - 1] - axis[0])
}

proptest! {
    #[test]
    fn json_round_trip(
        alpha in 1.0f64..2.0,
        k in 20.0f64..100.0,
        charge in 1.0f64..40.0,
        max_fanin in 1usize..4,
        n_sizes in 1usize..4,
    ) {
        let c = ModelConstants { alpha, k_current_ua: k, ..Default::default() };
        let grid = LibraryGrid {
            sizes: (1..=n_sizes).map(|s| s as f64 * 1.5).collect(),
            ..Default::default()
        };
        let t = synth_characterize(&c, &grid, charge, &[0.5, 3.0, 9.0], max_fanin).unwrap();
        let back = CharTable::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn interpolation_stays_inside_the_cell(
        ts in prop::array::uniform5(0.0f64..=1.0),
        q in prop::sample::select(Quantity::ALL.to_vec()),
    ) {
        let t = default_table();
        let e = t.entry(GateKind::Nor, 3).unwrap();
        let a = &e.axes;
        let axes = [&a.size, &a.channel_length_nm, &a.vdd_v, &a.vth_v, &a.load_ff];
        let x: Vec<f64> = axes.iter().zip(ts).map(|(ax, t)| pick(ax, t)).collect();
        let p = at(x[0], x[1], x[2], x[3]);
        let got = match e.lookup(q, &p, x[4]) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        let br: Vec<(usize, usize)> = axes.iter().zip(&x).map(|(ax, &v)| bracket(ax, v)).collect();
        let lens: Vec<usize> = axes.iter().map(|ax| ax.len()).collect();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for corner in 0..32 {
            let mut off = 0;
            for k in 0..5 {
                let i = if corner >> k & 1 == 1 { br[k].1 } else { br[k].0 };
                off = off * lens[k] + i;
            }
            let v = e.grid(q)[off];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let slack = 1e-9 * hi.abs().max(1.0);
        prop_assert!(got >= lo - slack && got <= hi + slack);
    }

    #[test]
    fn grid_points_are_exact(
        i in prop::array::uniform5(0usize..3),
    ) {
        let t = default_table();
        let e = t.entry(GateKind::And, 2).unwrap();
        let a = &e.axes;
        let p = at(a.size[i[0]], a.channel_length_nm[i[1]], a.vdd_v[i[2]], a.vth_v[i[3]]);
        prop_assume!(p.vth < p.vdd);
        let lens = [a.size.len(), a.channel_length_nm.len(), a.vdd_v.len(), a.vth_v.len(), a.load_ff.len()];
        let off = (0..5).fold(0, |off, k| off * lens[k] + i[k]);
        prop_assert_eq!(e.lookup(Quantity::Delay, &p, a.load_ff[i[4]]).unwrap(), e.delay_ps[off]);
    }
}
