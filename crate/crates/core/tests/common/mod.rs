#![allow(dead_code)]

use proptest::prelude::*;
use proptest::sample::Index;
use sertol::netlist::{parse_bench, Circuit};
use sertol::GateKind;

pub const C17: &str = include_str!("../../testdata/c17.bench");
pub const C432: &str = include_str!("../../testdata/c432.bench");
pub const ADDER4: &str = include_str!("../../testdata/adder4.bench");
pub const MUXPAR: &str = include_str!("../../testdata/muxpar.bench");

pub fn c17() -> Circuit {
    parse_bench(C17).unwrap()
}

pub fn c432() -> Circuit {
    parse_bench(C432).unwrap()
}

pub fn chain_bench(n: usize) -> String {
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
    s
}

/// Raw shape of a random circuit: input count, per-gate (kind, pins) and
/// extra output marks.
pub type Shape = (usize, Vec<(usize, Vec<Index>)>, Vec<bool>);

pub fn shapes(max_inputs: usize, max_gates: usize) -> impl Strategy<Value = Shape> {
    (
        1..=max_inputs,
        prop::collection::vec(
            (
                0..GateKind::ALL.len(),
                prop::collection::vec(any::<Index>(), 1..=4),
            ),
            1..=max_gates,
        ),
        prop::collection::vec(any::<bool>(), max_gates),
    )
}

/// `.bench` text for a shape: each gate reads earlier nets, every gate
/// without readers is an output, plus the marked ones.
pub fn shape_bench((n_in, gates, marks): &Shape) -> String {
    let mut nets: Vec<String> = (0..*n_in).map(|i| format!("i{i}")).collect();
    let mut body = String::new();
    let mut read = vec![false; gates.len()];
    for (k, (kind, pins)) in gates.iter().enumerate() {
        let kind = GateKind::ALL[*kind];
        let arity = if kind.is_single_input() {
            1
        } else {
            pins.len().max(2)
        };
        let args: Vec<String> = (0..arity)
            .map(|a| {
                let pick = pins[a % pins.len()].index(nets.len() + a);
                let pick = pick % nets.len();
                if pick >= *n_in {
                    read[pick - n_in] = true;
                }
                nets[pick].clone()
            })
            .collect();
        body.push_str(&format!("g{k} = {}({})\n", kind.keyword(), args.join(", ")));
        nets.push(format!("g{k}"));
    }
    let mut text: String = (0..*n_in).map(|i| format!("INPUT(i{i})\n")).collect();
    for k in 0..gates.len() {
        if !read[k] || marks[k] {
            text.push_str(&format!("OUTPUT(g{k})\n"));
        }
    }
    text + &body
}

pub fn circuits(max_inputs: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    shapes(max_inputs, max_gates)
        .prop_map(|s| parse_bench(&shape_bench(&s)).expect("generated netlist parses"))
}
