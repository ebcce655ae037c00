//! Gate-level combinational netlists in ISCAS'85 `.bench` form.
//!
//! A [`Circuit`] is an immutable, validated DAG. Gate ids are assigned in
//! declaration order and are the tie-breaker wherever the crate needs a
//! deterministic order.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a gate inside its [`Circuit`].
pub type GateId = usize;

/// Default cap for [`enumerate_paths`].
pub const DEFAULT_PATH_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Buf,
    ];

    /// Case-insensitive keyword lookup. `BUFF` is accepted as the common
    /// ISCAS spelling of `BUF`.
    pub fn from_keyword(s: &str) -> Option<GateKind> {
        let kind = match s.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" => GateKind::Not,
            "BUF" | "BUFF" => GateKind::Buf,
            _ => return None,
        };
        Some(kind)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
        }
    }

    pub fn is_single_input(self) -> bool {
        matches!(self, GateKind::Not | GateKind::Buf)
    }

    fn arity_ok(self, n: usize) -> bool {
        if self.is_single_input() {
            n == 1
        } else {
            n >= 2
        }
    }

    /// Evaluates the gate on 64 input patterns at once.
    #[inline]
    pub fn eval_words(self, mut inputs: impl Iterator<Item = u64>) -> u64 {
        let first = inputs.next().unwrap_or(0);
        match self {
            GateKind::And => inputs.fold(first, |a, b| a & b),
            GateKind::Nand => !inputs.fold(first, |a, b| a & b),
            GateKind::Or => inputs.fold(first, |a, b| a | b),
            GateKind::Nor => !inputs.fold(first, |a, b| a | b),
            GateKind::Xor => inputs.fold(first, |a, b| a ^ b),
            GateKind::Xnor => !inputs.fold(first, |a, b| a ^ b),
            GateKind::Not => !first,
            GateKind::Buf => first,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// What drives one input pin of a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Input(usize),
    Gate(GateId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    /// Name of the net this gate drives.
    pub name: String,
    pub kind: GateKind,
    /// One entry per pin, in declaration order.
    pub inputs: Vec<Source>,
}

impl Gate {
    pub fn fanin_count(&self) -> usize {
        self.inputs.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: syntax error at `{token}`: {reason}")]
    Syntax {
        line: usize,
        token: String,
        reason: &'static str,
    },
    #[error("line {line}: unknown gate kind `{token}`")]
    UnknownKind { line: usize, token: String },
    #[error("line {line}: {kind} gate `{token}` has {got} inputs ({expected})")]
    Arity {
        line: usize,
        token: String,
        kind: GateKind,
        got: usize,
        expected: &'static str,
    },
    #[error("line {line}: net `{token}` is referenced but never driven")]
    Undriven { line: usize, token: String },
    #[error("line {line}: net `{token}` is already driven (line {first})")]
    DuplicateDriver {
        line: usize,
        token: String,
        first: usize,
    },
    #[error("line {line}: output `{token}` declared more than once")]
    DuplicateOutput { line: usize, token: String },
    #[error("line {line}: output `{token}` is a primary input, not a gate output")]
    OutputNotGate { line: usize, token: String },
    #[error("line {line}: combinational cycle through `{token}`")]
    Cycle { line: usize, token: String },
    #[error("path count {count} exceeds cap {cap}")]
    PathCapExceeded { cap: usize, count: u128 },
}

/// A validated combinational netlist.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    gates: Vec<Gate>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    output_gates: Vec<GateId>,
    output_index: Vec<Option<usize>>,
    fanin: Vec<Vec<GateId>>,
    fanout: Vec<Vec<GateId>>,
    fanout_pins: Vec<Vec<u32>>,
    input_fanout: Vec<Vec<GateId>>,
    has_input_pin: Vec<bool>,
    topo: Vec<GateId>,
    topo_pos: Vec<usize>,
}

impl Circuit {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    /// Number of collapsed gate-to-gate edges.
    pub fn num_edges(&self) -> usize {
        self.fanout.iter().map(Vec::len).sum()
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Driving gate of each primary output, in declaration order.
    pub fn output_gates(&self) -> &[GateId] {
        &self.output_gates
    }

    /// Primary-output index driven by `g`, if any.
    pub fn output_index(&self, g: GateId) -> Option<usize> {
        self.output_index[g]
    }

    pub fn is_output(&self, g: GateId) -> bool {
        self.output_index[g].is_some()
    }

    /// Distinct gate predecessors of `g`, ascending.
    pub fn fanin(&self, g: GateId) -> &[GateId] {
        &self.fanin[g]
    }

    /// Distinct gate successors of `g`, ascending.
    pub fn fanout(&self, g: GateId) -> &[GateId] {
        &self.fanout[g]
    }

    /// Pin multiplicity parallel to [`Circuit::fanout`].
    pub fn fanout_pins(&self, g: GateId) -> &[u32] {
        &self.fanout_pins[g]
    }

    /// Gates reading primary input `pi`, ascending.
    pub fn input_fanout(&self, pi: usize) -> &[GateId] {
        &self.input_fanout[pi]
    }

    /// Whether `g` has at least one pin tied to a primary input.
    pub fn has_input_pin(&self, g: GateId) -> bool {
        self.has_input_pin[g]
    }

    /// Topological order with ties broken by gate id.
    pub fn topological_order(&self) -> &[GateId] {
        &self.topo
    }

    pub fn topo_position(&self, g: GateId) -> usize {
        self.topo_pos[g]
    }

    pub fn find_gate(&self, name: &str) -> Option<GateId> {
        self.gates.iter().position(|g| g.name == name)
    }

    /// Gates lying on at least one primary-input to primary-output path.
    ///
    /// Every gate is reachable from some primary input, so this is the set of
    /// gates that reach a primary output.
    pub fn on_path_mask(&self) -> Vec<bool> {
        let mut reach = vec![false; self.gates.len()];
        for &g in self.topo.iter().rev() {
            reach[g] = self.is_output(g) || self.fanout[g].iter().any(|&s| reach[s]);
        }
        reach
    }

    /// Canonical `.bench` text: inputs, outputs, then gates in topological
    /// order.
    pub fn to_bench(&self) -> String {
        let mut out = String::new();
        for name in &self.inputs {
            out.push_str(&format!("INPUT({name})\n"));
        }
        for name in &self.outputs {
            out.push_str(&format!("OUTPUT({name})\n"));
        }
        for &g in &self.topo {
            let gate = &self.gates[g];
            let args: Vec<&str> = gate
                .inputs
                .iter()
                .map(|src| match *src {
                    Source::Input(i) => self.inputs[i].as_str(),
                    Source::Gate(d) => self.gates[d].name.as_str(),
                })
                .collect();
            out.push_str(&format!(
                "{} = {}({})\n",
                gate.name,
                gate.kind,
                args.join(", ")
            ));
        }
        out
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Splits `HEAD(arg, ...)` into head and trimmed args.
fn split_call(s: &str) -> Option<(&str, Vec<&str>)> {
    let open = s.find('(')?;
    let rest = s[open + 1..].trim_end();
    let inner = rest.strip_suffix(')')?;
    if inner.contains('(') || inner.contains(')') {
        return None;
    }
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };
    Some((s[..open].trim(), args))
}

struct RawGate<'a> {
    line: usize,
    name: &'a str,
    kind: GateKind,
    args: Vec<&'a str>,
}

fn syntax(line: usize, token: &str, reason: &'static str) -> NetlistError {
    NetlistError::Syntax {
        line,
        token: token.to_string(),
        reason,
    }
}

/// Parses and validates `.bench` text.
pub fn parse_bench(text: &str) -> Result<Circuit, NetlistError> {
    let mut inputs: Vec<(usize, &str)> = Vec::new();
    let mut outputs: Vec<(usize, &str)> = Vec::new();
    let mut raw: Vec<RawGate> = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let body = full.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(eq) = body.find('=') {
            let name = body[..eq].trim();
            if !is_ident(name) {
                return Err(syntax(line, name, "invalid net name"));
            }
            let rhs = body[eq + 1..].trim();
            let (head, args) =
                split_call(rhs).ok_or_else(|| syntax(line, rhs, "expected KIND(args)"))?;
            let kind = GateKind::from_keyword(head).ok_or_else(|| NetlistError::UnknownKind {
                line,
                token: head.to_string(),
            })?;
            if let Some(bad) = args.iter().find(|a| !is_ident(a)) {
                return Err(syntax(line, bad, "invalid net name"));
            }
            if !kind.arity_ok(args.len()) {
                return Err(NetlistError::Arity {
                    line,
                    token: name.to_string(),
                    kind,
                    got: args.len(),
                    expected: if kind.is_single_input() {
                        "expected exactly 1"
                    } else {
                        "expected at least 2"
                    },
                });
            }
            raw.push(RawGate {
                line,
                name,
                kind,
                args,
            });
        } else {
            let (head, args) =
                split_call(body).ok_or_else(|| syntax(line, body, "expected declaration"))?;
            let target = match head.to_ascii_uppercase().as_str() {
                "INPUT" => &mut inputs,
                "OUTPUT" => &mut outputs,
                _ => return Err(syntax(line, head, "expected INPUT, OUTPUT or assignment")),
            };
            match args.as_slice() {
                [name] if is_ident(name) => target.push((line, name)),
                [name] => return Err(syntax(line, name, "invalid net name")),
                _ => return Err(syntax(line, body, "declaration takes one name")),
            }
        }
    }

    // Net drivers.
    #[derive(Clone, Copy)]
    enum Driver {
        Input(usize),
        Gate(GateId),
    }
    let mut drivers: HashMap<&str, (Driver, usize)> = HashMap::new();
    for (i, &(line, name)) in inputs.iter().enumerate() {
        if let Some(&(_, first)) = drivers.get(name) {
            return Err(NetlistError::DuplicateDriver {
                line,
                token: name.to_string(),
                first,
            });
        }
        drivers.insert(name, (Driver::Input(i), line));
    }
    for (id, g) in raw.iter().enumerate() {
        if let Some(&(_, first)) = drivers.get(g.name) {
            return Err(NetlistError::DuplicateDriver {
                line: g.line,
                token: g.name.to_string(),
                first,
            });
        }
        drivers.insert(g.name, (Driver::Gate(id), g.line));
    }

    // Resolve references in line order.
    let mut gates = Vec::with_capacity(raw.len());
    for g in &raw {
        let mut pins = Vec::with_capacity(g.args.len());
        for arg in &g.args {
            match drivers.get(arg) {
                Some(&(Driver::Input(i), _)) => pins.push(Source::Input(i)),
                Some(&(Driver::Gate(d), _)) => pins.push(Source::Gate(d)),
                None => {
                    return Err(NetlistError::Undriven {
                        line: g.line,
                        token: arg.to_string(),
                    })
                }
            }
        }
        gates.push(Gate {
            name: g.name.to_string(),
            kind: g.kind,
            inputs: pins,
        });
    }
    let mut output_gates = Vec::with_capacity(outputs.len());
    let mut output_index = vec![None; gates.len()];
    for (j, &(line, name)) in outputs.iter().enumerate() {
        match drivers.get(name) {
            Some(&(Driver::Gate(g), _)) => {
                if output_index[g].is_some() {
                    return Err(NetlistError::DuplicateOutput {
                        line,
                        token: name.to_string(),
                    });
                }
                output_index[g] = Some(j);
                output_gates.push(g);
            }
            Some(&(Driver::Input(_), _)) => {
                return Err(NetlistError::OutputNotGate {
                    line,
                    token: name.to_string(),
                })
            }
            None => {
                return Err(NetlistError::Undriven {
                    line,
                    token: name.to_string(),
                })
            }
        }
    }

    let n = gates.len();
    let mut fanin: Vec<Vec<GateId>> = vec![Vec::new(); n];
    let mut fanout: Vec<Vec<GateId>> = vec![Vec::new(); n];
    let mut fanout_pins: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut input_fanout: Vec<Vec<GateId>> = vec![Vec::new(); inputs.len()];
    let mut has_input_pin = vec![false; n];
    for (s, gate) in gates.iter().enumerate() {
        for src in &gate.inputs {
            match *src {
                Source::Input(i) => {
                    has_input_pin[s] = true;
                    if input_fanout[i].last() != Some(&s) {
                        input_fanout[i].push(s);
                    }
                }
                Source::Gate(d) => {
                    if !fanin[s].contains(&d) {
                        fanin[s].push(d);
                    }
                }
            }
        }
        fanin[s].sort_unstable();
    }
    for s in 0..n {
        for &d in &fanin[s] {
            fanout[d].push(s);
            let mult = gates[s]
                .inputs
                .iter()
                .filter(|&&src| src == Source::Gate(d))
                .count();
            fanout_pins[d].push(mult as u32);
        }
    }

    // Kahn's algorithm, smallest ready id first.
    let mut indeg: Vec<usize> = fanin.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<GateId>> =
        (0..n).filter(|&g| indeg[g] == 0).map(Reverse).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(Reverse(g)) = ready.pop() {
        topo.push(g);
        for &s in &fanout[g] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.push(Reverse(s));
            }
        }
    }
    if topo.len() < n {
        // Walk back through unprocessed predecessors until a gate repeats;
        // that gate lies on a cycle.
        let mut seen = vec![false; n];
        let mut g = (0..n).find(|&g| indeg[g] > 0).expect("leftover gate");
        while !seen[g] {
            seen[g] = true;
            g = *fanin[g]
                .iter()
                .find(|&&p| indeg[p] > 0)
                .expect("unprocessed gate has unprocessed predecessor");
        }
        return Err(NetlistError::Cycle {
            line: raw[g].line,
            token: raw[g].name.to_string(),
        });
    }
    let mut topo_pos = vec![0; n];
    for (pos, &g) in topo.iter().enumerate() {
        topo_pos[g] = pos;
    }

    Ok(Circuit {
        gates,
        inputs: inputs.iter().map(|&(_, s)| s.to_string()).collect(),
        outputs: outputs.iter().map(|&(_, s)| s.to_string()).collect(),
        output_gates,
        output_index,
        fanin,
        fanout,
        fanout_pins,
        input_fanout,
        has_input_pin,
        topo,
        topo_pos,
    })
}

/// One primary-input to primary-output path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    /// Primary input the path starts from.
    pub input: usize,
    /// Gates along the path; the last one drives a primary output.
    pub gates: Vec<GateId>,
}

/// Number of primary-input to primary-output paths, saturating.
pub fn count_paths(circuit: &Circuit) -> u128 {
    let mut from = vec![0u128; circuit.num_gates()];
    for &g in circuit.topological_order().iter().rev() {
        let mut c = u128::from(circuit.is_output(g));
        for &s in circuit.fanout(g) {
            c = c.saturating_add(from[s]);
        }
        from[g] = c;
    }
    (0..circuit.inputs().len())
        .flat_map(|pi| circuit.input_fanout(pi))
        .fold(0u128, |acc, &g| acc.saturating_add(from[g]))
}

/// Enumerates every primary-input to primary-output path.
///
/// Paths are produced per primary input in declaration order, then by a DFS
/// that visits successors in ascending id. A path ends at every primary
/// output gate it meets, and continues through that gate's fan-out.
pub fn enumerate_paths(circuit: &Circuit, cap: usize) -> Result<Vec<Path>, NetlistError> {
    let count = count_paths(circuit);
    if count > cap as u128 {
        return Err(NetlistError::PathCapExceeded { cap, count });
    }
    let mut paths = Vec::with_capacity(count as usize);
    let mut stack: Vec<GateId> = Vec::new();
    for pi in 0..circuit.inputs().len() {
        for &start in circuit.input_fanout(pi) {
            dfs(circuit, pi, start, &mut stack, &mut paths);
        }
    }
    Ok(paths)
}

fn dfs(circuit: &Circuit, pi: usize, g: GateId, stack: &mut Vec<GateId>, out: &mut Vec<Path>) {
    stack.push(g);
    if circuit.is_output(g) {
        out.push(Path {
            input: pi,
            gates: stack.clone(),
        });
    }
    for &s in circuit.fanout(g) {
        dfs(circuit, pi, s, stack, out);
    }
    stack.pop();
}

#[cfg(test)]
mod tests {
    use super::*;

    const C17: &str = include_str!("../testdata/c17.bench");

    fn ids(c: &Circuit, names: &[&str]) -> Vec<GateId> {
        names.iter().map(|n| c.find_gate(n).unwrap()).collect()
    }

    #[test]
    fn parses_c17() {
        let c = parse_bench(C17).unwrap();
        assert_eq!(c.inputs().len(), 5);
        assert_eq!(c.outputs().len(), 2);
        assert_eq!(c.num_gates(), 6);
        assert!(c.gates().iter().all(|g| g.kind == GateKind::Nand));
    }

    #[test]
    fn c17_topological_order_ends_with_outputs() {
        let c = parse_bench(C17).unwrap();
        let order = c.topological_order();
        assert_eq!(&order[4..], &ids(&c, &["22", "23"])[..]);
        assert_eq!(order, &ids(&c, &["10", "11", "16", "19", "22", "23"])[..]);
    }

    #[test]
    fn chain_and_diamond_orders() {
        let chain =
            parse_bench("INPUT(a)\nOUTPUT(g3)\ng3 = NOT(g2)\ng2 = NOT(g1)\ng1 = NOT(a)\n").unwrap();
        assert_eq!(
            chain.topological_order(),
            &ids(&chain, &["g1", "g2", "g3"])[..]
        );

        let diamond = parse_bench(
            "INPUT(a)\nOUTPUT(g4)\ng1 = NOT(a)\ng2 = NOT(g1)\ng3 = BUF(g1)\ng4 = AND(g2, g3)\n",
        )
        .unwrap();
        assert_eq!(diamond.topological_order(), &[0, 1, 2, 3]);
        assert_eq!(enumerate_paths(&diamond, 10).unwrap().len(), 2);
    }

    #[test]
    fn c17_has_eleven_paths() {
        let c = parse_bench(C17).unwrap();
        let paths = enumerate_paths(&c, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(paths.len(), 11);
        assert_eq!(count_paths(&c), 11);
        // first input `1` feeds gate 10 only: 1 -> 10 -> 22
        assert_eq!(paths[0].gates, ids(&c, &["10", "22"]));
    }

    #[test]
    fn single_inverter_path() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n").unwrap();
        let paths = enumerate_paths(&c, 1).unwrap();
        assert_eq!(
            paths,
            vec![Path {
                input: 0,
                gates: vec![0]
            }]
        );
    }

    #[test]
    fn path_cap_reports_count() {
        let c = parse_bench(C17).unwrap();
        assert_eq!(
            enumerate_paths(&c, 5),
            Err(NetlistError::PathCapExceeded { cap: 5, count: 11 })
        );
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let err = parse_bench("INPUT(b)\na = NOT(a)\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Cycle {
                line: 2,
                token: "a".into()
            }
        );
    }

    #[test]
    fn longer_cycle_is_located() {
        let err = parse_bench("INPUT(i)\nOUTPUT(z)\nz = BUF(x)\nx = AND(i, y)\ny = NOT(x)\n")
            .unwrap_err();
        assert!(
            matches!(err, NetlistError::Cycle { ref token, .. } if token == "x" || token == "y")
        );
    }

    #[test]
    fn unknown_kind() {
        let err = parse_bench("INPUT(a)\nINPUT(b)\ny = FOO(a,b)\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::UnknownKind {
                line: 3,
                token: "FOO".into()
            }
        );
    }

    #[test]
    fn arity_errors() {
        let err = parse_bench("INPUT(a)\nINPUT(b)\ny = NOT(a, b)\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Arity {
                line: 3,
                got: 2,
                ..
            }
        ));
        let err = parse_bench("INPUT(a)\ny = nand(a)\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Arity {
                line: 2,
                got: 1,
                ..
            }
        ));
    }

    #[test]
    fn undriven_and_duplicate_driver() {
        let err = parse_bench("INPUT(a)\ny = AND(a, q)\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Undriven {
                line: 2,
                token: "q".into()
            }
        );
        let err = parse_bench("INPUT(a)\nINPUT(b)\ny = AND(a, b)\ny = OR(a, b)\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::DuplicateDriver {
                line: 4,
                token: "y".into(),
                first: 3
            }
        );
        let err = parse_bench("INPUT(a)\nOUTPUT(z)\n").unwrap_err();
        assert!(matches!(err, NetlistError::Undriven { line: 2, .. }));
    }

    #[test]
    fn whitespace_case_and_comments() {
        let c =
            parse_bench("  input( a )  # first\nINPUT(b)\noutput(y)\n  y=  nAnD ( a ,b ) # c\n")
                .unwrap();
        assert_eq!(c.num_gates(), 1);
        assert_eq!(c.gate(0).kind, GateKind::Nand);
    }

    #[test]
    fn po_with_fanout_keeps_fanout() {
        let c = parse_bench("INPUT(a)\nOUTPUT(x)\nOUTPUT(y)\nx = NOT(a)\ny = NOT(x)\n").unwrap();
        assert!(c.is_output(0));
        assert_eq!(c.fanout(0), &[1]);
        assert_eq!(enumerate_paths(&c, 10).unwrap().len(), 2);
    }

    #[test]
    fn repeated_pins_collapse_to_one_edge() {
        let c =
            parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nx = NOT(a)\ny = AND(x, x, b)\n").unwrap();
        assert_eq!(c.fanout(0), &[1]);
        assert_eq!(c.fanout_pins(0), &[2]);
        assert_eq!(c.num_edges(), 1);
    }

    #[test]
    fn serializer_is_canonical() {
        let c = parse_bench(C17).unwrap();
        let text = c.to_bench();
        assert!(text.starts_with("INPUT(1)\n"));
        assert!(text.contains("22 = NAND(10, 16)\n"));
        assert_eq!(parse_bench(&text).unwrap(), c);
    }
}
