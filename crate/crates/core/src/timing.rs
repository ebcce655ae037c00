//! Arrival times, the path/gate topology matrix, and delay perturbations that
//! leave every path delay unchanged.
//!
//! A perturbation `Δ` preserves all path delays iff `T·Δ = 0`. Rather than
//! computing that null-space from the (possibly exponential) matrix, gates
//! whose fan-out reaches a common gate are grouped into classes ("all
//! predecessors of a gate share a potential"). With a potential `σ` per class
//! and `Δ_g = σ(class g) − σ(class of g's predecessors)`, the Δ-sum along any
//! path telescopes to the potential at its last gate minus the one before its
//! first gate. Pinning the potential of every class at either path end to zero
//! gives exactly the perturbations with `T·Δ = 0`.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::netlist::{enumerate_paths, Circuit, GateId, NetlistError, Path};

#[derive(Clone, Debug, PartialEq)]
pub struct Arrival {
    /// Arrival time at each gate output, ps.
    pub gate: Vec<f64>,
    /// Arrival time at each primary output, in output order.
    pub output: Vec<f64>,
    pub circuit_delay: f64,
}

pub fn arrival_times(circuit: &Circuit, d: &[f64]) -> Arrival {
    let mut at = vec![0.0; circuit.num_gates()];
    for &g in circuit.topological_order() {
        let pi = if circuit.has_input_pin(g) {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        let start = circuit.fanin(g).iter().map(|&p| at[p]).fold(pi, f64::max);
        at[g] = start + d[g];
    }
    let output: Vec<f64> = circuit.output_gates().iter().map(|&g| at[g]).collect();
    let circuit_delay = output.iter().copied().fold(0.0, f64::max);
    Arrival {
        gate: at,
        output,
        circuit_delay,
    }
}

/// Binary path × gate incidence, stored as the gate list of each row.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologyMatrix {
    pub n_gates: usize,
    pub rows: Vec<Vec<GateId>>,
}

impl TopologyMatrix {
    pub fn from_paths(n_gates: usize, paths: &[Path]) -> TopologyMatrix {
        TopologyMatrix {
            n_gates,
            rows: paths.iter().map(|p| p.gates.clone()).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: usize, gate: GateId) -> bool {
        self.rows[row].contains(&gate)
    }

    /// `T·x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&g| x[g]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.n_gates);
        for (i, r) in self.rows.iter().enumerate() {
            for &g in r {
                m[(i, g)] = 1.0;
            }
        }
        m
    }

    /// Numerical rank; singular values below `1e-8·σ_max` count as zero.
    /// Duplicate rows are dropped first.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<GateId>> = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.sort_unstable();
                r
            })
            .collect();
        rows.sort();
        rows.dedup();
        numerical_rank(
            &TopologyMatrix {
                n_gates: self.n_gates,
                rows,
            }
            .to_dense(),
        )
    }
}

pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    // the SVD of the wide orientation is cheaper when there are many paths
    let m = if m.nrows() > m.ncols() {
        m.transpose()
    } else {
        m.clone()
    };
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= 1e-8 * max).count()
}

pub fn build_topology_matrix(
    circuit: &Circuit,
    cap: usize,
) -> Result<TopologyMatrix, NetlistError> {
    Ok(TopologyMatrix::from_paths(
        circuit.num_gates(),
        &enumerate_paths(circuit, cap)?,
    ))
}

/// Potential classes parameterizing the path-delay-preserving perturbations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NullspacePotentials {
    /// Class of each gate; `None` for gates on no PI→PO path.
    class_of: Vec<Option<usize>>,
    /// Shared class of each gate's gate-predecessors.
    pred_class: Vec<Option<usize>>,
    pinned: Vec<bool>,
    /// Free-variable index of each class.
    free_index: Vec<Option<usize>>,
    n_free: usize,
}

impl NullspacePotentials {
    pub fn n_classes(&self) -> usize {
        self.pinned.len()
    }

    /// Null-space dimension.
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn n_on_path(&self) -> usize {
        self.class_of.iter().filter(|c| c.is_some()).count()
    }

    pub fn class_of(&self, g: GateId) -> Option<usize> {
        self.class_of[g]
    }

    pub fn pred_class(&self, g: GateId) -> Option<usize> {
        self.pred_class[g]
    }

    pub fn is_pinned(&self, class: usize) -> bool {
        self.pinned[class]
    }

    pub fn free_index(&self, class: usize) -> Option<usize> {
        self.free_index[class]
    }

    /// Gates of each class, ascending.
    pub fn members(&self) -> Vec<Vec<GateId>> {
        let mut out = vec![Vec::new(); self.n_classes()];
        for (g, c) in self.class_of.iter().enumerate() {
            if let Some(c) = c {
                out[*c].push(g);
            }
        }
        out
    }

    fn potential(&self, class: Option<usize>, sigma: &[f64]) -> f64 {
        class
            .and_then(|c| self.free_index[c])
            .map_or(0.0, |f| sigma[f])
    }

    /// Per-gate delay perturbation for free potentials `sigma`.
    pub fn apply_potentials(&self, sigma: &[f64]) -> Vec<f64> {
        assert_eq!(sigma.len(), self.n_free, "one potential per free class");
        (0..self.class_of.len())
            .map(|g| match self.class_of[g] {
                None => 0.0,
                own => self.potential(own, sigma) - self.potential(self.pred_class[g], sigma),
            })
            .collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn build_nullspace(circuit: &Circuit) -> NullspacePotentials {
    let n = circuit.num_gates();
    let on_path = circuit.on_path_mask();
    let mut parent: Vec<usize> = (0..n).collect();
    for g in (0..n).filter(|&g| on_path[g]) {
        let preds = circuit.fanin(g);
        if let Some((&first, rest)) = preds.split_first() {
            for &p in rest {
                let (a, b) = (find(&mut parent, first), find(&mut parent, p));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // number classes by their smallest member
    let mut class_of = vec![None; n];
    let mut root_class = vec![usize::MAX; n];
    let mut n_classes = 0;
    for g in 0..n {
        if on_path[g] {
            let r = find(&mut parent, g);
            if root_class[r] == usize::MAX {
                root_class[r] = n_classes;
                n_classes += 1;
            }
            class_of[g] = Some(root_class[r]);
        }
    }
    let pred_class: Vec<Option<usize>> = (0..n)
        .map(|g| {
            if on_path[g] {
                circuit.fanin(g).first().and_then(|&p| class_of[p])
            } else {
                None
            }
        })
        .collect();
    let mut pinned = vec![false; n_classes];
    for g in 0..n {
        if !on_path[g] {
            continue;
        }
        if circuit.is_output(g) {
            pinned[class_of[g].expect("on-path")] = true;
        }
        if circuit.has_input_pin(g) {
            if let Some(c) = pred_class[g] {
                pinned[c] = true;
            }
        }
    }
    let mut free_index = vec![None; n_classes];
    let mut n_free = 0;
    for c in 0..n_classes {
        if !pinned[c] {
            free_index[c] = Some(n_free);
            n_free += 1;
        }
    }
    NullspacePotentials {
        class_of,
        pred_class,
        pinned,
        free_index,
        n_free,
    }
}

/// A path whose Δ-sum is not zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PathViolation {
    pub row: usize,
    pub gates: Vec<GateId>,
    pub sum: f64,
}

/// First row of `t` whose Δ-sum exceeds `tol` in magnitude.
pub fn check_path_sums(t: &TopologyMatrix, delta: &[f64], tol: f64) -> Result<f64, PathViolation> {
    let mut worst: f64 = 0.0;
    for (row, gates) in t.rows.iter().enumerate() {
        let sum: f64 = gates.iter().map(|&g| delta[g]).sum();
        if sum.abs() > tol {
            return Err(PathViolation {
                row,
                gates: gates.clone(),
                sum,
            });
        }
        worst = worst.max(sum.abs());
    }
    Ok(worst)
}

/// Largest number of paths for which the explicit rank check runs.
pub const RANK_CHECK_MAX_PATHS: usize = 10_000;

pub const PATH_SUM_TOL_PS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct NullspaceVerdict {
    pub paths: usize,
    pub trials: usize,
    pub max_abs_sum: f64,
    pub n_on_path: usize,
    pub n_free: usize,
    /// Numerical rank of `T`, when the path count allowed computing it.
    pub rank: Option<usize>,
}

#[derive(Debug, Error)]
pub enum TimingError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("path {} has delta sum {sum} ps: {path}", row + 1)]
    PathSum { row: usize, path: String, sum: f64 },
    #[error("{free} free classes but T has nullity {nullity}")]
    Nullity { free: usize, nullity: usize },
}

struct PathNames<'a>(&'a Circuit, &'a [GateId]);

impl fmt::Display for PathNames<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &g) in self.1.iter().enumerate() {
            if k > 0 {
                f.write_str(" -> ")?;
            }
            f.write_str(&self.0.gate(g).name)?;
        }
        Ok(())
    }
}

pub fn path_names(circuit: &Circuit, gates: &[GateId]) -> String {
    PathNames(circuit, gates).to_string()
}

fn violation_error(circuit: &Circuit, v: PathViolation) -> TimingError {
    TimingError::PathSum {
        row: v.row,
        path: path_names(circuit, &v.gates),
        sum: v.sum,
    }
}

/// Draws random potentials in ±100 ps and checks every enumerated path sum;
/// for small path counts also checks the class count against `T`'s nullity.
pub fn verify_nullspace(
    circuit: &Circuit,
    ns: &NullspacePotentials,
    trials: usize,
    cap: usize,
    seed: u64,
) -> Result<NullspaceVerdict, TimingError> {
    let t = build_topology_matrix(circuit, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs_sum: f64 = 0.0;
    for _ in 0..trials {
        let sigma: Vec<f64> = (0..ns.n_free())
            .map(|_| rng.random_range(-100.0..100.0))
            .collect();
        let delta = ns.apply_potentials(&sigma);
        let worst = check_path_sums(&t, &delta, PATH_SUM_TOL_PS)
            .map_err(|v| violation_error(circuit, v))?;
        max_abs_sum = max_abs_sum.max(worst);
    }
    let rank = if t.n_rows() <= RANK_CHECK_MAX_PATHS {
        let rank = t.rank();
        let nullity = ns.n_on_path() - rank;
        if nullity != ns.n_free() {
            return Err(TimingError::Nullity {
                free: ns.n_free(),
                nullity,
            });
        }
        Some(rank)
    } else {
        None
    };
    Ok(NullspaceVerdict {
        paths: t.n_rows(),
        trials,
        max_abs_sum,
        n_on_path: ns.n_on_path(),
        n_free: ns.n_free(),
        rank,
    })
}

/// Checks an arbitrary perturbation against every path.
pub fn verify_delta(circuit: &Circuit, delta: &[f64], cap: usize) -> Result<f64, TimingError> {
    let t = build_topology_matrix(circuit, cap)?;
    check_path_sums(&t, delta, PATH_SUM_TOL_PS).map_err(|v| violation_error(circuit, v))
}
