//! Three-dimensional skip-free Markov-modulated random walk kernels.
//!
//! A model is a map from level offsets in {-1,0,1}^3 to nonnegative phase
//! blocks whose sum is a stochastic matrix. This module builds the
//! one-server three-queue kernel (Poisson arrivals, exponential services,
//! cyclic 1-limited service) by uniformizing its generator, reads and writes
//! models as JSON, assembles the z-weighted marginal operators the spectral
//! machinery consumes, and checks the standing assumptions (drift signs,
//! irreducibility, aperiodicity, upward reachability).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dense::{positive, Mat};
use crate::error::{Error, Result};
use crate::phase::{self, PhaseMatrix};
use crate::tridiag::{NestedOperator, Triplet};

/// A coordinate of the level process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    pub fn all() -> [Axis; 3] {
        [Axis::X1, Axis::X2, Axis::X3]
    }

    pub fn from_index(i: usize) -> Result<Axis> {
        match i {
            0 => Ok(Axis::X1),
            1 => Ok(Axis::X2),
            2 => Ok(Axis::X3),
            _ => Err(Error::Domain(format!("axis index {i} out of range"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

pub type Offset = (i8, i8, i8);

/// All 27 offsets in lexicographic order.
pub fn offsets() -> impl Iterator<Item = Offset> {
    (-1i8..=1).flat_map(|k1| (-1i8..=1).flat_map(move |k2| (-1i8..=1).map(move |k3| (k1, k2, k3))))
}

/// A skip-free 3-D Markov-modulated random walk kernel: up to 27 phase blocks
/// indexed by the level offset; absent offsets are zero blocks.
#[derive(Debug, Clone)]
pub struct MmrwModel {
    s0: usize,
    blocks: BTreeMap<Offset, PhaseMatrix>,
    labels: Option<Vec<String>>,
}

impl MmrwModel {
    pub fn new(
        s0: usize,
        blocks: impl IntoIterator<Item = (Offset, PhaseMatrix)>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if s0 == 0 {
            return Err(Error::Validation("phase count must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (k, m) in blocks {
            if !(-1..=1).contains(&k.0) || !(-1..=1).contains(&k.1) || !(-1..=1).contains(&k.2) {
                return Err(Error::Validation(format!("offset {k:?} outside {{-1,0,1}}^3")));
            }
            if m.dim() != s0 {
                return Err(Error::Validation(format!(
                    "block {k:?} has dimension {}, expected {s0}",
                    m.dim()
                )));
            }
            if map.insert(k, m).is_some() {
                return Err(Error::Validation(format!("duplicate block for offset {k:?}")));
            }
        }
        if map.values().all(|m| m.is_zero()) {
            return Err(Error::Validation("model has no nonzero block".into()));
        }
        if let Some(l) = &labels {
            if l.len() != s0 {
                return Err(Error::Validation(format!(
                    "{} labels for {s0} phases",
                    l.len()
                )));
            }
        }
        Ok(MmrwModel { s0, blocks: map, labels })
    }

    pub fn s0(&self) -> usize {
        self.s0
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn block(&self, k: Offset) -> Option<&PhaseMatrix> {
        self.blocks.get(&k)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (Offset, &PhaseMatrix)> {
        self.blocks.iter().map(|(k, m)| (*k, m))
    }

    /// Sum of all blocks: the phase-process transition matrix.
    pub fn a_star_all(&self) -> PhaseMatrix {
        let mut acc = Mat::zeros(self.s0, self.s0);
        for m in self.blocks.values() {
            acc.axpy(1.0, m.as_mat());
        }
        PhaseMatrix::from_mat(acc).expect("sum of nonnegative blocks")
    }

    /// The fully weighted matrix sum_k z1^{k1} z2^{k2} z3^{k3} A_k.
    pub fn a_star_weighted(&self, z: [f64; 3]) -> Result<PhaseMatrix> {
        if !z.iter().all(|&zi| positive(zi)) {
            return Err(Error::Domain(format!("weights must be positive, got {z:?}")));
        }
        let mut acc = Mat::zeros(self.s0, self.s0);
        for (&(k1, k2, k3), m) in &self.blocks {
            let w = z[0].powi(k1 as i32) * z[1].powi(k2 as i32) * z[2].powi(k3 as i32);
            acc.axpy(w, m.as_mat());
        }
        PhaseMatrix::from_mat(acc)
    }

    /// The marginal operator with coordinate i weighted by `weights[i]` when
    /// present and kept as an unbounded level otherwise. Kept coordinates are
    /// nested in ascending order, the first kept coordinate outermost. With
    /// all three coordinates weighted the result is a leaf.
    pub fn marginal(&self, weights: [Option<f64>; 3]) -> Result<NestedOperator> {
        for w in weights.iter().flatten() {
            if !positive(*w) {
                return Err(Error::Domain(format!("weights must be positive, got {w}")));
            }
        }
        let kept: Vec<usize> = (0..3).filter(|&i| weights[i].is_none()).collect();
        self.nested_from(&kept, [None; 3], weights)
    }

    /// The (A_{-1}, A_0, A_1) triplet of the representation that takes
    /// coordinate `axis` as the level; each member is the depth-2 nested
    /// operator over the two remaining coordinates.
    pub fn direction_triplet(&self, axis: Axis) -> Result<Triplet> {
        let i = axis.index();
        let kept: Vec<usize> = (0..3).filter(|&c| c != i).collect();
        let member = |k: i8| -> Result<NestedOperator> {
            let mut fixed = [None; 3];
            fixed[i] = Some(k);
            self.nested_from(&kept, fixed, [None; 3])
        };
        Triplet::new(member(-1)?, member(0)?, member(1)?)
    }

    fn nested_from(
        &self,
        kept: &[usize],
        fixed: [Option<i8>; 3],
        weights: [Option<f64>; 3],
    ) -> Result<NestedOperator> {
        match kept.split_first() {
            None => {
                let mut acc = Mat::zeros(self.s0, self.s0);
                for (&k, m) in &self.blocks {
                    let ks = [k.0, k.1, k.2];
                    if (0..3).any(|c| fixed[c].is_some_and(|f| f != ks[c])) {
                        continue;
                    }
                    let mut w = 1.0;
                    for c in 0..3 {
                        if let Some(z) = weights[c] {
                            w *= z.powi(ks[c] as i32);
                        }
                    }
                    acc.axpy(w, m.as_mat());
                }
                Ok(NestedOperator::Leaf(PhaseMatrix::from_mat(acc)?))
            }
            Some((&c, rest)) => {
                let member = |k: i8| -> Result<NestedOperator> {
                    let mut fixed = fixed;
                    fixed[c] = Some(k);
                    self.nested_from(rest, fixed, weights)
                };
                Ok(NestedOperator::level(Triplet::from_parts(
                    member(-1)?,
                    member(0)?,
                    member(1)?,
                )?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            s0: self.s0,
            labels: self.labels.clone(),
            blocks: self
                .blocks
                .iter()
                .filter(|(_, m)| !m.is_zero())
                .map(|(&(k1, k2, k3), m)| BlockEntry {
                    offset: [k1, k2, k3],
                    matrix: (0..self.s0)
                        .map(|i| (0..self.s0).map(|j| m.get(i, j)).collect())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let mut blocks = Vec::new();
        for b in file.blocks {
            let m = PhaseMatrix::new(&b.matrix)?;
            blocks.push(((b.offset[0], b.offset[1], b.offset[2]), m));
        }
        MmrwModel::new(file.s0, blocks, file.labels)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::Parse(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    s0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    blocks: Vec<BlockEntry>,
}

#[derive(Serialize, Deserialize)]
struct BlockEntry {
    offset: [i8; 3],
    matrix: Vec<Vec<f64>>,
}

/// Arrival and service rates of the three-queue model.
#[derive(Debug, Clone, Copy)]
pub struct QueueRates {
    pub lambda: [f64; 3],
    pub mu: [f64; 3],
}

impl QueueRates {
    pub fn new(lambda: [f64; 3], mu: [f64; 3]) -> Result<Self> {
        for v in lambda.iter().chain(mu.iter()) {
            if !positive(*v) {
                return Err(Error::Validation(format!(
                    "rates must be positive, got lambda={lambda:?} mu={mu:?}"
                )));
            }
        }
        Ok(QueueRates { lambda, mu })
    }

    /// Uniformization constant: total arrival rate plus all service rates.
    pub fn nu(&self) -> f64 {
        self.lambda.iter().sum::<f64>() + self.mu.iter().sum::<f64>()
    }
}

/// The interior kernel of the one-server three-queue model with cyclic
/// 1-limited service. Phase j means "serving class j"; a service completion
/// at queue j moves the server to queue j+1 (mod 3) and the level down by one
/// in coordinate j. The continuous-time generator is uniformized at rate
/// nu = lambda + mu_1 + mu_2 + mu_3 into a stochastic kernel.
pub fn build_three_queue(rates: &QueueRates) -> Result<MmrwModel> {
    let nu = rates.nu();
    let lambda_total: f64 = rates.lambda.iter().sum();
    let s0 = 3;
    let mut blocks: Vec<(Offset, PhaseMatrix)> = Vec::new();

    // Arrivals: class i raises coordinate i, any phase.
    let arrival = |i: usize| -> Offset {
        let mut k = [0i8; 3];
        k[i] = 1;
        (k[0], k[1], k[2])
    };
    for i in 0..3 {
        let m = PhaseMatrix::from_mat(Mat::identity(s0).scaled(rates.lambda[i] / nu))?;
        blocks.push((arrival(i), m));
    }

    // Service completions: phase j finishes a class-j customer and hands the
    // server to class j+1.
    for j in 0..3 {
        let mut k = [0i8; 3];
        k[j] = -1;
        let mut m = Mat::zeros(s0, s0);
        m.set(j, (j + 1) % 3, rates.mu[j] / nu);
        blocks.push(((k[0], k[1], k[2]), PhaseMatrix::from_mat(m)?));
    }

    // Uniformized diagonal: I + (1/nu) * diag(-(lambda + mu_j)).
    let mut diag = Mat::zeros(s0, s0);
    for j in 0..3 {
        diag.set(j, j, 1.0 - (lambda_total + rates.mu[j]) / nu);
    }
    blocks.push(((0, 0, 0), PhaseMatrix::from_mat(diag)?));

    let labels = Some(vec!["serving-1".into(), "serving-2".into(), "serving-3".into()]);
    MmrwModel::new(s0, blocks, labels)
}

/// Outcome of checking a model against the standing assumptions. Failures are
/// carried as flags rather than errors so a report can show all of them at
/// once.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Largest row-sum deviation of the summed blocks from 1.
    pub row_sum_error: f64,
    pub stochastic: bool,
    pub a_star_irreducible: bool,
    /// Mean drift vector, when the phase process admits one.
    pub drift: Option<[f64; 3]>,
    pub drift_all_nonzero: bool,
    pub drift_some_negative: bool,
    /// Per direction: every row of the up-block operator has a positive entry
    /// (checked through the corner sums over nonnegative offsets).
    pub upward_reachable: [bool; 3],
    /// Irreducibility of the orthant-truncated kernel pattern at edge 3.
    pub q_irreducible: bool,
    /// Aperiodicity of the same pattern (meaningful when irreducible).
    pub q_aperiodic: bool,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.stochastic
            && self.a_star_irreducible
            && self.drift_all_nonzero
            && self.drift_some_negative
            && self.upward_reachable.iter().all(|&b| b)
            && self.q_irreducible
            && self.q_aperiodic
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let flag = |b: bool| if b { "pass" } else { "FAIL" };
        writeln!(
            f,
            "stochasticity            {} (max row-sum error {:.3e})",
            flag(self.stochastic),
            self.row_sum_error
        )?;
        writeln!(f, "phase irreducibility     {}", flag(self.a_star_irreducible))?;
        match self.drift {
            Some(a) => writeln!(
                f,
                "mean drift               ({:+.6}, {:+.6}, {:+.6})",
                a[0], a[1], a[2]
            )?,
            None => writeln!(f, "mean drift               unavailable")?,
        }
        writeln!(f, "drift all nonzero        {}", flag(self.drift_all_nonzero))?;
        writeln!(f, "drift some negative      {}", flag(self.drift_some_negative))?;
        for i in 0..3 {
            writeln!(
                f,
                "upward reachability x{}   {}",
                i + 1,
                flag(self.upward_reachable[i])
            )?;
        }
        writeln!(f, "orthant irreducibility   {}", flag(self.q_irreducible))?;
        write!(f, "orthant aperiodicity     {}", flag(self.q_aperiodic))
    }
}

/// Check the model against the standing assumptions: stochasticity of the
/// summed blocks, irreducibility of the phase process, nonzero drift with at
/// least one negative component, positive rows of every up-block operator,
/// and irreducibility plus aperiodicity of the orthant truncation (tested on
/// the edge-3 box pattern).
pub fn validate(model: &MmrwModel) -> ValidationReport {
    let a_star = model.a_star_all();
    let row_sum_error = a_star
        .row_sums()
        .iter()
        .fold(0.0f64, |e, s| e.max((s - 1.0).abs()));
    let stochastic = row_sum_error <= 1e-12;
    let a_star_irreducible = phase::is_irreducible(&a_star);

    let drift = if stochastic && a_star_irreducible {
        crate::spectral::mean_drift(model).ok()
    } else {
        None
    };
    let drift_all_nonzero = drift.is_some_and(|a| a.iter().all(|&x| x.abs() > 1e-12));
    let drift_some_negative = drift.is_some_and(|a| a.iter().any(|&x| x < -1e-12));

    let mut upward_reachable = [false; 3];
    for (i, up) in upward_reachable.iter_mut().enumerate() {
        // Corner rows of the up-block operator see only nonnegative offsets in
        // the other coordinates, so positivity of these sums is the binding
        // condition.
        let mut sums = vec![0.0; model.s0()];
        for (k, m) in model.blocks() {
            let ks = [k.0, k.1, k.2];
            if ks[i] != 1 {
                continue;
            }
            if (0..3).filter(|&c| c != i).any(|c| ks[c] < 0) {
                continue;
            }
            for (j, s) in sums.iter_mut().enumerate() {
                *s += m.row_sums()[j];
            }
        }
        *up = sums.iter().all(|&s| s > 0.0);
    }

    let (q_irreducible, q_aperiodic) = orthant_pattern_checks(model, 3);

    ValidationReport {
        row_sum_error,
        stochastic,
        a_star_irreducible,
        drift,
        drift_all_nonzero,
        drift_some_negative,
        upward_reachable,
        q_irreducible,
        q_aperiodic,
    }
}

/// Strong connectivity and aperiodicity of the orthant-truncated kernel
/// pattern on an edge^3 box.
fn orthant_pattern_checks(model: &MmrwModel, edge: usize) -> (bool, bool) {
    let (dim, coo) = crate::occupation::box_kernel_coo(model, edge);
    let mut adj = vec![Vec::new(); dim];
    for (i, j, v) in coo {
        if v != 0.0 {
            adj[i].push(j);
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    let irreducible = phase::strongly_connected_components(&adj).len() == 1;
    if !irreducible {
        return (false, false);
    }
    // BFS period computation: gcd of dist[u] + 1 - dist[v] over all edges.
    let mut dist = vec![usize::MAX; dim];
    let mut queue = std::collections::VecDeque::new();
    dist[0] = 0;
    queue.push_back(0usize);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut g: u64 = 0;
    for (u, row) in adj.iter().enumerate() {
        for &w in row {
            let d = (dist[u] as i64 + 1 - dist[w] as i64).unsigned_abs();
            g = gcd(g, d);
        }
    }
    (true, g == 1)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
