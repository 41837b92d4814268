//! Level-homogeneous block tri-diagonal operators with optional nesting.
//!
//! A [`Triplet`] (lower, diag, upper) describes the repeating block row
//! (A_{-1}, A_0, A_1) of a countable block tri-diagonal operator. Each member
//! is a [`NestedOperator`]: either a dense phase-matrix leaf or itself a
//! triplet, so operators whose blocks are again block tri-diagonal (walks with
//! several unbounded level coordinates) are represented by nesting.
//!
//! Two computations live here:
//!
//! * `a_star`: the one-parameter family z^{-1} A_{-1} + A_0 + z A_1, taken at
//!   the top nesting level only;
//! * `truncate` / `cp_truncated`: the finite north-west corner of the operator
//!   with L levels per depth and no boundary modification (the corner block
//!   stays A_0). Spectral radii of these truncations increase with L and
//!   approach the reciprocal of the convergence parameter of the countable
//!   operator from below.

use crate::dense::{positive, Mat};
use crate::error::{Error, Result};
use crate::phase::PhaseMatrix;
use crate::sparse::{self, Csr};

/// Truncations up to this dimension keep a dense copy; larger ones are
/// CSR-only.
pub const DENSE_LIMIT: usize = 4096;

/// Iteration budget for spectral radii of truncations. Eigenvalue clusters of
/// large truncations tighten like 1/L^2, so this is much larger than the
/// phase-matrix budget.
const TRUNCATION_POWER_ITER: usize = 400_000;

/// Either a phase-matrix leaf or one more level of block tri-diagonal
/// structure.
#[derive(Debug, Clone, PartialEq)]
pub enum NestedOperator {
    Leaf(PhaseMatrix),
    Level(Box<Triplet>),
}

/// The (A_{-1}, A_0, A_1) blocks of a level-homogeneous operator; all three
/// share the same nesting shape and leaf dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    lower: NestedOperator,
    diag: NestedOperator,
    upper: NestedOperator,
}

impl Triplet {
    /// Builds a triplet for use as a quasi-birth-and-death operator: the three
    /// members must be congruent and both off-diagonal members must be nonzero
    /// (an operator that never moves up or never moves down has no rate
    /// matrix worth solving for).
    pub fn new(lower: NestedOperator, diag: NestedOperator, upper: NestedOperator) -> Result<Self> {
        let t = Self::from_parts(lower, diag, upper)?;
        if t.lower.is_zero() {
            return Err(Error::Validation(
                "lower block A_{-1} is zero; the operator never moves down".into(),
            ));
        }
        if t.upper.is_zero() {
            return Err(Error::Validation(
                "upper block A_1 is zero; the operator never moves up".into(),
            ));
        }
        Ok(t)
    }

    /// Builds a triplet checking congruence only. Inner levels of a nested
    /// operator may legitimately carry zero off-diagonal blocks (coordinates
    /// the walk never moves along), so the nonzero requirement of [`Self::new`]
    /// applies to the operator actually being solved, not to its structure.
    pub fn from_parts(
        lower: NestedOperator,
        diag: NestedOperator,
        upper: NestedOperator,
    ) -> Result<Self> {
        if !lower.congruent(&diag) || !upper.congruent(&diag) {
            return Err(Error::Validation(
                "triplet members have mismatched nesting shape or leaf dimension".into(),
            ));
        }
        Ok(Triplet { lower, diag, upper })
    }

    pub fn scalar(lower: f64, diag: f64, upper: f64) -> Result<Self> {
        Triplet::new(
            NestedOperator::Leaf(PhaseMatrix::scalar(lower)?),
            NestedOperator::Leaf(PhaseMatrix::scalar(diag)?),
            NestedOperator::Leaf(PhaseMatrix::scalar(upper)?),
        )
    }

    pub fn lower(&self) -> &NestedOperator {
        &self.lower
    }

    pub fn diag(&self) -> &NestedOperator {
        &self.diag
    }

    pub fn upper(&self) -> &NestedOperator {
        &self.upper
    }
}

impl NestedOperator {
    pub fn leaf(m: PhaseMatrix) -> Self {
        NestedOperator::Leaf(m)
    }

    pub fn level(t: Triplet) -> Self {
        NestedOperator::Level(Box::new(t))
    }

    /// Nesting depth: 0 for a leaf.
    pub fn depth(&self) -> usize {
        match self {
            NestedOperator::Leaf(_) => 0,
            NestedOperator::Level(t) => 1 + t.diag.depth(),
        }
    }

    /// Phase dimension of the leaves.
    pub fn leaf_dim(&self) -> usize {
        match self {
            NestedOperator::Leaf(m) => m.dim(),
            NestedOperator::Level(t) => t.diag.leaf_dim(),
        }
    }

    pub fn congruent(&self, other: &NestedOperator) -> bool {
        match (self, other) {
            (NestedOperator::Leaf(a), NestedOperator::Leaf(b)) => a.dim() == b.dim(),
            (NestedOperator::Level(a), NestedOperator::Level(b)) => {
                a.lower.congruent(&b.lower)
                    && a.diag.congruent(&b.diag)
                    && a.upper.congruent(&b.upper)
            }
            _ => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NestedOperator::Leaf(m) => m.is_zero(),
            NestedOperator::Level(t) => t.lower.is_zero() && t.diag.is_zero() && t.upper.is_zero(),
        }
    }

    pub fn as_leaf(&self) -> Option<&PhaseMatrix> {
        match self {
            NestedOperator::Leaf(m) => Some(m),
            NestedOperator::Level(_) => None,
        }
    }

    /// Structural sum sum_k c_k * op_k over congruent operators with
    /// nonnegative coefficients.
    pub fn weighted_sum(terms: &[(f64, &NestedOperator)]) -> Result<NestedOperator> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Domain("weighted_sum needs at least one term".into()))?;
        for (_, op) in terms {
            if !op.congruent(first) {
                return Err(Error::Validation("weighted_sum over incongruent operators".into()));
            }
        }
        match first {
            NestedOperator::Leaf(_) => {
                let dim = first.leaf_dim();
                let mut acc = Mat::zeros(dim, dim);
                for (c, op) in terms {
                    acc.axpy(*c, op.as_leaf().unwrap().as_mat());
                }
                Ok(NestedOperator::Leaf(PhaseMatrix::from_mat(acc)?))
            }
            NestedOperator::Level(_) => {
                let part = |pick: fn(&Triplet) -> &NestedOperator| -> Result<NestedOperator> {
                    let sub: Vec<(f64, &NestedOperator)> = terms
                        .iter()
                        .map(|(c, op)| match op {
                            NestedOperator::Level(t) => (*c, pick(t)),
                            NestedOperator::Leaf(_) => unreachable!("congruence checked"),
                        })
                        .collect();
                    NestedOperator::weighted_sum(&sub)
                };
                Ok(NestedOperator::level(Triplet::from_parts(
                    part(|t| &t.lower)?,
                    part(|t| &t.diag)?,
                    part(|t| &t.upper)?,
                )?))
            }
        }
    }
}

/// z^{-1} A_{-1} + A_0 + z A_1 applied at the top nesting level; the result is
/// congruent to the diagonal member.
pub fn a_star(t: &Triplet, z: f64) -> Result<NestedOperator> {
    if !positive(z) {
        return Err(Error::Domain(format!("a_star requires z > 0, got {z}")));
    }
    NestedOperator::weighted_sum(&[(1.0 / z, &t.lower), (1.0, &t.diag), (z, &t.upper)])
}

/// A finite truncation of a nested operator. The nonzero entries always live
/// in CSR form (truncations are sparse by construction); a dense copy is kept
/// alongside for dimensions up to [`DENSE_LIMIT`].
#[derive(Debug, Clone)]
pub struct TruncatedMatrix {
    dim: usize,
    levels: Vec<usize>,
    leaf_dim: usize,
    csr: Csr,
    dense: Option<Mat>,
}

impl TruncatedMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn leaf_dim(&self) -> usize {
        self.leaf_dim
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.dense {
            Some(m) => m.get(i, j),
            None => self.csr.get(i, j),
        }
    }

    pub fn to_dense(&self) -> Mat {
        match &self.dense {
            Some(m) => m.clone(),
            None => self.csr.to_dense(),
        }
    }

    pub fn csr(&self) -> &Csr {
        &self.csr
    }

    pub fn spectral_radius(&self, tol: f64) -> Result<f64> {
        sparse::spr_csr(&self.csr, tol, TRUNCATION_POWER_ITER)
    }

    /// Read back the block at block coordinates (i, j) of the top level.
    pub fn block(&self, i: usize, j: usize) -> Mat {
        let sub = self.dim / self.levels.first().copied().unwrap_or(1);
        let mut out = Mat::zeros(sub, sub);
        for a in 0..sub {
            for b in 0..sub {
                out.set(a, b, self.get(i * sub + a, j * sub + b));
            }
        }
        out
    }
}

/// Assemble the finite north-west corner with `levels_per_depth[d]` levels at
/// nesting depth d. No boundary modification: the (0,0) block is A_0.
pub fn truncate(op: &NestedOperator, levels_per_depth: &[usize]) -> Result<TruncatedMatrix> {
    if levels_per_depth.len() != op.depth() {
        return Err(Error::Domain(format!(
            "levels_per_depth has length {}, nesting depth is {}",
            levels_per_depth.len(),
            op.depth()
        )));
    }
    if levels_per_depth.iter().any(|&l| l < 1) {
        return Err(Error::Domain("every truncation level must be >= 1".into()));
    }
    let leaf = op.leaf_dim();
    let dim = leaf * levels_per_depth.iter().product::<usize>();
    let mut coo = Vec::new();
    emit(op, levels_per_depth, 0, 0, &mut coo);
    let csr = Csr::from_coo(dim, coo);
    let dense = (dim <= DENSE_LIMIT).then(|| csr.to_dense());
    Ok(TruncatedMatrix {
        dim,
        levels: levels_per_depth.to_vec(),
        leaf_dim: leaf,
        csr,
        dense,
    })
}

fn block_dim(op: &NestedOperator, levels: &[usize]) -> usize {
    op.leaf_dim() * levels.iter().product::<usize>()
}

fn emit(
    op: &NestedOperator,
    levels: &[usize],
    row0: usize,
    col0: usize,
    out: &mut Vec<(usize, usize, f64)>,
) {
    match op {
        NestedOperator::Leaf(m) => {
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let v = m.get(i, j);
                    if v != 0.0 {
                        out.push((row0 + i, col0 + j, v));
                    }
                }
            }
        }
        NestedOperator::Level(t) => {
            let l = levels[0];
            let rest = &levels[1..];
            let sub = block_dim(&t.diag, rest);
            for b in 0..l {
                emit(&t.diag, rest, row0 + b * sub, col0 + b * sub, out);
                if b + 1 < l {
                    emit(&t.upper, rest, row0 + b * sub, col0 + (b + 1) * sub, out);
                    emit(&t.lower, rest, row0 + (b + 1) * sub, col0 + b * sub, out);
                }
            }
        }
    }
}

/// Spectral radius of the L-per-depth truncation: a monotone-in-L lower bound
/// on the reciprocal of the convergence parameter of the countable operator.
pub fn cp_truncated(op: &NestedOperator, level: usize, tol: f64) -> Result<f64> {
    let levels = vec![level; op.depth()];
    truncate(op, &levels)?.spectral_radius(tol)
}

/// The monotone sequence of truncated spectral radii along a doubling level
/// schedule, with early stop on relative stagnation. `capped` records that the
/// schedule ran out before the stop rule fired: the final value is then only
/// known to be a lower bound.
#[derive(Debug, Clone)]
pub struct CpSequence {
    pub levels: Vec<usize>,
    pub values: Vec<f64>,
    pub capped: bool,
}

impl CpSequence {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("schedule is nonempty")
    }
}

pub const LEVEL_SCHEDULE: [usize; 5] = [8, 16, 32, 64, 128];

pub fn cp_truncated_limit(op: &NestedOperator, tol: f64, rel_tol: f64) -> Result<CpSequence> {
    let mut levels = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for &l in LEVEL_SCHEDULE.iter() {
        let v = cp_truncated(op, l, tol)?;
        levels.push(l);
        if let Some(&prev) = values.last() {
            let stalled = (v - prev).abs() <= rel_tol * v.abs().max(1e-300);
            values.push(v);
            if stalled {
                return Ok(CpSequence { levels, values, capped: false });
            }
        } else {
            values.push(v);
        }
    }
    Ok(CpSequence { levels, values, capped: true })
}
