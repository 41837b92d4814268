//! Nonnegative dense matrix algebra over a finite phase set.
//!
//! A [`PhaseMatrix`] holds one square block of a modulated-walk kernel: every
//! entry is a nonnegative, finite transition weight. On top of it this module
//! provides the spectral radius (Perron-Frobenius eigenvalue for irreducible
//! blocks), left/right Perron vectors, stationary distributions of stochastic
//! blocks, and exact irreducibility checks on the nonzero pattern.

use crate::dense::{positive, Mat};
use crate::error::{Error, Result};
use crate::power;

/// Default residual tolerance for eigen computations.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Iteration budget for power iterations; phase dimensions are small, so this
/// is generous.
pub const MAX_POWER_ITER: usize = 100_000;

/// Dense square matrix with nonnegative finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    mat: Mat,
}

impl PhaseMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_mat(Mat::from_rows(rows)?)
    }

    pub fn from_mat(mat: Mat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Validation("phase matrix must be square".into()));
        }
        if mat.rows() == 0 {
            return Err(Error::Validation("phase dimension must be at least 1".into()));
        }
        if !mat.is_finite() {
            return Err(Error::Validation("phase matrix has nonfinite entries".into()));
        }
        if mat.min_entry() < 0.0 {
            return Err(Error::Validation(format!(
                "phase matrix has a negative entry ({})",
                mat.min_entry()
            )));
        }
        Ok(PhaseMatrix { mat })
    }

    /// Accepts tiny negative dust (>= -eps) from linear solves whose exact
    /// result is nonnegative, clamping it to zero.
    pub(crate) fn from_mat_clamped(mat: Mat, eps: f64) -> Result<Self> {
        let min = mat.min_entry();
        if min < -eps {
            return Err(Error::Validation(format!(
                "matrix expected nonnegative but has entry {min}"
            )));
        }
        if min < 0.0 {
            let data: Vec<f64> = mat.data().iter().map(|&a| a.max(0.0)).collect();
            return Self::from_mat(Mat::from_vec(mat.rows(), mat.cols(), data)?);
        }
        Self::from_mat(mat)
    }

    pub fn zeros(dim: usize) -> Self {
        PhaseMatrix { mat: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        PhaseMatrix { mat: Mat::identity(dim) }
    }

    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(&[vec![v]])
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    pub fn as_mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    pub fn is_zero(&self) -> bool {
        self.mat.data().iter().all(|&a| a == 0.0)
    }

    pub fn add(&self, other: &PhaseMatrix) -> PhaseMatrix {
        PhaseMatrix { mat: self.mat.add(&other.mat) }
    }

    pub fn matmul(&self, other: &PhaseMatrix) -> PhaseMatrix {
        PhaseMatrix { mat: self.mat.matmul(&other.mat) }
    }

    /// Scale by a nonnegative factor.
    pub fn scaled(&self, c: f64) -> Result<PhaseMatrix> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Domain(format!("scale factor must be >= 0, got {c}")));
        }
        Ok(PhaseMatrix { mat: self.mat.scaled(c) })
    }

    pub fn sup_norm(&self) -> f64 {
        self.mat.sup_norm()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mat.row_sums()
    }
}

/// Perron-Frobenius data of an irreducible nonnegative matrix: the spectral
/// radius plus strictly positive left and right eigenvectors, with the right
/// vector sup-normalized and the left vector scaled so that left . right = 1.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub value: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub normalized: bool,
}

/// Spectral radius of a nonnegative matrix, to within `tol`.
///
/// The nonzero pattern is decomposed into strongly connected components and
/// shifted power iteration runs on each irreducible diagonal block; the
/// spectral radius of the whole matrix is the maximum over blocks. The shift
/// c = max diagonal + 1 makes every block primitive, so periodic patterns
/// converge too.
pub fn spectral_radius(m: &PhaseMatrix, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    spr_dense(m.as_mat(), tol)
}

pub(crate) fn spr_dense(mat: &Mat, tol: f64) -> Result<f64> {
    let comps = strongly_connected_components(&dense_pattern(mat));
    let mut best = 0.0f64;
    for comp in comps {
        if comp.len() == 1 {
            let i = comp[0];
            best = best.max(mat.get(i, i));
            continue;
        }
        let sub = submatrix(mat, &comp);
        let shift = sub.max_diag().max(0.0) + 1.0;
        let value = power::spr_shifted_power(
            |x, y| sub.matvec(x, y),
            comp.len(),
            shift,
            tol,
            MAX_POWER_ITER,
        )?;
        best = best.max(value);
    }
    Ok(best)
}

/// Left and right Perron vectors of an irreducible nonnegative matrix.
pub fn perron_vectors(m: &PhaseMatrix, tol: f64) -> Result<PerronData> {
    check_tol(tol)?;
    if !is_irreducible(m) {
        return Err(Error::Structure(
            "perron_vectors requires an irreducible matrix".into(),
        ));
    }
    let mat = m.as_mat();
    let n = mat.rows();
    let shift = mat.max_diag().max(0.0) + 1.0;
    let (value, right) =
        power::perron_right(|x, y| mat.matvec(x, y), n, shift, tol, MAX_POWER_ITER)?;
    let (_lvalue, mut left) =
        power::perron_right(|x, y| mat.vecmat(x, y), n, shift, tol, MAX_POWER_ITER)?;
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    for l in &mut left {
        *l /= dot;
    }
    Ok(PerronData { value, left, right, normalized: true })
}

/// Stationary probability row vector of an irreducible stochastic matrix,
/// by direct linear solve: one balance equation is replaced with the
/// normalization constraint.
pub fn stationary_distribution(m: &PhaseMatrix, tol: f64) -> Result<Vec<f64>> {
    check_tol(tol)?;
    let n = m.dim();
    for (i, s) in m.row_sums().iter().enumerate() {
        if (s - 1.0).abs() > tol.max(1e-12) {
            return Err(Error::Validation(format!(
                "matrix is not stochastic: row {i} sums to {s}"
            )));
        }
    }
    if !is_irreducible(m) {
        return Err(Error::Structure(
            "stationary_distribution requires an irreducible matrix".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    // Solve pi (M - I) = 0 with the last column replaced by ones, i.e.
    // (M - I)^T pi^T = e_last with the last *row* of the transpose replaced.
    let mut a = m.as_mat().transpose();
    for i in 0..n {
        let d = a.get(i, i);
        a.set(i, i, d - 1.0);
    }
    for j in 0..n {
        a.set(n - 1, j, 1.0);
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = a.lu()?.solve_vec(&b);
    // Residual check of the balance equations.
    let mut resid = vec![0.0; n];
    m.as_mat().vecmat(&pi, &mut resid);
    let err = resid
        .iter()
        .zip(&pi)
        .fold(0.0f64, |e, (r, p)| e.max((r - p).abs()));
    if err > tol.max(1e-10) {
        return Err(Error::Structure(format!(
            "stationary solve residual {err} exceeds tolerance"
        )));
    }
    Ok(pi)
}

/// True iff the directed graph of nonzero entries is strongly connected.
/// A 1x1 matrix counts as irreducible only with a positive entry.
pub fn is_irreducible(m: &PhaseMatrix) -> bool {
    let n = m.dim();
    if n == 1 {
        return m.get(0, 0) > 0.0;
    }
    strongly_connected_components(&dense_pattern(m.as_mat())).len() == 1
}

fn check_tol(tol: f64) -> Result<()> {
    if !positive(tol) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn dense_pattern(mat: &Mat) -> Vec<Vec<usize>> {
    let n = mat.rows();
    (0..n)
        .map(|i| (0..n).filter(|&j| mat.get(i, j) != 0.0).collect())
        .collect()
}

fn submatrix(mat: &Mat, idx: &[usize]) -> Mat {
    let k = idx.len();
    let mut sub = Mat::zeros(k, k);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            sub.set(a, b, mat.get(i, j));
        }
    }
    sub
}

/// Tarjan's algorithm, iterative so deep chains cannot overflow the stack.
pub(crate) fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut comps = Vec::new();
    // Work frames: (node, next child position)
    let mut work: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        work.push((root, 0));
        while let Some(&mut (v, ref mut child)) = work.last_mut() {
            if *child == 0 {
                index[v] = next_index;
                lowlink[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(rows: &[Vec<f64>]) -> PhaseMatrix {
        PhaseMatrix::new(rows).unwrap()
    }

    #[test]
    fn spectral_radius_scalar() {
        let m = pm(&[vec![0.7]]);
        assert!((spectral_radius(&m, 1e-12).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_permutation() {
        // Periodic pattern: the diagonal shift must defeat the 2-cycle.
        let m = pm(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((spectral_radius(&m, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_stochastic_is_one() {
        let m = pm(&[vec![0.5, 0.5], vec![0.25, 0.75]]);
        assert!((spectral_radius(&m, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_reducible_blocks() {
        // Upper-triangular: spr is the max diagonal entry.
        let m = pm(&[vec![0.5, 1.0], vec![0.0, 0.8]]);
        assert!((spectral_radius(&m, 1e-12).unwrap() - 0.8).abs() < 1e-12);
        let id = PhaseMatrix::identity(3);
        assert!((spectral_radius(&id, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perron_vectors_stochastic() {
        let m = pm(&[vec![0.5, 0.5], vec![0.25, 0.75]]);
        let p = perron_vectors(&m, 1e-12).unwrap();
        assert!((p.value - 1.0).abs() < 1e-10);
        // right = (1,1); left proportional to (1/3, 2/3), scaled so left.right = 1
        assert!((p.right[0] - 1.0).abs() < 1e-8);
        assert!((p.right[1] - 1.0).abs() < 1e-8);
        assert!((p.left[0] - 1.0 / 3.0).abs() < 1e-8);
        assert!((p.left[1] - 2.0 / 3.0).abs() < 1e-8);
        let dot: f64 = p.left.iter().zip(&p.right).map(|(a, b)| a * b).sum();
        assert!((dot - 1.0).abs() < 1e-10);
    }

    #[test]
    fn perron_vectors_rejects_reducible() {
        let id = PhaseMatrix::identity(3);
        assert!(matches!(
            perron_vectors(&id, 1e-10),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn perron_vectors_symmetric_shifted() {
        let m = pm(&[vec![0.0, 2.0], vec![2.0, 0.0]]);
        let p = perron_vectors(&m, 1e-12).unwrap();
        assert!((p.value - 2.0).abs() < 1e-9);
        assert!((p.left[0] - p.left[1]).abs() < 1e-8);
        assert!((p.right[0] - p.right[1]).abs() < 1e-8);
    }

    #[test]
    fn perron_residuals_within_tol() {
        let m = pm(&[vec![0.1, 0.7, 0.0], vec![0.3, 0.2, 0.4], vec![0.5, 0.0, 0.3]]);
        let tol = 1e-11;
        let p = perron_vectors(&m, tol).unwrap();
        let n = m.dim();
        let mut mv = vec![0.0; n];
        m.as_mat().matvec(&p.right, &mut mv);
        for i in 0..n {
            assert!((mv[i] - p.value * p.right[i]).abs() <= 1e-9);
        }
        let mut vm = vec![0.0; n];
        m.as_mat().vecmat(&p.left, &mut vm);
        for i in 0..n {
            assert!((vm[i] - p.value * p.left[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn stationary_balance() {
        let m = pm(&[vec![0.5, 0.5], vec![0.25, 0.75]]);
        let pi = stationary_distribution(&m, 1e-10).unwrap();
        assert!((pi[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_single_state() {
        let m = pm(&[vec![1.0]]);
        assert_eq!(stationary_distribution(&m, 1e-10).unwrap(), vec![1.0]);
    }

    #[test]
    fn stationary_doubly_stochastic_circulant() {
        let m = pm(&[
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
            vec![0.5, 0.3, 0.2],
        ]);
        let pi = stationary_distribution(&m, 1e-10).unwrap();
        for p in pi {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_rejects_nonstochastic() {
        let m = pm(&[vec![0.5, 0.4], vec![0.25, 0.75]]);
        assert!(matches!(
            stationary_distribution(&m, 1e-10),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn irreducibility_cases() {
        assert!(is_irreducible(&pm(&[vec![0.0, 1.0], vec![1.0, 0.0]])));
        assert!(!is_irreducible(&pm(&[vec![1.0, 0.0], vec![0.0, 1.0]])));
        // absorbing second state
        assert!(!is_irreducible(&pm(&[vec![0.5, 0.5], vec![0.0, 1.0]])));
    }

    #[test]
    fn rejects_negative_entries() {
        assert!(PhaseMatrix::new(&[vec![0.5, -0.1], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn spr_agrees_with_power_trace_growth() {
        // spr ~ limsup ([M^k]_jj)^(1/k); check within 5% at k = 64 on a fixed
        // irreducible 4x4.
        let m = pm(&[
            vec![0.2, 0.5, 0.1, 0.0],
            vec![0.3, 0.1, 0.4, 0.1],
            vec![0.0, 0.6, 0.2, 0.2],
            vec![0.4, 0.0, 0.3, 0.1],
        ]);
        let spr = spectral_radius(&m, 1e-12).unwrap();
        let mut p = m.clone();
        for _ in 1..64 {
            p = p.matmul(&m);
        }
        let est = p.get(0, 0).powf(1.0 / 64.0);
        assert!((est - spr).abs() / spr < 0.05);
    }
}
