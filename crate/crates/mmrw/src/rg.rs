//! Minimal nonnegative solutions of the matrix quadratic equations
//!
//! ```text
//! R = R^2 A_{-1} + R A_0 + A_1        (rate matrix)
//! G = A_{-1} + A_0 G + A_1 G^2        (first-passage matrix)
//! ```
//!
//! together with the fundamental block N = (I - H)^{-1}, H = A_0 + A_1 G,
//! and the Wiener-Hopf residual check
//!
//! ```text
//! I - A_*(z) = (I - zR)(I - H)(I - z^{-1}G),   A_*(z) = z^{-1}A_{-1} + A_0 + zA_1.
//! ```
//!
//! Both solvers run the natural fixed-point iteration from X_0 = O. The
//! iterates are elementwise nondecreasing and converge to the minimal
//! nonnegative solution exactly when one exists; when none exists the
//! iterates grow without bound and the divergence guard reports it. The
//! iterations are kept in this plain form (rather than Newton or
//! logarithmic-reduction schemes) because their monotonicity is itself part
//! of the tested contract.

use crate::dense::{positive, Mat};
use crate::error::{Error, Result};
use crate::phase::{self, PhaseMatrix};

/// Options for the fixed-point solvers.
#[derive(Debug, Clone)]
pub struct RgOptions {
    /// Stop when successive iterates differ by less than this in sup norm.
    pub tol: f64,
    /// Hard iteration budget.
    pub max_iter: usize,
    /// Any entry above this aborts with a divergence diagnosis.
    pub divergence_guard: f64,
}

impl Default for RgOptions {
    fn default() -> Self {
        RgOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
            divergence_guard: 1e12,
        }
    }
}

/// Solved R, G, N, H with their fixed-point residuals.
#[derive(Debug, Clone)]
pub struct RgSolution {
    pub r: PhaseMatrix,
    pub g: PhaseMatrix,
    pub n: PhaseMatrix,
    pub h: PhaseMatrix,
    /// Total fixed-point iterations across the R and G solves.
    pub iterations: usize,
    pub residual_r: f64,
    pub residual_g: f64,
    pub residual_n: f64,
}

fn check_triplet(am1: &PhaseMatrix, a0: &PhaseMatrix, a1: &PhaseMatrix) -> Result<usize> {
    let dim = a0.dim();
    if am1.dim() != dim || a1.dim() != dim {
        return Err(Error::Validation("triplet members differ in dimension".into()));
    }
    if am1.is_zero() {
        return Err(Error::Validation(
            "A_{-1} is zero; the operator never moves down".into(),
        ));
    }
    if a1.is_zero() {
        return Err(Error::Validation(
            "A_1 is zero; the operator never moves up".into(),
        ));
    }
    Ok(dim)
}

enum Quadratic {
    // X = A_{-1} + A_0 X + A_1 X^2
    G,
    // X = X^2 A_{-1} + X A_0 + A_1
    R,
}

impl Quadratic {
    fn name(&self) -> &'static str {
        match self {
            Quadratic::G => "solve_g",
            Quadratic::R => "solve_r",
        }
    }

    fn step(&self, x: &Mat, am1: &Mat, a0: &Mat, a1: &Mat) -> Mat {
        match self {
            Quadratic::G => {
                // A_{-1} + A_0 X + A_1 X X
                let mut next = am1.clone();
                next = next.add(&a0.matmul(x));
                next.add(&a1.matmul(&x.matmul(x)))
            }
            Quadratic::R => {
                let mut next = a1.clone();
                next = next.add(&x.matmul(a0));
                next.add(&x.matmul(x).matmul(am1))
            }
        }
    }
}

fn fixed_point(
    which: Quadratic,
    am1: &PhaseMatrix,
    a0: &PhaseMatrix,
    a1: &PhaseMatrix,
    opts: &RgOptions,
) -> Result<(PhaseMatrix, usize)> {
    let dim = check_triplet(am1, a0, a1)?;
    let (am1, a0, a1) = (am1.as_mat(), a0.as_mat(), a1.as_mat());
    let mut x = Mat::zeros(dim, dim);
    let mut diff_at_checkpoint = f64::INFINITY;
    let mut last_diff = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = which.step(&x, am1, a0, a1);
        if next.max_entry() > opts.divergence_guard {
            return Err(Error::Diverged {
                op: which.name(),
                guard: opts.divergence_guard,
            });
        }
        let diff = next.sub(&x).sup_norm();
        last_diff = diff;
        x = next;
        if diff < opts.tol {
            return Ok((PhaseMatrix::from_mat(x)?, it));
        }
        // Every 1000 iterations project the remaining work from the local
        // geometric rate; sublinear tails (null-recurrent boundaries) are cut
        // off here instead of spinning to the hard cap.
        if it % 1000 == 0 {
            if diff_at_checkpoint.is_finite() && diff > 0.0 {
                let ratio = diff / diff_at_checkpoint;
                if ratio >= 1.0 {
                    return Err(Error::SolverLimit {
                        op: which.name(),
                        iterations: it,
                        diff,
                        last: x,
                    });
                }
                let per_iter = ratio.powf(1.0 / 1000.0);
                let needed = (opts.tol / diff).ln() / per_iter.ln();
                if needed.is_finite() && it as f64 + needed > opts.max_iter as f64 {
                    return Err(Error::SolverLimit {
                        op: which.name(),
                        iterations: it,
                        diff,
                        last: x,
                    });
                }
            }
            diff_at_checkpoint = diff;
        }
    }
    Err(Error::SolverLimit {
        op: which.name(),
        iterations: opts.max_iter,
        diff: last_diff,
        last: x,
    })
}

/// Minimal nonnegative solution of G = A_{-1} + A_0 G + A_1 G^2, as the limit
/// of X_0 = O, X_n = A_{-1} + A_0 X_{n-1} + A_1 X_{n-1}^2.
pub fn solve_g(
    am1: &PhaseMatrix,
    a0: &PhaseMatrix,
    a1: &PhaseMatrix,
    opts: &RgOptions,
) -> Result<(PhaseMatrix, usize)> {
    fixed_point(Quadratic::G, am1, a0, a1, opts)
}

/// Minimal nonnegative solution of R = R^2 A_{-1} + R A_0 + A_1, as the limit
/// of X_0 = O, X_n = X_{n-1}^2 A_{-1} + X_{n-1} A_0 + A_1.
pub fn solve_r(
    am1: &PhaseMatrix,
    a0: &PhaseMatrix,
    a1: &PhaseMatrix,
    opts: &RgOptions,
) -> Result<(PhaseMatrix, usize)> {
    fixed_point(Quadratic::R, am1, a0, a1, opts)
}

/// N = sum_k H^k with H = A_0 + A_1 G, computed by the direct linear solve
/// (I - H) N = I. Requires spr(H) < 1, which is exactly where the spectral
/// infimum condition bites.
pub fn compute_n(
    a0: &PhaseMatrix,
    a1: &PhaseMatrix,
    g: &PhaseMatrix,
    tol: f64,
) -> Result<PhaseMatrix> {
    let h = a0.add(&a1.matmul(g));
    let spr_h = phase::spectral_radius(&h, (tol * 1e-2).clamp(1e-14, 1e-10))?;
    if spr_h >= 1.0 - 1e-9 {
        return Err(Error::NearSingular { spectral_radius: spr_h });
    }
    let dim = a0.dim();
    let mut i_minus_h = Mat::identity(dim);
    i_minus_h.axpy(-1.0, h.as_mat());
    let n = i_minus_h.solve_mat(&Mat::identity(dim))?;
    let residual = n
        .sub(&Mat::identity(dim))
        .sub(&h.as_mat().matmul(&n))
        .sup_norm();
    if residual > tol * n.sup_norm().max(1.0) {
        return Err(Error::NearSingular { spectral_radius: spr_h });
    }
    PhaseMatrix::from_mat_clamped(n, 1e-10)
}

/// Solve R, G, N, H for a triplet and report all fixed-point residuals.
pub fn solve(
    am1: &PhaseMatrix,
    a0: &PhaseMatrix,
    a1: &PhaseMatrix,
    opts: &RgOptions,
) -> Result<RgSolution> {
    let (g, g_iters) = solve_g(am1, a0, a1, opts)?;
    let (r, r_iters) = solve_r(am1, a0, a1, opts)?;
    let n = compute_n(a0, a1, &g, opts.tol.max(1e-12) * 1e3)?;
    let h = a0.add(&a1.matmul(&g));

    let residual_r = {
        let rhs = r
            .matmul(&r)
            .matmul(am1)
            .add(&r.matmul(a0))
            .add(a1);
        r.as_mat().sub(rhs.as_mat()).sup_norm()
    };
    let residual_g = {
        let rhs = am1.add(&a0.matmul(&g)).add(&a1.matmul(&g.matmul(&g)));
        g.as_mat().sub(rhs.as_mat()).sup_norm()
    };
    let residual_n = {
        let hn = h.matmul(&n);
        n.as_mat()
            .sub(&Mat::identity(n.dim()))
            .sub(hn.as_mat())
            .sup_norm()
    };

    Ok(RgSolution {
        r,
        g,
        n,
        h,
        iterations: g_iters + r_iters,
        residual_r,
        residual_g,
        residual_n,
    })
}

/// Sup-norm defect of the Wiener-Hopf factorization at z:
/// || (I - A_*(z)) - (I - zR)(I - H)(I - z^{-1}G) ||.
pub fn wiener_hopf_residual(
    am1: &PhaseMatrix,
    a0: &PhaseMatrix,
    a1: &PhaseMatrix,
    sol: &RgSolution,
    z: f64,
) -> Result<f64> {
    if !positive(z) {
        return Err(Error::Domain(format!("wiener_hopf_residual requires z > 0, got {z}")));
    }
    let dim = a0.dim();
    let id = Mat::identity(dim);

    let mut a_star = am1.as_mat().scaled(1.0 / z);
    a_star = a_star.add(a0.as_mat());
    a_star.axpy(z, a1.as_mat());
    let lhs = id.sub(&a_star);

    let f1 = id.sub(&sol.r.as_mat().scaled(z));
    let f2 = id.sub(sol.h.as_mat());
    let f3 = id.sub(&sol.g.as_mat().scaled(1.0 / z));
    let rhs = f1.matmul(&f2).matmul(&f3);

    Ok(lhs.sub(&rhs).sup_norm())
}
