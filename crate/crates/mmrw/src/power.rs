//! Shifted power iteration for the spectral radius of nonnegative matrices.
//!
//! Iterates on M + cI with c = max diagonal + 1 so that periodic patterns
//! (permutation blocks, bipartite chains) still yield a primitive operator.
//! Stopping uses the Collatz-Wielandt quotients of the strictly positive
//! iterate: min_j (Bv)_j / v_j <= spr(B) <= max_j (Bv)_j / v_j for
//! irreducible B, so the returned value carries a certified bracket width.

use crate::error::{Error, Result};

/// Spectral radius of the nonnegative operator given by `apply` (y = M x),
/// assumed irreducible on its nonzero pattern. `shift` must be at least
/// max diagonal + 1 and strictly positive.
pub(crate) fn spr_shifted_power<F>(
    apply: F,
    dim: usize,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    debug_assert!(shift > 0.0);
    if dim == 0 {
        return Err(Error::Domain("empty operator".into()));
    }
    let mut v = vec![1.0; dim];
    let mut y = vec![0.0; dim];
    let mut bracket = (0.0, f64::INFINITY);
    for _ in 1..=max_iter {
        apply(&v, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sup = 0.0f64;
        for (yi, &vi) in y.iter_mut().zip(v.iter()) {
            *yi += shift * vi;
            let q = *yi / vi;
            lo = lo.min(q);
            hi = hi.max(q);
            sup = sup.max(*yi);
        }
        bracket = (lo, hi);
        if hi - lo <= tol * hi.abs().max(1.0) {
            return Ok(0.5 * (lo + hi) - shift);
        }
        if sup <= 0.0 || !sup.is_finite() {
            return Err(Error::Structure(
                "power iteration produced a nonpositive or nonfinite iterate".into(),
            ));
        }
        let inv = 1.0 / sup;
        for (vi, &yi) in v.iter_mut().zip(y.iter()) {
            *vi = yi * inv;
        }
    }
    Err(Error::PowerIterationLimit {
        iterations: max_iter,
        estimate: 0.5 * (bracket.0 + bracket.1) - shift,
        width: bracket.1 - bracket.0,
    })
}

/// Like `spr_shifted_power` but also returns the (sup-normalized) right
/// Perron vector of the unshifted operator.
pub(crate) fn perron_right<F>(
    apply: F,
    dim: usize,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut v = vec![1.0; dim];
    let mut y = vec![0.0; dim];
    let mut best = (0.0, f64::INFINITY);
    for _ in 1..=max_iter {
        apply(&v, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sup = 0.0f64;
        for (yi, &vi) in y.iter_mut().zip(v.iter()) {
            *yi += shift * vi;
            let q = *yi / vi;
            lo = lo.min(q);
            hi = hi.max(q);
            sup = sup.max(*yi);
        }
        best = (lo, hi);
        let value = 0.5 * (lo + hi) - shift;
        // The vector residual must meet tol as well; the bracket alone can
        // close before the eigenvector locks in.
        if hi - lo <= tol * hi.abs().max(1.0) {
            let mut resid = 0.0f64;
            for (yi, &vi) in y.iter().zip(v.iter()) {
                resid = resid.max((yi - (value + shift) * vi).abs());
            }
            if resid <= tol * (value.abs() + shift).max(1.0) {
                let inv = 1.0 / sup;
                let vec = y.iter().map(|&yi| yi * inv).collect();
                return Ok((value, vec));
            }
        }
        if sup <= 0.0 || !sup.is_finite() {
            return Err(Error::Structure(
                "power iteration produced a nonpositive or nonfinite iterate".into(),
            ));
        }
        let inv = 1.0 / sup;
        for (vi, &yi) in v.iter_mut().zip(y.iter()) {
            *vi = yi * inv;
        }
    }
    Err(Error::PowerIterationLimit {
        iterations: max_iter,
        estimate: 0.5 * (best.0 + best.1) - shift,
        width: best.1 - best.0,
    })
}
