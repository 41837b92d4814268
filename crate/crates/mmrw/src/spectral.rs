//! Spectral functions of a modulated-walk kernel and the region they carve.
//!
//! For positive weights z = (z1, z2, z3) the matrix
//! A(z) = sum_k z1^{k1} z2^{k2} z3^{k3} A_k is nonnegative and irreducible
//! whenever the kernel is; chi(z) is its Perron-Frobenius eigenvalue. In
//! log-coordinates s = log z, chi(e^s) is superconvex (its logarithm is
//! convex), it equals 1 at s = 0 for stochastic kernels, and its gradient
//! there is the mean drift vector. The convex body
//!
//! ```text
//! Gamma = { s in R^3 : chi(e^s) <= 1 }
//! ```
//!
//! is bounded, and its directional extremes s_i^max give lower bounds
//! e^{s_i^max} on the directional decay rates of occupation measures.
//!
//! Partially weighted variants (chi with one or two coordinates kept as
//! unbounded levels) are evaluated through finite truncations; those values
//! increase with the truncation level and approach the countable-operator
//! value from below, so they are reported as monotone lower bounds and never
//! extrapolated.

use crate::dense::{positive, Mat};
use crate::error::{Error, Result};
use crate::model::{Axis, MmrwModel};
use crate::phase;
use crate::tridiag;

/// Perron root of the fully weighted matrix A(z1, z2, z3).
pub fn chi(model: &MmrwModel, z: [f64; 3]) -> Result<f64> {
    let a = model.a_star_weighted(z)?;
    phase::spectral_radius(&a, CHI_EVAL_TOL)
}

/// Internal accuracy of a single chi evaluation.
const CHI_EVAL_TOL: f64 = 1e-12;

/// Which spectral function a [`ChiFunction`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiMode {
    /// All coordinates weighted: Perron root of a finite matrix.
    Finite,
    /// Some coordinates kept as levels: spectral radius of an L-truncation,
    /// a lower bound that is monotone nondecreasing in L.
    Truncated { level: usize },
}

/// A reusable evaluator for chi and its partially weighted variants.
#[derive(Debug, Clone, Copy)]
pub struct ChiFunction<'m> {
    model: &'m MmrwModel,
    weighted: [bool; 3],
    level: usize,
}

impl<'m> ChiFunction<'m> {
    /// chi(z1, z2, z3) over the finite phase set.
    pub fn finite(model: &'m MmrwModel) -> Result<Self> {
        if !phase::is_irreducible(&model.a_star_all()) {
            return Err(Error::Structure("phase process is reducible".into()));
        }
        Ok(ChiFunction { model, weighted: [true; 3], level: 0 })
    }

    /// A variant with only `weighted` coordinates carrying z-weights; the
    /// kept coordinates are truncated at `level` levels each.
    pub fn truncated(model: &'m MmrwModel, weighted: [bool; 3], level: usize) -> Result<Self> {
        if weighted.iter().all(|&w| w) {
            return Err(Error::Domain(
                "all coordinates weighted; use ChiFunction::finite".into(),
            ));
        }
        if level < 1 {
            return Err(Error::Domain("truncation level must be >= 1".into()));
        }
        Ok(ChiFunction { model, weighted, level })
    }

    pub fn mode(&self) -> ChiMode {
        if self.weighted.iter().all(|&w| w) {
            ChiMode::Finite
        } else {
            ChiMode::Truncated { level: self.level }
        }
    }

    /// Evaluate at z; entries of `z` for kept coordinates are ignored.
    pub fn eval(&self, z: [f64; 3], tol: f64) -> Result<f64> {
        match self.mode() {
            ChiMode::Finite => {
                let a = self.model.a_star_weighted(z)?;
                phase::spectral_radius(&a, tol)
            }
            ChiMode::Truncated { level } => {
                let mut weights = [None; 3];
                for i in 0..3 {
                    if self.weighted[i] {
                        weights[i] = Some(z[i]);
                    }
                }
                let op = self.model.marginal(weights)?;
                tridiag::cp_truncated(&op, level, tol)
            }
        }
    }
}

/// Truncated evaluation of the nested spectral functions along `axis`:
/// with `z_second = None` this is the one-parameter variant (only the axis
/// coordinate weighted); with `z_second = Some(w)` the lower-indexed
/// remaining coordinate is weighted as well, leaving a single kept level.
pub fn chi_nested(
    model: &MmrwModel,
    axis: Axis,
    z_axis: f64,
    z_second: Option<f64>,
    level: usize,
    tol: f64,
) -> Result<f64> {
    let i = axis.index();
    let mut weights = [None; 3];
    weights[i] = Some(z_axis);
    if let Some(w) = z_second {
        let outer = (0..3).find(|&c| c != i).expect("two coordinates remain");
        weights[outer] = Some(w);
    }
    let op = model.marginal(weights)?;
    tridiag::cp_truncated(&op, level, tol)
}

/// Mean drift vector of the level process under the stationary phase law:
/// a_i = pi (U_i - D_i) e with U_i, D_i the summed up- and down-blocks of
/// coordinate i.
pub fn mean_drift(model: &MmrwModel) -> Result<[f64; 3]> {
    let a_star = model.a_star_all();
    let pi = phase::stationary_distribution(&a_star, 1e-10)?;
    let mut drift = [0.0; 3];
    for (k, m) in model.blocks() {
        let ks = [k.0, k.1, k.2];
        let rows = m.row_sums();
        let weight: f64 = pi.iter().zip(&rows).map(|(p, r)| p * r).sum();
        for i in 0..3 {
            drift[i] += ks[i] as f64 * weight;
        }
    }
    Ok(drift)
}

// ---------------------------------------------------------------------------
// derivative-free minimization of the (super)convex objectives
// ---------------------------------------------------------------------------

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimize a convex scalar function by golden-section search after sliding a
/// doubling bracket around `x0`. Flat directions are fine: equal endpoint
/// values already bracket.
fn golden_min<F>(mut f: F, x0: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut m = x0;
    let mut fm = f(m)?;
    let mut step = 1.0;
    let mut a = x0 - step;
    let mut fa = f(a)?;
    let mut b = x0 + step;
    let mut fb = f(b)?;
    let mut slides = 0;
    while fa < fm || fb < fm {
        if slides > 120 {
            return Err(Error::Domain(
                "descent direction appears unbounded; objective is not coercive".into(),
            ));
        }
        slides += 1;
        step *= 2.0;
        if fa < fm {
            b = m;
            fb = fm;
            m = a;
            fm = fa;
            a = m - step;
            fa = f(a)?;
        } else {
            a = m;
            fa = fm;
            m = b;
            fm = fb;
            b = m + step;
            fb = f(b)?;
        }
    }
    let mut x1 = b - GOLDEN * (b - a);
    let mut f1 = f(x1)?;
    let mut x2 = a + GOLDEN * (b - a);
    let mut f2 = f(x2)?;
    while b - a > xtol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2)?;
        }
    }
    let xm = 0.5 * (a + b);
    let fxm = f(xm)?;
    Ok((xm, fxm))
}

/// Cyclic golden-section descent over the `active` coordinates of a jointly
/// convex objective. At least `min_sweeps` passes run; the search stops when
/// a full sweep improves the objective by less than `sweep_tol`.
fn coordinate_descent<F>(
    f: &F,
    start: [f64; 3],
    active: &[usize],
    xtol: f64,
    sweep_tol: f64,
    min_sweeps: usize,
    max_sweeps: usize,
) -> Result<([f64; 3], f64)>
where
    F: Fn([f64; 3]) -> Result<f64>,
{
    let mut s = start;
    let mut best = f(s)?;
    for sweep in 0..max_sweeps {
        let before = best;
        for &c in active {
            let (x, fx) = golden_min(
                |t| {
                    let mut p = s;
                    p[c] = t;
                    f(p)
                },
                s[c],
                xtol,
            )?;
            if fx <= best {
                s[c] = x;
                best = fx;
            }
        }
        if sweep + 1 >= min_sweeps && before - best < sweep_tol {
            return Ok((s, best));
        }
    }
    Err(Error::SolverLimit {
        op: "coordinate descent",
        iterations: max_sweeps,
        diff: f64::NAN,
        last: Mat::from_vec(1, 3, s.to_vec()).expect("3-vector"),
    })
}

/// Global minimum of chi over positive weights, by coordinate-wise
/// golden-section descent on log chi(e^s) (valid because the objective is
/// convex there). Returns the infimum and the minimizer in s-coordinates.
pub fn gamma_star(model: &MmrwModel, tol: f64) -> Result<(f64, [f64; 3])> {
    if !positive(tol) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if !phase::is_irreducible(&model.a_star_all()) {
        return Err(Error::Structure("phase process is reducible".into()));
    }
    let objective = |s: [f64; 3]| -> Result<f64> {
        let z = [s[0].exp(), s[1].exp(), s[2].exp()];
        Ok(chi(model, z)?.ln())
    };
    let xtol = (tol * 1e-2).clamp(1e-13, 1e-9);
    let (s, logv) = coordinate_descent(&objective, [0.0; 3], &[0, 1, 2], xtol, tol, 3, 400)?;
    Ok((logv.exp(), s))
}

/// Minimum of chi(e^s) over the two coordinates other than `axis`, with
/// s_axis held at `s_fixed`. The extreme coordinate s_i^max of the region is
/// exactly the largest s_fixed keeping this at or below 1.
pub fn directional_min(model: &MmrwModel, axis: Axis, s_fixed: f64, tol: f64) -> Result<f64> {
    let i = axis.index();
    let others: Vec<usize> = (0..3).filter(|&c| c != i).collect();
    let objective = |s: [f64; 3]| -> Result<f64> {
        let z = [s[0].exp(), s[1].exp(), s[2].exp()];
        Ok(chi(model, z)?.ln())
    };
    let mut start = [0.0; 3];
    start[i] = s_fixed;
    let xtol = (tol * 1e-2).clamp(1e-13, 1e-9);
    let (_, logv) = coordinate_descent(&objective, start, &others, xtol, tol, 3, 400)?;
    Ok(logv.exp())
}

/// The two real roots of chi(z) = 1 for a one-parameter spectral function,
/// bracketed by doubling away from the minimizer and pinned by bisection.
/// Returns (zeta_lower, zeta_upper); when the infimum sits within `tol` of 1
/// the roots coincide at the minimizer.
pub fn zeta_roots<F>(chi_1d: F, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    if !positive(tol) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let in_s = |s: f64| chi_1d(s.exp());
    let xtol = (tol * 1e-4).clamp(1e-14, 1e-10);
    let (s_star, gamma) = golden_min(in_s, 0.0, xtol)?;
    if gamma > 1.0 + tol {
        return Err(Error::NoRoot { gamma_star: gamma });
    }
    if gamma >= 1.0 - tol {
        let z = s_star.exp();
        return Ok((z, z));
    }
    let root = |sign: f64| -> Result<f64> {
        let mut inside = s_star;
        let mut step = 0.5;
        let mut outside = inside + sign * step;
        let mut guard = 0;
        while in_s(outside)? <= 1.0 {
            inside = outside;
            step *= 2.0;
            outside = inside + sign * step;
            guard += 1;
            if guard > 200 {
                return Err(Error::Domain("chi(z) = 1 has no bracketable root".into()));
            }
        }
        let (mut lo, mut hi) = (inside, outside);
        while (hi - lo).abs() > xtol {
            let mid = 0.5 * (lo + hi);
            if in_s(mid)? <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    };
    let upper = root(1.0)?;
    let lower = root(-1.0)?;
    Ok((lower, upper))
}

/// One traced point of the chi = 1 surface.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub s: [f64; 3],
    pub chi: f64,
}

/// The spectral region summary: the infimum of chi, the directional extreme
/// coordinates of { s : chi(e^s) <= 1 } in both log and plain scale, the mean
/// drift, and traced boundary points.
#[derive(Debug, Clone)]
pub struct GammaReport {
    pub gamma_star: f64,
    pub argmin: [f64; 3],
    pub s_max: [f64; 3],
    pub s_min: [f64; 3],
    pub z_max: [f64; 3],
    pub z_min: [f64; 3],
    pub drift: [f64; 3],
    pub boundary_samples: Vec<BoundarySample>,
    /// gamma_star = 1: the region degenerates to the single point argmin.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct GammaOptions {
    /// Bisection accuracy for the extreme coordinates, in s-space.
    pub s_tol: f64,
    /// Stop rule for the inner coordinate descents (on log chi).
    pub sweep_tol: f64,
    /// Number of boundary rays traced from the minimizer.
    pub n_boundary: usize,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            s_tol: 1e-8,
            sweep_tol: 1e-11,
            n_boundary: 0,
        }
    }
}

/// Compute the full region report. Requires an irreducible stochastic kernel
/// with gamma_star <= 1; gamma_star > 1 yields an empty-region error.
pub fn gamma_region(model: &MmrwModel, opts: &GammaOptions) -> Result<GammaReport> {
    let drift = mean_drift(model)?;
    let (gamma, argmin) = gamma_star(model, opts.sweep_tol)?;
    let degenerate_band = 1e-9;
    if gamma > 1.0 + degenerate_band {
        return Err(Error::EmptyRegion { gamma_star: gamma });
    }

    let objective = |s: [f64; 3]| -> Result<f64> {
        let z = [s[0].exp(), s[1].exp(), s[2].exp()];
        Ok(chi(model, z)?.ln())
    };

    if gamma >= 1.0 - degenerate_band {
        let z = [argmin[0].exp(), argmin[1].exp(), argmin[2].exp()];
        return Ok(GammaReport {
            gamma_star: gamma,
            argmin,
            s_max: argmin,
            s_min: argmin,
            z_max: z,
            z_min: z,
            drift,
            boundary_samples: vec![BoundarySample { s: argmin, chi: gamma }],
            degenerate: true,
        });
    }

    let xtol = (opts.sweep_tol * 1e-2).clamp(1e-13, 1e-9);
    let mut s_max = [0.0; 3];
    let mut s_min = [0.0; 3];
    for i in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&c| c != i).collect();
        for (sign, out) in [(1.0, &mut s_max), (-1.0, &mut s_min)] {
            // Inner minimization over the other two coordinates, warm-started
            // along the bisection path.
            let mut warm = argmin;
            let inner = |t: f64, warm: &mut [f64; 3]| -> Result<f64> {
                warm[i] = t;
                let (p, v) =
                    coordinate_descent(&objective, *warm, &others, xtol, opts.sweep_tol, 3, 400)?;
                *warm = p;
                Ok(v.exp())
            };
            // 0 and the minimizer are both inside the region.
            let mut lo = if sign > 0.0 {
                argmin[i].max(0.0)
            } else {
                argmin[i].min(0.0)
            };
            let mut step = 0.5;
            let mut hi = lo + sign * step;
            let mut guard = 0;
            while inner(hi, &mut warm)? <= 1.0 {
                lo = hi;
                step *= 2.0;
                hi = lo + sign * step;
                guard += 1;
                if guard > 60 {
                    return Err(Error::Domain(
                        "spectral region appears unbounded along a coordinate".into(),
                    ));
                }
            }
            while (hi - lo).abs() > opts.s_tol {
                let mid = 0.5 * (lo + hi);
                if inner(mid, &mut warm)? <= 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out[i] = 0.5 * (lo + hi);
        }
    }

    let mut boundary_samples = Vec::with_capacity(opts.n_boundary);
    let golden_angle = std::f64::consts::PI * (1.0 + 5f64.sqrt());
    for k in 0..opts.n_boundary {
        let frac = (k as f64 + 0.5) / opts.n_boundary as f64;
        let cos_phi = 1.0 - 2.0 * frac;
        let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
        let theta = golden_angle * (k as f64 + 0.5);
        let dir = [sin_phi * theta.cos(), sin_phi * theta.sin(), cos_phi];
        let chi_at = |t: f64| -> Result<f64> {
            let s = [
                argmin[0] + t * dir[0],
                argmin[1] + t * dir[1],
                argmin[2] + t * dir[2],
            ];
            chi(model, [s[0].exp(), s[1].exp(), s[2].exp()])
        };
        let mut lo = 0.0;
        let mut step = 0.25;
        let mut hi = step;
        let mut guard = 0;
        while chi_at(hi)? <= 1.0 {
            lo = hi;
            step *= 2.0;
            hi = lo + step;
            guard += 1;
            if guard > 60 {
                return Err(Error::Domain("boundary ray escaped the region bound".into()));
            }
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if chi_at(mid)? <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let s = [
            argmin[0] + t * dir[0],
            argmin[1] + t * dir[1],
            argmin[2] + t * dir[2],
        ];
        boundary_samples.push(BoundarySample { s, chi: chi_at(t)? });
    }

    Ok(GammaReport {
        gamma_star: gamma,
        argmin,
        s_max,
        s_min,
        z_max: [s_max[0].exp(), s_max[1].exp(), s_max[2].exp()],
        z_min: [s_min[0].exp(), s_min[1].exp(), s_min[2].exp()],
        drift,
        boundary_samples,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_three_queue, QueueRates};
    use crate::phase::PhaseMatrix;

    fn three_queue(l3: f64) -> MmrwModel {
        build_three_queue(&QueueRates::new([0.1, 0.2, l3], [1.0, 1.0, 1.0]).unwrap()).unwrap()
    }

    /// 1-phase kernel moving only along coordinate 1.
    fn scalar_embedded(q: f64, r: f64, p: f64) -> MmrwModel {
        MmrwModel::new(
            1,
            vec![
                ((-1, 0, 0), PhaseMatrix::scalar(q).unwrap()),
                ((0, 0, 0), PhaseMatrix::scalar(r).unwrap()),
                ((1, 0, 0), PhaseMatrix::scalar(p).unwrap()),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn chi_is_one_at_unity_for_stochastic() {
        let m = three_queue(0.3);
        assert!((chi(&m, [1.0, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chi_separable_product_structure() {
        // With a single phase the weighted matrix is scalar, so chi is the
        // plain weighted sum.
        let m = scalar_embedded(0.3, 0.5, 0.2);
        let v = chi(&m, [1.5, 2.0, 3.0]).unwrap();
        assert!((v - (0.3 / 1.5 + 0.5 + 0.2 * 1.5)).abs() < 1e-12);
    }

    #[test]
    fn mean_drift_scalar_phase() {
        let m = scalar_embedded(0.3, 0.5, 0.2);
        let a = mean_drift(&m).unwrap();
        assert!((a[0] - (0.2 - 0.3)).abs() < 1e-12);
        assert!(a[1].abs() < 1e-14 && a[2].abs() < 1e-14);
    }

    #[test]
    fn gamma_star_scalar_embedded() {
        let m = scalar_embedded(0.3, 0.5, 0.2);
        let (g, s) = gamma_star(&m, 1e-12).unwrap();
        let expect = 0.5 + 2.0 * 0.06f64.sqrt();
        assert!((g - expect).abs() < 1e-9, "gamma {g}");
        assert!((s[0] - 0.5 * 1.5f64.ln()).abs() < 1e-5, "s1 {}", s[0]);
    }

    #[test]
    fn gamma_star_three_queue_closed_form() {
        // With unit service rates the weighted matrix is d(z) I + cyclic(z),
        // so gamma* = 1 + (2 t - lambda - 1) / nu with t = (27 l1 l2 l3)^{1/6}.
        let m = three_queue(0.3);
        let (g, s) = gamma_star(&m, 1e-12).unwrap();
        let t = (27.0 * 0.1 * 0.2 * 0.3f64).powf(1.0 / 6.0);
        let expect = 1.0 + (2.0 * t - 0.6 - 1.0) / 3.6;
        assert!((g - expect).abs() < 1e-9, "gamma {g} expect {expect}");
        for (i, l) in [0.1, 0.2, 0.3].iter().enumerate() {
            let z_expect = t / (3.0 * l);
            assert!((s[i].exp() - z_expect).abs() < 1e-4, "argmin z{i}");
        }
    }

    #[test]
    fn zeta_roots_scalar_cases() {
        let mk = |q: f64, r: f64, p: f64| move |z: f64| -> Result<f64> { Ok(q / z + r + p * z) };
        let (lo, hi) = zeta_roots(mk(0.3, 0.5, 0.2), 1e-10).unwrap();
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.5).abs() < 1e-9);
        let (lo, hi) = zeta_roots(mk(0.25, 0.5, 0.25), 1e-10).unwrap();
        assert!((lo - 1.0).abs() < 1e-6 && (hi - 1.0).abs() < 1e-6);
        let (lo, hi) = zeta_roots(mk(0.2, 0.5, 0.3), 1e-10).unwrap();
        assert!((lo - 2.0 / 3.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zeta_roots_none_above_one() {
        let err = zeta_roots(|z: f64| Ok(0.5 / z + 0.5 + 0.5 * z), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoRoot { .. }));
    }

    #[test]
    fn gamma_region_degenerate_zero_drift() {
        let m = scalar_embedded(0.25, 0.5, 0.25);
        let report = gamma_region(&m, &GammaOptions::default()).unwrap();
        assert!(report.degenerate);
        assert!(report.s_max[0].abs() < 1e-4);
        assert!(report.s_min[0].abs() < 1e-4);
    }

    #[test]
    fn gamma_region_three_queue_closed_form_extremes() {
        // Independent oracle for unit service rates: z_i^max solves
        // l_i z + (5/3) (9 l_j l_k / z)^{1/5} = lambda + 1.
        let lam = [0.1, 0.2, 0.3];
        let m = three_queue(0.3);
        let report = gamma_region(&m, &GammaOptions::default()).unwrap();
        for i in 0..3 {
            let (j, k) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let f = |z: f64| {
                lam[i] * z + (5.0 / 3.0) * (9.0 * lam[j] * lam[k] / z).powf(0.2) - 1.6
            };
            let (mut lo, mut hi) = (1.0, 50.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = 0.5 * (lo + hi);
            assert!(
                (report.z_max[i] - oracle).abs() < 1e-4,
                "direction {i}: {} vs oracle {oracle}",
                report.z_max[i]
            );
        }
        // drift must be negative in all coordinates for this load
        assert!(report.drift.iter().all(|&a| a < 0.0));
        // negative drift pushes every s_i^max strictly positive
        assert!(report.s_max.iter().all(|&s| s > 0.0));
        assert!(report.s_min.iter().all(|&s| s < 0.0));
    }

    #[test]
    fn boundary_samples_sit_on_the_surface() {
        let m = three_queue(0.3);
        let opts = GammaOptions { n_boundary: 16, ..GammaOptions::default() };
        let report = gamma_region(&m, &opts).unwrap();
        assert_eq!(report.boundary_samples.len(), 16);
        for b in &report.boundary_samples {
            assert!((b.chi - 1.0).abs() < 1e-8, "chi {}", b.chi);
        }
    }

    #[test]
    fn drift_matches_chi_gradient_at_origin() {
        let m = three_queue(0.3);
        let a = mean_drift(&m).unwrap();
        let h: f64 = 1e-5;
        for i in 0..3 {
            let mut zp = [1.0; 3];
            let mut zm = [1.0; 3];
            zp[i] = h.exp();
            zm[i] = (-h).exp();
            let grad = (chi(&m, zp).unwrap() - chi(&m, zm).unwrap()) / (2.0 * h);
            assert!((grad - a[i]).abs() < 1e-6, "coordinate {i}: {grad} vs {}", a[i]);
        }
    }

    #[test]
    fn chi_nested_lower_bound_at_level_one() {
        // L = 1 keeps only the diagonal blocks: a principal-submatrix bound.
        let m = three_queue(0.3);
        let v1 = chi_nested(&m, Axis::X1, 1.0, None, 1, 1e-10).unwrap();
        let v8 = chi_nested(&m, Axis::X1, 1.0, None, 8, 1e-10).unwrap();
        assert!(v1 <= v8 + 1e-12);
        assert!(v8 <= 1.0 + 1e-9);
    }

    /// 1-phase kernel whose offset weights factor across coordinates.
    fn product_model(w: [[f64; 3]; 3]) -> MmrwModel {
        let mut blocks = Vec::new();
        for (i1, k1) in (-1i8..=1).enumerate() {
            for (i2, k2) in (-1i8..=1).enumerate() {
                for (i3, k3) in (-1i8..=1).enumerate() {
                    let v = w[0][i1] * w[1][i2] * w[2][i3];
                    blocks.push(((k1, k2, k3), PhaseMatrix::scalar(v).unwrap()));
                }
            }
        }
        MmrwModel::new(1, blocks, None).unwrap()
    }

    #[test]
    fn chi_factors_over_independent_coordinates() {
        let w = [[0.3, 0.5, 0.2], [0.25, 0.5, 0.25], [0.1, 0.7, 0.2]];
        let m = product_model(w);
        let f = |c: usize, z: f64| w[c][0] / z + w[c][1] + w[c][2] * z;
        for z in [[0.7, 1.3, 2.0], [1.0, 1.0, 1.0], [1.8, 0.6, 1.1]] {
            let v = chi(&m, z).unwrap();
            let expect = f(0, z[0]) * f(1, z[1]) * f(2, z[2]);
            assert!((v - expect).abs() < 1e-12, "{z:?}: {v} vs {expect}");
        }
    }

    #[test]
    fn chi_nested_separable_closed_form() {
        // Keeping coordinate 3 of a product kernel leaves a tri-diagonal
        // Toeplitz factor whose L-truncation has spectral radius
        // r + 2 sqrt(qp) cos(pi/(L+1)); the weighted coordinates factor out.
        let w = [[0.3, 0.5, 0.2], [0.25, 0.5, 0.25], [0.1, 0.7, 0.2]];
        let m = product_model(w);
        let f = |c: usize, z: f64| w[c][0] / z + w[c][1] + w[c][2] * z;
        let (z1, z2) = (1.4, 0.8);
        for level in [4usize, 16, 32] {
            let got = chi_nested(&m, Axis::X1, z1, Some(z2), level, 1e-11).unwrap();
            let toeplitz = w[2][1]
                + 2.0
                    * (w[2][0] * w[2][2]).sqrt()
                    * (std::f64::consts::PI / (level as f64 + 1.0)).cos();
            let expect = f(0, z1) * f(1, z2) * toeplitz;
            assert!((got - expect).abs() < 1e-9, "L={level}: {got} vs {expect}");
        }
        // and the large-L value approaches min over z3 of the full chi from
        // below (the cosine gap at L = 64 is about 3.3e-4)
        let got = chi_nested(&m, Axis::X1, z1, Some(z2), 64, 1e-11).unwrap();
        let limit = f(0, z1) * f(1, z2) * (w[2][1] + 2.0 * (w[2][0] * w[2][2]).sqrt());
        assert!(got <= limit + 1e-10);
        assert!(limit - got < 5e-4);
    }

    #[test]
    fn mean_drift_zero_for_symmetric_marginals() {
        let w = [[0.25, 0.5, 0.25], [0.2, 0.6, 0.2], [0.15, 0.7, 0.15]];
        let m = product_model(w);
        let a = mean_drift(&m).unwrap();
        for c in 0..3 {
            assert!(a[c].abs() < 1e-14);
        }
    }

    #[test]
    fn chi_function_modes() {
        let m = three_queue(0.3);
        let fin = ChiFunction::finite(&m).unwrap();
        assert_eq!(fin.mode(), ChiMode::Finite);
        let v = fin.eval([1.0, 1.0, 1.0], 1e-11).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let tr = ChiFunction::truncated(&m, [true, false, false], 4).unwrap();
        assert_eq!(tr.mode(), ChiMode::Truncated { level: 4 });
        let tv = tr.eval([1.0, 1.0, 1.0], 1e-10).unwrap();
        assert!(tv <= 1.0 + 1e-9);
        assert!(ChiFunction::truncated(&m, [true, true, true], 4).is_err());
    }
}
