//! Desk-scale ground truth for decay rates: occupation measures of the
//! orthant-truncated kernel on a finite box, directional slope fits of their
//! logarithms, and the one-sided verification that fitted slopes respect the
//! bounds coming from the spectral region.
//!
//! The box discards every transition that leaves it, so computed values are
//! lower bounds of the orthant quantities and increase with the box edge.
//! Slope windows keep a margin of max(4, edge/4) cells away from the upper
//! faces to limit truncation bias.

use crate::dense::Mat;
use crate::error::{Error, Result};
use crate::model::{Axis, MmrwModel};
use crate::phase::{self, PhaseMatrix};
use crate::rg::{self, RgOptions};
use crate::sparse::Csr;
use crate::spectral::GammaReport;
use crate::tridiag;

/// A state of the box-truncated walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxState {
    pub x: [usize; 3],
    pub phase: usize,
}

impl BoxState {
    pub fn new(x: [usize; 3], phase: usize) -> Self {
        BoxState { x, phase }
    }
}

impl std::fmt::Display for BoxState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{};{})", self.x[0], self.x[1], self.x[2], self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxMethod {
    IterativeSum,
    DirectSolve,
}

/// One row of the fundamental matrix of the box-truncated kernel: expected
/// visit counts to every box state before the walk leaves the box.
#[derive(Debug, Clone)]
pub struct BoxOccupation {
    edge: usize,
    s0: usize,
    pub origin: BoxState,
    values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub method: BoxMethod,
}

fn state_index(edge: usize, s0: usize, x: [usize; 3], phase: usize) -> usize {
    ((x[0] * edge + x[1]) * edge + x[2]) * s0 + phase
}

/// COO triplets of the kernel restricted to an edge^3 box (transitions that
/// leave the box are dropped).
pub(crate) fn box_kernel_coo(model: &MmrwModel, edge: usize) -> (usize, Vec<(usize, usize, f64)>) {
    let s0 = model.s0();
    let dim = edge * edge * edge * s0;
    let mut coo = Vec::new();
    for (k, m) in model.blocks() {
        let ks = [k.0 as i64, k.1 as i64, k.2 as i64];
        let mut entries = Vec::new();
        for a in 0..s0 {
            for b in 0..s0 {
                let v = m.get(a, b);
                if v != 0.0 {
                    entries.push((a, b, v));
                }
            }
        }
        if entries.is_empty() {
            continue;
        }
        let lo = |c: usize| (-ks[c]).max(0) as usize;
        let hi = |c: usize| edge - ks[c].max(0) as usize;
        for x1 in lo(0)..hi(0) {
            for x2 in lo(1)..hi(1) {
                for x3 in lo(2)..hi(2) {
                    let from = [x1, x2, x3];
                    let to = [
                        (x1 as i64 + ks[0]) as usize,
                        (x2 as i64 + ks[1]) as usize,
                        (x3 as i64 + ks[2]) as usize,
                    ];
                    for &(a, b, v) in &entries {
                        coo.push((
                            state_index(edge, s0, from, a),
                            state_index(edge, s0, to, b),
                            v,
                        ));
                    }
                }
            }
        }
    }
    (dim, coo)
}

fn check_origin(model: &MmrwModel, origin: BoxState, edge: usize) -> Result<()> {
    if edge < 2 {
        return Err(Error::Domain("box edge must be at least 2".into()));
    }
    if origin.x.iter().any(|&c| c >= edge) || origin.phase >= model.s0() {
        return Err(Error::Domain(format!(
            "origin {origin} lies outside the {edge}^3 box with {} phases",
            model.s0()
        )));
    }
    Ok(())
}

/// Occupation row by forward accumulation: v_{n+1} = delta + v_n Q, which
/// sums delta Q^m monotonically and converges geometrically while
/// spr(Q_box) < 1. Stops when the sup-norm step falls below `tol`.
pub fn fundamental_box(
    model: &MmrwModel,
    origin: BoxState,
    edge: usize,
    tol: f64,
    max_iter: usize,
) -> Result<BoxOccupation> {
    check_origin(model, origin, edge)?;
    let s0 = model.s0();
    let (dim, coo) = box_kernel_coo(model, edge);
    let kernel = Csr::from_coo(dim, coo);
    let oidx = state_index(edge, s0, origin.x, origin.phase);

    let mut v = vec![0.0; dim];
    v[oidx] = 1.0;
    let mut w = vec![0.0; dim];
    for it in 1..=max_iter {
        kernel.vecmat(&v, &mut w);
        w[oidx] += 1.0;
        let mut diff = 0.0f64;
        for (a, b) in w.iter().zip(&v) {
            diff = diff.max(a - b);
        }
        std::mem::swap(&mut v, &mut w);
        if diff < tol {
            kernel.vecmat(&v, &mut w);
            w[oidx] += 1.0;
            let residual = v
                .iter()
                .zip(&w)
                .fold(0.0f64, |r, (a, b)| r.max((a - b).abs()));
            return Ok(BoxOccupation {
                edge,
                s0,
                origin,
                values: v,
                residual,
                iterations: it,
                method: BoxMethod::IterativeSum,
            });
        }
    }
    Err(Error::SolverLimit {
        op: "fundamental_box",
        iterations: max_iter,
        diff: f64::NAN,
        last: Mat::from_vec(1, dim, v).expect("partial sums"),
    })
}

/// Occupation row by dense direct solve of v (I - Q_box) = delta; available
/// as a cross-check for boxes up to the dense size limit.
pub fn fundamental_box_direct(
    model: &MmrwModel,
    origin: BoxState,
    edge: usize,
) -> Result<BoxOccupation> {
    check_origin(model, origin, edge)?;
    let s0 = model.s0();
    let (dim, coo) = box_kernel_coo(model, edge);
    if dim > tridiag::DENSE_LIMIT {
        return Err(Error::Domain(format!(
            "direct solve limited to dimension {}, box has {dim}",
            tridiag::DENSE_LIMIT
        )));
    }
    // v (I - Q) = delta  <=>  (I - Q)^T v^T = delta^T
    let mut at = Mat::identity(dim);
    for (i, j, v) in coo {
        at.set(j, i, at.get(j, i) - v);
    }
    let mut b = vec![0.0; dim];
    b[state_index(edge, s0, origin.x, origin.phase)] = 1.0;
    let mut v = at.lu()?.solve_vec(&b);
    for x in &mut v {
        if *x < 0.0 {
            if *x < -1e-9 {
                return Err(Error::Structure(format!(
                    "direct occupation solve produced negative value {x}"
                )));
            }
            *x = 0.0;
        }
    }
    Ok(BoxOccupation {
        edge,
        s0,
        origin,
        values: v,
        residual: 0.0,
        iterations: 1,
        method: BoxMethod::DirectSolve,
    })
}

impl BoxOccupation {
    pub fn edge(&self) -> usize {
        self.edge
    }

    pub fn phases(&self) -> usize {
        self.s0
    }

    pub fn get(&self, x: [usize; 3], phase: usize) -> f64 {
        self.values[state_index(self.edge, self.s0, x, phase)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Cells kept clear of the upper faces when fitting slopes.
pub fn boundary_margin(edge: usize) -> usize {
    4.max(edge / 4)
}

/// The transverse coordinates of a directional slice: values of the two
/// non-direction coordinates (in ascending coordinate order) and the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transverse {
    pub other: [usize; 2],
    pub phase: usize,
}

#[derive(Debug, Clone)]
pub struct DecaySlopeEstimate {
    pub direction: Axis,
    pub transverse: Transverse,
    pub slope: f64,
    pub window: (usize, usize),
    pub r_squared: f64,
}

fn fit_log_slope(ns: &[f64], logs: &[f64]) -> (f64, f64) {
    let n = ns.len() as f64;
    let xm = ns.iter().sum::<f64>() / n;
    let ym = logs.iter().sum::<f64>() / n;
    let sxy: f64 = ns.iter().zip(logs).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = ns.iter().map(|x| (x - xm) * (x - xm)).sum();
    let syy: f64 = logs.iter().map(|y| (y - ym) * (y - ym)).sum();
    let slope = sxy / sxx;
    let r2 = if syy <= 1e-30 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, r2)
}

/// Least-squares slope of log q along direction `direction` over the window
/// [n_lo, n_hi], at fixed transverse coordinates.
pub fn decay_slope(
    occ: &BoxOccupation,
    direction: Axis,
    transverse: Transverse,
    window: (usize, usize),
) -> Result<DecaySlopeEstimate> {
    let (n_lo, n_hi) = window;
    let edge = occ.edge;
    if n_lo + 1 >= n_hi {
        return Err(Error::Domain("slope window needs at least two points".into()));
    }
    if n_hi + boundary_margin(edge) >= edge {
        return Err(Error::Domain(format!(
            "window upper end {n_hi} overlaps the boundary margin of the {edge}-box"
        )));
    }
    let i = direction.index();
    let others: Vec<usize> = (0..3).filter(|&c| c != i).collect();
    if transverse.other.iter().any(|&c| c >= edge) || transverse.phase >= occ.s0 {
        return Err(Error::Domain("transverse state outside the box".into()));
    }
    let mut ns = Vec::with_capacity(n_hi - n_lo + 1);
    let mut logs = Vec::with_capacity(n_hi - n_lo + 1);
    for n in n_lo..=n_hi {
        let mut x = [0usize; 3];
        x[i] = n;
        x[others[0]] = transverse.other[0];
        x[others[1]] = transverse.other[1];
        let q = occ.get(x, transverse.phase);
        if q < 1e-300 {
            return Err(Error::Underflow(format!(
                "occupation value at n={n} underflowed; shrink the window or the box"
            )));
        }
        ns.push(n as f64);
        logs.push(q.ln());
    }
    let (slope, r_squared) = fit_log_slope(&ns, &logs);
    if !slope.is_finite() {
        return Err(Error::Underflow("slope fit produced a nonfinite value".into()));
    }
    Ok(DecaySlopeEstimate {
        direction,
        transverse,
        slope,
        window,
        r_squared,
    })
}

/// One slope-versus-bound comparison.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub direction: Axis,
    pub transverse: Transverse,
    pub start: BoxState,
    pub slope: f64,
    pub bound: f64,
    pub slack: f64,
    pub r_squared: f64,
    pub pass: bool,
}

/// Agreement of slopes measured from two different starting states.
#[derive(Debug, Clone)]
pub struct AgreementCheck {
    pub direction: Axis,
    pub transverse: Transverse,
    pub slope_a: f64,
    pub slope_b: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct BoundCheckReport {
    pub edge: usize,
    pub window: (usize, usize),
    pub checks: Vec<BoundCheck>,
    pub agreements: Vec<AgreementCheck>,
}

impl BoundCheckReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.agreements.iter().all(|a| a.pass)
    }
}

impl std::fmt::Display for BoundCheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "decay-bound checks on the {}^3 box, window n in [{}, {}]",
            self.edge, self.window.0, self.window.1
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  dir {} transverse ({},{};{}) start {}: slope {:+.4} <= bound {:+.4} + {:.2} (r2 {:.4}) {}",
                c.direction,
                c.transverse.other[0],
                c.transverse.other[1],
                c.transverse.phase,
                c.start,
                c.slope,
                c.bound,
                c.slack,
                c.r_squared,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        for a in &self.agreements {
            writeln!(
                f,
                "  dir {} transverse ({},{};{}) start-agreement |{:+.4} - {:+.4}| <= {:.2} {}",
                a.direction,
                a.transverse.other[0],
                a.transverse.other[1],
                a.transverse.phase,
                a.slope_a,
                a.slope_b,
                a.tolerance,
                if a.pass { "pass" } else { "FAIL" }
            )?;
        }
        write!(
            f,
            "overall: {}",
            if self.all_pass() { "all checks pass" } else { "FAILURES present" }
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Allowed one-sided slack in log-rate units: slope <= -s_max + slack.
    pub slack: f64,
    /// Allowed slope difference between two starting states.
    pub agree_tol: f64,
    /// Fit window; None picks [max(2, n_hi - 13), edge - 1 - margin].
    pub window: Option<(usize, usize)>,
    pub box_tol: f64,
    pub max_iter: usize,
    /// Extra transverse samples beyond the origin slice.
    pub extra_transverse: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            slack: 0.15,
            agree_tol: 0.05,
            window: None,
            box_tol: 1e-14,
            max_iter: 2_000_000,
            extra_transverse: 2,
            seed: 0,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The default second starting state used by the agreement check.
pub fn second_start(origin: BoxState, edge: usize, s0: usize) -> BoxState {
    let mut second = BoxState::new([1.min(edge - 1), 1.min(edge - 1), 0], 1.min(s0 - 1));
    if second == origin {
        second = BoxState::new([0, 0, 0], 0);
    }
    second
}

/// Deterministic transverse slices: the origin slice plus `extra` seeded
/// samples near the lower faces.
pub fn transverse_samples(s0: usize, edge: usize, extra: usize, seed: u64) -> Vec<Transverse> {
    let mut transverse = vec![Transverse { other: [0, 0], phase: 0 }];
    let mut rng = seed;
    let cap = 3.min(edge);
    let limit = (cap * cap * s0).saturating_sub(1).min(extra);
    while transverse.len() < 1 + limit {
        let t = Transverse {
            other: [
                (splitmix64(&mut rng) as usize) % cap,
                (splitmix64(&mut rng) as usize) % cap,
            ],
            phase: (splitmix64(&mut rng) as usize) % s0,
        };
        if !transverse.contains(&t) {
            transverse.push(t);
        }
    }
    transverse
}

/// Default fit window for an edge: the last six cells before the boundary
/// margin. Slopes fitted closer to the origin still carry transient
/// curvature that differs between starting states.
pub fn default_window(edge: usize) -> (usize, usize) {
    let n_hi = edge - 1 - boundary_margin(edge);
    (2.max(n_hi.saturating_sub(5)), n_hi)
}

/// Verify the directional decay bounds from a computed spectral region:
/// fitted slopes must satisfy slope <= -s_i^max + slack in every direction,
/// for every sampled transverse slice, from two distinct starting states, and
/// the two starts must agree on the slope.
pub fn verify_bounds(
    model: &MmrwModel,
    region: &GammaReport,
    origin: BoxState,
    edge: usize,
    opts: &VerifyOptions,
) -> Result<BoundCheckReport> {
    let second = second_start(origin, edge, model.s0());
    let occ_a = fundamental_box(model, origin, edge, opts.box_tol, opts.max_iter)?;
    let occ_b = fundamental_box(model, second, edge, opts.box_tol, opts.max_iter)?;
    verify_bounds_with(region, &occ_a, &occ_b, opts)
}

/// Same as [`verify_bounds`], over occupation rows the caller already has.
pub fn verify_bounds_with(
    region: &GammaReport,
    occ_a: &BoxOccupation,
    occ_b: &BoxOccupation,
    opts: &VerifyOptions,
) -> Result<BoundCheckReport> {
    let edge = occ_a.edge();
    let s0 = occ_a.phases();
    if occ_b.edge() != edge || occ_b.phases() != s0 {
        return Err(Error::Domain("occupation rows come from different boxes".into()));
    }
    let margin = boundary_margin(edge);
    if edge <= margin + 3 {
        return Err(Error::Domain(format!(
            "box edge {edge} leaves no room beyond the margin {margin}"
        )));
    }
    let window = opts.window.unwrap_or_else(|| default_window(edge));
    let transverse = transverse_samples(s0, edge, opts.extra_transverse, opts.seed);

    let mut checks = Vec::new();
    let mut agreements = Vec::new();
    for axis in Axis::all() {
        let bound = -region.s_max[axis.index()];
        for &t in &transverse {
            let ea = decay_slope(occ_a, axis, t, window)?;
            let eb = decay_slope(occ_b, axis, t, window)?;
            for (occ, est) in [(&occ_a, &ea), (&occ_b, &eb)] {
                checks.push(BoundCheck {
                    direction: axis,
                    transverse: t,
                    start: occ.origin,
                    slope: est.slope,
                    bound,
                    slack: opts.slack,
                    r_squared: est.r_squared,
                    pass: est.slope <= bound + opts.slack,
                });
            }
            agreements.push(AgreementCheck {
                direction: axis,
                transverse: t,
                slope_a: ea.slope,
                slope_b: eb.slope,
                tolerance: opts.agree_tol,
                pass: (ea.slope - eb.slope).abs() <= opts.agree_tol,
            });
        }
    }

    Ok(BoundCheckReport { edge, window, checks, agreements })
}

/// Cross-check of the level-block recursion against the rate matrix of a
/// direction triplet truncated to a finite phase set.
#[derive(Debug, Clone)]
pub struct N0nReport {
    pub direction: Axis,
    pub truncation_level: usize,
    pub dim: usize,
    pub solver_iterations: usize,
    /// || N_{0,0} (I - A_0 - R A_{-1}) - I ||
    pub inverse_residual: f64,
    /// max_n || N_{0,n} - (N_{0,n-1} A_1 + N_{0,n} A_0 + N_{0,n+1} A_{-1}) ||
    pub recursion_residual: f64,
    pub box_comparison: Option<BoxComparison>,
}

#[derive(Debug, Clone)]
pub struct BoxComparison {
    pub edge: usize,
    pub entries_checked: usize,
    pub max_rel_err: f64,
}

/// Solve the direction triplet truncated at `level` levels per kept
/// coordinate, form N_{0,n} = N_{0,0} R^n, and report how well the block
/// recursion and (optionally) the box occupation reproduce it.
pub fn n0n_consistency(
    model: &MmrwModel,
    direction: Axis,
    level: usize,
    n_max: usize,
    box_edge: Option<usize>,
    tol: f64,
) -> Result<N0nReport> {
    let triplet = model.direction_triplet(direction)?;
    let levels = vec![level; 2];
    let tm1 = PhaseMatrix::from_mat(tridiag::truncate(triplet.lower(), &levels)?.to_dense())?;
    let t0 = PhaseMatrix::from_mat(tridiag::truncate(triplet.diag(), &levels)?.to_dense())?;
    let t1 = PhaseMatrix::from_mat(tridiag::truncate(triplet.upper(), &levels)?.to_dense())?;
    let dim = t0.dim();

    let opts = RgOptions { tol, ..RgOptions::default() };
    let (r, solver_iterations) = rg::solve_r(&tm1, &t0, &t1, &opts)?;

    let h = t0.add(&r.matmul(&tm1));
    let spr_h = phase::spectral_radius(&h, 1e-11)?;
    if spr_h >= 1.0 - 1e-9 {
        return Err(Error::NearSingular { spectral_radius: spr_h });
    }
    let mut m = Mat::identity(dim);
    m.axpy(-1.0, h.as_mat());
    let n00 = m.solve_mat(&Mat::identity(dim))?;
    let inverse_residual = n00.matmul(&m).sub(&Mat::identity(dim)).sup_norm();

    // N_{0,n} = N_{0,0} R^n up to n_max + 1
    let mut blocks = vec![n00.clone()];
    for n in 1..=n_max + 1 {
        let prev = &blocks[n - 1];
        blocks.push(prev.matmul(r.as_mat()));
    }
    let mut recursion_residual = 0.0f64;
    for w in blocks.windows(3) {
        let rhs = w[0]
            .matmul(t1.as_mat())
            .add(&w[1].matmul(t0.as_mat()))
            .add(&w[2].matmul(tm1.as_mat()));
        recursion_residual = recursion_residual.max(w[1].sub(&rhs).sup_norm());
    }

    let box_comparison = match box_edge {
        None => None,
        Some(edge) => {
            let origin = BoxState::new([0, 0, 0], 0);
            let occ = fundamental_box(model, origin, edge, 1e-13, 2_000_000)?;
            let i = direction.index();
            let others: Vec<usize> = (0..3).filter(|&c| c != i).collect();
            let s0 = model.s0();
            let extent = 2.min(level).min(edge);
            let floor = 1e-9;
            let mut max_rel_err = 0.0f64;
            let mut entries_checked = 0usize;
            for (n, block) in blocks.iter().take(n_max + 1).enumerate() {
                for xa in 0..extent {
                    for xb in 0..extent {
                        for j in 0..s0 {
                            let col = (xa * level + xb) * s0 + j;
                            let predicted = block.get(origin.phase, col);
                            let mut x = [0usize; 3];
                            x[i] = n;
                            x[others[0]] = xa;
                            x[others[1]] = xb;
                            let measured = occ.get(x, j);
                            if measured > floor {
                                let rel = (predicted - measured).abs() / measured;
                                max_rel_err = max_rel_err.max(rel);
                                entries_checked += 1;
                            }
                        }
                    }
                }
            }
            Some(BoxComparison { edge, entries_checked, max_rel_err })
        }
    };

    Ok(N0nReport {
        direction,
        truncation_level: level,
        dim,
        solver_iterations,
        inverse_residual,
        recursion_residual,
        box_comparison,
    })
}
