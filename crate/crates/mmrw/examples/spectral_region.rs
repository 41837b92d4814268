//! The scalar spectral function chi(z) = q/z + r + pz end to end: its
//! infimum, the two roots of chi(z) = 1, and how both reappear in the rate
//! matrix of the associated walk.
//!
//! Run with: cargo run --release --example spectral_region

use mmrw::{gamma_star, mean_drift, rg, zeta_roots, MmrwModel, PhaseMatrix, Result, RgOptions};

fn main() -> Result<()> {
    let (q, r, p) = (0.3, 0.5, 0.2);

    let chi = move |z: f64| -> Result<f64> { Ok(q / z + r + p * z) };
    let (zeta_lo, zeta_hi) = zeta_roots(chi, 1e-10)?;
    println!("chi(z) = {q}/z + {r} + {p} z");
    println!("roots of chi(z) = 1: ({zeta_lo:.8}, {zeta_hi:.8})");

    // Embed the same walk as a 3-D kernel that only moves along coordinate 1;
    // the infimum of chi over positive weights is r + 2 sqrt(qp).
    let model = MmrwModel::new(
        1,
        vec![
            ((-1, 0, 0), PhaseMatrix::scalar(q)?),
            ((0, 0, 0), PhaseMatrix::scalar(r)?),
            ((1, 0, 0), PhaseMatrix::scalar(p)?),
        ],
        None,
    )?;
    let (gamma, argmin) = gamma_star(&model, 1e-12)?;
    println!(
        "gamma* = {gamma:.9} (closed form {:.9}) at z1 = {:.6} (closed form {:.6})",
        r + 2.0 * (q * p).sqrt(),
        argmin[0].exp(),
        (q / p).sqrt()
    );
    let drift = mean_drift(&model)?;
    println!("mean drift: ({:+.3}, {:+.3}, {:+.3})", drift[0], drift[1], drift[2]);

    // cp(R) equals the larger root: spr(R) * zeta_hi = 1.
    let sol = rg::solve(
        &PhaseMatrix::scalar(q)?,
        &PhaseMatrix::scalar(r)?,
        &PhaseMatrix::scalar(p)?,
        &RgOptions::default(),
    )?;
    println!(
        "spr(R) = {:.8}, 1/zeta_upper = {:.8}",
        sol.r.get(0, 0),
        1.0 / zeta_hi
    );

    // gamma* > 1 means no roots and no nonnegative solutions.
    match zeta_roots(|z| Ok(0.5 / z + 0.5 + 0.5 * z), 1e-10) {
        Err(e) => println!("over-loaded family: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
