//! Rate matrix R, first-passage matrix G, and fundamental block N of a
//! quasi-birth-and-death triplet, with the Wiener-Hopf factorization residual
//! and the link between spr(R) and the largest root of chi(z) = 1.
//!
//! Run with: cargo run --release --example solve_rg

use mmrw::{rg, zeta_roots, PhaseMatrix, Result, RgOptions};

fn main() -> Result<()> {
    // Scalar birth-death walk: down 0.3, stay 0.5, up 0.2.
    let (q, r, p) = (0.3, 0.5, 0.2);
    let am1 = PhaseMatrix::scalar(q)?;
    let a0 = PhaseMatrix::scalar(r)?;
    let a1 = PhaseMatrix::scalar(p)?;
    let sol = rg::solve(&am1, &a0, &a1, &RgOptions::default())?;
    println!(
        "scalar walk: R = {:.6}, G = {:.6}, N = {:.6} ({} iterations)",
        sol.r.get(0, 0),
        sol.g.get(0, 0),
        sol.n.get(0, 0),
        sol.iterations
    );
    println!(
        "fixed-point residuals: R {:.2e}, G {:.2e}, N {:.2e}",
        sol.residual_r, sol.residual_g, sol.residual_n
    );

    // I - A_*(z) = (I - zR)(I - H)(I - G/z) should hold at every z > 0.
    for z in [0.5, 1.0, 1.5] {
        println!(
            "wiener-hopf residual at z = {z}: {:.2e}",
            rg::wiener_hopf_residual(&am1, &a0, &a1, &sol, z)?
        );
    }

    // The convergence parameter of R is the largest root of chi(z) = 1.
    let (zeta_lo, zeta_hi) = zeta_roots(|z| Ok(q / z + r + p * z), 1e-10)?;
    println!(
        "zeta roots ({zeta_lo:.6}, {zeta_hi:.6}); 1/spr(R) = {:.6}",
        1.0 / sol.r.get(0, 0)
    );

    // A 2x2 modulated triplet.
    let am1 = PhaseMatrix::new(&[vec![0.25, 0.10], vec![0.10, 0.20]])?;
    let a0 = PhaseMatrix::new(&[vec![0.30, 0.10], vec![0.15, 0.30]])?;
    let a1 = PhaseMatrix::new(&[vec![0.10, 0.05], vec![0.05, 0.10]])?;
    let sol = rg::solve(&am1, &a0, &a1, &RgOptions::default())?;
    println!("\n2x2 modulated walk:");
    for (name, m) in [("R", &sol.r), ("G", &sol.g), ("N", &sol.n)] {
        println!(
            "{name} = [[{:.6}, {:.6}], [{:.6}, {:.6}]]",
            m.get(0, 0),
            m.get(0, 1),
            m.get(1, 0),
            m.get(1, 1)
        );
    }
    // R = A_1 N and G = N A_{-1} tie the three solutions together.
    let a1n = a1.matmul(&sol.n);
    let nam1 = sol.n.matmul(&am1);
    println!(
        "identity residuals: |R - A1 N| = {:.2e}, |G - N A-1| = {:.2e}",
        sol.r.as_mat().sub(a1n.as_mat()).sup_norm(),
        sol.g.as_mat().sub(nam1.as_mat()).sup_norm()
    );
    Ok(())
}
