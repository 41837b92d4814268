//! Phase-level building blocks: spectral radius, Perron vectors, stationary
//! distributions, and irreducibility checks on small nonnegative matrices.
//!
//! Run with: cargo run --release --example perron_basics

use mmrw::{
    is_irreducible, perron_vectors, spectral_radius, stationary_distribution, PhaseMatrix, Result,
};

fn main() -> Result<()> {
    let tol = 1e-12;

    let stochastic = PhaseMatrix::new(&[vec![0.5, 0.5], vec![0.25, 0.75]])?;
    println!(
        "spectral radius of a stochastic matrix: {:.12}",
        spectral_radius(&stochastic, tol)?
    );

    let p = perron_vectors(&stochastic, tol)?;
    println!(
        "perron data: value {:.6}, left ({:.6}, {:.6}), right ({:.6}, {:.6})",
        p.value, p.left[0], p.left[1], p.right[0], p.right[1]
    );

    let pi = stationary_distribution(&stochastic, 1e-10)?;
    println!("stationary distribution: ({:.6}, {:.6})", pi[0], pi[1]);

    // A periodic pattern: the diagonal shift inside the solver handles it.
    let swap = PhaseMatrix::new(&[vec![0.0, 2.0], vec![2.0, 0.0]])?;
    println!("spectral radius of [[0,2],[2,0]]: {:.6}", spectral_radius(&swap, tol)?);

    let absorbing = PhaseMatrix::new(&[vec![0.5, 0.5], vec![0.0, 1.0]])?;
    println!(
        "irreducible? swap: {}, absorbing chain: {}",
        is_irreducible(&swap),
        is_irreducible(&absorbing)
    );

    // Reducible input is rejected where positivity of the eigenvectors would
    // be lost.
    match perron_vectors(&PhaseMatrix::identity(3), tol) {
        Err(e) => println!("perron_vectors on the identity: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
