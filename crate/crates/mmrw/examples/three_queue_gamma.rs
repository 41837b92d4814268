//! The headline computation: build the three-queue cyclic-service kernel,
//! validate it, and compute the spectral region whose directional extremes
//! bound the decay rates of its occupation measures.
//!
//! Run with: cargo run --release --example three_queue_gamma

use mmrw::{build_three_queue, gamma_region, validate, GammaOptions, QueueRates, Result};

fn main() -> Result<()> {
    for lambda3 in [0.3, 0.6] {
        let rates = QueueRates::new([0.1, 0.2, lambda3], [1.0, 1.0, 1.0])?;
        let model = build_three_queue(&rates)?;

        println!("=== lambda = (0.1, 0.2, {lambda3}), mu = (1, 1, 1) ===");
        let report = validate(&model);
        println!("{report}\n");
        if !report.all_pass() {
            continue;
        }

        let opts = GammaOptions { n_boundary: 8, ..GammaOptions::default() };
        let region = gamma_region(&model, &opts)?;
        println!(
            "gamma* = {:.6} at z* = ({:.4}, {:.4}, {:.4})",
            region.gamma_star,
            region.argmin[0].exp(),
            region.argmin[1].exp(),
            region.argmin[2].exp()
        );
        println!(
            "z_max = ({:.4}, {:.4}, {:.4})",
            region.z_max[0], region.z_max[1], region.z_max[2]
        );
        println!(
            "z_min = ({:.4}, {:.4}, {:.4})",
            region.z_min[0], region.z_min[1], region.z_min[2]
        );
        println!("decay-rate lower bounds per direction (log scale):");
        for i in 0..3 {
            println!(
                "  direction {}: occupation tails decay at least like exp(-{:.4} n)",
                i + 1,
                region.s_max[i]
            );
        }
        println!("sample boundary points of the region (chi = 1):");
        for b in region.boundary_samples.iter().take(4) {
            println!(
                "  s = ({:+.4}, {:+.4}, {:+.4}), chi = {:.9}",
                b.s[0], b.s[1], b.s[2], b.chi
            );
        }
        println!();
    }
    Ok(())
}
