//! Ground truth for the decay bounds: occupation measures of the three-queue
//! kernel on a finite box, their directional log-slopes, and the one-sided
//! comparison against the spectral-region extremes.
//!
//! Run with: cargo run --release --example occupation_decay

use mmrw::model::Axis;
use mmrw::occupation::{self, Transverse};
use mmrw::{
    build_three_queue, decay_slope, fundamental_box, gamma_region, n0n_consistency,
    verify_bounds, BoxState, GammaOptions, QueueRates, Result, VerifyOptions,
};

fn main() -> Result<()> {
    let rates = QueueRates::new([0.1, 0.2, 0.3], [1.0, 1.0, 1.0])?;
    let model = build_three_queue(&rates)?;
    let edge = 24;

    let origin = BoxState::new([0, 0, 0], 0);
    let occ = fundamental_box(&model, origin, edge, 1e-14, 1_000_000)?;
    println!(
        "occupation row from {origin} on the {edge}^3 box: {} iterations, residual {:.2e}",
        occ.iterations, occ.residual
    );
    println!("visit counts along direction 1 (other coordinates at 0, phase 0):");
    for n in 0..8 {
        println!("  n = {n}: {:.6e}", occ.get([n, 0, 0], 0));
    }

    let window = occupation::default_window(edge);
    for axis in Axis::all() {
        let est = decay_slope(&occ, axis, Transverse { other: [0, 0], phase: 0 }, window)?;
        println!(
            "direction {}: fitted slope {:+.4} over n in [{}, {}] (r^2 = {:.5})",
            axis, est.slope, window.0, window.1, est.r_squared
        );
    }

    let region = gamma_region(&model, &GammaOptions::default())?;
    println!(
        "\nspectral bounds: slopes must stay below ({:+.4}, {:+.4}, {:+.4}) + slack",
        -region.s_max[0], -region.s_max[1], -region.s_max[2]
    );
    let report = verify_bounds(&model, &region, origin, edge, &VerifyOptions::default())?;
    println!("{report}");

    // Level-block consistency: N_{0,n} = N_{0,0} R^n for the direction-1
    // triplet truncated to a finite phase set.
    let n0n = n0n_consistency(&model, Axis::X1, 6, 3, Some(16), 1e-12)?;
    println!(
        "\nlevel-block recursion at truncation {} (dim {}): inverse residual {:.2e}, recursion residual {:.2e}",
        n0n.truncation_level, n0n.dim, n0n.inverse_residual, n0n.recursion_residual
    );
    if let Some(cmp) = n0n.box_comparison {
        println!(
            "against the {}-box occupation: {} entries, max relative error {:.2e}",
            cmp.edge, cmp.entries_checked, cmp.max_rel_err
        );
    }
    Ok(())
}
