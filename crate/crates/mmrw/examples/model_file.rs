//! The model file format: write a kernel as JSON, read it back, validate it,
//! and look at the marginal operators the spectral machinery consumes.
//!
//! Run with: cargo run --release --example model_file

use mmrw::{build_three_queue, validate, MmrwModel, QueueRates, Result};

fn main() -> Result<()> {
    let rates = QueueRates::new([0.1, 0.2, 0.3], [1.0, 1.0, 1.0])?;
    let model = build_three_queue(&rates)?;

    let path = std::env::temp_dir().join("three_queue_model.json");
    model.write_file(&path)?;
    println!("model written to {}", path.display());

    let text = std::fs::read_to_string(&path)?;
    let first_lines: Vec<&str> = text.lines().take(12).collect();
    println!("file head:\n{}\n...", first_lines.join("\n"));

    let back = MmrwModel::read_file(&path)?;
    println!(
        "reloaded: {} phases, {} nonzero blocks",
        back.s0(),
        back.blocks().count()
    );
    let report = validate(&back);
    println!("{report}");

    // Marginal operators: weighting all coordinates gives a plain matrix;
    // keeping coordinates produces nested block tri-diagonal structure.
    let flat = back.marginal([Some(1.1), Some(0.9), Some(1.0)])?;
    println!("\nall-weighted marginal: depth {}", flat.depth());
    let nested = back.marginal([Some(1.1), None, None])?;
    println!(
        "weight z1 only: depth {} with {}-phase leaves",
        nested.depth(),
        nested.leaf_dim()
    );
    let triplet = back.direction_triplet(mmrw::Axis::X2)?;
    println!(
        "direction-2 triplet members have depth {}",
        triplet.diag().depth()
    );
    Ok(())
}
