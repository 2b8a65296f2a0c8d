//! A coarse masking heatmap (8 x 8 cells) printed as a text grid. The full
//! 32 x 32 grid is available through `scatmask heatmap`.
//!
//! ```bash
//! cargo run --release --example masking_heatmap
//! ```

use scatmask::experiments::{log_spaced, run_heatmap, HeatmapSpec};

fn main() -> scatmask::Result<()> {
    let spec = HeatmapSpec {
        amp_ratios: log_spaced(1.0 / 1024.0, 1.0, 8),
        freq_gaps: log_spaced(1.0 / 1024.0, 0.5, 8),
        ..HeatmapSpec::default()
    };
    let grid = run_heatmap(&spec)?;
    print!("{:>9} |", "a2/a1");
    for g in &grid.freq_gaps {
        print!(" {g:>8.5}");
    }
    println!("  <- |f2 - f1| / f1");
    for (i, r) in grid.amp_ratios.iter().enumerate().rev() {
        print!("{r:>9.5} |");
        for k in &grid.kappa[i] {
            print!(" {k:>8.4}");
        }
        println!();
    }
    Ok(())
}
