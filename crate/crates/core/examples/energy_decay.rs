//! Energy decay across scattering depth for Fourier series with 1 to 8
//! harmonics of 32 Hz, on a Shannon octave bank.
//!
//! ```bash
//! cargo run --release --example energy_decay
//! ```

use scatmask::experiments::{run_decay, DecaySpec};

fn main() -> scatmask::Result<()> {
    let curves = run_decay(&DecaySpec::default())?;
    println!("{:>3} {:>6} {:>12} {:>12}", "N", "depth", "captured", "residual");
    for (i, n) in curves.component_counts.iter().enumerate() {
        for (m, depth) in curves.depths.iter().enumerate() {
            println!(
                "{n:>3} {depth:>6} {:>12.4e} {:>12.4e}",
                curves.captured[i][m], curves.residual[i][m]
            );
        }
    }
    Ok(())
}
