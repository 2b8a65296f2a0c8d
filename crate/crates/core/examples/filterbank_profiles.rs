//! Compare the gammatone and Shannon banks: centers, half-power widths and
//! the Littlewood-Paley sum over the band each one covers.
//!
//! ```bash
//! cargo run --release --example filterbank_profiles
//! ```

use scatmask::filterbank::{build_filterbank, gammatone_q_eff, littlewood_paley, BankSpec};
use scatmask::FrequencyGrid;

fn main() -> scatmask::Result<()> {
    let grid = FrequencyGrid::new(65536, 16384.0)?;

    let gt = build_filterbank(&BankSpec::gammatone(4, 9, 2048.0, 0.5), &grid)?;
    println!("gammatone q=4: {} filters, q_eff = {:.4}", gt.len(), gammatone_q_eff(4, 4));
    for (j, lambda) in gt.lambdas().iter().enumerate().step_by(4) {
        // Half-power points sit at lambda * (1 +- 1/(2q)) by construction.
        let lo = gt.response_at(j, lambda * (1.0 - 1.0 / 8.0)).map(|z| z.norm_sqr());
        println!("  lambda[{j:2}] = {lambda:8.2} Hz  |h|^2 at lower edge ~ {:.3}", lo.unwrap_or(f64::NAN));
    }
    let (lo, hi) = littlewood_paley(&gt);
    let (a, b) = gt.covered_band();
    println!("  LP sum over [{a:.1}, {b:.1}] Hz: min {lo:.6}, max {hi:.6}");

    let sh = build_filterbank(&BankSpec::shannon(7, 2048.0, 0.5), &grid)?;
    println!("shannon: {} filters", sh.len());
    for (j, lambda) in sh.lambdas().iter().enumerate() {
        println!("  band {j}: [{lambda:.0}, {:.0}) Hz", 2.0 * lambda);
    }
    let (lo, hi) = littlewood_paley(&sh);
    println!("  LP sum: min {lo}, max {hi}");
    Ok(())
}
