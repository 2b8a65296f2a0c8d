//! Masking coefficient of a fixed masker at 2048 Hz against a probe that
//! moves away from it, with nearest-path and all-path selection.
//!
//! ```bash
//! cargo run --release --example masking_coefficient
//! ```

use scatmask::{analyze_masking, build_filterbank, BankSpec, Component, Nonlinearity, Selection, TwoToneSpec};

fn main() -> scatmask::Result<()> {
    let base = TwoToneSpec {
        c1: Component::new(2.0, 2048.0, 0.0),
        c2: Component::new(1.0, 2048.0, 0.0),
        sample_rate: 16384.0,
        length: 65536,
    };
    let grid = base.grid()?;
    let fb = build_filterbank(&BankSpec::gammatone(4, 9, 2048.0, 0.5), &grid)?;
    println!("{:>10} {:>10} {:>12} {:>12} {:>10}", "gap", "f2", "kappa_near", "kappa_all", "lambda2");
    for gap in [1.0 / 256.0, 1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0] {
        let mut tones = base;
        tones.c2.frequency = 2048.0 * (1.0 - gap);
        let tones = tones.snapped()?;
        let x = tones.synth()?;
        let near = analyze_masking(&x, &fb, Nonlinearity::Power, 1e-12, Selection::NearestTo { frequency: 2048.0 })?;
        let all = analyze_masking(&x, &fb, Nonlinearity::Power, 1e-12, Selection::All)?;
        let dominant = near.dominant().map_or(f64::NAN, |d| d.lambda2);
        println!(
            "{gap:>10.5} {:>10.2} {:>12.5} {:>12.5} {dominant:>10.2}",
            tones.c2.frequency, near.kappa_mean, all.kappa_mean
        );
    }
    Ok(())
}
