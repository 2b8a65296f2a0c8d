//! First-order scalogram of two tones, checked against the closed form
//! `|a1 h(f1) e^{i w1 t} + a2 h(f2) e^{i w2 t}|^2 / 4`.
//!
//! ```bash
//! cargo run --release --example scalogram_two_tones
//! ```

use scatmask::masking::heterodyne_oracle;
use scatmask::scattering::Scatterer;
use scatmask::{build_filterbank, BankSpec, Component, Nonlinearity, TwoToneSpec};

fn main() -> scatmask::Result<()> {
    let tones = TwoToneSpec {
        c1: Component::new(1.0, 1024.0, 0.0),
        c2: Component::new(0.5, 960.0, 0.3),
        sample_rate: 16384.0,
        length: 16384,
    };
    let grid = tones.grid()?;
    let fb = build_filterbank(&BankSpec::gammatone(4, 8, 2048.0, 0.25), &grid)?;
    let x = tones.synth()?;
    let scatterer = Scatterer::new(&fb, Nonlinearity::Power);
    let u1 = scatterer.scalogram(&x)?;

    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for (path, u) in &u1.entries {
        let oracle = heterodyne_oracle(&tones, fb.hat(path.last()))?;
        for (a, b) in u.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
            peak = peak.max(b.abs());
        }
    }
    println!("{} bands, relative max error vs oracle: {:.3e}", u1.path_count(), worst / peak);

    let j = fb.nearest(1024.0);
    let band = &u1.entries[&scatterer.root_path(j)];
    let (lo, hi) = band
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!("band at {:.1} Hz beats at 64 Hz between {lo:.4} and {hi:.4}", fb.lambdas()[j]);
    Ok(())
}
