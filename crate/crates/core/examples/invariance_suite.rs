//! Invariances of the masking coefficient: time shift, transposition by
//! whole octave steps of the bank, amplitude scaling in power mode, and
//! agreement between the power and modulus nonlinearities.
//!
//! ```bash
//! cargo run --release --example invariance_suite
//! ```

use scatmask::experiments::{run_invariance_suite, InvarianceSpec};

fn main() -> scatmask::Result<()> {
    let report = run_invariance_suite(&InvarianceSpec::default())?;
    println!("reference kappa: {:.6}", report.reference_kappa);
    for p in &report.phase {
        println!("shift sweep at T = {}: max deviation {:.2e}", p.t, p.max_deviation);
    }
    for t in &report.transposition {
        println!(
            "transpose k = {:>2}: f1 {:>8.2} Hz, f2 {:>8.2} Hz, kappa {:.6}, deviation {:.2e}",
            t.k, t.f1, t.f2, t.kappa, t.deviation
        );
    }
    println!("power-mode scaling exponent: {:.9}", report.power_exponent);
    println!("modulus vs power deviation: {:.2e}", report.modulus_deviation);
    println!("all checks passed: {}", report.passed());
    Ok(())
}
