//! Property tests of the scattering pipeline on a small grid.

use proptest::prelude::*;
use scatmask::experiments::{run_decay, DecaySpec};
use scatmask::masking::{heterodyne_oracle, masking_coefficient, normalize_s2, relative_epsilon};
use scatmask::scattering::{layer_energy, Scatterer};
use scatmask::signals::synth_mixture;
use scatmask::{
    analyze_masking, build_filterbank, BankSpec, Component, FilterBank, FrequencyGrid, Nonlinearity, Selection,
    Signal, TwoToneSpec,
};

const N: usize = 4096;
const FS: f64 = 4096.0;

fn bank() -> FilterBank {
    let grid = FrequencyGrid::new(N, FS).unwrap();
    build_filterbank(&BankSpec::gammatone(4, 6, 1024.0, 0.1), &grid).unwrap()
}

fn component() -> impl Strategy<Value = Component> {
    (0.05f64..3.0, 8usize..1600, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(a, bin, phase)| Component::new(a, bin as f64 * FS / N as f64, phase))
}

fn two_tones() -> impl Strategy<Value = TwoToneSpec> {
    (component(), component()).prop_map(|(c1, c2)| TwoToneSpec {
        c1,
        c2,
        sample_rate: FS,
        length: N,
    })
}

fn signal(cs: &[Component]) -> Signal {
    synth_mixture(cs, N, FS).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn wavelet_transform_is_linear(a in component(), b in component(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let fb = bank();
        let s = Scatterer::new(&fb, Nonlinearity::Power);
        let (xa, xb) = (signal(&[a]), signal(&[b]));
        let mix: Vec<f64> = xa.samples().iter().zip(xb.samples()).map(|(p, q)| alpha * p + beta * q).collect();
        let (sa, sb, sm) = (s.spectrum(xa.samples()), s.spectrum(xb.samples()), s.spectrum(&mix));
        for j in [0, fb.len() / 2, fb.len() - 1] {
            let (wa, wb, wm) = (s.complex_subband(&sa, j), s.complex_subband(&sb, j), s.complex_subband(&sm, j));
            for k in 0..N {
                let expect = wa[k] * alpha + wb[k] * beta;
                prop_assert!((wm[k] - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn scalogram_commutes_with_circular_shift(tones in two_tones(), shift in 0usize..N) {
        let fb = bank();
        let s = Scatterer::new(&fb, Nonlinearity::Modulus);
        let x = tones.synth().unwrap();
        let u = s.scalogram(&x).unwrap();
        let v = s.scalogram(&x.rotated(shift)).unwrap();
        let scale = u.entries.values().map(|v| max_abs(v)).fold(0.0, f64::max);
        for (path, series) in &u.entries {
            let mut expect = series.clone();
            expect.rotate_right(shift);
            for (p, q) in v.entries[path].iter().zip(&expect) {
                prop_assert!((p - q).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn layers_are_homogeneous(tones in two_tones(), alpha in 0.25f64..4.0) {
        let fb = bank();
        let x = tones.synth().unwrap();
        for nl in [Nonlinearity::Power, Nonlinearity::Modulus] {
            let s = Scatterer::new(&fb, nl);
            let base = s.forward(&x, 2, usize::MAX).unwrap();
            let scaled = s.forward(&x.scaled(alpha), 2, usize::MAX).unwrap();
            for (depth, (l0, l1)) in base.iter().zip(&scaled).enumerate() {
                let degree = (nl.exponent() as f64).powi(depth as i32 + 1);
                let factor = alpha.powf(degree);
                let scale = l0.entries.values().map(|v| max_abs(v)).fold(0.0, f64::max).max(1e-300);
                for (path, u) in &l0.entries {
                    for (p, q) in u.iter().zip(&l1.entries[path]) {
                        prop_assert!((p * factor - q).abs() <= 1e-9 * scale * factor);
                    }
                }
            }
        }
    }

    #[test]
    fn first_layer_energy_is_bounded_by_frame_constant(tones in two_tones()) {
        let fb = bank();
        let x = tones.synth().unwrap();
        let u = Scatterer::new(&fb, Nonlinearity::Power).scalogram(&x).unwrap();
        let bound = fb.littlewood_paley_sum().iter().cloned().fold(0.0, f64::max);
        prop_assert!(layer_energy(&u) <= bound * x.power() * (1.0 + 1e-12));
    }

    #[test]
    fn pooled_first_layer_is_nearly_delay_invariant(tones in two_tones()) {
        let fb = bank();
        let s = Scatterer::new(&fb, Nonlinearity::Power);
        let tau = fb.pooling_scale() / 100.0;
        let shift = (tau * FS).round() as usize;
        let x = tones.synth().unwrap();
        let a = s.pool(s.scalogram(&x).unwrap());
        let b = s.pool(s.scalogram(&x.rotated(shift)).unwrap());
        let scale = a.pooled.values().map(|v| max_abs(v)).fold(0.0, f64::max);
        for (path, p) in &a.pooled {
            for (u, v) in p.iter().zip(&b.pooled[path]) {
                prop_assert!((u - v).abs() < 0.01 * scale);
            }
        }
    }

    #[test]
    fn pooling_preserves_the_mean(tones in two_tones()) {
        let fb = bank();
        let s = Scatterer::new(&fb, Nonlinearity::Power);
        let layer = s.pool(s.scalogram(&tones.synth().unwrap()).unwrap());
        for (path, u) in &layer.entries {
            let (mu, ms) = (u.iter().sum::<f64>(), layer.pooled[path].iter().sum::<f64>());
            prop_assert!((mu - ms).abs() <= 1e-9 * mu.abs().max(1e-12));
        }
    }

    #[test]
    fn scalogram_matches_oracle(tones in two_tones()) {
        let fb = bank();
        let u = Scatterer::new(&fb, Nonlinearity::Power).scalogram(&tones.synth().unwrap()).unwrap();
        let mut err = 0.0f64;
        let mut peak = 0.0f64;
        for (path, series) in &u.entries {
            let oracle = heterodyne_oracle(&tones, fb.hat(path.last())).unwrap();
            for (a, b) in series.iter().zip(&oracle) {
                err = err.max((a - b).abs());
                peak = peak.max(b.abs());
            }
        }
        prop_assert!(err <= 1e-9 * peak.max(1e-300));
    }

    #[test]
    fn kappa_is_finite_and_nonnegative(tones in two_tones()) {
        let fb = bank();
        let r = analyze_masking(&tones.synth().unwrap(), &fb, Nonlinearity::Power, 1e-12, Selection::All).unwrap();
        prop_assert!(r.kappa.iter().all(|k| k.is_finite() && *k >= 0.0));
        prop_assert!(r.rows.iter().all(|p| p.s2n_mean.is_finite() && p.s2n_mean >= 0.0));
    }

    #[test]
    fn renormalized_coefficients_scale_quadratically(tones in two_tones(), gamma in -2i32..=2) {
        let fb = bank();
        let alpha = (gamma as f64).exp2();
        let run = |x: &Signal| analyze_masking(x, &fb, Nonlinearity::Power, 1e-12, Selection::All).unwrap().kappa_mean;
        let x = tones.synth().unwrap();
        let (k0, k1) = (run(&x), run(&x.scaled(alpha)));
        prop_assert!((k0 * alpha * alpha - k1).abs() <= 1e-9 * k1.abs().max(1e-300));
    }
}

#[test]
fn streaming_and_layered_kappa_agree() {
    let fb = bank();
    let tones = TwoToneSpec {
        c1: Component::new(2.0, 512.0, 0.0),
        c2: Component::new(1.5, 480.0, 1.0),
        sample_rate: FS,
        length: N,
    };
    let x = tones.synth().unwrap();
    let s = Scatterer::new(&fb, Nonlinearity::Power);
    let layers: Vec<_> = s.forward(&x, 2, usize::MAX).unwrap().into_iter().map(|l| s.pool(l)).collect();
    let eps = relative_epsilon(&layers[0], 1e-12);
    let s2n = normalize_s2(&layers[1], &layers[0], eps).unwrap();
    let layered = masking_coefficient(&s2n, Selection::All).unwrap();
    let streamed = analyze_masking(&x, &fb, Nonlinearity::Power, 1e-12, Selection::All).unwrap();
    assert_eq!(layered.mean, streamed.kappa_mean);
    assert_eq!(layered.series, streamed.kappa);
}

#[test]
fn shannon_kappa_ignores_component_order() {
    let grid = FrequencyGrid::new(N, FS).unwrap();
    let fb = build_filterbank(&BankSpec::shannon(5, 1024.0, 0.1), &grid).unwrap();
    let a = Component::new(2.0, 700.0, 0.0);
    let b = Component::new(1.0, 640.0, 0.4);
    let run = |c1, c2| {
        let t = TwoToneSpec { c1, c2, sample_rate: FS, length: N };
        analyze_masking(&t.synth().unwrap(), &fb, Nonlinearity::Power, 1e-12, Selection::All)
            .unwrap()
            .kappa_mean
    };
    assert_eq!(run(a, b), run(b, a));
}

#[test]
fn decay_residuals_account_for_captured_energy() {
    let curves = run_decay(&DecaySpec::default()).unwrap();
    for (captured, residual) in curves.captured.iter().zip(&curves.residual) {
        let mut previous = 1.0;
        for (c, r) in captured.iter().zip(residual) {
            assert!(*r >= 0.0 && *c >= 0.0);
            assert!(*r <= previous);
            assert!((previous - c - r).abs() <= 1e-12);
            previous = *r;
        }
    }
}
