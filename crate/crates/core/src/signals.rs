//! Deterministic test signals: sinusoids, mixtures, Fourier series, and the
//! analytic part of a real signal.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectral;

/// Uniformly sampled real time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

/// Uniformly sampled complex time series, e.g. an analytic signal.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

/// One sinusoidal partial `a * cos(2 pi f t + phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub amplitude: f64,
    /// Hz.
    pub frequency: f64,
    /// Radians.
    pub phase: f64,
}

pub(crate) fn check_length(len: usize) -> Result<()> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::range(
            "length",
            format!("{len} is not a power of two >= 2"),
        ));
    }
    Ok(())
}

pub(crate) fn check_sample_rate(sample_rate: f64) -> Result<()> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::range(
            "sample_rate",
            format!("{sample_rate} must be positive and finite"),
        ));
    }
    Ok(())
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        check_length(samples.len())?;
        check_sample_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::range("sample", format!("non-finite value at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean power per sample.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    /// Multiply every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * factor).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Circular delay by `shift` samples: `y[k] = x[k - shift]`.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut samples = self.samples.clone();
        samples.rotate_right(shift % self.len());
        Self {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

impl ComplexSignal {
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl Component {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
        }
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::range(
                "amplitude",
                format!("{} must be finite and nonnegative", self.amplitude),
            ));
        }
        if !self.phase.is_finite() {
            return Err(Error::range("phase", format!("{} is not finite", self.phase)));
        }
        let nyquist = sample_rate / 2.0;
        if !(self.frequency.is_finite() && self.frequency >= 0.0 && self.frequency < nyquist) {
            return Err(Error::range(
                "frequency",
                format!("{} Hz not in [0, {nyquist}) Hz", self.frequency),
            ));
        }
        Ok(())
    }
}

fn accumulate(out: &mut [f64], c: &Component, sample_rate: f64) {
    if c.amplitude == 0.0 {
        return;
    }
    let step = c.frequency / sample_rate;
    for (k, v) in out.iter_mut().enumerate() {
        // Reduce to a fraction of a cycle before scaling by 2 pi.
        let cycles = (step * k as f64).fract();
        *v += c.amplitude * (TAU * cycles + c.phase).cos();
    }
}

pub fn synth_sinusoid(c: Component, len: usize, sample_rate: f64) -> Result<Signal> {
    synth_mixture(&[c], len, sample_rate)
}

pub fn synth_mixture(components: &[Component], len: usize, sample_rate: f64) -> Result<Signal> {
    check_length(len)?;
    check_sample_rate(sample_rate)?;
    for c in components {
        c.validate(sample_rate)?;
    }
    let mut samples = vec![0.0; len];
    for c in components {
        accumulate(&mut samples, c, sample_rate);
    }
    Signal::new(samples, sample_rate)
}

/// `sum_{n=1}^{count} cos(2 pi n f1 t)`.
pub fn synth_fourier_series(count: usize, f1: f64, len: usize, sample_rate: f64) -> Result<Signal> {
    if count == 0 {
        return Err(Error::range("component count", "must be at least 1"));
    }
    let top = count as f64 * f1;
    if f1.is_nan() || f1 <= 0.0 || top >= sample_rate / 2.0 {
        return Err(Error::range(
            "harmonic",
            format!("{count} x {f1} Hz = {top} Hz reaches Nyquist {}", sample_rate / 2.0),
        ));
    }
    let components: Vec<Component> = (1..=count)
        .map(|n| Component::new(1.0, n as f64 * f1, 0.0))
        .collect();
    synth_mixture(&components, len, sample_rate)
}

/// Zero the negative-frequency half of the spectrum and double the strictly
/// positive bins. DC and Nyquist bins pass unchanged.
pub fn one_sided(spectrum: &mut [Complex64]) {
    let n = spectrum.len();
    for (k, v) in spectrum.iter_mut().enumerate() {
        if k == 0 || k == n / 2 {
            continue;
        }
        if k < n / 2 {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn analytic_part(x: &Signal) -> ComplexSignal {
    let fft = Spectral::new(x.len());
    let mut spectrum = fft.forward_real(x.samples());
    one_sided(&mut spectrum);
    fft.inverse_in_place(&mut spectrum);
    ComplexSignal {
        samples: spectrum,
        sample_rate: x.sample_rate(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_frequency_is_constant() {
        let x = synth_sinusoid(Component::new(1.0, 0.0, 0.0), 8, 8.0).unwrap();
        assert!(x.samples().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let x = synth_sinusoid(Component::new(0.0, 100.0, 1.3), 1024, 8192.0).unwrap();
        assert!(x.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quarter_rate_cosine() {
        let x = synth_sinusoid(Component::new(1.0, 2.0, 0.0), 8, 8.0).unwrap();
        let want = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        for (a, b) in x.samples().iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_nyquist_and_bad_length() {
        assert!(matches!(
            synth_sinusoid(Component::new(1.0, 4.0, 0.0), 8, 8.0),
            Err(Error::Range { what: "frequency", .. })
        ));
        assert!(matches!(
            synth_sinusoid(Component::new(1.0, 1.0, 0.0), 12, 8.0),
            Err(Error::Range { what: "length", .. })
        ));
        assert!(synth_sinusoid(Component::new(-1.0, 1.0, 0.0), 8, 8.0).is_err());
        assert!(synth_sinusoid(Component::new(1.0, 1.0, 0.0), 8, 0.0).is_err());
    }

    #[test]
    fn mixture_edge_cases() {
        let empty = synth_mixture(&[], 64, 64.0).unwrap();
        assert!(empty.samples().iter().all(|&v| v == 0.0));

        let c = Component::new(0.7, 5.0, 0.4);
        let one = synth_sinusoid(c, 64, 64.0).unwrap();
        let two = synth_mixture(&[c, c], 64, 64.0).unwrap();
        for (a, b) in one.samples().iter().zip(two.samples()) {
            assert_abs_diff_eq!(2.0 * a, *b, epsilon = 1e-15);
        }

        let cancel = synth_mixture(
            &[Component::new(1.0, 5.0, 0.0), Component::new(1.0, 5.0, std::f64::consts::PI)],
            64,
            64.0,
        )
        .unwrap();
        assert!(cancel.samples().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn fourier_series_cases() {
        let fs = 1024.0;
        let n = 1024;
        let single = synth_fourier_series(1, 8.0, n, fs).unwrap();
        let tone = synth_sinusoid(Component::new(1.0, 8.0, 0.0), n, fs).unwrap();
        assert_eq!(single, tone);

        let four = synth_fourier_series(4, 8.0, n, fs).unwrap();
        assert_eq!(four.samples()[0], 4.0);

        // Two positive-frequency bins carry the energy of the N=2 series.
        let two = synth_fourier_series(2, 8.0, n, fs).unwrap();
        let spectrum = Spectral::new(n).forward_real(two.samples());
        let occupied: Vec<usize> = (1..n / 2)
            .filter(|&k| spectrum[k].norm() > 1e-9 * n as f64)
            .collect();
        assert_eq!(occupied, vec![8, 16]);

        assert!(synth_fourier_series(4, 128.0, n, fs).is_err());
        assert!(synth_fourier_series(0, 8.0, n, fs).is_err());
    }

    #[test]
    fn analytic_part_of_grid_tones() {
        let fs = 256.0;
        let n = 256;
        let f = 12.0;
        let cos = synth_sinusoid(Component::new(1.0, f, 0.0), n, fs).unwrap();
        let sin = synth_sinusoid(Component::new(1.0, f, -std::f64::consts::FRAC_PI_2), n, fs).unwrap();
        let za = analytic_part(&cos);
        let zs = analytic_part(&sin);
        for k in 0..n {
            let e = Complex64::from_polar(1.0, TAU * f * k as f64 / fs);
            assert_abs_diff_eq!(za.samples()[k].re, e.re, epsilon = 1e-12);
            assert_abs_diff_eq!(za.samples()[k].im, e.im, epsilon = 1e-12);
            // sin -> -i exp(i...)
            let want = Complex64::new(0.0, -1.0) * e;
            assert_abs_diff_eq!(zs.samples()[k].re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(zs.samples()[k].im, want.im, epsilon = 1e-12);
            assert_abs_diff_eq!(za.samples()[k].re, cos.samples()[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_part_keeps_dc() {
        let x = Signal::new(vec![2.5; 32], 32.0).unwrap();
        let z = analytic_part(&x);
        for c in z.samples() {
            assert_abs_diff_eq!(c.re, 2.5, epsilon = 1e-14);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        assert!(Signal::new(vec![0.0, f64::NAN], 1.0).is_err());
    }
}
