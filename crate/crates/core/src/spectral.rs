//! Shared FFT plans and periodic convolution on the sample grid.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Uniform frequency grid of an `n`-point DFT at a given sample rate.
///
/// Bin `k` maps to `k * fs / n` for `k < n/2` and to `(k - n) * fs / n`
/// otherwise, so the Nyquist bin carries the frequency `-fs/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    len: usize,
    sample_rate: f64,
}

impl FrequencyGrid {
    pub fn new(len: usize, sample_rate: f64) -> crate::Result<Self> {
        crate::signals::check_length(len)?;
        crate::signals::check_sample_rate(sample_rate)?;
        Ok(Self { len, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    /// Spacing between adjacent bins in Hz.
    pub fn resolution(&self) -> f64 {
        self.sample_rate / self.len as f64
    }

    /// Signal duration in seconds.
    pub fn duration(&self) -> f64 {
        self.len as f64 / self.sample_rate
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        let k = if bin < self.len / 2 {
            bin as f64
        } else {
            bin as f64 - self.len as f64
        };
        k * self.resolution()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.frequency(k))
    }

    /// Bin index of a frequency in `[0, nyquist)` if it lies exactly on the grid.
    pub fn bin_of(&self, freq: f64) -> Option<usize> {
        let k = freq / self.resolution();
        if k >= 0.0 && k.fract() == 0.0 && (k as usize) < self.len / 2 {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Nearest grid frequency in `[0, nyquist)`.
    pub fn snap(&self, freq: f64) -> f64 {
        let k = (freq / self.resolution()).round().max(0.0);
        let k = k.min((self.len / 2 - 1) as f64);
        k * self.resolution()
    }
}

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("len", &self.len).finish()
    }
}

impl Spectral {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// Normalized inverse transform, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Periodic convolution of a signal (given by its spectrum) with a complex
    /// frequency response; returns the complex time series.
    pub fn filter(&self, spectrum: &[Complex64], response: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .zip(response)
            .map(|(s, h)| s * h)
            .collect();
        self.inverse_in_place(&mut buf);
        buf
    }

    /// Periodic convolution with a real zero-phase response; returns the real part.
    pub fn filter_real(&self, spectrum: &[Complex64], response: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .zip(response)
            .map(|(s, &h)| s * h)
            .collect();
        self.inverse_in_place(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}
