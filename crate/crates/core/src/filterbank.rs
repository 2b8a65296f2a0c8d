//! Constant-Q analytic filterbanks sampled on the FFT grid.
//!
//! Every band-pass response vanishes on non-positive frequencies and at DC,
//! and is scaled to unit peak magnitude. The pooling lowpass is a real
//! Gaussian with time standard deviation `T`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::FrequencyGrid;

pub const DEFAULT_GAMMATONE_ORDER: u32 = 4;

/// Shape of the mother wavelet in frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveletProfile {
    /// `[1 + i q_eff (w / lambda - 1)]^-order` on positive frequencies.
    Gammatone { order: u32 },
    /// Indicator of the octave `[lambda, 2 lambda)`.
    Shannon,
}

impl WaveletProfile {
    pub fn gammatone() -> Self {
        WaveletProfile::Gammatone {
            order: DEFAULT_GAMMATONE_ORDER,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self, WaveletProfile::Shannon)
    }
}

impl fmt::Display for WaveletProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveletProfile::Gammatone { order } => write!(f, "gammatone(order={order})"),
            WaveletProfile::Shannon => write!(f, "shannon"),
        }
    }
}

/// Sharpness factor that puts the half-power points of an order-`order`
/// gammatone at `lambda * (1 +- 1/(2q))`.
pub fn gammatone_q_eff(q: u32, order: u32) -> f64 {
    2.0 * q as f64 * ((1.0 / order as f64).exp2() - 1.0).sqrt()
}

fn check_center(lambda: f64, grid: &FrequencyGrid) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda < grid.nyquist()) {
        return Err(Error::range(
            "center frequency",
            format!("{lambda} Hz not in (0, {}) Hz", grid.nyquist()),
        ));
    }
    Ok(())
}

fn normalize_peak(hat: &mut [Complex64]) {
    let peak = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        for c in hat.iter_mut() {
            *c /= peak;
        }
    }
}

pub fn design_gammatone_hat(
    q: u32,
    order: u32,
    lambda: f64,
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    if order == 0 {
        return Err(Error::config("gammatone order must be at least 1"));
    }
    if q == 0 {
        return Err(Error::config("quality factor must be at least 1"));
    }
    check_center(lambda, grid)?;
    let q_eff = gammatone_q_eff(q, order);
    let mut hat: Vec<Complex64> = grid
        .frequencies()
        .map(|w| {
            if w <= 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, q_eff * (w / lambda - 1.0))
                    .inv()
                    .powi(order as i32)
            }
        })
        .collect();
    hat[0] = Complex64::new(0.0, 0.0);
    normalize_peak(&mut hat);
    Ok(hat)
}

pub fn design_shannon_hat(lambda: f64, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    if !(lambda.is_finite() && lambda > 0.0 && 2.0 * lambda <= grid.nyquist()) {
        return Err(Error::range(
            "shannon band",
            format!("[{lambda}, {}) Hz exceeds Nyquist {} Hz", 2.0 * lambda, grid.nyquist()),
        ));
    }
    Ok(grid
        .frequencies()
        .map(|w| {
            let inside = w >= lambda && w < 2.0 * lambda;
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
        .collect())
}

/// Gaussian frequency response `exp(-(2 pi f)^2 T^2 / 2)`.
pub fn design_lowpass(t: f64, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    if !(t.is_finite() && t > 0.0 && t < grid.duration()) {
        return Err(Error::range(
            "pooling scale T",
            format!("{t} s not in (0, {}) s", grid.duration()),
        ));
    }
    Ok(grid
        .frequencies()
        .map(|f| {
            let w = TAU * f * t;
            (-0.5 * w * w).exp()
        })
        .collect())
}

/// Geometric family of analytic wavelets plus the pooling lowpass.
#[derive(Clone, Debug)]
pub struct FilterBank {
    profile: WaveletProfile,
    q: u32,
    octaves: u32,
    f_max: f64,
    pooling: f64,
    grid: FrequencyGrid,
    lambdas: Vec<f64>,
    hats: Vec<Vec<Complex64>>,
    lowpass: Vec<f64>,
}

/// Parameters of [`build_filterbank`], kept separate so they can be echoed
/// into output metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankSpec {
    pub profile: WaveletProfile,
    pub q: u32,
    pub octaves: u32,
    pub f_max: f64,
    /// Pooling time scale in seconds.
    pub t: f64,
}

impl BankSpec {
    /// Fourth-order gammatone bank.
    pub fn gammatone(q: u32, octaves: u32, f_max: f64, t: f64) -> Self {
        BankSpec {
            profile: WaveletProfile::gammatone(),
            q,
            octaves,
            f_max,
            t,
        }
    }

    /// One-filter-per-octave Shannon bank.
    pub fn shannon(octaves: u32, f_max: f64, t: f64) -> Self {
        BankSpec {
            profile: WaveletProfile::Shannon,
            q: 1,
            octaves,
            f_max,
            t,
        }
    }
}

pub fn build_filterbank(spec: &BankSpec, grid: &FrequencyGrid) -> Result<FilterBank> {
    let BankSpec {
        profile,
        q,
        octaves,
        f_max,
        t,
    } = *spec;
    if q == 0 {
        return Err(Error::config("quality factor q must be at least 1"));
    }
    if octaves == 0 {
        return Err(Error::config("octaves must be at least 1"));
    }
    if profile == WaveletProfile::Shannon && q != 1 {
        return Err(Error::config(format!("shannon profile requires q = 1, got {q}")));
    }
    if !(f_max.is_finite() && f_max > 0.0) {
        return Err(Error::range("f_max", format!("{f_max} Hz must be positive")));
    }
    let f_min = f_max * (-(octaves as f64)).exp2();
    if f_min < grid.resolution() {
        return Err(Error::config(format!(
            "{octaves} octaves below {f_max} Hz reach {f_min} Hz, under the grid resolution {} Hz",
            grid.resolution()
        )));
    }
    let count = (q * octaves) as usize;
    let lambdas: Vec<f64> = (0..count)
        .map(|j| f_max * (-(j as f64) / q as f64).exp2())
        .collect();
    let lowest = lambdas[count - 1];
    if let WaveletProfile::Gammatone { .. } = profile {
        if lowest / (q as f64) < grid.resolution() {
            return Err(Error::config(format!(
                "{count} filters: lowest bandwidth {} Hz is below the grid resolution {} Hz",
                lowest / q as f64,
                grid.resolution()
            )));
        }
    }
    let hats = lambdas
        .iter()
        .map(|&lambda| match profile {
            WaveletProfile::Gammatone { order } => design_gammatone_hat(q, order, lambda, grid),
            WaveletProfile::Shannon => design_shannon_hat(lambda, grid),
        })
        .collect::<Result<Vec<_>>>()?;
    let lowpass = design_lowpass(t, grid)?;
    Ok(FilterBank {
        profile,
        q,
        octaves,
        f_max,
        pooling: t,
        grid: *grid,
        lambdas,
        hats,
        lowpass,
    })
}

impl FilterBank {
    pub fn spec(&self) -> BankSpec {
        BankSpec {
            profile: self.profile,
            q: self.q,
            octaves: self.octaves,
            f_max: self.f_max,
            t: self.pooling,
        }
    }

    pub fn profile(&self) -> WaveletProfile {
        self.profile
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn octaves(&self) -> u32 {
        self.octaves
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    /// Pooling time scale `T` in seconds.
    pub fn pooling_scale(&self) -> f64 {
        self.pooling
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Center frequencies, strictly descending.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn hat(&self, index: usize) -> &[Complex64] {
        &self.hats[index]
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    /// Response of filter `index` at a grid-aligned frequency.
    pub fn response_at(&self, index: usize, freq: f64) -> Option<Complex64> {
        self.grid.bin_of(freq).map(|k| self.hats[index][k])
    }

    /// Index of the filter whose center is closest to `freq` on a log axis.
    pub fn nearest(&self, freq: f64) -> usize {
        let target = freq.max(f64::MIN_POSITIVE).log2();
        let mut best = 0;
        for (j, lambda) in self.lambdas.iter().enumerate() {
            if (lambda.log2() - target).abs() < (self.lambdas[best].log2() - target).abs() {
                best = j;
            }
        }
        best
    }

    /// Lowest admissible modulation frequency `q / T` for filters beyond the
    /// first layer.
    pub fn modulation_floor(&self) -> f64 {
        self.q as f64 / self.pooling
    }

    /// Indices of filters that may follow `parent` on a scattering path: centers
    /// at most `lambda_parent * 2^(-1/q)` and at least the modulation floor.
    pub fn children(&self, parent: usize) -> Range<usize> {
        let floor = self.modulation_floor();
        let start = parent + 1;
        let end = (start..self.len())
            .find(|&j| self.lambdas[j] < floor)
            .unwrap_or(self.len());
        start..end.max(start)
    }

    /// Frequency interval scanned by [`littlewood_paley`].
    pub fn covered_band(&self) -> (f64, f64) {
        match self.profile {
            WaveletProfile::Gammatone { .. } => {
                (self.f_max * (-(self.octaves as f64)).exp2(), self.f_max)
            }
            WaveletProfile::Shannon => (self.lambdas[self.len() - 1], 2.0 * self.f_max),
        }
    }

    /// Sum of squared responses, wavelets plus lowpass, at every grid bin.
    pub fn littlewood_paley_sum(&self) -> Vec<f64> {
        let mut sum: Vec<f64> = self.lowpass.iter().map(|p| p * p).collect();
        for hat in &self.hats {
            for (s, h) in sum.iter_mut().zip(hat) {
                *s += h.norm_sqr();
            }
        }
        sum
    }
}

/// Extrema of the Littlewood-Paley sum over positive grid frequencies in the
/// covered band.
pub fn littlewood_paley(fb: &FilterBank) -> (f64, f64) {
    let (lo, hi) = fb.covered_band();
    let sum = fb.littlewood_paley_sum();
    let inside = |f: f64| match fb.profile {
        WaveletProfile::Gammatone { .. } => f >= lo && f <= hi,
        WaveletProfile::Shannon => f >= lo && f < hi,
    };
    fb.grid
        .frequencies()
        .zip(sum)
        .filter(|&(f, _)| f > 0.0 && inside(f))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), (_, s)| {
            (mn.min(s), mx.max(s))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(4096, 4096.0).unwrap()
    }

    #[test]
    fn gammatone_peak_and_half_power() {
        let g = grid();
        let hat = design_gammatone_hat(4, 4, 512.0, &g).unwrap();
        assert_abs_diff_eq!(hat[512].norm(), 1.0, epsilon = 1e-15);
        // Half-power points at 512 * (1 +- 1/8) = 448, 576.
        assert_abs_diff_eq!(hat[448].norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-6);
        assert_abs_diff_eq!(hat[576].norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-6);
        assert_eq!(hat[0], Complex64::new(0.0, 0.0));
        for (k, h) in hat.iter().enumerate().skip(2048) {
            assert_eq!(*h, Complex64::new(0.0, 0.0), "bin {k}");
        }
    }

    #[test]
    fn gammatone_rejects_out_of_range_center() {
        let g = grid();
        assert!(matches!(
            design_gammatone_hat(4, 4, 2048.0, &g),
            Err(Error::Range { .. })
        ));
        assert!(design_gammatone_hat(4, 4, 0.0, &g).is_err());
        assert!(design_gammatone_hat(4, 0, 100.0, &g).is_err());
    }

    #[test]
    fn shannon_band_edges() {
        let g = grid();
        let hat = design_shannon_hat(256.0, &g).unwrap();
        assert_eq!(hat[384].re, 1.0);
        assert_eq!(hat[128].re, 0.0);
        assert_eq!(hat[512].re, 0.0);
        assert_eq!(hat[256].re, 1.0);
        assert!(design_shannon_hat(1500.0, &g).is_err());
    }

    #[test]
    fn lowpass_is_even_with_unit_dc() {
        let g = grid();
        let lp = design_lowpass(0.05, &g).unwrap();
        assert_eq!(lp[0], 1.0);
        for k in 1..4096 {
            assert_eq!(lp[k], lp[4096 - k]);
        }
        assert!(design_lowpass(0.0, &g).is_err());
        assert!(design_lowpass(1.0, &g).is_err());
    }

    #[test]
    fn filter_counts_and_ratio() {
        let g = FrequencyGrid::new(65536, 16384.0).unwrap();
        let gt = BankSpec {
            profile: WaveletProfile::gammatone(),
            q: 4,
            octaves: 9,
            f_max: 2048.0,
            t: 0.5,
        };
        let fb = build_filterbank(&gt, &g).unwrap();
        assert_eq!(fb.len(), 36);
        for w in fb.lambdas().windows(2) {
            assert!(w[1] < w[0]);
            assert_abs_diff_eq!(w[0] / w[1], 0.25f64.exp2(), epsilon = 1e-14);
        }
        let sh = BankSpec {
            profile: WaveletProfile::Shannon,
            q: 1,
            octaves: 7,
            ..gt
        };
        assert_eq!(build_filterbank(&sh, &g).unwrap().len(), 7);
        let bad = BankSpec { q: 4, ..sh };
        assert!(matches!(build_filterbank(&bad, &g), Err(Error::Config(_))));
        let zero = BankSpec { octaves: 0, ..gt };
        assert!(build_filterbank(&zero, &g).is_err());
        let too_deep = BankSpec { octaves: 20, ..gt };
        assert!(matches!(build_filterbank(&too_deep, &g), Err(Error::Config(_))));
    }

    #[test]
    fn children_respect_floor_and_order() {
        let g = FrequencyGrid::new(65536, 16384.0).unwrap();
        let fb = build_filterbank(
            &BankSpec {
                profile: WaveletProfile::gammatone(),
                q: 4,
                octaves: 9,
                f_max: 2048.0,
                t: 0.5,
            },
            &g,
        )
        .unwrap();
        assert_eq!(fb.modulation_floor(), 8.0);
        let kids = fb.children(0);
        assert_eq!(kids, 1..33);
        assert_eq!(fb.lambdas()[32], 8.0);
        assert!(fb.children(32).is_empty());
        assert!(fb.children(35).is_empty());
        assert_eq!(fb.nearest(2048.0), 0);
        assert_eq!(fb.nearest(1030.0), 4);
    }

    #[test]
    fn shannon_partition_of_unity() {
        let g = FrequencyGrid::new(65536, 16384.0).unwrap();
        let fb = build_filterbank(
            &BankSpec {
                profile: WaveletProfile::Shannon,
                q: 1,
                octaves: 7,
                f_max: 2048.0,
                t: 0.5,
            },
            &g,
        )
        .unwrap();
        assert_eq!(littlewood_paley(&fb), (1.0, 1.0));
    }

    #[test]
    fn dilation_covariance() {
        let g = grid();
        let wide = design_gammatone_hat(4, 4, 512.0, &g).unwrap();
        let narrow = design_gammatone_hat(4, 4, 256.0, &g).unwrap();
        for k in 0..1024 {
            assert_eq!(narrow[k], wide[2 * k], "bin {k}");
        }
    }
}
