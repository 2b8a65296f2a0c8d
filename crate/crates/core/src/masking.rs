//! Two-tone interference measured through second-order scattering.
//!
//! The first layer turns a pair of partials into a single heterodyne
//! oscillation at their frequency difference. Second-order coefficients
//! renormalized by first-order ones, summed over paths, give the masking
//! coefficient `kappa(t)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::scattering::{Nonlinearity, Path, Scatterer, ScatteringLayer};
use crate::signals::{synth_mixture, Component, Signal};
use crate::spectral::FrequencyGrid;

/// A pair of partials on a common sampling grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoToneSpec {
    pub c1: Component,
    pub c2: Component,
    pub sample_rate: f64,
    pub length: usize,
}

impl TwoToneSpec {
    pub fn validate(&self) -> Result<()> {
        FrequencyGrid::new(self.length, self.sample_rate)?;
        self.c1.validate(self.sample_rate)?;
        self.c2.validate(self.sample_rate)?;
        if self.c1.frequency == 0.0 {
            return Err(Error::range("f1", "must be nonzero"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.length, self.sample_rate)
    }

    pub fn synth(&self) -> Result<Signal> {
        self.validate()?;
        synth_mixture(&[self.c1, self.c2], self.length, self.sample_rate)
    }

    /// `|f2 - f1|` in Hz.
    pub fn gap(&self) -> f64 {
        (self.c2.frequency - self.c1.frequency).abs()
    }

    /// Both frequencies moved to the nearest grid bins.
    pub fn snapped(&self) -> Result<Self> {
        let grid = self.grid()?;
        let mut out = *self;
        out.c1.frequency = grid.snap(self.c1.frequency);
        out.c2.frequency = grid.snap(self.c2.frequency);
        Ok(out)
    }
}

/// Closed-form first-order scalogram of a two-tone input at one filter:
/// `|1/2 h(f1) a1 e^{i(2 pi f1 t + phi1)} + 1/2 h(f2) a2 e^{i(2 pi f2 t + phi2)}|^2`.
///
/// `hat` is the filter's frequency response on the spec's grid; both tones
/// must sit on grid bins.
pub fn heterodyne_oracle(spec: &TwoToneSpec, hat: &[Complex64]) -> Result<Vec<f64>> {
    spec.validate()?;
    let grid = spec.grid()?;
    if hat.len() != grid.len() {
        return Err(Error::config(format!(
            "response has {} bins, grid has {}",
            hat.len(),
            grid.len()
        )));
    }
    let term = |c: &Component| -> Result<(Complex64, f64)> {
        let bin = grid.bin_of(c.frequency).ok_or_else(|| {
            Error::range("frequency", format!("{} Hz is not on the FFT grid", c.frequency))
        })?;
        let weight = 0.5 * c.amplitude * hat[bin] * Complex64::from_polar(1.0, c.phase);
        Ok((weight, c.frequency / spec.sample_rate))
    };
    let (w1, step1) = term(&spec.c1)?;
    let (w2, step2) = term(&spec.c2)?;
    Ok((0..spec.length)
        .map(|k| {
            let r1 = Complex64::from_polar(1.0, TAU * (step1 * k as f64).fract());
            let r2 = Complex64::from_polar(1.0, TAU * (step2 * k as f64).fract());
            (w1 * r1 + w2 * r2).norm_sqr()
        })
        .collect())
}

/// `epsilon_rel` times the largest pooled first-order value.
pub fn relative_epsilon(s1: &ScatteringLayer, epsilon_rel: f64) -> f64 {
    let peak = s1.pooled.values().flatten().fold(0.0f64, |m, &v| m.max(v));
    epsilon_rel * peak
}

/// `S2(t, l1, l2) / (S1(t, l1) + epsilon)` for every depth-2 path.
pub fn normalize_s2(
    s2: &ScatteringLayer,
    s1: &ScatteringLayer,
    epsilon: f64,
) -> Result<BTreeMap<Path, Vec<f64>>> {
    if s2.depth != 2 || s1.depth != 1 {
        return Err(Error::config(format!(
            "expected depths 1 and 2, got {} and {}",
            s1.depth, s2.depth
        )));
    }
    if !s1.is_pooled() || (!s2.entries.is_empty() && !s2.is_pooled()) {
        return Err(Error::config("layers must be pooled before renormalization"));
    }
    let parents: BTreeMap<usize, &Vec<f64>> = s1
        .pooled
        .iter()
        .map(|(p, s)| (p.indices()[0], s))
        .collect();
    s2.pooled
        .iter()
        .map(|(path, s)| {
            let parent = parents.get(&path.indices()[0]).ok_or_else(|| {
                Error::config(format!("no first-order parent for {:?}", path.lambdas()))
            })?;
            Ok((path.clone(), ratio(s, parent, epsilon)))
        })
        .collect()
}

fn ratio(s2: &[f64], s1: &[f64], epsilon: f64) -> Vec<f64> {
    s2.iter().zip(s1).map(|(a, b)| a / (b + epsilon)).collect()
}

/// Which first-order bands enter the masking coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Selection {
    /// Every depth-2 path.
    All,
    /// Only paths whose `lambda_1` is the band center nearest to `frequency`
    /// (log-frequency distance).
    NearestTo { frequency: f64 },
}

/// Average over the central half of a series, `[n/4, 3n/4)`.
pub fn central_mean(series: &[f64]) -> f64 {
    let n = series.len();
    let (lo, hi) = (n / 4, 3 * n / 4);
    if hi <= lo {
        return series.iter().sum::<f64>() / n.max(1) as f64;
    }
    series[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
}

/// `kappa(t)` and its central-half mean.
#[derive(Clone, Debug, PartialEq)]
pub struct Kappa {
    pub series: Vec<f64>,
    pub mean: f64,
}

fn nearest_lambda<'a>(candidates: impl Iterator<Item = &'a f64>, target: f64) -> Option<f64> {
    let t = target.log2();
    candidates.copied().fold(None, |best: Option<f64>, l| match best {
        Some(b) if (b.log2() - t).abs() <= (l.log2() - t).abs() => Some(b),
        _ => Some(l),
    })
}

/// Sum of renormalized second-order coefficients over the selected paths.
pub fn masking_coefficient(s2n: &BTreeMap<Path, Vec<f64>>, selection: Selection) -> Result<Kappa> {
    let chosen: Vec<&Vec<f64>> = match selection {
        Selection::All => s2n.values().collect(),
        Selection::NearestTo { frequency } => {
            let lambda1 = nearest_lambda(s2n.keys().map(|p| &p.lambdas()[0]), frequency);
            s2n.iter()
                .filter(|(p, _)| Some(p.lambdas()[0]) == lambda1)
                .map(|(_, s)| s)
                .collect()
        }
    };
    if chosen.is_empty() {
        return Err(Error::config(format!("selection {selection:?} matches no path")));
    }
    Ok(sum_series(chosen.into_iter()))
}

fn sum_series<'a>(series: impl Iterator<Item = &'a Vec<f64>>) -> Kappa {
    let mut total: Vec<f64> = Vec::new();
    for s in series {
        if total.is_empty() {
            total = s.clone();
        } else {
            for (t, v) in total.iter_mut().zip(s) {
                *t += v;
            }
        }
    }
    let mean = central_mean(&total);
    Kappa {
        series: total,
        mean,
    }
}

/// One renormalized second-order path, summarized by its central-half mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMean {
    pub lambda1: f64,
    pub lambda2: f64,
    pub s2n_mean: f64,
}

/// Result of a masking analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskingReport {
    /// Selected depth-2 paths, in path order.
    pub rows: Vec<PathMean>,
    pub kappa: Vec<f64>,
    pub kappa_mean: f64,
    pub epsilon: f64,
    pub selection: Selection,
    pub nonlinearity: Nonlinearity,
}

impl MaskingReport {
    /// Path carrying the largest renormalized coefficient.
    pub fn dominant(&self) -> Option<PathMean> {
        self.rows
            .iter()
            .copied()
            .fold(None, |best: Option<PathMean>, r| match best {
                Some(b) if b.s2n_mean >= r.s2n_mean => Some(b),
                _ => Some(r),
            })
    }
}

/// Depth-2 masking analysis that only materializes one first-order branch at
/// a time.
///
/// Produces the same numbers as running the full two-layer transform and
/// calling [`normalize_s2`] then [`masking_coefficient`], with memory
/// proportional to the widest branch instead of the whole layer.
pub fn analyze_masking(
    x: &Signal,
    fb: &FilterBank,
    nonlinearity: Nonlinearity,
    epsilon_rel: f64,
    selection: Selection,
) -> Result<MaskingReport> {
    if !(epsilon_rel.is_finite() && epsilon_rel > 0.0) {
        return Err(Error::config("epsilon must be positive"));
    }
    let s = Scatterer::new(fb, nonlinearity);
    s.check_signal(x)?;
    let spectrum = s.spectrum(x.samples());

    let first: Vec<(Vec<f64>, Vec<f64>)> = (0..fb.len())
        .into_par_iter()
        .map(|j| {
            let u = s.subband(&spectrum, j);
            let pooled = s.pool_series(&u);
            (u, pooled)
        })
        .collect();
    let peak = first
        .iter()
        .flat_map(|(_, p)| p.iter())
        .fold(0.0f64, |m, &v| m.max(v));
    let epsilon = epsilon_rel * peak;

    let branches: Vec<usize> = match selection {
        Selection::All => (0..fb.len()).collect(),
        Selection::NearestTo { frequency } => vec![fb.nearest(frequency)],
    };
    let per_branch: Vec<Vec<(Path, Vec<f64>)>> = branches
        .par_iter()
        .map(|&j| {
            let root = s.root_path(j);
            let (u1, s1) = &first[j];
            s.scatter_path(&root, u1)
                .into_iter()
                .map(|(path, u2)| {
                    let s2 = s.pool_series(&u2);
                    (path, ratio(&s2, s1, epsilon))
                })
                .collect()
        })
        .collect();
    let normalized: Vec<(Path, Vec<f64>)> = per_branch.into_iter().flatten().collect();
    if normalized.is_empty() {
        return Err(Error::config(format!("selection {selection:?} matches no path")));
    }
    let rows = normalized
        .iter()
        .map(|(p, v)| PathMean {
            lambda1: p.lambdas()[0],
            lambda2: p.lambdas()[1],
            s2n_mean: central_mean(v),
        })
        .collect();
    let kappa = sum_series(normalized.iter().map(|(_, v)| v));
    Ok(MaskingReport {
        rows,
        kappa: kappa.series,
        kappa_mean: kappa.mean,
        epsilon,
        selection,
        nonlinearity,
    })
}
