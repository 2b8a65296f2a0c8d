//! Iterated wavelet scattering: band-pass filtering followed by a pointwise
//! modulus (or squared modulus) at every layer, and lowpass pooling of each
//! layer into time-shift-stable coefficients.
//!
//! Convolutions are periodic and computed by FFT on the signal's own grid.
//! No decimation happens between layers, so every time series has the
//! length of the input.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{build_filterbank, BankSpec, FilterBank, WaveletProfile};
use crate::signals::Signal;
use crate::spectral::{FrequencyGrid, Spectral};

/// Pointwise nonlinearity applied to each complex subband.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `|z|^2`
    #[default]
    Power,
    /// `|z|`
    Modulus,
}

impl Nonlinearity {
    #[inline]
    pub fn apply(self, z: Complex64) -> f64 {
        match self {
            Nonlinearity::Power => z.norm_sqr(),
            Nonlinearity::Modulus => z.norm(),
        }
    }

    /// Degree of homogeneity of one layer: `|a z|^p = |a|^p |z|^p`.
    pub fn exponent(self) -> u32 {
        match self {
            Nonlinearity::Power => 2,
            Nonlinearity::Modulus => 1,
        }
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nonlinearity::Power => "power",
            Nonlinearity::Modulus => "modulus",
        })
    }
}

/// A scattering path: filter indices into the bank together with their center
/// frequencies, strictly decreasing in frequency.
///
/// Ordering and equality use the indices only.
#[derive(Clone, Debug)]
pub struct Path {
    indices: Vec<usize>,
    lambdas: Vec<f64>,
}

impl Path {
    fn root(index: usize, fb: &FilterBank) -> Self {
        Self {
            indices: vec![index],
            lambdas: vec![fb.lambdas()[index]],
        }
    }

    fn extend(&self, index: usize, fb: &FilterBank) -> Self {
        let mut indices = self.indices.clone();
        let mut lambdas = self.lambdas.clone();
        indices.push(index);
        lambdas.push(fb.lambdas()[index]);
        Self { indices, lambdas }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Center frequencies `(lambda_1, ..., lambda_m)` in Hz.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    pub fn last(&self) -> usize {
        *self.indices.last().expect("paths are never empty")
    }

    pub fn is_decreasing(&self) -> bool {
        self.lambdas.windows(2).all(|w| w[1] < w[0])
    }
}

impl PartialEq for Path {
    fn eq(&self, other: &Self) -> bool {
        self.indices == other.indices
    }
}

impl Eq for Path {}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices.cmp(&other.indices)
    }
}

/// All paths of one depth with their scattered (`U_m`) and, once pooled,
/// invariant (`S_m`) time series.
#[derive(Clone, Debug)]
pub struct ScatteringLayer {
    pub depth: usize,
    pub nonlinearity: Nonlinearity,
    pub entries: BTreeMap<Path, Vec<f64>>,
    pub pooled: BTreeMap<Path, Vec<f64>>,
}

impl ScatteringLayer {
    pub fn is_pooled(&self) -> bool {
        !self.entries.is_empty() && self.pooled.len() == self.entries.len()
    }

    pub fn path_count(&self) -> usize {
        self.entries.len()
    }
}

/// Full configuration of a forward transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringConfig {
    pub bank: BankSpec,
    pub max_depth: usize,
    pub nonlinearity: Nonlinearity,
    /// Renormalization guard relative to the peak first-order coefficient.
    pub epsilon_rel: f64,
    /// Largest number of paths any single depth may materialize.
    pub path_cap: usize,
}

pub const DEFAULT_EPSILON_REL: f64 = 1e-12;
pub const DEFAULT_PATH_CAP: usize = 4096;

impl ScatteringConfig {
    pub fn new(bank: BankSpec, max_depth: usize) -> Self {
        Self {
            bank,
            max_depth,
            nonlinearity: Nonlinearity::Power,
            epsilon_rel: DEFAULT_EPSILON_REL,
            path_cap: DEFAULT_PATH_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::config("max depth must be at least 1"));
        }
        if !(self.epsilon_rel.is_finite() && self.epsilon_rel > 0.0) {
            return Err(Error::config(format!(
                "epsilon must be positive, got {}",
                self.epsilon_rel
            )));
        }
        if self.bank.profile == WaveletProfile::Shannon && self.bank.q != 1 {
            return Err(Error::config("shannon profile requires q = 1"));
        }
        Ok(())
    }
}

/// Filterbank plus FFT plans for one grid; the building block for every
/// transform in this crate.
#[derive(Clone, Debug)]
pub struct Scatterer<'a> {
    fb: &'a FilterBank,
    fft: Spectral,
    nonlinearity: Nonlinearity,
}

impl<'a> Scatterer<'a> {
    pub fn new(fb: &'a FilterBank, nonlinearity: Nonlinearity) -> Self {
        Self {
            fb,
            fft: Spectral::new(fb.grid().len()),
            nonlinearity,
        }
    }

    pub fn bank(&self) -> &FilterBank {
        self.fb
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn check_signal(&self, x: &Signal) -> Result<()> {
        let grid = self.fb.grid();
        if x.len() != grid.len() || x.sample_rate() != grid.sample_rate() {
            return Err(Error::config(format!(
                "signal ({} samples at {} Hz) does not match the filterbank grid ({} samples at {} Hz)",
                x.len(),
                x.sample_rate(),
                grid.len(),
                grid.sample_rate()
            )));
        }
        Ok(())
    }

    /// Depth-1 path for filter `index`.
    pub fn root_path(&self, index: usize) -> Path {
        Path::root(index, self.fb)
    }

    pub fn spectrum(&self, samples: &[f64]) -> Vec<Complex64> {
        self.fft.forward_real(samples)
    }

    /// `|u * psi_index|^p` from the spectrum of `u`.
    pub fn subband(&self, spectrum: &[Complex64], index: usize) -> Vec<f64> {
        let nl = self.nonlinearity;
        self.fft
            .filter(spectrum, self.fb.hat(index))
            .into_iter()
            .map(|z| nl.apply(z))
            .collect()
    }

    /// Complex subband `u * psi_index`, before the nonlinearity.
    pub fn complex_subband(&self, spectrum: &[Complex64], index: usize) -> Vec<Complex64> {
        self.fft.filter(spectrum, self.fb.hat(index))
    }

    /// Lowpass pooling `u * phi_T`, clamped at zero.
    pub fn pool_series(&self, u: &[f64]) -> Vec<f64> {
        let spectrum = self.fft.forward_real(u);
        self.fft
            .filter_real(&spectrum, self.fb.lowpass())
            .into_iter()
            .map(|v| v.max(0.0))
            .collect()
    }

    /// First layer restricted to the given filter indices.
    pub fn scalogram_of(&self, x: &Signal, indices: &[usize]) -> Result<ScatteringLayer> {
        self.check_signal(x)?;
        let spectrum = self.spectrum(x.samples());
        let entries: Vec<(Path, Vec<f64>)> = indices
            .par_iter()
            .map(|&j| (Path::root(j, self.fb), self.subband(&spectrum, j)))
            .collect();
        Ok(ScatteringLayer {
            depth: 1,
            nonlinearity: self.nonlinearity,
            entries: entries.into_iter().collect(),
            pooled: BTreeMap::new(),
        })
    }

    pub fn scalogram(&self, x: &Signal) -> Result<ScatteringLayer> {
        let all: Vec<usize> = (0..self.fb.len()).collect();
        self.scalogram_of(x, &all)
    }

    /// Number of paths the next layer would hold.
    pub fn child_count(&self, layer: &ScatteringLayer) -> usize {
        layer
            .entries
            .keys()
            .map(|p| self.fb.children(p.last()).len())
            .sum()
    }

    /// Children of one parent series: `|u * psi_j|^p` for every admissible `j`.
    pub fn scatter_path(&self, parent: &Path, u: &[f64]) -> Vec<(Path, Vec<f64>)> {
        let spectrum = self.spectrum(u);
        self.fb
            .children(parent.last())
            .map(|j| (parent.extend(j, self.fb), self.subband(&spectrum, j)))
            .collect()
    }

    pub fn scatter(&self, layer: &ScatteringLayer) -> ScatteringLayer {
        let parents: Vec<(&Path, &Vec<f64>)> = layer.entries.iter().collect();
        let children: Vec<Vec<(Path, Vec<f64>)>> = parents
            .par_iter()
            .map(|(p, u)| self.scatter_path(p, u))
            .collect();
        ScatteringLayer {
            depth: layer.depth + 1,
            nonlinearity: self.nonlinearity,
            entries: children.into_iter().flatten().collect(),
            pooled: BTreeMap::new(),
        }
    }

    pub fn pool(&self, mut layer: ScatteringLayer) -> ScatteringLayer {
        let pooled: Vec<(Path, Vec<f64>)> = layer
            .entries
            .par_iter()
            .map(|(p, u)| (p.clone(), self.pool_series(u)))
            .collect();
        layer.pooled = pooled.into_iter().collect();
        layer
    }

    /// Layers `1..=max_depth`, each pooled.
    pub fn forward(&self, x: &Signal, max_depth: usize, path_cap: usize) -> Result<Vec<ScatteringLayer>> {
        if max_depth == 0 {
            return Err(Error::config("max depth must be at least 1"));
        }
        let first = self.scalogram(x)?;
        if first.path_count() > path_cap {
            return Err(Error::PathCap {
                depth: 1,
                count: first.path_count(),
                cap: path_cap,
            });
        }
        let mut layers = vec![self.pool(first)];
        for depth in 2..=max_depth {
            let prev = layers.last().expect("at least one layer");
            let count = self.child_count(prev);
            if count > path_cap {
                return Err(Error::PathCap {
                    depth,
                    count,
                    cap: path_cap,
                });
            }
            let next = self.scatter(prev);
            layers.push(self.pool(next));
        }
        Ok(layers)
    }
}

/// First scattering layer `U_1(t, lambda) = |x * psi_lambda|^p(t)`.
pub fn scalogram(x: &Signal, fb: &FilterBank, nonlinearity: Nonlinearity) -> Result<ScatteringLayer> {
    Scatterer::new(fb, nonlinearity).scalogram(x)
}

/// Next layer from `layer`: every path is extended by each lower admissible
/// filter.
pub fn scatter_layer(
    layer: &ScatteringLayer,
    fb: &FilterBank,
    nonlinearity: Nonlinearity,
) -> Result<ScatteringLayer> {
    if layer.depth == 0 {
        return Err(Error::config("cannot scatter a depth-0 layer"));
    }
    Ok(Scatterer::new(fb, nonlinearity).scatter(layer))
}

/// Fill `pooled` with `U_m * phi_T`.
pub fn pool(layer: ScatteringLayer, lowpass: &[f64]) -> Result<ScatteringLayer> {
    let n = lowpass.len();
    if let Some((p, u)) = layer.entries.iter().find(|(_, u)| u.len() != n) {
        return Err(Error::config(format!(
            "path {:?} has {} samples, lowpass has {n}",
            p.lambdas(),
            u.len()
        )));
    }
    let fft = Spectral::new(n);
    let pooled: Vec<(Path, Vec<f64>)> = layer
        .entries
        .par_iter()
        .map(|(p, u)| {
            let spectrum = fft.forward_real(u);
            let s = fft
                .filter_real(&spectrum, lowpass)
                .into_iter()
                .map(|v| v.max(0.0))
                .collect();
            (p.clone(), s)
        })
        .collect();
    Ok(ScatteringLayer {
        pooled: pooled.into_iter().collect(),
        ..layer
    })
}

/// Build the bank for `x`'s grid and run layers `1..=cfg.max_depth`.
pub fn scattering_forward(x: &Signal, cfg: &ScatteringConfig) -> Result<Vec<ScatteringLayer>> {
    cfg.validate()?;
    let grid = FrequencyGrid::new(x.len(), x.sample_rate())?;
    let fb = build_filterbank(&cfg.bank, &grid)?;
    Scatterer::new(&fb, cfg.nonlinearity).forward(x, cfg.max_depth, cfg.path_cap)
}

/// Mean power captured by a layer, summed over paths.
///
/// In modulus mode this is `sum_paths mean(U^2)`; in power mode `U` already
/// holds squared moduli, so it is `sum_paths mean(U)`.
pub fn layer_energy(layer: &ScatteringLayer) -> f64 {
    layer
        .entries
        .values()
        .map(|u| {
            let n = u.len() as f64;
            match layer.nonlinearity {
                Nonlinearity::Modulus => u.iter().map(|v| v * v).sum::<f64>() / n,
                Nonlinearity::Power => u.iter().sum::<f64>() / n,
            }
        })
        .sum()
}

/// Layer energy mapped back to the units of input power.
///
/// In power mode a depth-`m` layer is homogeneous of degree `2^m` in the input
/// amplitude, so its energy is raised to `2^(1-m)`; modulus-mode energies are
/// already quadratic and pass through unchanged.
pub fn homogeneous_energy(layer: &ScatteringLayer) -> f64 {
    let e = layer_energy(layer);
    match layer.nonlinearity {
        Nonlinearity::Modulus => e,
        Nonlinearity::Power => e.powf((1.0 - layer.depth as f64).exp2()),
    }
}
