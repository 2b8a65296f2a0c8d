//! Fixed-configuration experiments: the two-tone masking heatmap, energy
//! decay of Fourier series across depth, and the invariance checks of the
//! masking coefficient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{build_filterbank, BankSpec, FilterBank, WaveletProfile};
use crate::masking::{analyze_masking, MaskingReport, Selection, TwoToneSpec};
use crate::scattering::{homogeneous_energy, Nonlinearity, Scatterer, DEFAULT_EPSILON_REL};
use crate::signals::{synth_fourier_series, Component};
use crate::spectral::FrequencyGrid;

pub const DESK_SAMPLE_RATE: f64 = 16384.0;
pub const DESK_LENGTH: usize = 1 << 16;

/// `count` values from `lo` to `hi` inclusive, evenly spaced in log2.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log2(), hi.log2());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp2())
                .collect()
        }
    }
}

/// Configuration of the masking heatmap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSpec {
    pub sample_rate: f64,
    pub length: usize,
    /// Masker frequency, Hz; also the top filter center.
    pub f1: f64,
    /// Masker amplitude. The default of 2 puts the masker's own on-center
    /// first-order coefficient `a1^2 / 4` at one.
    pub a1: f64,
    pub t: f64,
    pub q: u32,
    pub octaves: u32,
    pub order: u32,
    pub nonlinearity: Nonlinearity,
    pub epsilon_rel: f64,
    /// `a2 / a1` axis.
    pub amp_ratios: Vec<f64>,
    /// `|f2 - f1| / f1` axis, with `f2 < f1`.
    pub freq_gaps: Vec<f64>,
}

impl Default for HeatmapSpec {
    fn default() -> Self {
        Self {
            sample_rate: DESK_SAMPLE_RATE,
            length: DESK_LENGTH,
            f1: 2048.0,
            a1: 2.0,
            t: 0.5,
            q: 4,
            octaves: 9,
            order: 4,
            nonlinearity: Nonlinearity::Power,
            epsilon_rel: DEFAULT_EPSILON_REL,
            amp_ratios: log_spaced(1.0 / 1024.0, 1.0, 32),
            freq_gaps: (0..32).map(|i| (-10.0 + 0.3125 * i as f64).exp2()).collect(),
        }
    }
}

impl HeatmapSpec {
    pub fn bank(&self) -> BankSpec {
        BankSpec {
            profile: WaveletProfile::Gammatone { order: self.order },
            q: self.q,
            octaves: self.octaves,
            f_max: self.f1,
            t: self.t,
        }
    }

    fn validate(&self, grid: &FrequencyGrid) -> Result<()> {
        if grid.bin_of(self.f1).is_none() {
            return Err(Error::range("f1", format!("{} Hz is not on the FFT grid", self.f1)));
        }
        if !(self.a1.is_finite() && self.a1 > 0.0) {
            return Err(Error::range("a1", format!("{} must be positive", self.a1)));
        }
        if self.amp_ratios.is_empty() || self.freq_gaps.is_empty() {
            return Err(Error::config("heatmap axes must be nonempty"));
        }
        if let Some(r) = self.amp_ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::range("amplitude ratio", format!("{r} must be nonnegative")));
        }
        if let Some(g) = self.freq_gaps.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
            return Err(Error::range("frequency gap", format!("{g} not in (0, 1)")));
        }
        Ok(())
    }
}

/// Masking coefficient per (amplitude ratio, frequency gap) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapGrid {
    pub spec: HeatmapSpec,
    pub amp_ratios: Vec<f64>,
    pub freq_gaps: Vec<f64>,
    /// `f2` after snapping to the FFT grid, per gap.
    pub snapped_f2: Vec<f64>,
    /// Gaps whose snapped `f2` coincides with `f1`.
    pub degenerate: Vec<bool>,
    /// `kappa[amp][gap]`.
    pub kappa: Vec<Vec<f64>>,
    /// `lambda_2` carrying the largest renormalized coefficient, Hz.
    pub dominant_lambda2: Vec<Vec<f64>>,
}

pub fn run_heatmap(spec: &HeatmapSpec) -> Result<HeatmapGrid> {
    let grid = FrequencyGrid::new(spec.length, spec.sample_rate)?;
    spec.validate(&grid)?;
    let fb = build_filterbank(&spec.bank(), &grid)?;
    let snapped_f2: Vec<f64> = spec
        .freq_gaps
        .iter()
        .map(|g| grid.snap(spec.f1 * (1.0 - g)))
        .collect();
    let degenerate: Vec<bool> = snapped_f2.iter().map(|&f| f == spec.f1).collect();

    let cells: Vec<(usize, usize)> = (0..spec.amp_ratios.len())
        .flat_map(|i| (0..spec.freq_gaps.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let a2 = if degenerate[j] {
                0.0
            } else {
                spec.a1 * spec.amp_ratios[i]
            };
            let tones = TwoToneSpec {
                c1: Component::new(spec.a1, spec.f1, 0.0),
                c2: Component::new(a2, snapped_f2[j], 0.0),
                sample_rate: spec.sample_rate,
                length: spec.length,
            };
            let report = masking_report(&tones, &fb, spec.nonlinearity, spec.epsilon_rel)?;
            let lambda2 = report.dominant().map(|r| r.lambda2).unwrap_or(0.0);
            Ok((report.kappa_mean, lambda2))
        })
        .collect::<Result<_>>()?;

    let cols = spec.freq_gaps.len();
    let kappa = results.chunks(cols).map(|r| r.iter().map(|c| c.0).collect()).collect();
    let dominant_lambda2 = results.chunks(cols).map(|r| r.iter().map(|c| c.1).collect()).collect();
    Ok(HeatmapGrid {
        spec: spec.clone(),
        amp_ratios: spec.amp_ratios.clone(),
        freq_gaps: spec.freq_gaps.clone(),
        snapped_f2,
        degenerate,
        kappa,
        dominant_lambda2,
    })
}

fn masking_report(
    tones: &TwoToneSpec,
    fb: &FilterBank,
    nonlinearity: Nonlinearity,
    epsilon_rel: f64,
) -> Result<MaskingReport> {
    let x = tones.synth()?;
    analyze_masking(
        &x,
        fb,
        nonlinearity,
        epsilon_rel,
        Selection::NearestTo {
            frequency: tones.c1.frequency,
        },
    )
}

/// Configuration of the Fourier-series energy decay experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub counts: Vec<usize>,
    pub max_depth: usize,
    pub sample_rate: f64,
    pub length: usize,
    /// Fundamental, Hz.
    pub f1: f64,
    pub f_max: f64,
    pub octaves: u32,
    pub t: f64,
    pub nonlinearity: Nonlinearity,
    pub path_cap: usize,
}

impl Default for DecaySpec {
    fn default() -> Self {
        Self {
            counts: vec![1, 2, 3, 4, 8],
            max_depth: 4,
            sample_rate: DESK_SAMPLE_RATE,
            length: DESK_LENGTH,
            f1: 32.0,
            f_max: 2048.0,
            octaves: 7,
            t: 0.5,
            nonlinearity: Nonlinearity::Power,
            path_cap: crate::scattering::DEFAULT_PATH_CAP,
        }
    }
}

impl DecaySpec {
    pub fn bank(&self) -> BankSpec {
        BankSpec {
            profile: WaveletProfile::Shannon,
            q: 1,
            octaves: self.octaves,
            f_max: self.f_max,
            t: self.t,
        }
    }
}

/// Energy captured per depth and energy still propagating past it, both
/// relative to the input's mean power.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCurves {
    pub spec: DecaySpec,
    pub component_counts: Vec<usize>,
    pub depths: Vec<usize>,
    /// `captured[n][m - 1]` for depth `m`.
    pub captured: Vec<Vec<f64>>,
    /// `residual[n][m - 1]`: energy reaching depth `m + 1`.
    pub residual: Vec<Vec<f64>>,
}

/// Scatter `sum_{n<=N} cos(2 pi n f1 t)` through a Shannon octave bank and
/// account for energy layer by layer.
///
/// The energy that has not been captured after depth `m` is the energy of
/// layer `m + 1`, measured with [`homogeneous_energy`] so that every depth is
/// in units of input power. The input itself is the residual at depth 0.
pub fn run_decay(spec: &DecaySpec) -> Result<DecayCurves> {
    if spec.max_depth == 0 {
        return Err(Error::config("depth must be at least 1"));
    }
    if spec.counts.is_empty() {
        return Err(Error::config("component counts must be nonempty"));
    }
    let grid = FrequencyGrid::new(spec.length, spec.sample_rate)?;
    let fb = build_filterbank(&spec.bank(), &grid)?;
    let (lo, hi) = fb.covered_band();
    for &n in &spec.counts {
        if n == 0 {
            return Err(Error::config("component count must be at least 1"));
        }
        let top = n as f64 * spec.f1;
        if spec.f1 < lo || top >= hi {
            return Err(Error::config(format!(
                "N = {n}: harmonics {}..{top} Hz escape the bank's band [{lo}, {hi}) Hz",
                spec.f1
            )));
        }
    }
    let scatterer = Scatterer::new(&fb, spec.nonlinearity);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = spec
        .counts
        .iter()
        .map(|&n| decay_row(&scatterer, spec, n))
        .collect::<Result<_>>()?;
    let (captured, residual) = rows.into_iter().unzip();
    Ok(DecayCurves {
        spec: spec.clone(),
        component_counts: spec.counts.clone(),
        depths: (1..=spec.max_depth).collect(),
        captured,
        residual,
    })
}

fn decay_row(s: &Scatterer<'_>, spec: &DecaySpec, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = synth_fourier_series(n, spec.f1, spec.length, spec.sample_rate)?;
    let power = x.power();
    let mut layer = s.scalogram(&x)?;
    let mut captured = Vec::with_capacity(spec.max_depth);
    let mut residual = Vec::with_capacity(spec.max_depth);
    let mut previous = 1.0;
    for depth in 1..=spec.max_depth {
        let count = s.child_count(&layer);
        if count > spec.path_cap {
            return Err(Error::PathCap {
                depth: depth + 1,
                count,
                cap: spec.path_cap,
            });
        }
        layer = s.scatter(&layer);
        let remaining = homogeneous_energy(&layer) / power;
        captured.push(previous - remaining);
        residual.push(remaining);
        previous = remaining;
    }
    Ok((captured, residual))
}

/// Inputs to the invariance checks of the masking coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceSpec {
    pub base: TwoToneSpec,
    pub bank: BankSpec,
    /// Pooling scales at which phase invariance is measured, seconds.
    pub pooling_scales: Vec<f64>,
    /// Phase offsets applied to each component; the family is the full grid
    /// `thetas x thetas`.
    pub thetas: Vec<f64>,
    /// Transpositions by `2^(k/q)`.
    pub transpositions: Vec<i32>,
    /// Common amplitude scales `2^gamma`.
    pub gammas: Vec<f64>,
    pub epsilon_rel: f64,
}

impl Default for InvarianceSpec {
    fn default() -> Self {
        Self {
            base: TwoToneSpec {
                c1: Component::new(2.0, 512.0, 0.0),
                c2: Component::new(2.0, 480.0, 0.0),
                sample_rate: DESK_SAMPLE_RATE,
                length: DESK_LENGTH,
            },
            bank: BankSpec {
                profile: WaveletProfile::gammatone(),
                q: 4,
                octaves: 10,
                f_max: 4096.0,
                t: 0.5,
            },
            pooling_scales: vec![0.5],
            thetas: (0..8).map(|k| std::f64::consts::TAU * k as f64 / 8.0).collect(),
            transpositions: vec![1, 4, 8],
            gammas: vec![-2.0, -1.0, 1.0, 2.0],
            epsilon_rel: DEFAULT_EPSILON_REL,
        }
    }
}

pub const PHASE_TOLERANCE: f64 = 0.01;
pub const TRANSPOSITION_TOLERANCE: f64 = 0.05;
pub const EXPONENT_TOLERANCE: f64 = 1e-6;
pub const MODULUS_TOLERANCE: f64 = 0.01;

/// Below this magnitude two masking coefficients are compared absolutely.
pub const KAPPA_FLOOR: f64 = 1e-6;

/// Relative deviation, or absolute when both values sit below [`KAPPA_FLOOR`].
pub fn kappa_deviation(reference: f64, value: f64) -> f64 {
    if reference.abs() < KAPPA_FLOOR && value.abs() < KAPPA_FLOOR {
        (value - reference).abs()
    } else {
        (value - reference).abs() / reference.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDeviation {
    pub t: f64,
    pub reference: f64,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranspositionDeviation {
    pub k: i32,
    pub f1: f64,
    pub f2: f64,
    pub kappa: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub reference_kappa: f64,
    pub phase: Vec<PhaseDeviation>,
    pub transposition: Vec<TranspositionDeviation>,
    /// Least-squares slope of `ln kappa` against `ln alpha` in power mode.
    pub power_exponent: f64,
    pub modulus_deviation: f64,
}

impl InvarianceReport {
    pub fn phase_ok(&self) -> bool {
        self.phase.iter().all(|p| p.max_deviation < PHASE_TOLERANCE)
    }

    pub fn transposition_ok(&self) -> bool {
        self.transposition
            .iter()
            .all(|t| t.deviation < TRANSPOSITION_TOLERANCE)
    }

    pub fn power_ok(&self) -> bool {
        (self.power_exponent - 2.0).abs() < EXPONENT_TOLERANCE
    }

    pub fn modulus_ok(&self) -> bool {
        self.modulus_deviation < MODULUS_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.phase_ok() && self.transposition_ok() && self.power_ok() && self.modulus_ok()
    }
}

fn with_phases(base: &TwoToneSpec, t1: f64, t2: f64) -> TwoToneSpec {
    let mut s = *base;
    s.c1.phase += t1;
    s.c2.phase += t2;
    s
}

fn with_scale(base: &TwoToneSpec, alpha: f64) -> TwoToneSpec {
    let mut s = *base;
    s.c1.amplitude *= alpha;
    s.c2.amplitude *= alpha;
    s
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn run_invariance_suite(spec: &InvarianceSpec) -> Result<InvarianceReport> {
    spec.base.validate()?;
    let grid = spec.base.grid()?;
    for c in [&spec.base.c1, &spec.base.c2] {
        if grid.bin_of(c.frequency).is_none() {
            return Err(Error::range(
                "frequency",
                format!("{} Hz is not on the FFT grid", c.frequency),
            ));
        }
    }
    if spec.gammas.is_empty() {
        return Err(Error::config("intensity family needs at least one gamma"));
    }
    let fb = build_filterbank(&spec.bank, &grid)?;
    let kappa = |tones: &TwoToneSpec, fb: &FilterBank, nl: Nonlinearity| -> Result<f64> {
        Ok(masking_report(tones, fb, nl, spec.epsilon_rel)?.kappa_mean)
    };
    let reference = kappa(&spec.base, &fb, Nonlinearity::Power)?;

    let mut phase = Vec::new();
    for &t in &spec.pooling_scales {
        let bank = build_filterbank(&BankSpec { t, ..spec.bank }, &grid)?;
        let base = kappa(&spec.base, &bank, Nonlinearity::Power)?;
        let mut worst = 0.0f64;
        for &t1 in &spec.thetas {
            for &t2 in &spec.thetas {
                let k = kappa(&with_phases(&spec.base, t1, t2), &bank, Nonlinearity::Power)?;
                worst = worst.max(kappa_deviation(base, k));
            }
        }
        phase.push(PhaseDeviation {
            t,
            reference: base,
            max_deviation: worst,
        });
    }

    let mut transposition = Vec::new();
    for &k in &spec.transpositions {
        let factor = (k as f64 / spec.bank.q as f64).exp2();
        let mut tones = spec.base;
        tones.c1.frequency *= factor;
        tones.c2.frequency *= factor;
        let tones = tones.snapped()?;
        tones.validate()?;
        let value = kappa(&tones, &fb, Nonlinearity::Power)?;
        transposition.push(TranspositionDeviation {
            k,
            f1: tones.c1.frequency,
            f2: tones.c2.frequency,
            kappa: value,
            deviation: kappa_deviation(reference, value),
        });
    }

    let mut log_alpha = vec![0.0];
    let mut log_kappa = vec![reference.ln()];
    let modulus_reference = kappa(&spec.base, &fb, Nonlinearity::Modulus)?;
    let mut modulus_deviation = 0.0f64;
    for &gamma in &spec.gammas {
        let alpha = gamma.exp2();
        let scaled = with_scale(&spec.base, alpha);
        log_alpha.push(alpha.ln());
        log_kappa.push(kappa(&scaled, &fb, Nonlinearity::Power)?.ln());
        let m = kappa(&scaled, &fb, Nonlinearity::Modulus)?;
        modulus_deviation = modulus_deviation.max(kappa_deviation(modulus_reference, m));
    }
    let power_exponent = least_squares_slope(&log_alpha, &log_kappa);

    Ok(InvarianceReport {
        reference_kappa: reference,
        phase,
        transposition,
        power_exponent,
        modulus_deviation,
    })
}
