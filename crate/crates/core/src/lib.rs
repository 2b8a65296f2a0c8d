//! Wavelet scattering analysis of auditory masking.
//!
//! The crate builds constant-Q analytic filter banks, runs a scattering
//! cascade (filter, pointwise nonlinearity, Gaussian pooling) over periodic
//! signals, and measures how strongly a second tone modulates the response
//! to a first one. Experiments cover the masking heatmap, energy decay
//! across depth, and an invariance suite.
//!
//! ```
//! use scatmask::filterbank::{build_filterbank, BankSpec};
//! use scatmask::masking::{analyze_masking, Selection, TwoToneSpec};
//! use scatmask::scattering::Nonlinearity;
//! use scatmask::signals::Component;
//!
//! let tones = TwoToneSpec {
//!     c1: Component::new(2.0, 2048.0, 0.0),
//!     c2: Component::new(1.0, 1792.0, 0.0),
//!     sample_rate: 16384.0,
//!     length: 16384,
//! };
//! let grid = tones.grid().unwrap();
//! let fb = build_filterbank(&BankSpec::gammatone(4, 9, 2048.0, 0.5), &grid).unwrap();
//! let x = tones.synth().unwrap();
//! let sel = Selection::NearestTo { frequency: 2048.0 };
//! let report = analyze_masking(&x, &fb, Nonlinearity::Power, 1e-12, sel).unwrap();
//! assert!(report.kappa_mean > 0.0);
//! ```

pub mod cli;
pub mod error;
pub mod experiments;
pub mod filterbank;
pub mod masking;
pub mod output;
pub mod scattering;
pub mod signals;
pub mod spectral;

pub use error::{Error, Result};
pub use filterbank::{build_filterbank, BankSpec, FilterBank, WaveletProfile};
pub use masking::{analyze_masking, MaskingReport, Selection, TwoToneSpec};
pub use scattering::{scattering_forward, Nonlinearity, ScatteringConfig};
pub use signals::{Component, Signal};
pub use spectral::FrequencyGrid;
