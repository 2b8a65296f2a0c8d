//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid flags or configuration, 3 for
//! I/O failures.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{run_decay, run_heatmap, DecaySpec, HeatmapSpec, DESK_LENGTH, DESK_SAMPLE_RATE};
use crate::filterbank::{build_filterbank, BankSpec, WaveletProfile};
use crate::masking::{analyze_masking, Selection, TwoToneSpec};
use crate::output::{csv_table, fmt_f64, sidecar_path, to_json, write_file};
use crate::scattering::{Nonlinearity, DEFAULT_EPSILON_REL};
use crate::signals::Component;
use crate::spectral::FrequencyGrid;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

const DETERMINISM_NOTE: &str =
    "seed-free; outputs depend only on this configuration, not on thread count";

#[derive(Debug, Parser)]
#[command(name = "scatmask", version, about = "Wavelet scattering masking analysis")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write filter magnitudes as CSV with a JSON sidecar.
    FilterbankDump(DumpArgs),
    /// Masking coefficient of a two-tone signal.
    Masking(MaskingArgs),
    /// Masking heatmap over amplitude ratio and frequency gap.
    Heatmap(HeatmapArgs),
    /// Energy decay across depth for Fourier series.
    Decay(DecayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Gammatone,
    Shannon,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NonlinearityArg {
    Power,
    Modulus,
}

impl From<NonlinearityArg> for Nonlinearity {
    fn from(a: NonlinearityArg) -> Self {
        match a {
            NonlinearityArg::Power => Nonlinearity::Power,
            NonlinearityArg::Modulus => Nonlinearity::Modulus,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SelectionArg {
    /// Paths whose first filter is nearest to f1.
    Nearest,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = DESK_SAMPLE_RATE)]
    sample_rate: f64,
    /// Samples; a power of two.
    #[arg(long, default_value_t = DESK_LENGTH)]
    length: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.length, self.sample_rate)
    }
}

#[derive(Debug, Args)]
struct BankArgs {
    #[arg(long, value_enum, default_value = "gammatone")]
    profile: ProfileArg,
    /// Quality factor; defaults to 4 (gammatone) or 1 (shannon).
    #[arg(long)]
    q: Option<u32>,
    #[arg(long, default_value_t = 9)]
    octaves: u32,
    /// Highest filter center, Hz.
    #[arg(long)]
    f_max: Option<f64>,
    /// Pooling time scale, seconds.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Gammatone order.
    #[arg(long, default_value_t = 4)]
    order: u32,
}

impl BankArgs {
    fn spec(&self, default_f_max: f64) -> BankSpec {
        let (profile, q) = match self.profile {
            ProfileArg::Gammatone => (WaveletProfile::Gammatone { order: self.order }, self.q.unwrap_or(4)),
            ProfileArg::Shannon => (WaveletProfile::Shannon, self.q.unwrap_or(1)),
        };
        BankSpec {
            profile,
            q,
            octaves: self.octaves,
            f_max: self.f_max.unwrap_or(default_f_max),
            t: self.t,
        }
    }
}

#[derive(Debug, Args)]
struct DumpArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    bank: BankArgs,
    /// CSV output path; metadata goes to the same path with a .json extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MaskingArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    bank: BankArgs,
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    #[arg(long, default_value_t = 2048.0)]
    f1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi1: f64,
    #[arg(long, default_value_t = 1.0)]
    a2: f64,
    #[arg(long, default_value_t = 1920.0)]
    f2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi2: f64,
    #[arg(long, value_enum, default_value = "power")]
    nonlinearity: NonlinearityArg,
    #[arg(long, value_enum, default_value = "nearest")]
    selection: SelectionArg,
    /// Renormalization guard relative to the peak first-order coefficient.
    #[arg(long, default_value_t = DEFAULT_EPSILON_REL)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct HeatmapArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 2048.0)]
    f1: f64,
    #[arg(long, default_value_t = 2.0)]
    a1: f64,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = 4)]
    q: u32,
    #[arg(long, default_value_t = 9)]
    octaves: u32,
    #[arg(long, default_value_t = 4)]
    order: u32,
    #[arg(long, value_enum, default_value = "power")]
    nonlinearity: NonlinearityArg,
    #[arg(long, default_value_t = DEFAULT_EPSILON_REL)]
    epsilon: f64,
    /// Number of a2/a1 values, log-spaced up to 1.
    #[arg(long, default_value_t = 32)]
    amp_count: usize,
    #[arg(long, default_value_t = 1.0 / 1024.0)]
    amp_min: f64,
    /// Number of |f2 - f1|/f1 values, log-spaced.
    #[arg(long, default_value_t = 32)]
    gap_count: usize,
    #[arg(long, default_value_t = 1.0 / 1024.0)]
    gap_min: f64,
    #[arg(long, default_value_t = (-0.3125f64).exp2())]
    gap_max: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DecayArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Component counts, comma separated.
    #[arg(long = "n", value_delimiter = ',', default_values_t = vec![1usize, 2, 3, 4, 8])]
    counts: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 32.0)]
    f1: f64,
    #[arg(long, default_value_t = 2048.0)]
    f_max: f64,
    #[arg(long, default_value_t = 7)]
    octaves: u32,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, value_enum, default_value = "power")]
    nonlinearity: NonlinearityArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::config("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli.command))),
        None => dispatch(&cli.command),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => EXIT_IO,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::FilterbankDump(a) => cmd_filterbank_dump(a),
        Command::Masking(a) => cmd_masking(a),
        Command::Heatmap(a) => cmd_heatmap(a),
        Command::Decay(a) => cmd_decay(a),
    }
}

#[derive(Serialize)]
struct DumpMeta<'a> {
    bank: BankSpec,
    sample_rate: f64,
    length: usize,
    lambdas: &'a [f64],
    rows: &'static str,
    columns: &'static str,
    determinism: &'static str,
}

fn cmd_filterbank_dump(a: &DumpArgs) -> Result<()> {
    let grid = a.grid.grid()?;
    let fb = build_filterbank(&a.bank.spec(2048.0), &grid)?;
    let header: Vec<String> = fb.lambdas().iter().map(|l| format!("lambda_{}", fmt_f64(*l))).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..grid.len() / 2).map(|k| {
        (0..fb.len())
            .map(|j| fmt_f64(fb.hat(j)[k].norm()))
            .collect::<Vec<_>>()
    });
    write_file(&a.out, &csv_table(&header, rows))?;
    let meta = DumpMeta {
        bank: fb.spec(),
        sample_rate: grid.sample_rate(),
        length: grid.len(),
        lambdas: fb.lambdas(),
        rows: "row k (from 0) is grid frequency k * sample_rate / length, for k < length / 2",
        columns: "magnitude of each filter's frequency response, in lambdas order",
        determinism: DETERMINISM_NOTE,
    };
    write_file(&sidecar_path(&a.out), &to_json(&meta))
}

#[derive(Serialize)]
struct MaskingMeta<'a> {
    tones: TwoToneSpec,
    bank: BankSpec,
    nonlinearity: Nonlinearity,
    selection: Selection,
    epsilon_rel: f64,
    epsilon: f64,
    kappa_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<&'a [crate::masking::PathMean]>,
    determinism: &'static str,
}

fn cmd_masking(a: &MaskingArgs) -> Result<()> {
    let grid = a.grid.grid()?;
    let requested = TwoToneSpec {
        c1: Component::new(a.a1, a.f1, a.phi1),
        c2: Component::new(a.a2, a.f2, a.phi2),
        sample_rate: grid.sample_rate(),
        length: grid.len(),
    };
    requested.validate()?;
    let tones = requested.snapped()?;
    let bank = a.bank.spec(tones.c1.frequency);
    let fb = build_filterbank(&bank, &grid)?;
    let selection = match a.selection {
        SelectionArg::Nearest => Selection::NearestTo {
            frequency: tones.c1.frequency,
        },
        SelectionArg::All => Selection::All,
    };
    let x = tones.synth()?;
    let report = analyze_masking(&x, &fb, a.nonlinearity.into(), a.epsilon, selection)?;
    let meta = |rows| MaskingMeta {
        tones,
        bank,
        nonlinearity: report.nonlinearity,
        selection,
        epsilon_rel: a.epsilon,
        epsilon: report.epsilon,
        kappa_mean: report.kappa_mean,
        rows,
        determinism: DETERMINISM_NOTE,
    };
    match a.format {
        FormatArg::Json => write_file(&a.out, &to_json(&meta(Some(&report.rows))))?,
        FormatArg::Csv => {
            let rows = report.rows.iter().map(|r| {
                vec![fmt_f64(r.lambda1), fmt_f64(r.lambda2), fmt_f64(r.s2n_mean)]
            });
            write_file(&a.out, &csv_table(&["lambda1", "lambda2", "s2n_mean"], rows))?;
            write_file(&sidecar_path(&a.out), &to_json(&meta(None)))?;
        }
    }
    println!("{}", fmt_f64(report.kappa_mean));
    Ok(())
}

#[derive(Serialize)]
struct HeatmapCell {
    amp_ratio: f64,
    freq_gap: f64,
    kappa: f64,
    dominant_lambda2: f64,
    snapped_f2: f64,
}

#[derive(Serialize)]
struct HeatmapMeta<'a> {
    config: &'a HeatmapSpec,
    bank: BankSpec,
    degenerate_gaps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cells: Option<&'a [HeatmapCell]>,
    determinism: &'static str,
}

fn cmd_heatmap(a: &HeatmapArgs) -> Result<()> {
    if a.amp_count == 0 || a.gap_count == 0 {
        return Err(Error::config("--amp-count and --gap-count must be at least 1"));
    }
    if !(a.amp_min > 0.0 && a.amp_min <= 1.0) {
        return Err(Error::config("--amp-min must lie in (0, 1]"));
    }
    if !(a.gap_min > 0.0 && a.gap_min <= a.gap_max && a.gap_max < 1.0) {
        return Err(Error::config("--gap-min and --gap-max must satisfy 0 < min <= max < 1"));
    }
    let spec = HeatmapSpec {
        sample_rate: a.grid.sample_rate,
        length: a.grid.length,
        f1: a.f1,
        a1: a.a1,
        t: a.t,
        q: a.q,
        octaves: a.octaves,
        order: a.order,
        nonlinearity: a.nonlinearity.into(),
        epsilon_rel: a.epsilon,
        amp_ratios: crate::experiments::log_spaced(a.amp_min, 1.0, a.amp_count),
        freq_gaps: crate::experiments::log_spaced(a.gap_min, a.gap_max, a.gap_count),
    };
    let grid = run_heatmap(&spec)?;
    let mut cells = Vec::new();
    for (i, &r) in grid.amp_ratios.iter().enumerate() {
        for (j, &g) in grid.freq_gaps.iter().enumerate() {
            cells.push(HeatmapCell {
                amp_ratio: r,
                freq_gap: g,
                kappa: grid.kappa[i][j],
                dominant_lambda2: grid.dominant_lambda2[i][j],
                snapped_f2: grid.snapped_f2[j],
            });
        }
    }
    let degenerate_gaps = grid
        .freq_gaps
        .iter()
        .zip(&grid.degenerate)
        .filter(|(_, d)| **d)
        .map(|(g, _)| *g)
        .collect();
    let meta = |cells| HeatmapMeta {
        config: &spec,
        bank: spec.bank(),
        degenerate_gaps,
        cells,
        determinism: DETERMINISM_NOTE,
    };
    match a.format {
        FormatArg::Json => write_file(&a.out, &to_json(&meta(Some(&cells)))),
        FormatArg::Csv => {
            let rows = cells.iter().map(|c| {
                vec![
                    fmt_f64(c.amp_ratio),
                    fmt_f64(c.freq_gap),
                    fmt_f64(c.kappa),
                    fmt_f64(c.dominant_lambda2),
                    fmt_f64(c.snapped_f2),
                ]
            });
            let header = ["amp_ratio", "freq_gap", "kappa", "dominant_lambda2", "snapped_f2"];
            write_file(&a.out, &csv_table(&header, rows))?;
            write_file(&sidecar_path(&a.out), &to_json(&meta(None)))
        }
    }
}

#[derive(Serialize)]
struct DecayRow {
    #[serde(rename = "N")]
    n: usize,
    depth: usize,
    captured: f64,
    residual: f64,
}

#[derive(Serialize)]
struct DecayMeta<'a> {
    config: &'a DecaySpec,
    bank: BankSpec,
    energy: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<&'a [DecayRow]>,
    determinism: &'static str,
}

fn cmd_decay(a: &DecayArgs) -> Result<()> {
    let spec = DecaySpec {
        counts: a.counts.clone(),
        max_depth: a.depth,
        sample_rate: a.grid.sample_rate,
        length: a.grid.length,
        f1: a.f1,
        f_max: a.f_max,
        octaves: a.octaves,
        t: a.t,
        nonlinearity: a.nonlinearity.into(),
        ..DecaySpec::default()
    };
    let curves = run_decay(&spec)?;
    let mut rows = Vec::new();
    for (i, &n) in curves.component_counts.iter().enumerate() {
        for (m, &depth) in curves.depths.iter().enumerate() {
            rows.push(DecayRow {
                n,
                depth,
                captured: curves.captured[i][m],
                residual: curves.residual[i][m],
            });
        }
    }
    let meta = |rows| DecayMeta {
        config: &spec,
        bank: spec.bank(),
        energy: "layer energy in units of input power, relative to the input's mean power; \
                 residual after depth m is the energy reaching depth m + 1",
        rows,
        determinism: DETERMINISM_NOTE,
    };
    match a.format {
        FormatArg::Json => write_file(&a.out, &to_json(&meta(Some(&rows)))),
        FormatArg::Csv => {
            let body = rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.depth.to_string(),
                    fmt_f64(r.captured),
                    fmt_f64(r.residual),
                ]
            });
            write_file(&a.out, &csv_table(&["N", "depth", "captured", "residual"], body))?;
            write_file(&sidecar_path(&a.out), &to_json(&meta(None)))
        }
    }
}
