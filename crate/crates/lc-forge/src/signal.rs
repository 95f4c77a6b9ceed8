//! Signal and annotation data types, file ingestion, and a deterministic
//! synthetic ECG generator for self-contained testing.
//!
//! Two on-disk signal formats are supported:
//!
//! * CSV — a header line `# fs=<Hz> unit=mV`, then one amplitude per line or
//!   `index,amplitude` pairs;
//! * raw16 — little-endian signed 16-bit samples with a mandatory JSON
//!   sidecar `<name>.meta.json` holding `{"fs": ..., "gain": ..., "baseline": ...}`
//!   (gain in ADC units per mV).
//!
//! Annotations are plain text, one R-peak sample index per line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LcError, Result};
use crate::util::percentile_sorted;

/// A uniformly sampled amplitude series in millivolts.
///
/// The time of sample `i` is `start_time + i / sample_rate`. All sampling and
/// reconstruction machinery works in signal-local time (seconds from the
/// first sample); `start_time` is provenance carried through splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSignal {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    #[serde(default)]
    pub start_time: f64,
}

impl UniformSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(LcError::Argument(format!(
                "sample rate must be a positive real, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            start_time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Span of the signal in seconds (`len / sample_rate`).
    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// Signal-local time of sample `i`.
    pub fn time_of(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate
    }
}

/// Sorted R-peak sample indices into an associated [`UniformSignal`].
/// Consecutive peaks delimit one heartbeat segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeatAnnotations {
    indices: Vec<usize>,
}

impl BeatAnnotations {
    /// Builds annotations from raw indices, sorting and deduplicating.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn peak_count(&self) -> usize {
        self.indices.len()
    }

    /// Number of heartbeat segments (peaks minus one, saturating).
    pub fn beat_count(&self) -> usize {
        self.indices.len().saturating_sub(1)
    }

    /// Checks every index lies within the signal.
    pub fn validate_for(&self, signal: &UniformSignal) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= signal.len() => Err(LcError::Data(format!(
                "annotation index {last} outside signal of {} samples",
                signal.len()
            ))),
            _ => Ok(()),
        }
    }

    /// Re-expresses the peaks at `self.indices[from..]` relative to the
    /// sample `origin` (used when splitting signals).
    pub fn shifted(&self, from: usize, origin: usize) -> Self {
        Self {
            indices: self.indices[from..].iter().map(|&i| i - origin).collect(),
        }
    }
}

/// Percentile-trimmed amplitude range of a signal: `x_min` and `x_max` are
/// the 5th and 95th percentiles; `delta = x_max - x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalRange {
    pub x_min: f64,
    pub x_max: f64,
}

impl SignalRange {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_max >= x_min) {
            return Err(LcError::Argument(format!(
                "range maximum {x_max} below minimum {x_min}"
            )));
        }
        Ok(Self { x_min, x_max })
    }

    pub fn delta(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// 5th/95th percentile range of the amplitude distribution, with the
/// linear-interpolation percentile convention. Requires at least 2 samples.
/// A constant signal yields `delta = 0`; level generators reject that range.
pub fn signal_range(signal: &UniformSignal) -> Result<SignalRange> {
    if signal.len() < 2 {
        return Err(LcError::Argument(format!(
            "signal range needs at least 2 samples, got {}",
            signal.len()
        )));
    }
    let mut sorted = signal.samples.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let x_min = percentile_sorted(&sorted, 0.05);
    let x_max = percentile_sorted(&sorted, 0.95);
    SignalRange::new(x_min, x_max)
}

/// On-disk signal encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFormat {
    Csv,
    Raw16,
}

impl SignalFormat {
    /// Guesses the format from a file extension (`.csv` is CSV, everything
    /// else is treated as raw16).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => SignalFormat::Csv,
            _ => SignalFormat::Raw16,
        }
    }
}

/// Loads a signal file, converting amplitudes to millivolts.
pub fn load_signal(path: &Path, format: SignalFormat) -> Result<UniformSignal> {
    match format {
        SignalFormat::Csv => load_csv_signal(path),
        SignalFormat::Raw16 => load_raw16_signal(path),
    }
}

fn load_csv_signal(path: &Path) -> Result<UniformSignal> {
    let text = fs::read_to_string(path)?;
    let mut fs_hz: Option<f64> = None;
    let mut samples = Vec::new();
    let mut last_index: Option<u64> = None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            for token in header.split_whitespace() {
                if let Some(v) = token.strip_prefix("fs=") {
                    fs_hz = Some(v.parse::<f64>().map_err(|_| {
                        LcError::Format(format!("{}: bad fs value {v:?}", path.display()))
                    })?);
                } else if let Some(u) = token.strip_prefix("unit=") {
                    if u != "mV" {
                        return Err(LcError::Format(format!(
                            "{}: unsupported unit {u:?} (only mV)",
                            path.display()
                        )));
                    }
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let amplitude_str = match fields.len() {
            1 => fields[0],
            2 => {
                let idx = fields[0].parse::<u64>().map_err(|_| {
                    LcError::Format(format!(
                        "{}:{}: bad sample index {:?}",
                        path.display(),
                        lineno + 1,
                        fields[0]
                    ))
                })?;
                if let Some(prev) = last_index {
                    if idx <= prev {
                        return Err(LcError::Data(format!(
                            "{}:{}: non-monotone sample index {idx} after {prev}",
                            path.display(),
                            lineno + 1
                        )));
                    }
                }
                last_index = Some(idx);
                fields[1]
            }
            n => {
                return Err(LcError::Format(format!(
                    "{}:{}: expected 1 or 2 fields, got {n}",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        let amplitude = amplitude_str.parse::<f64>().map_err(|_| {
            LcError::Format(format!(
                "{}:{}: bad amplitude {amplitude_str:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        if !amplitude.is_finite() {
            return Err(LcError::Data(format!(
                "{}:{}: non-finite sample",
                path.display(),
                lineno + 1
            )));
        }
        samples.push(amplitude);
    }

    let fs_hz = fs_hz.ok_or_else(|| {
        LcError::Format(format!(
            "{}: missing `# fs=<Hz>` header line",
            path.display()
        ))
    })?;
    UniformSignal::new(samples, fs_hz)
}

/// Sidecar metadata for raw16 files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Raw16Meta {
    /// Sampling rate in Hz.
    pub fs: f64,
    /// ADC units per millivolt.
    pub gain: f64,
    /// ADC value corresponding to 0 mV.
    pub baseline: i64,
}

fn sidecar_path(path: &Path) -> Result<PathBuf> {
    // `<file>.meta.json` next to the file, falling back to the extension-
    // replaced variant (`rec.raw16` -> `rec.meta.json`).
    let appended = PathBuf::from(format!("{}.meta.json", path.display()));
    if appended.exists() {
        return Ok(appended);
    }
    let replaced = path.with_extension("meta.json");
    if replaced.exists() {
        return Ok(replaced);
    }
    Err(LcError::Format(format!(
        "missing raw16 sidecar: tried {} and {}",
        appended.display(),
        replaced.display()
    )))
}

fn load_raw16_signal(path: &Path) -> Result<UniformSignal> {
    let meta_path = sidecar_path(path)?;
    let meta: Raw16Meta = serde_json::from_str(&fs::read_to_string(&meta_path)?)
        .map_err(|e| LcError::Format(format!("{}: {e}", meta_path.display())))?;
    if meta.gain == 0.0 || !meta.gain.is_finite() {
        return Err(LcError::Format(format!(
            "{}: gain must be non-zero",
            meta_path.display()
        )));
    }
    let bytes = fs::read(path)?;
    if bytes.len() % 2 != 0 {
        return Err(LcError::Format(format!(
            "{}: odd byte count {} for 16-bit samples",
            path.display(),
            bytes.len()
        )));
    }
    let samples: Vec<f64> = bytes
        .chunks_exact(2)
        .map(|c| {
            let raw = i16::from_le_bytes([c[0], c[1]]) as f64;
            (raw - meta.baseline as f64) / meta.gain
        })
        .collect();
    UniformSignal::new(samples, meta.fs)
}

/// Writes a signal in the CSV format (`# fs=<Hz> unit=mV` header, one
/// amplitude per line, full round-trip precision).
pub fn write_csv_signal(path: &Path, signal: &UniformSignal) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# fs={} unit=mV", signal.sample_rate);
    for &s in &signal.samples {
        let _ = writeln!(out, "{s}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads R-peak annotations: one non-negative integer sample index per line.
/// The result is sorted and deduplicated.
pub fn load_annotations(path: &Path) -> Result<BeatAnnotations> {
    let text = fs::read_to_string(path)?;
    let mut indices = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value = line.parse::<i64>().map_err(|_| {
            LcError::Format(format!(
                "{}:{}: bad annotation index {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        if value < 0 {
            return Err(LcError::Data(format!(
                "{}:{}: negative annotation index {value}",
                path.display(),
                lineno + 1
            )));
        }
        indices.push(value as usize);
    }
    Ok(BeatAnnotations::new(indices))
}

/// Writes annotations, one index per line.
pub fn write_annotations(path: &Path, beats: &BeatAnnotations) -> Result<()> {
    let mut out = String::new();
    for &i in beats.indices() {
        let _ = writeln!(out, "{i}");
    }
    fs::write(path, out)?;
    Ok(())
}

// Beat template: sum-of-Gaussians bumps at fixed beat phases, (phase, width,
// amplitude mV). Sharp R peak, small P/T waves; span roughly 1 mV.
const ECG_WAVES: [(f64, f64, f64); 5] = [
    (0.15, 0.040, 0.12),  // P
    (0.26, 0.014, -0.10), // Q
    (0.30, 0.018, 0.85),  // R
    (0.34, 0.018, -0.15), // S
    (0.55, 0.070, 0.25),  // T
];
const ECG_R_PHASE: f64 = 0.30;

/// Deterministic synthetic ECG: fixed sum-of-Gaussians beats with ±5% seeded
/// RR-interval jitter. Returns the signal together with annotations marking
/// the template R-peak sample of every beat.
pub fn synthesize_ecg(
    duration: f64,
    heart_rate: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<(UniformSignal, BeatAnnotations)> {
    if !(duration > 0.0) {
        return Err(LcError::Argument(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if !(30.0..=220.0).contains(&heart_rate) {
        return Err(LcError::Argument(format!(
            "heart rate {heart_rate} outside 30..=220 bpm"
        )));
    }
    if !(sample_rate > 0.0) {
        return Err(LcError::Argument(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rr_nominal = 60.0 / heart_rate;
    let n = (duration * sample_rate).round() as usize;
    let mut samples = vec![0.0f64; n];
    let mut r_peaks = Vec::new();

    let mut onset = 0.0;
    while onset < duration {
        let jitter: f64 = rng.random_range(-0.05..=0.05);
        let rr = rr_nominal * (1.0 + jitter);
        for &(phase, width, amplitude) in &ECG_WAVES {
            let center = onset + phase * rr;
            let sigma = width * rr;
            let lo = (((center - 5.0 * sigma) * sample_rate).floor().max(0.0)) as usize;
            let hi = ((((center + 5.0 * sigma) * sample_rate).ceil()) as usize).min(n);
            for (i, sample) in samples.iter_mut().enumerate().take(hi).skip(lo) {
                let t = i as f64 / sample_rate;
                let z = (t - center) / sigma;
                *sample += amplitude * (-0.5 * z * z).exp();
            }
        }
        let r_index = ((onset + ECG_R_PHASE * rr) * sample_rate).round() as usize;
        if r_index < n {
            r_peaks.push(r_index);
        }
        onset += rr;
    }

    Ok((
        UniformSignal::new(samples, sample_rate)?,
        BeatAnnotations::new(r_peaks),
    ))
}
