//! Merit figures: RMSE, the regularized objective, the sampling reduction
//! factor, per-heartbeat segmentation and the error-per-event metric, plus
//! report aggregation.
//!
//! Optimization runs in millivolts; reports convert to microvolts to match
//! the table conventions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{reconstruct_linear, EventStream, GridSpec};
use crate::error::{LcError, Result};
use crate::signal::{BeatAnnotations, UniformSignal};
use crate::util::{mean, percentile_sorted, std_dev};

pub const UV_PER_MV: f64 = 1000.0;

/// Distribution summary used by the report tables: mean, population std,
/// median and the box-plot percentiles (0.5, 25, 75, 99.5).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub p0_5: f64,
    pub p25: f64,
    pub p75: f64,
    pub p99_5: f64,
}

impl SummaryStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Some(SummaryStats {
            mean: mean(values),
            std: std_dev(values),
            median: percentile_sorted(&sorted, 0.5),
            p0_5: percentile_sorted(&sorted, 0.005),
            p25: percentile_sorted(&sorted, 0.25),
            p75: percentile_sorted(&sorted, 0.75),
            p99_5: percentile_sorted(&sorted, 0.995),
        })
    }
}

/// All merit figures for one (signal, scheme) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// RMSE of beat `k` (the half-open segment between R-peaks k and k+1), μV.
    pub per_beat_rmse_uv: Vec<f64>,
    /// Events recorded ÷ uniform samples in the same span.
    pub srf: f64,
    /// Whole-signal RMSE, μV.
    pub rmse_overall_uv: f64,
    /// `srf * rmse_overall_uv`.
    pub error_per_event_uv: f64,
    /// Per-beat RMSE scaled by the stream's SRF, μV.
    pub per_beat_error_per_event_uv: Vec<f64>,
    /// Regularized objective in mV: `rmse_mv * (1 + lambda * srf)`.
    pub objective_mv: f64,
    pub lambda: f64,
    pub summary_rmse: Option<SummaryStats>,
    pub summary_error_per_event: Option<SummaryStats>,
    pub warnings: Vec<String>,
}

fn check_aligned(reference: &UniformSignal, candidate: &UniformSignal) -> Result<()> {
    if reference.len() != candidate.len() {
        return Err(LcError::Argument(format!(
            "signal length mismatch: {} vs {}",
            reference.len(),
            candidate.len()
        )));
    }
    if reference.sample_rate != candidate.sample_rate {
        return Err(LcError::Argument(format!(
            "sample rate mismatch: {} vs {}",
            reference.sample_rate, candidate.sample_rate
        )));
    }
    if reference.is_empty() {
        return Err(LcError::Argument("cannot compute RMSE of empty signals".into()));
    }
    Ok(())
}

fn mean_square_mv(reference: &[f64], candidate: &[f64]) -> f64 {
    let n = reference.len() as f64;
    reference
        .iter()
        .zip(candidate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n
}

/// Root-mean-square difference in millivolts.
pub fn rmse_mv(reference: &UniformSignal, candidate: &UniformSignal) -> Result<f64> {
    check_aligned(reference, candidate)?;
    Ok(mean_square_mv(&reference.samples, &candidate.samples).sqrt())
}

/// Root-mean-square difference in microvolts.
pub fn rmse_uv(reference: &UniformSignal, candidate: &UniformSignal) -> Result<f64> {
    Ok(rmse_mv(reference, candidate)? * UV_PER_MV)
}

/// Sampling reduction factor: events recorded ÷ uniform samples.
pub fn srf(stream: &EventStream) -> f64 {
    if stream.source_sample_count == 0 {
        return 0.0;
    }
    stream.len() as f64 / stream.source_sample_count as f64
}

/// The optimization objective in millivolts: reconstructs the stream on the
/// reference grid and returns `rmse * (1 + lambda * srf)`.
pub fn objective_mv(
    reference: &UniformSignal,
    stream: &EventStream,
    lambda: f64,
) -> Result<f64> {
    let recon = reconstruct_linear(stream, GridSpec::of(reference))?;
    Ok(rmse_mv(reference, &recon)? * (1.0 + lambda * srf(stream)))
}

/// One RMSE (μV) per half-open heartbeat segment `[r_k, r_{k+1})`.
pub fn per_beat_rmse_uv(
    reference: &UniformSignal,
    candidate: &UniformSignal,
    beats: &BeatAnnotations,
) -> Result<Vec<f64>> {
    check_aligned(reference, candidate)?;
    if beats.peak_count() < 2 {
        return Err(LcError::Argument(format!(
            "need at least 2 R-peaks to delimit a beat, got {}",
            beats.peak_count()
        )));
    }
    beats.validate_for(reference)?;
    let idx = beats.indices();
    Ok(idx
        .windows(2)
        .map(|w| {
            mean_square_mv(
                &reference.samples[w[0]..w[1]],
                &candidate.samples[w[0]..w[1]],
            )
            .sqrt()
                * UV_PER_MV
        })
        .collect())
}

/// Average reconstruction error attributable to each recorded event.
pub fn error_per_event_uv(srf: f64, rmse_uv: f64) -> f64 {
    srf * rmse_uv
}

/// Reconstructs the stream against the reference and aggregates every merit
/// figure into one report. Pass annotations to get the per-beat
/// distributions; they need at least 2 R-peaks.
pub fn evaluate(
    reference: &UniformSignal,
    stream: &EventStream,
    beats: Option<&BeatAnnotations>,
    lambda: f64,
) -> Result<MetricsReport> {
    let recon = reconstruct_linear(stream, GridSpec::of(reference))?;
    let mut warnings = Vec::new();
    if stream.is_empty() {
        warnings.push("empty event stream: reconstruction is all zeros".to_string());
    }
    let srf_value = srf(stream);
    let rmse_mv_value = rmse_mv(reference, &recon)?;
    let rmse_overall_uv = rmse_mv_value * UV_PER_MV;

    let per_beat = match beats {
        Some(b) => per_beat_rmse_uv(reference, &recon, b)?,
        None => Vec::new(),
    };
    let per_beat_epe: Vec<f64> = per_beat.iter().map(|&r| srf_value * r).collect();

    Ok(MetricsReport {
        summary_rmse: SummaryStats::of(&per_beat),
        summary_error_per_event: SummaryStats::of(&per_beat_epe),
        per_beat_rmse_uv: per_beat,
        srf: srf_value,
        rmse_overall_uv,
        error_per_event_uv: error_per_event_uv(srf_value, rmse_overall_uv),
        per_beat_error_per_event_uv: per_beat_epe,
        objective_mv: rmse_mv_value * (1.0 + lambda * srf_value),
        lambda,
        warnings,
    })
}

/// Writes the per-beat distributions as a flat CSV for plotting.
pub fn write_beats_csv(path: &Path, report: &MetricsReport) -> Result<()> {
    let mut out = String::from("beat,rmse_uv,error_per_event_uv\n");
    for (k, (r, e)) in report
        .per_beat_rmse_uv
        .iter()
        .zip(&report.per_beat_error_per_event_uv)
        .enumerate()
    {
        let _ = writeln!(out, "{k},{r},{e}");
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Event;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sig(samples: &[f64], rate: f64) -> UniformSignal {
        UniformSignal::new(samples.to_vec(), rate).unwrap()
    }

    fn stream_with(n_events: usize, n_samples: usize) -> EventStream {
        EventStream {
            events: (0..n_events)
                .map(|i| Event { time: i as f64 * 0.01, amplitude: 0.0, level_index: 0 })
                .collect(),
            source_duration: n_samples as f64,
            source_sample_count: n_samples,
        }
    }

    #[test]
    fn rmse_basics() {
        let a = sig(&[0.0, 0.0, 0.0], 1.0);
        assert_eq!(rmse_uv(&a, &a).unwrap(), 0.0);

        let b = sig(&[1.0, 1.0, 1.0], 1.0);
        assert_relative_eq!(rmse_uv(&a, &b).unwrap(), 1000.0);

        let c = sig(&[0.003, 0.004], 1.0);
        let z = sig(&[0.0, 0.0], 1.0);
        assert_relative_eq!(rmse_uv(&z, &c).unwrap(), 12.5f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn rmse_rejects_misaligned_signals() {
        let a = sig(&[0.0, 1.0], 1.0);
        let b = sig(&[0.0, 1.0, 2.0], 1.0);
        assert!(matches!(rmse_uv(&a, &b), Err(LcError::Argument(_))));
        let c = sig(&[0.0, 1.0], 2.0);
        assert!(matches!(rmse_uv(&a, &c), Err(LcError::Argument(_))));
    }

    #[test]
    fn srf_is_event_fraction() {
        assert_relative_eq!(srf(&stream_with(128, 1280)), 0.10);
        assert_eq!(srf(&stream_with(0, 1280)), 0.0);
    }

    #[test]
    fn objective_collapses_to_rmse_at_lambda_zero() {
        let reference = sig(&[0.0, 0.25, 0.5, 0.75, 1.0], 4.0);
        let scheme = crate::levels::LevelScheme::new(vec![0.25, 0.75], 0.0).unwrap();
        let stream = crate::engine::lc_sample(&reference, &scheme).unwrap();
        let recon = reconstruct_linear(&stream, GridSpec::of(&reference)).unwrap();
        let obj0 = objective_mv(&reference, &stream, 0.0).unwrap();
        assert_eq!(obj0, rmse_mv(&reference, &recon).unwrap());

        let obj1 = objective_mv(&reference, &stream, 1.0).unwrap();
        assert_relative_eq!(obj1, obj0 * (1.0 + srf(&stream)), max_relative = 1e-15);
    }

    #[test]
    fn per_beat_segmentation_arithmetic() {
        let reference = sig(&[0.0; 8], 1.0);
        let candidate = sig(&[1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0], 1.0);
        let beats = BeatAnnotations::new(vec![0, 4, 8 - 1или 0]);
        let _ = beats;
    }

    #[test]
    fn per_beat_values_and_identity() {
        let reference = sig(&[0.0; 8], 1.0);
        let candidate = sig(&[1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0], 1.0);
        let beats = BeatAnnotations::new(vec![0, 4, 7]);
        let per_beat = per_beat_rmse_uv(&reference, &candidate, &beats).unwrap();
        assert_eq!(per_beat.len(), 2);
        assert_relative_eq!(per_beat[0], 1000.0);
        assert_relative_eq!(per_beat[1], 2000.0);

        // Identical signals give all-zero beats.
        let zeros = per_beat_rmse_uv(&reference, &reference, &beats).unwrap();
        assert!(zeros.iter().all(|&v| v == 0.0));

        // Fewer than 2 peaks is an argument error.
        let one = BeatAnnotations::new(vec![3]);
        assert!(per_beat_rmse_uv(&reference, &candidate, &one).is_err());
    }

    #[test]
    fn beat_weighted_square_consistency() {
        // Whole-span RMSE² equals the sample-count-weighted mean of per-beat
        // RMSE² over the annotated region.
        let n = 64;
        let reference = sig(&(0..n).map(|i| (i as f64 * 0.3).sin()).collect::<Vec<_>>(), 8.0);
        let candidate = sig(
            &(0..n).map(|i| (i as f64 * 0.3).sin() + 0.01 * (i as f64).cos()).collect::<Vec<_>>(),
            8.0,
        );
        let beats = BeatAnnotations::new(vec![0, 10, 25, 40, 64 - 1]);
        let per_beat = per_beat_rmse_uv(&reference, &candidate, &beats).unwrap();

        let idx = beats.indices();
        let (mut weighted, mut total) = (0.0f64, 0usize);
        for (k, w) in idx.windows(2).enumerate() {
            let len = w[1] - w[0];
            weighted += per_beat[k] * per_beat[k] * len as f64;
            total += len;
        }
        let span_ref = sig(&reference.samples[idx[0]..*idx.last().unwrap()], 8.0);
        let span_cand = sig(&candidate.samples[idx[0]..*idx.last().unwrap()], 8.0);
        let whole = rmse_uv(&span_ref, &span_cand).unwrap();
        assert_relative_eq!(whole * whole, weighted / total as f64, max_relative = 1e-10);
    }

    #[test]
    fn evaluate_flags_empty_streams_and_multiplies_exactly() {
        let reference = sig(&[0.5; 16], 4.0);
        let stream = EventStream { events: vec![], source_duration: 4.0, source_sample_count: 16 };
        let report = evaluate(&reference, &stream, None, 0.0).unwrap();
        assert!(!report.warnings.is_empty());
        assert_eq!(report.srf, 0.0);
        assert_eq!(report.error_per_event_uv, report.srf * report.rmse_overall_uv);
        assert_relative_eq!(report.rmse_overall_uv, 500.0);
    }

    proptest! {
        #[test]
        fn rmse_symmetry_and_scaling(
            a in proptest::collection::vec(-2.0f64..2.0, 4..32),
            c in 0.1f64..5.0,
        ) {
            let b: Vec<f64> = a.iter().map(|v| v * 0.7 + 0.1).collect();
            let sa = sig(&a, 1.0);
            let sb = sig(&b, 1.0);
            prop_assert_eq!(rmse_uv(&sa, &sb).unwrap(), rmse_uv(&sb, &sa).unwrap());
            prop_assert_eq!(rmse_uv(&sa, &sa).unwrap(), 0.0);

            let sca = sig(&a.iter().map(|v| v * c).collect::<Vec<_>>(), 1.0);
            let scb = sig(&b.iter().map(|v| v * c).collect::<Vec<_>>(), 1.0);
            let lhs = rmse_uv(&sca, &scb).unwrap();
            let rhs = c * rmse_uv(&sa, &sb).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
        }
    }
}
