//! Per-frame wall-clock timing of segmenters.
//!
//! The timed region covers one full `step()` per frame, including mask
//! materialization, single-threaded. The first 50 frames are excluded as
//! model warm-up. Frame generation and I/O happen outside the timed region.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::segment::{Segmenter, SegmenterSpec};
use std::time::Instant;

/// Frames excluded from the statistics while models warm up.
pub const WARMUP_EXCLUDED: usize = 50;

/// Minimum sequence length accepted by the protocol (2000 recommended).
pub const MIN_FRAMES: usize = 100;

#[derive(Debug, Clone, serde::Serialize)]
pub struct BenchReport {
    pub spec_name: String,
    pub frames_timed: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub warmup_frames_excluded: usize,
}

/// Times `step()` per frame over the sequence.
pub fn bench(spec: &SegmenterSpec, frames: impl Iterator<Item = Frame>) -> Result<BenchReport> {
    let mut segmenter = Segmenter::with_seed(spec.clone(), 0)?;
    let times = time_per_frame(frames, |frame| {
        segmenter.step(frame).map(|mask| {
            std::hint::black_box(&mask);
        })
    })?;
    summarize(spec.name(), times)
}

/// Shared timing loop; also used to measure the harness's own overhead by
/// passing a no-op body.
pub fn time_per_frame(
    frames: impl Iterator<Item = Frame>,
    mut body: impl FnMut(&Frame) -> Result<()>,
) -> Result<Vec<f64>> {
    let mut times = Vec::new();
    let mut seen = 0usize;
    for frame in frames {
        let start = Instant::now();
        body(&frame)?;
        let elapsed = start.elapsed();
        seen += 1;
        if seen > WARMUP_EXCLUDED {
            times.push(elapsed.as_secs_f64() * 1e3);
        }
    }
    if seen < MIN_FRAMES {
        return Err(Error::Input(format!(
            "benchmark needs at least {MIN_FRAMES} frames, got {seen}"
        )));
    }
    Ok(times)
}

fn summarize(spec_name: String, mut times: Vec<f64>) -> Result<BenchReport> {
    let frames_timed = times.len();
    let mean_ms = times.iter().sum::<f64>() / frames_timed as f64;
    times.sort_by(|a, b| a.total_cmp(b));
    let median_ms = percentile(&times, 0.5);
    let p99_ms = percentile(&times, 0.99);
    Ok(BenchReport {
        spec_name,
        frames_timed,
        mean_ms,
        median_ms,
        p99_ms,
        warmup_frames_excluded: WARMUP_EXCLUDED,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() as f64 * q).ceil() as usize).saturating_sub(1);
    sorted[idx.min(sorted.len() - 1)]
}

/// Host description attached to benchmark tables.
pub fn machine_info() -> String {
    let cores = std::thread::available_parallelism()
        .map(|n| n.get().to_string())
        .unwrap_or_else(|_| "?".into());
    format!(
        "{} {} ({} cores)",
        std::env::consts::OS,
        std::env::consts::ARCH,
        cores
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::Algorithm;

    fn frames(n: usize) -> impl Iterator<Item = Frame> {
        (0..n).map(|i| Frame::constant(32, 24, 280.0 + (i % 7) as f32))
    }

    #[test]
    fn report_shape() {
        let spec = SegmenterSpec::new(Algorithm::Thresh, false);
        let report = bench(&spec, frames(150)).unwrap();
        assert_eq!(report.frames_timed, 100);
        assert_eq!(report.warmup_frames_excluded, WARMUP_EXCLUDED);
        assert!(report.mean_ms >= 0.0);
        assert!(report.median_ms <= report.p99_ms);
    }

    #[test]
    fn too_few_frames_rejected() {
        let spec = SegmenterSpec::new(Algorithm::Thresh, false);
        assert!(bench(&spec, frames(60)).is_err());
    }

    #[test]
    fn percentile_indexing() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(percentile(&v, 0.5), 50.0);
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&v, 1.0), 100.0);
    }
}
