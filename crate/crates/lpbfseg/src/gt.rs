//! Reference labels for scoring: cutoff temperature, laser localization,
//! track-width estimation, and the rectangular per-frame foreground box with
//! its buffer zones.
//!
//! The reference procedure labels each pixel of a frame as foreground (the
//! most recent laser-track changes, approximated by a rectangular box between
//! the previous and current laser locations), background, or excluded. Two
//! buffer zones are excluded from scoring: an inner ring around the box that
//! absorbs the smooth transition from track to heat-affected zone, and an
//! outer ring straddling the cross-section perimeter.

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Axis-aligned pixel rectangle with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl Rect {
    pub fn new(x_min: usize, y_min: usize, x_max: usize, y_max: usize) -> Result<Self> {
        if x_min > x_max || y_min > y_max {
            return Err(Error::Config(format!(
                "degenerate rectangle [{x_min},{x_max}]x[{y_min},{y_max}]"
            )));
        }
        Ok(Rect {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Chebyshev distance from a pixel to this rectangle (0 inside).
    #[inline]
    pub fn distance(&self, x: usize, y: usize) -> usize {
        let dx = if x < self.x_min {
            self.x_min - x
        } else if x > self.x_max {
            x - self.x_max
        } else {
            0
        };
        let dy = if y < self.y_min {
            self.y_min - y
        } else if y > self.y_max {
            y - self.y_max
        } else {
            0
        };
        dx.max(dy)
    }
}

/// Raster scan direction of the laser, known a priori from the process setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanDirection {
    #[default]
    LeftToRight,
    RightToLeft,
    TopToBottom,
    BottomToTop,
}

impl ScanDirection {
    pub(crate) fn tag(&self) -> u8 {
        match self {
            ScanDirection::LeftToRight => 0,
            ScanDirection::RightToLeft => 1,
            ScanDirection::TopToBottom => 2,
            ScanDirection::BottomToTop => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            0 => ScanDirection::LeftToRight,
            1 => ScanDirection::RightToLeft,
            2 => ScanDirection::TopToBottom,
            3 => ScanDirection::BottomToTop,
            other => return Err(Error::Corrupt(format!("bad scan direction tag {other}"))),
        })
    }

    fn horizontal(&self) -> bool {
        matches!(self, ScanDirection::LeftToRight | ScanDirection::RightToLeft)
    }
}

/// Geometry and thresholds of the reference-label construction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GtConfig {
    /// Average laser track width in pixels.
    pub track_width: usize,
    /// Cutoff intensity: values above it are attributed to direct laser action.
    pub cutoff: f32,
    /// The scanned rectangular cross-section.
    pub cross_section: Rect,
    #[serde(default)]
    pub scan_direction: ScanDirection,
    /// Thickness of the excluded ring around each foreground box.
    pub inner_buffer: usize,
    /// Thickness of the excluded ring straddling the cross-section perimeter.
    pub outer_buffer: usize,
}

impl GtConfig {
    /// Config with the conventional buffer sizes: inner = half the track
    /// width, outer = five times the track width.
    pub fn with_track_width(track_width: usize, cutoff: f32, cross_section: Rect) -> Self {
        GtConfig {
            track_width,
            cutoff,
            cross_section,
            scan_direction: ScanDirection::LeftToRight,
            inner_buffer: track_width / 2,
            outer_buffer: 5 * track_width,
        }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.track_width < 1 {
            return Err(Error::Config("track_width must be >= 1".into()));
        }
        if self.cross_section.x_max >= width || self.cross_section.y_max >= height {
            return Err(Error::Config(format!(
                "cross-section {:?} exceeds frame bounds {}x{}",
                self.cross_section, width, height
            )));
        }
        Ok(())
    }
}

/// Per-pixel reference class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtLabel {
    Foreground,
    Background,
    /// Inside a buffer zone; contributes to no confusion count.
    Excluded,
}

/// Reference labeling for one frame.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    labels: Vec<GtLabel>,
    laser_center: Option<(f64, f64)>,
    laser_on: bool,
}

impl GroundTruth {
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        labels: Vec<GtLabel>,
        laser_center: Option<(f64, f64)>,
    ) -> Self {
        debug_assert_eq!(labels.len(), width * height);
        GroundTruth {
            width,
            height,
            labels,
            laser_on: laser_center.is_some(),
            laser_center,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[GtLabel] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> GtLabel {
        self.labels[y * self.width + x]
    }

    pub fn laser_center(&self) -> Option<(f64, f64)> {
        self.laser_center
    }

    pub fn laser_on(&self) -> bool {
        self.laser_on
    }

    pub fn count(&self, label: GtLabel) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }
}

/// Statistics of the pre-scan build surface and the cutoff derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffStats {
    /// `3 * sigma_bs + t_max`
    pub cutoff: f32,
    /// Per-frame standard deviation of all intensities, averaged over the
    /// warmup frames.
    pub sigma_bs: f32,
    /// Per-frame maximum intensity, averaged over the warmup frames.
    pub t_max: f32,
}

/// Derives the cutoff temperature from frames recorded before the laser
/// started scanning.
pub fn compute_cutoff(warmup: &[Frame]) -> Result<CutoffStats> {
    if warmup.is_empty() {
        return Err(Error::Input("cutoff needs at least one warmup frame".into()));
    }
    let mut sigma_sum = 0.0f64;
    let mut max_sum = 0.0f64;
    for frame in warmup {
        if frame.is_empty() {
            return Err(Error::Input("cutoff needs non-empty frames".into()));
        }
        let n = frame.len() as f64;
        let mean = frame.pixels().iter().map(|v| *v as f64).sum::<f64>() / n;
        let var = frame
            .pixels()
            .iter()
            .map(|v| {
                let d = *v as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        sigma_sum += var.sqrt();
        max_sum += frame.max() as f64;
    }
    let n = warmup.len() as f64;
    let sigma_bs = (sigma_sum / n) as f32;
    let t_max = (max_sum / n) as f32;
    Ok(CutoffStats {
        cutoff: 3.0 * sigma_bs + t_max,
        sigma_bs,
        t_max,
    })
}

/// Locates the laser spot as the intensity-weighted centroid of the hottest
/// pixels. Returns `None` when the frame maximum does not exceed the cutoff
/// (laser off). `intensity_radius` widens the pixel set to everything within
/// that intensity of the maximum; the default 0 keeps only argmax pixels
/// (ties average into their centroid).
pub fn locate_laser(frame: &Frame, cutoff: f32, intensity_radius: f32) -> Option<(f64, f64)> {
    if frame.is_empty() {
        return None;
    }
    let max = frame.max();
    if max <= cutoff {
        return None;
    }
    let floor = max - intensity_radius;
    let mut wx = 0.0f64;
    let mut wy = 0.0f64;
    let mut wsum = 0.0f64;
    let w = frame.width();
    for (i, v) in frame.pixels().iter().enumerate() {
        if *v >= floor {
            let weight = *v as f64;
            wx += (i % w) as f64 * weight;
            wy += (i / w) as f64 * weight;
            wsum += weight;
        }
    }
    Some((wx / wsum, wy / wsum))
}

/// Estimates the average track width by counting, per cross-track line, the
/// longest contiguous run of pixels above the cutoff, then averaging over
/// lines and frames. Each input frame should show a single isolated track.
pub fn estimate_track_width(
    frames: &[Frame],
    cutoff: f32,
    scan_direction: ScanDirection,
) -> Result<usize> {
    let mut total = 0.0f64;
    let mut lines = 0usize;
    for frame in frames {
        let (w, h) = frame.dims();
        let (outer, inner) = if scan_direction.horizontal() {
            (w, h)
        } else {
            (h, w)
        };
        for o in 0..outer {
            let mut best = 0usize;
            let mut run = 0usize;
            for i in 0..inner {
                let v = if scan_direction.horizontal() {
                    frame.get(o, i)
                } else {
                    frame.get(i, o)
                };
                if v > cutoff {
                    run += 1;
                    best = best.max(run);
                } else {
                    run = 0;
                }
            }
            if best > 0 {
                total += best as f64;
                lines += 1;
            }
        }
    }
    if lines == 0 {
        return Err(Error::Input(
            "no pixel above the cutoff in any frame".into(),
        ));
    }
    Ok(((total / lines as f64).round() as usize).max(1))
}

/// Box bounds along the scan axis in a canonical frame where the laser always
/// travels toward +s. `t` is the transverse center line.
struct ScanBox {
    s_min: i64,
    s_max: i64,
    t_center: i64,
}

/// Builds the reference labeling for one frame from the previous and current
/// laser centers.
///
/// For a left-to-right scan: with both centers present the box spans
/// `cur_y ± w/2` vertically (floor(w/2) below, ceil(w/2) above, so the box is
/// w+1 pixels tall), its right edge is `cur_x + ceil(w/2)` and its left edge
/// `prev_x + ceil(w/2) + inner_buffer`. A missing current center extends the
/// box to the forward border of the cross-section; a missing previous center
/// starts it at the rear border; with both missing there is no foreground.
/// An empty box results when the left edge reaches the right edge. Other
/// directions follow by symmetry. Fractional centers are rounded to the
/// nearest pixel and clamped into the cross-section.
pub fn build_gt(
    prev_center: Option<(f64, f64)>,
    cur_center: Option<(f64, f64)>,
    cfg: &GtConfig,
    width: usize,
    height: usize,
) -> Result<GroundTruth> {
    cfg.validate(width, height)?;
    let cs = cfg.cross_section;

    // Map image coordinates to canonical scan coordinates (s along travel,
    // t transverse). All four directions reduce to the left-to-right rules.
    let to_scan = |x: f64, y: f64| -> (f64, f64) {
        match cfg.scan_direction {
            ScanDirection::LeftToRight => (x, y),
            ScanDirection::RightToLeft => (-x, y),
            ScanDirection::TopToBottom => (y, x),
            ScanDirection::BottomToTop => (-y, x),
        }
    };
    let (cs_s_min, cs_s_max, cs_t_min, cs_t_max) = match cfg.scan_direction {
        ScanDirection::LeftToRight => (
            cs.x_min as i64,
            cs.x_max as i64,
            cs.y_min as i64,
            cs.y_max as i64,
        ),
        ScanDirection::RightToLeft => (
            -(cs.x_max as i64),
            -(cs.x_min as i64),
            cs.y_min as i64,
            cs.y_max as i64,
        ),
        ScanDirection::TopToBottom => (
            cs.y_min as i64,
            cs.y_max as i64,
            cs.x_min as i64,
            cs.x_max as i64,
        ),
        ScanDirection::BottomToTop => (
            -(cs.y_max as i64),
            -(cs.y_min as i64),
            cs.x_min as i64,
            cs.x_max as i64,
        ),
    };

    let clamp_round = |v: f64, lo: i64, hi: i64| -> i64 {
        (v.round() as i64).clamp(lo, hi)
    };
    let scan_center = |c: Option<(f64, f64)>| -> Option<(i64, i64)> {
        c.map(|(x, y)| {
            let (s, t) = to_scan(x, y);
            (
                clamp_round(s, cs_s_min, cs_s_max),
                clamp_round(t, cs_t_min, cs_t_max),
            )
        })
    };
    let prev = scan_center(prev_center);
    let cur = scan_center(cur_center);

    let w = cfg.track_width as i64;
    let half_lo = w / 2;
    let half_hi = (w + 1) / 2;
    let inner = cfg.inner_buffer as i64;

    let scan_box: Option<ScanBox> = match (prev, cur) {
        (None, None) => None,
        (Some((prev_s, _)), Some((cur_s, cur_t))) => Some(ScanBox {
            s_min: prev_s + half_hi + inner,
            s_max: cur_s + half_hi,
            t_center: cur_t,
        }),
        (Some((prev_s, prev_t)), None) => Some(ScanBox {
            s_min: prev_s + half_hi + inner,
            s_max: cs_s_max,
            t_center: prev_t,
        }),
        (None, Some((cur_s, cur_t))) => Some(ScanBox {
            s_min: cs_s_min,
            s_max: cur_s + half_hi,
            t_center: cur_t,
        }),
    };

    // Empty when the trailing edge catches up with the leading edge.
    let scan_box = scan_box.filter(|b| b.s_min < b.s_max);

    // Back to image coordinates, clamped to the cross-section.
    let box_rect: Option<Rect> = scan_box.and_then(|b| {
        let (s0, s1) = (b.s_min.max(cs_s_min), b.s_max.min(cs_s_max));
        let (t0, t1) = (
            (b.t_center - half_lo).max(cs_t_min),
            (b.t_center + half_hi).min(cs_t_max),
        );
        if s0 > s1 || t0 > t1 {
            return None;
        }
        let (x0, x1, y0, y1) = match cfg.scan_direction {
            ScanDirection::LeftToRight => (s0, s1, t0, t1),
            ScanDirection::RightToLeft => (-s1, -s0, t0, t1),
            ScanDirection::TopToBottom => (t0, t1, s0, s1),
            ScanDirection::BottomToTop => (t0, t1, -s1, -s0),
        };
        Some(Rect {
            x_min: x0 as usize,
            y_min: y0 as usize,
            x_max: x1 as usize,
            y_max: y1 as usize,
        })
    });

    let mut labels = vec![GtLabel::Background; width * height];
    if let Some(b) = box_rect {
        for y in b.y_min..=b.y_max {
            for x in b.x_min..=b.x_max {
                labels[y * width + x] = GtLabel::Foreground;
            }
        }
    }
    // Excluded overrides foreground/background: inner ring around the box,
    // outer ring straddling the cross-section perimeter.
    for y in 0..height {
        for x in 0..width {
            let in_inner_ring = box_rect
                .map(|b| {
                    let d = b.distance(x, y);
                    d > 0 && d <= cfg.inner_buffer
                })
                .unwrap_or(false);
            let cs_d = cs.distance(x, y);
            let in_outer_ring = if cs.contains(x, y) {
                let inside_depth = (x - cs.x_min)
                    .min(cs.x_max - x)
                    .min(y - cs.y_min)
                    .min(cs.y_max - y);
                inside_depth < cfg.outer_buffer
            } else {
                cs_d <= cfg.outer_buffer
            };
            if in_inner_ring || in_outer_ring {
                labels[y * width + x] = GtLabel::Excluded;
            }
        }
    }

    let center_img = cur_center.map(|(x, y)| {
        (
            x.clamp(cs.x_min as f64, cs.x_max as f64),
            y.clamp(cs.y_min as f64, cs.y_max as f64),
        )
    });
    Ok(GroundTruth::from_parts(width, height, labels, center_img))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_formula_anchor() {
        // sigma 6 and max 277 give a cutoff of 295.
        let mut px = vec![265.0f32; 32];
        px.extend(vec![277.0f32; 32]);
        let f = Frame::new(8, 8, px).unwrap();
        let stats = compute_cutoff(&[f]).unwrap();
        assert!((stats.sigma_bs - 6.0).abs() < 1e-4);
        assert!((stats.t_max - 277.0).abs() < 1e-4);
        assert!((stats.cutoff - 295.0).abs() < 1e-3);
    }

    #[test]
    fn cutoff_constant_warmup_has_zero_sigma() {
        let f = Frame::constant(4, 4, 250.0);
        let stats = compute_cutoff(&[f]).unwrap();
        assert_eq!(stats.sigma_bs, 0.0);
        assert_eq!(stats.cutoff, 250.0);
    }

    #[test]
    fn cutoff_averages_per_frame_stats() {
        // Frames with (sigma, max) = (2, 100) and (4, 110): cutoff 3*3+105.
        let f1 = Frame::new(2, 1, vec![96.0, 100.0]).unwrap();
        let f2 = Frame::new(2, 1, vec![102.0, 110.0]).unwrap();
        let stats = compute_cutoff(&[f1, f2]).unwrap();
        assert!((stats.cutoff - 114.0).abs() < 1e-4);
    }

    #[test]
    fn cutoff_rejects_empty_warmup() {
        assert!(compute_cutoff(&[]).is_err());
    }

    #[test]
    fn locate_laser_cases() {
        // Flat frame below cutoff: no laser.
        let flat = Frame::constant(8, 8, 277.0);
        assert_eq!(locate_laser(&flat, 295.0, 0.0), None);

        // Unique argmax.
        let mut px = vec![277.0f32; 30 * 25];
        px[20 * 30 + 10] = 400.0;
        let f = Frame::new(30, 25, px).unwrap();
        assert_eq!(locate_laser(&f, 295.0, 0.0), Some((10.0, 20.0)));

        // Two tied maxima: centroid.
        let mut px = vec![277.0f32; 30 * 25];
        px[20 * 30 + 10] = 400.0;
        px[20 * 30 + 12] = 400.0;
        let f = Frame::new(30, 25, px).unwrap();
        assert_eq!(locate_laser(&f, 295.0, 0.0), Some((11.0, 20.0)));
    }

    fn track_frame(w: usize, h: usize, rows: std::ops::Range<usize>, hot: f32) -> Frame {
        let mut px = vec![100.0f32; w * h];
        for y in rows {
            for x in 0..w {
                px[y * w + x] = hot;
            }
        }
        Frame::new(w, h, px).unwrap()
    }

    #[test]
    fn track_width_uniform_track() {
        let f = track_frame(20, 16, 5..10, 400.0);
        assert_eq!(
            estimate_track_width(&[f], 295.0, ScanDirection::LeftToRight).unwrap(),
            5
        );
    }

    #[test]
    fn track_width_alternating_columns() {
        // Columns alternating 4 and 6 pixels above the cutoff average to 5.
        let w = 20;
        let mut px = vec![100.0f32; w * 16];
        for x in 0..w {
            let height = if x % 2 == 0 { 4 } else { 6 };
            for y in 5..5 + height {
                px[y * w + x] = 400.0;
            }
        }
        let f = Frame::new(w, 16, px).unwrap();
        assert_eq!(
            estimate_track_width(&[f], 295.0, ScanDirection::LeftToRight).unwrap(),
            5
        );
    }

    #[test]
    fn track_width_rejects_cold_frames() {
        let f = Frame::constant(8, 8, 100.0);
        assert!(estimate_track_width(&[f], 295.0, ScanDirection::LeftToRight).is_err());
    }

    fn test_cfg() -> GtConfig {
        GtConfig {
            track_width: 6,
            cutoff: 295.0,
            cross_section: Rect::new(20, 20, 199, 129).unwrap(),
            scan_direction: ScanDirection::LeftToRight,
            inner_buffer: 3,
            outer_buffer: 5,
        }
    }

    #[test]
    fn box_corner_rules_example() {
        // prev (100, 50), cur (110, 50), w 6, inner 3:
        // box x in [106, 113], y in [47, 53].
        let cfg = test_cfg();
        let gt = build_gt(Some((100.0, 50.0)), Some((110.0, 50.0)), &cfg, 220, 150).unwrap();
        for y in 0..150 {
            for x in 0..220 {
                let in_box = (106..=113).contains(&x) && (47..=53).contains(&y);
                if in_box {
                    assert_eq!(gt.get(x, y), GtLabel::Foreground, "({x},{y})");
                } else {
                    assert_ne!(gt.get(x, y), GtLabel::Foreground, "({x},{y})");
                }
            }
        }
        assert_eq!(gt.count(GtLabel::Foreground), 8 * 7);
        // 3-pixel excluded ring around the box.
        assert_eq!(gt.get(105, 50), GtLabel::Excluded);
        assert_eq!(gt.get(114, 53), GtLabel::Excluded);
        assert_eq!(gt.get(110, 46), GtLabel::Excluded);
        assert_eq!(gt.get(102, 50), GtLabel::Background);
    }

    #[test]
    fn both_centers_absent_has_no_foreground() {
        let cfg = test_cfg();
        let gt = build_gt(None, None, &cfg, 220, 150).unwrap();
        assert_eq!(gt.count(GtLabel::Foreground), 0);
        assert!(!gt.laser_on());
    }

    #[test]
    fn missing_prev_starts_at_rear_border() {
        let cfg = test_cfg();
        // Current center half a track width from the left border.
        let gt = build_gt(None, Some((23.0, 60.0)), &cfg, 220, 150).unwrap();
        // Box from the cross-section left border to cur + 3 = 26; the outer
        // ring (depth < 5 into the cross-section) overrides its left part.
        for x in 20..=26 {
            let label = gt.get(x, 60);
            let expected = if x < 25 {
                GtLabel::Excluded
            } else {
                GtLabel::Foreground
            };
            assert_eq!(label, expected, "x={x}");
        }
        assert_ne!(gt.get(27, 60), GtLabel::Foreground);
    }

    #[test]
    fn missing_cur_extends_to_forward_border() {
        let cfg = test_cfg();
        let gt = build_gt(Some((190.0, 60.0)), None, &cfg, 220, 150).unwrap();
        // Box from prev + 3 + 3 = 196 to the cross-section right border.
        for x in 196..=199 {
            let label = gt.get(x, 60);
            assert!(
                label == GtLabel::Foreground || label == GtLabel::Excluded,
                "x={x}"
            );
        }
        assert_ne!(gt.get(195, 60), GtLabel::Foreground);
        assert!(!gt.laser_on());
    }

    #[test]
    fn stalled_laser_gives_empty_box() {
        let cfg = test_cfg();
        // Movement smaller than the buffer allows: left edge >= right edge.
        let gt = build_gt(Some((100.0, 50.0)), Some((101.0, 50.0)), &cfg, 220, 150).unwrap();
        assert_eq!(gt.count(GtLabel::Foreground), 0);
    }

    #[test]
    fn labels_partition_pixels() {
        let cfg = test_cfg();
        let gt = build_gt(Some((100.0, 50.0)), Some((120.0, 50.0)), &cfg, 220, 150).unwrap();
        let total = gt.count(GtLabel::Foreground)
            + gt.count(GtLabel::Background)
            + gt.count(GtLabel::Excluded);
        assert_eq!(total, 220 * 150);
    }

    #[test]
    fn box_height_is_w_plus_one() {
        for w in [4usize, 5, 6, 7] {
            let cfg = GtConfig {
                track_width: w,
                ..test_cfg()
            };
            let gt = build_gt(Some((80.0, 70.0)), Some((120.0, 70.0)), &cfg, 220, 150).unwrap();
            let rows: Vec<usize> = (0..150)
                .filter(|y| (0..220).any(|x| gt.get(x, *y) == GtLabel::Foreground))
                .collect();
            assert_eq!(rows.len(), w + 1, "track width {w}");
        }
    }

    #[test]
    fn foreground_never_meets_outer_ring() {
        let cfg = test_cfg();
        // Current center at the far right: box clamps against the border,
        // where the outer ring excludes it.
        let gt = build_gt(Some((180.0, 50.0)), Some((199.0, 50.0)), &cfg, 220, 150).unwrap();
        for y in 0..150usize {
            for x in 0..220usize {
                if gt.get(x, y) == GtLabel::Foreground {
                    let depth = (x - 20).min(199 - x).min(y - 20).min(129 - y);
                    assert!(depth >= cfg.outer_buffer, "({x},{y}) depth {depth}");
                }
            }
        }
    }

    #[test]
    fn right_to_left_mirrors() {
        let cfg = GtConfig {
            scan_direction: ScanDirection::RightToLeft,
            ..test_cfg()
        };
        // Laser moving left: prev 110, cur 100.
        let gt = build_gt(Some((110.0, 50.0)), Some((100.0, 50.0)), &cfg, 220, 150).unwrap();
        // Mirror of [106, 113]: box x in [97, 104] (leading edge cur - 3,
        // trailing edge prev - 3 - 3).
        for x in 97..=104 {
            assert_eq!(gt.get(x, 50), GtLabel::Foreground, "x={x}");
        }
        assert_ne!(gt.get(96, 50), GtLabel::Foreground);
        assert_ne!(gt.get(105, 50), GtLabel::Foreground);
    }

    #[test]
    fn top_to_bottom_swaps_axes() {
        let cfg = GtConfig {
            scan_direction: ScanDirection::TopToBottom,
            cross_section: Rect::new(20, 20, 129, 199).unwrap(),
            ..test_cfg()
        };
        let gt = build_gt(Some((50.0, 100.0)), Some((50.0, 110.0)), &cfg, 150, 220).unwrap();
        for y in 106..=113 {
            assert_eq!(gt.get(50, y), GtLabel::Foreground, "y={y}");
        }
        assert_eq!(gt.count(GtLabel::Foreground), 8 * 7);
    }
}
