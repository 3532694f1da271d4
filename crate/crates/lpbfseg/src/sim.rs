//! Synthetic thermal sequences with exact per-frame ground truth: a Gaussian
//! laser spot rastering parallel scan lines over a cooling powder bed, with
//! optional spatter.
//!
//! The bed has two noise components. `bed_noise_sigma` is a static per-pixel
//! pattern drawn once per sequence; it is what the pre-scan sigma statistic
//! measures on a real camera (spatial variation of the surface plus fixed
//! pattern noise). `temporal_noise_sigma` is small per-pixel per-frame noise
//! (sensor NETD scale). Keeping these separate matters: frame differencing
//! cancels the static pattern but not the temporal noise.
//!
//! Each scanning frame sweeps the spot continuously from the previous to the
//! current laser position, stamping a Gaussian bump along the path. Deposits
//! age within the frame, so the hottest pixel of every scanning frame is the
//! spot's end position, and the wake decays exponentially with the configured
//! time constant from there.
//!
//! Ground truth comes from the simulator's exact laser positions, not from
//! re-estimation, so evaluation stays independent of the localization
//! heuristic.

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use crate::gt::{build_gt, compute_cutoff, GroundTruth, GtConfig, Rect, ScanDirection};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub width: usize,
    pub height: usize,
    /// Nominal powder bed temperature.
    pub bed_temp: f32,
    /// Sigma of the static per-pixel bed pattern.
    pub bed_noise_sigma: f32,
    /// Sigma of the per-pixel per-frame noise.
    pub temporal_noise_sigma: f32,
    /// Temperature at the spot center.
    pub peak_temp: f32,
    /// Gaussian radius of the laser spot, pixels.
    pub spot_sigma: f32,
    /// Laser travel per frame, pixels.
    pub scan_speed: f32,
    /// Vertical distance between scan lines, pixels.
    pub track_pitch: usize,
    pub track_count: usize,
    /// The scanned rectangular cross-section.
    pub cross_section: Rect,
    /// Wake cooling time constant, frames.
    pub cooling_time_constant: f32,
    /// Laser-off frames recorded before scanning starts.
    pub warmup_frames: usize,
    /// Laser-off frames between tracks.
    pub laser_off_gap_frames: usize,
    /// Expected spatter particles spawned per scanning frame.
    pub spatter_rate: f64,
    /// Nominal particle temperature (its excess over `bed_temp` is added to
    /// the local surface).
    pub spatter_temp: f32,
    /// Excluded-ring thickness around each box; `None` = half the track width.
    #[serde(default)]
    pub inner_buffer: Option<usize>,
    /// Excluded-ring thickness at the cross-section perimeter; `None` = five
    /// times the track width (too wide for desk-scale sections, so the small
    /// presets override it).
    #[serde(default)]
    pub outer_buffer: Option<usize>,
    pub seed: u64,
}

impl Default for SimConfig {
    /// A quick desk-scale batch: same thermal scales as the standard batch,
    /// an order of magnitude fewer pixels.
    fn default() -> Self {
        SimConfig {
            width: 192,
            height: 160,
            bed_temp: 277.0,
            bed_noise_sigma: 6.0,
            temporal_noise_sigma: 0.2,
            peak_temp: 600.0,
            spot_sigma: 3.0,
            scan_speed: 33.0,
            track_pitch: 10,
            track_count: 8,
            cross_section: Rect {
                x_min: 30,
                y_min: 25,
                x_max: 161,
                y_max: 134,
            },
            cooling_time_constant: 2.0,
            warmup_frames: 50,
            laser_off_gap_frames: 5,
            spatter_rate: 0.0,
            spatter_temp: 285.0,
            inner_buffer: None,
            outer_buffer: Some(12),
            seed: 0,
        }
    }
}

impl SimConfig {
    /// The full-resolution accuracy batch: 640x512 frames, 40 parallel
    /// overlapping tracks, no spatter.
    pub fn standard_batch(seed: u64) -> Self {
        SimConfig {
            width: 640,
            height: 512,
            scan_speed: 120.0,
            track_pitch: 10,
            track_count: 40,
            cross_section: Rect {
                x_min: 70,
                y_min: 50,
                x_max: 569,
                y_max: 461,
            },
            inner_buffer: None,
            outer_buffer: None,
            seed,
            ..SimConfig::default()
        }
    }

    /// Shorter 20-track batch used for parameter calibration, distinct from
    /// the evaluation batch.
    pub fn calibration_batch(seed: u64) -> Self {
        SimConfig {
            width: 256,
            height: 200,
            scan_speed: 44.0,
            track_pitch: 7,
            track_count: 20,
            cross_section: Rect {
                x_min: 40,
                y_min: 25,
                x_max: 215,
                y_max: 174,
            },
            seed,
            ..SimConfig::default()
        }
    }

    /// Desk-scale batch with strong spatter ejection: slow sweeps over a
    /// small dense cross-section so ejected particles accumulate against the
    /// scanned area in the composites (~500 frames).
    pub fn spatter_batch(seed: u64) -> Self {
        SimConfig {
            scan_speed: 2.5,
            track_pitch: 3,
            track_count: 12,
            cross_section: Rect {
                x_min: 56,
                y_min: 50,
                x_max: 136,
                y_max: 95,
            },
            spatter_rate: 0.5,
            spatter_temp: 285.0,
            seed,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |msg: String| Err(Error::Config(msg));
        if self.width == 0 || self.height == 0 {
            return cfg_err("frame dimensions must be positive".into());
        }
        if self.peak_temp <= self.bed_temp {
            return cfg_err("peak_temp must exceed bed_temp".into());
        }
        if self.cross_section.x_max >= self.width || self.cross_section.y_max >= self.height {
            return cfg_err(format!(
                "cross-section {:?} exceeds frame bounds {}x{}",
                self.cross_section, self.width, self.height
            ));
        }
        if self.spot_sigma <= 0.0 || self.scan_speed <= 0.0 || self.cooling_time_constant <= 0.0 {
            return cfg_err("spot_sigma, scan_speed and cooling_time_constant must be > 0".into());
        }
        if self.track_count == 0 || self.track_pitch == 0 {
            return cfg_err("track_count and track_pitch must be >= 1".into());
        }
        let last_row = self.cross_section.y_min + self.track_count * self.track_pitch;
        if last_row > self.cross_section.y_max {
            return cfg_err(format!(
                "{} tracks at pitch {} do not fit in the cross-section",
                self.track_count, self.track_pitch
            ));
        }
        if self.spatter_rate < 0.0 {
            return cfg_err("spatter_rate must be >= 0".into());
        }
        if self.bed_noise_sigma < 0.0 || self.temporal_noise_sigma < 0.0 {
            return cfg_err("noise sigmas must be >= 0".into());
        }
        Ok(())
    }

    /// Scanning frames needed to cross the section once.
    pub fn frames_per_track(&self) -> usize {
        let span = (self.cross_section.x_max - self.cross_section.x_min) as f32;
        (span / self.scan_speed).ceil() as usize
    }

    /// Total frame count: `warmup + tracks * (scan frames + gap)`.
    pub fn frame_count(&self) -> usize {
        self.warmup_frames + self.track_count * (self.frames_per_track() + self.laser_off_gap_frames)
    }

    /// Scan-line row of a track.
    fn track_row(&self, track: usize) -> usize {
        self.cross_section.y_min + (track + 1) * self.track_pitch
    }
}

/// Track width implied by the spot profile: the diameter at which the
/// Gaussian bump crosses the cutoff, `2 * sigma * sqrt(2 * ln(A / excess))`
/// with `A` the bump amplitude and `excess` the cutoff's height over the bed.
pub fn analytic_track_width(cfg: &SimConfig, cutoff: f32) -> usize {
    let amplitude = (cfg.peak_temp - cfg.bed_temp) as f64;
    let excess = (cutoff - cfg.bed_temp).max(1.0) as f64;
    if excess >= amplitude {
        return 1;
    }
    let w = 2.0 * cfg.spot_sigma as f64 * (2.0 * (amplitude / excess).ln()).sqrt();
    (w.round() as usize).max(1)
}

#[derive(Debug, Clone, Copy)]
struct Spatter {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    frames_left: u32,
    size: u32,
}

/// What the laser does during one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Off,
    /// Sweep from `from_x` to `to_x` on `row`.
    Scan { row: usize, from_x: f64, to_x: f64 },
}

/// Streaming generator: yields `(Frame, GroundTruth)` pairs in order without
/// materializing the whole sequence.
pub struct SimStream {
    cfg: SimConfig,
    gt_cfg: GtConfig,
    rng: ChaCha8Rng,
    pattern: Vec<f32>,
    heat: Vec<f32>,
    spatters: Vec<Spatter>,
    /// Warmup frames are pre-generated to derive the cutoff.
    pending: VecDeque<Frame>,
    schedule: Vec<Phase>,
    next_index: usize,
    prev_center: Option<(f64, f64)>,
    cur_center: Option<(f64, f64)>,
}

impl SimStream {
    pub fn new(cfg: &SimConfig) -> Result<SimStream> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.width * cfg.height;

        let pattern = if cfg.bed_noise_sigma > 0.0 {
            let dist = Normal::new(0.0f32, cfg.bed_noise_sigma).expect("valid sigma");
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        } else {
            vec![0.0; n]
        };

        let schedule = build_schedule(cfg);

        let mut stream = SimStream {
            cfg: *cfg,
            // Placeholder until the warmup statistics are known.
            gt_cfg: GtConfig::with_track_width(1, f32::MAX, cfg.cross_section),
            rng,
            pattern,
            heat: vec![0.0; n],
            spatters: Vec::new(),
            pending: VecDeque::new(),
            schedule,
            next_index: 0,
            prev_center: None,
            cur_center: None,
        };

        // Generate the warmup prefix now and derive the cutoff from it, the
        // same way a study would on recorded data.
        let mut warmup = Vec::with_capacity(cfg.warmup_frames);
        for _ in 0..cfg.warmup_frames {
            let frame = stream.render(Phase::Off);
            warmup.push(frame);
        }
        let cutoff = if warmup.is_empty() {
            // No warmup frames: fall back to the noise-free analytic cutoff.
            cfg.bed_temp + 3.0 * cfg.bed_noise_sigma
        } else {
            compute_cutoff(&warmup)?.cutoff
        };
        let width = analytic_track_width(cfg, cutoff);
        stream.gt_cfg = GtConfig {
            track_width: width,
            cutoff,
            cross_section: cfg.cross_section,
            scan_direction: ScanDirection::LeftToRight,
            inner_buffer: cfg.inner_buffer.unwrap_or(width / 2),
            outer_buffer: cfg.outer_buffer.unwrap_or(5 * width),
        };
        stream.pending = warmup.into();
        Ok(stream)
    }

    pub fn gt_config(&self) -> GtConfig {
        self.gt_cfg
    }

    pub fn total_frames(&self) -> usize {
        self.cfg.frame_count()
    }

    /// Renders the next frame under `phase` and advances the thermal state.
    fn render(&mut self, phase: Phase) -> Frame {
        let cfg = &self.cfg;
        let (w, h) = (cfg.width, cfg.height);
        let decay = (-1.0 / cfg.cooling_time_constant).exp();
        for v in &mut self.heat {
            *v *= decay;
        }

        if let Phase::Scan { row, from_x, to_x } = phase {
            stamp_path(
                &mut self.heat,
                w,
                h,
                cfg,
                row as f64,
                from_x,
                to_x,
            );
        }

        let mut pixels: Vec<f32> = self
            .pattern
            .iter()
            .zip(&self.heat)
            .map(|(p, heat)| cfg.bed_temp + p + heat)
            .collect();

        // Spatter: advance live particles, then spawn new ones while scanning.
        let bump = cfg.spatter_temp - cfg.bed_temp;
        self.spatters.retain_mut(|s| {
            s.x += s.vx;
            s.y += s.vy;
            if s.frames_left == 0 {
                return false;
            }
            s.frames_left -= 1;
            true
        });
        if cfg.spatter_rate > 0.0 && matches!(phase, Phase::Scan { .. }) {
            let count = Poisson::new(cfg.spatter_rate).expect("positive rate").sample(&mut self.rng);
            for _ in 0..count as u64 {
                self.spatters.push(Spatter {
                    x: self.rng.random_range(0.0..w as f64),
                    y: self.rng.random_range(0.0..h as f64),
                    vx: self.rng.random_range(-2.0..2.0),
                    vy: self.rng.random_range(-2.0..2.0),
                    frames_left: self.rng.random_range(0..3),
                    size: self.rng.random_range(1..=3),
                });
            }
        }
        for s in &self.spatters {
            // A particle covers `size` pixels (1 to 3) in a short strip.
            let x0 = s.x.round() as i64;
            let y0 = s.y.round() as i64;
            for dx in 0..s.size as i64 {
                let x = x0 + dx;
                if x >= 0 && y0 >= 0 && (x as usize) < w && (y0 as usize) < h {
                    pixels[y0 as usize * w + x as usize] += bump;
                }
            }
        }

        if cfg.temporal_noise_sigma > 0.0 {
            let dist = Normal::new(0.0f32, cfg.temporal_noise_sigma).expect("valid sigma");
            for v in &mut pixels {
                *v += dist.sample(&mut self.rng);
            }
        }
        for v in &mut pixels {
            *v = v.max(0.0);
        }

        Frame::from_valid(w, h, pixels).with_laser_flag(matches!(phase, Phase::Scan { .. }))
    }
}

fn build_schedule(cfg: &SimConfig) -> Vec<Phase> {
    let mut schedule = Vec::with_capacity(cfg.frame_count() - cfg.warmup_frames);
    let x_min = cfg.cross_section.x_min as f64;
    let x_max = cfg.cross_section.x_max as f64;
    let per_track = cfg.frames_per_track();
    for track in 0..cfg.track_count {
        let row = cfg.track_row(track);
        let mut from = x_min;
        for k in 1..=per_track {
            let to = (x_min + k as f64 * cfg.scan_speed as f64).min(x_max);
            schedule.push(Phase::Scan {
                row,
                from_x: from,
                to_x: to,
            });
            from = to;
        }
        for _ in 0..cfg.laser_off_gap_frames {
            schedule.push(Phase::Off);
        }
    }
    schedule
}

/// Stamps the spot's Gaussian bump along the within-frame path. Deposits age
/// across the frame interval: the path start is one frame old by capture
/// time, the end is fresh at full amplitude.
fn stamp_path(
    heat: &mut [f32],
    w: usize,
    h: usize,
    cfg: &SimConfig,
    row: f64,
    from_x: f64,
    to_x: f64,
) {
    let amplitude = (cfg.peak_temp - cfg.bed_temp) as f64;
    let sigma = cfg.spot_sigma as f64;
    let reach = (4.0 * sigma).ceil() as i64;
    let length = (to_x - from_x).abs();
    let step = (sigma * 0.5).min(1.0).max(0.25);
    let substeps = ((length / step).ceil() as usize).max(1);

    for i in 0..=substeps {
        let u = i as f64 / substeps as f64;
        let x = from_x + u * (to_x - from_x);
        let age = 1.0 - u;
        let amp = amplitude * (-age / cfg.cooling_time_constant as f64).exp();
        let cx = x.round() as i64;
        let cy = row.round() as i64;
        for dy in -reach..=reach {
            let py = cy + dy;
            if py < 0 || py >= h as i64 {
                continue;
            }
            for dx in -reach..=reach {
                let px = cx + dx;
                if px < 0 || px >= w as i64 {
                    continue;
                }
                let ddx = px as f64 - x;
                let ddy = py as f64 - row;
                let d2 = ddx * ddx + ddy * ddy;
                let value = (amp * (-d2 / (2.0 * sigma * sigma)).exp()) as f32;
                let cell = &mut heat[py as usize * w + px as usize];
                if value > *cell {
                    *cell = value;
                }
            }
        }
    }
}

impl Iterator for SimStream {
    type Item = (Frame, GroundTruth);

    fn next(&mut self) -> Option<(Frame, GroundTruth)> {
        let index = self.next_index;
        let total = self.cfg.frame_count();
        if index >= total {
            return None;
        }
        self.next_index += 1;

        let frame = if let Some(pre) = self.pending.pop_front() {
            pre
        } else {
            let phase = self.schedule[index - self.cfg.warmup_frames];
            self.render(phase)
        };

        let center = if index < self.cfg.warmup_frames {
            None
        } else {
            match self.schedule[index - self.cfg.warmup_frames] {
                Phase::Off => None,
                Phase::Scan { row, to_x, .. } => Some((to_x, row as f64)),
            }
        };
        self.prev_center = self.cur_center;
        self.cur_center = center;

        let gt = build_gt(
            self.prev_center,
            self.cur_center,
            &self.gt_cfg,
            self.cfg.width,
            self.cfg.height,
        )
        .expect("validated config");
        Some((frame.with_index(index), gt))
    }
}

/// Streaming construction; returns the generator and its derived ground-truth
/// configuration.
pub fn stream(cfg: &SimConfig) -> Result<SimStream> {
    SimStream::new(cfg)
}

/// Generates the whole batch in memory. Prefer [`stream`] for large configs.
pub fn simulate(cfg: &SimConfig) -> Result<(FrameSequence, Vec<GroundTruth>, GtConfig)> {
    let sim = SimStream::new(cfg)?;
    let gt_cfg = sim.gt_config();
    let mut frames = Vec::with_capacity(cfg.frame_count());
    let mut gts = Vec::with_capacity(cfg.frame_count());
    for (frame, gt) in sim {
        frames.push(frame);
        gts.push(gt);
    }
    let seq = FrameSequence::new(frames, 60.0, cfg.warmup_frames)?;
    Ok((seq, gts, gt_cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gt::{locate_laser, GtLabel};

    fn noise_free(mut cfg: SimConfig) -> SimConfig {
        cfg.bed_noise_sigma = 0.0;
        cfg.temporal_noise_sigma = 0.0;
        cfg.spatter_rate = 0.0;
        cfg
    }

    fn tiny() -> SimConfig {
        // The span is a multiple of the scan speed so every sweep is full
        // length; a runt final sweep shorter than w/2 + inner_buffer would
        // legitimately produce an empty box.
        SimConfig {
            width: 96,
            height: 72,
            scan_speed: 20.0,
            track_pitch: 12,
            track_count: 3,
            cross_section: Rect {
                x_min: 12,
                y_min: 8,
                x_max: 92,
                y_max: 63,
            },
            warmup_frames: 6,
            laser_off_gap_frames: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn warmup_without_noise_is_constant_bed() {
        let cfg = noise_free(tiny());
        let (seq, _, _) = simulate(&cfg).unwrap();
        for frame in seq.warmup() {
            assert!(frame.pixels().iter().all(|v| *v == cfg.bed_temp));
            assert_eq!(frame.laser_nominally_on(), Some(false));
        }
    }

    #[test]
    fn spot_center_reaches_peak_without_noise() {
        let cfg = noise_free(tiny());
        let (seq, gts, _) = simulate(&cfg).unwrap();
        let mut checked = 0;
        for (frame, gt) in seq.frames().iter().zip(&gts) {
            if let Some((cx, cy)) = gt.laser_center() {
                // Scan positions are integral in this config.
                let v = frame.get(cx.round() as usize, cy.round() as usize);
                assert!(
                    (v - cfg.peak_temp).abs() < 1e-3,
                    "frame {}: {} != {}",
                    frame.index(),
                    v,
                    cfg.peak_temp
                );
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn frame_count_arithmetic() {
        let cfg = tiny();
        let (seq, gts, _) = simulate(&cfg).unwrap();
        let per_track = ((92.0f32 - 12.0) / 20.0).ceil() as usize; // 4
        assert_eq!(per_track, 4);
        let expected = 6 + 3 * (4 + 3);
        assert_eq!(cfg.frame_count(), expected);
        assert_eq!(seq.len(), expected);
        assert_eq!(gts.len(), expected);
    }

    #[test]
    fn identical_seeds_reproduce_bit_identical_sequences() {
        let mut cfg = tiny();
        cfg.spatter_rate = 0.3;
        cfg.seed = 9;
        let (a, _, _) = simulate(&cfg).unwrap();
        let (b, _, _) = simulate(&cfg).unwrap();
        for (fa, fb) in a.frames().iter().zip(b.frames()) {
            assert_eq!(fa.pixels(), fb.pixels());
        }
    }

    #[test]
    fn analytic_width_anchor() {
        // Amplitude 323 over excess 18 with sigma 3 gives ~14 pixels.
        let cfg = SimConfig {
            peak_temp: 600.0,
            bed_temp: 277.0,
            spot_sigma: 3.0,
            ..tiny()
        };
        assert_eq!(analytic_track_width(&cfg, 295.0), 14);
    }

    #[test]
    fn stationary_spot_width_matches_analytic() {
        // Rasterize one spot and count pixels above the cutoff in its column.
        let cfg = noise_free(tiny());
        let cutoff = 295.0f32;
        let w = analytic_track_width(&cfg, cutoff);
        let mut heat = vec![0.0f32; cfg.width * cfg.height];
        stamp_path(
            &mut heat,
            cfg.width,
            cfg.height,
            &cfg,
            36.0,
            48.0,
            48.0,
        );
        let count = (0..cfg.height)
            .filter(|y| cfg.bed_temp + heat[y * cfg.width + 48] > cutoff)
            .count();
        assert!(
            (count as i64 - w as i64).abs() <= 1,
            "count {count} vs analytic {w}"
        );
    }

    #[test]
    fn locate_laser_agrees_with_true_position() {
        let cfg = noise_free(tiny());
        let (seq, gts, gt_cfg) = simulate(&cfg).unwrap();
        for (frame, gt) in seq.frames().iter().zip(&gts) {
            if let Some((tx, ty)) = gt.laser_center() {
                let (lx, ly) =
                    locate_laser(frame, gt_cfg.cutoff, 0.0).expect("laser visible");
                assert!(
                    (lx - tx).abs() <= 1.0 && (ly - ty).abs() <= 1.0,
                    "frame {}: located ({lx},{ly}) vs true ({tx},{ty})",
                    frame.index()
                );
            }
        }
    }

    #[test]
    fn geometry_conservation_against_gt_boxes() {
        // Pixels that ever exceed the cutoff and the union of the geometric
        // foreground boxes must agree up to an inner-buffer-sized margin.
        // The boxes are rebuilt with a zero outer ring so the perimeter
        // exclusions of the emitted labels do not hide box pixels.
        let mut cfg = tiny();
        cfg.temporal_noise_sigma = 0.0;
        cfg.spatter_rate = 0.0;
        let (seq, gts, gt_cfg) = simulate(&cfg).unwrap();
        let raw_cfg = GtConfig {
            outer_buffer: 0,
            ..gt_cfg
        };
        let (w, h) = (cfg.width, cfg.height);
        let mut ever_hot = vec![false; w * h];
        let mut boxes = vec![false; w * h];
        let mut prev_center = None;
        for (frame, gt) in seq.frames().iter().zip(&gts) {
            for (i, v) in frame.pixels().iter().enumerate() {
                if *v > gt_cfg.cutoff {
                    ever_hot[i] = true;
                }
            }
            let raw = build_gt(prev_center, gt.laser_center(), &raw_cfg, w, h).unwrap();
            for (i, l) in raw.labels().iter().enumerate() {
                if *l == GtLabel::Foreground {
                    boxes[i] = true;
                }
            }
            prev_center = gt.laser_center();
        }
        let dilate = |set: &[bool], radius: usize| -> Vec<bool> {
            let r = radius as i64;
            let mut out = vec![false; set.len()];
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    if !set[y as usize * w + x as usize] {
                        continue;
                    }
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let (px, py) = (x + dx, y + dy);
                            if px >= 0 && py >= 0 && (px as i64) < w as i64 && py < h as i64 {
                                out[py as usize * w + px as usize] = true;
                            }
                        }
                    }
                }
            }
            out
        };
        let hot_dilated = dilate(&ever_hot, gt_cfg.inner_buffer);
        let boxes_dilated = dilate(&boxes, gt_cfg.inner_buffer);
        for i in 0..w * h {
            assert!(!boxes[i] || hot_dilated[i], "box pixel {i} far from heat");
            assert!(!ever_hot[i] || boxes_dilated[i], "hot pixel {i} far from boxes");
        }
    }

    #[test]
    fn laser_flags_match_schedule() {
        let cfg = tiny();
        let (seq, gts, _) = simulate(&cfg).unwrap();
        for (frame, gt) in seq.frames().iter().zip(&gts) {
            assert_eq!(frame.laser_nominally_on(), Some(gt.laser_on()));
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny();
        cfg.peak_temp = cfg.bed_temp;
        assert!(simulate(&cfg).is_err());

        let mut cfg = tiny();
        cfg.track_count = 100;
        assert!(simulate(&cfg).is_err());

        let mut cfg = tiny();
        cfg.cross_section.x_max = cfg.width;
        assert!(simulate(&cfg).is_err());
    }
}
