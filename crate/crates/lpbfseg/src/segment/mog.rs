//! Per-pixel mixture-of-Gaussians background model.
//!
//! Each pixel carries up to `nmixtures` Gaussian components (weight, mean,
//! variance). A frame is classified before the model is updated: the pixel is
//! background iff it falls within 2.5 sigma of one of the components in the
//! background prefix, where the prefix is the smallest set of components
//! (ranked by weight/sigma) whose weights sum to at least `backRatio`.
//!
//! The learning rate is `alpha = 1 / min(frames_seen, history)` and the
//! mean/variance update uses `rho = alpha`. Fresh components start at
//! `VAR_INIT`; variances are clamped to `[VAR_MIN, VAR_MAX]`, a noise floor
//! sized for thermal-camera intensity scales.

use crate::frame::Mask;

pub(crate) const MATCH_RADIUS: f32 = 2.5;
pub(crate) const VAR_INIT: f32 = 225.0; // sigma = 15
pub(crate) const VAR_MIN: f32 = 25.0; // sigma = 5
pub(crate) const VAR_MAX: f32 = 3600.0; // sigma = 60
const WEIGHT_INIT: f32 = 0.05;

#[derive(Debug, Clone, Copy, Default)]
struct Component {
    weight: f32,
    mean: f32,
    var: f32,
}

impl Component {
    #[inline]
    fn sort_key(&self) -> f32 {
        self.weight / self.var.sqrt()
    }
}

#[derive(Debug)]
pub(crate) struct MogModel {
    nmixtures: usize,
    history: u64,
    back_ratio: f32,
    components: Vec<Component>,
    active: Vec<u16>,
    frames_seen: u64,
    width: usize,
    height: usize,
}

impl MogModel {
    pub fn new(width: usize, height: usize, nmixtures: usize, history: u64, back_ratio: f32) -> Self {
        MogModel {
            nmixtures,
            history: history.max(1),
            back_ratio,
            components: vec![Component::default(); width * height * nmixtures],
            active: vec![0; width * height],
            frames_seen: 0,
            width,
            height,
        }
    }

    pub fn step(&mut self, pixels: &[f32]) -> Mask {
        self.frames_seen += 1;
        let alpha = 1.0 / self.frames_seen.min(self.history) as f32;
        let mut bits = Vec::with_capacity(pixels.len());
        for (idx, value) in pixels.iter().enumerate() {
            bits.push(self.step_pixel(idx, *value, alpha));
        }
        Mask::from_bits(self.width, self.height, bits).expect("frame-sized buffer")
    }

    /// Returns true if the pixel is foreground.
    fn step_pixel(&mut self, idx: usize, value: f32, alpha: f32) -> bool {
        let base = idx * self.nmixtures;
        let n = self.active[idx] as usize;
        let comps = &mut self.components[base..base + self.nmixtures];

        // Bootstrap: with no components yet there is no evidence either way;
        // the frame seeds the model and classifies as background, matching
        // the established mixture implementations.
        if n == 0 {
            comps[0] = Component {
                weight: 1.0,
                mean: value,
                var: VAR_INIT,
            };
            self.active[idx] = 1;
            return false;
        }

        let mut matched = None;
        for (i, c) in comps[..n].iter().enumerate() {
            if (value - c.mean).abs() <= MATCH_RADIUS * c.var.sqrt() {
                matched = Some(i);
                break;
            }
        }

        // Background = smallest prefix of ranked components reaching backRatio.
        let mut bg_end = n;
        let mut cum = 0.0;
        for (i, c) in comps[..n].iter().enumerate() {
            cum += c.weight;
            if cum >= self.back_ratio {
                bg_end = i + 1;
                break;
            }
        }
        let foreground = match matched {
            Some(i) => i >= bg_end,
            None => true,
        };

        match matched {
            Some(i) => {
                for (j, c) in comps[..n].iter_mut().enumerate() {
                    let o = if i == j { 1.0 } else { 0.0 };
                    c.weight += alpha * (o - c.weight);
                }
                let rho = alpha;
                let c = &mut comps[i];
                let d = value - c.mean;
                c.mean += rho * d;
                c.var = (c.var + rho * (d * d - c.var)).clamp(VAR_MIN, VAR_MAX);
            }
            None => {
                let slot = if n < self.nmixtures {
                    self.active[idx] = n as u16 + 1;
                    n
                } else {
                    // Replace the lowest-ranked component.
                    n - 1
                };
                comps[slot] = Component {
                    weight: WEIGHT_INIT,
                    mean: value,
                    var: VAR_INIT,
                };
            }
        }

        let n = self.active[idx] as usize;
        normalize_weights(&mut comps[..n]);
        sort_by_key_desc(&mut comps[..n]);
        foreground
    }

    #[cfg(test)]
    fn weight_sum(&self, idx: usize) -> f32 {
        let base = idx * self.nmixtures;
        let n = self.active[idx] as usize;
        self.components[base..base + n].iter().map(|c| c.weight).sum()
    }
}

fn normalize_weights(comps: &mut [Component]) {
    let sum: f32 = comps.iter().map(|c| c.weight).sum();
    if sum > 0.0 {
        let inv = 1.0 / sum;
        for c in comps {
            c.weight *= inv;
        }
    }
}

/// Insertion sort; the arrays are tiny and already nearly ordered.
fn sort_by_key_desc(comps: &mut [Component]) {
    for i in 1..comps.len() {
        let mut j = i;
        while j > 0 && comps[j].sort_key() > comps[j - 1].sort_key() {
            comps.swap(j, j - 1);
            j -= 1;
        }
    }
}
