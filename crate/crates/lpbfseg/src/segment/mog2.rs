//! Adaptive mixture model with per-component variance adaptation and a
//! squared-Mahalanobis match test.
//!
//! Differences from the base mixture model: the component count grows on
//! demand up to `nmixtures`, matching uses `d^2 < thresh * var`, the matched
//! component adapts with `rho = alpha / weight`, and a small complexity prior
//! prunes components whose weight decays to zero. Components are ranked by
//! weight; the background prefix accumulates weights up to a fixed 0.9 ratio.

use crate::frame::Mask;
use crate::segment::mog::{VAR_INIT, VAR_MAX, VAR_MIN};

const BACK_RATIO: f32 = 0.9;
const COMPLEXITY_PRIOR: f32 = 0.05;

#[derive(Debug, Clone, Copy, Default)]
struct Component {
    weight: f32,
    mean: f32,
    var: f32,
}

#[derive(Debug)]
pub(crate) struct Mog2Model {
    nmixtures: usize,
    history: u64,
    thresh: f32,
    components: Vec<Component>,
    active: Vec<u16>,
    frames_seen: u64,
    width: usize,
    height: usize,
}

impl Mog2Model {
    pub fn new(width: usize, height: usize, nmixtures: usize, history: u64, thresh: f32) -> Self {
        Mog2Model {
            nmixtures,
            history: history.max(1),
            thresh,
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

    fn step_pixel(&mut self, idx: usize, value: f32, alpha: f32) -> bool {
        let base = idx * self.nmixtures;
        let mut n = self.active[idx] as usize;
        let comps = &mut self.components[base..base + self.nmixtures];

        // Bootstrap frame: seed the model and classify as background.
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
            let d = value - c.mean;
            if d * d < self.thresh * c.var {
                matched = Some(i);
                break;
            }
        }

        let mut bg_end = n;
        let mut cum = 0.0;
        for (i, c) in comps[..n].iter().enumerate() {
            cum += c.weight;
            if cum >= BACK_RATIO {
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
                    c.weight += alpha * (o - c.weight) - alpha * COMPLEXITY_PRIOR;
                }
                let c = &mut comps[i];
                let rho = (alpha / c.weight.max(alpha)).min(1.0);
                let d = value - c.mean;
                c.mean += rho * d;
                c.var = (c.var + rho * (d * d - c.var)).clamp(VAR_MIN, VAR_MAX);
                // Prune components whose weight decayed away.
                let mut j = 0;
                while j < n {
                    if comps[j].weight <= 0.0 {
                        comps[j..n].rotate_left(1);
                        n -= 1;
                    } else {
                        j += 1;
                    }
                }
                self.active[idx] = n as u16;
            }
            None => {
                let slot = if n < self.nmixtures {
                    self.active[idx] = n as u16 + 1;
                    n
                } else {
                    // Replace the weakest component.
                    let (weakest, _) = comps[..n]
                        .iter()
                        .enumerate()
                        .min_by(|(_, a), (_, b)| a.weight.total_cmp(&b.weight))
                        .expect("n >= 1 when full");
                    weakest
                };
                comps[slot] = Component {
                    weight: alpha.max(f32::EPSILON),
                    mean: value,
                    var: VAR_INIT,
                };
            }
        }

        let n = self.active[idx] as usize;
        let sum: f32 = comps[..n].iter().map(|c| c.weight).sum();
        if sum > 0.0 {
            let inv = 1.0 / sum;
            for c in &mut comps[..n] {
                c.weight *= inv;
            }
        }
        comps[..n].sort_unstable_by(|a, b| b.weight.total_cmp(&a.weight));
        foreground
    }
}
