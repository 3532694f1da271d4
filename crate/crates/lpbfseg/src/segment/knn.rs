//! Sample-based background model: per-pixel reservoir of recent values.
//!
//! A pixel is background iff at least `K` stored samples lie within squared
//! distance `thresh` of the current value. The reservoir holds `history`
//! samples per pixel; it fills sequentially and afterwards one random slot
//! per frame (shared across pixels, drawn from the seeded generator) is
//! overwritten, so each slot is replaced at an expected rate of `1/history`.

use crate::frame::Mask;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const K: usize = 2;

#[derive(Debug)]
pub(crate) struct KnnModel {
    history: usize,
    thresh: f32,
    samples: Vec<f32>,
    filled: usize,
    width: usize,
    height: usize,
}

impl KnnModel {
    pub fn new(width: usize, height: usize, history: usize, thresh: f32) -> Self {
        let history = history.max(1);
        KnnModel {
            history,
            thresh,
            samples: vec![0.0; width * height * history],
            filled: 0,
            width,
            height,
        }
    }

    pub fn step(&mut self, pixels: &[f32], rng: &mut ChaCha8Rng) -> Mask {
        let slot = if self.filled < self.history {
            let s = self.filled;
            self.filled += 1;
            s
        } else {
            rng.random_range(0..self.history)
        };

        let mut bits = Vec::with_capacity(pixels.len());
        for (idx, value) in pixels.iter().enumerate() {
            let base = idx * self.history;
            let stored = &self.samples[base..base + self.filled.min(self.history)];
            let mut matches = 0;
            let mut background = false;
            for s in stored {
                let d = value - s;
                if d * d <= self.thresh {
                    matches += 1;
                    if matches >= K {
                        background = true;
                        break;
                    }
                }
            }
            bits.push(!background);
            self.samples[base + slot] = *value;
        }
        Mask::from_bits(self.width, self.height, bits).expect("frame-sized buffer")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn constant_sequence_becomes_background() {
        let mut model = KnnModel::new(3, 3, 5, 16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pixels = vec![280.0f32; 9];
        let mut last = None;
        for _ in 0..8 {
            last = Some(model.step(&pixels, &mut rng));
        }
        assert!(!last.unwrap().any());
    }

    #[test]
    fn outlier_pixel_is_foreground() {
        let mut model = KnnModel::new(3, 3, 5, 16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pixels = vec![280.0f32; 9];
        for _ in 0..8 {
            model.step(&pixels, &mut rng);
        }
        let mut hot = pixels.clone();
        hot[2] = 500.0;
        let mask = model.step(&hot, &mut rng);
        assert!(mask.bits()[2]);
        assert_eq!(mask.count_true(), 1);
    }

    #[test]
    fn needs_two_matching_samples() {
        let mut model = KnnModel::new(1, 1, 4, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // First frame: no samples yet, foreground.
        assert!(model.step(&[100.0], &mut rng).bits()[0]);
        // Second frame: one matching sample, still foreground.
        assert!(model.step(&[100.0], &mut rng).bits()[0]);
        // Third frame: two matching samples, background.
        assert!(!model.step(&[100.0], &mut rng).bits()[0]);
    }
}
