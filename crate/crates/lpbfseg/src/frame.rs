//! Frame/mask data model and mask algebra shared by every other module.
//!
//! A [`Frame`] is one 2D thermal snapshot of the build surface: row-major
//! intensities interpreted as temperatures on whatever scale the camera
//! delivers. A [`Mask`] is a per-pixel boolean labeling aligned to a frame
//! (`true` = foreground). Both are immutable after construction and safe to
//! share across threads.

use crate::error::{Error, Result};

/// One thermal image: row-major intensities with origin at the top-left,
/// addressed as (x = column, y = row).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
    index: usize,
    laser_nominally_on: Option<bool>,
}

impl Frame {
    /// Builds a frame, checking that the buffer length matches `width * height`
    /// and that every intensity is finite and non-negative.
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Input(format!(
                "pixel buffer length {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if pixels.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input(
                "intensities must be finite and non-negative".into(),
            ));
        }
        Ok(Self::from_valid(width, height, pixels))
    }

    /// Constructor for internally generated buffers that are valid by
    /// construction (simulator output, clamped difference images).
    pub(crate) fn from_valid(width: usize, height: usize, pixels: Vec<f32>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        Frame {
            width,
            height,
            pixels,
            index: 0,
            laser_nominally_on: None,
        }
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Self {
        Frame::from_valid(width, height, vec![value; width * height])
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn with_laser_flag(mut self, on: bool) -> Self {
        self.laser_nominally_on = Some(on);
        self
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

    /// 0-based position in its sequence.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Simulator-provided metadata; `None` for recorded data.
    pub fn laser_nominally_on(&self) -> Option<bool> {
        self.laser_nominally_on
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub(crate) fn into_pixels(self) -> Vec<f32> {
        self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }

    pub fn max(&self) -> f32 {
        self.pixels.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min(&self) -> f32 {
        self.pixels.iter().copied().fold(f32::INFINITY, f32::min)
    }

    pub(crate) fn same_dims(&self, other: &Frame) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::shape(self.dims(), other.dims()));
        }
        Ok(())
    }
}

/// Binary per-pixel labeling aligned to a frame; `true` marks foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new_false(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Input(format!(
                "bit buffer length {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(Mask {
            width,
            height,
            bits,
        })
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|b| *b)
    }

    /// Coordinates of all foreground pixels in row-major order.
    pub fn true_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Pixel-wise OR of two masks. Commutative, associative and idempotent.
pub fn mask_or(a: &Mask, b: &Mask) -> Result<Mask> {
    if a.dims() != b.dims() {
        return Err(Error::shape(a.dims(), b.dims()));
    }
    let bits = a
        .bits
        .iter()
        .zip(&b.bits)
        .map(|(x, y)| *x || *y)
        .collect();
    Ok(Mask {
        width: a.width,
        height: a.height,
        bits,
    })
}

/// Extracts the masked pixel values from a frame: the output keeps the frame's
/// intensity where the mask is true and is zero elsewhere.
pub fn mask_apply(frame: &Frame, mask: &Mask) -> Result<Frame> {
    if frame.dims() != mask.dims() {
        return Err(Error::shape(frame.dims(), mask.dims()));
    }
    let pixels = frame
        .pixels
        .iter()
        .zip(&mask.bits)
        .map(|(v, b)| if *b { *v } else { 0.0 })
        .collect();
    Ok(Frame::from_valid(frame.width, frame.height, pixels).with_index(frame.index))
}

/// An ordered run of frames recorded at a fixed rate. The first
/// `warmup_count` frames were captured before the laser started.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    frame_rate: f32,
    warmup_count: usize,
}

impl FrameSequence {
    pub fn new(mut frames: Vec<Frame>, frame_rate: f32, warmup_count: usize) -> Result<Self> {
        if let Some(first) = frames.first() {
            let dims = first.dims();
            for f in &frames {
                if f.dims() != dims {
                    return Err(Error::shape(dims, f.dims()));
                }
            }
        }
        if warmup_count > frames.len() {
            return Err(Error::Input(format!(
                "warmup_count {} exceeds frame count {}",
                warmup_count,
                frames.len()
            )));
        }
        for (i, f) in frames.iter_mut().enumerate() {
            f.index = i;
        }
        Ok(FrameSequence {
            frames,
            frame_rate,
            warmup_count,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_rate(&self) -> f32 {
        self.frame_rate
    }

    pub fn warmup_count(&self) -> usize {
        self.warmup_count
    }

    /// The leading frames recorded before the laser started.
    pub fn warmup(&self) -> &[Frame] {
        &self.frames[..self.warmup_count]
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.frames.first().map(Frame::dims)
    }
}
