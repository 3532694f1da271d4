//! The baseline segmenters: fixed thresholding, max-relative thresholding and
//! frame differencing.

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask};

/// Marks every pixel strictly above `lambda` as foreground.
pub fn threshold_fixed(frame: &Frame, lambda: f32) -> Mask {
    let bits = frame.pixels().iter().map(|v| *v > lambda).collect();
    Mask::from_bits(frame.width(), frame.height(), bits).expect("frame-sized buffer")
}

/// Marks every pixel whose value is within `delta` of the frame maximum
/// (inclusive: values in `[max - delta, max]` are foreground).
pub fn submax(frame: &Frame, delta: f32) -> Result<Mask> {
    if frame.is_empty() {
        return Err(Error::Input("submax requires a non-empty frame".into()));
    }
    if delta < 0.0 {
        return Err(Error::Config("submax delta must be >= 0".into()));
    }
    let cutoff = frame.max() - delta;
    let bits = frame.pixels().iter().map(|v| *v >= cutoff).collect();
    Ok(Mask::from_bits(frame.width(), frame.height(), bits).expect("frame-sized buffer"))
}

/// Per-pixel `max(current - previous, 0)`. Negative differences (cooling
/// pixels) clamp to zero; cooling belongs to the background.
pub fn frame_difference(current: &Frame, previous: &Frame) -> Result<Frame> {
    current.same_dims(previous)?;
    let pixels = current
        .pixels()
        .iter()
        .zip(previous.pixels())
        .map(|(c, p)| (c - p).max(0.0))
        .collect();
    Ok(Frame::from_valid(current.width(), current.height(), pixels).with_index(current.index()))
}

/// Absolute-value variant of [`frame_difference`], available behind the
/// segmenter's `fd_absolute` flag (off by default).
pub fn frame_difference_abs(current: &Frame, previous: &Frame) -> Result<Frame> {
    current.same_dims(previous)?;
    let pixels = current
        .pixels()
        .iter()
        .zip(previous.pixels())
        .map(|(c, p)| (c - p).abs())
        .collect();
    Ok(Frame::from_valid(current.width(), current.height(), pixels).with_index(current.index()))
}

pub(crate) fn diff_into(current: &[f32], previous: &[f32], absolute: bool, out: &mut Vec<f32>) {
    out.clear();
    if absolute {
        out.extend(
            current
                .iter()
                .zip(previous)
                .map(|(c, p)| (c - p).abs()),
        );
    } else {
        out.extend(
            current
                .iter()
                .zip(previous)
                .map(|(c, p)| (c - p).max(0.0)),
        );
    }
}
