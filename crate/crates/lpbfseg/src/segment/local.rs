//! Windowed (local) thresholding: adaptive mean, adaptive Gaussian and
//! Sauvola. Neighborhood statistics use reflect padding at the borders
//! (edge row/column included in the mirror). Mean and standard deviation are
//! computed through integral images so the cost is independent of the window
//! size.

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMethod {
    /// `t = patch mean - C`
    AdaptMean,
    /// `t = Gaussian-weighted patch mean - C`
    AdaptGauss,
    /// `t = m * (1 + k * (s / R - 1))` with `R` the frame's dynamic range.
    Sauvola,
}

impl LocalMethod {
    pub const ALL: [LocalMethod; 3] = [
        LocalMethod::AdaptMean,
        LocalMethod::AdaptGauss,
        LocalMethod::Sauvola,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LocalMethod::AdaptMean => "adapt_mean",
            LocalMethod::AdaptGauss => "adapt_gauss",
            LocalMethod::Sauvola => "sauvola",
        }
    }
}

/// Labels pixels strictly above their local threshold as foreground.
///
/// `window` must be odd, at least 3 and smaller than both frame dimensions.
/// `k` is only used by Sauvola, `c` only by the adaptive methods.
pub fn local_auto_threshold(
    frame: &Frame,
    method: LocalMethod,
    window: usize,
    k: f64,
    c: f64,
) -> Result<Mask> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::Config(format!(
            "window must be odd and >= 3, got {window}"
        )));
    }
    if window >= frame.width().min(frame.height()) {
        return Err(Error::Config(format!(
            "window {} must be smaller than both frame dimensions {}x{}",
            window,
            frame.width(),
            frame.height()
        )));
    }

    let (w, h) = frame.dims();
    let r = window / 2;
    let padded = pad_reflect(frame.pixels(), w, h, r);
    let pw = w + 2 * r;

    let bits = match method {
        LocalMethod::AdaptMean => {
            let integral = integral_image(&padded, pw);
            let area = (window * window) as f64;
            map_pixels(frame, |x, y, v| {
                let mean = window_sum(&integral, pw, x, y, window) / area;
                v as f64 > mean - c
            })
        }
        LocalMethod::AdaptGauss => {
            let blurred = gaussian_blur(&padded, pw, h + 2 * r, window);
            map_pixels(frame, |x, y, v| {
                let mean = blurred[(y + r) * pw + (x + r)];
                v as f64 > mean - c
            })
        }
        LocalMethod::Sauvola => {
            let integral = integral_image(&padded, pw);
            let sq: Vec<f64> = padded.iter().map(|v| v * v).collect();
            let integral_sq = integral_image(&sq, pw);
            let area = (window * window) as f64;
            let range = (frame.max() - frame.min()).max(f32::EPSILON) as f64;
            map_pixels(frame, |x, y, v| {
                let s = window_sum(&integral, pw, x, y, window);
                let s2 = window_sum(&integral_sq, pw, x, y, window);
                let mean = s / area;
                let var = (s2 / area - mean * mean).max(0.0);
                let t = mean * (1.0 + k * (var.sqrt() / range - 1.0));
                v as f64 > t
            })
        }
    };
    Ok(Mask::from_bits(w, h, bits).expect("frame-sized buffer"))
}

fn map_pixels(frame: &Frame, mut f: impl FnMut(usize, usize, f32) -> bool) -> Vec<bool> {
    let (w, h) = frame.dims();
    let mut bits = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            bits.push(f(x, y, frame.get(x, y)));
        }
    }
    bits
}

/// Symmetric reflection: for a row `a b c d`, the left pad of width 2 reads
/// `b a`. Requires `r <= width` and `r <= height`.
fn pad_reflect(pixels: &[f32], w: usize, h: usize, r: usize) -> Vec<f64> {
    let pw = w + 2 * r;
    let ph = h + 2 * r;
    let reflect = |c: isize, size: usize| -> usize {
        if c < 0 {
            (-c - 1) as usize
        } else if c as usize >= size {
            2 * size - c as usize - 1
        } else {
            c as usize
        }
    };
    let mut out = vec![0.0; pw * ph];
    for py in 0..ph {
        let sy = reflect(py as isize - r as isize, h);
        for px in 0..pw {
            let sx = reflect(px as isize - r as isize, w);
            out[py * pw + px] = pixels[sy * w + sx] as f64;
        }
    }
    out
}

/// Summed-area table with a zero top row and left column, so
/// `I[(y+1)*(w+1)+(x+1)]` holds the sum over `[0..=x, 0..=y]`.
fn integral_image(pixels: &[f64], w: usize) -> Vec<f64> {
    let h = pixels.len() / w;
    let stride = w + 1;
    let mut out = vec![0.0; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += pixels[y * w + x];
            out[(y + 1) * stride + (x + 1)] = out[y * stride + (x + 1)] + row;
        }
    }
    out
}

/// Sum over the `window`-sized patch centered on unpadded pixel `(x, y)`.
#[inline]
fn window_sum(integral: &[f64], pw: usize, x: usize, y: usize, window: usize) -> f64 {
    let stride = pw + 1;
    let (x0, y0) = (x, y); // top-left corner in padded coords
    let (x1, y1) = (x + window, y + window);
    integral[y1 * stride + x1] - integral[y0 * stride + x1] - integral[y1 * stride + x0]
        + integral[y0 * stride + x0]
}

/// Separable blur with the conventional kernel size/sigma coupling
/// `sigma = 0.3 * ((window - 1) * 0.5 - 1) + 0.8`.
fn gaussian_blur(pixels: &[f64], w: usize, h: usize, window: usize) -> Vec<f64> {
    let sigma = 0.3 * ((window as f64 - 1.0) * 0.5 - 1.0) + 0.8;
    let r = window / 2;
    let mut kernel = Vec::with_capacity(window);
    for i in 0..window {
        let d = i as f64 - r as f64;
        kernel.push((-d * d / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }

    // Horizontal pass (interior columns only; the margins are padding).
    let mut tmp = vec![0.0; pixels.len()];
    for y in 0..h {
        for x in r..w - r {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                acc += k * pixels[y * w + x + i - r];
            }
            tmp[y * w + x] = acc;
        }
    }
    // Vertical pass.
    let mut out = vec![0.0; pixels.len()];
    for y in r..h - r {
        for x in r..w - r {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                acc += k * tmp[(y + i - r) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}
