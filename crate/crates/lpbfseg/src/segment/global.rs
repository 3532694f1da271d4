//! Global automatic thresholding over a per-frame histogram.
//!
//! All methods share one binning scheme: `nbins` uniform bins spanning
//! `[min, max]` of the current frame. Returned thresholds are bin centers, so
//! a strict `pixel > t` test reproduces the class split for integer-spaced
//! data. Ties in criterion maxima resolve to the lowest bin.

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask};
use crate::segment::simple::threshold_fixed;

/// Which histogram criterion drives the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalMethod {
    /// Maximize between-class variance.
    Otsu,
    /// Minimize cross-entropy between image and its binarization, iteratively.
    Li,
    /// Iterate `t <- (mean below + mean above) / 2` to a fixpoint.
    Isodata,
    /// Maximize Yen's entropic criterion.
    Yen,
    /// Maximize distance from the peak-tail chord of the histogram.
    Triangle,
}

impl GlobalMethod {
    pub const ALL: [GlobalMethod; 5] = [
        GlobalMethod::Otsu,
        GlobalMethod::Li,
        GlobalMethod::Isodata,
        GlobalMethod::Yen,
        GlobalMethod::Triangle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GlobalMethod::Otsu => "otsu",
            GlobalMethod::Li => "li",
            GlobalMethod::Isodata => "isodata",
            GlobalMethod::Yen => "yen",
            GlobalMethod::Triangle => "triangle",
        }
    }
}

/// Threshold chosen by a global method, with a flag for frames that offer no
/// class separation (constant frames). A degenerate threshold equals the
/// constant value, so the induced strict-`>` mask is all-false.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalThreshold {
    pub value: f32,
    pub degenerate: bool,
}

pub(crate) struct Histogram {
    pub counts: Vec<u64>,
    pub total: u64,
    pub min: f64,
    pub bin_width: f64,
}

impl Histogram {
    pub fn build(pixels: &[f32], nbins: usize) -> Histogram {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in pixels {
            let v = *v as f64;
            min = min.min(v);
            max = max.max(v);
        }
        let bin_width = (max - min) / nbins as f64;
        let mut counts = vec![0u64; nbins];
        if bin_width > 0.0 {
            let inv = 1.0 / bin_width;
            for v in pixels {
                let i = (((*v as f64 - min) * inv) as usize).min(nbins - 1);
                counts[i] += 1;
            }
        } else {
            counts[0] = pixels.len() as u64;
        }
        Histogram {
            counts,
            total: pixels.len() as u64,
            min,
            bin_width,
        }
    }

    #[inline]
    pub fn center(&self, bin: usize) -> f64 {
        self.min + (bin as f64 + 0.5) * self.bin_width
    }
}

/// Computes a global threshold for `frame`; the induced mask is
/// `threshold_fixed(frame, t.value)`. Constant frames are flagged degenerate.
pub fn global_auto_threshold(
    frame: &Frame,
    method: GlobalMethod,
    nbins: usize,
) -> Result<GlobalThreshold> {
    if nbins < 2 {
        return Err(Error::Config("nbins must be >= 2".into()));
    }
    if frame.is_empty() {
        return Err(Error::Input("cannot threshold an empty frame".into()));
    }
    let hist = Histogram::build(frame.pixels(), nbins);
    if hist.bin_width == 0.0 {
        return Ok(GlobalThreshold {
            value: hist.min as f32,
            degenerate: true,
        });
    }
    let value = match method {
        GlobalMethod::Otsu => otsu(&hist),
        GlobalMethod::Li => li(&hist),
        GlobalMethod::Isodata => isodata(&hist),
        GlobalMethod::Yen => yen(&hist),
        GlobalMethod::Triangle => triangle(&hist),
    };
    Ok(GlobalThreshold {
        value: value as f32,
        degenerate: false,
    })
}

/// Convenience wrapper returning the induced mask directly.
pub fn global_auto_mask(frame: &Frame, method: GlobalMethod, nbins: usize) -> Result<Mask> {
    let t = global_auto_threshold(frame, method, nbins)?;
    Ok(threshold_fixed(frame, t.value))
}

/// Between-class variance maximization: scan every split `k` (class 0 = bins
/// `0..=k`), pick the first maximum.
fn otsu(hist: &Histogram) -> f64 {
    let total = hist.total as f64;
    let total_sum: f64 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| hist.center(i) * *c as f64)
        .sum();

    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    let mut best_var = f64::NEG_INFINITY;
    let mut best_k = 0;
    for k in 0..hist.counts.len() - 1 {
        let c = hist.counts[k] as f64;
        w0 += c;
        sum0 += hist.center(k) * c;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (total_sum - sum0) / w1;
        let var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best_k = k;
        }
    }
    hist.center(best_k)
}

/// Mean-of-class-means fixpoint. Starts at the overall mean; stops when the
/// update is below a small fraction of the bin width.
fn isodata(hist: &Histogram) -> f64 {
    let total = hist.total as f64;
    let mean: f64 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| hist.center(i) * *c as f64)
        .sum::<f64>()
        / total;

    let mut t = mean;
    for _ in 0..1000 {
        let mut w0 = 0.0;
        let mut s0 = 0.0;
        let mut w1 = 0.0;
        let mut s1 = 0.0;
        for (i, c) in hist.counts.iter().enumerate() {
            let center = hist.center(i);
            let c = *c as f64;
            if center <= t {
                w0 += c;
                s0 += center * c;
            } else {
                w1 += c;
                s1 += center * c;
            }
        }
        if w0 == 0.0 || w1 == 0.0 {
            break;
        }
        let next = 0.5 * (s0 / w0 + s1 / w1);
        if (next - t).abs() < hist.bin_width * 1e-6 {
            return next;
        }
        t = next;
    }
    t
}

/// Yen's maximum-correlation criterion over the normalized histogram.
fn yen(hist: &Histogram) -> f64 {
    let total = hist.total as f64;
    let n = hist.counts.len();
    let pmf: Vec<f64> = hist.counts.iter().map(|c| *c as f64 / total).collect();

    // Cumulative mass and cumulative squared mass from both ends.
    let mut p1 = vec![0.0; n];
    let mut p1_sq = vec![0.0; n];
    let mut acc = 0.0;
    let mut acc_sq = 0.0;
    for i in 0..n {
        acc += pmf[i];
        acc_sq += pmf[i] * pmf[i];
        p1[i] = acc;
        p1_sq[i] = acc_sq;
    }
    let mut p2_sq = vec![0.0; n + 1];
    for i in (0..n).rev() {
        p2_sq[i] = p2_sq[i + 1] + pmf[i] * pmf[i];
    }

    let mut best = f64::NEG_INFINITY;
    let mut best_k = 0;
    for k in 0..n - 1 {
        if p1[k] <= 0.0 || p1[k] >= 1.0 {
            continue;
        }
        let denom = p1_sq[k] * p2_sq[k + 1];
        if denom <= 0.0 {
            continue;
        }
        let num = p1[k] * (1.0 - p1[k]);
        let crit = (num * num / denom).ln();
        if crit > best {
            best = crit;
            best_k = k;
        }
    }
    hist.center(best_k)
}

/// Li's iterative minimum cross-entropy threshold. Works on bin centers
/// shifted to be strictly positive so the logarithms are defined.
fn li(hist: &Histogram) -> f64 {
    let n = hist.counts.len();
    // Shift so the smallest center is one bin width above zero.
    let shift = if hist.center(0) <= 0.0 {
        hist.bin_width - hist.center(0)
    } else {
        0.0
    };
    let centers: Vec<f64> = (0..n).map(|i| hist.center(i) + shift).collect();
    let total = hist.total as f64;
    let mean: f64 = centers
        .iter()
        .zip(&hist.counts)
        .map(|(c, h)| c * *h as f64)
        .sum::<f64>()
        / total;

    let tolerance = hist.bin_width * 0.5;
    let mut t = mean;
    for _ in 0..1000 {
        let mut w_back = 0.0;
        let mut s_back = 0.0;
        let mut w_fore = 0.0;
        let mut s_fore = 0.0;
        for (c, h) in centers.iter().zip(&hist.counts) {
            let h = *h as f64;
            if *c > t {
                w_fore += h;
                s_fore += c * h;
            } else {
                w_back += h;
                s_back += c * h;
            }
        }
        if w_back == 0.0 || w_fore == 0.0 {
            break;
        }
        let mean_back = s_back / w_back;
        let mean_fore = s_fore / w_fore;
        if mean_back <= 0.0 {
            break;
        }
        let next = (mean_fore - mean_back) / (mean_fore.ln() - mean_back.ln());
        if !next.is_finite() {
            break;
        }
        if (next - t).abs() < tolerance {
            t = next;
            break;
        }
        t = next;
    }
    t - shift
}

/// Triangle method: the threshold bin maximizes the distance between the
/// histogram and the chord from its peak to the far end of the longer tail.
fn triangle(hist: &Histogram) -> f64 {
    let counts = &hist.counts;
    let n = counts.len();
    let peak = counts
        .iter()
        .enumerate()
        .max_by_key(|(_, c)| **c)
        .map(|(i, _)| i)
        .unwrap_or(0);
    let first = counts.iter().position(|c| *c > 0).unwrap_or(0);
    let last = counts.iter().rposition(|c| *c > 0).unwrap_or(n - 1);

    // Walk the longer tail away from the peak.
    let (start, end) = if peak - first >= last - peak {
        (peak, first)
    } else {
        (peak, last)
    };
    if start == end {
        return hist.center(peak);
    }

    let h_peak = counts[peak] as f64;
    let h_end = counts[end] as f64;
    let dx = end as f64 - start as f64;
    let dy = h_end - h_peak;
    let norm = (dx * dx + dy * dy).sqrt();

    let mut best = f64::NEG_INFINITY;
    let mut best_k = start;
    let range: Box<dyn Iterator<Item = usize>> = if end > start {
        Box::new(start + 1..end)
    } else {
        Box::new(end + 1..start)
    };
    for k in range {
        let d = (dy * (k as f64 - start as f64) - dx * (counts[k] as f64 - h_peak)).abs() / norm;
        if d > best {
            best = d;
            best_k = k;
        }
    }
    hist.center(best_k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level_frame() -> Frame {
        let mut px = vec![1.0f32; 32];
        px.extend(vec![9.0f32; 32]);
        Frame::new(8, 8, px).unwrap()
    }

    /// Brute-force between-class variance maximization used as the Otsu
    /// oracle: recompute class means per candidate split from scratch.
    pub(crate) fn otsu_oracle(pixels: &[f32], nbins: usize) -> f64 {
        let hist = Histogram::build(pixels, nbins);
        let mut best_var = f64::NEG_INFINITY;
        let mut best_k = 0;
        for k in 0..nbins - 1 {
            let mut w0 = 0.0;
            let mut s0 = 0.0;
            let mut w1 = 0.0;
            let mut s1 = 0.0;
            for (i, c) in hist.counts.iter().enumerate() {
                let c = *c as f64;
                if i <= k {
                    w0 += c;
                    s0 += hist.center(i) * c;
                } else {
                    w1 += c;
                    s1 += hist.center(i) * c;
                }
            }
            if w0 == 0.0 || w1 == 0.0 {
                continue;
            }
            let d = s0 / w0 - s1 / w1;
            let var = w0 * w1 * d * d;
            if var > best_var {
                best_var = var;
                best_k = k;
            }
        }
        hist.center(best_k)
    }

    #[test]
    fn otsu_separates_two_levels() {
        let f = two_level_frame();
        let t = global_auto_threshold(&f, GlobalMethod::Otsu, 256).unwrap();
        assert!(!t.degenerate);
        let mask = threshold_fixed(&f, t.value);
        for (i, bit) in mask.bits().iter().enumerate() {
            assert_eq!(*bit, f.pixels()[i] == 9.0);
        }
        // Matches the brute-force oracle bin-exactly.
        let oracle = otsu_oracle(f.pixels(), 256);
        assert_eq!(t.value as f64, oracle);
    }

    #[test]
    fn constant_frame_is_degenerate_with_all_false_mask() {
        let f = Frame::constant(8, 8, 42.0);
        for method in GlobalMethod::ALL {
            let t = global_auto_threshold(&f, method, 256).unwrap();
            assert!(t.degenerate);
            assert_eq!(t.value, 42.0);
            assert!(!global_auto_mask(&f, method, 256).unwrap().any());
        }
    }

    #[test]
    fn isodata_two_level_fixpoint_is_five() {
        // Class means 1 and 9 give the midpoint 5.
        let f = two_level_frame();
        let t = global_auto_threshold(&f, GlobalMethod::Isodata, 256).unwrap();
        assert!((t.value - 5.0).abs() < 1e-4, "t = {}", t.value);
    }

    #[test]
    fn isodata_output_is_a_fixpoint() {
        let f = Frame::new(
            4,
            2,
            vec![1.0, 2.0, 3.0, 4.0, 20.0, 21.0, 22.0, 40.0],
        )
        .unwrap();
        let nbins = 64;
        let t = global_auto_threshold(&f, GlobalMethod::Isodata, nbins)
            .unwrap()
            .value as f64;
        let below: Vec<f64> = f
            .pixels()
            .iter()
            .map(|v| *v as f64)
            .filter(|v| *v <= t)
            .collect();
        let above: Vec<f64> = f
            .pixels()
            .iter()
            .map(|v| *v as f64)
            .filter(|v| *v > t)
            .collect();
        let m0 = below.iter().sum::<f64>() / below.len() as f64;
        let m1 = above.iter().sum::<f64>() / above.len() as f64;
        let bin_width = (40.0 - 1.0) / nbins as f64;
        assert!((0.5 * (m0 + m1) - t).abs() <= bin_width);
    }

    #[test]
    fn yen_and_li_and_triangle_split_two_levels() {
        let f = two_level_frame();
        for method in [GlobalMethod::Yen, GlobalMethod::Li, GlobalMethod::Triangle] {
            let t = global_auto_threshold(&f, method, 256).unwrap();
            assert!(
                t.value > 1.0 && t.value < 9.0,
                "{:?} returned {}",
                method,
                t.value
            );
        }
    }

    #[test]
    fn nbins_below_two_rejected() {
        let f = two_level_frame();
        assert!(global_auto_threshold(&f, GlobalMethod::Otsu, 1).is_err());
    }
}
