//! The segmentation algorithm suite behind one streaming interface: feed
//! frames in order, receive one foreground mask per frame.
//!
//! Algorithms are identified by a [`SegmenterSpec`]: the algorithm itself, an
//! optional frame-differencing prefix, and a parameter map. Parameter
//! defaults and the calibrated preset ship with the crate, so
//! `SegmenterSpec::parse("fd+thresh")` is immediately runnable.
//!
//! The frame-differencing combination `FD+X` is exactly: subtract the
//! previous raw frame (clamping negative differences to zero), zero out every
//! pixel at or below 1 intensity unit to suppress near-zero noise, then hand
//! the resulting difference image to `X`. Background-model algorithms under
//! the prefix therefore model difference images, not raw frames. The first
//! frame yields an all-false mask since no previous frame exists.

mod global;
mod knn;
mod local;
mod mog;
mod mog2;
mod simple;

pub use global::{global_auto_mask, global_auto_threshold, GlobalMethod, GlobalThreshold};
pub use local::{local_auto_threshold, LocalMethod};
pub use simple::{frame_difference, frame_difference_abs, submax, threshold_fixed};

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask};
use knn::KnnModel;
use mog::MogModel;
use mog2::Mog2Model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Pixels at or below this value are zeroed between the differencing step and
/// the wrapped algorithm.
pub const FD_PRE_THRESHOLD: f32 = 1.0;

/// The algorithm roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    /// Global threshold with a fixed scalar lambda.
    Thresh,
    /// Threshold relative to the frame maximum (delta below it).
    SubMax,
    /// Frame differencing alone: any positive difference is foreground.
    Fd,
    /// Histogram-derived global threshold, recomputed per frame.
    GlobalAuto(GlobalMethod),
    /// Windowed local threshold.
    LocalAuto(LocalMethod),
    /// Mixture-of-Gaussians background model.
    Mog,
    /// Mixture model with adaptive component count and variances.
    Mog2,
    /// Sample-reservoir background model.
    Knn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 14] = [
        Algorithm::Thresh,
        Algorithm::SubMax,
        Algorithm::Fd,
        Algorithm::GlobalAuto(GlobalMethod::Otsu),
        Algorithm::GlobalAuto(GlobalMethod::Li),
        Algorithm::GlobalAuto(GlobalMethod::Isodata),
        Algorithm::GlobalAuto(GlobalMethod::Yen),
        Algorithm::GlobalAuto(GlobalMethod::Triangle),
        Algorithm::LocalAuto(LocalMethod::Sauvola),
        Algorithm::LocalAuto(LocalMethod::AdaptMean),
        Algorithm::LocalAuto(LocalMethod::AdaptGauss),
        Algorithm::Mog,
        Algorithm::Mog2,
        Algorithm::Knn,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Thresh => "thresh",
            Algorithm::SubMax => "submax",
            Algorithm::Fd => "fd",
            Algorithm::GlobalAuto(m) => m.name(),
            Algorithm::LocalAuto(m) => m.name(),
            Algorithm::Mog => "mog",
            Algorithm::Mog2 => "mog2",
            Algorithm::Knn => "knn",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let algo = match lower.as_str() {
            "thresh" => Algorithm::Thresh,
            "submax" => Algorithm::SubMax,
            "fd" => Algorithm::Fd,
            "otsu" => Algorithm::GlobalAuto(GlobalMethod::Otsu),
            "li" => Algorithm::GlobalAuto(GlobalMethod::Li),
            "isodata" => Algorithm::GlobalAuto(GlobalMethod::Isodata),
            "yen" => Algorithm::GlobalAuto(GlobalMethod::Yen),
            "triangle" => Algorithm::GlobalAuto(GlobalMethod::Triangle),
            "sauvola" => Algorithm::LocalAuto(LocalMethod::Sauvola),
            "adapt_mean" | "adaptmean" => Algorithm::LocalAuto(LocalMethod::AdaptMean),
            "adapt_gauss" | "adaptgauss" => Algorithm::LocalAuto(LocalMethod::AdaptGauss),
            "mog" => Algorithm::Mog,
            "mog2" => Algorithm::Mog2,
            "knn" => Algorithm::Knn,
            other => {
                return Err(Error::Config(format!("unknown algorithm '{other}'")));
            }
        };
        Ok(algo)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.name().to_string()
    }
}

/// Which bundled parameter set to start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamPreset {
    Default,
    Calibrated,
}

/// Algorithm identifier plus parameter set: the unit of tuning and
/// benchmarking.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SegmenterSpec {
    pub algorithm: Algorithm,
    /// Wrap the algorithm with the frame-differencing prefix.
    #[serde(default)]
    pub fd_prefix: bool,
    /// Use absolute differences instead of clamping cooling pixels to zero.
    #[serde(default)]
    pub fd_absolute: bool,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl SegmenterSpec {
    /// Spec with the default parameter set for the algorithm.
    pub fn new(algorithm: Algorithm, fd_prefix: bool) -> Self {
        SegmenterSpec::with_preset(algorithm, fd_prefix, ParamPreset::Default)
    }

    /// Spec with the bundled calibrated parameter set.
    pub fn calibrated(algorithm: Algorithm, fd_prefix: bool) -> Self {
        SegmenterSpec::with_preset(algorithm, fd_prefix, ParamPreset::Calibrated)
    }

    pub fn with_preset(algorithm: Algorithm, fd_prefix: bool, preset: ParamPreset) -> Self {
        let params = preset_params(algorithm, fd_prefix, preset)
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        SegmenterSpec {
            algorithm,
            fd_prefix,
            fd_absolute: false,
            params,
        }
    }

    /// Parses names like `thresh`, `otsu`, `fd`, or `fd+mog2`.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("fd+") {
            let algorithm: Algorithm = rest.parse()?;
            if algorithm == Algorithm::Fd {
                return Err(Error::Config("'fd+fd' is not a valid combination".into()));
            }
            Ok(SegmenterSpec::new(algorithm, true))
        } else {
            Ok(SegmenterSpec::new(lower.parse()?, false))
        }
    }

    /// Human-facing name, e.g. `FD+Thresh`.
    pub fn display_name(&self) -> String {
        let base = match self.algorithm {
            Algorithm::Thresh => "Thresh",
            Algorithm::SubMax => "SubMax",
            Algorithm::Fd => "FD",
            Algorithm::GlobalAuto(GlobalMethod::Otsu) => "Otsu",
            Algorithm::GlobalAuto(GlobalMethod::Li) => "Li",
            Algorithm::GlobalAuto(GlobalMethod::Isodata) => "isodata",
            Algorithm::GlobalAuto(GlobalMethod::Yen) => "Yen",
            Algorithm::GlobalAuto(GlobalMethod::Triangle) => "Triangle",
            Algorithm::LocalAuto(LocalMethod::Sauvola) => "Sauvola",
            Algorithm::LocalAuto(LocalMethod::AdaptMean) => "AdaptMean",
            Algorithm::LocalAuto(LocalMethod::AdaptGauss) => "AdaptGauss",
            Algorithm::Mog => "MOG",
            Algorithm::Mog2 => "MOG2",
            Algorithm::Knn => "KNN",
        };
        if self.fd_prefix {
            format!("FD+{base}")
        } else {
            base.to_string()
        }
    }

    /// Parseable name, e.g. `fd+thresh`.
    pub fn name(&self) -> String {
        if self.fd_prefix {
            format!("fd+{}", self.algorithm.name())
        } else {
            self.algorithm.name().to_string()
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn set_params(&mut self, params: &BTreeMap<String, f64>) {
        for (k, v) in params {
            self.params.insert(k.clone(), *v);
        }
    }

    /// Parameter lookup; every declared parameter is auto-filled at
    /// construction, so a miss is a programming error.
    pub fn param(&self, name: &str) -> f64 {
        *self
            .params
            .get(name)
            .unwrap_or_else(|| panic!("parameter '{name}' missing from spec"))
    }

    /// Snaps integer-valued parameters to their nearest legal value: window
    /// sizes become odd and at least 3, counts become at least 1. Used by the
    /// tuner after sampling continuous ranges.
    pub fn sanitize(&mut self) {
        if let Some(b) = self.params.get_mut("box") {
            let mut v = b.round().max(3.0) as i64;
            if v % 2 == 0 {
                v += 1;
            }
            *b = v as f64;
        }
        for key in ["history", "nmixtures"] {
            if let Some(v) = self.params.get_mut(key) {
                *v = v.round().max(1.0);
            }
        }
        if let Some(v) = self.params.get_mut("nbins") {
            *v = v.round().max(2.0);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fd_prefix && self.algorithm == Algorithm::Fd {
            return Err(Error::Config(
                "fd_prefix cannot wrap the fd algorithm".into(),
            ));
        }
        for (name, value) in &self.params {
            if !value.is_finite() {
                return Err(Error::Config(format!("parameter '{name}' is not finite")));
            }
        }
        let check = |cond: bool, msg: &str| -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        match self.algorithm {
            Algorithm::Thresh => check(self.param("lambda") >= 0.0, "lambda must be >= 0")?,
            Algorithm::SubMax => check(self.param("delta") >= 0.0, "delta must be >= 0")?,
            Algorithm::Fd => {}
            Algorithm::GlobalAuto(_) => check(self.param("nbins") >= 2.0, "nbins must be >= 2")?,
            Algorithm::LocalAuto(_) => {
                let b = self.param("box");
                check(
                    b >= 3.0 && b.fract() == 0.0 && (b as i64) % 2 == 1,
                    "box must be an odd integer >= 3",
                )?;
            }
            Algorithm::Mog => {
                check(self.param("history") >= 1.0, "history must be >= 1")?;
                check(self.param("nmixtures") >= 1.0, "nmixtures must be >= 1")?;
                let r = self.param("backRatio");
                check(r > 0.0 && r <= 1.0, "backRatio must be in (0, 1]")?;
            }
            Algorithm::Mog2 => {
                check(self.param("history") >= 1.0, "history must be >= 1")?;
                check(self.param("thresh") > 0.0, "thresh must be > 0")?;
            }
            Algorithm::Knn => {
                check(self.param("history") >= 1.0, "history must be >= 1")?;
                check(self.param("thresh") > 0.0, "thresh must be > 0")?;
            }
        }
        Ok(())
    }
}

fn preset_params(
    algorithm: Algorithm,
    fd_prefix: bool,
    preset: ParamPreset,
) -> &'static [(&'static str, f64)] {
    use ParamPreset::*;
    match (algorithm, preset) {
        (Algorithm::Thresh, Default) => {
            if fd_prefix {
                &[("lambda", 3.0)]
            } else {
                &[("lambda", 295.0)]
            }
        }
        (Algorithm::Thresh, Calibrated) => {
            if fd_prefix {
                &[("lambda", 4.44)]
            } else {
                &[("lambda", 377.60)]
            }
        }
        (Algorithm::SubMax, Default) => &[("delta", 20.0)],
        (Algorithm::SubMax, Calibrated) => &[("delta", 125.81)],
        (Algorithm::Fd, _) => &[],
        (Algorithm::GlobalAuto(_), _) => &[("nbins", 256.0)],
        (Algorithm::LocalAuto(LocalMethod::Sauvola), Default) => &[("box", 15.0), ("k", 0.2)],
        (Algorithm::LocalAuto(LocalMethod::Sauvola), Calibrated) => {
            if fd_prefix {
                &[("box", 37.0), ("k", 0.23)]
            } else {
                &[("box", 79.0), ("k", 0.41)]
            }
        }
        (Algorithm::LocalAuto(LocalMethod::AdaptMean), Default) => &[("box", 11.0), ("C", 2.0)],
        (Algorithm::LocalAuto(LocalMethod::AdaptMean), Calibrated) => {
            if fd_prefix {
                &[("box", 263.0), ("C", 66.0)]
            } else {
                &[("box", 451.0), ("C", 0.0)]
            }
        }
        (Algorithm::LocalAuto(LocalMethod::AdaptGauss), Default) => &[("box", 11.0), ("C", 2.0)],
        (Algorithm::LocalAuto(LocalMethod::AdaptGauss), Calibrated) => {
            if fd_prefix {
                &[("box", 7.0), ("C", 78.0)]
            } else {
                &[("box", 387.0), ("C", 2.0)]
            }
        }
        (Algorithm::Mog, Default) => &[("backRatio", 0.7), ("history", 200.0), ("nmixtures", 5.0)],
        (Algorithm::Mog, Calibrated) => {
            if fd_prefix {
                &[("backRatio", 0.77), ("history", 29.0), ("nmixtures", 327.0)]
            } else {
                &[("backRatio", 0.47), ("history", 14.0), ("nmixtures", 290.0)]
            }
        }
        (Algorithm::Mog2, Default) => &[("history", 500.0), ("thresh", 16.0)],
        (Algorithm::Mog2, Calibrated) => {
            if fd_prefix {
                &[("history", 27.0), ("thresh", 1.10)]
            } else {
                &[("history", 67.0), ("thresh", 10.10)]
            }
        }
        (Algorithm::Knn, Default) => &[("history", 500.0), ("thresh", 400.0)],
        (Algorithm::Knn, Calibrated) => {
            if fd_prefix {
                &[("history", 2.0), ("thresh", 4.40)]
            } else {
                &[("history", 68.0), ("thresh", 298.81)]
            }
        }
    }
}

#[derive(Debug)]
enum Model {
    Stateless,
    Mog(MogModel),
    Mog2(Mog2Model),
    Knn(KnnModel),
}

/// Streaming segmenter state. Single-owner: feed the frames of one sequence
/// strictly in order. Distinct states for distinct sequences may run in
/// parallel; there is no shared mutable data.
#[derive(Debug)]
pub struct Segmenter {
    spec: SegmenterSpec,
    dims: Option<(usize, usize)>,
    previous: Option<Vec<f32>>,
    scratch: Vec<f32>,
    model: Model,
    frames_seen: u64,
    rng: ChaCha8Rng,
}

impl Segmenter {
    pub fn new(spec: SegmenterSpec) -> Result<Self> {
        Segmenter::with_seed(spec, 0)
    }

    /// The seed fixes every random choice (currently only the sample
    /// reservoir's replacement slots), making runs reproducible.
    pub fn with_seed(spec: SegmenterSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        Ok(Segmenter {
            spec,
            dims: None,
            previous: None,
            scratch: Vec::new(),
            model: Model::Stateless,
            frames_seen: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn spec(&self) -> &SegmenterSpec {
        &self.spec
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    /// Segments one frame and advances the model state.
    pub fn step(&mut self, frame: &Frame) -> Result<Mask> {
        let (w, h) = frame.dims();
        match self.dims {
            None => {
                self.dims = Some((w, h));
                self.init_model(w, h);
            }
            Some(dims) if dims != (w, h) => {
                return Err(Error::shape(dims, (w, h)));
            }
            _ => {}
        }
        self.frames_seen += 1;

        if !self.spec.fd_prefix && self.spec.algorithm != Algorithm::Fd {
            return self.apply_algorithm(frame);
        }

        // Differencing paths. The first frame has no predecessor: record it
        // and emit an all-false mask.
        if self.previous.is_none() {
            self.previous = Some(frame.pixels().to_vec());
            return Ok(Mask::new_false(w, h));
        }
        let mut buf = std::mem::take(&mut self.scratch);
        simple::diff_into(
            frame.pixels(),
            self.previous.as_deref().expect("previous present"),
            self.spec.fd_absolute,
            &mut buf,
        );
        let mask = if self.spec.algorithm == Algorithm::Fd {
            let bits = buf.iter().map(|v| *v > 0.0).collect();
            self.scratch = buf;
            Mask::from_bits(w, h, bits).expect("frame-sized buffer")
        } else {
            for v in &mut buf {
                if *v <= FD_PRE_THRESHOLD {
                    *v = 0.0;
                }
            }
            let diff_frame = Frame::from_valid(w, h, buf);
            let mask = self.apply_algorithm(&diff_frame)?;
            self.scratch = diff_frame.into_pixels();
            mask
        };
        self.previous
            .as_mut()
            .expect("previous present")
            .copy_from_slice(frame.pixels());
        Ok(mask)
    }

    fn init_model(&mut self, w: usize, h: usize) {
        self.model = match self.spec.algorithm {
            Algorithm::Mog => Model::Mog(MogModel::new(
                w,
                h,
                self.spec.param("nmixtures") as usize,
                self.spec.param("history") as u64,
                self.spec.param("backRatio") as f32,
            )),
            Algorithm::Mog2 => Model::Mog2(Mog2Model::new(
                w,
                h,
                5,
                self.spec.param("history") as u64,
                self.spec.param("thresh") as f32,
            )),
            Algorithm::Knn => Model::Knn(KnnModel::new(
                w,
                h,
                self.spec.param("history") as usize,
                self.spec.param("thresh") as f32,
            )),
            _ => Model::Stateless,
        };
    }

    fn apply_algorithm(&mut self, input: &Frame) -> Result<Mask> {
        match (&mut self.model, self.spec.algorithm) {
            (Model::Mog(m), _) => Ok(m.step(input.pixels())),
            (Model::Mog2(m), _) => Ok(m.step(input.pixels())),
            (Model::Knn(m), _) => Ok(m.step(input.pixels(), &mut self.rng)),
            (Model::Stateless, Algorithm::Thresh) => Ok(threshold_fixed(
                input,
                self.spec.param("lambda") as f32,
            )),
            (Model::Stateless, Algorithm::SubMax) => {
                submax(input, self.spec.param("delta") as f32)
            }
            (Model::Stateless, Algorithm::GlobalAuto(method)) => {
                global_auto_mask(input, method, self.spec.param("nbins") as usize)
            }
            (Model::Stateless, Algorithm::LocalAuto(method)) => local_auto_threshold(
                input,
                method,
                self.spec.param("box") as usize,
                self.spec.params.get("k").copied().unwrap_or(0.0),
                self.spec.params.get("C").copied().unwrap_or(0.0),
            ),
            (Model::Stateless, Algorithm::Fd | Algorithm::Mog | Algorithm::Mog2 | Algorithm::Knn) => {
                unreachable!("handled before dispatch")
            }
        }
    }
}
