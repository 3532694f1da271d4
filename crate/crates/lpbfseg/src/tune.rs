//! Parameter calibration by random search on a short calibration sequence.
//!
//! Each trial samples one parameter set from the declared ranges (uniformly,
//! or log-uniformly where marked), runs the full sequential segmentation on a
//! fresh state, and scores it with the micro-averaged F1. Trial `i` draws
//! from its own seeded stream, so its sample is independent of the total
//! trial count and the best score can only improve as trials are added.

use crate::error::{Error, Result};
use crate::eval::evaluate_sequence;
use crate::frame::FrameSequence;
use crate::gt::GroundTruth;
use crate::segment::{Segmenter, SegmenterSpec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Inclusive sampling range for one parameter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParamRange {
    pub low: f64,
    pub high: f64,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default)]
    pub integer: bool,
}

impl ParamRange {
    pub fn linear(low: f64, high: f64) -> Self {
        ParamRange {
            low,
            high,
            scale: Scale::Linear,
            integer: false,
        }
    }

    pub fn log(low: f64, high: f64) -> Self {
        ParamRange {
            low,
            high,
            scale: Scale::Log,
            integer: false,
        }
    }

    pub fn integer(mut self) -> Self {
        self.integer = true;
        self
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.low < self.high) {
            return Err(Error::Config(format!(
                "range for '{name}' needs low < high, got [{}, {}]",
                self.low, self.high
            )));
        }
        if self.scale == Scale::Log && self.low <= 0.0 {
            return Err(Error::Config(format!(
                "log range for '{name}' needs low > 0"
            )));
        }
        if self.integer && self.high.floor() < self.low.ceil() {
            return Err(Error::Config(format!(
                "integer range for '{name}' contains no integer"
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let v = match self.scale {
            Scale::Linear => rng.random_range(self.low..=self.high),
            Scale::Log => {
                let (a, b) = (self.low.ln(), self.high.ln());
                rng.random_range(a..=b).exp()
            }
        };
        if self.integer {
            v.round().clamp(self.low.ceil(), self.high.floor())
        } else {
            v
        }
    }
}

/// Per-parameter sampling ranges.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParamSpace {
    pub ranges: BTreeMap<String, ParamRange>,
}

impl ParamSpace {
    pub fn new() -> Self {
        ParamSpace::default()
    }

    pub fn with(mut self, name: &str, range: ParamRange) -> Self {
        self.ranges.insert(name.to_string(), range);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, range) in &self.ranges {
            range.validate(name)?;
        }
        Ok(())
    }

    /// Bundled search space for a spec: ranges bracket both the default and
    /// the calibrated presets of each parameter.
    pub fn default_for(spec: &SegmenterSpec) -> Self {
        use crate::segment::Algorithm::*;
        let mut space = ParamSpace::new();
        match spec.algorithm {
            Thresh => {
                if spec.fd_prefix {
                    space = space.with("lambda", ParamRange::log(1.0, 50.0));
                } else {
                    space = space.with("lambda", ParamRange::linear(250.0, 500.0));
                }
            }
            SubMax => space = space.with("delta", ParamRange::linear(1.0, 200.0)),
            Fd | GlobalAuto(_) => {}
            LocalAuto(method) => {
                space = space.with("box", ParamRange::log(3.0, 501.0).integer());
                match method {
                    crate::segment::LocalMethod::Sauvola => {
                        space = space.with("k", ParamRange::linear(0.01, 1.0));
                    }
                    _ => {
                        space = space.with("C", ParamRange::linear(0.0, 100.0));
                    }
                }
            }
            Mog => {
                space = space
                    .with("backRatio", ParamRange::linear(0.1, 0.95))
                    .with("history", ParamRange::log(2.0, 300.0).integer())
                    .with("nmixtures", ParamRange::log(1.0, 350.0).integer());
            }
            Mog2 => {
                space = space
                    .with("history", ParamRange::log(2.0, 300.0).integer())
                    .with("thresh", ParamRange::log(0.5, 100.0));
            }
            Knn => {
                space = space
                    .with("history", ParamRange::log(2.0, 300.0).integer())
                    .with("thresh", ParamRange::log(1.0, 1000.0));
            }
        }
        space
    }
}

/// One evaluated parameter set.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Trial {
    pub params: BTreeMap<String, f64>,
    pub f1: f64,
}

/// Outcome of a random search.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TuneResult {
    pub spec_name: String,
    pub seed: u64,
    pub best_params: BTreeMap<String, f64>,
    pub best_f1: f64,
    pub trials: Vec<Trial>,
}

impl TuneResult {
    /// Applies the winning parameters onto a spec.
    pub fn apply_to(&self, spec: &SegmenterSpec) -> SegmenterSpec {
        let mut spec = spec.clone();
        spec.set_params(&self.best_params);
        spec.sanitize();
        spec
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serializing tune result: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TuneResult> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Corrupt(format!("tune result: {e}")))
    }
}

/// Samples `trials` parameter sets, scores each by running the spec over the
/// calibration sequence, and returns the argmax (ties go to the earliest
/// trial). Sampling draws parameters in name order from a per-trial stream
/// derived from `seed`.
pub fn random_search(
    spec: &SegmenterSpec,
    space: &ParamSpace,
    calib: &FrameSequence,
    gt: &[GroundTruth],
    trials: usize,
    seed: u64,
) -> Result<TuneResult> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if calib.len() != gt.len() {
        return Err(Error::Input(format!(
            "calibration sequence has {} frames but {} labelings",
            calib.len(),
            gt.len()
        )));
    }
    space.validate()?;

    let mut results: Vec<Trial> = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut params = BTreeMap::new();
        for (name, range) in &space.ranges {
            params.insert(name.clone(), range.sample(&mut rng));
        }
        let mut candidate = spec.clone();
        candidate.set_params(&params);
        candidate.sanitize();
        let mut segmenter = Segmenter::with_seed(candidate, seed)?;
        let eval = evaluate_sequence(&mut segmenter, calib.frames(), gt)?;
        results.push(Trial {
            params,
            f1: eval.micro.f1,
        });
    }

    let best = results
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            // Strictly-greater comparison with index tie-break keeps the
            // first maximum.
            a.f1.partial_cmp(&b.f1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ib.cmp(ia))
        })
        .map(|(_, t)| t.clone())
        .expect("at least one trial");

    Ok(TuneResult {
        spec_name: spec.name(),
        seed,
        best_params: best.params,
        best_f1: best.f1,
        trials: results,
    })
}
