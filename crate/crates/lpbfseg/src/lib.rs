//! Streaming foreground/background segmentation for laser powder bed fusion
//! thermal image sequences, plus the surrounding study harness: synthetic
//! sequence generation with exact ground truth, pixel-level accuracy scoring
//! with buffer-zone exclusion, parameter calibration by random search,
//! per-frame latency benchmarking, and lossless sparse storage of the
//! extracted foregrounds.

pub mod bench;
pub mod cli;
pub mod error;
pub mod eval;
pub mod frame;
pub mod gt;
pub mod segment;
pub mod seqfile;
pub mod sim;
pub mod sparse;
pub mod tune;

pub use error::{Error, Result};
pub use frame::{mask_apply, mask_or, Frame, FrameSequence, Mask};
pub use segment::{Algorithm, Segmenter, SegmenterSpec};
