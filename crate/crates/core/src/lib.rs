//! Judging segmentation refinement with a few-shot segmentation oracle.
//!
//! A coarse mask and its refined version each prompt an FSS backend on a
//! held-out image with known ground truth; the prompt that reproduces that
//! ground truth better is kept.

pub mod dataio;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod fss;
pub mod judge;
pub mod maskcore;
pub mod raster;
pub mod refine;
pub mod synth;

pub use error::{Error, Result};
pub use fss::{BackendSpec, EchoBackend, ExternalBackend, FssBackend, PrototypeBackend, PrototypeConfig};
pub use judge::{judge, pick, JudgeCase, JudgeResult, JudgeSupport, Verdict};
pub use maskcore::{iou, BinaryMask, LabelMap};
pub use raster::RgbImage;
