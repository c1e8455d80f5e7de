//! Few-shot segmentation oracles.
//!
//! A backend segments a query image given support pairs (image plus mask).
//! Built-in backends are pure functions; [`ExternalBackend`] drives a child
//! process over the line-delimited JSON protocol in [`wire`].

mod echo;
mod external;
mod prototype;
pub mod wire;

use std::fmt;
use std::str::FromStr;

pub use echo::{echo_predict, resample_nearest, EchoBackend};
pub use external::ExternalBackend;
pub use prototype::{prototype_predict, PrototypeBackend, PrototypeConfig};

use crate::error::{Error, Result};
use crate::maskcore::BinaryMask;
use crate::raster::RgbImage;

/// One annotated exemplar prompting a backend.
#[derive(Debug, Clone, Copy)]
pub struct SupportPair<'a> {
    pub image: &'a RgbImage,
    pub mask: &'a BinaryMask,
}

impl<'a> SupportPair<'a> {
    pub fn new(image: &'a RgbImage, mask: &'a BinaryMask) -> Result<Self> {
        if image.dims() != mask.dims() {
            return Err(Error::dimension(image.dims(), mask.dims()).with_context("support pair"));
        }
        Ok(Self { image, mask })
    }
}

/// Contract every oracle honors: identical inputs give identical masks.
pub trait FssBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Whether `segment` may be called from several threads at once.
    fn concurrency_safe(&self) -> bool;

    fn segment(&self, query: &RgbImage, support: &[SupportPair<'_>]) -> Result<BinaryMask>;
}

/// Runs a backend and checks its output against the query dimensions.
pub fn predict(
    backend: &dyn FssBackend,
    query: &RgbImage,
    support: &[SupportPair<'_>],
) -> Result<BinaryMask> {
    if support.is_empty() {
        return Err(Error::Config("support set must not be empty".into()));
    }
    let mask = backend.segment(query, support)?;
    if mask.dims() != query.dims() {
        return Err(Error::ContractViolation(format!(
            "backend `{}` returned a {}x{} mask for a {}x{} query",
            backend.name(),
            mask.width(),
            mask.height(),
            query.width(),
            query.height()
        )));
    }
    Ok(mask)
}

/// Parsed `builtin:prototype`, `builtin:echo` or `external:<argv,...>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Prototype,
    Echo,
    External(Vec<String>),
}

impl FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "builtin:prototype" => Ok(BackendSpec::Prototype),
            "builtin:echo" => Ok(BackendSpec::Echo),
            _ => {
                let Some(argv) = s.strip_prefix("external:") else {
                    return Err(Error::Config(format!(
                        "unknown backend `{s}` (expected builtin:prototype, builtin:echo or external:<argv>)"
                    )));
                };
                let argv: Vec<String> = argv.split(',').map(str::to_string).collect();
                if argv.iter().any(String::is_empty) {
                    return Err(Error::Config(format!("empty argument in `{s}`")));
                }
                Ok(BackendSpec::External(argv))
            }
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Prototype => f.write_str("builtin:prototype"),
            BackendSpec::Echo => f.write_str("builtin:echo"),
            BackendSpec::External(argv) => write!(f, "external:{}", argv.join(",")),
        }
    }
}

impl BackendSpec {
    pub fn build(&self, prototype: PrototypeConfig) -> Result<Box<dyn FssBackend>> {
        Ok(match self {
            BackendSpec::Prototype => Box::new(PrototypeBackend::new(prototype)?),
            BackendSpec::Echo => Box::new(EchoBackend),
            BackendSpec::External(argv) => Box::new(ExternalBackend::spawn(argv)?),
        })
    }
}
