//! Mask representations, mask algebra, run-length storage and overlap metrics.

mod label;
mod mask;
mod metrics;
mod morph;
mod rle;

pub use label::{ClassMask, LabelMap, BACKGROUND, DEFAULT_IGNORE};
pub use mask::BinaryMask;
pub use metrics::{iou, mask_algebra, masked_iou, mean_iou, overlap_counts, MaskAlgebra};
pub use morph::{dilate, erode, morph, MorphOp};
pub use rle::Rle;
