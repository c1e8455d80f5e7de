//! Mask algebra and overlap metrics.
//!
//! IoU of two empty masks is defined as `1.0`: both sides agree the class is
//! absent. Ignore pixels (outside a `valid` mask) count toward neither the
//! intersection nor the union.

use super::BinaryMask;
use crate::error::{Error, Result};

/// Pixelwise AND/OR of two masks together with their popcounts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskAlgebra {
    pub intersection: BinaryMask,
    pub union: BinaryMask,
    pub a_area: u64,
    pub b_area: u64,
    pub intersection_area: u64,
    pub union_area: u64,
}

pub fn mask_algebra(a: &BinaryMask, b: &BinaryMask) -> Result<MaskAlgebra> {
    let intersection = a.and(b)?;
    let union = a.or(b)?;
    Ok(MaskAlgebra {
        a_area: a.count(),
        b_area: b.count(),
        intersection_area: intersection.count(),
        union_area: union.count(),
        intersection,
        union,
    })
}

/// Intersection and union popcounts in one pass over the packed words.
pub fn overlap_counts(a: &BinaryMask, b: &BinaryMask) -> Result<(u64, u64)> {
    a.check_dims(b)?;
    let mut inter = 0u64;
    let mut uni = 0u64;
    for (x, y) in a.words().iter().zip(b.words()) {
        inter += u64::from((x & y).count_ones());
        uni += u64::from((x | y).count_ones());
    }
    Ok((inter, uni))
}

#[inline]
pub(crate) fn ratio(inter: u64, uni: u64) -> f64 {
    if uni == 0 {
        1.0
    } else {
        inter as f64 / uni as f64
    }
}

pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let (inter, uni) = overlap_counts(a, b)?;
    Ok(ratio(inter, uni))
}

/// IoU restricted to pixels where `valid` is set.
pub fn masked_iou(pred: &BinaryMask, gt: &BinaryMask, valid: &BinaryMask) -> Result<f64> {
    pred.check_dims(gt)?;
    pred.check_dims(valid)?;
    if valid.is_empty() {
        return Err(Error::UndefinedRegion);
    }
    let mut inter = 0u64;
    let mut uni = 0u64;
    for ((p, g), v) in pred.words().iter().zip(gt.words()).zip(valid.words()) {
        inter += u64::from((p & g & v).count_ones());
        uni += u64::from(((p | g) & v).count_ones());
    }
    Ok(ratio(inter, uni))
}

pub fn mean_iou(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
