use super::{FssBackend, SupportPair};
use crate::error::Result;
use crate::maskcore::BinaryMask;
use crate::raster::RgbImage;

/// Nearest-neighbor resampling with `src = floor(dst * src_dim / dst_dim)` per axis.
pub fn resample_nearest(mask: &BinaryMask, width: u32, height: u32) -> BinaryMask {
    if mask.dims() == (width, height) {
        return mask.clone();
    }
    let (sw, sh) = (u64::from(mask.width()), u64::from(mask.height()));
    let xs: Vec<u32> = (0..u64::from(width))
        .map(|x| (x * sw / u64::from(width)) as u32)
        .collect();
    BinaryMask::from_fn(width, height, |x, y| {
        let sy = (u64::from(y) * sh / u64::from(height)) as u32;
        mask.get(xs[x as usize], sy)
    })
}

/// Returns the first support mask resampled to the query's dimensions.
pub fn echo_predict(query: &RgbImage, support: &[SupportPair<'_>]) -> BinaryMask {
    let first = support.first().expect("echo needs at least one support pair");
    resample_nearest(first.mask, query.width(), query.height())
}

/// Degenerate oracle that ignores image content.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoBackend;

impl FssBackend for EchoBackend {
    fn name(&self) -> &str {
        "builtin:echo"
    }

    fn concurrency_safe(&self) -> bool {
        true
    }

    fn segment(&self, query: &RgbImage, support: &[SupportPair<'_>]) -> Result<BinaryMask> {
        Ok(echo_predict(query, support))
    }
}
