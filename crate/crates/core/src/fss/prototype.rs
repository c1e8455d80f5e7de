//! Nearest-prototype reference oracle.
//!
//! Every pixel maps to the feature `(r, g, b, λ·x/width, λ·y/height)` with
//! colors scaled to `[0, 1]`. The foreground prototype is the mean feature
//! over all support foreground pixels (pooled across shots), the background
//! prototype the mean over support background pixels. A query pixel is
//! foreground iff it is strictly closer (squared Euclidean) to the
//! foreground prototype.

use super::{FssBackend, SupportPair};
use crate::error::{Error, Result};
use crate::maskcore::BinaryMask;
use crate::raster::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrototypeConfig {
    /// Weight λ of the normalized pixel coordinates in the feature vector.
    pub spatial_weight: f64,
}

impl Default for PrototypeConfig {
    fn default() -> Self {
        Self {
            spatial_weight: 0.0,
        }
    }
}

impl PrototypeConfig {
    pub fn new(spatial_weight: f64) -> Result<Self> {
        if !(spatial_weight >= 0.0 && spatial_weight.is_finite()) {
            return Err(Error::Config(format!(
                "spatial weight must be finite and >= 0, got {spatial_weight}"
            )));
        }
        Ok(Self { spatial_weight })
    }
}

/// Integer color sums plus per-shot coordinate contributions.
#[derive(Default)]
struct Accumulator {
    count: u64,
    rgb: [u64; 3],
    // one (Σx/width, Σy/height) entry per shot; summed in sorted order so the
    // mean does not depend on shot order
    positions: Vec<(f64, f64)>,
}

impl Accumulator {
    fn mean(&self, spatial_weight: f64) -> Option<[f64; 5]> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as f64;
        let mut xs: Vec<f64> = self.positions.iter().map(|p| p.0).collect();
        let mut ys: Vec<f64> = self.positions.iter().map(|p| p.1).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        Some([
            self.rgb[0] as f64 / 255.0 / n,
            self.rgb[1] as f64 / 255.0 / n,
            self.rgb[2] as f64 / 255.0 / n,
            spatial_weight * xs.iter().sum::<f64>() / n,
            spatial_weight * ys.iter().sum::<f64>() / n,
        ])
    }
}

pub fn prototype_predict(
    config: &PrototypeConfig,
    query: &RgbImage,
    support: &[SupportPair<'_>],
) -> Result<BinaryMask> {
    let mut fg = Accumulator::default();
    let mut bg = Accumulator::default();
    for (i, pair) in support.iter().enumerate() {
        if pair.image.dims() != pair.mask.dims() {
            return Err(Error::dimension(pair.image.dims(), pair.mask.dims())
                .with_context(format!("support pair {i}")));
        }
        let (w, h) = pair.image.dims();
        let mut shot_fg = (0u64, 0u64);
        let mut shot_bg = (0u64, 0u64);
        for (idx, px) in pair.image.pixels().enumerate() {
            let (x, y) = ((idx % w as usize) as u64, (idx / w as usize) as u64);
            let (acc, pos) = if pair.mask.get_index(idx) {
                (&mut fg, &mut shot_fg)
            } else {
                (&mut bg, &mut shot_bg)
            };
            acc.count += 1;
            for (sum, v) in acc.rgb.iter_mut().zip(px) {
                *sum += u64::from(v);
            }
            pos.0 += x;
            pos.1 += y;
        }
        fg.positions
            .push((shot_fg.0 as f64 / f64::from(w), shot_fg.1 as f64 / f64::from(h)));
        bg.positions
            .push((shot_bg.0 as f64 / f64::from(w), shot_bg.1 as f64 / f64::from(h)));
    }

    let (qw, qh) = query.dims();
    let lambda = config.spatial_weight;
    let Some(p_fg) = fg.mean(lambda) else {
        // an empty prompt activates nothing
        return Ok(BinaryMask::empty(qw, qh));
    };
    let Some(p_bg) = bg.mean(lambda) else {
        return Ok(BinaryMask::full(qw, qh));
    };

    let mut out = BinaryMask::empty(qw, qh);
    for (idx, px) in query.pixels().enumerate() {
        let (x, y) = ((idx % qw as usize) as f64, (idx / qw as usize) as f64);
        let f = [
            f64::from(px[0]) / 255.0,
            f64::from(px[1]) / 255.0,
            f64::from(px[2]) / 255.0,
            lambda * x / f64::from(qw),
            lambda * y / f64::from(qh),
        ];
        let d_fg: f64 = f.iter().zip(&p_fg).map(|(a, b)| (a - b) * (a - b)).sum();
        let d_bg: f64 = f.iter().zip(&p_bg).map(|(a, b)| (a - b) * (a - b)).sum();
        // exact ties stay background
        if d_fg < d_bg {
            out.set_index(idx, true);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PrototypeBackend {
    config: PrototypeConfig,
}

impl PrototypeBackend {
    pub fn new(config: PrototypeConfig) -> Result<Self> {
        PrototypeConfig::new(config.spatial_weight)?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &PrototypeConfig {
        &self.config
    }
}

impl FssBackend for PrototypeBackend {
    fn name(&self) -> &str {
        "builtin:prototype"
    }

    fn concurrency_safe(&self) -> bool {
        true
    }

    fn segment(&self, query: &RgbImage, support: &[SupportPair<'_>]) -> Result<BinaryMask> {
        prototype_predict(&self.config, query, support)
    }
}
