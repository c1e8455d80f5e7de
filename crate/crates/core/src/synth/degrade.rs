use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::rng_for;
use crate::error::{Error, Result};
use crate::maskcore::{dilate, erode, iou, BinaryMask};

pub const MAX_ATTEMPTS: u64 = 50;
const MAX_STEPS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegradeMode {
    /// Mostly missing foreground; few spurious pixels.
    Improve,
    /// Mostly large spurious segments bleeding into the surroundings.
    Corrupt,
    Marginal,
}

impl DegradeMode {
    fn add_probability(self) -> f64 {
        match self {
            DegradeMode::Improve => 0.2,
            DegradeMode::Corrupt => 0.85,
            DegradeMode::Marginal => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DegradeMode::Improve => "improve",
            DegradeMode::Corrupt => "corrupt",
            DegradeMode::Marginal => "marginal",
        }
    }
}

impl fmt::Display for DegradeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DegradeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "improve" => Ok(DegradeMode::Improve),
            "corrupt" => Ok(DegradeMode::Corrupt),
            "marginal" => Ok(DegradeMode::Marginal),
            other => Err(Error::Config(format!("unknown degrade mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradeConfig {
    pub mode: DegradeMode,
    pub boundary_jitter_radius: u32,
    /// Expected number of extra blobs added or carved before targeting the band.
    pub blob_rate: f64,
    /// `(lo, hi)` bound on the IoU loss the output should show.
    pub target_gap: (f64, f64),
}

impl DegradeConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.target_gap;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::Config(format!("target gap [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1")));
        }
        if !(self.blob_rate >= 0.0 && self.blob_rate.is_finite()) {
            return Err(Error::Config(format!("blob rate must be finite and >= 0, got {}", self.blob_rate)));
        }
        Ok(())
    }
}

/// Degrades `gt` so that `IoU(out, gt) ∈ [1 - hi, 1 - lo]` for `target_gap = (lo, hi)`.
pub fn degrade_mask(gt: &BinaryMask, seed: u64, config: &DegradeConfig) -> Result<BinaryMask> {
    config.validate()?;
    if gt.is_empty() && config.mode != DegradeMode::Marginal {
        return Err(Error::Generation(format!(
            "cannot {} an empty mask",
            config.mode
        )));
    }
    let (lo, hi) = config.target_gap;
    degrade_to_band(gt, seed, config, (1.0 - hi, 1.0 - lo))
}

/// Core sampler: perturbs `reference` until its IoU with `reference` lies in `band`.
pub(crate) fn degrade_to_band(
    reference: &BinaryMask,
    seed: u64,
    config: &DegradeConfig,
    band: (f64, f64),
) -> Result<BinaryMask> {
    let (lo, hi) = band;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::Generation(format!("IoU band [{lo:.4}, {hi:.4}] is empty or out of range")));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_for(seed, attempt);
        if let Some(mask) = Attempt::new(reference, config, band).run(&mut rng) {
            return Ok(mask);
        }
    }
    Err(Error::Generation(format!(
        "IoU band [{lo:.4}, {hi:.4}] not reached in {MAX_ATTEMPTS} attempts ({} mode, {} px reference)",
        config.mode,
        reference.count()
    )))
}

struct Attempt<'a> {
    reference: &'a BinaryMask,
    config: &'a DegradeConfig,
    lo: f64,
    hi: f64,
    max_radius: u32,
}

impl<'a> Attempt<'a> {
    fn new(reference: &'a BinaryMask, config: &'a DegradeConfig, (lo, hi): (f64, f64)) -> Self {
        let (w, h) = reference.dims();
        Self {
            reference,
            config,
            lo,
            hi,
            max_radius: (w.min(h) / 8).max(1),
        }
    }

    fn score(&self, m: &BinaryMask) -> f64 {
        iou(m, self.reference).expect("same frame")
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Option<BinaryMask> {
        // aim at a point inside the band so results spread over it
        let target = if self.hi > self.lo {
            rng.random_range(self.lo..=self.hi)
        } else {
            self.hi
        };
        let mut out = self.reference.clone();
        self.jitter(rng, &mut out);

        if self.config.blob_rate > 0.0 {
            let n = Poisson::new(self.config.blob_rate).expect("rate validated").sample(rng) as usize;
            for _ in 0..n {
                let radius = rng.random_range(1..=self.max_radius);
                self.blob_step(rng, &mut out, radius);
            }
        }

        let mut steps = 0;
        while self.score(&out) > target && steps < MAX_STEPS {
            let radius = rng.random_range(1..=self.max_radius);
            self.blob_step(rng, &mut out, radius);
            steps += 1;
        }
        let s = self.score(&out);
        (self.lo <= s && s <= self.hi).then_some(out)
    }

    /// Random grow/shrink patches along the reference boundary.
    fn jitter(&self, rng: &mut ChaCha8Rng, out: &mut BinaryMask) {
        let r = self.config.boundary_jitter_radius;
        if r == 0 || self.reference.is_empty() {
            return;
        }
        let ring: Vec<usize> = dilate(self.reference, 1)
            .and_not(&erode(self.reference, 1))
            .expect("same frame")
            .ones()
            .collect();
        if ring.is_empty() {
            return;
        }
        let grown = dilate(self.reference, r);
        let shrunk = erode(self.reference, r);
        let w = self.reference.width() as usize;
        let p_add = self.config.mode.add_probability();
        for _ in 0..rng.random_range(2..=6) {
            let c = ring[rng.random_range(0..ring.len())];
            let pr = rng.random_range(r..=3 * r);
            let patch = ellipse(self.reference.dims(), (c % w) as u32, (c / w) as u32, pr, pr);
            let cand = if rng.random_bool(p_add) {
                out.or(&grown.and(&patch).expect("same frame"))
            } else {
                out.and_not(&patch.and_not(&shrunk).expect("same frame"))
            }
            .expect("same frame");
            if self.score(&cand) >= self.lo {
                *out = cand;
            }
        }
    }

    /// Adds or carves one blob, halving its size until the band floor holds.
    fn blob_step(&self, rng: &mut ChaCha8Rng, out: &mut BinaryMask, radius: u32) {
        let (w, h) = out.dims();
        let add = rng.random_bool(self.config.mode.add_probability());
        let pool: Vec<usize> = if add {
            // spurious segments grow off the current mask into its neighborhood
            let near = dilate(out, 2).and_not(out).expect("same frame");
            let near: Vec<usize> = near.ones().collect();
            if near.is_empty() {
                out.not().ones().collect()
            } else {
                near
            }
        } else {
            out.ones().collect()
        };
        if pool.is_empty() {
            return;
        }
        let c = pool[rng.random_range(0..pool.len())];
        let (cx, cy) = ((c % w as usize) as u32, (c / w as usize) as u32);
        let aspect = rng.random_range(0.5..1.5);
        let mut rx = radius;
        loop {
            let ry = ((f64::from(rx) * aspect).round() as u32).max(u32::from(rx > 0));
            let blob = ellipse((w, h), cx, cy, rx, ry);
            let cand = if add { out.or(&blob) } else { out.and_not(&blob) }.expect("same frame");
            if self.score(&cand) >= self.lo {
                *out = cand;
                return;
            }
            if rx == 0 {
                return;
            }
            rx /= 2;
        }
    }
}

/// Filled ellipse centred on a pixel; radius 0 on both axes is the pixel itself.
pub(crate) fn ellipse((w, h): (u32, u32), cx: u32, cy: u32, rx: u32, ry: u32) -> BinaryMask {
    let (rx, ry) = (f64::from(rx) + 0.5, f64::from(ry) + 0.5);
    BinaryMask::from_fn(w, h, |x, y| {
        let dx = (f64::from(x) - f64::from(cx)) / rx;
        let dy = (f64::from(y) - f64::from(cy)) / ry;
        dx * dx + dy * dy <= 1.0
    })
}
