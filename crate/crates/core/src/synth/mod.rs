//! Seeded desk-scale benchmark generation.
//!
//! Every random draw comes from a ChaCha8 stream keyed by [`child_seed`], so
//! a sample's content depends only on the benchmark seed and its index.

mod degrade;
mod overseg;
mod scene;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use degrade::{degrade_mask, DegradeConfig, DegradeMode, MAX_ATTEMPTS};
pub use overseg::{label_components, oversegment};
pub use scene::{generate_scene, generate_scene_with, Scene, SceneConfig, Shape, ShapeKind, CLASS_PALETTE};

use crate::dataio::{
    self, class_mask_path, load_dataset, write_candidate_bank, CandidateBank, DatasetIndex, Split, CANDIDATES_DIR,
    COARSE_DIR, IMAGES_DIR, LABELS_DIR, MANIFEST_FILE, REFINED_DIR,
};
use crate::error::{Error, Result};
use crate::maskcore::iou;

const STREAM_TRAIN: u64 = 1;
const STREAM_VAL: u64 = 2;
const STREAM_PLAN: u64 = 3;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the `index`-th child stream of `seed`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub(crate) fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(seed, index))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub n_samples: usize,
    pub scene: SceneConfig,
    /// Degradation of GT into the coarse mask; `target_gap` is the IoU loss band.
    pub coarse: DegradeConfig,
    /// Refined masks of improved samples; `target_gap` bounds `Δ = IoU_r - IoU_c`.
    pub improve: DegradeConfig,
    /// Refined masks of corrupted samples; `target_gap` bounds `-Δ`.
    pub corrupt: DegradeConfig,
    pub corrupt_fraction: f64,
    /// Number of val images forming the support pool.
    pub support_pool: usize,
    pub granularity: u32,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            n_samples: 200,
            scene: SceneConfig::default(),
            coarse: DegradeConfig {
                mode: DegradeMode::Marginal,
                boundary_jitter_radius: 2,
                blob_rate: 1.0,
                target_gap: (0.25, 0.6),
            },
            improve: DegradeConfig {
                mode: DegradeMode::Improve,
                boundary_jitter_radius: 1,
                blob_rate: 0.5,
                target_gap: (0.01, 0.5),
            },
            corrupt: DegradeConfig {
                mode: DegradeMode::Corrupt,
                boundary_jitter_radius: 2,
                blob_rate: 1.0,
                target_gap: (0.01, 0.5),
            },
            corrupt_fraction: 0.5,
            support_pool: 48,
            granularity: 4,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.corrupt_fraction) {
            return Err(Error::Config(format!(
                "corrupt fraction must lie in [0, 1], got {}",
                self.corrupt_fraction
            )));
        }
        if self.support_pool == 0 {
            return Err(Error::Config("support pool must hold at least one image".into()));
        }
        if self.granularity == 0 {
            return Err(Error::Config("granularity must be >= 1".into()));
        }
        self.scene.validate()?;
        for c in [&self.coarse, &self.improve, &self.corrupt] {
            c.validate()?;
        }
        if self.corrupt.target_gap.0 <= 0.0 {
            return Err(Error::Config("corrupt gap lower bound must be > 0 so refined is strictly worse".into()));
        }
        Ok(())
    }

    /// Number of samples whose refined mask is made worse than the coarse one.
    pub fn corrupted_count(&self) -> usize {
        (self.corrupt_fraction * self.n_samples as f64).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    pub class_id: u8,
    pub iou_coarse_true: f64,
    pub iou_refined_true: f64,
    pub mode: DegradeMode,
}

pub fn read_manifest(root: &Path) -> Result<Vec<ManifestEntry>> {
    let path = root.join(MANIFEST_FILE);
    let bytes = dataio::read_file(&path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_manifest(root: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut s = serde_json::to_string_pretty(entries).expect("manifest serializes");
    s.push('\n');
    dataio::write_file(&root.join(MANIFEST_FILE), s.as_bytes())
}

struct TrainSample {
    id: String,
    scene: Scene,
    coarse: crate::maskcore::BinaryMask,
    refined: crate::maskcore::BinaryMask,
    candidates: Vec<crate::maskcore::BinaryMask>,
    entry: ManifestEntry,
}

fn sample_id(prefix: &str, i: usize, n: usize) -> String {
    let digits = n.to_string().len().max(4);
    format!("{prefix}_{i:0digits$}")
}

fn build_train_sample(seed: u64, i: usize, corrupt: bool, config: &BenchmarkConfig) -> Result<TrainSample> {
    let id = sample_id("train", i, config.n_samples);
    let s = child_seed(child_seed(seed, STREAM_TRAIN), i as u64);
    let class_id = 1 + (i % config.scene.num_classes as usize) as u8;
    let scene = generate_scene_with(child_seed(s, 0), &config.scene, Some(class_id))?;
    let gt = scene.gt.region_of(class_id);

    let (lo, hi) = config.coarse.target_gap;
    let coarse = degrade::degrade_to_band(&gt, child_seed(s, 1), &config.coarse, (1.0 - hi, 1.0 - lo))?;
    let iou_c = iou(&coarse, &gt)?;
    let (cfg, band) = if corrupt {
        let (lo, hi) = config.corrupt.target_gap;
        if iou_c - lo < 0.0 {
            return Err(Error::Generation(format!("{id}: coarse IoU {iou_c:.4} leaves no room to corrupt")));
        }
        (&config.corrupt, ((iou_c - hi).max(0.0), iou_c - lo))
    } else {
        let (lo, hi) = config.improve.target_gap;
        (&config.improve, ((iou_c + lo).min(1.0), (iou_c + hi).min(1.0)))
    };
    let refined = degrade::degrade_to_band(&gt, child_seed(s, 2), cfg, band)?;
    let iou_r = iou(&refined, &gt)?;
    let candidates = oversegment(&scene.gt, child_seed(s, 3), config.granularity)?;
    Ok(TrainSample {
        entry: ManifestEntry {
            image_id: id.clone(),
            class_id,
            iou_coarse_true: iou_c,
            iou_refined_true: iou_r,
            mode: cfg.mode,
        },
        id,
        scene,
        coarse,
        refined,
        candidates,
    })
}

fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Generates a complete benchmark tree under `out` and returns its train index.
pub fn generate_benchmark(seed: u64, config: &BenchmarkConfig, out: &Path) -> Result<DatasetIndex> {
    config.validate()?;
    let n = config.n_samples;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, STREAM_PLAN));
    let mut corrupt = vec![false; n];
    for &i in &order[..config.corrupted_count()] {
        corrupt[i] = true;
    }

    let train = map_indexed(n, |i| {
        build_train_sample(seed, i, corrupt[i], config).map_err(|e| Error::Generation(format!("sample {i}: {e}")))
    })?;
    let val_seed = child_seed(seed, STREAM_VAL);
    let val = map_indexed(config.support_pool, |j| {
        let class_id = 1 + (j % config.scene.num_classes as usize) as u8;
        let scene = generate_scene_with(child_seed(val_seed, j as u64), &config.scene, Some(class_id))?;
        Ok((sample_id("val", j, config.support_pool), scene))
    })?;

    for t in &train {
        write_scene(out, &t.id, &t.scene)?;
        dataio::save_mask(&class_mask_path(&out.join(COARSE_DIR), &t.id, t.entry.class_id), &t.coarse)?;
        dataio::save_mask(&class_mask_path(&out.join(REFINED_DIR), &t.id, t.entry.class_id), &t.refined)?;
        write_candidate_bank(&out.join(CANDIDATES_DIR), &CandidateBank::new(t.id.clone(), t.candidates.clone()))?;
    }
    for (id, scene) in &val {
        write_scene(out, id, scene)?;
    }
    let train_ids: Vec<String> = train.iter().map(|t| t.id.clone()).collect();
    let val_ids: Vec<String> = val.iter().map(|v| v.0.clone()).collect();
    dataio::write_split(out, Split::Train, &train_ids)?;
    dataio::write_split(out, Split::Val, &val_ids)?;
    let manifest: Vec<ManifestEntry> = train.into_iter().map(|t| t.entry).collect();
    write_manifest(out, &manifest)?;
    load_dataset(out, Split::Train)
}

fn write_scene(root: &Path, id: &str, scene: &Scene) -> Result<()> {
    dataio::save_image(&root.join(IMAGES_DIR).join(format!("{id}.png")), &scene.image)?;
    dataio::save_labels(&root.join(LABELS_DIR).join(format!("{id}.png")), &scene.gt)
}
