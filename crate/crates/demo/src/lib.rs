//! Browser playground: one synthetic scene, three knobs.
//!
//! * `degrade` redraws the coarse mask at a requested IoU gap,
//! * `refine` merges candidate segments with a minimum-overlap threshold,
//! * `judge` scores coarse and refined masks through the prototype backend and
//!   keeps the predicted support masks for display.
//!
//! Everything is plain data in and out so the JS side stays a few lines.

use std::collections::BTreeMap;

use wasm_bindgen::prelude::*;

use jfs_core::dataio::CandidateBank;
use jfs_core::fss::{predict, SupportPair};
use jfs_core::refine::{refine, RefineConfig};
use jfs_core::synth::{
    child_seed, degrade_mask, generate_scene_with, oversegment, DegradeConfig, DegradeMode, Scene, SceneConfig,
};
use jfs_core::{iou, judge, Error, Result, BinaryMask, JudgeCase, JudgeSupport, PrototypeBackend, PrototypeConfig, RgbImage};

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Which mask an overlay shows.
#[wasm_bindgen]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Truth = 0,
    Coarse = 1,
    Refined = 2,
    SupportTruth = 3,
    PredFromCoarse = 4,
    PredFromRefined = 5,
}

#[wasm_bindgen]
pub struct Demo {
    query: Scene,
    support: Scene,
    class_id: u8,
    gt: BinaryMask,
    support_gt: BinaryMask,
    bank: CandidateBank,
    coarse: BinaryMask,
    refined: BinaryMask,
    pred_coarse: Option<BinaryMask>,
    pred_refined: Option<BinaryMask>,
}

#[wasm_bindgen]
impl Demo {
    /// Builds a query and a support scene sharing `class_id` (1..=4).
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, class_id: u8) -> Result<Demo, JsError> {
        Self::try_new(seed, class_id).map_err(js_err)
    }

    pub fn width(&self) -> u32 {
        self.gt.width()
    }

    pub fn height(&self) -> u32 {
        self.gt.height()
    }

    /// Redraws the coarse mask so its IoU with the truth lands in `[1 - hi, 1 - lo]`.
    /// Returns that IoU.
    pub fn degrade(&mut self, seed: u64, lo: f64, hi: f64) -> Result<f64, JsError> {
        self.try_degrade(seed, lo, hi).map_err(js_err)
    }

    /// Refines the coarse mask with candidates covered at least `tau` by it.
    /// Returns the refined IoU with the truth.
    pub fn refine(&mut self, tau: f64) -> Result<f64, JsError> {
        self.try_refine(tau).map_err(js_err)
    }

    /// Judges coarse against refined with spatial weight `lambda`.
    /// Returns `{"e_coarse":..,"e_refined":..,"verdict":..}` as JSON text.
    pub fn judge(&mut self, lambda: f64) -> Result<String, JsError> {
        self.try_judge(lambda).map_err(js_err)
    }

    pub fn iou_coarse(&self) -> f64 {
        iou(&self.coarse, &self.gt).unwrap_or(0.0)
    }

    pub fn iou_refined(&self) -> f64 {
        iou(&self.refined, &self.gt).unwrap_or(0.0)
    }

    pub fn query_rgba(&self) -> Vec<u8> {
        rgba(&self.query.image)
    }

    pub fn support_rgba(&self) -> Vec<u8> {
        rgba(&self.support.image)
    }

    /// Translucent overlay for `layer`; empty when a prediction is not computed yet.
    pub fn overlay_rgba(&self, layer: Layer) -> Vec<u8> {
        let (mask, color) = match layer {
            Layer::Truth => (Some(&self.gt), [40, 220, 90]),
            Layer::Coarse => (Some(&self.coarse), [240, 170, 30]),
            Layer::Refined => (Some(&self.refined), [60, 140, 255]),
            Layer::SupportTruth => (Some(&self.support_gt), [40, 220, 90]),
            Layer::PredFromCoarse => (self.pred_coarse.as_ref(), [240, 170, 30]),
            Layer::PredFromRefined => (self.pred_refined.as_ref(), [60, 140, 255]),
        };
        mask.map(|m| overlay(m, color)).unwrap_or_default()
    }
}

// JsError only exists inside a wasm host, so the logic lives here and stays
// testable natively.
impl Demo {
    pub fn try_new(seed: u64, class_id: u8) -> Result<Demo> {
        let cfg = SceneConfig::default();
        if class_id == 0 || class_id > cfg.num_classes {
            return Err(Error::Config(format!("class must lie in 1..={}", cfg.num_classes)));
        }
        let query = generate_scene_with(child_seed(seed, 0), &cfg, Some(class_id))?;
        let support = generate_scene_with(child_seed(seed, 1), &cfg, Some(class_id))?;
        let gt = query.gt.region_of(class_id);
        let support_gt = support.gt.region_of(class_id);
        let bank = CandidateBank::new("query", oversegment(&query.gt, child_seed(seed, 2), 4)?);
        let mut demo = Demo {
            coarse: gt.clone(),
            refined: gt.clone(),
            query,
            support,
            class_id,
            gt,
            support_gt,
            bank,
            pred_coarse: None,
            pred_refined: None,
        };
        demo.try_degrade(seed, 0.2, 0.4)?;
        Ok(demo)
    }

    pub fn try_degrade(&mut self, seed: u64, lo: f64, hi: f64) -> Result<f64> {
        let cfg = DegradeConfig {
            mode: DegradeMode::Marginal,
            boundary_jitter_radius: 2,
            blob_rate: 1.0,
            target_gap: (lo, hi),
        };
        self.coarse = degrade_mask(&self.gt, child_seed(seed, 3), &cfg)?;
        self.refined = self.coarse.clone();
        self.clear_predictions();
        Ok(self.iou_coarse())
    }

    pub fn try_refine(&mut self, tau: f64) -> Result<f64> {
        let config = RefineConfig::new(tau)?;
        let coarse = BTreeMap::from([(self.class_id, self.coarse.clone())]);
        let mut out = refine(&coarse, &self.bank, &config)?;
        self.refined = out.remove(&self.class_id).unwrap_or_else(|| self.coarse.clone());
        self.clear_predictions();
        Ok(self.iou_refined())
    }

    pub fn try_judge(&mut self, lambda: f64) -> Result<String> {
        let backend = PrototypeBackend::new(PrototypeConfig::new(lambda)?)?;
        let case = JudgeCase {
            query_image: &self.query.image,
            coarse: &self.coarse,
            refined: &self.refined,
            supports: vec![JudgeSupport {
                image: &self.support.image,
                mask: &self.support_gt,
            }],
            class_id: self.class_id,
        };
        let result = judge(&backend, &case)?;
        let smp = |prompt: &BinaryMask| -> Result<BinaryMask> {
            predict(&backend, &self.support.image, &[SupportPair::new(&self.query.image, prompt)?])
        };
        self.pred_coarse = Some(smp(&self.coarse)?);
        self.pred_refined = Some(smp(&self.refined)?);
        Ok(format!(
            r#"{{"e_coarse":{},"e_refined":{},"verdict":"{}"}}"#,
            result.e_coarse,
            result.e_refined,
            result.verdict.as_str()
        ))
    }

    fn clear_predictions(&mut self) {
        self.pred_coarse = None;
        self.pred_refined = None;
    }
}

fn rgba(img: &RgbImage) -> Vec<u8> {
    img.pixels().flat_map(|[r, g, b]| [r, g, b, 255]).collect()
}

fn overlay(mask: &BinaryMask, [r, g, b]: [u8; 3]) -> Vec<u8> {
    (0..mask.len())
        .flat_map(|i| if mask.get_index(i) { [r, g, b, 150] } else { [0; 4] })
        .collect()
}
