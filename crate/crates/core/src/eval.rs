//! Experiment harness: true IoUs, exclusion, support pairing, judging,
//! group selection and report assembly.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::dataio::{load_class_masks, load_dataset, DatasetIndex, Split, COARSE_DIR, REFINED_DIR};
use crate::error::{Error, Result};
use crate::fss::FssBackend;
use crate::judge::{judge, JudgeCase, JudgeResult, JudgeSupport, Verdict};
use crate::maskcore::{masked_iou, mean_iou, BinaryMask, LabelMap};
use crate::raster::RgbImage;
use crate::synth::{child_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub image_id: String,
    pub class_id: u8,
    pub iou_coarse_true: f64,
    pub iou_refined_true: f64,
    pub judge: JudgeResult,
    pub picked_iou_true: f64,
    pub success: bool,
}

impl SampleRecord {
    pub fn new(image_id: impl Into<String>, class_id: u8, iou_coarse: f64, iou_refined: f64, judge: JudgeResult) -> Self {
        let picked_iou_true = match judge.verdict {
            Verdict::RefinedBetter => iou_refined,
            Verdict::CoarseBetter | Verdict::Tie => iou_coarse,
        };
        let success = success(judge.verdict, improvement(iou_coarse, iou_refined));
        Self {
            image_id: image_id.into(),
            class_id,
            iou_coarse_true: iou_coarse,
            iou_refined_true: iou_refined,
            judge,
            picked_iou_true,
            success,
        }
    }

    pub fn improvement(&self) -> f64 {
        improvement(self.iou_coarse_true, self.iou_refined_true)
    }

    fn key(&self) -> (&str, u8) {
        (&self.image_id, self.class_id)
    }
}

/// Signed gain of the refined mask over the coarse one.
pub fn improvement(iou_coarse: f64, iou_refined: f64) -> f64 {
    iou_refined - iou_coarse
}

/// A verdict is correct when it keeps refined exactly when refinement helped.
pub fn success(verdict: Verdict, delta: f64) -> bool {
    match verdict {
        Verdict::RefinedBetter => delta > 0.0,
        Verdict::CoarseBetter | Verdict::Tie => delta <= 0.0,
    }
}

/// Samples where both masks miss the object entirely carry no signal.
pub fn is_excluded(iou_coarse: f64, iou_refined: f64) -> bool {
    iou_coarse == 0.0 && iou_refined == 0.0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    RandomStratified { per_class: usize, classes: usize },
    TopK(usize),
    BottomK(usize),
    TopBottom(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub name: String,
    pub kind: GroupKind,
}

impl GroupSpec {
    pub fn new(kind: GroupKind) -> Result<Self> {
        let name = match kind {
            GroupKind::RandomStratified { per_class, classes } => {
                if per_class == 0 || classes == 0 {
                    return Err(Error::Group("random group needs per_class >= 1 and classes >= 1".into()));
                }
                format!("random{}", per_class * classes)
            }
            GroupKind::TopK(k) | GroupKind::BottomK(k) | GroupKind::TopBottom(k) if k == 0 => {
                return Err(Error::Group("group size k must be >= 1".into()))
            }
            GroupKind::TopK(k) => format!("top{k}"),
            GroupKind::BottomK(k) => format!("bottom{k}"),
            GroupKind::TopBottom(k) => format!("topbottom{k}"),
        };
        Ok(Self { name, kind })
    }

    /// Parses a comma-separated list such as `top:20,bottom:20,random:20x4`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Group(format!("cannot parse group `{s}` (expected top:K, bottom:K, topbottom:K or random:PERxCLASSES)"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let kind = match kind {
            "top" => GroupKind::TopK(num(arg)?),
            "bottom" => GroupKind::BottomK(num(arg)?),
            "topbottom" => GroupKind::TopBottom(num(arg)?),
            "random" => {
                let (per, classes) = arg.split_once('x').ok_or_else(bad)?;
                GroupKind::RandomStratified {
                    per_class: num(per)?,
                    classes: num(classes)?,
                }
            }
            _ => return Err(bad()),
        };
        GroupSpec::new(kind)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn by_key(a: &SampleRecord, b: &SampleRecord) -> Ordering {
    a.key().cmp(&b.key())
}

/// Picks the subset a group reports on, returned in `(image_id, class_id)` order.
pub fn select_group<'r>(records: &'r [SampleRecord], spec: &GroupSpec, seed: u64) -> Result<Vec<&'r SampleRecord>> {
    let ranked = |descending: bool, k: usize| -> Result<Vec<&'r SampleRecord>> {
        if k > records.len() {
            return Err(Error::Group(format!(
                "group {} needs {k} samples, only {} available",
                spec.name,
                records.len()
            )));
        }
        let mut v: Vec<&SampleRecord> = records.iter().collect();
        v.sort_by(|a, b| {
            let ord = a.improvement().total_cmp(&b.improvement());
            let ord = if descending { ord.reverse() } else { ord };
            ord.then_with(|| by_key(a, b))
        });
        v.truncate(k);
        Ok(v)
    };
    let mut out = match spec.kind {
        GroupKind::TopK(k) => ranked(true, k)?,
        GroupKind::BottomK(k) => ranked(false, k)?,
        GroupKind::TopBottom(k) => {
            let mut v = ranked(true, k)?;
            for r in ranked(false, k)? {
                if !v.iter().any(|x| std::ptr::eq(*x, r)) {
                    v.push(r);
                }
            }
            v
        }
        GroupKind::RandomStratified { per_class, classes } => {
            let mut by_class: BTreeMap<u8, Vec<&SampleRecord>> = BTreeMap::new();
            for r in records {
                by_class.entry(r.class_id).or_default().push(r);
            }
            if by_class.len() != classes {
                return Err(Error::Group(format!(
                    "group {} expects {classes} classes, samples cover {}",
                    spec.name,
                    by_class.len()
                )));
            }
            let mut v = Vec::with_capacity(per_class * classes);
            for (class_id, mut pool) in by_class {
                if pool.len() < per_class {
                    return Err(Error::Group(format!(
                        "group {}: class {class_id} has {} samples, {per_class} requested",
                        spec.name,
                        pool.len()
                    )));
                }
                pool.sort_by(|a, b| by_key(a, b));
                let mut rng = rng_for(seed, u64::from(class_id));
                v.extend(index::sample(&mut rng, pool.len(), per_class).into_iter().map(|i| pool[i]));
            }
            v
        }
    };
    out.sort_by(|a, b| by_key(a, b));
    Ok(out)
}

/// Column means over one group.
pub fn summarize(name: &str, records: &[&SampleRecord]) -> Result<ReportRow> {
    if records.is_empty() {
        return Err(Error::Group(format!("group {name} is empty after exclusion")));
    }
    let col = |f: fn(&SampleRecord) -> f64| -> Result<f64> {
        mean_iou(&records.iter().map(|r| f(r)).collect::<Vec<_>>())
    };
    Ok(ReportRow {
        group: name.to_string(),
        n: records.len(),
        miou_coarse: col(|r| r.iou_coarse_true)?,
        miou_refined: col(|r| r.iou_refined_true)?,
        miou_jfs: col(|r| r.picked_iou_true)?,
        success_rate: col(|r| if r.success { 1.0 } else { 0.0 })?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub group: String,
    pub n: usize,
    pub miou_coarse: f64,
    pub miou_refined: f64,
    pub miou_jfs: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

/// A held-out image usable as judge support.
#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub image_id: String,
    pub image: RgbImage,
    pub labels: LabelMap,
}

#[derive(Debug, Clone, Default)]
pub struct SupportPool {
    pub entries: Vec<PoolEntry>,
}

impl SupportPool {
    pub fn load(index: &DatasetIndex) -> Result<Self> {
        let entries = index
            .entries
            .iter()
            .map(|e| {
                Ok(PoolEntry {
                    image_id: e.image_id.clone(),
                    image: index.load_image(e)?,
                    labels: index.load_labels(e)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Pairing seed of one sample: stable across runs, platforms and sample order.
pub fn pairing_seed(seed: u64, image_id: &str, class_id: u8) -> u64 {
    child_seed(seed, fnv1a(image_id.bytes().chain([0, class_id])))
}

/// Seeded draw of `shots` distinct pool images containing `class_id`, never
/// the query image itself. Returns pool indices.
pub fn pair_support(image_id: &str, class_id: u8, pool: &SupportPool, shots: usize, seed: u64) -> Result<Vec<usize>> {
    if shots == 0 {
        return Err(Error::Config("shots must be >= 1".into()));
    }
    let eligible: Vec<usize> = pool
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.image_id != image_id && e.labels.count_class(class_id) > 0)
        .map(|(i, _)| i)
        .collect();
    if eligible.len() < shots {
        return Err(Error::SupportPool(format!(
            "{image_id} class {class_id}: {} eligible support images, {shots} needed",
            eligible.len()
        )));
    }
    let mut rng = rng_for(pairing_seed(seed, image_id, class_id), 0);
    Ok(index::sample(&mut rng, eligible.len(), shots)
        .into_iter()
        .map(|i| eligible[i])
        .collect())
}

/// Who decides between coarse and refined.
#[derive(Clone, Copy)]
pub enum Arbiter<'a> {
    Fss(&'a dyn FssBackend),
    /// Verdict from the true IoUs; an upper bound for any judge.
    TrueIou,
}

impl Arbiter<'_> {
    fn concurrency_safe(&self) -> bool {
        match self {
            Arbiter::Fss(b) => b.concurrency_safe(),
            Arbiter::TrueIou => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalConfig {
    pub groups: Vec<GroupSpec>,
    pub shots: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            groups: Vec::new(),
            shots: 1,
            seed: 0,
            jobs: 1,
        }
    }
}

/// One (image, class) pair with both candidate masks and its true IoUs.
#[derive(Debug, Clone)]
pub struct EvalSample {
    pub image_id: String,
    pub class_id: u8,
    pub image: RgbImage,
    pub coarse: BinaryMask,
    pub refined: BinaryMask,
    pub iou_coarse_true: f64,
    pub iou_refined_true: f64,
}

/// Every (image, class) with both a coarse and a refined mask, in
/// `(image_id, class_id)` order, with exclusion not yet applied.
pub fn load_samples(train: &DatasetIndex) -> Result<Vec<EvalSample>> {
    let mut out = Vec::new();
    for entry in &train.entries {
        let coarse = load_class_masks(&train.root.join(COARSE_DIR), &entry.image_id)?;
        let mut refined = load_class_masks(&train.root.join(REFINED_DIR), &entry.image_id)?;
        if coarse.is_empty() && refined.is_empty() {
            continue;
        }
        let image = train.load_image(entry)?;
        let labels = train.load_labels(entry)?;
        let classes: BTreeSet<u8> = coarse.keys().chain(refined.keys()).copied().collect();
        let mut coarse = coarse;
        for class_id in classes {
            let (Some(c), Some(r)) = (coarse.remove(&class_id), refined.remove(&class_id)) else {
                return Err(Error::MissingEntry(format!(
                    "{} class {class_id}: coarse and refined masks must both exist",
                    entry.image_id
                )));
            };
            let wrap = |e: Error| Error::Sample {
                image_id: entry.image_id.clone(),
                class_id,
                source: Box::new(e),
            };
            let gt = labels.extract_class(class_id).map_err(wrap)?;
            let iou_c = masked_iou(&c, &gt.mask, &gt.valid).map_err(wrap)?;
            let iou_r = masked_iou(&r, &gt.mask, &gt.valid).map_err(wrap)?;
            out.push(EvalSample {
                image_id: entry.image_id.clone(),
                class_id,
                image: image.clone(),
                coarse: c,
                refined: r,
                iou_coarse_true: iou_c,
                iou_refined_true: iou_r,
            });
        }
    }
    out.sort_by(|a, b| (&a.image_id, a.class_id).cmp(&(&b.image_id, b.class_id)));
    Ok(out)
}

fn judge_sample(s: &EvalSample, pool: &SupportPool, arbiter: Arbiter<'_>, config: &EvalConfig) -> Result<SampleRecord> {
    let result = match arbiter {
        Arbiter::TrueIou => JudgeResult::from_per_support(vec![(s.iou_coarse_true, s.iou_refined_true)]),
        Arbiter::Fss(backend) => {
            let picks = pair_support(&s.image_id, s.class_id, pool, config.shots, config.seed)?;
            let masks: Vec<BinaryMask> = picks.iter().map(|&i| pool.entries[i].labels.region_of(s.class_id)).collect();
            let supports = picks
                .iter()
                .zip(&masks)
                .map(|(&i, m)| JudgeSupport {
                    image: &pool.entries[i].image,
                    mask: m,
                })
                .collect();
            let case = JudgeCase {
                query_image: &s.image,
                coarse: &s.coarse,
                refined: &s.refined,
                supports,
                class_id: s.class_id,
            };
            judge(backend, &case)?
        }
    };
    Ok(SampleRecord::new(
        s.image_id.clone(),
        s.class_id,
        s.iou_coarse_true,
        s.iou_refined_true,
        result,
    ))
}

/// Judges every included sample. Output is sorted by `(image_id, class_id)`.
pub fn judge_samples(
    samples: &[EvalSample],
    pool: &SupportPool,
    arbiter: Arbiter<'_>,
    config: &EvalConfig,
) -> Result<Vec<SampleRecord>> {
    let included: Vec<&EvalSample> = samples
        .iter()
        .filter(|s| !is_excluded(s.iou_coarse_true, s.iou_refined_true))
        .collect();
    info!(
        "judging {} samples ({} excluded)",
        included.len(),
        samples.len() - included.len()
    );
    let run = |s: &&EvalSample| {
        judge_sample(s, pool, arbiter, config).map_err(|e| Error::Sample {
            image_id: s.image_id.clone(),
            class_id: s.class_id,
            source: Box::new(e),
        })
    };
    let mut jobs = config.jobs.max(1);
    if jobs > 1 && !arbiter.concurrency_safe() {
        warn!("backend is not safe for concurrent use; running with 1 job");
        jobs = 1;
    }
    let records: Result<Vec<SampleRecord>> = if jobs > 1 {
        par_map(&included, jobs, run)
    } else {
        included.iter().map(run).collect()
    };
    let mut records = records?;
    records.sort_by(by_key);
    Ok(records)
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, U: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, U: Send>(items: &[T], _jobs: usize, f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    items.iter().map(f).collect()
}

/// Builds one report row per group, in the order given.
pub fn build_report(records: &[SampleRecord], groups: &[GroupSpec], seed: u64) -> Result<EvalReport> {
    let rows = groups
        .iter()
        .map(|g| summarize(&g.name, &select_group(records, g, seed)?))
        .collect::<Result<_>>()?;
    Ok(EvalReport { rows })
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub records: Vec<SampleRecord>,
    pub report: EvalReport,
}

/// Full harness over a dataset root: train split queries, val split supports.
pub fn evaluate(root: &Path, arbiter: Arbiter<'_>, config: &EvalConfig) -> Result<Evaluation> {
    let train = load_dataset(root, Split::Train)?;
    let val = load_dataset(root, Split::Val)?;
    let pool = SupportPool::load(&val)?;
    let samples = load_samples(&train)?;
    let records = judge_samples(&samples, &pool, arbiter, config)?;
    let report = build_report(&records, &config.groups, config.seed)?;
    Ok(Evaluation { records, report })
}
