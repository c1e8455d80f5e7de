//! Dataset layout, candidate banks and report output.
//!
//! A dataset root looks like this:
//!
//! ```text
//! root/
//!   images/<id>.png          query/support images (8-bit RGB, gray or paletted)
//!   labels/<id>.png          ground truth, palette index = class id, 255 = ignore
//!   splits/train.txt         LF-separated image ids
//!   splits/val.txt
//!   candidates/<id>_<k>.png  class-agnostic candidate segments (gray 0/255)
//!   coarse/<id>_c<class>.png coarse masks per class
//!   refined/<id>_c<class>.png refined masks per class
//!   manifest.json            written by the synthetic generator
//! ```

mod codec;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use codec::{
    decode_mask_png, decode_palette_png, decode_rgb_png, encode_label_png, encode_mask_png,
    encode_rgb_png, pascal_palette,
};
pub use report::{read_report, write_details, write_report, ReportFormat};

use crate::error::{Error, Result};
use crate::maskcore::{BinaryMask, LabelMap};
use crate::raster::RgbImage;

pub const IMAGES_DIR: &str = "images";
pub const LABELS_DIR: &str = "labels";
pub const SPLITS_DIR: &str = "splits";
pub const CANDIDATES_DIR: &str = "candidates";
pub const COARSE_DIR: &str = "coarse";
pub const REFINED_DIR: &str = "refined";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            other => Err(Error::Config(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub image_id: String,
    /// Relative to the dataset root.
    pub image_path: PathBuf,
    /// Relative to the dataset root.
    pub labelmap_path: PathBuf,
    /// Foreground classes decoded from the label map.
    pub classes: BTreeSet<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetIndex {
    pub root: PathBuf,
    pub split: Split,
    pub entries: Vec<DatasetEntry>,
}

impl DatasetIndex {
    pub fn entry(&self, image_id: &str) -> Option<&DatasetEntry> {
        self.entries.iter().find(|e| e.image_id == image_id)
    }

    pub fn load_image(&self, entry: &DatasetEntry) -> Result<RgbImage> {
        let path = self.root.join(&entry.image_path);
        decode_rgb_png(&read_file(&path)?).map_err(|e| with_file(e, &path))
    }

    pub fn load_labels(&self, entry: &DatasetEntry) -> Result<LabelMap> {
        let path = self.root.join(&entry.labelmap_path);
        decode_palette_png(&read_file(&path)?).map_err(|e| with_file(e, &path))
    }

    /// All class ids present in at least one entry.
    pub fn classes(&self) -> BTreeSet<u8> {
        self.entries.iter().flat_map(|e| e.classes.iter().copied()).collect()
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn with_file(err: Error, path: &Path) -> Error {
    match err {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        Error::Dimension { .. } => err.with_context(path.display().to_string()),
        other => other,
    }
}

pub fn load_dataset(root: &Path, split: Split) -> Result<DatasetIndex> {
    let split_path = root.join(SPLITS_DIR).join(format!("{split}.txt"));
    let text = fs::read_to_string(&split_path).map_err(|e| Error::io(&split_path, e))?;

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for line in text.lines() {
        let id = line.trim();
        if id.is_empty() {
            continue;
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateEntry(format!(
                "`{id}` listed twice in {}",
                split_path.display()
            )));
        }
        let image_path = Path::new(IMAGES_DIR).join(format!("{id}.png"));
        let labelmap_path = Path::new(LABELS_DIR).join(format!("{id}.png"));
        for p in [&image_path, &labelmap_path] {
            if !root.join(p).is_file() {
                return Err(Error::MissingEntry(format!(
                    "`{id}` listed in {} but {} is absent",
                    split_path.display(),
                    p.display()
                )));
            }
        }
        let labels_file = root.join(&labelmap_path);
        let labels =
            decode_palette_png(&read_file(&labels_file)?).map_err(|e| with_file(e, &labels_file))?;
        entries.push(DatasetEntry {
            image_id: id.to_string(),
            image_path,
            labelmap_path,
            classes: labels.present_classes(),
        });
    }
    Ok(DatasetIndex {
        root: root.to_path_buf(),
        split,
        entries,
    })
}

/// Class-agnostic segments for one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateBank {
    pub image_id: String,
    pub candidates: Vec<BinaryMask>,
}

impl CandidateBank {
    pub fn new(image_id: impl Into<String>, candidates: Vec<BinaryMask>) -> Self {
        Self {
            image_id: image_id.into(),
            candidates,
        }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Files named `<image_id><sep><digits>.png` in `dir`, keyed by the number.
fn numbered_files(dir: &Path, image_id: &str, sep: &str) -> Result<BTreeMap<u32, PathBuf>> {
    let mut out = BTreeMap::new();
    let read = match fs::read_dir(dir) {
        Ok(r) => r,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(Error::io(dir, e)),
    };
    let prefix = format!("{image_id}{sep}");
    for item in read {
        let item = item.map_err(|e| Error::io(dir, e))?;
        let name = item.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(rest) = name.strip_prefix(&prefix).and_then(|r| r.strip_suffix(".png")) else {
            continue;
        };
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let Ok(k) = rest.parse::<u32>() else { continue };
        out.insert(k, item.path());
    }
    Ok(out)
}

/// Loads `<dir>/<image_id>_<k>.png` for k = 0..L in ascending order.
///
/// A missing directory or no matching files yields an empty bank. When
/// `dims` is given every candidate must match it.
pub fn load_candidate_bank(
    dir: &Path,
    image_id: &str,
    dims: Option<(u32, u32)>,
) -> Result<CandidateBank> {
    let files = numbered_files(dir, image_id, "_")?;
    let mut candidates = Vec::with_capacity(files.len());
    let mut expected = dims;
    for (i, (k, path)) in files.iter().enumerate() {
        if *k as usize != i {
            return Err(Error::MissingEntry(format!(
                "candidate {image_id}_{i}.png missing in {} (next is {image_id}_{k}.png)",
                dir.display()
            )));
        }
        let mask = decode_mask_png(&read_file(path)?).map_err(|e| with_file(e, path))?;
        match expected {
            Some(d) if d != mask.dims() => {
                return Err(Error::dimension(mask.dims(), d).with_context(path.display().to_string()))
            }
            _ => expected = Some(mask.dims()),
        }
        candidates.push(mask);
    }
    Ok(CandidateBank::new(image_id, candidates))
}

pub fn write_candidate_bank(dir: &Path, bank: &CandidateBank) -> Result<()> {
    for (k, m) in bank.candidates.iter().enumerate() {
        write_file(&dir.join(format!("{}_{k}.png", bank.image_id)), &encode_mask_png(m))?;
    }
    Ok(())
}

pub fn class_mask_path(dir: &Path, image_id: &str, class_id: u8) -> PathBuf {
    dir.join(format!("{image_id}_c{class_id}.png"))
}

/// Loads every `<dir>/<image_id>_c<class>.png` keyed by class id.
pub fn load_class_masks(dir: &Path, image_id: &str) -> Result<BTreeMap<u8, BinaryMask>> {
    let mut out = BTreeMap::new();
    for (k, path) in numbered_files(dir, image_id, "_c")? {
        let class_id = u8::try_from(k)
            .map_err(|_| Error::Format(format!("{}: class id out of range", path.display())))?;
        let mask = decode_mask_png(&read_file(&path)?).map_err(|e| with_file(e, &path))?;
        out.insert(class_id, mask);
    }
    Ok(out)
}

pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    decode_mask_png(&read_file(path)?).map_err(|e| with_file(e, path))
}

pub fn load_image(path: &Path) -> Result<RgbImage> {
    decode_rgb_png(&read_file(path)?).map_err(|e| with_file(e, path))
}

pub fn save_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    write_file(path, &encode_mask_png(mask))
}

pub fn save_image(path: &Path, image: &RgbImage) -> Result<()> {
    write_file(path, &encode_rgb_png(image))
}

pub fn save_labels(path: &Path, labels: &LabelMap) -> Result<()> {
    write_file(path, &encode_label_png(labels))
}

pub fn write_split(root: &Path, split: Split, ids: &[String]) -> Result<()> {
    let mut text = String::new();
    for id in ids {
        text.push_str(id);
        text.push('\n');
    }
    write_file(&root.join(SPLITS_DIR).join(format!("{split}.txt")), text.as_bytes())
}
