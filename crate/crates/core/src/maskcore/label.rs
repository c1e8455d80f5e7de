use std::collections::BTreeSet;

use super::BinaryMask;
use crate::error::{Error, Result};

/// PASCAL-style boundary/"void" label.
pub const DEFAULT_IGNORE: u8 = 255;

/// Class id used for background.
pub const BACKGROUND: u8 = 0;

/// Per-pixel class ids, row-major, with one id reserved for "not evaluated".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Vec<u8>,
    ignore_value: u8,
}

/// A class mask and the pixels that take part in evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMask {
    pub mask: BinaryMask,
    pub valid: BinaryMask,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<u8>, ignore_value: u8) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format("label map dimensions must be >= 1".into()));
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::Format(format!(
                "label map {width}x{height} needs {} labels, got {}",
                width as usize * height as usize,
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            ignore_value,
        })
    }

    /// Map filled with `BACKGROUND` and the default ignore value.
    pub fn background(width: u32, height: u32) -> Self {
        Self::new(
            width,
            height,
            vec![BACKGROUND; width as usize * height as usize],
            DEFAULT_IGNORE,
        )
        .expect("dimensions checked by caller")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn ignore_value(&self) -> u8 {
        self.ignore_value
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, class_id: u8) {
        let w = self.width as usize;
        self.labels[y as usize * w + x as usize] = class_id;
    }

    /// Foreground class ids present, excluding background and the ignore value.
    pub fn present_classes(&self) -> BTreeSet<u8> {
        let mut seen = [false; 256];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (1..=255u8)
            .filter(|&c| seen[c as usize] && c != self.ignore_value)
            .collect()
    }

    pub fn count_class(&self, class_id: u8) -> usize {
        self.labels.iter().filter(|&&l| l == class_id).count()
    }

    /// Binary mask of `class_id` plus the non-ignore region.
    pub fn extract_class(&self, class_id: u8) -> Result<ClassMask> {
        if class_id == self.ignore_value {
            return Err(Error::InvalidClass(class_id));
        }
        let n = self.labels.len();
        let mut mask = BinaryMask::empty(self.width, self.height);
        let mut valid = BinaryMask::empty(self.width, self.height);
        for i in 0..n {
            let l = self.labels[i];
            if l == class_id {
                mask.set_index(i, true);
            }
            if l != self.ignore_value {
                valid.set_index(i, true);
            }
        }
        Ok(ClassMask { mask, valid })
    }

    /// Mask of every pixel carrying one of the given ids.
    pub fn region_of(&self, class_id: u8) -> BinaryMask {
        let mut m = BinaryMask::empty(self.width, self.height);
        for (i, &l) in self.labels.iter().enumerate() {
            if l == class_id {
                m.set_index(i, true);
            }
        }
        m
    }
}
