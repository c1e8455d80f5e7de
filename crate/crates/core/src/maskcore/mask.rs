use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Per-pixel foreground membership for one class on one image.
///
/// Pixels are packed row-major into `u64` words, bit `i % 64` of word `i / 64`
/// holding pixel `i = y * width + x`. Bits past `width * height` are always
/// zero, so derived equality and popcounts are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    words: Vec<u64>,
}

impl BinaryMask {
    /// All-background mask. Panics on a zero dimension.
    pub fn empty(width: u32, height: u32) -> Self {
        assert!(width >= 1 && height >= 1, "mask dimensions must be >= 1");
        let len = width as usize * height as usize;
        Self {
            width,
            height,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn full(width: u32, height: u32) -> Self {
        let mut m = Self::empty(width, height);
        m.words.iter_mut().for_each(|w| *w = u64::MAX);
        m.clear_tail();
        m
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    /// Builds a mask from one value per pixel, row-major.
    pub fn from_bools(width: u32, height: u32, bits: &[bool]) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format("mask dimensions must be >= 1".into()));
        }
        if bits.len() != width as usize * height as usize {
            return Err(Error::Format(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width as usize * height as usize,
                bits.len()
            )));
        }
        let mut m = Self::empty(width, height);
        for (i, &b) in bits.iter().enumerate() {
            if b {
                m.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Ok(m)
    }

    /// Builds a mask from rows of `0`/`1` (any non-zero is foreground).
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.len()) as u32;
        assert!(rows.iter().all(|r| r.len() == width as usize), "ragged rows");
        Self::from_fn(width, height, |x, y| rows[y as usize][x as usize] != 0)
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// True when no pixel is set. (A mask always has at least one pixel.)
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        debug_assert!(x < self.width && y < self.height);
        self.get_index(y as usize * self.width as usize + x as usize)
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> bool {
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.set_index(y as usize * self.width as usize + x as usize, value);
    }

    #[inline]
    pub fn set_index(&mut self, i: usize, value: bool) {
        let bit = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= bit;
        } else {
            self.words[i / WORD_BITS] &= !bit;
        }
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Row-major indices of foreground pixels.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.get_index(i)).collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn check_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dimension(self.dims(), other.dims()));
        }
        Ok(())
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_words(other, |a, b| a | b)
    }

    /// Pixels set in `self` but not in `other`.
    pub fn and_not(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn not(&self) -> BinaryMask {
        let mut m = BinaryMask {
            width: self.width,
            height: self.height,
            words: self.words.iter().map(|w| !w).collect(),
        };
        m.clear_tail();
        m
    }

    /// In-place union; dimensions must match.
    pub fn or_assign(&mut self, other: &BinaryMask) -> Result<()> {
        self.check_dims(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    /// `|self ∩ other|` without allocating.
    pub fn intersection_count(&self, other: &BinaryMask) -> Result<u64> {
        self.check_dims(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| u64::from((a & b).count_ones()))
            .sum())
    }

    fn zip_words(&self, other: &BinaryMask, f: impl Fn(u64, u64) -> u64) -> Result<BinaryMask> {
        self.check_dims(other)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn clear_tail(&mut self) {
        let rem = self.len() % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {}x{} ({} set)", self.width, self.height, self.count())?;
        if self.len() <= 32 * 32 {
            for y in 0..self.height {
                let row: String = (0..self.width)
                    .map(|x| if self.get(x, y) { '#' } else { '.' })
                    .collect();
                writeln!(f, "  {row}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_mask_keeps_tail_clear() {
        let m = BinaryMask::full(5, 13);
        assert_eq!(m.count(), 65);
        assert_eq!(m.not().count(), 0);
        assert!(m.not().is_empty());
    }

    #[test]
    fn ones_iterates_in_row_major_order() {
        let m = BinaryMask::from_rows(&[&[0, 1, 0], &[1, 0, 1]]);
        assert_eq!(m.ones().collect::<Vec<_>>(), vec![1, 3, 5]);
    }

    #[test]
    fn set_and_get_across_word_boundary() {
        let mut m = BinaryMask::empty(70, 2);
        m.set(63, 0, true);
        m.set(64, 0, true);
        m.set(69, 1, true);
        assert!(m.get(63, 0) && m.get(64, 0) && m.get(69, 1));
        assert_eq!(m.count(), 3);
        m.set(64, 0, false);
        assert_eq!(m.count(), 2);
    }

    #[test]
    fn binary_ops_reject_mismatched_dims() {
        let a = BinaryMask::empty(3, 3);
        let b = BinaryMask::empty(3, 4);
        assert!(matches!(a.and(&b), Err(Error::Dimension { .. })));
        assert!(matches!(a.intersection_count(&b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn from_bools_validates_length() {
        assert!(BinaryMask::from_bools(2, 2, &[true; 3]).is_err());
        assert!(BinaryMask::from_bools(0, 2, &[]).is_err());
        let m = BinaryMask::from_bools(2, 2, &[true, false, false, true]).unwrap();
        assert_eq!(m.to_bools(), vec![true, false, false, true]);
    }
}
