//! Run-length storage for binary masks.
//!
//! Runs alternate background/foreground over the row-major flattening and
//! always start with a background run, which is zero-length when the first
//! pixel is foreground. On disk an [`Rle`] is a small versioned container:
//!
//! ```text
//! "JFSM" | u8 version (=1) | u32 width | u32 height | u32 run count | u32 runs...
//! ```
//!
//! with every integer little-endian.

use super::BinaryMask;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"JFSM";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 * 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rle {
    pub width: u32,
    pub height: u32,
    pub runs: Vec<u32>,
}

impl Rle {
    pub fn encode(mask: &BinaryMask) -> Rle {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for i in 0..mask.len() {
            let v = mask.get_index(i);
            if v != current {
                runs.push(len);
                len = 0;
                current = v;
            }
            len += 1;
        }
        runs.push(len);
        Rle {
            width: mask.width(),
            height: mask.height(),
            runs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::RleFormat("zero dimension".into()));
        }
        if self.runs.is_empty() {
            return Err(Error::RleFormat("no runs".into()));
        }
        if let Some(pos) = self.runs.iter().skip(1).position(|&r| r == 0) {
            return Err(Error::RleFormat(format!("zero-length run at index {}", pos + 1)));
        }
        let total: u64 = self.runs.iter().map(|&r| u64::from(r)).sum();
        let expected = u64::from(self.width) * u64::from(self.height);
        if total != expected {
            return Err(Error::RleFormat(format!(
                "runs cover {total} pixels, expected {expected}"
            )));
        }
        Ok(())
    }

    pub fn decode(&self) -> Result<BinaryMask> {
        self.validate()?;
        let mut mask = BinaryMask::empty(self.width, self.height);
        let mut pos = 0usize;
        for (k, &run) in self.runs.iter().enumerate() {
            let run = run as usize;
            if k % 2 == 1 {
                for i in pos..pos + run {
                    mask.set_index(i, true);
                }
            }
            pos += run;
        }
        Ok(mask)
    }

    /// Foreground pixel count, read off the odd runs.
    pub fn area(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| u64::from(r)).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.runs.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&(self.runs.len() as u32).to_le_bytes());
        for r in &self.runs {
            out.extend_from_slice(&r.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Rle> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::RleFormat("truncated header".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::RleFormat("bad magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::RleFormat(format!("unsupported version {}", bytes[4])));
        }
        let word = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        let width = word(5);
        let height = word(9);
        let count = word(13) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != count * 4 {
            return Err(Error::RleFormat(format!(
                "expected {count} runs ({} bytes), found {} bytes",
                count * 4,
                body.len()
            )));
        }
        let runs = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let rle = Rle {
            width,
            height,
            runs,
        };
        rle.validate()?;
        Ok(rle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_full_3x3() {
        assert_eq!(Rle::encode(&BinaryMask::empty(3, 3)).runs, vec![9]);
        assert_eq!(Rle::encode(&BinaryMask::full(3, 3)).runs, vec![0, 9]);
    }

    #[test]
    fn checkerboards_2x2() {
        // row-major 1,0,0,1 and 0,1,1,0
        let a = BinaryMask::from_rows(&[&[1, 0], &[0, 1]]);
        let b = BinaryMask::from_rows(&[&[0, 1], &[1, 0]]);
        let ra = Rle::encode(&a);
        let rb = Rle::encode(&b);
        assert_eq!(ra.runs, vec![0, 1, 2, 1]);
        assert_eq!(rb.runs, vec![1, 2, 1]);
        assert_eq!(ra.decode().unwrap(), a);
        assert_eq!(rb.decode().unwrap(), b);
        assert_eq!(ra.area(), 2);
    }

    #[test]
    fn decode_rejects_bad_sums_and_zero_runs() {
        let bad_sum = Rle { width: 3, height: 3, runs: vec![4, 4] };
        assert!(matches!(bad_sum.decode(), Err(Error::RleFormat(_))));
        let zero_mid = Rle { width: 2, height: 2, runs: vec![2, 0, 2] };
        assert!(matches!(zero_mid.decode(), Err(Error::RleFormat(_))));
        let zero_tail = Rle { width: 2, height: 2, runs: vec![4, 0] };
        assert!(zero_tail.decode().is_err());
    }

    #[test]
    fn container_layout() {
        let rle = Rle { width: 2, height: 1, runs: vec![0, 2] };
        let bytes = rle.to_bytes();
        assert_eq!(&bytes[..5], b"JFSM\x01");
        assert_eq!(&bytes[5..9], &2u32.to_le_bytes());
        assert_eq!(&bytes[9..13], &1u32.to_le_bytes());
        assert_eq!(&bytes[13..17], &2u32.to_le_bytes());
        assert_eq!(bytes.len(), 17 + 8);
        assert_eq!(Rle::from_bytes(&bytes).unwrap(), rle);
    }

    #[test]
    fn container_rejects_corruption() {
        let mut bytes = Rle { width: 2, height: 2, runs: vec![1, 3] }.to_bytes();
        assert!(Rle::from_bytes(&bytes[..10]).is_err());
        bytes[4] = 2;
        assert!(Rle::from_bytes(&bytes).is_err());
        bytes[4] = 1;
        bytes[0] = b'X';
        assert!(Rle::from_bytes(&bytes).is_err());
        let mut extra = Rle { width: 2, height: 2, runs: vec![1, 3] }.to_bytes();
        extra.push(0);
        assert!(Rle::from_bytes(&extra).is_err());
    }
}
