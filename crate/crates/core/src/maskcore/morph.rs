//! Binary dilation and erosion with a square structuring element.
//!
//! The element has side `2 * radius + 1`. Out-of-bounds neighbors are
//! background, so erosion eats into masks touching the frame edge.

use super::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Dilate,
    Erode,
}

/// # Panics
///
/// If `radius` is 0.
pub fn morph(mask: &BinaryMask, op: MorphOp, radius: u32) -> BinaryMask {
    assert!(radius >= 1, "morphology radius must be >= 1");
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let src = mask.to_bools();
    let r = radius as usize;

    // The square element separates into a horizontal then a vertical pass.
    let mut tmp = vec![false; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        pass_1d(row, &mut tmp[y * w..(y + 1) * w], r, op);
    }
    let mut col_in = vec![false; h];
    let mut col_out = vec![false; h];
    let mut out = BinaryMask::empty(mask.width(), mask.height());
    for x in 0..w {
        for y in 0..h {
            col_in[y] = tmp[y * w + x];
        }
        pass_1d(&col_in, &mut col_out, r, op);
        for (y, &on) in col_out.iter().enumerate() {
            if on {
                out.set_index(y * w + x, true);
            }
        }
    }
    out
}

pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    morph(mask, MorphOp::Dilate, radius)
}

pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    morph(mask, MorphOp::Erode, radius)
}

/// Sliding-window OR/AND over a line via a running count of set pixels.
fn pass_1d(input: &[bool], output: &mut [bool], r: usize, op: MorphOp) {
    let n = input.len();
    let window = 2 * r + 1;
    // prefix[i] = number of set pixels in input[..i]
    let mut prefix = vec![0usize; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + usize::from(input[i]);
    }
    for (i, out) in output.iter_mut().enumerate() {
        let lo = i.saturating_sub(r);
        let hi = (i + r + 1).min(n);
        let set = prefix[hi] - prefix[lo];
        *out = match op {
            MorphOp::Dilate => set > 0,
            // any out-of-bounds neighbor is background
            MorphOp::Erode => set == window,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct definition: scan the full (2r+1)^2 neighborhood of every pixel.
    fn naive(mask: &BinaryMask, op: MorphOp, r: i64) -> BinaryMask {
        let (w, h) = (mask.width() as i64, mask.height() as i64);
        BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
            let mut any = false;
            let mut all = true;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    let v = nx >= 0 && ny >= 0 && nx < w && ny < h && mask.get(nx as u32, ny as u32);
                    any |= v;
                    all &= v;
                }
            }
            match op {
                MorphOp::Dilate => any,
                MorphOp::Erode => all,
            }
        })
    }

    #[test]
    fn dilate_center_pixel_gives_block() {
        let mut m = BinaryMask::empty(5, 5);
        m.set(2, 2, true);
        let d = dilate(&m, 1);
        assert_eq!(d, BinaryMask::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y)));
    }

    #[test]
    fn erode_single_pixel_vanishes() {
        let mut m = BinaryMask::empty(5, 5);
        m.set(2, 2, true);
        assert!(erode(&m, 1).is_empty());
    }

    #[test]
    fn erode_full_frame_trims_border() {
        let e = erode(&BinaryMask::full(5, 4), 1);
        assert_eq!(e.count(), 3 * 2);
    }

    #[test]
    fn separable_matches_naive_neighborhood() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w = rng.random_range(1..12);
            let h = rng.random_range(1..12);
            let m = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(0.4));
            for r in 1..4 {
                assert_eq!(dilate(&m, r), naive(&m, MorphOp::Dilate, r as i64));
                assert_eq!(erode(&m, r), naive(&m, MorphOp::Erode, r as i64));
            }
        }
    }

    #[test]
    fn closing_contains_interior_masks() {
        // masks confined to the 4x4 interior of a 6x6 frame: random draws, then
        // all 2^16 of them
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let m = BinaryMask::from_fn(6, 6, |x, y| {
                (1..5).contains(&x) && (1..5).contains(&y) && rng.random_bool(0.5)
            });
            let closed = erode(&dilate(&m, 1), 1);
            assert_eq!(m.and_not(&closed).unwrap().count(), 0, "{m:?}");
        }
        for bits in 0u32..(1 << 16) {
            let m = BinaryMask::from_fn(6, 6, |x, y| {
                (1..5).contains(&x)
                    && (1..5).contains(&y)
                    && (bits >> ((y - 1) * 4 + (x - 1))) & 1 == 1
            });
            let closed = erode(&dilate(&m, 1), 1);
            assert_eq!(m.and_not(&closed).unwrap().count(), 0);
        }
    }
}
