//! Deterministic judge cases shared by the echo conformance checks.

use rand::Rng;

use crate::maskcore::BinaryMask;
use crate::raster::RgbImage;
use crate::synth::rng_for;

pub const CONFORMANCE_SEED: u64 = 0x4A46_5331;
pub const CONFORMANCE_CASES: usize = 50;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub index: usize,
    pub query_image: RgbImage,
    pub coarse: BinaryMask,
    pub refined: BinaryMask,
    pub support_image: RgbImage,
    pub support_mask: BinaryMask,
}

fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> RgbImage {
    let data = (0..w * h * 3).map(|_| rng.random()).collect();
    RgbImage::new(w, h, data).expect("buffer sized to frame")
}

fn random_mask(rng: &mut impl Rng, w: u32, h: u32) -> BinaryMask {
    let density: f64 = rng.random_range(0.0..=1.0);
    BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density))
}

/// Case `index`: mismatched query/support sizes (both up- and downsampling),
/// including 1-pixel frames and empty or full masks.
pub fn fixture(index: usize) -> Fixture {
    let mut rng = rng_for(CONFORMANCE_SEED, index as u64);
    let dim = |rng: &mut rand_chacha::ChaCha8Rng| match index % 5 {
        0 => rng.random_range(1..=3),
        _ => rng.random_range(1..=48),
    };
    let (qw, qh) = (dim(&mut rng), dim(&mut rng));
    let (sw, sh) = (dim(&mut rng), dim(&mut rng));
    let query_image = random_image(&mut rng, qw, qh);
    let support_image = random_image(&mut rng, sw, sh);
    let coarse = match index % 7 {
        3 => BinaryMask::empty(qw, qh),
        5 => BinaryMask::full(qw, qh),
        _ => random_mask(&mut rng, qw, qh),
    };
    let refined = random_mask(&mut rng, qw, qh);
    let support_mask = random_mask(&mut rng, sw, sh);
    Fixture {
        index,
        query_image,
        coarse,
        refined,
        support_image,
        support_mask,
    }
}

pub fn conformance_suite() -> Vec<Fixture> {
    (0..CONFORMANCE_CASES).map(fixture).collect()
}
