use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rng_for;
use crate::error::{Error, Result};
use crate::maskcore::{LabelMap, BACKGROUND};
use crate::raster::RgbImage;

/// Saturated, mutually distant base colors; class `k` uses entry `k - 1`.
pub const CLASS_PALETTE: [[f64; 3]; 8] = [
    [0.85, 0.15, 0.15],
    [0.15, 0.75, 0.20],
    [0.15, 0.25, 0.85],
    [0.90, 0.85, 0.15],
    [0.80, 0.20, 0.80],
    [0.15, 0.80, 0.85],
    [0.95, 0.55, 0.10],
    [0.45, 0.15, 0.55],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub width: u32,
    pub height: u32,
    pub num_classes: u8,
    pub min_shapes: u32,
    pub max_shapes: u32,
    /// Per-channel standard deviation of object color noise, in [0, 1] units.
    pub color_noise_sigma: f64,
    /// Per-channel standard deviation of background texture noise.
    pub background_texture_sigma: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            num_classes: 4,
            min_shapes: 2,
            max_shapes: 4,
            color_noise_sigma: 0.05,
            background_texture_sigma: 0.06,
        }
    }
}

impl SceneConfig {
    fn min_side(&self) -> u32 {
        (self.width.min(self.height) / 8).max(2)
    }

    fn max_side(&self) -> u32 {
        ((self.width.min(self.height) as f64) / 2.2) as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.num_classes as usize > CLASS_PALETTE.len() {
            return Err(Error::Generation(format!(
                "num_classes must be in 1..={}, got {}",
                CLASS_PALETTE.len(),
                self.num_classes
            )));
        }
        if self.min_shapes == 0 || self.min_shapes > self.max_shapes {
            return Err(Error::Generation(format!(
                "shape count range {}..={} is invalid",
                self.min_shapes, self.max_shapes
            )));
        }
        for (name, s) in [
            ("color_noise_sigma", self.color_noise_sigma),
            ("background_texture_sigma", self.background_texture_sigma),
        ] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Generation(format!("{name} must lie in [0, 1], got {s}")));
            }
        }
        if self.width == 0 || self.height == 0 || self.min_side() > self.max_side() {
            return Err(Error::Generation(format!(
                "shapes cannot fit in a {}x{} frame",
                self.width, self.height
            )));
        }
        let colors = &CLASS_PALETTE[..self.num_classes as usize];
        for (i, a) in colors.iter().enumerate() {
            for b in &colors[i + 1..] {
                let dist = (0..3).map(|c| (a[c] - b[c]).abs()).fold(0.0, f64::max);
                if dist < 4.0 * self.color_noise_sigma {
                    return Err(Error::Generation(format!(
                        "color noise sigma {} too large: class colors are only {dist:.2} apart",
                        self.color_noise_sigma
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeKind {
    Rect,
    Ellipse,
}

/// Axis-aligned shape covering `[x, x + w) × [y, y + h)` (ellipses are inscribed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub kind: ShapeKind,
    pub class_id: u8,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Shape {
    /// Pixel-center containment test.
    pub fn contains(&self, px: u32, py: u32) -> bool {
        if px < self.x || py < self.y || px >= self.x + self.w || py >= self.y + self.h {
            return false;
        }
        match self.kind {
            ShapeKind::Rect => true,
            ShapeKind::Ellipse => {
                let rx = f64::from(self.w) / 2.0;
                let ry = f64::from(self.h) / 2.0;
                let dx = (f64::from(px) + 0.5 - f64::from(self.x) - rx) / rx;
                let dy = (f64::from(py) + 0.5 - f64::from(self.y) - ry) / ry;
                dx * dx + dy * dy <= 1.0
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub image: RgbImage,
    pub gt: LabelMap,
    /// Shapes in painting order; later ones occlude earlier ones.
    pub shapes: Vec<Shape>,
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn generate_scene(seed: u64, config: &SceneConfig) -> Result<Scene> {
    generate_scene_with(seed, config, None)
}

/// Like [`generate_scene`], with `must_include` painted last so it is fully visible.
pub fn generate_scene_with(seed: u64, config: &SceneConfig, must_include: Option<u8>) -> Result<Scene> {
    config.validate()?;
    if let Some(c) = must_include {
        if c == BACKGROUND || c > config.num_classes {
            return Err(Error::Generation(format!("class {c} is not one of 1..={}", config.num_classes)));
        }
    }
    let mut rng = rng_for(seed, 0);
    let (w, h) = (config.width, config.height);

    let n_shapes = rng.random_range(config.min_shapes..=config.max_shapes);
    let mut shapes = Vec::with_capacity(n_shapes as usize);
    for i in 0..n_shapes {
        let class_id = match must_include {
            Some(c) if i + 1 == n_shapes => c,
            _ => rng.random_range(1..=config.num_classes),
        };
        shapes.push(random_shape(&mut rng, config, class_id));
    }

    // background: a muted per-image base with per-pixel texture
    let gray = rng.random_range(0.35..0.65);
    let base: [f64; 3] = std::array::from_fn(|_| gray + rng.random_range(-0.05..0.05));
    let bg_noise = normal(config.background_texture_sigma);
    let fg_noise = normal(config.color_noise_sigma);

    let mut gt = LabelMap::background(w, h);
    let mut image = RgbImage::filled(w, h, [0, 0, 0]);
    for y in 0..h {
        for x in 0..w {
            let rgb: [u8; 3] = std::array::from_fn(|c| to_u8(base[c] + sample(&bg_noise, &mut rng)));
            image.put_pixel(x, y, rgb);
        }
    }
    for shape in &shapes {
        let color = CLASS_PALETTE[shape.class_id as usize - 1];
        for y in shape.y..shape.y + shape.h {
            for x in shape.x..shape.x + shape.w {
                if shape.contains(x, y) {
                    gt.set(x, y, shape.class_id);
                    let rgb: [u8; 3] =
                        std::array::from_fn(|c| to_u8(color[c] + sample(&fg_noise, &mut rng)));
                    image.put_pixel(x, y, rgb);
                }
            }
        }
    }
    Ok(Scene { image, gt, shapes })
}

fn normal(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma validated"))
}

fn sample(dist: &Option<Normal<f64>>, rng: &mut ChaCha8Rng) -> f64 {
    dist.as_ref().map_or(0.0, |d| d.sample(rng))
}

fn random_shape(rng: &mut ChaCha8Rng, config: &SceneConfig, class_id: u8) -> Shape {
    let (lo, hi) = (config.min_side(), config.max_side());
    let sw = rng.random_range(lo..=hi).min(config.width);
    let sh = rng.random_range(lo..=hi).min(config.height);
    Shape {
        kind: if rng.random_bool(0.5) { ShapeKind::Rect } else { ShapeKind::Ellipse },
        class_id,
        x: rng.random_range(0..=config.width - sw),
        y: rng.random_range(0..=config.height - sh),
        w: sw,
        h: sh,
    }
}
