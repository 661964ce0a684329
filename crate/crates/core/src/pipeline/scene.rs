//! Seeded synthetic scenes: a background plane with rectangular foreground
//! objects, a procedural texture and Gaussian coding noise on the depth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::image::Image;
use crate::error::{Error, Result};
use crate::geometry::{CameraConfig, DepthLevel, MAX_LEVEL};
use crate::occlusion::{extract_groups, Direction};

pub const DEFAULT_SEED: u64 = 20_240_607;

/// Texture, uncompressed depth and simulated coding errors of one view.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub texture: Image<u8>,
    pub depth: Image<u8>,
    /// Coded depth minus uncompressed depth, per pixel.
    pub errors: Image<i32>,
    /// Multiplies the camera baseline when the scene is rendered.
    pub baseline_scale: f64,
}

impl Scene {
    pub fn new(
        texture: Image<u8>,
        depth: Image<u8>,
        errors: Image<i32>,
        baseline_scale: f64,
    ) -> Result<Self> {
        texture.same_dims(&depth)?;
        texture.same_dims(&errors)?;
        if !(baseline_scale > 0.0 && baseline_scale.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "baseline scale must be positive, got {baseline_scale}"
            )));
        }
        for (&v, &e) in depth.data().iter().zip(errors.data()) {
            let coded = i32::from(v) + e;
            if !(0..=MAX_LEVEL).contains(&coded) {
                return Err(Error::DepthOutOfRange(i64::from(coded)));
            }
        }
        Ok(Scene {
            texture,
            depth,
            errors,
            baseline_scale,
        })
    }

    /// Builds the error image from a coded depth map.
    pub fn from_coded(
        texture: Image<u8>,
        depth: Image<u8>,
        coded: &Image<u8>,
        baseline_scale: f64,
    ) -> Result<Self> {
        depth.same_dims(coded)?;
        let errors = Image::from_vec(
            depth.width(),
            depth.height(),
            depth
                .data()
                .iter()
                .zip(coded.data())
                .map(|(&v, &c)| i32::from(c) - i32::from(v))
                .collect(),
        )?;
        Scene::new(texture, depth, errors, baseline_scale)
    }

    pub fn width(&self) -> usize {
        self.depth.width()
    }

    pub fn height(&self) -> usize {
        self.depth.height()
    }

    /// `depth + errors`.
    pub fn coded(&self) -> Image<u8> {
        let data = self
            .depth
            .data()
            .iter()
            .zip(self.errors.data())
            .map(|(&v, &e)| (i32::from(v) + e) as u8)
            .collect();
        Image::from_vec(self.width(), self.height(), data).expect("same dimensions")
    }

    pub fn depth_row(&self, y: usize) -> Vec<DepthLevel> {
        self.depth.row(y).iter().map(|&v| DepthLevel::from(v)).collect()
    }

    /// `base` with the baseline scaled for this scene.
    pub fn camera(&self, base: &CameraConfig) -> Result<CameraConfig> {
        if self.baseline_scale == 1.0 {
            Ok(base.clone())
        } else {
            base.with_baseline_scale(self.baseline_scale)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub baseline_scale: f64,
    /// Foreground level; nearer objects have larger levels.
    pub fg_depth: u8,
    pub bg_depth: u8,
    pub noise_sigma: f64,
    pub seed: u64,
    pub objects: usize,
}

impl SceneSpec {
    /// 160x48 view with two foreground boxes at level 80 over a background
    /// at level 40. Under the standard camera every box pixel moves four
    /// pel per unit of baseline scale further than the background.
    pub fn standard(baseline_scale: f64, seed: u64) -> Self {
        SceneSpec {
            width: 160,
            height: 48,
            baseline_scale,
            fg_depth: 80,
            bg_depth: 40,
            noise_sigma: 0.5,
            seed,
            objects: 2,
        }
    }
}

struct Rect {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

impl Rect {
    fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }
}

pub fn gen_scene(spec: &SceneSpec) -> Result<Scene> {
    if spec.fg_depth <= spec.bg_depth {
        return Err(Error::InvalidScene(format!(
            "foreground level {} must exceed background level {}",
            spec.fg_depth, spec.bg_depth
        )));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidScene(format!("bad noise sigma {}", spec.noise_sigma)));
    }
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // One box per horizontal slot, in the left half of the slot.
    let mut rects = Vec::with_capacity(spec.objects);
    if spec.objects > 0 && w >= 16 * spec.objects && h >= 8 {
        let slot = w / spec.objects;
        for i in 0..spec.objects {
            let bw = rng.random_range(slot * 3 / 8..=slot * 7 / 16);
            let x0 = i * slot + rng.random_range(slot / 8..=slot / 8 + slot / 16);
            let bh = rng.random_range(h / 2..=h * 5 / 8);
            let y0 = rng.random_range(h / 8..=h / 4);
            rects.push(Rect {
                x0,
                x1: x0 + bw,
                y0,
                y1: (y0 + bh).min(h),
            });
        }
    }

    let mut depth = Image::filled(w, h, spec.bg_depth);
    let mut texture = Image::filled(w, h, 0u8);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    for y in 0..h {
        for x in 0..w {
            let (xf, yf) = (x as f64, y as f64);
            let fg = rects.iter().any(|r| r.contains(x, y));
            let base = if fg {
                depth.set(x, y, spec.fg_depth);
                let check = ((x / 4 + y / 4) % 2) as f64;
                70.0 + 60.0 * check + 20.0 * (xf / 9.0).sin()
            } else {
                128.0 + 60.0 * (std::f64::consts::TAU * xf / 23.0 + phase).sin() * (yf / 5.0).cos()
            };
            let grain: f64 = rng.random_range(-6.0..6.0);
            texture.set(x, y, (base + grain).round().clamp(0.0, 255.0) as u8);
        }
    }

    let mut errors = Image::filled(w, h, 0i32);
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).expect("sigma checked");
        for y in 0..h {
            for x in 0..w {
                let v = i32::from(*depth.get(x, y));
                let e = normal.sample(&mut rng).round() as i32;
                errors.set(x, y, e.clamp(-v, MAX_LEVEL - v));
            }
        }
    }
    Scene::new(texture, depth, errors, spec.baseline_scale)
}

/// Share of reference pixels that lose a z-buffer contest under the coded
/// depth. Texture plays no part.
pub fn occluded_fraction(scene: &Scene, base: &CameraConfig, direction: Direction) -> Result<f64> {
    let cfg = scene.camera(base)?;
    let total = scene.width() * scene.height();
    if total == 0 {
        return Ok(0.0);
    }
    let mut losers = 0usize;
    for y in 0..scene.height() {
        let groups = extract_groups(
            &scene.depth_row(y),
            scene.errors.row(y),
            None,
            y,
            &cfg,
            direction,
        )?;
        losers += groups.iter().map(|g| g.len() - 1).sum::<usize>();
    }
    Ok(losers as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::presets;

    #[test]
    fn zero_noise_has_no_errors() {
        let spec = SceneSpec {
            noise_sigma: 0.0,
            ..SceneSpec::standard(1.0, 3)
        };
        let s = gen_scene(&spec).unwrap();
        assert!(s.errors.data().iter().all(|&e| e == 0));
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let spec = SceneSpec::standard(2.0, 99);
        assert_eq!(gen_scene(&spec).unwrap(), gen_scene(&spec).unwrap());
        let other = SceneSpec::standard(2.0, 100);
        assert_ne!(gen_scene(&spec).unwrap(), gen_scene(&other).unwrap());
    }

    #[test]
    fn depth_ordering_checked() {
        let spec = SceneSpec {
            fg_depth: 10,
            bg_depth: 10,
            ..SceneSpec::standard(1.0, 1)
        };
        assert!(matches!(gen_scene(&spec), Err(Error::InvalidScene(_))));
    }

    #[test]
    fn coded_depth_stays_in_range() {
        let spec = SceneSpec {
            fg_depth: 255,
            bg_depth: 0,
            noise_sigma: 4.0,
            ..SceneSpec::standard(1.0, 5)
        };
        let s = gen_scene(&spec).unwrap();
        let coded = s.coded();
        let back = Scene::from_coded(s.texture.clone(), s.depth.clone(), &coded, 1.0).unwrap();
        assert_eq!(back.errors, s.errors);
    }

    #[test]
    fn fraction_of_row_fixture() {
        let cfg = presets::canonical_integer_pel();
        let depth = Image::from_vec(4, 1, vec![30, 5, 10, 5]).unwrap();
        let scene = Scene::new(Image::filled(4, 1, 0), depth.clone(), Image::filled(4, 1, 0), 1.0)
            .unwrap();
        assert_eq!(occluded_fraction(&scene, &cfg, Direction::Right).unwrap(), 0.25);
        let textured = Scene::new(Image::from_vec(4, 1, vec![9, 200, 3, 77]).unwrap(), depth, Image::filled(4, 1, 0), 1.0)
            .unwrap();
        assert_eq!(occluded_fraction(&textured, &cfg, Direction::Right).unwrap(), 0.25);
    }

    #[test]
    fn flat_scene_has_no_occlusion() {
        let cfg = presets::canonical_half_pel();
        let scene = Scene::new(
            Image::filled(32, 4, 100),
            Image::filled(32, 4, 60),
            Image::filled(32, 4, 0),
            1.0,
        )
        .unwrap();
        assert_eq!(occluded_fraction(&scene, &cfg, Direction::Right).unwrap(), 0.0);
    }

    #[test]
    fn fraction_grows_with_baseline() {
        let cfg = presets::standard_camera();
        let mut last = -1.0;
        for k in 1..=5 {
            let s = gen_scene(&SceneSpec::standard(f64::from(k), DEFAULT_SEED)).unwrap();
            let f = occluded_fraction(&s, &cfg, Direction::Right).unwrap();
            assert!(f >= last, "scale {k}: {f} < {last}");
            last = f;
        }
        assert!(last > 0.0);
    }
}
