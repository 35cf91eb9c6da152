//! Synthetic corridor scenes with known ground truth.
//!
//! A scene is a flat background crossed by anti-aliased radial lines through a
//! chosen vanishing point, with rectangular objects painted on top. Objects
//! flagged `off_perspective` are axis-aligned rectangles; the others are
//! annular sectors around the vanishing point, so their long edges follow the
//! perspective. Depth falls off linearly toward the vanishing point.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{Element, ElementCatalog, GROUND_ID, SKY_ID};
use crate::raster::{RgbImage, ScenePlane};
use crate::scene_io::{quantize, save_bundle, write_json, DepthMap, LabelMask, SceneBundle};

pub const TRUTH_FILE: &str = "truth.json";
pub const WALL_ID: u16 = 2;
pub const FIRST_OBJECT_ID: u16 = 3;
/// Line coverage at or above which a pixel counts as a line pixel.
pub const LINE_PIXEL_COVERAGE: f32 = 0.5;

/// A named color (`red`, `yellow`, `green`, `blue`, `orange`, `white`,
/// `black`, `gray` or `gray:L`) or an explicit `[r, g, b]` triple in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColorSpec {
    Rgb([f32; 3]),
    Named(String),
}

impl ColorSpec {
    pub fn gray(level: f32) -> Self {
        Self::Rgb([level; 3])
    }

    pub fn named(name: &str) -> Self {
        Self::Named(name.to_string())
    }

    pub fn rgb(&self) -> Result<[f32; 3]> {
        let name = match self {
            Self::Rgb(c) => {
                if c.iter().all(|v| (0.0..=1.0).contains(v)) {
                    return Ok(*c);
                }
                return Err(Error::InvalidConfig(format!("color {c:?} outside [0, 1]")));
            }
            Self::Named(n) => n.to_ascii_lowercase(),
        };
        if let Some(level) = name.strip_prefix("gray:") {
            return match level.parse::<f32>() {
                Ok(l) if (0.0..=1.0).contains(&l) => Ok([l; 3]),
                _ => Err(Error::InvalidConfig(format!("bad gray level '{level}'"))),
            };
        }
        Ok(match name.as_str() {
            "red" => [0.9, 0.1, 0.1],
            "yellow" => [0.9, 0.9, 0.1],
            "green" => [0.1, 0.8, 0.1],
            "blue" => [0.1, 0.2, 0.9],
            "orange" => [0.95, 0.55, 0.1],
            "white" => [1.0; 3],
            "black" => [0.0; 3],
            "gray" => [0.5; 3],
            other => return Err(Error::InvalidConfig(format!("unknown color '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Box,
    Bar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthObject {
    pub shape: Shape,
    /// `[x0, y0, x1, y1]` in pixel coordinates, half-open.
    pub rect: [f64; 4],
    pub color: ColorSpec,
    pub depth: f32,
    pub relevant: bool,
    #[serde(default)]
    pub off_perspective: bool,
    #[serde(default)]
    pub name: Option<String>,
    /// Catalog category; defaults to `crane` for relevant objects and `beam`
    /// otherwise, which the built-in `method` profile classifies accordingly.
    #[serde(default)]
    pub category: Option<String>,
}

fn default_lines() -> usize {
    40
}
fn default_line_width() -> f64 {
    1.5
}
fn default_line_color() -> ColorSpec {
    ColorSpec::gray(0.85)
}
fn default_background() -> ColorSpec {
    ColorSpec::gray(0.35)
}
fn default_sky_color() -> ColorSpec {
    ColorSpec::Rgb([0.6, 0.75, 0.95])
}
fn default_near() -> f32 {
    2.0
}
fn default_far() -> f32 {
    40.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub vp: [f64; 2],
    #[serde(default = "default_lines")]
    pub n_radial_lines: usize,
    #[serde(default = "default_line_width")]
    pub line_width: f64,
    #[serde(default = "default_line_color")]
    pub line_color: ColorSpec,
    #[serde(default = "default_background")]
    pub background: ColorSpec,
    /// Rows at the top of the frame that show sky.
    #[serde(default)]
    pub sky_rows: usize,
    #[serde(default = "default_sky_color")]
    pub sky_color: ColorSpec,
    #[serde(default = "default_near")]
    pub depth_near: f32,
    #[serde(default = "default_far")]
    pub depth_far: f32,
    #[serde(default)]
    pub objects: Vec<SynthObject>,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    /// Corridor with default styling and no objects.
    pub fn corridor(width: usize, height: usize, vp: [f64; 2], seed: u64) -> Self {
        Self {
            width,
            height,
            vp,
            n_radial_lines: default_lines(),
            line_width: default_line_width(),
            line_color: default_line_color(),
            background: default_background(),
            sky_rows: 0,
            sky_color: default_sky_color(),
            depth_near: default_near(),
            depth_far: default_far(),
            objects: Vec::new(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.width == 0 || self.height == 0 {
            return bad(format!("scene size {}x{}", self.width, self.height));
        }
        if !self.vp.iter().all(|v| v.is_finite()) {
            return bad("vanishing point must be finite".into());
        }
        if self.line_width.is_nan() || self.line_width <= 0.0 {
            return bad("line_width must be positive".into());
        }
        if !(self.depth_near > 0.0 && self.depth_far >= self.depth_near && self.depth_far.is_finite()) {
            return bad("need 0 < depth_near <= depth_far".into());
        }
        if self.objects.len() > (u16::MAX - FIRST_OBJECT_ID) as usize {
            return bad("too many objects".into());
        }
        for (k, o) in self.objects.iter().enumerate() {
            let [x0, y0, x1, y1] = o.rect;
            if !(x0 < x1 && y0 < y1) || !o.rect.iter().all(|v| v.is_finite()) {
                return bad(format!("object {k}: empty rect {:?}", o.rect));
            }
            if !(o.depth > 0.0 && o.depth.is_finite()) {
                return bad(format!("object {k}: depth must be positive"));
            }
        }
        Ok(())
    }
}

/// Run-length encoded pixel set over row-major indices: `[start, len]` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRuns {
    pub pixel_count: usize,
    pub runs: Vec<[usize; 2]>,
}

impl PixelRuns {
    pub fn from_mask(mask: impl IntoIterator<Item = bool>) -> Self {
        let mut runs: Vec<[usize; 2]> = Vec::new();
        let mut count = 0;
        for (i, m) in mask.into_iter().enumerate() {
            if !m {
                continue;
            }
            count += 1;
            match runs.last_mut() {
                Some(r) if r[0] + r[1] == i => r[1] += 1,
                _ => runs.push([i, 1]),
            }
        }
        Self {
            pixel_count: count,
            runs,
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs.iter().flat_map(|&[s, n]| s..s + n)
    }

    pub fn to_mask(&self, len: usize) -> Vec<bool> {
        let mut m = vec![false; len];
        for i in self.indices() {
            m[i] = true;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub id: u16,
    pub name: String,
    pub relevant: bool,
    pub off_perspective: bool,
    pub depth: f32,
    #[serde(flatten)]
    pub pixels: PixelRuns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub width: usize,
    pub height: usize,
    pub vp: [f64; 2],
    pub objects: Vec<ObjectTruth>,
    /// Pixels drawn mostly by a radial line and not hidden by an object.
    pub line_pixels: PixelRuns,
}

impl SceneTruth {
    pub fn object(&self, name: &str) -> Option<&ObjectTruth> {
        self.objects.iter().find(|o| o.name == name)
    }
}

/// Angles of the radial lines: evenly spaced with seeded jitter of up to a
/// quarter of the spacing.
fn line_angles(spec: &SynthSpec) -> Vec<f64> {
    let n = spec.n_radial_lines;
    if n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let step = TAU / n as f64;
    let phase = rng.random::<f64>() * step;
    (0..n)
        .map(|k| phase + k as f64 * step + (rng.random::<f64>() - 0.5) * 0.5 * step)
        .collect()
}

/// Anti-aliased coverage of pixel `(x, y)` by the union of radial lines.
fn line_coverage(dirs: &[(f64, f64)], half_width: f64, dx: f64, dy: f64) -> f32 {
    let mut cov = 0.0f64;
    for &(c, s) in dirs {
        let along = dx * c + dy * s;
        if along <= 0.0 {
            continue;
        }
        let across = (dx * s - dy * c).abs();
        cov = cov.max((half_width + 0.5 - across).clamp(0.0, 1.0));
    }
    cov as f32
}

fn object_contains(o: &SynthObject, vp: [f64; 2], sector: Option<&Sector>, x: f64, y: f64) -> bool {
    let [x0, y0, x1, y1] = o.rect;
    if o.off_perspective {
        return x >= x0 && x < x1 && y >= y0 && y < y1;
    }
    let s = sector.expect("aligned objects carry a sector");
    let dx = x - vp[0];
    let dy = y - vp[1];
    let r = dx.hypot(dy);
    if r < s.r0 || r >= s.r1 {
        return false;
    }
    let a = (dy.atan2(dx) - s.a0).rem_euclid(TAU);
    a < s.span
}

/// Annular sector around the vanishing point spanned by a rectangle.
#[derive(Debug, Clone, Copy)]
struct Sector {
    r0: f64,
    r1: f64,
    a0: f64,
    span: f64,
}

impl Sector {
    fn of_rect(rect: [f64; 4], vp: [f64; 2]) -> Self {
        let [x0, y0, x1, y1] = rect;
        let cx = vp[0].clamp(x0, x1);
        let cy = vp[1].clamp(y0, y1);
        let r0 = (cx - vp[0]).hypot(cy - vp[1]);
        let corners = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)];
        let r1 = corners
            .iter()
            .map(|&(x, y)| (x - vp[0]).hypot(y - vp[1]))
            .fold(0.0, f64::max);
        let mid = ((y0 + y1) / 2.0 - vp[1]).atan2((x0 + x1) / 2.0 - vp[0]);
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for &(x, y) in &corners {
            let d = crate::color::hue_delta(mid.to_degrees(), (y - vp[1]).atan2(x - vp[0]).to_degrees());
            lo = lo.min(d);
            hi = hi.max(d);
        }
        Self {
            r0,
            r1,
            a0: mid + lo.to_radians(),
            span: (hi - lo).to_radians(),
        }
    }
}

/// Render a spec into an in-memory bundle and its ground truth.
pub fn render_scene(spec: &SynthSpec) -> Result<(SceneBundle, SceneTruth)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let [vx, vy] = spec.vp;
    let background = spec.background.rgb()?;
    let line_rgb = spec.line_color.rgb()?;
    let sky_rgb = spec.sky_color.rgb()?;
    let colors: Vec<[f32; 3]> = spec
        .objects
        .iter()
        .map(|o| o.color.rgb())
        .collect::<Result<_>>()?;
    let sectors: Vec<Option<Sector>> = spec
        .objects
        .iter()
        .map(|o| (!o.off_perspective).then(|| Sector::of_rect(o.rect, spec.vp)))
        .collect();
    let dirs: Vec<(f64, f64)> = line_angles(spec).iter().map(|a| (a.cos(), a.sin())).collect();
    let half_width = spec.line_width / 2.0;
    let max_r = [(0.0, 0.0), (w as f64, 0.0), (0.0, h as f64), (w as f64, h as f64)]
        .iter()
        .map(|&(x, y)| (x - vx).hypot(y - vy))
        .fold(1.0, f64::max);

    let n = w * h;
    let mut image = RgbImage::filled(w, h, background);
    let mut depth = vec![0.0f32; n];
    let mut ids = vec![0u16; n];
    let mut line_mask = vec![false; n];

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (xf, yf) = (x as f64, y as f64);
            if y < spec.sky_rows {
                image.set_pixel(i, sky_rgb);
                depth[i] = f32::INFINITY;
                ids[i] = SKY_ID;
                continue;
            }
            let owner = spec
                .objects
                .iter()
                .enumerate()
                .rev()
                .find(|(k, o)| object_contains(o, spec.vp, sectors[*k].as_ref(), xf, yf))
                .map(|(k, _)| k);
            if let Some(k) = owner {
                image.set_pixel(i, colors[k]);
                depth[i] = spec.objects[k].depth;
                ids[i] = FIRST_OBJECT_ID + k as u16;
                continue;
            }
            let (dx, dy) = (xf - vx, yf - vy);
            let cov = line_coverage(&dirs, half_width, dx, dy);
            let rgb = std::array::from_fn(|c| background[c] * (1.0 - cov) + line_rgb[c] * cov);
            image.set_pixel(i, rgb);
            line_mask[i] = cov >= LINE_PIXEL_COVERAGE;
            let t = (dx.hypot(dy) / max_r).min(1.0) as f32;
            depth[i] = spec.depth_far + (spec.depth_near - spec.depth_far) * t;
            ids[i] = if yf > vy { GROUND_ID } else { WALL_ID };
        }
    }

    let mut elements = vec![Element {
        id: WALL_ID,
        name: "Wall".into(),
        category: "wall".into(),
        material: "concrete".into(),
    }];
    let mut objects = Vec::with_capacity(spec.objects.len());
    for (k, o) in spec.objects.iter().enumerate() {
        let id = FIRST_OBJECT_ID + k as u16;
        let name = o.name.clone().unwrap_or_else(|| format!("object_{k}"));
        let category = o
            .category
            .clone()
            .unwrap_or_else(|| if o.relevant { "crane" } else { "beam" }.into());
        elements.push(Element {
            id,
            name: name.clone(),
            category,
            material: "steel".into(),
        });
        objects.push(ObjectTruth {
            id,
            name,
            relevant: o.relevant,
            off_perspective: o.off_perspective,
            depth: o.depth,
            pixels: PixelRuns::from_mask(ids.iter().map(|&v| v == id)),
        });
    }

    let bundle = SceneBundle::new(
        quantize(&image),
        DepthMap::from_raw(ScenePlane::new(w, h, depth)?)?,
        LabelMask::new(w, h, ids)?,
        ElementCatalog::new(elements)?,
    )?;
    let truth = SceneTruth {
        width: w,
        height: h,
        vp: spec.vp,
        objects,
        line_pixels: PixelRuns::from_mask(line_mask),
    };
    Ok((bundle, truth))
}

/// Render `spec` and write the bundle plus `truth.json` into `out_dir`.
pub fn generate_scene(spec: &SynthSpec, out_dir: &Path) -> Result<SceneTruth> {
    let (bundle, truth) = render_scene(spec)?;
    save_bundle(&bundle, out_dir)?;
    write_json(&out_dir.join(TRUTH_FILE), &truth)?;
    Ok(truth)
}

pub fn load_spec(path: &Path) -> Result<SynthSpec> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let spec: SynthSpec = serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| Error::InvalidConfig(format!("synth spec: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(rect: [f64; 4], color: &str, relevant: bool, off: bool) -> SynthObject {
        SynthObject {
            shape: Shape::Box,
            rect,
            color: ColorSpec::named(color),
            depth: 5.0,
            relevant,
            off_perspective: off,
            name: None,
            category: None,
        }
    }

    #[test]
    fn runs_round_trip() {
        let mask = [false, true, true, false, true, false, false, true, true, true];
        let r = PixelRuns::from_mask(mask);
        assert_eq!(r.runs, vec![[1, 2], [4, 1], [7, 3]]);
        assert_eq!(r.pixel_count, 6);
        assert_eq!(r.to_mask(10), mask.to_vec());
    }

    #[test]
    fn axis_aligned_object_pixel_count() {
        let mut spec = SynthSpec::corridor(64, 48, [32.0, 20.0], 1);
        spec.objects
            .push(boxed([10.0, 30.0, 20.0, 35.0], "red", true, true));
        let (bundle, truth) = render_scene(&spec).unwrap();
        assert_eq!(truth.objects[0].pixels.pixel_count, 50);
        assert_eq!(truth.objects[0].pixels.runs.len(), 5);
        assert_eq!(bundle.labels.ids()[32 * 64 + 12], FIRST_OBJECT_ID);
    }

    #[test]
    fn aligned_object_is_a_sector() {
        let mut spec = SynthSpec::corridor(128, 96, [64.0, 40.0], 1);
        spec.objects
            .push(boxed([90.0, 60.0, 110.0, 80.0], "blue", false, false));
        let (_, truth) = render_scene(&spec).unwrap();
        let mask = truth.objects[0].pixels.to_mask(128 * 96);
        // every pixel lies between the radii and angles spanned by the rect
        let s = Sector::of_rect([90.0, 60.0, 110.0, 80.0], [64.0, 40.0]);
        for i in truth.objects[0].pixels.indices() {
            let (x, y) = ((i % 128) as f64 - 64.0, (i / 128) as f64 - 40.0);
            assert!(x.hypot(y) >= s.r0 && x.hypot(y) < s.r1);
        }
        // rect center is inside
        assert!(mask[70 * 128 + 100]);
        assert!(truth.objects[0].pixels.pixel_count > 200);
    }

    #[test]
    fn labels_and_depth() {
        let mut spec = SynthSpec::corridor(64, 64, [32.0, 30.0], 3);
        spec.sky_rows = 4;
        let (bundle, _) = render_scene(&spec).unwrap();
        let ids = bundle.labels.ids();
        assert_eq!(ids[0], SKY_ID);
        assert_eq!(ids[10 * 64 + 5], WALL_ID);
        assert_eq!(ids[50 * 64 + 5], GROUND_ID);
        let d = bundle.depth.plane();
        // farther from the vanishing point means nearer to the camera
        assert!(d.get(32, 31) > d.get(0, 63));
        assert!(d.get(0, 0) >= d.get(32, 31));
    }

    #[test]
    fn lines_pass_through_vp() {
        let spec = SynthSpec::corridor(96, 96, [48.0, 48.0], 5);
        let (_, truth) = render_scene(&spec).unwrap();
        let mask = truth.line_pixels.to_mask(96 * 96);
        for a in line_angles(&spec) {
            let (x, y) = (48.0 + 30.0 * a.cos(), 48.0 + 30.0 * a.sin());
            assert!(mask[y.round() as usize * 96 + x.round() as usize], "angle {a}");
        }
    }

    #[test]
    fn deterministic() {
        let mut spec = SynthSpec::corridor(80, 60, [40.0, 25.0], 9);
        spec.objects
            .push(boxed([5.0, 40.0, 25.0, 55.0], "orange", false, true));
        let a = render_scene(&spec).unwrap();
        let b = render_scene(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_json_defaults() {
        let spec: SynthSpec = serde_json::from_str(
            r#"{"width": 64, "height": 48, "vp": [30, 20],
                "objects": [{"shape": "bar", "rect": [1, 2, 3, 40], "color": "gray:0.2",
                             "depth": 3.0, "relevant": false, "off_perspective": true}]}"#,
        )
        .unwrap();
        assert_eq!(spec.n_radial_lines, 40);
        assert_eq!(spec.objects[0].color.rgb().unwrap(), [0.2; 3]);
        assert!(ColorSpec::named("mauve").rgb().is_err());
    }
}
