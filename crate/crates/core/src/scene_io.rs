//! Scene bundle loading and all file output.
//!
//! A bundle directory holds `image.png` (8-bit RGB), `depth.pfm` (one-channel
//! float, meters, `+inf` for "no geometry"), `labels.png` (16-bit element IDs)
//! and `elements.json`.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma, Rgb, RgbImage as Rgb8Image};

use crate::attention::ConspicuitySet;
use crate::enhancer::EnhancementReport;
use crate::error::{Error, Result};
use crate::ontology::{ElementCatalog, SKY_ID};
use crate::raster::{RgbImage, ScenePlane};
use crate::saliency;

pub const IMAGE_FILE: &str = "image.png";
pub const DEPTH_FILE: &str = "depth.pfm";
pub const LABELS_FILE: &str = "labels.png";
pub const CATALOG_FILE: &str = "elements.json";

/// Names of the files written by [`save_bundle_outputs`].
pub const OUTPUT_FILES: [&str; 7] = [
    "enhanced.png",
    "saliency.png",
    "conspicuity_intensity.png",
    "conspicuity_color.png",
    "conspicuity_orientation.png",
    "conspicuity_depth.png",
    "report.json",
];

/// Depth in meters. Samples carrying no geometry have been replaced by
/// `far_fill` (twice the farthest finite depth) so every sample is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    plane: ScenePlane,
    far_fill: f32,
}

impl DepthMap {
    /// Build from raw samples, resolving `+inf` sentinels. Negative or NaN
    /// samples are rejected.
    pub fn from_raw(plane: ScenePlane) -> Result<Self> {
        let mut max_finite = f32::NEG_INFINITY;
        for &v in plane.data() {
            if v.is_nan() || v == f32::NEG_INFINITY || v < 0.0 {
                return Err(Error::MalformedDepth(format!("invalid depth sample {v}")));
            }
            if v.is_finite() {
                max_finite = max_finite.max(v);
            }
        }
        let far_fill = if max_finite > 0.0 { max_finite * 2.0 } else { 1.0 };
        let plane = plane.map(|v| if v.is_finite() { v } else { far_fill });
        Ok(Self { plane, far_fill })
    }

    pub fn plane(&self) -> &ScenePlane {
        &self.plane
    }

    pub fn far_fill(&self) -> f32 {
        self.far_fill
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }

    /// Same geometry at a different metric scale.
    pub fn scaled(&self, k: f32) -> Self {
        Self {
            plane: self.plane.map(|v| v * k),
            far_fill: self.far_fill * k,
        }
    }

    fn fill_sky(&mut self, labels: &LabelMask) {
        let far = self.far_fill;
        for (d, &id) in self.plane.data_mut().iter_mut().zip(labels.ids()) {
            if id == SKY_ID {
                *d = far;
            }
        }
    }
}

/// Per-pixel element IDs. 0 is sky, 1 is ground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    ids: Vec<u16>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, ids: Vec<u16>) -> Result<Self> {
        if ids.len() != width * height {
            return Err(Error::MalformedLabels(format!(
                "{} ids for a {width}x{height} mask",
                ids.len()
            )));
        }
        Ok(Self { width, height, ids })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn ids(&self) -> &[u16] {
        &self.ids
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneBundle {
    pub image: RgbImage,
    pub depth: DepthMap,
    pub labels: LabelMask,
    pub catalog: ElementCatalog,
}

fn check_dims(what: &str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch {
            what: what.into(),
            got_w: got.0,
            got_h: got.1,
            want_w: want.0,
            want_h: want.1,
        });
    }
    Ok(())
}

impl SceneBundle {
    /// Validate alignment and catalog coverage. Sky pixels get the far depth.
    pub fn new(
        image: RgbImage,
        mut depth: DepthMap,
        labels: LabelMask,
        catalog: ElementCatalog,
    ) -> Result<Self> {
        let dims = image.dims();
        check_dims(DEPTH_FILE, depth.dims(), dims)?;
        check_dims(LABELS_FILE, labels.dims(), dims)?;
        catalog.validate()?;
        let mut checked = std::collections::BTreeSet::new();
        for &id in labels.ids() {
            if id > crate::ontology::GROUND_ID && checked.insert(id) && !catalog.contains(id) {
                return Err(Error::UnknownElementId(id));
            }
        }
        depth.fill_sky(&labels);
        Ok(Self {
            image,
            depth,
            labels,
            catalog,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.image.dims()
    }

    /// Same scene with a different image, e.g. after recoloring.
    pub fn with_image(&self, image: RgbImage) -> Self {
        Self {
            image,
            depth: self.depth.clone(),
            labels: self.labels.clone(),
            catalog: self.catalog.clone(),
        }
    }
}

fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingFile(path.to_path_buf()))
    }
}

pub fn load_bundle(dir: &Path) -> Result<SceneBundle> {
    let paths = [IMAGE_FILE, DEPTH_FILE, LABELS_FILE, CATALOG_FILE].map(|f| dir.join(f));
    for p in &paths {
        require(p)?;
    }
    let image = load_rgb(&paths[0])?;
    let depth = DepthMap::from_raw(read_pfm(&fs::read(&paths[1])?)?)?;
    let labels = load_labels(&paths[2])?;
    let catalog = parse_catalog(&fs::read_to_string(&paths[3])?)?;
    SceneBundle::new(image, depth, labels, catalog)
}

pub fn parse_catalog(json: &str) -> Result<ElementCatalog> {
    let catalog: ElementCatalog =
        serde_json::from_str(json).map_err(|e| Error::MalformedCatalog(e.to_string()))?;
    catalog.validate()?;
    Ok(catalog)
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut out = RgbImage::filled(w, h, [0.0; 3]);
    for (i, px) in img.pixels().enumerate() {
        out.set_pixel(i, px.0.map(|c| c as f32 / 255.0));
    }
    Ok(out)
}

pub fn load_labels(path: &Path) -> Result<LabelMask> {
    let (w, h, ids) = match image::open(path)? {
        DynamicImage::ImageLuma16(buf) => (buf.width(), buf.height(), buf.into_raw()),
        DynamicImage::ImageLuma8(buf) => (
            buf.width(),
            buf.height(),
            buf.into_raw().into_iter().map(u16::from).collect(),
        ),
        other => {
            return Err(Error::MalformedLabels(format!(
                "{} must be grayscale, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    LabelMask::new(w as usize, h as usize, ids)
}

/// Load an 8-bit grayscale PNG as samples in [0, 1].
pub fn load_plane(path: &Path) -> Result<ScenePlane> {
    let img = image::open(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    ScenePlane::new(
        w,
        h,
        img.into_raw().into_iter().map(|v| v as f32 / 255.0).collect(),
    )
}

/// Parse a one-channel PFM. Rows are stored bottom to top.
pub fn read_pfm(bytes: &[u8]) -> Result<ScenePlane> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedDepth("truncated PFM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    if magic != "Pf" {
        return Err(Error::MalformedDepth(format!(
            "expected single-channel 'Pf' magic, got '{magic}'"
        )));
    }
    let parse_dim = |s: String| {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedDepth(format!("bad PFM dimension '{s}'")))
    };
    let w = parse_dim(token()?)?;
    let h = parse_dim(token()?)?;
    let scale_tok = token()?;
    let scale: f32 = scale_tok
        .parse()
        .map_err(|_| Error::MalformedDepth(format!("bad PFM scale '{scale_tok}'")))?;
    // exactly one whitespace byte separates the header from the data
    let data_start = pos + 1;
    let need = w * h * 4;
    if bytes.len() < data_start + need {
        return Err(Error::MalformedDepth(format!(
            "PFM data truncated: {} bytes for {w}x{h}",
            bytes.len().saturating_sub(data_start)
        )));
    }
    let little = scale < 0.0;
    let raw = &bytes[data_start..data_start + need];
    let mut data = vec![0.0f32; w * h];
    for (file_row, chunk) in raw.chunks_exact(w * 4).enumerate() {
        let y = h - 1 - file_row;
        for (x, b) in chunk.chunks_exact(4).enumerate() {
            let b = [b[0], b[1], b[2], b[3]];
            data[y * w + x] = if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            };
        }
    }
    ScenePlane::new(w, h, data)
}

/// Little-endian PFM with scale line `-1.0`.
pub fn write_pfm(plane: &ScenePlane) -> Vec<u8> {
    let (w, h) = plane.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for &v in plane.row(y) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

#[inline]
fn to_byte(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Write an 8-bit grayscale PNG. With `normalize`, min maps to 0 and max to 255
/// (constant planes to 0); otherwise samples are taken as [0, 1].
pub fn save_plane(plane: &ScenePlane, path: &Path, normalize: bool) -> Result<()> {
    let src = if normalize {
        plane.rescaled()
    } else {
        plane.clone()
    };
    let bytes: Vec<u8> = src.data().iter().map(|&v| to_byte(v)).collect();
    let img: GrayImage = ImageBuffer::from_raw(plane.width() as u32, plane.height() as u32, bytes)
        .expect("buffer length matches plane");
    img.save(path)?;
    Ok(())
}

pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let mut buf = Rgb8Image::new(img.width() as u32, img.height() as u32);
    for (i, px) in buf.pixels_mut().enumerate() {
        *px = Rgb(img.pixel(i).map(to_byte));
    }
    buf.save(path)?;
    Ok(())
}

pub fn save_labels(labels: &LabelMask, path: &Path) -> Result<()> {
    let (w, h) = labels.dims();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(w as u32, h as u32, labels.ids().to_vec()).expect("length matches");
    img.save(path)?;
    Ok(())
}

/// 8-bit quantization, as the image would be after a save/load round trip.
pub fn quantize(img: &RgbImage) -> RgbImage {
    let mut out = img.clone();
    for i in 0..img.pixel_count() {
        out.set_pixel(i, img.pixel(i).map(|c| to_byte(c) as f32 / 255.0));
    }
    out
}

/// Write a bundle directory. Sky pixels are stored with `+inf` depth.
pub fn save_bundle(bundle: &SceneBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    save_rgb(&bundle.image, &dir.join(IMAGE_FILE))?;
    let raw_depth = {
        let mut d = bundle.depth.plane().clone();
        for (v, &id) in d.data_mut().iter_mut().zip(bundle.labels.ids()) {
            if id == SKY_ID {
                *v = f32::INFINITY;
            }
        }
        d
    };
    fs::write(dir.join(DEPTH_FILE), write_pfm(&raw_depth))?;
    save_labels(&bundle.labels, &dir.join(LABELS_FILE))?;
    write_json(&dir.join(CATALOG_FILE), &bundle.catalog)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Write the enhanced image, saliency map, four conspicuity maps and report.
pub fn save_bundle_outputs(
    report: &EnhancementReport,
    enhanced: &RgbImage,
    maps: &ConspicuitySet,
    out_dir: &Path,
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let sal = saliency::combine(maps)?;
    save_rgb(enhanced, &out_dir.join(OUTPUT_FILES[0]))?;
    save_plane(sal.plane(), &out_dir.join(OUTPUT_FILES[1]), false)?;
    save_plane(&maps.intensity, &out_dir.join(OUTPUT_FILES[2]), false)?;
    save_plane(&maps.color, &out_dir.join(OUTPUT_FILES[3]), false)?;
    save_plane(&maps.orientation, &out_dir.join(OUTPUT_FILES[4]), false)?;
    save_plane(&maps.depth, &out_dir.join(OUTPUT_FILES[5]), false)?;
    write_json(&out_dir.join(OUTPUT_FILES[6]), &report.to_json())?;
    Ok(())
}
