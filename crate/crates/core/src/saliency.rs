//! Final saliency map from the four conspicuity channels.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::attention::{
    color_conspicuity, depth_conspicuity, intensity_conspicuity, normalize_map, ConspicuitySet,
};
use crate::error::{Error, Result};
use crate::perspective::{
    detect_vanishing_point, gabor_orientation_conspicuity, perspective_orientation_on_grid, PolarGrid,
    VanishingPoint,
};
use crate::raster::{RgbImage, ScenePlane};
use crate::scene_io::SceneBundle;

/// Which orientation channel feeds the saliency map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Contrast relative to the vanishing point's polar frame.
    #[default]
    Perspective,
    /// Fixed 0°/45°/90°/135° Gabor bank.
    Baseline,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perspective" => Ok(Mode::Perspective),
            "baseline" => Ok(Mode::Baseline),
            other => Err(Error::InvalidConfig(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    plane: ScenePlane,
}

impl SaliencyMap {
    /// Wrap a plane already in [0, 1].
    pub fn from_plane(plane: ScenePlane) -> Self {
        Self { plane }
    }

    pub fn plane(&self) -> &ScenePlane {
        &self.plane
    }

    pub fn into_plane(self) -> ScenePlane {
        self.plane
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }
}

/// Equal-weight mean of the normalized channels, scaled so the peak is 1.
pub fn combine(maps: &ConspicuitySet) -> Result<SaliencyMap> {
    let dims = maps.intensity.dims();
    for (name, m) in
        ["color", "orientation", "depth"]
            .iter()
            .zip([&maps.color, &maps.orientation, &maps.depth])
    {
        if m.dims() != dims {
            return Err(Error::DimensionMismatch {
                what: format!("{name} conspicuity"),
                got_w: m.width(),
                got_h: m.height(),
                want_w: dims.0,
                want_h: dims.1,
            });
        }
    }
    let mut acc = ScenePlane::zeros(dims.0, dims.1);
    for m in maps.maps() {
        acc.add_assign(&normalize_map(m));
    }
    let mean = acc.map(|v| v / 4.0);
    Ok(SaliencyMap {
        plane: mean.scaled_to_unit_max(),
    })
}

/// Wall-clock spent per stage, accumulated across calls.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub vanishing_point: Duration,
    pub channels: Duration,
    pub combine: Duration,
    pub recolor: Duration,
}

/// Per-scene inputs to the saliency model that do not depend on surface
/// colors: the vanishing point, its polar grid and the depth channel.
/// Recoloring changes none of them, so an enhancement loop computes them once.
#[derive(Debug, Clone)]
pub struct SceneContext {
    pub mode: Mode,
    pub vp: VanishingPoint,
    pub polar: Option<PolarGrid>,
    pub depth_map: ScenePlane,
}

impl SceneContext {
    pub fn new(bundle: &SceneBundle, mode: Mode, times: &mut StageTimes) -> Result<Self> {
        let t = Instant::now();
        let vp = match mode {
            Mode::Perspective => detect_vanishing_point(&bundle.image)?,
            Mode::Baseline => VanishingPoint::not_found(),
        };
        let (w, h) = bundle.dims();
        let polar = PolarGrid::new(w, h, &vp).ok();
        times.vanishing_point += t.elapsed();
        let t = Instant::now();
        let depth_map = depth_conspicuity(&bundle.depth);
        times.channels += t.elapsed();
        Ok(Self {
            mode,
            vp,
            polar,
            depth_map,
        })
    }

    pub fn conspicuity(&self, img: &RgbImage) -> ConspicuitySet {
        let ((intensity, color), orientation) = rayon::join(
            || rayon::join(|| intensity_conspicuity(img), || color_conspicuity(img)),
            || match &self.polar {
                Some(grid) => perspective_orientation_on_grid(img, grid),
                None => gabor_orientation_conspicuity(img),
            },
        );
        ConspicuitySet {
            intensity,
            color,
            orientation,
            depth: self.depth_map.clone(),
        }
    }

    pub fn saliency(&self, img: &RgbImage, times: &mut StageTimes) -> Result<(SaliencyMap, ConspicuitySet)> {
        let t = Instant::now();
        let maps = self.conspicuity(img);
        times.channels += t.elapsed();
        let t = Instant::now();
        let sal = combine(&maps)?;
        times.combine += t.elapsed();
        Ok((sal, maps))
    }
}

pub fn compute_saliency(bundle: &SceneBundle, mode: Mode) -> Result<(SaliencyMap, ConspicuitySet)> {
    let mut times = StageTimes::default();
    let ctx = SceneContext::new(bundle, mode, &mut times)?;
    ctx.saliency(&bundle.image, &mut times)
}
