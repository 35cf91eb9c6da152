//! Saliency-driven recoloring.
//!
//! The gain `ge = S_r / (S_r + S_i)` compares the mean saliency of relevant
//! and irrelevant pixels. While `ge < 0.5`, irrelevant pixels are turned toward
//! the hue opposite to the relevant region's mean color, keeping their HSV
//! value, and saliency is recomputed.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::attention::ConspicuitySet;
use crate::color::{circular_mean, hsv_to_rgb, hue_distance, hue_lerp, rgb_to_hsv, Hsv};
use crate::error::{Error, Result};
use crate::ontology::{classify, relevance_masks, PixelSet, Profile};
use crate::raster::RgbImage;
use crate::saliency::{Mode, SaliencyMap, SceneContext, StageTimes};
use crate::scene_io::{quantize, SceneBundle};

/// Dominance threshold on `ge`.
pub const MAJORITY: f64 = 0.5;
pub const DEFAULT_MAX_ITERS: usize = 10;
/// Iteration stops as stalled when `ge` moves less than this.
pub const STALL_EPSILON: f64 = 1e-3;
/// Pixels below this saturation count as black, white or gray.
pub const ACHROMATIC_SAT: f64 = 0.1;
/// Saturation achromatic irrelevant pixels are pulled toward.
pub const INJECTED_SAT: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub s_r: f64,
    pub s_i: f64,
    pub ge: f64,
    /// Circular mean hue of chromatic relevant pixels; `None` if there are none.
    pub mean_hue_r: Option<f64>,
    pub mean_sat_r: f64,
    pub mean_val_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetColor {
    Red,
    Yellow,
    Green,
    Blue,
}

impl TargetColor {
    pub const ALL: [TargetColor; 4] = [Self::Red, Self::Yellow, Self::Green, Self::Blue];

    pub fn hue(self) -> f64 {
        match self {
            Self::Red => 0.0,
            Self::Yellow => 60.0,
            Self::Green => 120.0,
            Self::Blue => 240.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Red => "Red",
            Self::Yellow => "Yellow",
            Self::Green => "Green",
            Self::Blue => "Blue",
        }
    }

    /// The contrasting color used when the relevant region has this color.
    pub fn opposite(self) -> Self {
        match self {
            Self::Red => Self::Green,
            Self::Yellow => Self::Blue,
            Self::Green => Self::Red,
            Self::Blue => Self::Yellow,
        }
    }

    /// Nearest named hue by circular distance; ties go to the smaller hue.
    pub fn quantize(hue: f64) -> Self {
        let mut best = Self::Red;
        let mut best_d = f64::INFINITY;
        for c in Self::ALL {
            let d = hue_distance(hue, c.hue());
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        best
    }
}

impl std::fmt::Display for TargetColor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub ge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementReport {
    pub profile: String,
    pub target: TargetColor,
    /// `ge` before each recolor pass, then the final value.
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// True when the loop stopped because `ge` no longer moved.
    pub stalled: bool,
}

/// `report.json` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub profile: String,
    pub target_color: String,
    pub converged: bool,
    pub iterations: Vec<IterationRecord>,
}

impl EnhancementReport {
    pub fn passes(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    pub fn final_ge(&self) -> f64 {
        self.iterations.last().map_or(0.0, |r| r.ge)
    }

    pub fn ge_trajectory(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.ge).collect()
    }

    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            profile: self.profile.clone(),
            target_color: self.target.name().to_string(),
            converged: self.converged,
            iterations: self.iterations.clone(),
        }
    }
}

fn mean_over(values: &[f32], set: &PixelSet) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    set.iter().map(|i| values[i] as f64).sum::<f64>() / set.len() as f64
}

pub fn region_stats(
    saliency: &SaliencyMap,
    img: &RgbImage,
    relevant: &PixelSet,
    irrelevant: &PixelSet,
) -> Result<RegionStats> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevantRegion);
    }
    let sal = saliency.plane().data();
    let s_r = mean_over(sal, relevant);
    let s_i = mean_over(sal, irrelevant);
    let ge = if s_r + s_i > 0.0 { s_r / (s_r + s_i) } else { 0.0 };

    let hsv: Vec<Hsv> = relevant.iter().map(|i| rgb_to_hsv(img.pixel(i))).collect();
    let n = hsv.len() as f64;
    let mean_hue_r = circular_mean(hsv.iter().filter(|c| c.s >= ACHROMATIC_SAT).map(|c| c.h));
    Ok(RegionStats {
        s_r,
        s_i,
        ge,
        mean_hue_r,
        mean_sat_r: hsv.iter().map(|c| c.s).sum::<f64>() / n,
        mean_val_r: hsv.iter().map(|c| c.v).sum::<f64>() / n,
    })
}

/// Opposite of the relevant region's quantized mean hue; green when the region
/// has no chromatic pixel.
pub fn pick_target(stats: &RegionStats) -> TargetColor {
    match stats.mean_hue_r {
        Some(h) => TargetColor::quantize(h).opposite(),
        None => TargetColor::Green,
    }
}

/// One blend of irrelevant pixels toward `target` with weight `ge`, in hue.
/// Achromatic pixels take the target hue and gain saturation toward 0.8.
/// HSV value is kept; relevant pixels are untouched.
pub fn recolor_pass(img: &RgbImage, irrelevant: &PixelSet, target: TargetColor, ge: f64) -> RgbImage {
    let mut out = img.clone();
    if ge <= 0.0 {
        return out;
    }
    let ge = ge.min(1.0);
    let t = target.hue();
    for i in irrelevant.iter() {
        let c = rgb_to_hsv(img.pixel(i));
        let moved = if c.s < ACHROMATIC_SAT {
            Hsv {
                h: t,
                s: c.s + ge * (INJECTED_SAT - c.s),
                v: c.v,
            }
        } else {
            Hsv {
                h: hue_lerp(c.h, t, ge),
                ..c
            }
        };
        out.set_pixel(i, hsv_to_rgb(moved));
    }
    out
}

/// Result of [`enhance`].
#[derive(Debug, Clone)]
pub struct Enhancement {
    pub image: RgbImage,
    pub report: EnhancementReport,
    pub maps: ConspicuitySet,
    pub saliency: SaliencyMap,
    pub relevant: PixelSet,
    pub irrelevant: PixelSet,
}

pub fn enhance(bundle: &SceneBundle, profile: &Profile, mode: Mode, max_iters: usize) -> Result<Enhancement> {
    enhance_timed(bundle, profile, mode, max_iters, &mut StageTimes::default())
}

/// [`enhance`] with per-stage wall-clock accounting.
pub fn enhance_timed(
    bundle: &SceneBundle,
    profile: &Profile,
    mode: Mode,
    max_iters: usize,
    times: &mut StageTimes,
) -> Result<Enhancement> {
    if max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    let relevance = classify(&bundle.catalog, profile);
    let (relevant, irrelevant) = relevance_masks(&bundle.labels, &relevance)?;
    if relevant.is_empty() {
        return Err(Error::EmptyRelevantRegion);
    }
    let ctx = SceneContext::new(bundle, mode, times)?;
    let mut image = bundle.image.clone();
    let (mut saliency, mut maps) = ctx.saliency(&image, times)?;
    let stats = region_stats(&saliency, &image, &relevant, &irrelevant)?;
    let target = pick_target(&stats);
    let mut ge = stats.ge;
    let mut iterations = vec![IterationRecord { index: 0, ge }];
    let mut converged = ge >= MAJORITY;
    let mut stalled = false;

    if !converged {
        for k in 1..=max_iters {
            let t = Instant::now();
            let recolored = recolor_pass(&image, &irrelevant, target, ge);
            image = requantize(&recolored, &image, &irrelevant);
            times.recolor += t.elapsed();

            (saliency, maps) = ctx.saliency(&image, times)?;
            let next = region_stats(&saliency, &image, &relevant, &irrelevant)?.ge;
            iterations.push(IterationRecord { index: k, ge: next });
            if next >= MAJORITY {
                converged = true;
                break;
            }
            if (next - ge).abs() < STALL_EPSILON {
                stalled = true;
                break;
            }
            ge = next;
        }
    }

    Ok(Enhancement {
        image,
        report: EnhancementReport {
            profile: profile.name.clone(),
            target,
            iterations,
            converged,
            stalled,
        },
        maps,
        saliency,
        relevant,
        irrelevant,
    })
}

/// Snap recolored pixels to 8-bit levels so the loop sees exactly the image
/// that will be written; pixels outside `changed` keep their original bits.
fn requantize(recolored: &RgbImage, previous: &RgbImage, changed: &PixelSet) -> RgbImage {
    let snapped = quantize(recolored);
    let mut out = previous.clone();
    for i in changed.iter() {
        out.set_pixel(i, snapped.pixel(i));
    }
    out
}
