//! Polar resampling around a vanishing point. Rows are angles, columns radii.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::raster::ScenePlane;

use super::VanishingPoint;

pub const ANGULAR_BINS: usize = 720;

#[derive(Debug, Clone, PartialEq)]
pub struct PolarFrame {
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub origin: VanishingPoint,
    /// `angular_bins` rows × `radial_bins` columns; column 0 is the origin.
    pub plane: ScenePlane,
    /// False where the sample ray lies outside the source image.
    pub valid: Vec<bool>,
}

impl PolarFrame {
    /// Same geometry with different samples.
    pub fn with_plane(&self, plane: ScenePlane) -> Self {
        assert_eq!(plane.dims(), self.plane.dims());
        Self {
            plane,
            ..self.clone()
        }
    }

    pub fn angle_of_row(&self, row: usize) -> f64 {
        TAU * row as f64 / self.angular_bins as f64
    }
}

/// Radial bins needed to reach every image corner from `(x, y)`.
pub fn radial_extent(width: usize, height: usize, x: f64, y: f64) -> usize {
    let (w, h) = (width as f64, height as f64);
    [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)]
        .iter()
        .map(|&(cx, cy)| (cx - x).hypot(cy - y))
        .fold(0.0, f64::max)
        .ceil() as usize
}

/// Sampling geometry of the polar frame around one vanishing point for one
/// image size. Depends only on the VP, so a scene builds it once and reuses
/// it for every recolored image.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub width: usize,
    pub height: usize,
    pub origin: VanishingPoint,
    pub radial_bins: usize,
    /// Source coordinates of every frame sample; `None` off the image.
    coords: Vec<Option<(f32, f32)>>,
    valid: Vec<bool>,
    /// Per image pixel: four frame indices and weights renormalized over the
    /// valid ones. All-zero weights when no neighbor is valid.
    taps: Vec<[(u32, f32); 4]>,
}

impl PolarGrid {
    pub fn new(width: usize, height: usize, vp: &VanishingPoint) -> Result<Self> {
        if !vp.found {
            return Err(Error::NoVanishingPoint);
        }
        let radial_bins = radial_extent(width, height, vp.x, vp.y).max(1);
        let mut coords = Vec::with_capacity(ANGULAR_BINS * radial_bins);
        for a in 0..ANGULAR_BINS {
            let theta = TAU * a as f64 / ANGULAR_BINS as f64;
            let (s, c) = theta.sin_cos();
            for r in 0..radial_bins {
                coords.push(within_pixel(
                    width,
                    height,
                    vp.x + r as f64 * c,
                    vp.y + r as f64 * s,
                ));
            }
        }
        let valid: Vec<bool> = coords.iter().map(Option::is_some).collect();
        let taps = unproject_taps(&valid, radial_bins, ANGULAR_BINS, vp, width, height);
        Ok(Self {
            width,
            height,
            origin: *vp,
            radial_bins,
            coords,
            valid,
            taps,
        })
    }

    pub fn project(&self, plane: &ScenePlane) -> PolarFrame {
        assert_eq!(plane.dims(), (self.width, self.height));
        let data = self
            .coords
            .iter()
            .map(|c| c.and_then(|(x, y)| plane.sample(x, y)).unwrap_or(0.0))
            .collect();
        PolarFrame {
            radial_bins: self.radial_bins,
            angular_bins: ANGULAR_BINS,
            origin: self.origin,
            plane: ScenePlane::new(self.radial_bins, ANGULAR_BINS, data).expect("sized"),
            valid: self.valid.clone(),
        }
    }

    /// Back onto the image; `frame` must share this grid's geometry.
    pub fn unproject(&self, frame: &PolarFrame) -> ScenePlane {
        assert_eq!(frame.plane.dims(), (self.radial_bins, ANGULAR_BINS));
        apply_taps(&self.taps, frame.plane.data(), self.width, self.height)
    }
}

pub fn polar_project(plane: &ScenePlane, vp: &VanishingPoint) -> Result<PolarFrame> {
    let (w, h) = plane.dims();
    Ok(PolarGrid::new(w, h, vp)?.project(plane))
}

/// Clamped sample position for points up to half a pixel outside the outer
/// pixel centers (they still lie on the image).
fn within_pixel(width: usize, height: usize, x: f64, y: f64) -> Option<(f32, f32)> {
    let (w, h) = (width as f64, height as f64);
    if !(x >= -0.5 && y >= -0.5 && x <= w - 0.5 && y <= h - 0.5) {
        return None;
    }
    Some((x.clamp(0.0, w - 1.0) as f32, y.clamp(0.0, h - 1.0) as f32))
}

fn unproject_taps(
    valid: &[bool],
    rb: usize,
    ab: usize,
    vp: &VanishingPoint,
    width: usize,
    height: usize,
) -> Vec<[(u32, f32); 4]> {
    let bins_per_rad = ab as f64 / TAU;
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let dx = x as f64 - vp.x;
            let dy = y as f64 - vp.y;
            let r = dx.hypot(dy);
            let mut taps = [(0u32, 0.0f32); 4];
            if r <= (rb - 1) as f64 {
                let a = dy.atan2(dx).rem_euclid(TAU) * bins_per_rad;
                let a0f = a.floor();
                let fa = a - a0f;
                let a0 = (a0f as usize) % ab;
                let a1 = (a0 + 1) % ab;
                let r0 = r.floor() as usize;
                let r1 = (r0 + 1).min(rb - 1);
                let fr = r - r0 as f64;
                let raw = [
                    (a0 * rb + r0, (1.0 - fa) * (1.0 - fr)),
                    (a0 * rb + r1, (1.0 - fa) * fr),
                    (a1 * rb + r0, fa * (1.0 - fr)),
                    (a1 * rb + r1, fa * fr),
                ];
                let wsum: f64 = raw.iter().filter(|(i, _)| valid[*i]).map(|(_, w)| w).sum();
                if wsum > 1e-9 {
                    for (t, (i, w)) in taps.iter_mut().zip(raw) {
                        *t = (i as u32, if valid[i] { (w / wsum) as f32 } else { 0.0 });
                    }
                }
            }
            out.push(taps);
        }
    }
    out
}

fn apply_taps(taps: &[[(u32, f32); 4]], data: &[f32], width: usize, height: usize) -> ScenePlane {
    let out = taps
        .iter()
        .map(|t| t.iter().map(|&(i, w)| w * data[i as usize]).sum())
        .collect();
    ScenePlane::new(width, height, out).expect("sized")
}

/// Resample a polar frame back onto a `width`×`height` image. Bilinear over
/// the valid neighbors; pixels with no valid neighbor are 0.
pub fn polar_unproject(frame: &PolarFrame, width: usize, height: usize) -> ScenePlane {
    let taps = unproject_taps(
        &frame.valid,
        frame.radial_bins,
        frame.angular_bins,
        &frame.origin,
        width,
        height,
    );
    apply_taps(&taps, frame.plane.data(), width, height)
}
