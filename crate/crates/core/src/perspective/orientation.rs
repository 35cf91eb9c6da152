//! Orientation conspicuity: the perspective-relative channel computed in the
//! polar frame of the vanishing point, and the fixed-angle Gabor baseline.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::attention::{level_count, normalize_map, BINOMIAL_5, NOISE_FLOOR, SCALE_PAIRS};
use crate::raster::{RgbImage, ScenePlane};

use super::polar::{PolarFrame, PolarGrid};
use super::VanishingPoint;

/// One level of a pyramid built along the radius axis only. Each sample
/// carries a coverage weight so rays leaving the image do not leak zeros.
struct RadialLevel {
    len: usize,
    rows: usize,
    value: Vec<f32>,
    weight: Vec<f32>,
}

impl RadialLevel {
    fn from_frame(frame: &PolarFrame) -> Self {
        Self {
            len: frame.radial_bins,
            rows: frame.angular_bins,
            value: frame.plane.data().to_vec(),
            weight: frame.valid.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
        }
    }

    fn next(&self) -> Self {
        let n = self.len;
        let nn = (n / 2).max(1);
        let mut value = vec![0.0f32; nn * self.rows];
        let mut weight = vec![0.0f32; nn * self.rows];
        let mut vw = vec![0.0f32; n];
        let mut ww = vec![0.0f32; n];
        for row in 0..self.rows {
            let v = &self.value[row * n..(row + 1) * n];
            let w = &self.weight[row * n..(row + 1) * n];
            for i in 0..n {
                let (mut a, mut b) = (0.0, 0.0);
                if i >= 2 && i + 2 < n {
                    for (k, &t) in BINOMIAL_5.iter().enumerate() {
                        let j = i + k - 2;
                        a += t * v[j] * w[j];
                        b += t * w[j];
                    }
                } else {
                    for (k, &t) in BINOMIAL_5.iter().enumerate() {
                        let j = (i as isize + k as isize - 2).clamp(0, n as isize - 1) as usize;
                        a += t * v[j] * w[j];
                        b += t * w[j];
                    }
                }
                vw[i] = a;
                ww[i] = b;
            }
            for i in 0..nn {
                let i0 = (2 * i).min(n - 1);
                let i1 = (i0 + 1).min(n - 1);
                let wsum = 0.5 * (ww[i0] + ww[i1]);
                let vsum = 0.5 * (vw[i0] + vw[i1]);
                weight[row * nn + i] = wsum;
                value[row * nn + i] = if wsum > 1e-6 { vsum / wsum } else { 0.0 };
            }
        }
        Self {
            len: nn,
            rows: self.rows,
            value,
            weight,
        }
    }

    /// Weighted linear resample of one row to `out_len` samples.
    fn upsample_row(&self, row: usize, out_len: usize, factor: f32, out_v: &mut [f32], out_w: &mut [f32]) {
        let n = self.len;
        let v = &self.value[row * n..(row + 1) * n];
        let w = &self.weight[row * n..(row + 1) * n];
        for i in 0..out_len {
            let p = ((i as f32 + 0.5) / factor - 0.5).clamp(0.0, (n - 1) as f32);
            let i0 = p.floor() as usize;
            let i1 = (i0 + 1).min(n - 1);
            let f = p - i0 as f32;
            let ww = w[i0] * (1.0 - f) + w[i1] * f;
            let vw = v[i0] * w[i0] * (1.0 - f) + v[i1] * w[i1] * f;
            out_w[i] = ww;
            out_v[i] = if ww > 1e-6 { vw / ww } else { 0.0 };
        }
    }
}

/// Linear resample along x only, half-pixel aligned.
fn upsample_x(plane: &ScenePlane, out_w: usize, factor: f32) -> ScenePlane {
    let (w, h) = plane.dims();
    let taps: Vec<(usize, usize, f32)> = (0..out_w)
        .map(|i| {
            let p = ((i as f32 + 0.5) / factor - 0.5).clamp(0.0, (w - 1) as f32);
            let i0 = p.floor() as usize;
            (i0, (i0 + 1).min(w - 1), p - i0 as f32)
        })
        .collect();
    let mut data = Vec::with_capacity(out_w * h);
    for y in 0..h {
        let row = plane.row(y);
        data.extend(taps.iter().map(|&(a, b, f)| row[a] + (row[b] - row[a]) * f));
    }
    ScenePlane::new(out_w, h, data).expect("sized")
}

/// Contrast along the radius axis of a polar frame: for every ray, the
/// across-scale center-surround difference of a pyramid built along that ray,
/// normalized and summed over the six scale pairs. Structure that runs along
/// rays through the origin is constant along radius and gives no response.
pub fn radial_contrast(frame: &PolarFrame) -> ScenePlane {
    let base = RadialLevel::from_frame(frame);
    let n_levels = level_count(frame.radial_bins);
    let mut levels = vec![base];
    for k in 1..n_levels {
        let next = levels[k - 1].next();
        levels.push(next);
    }
    let rows = frame.angular_bins;
    let cs_map = |c: usize, s: usize| {
        let center = &levels[c];
        let surround = &levels[s];
        let n = center.len;
        let factor = (1u32 << (s - c)) as f32;
        let mut data = vec![0.0f32; n * rows];
        let mut up_v = vec![0.0f32; n];
        let mut up_w = vec![0.0f32; n];
        for row in 0..rows {
            surround.upsample_row(row, n, factor, &mut up_v, &mut up_w);
            for i in 0..n {
                let k = row * n + i;
                if center.weight[k] > 0.5 && up_w[i] > 1e-3 {
                    data[k] = (up_v[i] - center.value[k]).abs();
                }
            }
        }
        normalize_map(&ScenePlane::new(n, rows, data).expect("sized"))
    };
    // pairs sharing a center level are summed there; upsampling is linear
    let maps: Vec<ScenePlane> = (2..=4usize)
        .into_par_iter()
        .filter_map(|c| {
            let mut at_c: Option<ScenePlane> = None;
            for &(_, s) in SCALE_PAIRS.iter().filter(|&&(pc, s)| pc == c && s < n_levels) {
                let m = cs_map(c, s);
                match at_c.as_mut() {
                    Some(a) => a.add_assign(&m),
                    None => at_c = Some(m),
                }
            }
            at_c.map(|a| upsample_x(&a, frame.radial_bins, (1u32 << c) as f32))
        })
        .collect();
    let mut acc = ScenePlane::zeros(frame.radial_bins, rows);
    for m in &maps {
        acc.add_assign(m);
    }
    for (v, &ok) in acc.data_mut().iter_mut().zip(&frame.valid) {
        if !ok {
            *v = 0.0;
        }
    }
    acc
}

/// Radial-contrast map in the polar frame, before unprojection.
pub fn perspective_polar_map(img: &RgbImage, vp: &VanishingPoint) -> Option<PolarFrame> {
    let grid = PolarGrid::new(img.width(), img.height(), vp).ok()?;
    Some(polar_map_on_grid(img, &grid))
}

fn polar_map_on_grid(img: &RgbImage, grid: &PolarGrid) -> PolarFrame {
    let frame = grid.project(&img.intensity());
    let contrast = radial_contrast(&frame);
    frame.with_plane(contrast)
}

/// Perspective orientation conspicuity on a prebuilt polar grid.
pub fn perspective_orientation_on_grid(img: &RgbImage, grid: &PolarGrid) -> ScenePlane {
    grid.unproject(&polar_map_on_grid(img, grid))
        .rescaled_above(NOISE_FLOOR)
}

/// Orientation conspicuity relative to the scene's perspective. Falls back to
/// the fixed-angle Gabor channel when no vanishing point was found.
pub fn perspective_orientation_conspicuity(img: &RgbImage, vp: &VanishingPoint) -> ScenePlane {
    match PolarGrid::new(img.width(), img.height(), vp) {
        Ok(grid) => perspective_orientation_on_grid(img, &grid),
        Err(_) => gabor_orientation_conspicuity(img),
    }
}

pub const GABOR_ANGLES_DEG: [f64; 4] = [0.0, 45.0, 90.0, 135.0];
pub const GABOR_WAVELENGTH: f64 = 8.0;
pub const GABOR_ASPECT: f64 = 0.5;
/// Envelope width for a one-octave bandwidth at the chosen wavelength.
pub const GABOR_SIGMA: f64 = 0.56 * GABOR_WAVELENGTH;

/// Sparse zero-mean Gabor kernel: (dx, dy, weight) taps inside the 3σ envelope.
#[derive(Debug, Clone)]
pub struct GaborKernel {
    pub radius: usize,
    pub taps: Vec<(isize, isize, f32)>,
}

impl GaborKernel {
    pub fn new(theta_deg: f64) -> Self {
        let (s, c) = theta_deg.to_radians().sin_cos();
        let sigma = GABOR_SIGMA;
        let radius = (3.0 * sigma / GABOR_ASPECT).ceil() as isize;
        let mut taps = Vec::new();
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let (x, y) = (dx as f64, dy as f64);
                let xr = x * c + y * s;
                let yr = -x * s + y * c;
                let q = (xr * xr + GABOR_ASPECT * GABOR_ASPECT * yr * yr) / (2.0 * sigma * sigma);
                if q > 4.5 + 1e-9 {
                    continue;
                }
                let g = (-q).exp() * (std::f64::consts::TAU * xr / GABOR_WAVELENGTH).cos();
                taps.push((dx, dy, g));
            }
        }
        let mean = taps.iter().map(|t| t.2).sum::<f64>() / taps.len() as f64;
        Self {
            radius: radius as usize,
            taps: taps
                .into_iter()
                .map(|(dx, dy, g)| (dx, dy, (g - mean) as f32))
                .collect(),
        }
    }

    /// |kernel ∗ plane| with clamp-to-edge borders.
    pub fn magnitude(&self, plane: &ScenePlane) -> ScenePlane {
        let (w, h) = plane.dims();
        let r = self.radius;
        let pw = w + 2 * r;
        let ph = h + 2 * r;
        let mut padded = vec![0.0f32; pw * ph];
        for py in 0..ph {
            let sy = (py as isize - r as isize).clamp(0, h as isize - 1) as usize;
            let src = plane.row(sy);
            for px in 0..pw {
                let sx = (px as isize - r as isize).clamp(0, w as isize - 1) as usize;
                padded[py * pw + px] = src[sx];
            }
        }
        let mut out = vec![0.0f32; w * h];
        out.par_chunks_mut(w).enumerate().for_each(|(y, dst)| {
            for &(dx, dy, k) in &self.taps {
                let py = (y as isize + dy + r as isize) as usize;
                let px = (dx + r as isize) as usize;
                let src = &padded[py * pw + px..py * pw + px + w];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += k * s;
                }
            }
            for d in dst.iter_mut() {
                *d = d.abs();
            }
        });
        ScenePlane::new(w, h, out).expect("sized")
    }
}

fn gabor_bank() -> &'static [GaborKernel; 4] {
    static BANK: OnceLock<[GaborKernel; 4]> = OnceLock::new();
    BANK.get_or_init(|| GABOR_ANGLES_DEG.map(GaborKernel::new))
}

/// Fixed-angle orientation channel: Gabor energy at 0°, 45°, 90° and 135°,
/// each through the pyramid / center-surround / normalization pipeline.
pub fn gabor_orientation_conspicuity(img: &RgbImage) -> ScenePlane {
    let lum = img.intensity();
    let responses: Vec<ScenePlane> = gabor_bank().iter().map(|k| k.magnitude(&lum)).collect();
    crate::attention::across_scale_conspicuity(&responses, img.width(), img.height())
}
