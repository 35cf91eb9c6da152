//! Multi-scale contrast machinery: dyadic Gaussian pyramids, across-scale
//! center-surround differences, the fixed-grid map normalization operator, and
//! the intensity, color-opponency and depth conspicuity channels.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{RgbImage, ScenePlane};
use crate::scene_io::DepthMap;

pub const MAX_LEVELS: usize = 9;

/// (center, surround) level pairs: c ∈ {2,3,4}, s = c + δ, δ ∈ {3,4}.
pub const SCALE_PAIRS: [(usize, usize); 6] = [(2, 5), (2, 6), (3, 6), (3, 7), (4, 7), (4, 8)];

/// Side length of the square cells on which local maxima are collected.
pub const NORMALIZE_CELL: usize = 16;

/// Value spans at or below this are float residue, not contrast.
pub const NOISE_FLOOR: f32 = 1e-6;

pub const BINOMIAL_5: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub levels: Vec<ScenePlane>,
}

impl Pyramid {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, k: usize) -> &ScenePlane {
        &self.levels[k]
    }
}

/// Number of pyramid levels for a plane whose short side is `min_dim`.
pub fn level_count(min_dim: usize) -> usize {
    let halvings = usize::BITS - 1 - min_dim.max(1).leading_zeros();
    (halvings as usize + 1).min(MAX_LEVELS)
}

/// 5-tap binomial blur along rows, clamp-to-edge.
fn blur_rows(src: &ScenePlane) -> ScenePlane {
    let (w, h) = src.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = src.row(y);
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in BINOMIAL_5.iter().enumerate() {
                let xi = (x as isize + k as isize - 2).clamp(0, w as isize - 1) as usize;
                acc += wt * row[xi];
            }
            out.push(acc);
        }
    }
    ScenePlane::new(w, h, out).expect("same size")
}

/// 5-tap binomial blur along columns, clamp-to-edge.
fn blur_cols(src: &ScenePlane) -> ScenePlane {
    let (w, h) = src.dims();
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        let dst = &mut out[y * w..(y + 1) * w];
        for (k, &wt) in BINOMIAL_5.iter().enumerate() {
            let yi = (y as isize + k as isize - 2).clamp(0, h as isize - 1) as usize;
            for (d, &s) in dst.iter_mut().zip(src.row(yi)) {
                *d += wt * s;
            }
        }
    }
    ScenePlane::new(w, h, out).expect("same size")
}

/// Separable binomial blur, clamp-to-edge.
pub fn binomial_blur(src: &ScenePlane) -> ScenePlane {
    blur_cols(&blur_rows(src))
}

/// Halve each dimension (floor, minimum 1), sampling the blurred signal midway
/// between sample pairs `2i` and `2i+1`.
fn decimate(src: &ScenePlane) -> ScenePlane {
    let (w, h) = src.dims();
    let (nw, nh) = ((w / 2).max(1), (h / 2).max(1));
    let pick = |i: usize, len: usize| -> (usize, usize) {
        let a = (2 * i).min(len - 1);
        (a, (a + 1).min(len - 1))
    };
    ScenePlane::from_fn(nw, nh, |x, y| {
        let (x0, x1) = pick(x, w);
        let (y0, y1) = pick(y, h);
        0.25 * (src.get(x0, y0) + src.get(x1, y0) + src.get(x0, y1) + src.get(x1, y1))
    })
}

pub fn gaussian_pyramid(plane: &ScenePlane) -> Pyramid {
    let n = level_count(plane.width().min(plane.height()));
    let mut levels = Vec::with_capacity(n);
    levels.push(plane.clone());
    for k in 1..n {
        let next = decimate(&binomial_blur(&levels[k - 1]));
        levels.push(next);
    }
    Pyramid { levels }
}

fn check_pair(c: usize, s: usize, levels: usize) -> Result<()> {
    let ok = (2..=4).contains(&c) && (s == c + 3 || s == c + 4) && s < levels;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidScalePair {
            center: c,
            surround: s,
            levels,
        })
    }
}

/// |upsample(level s → level c) − level c| at level-c resolution.
pub fn center_surround(pyr: &Pyramid, c: usize, s: usize) -> Result<ScenePlane> {
    check_pair(c, s, pyr.len())?;
    let center = pyr.level(c);
    let (w, h) = center.dims();
    let factor = (1u32 << (s - c)) as f32;
    let mut up = pyr.level(s).upsample(w, h, factor);
    for (u, &cv) in up.data_mut().iter_mut().zip(center.data()) {
        *u = (*u - cv).abs();
    }
    Ok(up)
}

/// Mean of per-cell maxima over a grid of `NORMALIZE_CELL`-pixel cells,
/// leaving out the cell that holds the global maximum. Expects a plane
/// already rescaled to [0, 1].
pub fn mean_local_maxima(plane: &ScenePlane) -> f32 {
    let (w, h) = plane.dims();
    let cells_x = w.div_ceil(NORMALIZE_CELL);
    let cells_y = h.div_ceil(NORMALIZE_CELL);
    let mut cell_max = vec![f32::NEG_INFINITY; cells_x * cells_y];
    let mut best = (f32::NEG_INFINITY, 0usize);
    for y in 0..h {
        let cy = y / NORMALIZE_CELL;
        for (x, &v) in plane.row(y).iter().enumerate() {
            let cell = cy * cells_x + x / NORMALIZE_CELL;
            if v > cell_max[cell] {
                cell_max[cell] = v;
            }
            if v > best.0 {
                best = (v, cell);
            }
        }
    }
    let others: Vec<f32> = cell_max
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best.1)
        .map(|(_, &m)| m)
        .collect();
    if others.is_empty() {
        0.0
    } else {
        (others.iter().map(|&m| m as f64).sum::<f64>() / others.len() as f64) as f32
    }
}

/// Map normalization N(·): rescale to [0, 1], then weight by (1 − m̄)² where
/// m̄ is the mean of the other local maxima. Constant planes become zero.
pub fn normalize_map(plane: &ScenePlane) -> ScenePlane {
    let unit = plane.rescaled_above(NOISE_FLOOR);
    if unit.max() <= 0.0 {
        return unit;
    }
    let mbar = mean_local_maxima(&unit);
    let k = (1.0 - mbar) * (1.0 - mbar);
    unit.map(|v| v * k)
}

/// Sum over features and scale pairs of N(center-surround), each brought back
/// to `width`×`height`, then rescaled to [0, 1].
pub(crate) fn across_scale_conspicuity(features: &[ScenePlane], width: usize, height: usize) -> ScenePlane {
    let per_feature: Vec<ScenePlane> = features
        .par_iter()
        .map(|f| feature_sum(f, width, height))
        .collect();
    let mut acc = ScenePlane::zeros(width, height);
    for p in &per_feature {
        acc.add_assign(p);
    }
    acc.rescaled_above(NOISE_FLOOR)
}

fn feature_sum(feature: &ScenePlane, width: usize, height: usize) -> ScenePlane {
    let pyr = gaussian_pyramid(feature);
    let mut acc = ScenePlane::zeros(width, height);
    // pairs sharing a center level are summed there; upsampling is linear
    for c in 2..=4 {
        let mut at_c: Option<ScenePlane> = None;
        for &(_, s) in SCALE_PAIRS.iter().filter(|&&(pc, s)| pc == c && s < pyr.len()) {
            let n = normalize_map(&center_surround(&pyr, c, s).expect("pair validated against level count"));
            match at_c.as_mut() {
                Some(a) => a.add_assign(&n),
                None => at_c = Some(n),
            }
        }
        if let Some(a) = at_c {
            acc.add_assign(&a.upsample(width, height, (1u32 << c) as f32));
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConspicuitySet {
    pub intensity: ScenePlane,
    pub color: ScenePlane,
    pub orientation: ScenePlane,
    pub depth: ScenePlane,
}

impl ConspicuitySet {
    pub fn maps(&self) -> [&ScenePlane; 4] {
        [&self.intensity, &self.color, &self.orientation, &self.depth]
    }
}

pub fn intensity_conspicuity(img: &RgbImage) -> ScenePlane {
    across_scale_conspicuity(&[img.intensity()], img.width(), img.height())
}

/// Red-green and blue-yellow opponency planes from broadly tuned channels.
/// Pixels darker than a tenth of the brightest are zeroed.
pub fn opponent_planes(img: &RgbImage) -> (ScenePlane, ScenePlane) {
    let (w, h) = img.dims();
    let intensity = img.intensity();
    let gate = 0.1 * intensity.max();
    let n = w * h;
    let mut rg = Vec::with_capacity(n);
    let mut by = Vec::with_capacity(n);
    for i in 0..n {
        if intensity.data()[i] < gate {
            rg.push(0.0);
            by.push(0.0);
            continue;
        }
        let [r, g, b] = img.pixel(i);
        let rr = (r - (g + b) / 2.0).max(0.0);
        let gg = (g - (r + b) / 2.0).max(0.0);
        let bb = (b - (r + g) / 2.0).max(0.0);
        let yy = ((r + g) / 2.0 - (r - g).abs() / 2.0 - b).max(0.0);
        rg.push(rr - gg);
        by.push(bb - yy);
    }
    (
        ScenePlane::new(w, h, rg).expect("sized"),
        ScenePlane::new(w, h, by).expect("sized"),
    )
}

pub fn color_conspicuity(img: &RgbImage) -> ScenePlane {
    let (rg, by) = opponent_planes(img);
    across_scale_conspicuity(&[rg, by], img.width(), img.height())
}

/// Depth flipped so the nearest sample is 1 and the farthest 0.
pub fn inverted_depth(depth: &DepthMap) -> ScenePlane {
    let p = depth.plane();
    let (lo, hi) = p.min_max();
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
        return ScenePlane::zeros(p.width(), p.height());
    }
    p.map(|d| (hi - d) / span)
}

pub fn depth_conspicuity(depth: &DepthMap) -> ScenePlane {
    let (w, h) = depth.dims();
    across_scale_conspicuity(&[inverted_depth(depth)], w, h)
}
