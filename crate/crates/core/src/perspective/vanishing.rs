//! Dominant vanishing point from pairwise intersections of Hough segments.
//!
//! Edges are the pixels above the 90th percentile of Sobel magnitude. Line
//! segments come from a progressive probabilistic Hough transform with a fixed
//! shuffle seed. Every pair of non-axis-aligned segments votes at its
//! intersection, weighted by the product of segment lengths, into a 4-px
//! accumulator spanning three times the image extent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{RgbImage, ScenePlane};

pub const MIN_IMAGE_SIDE: usize = 64;
const EDGE_PERCENTILE: f64 = 0.90;
const MIN_SEGMENT_FRACTION: f64 = 0.05;
const AXIS_EXCLUSION_DEG: f64 = 5.0;
/// Pairs of near-parallel segments intersect at poorly conditioned points.
const MIN_PAIR_ANGLE_DEG: f64 = 2.0;
const CELL: f64 = 4.0;
const MIN_PEAK_SHARE: f64 = 0.05;
const MIN_SEGMENTS: usize = 10;
const MAX_VOTING_SEGMENTS: usize = 600;
const HOUGH_ANGLES: usize = 180;
const LINE_GAP: usize = 3;
const SHUFFLE_SEED: u64 = 0x5eed0f1a5e;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanishingPoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
    pub found: bool,
}

impl VanishingPoint {
    pub fn not_found() -> Self {
        Self {
            x: f64::NAN,
            y: f64::NAN,
            score: 0.0,
            found: false,
        }
    }

    /// A known vanishing point, e.g. from a synthetic scene.
    pub fn at(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            score: f64::INFINITY,
            found: true,
        }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    /// Direction angle in degrees, folded to [0, 180).
    pub fn angle_deg(&self) -> f64 {
        let a = (self.y1 - self.y0).atan2(self.x1 - self.x0).to_degrees();
        a.rem_euclid(180.0)
    }

    pub fn is_axis_aligned(&self, tol_deg: f64) -> bool {
        let a = self.angle_deg();
        a < tol_deg || a > 180.0 - tol_deg || (a - 90.0).abs() < tol_deg
    }

    /// Homogeneous line through both endpoints.
    fn line(&self) -> [f64; 3] {
        [
            self.y0 - self.y1,
            self.x1 - self.x0,
            self.x0 * self.y1 - self.x1 * self.y0,
        ]
    }
}

fn sobel_magnitude(lum: &ScenePlane) -> ScenePlane {
    let (w, h) = lum.dims();
    let at = |x: isize, y: isize| {
        lum.get(
            x.clamp(0, w as isize - 1) as usize,
            y.clamp(0, h as isize - 1) as usize,
        )
    };
    ScenePlane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
        let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        gx.hypot(gy)
    })
}

/// Edge mask: Sobel magnitude at or above the 90th percentile, and above a
/// small fraction of the strongest response so flat images yield nothing.
/// Ties at the percentile are kept: flat-shaded renders repeat the same
/// gradient value along every edge.
pub fn edge_mask(lum: &ScenePlane) -> Vec<bool> {
    let mag = sobel_magnitude(lum);
    let mut sorted = mag.data().to_vec();
    sorted.sort_by(f32::total_cmp);
    let n = sorted.len();
    let thr = sorted[((n - 1) as f64 * EDGE_PERCENTILE).floor() as usize];
    let floor = 1e-3 * sorted[n - 1];
    mag.data().iter().map(|&m| m >= thr && m > floor).collect()
}

/// Progressive probabilistic Hough transform over an edge mask.
pub fn hough_segments(mask: &[bool], width: usize, height: usize, min_len: f64) -> Vec<Segment> {
    let thetas: Vec<(f64, f64)> = (0..HOUGH_ANGLES)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / HOUGH_ANGLES as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let num_rho = 2 * (width + height) + 1;
    let rho_off = ((num_rho - 1) / 2) as f64;
    let rho_index = |x: usize, y: usize, (c, s): (f64, f64)| -> usize {
        (x as f64 * c + y as f64 * s + rho_off).round() as usize
    };
    let vote_threshold = ((min_len / 2.0).round() as i32).max(10);

    let mut acc = vec![0i32; HOUGH_ANGLES * num_rho];
    let mut remaining = mask.to_vec();
    let mut voted = vec![false; mask.len()];
    let mut points: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    points.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));

    let mut segments = Vec::new();
    for &p in &points {
        if !remaining[p] {
            continue;
        }
        let (px, py) = (p % width, p / width);
        let mut best = (0i32, 0usize);
        for (n, &tc) in thetas.iter().enumerate() {
            let cell = &mut acc[n * num_rho + rho_index(px, py, tc)];
            *cell += 1;
            if *cell > best.0 {
                best = (*cell, n);
            }
        }
        voted[p] = true;
        if best.0 < vote_threshold {
            continue;
        }

        // walk along the line direction in both senses, tolerating small gaps
        let (c, s) = thetas[best.1];
        let (dx, dy) = (-s, c);
        let major = dx.abs().max(dy.abs());
        let (sx, sy) = (dx / major, dy / major);
        let mut ends = [(px, py); 2];
        for (k, sign) in [1.0f64, -1.0].into_iter().enumerate() {
            let mut gap = 0;
            let mut t = 1.0;
            loop {
                let x = (px as f64 + sign * t * sx).round();
                let y = (py as f64 + sign * t * sy).round();
                if x < 0.0 || y < 0.0 || x >= width as f64 || y >= height as f64 {
                    break;
                }
                let q = y as usize * width + x as usize;
                if remaining[q] {
                    gap = 0;
                    ends[k] = (x as usize, y as usize);
                } else {
                    gap += 1;
                    if gap > LINE_GAP {
                        break;
                    }
                }
                t += 1.0;
            }
        }
        let seg = Segment {
            x0: ends[1].0 as f64,
            y0: ends[1].1 as f64,
            x1: ends[0].0 as f64,
            y1: ends[0].1 as f64,
        };
        let good = seg.length() >= min_len;

        // clear the walked pixels; withdraw their votes when the line is kept
        for (k, sign) in [1.0f64, -1.0].into_iter().enumerate() {
            let mut t = 0.0;
            loop {
                let x = (px as f64 + sign * t * sx).round() as usize;
                let y = (py as f64 + sign * t * sy).round() as usize;
                let q = y * width + x;
                if remaining[q] {
                    if good && voted[q] {
                        for (n, &tc) in thetas.iter().enumerate() {
                            acc[n * num_rho + rho_index(x, y, tc)] -= 1;
                        }
                        voted[q] = false;
                    }
                    remaining[q] = false;
                }
                if (x, y) == ends[k] {
                    break;
                }
                t += 1.0;
            }
        }
        if good {
            segments.push(seg);
        }
    }
    segments
}

/// Luminance segments long enough to vote, before the axis filter.
pub fn detect_segments(img: &RgbImage) -> Vec<Segment> {
    let lum = img.intensity();
    let (w, h) = lum.dims();
    let min_len = MIN_SEGMENT_FRACTION * (w as f64).hypot(h as f64);
    hough_segments(&edge_mask(&lum), w, h, min_len)
}

struct Accumulator {
    cols: usize,
    rows: usize,
    origin: (f64, f64),
    weight: Vec<f64>,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

impl Accumulator {
    fn new(width: usize, height: usize) -> Self {
        let cols = (3.0 * width as f64 / CELL).ceil() as usize;
        let rows = (3.0 * height as f64 / CELL).ceil() as usize;
        Self {
            cols,
            rows,
            origin: (-(width as f64), -(height as f64)),
            weight: vec![0.0; cols * rows],
            wx: vec![0.0; cols * rows],
            wy: vec![0.0; cols * rows],
        }
    }

    fn vote(&mut self, x: f64, y: f64, w: f64) -> bool {
        let cx = ((x - self.origin.0) / CELL).floor();
        let cy = ((y - self.origin.1) / CELL).floor();
        if cx < 0.0 || cy < 0.0 || cx >= self.cols as f64 || cy >= self.rows as f64 {
            return false;
        }
        let i = cy as usize * self.cols + cx as usize;
        self.weight[i] += w;
        self.wx[i] += w * x;
        self.wy[i] += w * y;
        true
    }

    /// Cell whose 3×3 neighborhood holds the most weight, with that weight
    /// and the neighborhood's weighted centroid.
    fn peak(&self) -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for cy in 0..self.rows {
            for cx in 0..self.cols {
                if self.weight[cy * self.cols + cx] == 0.0 {
                    continue;
                }
                let (mut w, mut sx, mut sy) = (0.0, 0.0, 0.0);
                for ny in cy.saturating_sub(1)..(cy + 2).min(self.rows) {
                    for nx in cx.saturating_sub(1)..(cx + 2).min(self.cols) {
                        let i = ny * self.cols + nx;
                        w += self.weight[i];
                        sx += self.wx[i];
                        sy += self.wy[i];
                    }
                }
                if w > best.0 {
                    best = (w, sx / w, sy / w);
                }
            }
        }
        best
    }
}

/// Vote intersections of segment pairs and return the dominant vanishing point.
pub fn vanishing_point_from_segments(segments: &[Segment], width: usize, height: usize) -> VanishingPoint {
    let mut voting: Vec<Segment> = segments
        .iter()
        .copied()
        .filter(|s| !s.is_axis_aligned(AXIS_EXCLUSION_DEG))
        .collect();
    if voting.len() < MIN_SEGMENTS {
        return VanishingPoint::not_found();
    }
    voting.sort_by(|a, b| b.length().total_cmp(&a.length()));
    voting.truncate(MAX_VOTING_SEGMENTS);

    let lines: Vec<[f64; 3]> = voting.iter().map(Segment::line).collect();
    let mut acc = Accumulator::new(width, height);
    let mut total = 0.0;
    for i in 0..voting.len() {
        for j in (i + 1)..voting.len() {
            let mut d = (voting[i].angle_deg() - voting[j].angle_deg()).abs();
            d = d.min(180.0 - d);
            if d < MIN_PAIR_ANGLE_DEG {
                continue;
            }
            let (a, b) = (lines[i], lines[j]);
            let hx = a[1] * b[2] - a[2] * b[1];
            let hy = a[2] * b[0] - a[0] * b[2];
            let hw = a[0] * b[1] - a[1] * b[0];
            if hw.abs() < 1e-12 {
                continue;
            }
            let w = voting[i].length() * voting[j].length();
            if acc.vote(hx / hw, hy / hw, w) {
                total += w;
            }
        }
    }
    if total <= 0.0 {
        return VanishingPoint::not_found();
    }
    let (score, x, y) = acc.peak();
    if score < MIN_PEAK_SHARE * total {
        return VanishingPoint::not_found();
    }
    VanishingPoint {
        x,
        y,
        score,
        found: true,
    }
}

pub fn detect_vanishing_point(img: &RgbImage) -> Result<VanishingPoint> {
    let (w, h) = img.dims();
    if w.min(h) < MIN_IMAGE_SIDE {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: MIN_IMAGE_SIDE,
        });
    }
    Ok(vanishing_point_from_segments(&detect_segments(img), w, h))
}
