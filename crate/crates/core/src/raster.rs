//! Single-channel float rasters and the RGB image built from them.

use crate::error::{Error, Result};

/// Row-major single-channel float raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePlane {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ScenePlane {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                what: "plane data".into(),
                got_w: data.len(),
                got_h: 1,
                want_w: width * height,
                want_h: 1,
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn max(&self) -> f32 {
        self.min_max().1
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Linear min-max rescale to [0, 1]; a constant plane becomes all zero.
    pub fn rescaled(&self) -> Self {
        self.rescaled_above(0.0)
    }

    /// Like [`rescaled`](Self::rescaled), but a plane whose value span does not
    /// exceed `floor` counts as constant.
    pub fn rescaled_above(&self, floor: f32) -> Self {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        if !span.is_finite() || span <= floor {
            return Self::zeros(self.width, self.height);
        }
        self.map(|v| ((v - lo) / span).clamp(0.0, 1.0))
    }

    /// Divide by the maximum so the peak is 1; all-zero stays all-zero.
    pub fn scaled_to_unit_max(&self) -> Self {
        let hi = self.max();
        if hi.is_nan() || hi <= 0.0 {
            return Self::zeros(self.width, self.height);
        }
        self.map(|v| (v / hi).clamp(0.0, 1.0))
    }

    pub fn add_assign(&mut self, other: &ScenePlane) {
        debug_assert_eq!(self.dims(), other.dims());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn same_dims(&self, other: &ScenePlane) -> bool {
        self.dims() == other.dims()
    }

    /// Bilinear resample to `out_w`×`out_h`, where one source pixel spans `factor`
    /// output pixels. Pixel centers are aligned at half-pixel offsets and
    /// coordinates are clamped to the source edge.
    pub fn upsample(&self, out_w: usize, out_h: usize, factor: f32) -> Self {
        let xs: Vec<(usize, usize, f32)> = (0..out_w)
            .map(|x| lerp_taps((x as f32 + 0.5) / factor - 0.5, self.width))
            .collect();
        // every source row resampled along x once, then rows blended along y
        let wide: Vec<f32> = (0..self.height)
            .flat_map(|y| {
                let r = self.row(y);
                xs.iter().map(move |&(x0, x1, fx)| r[x0] + (r[x1] - r[x0]) * fx)
            })
            .collect();
        let mut data = vec![0.0f32; out_w * out_h];
        for (y, out) in data.chunks_exact_mut(out_w).enumerate() {
            let (y0, y1, fy) = lerp_taps((y as f32 + 0.5) / factor - 0.5, self.height);
            let top = &wide[y0 * out_w..(y0 + 1) * out_w];
            let bot = &wide[y1 * out_w..(y1 + 1) * out_w];
            for ((o, &t), &b) in out.iter_mut().zip(top).zip(bot) {
                *o = t + (b - t) * fy;
            }
        }
        Self {
            width: out_w,
            height: out_h,
            data,
        }
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centers on integers).
    /// Returns `None` outside `[0, w-1] × [0, h-1]`.
    pub fn sample(&self, x: f32, y: f32) -> Option<f32> {
        let max_x = (self.width - 1) as f32;
        let max_y = (self.height - 1) as f32;
        if !(x >= 0.0 && y >= 0.0 && x <= max_x && y <= max_y) {
            return None;
        }
        let x0 = (x.floor() as usize).min(self.width - 1);
        let y0 = (y.floor() as usize).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f32;
        let fy = y - y0 as f32;
        let top = self.get(x0, y0) + (self.get(x1, y0) - self.get(x0, y0)) * fx;
        let bot = self.get(x0, y1) + (self.get(x1, y1) - self.get(x0, y1)) * fx;
        Some(top + (bot - top) * fy)
    }
}

#[inline]
fn lerp_taps(pos: f32, len: usize) -> (usize, usize, f32) {
    let max = (len - 1) as f32;
    let p = pos.clamp(0.0, max);
    let i0 = p.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, p - i0 as f32)
}

/// Three aligned channel planes holding gamma-encoded samples in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: ScenePlane,
    pub g: ScenePlane,
    pub b: ScenePlane,
}

impl RgbImage {
    pub fn new(r: ScenePlane, g: ScenePlane, b: ScenePlane) -> Result<Self> {
        for (name, p) in [("green", &g), ("blue", &b)] {
            if !p.same_dims(&r) {
                return Err(Error::DimensionMismatch {
                    what: format!("{name} channel"),
                    got_w: p.width(),
                    got_h: p.height(),
                    want_w: r.width(),
                    want_h: r.height(),
                });
            }
        }
        let clamp = |p: ScenePlane| p.map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 });
        Ok(Self {
            r: clamp(r),
            g: clamp(g),
            b: clamp(b),
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        Self {
            r: ScenePlane::filled(width, height, rgb[0]),
            g: ScenePlane::filled(width, height, rgb[1]),
            b: ScenePlane::filled(width, height, rgb[2]),
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut img = Self::filled(width, height, [0.0; 3]);
        for y in 0..height {
            for x in 0..width {
                img.set_pixel(y * width + x, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.r.width()
    }

    pub fn height(&self) -> usize {
        self.r.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.r.dims()
    }

    pub fn pixel_count(&self) -> usize {
        self.r.len()
    }

    #[inline]
    pub fn pixel(&self, idx: usize) -> [f32; 3] {
        [self.r.data()[idx], self.g.data()[idx], self.b.data()[idx]]
    }

    #[inline]
    pub fn set_pixel(&mut self, idx: usize, rgb: [f32; 3]) {
        self.r.data_mut()[idx] = rgb[0].clamp(0.0, 1.0);
        self.g.data_mut()[idx] = rgb[1].clamp(0.0, 1.0);
        self.b.data_mut()[idx] = rgb[2].clamp(0.0, 1.0);
    }

    /// Mean of the three channels.
    pub fn intensity(&self) -> ScenePlane {
        let data = self
            .r
            .data()
            .iter()
            .zip(self.g.data())
            .zip(self.b.data())
            .map(|((&r, &g), &b)| (r + g + b) / 3.0)
            .collect();
        ScenePlane {
            width: self.width(),
            height: self.height(),
            data,
        }
    }

    /// Uniform brightness scaling, clamped to [0, 1].
    pub fn scaled(&self, k: f32) -> Self {
        let f = |v: f32| (v * k).clamp(0.0, 1.0);
        Self {
            r: self.r.map(f),
            g: self.g.map(f),
            b: self.b.map(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_bad_length() {
        assert!(ScenePlane::new(3, 2, vec![0.0; 5]).is_err());
        assert!(ScenePlane::new(3, 2, vec![0.0; 6]).is_ok());
    }

    #[test]
    fn rescale_constant_is_zero() {
        let p = ScenePlane::filled(4, 4, 0.7).rescaled();
        assert!(p.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn upsample_constant_stays_constant() {
        let p = ScenePlane::filled(5, 3, 0.25).upsample(20, 12, 4.0);
        assert_eq!(p.dims(), (20, 12));
        assert!(p.data().iter().all(|&v| (v - 0.25).abs() < 1e-7));
    }

    #[test]
    fn upsample_preserves_linear_ramp_interior() {
        let p = ScenePlane::from_fn(8, 1, |x, _| x as f32);
        let up = p.upsample(16, 1, 2.0);
        // output x maps to source (x + 0.5)/2 - 0.5
        for x in 1..15 {
            let want = (x as f32 + 0.5) / 2.0 - 0.5;
            assert!((up.get(x, 0) - want).abs() < 1e-6);
        }
    }

    #[test]
    fn sample_outside_is_none() {
        let p = ScenePlane::filled(4, 4, 1.0);
        assert!(p.sample(-0.1, 1.0).is_none());
        assert!(p.sample(3.0, 3.0).is_some());
        assert!(p.sample(3.01, 1.0).is_none());
    }

    #[test]
    fn rgb_clamps_samples() {
        let img = RgbImage::new(
            ScenePlane::filled(2, 2, 1.5),
            ScenePlane::filled(2, 2, -0.5),
            ScenePlane::filled(2, 2, 0.5),
        )
        .unwrap();
        assert_eq!(img.pixel(0), [1.0, 0.0, 0.5]);
    }
}
