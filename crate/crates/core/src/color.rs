//! HSV conversions (hue in degrees) and circular hue arithmetic.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

pub fn rgb_to_hsv(rgb: [f32; 3]) -> Hsv {
    let [r, g, b] = rgb.map(f64::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let s = if max > 0.0 { d / max } else { 0.0 };
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / d)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    Hsv {
        h: h.rem_euclid(360.0),
        s,
        v: max,
    }
}

pub fn hsv_to_rgb(hsv: Hsv) -> [f32; 3] {
    let Hsv { h, s, v } = hsv;
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [(r + m) as f32, (g + m) as f32, (b + m) as f32]
}

/// Signed shortest rotation from `from` to `to`, in (-180, 180]. Exactly
/// opposite hues rotate in the positive direction.
pub fn hue_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Unsigned circular distance between two hues.
pub fn hue_distance(a: f64, b: f64) -> f64 {
    hue_delta(a, b).abs()
}

/// Move `from` toward `to` along the short arc by fraction `t`.
pub fn hue_lerp(from: f64, to: f64, t: f64) -> f64 {
    if t >= 1.0 {
        return to.rem_euclid(360.0);
    }
    (from + t * hue_delta(from, to)).rem_euclid(360.0)
}

/// Circular mean of hues, or `None` when the unit vectors cancel.
pub fn circular_mean(hues: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sx, mut sy, mut n) = (0.0f64, 0.0f64, 0usize);
    for h in hues {
        let (s, c) = h.to_radians().sin_cos();
        sx += c;
        sy += s;
        n += 1;
    }
    if n == 0 || sx.hypot(sy) < 1e-6 * n as f64 {
        return None;
    }
    Some(sy.atan2(sx).to_degrees().rem_euclid(360.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primaries() {
        assert_eq!(rgb_to_hsv([1.0, 0.0, 0.0]).h, 0.0);
        assert_eq!(rgb_to_hsv([1.0, 1.0, 0.0]).h, 60.0);
        assert_eq!(rgb_to_hsv([0.0, 1.0, 0.0]).h, 120.0);
        assert_eq!(rgb_to_hsv([0.0, 0.0, 1.0]).h, 240.0);
        let gray = rgb_to_hsv([0.4, 0.4, 0.4]);
        assert_eq!((gray.s, gray.v), (0.0, 0.4f32 as f64));
        assert_eq!(
            hsv_to_rgb(Hsv {
                h: 120.0,
                s: 1.0,
                v: 0.5
            }),
            [0.0, 0.5, 0.0]
        );
    }

    #[test]
    fn lerp_short_arc() {
        assert_eq!(hue_lerp(0.0, 120.0, 0.5), 60.0);
        assert_eq!(hue_lerp(350.0, 20.0, 0.5), 5.0);
        assert_eq!(hue_lerp(10.0, 190.0, 0.5), 100.0);
        assert_eq!(hue_lerp(123.4, 240.0, 1.0), 240.0);
        assert_eq!(hue_lerp(123.4, 240.0, 0.0), 123.4);
    }

    #[test]
    fn circular_mean_wraps() {
        let m = circular_mean([350.0, 10.0]).unwrap();
        assert!(m < 1e-9 || (360.0 - m) < 1e-9);
        assert!(circular_mean([0.0, 180.0]).is_none());
        assert!(circular_mean(std::iter::empty()).is_none());
    }

    proptest! {
        #[test]
        fn hsv_round_trip(r in 0.0f32..=1.0, g in 0.0f32..=1.0, b in 0.0f32..=1.0) {
            let back = hsv_to_rgb(rgb_to_hsv([r, g, b]));
            for (x, y) in [r, g, b].iter().zip(back) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }

        #[test]
        fn value_is_max_channel(r in 0.0f32..=1.0, g in 0.0f32..=1.0, b in 0.0f32..=1.0, h in 0.0f64..360.0) {
            let hsv = rgb_to_hsv([r, g, b]);
            let moved = hsv_to_rgb(Hsv { h, ..hsv });
            let vmax = moved.iter().cloned().fold(0.0f32, f32::max);
            prop_assert!((vmax as f64 - hsv.v).abs() < 1e-6);
        }
    }
}
