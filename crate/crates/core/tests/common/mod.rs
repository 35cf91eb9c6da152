//! Synthetic scenes shared by the integration and acceptance tests.
#![allow(dead_code)]

use bim_attention::color::{hsv_to_rgb, Hsv};
use bim_attention::synth::{ColorSpec, Shape, SynthObject, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TARGET: &str = "target";

pub fn object(rect: [f64; 4], color: ColorSpec, depth: f32, relevant: bool) -> SynthObject {
    SynthObject {
        shape: Shape::Box,
        rect,
        color,
        depth,
        relevant,
        off_perspective: true,
        name: None,
        category: None,
    }
}

pub fn named(mut o: SynthObject, name: &str) -> SynthObject {
    o.name = Some(name.to_string());
    o
}

pub fn hsv(h: f64, s: f64, v: f64) -> ColorSpec {
    ColorSpec::Rgb(hsv_to_rgb(Hsv { h, s, v }))
}

/// 8-bit exact color, so equal-intensity scenes stay equal after quantization.
pub fn bytes(r: u8, g: u8, b: u8) -> ColorSpec {
    ColorSpec::Rgb([r, g, b].map(|c| c as f32 / 255.0))
}

/// Uniform gray scene at constant depth, with no lines.
pub fn flat(width: usize, height: usize, gray: ColorSpec, seed: u64) -> SynthSpec {
    let mut s = SynthSpec::corridor(width, height, [width as f64 / 2.0, height as f64 / 2.0], seed);
    s.n_radial_lines = 0;
    s.background = gray;
    s.depth_near = 10.0;
    s.depth_far = 10.0;
    s
}

/// Random axis-aligned square of side `size` at least 12 px away from `taken`.
pub fn free_square(rng: &mut ChaCha8Rng, w: f64, h: f64, size: f64, taken: &[[f64; 4]]) -> [f64; 4] {
    loop {
        let x = rng.random_range(8.0..w - size - 8.0).floor();
        let y = rng.random_range(8.0..h - size - 8.0).floor();
        let r = [x, y, (x + size).floor(), (y + size).floor()];
        let apart = |t: &[f64; 4]| {
            r[2] + 12.0 < t[0] || t[2] + 12.0 < r[0] || r[3] + 12.0 < t[1] || t[3] + 12.0 < r[1]
        };
        if taken.iter().all(apart) {
            return r;
        }
    }
}

/// Bright square on a dark ground.
pub fn intensity_popout(seed: u64) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1000 + seed);
    let mut s = flat(256, 192, ColorSpec::gray(0.2), seed);
    let size = rng.random_range(16.0..32.0);
    let r = free_square(&mut rng, 256.0, 192.0, size, &[]);
    s.objects
        .push(named(object(r, ColorSpec::gray(0.9), 10.0, true), TARGET));
    s
}

/// Red square among five green distractors; all three colors have the same
/// 8-bit intensity.
pub fn color_popout(seed: u64) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2000 + seed);
    let mut s = flat(256, 192, bytes(102, 102, 102), seed);
    let size = rng.random_range(16.0..28.0);
    let r = free_square(&mut rng, 256.0, 192.0, size, &[]);
    s.objects
        .push(named(object(r, bytes(204, 51, 51), 10.0, true), TARGET));
    let mut taken = vec![r];
    for _ in 0..5 {
        let d = free_square(&mut rng, 256.0, 192.0, size, &taken);
        taken.push(d);
        s.objects.push(object(d, bytes(76, 154, 76), 10.0, false));
    }
    s
}

/// Uniform image; one box is nearer than everything else.
pub fn depth_popout(seed: u64) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3000 + seed);
    let mut s = flat(256, 192, ColorSpec::gray(0.5), seed);
    let size = rng.random_range(20.0..40.0);
    let r = free_square(&mut rng, 256.0, 192.0, size, &[]);
    s.objects
        .push(named(object(r, ColorSpec::gray(0.5), 3.0, true), TARGET));
    s
}

/// 640×480 corridor with one axis-aligned bar that does not follow the
/// perspective. Even seeds give a horizontal bar, odd seeds a vertical one.
pub fn corridor_with_bar(seed: u64) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4000 + seed);
    let vp = [rng.random_range(200.0..440.0), rng.random_range(150.0..330.0)];
    let mut s = SynthSpec::corridor(640, 480, vp, seed);
    let len = rng.random_range(80.0..160.0);
    let x0 = rng.random_range(40.0..640.0 - len - 40.0);
    let y0 = rng.random_range(40.0..480.0 - len - 40.0);
    let rect = if seed.is_multiple_of(2) {
        [x0, y0, x0 + len, y0 + 8.0]
    } else {
        [x0, y0, x0 + 8.0, y0 + len]
    };
    let mut bar = named(object(rect, ColorSpec::gray(0.85), 20.0, false), "bar");
    bar.shape = Shape::Bar;
    s.objects.push(bar);
    s
}

/// Corridor whose walls, lines, relevant crane and irrelevant posts all share
/// one hue; the crane is darker and farther than the posts.
pub fn same_hue_scene(k: u64) -> SynthSpec {
    const HUES: [f64; 8] = [0.0, 120.0, 240.0, 60.0, 10.0, 230.0, 130.0, 50.0];
    let h = HUES[(k % 8) as usize];
    let w = 105.0 + 8.0 * (k % 5) as f64;
    let vp = [140.0 + 4.0 * k as f64, 80.0 + 2.0 * k as f64];
    let mut s = SynthSpec::corridor(320, 240, vp, 100 + k);
    s.background = hsv(h, 0.6, 0.5);
    s.line_color = hsv(h, 0.6, 0.8);
    let x0 = 15.0 + 8.0 * (k % 3) as f64;
    s.objects.push(named(
        object([x0, 70.0, x0 + w, 225.0], hsv(h, 0.9, 0.65), 20.0, true),
        "crane",
    ));
    let posts = 4 + (k % 3) as usize;
    for j in 0..posts {
        let x = 150.0 + 150.0 / posts as f64 * j as f64;
        s.objects
            .push(object([x, 40.0, x + 10.0, 235.0], hsv(h, 0.9, 1.0), 3.0, false));
    }
    s
}

/// Red crane in front of a lattice of orange structural members on dark
/// concrete.
pub fn crane_scene() -> SynthSpec {
    let mut s = SynthSpec::corridor(320, 240, [150.0, 90.0], 2);
    s.background = ColorSpec::gray(0.25);
    s.objects.push(named(
        object(
            [20.0, 70.0, 140.0, 230.0],
            ColorSpec::Rgb([0.8, 0.15, 0.1]),
            8.0,
            true,
        ),
        "crane",
    ));
    let orange = ColorSpec::Rgb([1.0, 0.6, 0.15]);
    for k in 0..5 {
        let x = 150.0 + 32.0 * k as f64;
        let mut o = named(
            object([x, 40.0, x + 10.0, 235.0], orange.clone(), 3.0, false),
            &format!("column_{k}"),
        );
        o.category = Some("column".into());
        s.objects.push(o);
    }
    for k in 0..3 {
        let y = 20.0 + 70.0 * k as f64;
        let mut o = named(
            object([150.0, y, 310.0, y + 8.0], orange.clone(), 3.0, false),
            &format!("beam_{k}"),
        );
        o.category = Some("beam".into());
        s.objects.push(o);
    }
    s
}

/// Two relevant elements of one category in opposite colors (red and green),
/// with yellow and blue irrelevant elements.
pub fn opposite_colors_scene() -> SynthSpec {
    let mut s = SynthSpec::corridor(320, 240, [160.0, 100.0], 3);
    s.background = ColorSpec::gray(0.4);
    s.objects.push(named(
        object([30.0, 120.0, 150.0, 230.0], ColorSpec::named("red"), 6.0, true),
        "crane_a",
    ));
    s.objects.push(named(
        object([170.0, 120.0, 290.0, 230.0], ColorSpec::named("green"), 6.0, true),
        "crane_b",
    ));
    s.objects.push(object(
        [20.0, 10.0, 120.0, 60.0],
        ColorSpec::named("yellow"),
        3.0,
        false,
    ));
    s.objects.push(object(
        [200.0, 10.0, 300.0, 60.0],
        ColorSpec::named("blue"),
        3.0,
        false,
    ));
    s
}

/// Relevant red square covering a tenth of the frame on a red corridor, with
/// two warmer irrelevant boxes.
pub fn red_on_red_scene() -> SynthSpec {
    let mut s = SynthSpec::corridor(320, 240, [160.0, 100.0], 1);
    s.background = ColorSpec::named("red");
    s.line_color = ColorSpec::Rgb([0.6, 0.05, 0.05]);
    s.objects.push(named(
        object([60.0, 140.0, 148.0, 227.0], ColorSpec::named("red"), 6.0, true),
        "crane",
    ));
    s.objects.push(object(
        [200.0, 40.0, 260.0, 90.0],
        ColorSpec::named("yellow"),
        4.0,
        false,
    ));
    s.objects.push(object(
        [220.0, 150.0, 300.0, 200.0],
        ColorSpec::named("orange"),
        4.0,
        false,
    ));
    s
}

/// 640×480 version of [`same_hue_scene`] for timing.
pub fn bench_scene() -> SynthSpec {
    let mut s = same_hue_scene(3);
    s.width = 640;
    s.height = 480;
    s.vp = [s.vp[0] * 2.0, s.vp[1] * 2.0];
    for o in &mut s.objects {
        o.rect = o.rect.map(|v| v * 2.0);
    }
    s
}

/// Small random scene: corridor lines, optional sky, and one to five objects,
/// at least one of them a relevant crane.
pub fn random_scene(seed: u64) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5000 + seed);
    let (w, h) = (rng.random_range(64..128usize), rng.random_range(64..128usize));
    let vp = [
        rng.random_range(-0.5..1.5) * w as f64,
        rng.random_range(-0.5..1.5) * h as f64,
    ];
    let mut s = SynthSpec::corridor(w, h, vp, seed);
    s.n_radial_lines = rng.random_range(0..50);
    s.background = random_color(&mut rng);
    s.line_color = random_color(&mut rng);
    if rng.random_bool(0.3) {
        s.sky_rows = rng.random_range(0..h / 3);
    }
    s.depth_near = rng.random_range(0.5..5.0);
    s.depth_far = s.depth_near + rng.random_range(0.0..60.0);
    for k in 0..rng.random_range(1..=5) {
        let x0 = rng.random_range(0.0..w as f64 - 4.0);
        let y0 = rng.random_range(0.0..h as f64 - 4.0);
        let rect = [
            x0,
            y0,
            rng.random_range(x0 + 3.0..=w as f64),
            rng.random_range(y0 + 3.0..=h as f64),
        ];
        let relevant = k == 0 || rng.random_bool(0.3);
        let mut o = object(
            rect,
            random_color(&mut rng),
            rng.random_range(0.5..80.0),
            relevant,
        );
        o.off_perspective = rng.random_bool(0.6);
        o.shape = if rng.random_bool(0.5) {
            Shape::Box
        } else {
            Shape::Bar
        };
        s.objects.push(o);
    }
    s
}

fn random_color(rng: &mut ChaCha8Rng) -> ColorSpec {
    ColorSpec::Rgb([rng.random(), rng.random(), rng.random()])
}

pub fn argmax(data: &[f32]) -> usize {
    data.iter()
        .enumerate()
        .fold(
            (0, f32::NEG_INFINITY),
            |best, (i, &v)| if v > best.1 { (i, v) } else { best },
        )
        .0
}

pub fn mean_over(data: &[f32], idx: impl Iterator<Item = usize>) -> f64 {
    let (sum, n) = idx.fold((0.0, 0usize), |(s, n), i| (s + data[i] as f64, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
