//! End-to-end runs: load a bundle, enhance it for a profile, write outputs.

use std::fmt;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::enhancer::{enhance_timed, Enhancement, EnhancementReport, DEFAULT_MAX_ITERS};
use crate::error::{Error, Result};
use crate::ontology::{load_rule_pack, resolve_profile, Profile};
use crate::perspective::perspective_polar_map;
use crate::saliency::{compute_saliency, Mode, StageTimes};
use crate::scene_io::{load_bundle, save_bundle_outputs, save_plane, write_json, SceneBundle};

pub const INTERMEDIATES_DIR: &str = "intermediates";

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bundle_dir: PathBuf,
    pub out_dir: PathBuf,
    pub profile: String,
    pub mode: Mode,
    pub max_iters: usize,
    pub emit_intermediates: bool,
    pub rule_pack: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(bundle_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>, profile: &str) -> Self {
        Self {
            bundle_dir: bundle_dir.into(),
            out_dir: out_dir.into(),
            profile: profile.to_string(),
            mode: Mode::default(),
            max_iters: DEFAULT_MAX_ITERS,
            emit_intermediates: false,
            rule_pack: None,
        }
    }

    pub fn resolve_profile(&self) -> Result<Profile> {
        let pack = match &self.rule_pack {
            Some(p) => load_rule_pack(p)?,
            None => Vec::new(),
        };
        resolve_profile(&self.profile, &pack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Classify,
    Enhance,
    Save,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Classify => "classify",
            Stage::Enhance => "enhance",
            Stage::Save => "save",
        })
    }
}

/// An error tagged with the pipeline stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error in stage '{}': {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: EnhancementReport,
    pub times: StageTimes,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.converged {
            EXIT_CONVERGED
        } else {
            EXIT_NOT_CONVERGED
        }
    }

    /// One-paragraph human summary.
    pub fn summary(&self) -> String {
        let r = &self.report;
        let trajectory: Vec<String> = r.iterations.iter().map(|i| format!("{:.4}", i.ge)).collect();
        format!(
            "profile: {}\ntarget color: {}\nge: {}\npasses: {}\nconverged: {}{}",
            r.profile,
            r.target,
            trajectory.join(" -> "),
            r.passes(),
            r.converged,
            if r.stalled { " (stalled)" } else { "" },
        )
    }
}

pub fn exit_code_for(result: &std::result::Result<RunOutcome, StageError>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(_) => EXIT_ERROR,
    }
}

fn validate(config: &RunConfig) -> Result<()> {
    if config.max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    Ok(())
}

/// Load, classify, enhance and write the seven outputs.
pub fn run(config: &RunConfig) -> std::result::Result<RunOutcome, StageError> {
    validate(config).at(Stage::Config)?;
    let bundle = load_bundle(&config.bundle_dir).at(Stage::Load)?;
    let profile = config.resolve_profile().at(Stage::Classify)?;
    let mut times = StageTimes::default();
    let result =
        enhance_timed(&bundle, &profile, config.mode, config.max_iters, &mut times).at(Stage::Enhance)?;
    save_bundle_outputs(&result.report, &result.image, &result.maps, &config.out_dir).at(Stage::Save)?;
    if config.emit_intermediates {
        write_intermediates(&bundle, &result, config).at(Stage::Save)?;
    }
    Ok(RunOutcome {
        report: result.report,
        times,
    })
}

#[derive(Serialize)]
struct IntermediateSummary<'a> {
    mode: Mode,
    vanishing_point: Option<[f64; 2]>,
    relevant_pixels: usize,
    irrelevant_pixels: usize,
    ge: Vec<f64>,
    target_color: &'a str,
}

fn write_intermediates(bundle: &SceneBundle, result: &Enhancement, config: &RunConfig) -> Result<()> {
    let dir = config.out_dir.join(INTERMEDIATES_DIR);
    std::fs::create_dir_all(&dir)?;
    let (w, h) = bundle.dims();
    let mask = |set: &crate::ontology::PixelSet| {
        crate::raster::ScenePlane::from_fn(w, h, |x, y| if set.contains(y * w + x) { 1.0 } else { 0.0 })
    };
    save_plane(&mask(&result.relevant), &dir.join("relevant_mask.png"), false)?;
    let (initial, _) = compute_saliency(bundle, config.mode)?;
    save_plane(initial.plane(), &dir.join("saliency_initial.png"), false)?;
    save_plane(bundle.depth.plane(), &dir.join("depth.png"), true)?;

    let vp = match config.mode {
        Mode::Perspective => Some(crate::perspective::detect_vanishing_point(&bundle.image)?),
        Mode::Baseline => None,
    };
    if let Some(frame) = vp
        .as_ref()
        .and_then(|vp| perspective_polar_map(&bundle.image, vp))
    {
        save_plane(&frame.plane, &dir.join("polar_orientation.png"), true)?;
    }
    write_json(
        &dir.join("summary.json"),
        &IntermediateSummary {
            mode: config.mode,
            vanishing_point: vp.filter(|v| v.found).map(|v| [v.x, v.y]),
            relevant_pixels: result.relevant.len(),
            irrelevant_pixels: result.irrelevant.len(),
            ge: result.report.ge_trajectory(),
            target_color: result.report.target.name(),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageMedians {
    pub vanishing_point: f64,
    pub channels: f64,
    pub combine: f64,
    pub recolor: f64,
}

/// Benchmark output; all times are medians in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    pub profile: String,
    pub mode: Mode,
    pub repeats: usize,
    pub stages_ms: StageMedians,
    /// Load, classify and enhance together.
    pub total_ms: f64,
}

fn median_ms(mut xs: Vec<Duration>) -> f64 {
    xs.sort();
    let n = xs.len();
    let mid = if n % 2 == 1 {
        xs[n / 2].as_secs_f64()
    } else {
        (xs[n / 2 - 1].as_secs_f64() + xs[n / 2].as_secs_f64()) / 2.0
    };
    mid * 1e3
}

/// Time `repeats` in-memory runs of the pipeline. Nothing is written.
pub fn benchmark(config: &RunConfig, repeats: usize) -> std::result::Result<BenchReport, StageError> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into())).at(Stage::Config);
    }
    validate(config).at(Stage::Config)?;
    let mut runs: Vec<(StageTimes, Duration)> = Vec::with_capacity(repeats);
    let mut dims = (0, 0);
    let mut profile_name = String::new();
    for _ in 0..repeats {
        let t = Instant::now();
        let bundle = load_bundle(&config.bundle_dir).at(Stage::Load)?;
        let profile = config.resolve_profile().at(Stage::Classify)?;
        let mut times = StageTimes::default();
        enhance_timed(&bundle, &profile, config.mode, config.max_iters, &mut times).at(Stage::Enhance)?;
        runs.push((times, t.elapsed()));
        dims = bundle.dims();
        profile_name = profile.name;
    }
    let pick = |f: fn(&StageTimes) -> Duration| median_ms(runs.iter().map(|(s, _)| f(s)).collect());
    Ok(BenchReport {
        width: dims.0,
        height: dims.1,
        profile: profile_name,
        mode: config.mode,
        repeats,
        stages_ms: StageMedians {
            vanishing_point: pick(|s| s.vanishing_point),
            channels: pick(|s| s.channels),
            combine: pick(|s| s.combine),
            recolor: pick(|s| s.recolor),
        },
        total_ms: median_ms(runs.iter().map(|(_, t)| *t).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        let ms = |v: &[u64]| v.iter().map(|&x| Duration::from_millis(x)).collect::<Vec<_>>();
        assert_eq!(median_ms(ms(&[5, 1, 3])), 3.0);
        assert_eq!(median_ms(ms(&[4, 1, 3, 2])), 2.5);
    }

    #[test]
    fn zero_repeats_is_a_config_error() {
        let cfg = RunConfig::new("/nonexistent", "/tmp/out", "method");
        let err = benchmark(&cfg, 0).unwrap_err();
        assert_eq!(err.stage, Stage::Config);
        assert_eq!(err.error.kind(), "InvalidConfig");
    }

    #[test]
    fn missing_bundle_fails_at_load() {
        let cfg = RunConfig::new("/nonexistent/bundle", "/tmp/out", "method");
        let res = run(&cfg);
        assert_eq!(exit_code_for(&res), EXIT_ERROR);
        let err = res.unwrap_err();
        assert_eq!(err.stage, Stage::Load);
        assert!(err.to_string().contains("MissingFile"));
    }
}
