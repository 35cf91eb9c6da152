//! Profile-driven recoloring of architectural renders.
//!
//! A scene bundle (color render, depth, per-pixel element labels and an element
//! catalog) is scored with an Itti-style saliency model whose orientation
//! channel is measured relative to the scene's vanishing point. Elements a
//! user profile marks as irrelevant are then shifted toward a contrasting hue
//! until the relevant elements carry the larger share of saliency.

pub mod attention;
pub mod color;
pub mod enhancer;
pub mod error;
pub mod ontology;
pub mod perspective;
pub mod pipeline;
pub mod raster;
pub mod saliency;
pub mod scene_io;
pub mod synth;

pub use attention::ConspicuitySet;
pub use enhancer::{enhance, EnhancementReport, RegionStats, TargetColor};
pub use error::{Error, Result};
pub use ontology::{classify, relevance_masks, ElementCatalog, PixelSet, Profile};
pub use perspective::VanishingPoint;
pub use pipeline::{benchmark, run, RunConfig};
pub use raster::{RgbImage, ScenePlane};
pub use saliency::{compute_saliency, Mode, SaliencyMap};
pub use scene_io::{load_bundle, DepthMap, LabelMask, SceneBundle};
pub use synth::{generate_scene, render_scene, SynthSpec};
