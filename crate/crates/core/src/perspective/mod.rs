//! Vanishing-point detection, polar warping around it, and the orientation
//! channels built on top.

pub mod orientation;
pub mod polar;
pub mod vanishing;

pub use orientation::{
    gabor_orientation_conspicuity, perspective_orientation_conspicuity, perspective_orientation_on_grid,
    perspective_polar_map, radial_contrast, GaborKernel,
};
pub use polar::{polar_project, polar_unproject, PolarFrame, PolarGrid, ANGULAR_BINS};
pub use vanishing::{detect_segments, detect_vanishing_point, Segment, VanishingPoint};
