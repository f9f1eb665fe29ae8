//! Structural-dissimilarity saliency (SDS) detection and a fixation-prediction
//! evaluation harness.
//!
//! The pipeline resizes an image to a patch-aligned grid, converts it to an
//! opponent color space, extracts a structural feature per channel, and
//! scores every patch by its spatially weighted relative difference from
//! all other patches. [`metrics`] implements NSS, CC, AUC and EMD, and
//! [`harness`] drives batch runs, parameter sweeps and ablations.

pub mod error;
pub mod features;
pub mod harness;
pub mod imaging;
pub mod metrics;
pub mod sds;

pub use error::{Error, Result};
pub use features::{extract_features, FeatureKind, FeatureStack};
pub use imaging::{load_image, plan_grid, resize_bicubic, to_color_space, ColorSpace, PatchGrid, PlanarImage};
pub use sds::{compute_saliency, predict, Measure, Normalization, PatchIndex, SaliencyMap, SdsConfig, Variant};
