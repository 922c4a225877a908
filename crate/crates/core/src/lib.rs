//! Character recognition for scanned pages.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`raster`]: PNM I/O and binarization (Otsu or a fixed cut).
//! - [`segmentation`]: projection profiles, text lines with baselines,
//!   character boxes and word grouping.
//! - [`glyphnorm`]: cropping and size normalization onto a square canvas.
//! - [`thinning`]: Hilditch skeletonization.
//! - [`features`]: raw moments, the four moment features and histograms.
//! - [`classifier`]: z-scored nearest-neighbor matching against a template store.
//! - [`pipeline`]: the stages wired together for whole pages.

pub mod classifier;
pub mod features;
pub mod glyphnorm;
pub mod pipeline;
pub mod raster;
pub mod segmentation;
pub mod thinning;

pub use classifier::{train, Match, TemplateStore, TrainingSample};
pub use features::{feature_vector, FeatureConfig, FeatureVector};
pub use glyphnorm::{normalize, Glyph};
pub use pipeline::{
    prepare_glyph, prepare_sample, recognize_page, PipelineConfig, PipelineError, Recognition,
    DEFAULT_GLYPH_SIZE,
};
pub use raster::{binarize, load_pnm, save_pbm, BinaryRaster, GrayRaster, PnmImage, Threshold};
pub use segmentation::{Band, CharBox, TextLine};
pub use thinning::hilditch_thin;
