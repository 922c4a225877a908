//! Page-level orchestration: segmentation, glyph preparation and
//! recognition of every character on a binarized page.

use thiserror::Error;

use crate::classifier::{ClassifyError, Match, TemplateStore};
use crate::features::{FeatureConfig, DEFAULT_RINGS};
use crate::glyphnorm::{normalize_box, Glyph, GlyphError, MIN_GLYPH_SIZE};
use crate::raster::{BinaryRaster, Threshold};
use crate::segmentation::{
    find_text_lines, group_words, segment_characters, tight_bounding_box, CharBox, SegmentError,
    TextLine,
};
use crate::thinning::hilditch_thin;

pub const DEFAULT_GLYPH_SIZE: usize = 32;
pub const DEFAULT_MIN_LINE_HEIGHT: usize = 2;
pub const DEFAULT_GAP_FACTOR: f64 = 2.0;

/// Label emitted for characters rejected by the distance cut-off.
pub const REJECT_LABEL: &str = "?";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("store was built with size {store_size} and {store_rings} rings, pipeline uses size {size} and {rings} rings")]
    StoreMismatch {
        store_size: usize,
        store_rings: usize,
        size: usize,
        rings: usize,
    },
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Glyph(#[from] GlyphError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Every tunable of the recognition pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub threshold: Threshold,
    pub invert: bool,
    pub min_line_height: usize,
    pub gap_factor: f64,
    pub size: usize,
    pub rings: usize,
    pub k: usize,
    pub reject_distance: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: Threshold::Otsu,
            invert: false,
            min_line_height: DEFAULT_MIN_LINE_HEIGHT,
            gap_factor: DEFAULT_GAP_FACTOR,
            size: DEFAULT_GLYPH_SIZE,
            rings: DEFAULT_RINGS,
            k: 1,
            reject_distance: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::InvalidConfig(m));
        if self.size < MIN_GLYPH_SIZE {
            return fail(format!("glyph size {} is below {MIN_GLYPH_SIZE}", self.size));
        }
        if self.rings == 0 {
            return fail("ring count must be at least 1".into());
        }
        if self.k == 0 {
            return fail("neighbor count must be at least 1".into());
        }
        if !(self.gap_factor > 0.0 && self.gap_factor.is_finite()) {
            return fail(format!("gap factor {} must be positive", self.gap_factor));
        }
        if self.reject_distance.is_some_and(|d| d.is_nan() || d < 0.0) {
            return fail("reject distance must be non-negative".into());
        }
        Ok(())
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            size: self.size,
            rings: self.rings,
        }
    }
}

/// One text line with its character boxes, word indices assigned.
#[derive(Clone, Debug, PartialEq)]
pub struct LineLayout {
    pub index: usize,
    pub line: TextLine,
    pub boxes: Vec<CharBox>,
}

/// Lines, characters and words of a page.
pub fn layout_page(page: &BinaryRaster, cfg: &PipelineConfig) -> Result<Vec<LineLayout>, PipelineError> {
    find_text_lines(page, cfg.min_line_height.max(1))
        .into_iter()
        .enumerate()
        .map(|(index, line)| {
            let boxes = segment_characters(page, line.band, index)?;
            Ok(LineLayout {
                index,
                line,
                boxes: group_words(&boxes, cfg.gap_factor),
            })
        })
        .collect()
}

/// Crop, tighten, normalize and thin one character.
pub fn prepare_glyph(page: &BinaryRaster, b: CharBox, size: usize) -> Result<Glyph, PipelineError> {
    let tight = tight_bounding_box(page, b)?;
    let glyph = normalize_box(page, tight, size)?;
    let skeleton = hilditch_thin(glyph.raster());
    Ok(glyph.with_raster(skeleton)?)
}

/// [`prepare_glyph`] over a whole image holding a single character.
pub fn prepare_sample(image: &BinaryRaster, size: usize) -> Result<Glyph, PipelineError> {
    if image.foreground_count() == 0 {
        return Err(GlyphError::EmptyForeground.into());
    }
    prepare_glyph(image, CharBox::full(image), size)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognizedChar {
    pub char_index: usize,
    pub bbox: CharBox,
    pub glyph: Glyph,
    pub matched: Match,
    /// The matched label, or [`REJECT_LABEL`] past the reject distance.
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognizedLine {
    pub layout: LineLayout,
    pub chars: Vec<RecognizedChar>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Recognition {
    pub lines: Vec<RecognizedLine>,
}

impl Recognition {
    /// One output line per text line, top to bottom; words separated by a
    /// space and characters by `separator`.
    pub fn transcript(&self, separator: &str) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let mut words: Vec<Vec<&str>> = Vec::new();
            for c in &line.chars {
                let w = c.bbox.word_index;
                if words.len() <= w {
                    words.resize_with(w + 1, Vec::new);
                }
                words[w].push(&c.label);
            }
            let text: Vec<String> = words.iter().map(|w| w.join(separator)).collect();
            out.push_str(&text.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Runs the full pipeline over a binarized page.
pub fn recognize_page(
    page: &BinaryRaster,
    store: &TemplateStore,
    cfg: &PipelineConfig,
) -> Result<Recognition, PipelineError> {
    cfg.validate()?;
    if store.config() != cfg.features() {
        return Err(PipelineError::StoreMismatch {
            store_size: store.config().size,
            store_rings: store.config().rings,
            size: cfg.size,
            rings: cfg.rings,
        });
    }
    let mut lines = Vec::new();
    for layout in layout_page(page, cfg)? {
        let mut chars = Vec::with_capacity(layout.boxes.len());
        for (char_index, &bbox) in layout.boxes.iter().enumerate() {
            let glyph = prepare_glyph(page, bbox, cfg.size)?;
            let matched = store.classify(&glyph, cfg.k)?;
            let label = match cfg.reject_distance {
                Some(limit) if matched.distance > limit => REJECT_LABEL.to_string(),
                _ => matched.label.clone(),
            };
            chars.push(RecognizedChar {
                char_index,
                bbox,
                glyph,
                matched,
                label,
            });
        }
        lines.push(RecognizedLine { layout, chars });
    }
    Ok(Recognition { lines })
}
