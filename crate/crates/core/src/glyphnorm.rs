//! Cropping and size normalization of character glyphs.

use thiserror::Error;

use crate::raster::BinaryRaster;
use crate::segmentation::{CharBox, SegmentError};

/// Smallest canvas [`normalize`] accepts.
pub const MIN_GLYPH_SIZE: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlyphError {
    #[error("glyph has no foreground pixels")]
    EmptyForeground,
    #[error("glyph size {size} is below the minimum of {MIN_GLYPH_SIZE}")]
    SizeTooSmall { size: usize },
    #[error("glyph raster is {width}x{height}, expected a square canvas")]
    NotSquare { width: usize, height: usize },
    #[error(transparent)]
    Segment(#[from] SegmentError),
}

/// A character normalized onto a square `size x size` canvas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glyph {
    raster: BinaryRaster,
    source_box: CharBox,
}

impl Glyph {
    /// Wraps an existing square raster, e.g. one read back from a debug dump.
    pub fn new(raster: BinaryRaster, source_box: CharBox) -> Result<Self, GlyphError> {
        if raster.width() != raster.height() {
            return Err(GlyphError::NotSquare {
                width: raster.width(),
                height: raster.height(),
            });
        }
        Ok(Self { raster, source_box })
    }

    /// Wraps a square raster whose provenance is the raster itself.
    pub fn from_raster(raster: BinaryRaster) -> Result<Self, GlyphError> {
        let source_box = CharBox::full(&raster);
        Self::new(raster, source_box)
    }

    pub fn raster(&self) -> &BinaryRaster {
        &self.raster
    }

    pub fn into_raster(self) -> BinaryRaster {
        self.raster
    }

    pub fn source_box(&self) -> CharBox {
        self.source_box
    }

    pub fn size(&self) -> usize {
        self.raster.width()
    }

    /// Same provenance, different pixels (e.g. after thinning).
    pub fn with_raster(&self, raster: BinaryRaster) -> Result<Self, GlyphError> {
        Self::new(raster, self.source_box)
    }
}

/// Copies the pixels under `b` into a new raster.
pub fn crop(r: &BinaryRaster, b: CharBox) -> Result<BinaryRaster, GlyphError> {
    b.check(r)?;
    let mut data = Vec::with_capacity(b.width() * b.height());
    for row in r.data().chunks(r.width()).take(b.y1).skip(b.y0) {
        data.extend_from_slice(&row[b.x0..b.x1]);
    }
    Ok(BinaryRaster::new(b.width(), b.height(), data).expect("crop of a valid box"))
}

/// Source index range covered by output cell `u` when `src` pixels map onto
/// `dst` cells. Always holds the nearest-neighbor pixel `floor(u*src/dst)`;
/// when shrinking it extends to the whole span so thin strokes survive.
fn source_span(u: usize, src: usize, dst: usize) -> std::ops::Range<usize> {
    let lo = u * src / dst;
    let hi = ((u + 1) * src / dst).max(lo + 1);
    lo..hi
}

/// Scales `r` so its longer side spans `size` pixels and centers it on a
/// `size x size` canvas.
///
/// The shorter side becomes `max(1, round(short * size / long))` pixels,
/// and the image sits at offset `floor((size - extent) / 2)` on each axis.
/// Enlarging is plain nearest-neighbor sampling. When a source span covers
/// several pixels, the output cell is ink if any of them is, so a glyph
/// never loses all of its ink.
pub fn normalize(r: &BinaryRaster, size: usize) -> Result<Glyph, GlyphError> {
    if size < MIN_GLYPH_SIZE {
        return Err(GlyphError::SizeTooSmall { size });
    }
    if r.foreground_count() == 0 {
        return Err(GlyphError::EmptyForeground);
    }
    let (w, h) = (r.width(), r.height());
    let scaled = |short: usize, long: usize| ((short * size + long / 2) / long).max(1);
    let (ext_w, ext_h) = if w >= h {
        (size, scaled(h, w))
    } else {
        (scaled(w, h), size)
    };
    let (off_x, off_y) = ((size - ext_w) / 2, (size - ext_h) / 2);

    let mut out = BinaryRaster::blank(size, size).expect("size >= 4");
    for v in 0..ext_h {
        let rows = source_span(v, h, ext_h);
        for u in 0..ext_w {
            let cols = source_span(u, w, ext_w);
            let ink = rows
                .clone()
                .any(|y| cols.clone().any(|x| r.is_foreground(x, y)));
            if ink {
                out.set(off_x + u, off_y + v, true);
            }
        }
    }
    Ok(Glyph {
        raster: out,
        source_box: CharBox::full(r),
    })
}

/// Crops `b` out of a page and normalizes it, recording `b` as provenance.
pub fn normalize_box(r: &BinaryRaster, b: CharBox, size: usize) -> Result<Glyph, GlyphError> {
    let cropped = crop(r, b)?;
    let mut glyph = normalize(&cropped, size)?;
    glyph.source_box = b;
    Ok(glyph)
}
