//! Moment and histogram features of a glyph.
//!
//! Moments are raw geometric moments `M_pq = sum x^p * y^q` over ink pixels,
//! with `x` the column and `y` the row counted from the top-left corner. On
//! an integer grid they are exact integers; they are carried as `f64`, which
//! is exact for every canvas size this crate works with.

use thiserror::Error;

use crate::glyphnorm::Glyph;
use crate::raster::BinaryRaster;

pub const DEFAULT_RINGS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("glyph has no foreground pixels")]
    EmptyGlyph,
    #[error("glyph is {actual}x{actual} but the feature configuration expects {expected}x{expected}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("radial histogram needs at least one ring")]
    NoRings,
}

/// The eight raw moments used by the recognizer.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MomentSet {
    pub m00: f64,
    pub m10: f64,
    pub m01: f64,
    pub m11: f64,
    pub m20: f64,
    pub m02: f64,
    pub m30: f64,
    pub m03: f64,
}

impl MomentSet {
    pub fn of(r: &BinaryRaster) -> Self {
        let mut s = [0u64; 8];
        for (x, y) in r.foreground() {
            let (x, y) = (x as u64, y as u64);
            s[0] += 1;
            s[1] += x;
            s[2] += y;
            s[3] += x * y;
            s[4] += x * x;
            s[5] += y * y;
            s[6] += x * x * x;
            s[7] += y * y * y;
        }
        let [m00, m10, m01, m11, m20, m02, m30, m03] = s.map(|v| v as f64);
        Self {
            m00,
            m10,
            m01,
            m11,
            m20,
            m02,
            m30,
            m03,
        }
    }
}

/// `M_pq` of the glyph.
pub fn raw_moment(g: &Glyph, p: u32, q: u32) -> f64 {
    g.raster()
        .foreground()
        .map(|(x, y)| (x as u64).pow(p) * (y as u64).pow(q))
        .sum::<u64>() as f64
}

/// Center of mass `(M10/M00, M01/M00)`.
pub fn centroid(m: &MomentSet) -> Result<(f64, f64), FeatureError> {
    if m.m00 == 0.0 {
        return Err(FeatureError::EmptyGlyph);
    }
    Ok((m.m10 / m.m00, m.m01 / m.m00))
}

/// The four moment features:
///
/// ```text
/// f1 = M20 + M02 + M00
/// f2 = |M20 - M02| + M11
/// f3 = |M10 - M01|
/// f4 = M30 + M03
/// ```
pub fn shape_features(m: &MomentSet) -> [f64; 4] {
    [
        m.m20 + m.m02 + m.m00,
        (m.m20 - m.m02).abs() + m.m11,
        (m.m10 - m.m01).abs(),
        m.m30 + m.m03,
    ]
}

/// Ink count per row.
pub fn horizontal_histogram(g: &Glyph) -> Vec<usize> {
    let r = g.raster();
    r.data()
        .chunks(r.width())
        .map(|row| row.iter().map(|&v| usize::from(v)).sum())
        .collect()
}

/// Ink count per column.
pub fn vertical_histogram(g: &Glyph) -> Vec<usize> {
    let r = g.raster();
    let mut counts = vec![0; r.width()];
    for row in r.data().chunks(r.width()) {
        for (c, &v) in counts.iter_mut().zip(row) {
            *c += usize::from(v);
        }
    }
    counts
}

/// Ink count per concentric ring around the centroid.
///
/// The rings have equal width and together reach the canvas corner farthest
/// from the centroid; a pixel at distance `d` lands in ring
/// `min(rings - 1, floor(d / (d_max / rings)))`.
pub fn radial_histogram(g: &Glyph, rings: usize) -> Result<Vec<usize>, FeatureError> {
    if rings == 0 {
        return Err(FeatureError::NoRings);
    }
    let r = g.raster();
    let (cx, cy) = centroid(&MomentSet::of(r))?;
    let (far_x, far_y) = ((r.width() - 1) as f64, (r.height() - 1) as f64);
    let d_max = [(0.0, 0.0), (far_x, 0.0), (0.0, far_y), (far_x, far_y)]
        .iter()
        .map(|&(x, y): &(f64, f64)| (x - cx).hypot(y - cy))
        .fold(0.0, f64::max);
    let ring_width = d_max / rings as f64;

    let mut counts = vec![0; rings];
    for (x, y) in r.foreground() {
        let d = (x as f64 - cx).hypot(y as f64 - cy);
        let ring = if ring_width > 0.0 {
            ((d / ring_width).floor() as usize).min(rings - 1)
        } else {
            0
        };
        counts[ring] += 1;
    }
    Ok(counts)
}

/// Canvas size and ring count a feature vector was extracted with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FeatureConfig {
    pub size: usize,
    pub rings: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            size: crate::DEFAULT_GLYPH_SIZE,
            rings: DEFAULT_RINGS,
        }
    }
}

impl FeatureConfig {
    /// Vector length: four moment features, two `size`-long histograms and
    /// the rings.
    pub fn dim(&self) -> usize {
        4 + 2 * self.size + self.rings
    }
}

/// `[f1..f4, horizontal, vertical, radial]` concatenated.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    config: FeatureConfig,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn config(&self) -> FeatureConfig {
        self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn shape(&self) -> &[f64] {
        &self.values[..4]
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.values[4..4 + self.config.size]
    }

    pub fn vertical(&self) -> &[f64] {
        &self.values[4 + self.config.size..4 + 2 * self.config.size]
    }

    pub fn radial(&self) -> &[f64] {
        &self.values[4 + 2 * self.config.size..]
    }
}

pub fn feature_vector(g: &Glyph, config: FeatureConfig) -> Result<FeatureVector, FeatureError> {
    if g.size() != config.size {
        return Err(FeatureError::SizeMismatch {
            expected: config.size,
            actual: g.size(),
        });
    }
    let moments = MomentSet::of(g.raster());
    if moments.m00 == 0.0 {
        return Err(FeatureError::EmptyGlyph);
    }
    let mut values = Vec::with_capacity(config.dim());
    values.extend(shape_features(&moments));
    values.extend(horizontal_histogram(g).into_iter().map(|c| c as f64));
    values.extend(vertical_histogram(g).into_iter().map(|c| c as f64));
    values.extend(radial_histogram(g, config.rings)?.into_iter().map(|c| c as f64));
    debug_assert_eq!(values.len(), config.dim());
    Ok(FeatureVector { config, values })
}
