//! Projection-profile page segmentation.
//!
//! A page is cut into text lines at rows with no ink (the horizontal profile),
//! each line into characters at columns with no ink (the vertical profile),
//! and characters are grouped into words by comparing the gaps between them.

use thiserror::Error;

use crate::raster::BinaryRaster;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SegmentError {
    #[error("band [{start}, {end}) is not a valid row range for a raster of height {height}")]
    InvalidBand {
        start: usize,
        end: usize,
        height: usize,
    },
    #[error("box ({x0},{y0})-({x1},{y1}) lies outside the {width}x{height} raster")]
    BoxOutOfBounds {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
        width: usize,
        height: usize,
    },
    #[error("box ({x0},{y0})-({x1},{y1}) contains no foreground pixel")]
    EmptyBox {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// One count per row.
    Horizontal,
    /// One count per column.
    Vertical,
}

/// Ink counts along one axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub axis: Axis,
    pub counts: Vec<usize>,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Half-open row range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Band {
    pub start: usize,
    pub end: usize,
}

impl Band {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn height(&self) -> usize {
        self.end - self.start
    }

    fn check(&self, height: usize) -> Result<(), SegmentError> {
        if self.start < self.end && self.end <= height {
            Ok(())
        } else {
            Err(SegmentError::InvalidBand {
                start: self.start,
                end: self.end,
                height,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TextLine {
    pub band: Band,
    pub upper_baseline: usize,
    pub lower_baseline: usize,
}

/// Character bounding box; `x0,y0` inclusive, `x1,y1` exclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CharBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub line_index: usize,
    pub word_index: usize,
}

impl CharBox {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self {
            x0,
            y0,
            x1,
            y1,
            line_index: 0,
            word_index: 0,
        }
    }

    /// Box covering the whole raster.
    pub fn full(r: &BinaryRaster) -> Self {
        Self::new(0, 0, r.width(), r.height())
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    pub(crate) fn check(&self, r: &BinaryRaster) -> Result<(), SegmentError> {
        if self.x0 < self.x1 && self.y0 < self.y1 && self.x1 <= r.width() && self.y1 <= r.height() {
            Ok(())
        } else {
            Err(SegmentError::BoxOutOfBounds {
                x0: self.x0,
                y0: self.y0,
                x1: self.x1,
                y1: self.y1,
                width: r.width(),
                height: r.height(),
            })
        }
    }
}

pub fn horizontal_profile(r: &BinaryRaster) -> Profile {
    let counts = r
        .data()
        .chunks(r.width())
        .map(|row| row.iter().filter(|&&v| v == 1).count())
        .collect();
    Profile {
        axis: Axis::Horizontal,
        counts,
    }
}

/// Column counts restricted to the rows of `band`.
pub fn vertical_profile(r: &BinaryRaster, band: Band) -> Result<Profile, SegmentError> {
    band.check(r.height())?;
    let mut counts = vec![0; r.width()];
    for row in r.data().chunks(r.width()).take(band.end).skip(band.start) {
        for (c, &v) in counts.iter_mut().zip(row) {
            *c += usize::from(v);
        }
    }
    Ok(Profile {
        axis: Axis::Vertical,
        counts,
    })
}

/// Maximal runs of nonzero counts as half-open ranges, in order.
fn nonzero_runs(counts: &[usize]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &c) in counts.iter().enumerate() {
        match (c > 0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, counts.len()));
    }
    runs
}

/// Text-line bands: maximal runs of inked rows, top to bottom, keeping only
/// runs at least `min_height` rows tall.
pub fn find_line_bands(p: &Profile, min_height: usize) -> Vec<Band> {
    nonzero_runs(&p.counts)
        .into_iter()
        .filter(|(s, e)| e - s >= min_height)
        .map(|(s, e)| Band::new(s, e))
        .collect()
}

/// Upper and lower baselines of a band from the profile's first difference.
///
/// The upper baseline is the row in the top half entered by the steepest
/// rise in ink count; the lower baseline is the row in the bottom half left
/// by the steepest fall. Rows outside the profile count as zero, so the
/// transitions at the band edges take part. Ties go to the row nearest the
/// band's center. For odd heights the center row belongs to both halves.
pub fn find_baselines(p: &Profile, band: Band) -> (usize, usize) {
    if band.height() <= 1 {
        return (band.start, band.start);
    }
    let count = |y: isize| -> i64 {
        if y < 0 {
            0
        } else {
            p.counts.get(y as usize).map_or(0, |&c| c as i64)
        }
    };
    let half = band.height().div_ceil(2);
    // Twice the center row, to keep distances integral.
    let center2 = (band.start + band.end - 1) as i64;
    let dist = |y: usize| (2 * y as i64 - center2).abs();

    let mut upper = (band.start, i64::MIN);
    for y in band.start..band.start + half {
        let rise = count(y as isize) - count(y as isize - 1);
        if rise > upper.1 || (rise == upper.1 && dist(y) < dist(upper.0)) {
            upper = (y, rise);
        }
    }
    let mut lower = (band.end - 1, i64::MAX);
    for y in band.end - half..band.end {
        let fall = count(y as isize + 1) - count(y as isize);
        if fall < lower.1 || (fall == lower.1 && dist(y) < dist(lower.0)) {
            lower = (y, fall);
        }
    }
    (upper.0, lower.0)
}

/// Text lines of a page: bands plus their baselines.
pub fn find_text_lines(r: &BinaryRaster, min_height: usize) -> Vec<TextLine> {
    let profile = horizontal_profile(r);
    find_line_bands(&profile, min_height)
        .into_iter()
        .map(|band| {
            let (upper_baseline, lower_baseline) = find_baselines(&profile, band);
            TextLine {
                band,
                upper_baseline,
                lower_baseline,
            }
        })
        .collect()
}

/// Character boxes of one band, left to right.
///
/// Each maximal run of inked columns becomes one box, tightened vertically to
/// its ink. Characters that touch are not split. Boxes carry `line_index`
/// and word index 0.
pub fn segment_characters(
    r: &BinaryRaster,
    band: Band,
    line_index: usize,
) -> Result<Vec<CharBox>, SegmentError> {
    let profile = vertical_profile(r, band)?;
    nonzero_runs(&profile.counts)
        .into_iter()
        .map(|(x0, x1)| {
            let column = CharBox {
                x0,
                y0: band.start,
                x1,
                y1: band.end,
                line_index,
                word_index: 0,
            };
            tight_bounding_box(r, column)
        })
        .collect()
}

fn median(sorted: &[usize]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

/// Assigns word indices to the boxes of one line.
///
/// A new word starts after every gap at least `gap_factor` times the median
/// gap of the line.
pub fn group_words(boxes: &[CharBox], gap_factor: f64) -> Vec<CharBox> {
    let gaps: Vec<usize> = boxes
        .windows(2)
        .map(|w| w[1].x0.saturating_sub(w[0].x1))
        .collect();
    let mut sorted = gaps.clone();
    sorted.sort_unstable();
    let limit = if sorted.is_empty() {
        f64::INFINITY
    } else {
        gap_factor * median(&sorted)
    };

    let mut word = 0;
    let mut out = Vec::with_capacity(boxes.len());
    for (i, b) in boxes.iter().enumerate() {
        if i > 0 && gaps[i - 1] as f64 >= limit {
            word += 1;
        }
        out.push(CharBox {
            word_index: word,
            ..*b
        });
    }
    out
}

/// Shrinks `b` to the smallest box holding all of its ink.
pub fn tight_bounding_box(r: &BinaryRaster, b: CharBox) -> Result<CharBox, SegmentError> {
    b.check(r)?;
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in b.y0..b.y1 {
        for x in b.x0..b.x1 {
            if r.is_foreground(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
            }
        }
    }
    if x1 == 0 {
        return Err(SegmentError::EmptyBox {
            x0: b.x0,
            y0: b.y0,
            x1: b.x1,
            y1: b.y1,
        });
    }
    Ok(CharBox { x0, y0, x1, y1, ..b })
}
