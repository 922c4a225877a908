//! Raster types, PNM decoding/encoding and grayscale binarization.
//!
//! Two pixel grids are used throughout the crate: [`GrayRaster`] for 8-bit
//! intensities and [`BinaryRaster`] for two-level images where `1` marks ink.
//! Both are row-major and immutable once built.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised when building a raster from raw parts.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RasterError {
    #[error("raster dimensions must be at least 1x1, got {width}x{height}")]
    ZeroSize { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values but {width}x{height} needs {expected}")]
    LengthMismatch {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("binary raster value {value} at index {index} is not 0 or 1")]
    NotBinary { index: usize, value: u8 },
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::ZeroSize { width, height });
    }
    let expected = width * height;
    if len != expected {
        return Err(RasterError::LengthMismatch {
            width,
            height,
            expected,
            actual: len,
        });
    }
    Ok(())
}

/// 8-bit grayscale image, `0` = black, `255` = white.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayRaster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayRaster {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// A raster with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, RasterError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// Two-level image. `1` is foreground (ink), `0` is background.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryRaster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryRaster {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, data.len())?;
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(RasterError::NotBinary { index, value });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// An all-background raster.
    pub fn blank(width: usize, height: usize) -> Result<Self, RasterError> {
        Self::new(width, height, vec![0; width * height])
    }

    /// Builds a raster from rows of `'#'` (ink) and `'.'` (background).
    ///
    /// Mostly useful for tests and fixtures; any character other than `'#'`
    /// or `'1'` reads as background.
    pub fn from_ascii(rows: &[&str]) -> Result<Self, RasterError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            let before = data.len();
            data.extend(row.chars().map(|c| u8::from(c == '#' || c == '1')));
            if data.len() - before != width {
                return Err(RasterError::LengthMismatch {
                    width,
                    height,
                    expected: width * height,
                    actual: before + row.chars().count(),
                });
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Reads a pixel at signed coordinates; anything outside the raster is background.
    pub fn get_or_zero(&self, x: isize, y: isize) -> u8 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = u8::from(value);
    }

    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == 1
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    /// Row-major iterator over the coordinates of every ink pixel.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Renders the raster with `'#'` for ink and `'.'` for background, one line per row.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.data.chunks(self.width) {
            out.extend(row.iter().map(|&v| if v == 1 { '#' } else { '.' }));
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for BinaryRaster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryRaster {}x{}", self.width, self.height)?;
        f.write_str(&self.to_ascii())
    }
}

/// A decoded PNM image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PnmImage {
    Gray(GrayRaster),
    Binary(BinaryRaster),
}

/// Errors from [`load_pnm`]. Every variant carries the byte offset where
/// decoding stopped.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PnmError {
    #[error("not a PNM image: bad magic number at byte {offset}")]
    BadMagic { offset: usize },
    #[error("unsupported PNM variant {magic} at byte {offset} (only P1, P2, P4 and P5 are read)")]
    Unsupported { magic: String, offset: usize },
    #[error("malformed PNM header at byte {offset}: {reason}")]
    Header { offset: usize, reason: String },
    #[error("truncated PNM pixel data at byte {offset}: {missing} more sample(s) expected")]
    Truncated { offset: usize, missing: usize },
    #[error("invalid PNM sample at byte {offset}: {reason}")]
    Sample { offset: usize, reason: String },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Magic {
    PbmAscii,
    PgmAscii,
    PbmRaw,
    PgmRaw,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn header_number(&mut self, what: &str) -> Result<u32, PnmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::Header {
                offset: start,
                reason: format!("expected {what}"),
            });
        }
        // Digits only, so the slice is valid UTF-8.
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or_default();
        text.parse::<u32>().map_err(|_| PnmError::Header {
            offset: start,
            reason: format!("{what} {text} is out of range"),
        })
    }

    /// Binary formats separate the last header token from the raster with
    /// exactly one whitespace byte.
    fn single_whitespace(&mut self) -> Result<(), PnmError> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(PnmError::Header {
                offset: self.pos,
                reason: "expected whitespace before raster data".into(),
            }),
            None => Err(PnmError::Truncated {
                offset: self.pos,
                missing: 1,
            }),
        }
    }
}

/// Decodes a P1, P2, P4 or P5 image.
///
/// Bitmaps (P1/P4) become [`PnmImage::Binary`] with the PBM convention that
/// `1` is black, i.e. ink. Graymaps (P2/P5) become [`PnmImage::Gray`], with
/// samples rescaled to `round(v * 255 / maxval)` when `maxval != 255`.
pub fn load_pnm(bytes: &[u8]) -> Result<PnmImage, PnmError> {
    let magic = match bytes.get(..2) {
        Some(b"P1") => Magic::PbmAscii,
        Some(b"P2") => Magic::PgmAscii,
        Some(b"P4") => Magic::PbmRaw,
        Some(b"P5") => Magic::PgmRaw,
        Some([b'P', d]) if d.is_ascii_digit() => {
            return Err(PnmError::Unsupported {
                magic: format!("P{}", *d as char),
                offset: 0,
            })
        }
        _ => return Err(PnmError::BadMagic { offset: 0 }),
    };
    let mut rd = Reader { bytes, pos: 2 };
    if !rd.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PnmError::Header {
            offset: 2,
            reason: "expected whitespace after magic number".into(),
        });
    }

    let width_at = rd.pos;
    let width = rd.header_number("width")? as usize;
    let height = rd.header_number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(PnmError::Header {
            offset: width_at,
            reason: format!("image size {width}x{height} is empty"),
        });
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| PnmError::Header {
            offset: width_at,
            reason: "image size overflows".into(),
        })?;

    match magic {
        Magic::PbmAscii => {
            let mut data = Vec::with_capacity(count);
            for i in 0..count {
                rd.skip_space_and_comments();
                match rd.bytes.get(rd.pos) {
                    Some(b'0') => data.push(0),
                    Some(b'1') => data.push(1),
                    Some(&other) => {
                        return Err(PnmError::Sample {
                            offset: rd.pos,
                            reason: format!("expected '0' or '1', found byte 0x{other:02x}"),
                        })
                    }
                    None => {
                        return Err(PnmError::Truncated {
                            offset: rd.pos,
                            missing: count - i,
                        })
                    }
                }
                rd.pos += 1;
            }
            Ok(PnmImage::Binary(BinaryRaster {
                width,
                height,
                data,
            }))
        }
        Magic::PbmRaw => {
            rd.single_whitespace()?;
            let row_bytes = width.div_ceil(8);
            let needed = row_bytes * height;
            let available = rd.bytes.len() - rd.pos;
            if available < needed {
                let have_rows = available / row_bytes;
                return Err(PnmError::Truncated {
                    offset: rd.bytes.len(),
                    missing: count - have_rows * width,
                });
            }
            let payload = &rd.bytes[rd.pos..rd.pos + needed];
            let mut data = Vec::with_capacity(count);
            for row in payload.chunks(row_bytes) {
                data.extend((0..width).map(|x| (row[x / 8] >> (7 - x % 8)) & 1));
            }
            Ok(PnmImage::Binary(BinaryRaster {
                width,
                height,
                data,
            }))
        }
        Magic::PgmAscii | Magic::PgmRaw => {
            let maxval_at = rd.pos;
            let maxval = rd.header_number("maxval")?;
            if maxval == 0 || maxval > 65535 {
                return Err(PnmError::Header {
                    offset: maxval_at,
                    reason: format!("maxval {maxval} outside 1..=65535"),
                });
            }
            let mut samples = Vec::with_capacity(count);
            if magic == Magic::PgmAscii {
                for i in 0..count {
                    rd.skip_space_and_comments();
                    let at = rd.pos;
                    if at >= rd.bytes.len() {
                        return Err(PnmError::Truncated {
                            offset: at,
                            missing: count - i,
                        });
                    }
                    let v = rd.header_number("sample").map_err(|_| PnmError::Sample {
                        offset: at,
                        reason: "expected a decimal sample".into(),
                    })?;
                    samples.push((at, v));
                }
            } else {
                rd.single_whitespace()?;
                let width_bytes = if maxval < 256 { 1 } else { 2 };
                for i in 0..count {
                    let at = rd.pos;
                    let Some(raw) = rd.bytes.get(at..at + width_bytes) else {
                        return Err(PnmError::Truncated {
                            offset: rd.bytes.len(),
                            missing: count - i,
                        });
                    };
                    let v = raw.iter().fold(0u32, |acc, &b| (acc << 8) | u32::from(b));
                    samples.push((at, v));
                    rd.pos += width_bytes;
                }
            }
            let mut data = Vec::with_capacity(count);
            for (at, v) in samples {
                if v > maxval {
                    return Err(PnmError::Sample {
                        offset: at,
                        reason: format!("sample {v} exceeds maxval {maxval}"),
                    });
                }
                data.push(rescale(v, maxval));
            }
            Ok(PnmImage::Gray(GrayRaster {
                width,
                height,
                data,
            }))
        }
    }
}

/// `round(v * 255 / maxval)`, halves rounded up.
fn rescale(v: u32, maxval: u32) -> u8 {
    if maxval == 255 {
        return v as u8;
    }
    let num = u64::from(v) * 255 * 2 + u64::from(maxval);
    (num / (2 * u64::from(maxval))) as u8
}

/// Encodes a binary raster as a packed P4 bitmap.
pub fn save_pbm(r: &BinaryRaster) -> Vec<u8> {
    let row_bytes = r.width.div_ceil(8);
    let mut out = format!("P4\n{} {}\n", r.width, r.height).into_bytes();
    out.reserve(row_bytes * r.height);
    for row in r.data.chunks(r.width) {
        let mut packed = vec![0u8; row_bytes];
        for (x, &v) in row.iter().enumerate() {
            packed[x / 8] |= v << (7 - x % 8);
        }
        out.extend_from_slice(&packed);
    }
    out
}

/// Encodes a grayscale raster as a P5 graymap with maxval 255.
pub fn save_pgm(g: &GrayRaster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", g.width, g.height).into_bytes();
    out.extend_from_slice(&g.data);
    out
}

/// How [`binarize`] picks its cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Threshold {
    /// Pixels darker than this level become ink.
    Fixed(u8),
    #[default]
    Otsu,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("threshold must be `otsu` or an integer in 0..=255, got `{0}`")]
pub struct ParseThresholdError(String);

impl FromStr for Threshold {
    type Err = ParseThresholdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("otsu") {
            return Ok(Threshold::Otsu);
        }
        s.parse::<u8>()
            .map(Threshold::Fixed)
            .map_err(|_| ParseThresholdError(s.to_string()))
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Fixed(t) => write!(f, "{t}"),
            Threshold::Otsu => f.write_str("otsu"),
        }
    }
}

/// Otsu's threshold over the 256-bin histogram.
///
/// Returns the level `t` maximizing the between-class variance of the split
/// `{v <= t} | {v > t}`; the smallest such `t` wins ties. An image with a
/// single intensity returns that intensity.
pub fn otsu_threshold(g: &GrayRaster) -> u8 {
    let mut hist = [0u64; 256];
    for &v in &g.data {
        hist[v as usize] += 1;
    }
    let mut occupied = hist.iter().enumerate().filter(|(_, &c)| c > 0);
    if let (Some((only, _)), None) = (occupied.next(), occupied.next()) {
        return only as u8;
    }

    let total = g.data.len() as u64;
    let sum_total: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let (mut n0, mut s0) = (0u64, 0u64);
    let (mut best_t, mut best) = (0u8, f64::NEG_INFINITY);
    for (t, &c) in hist.iter().enumerate() {
        n0 += c;
        s0 += t as u64 * c;
        let n1 = total - n0;
        // w0*w1*(mu0-mu1)^2 scaled by N^2: (s0*N - S*n0)^2 / (n0*n1)
        let variance = if n0 == 0 || n1 == 0 {
            0.0
        } else {
            let diff = (i128::from(s0) * i128::from(total) - i128::from(sum_total) * i128::from(n0))
                as f64;
            diff * diff / (n0 as f64 * n1 as f64)
        };
        if variance > best {
            best = variance;
            best_t = t as u8;
        }
    }
    best_t
}

/// Converts a grayscale raster to ink/background.
///
/// Without `invert`, pixels strictly below the cut become ink (dark text on a
/// light page); with `invert`, pixels at or above the cut do. A fixed
/// threshold `t` is the cut itself; under Otsu the cut is `otsu + 1`, so the
/// class `v <= otsu` is the dark one.
pub fn binarize(g: &GrayRaster, threshold: Threshold, invert: bool) -> BinaryRaster {
    let cut: u16 = match threshold {
        Threshold::Fixed(t) => u16::from(t),
        Threshold::Otsu => u16::from(otsu_threshold(g)) + 1,
    };
    let data = g
        .data
        .iter()
        .map(|&v| u8::from((u16::from(v) < cut) != invert))
        .collect();
    BinaryRaster {
        width: g.width,
        height: g.height,
        data,
    }
}

impl PnmImage {
    /// Returns the bitmap as-is, or binarizes a graymap.
    pub fn into_binary(self, threshold: Threshold, invert: bool) -> BinaryRaster {
        match self {
            PnmImage::Binary(b) => b,
            PnmImage::Gray(g) => binarize(&g, threshold, invert),
        }
    }
}
