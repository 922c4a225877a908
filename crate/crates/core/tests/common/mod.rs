//! Synthetic glyphs and page composition shared by the integration tests.
#![allow(dead_code)]

use glyphocr::BinaryRaster;

pub const CANVAS: usize = 64;
const STROKE: f64 = 3.0;

fn segment_distance(px: f64, py: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    (px - (ax + t * dx)).hypot(py - (ay + t * dy))
}

enum Stroke {
    Line((f64, f64), (f64, f64)),
    /// Circle arc: center, radius, start and end angle in degrees (0 = east, clockwise on screen).
    Arc((f64, f64), f64, f64, f64),
}

fn render(strokes: &[Stroke]) -> BinaryRaster {
    let mut r = BinaryRaster::blank(CANVAS, CANVAS).unwrap();
    for y in 0..CANVAS {
        for x in 0..CANVAS {
            let (px, py) = (x as f64, y as f64);
            let ink = strokes.iter().any(|s| match *s {
                Stroke::Line(a, b) => segment_distance(px, py, a, b) <= STROKE,
                Stroke::Arc((cx, cy), radius, from, to) => {
                    let d = (px - cx).hypot(py - cy);
                    let mut angle = (py - cy).atan2(px - cx).to_degrees();
                    if angle < 0.0 {
                        angle += 360.0;
                    }
                    (d - radius).abs() <= STROKE && angle >= from && angle <= to
                }
            });
            if ink {
                r.set(x, y, true);
            }
        }
    }
    r
}

/// Twelve visually distinct machine-drawn shapes on a 64x64 canvas.
pub fn shapes() -> Vec<(&'static str, BinaryRaster)> {
    use Stroke::{Arc, Line};
    vec![
        ("O", render(&[Arc((32.0, 32.0), 24.0, 0.0, 360.0)])),
        ("L", render(&[Line((14.0, 8.0), (14.0, 56.0)), Line((14.0, 56.0), (50.0, 56.0))])),
        ("T", render(&[Line((8.0, 10.0), (56.0, 10.0)), Line((32.0, 10.0), (32.0, 56.0))])),
        ("X", render(&[Line((10.0, 10.0), (54.0, 54.0)), Line((54.0, 10.0), (10.0, 54.0))])),
        ("+", render(&[Line((32.0, 8.0), (32.0, 56.0)), Line((8.0, 32.0), (56.0, 32.0))])),
        (
            "H",
            render(&[
                Line((12.0, 8.0), (12.0, 56.0)),
                Line((52.0, 8.0), (52.0, 56.0)),
                Line((12.0, 32.0), (52.0, 32.0)),
            ]),
        ),
        (
            "Z",
            render(&[
                Line((10.0, 10.0), (54.0, 10.0)),
                Line((54.0, 10.0), (10.0, 54.0)),
                Line((10.0, 54.0), (54.0, 54.0)),
            ]),
        ),
        ("V", render(&[Line((10.0, 8.0), (32.0, 56.0)), Line((32.0, 56.0), (54.0, 8.0))])),
        (
            "A",
            render(&[
                Line((32.0, 8.0), (8.0, 56.0)),
                Line((8.0, 56.0), (56.0, 56.0)),
                Line((56.0, 56.0), (32.0, 8.0)),
            ]),
        ),
        (
            "U",
            render(&[
                Line((12.0, 8.0), (12.0, 56.0)),
                Line((12.0, 56.0), (52.0, 56.0)),
                Line((52.0, 56.0), (52.0, 8.0)),
            ]),
        ),
        ("C", render(&[Arc((34.0, 32.0), 24.0, 45.0, 315.0)])),
        (
            "E",
            render(&[
                Line((12.0, 8.0), (12.0, 56.0)),
                Line((12.0, 8.0), (52.0, 8.0)),
                Line((12.0, 32.0), (44.0, 32.0)),
                Line((12.0, 56.0), (52.0, 56.0)),
            ]),
        ),
    ]
}

/// Nearest-neighbor resize to `new_w x new_h`.
pub fn resize(r: &BinaryRaster, new_w: usize, new_h: usize) -> BinaryRaster {
    let mut out = BinaryRaster::blank(new_w, new_h).unwrap();
    for y in 0..new_h {
        for x in 0..new_w {
            let sx = (x * r.width()) / new_w;
            let sy = (y * r.height()) / new_h;
            if r.is_foreground(sx, sy) {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Ors `r` into `page` with its top-left corner at `(ox, oy)`.
pub fn paste(page: &mut BinaryRaster, r: &BinaryRaster, ox: usize, oy: usize) {
    for (x, y) in r.foreground() {
        page.set(ox + x, oy + y, true);
    }
}

/// Inclusive-exclusive ink extent of `r` by scanning every pixel.
pub fn ink_extent(r: &BinaryRaster) -> (usize, usize, usize, usize) {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..r.height() {
        for x in 0..r.width() {
            if r.get(x, y) == 1 {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
            }
        }
    }
    (x0, y0, x1, y1)
}
