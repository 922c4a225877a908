//! Hilditch thinning with a 3x3 window.
//!
//! Neighbors of the center pixel `p1` are named clockwise from north:
//!
//! ```text
//! p9 p2 p3
//! p8 p1 p4
//! p7 p6 p5
//! ```
//!
//! A foreground pixel is deletable when
//!
//! 1. `2 <= B(p1) <= 6`, where `B` counts foreground neighbors,
//! 2. `X(p1) = 1`, where `X` counts 0->1 steps around `p2, p3, ..., p9, p2`,
//! 3. `p2 * p4 * p8 = 0` or `X(p2) != 1`,
//! 4. `p2 * p4 * p6 = 0` or `X(p4) != 1`.
//!
//! Each pass marks the deletable pixels of a frozen snapshot. Marks are then
//! committed one at a time, pixels with the most neighbors first and raster
//! order among equals, and each is re-tested on the live raster before it is
//! cleared. Passes repeat until one marks nothing. The re-test is what keeps
//! components from vanishing: clearing all marks at once would erase a 2x2
//! block outright, since each of its four pixels passes the test against
//! the untouched block.

use thiserror::Error;

use crate::raster::BinaryRaster;

/// Offsets of `p2..=p9` relative to the center.
const OFFSETS: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// The eight neighbors `p2..=p9` of a pixel, each 0 or 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Neighborhood([u8; 8]);

impl Neighborhood {
    /// Reads the neighbors of `(x, y)`; pixels outside the raster are 0.
    pub fn around(r: &BinaryRaster, x: isize, y: isize) -> Self {
        let mut n = [0u8; 8];
        for (slot, (dx, dy)) in n.iter_mut().zip(OFFSETS) {
            *slot = r.get_or_zero(x + dx, y + dy);
        }
        Self(n)
    }

    /// Bit `i` of `bits` becomes `p(i + 2)`.
    pub fn from_bits(bits: u8) -> Self {
        let mut n = [0u8; 8];
        for (i, slot) in n.iter_mut().enumerate() {
            *slot = (bits >> i) & 1;
        }
        Self(n)
    }

    /// Value of `p<index>` for `index` in `2..=9`.
    pub fn p(&self, index: usize) -> u8 {
        self.0[index - 2]
    }

    pub fn values(&self) -> [u8; 8] {
        self.0
    }
}

/// `B(p1)`: number of foreground neighbors.
pub fn nonzero_neighbor_count(n: &Neighborhood) -> u8 {
    n.0.iter().sum()
}

/// `X(p1)`: number of 0->1 transitions in the cyclic sequence `p2..p9, p2`.
pub fn crossing_number(n: &Neighborhood) -> u8 {
    (0..8)
        .filter(|&i| n.0[i] == 0 && n.0[(i + 1) % 8] == 1)
        .count() as u8
}

/// Whether Hilditch's four conditions allow clearing pixel `(x, y)` of `r`.
pub fn deletable(r: &BinaryRaster, x: usize, y: usize) -> bool {
    if !r.is_foreground(x, y) {
        return false;
    }
    let (xi, yi) = (x as isize, y as isize);
    let n = Neighborhood::around(r, xi, yi);
    let b = nonzero_neighbor_count(&n);
    if !(2..=6).contains(&b) || crossing_number(&n) != 1 {
        return false;
    }
    let (p2, p4, p6, p8) = (n.p(2), n.p(4), n.p(6), n.p(8));
    if p2 * p4 * p8 == 1 && crossing_number(&Neighborhood::around(r, xi, yi - 1)) == 1 {
        return false;
    }
    if p2 * p4 * p6 == 1 && crossing_number(&Neighborhood::around(r, xi + 1, yi)) == 1 {
        return false;
    }
    true
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThinError {
    #[error("thinning did not converge within {limit} passes")]
    PassLimit { limit: usize },
}

/// Result of a thinning run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thinned {
    pub raster: BinaryRaster,
    /// Passes performed, counting the last one that removed nothing.
    pub passes: usize,
}

/// Thins `r` to a one-pixel-wide skeleton.
pub fn hilditch_thin(r: &BinaryRaster) -> BinaryRaster {
    match hilditch_thin_with_limit(r, None) {
        Ok(t) => t.raster,
        Err(ThinError::PassLimit { .. }) => unreachable!("no pass limit was set"),
    }
}

/// [`hilditch_thin`] with an optional cap on the number of passes.
pub fn hilditch_thin_with_limit(
    r: &BinaryRaster,
    max_passes: Option<usize>,
) -> Result<Thinned, ThinError> {
    let mut live = r.clone();
    let mut passes = 0;
    loop {
        if max_passes.is_some_and(|limit| passes >= limit) {
            return Err(ThinError::PassLimit { limit: passes });
        }
        passes += 1;

        let snapshot = live.clone();
        let mut marked: Vec<(u8, usize, usize)> = snapshot
            .foreground()
            .filter(|&(x, y)| deletable(&snapshot, x, y))
            .map(|(x, y)| {
                let b = nonzero_neighbor_count(&Neighborhood::around(&snapshot, x as isize, y as isize));
                (b, x, y)
            })
            .collect();
        if marked.is_empty() {
            return Ok(Thinned {
                raster: live,
                passes,
            });
        }
        // Stable: raster order survives among equal counts.
        marked.sort_by_key(|&(b, _, _)| std::cmp::Reverse(b));
        for (_, x, y) in marked {
            if deletable(&live, x, y) {
                live.set(x, y, false);
            }
        }
    }
}
