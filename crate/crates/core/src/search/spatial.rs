use std::collections::HashMap;

use crate::search::Point;

/// Uniform-grid hash for fixed-radius queries. Queries scan the
/// `(2⌈r/cell⌉ + 1)²` cells around the probe, so `cell = r` means 3×3.
#[derive(Debug, Clone)]
pub struct SpatialHash {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<(u32, Point)>>,
}

impl SpatialHash {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        Self { cell, cells: HashMap::new() }
    }

    pub fn build(cell: f64, points: impl IntoIterator<Item = (u32, Point)>) -> Self {
        let mut h = Self::new(cell);
        for (id, p) in points {
            h.insert(id, p);
        }
        h
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    pub fn insert(&mut self, id: u32, p: Point) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push((id, p));
    }

    pub fn len(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Visits every stored point at distance ≤ `r` from `p` (closed disk).
    pub fn for_each_within(&self, p: Point, r: f64, mut f: impl FnMut(u32, Point)) {
        let reach = (r / self.cell).ceil() as i64;
        let (cx, cy) = self.key(p);
        let r2 = r * r;
        for gx in cx - reach..=cx + reach {
            for gy in cy - reach..=cy + reach {
                if let Some(bucket) = self.cells.get(&(gx, gy)) {
                    for &(id, q) in bucket {
                        if p.dist2(q) <= r2 {
                            f(id, q);
                        }
                    }
                }
            }
        }
    }

    pub fn count_within(&self, p: Point, r: f64) -> usize {
        let mut n = 0;
        self.for_each_within(p, r, |_, _| n += 1);
        n
    }

    /// Smallest id within `r`, so the answer doesn't depend on hash order.
    pub fn first_within(&self, p: Point, r: f64) -> Option<u32> {
        let mut best: Option<u32> = None;
        self.for_each_within(p, r, |id, _| best = Some(best.map_or(id, |b| b.min(id))));
        best
    }
}

/// Other points of `hash` within `radius` of the point stored under `id`.
pub fn count_neighbors(hash: &SpatialHash, id: u32, at: Point, radius: f64) -> u32 {
    let mut n = 0;
    hash.for_each_within(at, radius, |other, _| {
        if other != id {
            n += 1;
        }
    });
    n
}

/// Neighbour count of every point, using one hash with cell = radius.
pub fn neighbor_counts(points: &[Point], radius: f64) -> Vec<u32> {
    let hash = SpatialHash::build(radius, points.iter().enumerate().map(|(i, p)| (i as u32, *p)));
    points.iter().enumerate().map(|(i, p)| count_neighbors(&hash, i as u32, *p, radius)).collect()
}
