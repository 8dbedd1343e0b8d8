use rand::seq::SliceRandom;

use crate::config::CityConfig;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, o: Point) -> f64 {
        let (dx, dy) = (self.x - o.x, self.y - o.y);
        dx * dx + dy * dy
    }
}

/// A street between two adjacent lattice nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

/// Uniform street lattice, centred in a `width × height` rectangle, with
/// parking bays along some blocks. Bay positions never change.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCity {
    pub width: f64,
    pub height: f64,
    pub spacing: f64,
    /// Streets per axis: `nx` running north–south, `ny` running east–west.
    pub nx: usize,
    pub ny: usize,
    pub origin: Point,
    pub spots: Vec<Point>,
    /// Blocks that carry at least one bay.
    pub lined_segments: usize,
}

impl GridCity {
    pub fn node(&self, (i, j): (usize, usize)) -> Point {
        Point::new(self.origin.x + i as f64 * self.spacing, self.origin.y + j as f64 * self.spacing)
    }

    pub fn segments(&self) -> Vec<Segment> {
        segments(self.nx, self.ny)
    }

    /// Lattice neighbours of a node.
    pub fn neighbours(&self, (i, j): (usize, usize)) -> Vec<(usize, usize)> {
        let mut n = Vec::with_capacity(4);
        if i > 0 {
            n.push((i - 1, j));
        }
        if i + 1 < self.nx {
            n.push((i + 1, j));
        }
        if j > 0 {
            n.push((i, j - 1));
        }
        if j + 1 < self.ny {
            n.push((i, j + 1));
        }
        n
    }

    pub fn street_length(&self) -> f64 {
        self.segments().len() as f64 * self.spacing
    }
}

fn lattice(extent: f64, spacing: f64) -> (usize, f64) {
    let n = (extent / spacing).floor() as usize;
    let origin = if n == 0 { 0.0 } else { (extent - (n - 1) as f64 * spacing) / 2.0 };
    (n, origin)
}

fn segments(nx: usize, ny: usize) -> Vec<Segment> {
    let mut out = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx.saturating_sub(1) {
            out.push(Segment { a: (i, j), b: (i + 1, j) });
        }
    }
    for i in 0..nx {
        for j in 0..ny.saturating_sub(1) {
            out.push(Segment { a: (i, j), b: (i, j + 1) });
        }
    }
    out
}

fn bays_per_curb(cfg: &CityConfig) -> usize {
    let usable = cfg.street_spacing_m - 2.0 * cfg.intersection_clearance_m;
    if usable < 0.0 {
        0
    } else {
        (usable / cfg.bay_spacing_m + 1e-9).floor() as usize + 1
    }
}

/// Most bays the layout can hold: both curbs of every block.
pub fn bay_capacity(cfg: &CityConfig) -> Result<usize> {
    if !(cfg.street_spacing_m > 0.0 && cfg.bay_spacing_m > 0.0) {
        return Err(Error::Config("street and bay spacing must be positive".into()));
    }
    let (nx, _) = lattice(cfg.width_m, cfg.street_spacing_m);
    let (ny, _) = lattice(cfg.height_m, cfg.street_spacing_m);
    if nx < 2 || ny < 2 {
        return Err(Error::Config(format!("a {} × {} m city with {} m street spacing has no blocks", cfg.width_m, cfg.height_m, cfg.street_spacing_m)));
    }
    Ok(segments(nx, ny).len() * 2 * bays_per_curb(cfg))
}

/// Lays out exactly `spots` bays. Blocks are taken in a random order (fixed
/// by `layout_seed`) and lined on both curbs until the count is reached.
pub fn generate_city(cfg: &CityConfig, spots: usize) -> Result<GridCity> {
    if spots == 0 {
        return Err(Error::Config("the city needs at least one parking spot".into()));
    }
    let cap = bay_capacity(cfg)?;
    if spots > cap {
        return Err(Error::Config(format!("{spots} spots requested but the layout holds at most {cap}")));
    }
    if cfg.curb_offset_m * 2.0 > cfg.street_spacing_m {
        return Err(Error::Config("curb offset must be less than half the street spacing".into()));
    }
    let (nx, ox) = lattice(cfg.width_m, cfg.street_spacing_m);
    let (ny, oy) = lattice(cfg.height_m, cfg.street_spacing_m);
    let mut city = GridCity {
        width: cfg.width_m,
        height: cfg.height_m,
        spacing: cfg.street_spacing_m,
        nx,
        ny,
        origin: Point::new(ox, oy),
        spots: Vec::with_capacity(spots),
        lined_segments: 0,
    };
    let mut order = city.segments();
    order.shuffle(&mut rng::stream(cfg.layout_seed, Domain::Layout, 0));

    let per_curb = bays_per_curb(cfg);
    let usable = (per_curb - 1) as f64 * cfg.bay_spacing_m;
    let start = (cfg.street_spacing_m - usable) / 2.0;
    'fill: for seg in order {
        city.lined_segments += 1;
        let (a, b) = (city.node(seg.a), city.node(seg.b));
        let horizontal = seg.a.1 == seg.b.1;
        for side in [-1.0, 1.0] {
            for n in 0..per_curb {
                let t = start + n as f64 * cfg.bay_spacing_m;
                let lateral = side * cfg.curb_offset_m;
                city.spots.push(if horizontal {
                    Point::new(a.x + t, a.y + lateral)
                } else {
                    Point::new(a.x + lateral, a.y + t)
                });
                if city.spots.len() == spots {
                    break 'fill;
                }
            }
        }
        debug_assert!(b.x >= a.x && b.y >= a.y);
    }
    Ok(city)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout() {
        let cfg = CityConfig::default();
        assert_eq!(bays_per_curb(&cfg), 22);
        let city = generate_city(&cfg, 24_067).unwrap();
        assert_eq!((city.nx, city.ny), (40, 40));
        assert_eq!(city.segments().len(), 2 * 40 * 39);
        assert_eq!(city.spots.len(), 24_067);
        assert_eq!(city.lined_segments, 24_067usize.div_ceil(44));
        assert!(city
            .spots
            .iter()
            .all(|p| p.x > 0.0 && p.x < cfg.width_m && p.y > 0.0 && p.y < cfg.height_m));
        assert_eq!(city, generate_city(&cfg, 24_067).unwrap());
    }

    #[test]
    fn bays_keep_clear_of_intersections() {
        let cfg = CityConfig::default();
        let city = generate_city(&cfg, 5_000).unwrap();
        for p in &city.spots {
            let fx = (p.x - city.origin.x).rem_euclid(city.spacing);
            let fy = (p.y - city.origin.y).rem_euclid(city.spacing);
            // one coordinate sits on the curb line, the other inside the block
            let curb = |f: f64| (f - cfg.curb_offset_m).abs() < 1e-9 || (f - (city.spacing - cfg.curb_offset_m)).abs() < 1e-9;
            let inside = |f: f64| f >= cfg.intersection_clearance_m - 1e-9 && f <= city.spacing - cfg.intersection_clearance_m + 1e-9;
            assert!((curb(fx) && inside(fy)) || (curb(fy) && inside(fx)), "{p:?}");
        }
    }

    #[test]
    fn rejects_impossible_layouts() {
        let cfg = CityConfig::default();
        assert!(generate_city(&cfg, 0).is_err());
        assert!(generate_city(&cfg, bay_capacity(&cfg).unwrap() + 1).is_err());
        let tiny = CityConfig { width_m: 100.0, ..CityConfig::default() };
        assert!(bay_capacity(&tiny).is_err());
    }
}
