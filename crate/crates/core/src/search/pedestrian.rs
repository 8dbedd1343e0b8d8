use rand::Rng;

use crate::rng::{self, Stream};
use crate::search::{GridCity, Point};

type Node = (usize, usize);

/// Random walk along streets at constant speed. At each intersection the
/// next street is chosen uniformly, never straight back unless it is the
/// only way out.
#[derive(Debug, Clone)]
pub struct Pedestrian {
    from: Node,
    to: Node,
    /// Metres travelled from `from` towards `to`.
    along: f64,
    pub speed: f64,
    rng: Stream,
}

impl Pedestrian {
    pub fn spawn(city: &GridCity, speed: f64, mut rng: Stream) -> Self {
        let segs = city.segments();
        let s = segs[rng.random_range(0..segs.len())];
        let (from, to) = if rng.random::<bool>() { (s.a, s.b) } else { (s.b, s.a) };
        let along = rng::unit(&mut rng) * city.spacing;
        Self { from, to, along, speed, rng }
    }

    pub fn position(&self, city: &GridCity) -> Point {
        let (a, b) = (city.node(self.from), city.node(self.to));
        let t = self.along / city.spacing;
        Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
    }

    /// The intersection currently walked towards.
    pub fn waypoint(&self) -> Node {
        self.to
    }

    pub fn step(&mut self, city: &GridCity, dt: f64) {
        let mut left = self.speed * dt;
        while left > 0.0 {
            let remaining = city.spacing - self.along;
            if left < remaining {
                self.along += left;
                return;
            }
            left -= remaining;
            let here = self.to;
            let mut options = city.neighbours(here);
            if options.len() > 1 {
                options.retain(|n| *n != self.from);
            }
            self.from = here;
            self.to = options[self.rng.random_range(0..options.len())];
            self.along = 0.0;
        }
    }
}
