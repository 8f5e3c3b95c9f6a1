use super::transform::{RigidTransform2, Vec2};

/// Axis-aligned bounding box in millimeters. `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb2 {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb2 {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y);
        Self { min, max }
    }

    pub fn centered(half_w: f64, half_h: f64) -> Self {
        Self::new(Vec2::new(-half_w, -half_h), Vec2::new(half_w, half_h))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn union(&self, o: &Aabb2) -> Aabb2 {
        Aabb2::new(
            Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        )
    }

    /// Box intersection. Disjoint inputs collapse to a degenerate box, which
    /// is still conservative for an empty set.
    pub fn intersection(&self, o: &Aabb2) -> Aabb2 {
        let min = Vec2::new(self.min.x.max(o.min.x), self.min.y.max(o.min.y));
        let max = Vec2::new(self.max.x.min(o.max.x), self.max.y.min(o.max.y));
        let max = Vec2::new(max.x.max(min.x), max.y.max(min.y));
        Aabb2 { min, max }
    }

    pub fn overlaps(&self, o: &Aabb2) -> bool {
        self.min.x < o.max.x && o.min.x < self.max.x && self.min.y < o.max.y && o.min.y < self.max.y
    }

    pub fn inflate(&self, d: f64) -> Aabb2 {
        Aabb2::new(
            Vec2::new(self.min.x - d, self.min.y - d),
            Vec2::new(self.max.x + d, self.max.y + d),
        )
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    /// Box of the four transformed corners.
    pub fn transformed(&self, t: &RigidTransform2) -> Aabb2 {
        let c = self.corners().map(|p| t.apply(p));
        let mut min = c[0];
        let mut max = c[0];
        for p in &c[1..] {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }
        Aabb2 { min, max }
    }

    /// Smallest separation between two boxes along either axis; negative when
    /// they overlap.
    pub fn gap(&self, o: &Aabb2) -> f64 {
        let dx = (o.min.x - self.max.x).max(self.min.x - o.max.x);
        let dy = (o.min.y - self.max.y).max(self.min.y - o.max.y);
        dx.max(dy)
    }
}
