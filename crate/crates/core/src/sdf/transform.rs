use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the plane, in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).length()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// A proper rigid motion of the plane: rotate about the origin, then translate.
///
/// `apply(p) = R(rotation) * p + translation`. Every pose in the pipeline
/// (print-bed placement, assembled placement, SDF transforms) uses this type,
/// mapping a component's local frame into the enclosing frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RigidTransform2 {
    pub rotation: f64,
    pub translation: Vec2,
}

impl RigidTransform2 {
    pub const IDENTITY: RigidTransform2 = RigidTransform2 {
        rotation: 0.0,
        translation: Vec2::ZERO,
    };

    pub const fn new(rotation: f64, translation: Vec2) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self::new(0.0, Vec2::new(dx, dy))
    }

    pub fn rotation(angle: f64) -> Self {
        Self::new(angle, Vec2::ZERO)
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        if self.rotation == 0.0 {
            return p + self.translation;
        }
        p.rotated(self.rotation) + self.translation
    }

    pub fn apply_inverse(&self, p: Vec2) -> Vec2 {
        let q = p - self.translation;
        if self.rotation == 0.0 {
            return q;
        }
        q.rotated(-self.rotation)
    }

    /// Rotates a direction vector without translating it.
    pub fn apply_vector(&self, v: Vec2) -> Vec2 {
        if self.rotation == 0.0 {
            v
        } else {
            v.rotated(self.rotation)
        }
    }

    pub fn inverse(&self) -> Self {
        let rotation = -self.rotation;
        let translation = -(self.translation.rotated(rotation));
        Self::new(rotation, translation)
    }

    /// `self.then(other)` applies `self` first, then `other`.
    pub fn then(&self, other: &RigidTransform2) -> Self {
        let rotation = self.rotation + other.rotation;
        let translation = other.apply(self.translation);
        Self::new(rotation, translation)
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.is_finite() && self.translation.is_finite()
    }
}
