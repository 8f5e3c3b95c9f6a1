use super::aabb::Aabb2;
use super::transform::Vec2;
use super::SdfError;
use std::f64::consts::TAU;

/// Parameters of a primitive shape, all lengths in millimeters. Every shape
/// is centered on the origin of its local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimitiveKind {
    Circle {
        radius: f64,
    },
    /// Axis-aligned rectangle.
    Rectangle {
        width: f64,
        height: f64,
    },
    /// Capsule whose straight section has `length` along x and whose total
    /// thickness is `width`, so the shape spans `length + width` along x.
    Balk {
        length: f64,
        width: f64,
    },
    Ring {
        outer_radius: f64,
        inner_radius: f64,
    },
    /// Pitch-circle disk plus `teeth` trapezoidal teeth, one centered on +x.
    Gear {
        pitch_radius: f64,
        teeth: u32,
        tooth_depth: f64,
        tooth_width_ratio: f64,
    },
}

impl PrimitiveKind {
    pub fn name(&self) -> &'static str {
        match self {
            PrimitiveKind::Circle { .. } => "circle",
            PrimitiveKind::Rectangle { .. } => "rect",
            PrimitiveKind::Balk { .. } => "balk",
            PrimitiveKind::Ring { .. } => "ring",
            PrimitiveKind::Gear { .. } => "gear",
        }
    }
}

/// A validated primitive. Construct with [`Primitive::new`] or the shorthand
/// constructors; parameters that violate the shape's constraints are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    kind: PrimitiveKind,
    // Gear tooth trapezoid, CCW, for the tooth centered on +x.
    tooth: Option<[Vec2; 4]>,
}

fn positive(prim: &'static str, param: &'static str, v: f64) -> Result<(), SdfError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SdfError::InvalidParameter {
            primitive: prim,
            param,
            value: v,
        })
    }
}

impl Primitive {
    pub fn new(kind: PrimitiveKind) -> Result<Self, SdfError> {
        let mut tooth = None;
        match kind {
            PrimitiveKind::Circle { radius } => positive("circle", "radius", radius)?,
            PrimitiveKind::Rectangle { width, height } => {
                positive("rect", "width", width)?;
                positive("rect", "height", height)?;
            }
            PrimitiveKind::Balk { length, width } => {
                positive("balk", "length", length)?;
                positive("balk", "width", width)?;
            }
            PrimitiveKind::Ring {
                outer_radius,
                inner_radius,
            } => {
                positive("ring", "inner_radius", inner_radius)?;
                positive("ring", "outer_radius", outer_radius)?;
                if outer_radius <= inner_radius {
                    return Err(SdfError::InvalidParameter {
                        primitive: "ring",
                        param: "outer_radius",
                        value: outer_radius,
                    });
                }
            }
            PrimitiveKind::Gear {
                pitch_radius,
                teeth,
                tooth_depth,
                tooth_width_ratio,
            } => {
                positive("gear", "pitch_radius", pitch_radius)?;
                positive("gear", "tooth_depth", tooth_depth)?;
                if teeth < 4 {
                    return Err(SdfError::InvalidParameter {
                        primitive: "gear",
                        param: "teeth",
                        value: teeth as f64,
                    });
                }
                if !(tooth_width_ratio > 0.0 && tooth_width_ratio < 1.0) {
                    return Err(SdfError::InvalidParameter {
                        primitive: "gear",
                        param: "tooth_width_ratio",
                        value: tooth_width_ratio,
                    });
                }
                tooth = Some(gear_tooth(
                    pitch_radius,
                    teeth,
                    tooth_depth,
                    tooth_width_ratio,
                ));
            }
        }
        Ok(Self { kind, tooth })
    }

    pub fn kind(&self) -> &PrimitiveKind {
        &self.kind
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        match self.kind {
            PrimitiveKind::Circle { radius } => p.length() - radius,
            PrimitiveKind::Rectangle { width, height } => box_sdf(p, width * 0.5, height * 0.5),
            PrimitiveKind::Balk { length, width } => {
                let half = length * 0.5;
                let qx = p.x.clamp(-half, half);
                Vec2::new(p.x - qx, p.y).length() - width * 0.5
            }
            PrimitiveKind::Ring {
                outer_radius,
                inner_radius,
            } => {
                let mid = 0.5 * (outer_radius + inner_radius);
                let half = 0.5 * (outer_radius - inner_radius);
                (p.length() - mid).abs() - half
            }
            PrimitiveKind::Gear {
                pitch_radius,
                teeth,
                ..
            } => {
                let disk = p.length() - pitch_radius;
                let sector = TAU / teeth as f64;
                let k = (p.y.atan2(p.x) / sector).round();
                let local = p.rotated(-k * sector);
                let tooth = convex_polygon_sdf(self.tooth.as_ref().expect("gear tooth"), local);
                disk.min(tooth)
            }
        }
    }

    pub fn bounding_box(&self) -> Aabb2 {
        match self.kind {
            PrimitiveKind::Circle { radius } => Aabb2::centered(radius, radius),
            PrimitiveKind::Rectangle { width, height } => {
                Aabb2::centered(width * 0.5, height * 0.5)
            }
            PrimitiveKind::Balk { length, width } => {
                Aabb2::centered(0.5 * (length + width), 0.5 * width)
            }
            PrimitiveKind::Ring { outer_radius, .. } => Aabb2::centered(outer_radius, outer_radius),
            PrimitiveKind::Gear { pitch_radius, .. } => {
                let tooth = self.tooth.as_ref().expect("gear tooth");
                let r = tooth
                    .iter()
                    .map(|v| v.length())
                    .fold(pitch_radius, f64::max);
                Aabb2::centered(r, r)
            }
        }
    }

    /// The gear's tooth trapezoid (tooth on +x), CCW. `None` for other kinds.
    pub fn gear_tooth(&self) -> Option<[Vec2; 4]> {
        self.tooth
    }
}

/// Tooth trapezoid: root corners on the pitch circle spanning
/// `ratio * 2pi / teeth`, tip at `pitch_radius + depth` with half the root chord.
fn gear_tooth(pitch_radius: f64, teeth: u32, depth: f64, ratio: f64) -> [Vec2; 4] {
    let half_angle = 0.5 * ratio * TAU / teeth as f64;
    let (s, c) = half_angle.sin_cos();
    let root_x = pitch_radius * c;
    let root_y = pitch_radius * s;
    let tip_x = pitch_radius + depth;
    let tip_y = 0.5 * root_y;
    [
        Vec2::new(root_x, -root_y),
        Vec2::new(tip_x, -tip_y),
        Vec2::new(tip_x, tip_y),
        Vec2::new(root_x, root_y),
    ]
}

fn box_sdf(p: Vec2, hx: f64, hy: f64) -> f64 {
    let dx = p.x.abs() - hx;
    let dy = p.y.abs() - hy;
    let outside = Vec2::new(dx.max(0.0), dy.max(0.0)).length();
    let inside = dx.max(dy).min(0.0);
    outside + inside
}

/// Exact signed distance to a convex CCW polygon.
pub(crate) fn convex_polygon_sdf(poly: &[Vec2], p: Vec2) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    let mut inside = true;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        let w = p - a;
        let t = (w.dot(e) / e.dot(e)).clamp(0.0, 1.0);
        best = best.min((w - e * t).length());
        if e.cross(w) < 0.0 {
            inside = false;
        }
    }
    if inside {
        -best
    } else {
        best
    }
}
