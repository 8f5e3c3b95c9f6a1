//! Two-dimensional signed distance functions.
//!
//! An [`Sdf2`] is an immutable expression tree over the mechanical primitives
//! (circle, rectangle, balk, ring, gear), min/max booleans, rigid transforms
//! and offsets. Evaluation is negative inside, positive outside and zero on
//! the boundary. Circle, rectangle, balk and ring return exact Euclidean
//! distances; gears and boolean results return a value whose sign is exact.
//!
//! Trees share subtrees through `Arc`, so cloning is cheap and an `Sdf2` can
//! be evaluated from many threads at once.

mod aabb;
mod primitive;
mod transform;

pub use aabb::Aabb2;
pub use primitive::{Primitive, PrimitiveKind};
pub use transform::{RigidTransform2, Vec2};

use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdfError {
    #[error("{primitive}: parameter `{param}` out of range ({value})")]
    InvalidParameter {
        primitive: &'static str,
        param: &'static str,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Intersection,
    /// First child minus all following children.
    Difference,
}

#[derive(Debug)]
enum Node {
    Primitive(Primitive),
    Boolean(BooleanOp, Vec<Sdf2>),
    Transform(RigidTransform2, Sdf2),
    Offset(f64, Sdf2),
}

/// Immutable 2D signed distance expression.
#[derive(Debug, Clone)]
pub struct Sdf2(Arc<Node>);

/// Read-only view of a tree node, for walking an expression.
#[derive(Debug, Clone, Copy)]
pub enum SdfNode<'a> {
    Primitive(&'a Primitive),
    Boolean(BooleanOp, &'a [Sdf2]),
    Transform(&'a RigidTransform2, &'a Sdf2),
    Offset(f64, &'a Sdf2),
}

impl From<Primitive> for Sdf2 {
    fn from(p: Primitive) -> Self {
        Sdf2(Arc::new(Node::Primitive(p)))
    }
}

impl Sdf2 {
    pub fn primitive(kind: PrimitiveKind) -> Result<Sdf2, SdfError> {
        Primitive::new(kind).map(Sdf2::from)
    }

    pub fn circle(radius: f64) -> Result<Sdf2, SdfError> {
        Self::primitive(PrimitiveKind::Circle { radius })
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Sdf2, SdfError> {
        Self::primitive(PrimitiveKind::Rectangle { width, height })
    }

    pub fn balk(length: f64, width: f64) -> Result<Sdf2, SdfError> {
        Self::primitive(PrimitiveKind::Balk { length, width })
    }

    pub fn ring(outer_radius: f64, inner_radius: f64) -> Result<Sdf2, SdfError> {
        Self::primitive(PrimitiveKind::Ring {
            outer_radius,
            inner_radius,
        })
    }

    pub fn gear(
        pitch_radius: f64,
        teeth: u32,
        tooth_depth: f64,
        tooth_width_ratio: f64,
    ) -> Result<Sdf2, SdfError> {
        Self::primitive(PrimitiveKind::Gear {
            pitch_radius,
            teeth,
            tooth_depth,
            tooth_width_ratio,
        })
    }

    /// N-ary boolean. An empty `children` list is a programming error.
    pub fn boolean(op: BooleanOp, children: Vec<Sdf2>) -> Sdf2 {
        assert!(
            !children.is_empty(),
            "boolean node needs at least one child"
        );
        Sdf2(Arc::new(Node::Boolean(op, children)))
    }

    pub fn union(a: Sdf2, b: Sdf2) -> Sdf2 {
        Self::boolean(BooleanOp::Union, vec![a, b])
    }

    pub fn intersection(a: Sdf2, b: Sdf2) -> Sdf2 {
        Self::boolean(BooleanOp::Intersection, vec![a, b])
    }

    pub fn difference(a: Sdf2, b: Sdf2) -> Sdf2 {
        Self::boolean(BooleanOp::Difference, vec![a, b])
    }

    pub fn transform(t: RigidTransform2, s: Sdf2) -> Sdf2 {
        Sdf2(Arc::new(Node::Transform(t, s)))
    }

    /// Positive `d` dilates, negative `d` erodes.
    pub fn offset(d: f64, s: Sdf2) -> Sdf2 {
        Sdf2(Arc::new(Node::Offset(d, s)))
    }

    pub fn transformed(&self, t: RigidTransform2) -> Sdf2 {
        Sdf2::transform(t, self.clone())
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Sdf2 {
        self.transformed(RigidTransform2::translation(dx, dy))
    }

    pub fn node(&self) -> SdfNode<'_> {
        match &*self.0 {
            Node::Primitive(p) => SdfNode::Primitive(p),
            Node::Boolean(op, c) => SdfNode::Boolean(*op, c),
            Node::Transform(t, c) => SdfNode::Transform(t, c),
            Node::Offset(d, c) => SdfNode::Offset(*d, c),
        }
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        match &*self.0 {
            Node::Primitive(prim) => prim.eval(p),
            Node::Boolean(op, children) => {
                let mut it = children.iter();
                let first = it.next().expect("non-empty boolean").eval(p);
                match op {
                    BooleanOp::Union => it.fold(first, |acc, c| acc.min(c.eval(p))),
                    BooleanOp::Intersection => it.fold(first, |acc, c| acc.max(c.eval(p))),
                    BooleanOp::Difference => it.fold(first, |acc, c| acc.max(-c.eval(p))),
                }
            }
            Node::Transform(t, child) => child.eval(t.apply_inverse(p)),
            Node::Offset(d, child) => child.eval(p) - d,
        }
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        self.eval(Vec2::new(x, y))
    }

    /// Conservative box: every point with `eval <= 0` lies inside it.
    pub fn bounding_box(&self) -> Aabb2 {
        match &*self.0 {
            Node::Primitive(prim) => prim.bounding_box(),
            Node::Boolean(op, children) => {
                let mut it = children.iter();
                let first = it.next().expect("non-empty boolean").bounding_box();
                match op {
                    BooleanOp::Union => it.fold(first, |acc, c| acc.union(&c.bounding_box())),
                    BooleanOp::Intersection => {
                        it.fold(first, |acc, c| acc.intersection(&c.bounding_box()))
                    }
                    BooleanOp::Difference => first,
                }
            }
            Node::Transform(t, child) => child.bounding_box().transformed(t),
            // Eroded sets keep the child's box; gear and boolean values are
            // not exact distances, so shrinking is not safe.
            Node::Offset(d, child) => child.bounding_box().inflate(d.max(0.0)),
        }
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        match &*self.0 {
            Node::Primitive(_) => 1,
            Node::Boolean(_, c) => 1 + c.iter().map(Sdf2::node_count).sum::<usize>(),
            Node::Transform(_, c) | Node::Offset(_, c) => 1 + c.node_count(),
        }
    }
}
