//! The mechanism description language.
//!
//! A mechanism document is a strict JSON object naming the parts of a planar,
//! single-layer mechanism, the shape of each part as a nested primitive /
//! boolean / transform expression, and the pin-and-hole connections that
//! attach parts to the generated base. The base itself is never listed; it is
//! referred to by the reserved id [`BASE_ID`].
//!
//! ```
//! use mechforge::spec::{parse_spec, serialize_spec};
//!
//! let doc = br#"{
//!   "name": "flag",
//!   "thickness_mm": 3,
//!   "parts": [{"id": "pole", "shape": {"prim": "balk", "length_mm": 40, "width_mm": 8}}],
//!   "connections": []
//! }"#;
//! let spec = parse_spec(doc).unwrap();
//! assert_eq!(spec.parts[0].id, "pole");
//! let canonical = serialize_spec(&spec);
//! assert_eq!(parse_spec(&canonical).unwrap(), spec);
//! ```

mod json;
mod parse;
mod serialize;
mod validate;

pub use parse::parse_spec;
pub use serialize::serialize_spec;
pub use validate::validate_spec;

use crate::sdf::{BooleanOp, PrimitiveKind, RigidTransform2, Sdf2, SdfError, Vec2};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Reserved id of the auto-generated base plate.
pub const BASE_ID: &str = "BASE";

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismSpec {
    pub name: String,
    pub thickness_mm: f64,
    pub parts: Vec<PartSpec>,
    pub connections: Vec<ConnectionSpec>,
    pub global_params: BTreeMap<String, f64>,
}

impl MechanismSpec {
    pub fn part(&self, id: &str) -> Option<&PartSpec> {
        self.parts.iter().find(|p| p.id == id)
    }

    pub fn connection_for(&self, part_id: &str) -> Option<&ConnectionSpec> {
        self.connections.iter().find(|c| c.moving_part == part_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartSpec {
    pub id: String,
    pub shape: ShapeExpr,
    /// Preferred grasp location in the part's local frame.
    pub grasp_pin: Option<Vec2>,
}

/// Shape expression as written in a document. Parameters are not checked
/// until [`ShapeExpr::to_sdf`] (or validation) runs.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeExpr {
    Primitive(PrimitiveKind),
    Boolean {
        op: BooleanOp,
        args: Vec<ShapeExpr>,
    },
    Transform {
        rot_rad: f64,
        dx_mm: f64,
        dy_mm: f64,
        arg: Box<ShapeExpr>,
    },
    Offset {
        offset_mm: f64,
        arg: Box<ShapeExpr>,
    },
}

impl ShapeExpr {
    pub fn to_sdf(&self) -> Result<Sdf2, SdfError> {
        Ok(match self {
            ShapeExpr::Primitive(kind) => Sdf2::primitive(*kind)?,
            ShapeExpr::Boolean { op, args } => {
                let children = args
                    .iter()
                    .map(ShapeExpr::to_sdf)
                    .collect::<Result<_, _>>()?;
                Sdf2::boolean(*op, children)
            }
            ShapeExpr::Transform {
                rot_rad,
                dx_mm,
                dy_mm,
                arg,
            } => Sdf2::transform(
                RigidTransform2::new(*rot_rad, Vec2::new(*dx_mm, *dy_mm)),
                arg.to_sdf()?,
            ),
            ShapeExpr::Offset { offset_mm, arg } => Sdf2::offset(*offset_mm, arg.to_sdf()?),
        })
    }

    pub fn circle(radius: f64) -> Self {
        ShapeExpr::Primitive(PrimitiveKind::Circle { radius })
    }

    pub fn rect(width: f64, height: f64) -> Self {
        ShapeExpr::Primitive(PrimitiveKind::Rectangle { width, height })
    }

    pub fn balk(length: f64, width: f64) -> Self {
        ShapeExpr::Primitive(PrimitiveKind::Balk { length, width })
    }

    pub fn moved(self, rot_rad: f64, dx_mm: f64, dy_mm: f64) -> Self {
        ShapeExpr::Transform {
            rot_rad,
            dx_mm,
            dy_mm,
            arg: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    PinHole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSpec {
    pub kind: ConnectionKind,
    pub moving_part: String,
    /// Hole center in the moving part's frame.
    pub anchor_local: Vec2,
    /// Pin position on the base, in the assembly frame.
    pub anchor_global: Vec2,
    pub pin_radius_mm: f64,
    pub assembled_rotation_rad: f64,
}

impl ConnectionSpec {
    /// Pose that puts `anchor_local` on `anchor_global` with the assembled
    /// rotation.
    pub fn final_pose(&self) -> RigidTransform2 {
        let rotated = self.anchor_local.rotated(self.assembled_rotation_rad);
        RigidTransform2::new(self.assembled_rotation_rad, self.anchor_global - rotated)
    }
}

/// Assembly-cell and print-bed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub num_manipulators: u8,
    pub bed_width: f64,
    pub bed_depth: f64,
    pub part_spacing: f64,
}

impl Default for CellParams {
    fn default() -> Self {
        Self {
            num_manipulators: 2,
            bed_width: 215.0,
            bed_depth: 215.0,
            part_spacing: 5.0,
        }
    }
}

impl CellParams {
    pub fn validate(&self) -> Result<(), String> {
        if !matches!(self.num_manipulators, 1 | 2) {
            return Err(format!(
                "num_manipulators must be 1 or 2, got {}",
                self.num_manipulators
            ));
        }
        if !(self.bed_width.is_finite() && self.bed_width > 0.0) {
            return Err("bed_width must be > 0".into());
        }
        if !(self.bed_depth.is_finite() && self.bed_depth > 0.0) {
            return Err("bed_depth must be > 0".into());
        }
        if !(self.part_spacing.is_finite() && self.part_spacing >= 0.0) {
            return Err("part_spacing must be >= 0".into());
        }
        Ok(())
    }
}

/// Machine-readable violation category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    MissingField,
    UnknownField,
    WrongType,
    InvalidIdentifier,
    ReservedId,
    DuplicateId,
    UnknownPart,
    UnknownKind,
    InvalidParameter,
    AnchorOutsidePart,
    GraspPinOutsidePart,
    DuplicateConnection,
    EmptyParts,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::MissingField => "MissingField",
            ViolationCode::UnknownField => "UnknownField",
            ViolationCode::WrongType => "WrongType",
            ViolationCode::InvalidIdentifier => "InvalidIdentifier",
            ViolationCode::ReservedId => "ReservedId",
            ViolationCode::DuplicateId => "DuplicateId",
            ViolationCode::UnknownPart => "UnknownPart",
            ViolationCode::UnknownKind => "UnknownKind",
            ViolationCode::InvalidParameter => "InvalidParameter",
            ViolationCode::AnchorOutsidePart => "AnchorOutsidePart",
            ViolationCode::GraspPinOutsidePart => "GraspPinOutsidePart",
            ViolationCode::DuplicateConnection => "DuplicateConnection",
            ViolationCode::EmptyParts => "EmptyParts",
        }
    }
}

/// One broken rule, located by a path such as `connections[1].pin_radius_mm`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub field: String,
    pub message: String,
}

impl Violation {
    pub(crate) fn new(
        code: ViolationCode,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            code,
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at `{}`: {}",
            self.code.as_str(),
            self.field,
            self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid mechanism spec: {}", format_violations(.0))]
    Validation(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl SpecError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            SpecError::Validation(v) => v,
            SpecError::Syntax { .. } => &[],
        }
    }
}
