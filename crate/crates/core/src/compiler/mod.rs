//! Turns a validated [`MechanismSpec`] into a [`CompiledAssembly`]: a pinned
//! base plate, moving parts with clearance holes, assembled poses and a
//! print-bed layout.
//!
//! Frames: every part has a local frame (the frame its shape is written in).
//! `final_pose` maps local coordinates into the assembly frame; `initial_pose`
//! maps them onto the print bed, whose origin is the bed's lower-left corner.
//! The base's local frame is the assembly frame, so its final pose is the
//! identity.

mod base;
mod layout;
mod manifest;

pub use base::{generate_base, generate_base_with_margin, BaseOutline};
pub use layout::layout_print_bed;
pub use manifest::build_manifest;

use crate::sdf::{Aabb2, RigidTransform2, Sdf2, Vec2};
use crate::spec::{validate_spec, CellParams, MechanismSpec, Violation, BASE_ID};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Radial gap between a pin and its hole.
pub const DEFAULT_CLEARANCE_MM: f64 = 0.3;
/// Border of the base plate around the union of part footprints.
pub const BASE_MARGIN_MM: f64 = 5.0;
pub const GRASP_PIN_RADIUS_MM: f64 = 3.0;
/// Pins stand `thickness + PIN_CAP_MM` above the plate.
pub const PIN_CAP_MM: f64 = 1.0;
/// Sampling pitch of the assembled-pose overlap test.
pub const COLLISION_PITCH_MM: f64 = 0.5;
/// Minimum material left around a hole.
pub const HOLE_WALL_MIN_MM: f64 = 0.5;

const HOLE_WALL_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mechanism spec does not validate: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSpec(Vec<Violation>),
    #[error("layout overflow: {0}")]
    LayoutOverflow(String),
    #[error("parts `{a}` and `{b}` overlap in the assembled pose near ({x:.3}, {y:.3})")]
    PoseCollision {
        a: String,
        b: String,
        x: f64,
        y: f64,
    },
    #[error("hole in part `{part}` breaches its boundary (wall {wall:.3} mm at ({x:.3}, {y:.3}))")]
    DegenerateHole {
        part: String,
        wall: f64,
        x: f64,
        y: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Pin,
    Hole,
    GraspPin,
}

/// Points at a feature of another component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRef {
    pub component: String,
    pub feature: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub kind: FeatureKind,
    /// Center in the owning component's local frame.
    pub local_center: Vec2,
    pub radius: f64,
    pub mate: Option<FeatureRef>,
}

#[derive(Debug, Clone)]
pub struct CompiledPart {
    pub id: String,
    /// Final geometry: grasp boss unioned in, holes cut out.
    pub shape: Sdf2,
    pub thickness: f64,
    pub final_pose: RigidTransform2,
    pub initial_pose: RigidTransform2,
    pub features: Vec<Feature>,
    /// Grasp location requested by the document, if any.
    pub grasp_hint: Option<Vec2>,
}

impl CompiledPart {
    pub fn is_base(&self) -> bool {
        self.id == BASE_ID
    }

    pub fn has_grasp_pin(&self) -> bool {
        self.features
            .iter()
            .any(|f| f.kind == FeatureKind::GraspPin)
    }

    pub fn pins(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(|f| f.kind == FeatureKind::Pin)
    }

    pub fn holes(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(|f| f.kind == FeatureKind::Hole)
    }

    /// Height of the raised pins above the plate top.
    pub fn pin_height(&self) -> f64 {
        self.thickness + PIN_CAP_MM
    }

    pub fn local_bbox(&self) -> Aabb2 {
        self.shape.bounding_box()
    }

    pub fn bed_bbox(&self) -> Aabb2 {
        self.local_bbox().transformed(&self.initial_pose)
    }
}

#[derive(Debug, Clone)]
pub struct CompiledAssembly {
    pub base: CompiledPart,
    /// Moving parts: connected parts in connection order, then free parts in
    /// document order.
    pub parts: Vec<CompiledPart>,
    pub clearance: f64,
    pub bed: (f64, f64),
    pub part_spacing: f64,
}

impl CompiledAssembly {
    /// Base first, then moving parts.
    pub fn components(&self) -> impl Iterator<Item = &CompiledPart> {
        std::iter::once(&self.base).chain(self.parts.iter())
    }

    pub fn component(&self, id: &str) -> Option<&CompiledPart> {
        self.components().find(|c| c.id == id)
    }
}

/// Runs the full compile: base, holes, collision test, grasp pins, layout.
pub fn compile_assembly(
    spec: &MechanismSpec,
    cell: &CellParams,
    clearance: f64,
) -> Result<CompiledAssembly, CompileError> {
    cell.validate().map_err(CompileError::InvalidInput)?;
    if !(clearance.is_finite() && clearance >= 0.0) {
        return Err(CompileError::InvalidInput(format!(
            "clearance must be >= 0, got {clearance}"
        )));
    }
    let violations = validate_spec(spec);
    if !violations.is_empty() {
        return Err(CompileError::InvalidSpec(violations));
    }

    let outline = generate_base(spec)?;

    // Connected parts in connection order, then the rest in document order.
    let mut order: Vec<&str> = spec
        .connections
        .iter()
        .map(|c| c.moving_part.as_str())
        .collect();
    for p in &spec.parts {
        if !order.contains(&p.id.as_str()) {
            order.push(&p.id);
        }
    }

    let mut parts = Vec::with_capacity(order.len());
    let mut base_features = outline.pins.clone();
    for id in order {
        let part = spec.part(id).expect("validated part id");
        let raw = part.shape.to_sdf().expect("validated shape");
        let mut shape = raw.clone();
        let mut features = Vec::new();
        let mut final_pose = RigidTransform2::IDENTITY;
        if let Some((ci, conn)) = spec
            .connections
            .iter()
            .enumerate()
            .find(|(_, c)| c.moving_part == id)
        {
            let hole_radius = conn.pin_radius_mm + clearance;
            check_hole_wall(id, &raw, conn.anchor_local, hole_radius)?;
            shape = Sdf2::difference(
                shape,
                Sdf2::circle(hole_radius)
                    .expect("positive hole radius")
                    .translated(conn.anchor_local.x, conn.anchor_local.y),
            );
            final_pose = conn.final_pose();
            base_features[ci].mate = Some(FeatureRef {
                component: id.to_owned(),
                feature: features.len(),
            });
            features.push(Feature {
                kind: FeatureKind::Hole,
                local_center: conn.anchor_local,
                radius: hole_radius,
                mate: Some(FeatureRef {
                    component: BASE_ID.to_owned(),
                    feature: ci,
                }),
            });
        }
        parts.push(CompiledPart {
            id: id.to_owned(),
            shape,
            thickness: spec.thickness_mm,
            final_pose,
            initial_pose: RigidTransform2::IDENTITY,
            features,
            grasp_hint: part.grasp_pin,
        });
    }

    check_collisions(&parts)?;

    let base = CompiledPart {
        id: BASE_ID.to_owned(),
        shape: outline.shape,
        thickness: spec.thickness_mm,
        final_pose: RigidTransform2::IDENTITY,
        initial_pose: RigidTransform2::IDENTITY,
        features: base_features,
        grasp_hint: None,
    };
    let mut assembly = CompiledAssembly {
        base,
        parts,
        clearance,
        bed: (cell.bed_width, cell.bed_depth),
        part_spacing: cell.part_spacing,
    };
    layout_print_bed(&mut assembly, cell)?;
    Ok(assembly)
}

/// Largest amount by which an assembled pin pokes out of its hole:
/// `|hole center − pin center| + pin radius − hole radius`, both centers in the
/// assembly frame. Non-positive when every pin sits inside its hole.
pub fn pin_containment_excess(assembly: &CompiledAssembly) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for pin in assembly.base.pins() {
        let Some(m) = &pin.mate else { continue };
        let Some(part) = assembly.component(&m.component) else {
            return f64::INFINITY;
        };
        let Some(hole) = part.features.get(m.feature) else {
            return f64::INFINITY;
        };
        let center = part.final_pose.apply(hole.local_center);
        let pin_center = assembly.base.final_pose.apply(pin.local_center);
        worst = worst.max(center.distance(pin_center) + pin.radius - hole.radius);
    }
    worst
}

/// Every point of the hole circle must sit at least `HOLE_WALL_MIN_MM` inside
/// the uncut part.
fn check_hole_wall(part: &str, raw: &Sdf2, center: Vec2, radius: f64) -> Result<(), CompileError> {
    for k in 0..HOLE_WALL_SAMPLES {
        let a = TAU * k as f64 / HOLE_WALL_SAMPLES as f64;
        let p = center + Vec2::new(a.cos(), a.sin()) * radius;
        let d = raw.eval(p);
        if d > -HOLE_WALL_MIN_MM {
            return Err(CompileError::DegenerateHole {
                part: part.to_owned(),
                wall: -d,
                x: p.x,
                y: p.y,
            });
        }
    }
    Ok(())
}

/// Samples both interiors on a global lattice of `COLLISION_PITCH_MM` and
/// reports the first point inside two parts. Hole interiors are already cut
/// from the shapes, so pin clearance regions never count as overlap.
fn check_collisions(parts: &[CompiledPart]) -> Result<(), CompileError> {
    let boxes: Vec<Aabb2> = parts
        .iter()
        .map(|p| p.shape.bounding_box().transformed(&p.final_pose))
        .collect();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            if !boxes[i].overlaps(&boxes[j]) {
                continue;
            }
            let region = boxes[i].intersection(&boxes[j]);
            let h = COLLISION_PITCH_MM;
            let (i0, i1) = (
                (region.min.x / h).floor() as i64,
                (region.max.x / h).ceil() as i64,
            );
            let (j0, j1) = (
                (region.min.y / h).floor() as i64,
                (region.max.y / h).ceil() as i64,
            );
            for gy in j0..=j1 {
                for gx in i0..=i1 {
                    let p = Vec2::new(gx as f64 * h, gy as f64 * h);
                    let a = parts[i].shape.eval(parts[i].final_pose.apply_inverse(p));
                    if a >= 0.0 {
                        continue;
                    }
                    let b = parts[j].shape.eval(parts[j].final_pose.apply_inverse(p));
                    if b < 0.0 {
                        return Err(CompileError::PoseCollision {
                            a: parts[i].id.clone(),
                            b: parts[j].id.clone(),
                            x: p.x,
                            y: p.y,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}
