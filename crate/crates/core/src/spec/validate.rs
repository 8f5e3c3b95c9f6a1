use super::{MechanismSpec, ShapeExpr, Violation, ViolationCode, BASE_ID};
use crate::sdf::{Primitive, SdfError};
use std::collections::{BTreeMap, BTreeSet};

const MAX_IDENT_LEN: usize = 64;

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    s.len() <= MAX_IDENT_LEN && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Checks every document invariant. Empty result means the spec is valid.
pub fn validate_spec(spec: &MechanismSpec) -> Vec<Violation> {
    let mut out = Vec::new();

    if !is_identifier(&spec.name) {
        push(
            &mut out,
            ViolationCode::InvalidIdentifier,
            "name".into(),
            format!("`{}` is not an identifier", spec.name),
        );
    }
    if !(spec.thickness_mm.is_finite() && spec.thickness_mm > 0.0) {
        push(
            &mut out,
            ViolationCode::InvalidParameter,
            "thickness_mm".into(),
            format!("thickness must be > 0, got {}", spec.thickness_mm),
        );
    }
    for (k, v) in &spec.global_params {
        if !is_identifier(k) {
            push(
                &mut out,
                ViolationCode::InvalidIdentifier,
                format!("global_params.{k}"),
                format!("`{k}` is not an identifier"),
            );
        }
        if !v.is_finite() {
            push(
                &mut out,
                ViolationCode::InvalidParameter,
                format!("global_params.{k}"),
                "value must be finite".into(),
            );
        }
    }
    if spec.parts.is_empty() {
        push(
            &mut out,
            ViolationCode::EmptyParts,
            "parts".into(),
            "a mechanism needs at least one part".into(),
        );
    }

    let mut seen = BTreeSet::new();
    let mut shapes = BTreeMap::new();
    for (i, part) in spec.parts.iter().enumerate() {
        let path = format!("parts[{i}]");
        if part.id == BASE_ID {
            push(
                &mut out,
                ViolationCode::ReservedId,
                format!("{path}.id"),
                format!("`{BASE_ID}` is reserved for the generated base"),
            );
        } else if !is_identifier(&part.id) {
            push(
                &mut out,
                ViolationCode::InvalidIdentifier,
                format!("{path}.id"),
                format!("`{}` is not an identifier", part.id),
            );
        }
        if !seen.insert(part.id.as_str()) {
            push(
                &mut out,
                ViolationCode::DuplicateId,
                format!("{path}.id"),
                format!("duplicate part id `{}`", part.id),
            );
        }
        let before = out.len();
        check_shape(&part.shape, &format!("{path}.shape"), &mut out);
        if out.len() == before {
            let sdf = part.shape.to_sdf().expect("shape checked");
            if let Some(g) = part.grasp_pin {
                if !g.is_finite() {
                    out.push(Violation::new(
                        ViolationCode::InvalidParameter,
                        format!("{path}.grasp_pin"),
                        "grasp pin must be finite",
                    ));
                } else if sdf.eval(g) >= 0.0 {
                    out.push(Violation::new(
                        ViolationCode::GraspPinOutsidePart,
                        format!("{path}.grasp_pin"),
                        format!(
                            "grasp pin ({}, {}) is not inside part `{}`",
                            g.x, g.y, part.id
                        ),
                    ));
                }
            }
            shapes.entry(part.id.as_str()).or_insert(sdf);
        }
    }

    let mut connected = BTreeSet::new();
    for (i, c) in spec.connections.iter().enumerate() {
        let path = format!("connections[{i}]");
        let mut bad = |code, field: &str, msg: String| {
            out.push(Violation::new(code, format!("{path}.{field}"), msg))
        };
        if !(c.pin_radius_mm.is_finite() && c.pin_radius_mm > 0.0) {
            bad(
                ViolationCode::InvalidParameter,
                "pin_radius_mm",
                format!("pin_radius must be > 0, got {}", c.pin_radius_mm),
            );
        }
        if !c.assembled_rotation_rad.is_finite() {
            bad(
                ViolationCode::InvalidParameter,
                "assembled_rotation_rad",
                "rotation must be finite".into(),
            );
        }
        if !c.anchor_global.is_finite() {
            bad(
                ViolationCode::InvalidParameter,
                "anchor_global",
                "anchor must be finite".into(),
            );
        }
        if !c.anchor_local.is_finite() {
            bad(
                ViolationCode::InvalidParameter,
                "anchor_local",
                "anchor must be finite".into(),
            );
        }
        if c.moving_part == BASE_ID || !seen.contains(c.moving_part.as_str()) {
            bad(
                ViolationCode::UnknownPart,
                "moving_part",
                format!("connection targets unknown part `{}`", c.moving_part),
            );
            continue;
        }
        if !connected.insert(c.moving_part.as_str()) {
            bad(
                ViolationCode::DuplicateConnection,
                "moving_part",
                format!("part `{}` already has a connection", c.moving_part),
            );
        }
        if let Some(sdf) = shapes.get(c.moving_part.as_str()) {
            if c.anchor_local.is_finite() {
                let d = sdf.eval(c.anchor_local);
                if d >= 0.0 {
                    bad(
                        ViolationCode::AnchorOutsidePart,
                        "anchor_local",
                        format!(
                            "hole center ({}, {}) is outside part `{}` (distance {d})",
                            c.anchor_local.x, c.anchor_local.y, c.moving_part
                        ),
                    );
                }
            }
        }
    }
    out
}

fn push(out: &mut Vec<Violation>, code: ViolationCode, field: String, msg: String) {
    out.push(Violation::new(code, field, msg));
}

fn doc_param(param: &str) -> String {
    match param {
        "teeth" | "tooth_width_ratio" => param.to_owned(),
        other => format!("{other}_mm"),
    }
}

fn check_shape(shape: &ShapeExpr, path: &str, out: &mut Vec<Violation>) {
    match shape {
        ShapeExpr::Primitive(kind) => {
            if let Err(SdfError::InvalidParameter { param, value, .. }) = Primitive::new(*kind) {
                out.push(Violation::new(
                    ViolationCode::InvalidParameter,
                    format!("{path}.{}", doc_param(param)),
                    format!(
                        "{} parameter `{}` out of range ({value})",
                        kind.name(),
                        doc_param(param)
                    ),
                ));
            }
        }
        ShapeExpr::Boolean { args, .. } => {
            if args.is_empty() {
                out.push(Violation::new(
                    ViolationCode::InvalidParameter,
                    format!("{path}.args"),
                    "boolean needs at least one argument",
                ));
            }
            for (i, a) in args.iter().enumerate() {
                check_shape(a, &format!("{path}.args[{i}]"), out);
            }
        }
        ShapeExpr::Transform {
            rot_rad,
            dx_mm,
            dy_mm,
            arg,
        } => {
            for (name, v) in [("rot_rad", rot_rad), ("dx_mm", dx_mm), ("dy_mm", dy_mm)] {
                if !v.is_finite() {
                    out.push(Violation::new(
                        ViolationCode::InvalidParameter,
                        format!("{path}.xform.{name}"),
                        "transform component must be finite",
                    ));
                }
            }
            check_shape(arg, &format!("{path}.arg"), out);
        }
        ShapeExpr::Offset { offset_mm, arg } => {
            if !offset_mm.is_finite() {
                out.push(Violation::new(
                    ViolationCode::InvalidParameter,
                    format!("{path}.offset_mm"),
                    "offset must be finite",
                ));
            }
            check_shape(arg, &format!("{path}.arg"), out);
        }
    }
}
