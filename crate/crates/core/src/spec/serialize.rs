use super::{ConnectionKind, MechanismSpec, ShapeExpr};
use crate::sdf::{BooleanOp, PrimitiveKind, Vec2};
use serde_json::{json, Map, Value};

/// Canonical document bytes: sorted keys, two-space indent, shortest
/// round-trip floats, LF endings, trailing newline. `global_params` is
/// omitted when empty; `connections` is always present.
pub fn serialize_spec(spec: &MechanismSpec) -> Vec<u8> {
    let parts: Vec<Value> = spec
        .parts
        .iter()
        .map(|p| {
            let mut m = Map::new();
            m.insert("id".into(), Value::from(p.id.clone()));
            m.insert("shape".into(), shape_value(&p.shape));
            if let Some(g) = p.grasp_pin {
                m.insert("grasp_pin".into(), point(g));
            }
            Value::Object(m)
        })
        .collect();
    let connections: Vec<Value> = spec
        .connections
        .iter()
        .map(|c| {
            json!({
                "kind": match c.kind { ConnectionKind::PinHole => "pin_hole" },
                "moving_part": c.moving_part,
                "anchor_local": point(c.anchor_local),
                "anchor_global": point(c.anchor_global),
                "pin_radius_mm": c.pin_radius_mm,
                "assembled_rotation_rad": c.assembled_rotation_rad,
            })
        })
        .collect();
    let mut root = Map::new();
    root.insert("name".into(), Value::from(spec.name.clone()));
    root.insert("thickness_mm".into(), Value::from(spec.thickness_mm));
    root.insert("parts".into(), Value::Array(parts));
    root.insert("connections".into(), Value::Array(connections));
    if !spec.global_params.is_empty() {
        let params: Map<String, Value> = spec
            .global_params
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(*v)))
            .collect();
        root.insert("global_params".into(), Value::Object(params));
    }
    crate::canonical_json(&Value::Object(root))
}

fn point(p: Vec2) -> Value {
    json!([p.x, p.y])
}

fn shape_value(s: &ShapeExpr) -> Value {
    match s {
        ShapeExpr::Primitive(kind) => match *kind {
            PrimitiveKind::Circle { radius } => json!({"prim": "circle", "radius_mm": radius}),
            PrimitiveKind::Rectangle { width, height } => {
                json!({"prim": "rect", "width_mm": width, "height_mm": height})
            }
            PrimitiveKind::Balk { length, width } => {
                json!({"prim": "balk", "length_mm": length, "width_mm": width})
            }
            PrimitiveKind::Ring {
                outer_radius,
                inner_radius,
            } => json!({
                "prim": "ring",
                "outer_radius_mm": outer_radius,
                "inner_radius_mm": inner_radius,
            }),
            PrimitiveKind::Gear {
                pitch_radius,
                teeth,
                tooth_depth,
                tooth_width_ratio,
            } => json!({
                "prim": "gear",
                "pitch_radius_mm": pitch_radius,
                "teeth": teeth,
                "tooth_depth_mm": tooth_depth,
                "tooth_width_ratio": tooth_width_ratio,
            }),
        },
        ShapeExpr::Boolean { op, args } => json!({
            "op": match op {
                BooleanOp::Union => "union",
                BooleanOp::Intersection => "intersection",
                BooleanOp::Difference => "difference",
            },
            "args": args.iter().map(shape_value).collect::<Vec<_>>(),
        }),
        ShapeExpr::Transform {
            rot_rad,
            dx_mm,
            dy_mm,
            arg,
        } => json!({
            "xform": {"rot_rad": rot_rad, "dx_mm": dx_mm, "dy_mm": dy_mm},
            "arg": shape_value(arg),
        }),
        ShapeExpr::Offset { offset_mm, arg } => json!({
            "offset_mm": offset_mm,
            "arg": shape_value(arg),
        }),
    }
}
