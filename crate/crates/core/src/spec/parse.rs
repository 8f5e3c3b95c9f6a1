use super::json::Json;
use super::{
    validate_spec, ConnectionKind, ConnectionSpec, MechanismSpec, PartSpec, ShapeExpr, SpecError,
    Violation, ViolationCode,
};
use crate::sdf::{BooleanOp, PrimitiveKind, Vec2};
use std::collections::BTreeMap;

/// Parses and fully validates a mechanism document.
pub fn parse_spec(document: &[u8]) -> Result<MechanismSpec, SpecError> {
    let json: Json = serde_json::from_slice(document).map_err(|e| syntax_error(document, &e))?;
    let mut d = Decoder::default();
    let spec = d.spec(&json);
    if !d.violations.is_empty() {
        return Err(SpecError::Validation(d.violations));
    }
    let spec = spec.expect("decoder produced no spec and no violations");
    let violations = validate_spec(&spec);
    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(SpecError::Validation(violations))
    }
}

/// Clamps serde_json's position into the document: 1-based line, and a column
/// between 1 and one past the end of that line.
fn syntax_error(document: &[u8], e: &serde_json::Error) -> SpecError {
    let lines: Vec<&[u8]> = document.split(|&b| b == b'\n').collect();
    let line = e.line().clamp(1, lines.len().max(1));
    let line_len = lines.get(line - 1).map_or(0, |l| l.len());
    let column = e.column().clamp(1, line_len + 1);
    let message = e.to_string();
    // serde_json appends " at line X column Y"; we report our own position.
    let message = match message.rfind(" at line ") {
        Some(i) => message[..i].to_owned(),
        None => message,
    };
    SpecError::Syntax {
        line,
        column,
        message,
    }
}

#[derive(Default)]
struct Decoder {
    violations: Vec<Violation>,
}

type Fields<'a> = &'a [(String, Json)];

impl Decoder {
    fn push(&mut self, code: ViolationCode, field: &str, message: impl Into<String>) {
        self.violations.push(Violation::new(code, field, message));
    }

    fn object<'a>(&mut self, v: &'a Json, path: &str) -> Option<Fields<'a>> {
        match v {
            Json::Object(f) => Some(f),
            other => {
                self.push(
                    ViolationCode::WrongType,
                    path,
                    format!("expected object, found {}", other.type_name()),
                );
                None
            }
        }
    }

    /// Reports keys outside `allowed`.
    fn check_keys(&mut self, fields: Fields, allowed: &[&str], path: &str) {
        for (k, _) in fields {
            if !allowed.contains(&k.as_str()) {
                self.push(
                    ViolationCode::UnknownField,
                    &join(path, k),
                    format!("unknown key `{k}`"),
                );
            }
        }
    }

    fn get<'a>(&mut self, fields: Fields<'a>, key: &str, path: &str) -> Option<&'a Json> {
        let v = fields.iter().find(|(k, _)| k == key).map(|(_, v)| v);
        if v.is_none() {
            self.push(
                ViolationCode::MissingField,
                &join(path, key),
                format!("missing required key `{key}`"),
            );
        }
        v
    }

    fn number(&mut self, fields: Fields, key: &str, path: &str) -> Option<f64> {
        match self.get(fields, key, path)? {
            Json::Number(n) => Some(*n),
            other => {
                self.push(
                    ViolationCode::WrongType,
                    &join(path, key),
                    format!("expected number, found {}", other.type_name()),
                );
                None
            }
        }
    }

    fn string(&mut self, fields: Fields, key: &str, path: &str) -> Option<String> {
        match self.get(fields, key, path)? {
            Json::String(s) => Some(s.clone()),
            other => {
                self.push(
                    ViolationCode::WrongType,
                    &join(path, key),
                    format!("expected string, found {}", other.type_name()),
                );
                None
            }
        }
    }

    fn array<'a>(&mut self, v: &'a Json, path: &str) -> Option<&'a [Json]> {
        match v {
            Json::Array(a) => Some(a),
            other => {
                self.push(
                    ViolationCode::WrongType,
                    path,
                    format!("expected array, found {}", other.type_name()),
                );
                None
            }
        }
    }

    fn point(&mut self, v: &Json, path: &str) -> Option<Vec2> {
        let arr = self.array(v, path)?;
        match arr {
            [Json::Number(x), Json::Number(y)] => Some(Vec2::new(*x, *y)),
            _ => {
                self.push(
                    ViolationCode::WrongType,
                    path,
                    "expected [x, y] pair of numbers",
                );
                None
            }
        }
    }

    fn spec(&mut self, v: &Json) -> Option<MechanismSpec> {
        let fields = self.object(v, "$")?;
        self.check_keys(
            fields,
            &[
                "name",
                "thickness_mm",
                "parts",
                "connections",
                "global_params",
            ],
            "",
        );
        let name = self.string(fields, "name", "");
        let thickness_mm = self.number(fields, "thickness_mm", "");
        let parts = self.get(fields, "parts", "").and_then(|p| self.parts(p));
        let connections = self
            .get(fields, "connections", "")
            .and_then(|c| self.connections(c));
        let global_params = match fields.iter().find(|(k, _)| k == "global_params") {
            None => Some(BTreeMap::new()),
            Some((_, v)) => self.params(v),
        };
        Some(MechanismSpec {
            name: name?,
            thickness_mm: thickness_mm?,
            parts: parts?,
            connections: connections?,
            global_params: global_params?,
        })
    }

    fn params(&mut self, v: &Json) -> Option<BTreeMap<String, f64>> {
        let fields = self.object(v, "global_params")?;
        let mut out = BTreeMap::new();
        let mut ok = true;
        for (k, v) in fields {
            match v {
                Json::Number(n) => {
                    out.insert(k.clone(), *n);
                }
                other => {
                    ok = false;
                    self.push(
                        ViolationCode::WrongType,
                        &join("global_params", k),
                        format!("expected number, found {}", other.type_name()),
                    );
                }
            }
        }
        ok.then_some(out)
    }

    fn parts(&mut self, v: &Json) -> Option<Vec<PartSpec>> {
        let arr = self.array(v, "parts")?;
        let mut out = Vec::with_capacity(arr.len());
        let mut ok = true;
        for (i, item) in arr.iter().enumerate() {
            match self.part(item, &format!("parts[{i}]")) {
                Some(p) => out.push(p),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn part(&mut self, v: &Json, path: &str) -> Option<PartSpec> {
        let fields = self.object(v, path)?;
        self.check_keys(fields, &["id", "shape", "grasp_pin"], path);
        let id = self.string(fields, "id", path);
        let shape = self
            .get(fields, "shape", path)
            .and_then(|s| self.shape(s, &join(path, "shape")));
        let grasp_pin = match fields.iter().find(|(k, _)| k == "grasp_pin") {
            None => Some(None),
            Some((_, v)) => self.point(v, &join(path, "grasp_pin")).map(Some),
        };
        Some(PartSpec {
            id: id?,
            shape: shape?,
            grasp_pin: grasp_pin?,
        })
    }

    fn shape(&mut self, v: &Json, path: &str) -> Option<ShapeExpr> {
        let fields = self.object(v, path)?;
        let has = |k: &str| fields.iter().any(|(key, _)| key == k);
        let discriminants = ["prim", "op", "xform", "offset_mm"]
            .iter()
            .filter(|k| has(k))
            .count();
        if discriminants != 1 {
            self.push(
                ViolationCode::UnknownKind,
                path,
                "shape must have exactly one of `prim`, `op`, `xform`, `offset_mm`",
            );
            return None;
        }
        if has("prim") {
            self.primitive(fields, path)
        } else if has("op") {
            self.check_keys(fields, &["op", "args"], path);
            let op = self.string(fields, "op", path)?;
            let op = match op.as_str() {
                "union" => BooleanOp::Union,
                "intersection" => BooleanOp::Intersection,
                "difference" => BooleanOp::Difference,
                other => {
                    self.push(
                        ViolationCode::UnknownKind,
                        &join(path, "op"),
                        format!("unknown boolean op `{other}`"),
                    );
                    return None;
                }
            };
            let args_path = join(path, "args");
            let arr = self.get(fields, "args", path)?;
            let arr = self.array(arr, &args_path)?;
            if arr.is_empty() {
                self.push(
                    ViolationCode::InvalidParameter,
                    &args_path,
                    "boolean needs at least one argument",
                );
                return None;
            }
            let mut args = Vec::with_capacity(arr.len());
            let mut ok = true;
            for (i, a) in arr.iter().enumerate() {
                match self.shape(a, &format!("{args_path}[{i}]")) {
                    Some(s) => args.push(s),
                    None => ok = false,
                }
            }
            ok.then_some(ShapeExpr::Boolean { op, args })
        } else if has("xform") {
            self.check_keys(fields, &["xform", "arg"], path);
            let xpath = join(path, "xform");
            let x = self.get(fields, "xform", path)?;
            let xf = self.object(x, &xpath)?;
            self.check_keys(xf, &["rot_rad", "dx_mm", "dy_mm"], &xpath);
            let rot_rad = self.number(xf, "rot_rad", &xpath);
            let dx_mm = self.number(xf, "dx_mm", &xpath);
            let dy_mm = self.number(xf, "dy_mm", &xpath);
            let arg = self
                .get(fields, "arg", path)
                .and_then(|a| self.shape(a, &join(path, "arg")));
            Some(ShapeExpr::Transform {
                rot_rad: rot_rad?,
                dx_mm: dx_mm?,
                dy_mm: dy_mm?,
                arg: Box::new(arg?),
            })
        } else {
            self.check_keys(fields, &["offset_mm", "arg"], path);
            let offset_mm = self.number(fields, "offset_mm", path);
            let arg = self
                .get(fields, "arg", path)
                .and_then(|a| self.shape(a, &join(path, "arg")));
            Some(ShapeExpr::Offset {
                offset_mm: offset_mm?,
                arg: Box::new(arg?),
            })
        }
    }

    fn primitive(&mut self, fields: Fields, path: &str) -> Option<ShapeExpr> {
        let prim = self.string(fields, "prim", path)?;
        let kind = match prim.as_str() {
            "circle" => {
                self.check_keys(fields, &["prim", "radius_mm"], path);
                PrimitiveKind::Circle {
                    radius: self.number(fields, "radius_mm", path)?,
                }
            }
            "rect" => {
                self.check_keys(fields, &["prim", "width_mm", "height_mm"], path);
                let width = self.number(fields, "width_mm", path);
                let height = self.number(fields, "height_mm", path);
                PrimitiveKind::Rectangle {
                    width: width?,
                    height: height?,
                }
            }
            "balk" => {
                self.check_keys(fields, &["prim", "length_mm", "width_mm"], path);
                let length = self.number(fields, "length_mm", path);
                let width = self.number(fields, "width_mm", path);
                PrimitiveKind::Balk {
                    length: length?,
                    width: width?,
                }
            }
            "ring" => {
                self.check_keys(
                    fields,
                    &["prim", "outer_radius_mm", "inner_radius_mm"],
                    path,
                );
                let outer = self.number(fields, "outer_radius_mm", path);
                let inner = self.number(fields, "inner_radius_mm", path);
                PrimitiveKind::Ring {
                    outer_radius: outer?,
                    inner_radius: inner?,
                }
            }
            "gear" => {
                self.check_keys(
                    fields,
                    &[
                        "prim",
                        "pitch_radius_mm",
                        "teeth",
                        "tooth_depth_mm",
                        "tooth_width_ratio",
                    ],
                    path,
                );
                let pitch = self.number(fields, "pitch_radius_mm", path);
                let teeth = self.number(fields, "teeth", path);
                let depth = self.number(fields, "tooth_depth_mm", path);
                let ratio = self.number(fields, "tooth_width_ratio", path);
                let teeth = teeth?;
                if teeth.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&teeth) {
                    self.push(
                        ViolationCode::InvalidParameter,
                        &join(path, "teeth"),
                        format!("teeth must be a non-negative integer, got {teeth}"),
                    );
                    return None;
                }
                PrimitiveKind::Gear {
                    pitch_radius: pitch?,
                    teeth: teeth as u32,
                    tooth_depth: depth?,
                    tooth_width_ratio: ratio?,
                }
            }
            other => {
                self.push(
                    ViolationCode::UnknownKind,
                    &join(path, "prim"),
                    format!("unknown primitive `{other}`"),
                );
                return None;
            }
        };
        Some(ShapeExpr::Primitive(kind))
    }

    fn connections(&mut self, v: &Json) -> Option<Vec<ConnectionSpec>> {
        let arr = self.array(v, "connections")?;
        let mut out = Vec::with_capacity(arr.len());
        let mut ok = true;
        for (i, item) in arr.iter().enumerate() {
            match self.connection(item, &format!("connections[{i}]")) {
                Some(c) => out.push(c),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn connection(&mut self, v: &Json, path: &str) -> Option<ConnectionSpec> {
        let fields = self.object(v, path)?;
        self.check_keys(
            fields,
            &[
                "kind",
                "moving_part",
                "anchor_local",
                "anchor_global",
                "pin_radius_mm",
                "assembled_rotation_rad",
            ],
            path,
        );
        let kind = self.string(fields, "kind", path).and_then(|k| {
            if k == "pin_hole" {
                Some(ConnectionKind::PinHole)
            } else {
                self.push(
                    ViolationCode::UnknownKind,
                    &join(path, "kind"),
                    format!("unknown connection kind `{k}` (only `pin_hole`)"),
                );
                None
            }
        });
        let moving_part = self.string(fields, "moving_part", path);
        let anchor_local = self
            .get(fields, "anchor_local", path)
            .and_then(|a| self.point(a, &join(path, "anchor_local")));
        let anchor_global = self
            .get(fields, "anchor_global", path)
            .and_then(|a| self.point(a, &join(path, "anchor_global")));
        let pin_radius_mm = self.number(fields, "pin_radius_mm", path);
        let assembled_rotation_rad = self.number(fields, "assembled_rotation_rad", path);
        Some(ConnectionSpec {
            kind: kind?,
            moving_part: moving_part?,
            anchor_local: anchor_local?,
            anchor_global: anchor_global?,
            pin_radius_mm: pin_radius_mm?,
            assembled_rotation_rad: assembled_rotation_rad?,
        })
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_owned()
    } else {
        format!("{path}.{key}")
    }
}
