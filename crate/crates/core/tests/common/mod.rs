//! Generators and independent oracles shared by the integration suites and
//! the acceptance gate. Oracles here never call the code they check except
//! through its public entry points.
#![allow(dead_code)]

pub mod checks;

use mechforge::sdf::{Sdf2, Vec2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Workspace root, for fixtures.
pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(rel: &str) -> PathBuf {
    repo_root().join("fixtures").join(rel)
}

// ---------------------------------------------------------------------------
// SDF oracles

/// Exact primitives with hand-written distance formulas.
#[derive(Debug, Clone, Copy)]
pub enum ExactPrim {
    Circle(f64),
    Rect(f64, f64),
    Balk(f64, f64),
    Ring(f64, f64),
}

impl ExactPrim {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        match rng.gen_range(0..4) {
            0 => ExactPrim::Circle(rng.gen_range(0.5..30.0)),
            1 => ExactPrim::Rect(rng.gen_range(0.5..40.0), rng.gen_range(0.5..40.0)),
            2 => ExactPrim::Balk(rng.gen_range(0.5..40.0), rng.gen_range(0.5..20.0)),
            _ => {
                let inner = rng.gen_range(0.5..20.0);
                ExactPrim::Ring(inner + rng.gen_range(0.5..10.0), inner)
            }
        }
    }

    pub fn sdf(&self) -> Sdf2 {
        match *self {
            ExactPrim::Circle(r) => Sdf2::circle(r),
            ExactPrim::Rect(w, h) => Sdf2::rectangle(w, h),
            ExactPrim::Balk(l, w) => Sdf2::balk(l, w),
            ExactPrim::Ring(o, i) => Sdf2::ring(o, i),
        }
        .unwrap()
    }

    /// Distance written from first principles.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            ExactPrim::Circle(r) => x.hypot(y) - r,
            ExactPrim::Rect(w, h) => {
                let (dx, dy) = (x.abs() - w / 2.0, y.abs() - h / 2.0);
                if dx <= 0.0 && dy <= 0.0 {
                    dx.max(dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
            ExactPrim::Balk(l, w) => {
                let cx = x.clamp(-l / 2.0, l / 2.0);
                (x - cx).hypot(y) - w / 2.0
            }
            ExactPrim::Ring(o, i) => {
                let r = x.hypot(y);
                (r - o).max(i - r)
            }
        }
    }

    pub fn half_extent(&self) -> f64 {
        match *self {
            ExactPrim::Circle(r) => r,
            ExactPrim::Rect(w, h) => w.max(h) / 2.0,
            ExactPrim::Balk(l, w) => (l + w) / 2.0,
            ExactPrim::Ring(o, _) => o,
        }
    }
}

/// Expression tree mirrored on the test side. Leaves delegate to the library
/// primitive; every combinator is evaluated here from its definition.
#[derive(Debug, Clone)]
pub enum Tree {
    Leaf(Sdf2),
    Union(Vec<Tree>),
    Inter(Vec<Tree>),
    Diff(Vec<Tree>),
    Move(f64, f64, f64, Box<Tree>),
    Offset(f64, Box<Tree>),
}

impl Tree {
    pub fn random(rng: &mut ChaCha8Rng, depth: u32) -> Tree {
        if depth == 0 || rng.gen_bool(0.3) {
            let leaf = if rng.gen_bool(0.15) {
                Sdf2::gear(
                    rng.gen_range(3.0..20.0),
                    rng.gen_range(4..30),
                    rng.gen_range(0.5..4.0),
                    rng.gen_range(0.1..0.9),
                )
                .unwrap()
            } else {
                ExactPrim::random(rng).sdf()
            };
            return Tree::Leaf(leaf);
        }
        let n = rng.gen_range(1..4);
        let kids = |rng: &mut ChaCha8Rng| {
            (0..n)
                .map(|_| Tree::random(rng, depth - 1))
                .collect::<Vec<_>>()
        };
        match rng.gen_range(0..5) {
            0 => Tree::Union(kids(rng)),
            1 => Tree::Inter(kids(rng)),
            2 => Tree::Diff(kids(rng)),
            3 => Tree::Move(
                rng.gen_range(-PI..PI),
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
                Box::new(Tree::random(rng, depth - 1)),
            ),
            _ => Tree::Offset(
                rng.gen_range(-2.0..3.0),
                Box::new(Tree::random(rng, depth - 1)),
            ),
        }
    }

    pub fn sdf(&self) -> Sdf2 {
        use mechforge::sdf::{BooleanOp, RigidTransform2};
        match self {
            Tree::Leaf(s) => s.clone(),
            Tree::Union(k) => Sdf2::boolean(BooleanOp::Union, k.iter().map(Tree::sdf).collect()),
            Tree::Inter(k) => {
                Sdf2::boolean(BooleanOp::Intersection, k.iter().map(Tree::sdf).collect())
            }
            Tree::Diff(k) => {
                Sdf2::boolean(BooleanOp::Difference, k.iter().map(Tree::sdf).collect())
            }
            Tree::Move(r, dx, dy, k) => {
                Sdf2::transform(RigidTransform2::new(*r, Vec2::new(*dx, *dy)), k.sdf())
            }
            Tree::Offset(d, k) => Sdf2::offset(*d, k.sdf()),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Tree::Leaf(s) => s.eval_xy(x, y),
            Tree::Union(k) => k.iter().map(|t| t.eval(x, y)).fold(f64::INFINITY, f64::min),
            Tree::Inter(k) => k
                .iter()
                .map(|t| t.eval(x, y))
                .fold(f64::NEG_INFINITY, f64::max),
            Tree::Diff(k) => k[1..]
                .iter()
                .fold(k[0].eval(x, y), |acc, t| acc.max(-t.eval(x, y))),
            Tree::Move(r, dx, dy, k) => {
                // Inverse pose: untranslate, then rotate by -r.
                let (qx, qy) = (x - dx, y - dy);
                let (s, c) = (-r).sin_cos();
                k.eval(c * qx - s * qy, s * qx + c * qy)
            }
            Tree::Offset(d, k) => k.eval(x, y) - d,
        }
    }
}

/// CCW outline of a gear as the boundary of disk ∪ teeth, with
/// `vertices` points in total: four per tooth, the rest spread over the
/// pitch-circle arcs between teeth.
pub fn gear_polygon(
    pitch: f64,
    teeth: u32,
    depth: f64,
    ratio: f64,
    vertices: usize,
) -> Vec<(f64, f64)> {
    let sector = TAU / teeth as f64;
    let half = ratio * sector / 2.0;
    let arc_total = vertices - 4 * teeth as usize;
    let root_half_chord = pitch * half.sin();
    let mut out = Vec::with_capacity(vertices);
    for k in 0..teeth {
        let phi = k as f64 * sector;
        let (u, v) = ((phi.cos(), phi.sin()), (-phi.sin(), phi.cos()));
        let at = |radial: f64, lateral: f64| {
            (radial * u.0 + lateral * v.0, radial * u.1 + lateral * v.1)
        };
        out.push(at(pitch * half.cos(), -root_half_chord));
        out.push(at(pitch + depth, -root_half_chord / 2.0));
        out.push(at(pitch + depth, root_half_chord / 2.0));
        out.push(at(pitch * half.cos(), root_half_chord));
        // Arc to the next tooth's first root corner, endpoints excluded.
        let arc_points =
            arc_total / teeth as usize + usize::from((k as usize) < arc_total % teeth as usize);
        let (a0, a1) = (phi + half, phi + sector - half);
        for j in 1..=arc_points {
            let a = a0 + (a1 - a0) * j as f64 / (arc_points + 1) as f64;
            out.push((pitch * a.cos(), pitch * a.sin()));
        }
    }
    out
}

/// Even-odd ray casting toward +x.
pub fn inside_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[(i + n - 1) % n];
        if (yi > y) != (yj > y) && x < xj + (y - yj) * (xi - xj) / (yi - yj) {
            inside = !inside;
        }
    }
    inside
}

pub fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

// ---------------------------------------------------------------------------
// Mechanism documents

/// Grid pitch between assembled parts. No part reaches farther than 16.5 mm
/// from its anchor, so neighbors never touch.
const CELL_MM: f64 = 36.0;

fn random_part_shape(rng: &mut ChaCha8Rng) -> (Value, [f64; 2], f64) {
    // (shape, hole anchor, pin radius): every shape leaves a >= 0.5 mm wall
    // around a hole of pin + 1 mm clearance at the anchor.
    match rng.gen_range(0..6) {
        0 => {
            let r = rng.gen_range(5.0..10.0);
            (
                json!({"prim": "circle", "radius_mm": r}),
                [0.0, 0.0],
                rng.gen_range(1.0..2.0),
            )
        }
        1 => {
            let (w, h) = (rng.gen_range(10.0..18.0), rng.gen_range(10.0..18.0));
            (
                json!({"prim": "rect", "width_mm": w, "height_mm": h}),
                [0.0, 0.0],
                rng.gen_range(1.0..2.0),
            )
        }
        2 => {
            let (l, w) = (rng.gen_range(4.0..10.0), rng.gen_range(8.0..10.0));
            (
                json!({"prim": "balk", "length_mm": l, "width_mm": w}),
                [-l / 2.0, 0.0],
                rng.gen_range(1.0..2.0),
            )
        }
        3 => {
            let inner = rng.gen_range(2.0..3.0);
            let outer = inner + rng.gen_range(6.0..7.0);
            let mid = (inner + outer) / 2.0;
            (
                json!({"prim": "ring", "outer_radius_mm": outer, "inner_radius_mm": inner}),
                [mid, 0.0],
                1.0,
            )
        }
        4 => {
            let pitch = rng.gen_range(6.0..9.0);
            (
                json!({"prim": "gear", "pitch_radius_mm": pitch, "teeth": rng.gen_range(6..14),
                       "tooth_depth_mm": rng.gen_range(1.0..2.5), "tooth_width_ratio": rng.gen_range(0.3..0.7)}),
                [0.0, 0.0],
                rng.gen_range(1.0..2.0),
            )
        }
        _ => {
            let dx = rng.gen_range(2.0..5.0);
            let rot = rng.gen_range(-PI..PI);
            (
                json!({"op": "union", "args": [
                    {"prim": "circle", "radius_mm": 6.0},
                    {"xform": {"rot_rad": rot, "dx_mm": dx, "dy_mm": 0.0},
                     "arg": {"prim": "rect", "width_mm": 8.0, "height_mm": 4.0}}
                ]}),
                [0.0, 0.0],
                rng.gen_range(1.0..2.0),
            )
        }
    }
}

/// A valid, compilable document with `n` parts. Each part sits in its own
/// grid cell once assembled, so nothing collides; the first part is left
/// unconnected and stays at the origin cell.
pub fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> Value {
    let cols = (n as f64).sqrt().ceil() as usize;
    let mut parts = Vec::with_capacity(n);
    let mut conns = Vec::new();
    let free = rng.gen_bool(0.5);
    for i in 0..n {
        let id = format!("p{i:02}");
        let (shape, anchor, pin) = random_part_shape(rng);
        parts.push(json!({"id": id, "shape": shape}));
        if free && i == 0 {
            continue;
        }
        let cell = [(i % cols) as f64 * CELL_MM, (i / cols) as f64 * CELL_MM];
        conns.push(json!({
            "kind": "pin_hole",
            "moving_part": id,
            "anchor_local": anchor,
            "anchor_global": cell,
            "pin_radius_mm": pin,
            "assembled_rotation_rad": rng.gen_range(-PI..PI),
        }));
    }
    json!({
        "name": format!("random-{n}"),
        "thickness_mm": rng.gen_range(2.0..6.0),
        "parts": parts,
        "connections": conns,
    })
}

pub fn to_bytes(v: &Value) -> Vec<u8> {
    serde_json::to_vec_pretty(v).unwrap()
}

/// Arbitrary shape tree as a document value, parameters always valid.
pub fn random_shape_value(rng: &mut ChaCha8Rng, depth: u32) -> Value {
    if depth == 0 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..5) {
            0 => json!({"prim": "circle", "radius_mm": rng.gen_range(1.0..20.0)}),
            1 => {
                json!({"prim": "rect", "width_mm": rng.gen_range(1.0..30.0), "height_mm": rng.gen_range(1.0..30.0)})
            }
            2 => {
                json!({"prim": "balk", "length_mm": rng.gen_range(1.0..30.0), "width_mm": rng.gen_range(1.0..10.0)})
            }
            3 => {
                let i = rng.gen_range(1.0..10.0);
                json!({"prim": "ring", "outer_radius_mm": i + rng.gen_range(1.0..10.0), "inner_radius_mm": i})
            }
            _ => {
                json!({"prim": "gear", "pitch_radius_mm": rng.gen_range(3.0..20.0), "teeth": rng.gen_range(4..40),
                        "tooth_depth_mm": rng.gen_range(0.5..3.0), "tooth_width_ratio": rng.gen_range(0.1..0.9)})
            }
        };
    }
    match rng.gen_range(0..4) {
        0 => {
            let op = ["union", "intersection", "difference"][rng.gen_range(0..3)];
            let n = rng.gen_range(1..4);
            json!({"op": op, "args": (0..n).map(|_| random_shape_value(rng, depth - 1)).collect::<Vec<_>>()})
        }
        1 | 2 => {
            json!({"xform": {"rot_rad": rng.gen_range(-PI..PI), "dx_mm": rng.gen_range(-10.0..10.0),
                                  "dy_mm": rng.gen_range(-10.0..10.0)},
                        "arg": random_shape_value(rng, depth - 1)})
        }
        _ => {
            json!({"offset_mm": rng.gen_range(-0.5..2.0), "arg": random_shape_value(rng, depth - 1)})
        }
    }
}

/// A document that parses: random shape trees, connections anchored at an
/// interior point found by sampling, optional grasp pins and parameters.
/// Parts whose tree turns out empty are replaced by a disk.
pub fn random_document(rng: &mut ChaCha8Rng) -> Value {
    let n = rng.gen_range(1..5);
    let mut parts = Vec::new();
    let mut conns = Vec::new();
    for i in 0..n {
        let id = format!("part_{i}");
        let mut shape = random_shape_value(rng, 3);
        let mut interior = interior_point(&shape, rng);
        if interior.is_none() {
            shape = json!({"prim": "circle", "radius_mm": 5.0});
            interior = Some([0.0, 0.0]);
        }
        let p = interior.unwrap();
        let mut part = json!({"id": id, "shape": shape});
        if rng.gen_bool(0.3) {
            part["grasp_pin"] = json!(p);
        }
        parts.push(part);
        if rng.gen_bool(0.7) {
            conns.push(json!({
                "kind": "pin_hole", "moving_part": id, "anchor_local": p,
                "anchor_global": [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)],
                "pin_radius_mm": rng.gen_range(0.5..3.0), "assembled_rotation_rad": rng.gen_range(-PI..PI),
            }));
        }
    }
    let mut doc = json!({
        "name": format!("doc_{}", rng.gen_range(0..1000)),
        "thickness_mm": rng.gen_range(0.5..10.0),
        "parts": parts,
        "connections": conns,
    });
    if rng.gen_bool(0.3) {
        doc["global_params"] = json!({"scale": rng.gen_range(0.1..10.0), "k": 3});
    }
    doc
}

fn interior_point(shape: &Value, rng: &mut ChaCha8Rng) -> Option<[f64; 2]> {
    let doc = json!({"name": "probe", "thickness_mm": 1, "parts": [{"id": "p", "shape": shape}], "connections": []});
    let spec = mechforge::spec::parse_spec(&to_bytes(&doc)).ok()?;
    let sdf = spec.parts[0].shape.to_sdf().ok()?;
    let b = sdf.bounding_box();
    (0..400).find_map(|_| {
        let p = Vec2::new(
            rng.gen_range(b.min.x..=b.max.x),
            rng.gen_range(b.min.y..=b.max.y),
        );
        (sdf.eval(p) < -1e-6).then_some([p.x, p.y])
    })
}

// ---------------------------------------------------------------------------
// G-code re-parser

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub rapid: bool,
    pub from: [f64; 3],
    pub to: [f64; 3],
    /// Absolute E after the move, if present.
    pub e: Option<f64>,
    pub feed: f64,
}

/// Moves of a file in order; positions start at the origin (after G28).
pub fn parse_moves(gcode: &str) -> Vec<Move> {
    let mut pos = [0.0f64; 3];
    let mut out = Vec::new();
    for line in gcode.lines() {
        let line = line.split(';').next().unwrap().trim();
        let mut words = line.split_whitespace();
        let Some(cmd) = words.next() else { continue };
        if cmd != "G0" && cmd != "G1" {
            continue;
        }
        let mut to = pos;
        let (mut e, mut feed) = (None, f64::NAN);
        for w in words {
            let (k, v) = w.split_at(1);
            let v: f64 = v.parse().unwrap();
            match k {
                "X" => to[0] = v,
                "Y" => to[1] = v,
                "Z" => to[2] = v,
                "E" => e = Some(v),
                "F" => feed = v,
                other => panic!("unexpected word {other}"),
            }
        }
        out.push(Move {
            rapid: cmd == "G0",
            from: pos,
            to,
            e,
            feed,
        });
        pos = to;
    }
    out
}

pub fn move_len(m: &Move) -> f64 {
    let d = [
        m.to[0] - m.from[0],
        m.to[1] - m.from[1],
        m.to[2] - m.from[2],
    ];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}
