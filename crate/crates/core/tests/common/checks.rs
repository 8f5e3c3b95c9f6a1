//! One function per acceptance criterion. Each returns a short summary on
//! success and the first counterexample on failure. The per-suite test files
//! call these, and the acceptance gate calls all of them.

use super::*;
use mechforge::compiler::{build_manifest, compile_assembly, CompiledAssembly, FeatureKind};
use mechforge::emit::{
    read_manifest, read_stl, write_manifest, write_stl, AssemblyManifest, PrintParams,
};
use mechforge::generation::{render_table, run_benchmark};
use mechforge::mesh::{extract_contours, extrude, TriMesh};
use mechforge::pipeline::{compile_artifacts, CompileOptions, PLATE_GCODE};
use mechforge::plan::{plan_workflow, ApiCall, AssemblyPlan, RobotId, StepKind};
use mechforge::sim::{
    simulate, SimTimeline, Topology, RES_DESIGNER, RES_DRONE, RES_PRINTER, RES_TRANSFER_ARM,
};
use mechforge::spec::{parse_spec, CellParams};
use std::collections::{BTreeMap, BTreeSet};

pub type Check = Result<String, String>;

// A NaN operand must fail, so conditions are negated rather than flipped.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// 1. SDF kernel

/// Central-difference gradient norm of every exact primitive is 1 within
/// 1e-3 at `points` random points per primitive with |f| > 0.1. Values also
/// match the hand-written distance to 1e-12.
pub fn sdf_gradient_norm(points: usize) -> Check {
    const H: f64 = 1e-4;
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for kind in 0..4 {
        let mut n = 0;
        while n < points {
            let prim = loop {
                let p = ExactPrim::random(&mut r);
                if std::mem::discriminant(&p)
                    == std::mem::discriminant(
                        &[
                            ExactPrim::Circle(1.0),
                            ExactPrim::Rect(1.0, 1.0),
                            ExactPrim::Balk(1.0, 1.0),
                            ExactPrim::Ring(2.0, 1.0),
                        ][kind],
                    )
                {
                    break p;
                }
            };
            let s = prim.sdf();
            let e = prim.half_extent() * 1.5 + 1.0;
            let (x, y) = (r.gen_range(-e..e), r.gen_range(-e..e));
            let f = s.eval_xy(x, y);
            ensure!(
                (f - prim.distance(x, y)).abs() <= 1e-12 * (1.0 + f.abs()),
                "{prim:?} at ({x}, {y}): library {f}, oracle {}",
                prim.distance(x, y)
            );
            if f.abs() <= 0.1 {
                continue;
            }
            let gx = (s.eval_xy(x + H, y) - s.eval_xy(x - H, y)) / (2.0 * H);
            let gy = (s.eval_xy(x, y + H) - s.eval_xy(x, y - H)) / (2.0 * H);
            let err = (gx.hypot(gy) - 1.0).abs();
            ensure!(
                err <= 1e-3,
                "{prim:?} at ({x}, {y}): |grad| = {}",
                gx.hypot(gy)
            );
            worst = worst.max(err);
            n += 1;
        }
    }
    Ok(format!(
        "4 x {points} points, worst | |grad| - 1 | = {worst:.2e}"
    ))
}

/// Boolean, transform and offset laws on `trees` random trees, 20 points
/// each: library value equals the oracle tree within 1e-9; the same point
/// evaluates bit-identically twice; union membership is sign-correct.
pub fn sdf_boolean_laws(trees: usize) -> Check {
    let mut r = rng(2);
    for t in 0..trees {
        let tree = Tree::random(&mut r, 4);
        let s = tree.sdf();
        let other = Tree::random(&mut r, 2);
        let o = other.sdf();
        let u = mechforge::sdf::Sdf2::union(s.clone(), o.clone());
        let i = mechforge::sdf::Sdf2::intersection(s.clone(), o.clone());
        let d = mechforge::sdf::Sdf2::difference(s.clone(), o.clone());
        for _ in 0..20 {
            let (x, y) = (r.gen_range(-60.0..60.0), r.gen_range(-60.0..60.0));
            let (a, b) = (s.eval_xy(x, y), o.eval_xy(x, y));
            let want = tree.eval(x, y);
            ensure!(
                (a - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "tree {t} at ({x}, {y}): {a} vs oracle {want}"
            );
            ensure!(
                a.to_bits() == s.eval_xy(x, y).to_bits(),
                "tree {t}: nondeterministic"
            );
            ensure!(u.eval_xy(x, y) == a.min(b), "tree {t}: union law");
            ensure!(i.eval_xy(x, y) == a.max(b), "tree {t}: intersection law");
            ensure!(d.eval_xy(x, y) == a.max(-b), "tree {t}: difference law");
            if a <= 0.0 || b <= 0.0 {
                ensure!(u.eval_xy(x, y) <= 0.0, "tree {t}: union lost membership");
            }
        }
    }
    Ok(format!("{trees} trees x 20 points"))
}

/// Every point with f <= 0 on a dense grid lies inside the bounding box.
pub fn sdf_bbox_conservative(trees: usize) -> Check {
    let mut r = rng(3);
    for t in 0..trees {
        let tree = Tree::random(&mut r, 3);
        let s = tree.sdf();
        let b = s.bounding_box();
        for j in 0..60 {
            for i in 0..60 {
                let (x, y) = (
                    -80.0 + i as f64 * 160.0 / 59.0,
                    -80.0 + j as f64 * 160.0 / 59.0,
                );
                if s.eval_xy(x, y) <= 0.0 {
                    ensure!(
                        x >= b.min.x - 1e-9
                            && x <= b.max.x + 1e-9
                            && y >= b.min.y - 1e-9
                            && y <= b.max.y + 1e-9,
                        "tree {t}: ({x}, {y}) inside the shape but outside {b:?}"
                    );
                }
            }
        }
    }
    Ok(format!("{trees} trees on a 60 x 60 grid"))
}

/// Gear(15, 12, 3, 0.5) sign agrees with a 2048-vertex polygon on
/// `samples` uniform points of its box.
pub fn sdf_gear_oracle(samples: usize) -> Check {
    let gear = mechforge::sdf::Sdf2::gear(15.0, 12, 3.0, 0.5).unwrap();
    let poly = gear_polygon(15.0, 12, 3.0, 0.5, 2048);
    ensure!(poly.len() == 2048, "polygon has {} vertices", poly.len());
    let b = gear.bounding_box();
    let mut r = rng(4);
    let mut agree = 0usize;
    for _ in 0..samples {
        let (x, y) = (r.gen_range(b.min.x..b.max.x), r.gen_range(b.min.y..b.max.y));
        if (gear.eval_xy(x, y) < 0.0) == inside_polygon(&poly, x, y) {
            agree += 1;
        }
    }
    let frac = agree as f64 / samples as f64;
    ensure!(frac >= 0.999, "sign agreement {frac:.5} < 0.999");
    Ok(format!("agreement {:.3}% of {samples}", 100.0 * frac))
}

// ---------------------------------------------------------------------------
// 2. Mesher

fn compile_doc(doc: &[u8], resolution: usize) -> Result<mechforge::pipeline::Artifacts, String> {
    let opts = CompileOptions {
        resolution,
        ..CompileOptions::default()
    };
    compile_artifacts(doc, &opts).map_err(|e| e.to_string())
}

fn boundary_edges(m: &TriMesh) -> usize {
    // Independent count: every directed edge needs its reverse exactly once.
    let mut edges: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for t in &m.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edges.entry((a, b)).or_default() += 1;
        }
    }
    edges
        .iter()
        .filter(|((a, b), n)| **n != 1 || edges.get(&(*b, *a)) != Some(&1))
        .count()
}

/// Every component mesh of the fixtures (default resolution) and of
/// `random` random specs (resolution 64) has zero boundary edges.
pub fn mesh_watertight(random: usize) -> Check {
    let mut docs: Vec<(String, Vec<u8>, usize)> = vec![(
        "gripper".into(),
        std::fs::read(fixture("gripper.json")).unwrap(),
        256,
    )];
    for e in std::fs::read_dir(fixture("perfect/synthetic-perfect")).unwrap() {
        let p = e.unwrap().path();
        docs.push((
            p.display().to_string(),
            std::fs::read(p.join("spec.json")).unwrap(),
            256,
        ));
    }
    let mut r = rng(5);
    for i in 0..random {
        let n = r.gen_range(1..6);
        docs.push((format!("random {i}"), to_bytes(&random_spec(&mut r, n)), 64));
    }
    let mut meshes = 0;
    for (name, doc, res) in &docs {
        let art = compile_doc(doc, *res).map_err(|e| format!("{name}: {e}"))?;
        for m in &art.meshes {
            for (what, mesh) in [
                ("local", &m.local),
                ("print", &m.print),
                ("assembled", &m.assembled),
            ] {
                let open = boundary_edges(mesh);
                ensure!(open == 0, "{name}/{}/{what}: {open} boundary edges", m.id);
                meshes += 1;
            }
        }
    }
    Ok(format!("{meshes} meshes from {} documents", docs.len()))
}

/// Extruded volume equals contour area x thickness within 1e-9 relative on
/// random shapes.
pub fn mesh_prism_volume(shapes: usize) -> Check {
    let mut r = rng(6);
    let mut done = 0;
    while done < shapes {
        let tree = Tree::random(&mut r, 3);
        let s = tree.sdf();
        let Ok(polys) = extract_contours(&s, s.bounding_box(), 96) else {
            continue;
        };
        if polys.is_empty() {
            continue;
        }
        let t = r.gen_range(0.5..10.0);
        let m = extrude(&polys, t, 0.0).map_err(|e| format!("shape {done}: {e}"))?;
        let oracle: f64 = polys
            .loops()
            .map(|l| polygon_area(&l.iter().map(|v| (v.x, v.y)).collect::<Vec<_>>()))
            .sum::<f64>()
            * t;
        ensure!(
            (m.volume() - oracle).abs() <= 1e-9 * oracle.abs(),
            "shape {done}: volume {} vs {oracle}",
            m.volume()
        );
        ensure!(boundary_edges(&m) == 0, "shape {done}: not watertight");
        done += 1;
    }
    Ok(format!("{shapes} random prisms"))
}

/// Area error of a contoured r = 10 circle at resolutions 64, 128 and 256.
pub fn circle_area_errors() -> [f64; 3] {
    let c = mechforge::sdf::Sdf2::circle(10.0).unwrap();
    let exact = std::f64::consts::PI * 100.0;
    [64, 128, 256]
        .map(|res| (extract_contours(&c, c.bounding_box(), res).unwrap().area() - exact).abs())
}

/// err(128) / err(256) <= 4.
pub fn mesh_circle_convergence() -> Check {
    let [_, e128, e256] = circle_area_errors();
    let ratio = e128 / e256;
    ensure!(ratio <= 4.0, "err(128)/err(256) = {ratio:.3} > 4");
    Ok(format!(
        "err(128) = {e128:.3e}, err(256) = {e256:.3e}, ratio {ratio:.3}"
    ))
}

// ---------------------------------------------------------------------------
// 3. Formats

fn random_meshes(count: usize) -> Vec<TriMesh> {
    let mut r = rng(7);
    let mut out = Vec::new();
    while out.len() < count {
        let tree = Tree::random(&mut r, 3);
        let s = tree.sdf();
        if let Ok(p) = extract_contours(&s, s.bounding_box(), 48) {
            if let Ok(m) = extrude(&p, r.gen_range(0.5..5.0), r.gen_range(-5.0..5.0)) {
                out.push(m);
            }
        }
    }
    out
}

/// Byte-length law and vertex-exact round trip on `count` meshes.
pub fn stl_laws(count: usize) -> Check {
    for (k, m) in random_meshes(count).iter().enumerate() {
        let bytes = write_stl(m);
        ensure!(
            bytes.len() == 84 + 50 * m.triangle_count(),
            "mesh {k}: {} bytes for {} triangles",
            bytes.len(),
            m.triangle_count()
        );
        ensure!(bytes.starts_with(b"mechforge"), "mesh {k}: header tag");
        let count_word = u32::from_le_bytes(bytes[80..84].try_into().unwrap());
        ensure!(
            count_word as usize == m.triangle_count(),
            "mesh {k}: count word"
        );
        let facets = read_stl(&bytes).map_err(|e| format!("mesh {k}: {e}"))?;
        for (f, t) in facets.iter().zip(&m.triangles) {
            for (c, &vi) in f.vertices.iter().zip(t) {
                let v = m.vertices[vi as usize];
                ensure!(
                    *c == [v[0] as f32, v[1] as f32, v[2] as f32],
                    "mesh {k}: vertex {vi} changed in the round trip"
                );
            }
        }
    }
    Ok(format!("{count} meshes"))
}

/// write(read(write(m))) == write(m) on the gripper and random assemblies.
pub fn manifest_identity(random: usize) -> Check {
    let mut manifests =
        vec![compile_doc(&std::fs::read(fixture("gripper.json")).unwrap(), 64)?.manifest];
    let mut r = rng(8);
    for _ in 0..random {
        let n = r.gen_range(1..8);
        manifests.push(random_manifest(&mut r, n)?.1);
    }
    for (k, m) in manifests.iter().enumerate() {
        let bytes = write_manifest(m);
        let back = read_manifest(&bytes).map_err(|e| format!("manifest {k}: {e}"))?;
        ensure!(&back == m, "manifest {k}: read differs from the original");
        ensure!(
            write_manifest(&back) == bytes,
            "manifest {k}: bytes differ after a round trip"
        );
    }
    Ok(format!("{} manifests", manifests.len()))
}

/// Bed bounds, Z and E monotonicity and mass conservation on the gripper
/// plate, checked with an independent re-parser.
pub fn gcode_laws() -> Check {
    let art = compile_doc(&std::fs::read(fixture("gripper.json")).unwrap(), 256)?;
    let gcode = String::from_utf8(art.files[PLATE_GCODE].clone()).unwrap();
    let p = PrintParams::default();
    let k = p.layer_height * p.extrusion_width
        / (std::f64::consts::PI * (p.filament_diameter / 2.0).powi(2));
    let moves = parse_moves(&gcode);
    ensure!(!moves.is_empty(), "no moves");
    let (mut z, mut e, mut printed) = (0.0f64, 0.0f64, 0.0f64);
    let mut worst_step = 0.0f64;
    for (i, m) in moves.iter().enumerate() {
        ensure!(m.feed.is_finite() && m.feed > 0.0, "move {i}: no feed");
        ensure!(
            (0.0..=p.bed_width).contains(&m.to[0]) && (0.0..=p.bed_depth).contains(&m.to[1]),
            "move {i}: ({}, {}) off the bed",
            m.to[0],
            m.to[1]
        );
        ensure!(
            m.to[2] >= z,
            "move {i}: Z went down from {z} to {}",
            m.to[2]
        );
        z = m.to[2];
        if let Some(ev) = m.e {
            ensure!(!m.rapid, "move {i}: G0 extrudes");
            ensure!(ev >= e, "move {i}: E went down from {e} to {ev}");
            ensure!(m.to[2] == m.from[2], "move {i}: extrusion while changing Z");
            let len = move_len(m);
            worst_step = worst_step.max(((ev - e) - len * k).abs());
            printed += len;
            e = ev;
        }
    }
    let expected = printed * k;
    let rel = (e - expected).abs() / expected;
    ensure!(
        rel <= 1e-6,
        "final E {e} vs path x rate {expected}: relative error {rel:.2e}"
    );
    ensure!(
        worst_step <= 1e-5,
        "a single move's E is off by {worst_step:.2e}"
    );
    Ok(format!(
        "{} moves, {printed:.0} mm extruded path, E {e:.3} mm, mass error {rel:.1e}",
        moves.len()
    ))
}

// ---------------------------------------------------------------------------
// 4. Compiler

/// Compiles a random 1..n-part spec into an assembly and its manifest.
pub fn random_manifest(
    r: &mut ChaCha8Rng,
    n: usize,
) -> Result<(CompiledAssembly, AssemblyManifest), String> {
    let doc = to_bytes(&random_spec(r, n));
    let spec = parse_spec(&doc).map_err(|e| e.to_string())?;
    let asm = compile_assembly(&spec, &CellParams::default(), 0.3).map_err(|e| e.to_string())?;
    let m = build_manifest(&asm);
    Ok((asm, m))
}

/// Hole radius == pin radius + clearance, bit for bit, for random clearances.
pub fn compiler_clearance_law(specs: usize) -> Check {
    let mut r = rng(9);
    for k in 0..specs {
        let n = r.gen_range(1..6);
        let spec = parse_spec(&to_bytes(&random_spec(&mut r, n))).map_err(|e| e.to_string())?;
        let c = if k % 5 == 0 {
            0.0
        } else {
            r.gen_range(0.0..1.0)
        };
        let asm = compile_assembly(&spec, &CellParams::default(), c)
            .map_err(|e| format!("spec {k}: {e}"))?;
        for conn in &spec.connections {
            let part = asm.component(&conn.moving_part).unwrap();
            let holes: Vec<_> = part.holes().collect();
            ensure!(
                holes.len() == 1,
                "spec {k}: {} holes in {}",
                holes.len(),
                part.id
            );
            ensure!(
                holes[0].radius == conn.pin_radius_mm + c,
                "spec {k}: hole {} != {} + {c}",
                holes[0].radius,
                conn.pin_radius_mm
            );
            ensure!(
                holes[0].local_center == conn.anchor_local,
                "spec {k}: hole moved"
            );
        }
    }
    Ok(format!("{specs} specs"))
}

/// Random 5..=12-part specs: every pair of bed boxes is at least
/// `part_spacing` apart, every box lies on the bed, pins sit in holes.
pub fn compiler_layout_and_containment(specs: usize) -> Check {
    let cell = CellParams::default();
    let mut r = rng(10);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..specs {
        let n = r.gen_range(5..=12);
        let (asm, manifest) = random_manifest(&mut r, n).map_err(|e| format!("spec {k}: {e}"))?;
        let boxes: Vec<_> = asm
            .components()
            .map(|c| (c.id.clone(), c.bed_bbox()))
            .collect();
        for (id, b) in &boxes {
            ensure!(
                b.min.x >= -1e-9
                    && b.min.y >= -1e-9
                    && b.max.x <= cell.bed_width + 1e-9
                    && b.max.y <= cell.bed_depth + 1e-9,
                "spec {k}: {id} off the bed at {b:?}"
            );
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let (a, b) = (&boxes[i].1, &boxes[j].1);
                let gap = (b.min.x - a.max.x)
                    .max(a.min.x - b.max.x)
                    .max((b.min.y - a.max.y).max(a.min.y - b.max.y));
                ensure!(
                    gap >= cell.part_spacing - 1e-9,
                    "spec {k}: {} and {} only {gap} mm apart",
                    boxes[i].0,
                    boxes[j].0
                );
            }
        }
        worst = worst.max(containment_from_manifest(&manifest)?);
    }
    ensure!(worst <= 1e-9, "a pin protrudes {worst} mm from its hole");
    Ok(format!(
        "{specs} specs, worst containment excess {worst:.2e} mm"
    ))
}

/// max over mated pins of |hole center - pin center| + r_pin - r_hole, with
/// centers mapped to the assembly frame from the manifest alone.
pub fn containment_from_manifest(m: &AssemblyManifest) -> Result<f64, String> {
    let to_world = |pose: &mechforge::emit::Pose2, p: [f64; 2]| {
        let (s, c) = pose.rot_rad.sin_cos();
        (
            c * p[0] - s * p[1] + pose.x_mm,
            s * p[0] + c * p[1] + pose.y_mm,
        )
    };
    let base = m.component("BASE").ok_or("no BASE")?;
    let mut worst = f64::NEG_INFINITY;
    for pin in base.features.iter().filter(|f| f.kind == FeatureKind::Pin) {
        let Some(mate) = &pin.mate else { continue };
        let part = m.component(&mate.component).ok_or("dangling mate")?;
        let hole = &part.features[mate.feature];
        let (px, py) = to_world(&base.final_pose, pin.local_center);
        let (hx, hy) = to_world(&part.final_pose, hole.local_center);
        worst = worst.max((hx - px).hypot(hy - py) + pin.radius_mm - hole.radius_mm);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// 5. Planner

fn gripper_alternates<'a>(calls: impl Iterator<Item = &'a ApiCall>) -> bool {
    let ops: Vec<bool> = calls
        .filter_map(|c| match c {
            ApiCall::OpenGripper => Some(true),
            ApiCall::CloseGripper => Some(false),
            _ => None,
        })
        .collect();
    ops.iter()
        .enumerate()
        .all(|(i, &open)| open == (i % 2 == 0))
}

fn check_plan(plan: &AssemblyPlan, m: &AssemblyManifest, robots: u8) -> Result<(), String> {
    let steps = &plan.steps;
    ensure!(
        steps.len() == 2 + 2 * m.components.len(),
        "{} steps",
        steps.len()
    );
    ensure!(
        steps[0].kind == StepKind::Receive,
        "first step is {:?}",
        steps[0].kind
    );
    ensure!(
        steps.last().unwrap().kind == StepKind::Return,
        "last step is not a return"
    );
    let pos = |kind: StepKind, id: &str| {
        steps
            .iter()
            .position(|s| s.kind == kind && s.component.as_deref() == Some(id))
    };
    let base_place = pos(StepKind::Place, "BASE").ok_or("BASE never placed")?;
    for c in &m.components {
        let n_detach = steps
            .iter()
            .filter(|s| s.kind == StepKind::Detach && s.component.as_deref() == Some(&c.id))
            .count();
        let n_place = steps
            .iter()
            .filter(|s| s.kind == StepKind::Place && s.component.as_deref() == Some(&c.id))
            .count();
        ensure!(
            n_detach == 1 && n_place == 1,
            "{}: {n_detach} detaches, {n_place} places",
            c.id
        );
        let (d, p) = (
            pos(StepKind::Detach, &c.id).unwrap(),
            pos(StepKind::Place, &c.id).unwrap(),
        );
        ensure!(d < p, "{} placed before it is detached", c.id);
        if c.id != "BASE" {
            ensure!(base_place < p, "{} placed before the base", c.id);
        }
    }
    for s in steps {
        let allowed: &[RobotId] = match (robots, s.kind) {
            (1, _) => &[RobotId::R1],
            (_, StepKind::Receive | StepKind::Return) => &[RobotId::R1],
            _ => &[RobotId::R2],
        };
        ensure!(
            allowed.contains(&s.robot),
            "{:?} step on {}",
            s.kind,
            s.robot
        );
        ensure!(
            s.subtasks.iter().all(|t| !t.api_calls.is_empty()),
            "empty subtask in {:?}",
            s.kind
        );
    }
    for robot in [RobotId::R1, RobotId::R2] {
        ensure!(
            gripper_alternates(plan.robot_calls(robot)),
            "{robot}: open/close do not alternate"
        );
    }
    Ok(())
}

/// Coverage, precedence, gripper alternation and 1-vs-2-robot determinism
/// on `count` random manifests.
pub fn planner_properties(count: usize) -> Check {
    let mut r = rng(11);
    let mut steps = 0;
    for k in 0..count {
        let n = r.gen_range(1..9);
        let (_, m) = random_manifest(&mut r, n).map_err(|e| format!("manifest {k}: {e}"))?;
        let two = CellParams::default();
        let one = CellParams {
            num_manipulators: 1,
            ..two
        };
        let p2 = plan_workflow(&m, &two).map_err(|e| format!("manifest {k}: {e}"))?;
        let p1 = plan_workflow(&m, &one).map_err(|e| format!("manifest {k}: {e}"))?;
        check_plan(&p2, &m, 2).map_err(|e| format!("manifest {k}, 2 robots: {e}"))?;
        check_plan(&p1, &m, 1).map_err(|e| format!("manifest {k}, 1 robot: {e}"))?;
        ensure!(
            p2 == plan_workflow(&m, &two).unwrap(),
            "manifest {k}: planning twice differs"
        );
        ensure!(
            p1.steps.len() == p2.steps.len(),
            "manifest {k}: step counts differ"
        );
        for (a, b) in p1.steps.iter().zip(&p2.steps) {
            ensure!(
                a.kind == b.kind && a.component == b.component && a.subtasks == b.subtasks,
                "manifest {k}: 1- and 2-robot plans differ beyond robot assignment"
            );
        }
        steps += p2.steps.len();
    }
    Ok(format!("{count} manifests, {steps} steps"))
}

// ---------------------------------------------------------------------------
// 6. Simulator

fn random_topology(r: &mut ChaCha8Rng) -> Topology {
    Topology {
        printer_pad: [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0), 0.0],
        assembly_pad: [
            r.gen_range(-5.0..5.0),
            r.gen_range(-5.0..5.0),
            r.gen_range(0.0..2.0),
        ],
        drone_speed: r.gen_range(0.5..5.0),
        takeoff_s: r.gen_range(0.0..20.0),
        landing_s: r.gen_range(0.0..20.0),
        surface_transfer_s: r.gen_range(0.0..60.0),
        per_api_call_s: r.gen_range(0.0..6.0),
        heatup_min: r.gen_range(0.0..10.0),
        blueprint_s: r.gen_range(0.0..60.0),
    }
}

fn busy(t: &SimTimeline, resource: &str) -> f64 {
    t.events
        .iter()
        .filter(|e| e.resource == resource)
        .map(|e| e.t_end - e.t_start)
        .sum()
}

fn check_timeline(
    t: &SimTimeline,
    plan: &AssemblyPlan,
    topo: &Topology,
    print_min: f64,
) -> Result<(), String> {
    let mut by_res: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for e in &t.events {
        ensure!(
            e.t_end >= e.t_start && e.t_start >= 0.0,
            "event {e:?} runs backwards"
        );
        by_res
            .entry(&e.resource)
            .or_default()
            .push((e.t_start, e.t_end));
    }
    for (res, mut iv) in by_res {
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in iv.windows(2) {
            ensure!(
                w[0].1 <= w[1].0 + 1e-9,
                "{res} double-booked: {:?} and {:?}",
                w[0],
                w[1]
            );
        }
    }
    let tol = 1e-9 * (1.0 + t.makespan_s);
    let calls = plan.api_call_count() as f64;
    let robots = busy(t, "R1") + busy(t, "R2");
    ensure!(
        (robots - calls * topo.per_api_call_s).abs() <= tol,
        "robot time {robots} != calls x per-call"
    );
    ensure!(
        (busy(t, RES_PRINTER) - print_min * 60.0).abs() <= tol,
        "printer time"
    );
    ensure!(
        (busy(t, RES_DESIGNER) - topo.blueprint_s).abs() <= tol,
        "designer time"
    );
    ensure!(
        (busy(t, RES_TRANSFER_ARM) - topo.surface_transfer_s).abs() <= tol,
        "transfer time"
    );
    let flight = {
        let d: f64 = (0..3)
            .map(|i| (topo.printer_pad[i] - topo.assembly_pad[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        d / topo.drone_speed
    };
    ensure!(
        (busy(t, RES_DRONE) - (topo.takeoff_s + flight + topo.landing_s)).abs() <= tol,
        "drone time"
    );
    let end = t.events.iter().map(|e| e.t_end).fold(0.0, f64::max);
    ensure!(
        (t.makespan_s - end).abs() <= tol,
        "makespan {} vs last event {end}",
        t.makespan_s
    );
    ensure!(
        (t.stage_durations.total_s() - t.makespan_s).abs() <= tol,
        "stages do not add up to the makespan"
    );
    Ok(())
}

/// Exclusivity, work conservation and makespan(2) <= makespan(1) on
/// `count` random plans and topologies.
pub fn simulator_properties(count: usize) -> Check {
    let mut r = rng(12);
    let mut gain = 0.0f64;
    for k in 0..count {
        let n = r.gen_range(1..9);
        let (_, m) = random_manifest(&mut r, n).map_err(|e| format!("plan {k}: {e}"))?;
        let topo = random_topology(&mut r);
        let print_min = r.gen_range(0.0..200.0);
        let mut spans = [0.0; 2];
        for (slot, robots) in [(0usize, 1u8), (1, 2)] {
            let cell = CellParams {
                num_manipulators: robots,
                ..CellParams::default()
            };
            let plan = plan_workflow(&m, &cell).map_err(|e| e.to_string())?;
            let t =
                simulate(&plan, print_min, &topo, &cell).map_err(|e| format!("plan {k}: {e}"))?;
            check_timeline(&t, &plan, &topo, print_min)
                .map_err(|e| format!("plan {k}, {robots} robots: {e}"))?;
            ensure!(
                t == simulate(&plan, print_min, &topo, &cell).unwrap(),
                "plan {k}: nondeterministic"
            );
            spans[slot] = t.makespan_s;
        }
        ensure!(
            spans[1] <= spans[0] + 1e-9,
            "plan {k}: 2 robots {} > 1 robot {}",
            spans[1],
            spans[0]
        );
        gain = gain.max(spans[0] - spans[1]);
    }
    Ok(format!("{count} plans, largest 2-robot saving {gain:.1} s"))
}

/// 20 m at 2 m/s with 10 s take-off and 10 s landing is 30 s of delivery.
pub fn simulator_delivery_example() -> Check {
    let topo = Topology {
        printer_pad: [0.0, 0.0, 0.0],
        assembly_pad: [20.0, 0.0, 0.0],
        drone_speed: 2.0,
        takeoff_s: 10.0,
        landing_s: 10.0,
        ..Topology::default()
    };
    let mut r = rng(13);
    let (_, m) = random_manifest(&mut r, 2)?;
    let cell = CellParams::default();
    let plan = plan_workflow(&m, &cell).map_err(|e| e.to_string())?;
    let t = simulate(&plan, 60.0, &topo, &cell).map_err(|e| e.to_string())?;
    ensure!(
        t.stage_durations.delivery_s == 30.0,
        "delivery {} s",
        t.stage_durations.delivery_s
    );
    ensure!(
        busy(&t, RES_DRONE) == 30.0,
        "drone busy {} s",
        busy(&t, RES_DRONE)
    );
    Ok("delivery = 30 s exactly".into())
}

// ---------------------------------------------------------------------------
// 7. End to end

/// Gripper compile -> plan -> simulate twice: identical bytes, required
/// outputs present, print stage > 90% of the makespan.
pub fn end_to_end_gripper() -> Check {
    let doc = std::fs::read(fixture("gripper.json")).unwrap();
    let topo_bytes = std::fs::read(fixture("topology/default.json")).unwrap();
    let run = || -> Result<(BTreeMap<String, Vec<u8>>, SimTimeline), String> {
        let art = compile_artifacts(&doc, &CompileOptions::default()).map_err(|e| e.to_string())?;
        let cell = CellParams::default();
        let plan = plan_workflow(&art.manifest, &cell).map_err(|e| e.to_string())?;
        let topo = mechforge::sim::read_topology(&topo_bytes).map_err(|e| e.to_string())?;
        let gcode = std::str::from_utf8(&art.files[PLATE_GCODE]).unwrap();
        let minutes = mechforge::emit::estimate_print_time_with(gcode, topo.heatup_min)
            .map_err(|e| e.to_string())?;
        let t = simulate(&plan, minutes, &topo, &cell).map_err(|e| e.to_string())?;
        let mut files = art.files;
        files.insert("plan.json".into(), mechforge::plan::write_plan(&plan));
        files.insert("timeline.json".into(), mechforge::sim::write_timeline(&t));
        files.insert("report.txt".into(), mechforge::sim::report(&t).into_bytes());
        Ok((files, t))
    };
    let (a, t) = run()?;
    let (b, _) = run()?;
    ensure!(a == b, "two runs differ");
    let names: BTreeSet<&str> = a.keys().map(String::as_str).collect();
    for need in [
        "parts/BASE.stl",
        "parts/finger_left.stl",
        "parts/finger_right.stl",
        "plate.stl",
        "assembly.stl",
        "plate.gcode",
        "manifest.json",
        "preview.svg",
        "plan.json",
        "timeline.json",
    ] {
        ensure!(names.contains(need), "missing {need}");
    }
    let share = t.stage_durations.print_s / t.makespan_s;
    ensure!(
        share > 0.9,
        "print stage is {:.1}% of the makespan",
        100.0 * share
    );
    Ok(format!(
        "{} files identical across runs, print {:.2} of {:.2} min ({:.1}%)",
        a.len(),
        t.stage_durations.print_s / 60.0,
        t.makespan_s / 60.0,
        100.0 * share
    ))
}

// ---------------------------------------------------------------------------
// 8. Benchmark harness

/// Shipped sets render in the table layout, the perfect set scores 10/10/10
/// and stl <= executable on every record.
pub fn benchmark_harness() -> Check {
    let perfect = run_benchmark(&fixture("perfect")).map_err(|e| e.to_string())?;
    ensure!(
        perfect.rows.len() == 1 && perfect.mechanisms.len() == 10,
        "perfect set shape"
    );
    let row = &perfect.rows[0];
    ensure!(
        (row.analysis, row.executable, row.stl) == (10, 10, 10),
        "perfect set scored {}/{}/{}",
        row.analysis,
        row.executable,
        row.stl
    );
    let shipped = run_benchmark(&fixture("bench")).map_err(|e| e.to_string())?;
    let table = render_table(&shipped);
    let header = table.lines().next().unwrap_or_default();
    let cols: Vec<&str> = header.split('|').map(str::trim).collect();
    ensure!(
        cols == ["Model", "Analysis", "Executable Code", "Mechanism STL"],
        "header {header:?}"
    );
    ensure!(
        table.lines().count() == 2 + shipped.rows.len(),
        "one line per model"
    );
    let models: Vec<&str> = shipped.rows.iter().map(|r| r.model.as_str()).collect();
    let mut sorted = models.clone();
    sorted.sort();
    ensure!(models == sorted, "rows not in directory order");
    let mut records = 0;
    for row in perfect.rows.iter().chain(&shipped.rows) {
        for rec in &row.records {
            ensure!(
                rec.scores.stl <= rec.scores.executable,
                "{}/{}: stl > executable",
                row.model,
                rec.mechanism
            );
            records += 1;
        }
    }
    Ok(format!(
        "{records} records, {} shipped models",
        shipped.rows.len()
    ))
}
