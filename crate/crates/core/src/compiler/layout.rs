use super::{
    CompileError, CompiledAssembly, CompiledPart, Feature, FeatureKind, GRASP_PIN_RADIUS_MM,
};
use crate::sdf::{Aabb2, RigidTransform2, Sdf2, Vec2};
use crate::spec::CellParams;

/// Grid used to locate the grasp point when no hint is given.
const GRASP_GRID: usize = 96;

/// Adds grasp pins, then shelf-packs every component onto the bed.
///
/// Order is bounding-box area descending, ties by id ascending. Rows fill
/// left to right from `(spacing, spacing)` with `part_spacing` between boxes
/// and between boxes and the bed edge. Parts keep their local orientation.
pub fn layout_print_bed(
    assembly: &mut CompiledAssembly,
    cell: &CellParams,
) -> Result<(), CompileError> {
    cell.validate().map_err(CompileError::InvalidInput)?;
    add_grasp_pin(&mut assembly.base);
    for p in &mut assembly.parts {
        add_grasp_pin(p);
    }

    let mut items: Vec<(usize, Aabb2)> = assembly
        .components()
        .enumerate()
        .map(|(i, c)| (i, c.local_bbox()))
        .collect();
    items.sort_by(|(ia, a), (ib, b)| {
        b.area()
            .total_cmp(&a.area())
            .then_with(|| id_of(assembly, *ia).cmp(id_of(assembly, *ib)))
    });

    let (bed_w, bed_d) = (cell.bed_width, cell.bed_depth);
    let s = cell.part_spacing;
    let mut x = s;
    let mut y = s;
    let mut row_top = s;
    let mut row_empty = true;
    let mut poses = vec![RigidTransform2::IDENTITY; items.len()];
    for (idx, bbox) in &items {
        if !row_empty && x + bbox.width() + s > bed_w {
            x = s;
            y = after(row_top, s);
            row_empty = true;
        }
        let tx = place(bbox.min.x, x);
        let ty = place(bbox.min.y, y);
        let placed = Aabb2::new(bbox.min + Vec2::new(tx, ty), bbox.max + Vec2::new(tx, ty));
        if placed.max.x + s > bed_w {
            return Err(CompileError::LayoutOverflow(format!(
                "`{}` ({:.2} mm wide) does not fit the {bed_w} mm bed width",
                id_of(assembly, *idx),
                bbox.width()
            )));
        }
        if placed.max.y + s > bed_d {
            return Err(CompileError::LayoutOverflow(format!(
                "`{}` overflows the {bed_d} mm bed depth (needs {:.2} mm)",
                id_of(assembly, *idx),
                placed.max.y + s
            )));
        }
        poses[*idx] = RigidTransform2::translation(tx, ty);
        x = after(placed.max.x, s);
        row_top = if row_empty {
            placed.max.y
        } else {
            row_top.max(placed.max.y)
        };
        row_empty = false;
    }

    assembly.base.initial_pose = poses[0];
    for (p, pose) in assembly.parts.iter_mut().zip(&poses[1..]) {
        p.initial_pose = *pose;
    }
    Ok(())
}

fn id_of(assembly: &CompiledAssembly, idx: usize) -> &str {
    if idx == 0 {
        &assembly.base.id
    } else {
        &assembly.parts[idx - 1].id
    }
}

/// Translation that puts `min` at or just above `target`, so that the placed
/// coordinate never rounds below the cursor.
fn place(min: f64, target: f64) -> f64 {
    let mut t = target - min;
    while min + t < target {
        t = t.next_up();
    }
    t
}

/// Smallest float `c >= edge + gap` with `c - edge >= gap` as well.
fn after(edge: f64, gap: f64) -> f64 {
    let mut c = edge + gap;
    while c - edge < gap || c < edge + gap {
        c = c.next_up();
    }
    c
}

/// Adds a grasp-pin feature (and boss) unless the part already has one. The
/// pin goes at the hint, else at the area centroid when there is room for it,
/// else at the sampled point farthest from the boundary and from any pins.
fn add_grasp_pin(part: &mut CompiledPart) {
    if part.has_grasp_pin() {
        return;
    }
    let center = part.grasp_hint.unwrap_or_else(|| grasp_location(part));
    let boss = Sdf2::circle(GRASP_PIN_RADIUS_MM)
        .expect("positive radius")
        .translated(center.x, center.y);
    // Holes are cut after the boss so they stay open.
    part.shape = reapply_holes(Sdf2::union(part.shape.clone(), boss), &part.features);
    part.features.push(Feature {
        kind: FeatureKind::GraspPin,
        local_center: center,
        radius: GRASP_PIN_RADIUS_MM,
        mate: None,
    });
}

fn reapply_holes(shape: Sdf2, features: &[Feature]) -> Sdf2 {
    features
        .iter()
        .filter(|f| f.kind == FeatureKind::Hole)
        .fold(shape, |s, f| {
            Sdf2::difference(
                s,
                Sdf2::circle(f.radius)
                    .expect("positive radius")
                    .translated(f.local_center.x, f.local_center.y),
            )
        })
}

fn clearance(part: &CompiledPart, p: Vec2) -> f64 {
    let mut c = -part.shape.eval(p);
    for f in part.pins() {
        c = c.min(p.distance(f.local_center) - f.radius);
    }
    c
}

fn grasp_location(part: &CompiledPart) -> Vec2 {
    let b = part.local_bbox();
    let step = Vec2::new(
        b.width() / GRASP_GRID as f64,
        b.height() / GRASP_GRID as f64,
    );
    let mut sum = Vec2::ZERO;
    let mut count = 0usize;
    let mut best = (f64::NEG_INFINITY, b.center());
    for j in 0..GRASP_GRID {
        for i in 0..GRASP_GRID {
            let p = Vec2::new(
                b.min.x + (i as f64 + 0.5) * step.x,
                b.min.y + (j as f64 + 0.5) * step.y,
            );
            if part.shape.eval(p) < 0.0 {
                sum = sum + p;
                count += 1;
                let c = clearance(part, p);
                if c > best.0 {
                    best = (c, p);
                }
            }
        }
    }
    if count > 0 {
        let centroid = sum * (1.0 / count as f64);
        if clearance(part, centroid) >= GRASP_PIN_RADIUS_MM {
            return centroid;
        }
    }
    best.1
}
