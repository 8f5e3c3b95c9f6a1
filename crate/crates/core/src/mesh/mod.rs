//! SDF to watertight triangle mesh: marching-squares contours, ear-clipped
//! caps and quad side walls.
//!
//! Parts are planar, so every mesh is a prism over the contoured cross
//! section. The base plate additionally carries its pins: each pin is a
//! 64-gon cut into the plate's top cap and extruded from there, sharing the
//! ring of vertices with the cap so the union stays watertight without any
//! 3D boolean.

mod contour;
mod triangulate;
mod trimesh;

pub use contour::{
    clean_loop, extract_contours, point_in_polygon, signed_area, PolygonSet, Region, MIN_RESOLUTION,
};
pub use triangulate::triangulate;
pub use trimesh::TriMesh;

use crate::compiler::CompiledPart;
use crate::sdf::{RigidTransform2, Vec2};
use std::f64::consts::TAU;
use thiserror::Error;

/// Grid cells across the larger bounding-box side.
pub const DEFAULT_RESOLUTION: usize = 256;
/// Segments of the polygon that approximates a raised pin.
pub const PIN_SEGMENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape has no interior inside its bounding box")]
    EmptyShape,
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("triangulation failed: {0}")]
    TriangulationFailure(String),
    #[error("mesh is not watertight ({boundary_edges} boundary edges)")]
    NotWatertight { boundary_edges: usize },
}

/// Which pose a component mesh is placed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Local frame, bottom at z = 0.
    Local,
    /// Print bed: `initial_pose`, bottom at z = 0.
    Print,
    /// Assembled: `final_pose`; moving parts rest on the base top.
    Assembled,
}

/// Prism over `polys` from `z0` to `z0 + thickness`.
pub fn extrude(polys: &PolygonSet, thickness: f64, z0: f64) -> Result<TriMesh, MeshError> {
    extrude_raised(polys, thickness, z0, &[], 0.0)
}

/// Like [`extrude`], with extra CCW loops raised `raise` above the top cap.
/// Each raised loop must lie inside one region's top face, clear of its holes.
fn extrude_raised(
    polys: &PolygonSet,
    thickness: f64,
    z0: f64,
    raised: &[Vec<Vec2>],
    raise: f64,
) -> Result<TriMesh, MeshError> {
    if !(thickness.is_finite() && thickness > 0.0) {
        return Err(MeshError::InvalidInput(format!(
            "thickness must be > 0, got {thickness}"
        )));
    }
    if !z0.is_finite() {
        return Err(MeshError::InvalidInput("z0 must be finite".into()));
    }
    if polys.is_empty() {
        return Err(MeshError::EmptyShape);
    }
    let z1 = z0 + thickness;
    let mut owner = vec![None; raised.len()];
    for (k, ring) in raised.iter().enumerate() {
        let c = ring[0];
        owner[k] = polys.regions.iter().position(|r| {
            point_in_polygon(&r.outer, c) && !r.holes.iter().any(|h| point_in_polygon(h, c))
        });
        if owner[k].is_none() {
            return Err(MeshError::InvalidInput(format!(
                "raised loop at ({:.3}, {:.3}) is outside the top face",
                c.x, c.y
            )));
        }
    }

    let mut mesh = TriMesh::default();
    for (ri, region) in polys.regions.iter().enumerate() {
        let mine: Vec<&Vec<Vec2>> = raised
            .iter()
            .zip(&owner)
            .filter(|(_, o)| **o == Some(ri))
            .map(|(r, _)| r)
            .collect();
        extrude_region(&mut mesh, region, z0, z1, &mine, z1 + raise)?;
    }
    Ok(mesh)
}

fn extrude_region(
    mesh: &mut TriMesh,
    region: &Region,
    z0: f64,
    z1: f64,
    raised: &[&Vec<Vec2>],
    z_raise: f64,
) -> Result<(), MeshError> {
    // Flat vertex list: outer, holes, then raised loops.
    let mut flat: Vec<Vec2> = Vec::new();
    let mut loops: Vec<Vec<usize>> = Vec::new();
    for l in region.loops() {
        if l.len() < 3 {
            return Err(MeshError::TriangulationFailure(format!(
                "loop with {} vertices",
                l.len()
            )));
        }
        loops.push((flat.len()..flat.len() + l.len()).collect());
        flat.extend_from_slice(l);
    }
    let plain = loops.len();
    for l in raised {
        loops.push((flat.len()..flat.len() + l.len()).collect());
        flat.extend_from_slice(l);
    }

    let bottom: Vec<u32> = flat
        .iter()
        .map(|p| mesh.push_vertex([p.x, p.y, z0]))
        .collect();
    let top: Vec<u32> = flat
        .iter()
        .map(|p| mesh.push_vertex([p.x, p.y, z1]))
        .collect();

    let bottom_tris = triangulate(&flat, &loops[0], &loops[1..plain])?;
    for t in bottom_tris {
        mesh.push_triangle([bottom[t[0]], bottom[t[2]], bottom[t[1]]], [0.0, 0.0, -1.0]);
    }
    // The top face has the raised rings cut out as holes.
    let top_holes: Vec<Vec<usize>> = loops[1..plain]
        .iter()
        .cloned()
        .chain(
            loops[plain..]
                .iter()
                .map(|l| l.iter().rev().copied().collect()),
        )
        .collect();
    for t in triangulate(&flat, &loops[0], &top_holes)? {
        mesh.push_triangle([top[t[0]], top[t[1]], top[t[2]]], [0.0, 0.0, 1.0]);
    }
    for l in &loops[..plain] {
        walls(mesh, &flat, l, &bottom, &top);
    }

    for l in &loops[plain..] {
        let cap: Vec<u32> = l
            .iter()
            .map(|&i| mesh.push_vertex([flat[i].x, flat[i].y, z_raise]))
            .collect();
        let mut cap_ids = vec![0u32; flat.len()];
        for (&i, &id) in l.iter().zip(&cap) {
            cap_ids[i] = id;
        }
        walls(mesh, &flat, l, &top, &cap_ids);
        for t in triangulate(&flat, l, &[])? {
            mesh.push_triangle(
                [cap_ids[t[0]], cap_ids[t[1]], cap_ids[t[2]]],
                [0.0, 0.0, 1.0],
            );
        }
    }
    Ok(())
}

/// Side quads along a loop with material on its left.
fn walls(mesh: &mut TriMesh, flat: &[Vec2], l: &[usize], lo: &[u32], hi: &[u32]) {
    for k in 0..l.len() {
        let (i, j) = (l[k], l[(k + 1) % l.len()]);
        let d = flat[j] - flat[i];
        let len = d.length().max(f64::MIN_POSITIVE);
        let n = [d.y / len, -d.x / len, 0.0];
        mesh.push_triangle([lo[i], lo[j], hi[j]], n);
        mesh.push_triangle([lo[i], hi[j], hi[i]], n);
    }
}

/// Cross-section contours of a compiled component in its local frame.
pub fn component_contours(part: &CompiledPart, resolution: usize) -> Result<PolygonSet, MeshError> {
    extract_contours(&part.shape, part.shape.bounding_box(), resolution)
}

/// CCW `PIN_SEGMENTS`-gon inscribed in a circle.
pub fn circle_loop(center: Vec2, radius: f64) -> Vec<Vec2> {
    (0..PIN_SEGMENTS)
        .map(|k| {
            let a = TAU * k as f64 / PIN_SEGMENTS as f64;
            center + Vec2::new(a.cos(), a.sin()) * radius
        })
        .collect()
}

/// Meshes one component. The base's pins stand `pin_height` above its top.
pub fn mesh_component(
    part: &CompiledPart,
    resolution: usize,
    placement: Placement,
) -> Result<TriMesh, MeshError> {
    let polys = component_contours(part, resolution)?;
    let pins: Vec<Vec<Vec2>> = if part.is_base() {
        part.pins()
            .map(|f| circle_loop(f.local_center, f.radius))
            .collect()
    } else {
        Vec::new()
    };
    let mesh = extrude_raised(&polys, part.thickness, 0.0, &pins, part.pin_height())?;
    let (pose, dz) = match placement {
        Placement::Local => (RigidTransform2::IDENTITY, 0.0),
        Placement::Print => (part.initial_pose, 0.0),
        Placement::Assembled => (
            part.final_pose,
            if part.is_base() { 0.0 } else { part.thickness },
        ),
    };
    Ok(place(mesh, &pose, dz))
}

/// Applies a planar pose and a z shift to every vertex and normal.
pub fn place(mut mesh: TriMesh, pose: &RigidTransform2, dz: f64) -> TriMesh {
    if *pose == RigidTransform2::IDENTITY && dz == 0.0 {
        return mesh;
    }
    for v in &mut mesh.vertices {
        let p = pose.apply(Vec2::new(v[0], v[1]));
        *v = [p.x, p.y, v[2] + dz];
    }
    for n in &mut mesh.normals {
        let r = pose.apply_vector(Vec2::new(n[0], n[1]));
        *n = [r.x, r.y, n[2]];
    }
    mesh
}
