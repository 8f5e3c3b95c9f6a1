//! Ear-clipping triangulation of a polygon with holes.
//!
//! Holes are first spliced into the outer loop with bridge edges (rightmost
//! hole first, bridging to the nearest visible vertex along +x), turning the
//! region into one weakly simple CCW loop that is then ear-clipped.

use super::MeshError;
use crate::sdf::Vec2;

/// Triangulates `outer` (CCW) with `holes` (CW). Loops are index lists into
/// `verts`; output triangles are CCW index triples into `verts`.
pub fn triangulate(
    verts: &[Vec2],
    outer: &[usize],
    holes: &[Vec<usize>],
) -> Result<Vec<[usize; 3]>, MeshError> {
    if outer.len() < 3 {
        return Err(MeshError::TriangulationFailure(format!(
            "outer loop has {} vertices",
            outer.len()
        )));
    }
    let mut poly = outer.to_vec();
    let mut order: Vec<&Vec<usize>> = holes.iter().filter(|h| h.len() >= 3).collect();
    // Rightmost hole first so later bridges can cross into spliced holes.
    let max_x = |h: &[usize]| {
        h.iter()
            .map(|&i| verts[i].x)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    order.sort_by(|a, b| max_x(b).total_cmp(&max_x(a)));
    for hole in order {
        poly = bridge_hole(verts, &poly, hole)?;
    }
    ear_clip(verts, &poly)
}

fn bridge_hole(verts: &[Vec2], poly: &[usize], hole: &[usize]) -> Result<Vec<usize>, MeshError> {
    // Rightmost hole vertex; ties by larger y.
    let (hm, &m_idx) = hole
        .iter()
        .enumerate()
        .max_by(|(_, &a), (_, &b)| {
            verts[a]
                .x
                .total_cmp(&verts[b].x)
                .then(verts[a].y.total_cmp(&verts[b].y))
        })
        .expect("non-empty hole");
    let m = verts[m_idx];

    // Closest crossing of the ray m + t·(1,0), t >= 0, with a polygon edge.
    let n = poly.len();
    let mut best: Option<(f64, usize)> = None;
    for k in 0..n {
        let (a, b) = (verts[poly[k]], verts[poly[(k + 1) % n]]);
        if (a.y > m.y) == (b.y > m.y) && !(a.y == m.y || b.y == m.y) {
            continue;
        }
        if a.y == b.y {
            // Horizontal edge on the ray: take the nearer endpoint.
            if a.y == m.y {
                for (pos, p) in [(k, a), ((k + 1) % n, b)] {
                    if p.x >= m.x && best.is_none_or(|(bx, _)| p.x - m.x < bx) {
                        best = Some((p.x - m.x, pos));
                    }
                }
            }
            continue;
        }
        let t = (m.y - a.y) / (b.y - a.y);
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let x = a.x + t * (b.x - a.x);
        if x < m.x {
            continue;
        }
        let d = x - m.x;
        if best.is_none_or(|(bx, _)| d < bx) {
            // Candidate: the edge endpoint with larger x.
            let pos = if a.x >= b.x { k } else { (k + 1) % n };
            best = Some((d, pos));
        }
    }
    let (d, mut p_pos) = best.ok_or_else(|| {
        MeshError::TriangulationFailure(format!(
            "no bridge from hole vertex ({:.4}, {:.4})",
            m.x, m.y
        ))
    })?;
    let i = Vec2::new(m.x + d, m.y);
    let p = verts[poly[p_pos]];

    // Reflex vertices inside triangle (m, i, p) block the bridge; pick the one
    // with the smallest angle to the ray instead.
    if p != i {
        let mut best_r: Option<(f64, f64, usize)> = None;
        for k in 0..n {
            if k == p_pos {
                continue;
            }
            let v = verts[poly[k]];
            if v.x < m.x {
                continue;
            }
            let prev = verts[poly[(k + n - 1) % n]];
            let next = verts[poly[(k + 1) % n]];
            if (v - prev).cross(next - v) > 0.0 {
                continue;
            }
            if !point_in_triangle_closed(v, m, i, p) {
                continue;
            }
            let dv = v - m;
            let len = dv.length();
            if len == 0.0 {
                continue;
            }
            let angle = (dv.y.abs() / len).asin();
            let better = match best_r {
                None => true,
                Some((ba, bl, _)) => angle < ba || (angle == ba && len < bl),
            };
            if better {
                best_r = Some((angle, len, k));
            }
        }
        if let Some((_, _, k)) = best_r {
            p_pos = k;
        }
    }

    let mut out = Vec::with_capacity(poly.len() + hole.len() + 2);
    out.extend_from_slice(&poly[..=p_pos]);
    for k in 0..=hole.len() {
        out.push(hole[(hm + k) % hole.len()]);
    }
    out.push(poly[p_pos]);
    out.extend_from_slice(&poly[p_pos + 1..]);
    Ok(out)
}

fn point_in_triangle_closed(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

fn ear_clip(verts: &[Vec2], poly: &[usize]) -> Result<Vec<[usize; 3]>, MeshError> {
    let n = poly.len();
    let mut prev: Vec<usize> = (0..n).map(|k| (k + n - 1) % n).collect();
    let mut next: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
    let mut alive = vec![true; n];
    let pt = |k: usize| verts[poly[k]];
    let turn = |prev: &[usize], next: &[usize], k: usize| {
        let (a, b, c) = (pt(prev[k]), pt(k), pt(next[k]));
        (b - a).cross(c - b)
    };

    let mut tris = Vec::with_capacity(n.saturating_sub(2));
    let mut remaining = n;
    let mut cur = 0;
    let mut since_clip = 0;
    // Relaxation levels: 0 = proper ears, 1 = ears ignoring collinear
    // blockers, 2 = any non-reflex vertex.
    let mut level = 0;
    while remaining > 3 {
        let is_ear = |k: usize, level: u8| -> bool {
            let t = turn(&prev, &next, k);
            if t < 0.0 || (t == 0.0 && level < 2) {
                return false;
            }
            if level >= 2 {
                return true;
            }
            let (ia, ib, ic) = (prev[k], k, next[k]);
            let (a, b, c) = (pt(ia), pt(ib), pt(ic));
            let mut j = next[ic];
            while j != ia {
                let v = pt(j);
                let same = poly[j] == poly[ia]
                    || poly[j] == poly[ib]
                    || poly[j] == poly[ic]
                    || v == a
                    || v == b
                    || v == c;
                if !same && turn(&prev, &next, j) <= 0.0 {
                    let inside = if level == 0 {
                        point_in_triangle_closed(v, a, b, c)
                    } else {
                        point_in_triangle_open(v, a, b, c)
                    };
                    if inside {
                        return false;
                    }
                }
                j = next[j];
            }
            true
        };
        if is_ear(cur, level) {
            let (a, b) = (prev[cur], next[cur]);
            tris.push([poly[a], poly[cur], poly[b]]);
            next[a] = b;
            prev[b] = a;
            alive[cur] = false;
            remaining -= 1;
            since_clip = 0;
            level = 0;
            cur = b;
            continue;
        }
        cur = next[cur];
        since_clip += 1;
        if since_clip > remaining {
            if level == 2 {
                return Err(MeshError::TriangulationFailure(format!(
                    "no ear among {remaining} remaining vertices"
                )));
            }
            level += 1;
            since_clip = 0;
        }
    }
    let k = (0..n).find(|&k| alive[k]).expect("three vertices remain");
    tris.push([poly[prev[k]], poly[k], poly[next[k]]]);
    Ok(tris)
}

fn point_in_triangle_open(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 > 0.0 && d2 > 0.0 && d3 > 0.0
}
