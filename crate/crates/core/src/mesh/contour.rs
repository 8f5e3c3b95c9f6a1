//! Marching-squares contouring of a 2D SDF into closed polygon loops.

use super::MeshError;
use crate::sdf::{Aabb2, Sdf2, Vec2};

/// Vertices closer than this are merged.
const DUPLICATE_EPS: f64 = 1e-9;
/// A vertex within this distance of the line through its neighbors is dropped.
const COLLINEAR_EPS: f64 = 1e-6;

pub const MIN_RESOLUTION: usize = 16;

/// An outer loop (CCW) with its holes (CW).
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub outer: Vec<Vec2>,
    pub holes: Vec<Vec<Vec2>>,
}

impl Region {
    pub fn area(&self) -> f64 {
        signed_area(&self.outer) + self.holes.iter().map(|h| signed_area(h)).sum::<f64>()
    }

    pub fn loops(&self) -> impl Iterator<Item = &Vec<Vec2>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }
}

/// Closed loops grouped into regions: the nesting tree is flattened so each
/// hole belongs to exactly one outer loop. Islands inside holes are their own
/// regions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolygonSet {
    pub regions: Vec<Region>,
}

impl PolygonSet {
    /// Groups loops by orientation: CCW loops become outers, CW loops become
    /// holes of the smallest outer that contains them.
    pub fn from_loops(loops: Vec<Vec<Vec2>>) -> Result<PolygonSet, MeshError> {
        let mut outers = Vec::new();
        let mut holes = Vec::new();
        for l in loops {
            if l.len() < 3 {
                continue;
            }
            let a = signed_area(&l);
            if a > 0.0 {
                outers.push((a, l));
            } else if a < 0.0 {
                holes.push(l);
            }
        }
        let mut regions: Vec<Region> = outers
            .iter()
            .map(|(_, l)| Region {
                outer: l.clone(),
                holes: Vec::new(),
            })
            .collect();
        for h in holes {
            let probe = h[0];
            let owner = outers
                .iter()
                .enumerate()
                .filter(|(_, (_, o))| point_in_polygon(o, probe))
                .min_by(|(_, (a, _)), (_, (b, _))| a.total_cmp(b))
                .map(|(i, _)| i)
                .ok_or_else(|| {
                    MeshError::InvalidPolygon(format!(
                        "hole at ({:.3}, {:.3}) is not inside any outer loop",
                        probe.x, probe.y
                    ))
                })?;
            regions[owner].holes.push(h);
        }
        Ok(PolygonSet { regions })
    }

    pub fn single(outer: Vec<Vec2>) -> PolygonSet {
        PolygonSet {
            regions: vec![Region {
                outer,
                holes: Vec::new(),
            }],
        }
    }

    pub fn contour_count(&self) -> usize {
        self.regions.iter().map(|r| 1 + r.holes.len()).sum()
    }

    pub fn loops(&self) -> impl Iterator<Item = &Vec<Vec2>> {
        self.regions.iter().flat_map(|r| r.loops())
    }

    /// Net area: outers minus holes.
    pub fn area(&self) -> f64 {
        self.regions.iter().map(Region::area).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn translated(&self, d: Vec2) -> PolygonSet {
        let m = |l: &Vec<Vec2>| l.iter().map(|&p| p + d).collect::<Vec<_>>();
        PolygonSet {
            regions: self
                .regions
                .iter()
                .map(|r| Region {
                    outer: m(&r.outer),
                    holes: r.holes.iter().map(m).collect(),
                })
                .collect(),
        }
    }

    /// Even-odd containment over all loops.
    pub fn contains(&self, p: Vec2) -> bool {
        self.loops().filter(|l| point_in_polygon(l, p)).count() % 2 == 1
    }
}

/// Shoelace area, positive for CCW.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        a += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * a
}

/// Crossing-number test.
pub fn point_in_polygon(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Contours the zero level set of `sdf`.
///
/// The sampling step is `max(width, height) / resolution` of `bbox`; the box
/// is widened by two steps on every side so that loops close. Nodes with a
/// negative value are inside. Crossings are linearly interpolated along grid
/// edges, saddle cells are split by the sign at the cell center, and the
/// resulting loops have interior on the left (outer loops CCW, holes CW).
pub fn extract_contours(
    sdf: &Sdf2,
    bbox: Aabb2,
    resolution: usize,
) -> Result<PolygonSet, MeshError> {
    if resolution < MIN_RESOLUTION {
        return Err(MeshError::InvalidInput(format!(
            "resolution must be >= {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let span = bbox.width().max(bbox.height());
    if !(span.is_finite() && span > 0.0) {
        return Err(MeshError::EmptyShape);
    }
    let h = span / resolution as f64;
    let grid = bbox.inflate(2.0 * h);
    let nx = (grid.width() / h).ceil() as usize;
    let ny = (grid.height() / h).ceil() as usize;
    let stride = nx + 1;
    let node = |i: usize, j: usize| Vec2::new(grid.min.x + i as f64 * h, grid.min.y + j as f64 * h);

    let mut values = Vec::with_capacity(stride * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            values.push(sdf.eval(node(i, j)));
        }
    }
    if !values.iter().any(|&v| v < 0.0) {
        return Err(MeshError::EmptyShape);
    }
    let inside = |i: usize, j: usize| values[j * stride + i] < 0.0;

    // Edge ids: 2*node for the +x edge from a node, 2*node+1 for the +y edge.
    let hedge = |i: usize, j: usize| 2 * (j * stride + i);
    let vedge = |i: usize, j: usize| 2 * (j * stride + i) + 1;
    let edge_point = |id: usize| -> Vec2 {
        let n = id / 2;
        let (i, j) = (n % stride, n / stride);
        let (i2, j2) = if id.is_multiple_of(2) {
            (i + 1, j)
        } else {
            (i, j + 1)
        };
        let (fa, fb) = (values[j * stride + i], values[j2 * stride + i2]);
        let t = fa / (fa - fb);
        let (pa, pb) = (node(i, j), node(i2, j2));
        pa + (pb - pa) * t
    };

    const NONE: usize = usize::MAX;
    let mut next = vec![NONE; 2 * stride * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            let corners = [
                inside(i, j),
                inside(i + 1, j),
                inside(i + 1, j + 1),
                inside(i, j + 1),
            ];
            if corners.iter().all(|&c| c) || corners.iter().all(|&c| !c) {
                continue;
            }
            // Cell edges in CCW order, each from corner k to corner k+1.
            let edges = [hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)];
            // (edge id, is_exit) for each crossing, CCW.
            let mut crossings = [(0usize, false); 4];
            let mut count = 0;
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                if a != b {
                    crossings[count] = (edges[k], a);
                    count += 1;
                }
            }
            let crossings = &crossings[..count];
            let center_inside = if count == 4 {
                sdf.eval(Vec2::new(
                    grid.min.x + (i as f64 + 0.5) * h,
                    grid.min.y + (j as f64 + 0.5) * h,
                )) < 0.0
            } else {
                false
            };
            for (k, &(from, is_exit)) in crossings.iter().enumerate() {
                if !is_exit {
                    continue;
                }
                // Two crossings: the other one. Saddle: the following entry
                // when the center is inside, the preceding entry otherwise.
                let to = if count == 2 || center_inside {
                    crossings[(k + 1) % count].0
                } else {
                    crossings[(k + count - 1) % count].0
                };
                debug_assert_eq!(next[from], NONE);
                next[from] = to;
            }
        }
    }

    let mut loops = Vec::new();
    for start in 0..next.len() {
        if next[start] == NONE {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        while next[cur] != NONE {
            ring.push(edge_point(cur));
            let nxt = next[cur];
            next[cur] = NONE;
            cur = nxt;
        }
        if cur != start {
            return Err(MeshError::InvalidPolygon("open contour".into()));
        }
        let ring = clean_loop(ring);
        if ring.len() >= 3 {
            loops.push(ring);
        }
    }
    if loops.is_empty() {
        return Err(MeshError::EmptyShape);
    }
    PolygonSet::from_loops(loops)
}

/// Removes duplicate and collinear vertices from a closed loop.
pub fn clean_loop(mut ring: Vec<Vec2>) -> Vec<Vec2> {
    loop {
        let n = ring.len();
        if n < 3 {
            return ring;
        }
        let mut keep = vec![true; n];
        let mut removed = false;
        let mut last_kept = n - 1;
        // Walk once; compare each vertex against its nearest kept neighbors.
        for i in 0..n {
            let prev = ring[last_kept];
            let cur = ring[i];
            let nxt = ring[(i + 1) % n];
            let drop = if cur.distance(prev) <= DUPLICATE_EPS {
                true
            } else {
                let base = nxt - prev;
                let len = base.length();
                len > DUPLICATE_EPS
                    && (cur - prev).cross(base).abs() / len <= COLLINEAR_EPS
                    && (cur - prev).dot(base) > 0.0
                    && (nxt - cur).dot(base) > 0.0
            };
            if drop && i != last_kept {
                keep[i] = false;
                removed = true;
            } else {
                last_kept = i;
            }
        }
        if !removed {
            return ring;
        }
        let mut k = keep.iter();
        ring.retain(|_| *k.next().unwrap());
    }
}
