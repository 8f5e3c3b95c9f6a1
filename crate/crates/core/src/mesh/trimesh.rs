use std::collections::HashMap;

/// Indexed triangle mesh in millimeters. Triangles are CCW seen from outside.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// Unit outward normal per triangle.
    pub normals: Vec<[f64; 3]>,
}

impl TriMesh {
    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub(crate) fn push_vertex(&mut self, v: [f64; 3]) -> u32 {
        self.vertices.push(v);
        (self.vertices.len() - 1) as u32
    }

    /// Adds a triangle; `fallback` is used when the triangle is degenerate.
    pub(crate) fn push_triangle(&mut self, t: [u32; 3], fallback: [f64; 3]) {
        let n = face_normal(&self.vertices, t).unwrap_or(fallback);
        self.triangles.push(t);
        self.normals.push(n);
    }

    /// Concatenates `other`, offsetting its indices.
    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + base, t[1] + base, t[2] + base]),
        );
        self.normals.extend_from_slice(&other.normals);
    }

    /// Signed volume by the divergence theorem; positive for outward winding.
    pub fn volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    /// Undirected edges not shared by exactly two triangles, plus directed
    /// edges used twice (inconsistent winding).
    pub fn boundary_edge_count(&self) -> usize {
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut bad = 0;
        for (&(a, b), &n) in &directed {
            let back = directed.get(&(b, a)).copied().unwrap_or(0);
            if n != 1 || back != 1 {
                bad += 1;
            }
        }
        bad
    }

    pub fn is_watertight(&self) -> bool {
        !self.triangles.is_empty() && self.boundary_edge_count() == 0
    }

    /// V − E + F over the referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        let mut used = std::collections::HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
                used.insert(a);
            }
        }
        used.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Axis-aligned bounds as (min, max).
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let mut it = self.vertices.iter();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| {
            (
                [lo[0].min(v[0]), lo[1].min(v[1]), lo[2].min(v[2])],
                [hi[0].max(v[0]), hi[1].max(v[1]), hi[2].max(v[2])],
            )
        }))
    }
}

fn face_normal(v: &[[f64; 3]], t: [u32; 3]) -> Option<[f64; 3]> {
    let [a, b, c] = t.map(|i| v[i as usize]);
    let n = cross(sub(b, a), sub(c, a));
    let len = dot(n, n).sqrt();
    (len > 1e-12).then(|| [n[0] / len, n[1] / len, n[2] / len])
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
