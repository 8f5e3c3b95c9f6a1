//! Support-free G-code for prismatic bodies.
//!
//! Every layer prints, per body, `perimeters` inset loops followed by
//! rectilinear infill. There is no skirt, brim, raft or support. Coordinates
//! are written with 3 decimals and extrusion is computed from the written
//! coordinates, so a re-parser recovers the exact path the E values pay for.

use crate::compiler::CompiledAssembly;
use crate::mesh::{extract_contours, MeshError, PolygonSet};
use crate::sdf::{Aabb2, Sdf2, Vec2};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

/// Contouring resolution for perimeter and infill outlines.
pub const SLICE_RESOLUTION: usize = 256;
pub const NOZZLE_TEMP_C: u32 = 210;
pub const BED_TEMP_C: u32 = 60;
/// Z lift before the final home move.
const FINAL_LIFT_MM: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintParams {
    pub layer_height: f64,
    pub nozzle: f64,
    pub filament_diameter: f64,
    pub perimeters: u32,
    /// Fraction of the interior covered by infill, in `[0, 1]`.
    pub infill_density: f64,
    /// mm/min
    pub print_feed: f64,
    /// mm/min
    pub travel_feed: f64,
    pub extrusion_width: f64,
    pub bed_width: f64,
    pub bed_depth: f64,
}

impl Default for PrintParams {
    fn default() -> Self {
        PrintParams {
            layer_height: 0.2,
            nozzle: 0.4,
            filament_diameter: 2.85,
            perimeters: 2,
            infill_density: 0.2,
            print_feed: 3000.0,
            travel_feed: 7200.0,
            extrusion_width: 0.45,
            bed_width: 215.0,
            bed_depth: 215.0,
        }
    }
}

impl PrintParams {
    pub fn validate(&self) -> Result<(), SliceError> {
        let positive = [
            ("layer_height", self.layer_height),
            ("nozzle", self.nozzle),
            ("filament_diameter", self.filament_diameter),
            ("print_feed", self.print_feed),
            ("travel_feed", self.travel_feed),
            ("extrusion_width", self.extrusion_width),
            ("bed_width", self.bed_width),
            ("bed_depth", self.bed_depth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SliceError::InvalidParams(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if self.perimeters == 0 {
            return Err(SliceError::InvalidParams("perimeters must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.infill_density) {
            return Err(SliceError::InvalidParams(format!(
                "infill_density must be in [0, 1], got {}",
                self.infill_density
            )));
        }
        if self.layer_height >= self.nozzle {
            return Err(SliceError::InvalidParams(format!(
                "layer_height {} must be below the nozzle diameter {}",
                self.layer_height, self.nozzle
            )));
        }
        Ok(())
    }

    pub fn filament_area(&self) -> f64 {
        PI * (self.filament_diameter / 2.0).powi(2)
    }

    /// Filament length per mm of extruded path.
    pub fn e_per_mm(&self) -> f64 {
        self.layer_height * self.extrusion_width / self.filament_area()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SliceError {
    #[error("invalid print parameters: {0}")]
    InvalidParams(String),
    #[error("body `{body}` extends outside the {width}×{depth} mm bed")]
    OutOfBed {
        body: String,
        width: f64,
        depth: f64,
    },
    #[error("body `{body}`: {source}")]
    Contour { body: String, source: MeshError },
}

/// Non-fatal slicing events.
#[derive(Debug, Clone, PartialEq)]
pub enum SliceWarning {
    /// The inset for this perimeter is empty; it and all deeper ones are skipped.
    InsetCollapsed { body: String, perimeter: u32 },
}

impl std::fmt::Display for SliceWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SliceWarning::InsetCollapsed { body, perimeter } => {
                write!(
                    f,
                    "body `{body}`: inset for perimeter {perimeter} collapsed, skipped"
                )
            }
        }
    }
}

/// A prism to print: cross section in bed coordinates between two heights.
#[derive(Debug, Clone)]
pub struct SliceBody {
    pub id: String,
    pub shape: Sdf2,
    pub z_bottom: f64,
    pub z_top: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sliced {
    pub gcode: String,
    pub layer_count: usize,
    pub warnings: Vec<SliceWarning>,
}

/// Bodies for a laid-out assembly, in layout order. The base contributes its
/// plate and, above it, its pins.
pub fn assembly_bodies(assembly: &CompiledAssembly) -> Vec<SliceBody> {
    let mut out = Vec::new();
    for c in assembly.components() {
        out.push(SliceBody {
            id: c.id.clone(),
            shape: c.shape.transformed(c.initial_pose),
            z_bottom: 0.0,
            z_top: c.thickness,
        });
        let pins: Vec<Sdf2> = c
            .pins()
            .map(|f| {
                let p = c.initial_pose.apply(f.local_center);
                Sdf2::circle(f.radius)
                    .expect("positive pin radius")
                    .translated(p.x, p.y)
            })
            .collect();
        if !pins.is_empty() {
            out.push(SliceBody {
                id: format!("{}.pins", c.id),
                shape: Sdf2::boolean(crate::sdf::BooleanOp::Union, pins),
                z_bottom: c.thickness,
                z_top: c.thickness + c.pin_height(),
            });
        }
    }
    out
}

/// Per-body toolpaths, computed once and repeated on every layer.
struct BodyPaths {
    index: usize,
    perimeters: Vec<Vec<Vec2>>,
    infill: Option<PolygonSet>,
    bbox: Aabb2,
}

/// Number of layers needed to reach `height`.
pub fn layer_count(height: f64, layer_height: f64) -> usize {
    if height <= 0.0 {
        0
    } else {
        (height / layer_height - 1e-9).ceil() as usize
    }
}

/// Slices `bodies` into one G-code program.
///
/// Layer `k` is printed at `z = (k + 1) · layer_height`; a body contributes
/// to every layer whose slab midpoint lies inside its height range.
pub fn slice_gcode(bodies: &[SliceBody], params: &PrintParams) -> Result<Sliced, SliceError> {
    params.validate()?;
    let bed = Aabb2::new(Vec2::ZERO, Vec2::new(params.bed_width, params.bed_depth));
    let w = params.extrusion_width;
    let mut warnings = Vec::new();
    let mut paths = Vec::with_capacity(bodies.len());
    for (index, b) in bodies.iter().enumerate() {
        if !(b.z_bottom.is_finite()
            && b.z_top.is_finite()
            && b.z_top > b.z_bottom
            && b.z_bottom >= 0.0)
        {
            return Err(SliceError::InvalidParams(format!(
                "body `{}` has height range [{}, {}]",
                b.id, b.z_bottom, b.z_top
            )));
        }
        let bbox = b.shape.bounding_box();
        if !(bed.contains(bbox.min) && bed.contains(bbox.max)) {
            return Err(SliceError::OutOfBed {
                body: b.id.clone(),
                width: params.bed_width,
                depth: params.bed_depth,
            });
        }
        let contour = |d: f64| -> Result<Option<PolygonSet>, SliceError> {
            let s = Sdf2::offset(-d, b.shape.clone());
            match extract_contours(&s, bbox, SLICE_RESOLUTION) {
                Ok(p) => Ok(Some(p)),
                Err(MeshError::EmptyShape) => Ok(None),
                Err(source) => Err(SliceError::Contour {
                    body: b.id.clone(),
                    source,
                }),
            }
        };
        let mut perimeters = Vec::new();
        for i in 0..params.perimeters {
            match contour((i as f64 + 0.5) * w)? {
                Some(p) => perimeters.extend(p.loops().cloned()),
                None => {
                    for k in i..params.perimeters {
                        warnings.push(SliceWarning::InsetCollapsed {
                            body: b.id.clone(),
                            perimeter: k,
                        });
                    }
                    break;
                }
            }
        }
        let infill = if params.infill_density > 0.0 {
            contour(params.perimeters as f64 * w)?
        } else {
            None
        };
        paths.push(BodyPaths {
            index,
            perimeters,
            infill,
            bbox,
        });
    }

    let top = bodies.iter().map(|b| b.z_top).fold(0.0, f64::max);
    let layers = layer_count(top, params.layer_height);
    let mut g = Emitter::new(params);
    g.header(layers);
    for k in 0..layers {
        let z = (k + 1) as f64 * params.layer_height;
        let mid = z - params.layer_height / 2.0;
        let _ = writeln!(g.out, ";LAYER:{k}");
        g.travel_z(z);
        for p in &paths {
            let b = &bodies[p.index];
            if !(mid > b.z_bottom && mid < b.z_top) {
                continue;
            }
            for l in &p.perimeters {
                g.closed_loop(l);
            }
            if let Some(region) = &p.infill {
                let spacing = w / params.infill_density;
                for (a, e) in infill_segments(region, &p.bbox, spacing, k % 2 == 1) {
                    g.travel(a);
                    g.extrude(e);
                }
            }
        }
    }
    g.footer(layers, top);
    Ok(Sliced {
        gcode: g.out,
        layer_count: layers,
        warnings,
    })
}

/// Rounds to the 3-decimal grid used in the output.
fn q(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

struct Emitter<'a> {
    params: &'a PrintParams,
    out: String,
    pos: Vec2,
    e: f64,
}

impl<'a> Emitter<'a> {
    fn new(params: &'a PrintParams) -> Self {
        Emitter {
            params,
            out: String::new(),
            pos: Vec2::ZERO,
            e: 0.0,
        }
    }

    fn header(&mut self, layers: usize) {
        let p = self.params;
        let _ = write!(
            self.out,
            ";FLAVOR:Marlin\n\
             ;GENERATOR:mechforge\n\
             ;LAYER_HEIGHT:{}\n\
             ;LAYER_COUNT:{layers}\n\
             M140 S{BED_TEMP_C}\n\
             M104 S{NOZZLE_TEMP_C}\n\
             M109 S{NOZZLE_TEMP_C}\n\
             G28\n\
             G90\n\
             M82\n\
             G92 E0\n",
            p.layer_height
        );
        self.pos = Vec2::ZERO;
    }

    fn footer(&mut self, layers: usize, top: f64) {
        if layers > 0 {
            let _ = writeln!(
                self.out,
                "G0 Z{:.3} F{}",
                q(top + FINAL_LIFT_MM),
                self.params.travel_feed
            );
        }
        let _ = write!(self.out, "G28 X0 Y0\nM104 S0\nM140 S0\n");
    }

    fn travel_z(&mut self, z: f64) {
        let _ = writeln!(self.out, "G0 Z{:.3} F{}", q(z), self.params.travel_feed);
    }

    fn travel(&mut self, p: Vec2) {
        let p = Vec2::new(q(p.x), q(p.y));
        if p == self.pos {
            return;
        }
        let _ = writeln!(
            self.out,
            "G0 X{:.3} Y{:.3} F{}",
            p.x, p.y, self.params.travel_feed
        );
        self.pos = p;
    }

    fn extrude(&mut self, p: Vec2) {
        let p = Vec2::new(q(p.x), q(p.y));
        let len = p.distance(self.pos);
        if len == 0.0 {
            return;
        }
        self.e += len * self.params.e_per_mm();
        let _ = writeln!(
            self.out,
            "G1 X{:.3} Y{:.3} E{:.5} F{}",
            p.x, p.y, self.e, self.params.print_feed
        );
        self.pos = p;
    }

    fn closed_loop(&mut self, l: &[Vec2]) {
        self.travel(l[0]);
        for &p in &l[1..] {
            self.extrude(p);
        }
        self.extrude(l[0]);
    }
}

/// Scanline segments inside `region` (even-odd over all loops). Lines sit on a
/// lattice anchored at the bed origin; `vertical` switches from y = const to
/// x = const. Consecutive lines run in opposite directions.
fn infill_segments(
    region: &PolygonSet,
    bbox: &Aabb2,
    spacing: f64,
    vertical: bool,
) -> Vec<(Vec2, Vec2)> {
    let swap = |p: Vec2| if vertical { Vec2::new(p.y, p.x) } else { p };
    let (lo, hi) = if vertical {
        (bbox.min.x, bbox.max.x)
    } else {
        (bbox.min.y, bbox.max.y)
    };
    let mut out = Vec::new();
    let mut line = (lo / spacing).ceil() as i64;
    let mut flip = false;
    loop {
        let c = line as f64 * spacing;
        if c > hi {
            break;
        }
        let mut xs = Vec::new();
        for l in region.loops() {
            let n = l.len();
            for i in 0..n {
                let (a, b) = (swap(l[i]), swap(l[(i + 1) % n]));
                if (a.y > c) != (b.y > c) {
                    xs.push(a.x + (c - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        let mut segs: Vec<(Vec2, Vec2)> = xs
            .chunks_exact(2)
            .map(|s| (swap(Vec2::new(s[0], c)), swap(Vec2::new(s[1], c))))
            .collect();
        if flip {
            segs.reverse();
            for s in &mut segs {
                *s = (s.1, s.0);
            }
        }
        if !segs.is_empty() {
            flip = !flip;
        }
        out.extend(segs);
        line += 1;
    }
    out
}
