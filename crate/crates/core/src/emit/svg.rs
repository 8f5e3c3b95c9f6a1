//! Static SVG preview: the print bed on the left, the assembled mechanism on
//! the right. Contours are drawn in millimeters with y pointing up.

use crate::compiler::CompiledAssembly;
use crate::mesh::PolygonSet;
use crate::sdf::{Aabb2, RigidTransform2, Vec2};
use std::fmt::Write as _;

const GAP_MM: f64 = 20.0;
const MARGIN_MM: f64 = 10.0;
const PALETTE: [&str; 6] = [
    "#8da0cb", "#fc8d62", "#66c2a5", "#e78ac3", "#a6d854", "#ffd92f",
];

/// `contours[i]` is the local cross section of the i-th component of
/// `assembly.components()`.
pub fn render_svg(assembly: &CompiledAssembly, contours: &[PolygonSet]) -> String {
    let (bed_w, bed_d) = assembly.bed;
    let assembled: Aabb2 = assembly
        .components()
        .map(|c| c.local_bbox().transformed(&c.final_pose))
        .reduce(|a, b| a.union(&b))
        .unwrap_or_else(|| Aabb2::centered(1.0, 1.0));
    let right_x = MARGIN_MM + bed_w + GAP_MM;
    let width = right_x + assembled.width() + MARGIN_MM;
    let height = MARGIN_MM * 2.0 + bed_d.max(assembled.height()) + GAP_MM;
    // Panel origins in flipped SVG space.
    let bed_origin = Vec2::new(MARGIN_MM, MARGIN_MM + GAP_MM + bed_d);
    let asm_origin = Vec2::new(
        right_x - assembled.min.x,
        MARGIN_MM + GAP_MM + assembled.max.y,
    );

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}mm" height="{h:.3}mm" viewBox="0 0 {w:.3} {h:.3}">"#,
        w = width,
        h = height
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="6" font-family="sans-serif">print bed</text>"#,
        MARGIN_MM,
        MARGIN_MM + 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="6" font-family="sans-serif">assembly</text>"#,
        right_x,
        MARGIN_MM + 6.0
    );
    let _ = writeln!(
        s,
        r##"<rect x="{:.3}" y="{:.3}" width="{bed_w:.3}" height="{bed_d:.3}" fill="none" stroke="#555" stroke-width="0.5"/>"##,
        MARGIN_MM,
        MARGIN_MM + GAP_MM
    );
    for (i, (c, polys)) in assembly.components().zip(contours).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (origin, pose, group) in [
            (bed_origin, c.initial_pose, "bed"),
            (asm_origin, c.final_pose, "assembly"),
        ] {
            let _ = writeln!(
                s,
                r##"<path id="{group}-{id}" fill="{color}" fill-opacity="0.6" fill-rule="evenodd" stroke="#222" stroke-width="0.3" d="{d}"/>"##,
                id = c.id,
                d = path_data(polys, &pose, origin)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn path_data(polys: &PolygonSet, pose: &RigidTransform2, origin: Vec2) -> String {
    let mut d = String::new();
    for l in polys.loops() {
        for (k, p) in l.iter().enumerate() {
            let g = pose.apply(*p);
            let (x, y) = (origin.x + g.x, origin.y - g.y);
            let _ = write!(d, "{}{x:.3} {y:.3} ", if k == 0 { "M" } else { "L" });
        }
        d.push_str("Z ");
    }
    d.pop();
    d
}
