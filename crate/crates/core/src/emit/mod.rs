//! Output back ends: binary STL, the assembly manifest, G-code and an SVG
//! preview. Every writer is deterministic: equal inputs give equal bytes.

pub mod gcode;
pub mod manifest;
pub mod print_time;
pub mod stl;
pub mod svg;

pub use gcode::{
    assembly_bodies, layer_count, slice_gcode, PrintParams, SliceBody, SliceError, SliceWarning,
    Sliced,
};
pub use manifest::{
    read_manifest, write_manifest, AssemblyManifest, ManifestComponent, ManifestFeature, Pose2,
    SchemaError,
};
pub use print_time::{
    estimate_print_time, estimate_print_time_with, ParseError, DEFAULT_HEATUP_MIN,
};
pub use stl::{read_stl, write_stl, StlError, StlFacet};
pub use svg::render_svg;
