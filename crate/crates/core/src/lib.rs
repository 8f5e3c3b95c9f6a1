//! Compile declarative planar mechanism descriptions into manufacturable
//! artifacts.
//!
//! The pipeline reads a mechanism document ([`spec`]), evaluates each part as
//! a 2D signed distance function ([`sdf`]), synthesizes a pinned base and a
//! print-bed layout ([`compiler`]), contours and extrudes every part into a
//! watertight mesh ([`mesh`]), and writes binary STL, a canonical assembly
//! manifest and support-free G-code ([`emit`]). The manifest then drives a
//! two-robot assembly plan ([`plan`]) and a discrete-event model of the
//! print, drone delivery and assembly line ([`sim`]). [`generation`] wraps an
//! external text generator that writes mechanism documents, and scores its
//! output.
//!
//! [`pipeline::compile_artifacts`] runs the whole compile stage in memory.

pub mod compiler;
pub mod emit;
pub mod generation;
pub mod mesh;
pub mod pipeline;
pub mod plan;
pub mod sdf;
pub mod sim;
pub mod spec;

/// Canonical JSON text: keys sorted, two-space indent, LF, trailing newline.
pub(crate) fn canonical_json(value: &serde_json::Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("JSON value serializes");
    out.push(b'\n');
    out
}

// The guide's code listings compile and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/sdf.md")]
    mod sdf {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/compiling.md")]
    mod compiling {}
    #[doc = include_str!("../../../book/src/meshing.md")]
    mod meshing {}
    #[doc = include_str!("../../../book/src/outputs.md")]
    mod outputs {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/generation.md")]
    mod generation {}
}
