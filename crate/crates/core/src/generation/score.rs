use crate::compiler::{compile_assembly, pin_containment_excess, DEFAULT_CLEARANCE_MM};
use crate::emit::write_stl;
use crate::mesh::DEFAULT_RESOLUTION;
use crate::pipeline::mesh_assembly;
use crate::spec::{parse_spec, CellParams, MechanismSpec};
use serde::Serialize;

/// Largest tolerated pin protrusion out of its hole, in mm.
const CONTAINMENT_TOL_MM: f64 = 1e-9;

const PART_WORDS: &[&str] = &["part", "component"];
const PRIMITIVE_WORDS: &[&str] = &["circle", "rectangle", "rect", "balk", "ring", "gear"];
const CONNECTION_WORDS: &[&str] = &["pin", "hole", "joint", "connection", "hinge", "pivot"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Scores {
    pub analysis: u8,
    pub executable: u8,
    pub stl: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRecord {
    pub mechanism: String,
    pub prompt: String,
    pub analysis: String,
    pub document: Vec<u8>,
    pub scores: Scores,
}

/// Whether `text` names a part, a catalog primitive and a connection. Words
/// match case-insensitively on whole words, singular or with a plural `s`.
pub fn analysis_rubric(text: &str) -> bool {
    let words: Vec<String> = text
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_ascii_lowercase())
        .collect();
    let mentions = |set: &[&str]| {
        words.iter().any(|w| {
            set.contains(&w.as_str()) || w.strip_suffix('s').is_some_and(|s| set.contains(&s))
        })
    };
    mentions(PART_WORDS) && mentions(PRIMITIVE_WORDS) && mentions(CONNECTION_WORDS)
}

/// Binary scores: analysis by [`analysis_rubric`]; executable when the
/// document parses and validates; stl when, in addition, the mechanism
/// compiles, every component meshes watertight and serializes, and every
/// assembled pin lies inside its hole.
pub fn score_record(_prompt: &str, analysis: &str, document: &[u8]) -> Scores {
    let analysis = u8::from(analysis_rubric(analysis));
    let Ok(spec) = parse_spec(document) else {
        return Scores {
            analysis,
            executable: 0,
            stl: 0,
        };
    };
    Scores {
        analysis,
        executable: 1,
        stl: u8::from(stl_ok(&spec)),
    }
}

fn stl_ok(spec: &MechanismSpec) -> bool {
    let Ok(assembly) = compile_assembly(spec, &CellParams::default(), DEFAULT_CLEARANCE_MM) else {
        return false;
    };
    if pin_containment_excess(&assembly) > CONTAINMENT_TOL_MM {
        return false;
    }
    let Ok(meshes) = mesh_assembly(&assembly, DEFAULT_RESOLUTION) else {
        return false;
    };
    meshes.iter().all(|m| {
        m.local.is_watertight() && write_stl(&m.local).len() == 84 + 50 * m.local.triangle_count()
    })
}
