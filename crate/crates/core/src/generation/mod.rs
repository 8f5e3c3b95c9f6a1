//! Text-generator front end for blueprint authoring, and the scoring harness
//! for its output.
//!
//! Generation runs in two calls. `analyze` expands a short request into a
//! description of the parts, their primitives and their connections;
//! `generate_spec` turns that description into a mechanism document. The
//! model sits behind [`GenerativeClient`]: [`StubClient`] replays recorded
//! responses offline, [`LiveClient`] talks to a chat-completion endpoint.
//! The default build has no HTTP transport at all; it is compiled in only
//! with the `live` feature.

mod bench;
mod client;
mod score;

pub use bench::{render_table, run_benchmark, BenchmarkRow, BenchmarkTable};
#[cfg(feature = "live")]
pub use client::HttpTransport;
pub use client::{
    ChatRequest, GenerativeClient, LiveClient, StubClient, Transport, ENV_API_KEY, ENV_ENDPOINT,
    ENV_MODEL,
};
pub use score::{analysis_rubric, score_record, GenerationRecord, Scores};

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Analysis,
    Spec,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Analysis => "analysis",
            Stage::Spec => "spec",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("analysis is empty")]
    EmptyAnalysis,
    #[error("model unavailable: {0}")]
    ModelUnavailable(String),
    #[error("offline mode: no recorded {0} response (pass --live to call a model)")]
    NoRecordedResponse(Stage),
    #[error("model output contains no JSON document")]
    NoDocumentFound,
    #[error("missing fixture: {0}")]
    MissingFixture(String),
    #[error("{0}")]
    Io(String),
}

/// One primitive as presented to the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveDoc {
    pub name: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    pub summary: &'static str,
}

pub const PRIMITIVE_CATALOG: &[PrimitiveDoc] = &[
    PrimitiveDoc {
        name: "circle",
        params: &[("radius_mm", "radius, > 0")],
        summary: "disk centered at the origin",
    },
    PrimitiveDoc {
        name: "rect",
        params: &[
            ("width_mm", "extent along x, > 0"),
            ("height_mm", "extent along y, > 0"),
        ],
        summary: "axis-aligned rectangle centered at the origin",
    },
    PrimitiveDoc {
        name: "balk",
        params: &[
            (
                "length_mm",
                "distance between the end-cap centers along x, > 0",
            ),
            ("width_mm", "bar width, > 0"),
        ],
        summary: "bar with rounded ends (a capsule) centered at the origin",
    },
    PrimitiveDoc {
        name: "ring",
        params: &[
            ("outer_radius_mm", "outer radius, > inner radius"),
            ("inner_radius_mm", "inner radius, > 0"),
        ],
        summary: "annulus centered at the origin",
    },
    PrimitiveDoc {
        name: "gear",
        params: &[
            ("pitch_radius_mm", "pitch circle radius, > 0"),
            ("teeth", "integer tooth count, >= 4"),
            ("tooth_depth_mm", "tooth height above the pitch circle, > 0"),
            (
                "tooth_width_ratio",
                "fraction of the pitch taken by a tooth root, in (0, 1)",
            ),
        ],
        summary: "spur gear: pitch disk with trapezoidal teeth",
    },
];

const RULES: &str = "\
Every part is a planar plate of the mechanism's uniform thickness.
Build each part from primitives with union, intersection and difference,
and move primitives with xform {rot_rad, dx_mm, dy_mm}.
Parts never overlap once assembled.
Connections are pin_hole joints: the generated base carries a pin at
anchor_global, and the moving part gets a clearance hole at anchor_local.
Place every hole at least 1 mm plus the pin radius inside its part.
Do not define a part called BASE; the base is generated.
Lengths are millimeters, angles radians.";

const EXAMPLE_PROMPT: &str = "a pendulum: one arm swinging on a pin";
const EXAMPLE_DOCUMENT: &str = r#"{
  "name": "pendulum",
  "thickness_mm": 4,
  "parts": [
    {"id": "arm", "shape": {"op": "union", "args": [
      {"prim": "balk", "length_mm": 60, "width_mm": 10},
      {"xform": {"rot_rad": 0, "dx_mm": 26, "dy_mm": 0}, "arg": {"prim": "circle", "radius_mm": 8}}
    ]}}
  ],
  "connections": [
    {"kind": "pin_hole", "moving_part": "arm", "anchor_local": [-22, 0], "anchor_global": [0, 0],
     "pin_radius_mm": 2, "assembled_rotation_rad": 0}
  ]
}"#;

/// Everything the model is told besides the user's request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationContext {
    pub primitive_catalog: Vec<PrimitiveDoc>,
    pub rules: String,
    /// (description, document) pairs.
    pub examples: Vec<(String, String)>,
}

impl Default for GenerationContext {
    fn default() -> Self {
        GenerationContext {
            primitive_catalog: PRIMITIVE_CATALOG.to_vec(),
            rules: RULES.to_owned(),
            examples: vec![(EXAMPLE_PROMPT.to_owned(), EXAMPLE_DOCUMENT.to_owned())],
        }
    }
}

impl GenerationContext {
    fn catalog_text(&self) -> String {
        let mut s = String::new();
        for p in &self.primitive_catalog {
            let _ = writeln!(s, "- {}: {}", p.name, p.summary);
            for (k, doc) in p.params {
                let _ = writeln!(s, "    {k}: {doc}");
            }
        }
        s
    }

    pub fn system_prompt(&self, stage: Stage) -> String {
        let mut s = String::new();
        match stage {
            Stage::Analysis => s.push_str(
                "You design planar mechanisms for 3D printing. Describe how the requested \
                 mechanism is assembled and how it works. List every part, the primitives each \
                 part is built from, and the pin-and-hole connections between parts.\n\n",
            ),
            Stage::Spec => s.push_str(
                "You write mechanism documents. Answer with exactly one JSON document in a \
                 ```json fenced block.\n\n",
            ),
        }
        let _ = write!(
            s,
            "Primitives:\n{}\nRules:\n{}\n",
            self.catalog_text(),
            self.rules
        );
        if stage == Stage::Spec {
            for (prompt, doc) in &self.examples {
                let _ = write!(s, "\nExample for \"{prompt}\":\n```json\n{doc}\n```\n");
            }
        }
        s
    }
}

/// Expands a request into a mechanism description. Returns the model text
/// verbatim.
pub fn analyze(
    prompt: &str,
    ctx: &GenerationContext,
    model: &dyn GenerativeClient,
) -> Result<String, GenerationError> {
    if prompt.trim().is_empty() {
        return Err(GenerationError::EmptyPrompt);
    }
    model.complete(&ChatRequest {
        stage: Stage::Analysis,
        system: ctx.system_prompt(Stage::Analysis),
        user: prompt.to_owned(),
    })
}

/// Asks for a document and extracts it with [`extract_document`]. The bytes
/// are not validated.
pub fn generate_spec(
    analysis: &str,
    ctx: &GenerationContext,
    model: &dyn GenerativeClient,
) -> Result<Vec<u8>, GenerationError> {
    if analysis.trim().is_empty() {
        return Err(GenerationError::EmptyAnalysis);
    }
    let text = model.complete(&ChatRequest {
        stage: Stage::Spec,
        system: ctx.system_prompt(Stage::Spec),
        user: analysis.to_owned(),
    })?;
    extract_document(&text).ok_or(GenerationError::NoDocumentFound)
}

/// The first fenced block whose body is a JSON object; failing that, the
/// first balanced `{...}` span that is one; failing that, `None`.
pub fn extract_document(text: &str) -> Option<Vec<u8>> {
    fenced_blocks(text)
        .into_iter()
        .find(|b| is_json_object(b))
        .or_else(|| brace_spans(text).into_iter().find(|b| is_json_object(b)))
        .map(|b| b.as_bytes().to_vec())
}

fn is_json_object(s: &str) -> bool {
    matches!(
        serde_json::from_str::<serde_json::Value>(s),
        Ok(serde_json::Value::Object(_))
    )
}

/// Bodies of ``` fenced blocks, in order. An unterminated fence runs to the end.
fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim_start().starts_with("```") {
            match start {
                None => start = Some(offset + line.len()),
                Some(s) => {
                    out.push(&text[s..offset]);
                    start = None;
                }
            }
        }
        offset += line.len();
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

/// Balanced top-level brace spans, skipping braces inside JSON strings.
fn brace_spans(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'{' {
            i += 1;
            continue;
        }
        let (mut depth, mut in_str, mut esc) = (0usize, false, false);
        let mut end = None;
        for (j, &b) in bytes.iter().enumerate().skip(i) {
            if in_str {
                match (esc, b) {
                    (true, _) => esc = false,
                    (false, b'\\') => esc = true,
                    (false, b'"') => in_str = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(j);
                        break;
                    }
                }
                _ => {}
            }
        }
        match end {
            Some(j) => {
                out.push(&text[i..=j]);
                i = j + 1;
            }
            None => break,
        }
    }
    out
}
