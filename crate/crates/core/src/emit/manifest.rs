//! Assembly manifest: the JSON record of where every component is printed,
//! where it ends up, and which pins, holes and grasp pins it carries.

use crate::compiler::{FeatureKind, FeatureRef};
use crate::sdf::{RigidTransform2, Vec2};
use crate::spec::BASE_ID;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("manifest schema error at `{path}`: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Planar pose as written in manifests and plans.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose2 {
    pub x_mm: f64,
    pub y_mm: f64,
    pub rot_rad: f64,
}

impl From<RigidTransform2> for Pose2 {
    fn from(t: RigidTransform2) -> Self {
        Pose2 {
            x_mm: t.translation.x,
            y_mm: t.translation.y,
            rot_rad: t.rotation,
        }
    }
}

impl From<Pose2> for RigidTransform2 {
    fn from(p: Pose2) -> Self {
        RigidTransform2::new(p.rot_rad, Vec2::new(p.x_mm, p.y_mm))
    }
}

impl Pose2 {
    pub fn is_finite(&self) -> bool {
        self.x_mm.is_finite() && self.y_mm.is_finite() && self.rot_rad.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFeature {
    pub kind: FeatureKind,
    pub local_center: [f64; 2],
    pub radius_mm: f64,
    pub mate: Option<FeatureRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestComponent {
    pub id: String,
    pub initial_pose: Pose2,
    pub final_pose: Pose2,
    pub thickness_mm: f64,
    pub precedence_rank: u32,
    pub features: Vec<ManifestFeature>,
}

impl ManifestComponent {
    pub fn has_hole(&self) -> bool {
        self.features.iter().any(|f| f.kind == FeatureKind::Hole)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblyManifest {
    pub schema_version: u32,
    pub components: Vec<ManifestComponent>,
}

impl AssemblyManifest {
    pub fn component(&self, id: &str) -> Option<&ManifestComponent> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Checks the invariants `read_manifest` enforces.
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(SchemaError::new(
                "schema_version",
                format!("unsupported schema version {}", self.schema_version),
            ));
        }
        let n = self.components.len();
        let mut ranks = vec![false; n];
        for (i, c) in self.components.iter().enumerate() {
            let path = format!("components[{i}]");
            if self.components[..i].iter().any(|o| o.id == c.id) {
                return Err(SchemaError::new(
                    format!("{path}.id"),
                    format!("duplicate id `{}`", c.id),
                ));
            }
            if !c.initial_pose.is_finite() {
                return Err(SchemaError::new(
                    format!("{path}.initial_pose"),
                    "pose must be finite",
                ));
            }
            if !c.final_pose.is_finite() {
                return Err(SchemaError::new(
                    format!("{path}.final_pose"),
                    "pose must be finite",
                ));
            }
            if !(c.thickness_mm.is_finite() && c.thickness_mm > 0.0) {
                return Err(SchemaError::new(
                    format!("{path}.thickness_mm"),
                    "thickness must be > 0",
                ));
            }
            let r = c.precedence_rank as usize;
            if r >= n {
                return Err(SchemaError::new(
                    format!("{path}.precedence_rank"),
                    format!("rank {r} outside 0..{n}"),
                ));
            }
            if (c.id == BASE_ID) != (r == 0) {
                return Err(SchemaError::new(
                    format!("{path}.precedence_rank"),
                    "rank 0 is reserved for BASE, and BASE must have rank 0",
                ));
            }
            ranks[r] = true;
            for (j, f) in c.features.iter().enumerate() {
                let fpath = format!("{path}.features[{j}]");
                if !(f.radius_mm.is_finite() && f.radius_mm > 0.0) {
                    return Err(SchemaError::new(
                        format!("{fpath}.radius_mm"),
                        "radius must be > 0",
                    ));
                }
                if !(f.local_center[0].is_finite() && f.local_center[1].is_finite()) {
                    return Err(SchemaError::new(
                        format!("{fpath}.local_center"),
                        "center must be finite",
                    ));
                }
                if let Some(m) = &f.mate {
                    let back = self
                        .component(&m.component)
                        .and_then(|o| o.features.get(m.feature))
                        .and_then(|o| o.mate.as_ref());
                    if back
                        != Some(&FeatureRef {
                            component: c.id.clone(),
                            feature: j,
                        })
                    {
                        return Err(SchemaError::new(
                            format!("{fpath}.mate"),
                            "mate is not mutual",
                        ));
                    }
                }
            }
        }
        if n > 0 && self.component(BASE_ID).is_none() {
            return Err(SchemaError::new("components", "no BASE component"));
        }
        // Ranks used must be contiguous from 0.
        if let Some(last) = ranks.iter().rposition(|&u| u) {
            if let Some(gap) = ranks[..last].iter().position(|&u| !u) {
                return Err(SchemaError::new(
                    "components",
                    format!("precedence rank {gap} is unused"),
                ));
            }
        }
        Ok(())
    }
}

/// Canonical bytes: sorted keys, LF, shortest round-trip floats.
pub fn write_manifest(manifest: &AssemblyManifest) -> Vec<u8> {
    let value = serde_json::to_value(manifest).expect("manifest serializes");
    crate::canonical_json(&value)
}

pub fn read_manifest(bytes: &[u8]) -> Result<AssemblyManifest, SchemaError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let manifest: AssemblyManifest = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SchemaError::new(path, e.into_inner().to_string())
    })?;
    manifest.validate()?;
    Ok(manifest)
}
