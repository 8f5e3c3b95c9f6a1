use super::CompiledAssembly;
use crate::emit::manifest::{
    AssemblyManifest, ManifestComponent, ManifestFeature, Pose2, MANIFEST_SCHEMA_VERSION,
};

/// Manifest with BASE at rank 0 and every moving part at rank 1 (single-layer
/// parts only depend on the base). Component order is base, connected parts in
/// connection order, then free parts.
pub fn build_manifest(assembly: &CompiledAssembly) -> AssemblyManifest {
    let components = assembly
        .components()
        .map(|c| ManifestComponent {
            id: c.id.clone(),
            initial_pose: Pose2::from(c.initial_pose),
            final_pose: Pose2::from(c.final_pose),
            thickness_mm: c.thickness,
            precedence_rank: if c.is_base() { 0 } else { 1 },
            features: c
                .features
                .iter()
                .map(|f| ManifestFeature {
                    kind: f.kind,
                    local_center: [f.local_center.x, f.local_center.y],
                    radius_mm: f.radius,
                    mate: f.mate.clone(),
                })
                .collect(),
        })
        .collect();
    AssemblyManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        components,
    }
}
