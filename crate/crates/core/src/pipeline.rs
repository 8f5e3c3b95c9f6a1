//! The compile stage end to end, in memory: document bytes in, named output
//! files out. Nothing touches the file system here; callers decide where and
//! how to write.

use crate::compiler::{
    build_manifest, compile_assembly, CompileError, CompiledAssembly, DEFAULT_CLEARANCE_MM,
};
use crate::emit::{
    assembly_bodies, estimate_print_time, render_svg, slice_gcode, write_manifest, write_stl,
    AssemblyManifest, PrintParams, SliceError, SliceWarning,
};
use crate::mesh::{
    component_contours, mesh_component, place, MeshError, Placement, TriMesh, DEFAULT_RESOLUTION,
};
use crate::spec::{parse_spec, CellParams, MechanismSpec, SpecError};
use std::collections::BTreeMap;
use thiserror::Error;

pub const PLATE_STL: &str = "plate.stl";
pub const ASSEMBLY_STL: &str = "assembly.stl";
pub const PLATE_GCODE: &str = "plate.gcode";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const PREVIEW_SVG: &str = "preview.svg";

/// File name of a component's own STL (local frame).
pub fn part_stl_name(id: &str) -> String {
    format!("parts/{id}.stl")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    pub clearance: f64,
    pub resolution: usize,
    pub cell: CellParams,
    pub print: PrintParams,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            clearance: DEFAULT_CLEARANCE_MM,
            resolution: DEFAULT_RESOLUTION,
            cell: CellParams::default(),
            print: PrintParams::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] SpecError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("meshing `{component}`: {source}")]
    Mesh {
        component: String,
        source: MeshError,
    },
    #[error(transparent)]
    Emit(#[from] SliceError),
}

impl PipelineError {
    /// 2 parse, 3 compile, 4 mesh, 5 emit.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(_) => 2,
            PipelineError::Compile(_) => 3,
            PipelineError::Mesh { .. } => 4,
            PipelineError::Emit(_) => 5,
        }
    }
}

/// One mesh per component in its local frame, plus its print and assembled
/// placements.
#[derive(Debug, Clone)]
pub struct ComponentMeshes {
    pub id: String,
    pub local: TriMesh,
    pub print: TriMesh,
    pub assembled: TriMesh,
}

/// Meshes every component and checks watertightness.
pub fn mesh_assembly(
    assembly: &CompiledAssembly,
    resolution: usize,
) -> Result<Vec<ComponentMeshes>, PipelineError> {
    assembly
        .components()
        .map(|c| {
            let err = |source| PipelineError::Mesh {
                component: c.id.clone(),
                source,
            };
            let local = mesh_component(c, resolution, Placement::Local).map_err(err)?;
            let bad = local.boundary_edge_count();
            if bad > 0 || local.triangles.is_empty() {
                return Err(err(MeshError::NotWatertight {
                    boundary_edges: bad,
                }));
            }
            let dz = if c.is_base() { 0.0 } else { c.thickness };
            Ok(ComponentMeshes {
                id: c.id.clone(),
                print: place(local.clone(), &c.initial_pose, 0.0),
                assembled: place(local.clone(), &c.final_pose, dz),
                local,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub spec: MechanismSpec,
    pub assembly: CompiledAssembly,
    pub manifest: AssemblyManifest,
    pub meshes: Vec<ComponentMeshes>,
    /// Output name to bytes.
    pub files: BTreeMap<String, Vec<u8>>,
    /// Estimate for `plate.gcode`, default heat-up included.
    pub print_time_min: f64,
    pub warnings: Vec<SliceWarning>,
}

/// parse → compile → mesh → STL, G-code, manifest and SVG.
pub fn compile_artifacts(doc: &[u8], opts: &CompileOptions) -> Result<Artifacts, PipelineError> {
    let spec = parse_spec(doc)?;
    compile_spec(spec, opts)
}

pub fn compile_spec(
    spec: MechanismSpec,
    opts: &CompileOptions,
) -> Result<Artifacts, PipelineError> {
    let assembly = compile_assembly(&spec, &opts.cell, opts.clearance)?;
    let meshes = mesh_assembly(&assembly, opts.resolution)?;

    let mut files = BTreeMap::new();
    let mut plate = TriMesh::default();
    let mut assembled = TriMesh::default();
    for m in &meshes {
        files.insert(part_stl_name(&m.id), write_stl(&m.local));
        plate.append(&m.print);
        assembled.append(&m.assembled);
    }
    files.insert(PLATE_STL.to_owned(), write_stl(&plate));
    files.insert(ASSEMBLY_STL.to_owned(), write_stl(&assembled));

    let manifest = build_manifest(&assembly);
    files.insert(MANIFEST_JSON.to_owned(), write_manifest(&manifest));

    let print = PrintParams {
        bed_width: opts.cell.bed_width,
        bed_depth: opts.cell.bed_depth,
        ..opts.print
    };
    let sliced = slice_gcode(&assembly_bodies(&assembly), &print)?;
    let print_time_min = estimate_print_time(&sliced.gcode).expect("own G-code parses");
    files.insert(PLATE_GCODE.to_owned(), sliced.gcode.into_bytes());

    let contours = assembly
        .components()
        .map(|c| {
            component_contours(c, opts.resolution).map_err(|source| PipelineError::Mesh {
                component: c.id.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    files.insert(
        PREVIEW_SVG.to_owned(),
        render_svg(&assembly, &contours).into_bytes(),
    );

    Ok(Artifacts {
        spec,
        assembly,
        manifest,
        meshes,
        files,
        print_time_min,
        warnings: sliced.warnings,
    })
}
