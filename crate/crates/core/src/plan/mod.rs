//! Assembly planning: turns a manifest into an ordered list of robot steps,
//! each expanded into subtasks and primitive API calls.
//!
//! The cell has a transporter (`R1`) that moves the print surface between
//! the drone pad and the assembly area, and an assembler (`R2`) that detaches
//! parts from the surface and places them on the base. Steps go to the robot
//! whose capability set covers them; with a single manipulator, everything
//! runs on `R1` in the same order.

mod templates;

pub use templates::{expand_subtasks, ASSEMBLY_AREA, DRONE_PAD, HOVER_MM};

use crate::emit::manifest::{AssemblyManifest, Pose2, SchemaError};
use crate::spec::CellParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RobotId {
    R1,
    R2,
}

impl std::fmt::Display for RobotId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RobotId::R1 => "R1",
            RobotId::R2 => "R2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    TransportSurface,
    ReturnProduct,
    Detach,
    Assemble,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotCapability {
    pub robot: RobotId,
    pub capabilities: BTreeSet<Capability>,
}

/// `R1 = {transport_surface, return_product}`, `R2 = {detach, assemble}`;
/// a single manipulator holds all four.
pub fn capability_table(num_manipulators: u8) -> Vec<RobotCapability> {
    use Capability::*;
    match num_manipulators {
        1 => vec![RobotCapability {
            robot: RobotId::R1,
            capabilities: [TransportSurface, ReturnProduct, Detach, Assemble].into(),
        }],
        _ => vec![
            RobotCapability {
                robot: RobotId::R1,
                capabilities: [TransportSurface, ReturnProduct].into(),
            },
            RobotCapability {
                robot: RobotId::R2,
                capabilities: [Detach, Assemble].into(),
            },
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Take the print surface off the drone and set it in the assembly area.
    Receive,
    Detach,
    Place,
    /// Put the finished product back on the drone.
    Return,
}

impl StepKind {
    pub fn capability(self) -> Capability {
        match self {
            StepKind::Receive => Capability::TransportSurface,
            StepKind::Detach => Capability::Detach,
            StepKind::Place => Capability::Assemble,
            StepKind::Return => Capability::ReturnProduct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ApiCall {
    MoveTo { pose: Pose2, z_mm: f64 },
    OpenGripper,
    CloseGripper,
    Pick { component: String },
    Place { component: String, pose: Pose2 },
    Detach { component: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subtask {
    pub name: String,
    pub api_calls: Vec<ApiCall>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub kind: StepKind,
    /// The component a detach or place step handles.
    pub component: Option<String>,
    pub description: String,
    pub robot: RobotId,
    pub subtasks: Vec<Subtask>,
}

impl Step {
    pub fn api_calls(&self) -> impl Iterator<Item = &ApiCall> {
        self.subtasks.iter().flat_map(|s| s.api_calls.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblyPlan {
    pub steps: Vec<Step>,
}

impl AssemblyPlan {
    pub fn api_call_count(&self) -> usize {
        self.steps.iter().map(|s| s.api_calls().count()).sum()
    }

    /// API calls of one robot, in plan order.
    pub fn robot_calls(&self, robot: RobotId) -> impl Iterator<Item = &ApiCall> {
        self.steps
            .iter()
            .filter(move |s| s.robot == robot)
            .flat_map(|s| s.api_calls())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("manifest has no components")]
    EmptyManifest,
    #[error("malformed manifest: {0}")]
    InvalidManifest(#[from] SchemaError),
    #[error("invalid cell parameters: {0}")]
    InvalidCell(String),
    #[error("no robot can perform a {0:?} step")]
    NoCapableRobot(StepKind),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("malformed plan: {0}")]
    Malformed(String),
}

/// The unique robot holding the step's capability; the lowest id if several do.
pub fn assign_step(kind: StepKind, table: &[RobotCapability]) -> Result<RobotId, PlanError> {
    table
        .iter()
        .filter(|r| r.capabilities.contains(&kind.capability()))
        .map(|r| r.robot)
        .min()
        .ok_or(PlanError::NoCapableRobot(kind))
}

/// Receive, then detach and place every component in `(precedence_rank, id)`
/// order, then return.
pub fn plan_workflow(
    manifest: &AssemblyManifest,
    cell: &CellParams,
) -> Result<AssemblyPlan, PlanError> {
    if manifest.components.is_empty() {
        return Err(PlanError::EmptyManifest);
    }
    manifest.validate()?;
    cell.validate().map_err(PlanError::InvalidCell)?;
    let table = capability_table(cell.num_manipulators);

    let mut order: Vec<_> = manifest.components.iter().collect();
    order.sort_by(|a, b| {
        a.precedence_rank
            .cmp(&b.precedence_rank)
            .then_with(|| a.id.cmp(&b.id))
    });

    let mut kinds: Vec<(StepKind, Option<&str>)> = vec![(StepKind::Receive, None)];
    for c in order {
        kinds.push((StepKind::Detach, Some(&c.id)));
        kinds.push((StepKind::Place, Some(&c.id)));
    }
    kinds.push((StepKind::Return, None));

    let steps = kinds
        .into_iter()
        .map(|(kind, component)| {
            Ok(Step {
                kind,
                component: component.map(str::to_owned),
                description: describe(kind, component),
                robot: assign_step(kind, &table)?,
                subtasks: expand_subtasks(kind, component, manifest)?,
            })
        })
        .collect::<Result<Vec<_>, PlanError>>()?;
    Ok(AssemblyPlan { steps })
}

fn describe(kind: StepKind, component: Option<&str>) -> String {
    let c = component.unwrap_or("");
    match kind {
        StepKind::Receive => "receive print surface from drone".into(),
        StepKind::Detach => format!("detach {c} from print surface"),
        StepKind::Place => format!("place {c} at its final pose"),
        StepKind::Return => "return product to drone".into(),
    }
}

/// Canonical JSON.
pub fn write_plan(plan: &AssemblyPlan) -> Vec<u8> {
    let value = serde_json::to_value(plan).expect("plan serializes");
    crate::canonical_json(&value)
}

pub fn read_plan(bytes: &[u8]) -> Result<AssemblyPlan, PlanError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let plan: AssemblyPlan = serde_path_to_error::deserialize(de)
        .map_err(|e| PlanError::Malformed(format!("at `{}`: {}", e.path(), e.inner())))?;
    for (i, s) in plan.steps.iter().enumerate() {
        let needs_component = matches!(s.kind, StepKind::Detach | StepKind::Place);
        if needs_component != s.component.is_some() {
            return Err(PlanError::Malformed(format!(
                "steps[{i}].component does not match its kind"
            )));
        }
    }
    Ok(plan)
}

/// One line per step: index, robot, description, API-call count.
pub fn render_listing(plan: &AssemblyPlan) -> String {
    let mut s = String::new();
    for (i, step) in plan.steps.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:>3}  {}  {:<44} {:>3} calls",
            i + 1,
            step.robot,
            step.description,
            step.api_calls().count()
        );
    }
    s
}

/// Whether open and close calls alternate, starting with open.
pub fn gripper_protocol_ok<'a>(calls: impl IntoIterator<Item = &'a ApiCall>) -> bool {
    let mut open = false;
    for c in calls {
        match c {
            ApiCall::OpenGripper if !open => open = true,
            ApiCall::CloseGripper if open => open = false,
            ApiCall::OpenGripper | ApiCall::CloseGripper => return false,
            _ => {}
        }
    }
    true
}
