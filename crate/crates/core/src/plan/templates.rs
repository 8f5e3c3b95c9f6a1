use super::{ApiCall, PlanError, StepKind, Subtask};
use crate::compiler::PIN_CAP_MM;
use crate::emit::manifest::{AssemblyManifest, ManifestComponent, Pose2};
use crate::spec::BASE_ID;

/// Clearance above a pick or place target before descending.
pub const HOVER_MM: f64 = 20.0;
/// Where the drone sets down the print surface.
pub const DRONE_PAD: Pose2 = Pose2 {
    x_mm: -400.0,
    y_mm: 0.0,
    rot_rad: 0.0,
};
/// Where the print surface sits during assembly; manifest poses are relative to it.
pub const ASSEMBLY_AREA: Pose2 = Pose2 {
    x_mm: 0.0,
    y_mm: 0.0,
    rot_rad: 0.0,
};

fn move_to(pose: Pose2, z_mm: f64) -> ApiCall {
    ApiCall::MoveTo { pose, z_mm }
}

fn subtask(name: &str, api_calls: Vec<ApiCall>) -> Subtask {
    Subtask {
        name: name.to_owned(),
        api_calls,
    }
}

/// Every template leaves the gripper closed, so open and close alternate
/// across consecutive steps of one robot.
pub fn expand_subtasks(
    kind: StepKind,
    component: Option<&str>,
    manifest: &AssemblyManifest,
) -> Result<Vec<Subtask>, PlanError> {
    use ApiCall::{CloseGripper, OpenGripper};
    let find = || -> Result<&ManifestComponent, PlanError> {
        let id = component
            .ok_or_else(|| PlanError::Malformed(format!("{kind:?} step needs a component")))?;
        manifest
            .component(id)
            .ok_or_else(|| PlanError::UnknownComponent(id.to_owned()))
    };
    Ok(match kind {
        StepKind::Receive => carry_surface(DRONE_PAD, ASSEMBLY_AREA, "drone pad", "assembly area"),
        StepKind::Return => carry_surface(ASSEMBLY_AREA, DRONE_PAD, "assembly area", "drone pad"),
        StepKind::Detach => {
            let c = find()?;
            let at = c.initial_pose;
            vec![
                subtask(
                    "approach grasp pin",
                    vec![move_to(at, HOVER_MM), OpenGripper],
                ),
                subtask("grasp", vec![move_to(at, 0.0), CloseGripper]),
                subtask("lift off surface", vec![move_to(at, HOVER_MM)]),
            ]
        }
        StepKind::Place => {
            let c = find()?;
            let at = c.final_pose;
            let (rest, seat) = seating(c, manifest)?;
            vec![
                subtask(
                    "approach final pose",
                    vec![move_to(at, rest + seat + HOVER_MM)],
                ),
                subtask("lower into place", vec![move_to(at, rest)]),
                subtask(
                    "release",
                    vec![
                        OpenGripper,
                        move_to(at, rest + seat + HOVER_MM),
                        CloseGripper,
                    ],
                ),
            ]
        }
    })
}

/// Resting height of the part bottom, and the extra lift needed to clear the
/// base pins (the pin height) for parts that mate a pin.
fn seating(c: &ManifestComponent, manifest: &AssemblyManifest) -> Result<(f64, f64), PlanError> {
    if c.id == BASE_ID {
        return Ok((0.0, 0.0));
    }
    let base = manifest
        .component(BASE_ID)
        .ok_or_else(|| PlanError::UnknownComponent(BASE_ID.to_owned()))?;
    let seat = if c.has_hole() {
        base.thickness_mm + PIN_CAP_MM
    } else {
        0.0
    };
    Ok((base.thickness_mm, seat))
}

fn carry_surface(from: Pose2, to: Pose2, from_name: &str, to_name: &str) -> Vec<Subtask> {
    use ApiCall::{CloseGripper, OpenGripper};
    vec![
        subtask(
            &format!("grasp surface at {from_name}"),
            vec![
                move_to(from, HOVER_MM),
                OpenGripper,
                move_to(from, 0.0),
                CloseGripper,
            ],
        ),
        subtask(
            &format!("carry surface to {to_name}"),
            vec![
                move_to(from, HOVER_MM),
                move_to(to, HOVER_MM),
                move_to(to, 0.0),
            ],
        ),
        subtask(
            "release surface",
            vec![OpenGripper, move_to(to, HOVER_MM), CloseGripper],
        ),
    ]
}
