//! Discrete-event model of the production line: design, print, surface
//! transfer, drone delivery and robot assembly.
//!
//! Time only advances through activity durations; there is no wall clock.
//! Every activity is an event on exactly one resource, and a resource runs
//! one event at a time.

use crate::plan::{AssemblyPlan, RobotId, StepKind};
use crate::spec::{CellParams, BASE_ID};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const RES_DESIGNER: &str = "designer";
pub const RES_PRINTER: &str = "printer";
pub const RES_TRANSFER_ARM: &str = "transfer_arm";
pub const RES_DRONE: &str = "drone";

fn default_blueprint_s() -> f64 {
    30.0
}

/// Line layout and durations. Pads are in meters, durations in seconds
/// unless the name says otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub printer_pad: [f64; 3],
    pub assembly_pad: [f64; 3],
    /// m/s
    pub drone_speed: f64,
    pub takeoff_s: f64,
    pub landing_s: f64,
    pub surface_transfer_s: f64,
    pub per_api_call_s: f64,
    /// Heat-up constant added to the G-code print-time estimate.
    pub heatup_min: f64,
    /// Time to produce the blueprint (analysis, document, compile).
    #[serde(default = "default_blueprint_s")]
    pub blueprint_s: f64,
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            printer_pad: [0.0, 0.0, 0.0],
            assembly_pad: [2.0, 1.0, 0.0],
            drone_speed: 2.0,
            takeoff_s: 10.0,
            landing_s: 10.0,
            surface_transfer_s: 45.0,
            per_api_call_s: 3.0,
            heatup_min: 5.0,
            blueprint_s: default_blueprint_s(),
        }
    }
}

impl Topology {
    /// Durations must be finite and >= 0, the speed > 0. Pads may coincide
    /// (a degenerate line with no flight).
    pub fn validate(&self) -> Result<(), SimError> {
        let fields = [
            ("takeoff_s", self.takeoff_s),
            ("landing_s", self.landing_s),
            ("surface_transfer_s", self.surface_transfer_s),
            ("per_api_call_s", self.per_api_call_s),
            ("heatup_min", self.heatup_min),
            ("blueprint_s", self.blueprint_s),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::InvalidTopology(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if !(self.drone_speed.is_finite() && self.drone_speed > 0.0) {
            return Err(SimError::InvalidTopology(format!(
                "drone_speed must be > 0, got {}",
                self.drone_speed
            )));
        }
        if !self
            .printer_pad
            .iter()
            .chain(&self.assembly_pad)
            .all(|v| v.is_finite())
        {
            return Err(SimError::InvalidTopology(
                "pad coordinates must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn pad_distance_m(&self) -> f64 {
        self.printer_pad
            .iter()
            .zip(&self.assembly_pad)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn flight_s(&self) -> f64 {
        self.pad_distance_m() / self.drone_speed
    }
}

pub fn read_topology(bytes: &[u8]) -> Result<Topology, SimError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let t: Topology = serde_path_to_error::deserialize(de)
        .map_err(|e| SimError::InvalidTopology(format!("at `{}`: {}", e.path(), e.inner())))?;
    t.validate()?;
    Ok(t)
}

pub fn write_topology(t: &Topology) -> Vec<u8> {
    crate::canonical_json(&serde_json::to_value(t).expect("topology serializes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub t_start: f64,
    pub t_end: f64,
    pub resource: String,
    pub activity: String,
    /// Plan step and API-call index for assembly events.
    pub step: Option<usize>,
    pub call: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageDurations {
    pub blueprint_s: f64,
    /// Printing plus moving the surface onto the drone.
    pub print_s: f64,
    /// Take-off, flight and landing.
    pub delivery_s: f64,
    pub assembly_s: f64,
}

impl StageDurations {
    pub fn total_s(&self) -> f64 {
        self.blueprint_s + self.print_s + self.delivery_s + self.assembly_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTimeline {
    /// Sorted by start time; ties keep generation order.
    pub events: Vec<SimEvent>,
    pub stage_durations: StageDurations,
    pub makespan_s: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("resource `{resource}` double-booked at t = {t} s")]
    ResourceConflict { resource: String, t: f64 },
}

/// Runs the line once.
///
/// Design, print, transfer and delivery are strictly serial. Assembly steps
/// start when their robot is free and their predecessors are done: the
/// surface must have been received, a part must be detached before it is
/// placed, the base must be placed before any other part, and the product is
/// returned after the last placement. Each API call takes `per_api_call_s`.
pub fn simulate(
    plan: &AssemblyPlan,
    print_time_min: f64,
    topology: &Topology,
    cell: &CellParams,
) -> Result<SimTimeline, SimError> {
    topology.validate()?;
    cell.validate().map_err(SimError::InvalidInput)?;
    if !(print_time_min.is_finite() && print_time_min >= 0.0) {
        return Err(SimError::InvalidInput(format!(
            "print time must be >= 0 minutes, got {print_time_min}"
        )));
    }
    if cell.num_manipulators == 1 && plan.steps.iter().any(|s| s.robot != RobotId::R1) {
        return Err(SimError::InvalidPlan(
            "a single-manipulator cell only has R1".into(),
        ));
    }

    let mut events = Vec::new();
    let mut t = 0.0;
    let push = |events: &mut Vec<SimEvent>, resource: &str, activity: &str, d: f64, t: &mut f64| {
        events.push(SimEvent {
            t_start: *t,
            t_end: *t + d,
            resource: resource.to_owned(),
            activity: activity.to_owned(),
            step: None,
            call: None,
        });
        *t += d;
    };
    push(
        &mut events,
        RES_DESIGNER,
        "blueprint",
        topology.blueprint_s,
        &mut t,
    );
    let print_start = t;
    push(
        &mut events,
        RES_PRINTER,
        "print",
        print_time_min * 60.0,
        &mut t,
    );
    push(
        &mut events,
        RES_TRANSFER_ARM,
        "transfer surface to drone",
        topology.surface_transfer_s,
        &mut t,
    );
    let delivery_start = t;
    push(
        &mut events,
        RES_DRONE,
        "take off",
        topology.takeoff_s,
        &mut t,
    );
    push(
        &mut events,
        RES_DRONE,
        "fly to assembly cell",
        topology.flight_s(),
        &mut t,
    );
    push(&mut events, RES_DRONE, "land", topology.landing_s, &mut t);
    let assembly_start = t;

    let deps = step_dependencies(plan)?;
    let mut robot_free: BTreeMap<RobotId, f64> = BTreeMap::new();
    let mut step_end = vec![assembly_start; plan.steps.len()];
    let mut assembly_end = assembly_start;
    for (i, step) in plan.steps.iter().enumerate() {
        let ready = deps[i]
            .iter()
            .map(|&d| step_end[d])
            .fold(assembly_start, f64::max);
        let mut t = ready.max(*robot_free.get(&step.robot).unwrap_or(&assembly_start));
        for (k, _) in step.api_calls().enumerate() {
            events.push(SimEvent {
                t_start: t,
                t_end: t + topology.per_api_call_s,
                resource: step.robot.to_string(),
                activity: step.description.clone(),
                step: Some(i),
                call: Some(k),
            });
            t += topology.per_api_call_s;
        }
        step_end[i] = t;
        robot_free.insert(step.robot, t);
        assembly_end = assembly_end.max(t);
    }

    events.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
    check_exclusive(&events)?;
    let makespan_s = events.iter().map(|e| e.t_end).fold(0.0, f64::max);
    Ok(SimTimeline {
        events,
        stage_durations: StageDurations {
            blueprint_s: print_start,
            print_s: delivery_start - print_start,
            delivery_s: assembly_start - delivery_start,
            assembly_s: assembly_end - assembly_start,
        },
        makespan_s,
    })
}

/// Indices of the steps each step waits for (besides its robot's previous step).
fn step_dependencies(plan: &AssemblyPlan) -> Result<Vec<Vec<usize>>, SimError> {
    let mut deps = vec![Vec::new(); plan.steps.len()];
    let receive: Vec<usize> = indices(plan, |k, _| k == StepKind::Receive);
    let places: Vec<usize> = indices(plan, |k, _| k == StepKind::Place);
    let base_place = plan
        .steps
        .iter()
        .position(|s| s.kind == StepKind::Place && s.component.as_deref() == Some(BASE_ID));
    for (i, s) in plan.steps.iter().enumerate() {
        if s.kind != StepKind::Receive {
            deps[i].extend(receive.iter().copied().filter(|&r| r < i));
        }
        match s.kind {
            StepKind::Place => {
                let c = s.component.as_deref();
                let detach = plan.steps[..i]
                    .iter()
                    .position(|o| o.kind == StepKind::Detach && o.component.as_deref() == c)
                    .ok_or_else(|| {
                        SimError::InvalidPlan(format!(
                            "place of `{}` before its detach",
                            c.unwrap_or("?")
                        ))
                    })?;
                deps[i].push(detach);
                if c != Some(BASE_ID) {
                    if let Some(b) = base_place {
                        if b > i {
                            return Err(SimError::InvalidPlan(
                                "a part is placed before BASE".into(),
                            ));
                        }
                        deps[i].push(b);
                    }
                }
            }
            StepKind::Return => deps[i].extend(places.iter().copied().filter(|&p| p < i)),
            StepKind::Receive | StepKind::Detach => {}
        }
    }
    Ok(deps)
}

fn indices(plan: &AssemblyPlan, f: impl Fn(StepKind, Option<&str>) -> bool) -> Vec<usize> {
    plan.steps
        .iter()
        .enumerate()
        .filter(|(_, s)| f(s.kind, s.component.as_deref()))
        .map(|(i, _)| i)
        .collect()
}

fn check_exclusive(events: &[SimEvent]) -> Result<(), SimError> {
    let mut last: BTreeMap<&str, f64> = BTreeMap::new();
    for e in events {
        if let Some(&end) = last.get(e.resource.as_str()) {
            if e.t_start < end {
                return Err(SimError::ResourceConflict {
                    resource: e.resource.clone(),
                    t: e.t_start,
                });
            }
        }
        last.insert(&e.resource, e.t_end);
    }
    Ok(())
}

pub fn write_timeline(t: &SimTimeline) -> Vec<u8> {
    crate::canonical_json(&serde_json::to_value(t).expect("timeline serializes"))
}

/// Stage table in minutes with two decimals.
pub fn report(timeline: &SimTimeline) -> String {
    let s = &timeline.stage_durations;
    let rows = [
        ("design", s.blueprint_s),
        ("print", s.print_s),
        ("delivery", s.delivery_s),
        ("assembly", s.assembly_s),
    ];
    let mut out = String::new();
    let _ = writeln!(out, "{:<10} {:>10}", "stage", "minutes");
    let _ = writeln!(out, "{}", "-".repeat(21));
    for (name, secs) in rows {
        let _ = writeln!(out, "{name:<10} {:>10.2}", secs / 60.0);
    }
    let _ = writeln!(out, "{}", "-".repeat(21));
    let _ = writeln!(
        out,
        "{:<10} {:>10.2}",
        "makespan",
        timeline.makespan_s / 60.0
    );
    out
}
