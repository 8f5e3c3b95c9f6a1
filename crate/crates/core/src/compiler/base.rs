use super::{CompileError, Feature, FeatureKind, BASE_MARGIN_MM};
use crate::sdf::Sdf2;
use crate::spec::{MechanismSpec, PartSpec};

/// The generated base before mates are assigned.
#[derive(Debug, Clone)]
pub struct BaseOutline {
    /// Plate outline with the pin disks unioned in.
    pub shape: Sdf2,
    /// One pin per connection, in connection order, at `anchor_global`.
    pub pins: Vec<Feature>,
}

pub fn generate_base(spec: &MechanismSpec) -> Result<BaseOutline, CompileError> {
    generate_base_with_margin(spec, BASE_MARGIN_MM)
}

/// Base plate = `offset(margin, union of part footprints at final poses)`.
/// Footprints are the uncut part shapes.
pub fn generate_base_with_margin(
    spec: &MechanismSpec,
    margin: f64,
) -> Result<BaseOutline, CompileError> {
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(CompileError::InvalidInput(format!(
            "base margin must be >= 0, got {margin}"
        )));
    }
    if spec.parts.is_empty() {
        return Err(CompileError::InvalidInput("mechanism has no parts".into()));
    }
    let footprints = spec
        .parts
        .iter()
        .map(|p| footprint(spec, p))
        .collect::<Result<Vec<_>, _>>()?;
    let plate = Sdf2::offset(
        margin,
        Sdf2::boolean(crate::sdf::BooleanOp::Union, footprints),
    );

    let mut pins = Vec::with_capacity(spec.connections.len());
    let mut disks = Vec::with_capacity(spec.connections.len());
    for c in &spec.connections {
        let disk = Sdf2::circle(c.pin_radius_mm)
            .map_err(|e| CompileError::InvalidInput(e.to_string()))?
            .translated(c.anchor_global.x, c.anchor_global.y);
        disks.push(disk);
        pins.push(Feature {
            kind: FeatureKind::Pin,
            local_center: c.anchor_global,
            radius: c.pin_radius_mm,
            mate: None,
        });
    }
    let shape = if disks.is_empty() {
        plate
    } else {
        let mut all = vec![plate];
        all.extend(disks);
        Sdf2::boolean(crate::sdf::BooleanOp::Union, all)
    };
    Ok(BaseOutline { shape, pins })
}

fn footprint(spec: &MechanismSpec, part: &PartSpec) -> Result<Sdf2, CompileError> {
    let raw = part
        .shape
        .to_sdf()
        .map_err(|e| CompileError::InvalidInput(format!("part `{}`: {e}", part.id)))?;
    Ok(match spec.connection_for(&part.id) {
        Some(c) => raw.transformed(c.final_pose()),
        None => raw,
    })
}
