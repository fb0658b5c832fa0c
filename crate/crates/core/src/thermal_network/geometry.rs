//! Probe enclosures (sphere-in-sphere or cube-in-cube) and the standard
//! three-node network built from them.

use std::f64::consts::PI;

use super::{
    enclosure_radiation_coefficient, slab_resistance, spherical_shell_resistance, steady_state,
    ThermalLink, ThermalNetwork, ThermalNode, BOUNDARY, STEFAN_BOLTZMANN,
};
use crate::{Error, Result};

pub const CORE: &str = "core";
pub const INNER_SHELL: &str = "inner_shell";
pub const OUTER_SHELL: &str = "outer_shell";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeGeometry {
    /// Inner sphere of `r_inner` inside an outer sphere of `r_outer`, metres.
    Sphere { r_inner: f64, r_outer: f64 },
    /// Inner cube of side `inner_side` inside a cube whose walls sit `wall`
    /// further out on every face, metres.
    Cube { inner_side: f64, wall: f64 },
}

impl ProbeGeometry {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProbeGeometry::Sphere { r_inner, r_outer } => {
                r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()
            }
            ProbeGeometry::Cube { inner_side, wall } => {
                inner_side > 0.0 && wall > 0.0 && (inner_side + wall).is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(format!("{self:?}")))
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProbeGeometry::Sphere { .. } => "sphere",
            ProbeGeometry::Cube { .. } => "cube",
        }
    }

    pub fn inner_volume(&self) -> f64 {
        match *self {
            ProbeGeometry::Sphere { r_inner, .. } => 4.0 / 3.0 * PI * r_inner.powi(3),
            ProbeGeometry::Cube { inner_side, .. } => inner_side.powi(3),
        }
    }

    pub fn wall_thickness(&self) -> f64 {
        match *self {
            ProbeGeometry::Sphere { r_inner, r_outer } => r_outer - r_inner,
            ProbeGeometry::Cube { wall, .. } => wall,
        }
    }

    pub fn inner_area(&self) -> f64 {
        match *self {
            ProbeGeometry::Sphere { r_inner, .. } => 4.0 * PI * r_inner * r_inner,
            ProbeGeometry::Cube { inner_side, .. } => 6.0 * inner_side * inner_side,
        }
    }

    pub fn outer_area(&self) -> f64 {
        match *self {
            ProbeGeometry::Sphere { r_outer, .. } => 4.0 * PI * r_outer * r_outer,
            ProbeGeometry::Cube { inner_side, wall } => 6.0 * (inner_side + 2.0 * wall).powi(2),
        }
    }

    /// Conduction resistance of the gap between inner and outer surfaces.
    /// Cube walls are treated as slabs over the geometric-mean face area,
    /// which is exact for the spherical shell.
    pub fn gap_resistance(&self, conductivity: f64) -> Result<f64> {
        match *self {
            ProbeGeometry::Sphere { r_inner, r_outer } => {
                spherical_shell_resistance(r_inner, r_outer, conductivity)
            }
            ProbeGeometry::Cube { wall, .. } => {
                slab_resistance(wall, (self.inner_area() * self.outer_area()).sqrt(), conductivity)
            }
        }
    }

    /// Cube with the same enclosed volume and wall thickness.
    pub fn equal_volume_cube(&self) -> ProbeGeometry {
        ProbeGeometry::Cube {
            inner_side: self.inner_volume().cbrt(),
            wall: self.wall_thickness(),
        }
    }
}

/// Thermal properties of an enclosure. Conductivities in W/(m·K),
/// resistances in K/W; an infinite sink resistance removes that link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnclosureMaterials {
    /// Effective conductivity of everything filling the inner/outer gap.
    pub gap_conductivity: f64,
    pub emissivity_gap_inner: f64,
    pub emissivity_gap_outer: f64,
    /// Outer surface emissivity towards the surroundings.
    pub emissivity_surface: f64,
    /// Lumped non-radiative path from outer shell to the surroundings.
    pub sink_resistance: f64,
    /// Core (electronics) to inner shell.
    pub core_link_resistance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCapacities {
    pub core: f64,
    pub inner_shell: f64,
    pub outer_shell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnclosureModel {
    pub geometry: ProbeGeometry,
    pub materials: EnclosureMaterials,
}

impl EnclosureModel {
    /// Nodes `core`, `inner_shell`, `outer_shell` and links
    /// core ↔ inner shell (conduction), inner ↔ outer shell (gap conduction
    /// in parallel with enclosure radiation), outer shell ↔ ambient
    /// (surface radiation, plus the sink conduction when finite).
    pub fn links(&self) -> Result<Vec<ThermalLink>> {
        self.geometry.validate()?;
        let m = &self.materials;
        let g = &self.geometry;
        let gap_radiation = enclosure_radiation_coefficient(
            g.inner_area(),
            g.outer_area(),
            m.emissivity_gap_inner,
            m.emissivity_gap_outer,
        )?;
        if !(m.emissivity_surface > 0.0 && m.emissivity_surface <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "surface emissivity must lie in (0, 1], got {}",
                m.emissivity_surface
            )));
        }
        let mut links = vec![
            ThermalLink::conduction("core_mount", CORE, INNER_SHELL, m.core_link_resistance),
            ThermalLink::conduction(
                "gap_conduction",
                INNER_SHELL,
                OUTER_SHELL,
                g.gap_resistance(m.gap_conductivity)?,
            ),
            ThermalLink::radiation("gap_radiation", INNER_SHELL, OUTER_SHELL, gap_radiation),
            ThermalLink::radiation(
                "surface_radiation",
                OUTER_SHELL,
                BOUNDARY,
                m.emissivity_surface * STEFAN_BOLTZMANN * g.outer_area(),
            ),
        ];
        if m.sink_resistance.is_finite() {
            links.push(ThermalLink::conduction("sink", OUTER_SHELL, BOUNDARY, m.sink_resistance));
        }
        Ok(links)
    }

    pub fn nodes(&self, capacities: &NodeCapacities, initial_temperature: f64) -> Vec<ThermalNode> {
        vec![
            ThermalNode::new(CORE, capacities.core, initial_temperature),
            ThermalNode::new(INNER_SHELL, capacities.inner_shell, initial_temperature),
            ThermalNode::new(OUTER_SHELL, capacities.outer_shell, initial_temperature),
        ]
    }

    pub fn network(&self, capacities: &NodeCapacities, initial_temperature: f64) -> Result<ThermalNetwork> {
        ThermalNetwork::new(self.nodes(capacities, initial_temperature), self.links()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryRow {
    pub label: String,
    /// Steady core temperature, K.
    pub core_temperature: f64,
    /// Heat lost per kelvin of core elevation above the boundary, W/K.
    pub loss_conductance: f64,
    pub outer_area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryComparison {
    pub boundary: f64,
    pub dissipation: f64,
    pub rows: [GeometryRow; 2],
}

impl GeometryComparison {
    pub fn render(&self) -> String {
        let mut s = format!(
            "dissipation {:.4} W, boundary {:.2} K\n{:<8} {:>14} {:>14} {:>16} {:>14}\n",
            self.dissipation, self.boundary, "shape", "core_K", "core_C", "loss_W_per_K", "outer_area_m2"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<8} {:>14.4} {:>14.4} {:>16.6} {:>14.6}\n",
                r.label,
                r.core_temperature,
                crate::kelvin_to_celsius(r.core_temperature),
                r.loss_conductance,
                r.outer_area
            ));
        }
        s
    }
}

/// Steady-state comparison of two enclosures of equal volume, wall
/// thickness and materials, with `dissipation` watts in the core.
pub fn compare_geometries(
    first: &EnclosureModel,
    second: &EnclosureModel,
    dissipation: f64,
    boundary: f64,
) -> Result<GeometryComparison> {
    first.geometry.validate()?;
    second.geometry.validate()?;
    let (v1, v2) = (first.geometry.inner_volume(), second.geometry.inner_volume());
    if (v1 - v2).abs() > 1e-9 * v1.max(v2) {
        return Err(Error::InvalidComparison(format!(
            "enclosed volumes differ: {v1:.6e} vs {v2:.6e} m³"
        )));
    }
    let (w1, w2) = (first.geometry.wall_thickness(), second.geometry.wall_thickness());
    if (w1 - w2).abs() > 1e-12 {
        return Err(Error::InvalidComparison(format!("wall thickness differs: {w1} vs {w2} m")));
    }
    if first.materials != second.materials {
        return Err(Error::InvalidComparison("materials differ".into()));
    }
    if !(dissipation >= 0.0) {
        return Err(Error::InvalidInput(format!("dissipation {dissipation} W")));
    }

    // Capacities do not enter the steady balance.
    let unit = NodeCapacities {
        core: 1.0,
        inner_shell: 1.0,
        outer_shell: 1.0,
    };
    let row = |model: &EnclosureModel| -> Result<GeometryRow> {
        let net = model.network(&unit, boundary)?;
        let core_temperature = steady_state(&net, boundary, &[dissipation, 0.0, 0.0])?[0];
        // With no dissipation the conductance is measured with a small probe load.
        let loss_conductance = if dissipation > 0.0 {
            dissipation / (core_temperature - boundary)
        } else {
            let probe = 1e-3;
            probe / (steady_state(&net, boundary, &[probe, 0.0, 0.0])?[0] - boundary)
        };
        Ok(GeometryRow {
            label: model.geometry.label().to_string(),
            core_temperature,
            loss_conductance,
            outer_area: model.geometry.outer_area(),
        })
    };
    Ok(GeometryComparison {
        boundary,
        dissipation,
        rows: [row(first)?, row(second)?],
    })
}
