//! Lumped-capacitance thermal network: capacitive nodes joined by
//! conduction and radiation links to each other and to a single
//! prescribed-temperature boundary.

mod geometry;
mod steady;

pub use geometry::{
    compare_geometries, EnclosureMaterials, EnclosureModel, GeometryComparison, GeometryRow,
    NodeCapacities, ProbeGeometry, CORE, INNER_SHELL, OUTER_SHELL,
};
pub use steady::steady_state;

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::ode::{Integrator, SolverOptions};
use crate::{Error, Result};

/// Stefan–Boltzmann constant, W/(m²·K⁴).
pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;

/// Id of the boundary (ambient) node. Every network has exactly one.
pub const BOUNDARY: &str = "ambient";

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalNode {
    pub id: String,
    /// J/K, strictly positive.
    pub heat_capacity: f64,
    /// Initial temperature, K.
    pub temperature: f64,
    /// Constant internal dissipation, W.
    pub dissipation: f64,
}

impl ThermalNode {
    pub fn new(id: impl Into<String>, heat_capacity: f64, temperature: f64) -> Self {
        Self {
            id: id.into(),
            heat_capacity,
            temperature,
            dissipation: 0.0,
        }
    }

    pub fn with_dissipation(mut self, watts: f64) -> Self {
        self.dissipation = watts;
        self
    }
}

/// Heat-transfer mechanism of a link. Convection is deliberately absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkKind {
    /// Linear conduction with resistance in K/W.
    Conduction { resistance: f64 },
    /// Grey-body exchange `C·(Ta⁴ − Tb⁴)` with coefficient in W/K⁴.
    Radiation { coefficient: f64 },
}

impl LinkKind {
    fn label(&self) -> &'static str {
        match self {
            LinkKind::Conduction { .. } => "conduction",
            LinkKind::Radiation { .. } => "radiation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalLink {
    pub name: String,
    pub a: String,
    pub b: String,
    pub kind: LinkKind,
}

impl ThermalLink {
    pub fn conduction(name: &str, a: &str, b: &str, resistance: f64) -> Self {
        Self {
            name: name.into(),
            a: a.into(),
            b: b.into(),
            kind: LinkKind::Conduction { resistance },
        }
    }

    pub fn radiation(name: &str, a: &str, b: &str, coefficient: f64) -> Self {
        Self {
            name: name.into(),
            a: a.into(),
            b: b.into(),
            kind: LinkKind::Radiation { coefficient },
        }
    }
}

/// Heat flow from endpoint A to endpoint B, W. Positive when `t_a > t_b`.
pub fn link_heat_flow(kind: &LinkKind, t_a: f64, t_b: f64) -> f64 {
    match *kind {
        LinkKind::Conduction { resistance } => (t_a - t_b) / resistance,
        LinkKind::Radiation { coefficient } => {
            coefficient * (t_a.powi(4) - t_b.powi(4))
        }
    }
}

/// Conduction resistance of a spherical shell, K/W.
pub fn spherical_shell_resistance(r_inner: f64, r_outer: f64, conductivity: f64) -> Result<f64> {
    if !(r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "shell radii must satisfy 0 < r_inner < r_outer, got {r_inner} and {r_outer}"
        )));
    }
    if !(conductivity > 0.0 && conductivity.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "conductivity must be positive, got {conductivity}"
        )));
    }
    Ok((1.0 / r_inner - 1.0 / r_outer) / (4.0 * PI * conductivity))
}

/// Conduction resistance of a plane slab, K/W.
pub fn slab_resistance(thickness: f64, area: f64, conductivity: f64) -> Result<f64> {
    for (name, v) in [("thickness", thickness), ("area", area), ("conductivity", conductivity)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("slab {name} must be positive, got {v}")));
        }
    }
    Ok(thickness / (conductivity * area))
}

/// Radiative exchange coefficient between two concentric spheres (inner
/// fully enclosed, view factor 1), W/K⁴.
pub fn concentric_sphere_radiation_coefficient(
    r_inner: f64,
    r_outer: f64,
    eps_inner: f64,
    eps_outer: f64,
) -> Result<f64> {
    if !(r_inner > 0.0 && r_inner <= r_outer && r_outer.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "radii must satisfy 0 < r_inner ≤ r_outer, got {r_inner} and {r_outer}"
        )));
    }
    let a_inner = 4.0 * PI * r_inner * r_inner;
    let a_outer = 4.0 * PI * r_outer * r_outer;
    enclosure_radiation_coefficient(a_inner, a_outer, eps_inner, eps_outer)
}

/// Two-surface enclosure exchange for a convex body of area `a_inner`
/// fully surrounded by a surface of area `a_outer`.
pub(crate) fn enclosure_radiation_coefficient(
    a_inner: f64,
    a_outer: f64,
    eps_inner: f64,
    eps_outer: f64,
) -> Result<f64> {
    for (name, e) in [("inner", eps_inner), ("outer", eps_outer)] {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "{name} emissivity must lie in (0, 1], got {e}"
            )));
        }
    }
    Ok(STEFAN_BOLTZMANN * a_inner
        / (1.0 / eps_inner + (a_inner / a_outer) * (1.0 / eps_outer - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endpoint {
    Node(usize),
    Boundary,
}

/// A validated network.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalNetwork {
    nodes: Vec<ThermalNode>,
    links: Vec<ThermalLink>,
    ends: Vec<(Endpoint, Endpoint)>,
}

impl ThermalNetwork {
    /// Validate ids, link parameters and that every node has a conductive
    /// or radiative path to the boundary.
    pub fn new(nodes: Vec<ThermalNode>, links: Vec<ThermalLink>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidNetwork("network has no dynamic nodes".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.id == BOUNDARY {
                return Err(Error::InvalidNetwork(format!(
                    "`{BOUNDARY}` is reserved for the boundary node"
                )));
            }
            if nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(Error::InvalidNetwork(format!("duplicate node id `{}`", n.id)));
            }
            if !(n.heat_capacity > 0.0 && n.heat_capacity.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "node `{}` needs a positive heat capacity",
                    n.id
                )));
            }
            if !(n.temperature > 0.0 && n.temperature.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "node `{}` temperature must be positive Kelvin",
                    n.id
                )));
            }
            if !n.dissipation.is_finite() {
                return Err(Error::InvalidNetwork(format!("node `{}` dissipation", n.id)));
            }
        }
        let lookup = |id: &str| -> Result<Endpoint> {
            if id == BOUNDARY {
                return Ok(Endpoint::Boundary);
            }
            nodes
                .iter()
                .position(|n| n.id == id)
                .map(Endpoint::Node)
                .ok_or_else(|| Error::InvalidNetwork(format!("link references unknown node `{id}`")))
        };
        let mut ends = Vec::with_capacity(links.len());
        for l in &links {
            match l.kind {
                LinkKind::Conduction { resistance } if !(resistance > 0.0 && resistance.is_finite()) => {
                    return Err(Error::InvalidNetwork(format!(
                        "link `{}`: conduction resistance must be positive and finite, got {resistance}",
                        l.name
                    )));
                }
                LinkKind::Radiation { coefficient } if !(coefficient >= 0.0 && coefficient.is_finite()) => {
                    return Err(Error::InvalidNetwork(format!(
                        "link `{}`: radiative coefficient must be non-negative, got {coefficient}",
                        l.name
                    )));
                }
                _ => {}
            }
            let pair = (lookup(&l.a)?, lookup(&l.b)?);
            if pair.0 == pair.1 {
                return Err(Error::InvalidNetwork(format!("link `{}` joins a node to itself", l.name)));
            }
            ends.push(pair);
        }

        // Breadth-first search from the boundary over links that carry heat.
        let mut reached = vec![false; nodes.len()];
        let mut queue = VecDeque::from([Endpoint::Boundary]);
        while let Some(at) = queue.pop_front() {
            for (l, &(a, b)) in links.iter().zip(&ends) {
                let carries = match l.kind {
                    LinkKind::Conduction { .. } => true,
                    LinkKind::Radiation { coefficient } => coefficient > 0.0,
                };
                if !carries {
                    continue;
                }
                let other = if a == at {
                    b
                } else if b == at {
                    a
                } else {
                    continue;
                };
                if let Endpoint::Node(i) = other {
                    if !reached[i] {
                        reached[i] = true;
                        queue.push_back(other);
                    }
                }
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(Error::InvalidNetwork(format!(
                "node `{}` has no thermal path to the boundary",
                nodes[i].id
            )));
        }
        Ok(Self { nodes, links, ends })
    }

    pub fn nodes(&self) -> &[ThermalNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[ThermalLink] {
        &self.links
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.heat_capacity).collect()
    }

    pub fn initial_temperatures(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.temperature).collect()
    }

    pub fn dissipations(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.dissipation).collect()
    }

    /// Copy of the network with every heat capacity multiplied by `factor`.
    pub fn with_scaled_capacities(&self, factor: f64) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| ThermalNode {
                heat_capacity: n.heat_capacity * factor,
                ..n.clone()
            })
            .collect();
        Self::new(nodes, self.links.clone())
    }

    /// Copy of the network with different initial temperatures.
    pub fn with_temperatures(&self, temps: &[f64]) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .zip(temps)
            .map(|(n, &t)| ThermalNode {
                temperature: t,
                ..n.clone()
            })
            .collect();
        Self::new(nodes, self.links.clone())
    }

    fn temperature_of(end: Endpoint, temps: &[f64], boundary: f64) -> f64 {
        match end {
            Endpoint::Node(i) => temps[i],
            Endpoint::Boundary => boundary,
        }
    }

    /// Heat flow along each link (A → B), W.
    pub fn link_flows(&self, temps: &[f64], boundary: f64, out: &mut [f64]) {
        for ((l, &(a, b)), q) in self.links.iter().zip(&self.ends).zip(out.iter_mut()) {
            *q = link_heat_flow(
                &l.kind,
                Self::temperature_of(a, temps, boundary),
                Self::temperature_of(b, temps, boundary),
            );
        }
    }

    /// Given per-link flows, write the net link heat entering each node into
    /// `net` and return the heat entering the boundary.
    pub fn net_heat(&self, link_flows: &[f64], net: &mut [f64]) -> f64 {
        net.iter_mut().for_each(|v| *v = 0.0);
        let mut to_boundary = 0.0;
        for (&(a, b), &q) in self.ends.iter().zip(link_flows) {
            match a {
                Endpoint::Node(i) => net[i] -= q,
                Endpoint::Boundary => to_boundary -= q,
            }
            match b {
                Endpoint::Node(i) => net[i] += q,
                Endpoint::Boundary => to_boundary += q,
            }
        }
        to_boundary
    }

    /// Partial derivatives of each link flow with respect to its endpoint
    /// temperatures, used by the steady-state Newton solver.
    pub(crate) fn link_jacobian_entries(
        &self,
        temps: &[f64],
        boundary: f64,
    ) -> impl Iterator<Item = (Option<usize>, Option<usize>, f64, f64)> + '_ {
        let temps = temps.to_vec();
        self.links.iter().zip(&self.ends).map(move |(l, &(a, b))| {
            let ta = Self::temperature_of(a, &temps, boundary);
            let tb = Self::temperature_of(b, &temps, boundary);
            let (da, db) = match l.kind {
                LinkKind::Conduction { resistance } => (1.0 / resistance, -1.0 / resistance),
                LinkKind::Radiation { coefficient } => {
                    (4.0 * coefficient * ta.powi(3), -4.0 * coefficient * tb.powi(3))
                }
            };
            let idx = |e: Endpoint| match e {
                Endpoint::Node(i) => Some(i),
                Endpoint::Boundary => None,
            };
            (idx(a), idx(b), da, db)
        })
    }

    /// Human-readable listing of nodes and links.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            s.push_str(&format!(
                "node {:<12} C = {:>9.3} J/K  T0 = {:>8.3} K\n",
                n.id, n.heat_capacity, n.temperature
            ));
        }
        for l in &self.links {
            let value = match l.kind {
                LinkKind::Conduction { resistance } => format!("R = {resistance:.4} K/W"),
                LinkKind::Radiation { coefficient } => format!("C = {coefficient:.4e} W/K^4"),
            };
            s.push_str(&format!(
                "link {:<18} {:>11} → {:<11} {:<10} {}\n",
                l.name,
                l.a,
                l.b,
                l.kind.label(),
                value
            ));
        }
        s
    }
}

/// Transient state of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub time: f64,
    /// Node temperatures, K, in network order.
    pub temperatures: Vec<f64>,
    /// Heat carried along each link since t = 0, J (A → B positive).
    pub link_heat: Vec<f64>,
}

impl NetworkState {
    pub fn initial(network: &ThermalNetwork) -> Self {
        Self {
            time: 0.0,
            temperatures: network.initial_temperatures(),
            link_heat: vec![0.0; network.links().len()],
        }
    }
}

/// Advance a network by `dt` seconds against a constant boundary
/// temperature with constant per-node dissipation, using the adaptive
/// Dormand–Prince integrator at its default tolerances.
pub fn step(
    state: &NetworkState,
    network: &ThermalNetwork,
    dt: f64,
    boundary: f64,
    dissipation: &[f64],
) -> Result<NetworkState> {
    step_with(state, network, dt, boundary, dissipation, SolverOptions::default())
}

pub fn step_with(
    state: &NetworkState,
    network: &ThermalNetwork,
    dt: f64,
    boundary: f64,
    dissipation: &[f64],
    options: SolverOptions,
) -> Result<NetworkState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let n = network.nodes().len();
    let m = network.links().len();
    if dissipation.len() != n || state.temperatures.len() != n || state.link_heat.len() != m {
        return Err(Error::InvalidInput("state does not match network size".into()));
    }
    let caps = network.capacities();
    let mut y: Vec<f64> = state
        .temperatures
        .iter()
        .chain(&state.link_heat)
        .copied()
        .collect();
    let mut flows = vec![0.0; m];
    let mut net = vec![0.0; n];
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        network.link_flows(&y[..n], boundary, &mut flows);
        network.net_heat(&flows, &mut net);
        for i in 0..n {
            dy[i] = (net[i] + dissipation[i]) / caps[i];
        }
        dy[n..].copy_from_slice(&flows);
    };
    let mut integ = Integrator::new(options, n + m, n);
    integ
        .advance(&mut rhs, state.time, &mut y, state.time + dt)
        .map_err(|e| Error::SolverDivergence {
            time: state.time,
            detail: e.to_string(),
        })?;
    if let Some(i) = y[..n].iter().position(|t| !(*t > 0.0)) {
        return Err(Error::SolverDivergence {
            time: state.time + dt,
            detail: format!("node `{}` temperature {} K", network.nodes()[i].id, y[i]),
        });
    }
    Ok(NetworkState {
        time: state.time + dt,
        temperatures: y[..n].to_vec(),
        link_heat: y[n..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_rc() -> ThermalNetwork {
        ThermalNetwork::new(
            vec![ThermalNode::new("core", 100.0, 293.0)],
            vec![ThermalLink::conduction("wall", "core", BOUNDARY, 50.0)],
        )
        .unwrap()
    }

    #[test]
    fn shell_resistance_probe_geometry() {
        let r = spherical_shell_resistance(0.035, 0.055, 0.02).unwrap();
        assert!((r - 41.34).abs() < 0.005, "{r}");
        let half = spherical_shell_resistance(0.035, 0.055, 0.04).unwrap();
        assert!((half - r / 2.0).abs() < 1e-12);
        let thin = spherical_shell_resistance(0.035, 0.035 * (1.0 + 1e-12), 0.02).unwrap();
        assert!(thin < 1e-9);
        assert!(matches!(
            spherical_shell_resistance(0.055, 0.035, 0.02),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(spherical_shell_resistance(0.035, 0.035, 0.02).is_err());
    }

    #[test]
    fn slab_examples() {
        let r = slab_resistance(0.02, 0.06 * 6.0, 0.02).unwrap();
        assert!((r - 2.7778).abs() < 1e-4, "{r}");
        let r1 = slab_resistance(0.02, 0.5, 0.2).unwrap();
        let r2 = slab_resistance(0.02, 0.25, 0.2).unwrap();
        assert!((r2 - 2.0 * r1).abs() < 1e-12);
        assert!(slab_resistance(1e-12, 1.0, 1.0).unwrap() < 1e-11);
        assert!(matches!(slab_resistance(0.0, 1.0, 1.0), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn radiation_coefficient_limits() {
        let black = concentric_sphere_radiation_coefficient(0.035, 0.055, 1.0, 1.0).unwrap();
        let area = 4.0 * PI * 0.035 * 0.035;
        assert!((black - STEFAN_BOLTZMANN * area).abs() < 1e-22);
        let dim = concentric_sphere_radiation_coefficient(0.035, 0.055, 1e-9, 0.8).unwrap();
        assert!(dim < 1e-16);
        assert!(concentric_sphere_radiation_coefficient(0.035, 0.055, 0.0, 0.8).is_err());
        assert!(concentric_sphere_radiation_coefficient(0.035, 0.055, 0.8, 1.2).is_err());
    }

    #[test]
    fn radiation_coefficient_grey_spheres() {
        // ε = 0.8 on both: σA₁ / (1.25 + (0.035/0.055)²·0.25).
        let c = concentric_sphere_radiation_coefficient(0.035, 0.055, 0.8, 0.8).unwrap();
        let a1 = 4.0 * PI * 0.035_f64.powi(2);
        let ratio = (0.035_f64 / 0.055).powi(2);
        let expected = STEFAN_BOLTZMANN * a1 / (1.25 + ratio * 0.25);
        assert!((c - expected).abs() < 1e-20);
        assert!((c - 6.4600e-10).abs() < 1e-13, "{c:e}");
    }

    #[test]
    fn link_flow_examples() {
        let cond = LinkKind::Conduction { resistance: 41.34 };
        assert!((link_heat_flow(&cond, 253.0, 241.0) - 0.29028).abs() < 1e-5);
        let rad = LinkKind::Radiation { coefficient: 1e-9 };
        assert_eq!(link_heat_flow(&rad, 250.0, 250.0), 0.0);
        assert_eq!(link_heat_flow(&cond, 250.0, 250.0), 0.0);
        assert_eq!(link_heat_flow(&rad, 300.0, 200.0), -link_heat_flow(&rad, 200.0, 300.0));
    }

    #[test]
    fn validation_rejects_bad_networks() {
        let zero_r = ThermalNetwork::new(
            vec![ThermalNode::new("a", 1.0, 300.0)],
            vec![ThermalLink::conduction("l", "a", BOUNDARY, 0.0)],
        );
        assert!(zero_r.is_err());
        let island = ThermalNetwork::new(
            vec![ThermalNode::new("a", 1.0, 300.0), ThermalNode::new("b", 1.0, 300.0)],
            vec![ThermalLink::conduction("l", "a", BOUNDARY, 1.0)],
        );
        assert!(matches!(island, Err(Error::InvalidNetwork(m)) if m.contains("`b`")));
        let dark = ThermalNetwork::new(
            vec![ThermalNode::new("a", 1.0, 300.0)],
            vec![ThermalLink::radiation("l", "a", BOUNDARY, 0.0)],
        );
        assert!(dark.is_err());
        let unknown = ThermalNetwork::new(
            vec![ThermalNode::new("a", 1.0, 300.0)],
            vec![ThermalLink::conduction("l", "a", "nowhere", 1.0)],
        );
        assert!(unknown.is_err());
        let no_capacity = ThermalNetwork::new(
            vec![ThermalNode::new("a", 0.0, 300.0)],
            vec![ThermalLink::conduction("l", "a", BOUNDARY, 1.0)],
        );
        assert!(no_capacity.is_err());
    }

    #[test]
    fn step_follows_rc_exponential() {
        let net = single_rc();
        let mut state = NetworkState::initial(&net);
        for _ in 0..10 {
            state = step(&state, &net, 500.0, 241.0, &[0.0]).unwrap();
        }
        let exact = 241.0 + 52.0 * (-5000.0_f64 / 5000.0).exp();
        assert!(((state.temperatures[0] - exact) / exact).abs() < 1e-6);
        // Heat through the wall equals the energy the node lost.
        let lost = 100.0 * (293.0 - state.temperatures[0]);
        assert!((state.link_heat[0] - lost).abs() < 1e-6 * lost);
    }

    #[test]
    fn step_at_equilibrium_is_stationary() {
        let net = ThermalNetwork::new(
            vec![ThermalNode::new("core", 100.0, 241.0)],
            vec![ThermalLink::conduction("wall", "core", BOUNDARY, 50.0)],
        )
        .unwrap();
        let s = step(&NetworkState::initial(&net), &net, 1e4, 241.0, &[0.0]).unwrap();
        assert_eq!(s.temperatures[0], 241.0);
    }

    #[test]
    fn step_with_dissipation_settles_at_offset() {
        let net = single_rc();
        let s = step(&NetworkState::initial(&net), &net, 2e5, 241.0, &[0.09]).unwrap();
        assert!((s.temperatures[0] - 245.5).abs() < 1e-5);
    }

    #[test]
    fn step_rejects_non_positive_dt() {
        let net = single_rc();
        assert!(step(&NetworkState::initial(&net), &net, 0.0, 241.0, &[0.0]).is_err());
    }
}
