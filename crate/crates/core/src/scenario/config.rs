//! Line-oriented scenario documents: `section.key = value`, `#` comments.
//!
//! Loading is strict: every key must be known, required keys must be
//! present, and values are validated before a config is returned.
//! [`ScenarioConfig::emit`] writes the canonical form, which loads back to
//! an identical config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::controller::{ControlMode, ControlPolicy, SensorModel, DEFAULT_HEATER_BUDGET};
use crate::environment::{parse_table_csv, EnvironmentProfile};
use crate::ode::SolverOptions;
use crate::simulation::{Delivery, SimulationInput, TessSetup};
use crate::tess_model::{SaltBed, TessState, WaterPhase, WaterReservoir, DEFAULT_RATE_CONSTANT};
use crate::thermal_network::{
    EnclosureMaterials, EnclosureModel, LinkKind, ProbeGeometry, ThermalLink, ThermalNetwork, ThermalNode,
    CORE, INNER_SHELL, OUTER_SHELL,
};
use crate::thermo_props::{builtin_sorbents, find_sorbent, HydrateVariant, SorbentSpec};
use crate::ConfigError;

use super::budget::{validate_budget, BudgetModel, MassEntry, PowerEntry};

type CResult<T> = std::result::Result<T, ConfigError>;

/// Id of the salt-bed node added when a sorbent is configured.
pub const BED_NODE: &str = "salt_bed";

const REQUIRED: [&str; 4] = ["geometry.shape", "environment.kind", "run.duration_s", "controller.mode"];

#[derive(Debug, Clone, PartialEq)]
pub struct Materials {
    pub gap_conductivity: f64,
    pub emissivity_gap_inner: f64,
    pub emissivity_gap_outer: f64,
    pub emissivity_surface: f64,
    /// K/W; `inf` removes the link.
    pub sink_resistance: f64,
    /// Specific heats by material name, J/(kg·K).
    pub specific_heat: BTreeMap<String, f64>,
}

impl Default for Materials {
    fn default() -> Self {
        let specific_heat = [
            ("battery", 900.0),
            ("electronics", 800.0),
            ("insulation", 1000.0),
            ("salt", 1130.0),
            ("structure", 1400.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            gap_conductivity: 0.15,
            emissivity_gap_inner: 0.1,
            emissivity_gap_outer: 0.1,
            emissivity_surface: 0.9,
            sink_resistance: 1.0,
            specific_heat,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeLayout {
    /// Core, inner shell and outer shell from the enclosure geometry.
    Standard,
    Custom {
        nodes: Vec<ThermalNode>,
        links: Vec<ThermalLink>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodesConfig {
    pub layout: NodeLayout,
    pub initial_temperature: f64,
    pub core_link_resistance: f64,
    pub heat_node: String,
    pub dissipation_node: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TessConfig {
    pub sorbent: String,
    pub salt_mass_g: f64,
    pub water_mass_g: f64,
    pub water_temperature: f64,
    pub water_phase: WaterPhase,
    pub delivery: Delivery,
    pub rate_constant: f64,
    pub degradation_coefficient: f64,
    pub initial_hydration: f64,
    pub bed_link_resistance: f64,
    pub attach_node: String,
    pub charge_power: f64,
    pub charge_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub policy: ControlPolicy,
    pub sensors: Vec<SensorModel>,
    pub control_sensor: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentConfig {
    pub profile: EnvironmentProfile,
    /// Where a tabulated profile was read from, resolved against the
    /// document's directory.
    pub table_file: Option<String>,
    pub solar_flux: f64,
    pub solar_node: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub duration: f64,
    pub output_interval: f64,
    pub threshold: f64,
    /// Internal dissipation, W.
    pub dissipation: f64,
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: ProbeGeometry,
    pub materials: Materials,
    pub nodes: NodesConfig,
    pub tess: Option<TessConfig>,
    pub sorbents: Vec<SorbentSpec>,
    pub controller: ControllerConfig,
    pub environment: EnvironmentConfig,
    pub budget: BudgetModel,
    pub run: RunConfig,
}

struct Entry {
    line: usize,
    key: String,
    value: String,
    used: bool,
}

struct Doc {
    entries: Vec<Entry>,
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::invalid(key, message)
}

fn parse_f64(key: &str, value: &str) -> CResult<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| invalid(key, format!("`{value}` is not a number")))
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Doc {
    fn parse(text: &str) -> CResult<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected `section.key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            if !key.contains('.') || !key.split('.').all(is_identifier) {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("malformed key `{key}`"),
                });
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
            entries.push(Entry {
                line,
                key: key.to_string(),
                value: value.trim().to_string(),
                used: false,
            });
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let e = self.entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some(e.value.clone())
    }

    fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    fn num(&mut self, key: &str, default: f64) -> CResult<f64> {
        match self.take(key) {
            Some(v) => parse_f64(key, &v),
            None => Ok(default),
        }
    }

    fn require(&mut self, key: &str, context: &str) -> CResult<f64> {
        match self.take(key) {
            Some(v) => parse_f64(key, &v),
            None => Err(invalid(key, format!("required for {context}"))),
        }
    }

    fn text(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| default.to_string())
    }

    /// Entries `prefix.<rest>` in document order, as (full key, rest, value).
    fn take_prefix(&mut self, prefix: &str) -> Vec<(String, String, String)> {
        let dotted = format!("{prefix}.");
        self.entries
            .iter_mut()
            .filter(|e| e.key.starts_with(&dotted))
            .map(|e| {
                e.used = true;
                (e.key.clone(), e.key[dotted.len()..].to_string(), e.value.clone())
            })
            .collect()
    }

    fn finish(self) -> CResult<()> {
        match self.entries.into_iter().find(|e| !e.used) {
            Some(e) => Err(ConfigError::UnknownKey { line: e.line, key: e.key }),
            None => Ok(()),
        }
    }
}

fn fields(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).collect()
}

fn positive(key: &str, v: f64) -> CResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> CResult<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be non-negative, got {v}")))
    }
}

fn fraction(key: &str, v: f64) -> CResult<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(invalid(key, format!("must lie in (0, 1], got {v}")))
    }
}

fn optional_field(key: &str, s: &str) -> CResult<Option<f64>> {
    if s == "-" {
        Ok(None)
    } else {
        parse_f64(key, s).map(Some)
    }
}

fn fmt_optional(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn parse_geometry(doc: &mut Doc) -> CResult<ProbeGeometry> {
    let shape = doc.take("geometry.shape").unwrap_or_default();
    let g = match shape.as_str() {
        "sphere" => {
            if doc.has("geometry.cube_side") || doc.has("geometry.cube_wall") {
                return Err(invalid("geometry.shape", "cube dimensions given for a sphere"));
            }
            let r_inner = positive("geometry.r_inner", doc.num("geometry.r_inner", 0.035)?)?;
            let r_outer = positive("geometry.r_outer", doc.num("geometry.r_outer", 0.055)?)?;
            if r_outer <= r_inner {
                return Err(invalid("geometry.r_outer", "must exceed geometry.r_inner"));
            }
            ProbeGeometry::Sphere { r_inner, r_outer }
        }
        "cube" => {
            if doc.has("geometry.r_inner") || doc.has("geometry.r_outer") {
                return Err(invalid("geometry.shape", "sphere radii given for a cube"));
            }
            let default = ProbeGeometry::Sphere {
                r_inner: 0.035,
                r_outer: 0.055,
            }
            .equal_volume_cube();
            let (side, wall) = match default {
                ProbeGeometry::Cube { inner_side, wall } => (inner_side, wall),
                ProbeGeometry::Sphere { .. } => unreachable!(),
            };
            ProbeGeometry::Cube {
                inner_side: positive("geometry.cube_side", doc.num("geometry.cube_side", side)?)?,
                wall: positive("geometry.cube_wall", doc.num("geometry.cube_wall", wall)?)?,
            }
        }
        other => return Err(invalid("geometry.shape", format!("expected sphere or cube, got `{other}`"))),
    };
    Ok(g)
}

fn parse_materials(doc: &mut Doc) -> CResult<Materials> {
    let d = Materials::default();
    let emissivity = |doc: &mut Doc, key: &str, def: f64| -> CResult<f64> { fraction(key, doc.num(key, def)?) };
    let sink = doc.num("materials.sink_resistance_K_W", d.sink_resistance)?;
    if !(sink > 0.0) {
        return Err(invalid("materials.sink_resistance_K_W", format!("must be positive or inf, got {sink}")));
    }
    let mut specific_heat = d.specific_heat;
    for (key, name, value) in doc.take_prefix("materials.cp") {
        if name.contains('.') {
            return Err(invalid(&key, "material names cannot contain `.`"));
        }
        specific_heat.insert(name, positive(&key, parse_f64(&key, &value)?)?);
    }
    Ok(Materials {
        gap_conductivity: positive(
            "materials.gap_conductivity_W_mK",
            doc.num("materials.gap_conductivity_W_mK", d.gap_conductivity)?,
        )?,
        emissivity_gap_inner: emissivity(doc, "materials.emissivity_gap_inner", d.emissivity_gap_inner)?,
        emissivity_gap_outer: emissivity(doc, "materials.emissivity_gap_outer", d.emissivity_gap_outer)?,
        emissivity_surface: emissivity(doc, "materials.emissivity_surface", d.emissivity_surface)?,
        sink_resistance: sink,
        specific_heat,
    })
}

fn parse_link(key: &str, name: &str, value: &str) -> CResult<ThermalLink> {
    let f = fields(value);
    if f.len() != 4 {
        return Err(invalid(key, "expected `conduction|radiation, node_a, node_b, value`"));
    }
    let v = positive(key, parse_f64(key, f[3])?)?;
    match f[0] {
        "conduction" => Ok(ThermalLink::conduction(name, f[1], f[2], v)),
        "radiation" => Ok(ThermalLink::radiation(name, f[1], f[2], v)),
        other => Err(invalid(key, format!("unknown link kind `{other}`"))),
    }
}

fn parse_nodes(doc: &mut Doc) -> CResult<NodesConfig> {
    let initial_temperature = positive(
        "nodes.initial_temperature_K",
        doc.num("nodes.initial_temperature_K", 293.15)?,
    )?;
    let core_link_resistance = positive(
        "nodes.core_link_resistance_K_W",
        doc.num("nodes.core_link_resistance_K_W", 2.0)?,
    )?;
    let node_entries = doc.take_prefix("nodes.node");
    let link_entries = doc.take_prefix("nodes.link");
    let layout = match doc.text("nodes.layout", "standard").as_str() {
        "standard" => {
            if let Some((key, _, _)) = node_entries.first().or(link_entries.first()) {
                return Err(invalid(key, "custom nodes and links need nodes.layout = custom"));
            }
            NodeLayout::Standard
        }
        "custom" => {
            let mut nodes = Vec::new();
            for (key, id, value) in node_entries {
                let f = fields(&value);
                if f.len() != 2 {
                    return Err(invalid(&key, "expected `capacity_J_K, initial_K`"));
                }
                let c = positive(&key, parse_f64(&key, f[0])?)?;
                let t0 = positive(&key, parse_f64(&key, f[1])?)?;
                nodes.push(ThermalNode::new(id, c, t0));
            }
            let links = link_entries
                .iter()
                .map(|(key, name, value)| parse_link(key, name, value))
                .collect::<CResult<Vec<_>>>()?;
            if nodes.is_empty() {
                return Err(invalid("nodes.layout", "custom layout declares no nodes"));
            }
            NodeLayout::Custom { nodes, links }
        }
        other => return Err(invalid("nodes.layout", format!("expected standard or custom, got `{other}`"))),
    };
    Ok(NodesConfig {
        layout,
        initial_temperature,
        core_link_resistance,
        heat_node: doc.text("nodes.heat_node", CORE),
        dissipation_node: doc.text("nodes.dissipation_node", CORE),
    })
}

fn parse_sorbents(doc: &mut Doc) -> CResult<Vec<SorbentSpec>> {
    let mut grouped: BTreeMap<String, Vec<(String, String, String)>> = BTreeMap::new();
    let mut order = Vec::new();
    for (key, rest, value) in doc.take_prefix("sorbents") {
        let (name, field) = rest
            .split_once('.')
            .ok_or_else(|| invalid(&key, "expected sorbents.<name>.<field>"))?;
        if !grouped.contains_key(name) {
            order.push(name.to_string());
        }
        grouped
            .entry(name.to_string())
            .or_default()
            .push((key.clone(), field.to_string(), value));
    }
    let mut out = Vec::new();
    for name in order {
        let mut dhfd = None;
        let mut molar = None;
        let mut hydrates = Vec::new();
        for (key, field, value) in &grouped[&name] {
            match field.as_str() {
                "dHfd_kJ_mol" => dhfd = Some(parse_f64(key, value)?),
                "molar_mass_g_mol" => molar = Some(parse_f64(key, value)?),
                f if f.starts_with("hydrate.") => {
                    let x: u32 = f["hydrate.".len()..]
                        .parse()
                        .map_err(|_| invalid(key, "hydrate level must be a whole number"))?;
                    let v = fields(value);
                    if !(2..=3).contains(&v.len()) {
                        return Err(invalid(key, "expected `dHfh_kJ_mol, dHr_kJ_mol[, min_stable_C]`"));
                    }
                    let mut h = HydrateVariant::new(x, parse_f64(key, v[0])?, parse_f64(key, v[1])?);
                    if let Some(t) = v.get(2) {
                        h = h.with_min_stable_temperature(parse_f64(key, t)?);
                    }
                    hydrates.push(h);
                }
                _ => return Err(invalid(key, "unknown sorbent field")),
            }
        }
        let key = format!("sorbents.{name}");
        let dhfd = dhfd.ok_or_else(|| invalid(&key, "missing dHfd_kJ_mol"))?;
        let molar = molar.ok_or_else(|| invalid(&key, "missing molar_mass_g_mol"))?;
        hydrates.sort_by_key(|h| h.water_moles);
        let spec = SorbentSpec::new(name.clone(), dhfd, molar, hydrates).map_err(|e| invalid(&key, e.to_string()))?;
        out.push(spec);
    }
    Ok(out)
}

fn parse_tess(doc: &mut Doc, sorbents: &[SorbentSpec]) -> CResult<Option<TessConfig>> {
    let sorbent = doc.text("tess.sorbent", "none");
    let keys: Vec<String> = doc
        .entries
        .iter()
        .filter(|e| e.key.starts_with("tess.") && e.key != "tess.sorbent")
        .map(|e| e.key.clone())
        .collect();
    if sorbent == "none" {
        if let Some(k) = keys.first() {
            return Err(invalid(k, "tess settings given but tess.sorbent = none"));
        }
        return Ok(None);
    }
    let spec = lookup_sorbent(sorbents, &sorbent)?;
    let water_phase = match doc.text("tess.water_phase", "liquid").as_str() {
        "liquid" => WaterPhase::Liquid,
        "vapor" => WaterPhase::Vapor,
        other => return Err(invalid("tess.water_phase", format!("expected liquid or vapor, got `{other}`"))),
    };
    let delivery = match doc.text("tess.delivery", "flood").as_str() {
        "flood" => Delivery::Flood,
        "valve" => Delivery::Valve,
        other => return Err(invalid("tess.delivery", format!("expected flood or valve, got `{other}`"))),
    };
    let initial_hydration = non_negative("tess.initial_hydration", doc.num("tess.initial_hydration", 0.0)?)?;
    if initial_hydration > f64::from(spec.max_hydration()) {
        return Err(invalid(
            "tess.initial_hydration",
            format!("exceeds the top hydrate ({})", spec.max_hydration()),
        ));
    }
    Ok(Some(TessConfig {
        sorbent: spec.name.clone(),
        salt_mass_g: positive("tess.salt_mass_g", doc.num("tess.salt_mass_g", 25.0)?)?,
        water_mass_g: non_negative("tess.water_mass_g", doc.num("tess.water_mass_g", 25.0)?)?,
        water_temperature: positive("tess.water_temperature_K", doc.num("tess.water_temperature_K", 273.15)?)?,
        water_phase,
        delivery,
        rate_constant: non_negative(
            "tess.rate_constant_per_s",
            doc.num("tess.rate_constant_per_s", DEFAULT_RATE_CONSTANT)?,
        )?,
        degradation_coefficient: non_negative(
            "tess.degradation_coefficient",
            doc.num("tess.degradation_coefficient", water_phase.default_degradation())?,
        )?,
        initial_hydration,
        bed_link_resistance: positive(
            "tess.bed_link_resistance_K_W",
            doc.num("tess.bed_link_resistance_K_W", 1.0)?,
        )?,
        attach_node: doc.text("tess.attach_node", INNER_SHELL),
        charge_power: non_negative("tess.charge_power_W", doc.num("tess.charge_power_W", 0.0)?)?,
        charge_efficiency: fraction("tess.charge_efficiency", doc.num("tess.charge_efficiency", 0.8)?)?,
    }))
}

fn lookup_sorbent(custom: &[SorbentSpec], name: &str) -> CResult<SorbentSpec> {
    if let Some(s) = find_sorbent(custom, name) {
        return Ok(s.clone());
    }
    find_sorbent(&builtin_sorbents(), name)
        .cloned()
        .ok_or_else(|| ConfigError::UnknownSorbent(name.to_string()))
}

fn parse_controller(doc: &mut Doc) -> CResult<ControllerConfig> {
    let mode_text = doc.take("controller.mode").unwrap_or_default();
    let mode = ControlMode::parse(&mode_text).ok_or_else(|| {
        invalid("controller.mode", format!("expected passive, heater or tess_valve, got `{mode_text}`"))
    })?;
    let policy = ControlPolicy {
        mode,
        setpoint: positive("controller.setpoint_K", doc.num("controller.setpoint_K", 253.15)?)?,
        hysteresis_band: non_negative("controller.hysteresis_K", doc.num("controller.hysteresis_K", 1.0)?)?,
        heater_power: non_negative("controller.heater_power_W", doc.num("controller.heater_power_W", 1.5)?)?,
        max_feed_rate: non_negative("controller.max_feed_g_s", doc.num("controller.max_feed_g_s", 2e-3)?)?,
        energy_budget: non_negative(
            "controller.energy_budget_J",
            doc.num("controller.energy_budget_J", DEFAULT_HEATER_BUDGET)?,
        )?,
    };
    let mut sensors = Vec::new();
    for (key, name, value) in doc.take_prefix("controller.sensor") {
        let f = fields(&value);
        if f.len() != 3 {
            return Err(invalid(&key, "expected `bias_K, quantization_K, node`"));
        }
        let s = SensorModel::new(&name, parse_f64(&key, f[0])?, parse_f64(&key, f[1])?, f[2])
            .map_err(|e| invalid(&key, e.to_string()))?;
        sensors.push(s);
    }
    if sensors.is_empty() {
        sensors = vec![SensorModel::tmp36(CORE), SensorModel::bma250(CORE)];
    }
    let control_sensor = doc.text("controller.control_sensor", &sensors[0].name);
    if !sensors.iter().any(|s| s.name == control_sensor) {
        return Err(invalid("controller.control_sensor", format!("no sensor named `{control_sensor}`")));
    }
    Ok(ControllerConfig {
        policy,
        sensors,
        control_sensor,
    })
}

fn parse_table_inline(key: &str, value: &str) -> CResult<Vec<(f64, f64)>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (t, temp) = pair
                .split_once(':')
                .ok_or_else(|| invalid(key, format!("expected `t_s:T_K`, got `{pair}`")))?;
            Ok((parse_f64(key, t)?, parse_f64(key, temp)?))
        })
        .collect()
}

fn parse_environment(doc: &mut Doc, base: Option<&Path>) -> CResult<EnvironmentConfig> {
    let kind = doc.take("environment.kind").unwrap_or_default();
    let periodic = |doc: &mut Doc| -> CResult<(f64, f64, f64, f64)> {
        Ok((
            positive("environment.day_K", doc.require("environment.day_K", &kind)?)?,
            positive("environment.night_K", doc.require("environment.night_K", &kind)?)?,
            positive("environment.period_s", doc.require("environment.period_s", &kind)?)?,
            doc.num("environment.phase_s", 0.0)?,
        ))
    };
    let mut table_file = None;
    let profile = match kind.as_str() {
        "constant" => EnvironmentProfile::Constant(positive(
            "environment.temperature_K",
            doc.require("environment.temperature_K", "constant")?,
        )?),
        "square_wave" => {
            let (day, night, period, phase) = periodic(doc)?;
            EnvironmentProfile::SquareWave { day, night, period, phase }
        }
        "sinusoid" => {
            let (day, night, period, phase) = periodic(doc)?;
            EnvironmentProfile::Sinusoid { day, night, period, phase }
        }
        "table" => {
            let inline = doc.take("environment.table");
            let file = doc.take("environment.table_file");
            let samples = match (inline, file) {
                (Some(v), None) => parse_table_inline("environment.table", &v)?,
                (None, Some(f)) => {
                    let path = match base {
                        Some(dir) if Path::new(&f).is_relative() => dir.join(&f),
                        _ => PathBuf::from(&f),
                    };
                    let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::Io {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                    table_file = Some(path.display().to_string());
                    parse_table_csv(&text).map_err(|e| invalid("environment.table_file", e.to_string()))?
                }
                _ => {
                    return Err(invalid(
                        "environment.kind",
                        "table kind needs exactly one of environment.table or environment.table_file",
                    ))
                }
            };
            EnvironmentProfile::Table(samples)
        }
        other => {
            return Err(invalid(
                "environment.kind",
                format!("expected constant, square_wave, sinusoid or table, got `{other}`"),
            ))
        }
    };
    profile.validate().map_err(|e| invalid("environment.kind", e.to_string()))?;
    Ok(EnvironmentConfig {
        profile,
        table_file,
        solar_flux: non_negative("environment.solar_flux_W", doc.num("environment.solar_flux_W", 0.0)?)?,
        solar_node: doc.text("environment.solar_node", OUTER_SHELL),
    })
}

fn parse_budget(doc: &mut Doc) -> CResult<BudgetModel> {
    let tables = doc.text("budget.tables", "probe");
    let mut budget = match tables.as_str() {
        "probe" => BudgetModel::probe(),
        "none" => BudgetModel::default(),
        other => return Err(invalid("budget.tables", format!("expected probe or none, got `{other}`"))),
    };
    let mass = doc.take_prefix("budget.mass");
    if !mass.is_empty() {
        budget.mass = mass
            .into_iter()
            .map(|(key, name, value)| {
                let f = fields(&value);
                if f.len() != 5 {
                    return Err(invalid(&key, "expected `mass_g, deviation, max_g, node, material`"));
                }
                Ok(MassEntry {
                    name,
                    mass: non_negative(&key, parse_f64(&key, f[0])?)?,
                    deviation: positive(&key, parse_f64(&key, f[1])?)?,
                    max_mass: non_negative(&key, parse_f64(&key, f[2])?)?,
                    node: f[3].to_string(),
                    material: f[4].to_string(),
                })
            })
            .collect::<CResult<_>>()?;
    }
    let power = doc.take_prefix("budget.power");
    if !power.is_empty() {
        budget.power = power
            .into_iter()
            .map(|(key, name, value)| {
                let f = fields(&value);
                if f.len() != 4 {
                    return Err(invalid(&key, "expected `current_mA|-, voltage_V|-, power_mW, heat_lost_mW`"));
                }
                Ok(PowerEntry {
                    name,
                    current_ma: optional_field(&key, f[0])?,
                    voltage_v: optional_field(&key, f[1])?,
                    power_mw: non_negative(&key, parse_f64(&key, f[2])?)?,
                    heat_lost_mw: non_negative(&key, parse_f64(&key, f[3])?)?,
                })
            })
            .collect::<CResult<_>>()?;
    }
    if let Some(v) = doc.take("budget.listed_heat_lost_mW") {
        budget.listed_heat_lost_mw = optional_field("budget.listed_heat_lost_mW", &v)?;
    }
    if let Some(v) = doc.take("budget.listed_total_mass_g") {
        budget.listed_total_mass_g = optional_field("budget.listed_total_mass_g", &v)?;
    }
    Ok(budget)
}

fn parse_run(doc: &mut Doc, budget: &BudgetModel) -> CResult<RunConfig> {
    let duration = non_negative("run.duration_s", doc.require("run.duration_s", "every run")?)?;
    let default_dissipation = validate_budget(budget).default_dissipation_w();
    let d = SolverOptions::default();
    Ok(RunConfig {
        duration,
        output_interval: positive("run.output_interval_s", doc.num("run.output_interval_s", 10.0)?)?,
        threshold: positive("run.threshold_K", doc.num("run.threshold_K", 253.15)?)?,
        dissipation: {
            let v = doc.num("run.dissipation_W", default_dissipation)?;
            if !v.is_finite() {
                return Err(invalid("run.dissipation_W", "must be finite"));
            }
            v
        },
        rtol: positive("run.rtol", doc.num("run.rtol", d.rtol)?)?,
        atol: positive("run.atol", doc.num("run.atol", d.atol)?)?,
    })
}

/// Parse and validate a scenario document. Relative table paths resolve
/// against the working directory.
pub fn load_config(text: &str) -> CResult<ScenarioConfig> {
    load_config_in(text, None)
}

/// Read a scenario file; relative table paths resolve against its directory.
pub fn load_config_file(path: &Path) -> CResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_config_in(&text, path.parent())
}

pub fn load_config_in(text: &str, base: Option<&Path>) -> CResult<ScenarioConfig> {
    let mut doc = Doc::parse(text)?;
    let missing: Vec<String> = REQUIRED
        .iter()
        .filter(|k| !doc.has(k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::MissingKeys(missing));
    }
    let geometry = parse_geometry(&mut doc)?;
    let materials = parse_materials(&mut doc)?;
    let nodes = parse_nodes(&mut doc)?;
    let sorbents = parse_sorbents(&mut doc)?;
    let tess = parse_tess(&mut doc, &sorbents)?;
    let controller = parse_controller(&mut doc)?;
    let environment = parse_environment(&mut doc, base)?;
    let budget = parse_budget(&mut doc)?;
    let run = parse_run(&mut doc, &budget)?;
    doc.finish()?;

    let config = ScenarioConfig {
        geometry,
        materials,
        nodes,
        tess,
        sorbents,
        controller,
        environment,
        budget,
        run,
    };
    config.check_consistency()?;
    Ok(config)
}

impl ScenarioConfig {
    fn check_consistency(&self) -> CResult<()> {
        let mode = self.controller.policy.mode;
        let valve = self.tess.as_ref().map(|t| t.delivery) == Some(Delivery::Valve);
        match mode {
            ControlMode::Heater if self.controller.policy.heater_power <= 0.0 => {
                return Err(invalid("controller.heater_power_W", "heater mode needs a positive power"));
            }
            ControlMode::TessValve if !valve => {
                return Err(invalid("controller.mode", "tess_valve needs a sorbent with tess.delivery = valve"));
            }
            ControlMode::TessValve if self.controller.policy.max_feed_rate <= 0.0 => {
                return Err(invalid("controller.max_feed_g_s", "valve mode needs a positive feed rate"));
            }
            ControlMode::Passive | ControlMode::Heater if valve => {
                return Err(invalid("tess.delivery", "valve delivery needs controller.mode = tess_valve"));
            }
            _ => {}
        }
        // Building the network validates node references and geometry.
        self.build().map(|_| ())
    }

    /// Resolved sorbent spec for the configured bed.
    pub fn sorbent(&self) -> Option<SorbentSpec> {
        let t = self.tess.as_ref()?;
        lookup_sorbent(&self.sorbents, &t.sorbent).ok()
    }

    fn specific_heat(&self, key: &str, material: &str) -> CResult<f64> {
        self.materials
            .specific_heat
            .get(material)
            .copied()
            .ok_or_else(|| invalid(key, format!("no specific heat for material `{material}`")))
    }

    pub fn enclosure(&self) -> EnclosureModel {
        EnclosureModel {
            geometry: self.geometry,
            materials: EnclosureMaterials {
                gap_conductivity: self.materials.gap_conductivity,
                emissivity_gap_inner: self.materials.emissivity_gap_inner,
                emissivity_gap_outer: self.materials.emissivity_gap_outer,
                emissivity_surface: self.materials.emissivity_surface,
                sink_resistance: self.materials.sink_resistance,
                core_link_resistance: self.nodes.core_link_resistance,
            },
        }
    }

    /// Node capacities of the standard layout from the mass budget, J/K,
    /// including the bed node when a sorbent is configured.
    pub fn standard_capacities(&self) -> CResult<BTreeMap<String, f64>> {
        let mut caps: BTreeMap<String, f64> =
            [CORE, INNER_SHELL, OUTER_SHELL].iter().map(|n| (n.to_string(), 0.0)).collect();
        let bed_target = match &self.tess {
            Some(_) => BED_NODE.to_string(),
            None => INNER_SHELL.to_string(),
        };
        if let Some(t) = &self.tess {
            let cp = self.specific_heat("tess.salt_mass_g", "salt")?;
            caps.insert(BED_NODE.into(), t.salt_mass_g / 1000.0 * cp);
        }
        for e in &self.budget.mass {
            let key = format!("budget.mass.{}", e.name);
            let node = match e.node.as_str() {
                "-" => continue,
                "bed" => bed_target.clone(),
                n if n == CORE || n == INNER_SHELL || n == OUTER_SHELL => n.to_string(),
                other => return Err(invalid(&key, format!("unknown node `{other}`"))),
            };
            let cp = self.specific_heat(&key, &e.material)?;
            *caps.get_mut(&node).expect("node present") += e.mass / 1000.0 * cp;
        }
        for (node, c) in &caps {
            if *c <= 0.0 {
                return Err(invalid("budget.mass", format!("node `{node}` has no thermal mass")));
            }
        }
        Ok(caps)
    }

    /// Assemble the thermal network, including the bed node and dissipation.
    pub fn network(&self) -> CResult<ThermalNetwork> {
        let t0 = self.nodes.initial_temperature;
        let (mut nodes, mut links) = match &self.nodes.layout {
            NodeLayout::Standard => {
                let caps = self.standard_capacities()?;
                let model = self.enclosure();
                let nodes = [CORE, INNER_SHELL, OUTER_SHELL]
                    .iter()
                    .map(|id| ThermalNode::new(*id, caps[*id], t0))
                    .collect::<Vec<_>>();
                let links = model.links().map_err(|e| invalid("geometry.shape", e.to_string()))?;
                (nodes, links)
            }
            NodeLayout::Custom { nodes, links } => (nodes.clone(), links.clone()),
        };
        if let Some(t) = &self.tess {
            let cap = match &self.nodes.layout {
                NodeLayout::Standard => self.standard_capacities()?[BED_NODE],
                NodeLayout::Custom { .. } => {
                    t.salt_mass_g / 1000.0 * self.specific_heat("tess.salt_mass_g", "salt")?
                }
            };
            nodes.push(ThermalNode::new(BED_NODE, cap, t0));
            links.push(ThermalLink::conduction(
                "bed_mount",
                BED_NODE,
                &t.attach_node,
                t.bed_link_resistance,
            ));
        }
        let target = &self.nodes.dissipation_node;
        let node = nodes
            .iter_mut()
            .find(|n| &n.id == target)
            .ok_or_else(|| invalid("nodes.dissipation_node", format!("no node `{target}`")))?;
        node.dissipation += self.run.dissipation;
        ThermalNetwork::new(nodes, links).map_err(|e| invalid("nodes.layout", e.to_string()))
    }

    fn tess_setup(&self) -> CResult<Option<TessSetup>> {
        let Some(t) = &self.tess else { return Ok(None) };
        let spec = lookup_sorbent(&self.sorbents, &t.sorbent)?;
        let bed = SaltBed::new(
            spec,
            t.salt_mass_g,
            t.initial_hydration,
            t.rate_constant,
            t.degradation_coefficient,
        )
        .map_err(|e| invalid("tess.salt_mass_g", e.to_string()))?;
        let reservoir = WaterReservoir {
            mass_g: t.water_mass_g,
            temperature: t.water_temperature,
            phase: t.water_phase,
        };
        Ok(Some(TessSetup {
            initial: TessState::new(bed, reservoir).map_err(|e| invalid("tess.water_mass_g", e.to_string()))?,
            delivery: t.delivery,
            node: BED_NODE.into(),
            charge_power: t.charge_power,
            charge_efficiency: t.charge_efficiency,
        }))
    }

    /// Everything [`crate::simulation::simulate`] needs.
    pub fn build(&self) -> CResult<SimulationInput> {
        let network = self.network()?;
        let has = |id: &str| network.node_index(id).is_some();
        if !has(&self.nodes.heat_node) {
            return Err(invalid("nodes.heat_node", format!("no node `{}`", self.nodes.heat_node)));
        }
        if !has(&self.environment.solar_node) {
            return Err(invalid(
                "environment.solar_node",
                format!("no node `{}`", self.environment.solar_node),
            ));
        }
        if let Some(t) = &self.tess {
            if !has(&t.attach_node) || t.attach_node == BED_NODE {
                return Err(invalid("tess.attach_node", format!("no node `{}`", t.attach_node)));
            }
        }
        for s in &self.controller.sensors {
            if !has(&s.attach_node) {
                return Err(invalid(
                    &format!("controller.sensor.{}", s.name),
                    format!("no node `{}`", s.attach_node),
                ));
            }
        }
        let control_sensor = self
            .controller
            .sensors
            .iter()
            .position(|s| s.name == self.controller.control_sensor)
            .ok_or_else(|| invalid("controller.control_sensor", "unknown sensor"))?;
        Ok(SimulationInput {
            network,
            environment: self.environment.profile.clone(),
            policy: Some(self.controller.policy.clone()),
            heat_node: self.nodes.heat_node.clone(),
            sensors: self.controller.sensors.clone(),
            control_sensor,
            tess: self.tess_setup()?,
            solar_flux: self.environment.solar_flux,
            solar_node: self.environment.solar_node.clone(),
            duration: self.run.duration,
            output_interval: self.run.output_interval,
            solver: SolverOptions {
                rtol: self.run.rtol,
                atol: self.run.atol,
                ..SolverOptions::default()
            },
        })
    }

    /// Canonical document: every key, fixed order.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        match self.geometry {
            ProbeGeometry::Sphere { r_inner, r_outer } => {
                kv("geometry.shape", "sphere".into());
                kv("geometry.r_inner", r_inner.to_string());
                kv("geometry.r_outer", r_outer.to_string());
            }
            ProbeGeometry::Cube { inner_side, wall } => {
                kv("geometry.shape", "cube".into());
                kv("geometry.cube_side", inner_side.to_string());
                kv("geometry.cube_wall", wall.to_string());
            }
        }
        let m = &self.materials;
        kv("materials.gap_conductivity_W_mK", m.gap_conductivity.to_string());
        kv("materials.emissivity_gap_inner", m.emissivity_gap_inner.to_string());
        kv("materials.emissivity_gap_outer", m.emissivity_gap_outer.to_string());
        kv("materials.emissivity_surface", m.emissivity_surface.to_string());
        kv("materials.sink_resistance_K_W", m.sink_resistance.to_string());
        for (name, cp) in &m.specific_heat {
            kv(&format!("materials.cp.{name}"), cp.to_string());
        }

        let n = &self.nodes;
        match &n.layout {
            NodeLayout::Standard => kv("nodes.layout", "standard".into()),
            NodeLayout::Custom { nodes, links } => {
                kv("nodes.layout", "custom".into());
                for node in nodes {
                    kv(
                        &format!("nodes.node.{}", node.id),
                        format!("{}, {}", node.heat_capacity, node.temperature),
                    );
                }
                for l in links {
                    let (kind, v) = match l.kind {
                        LinkKind::Conduction { resistance } => ("conduction", resistance),
                        LinkKind::Radiation { coefficient } => ("radiation", coefficient),
                    };
                    kv(&format!("nodes.link.{}", l.name), format!("{kind}, {}, {}, {v}", l.a, l.b));
                }
            }
        }
        kv("nodes.initial_temperature_K", n.initial_temperature.to_string());
        kv("nodes.core_link_resistance_K_W", n.core_link_resistance.to_string());
        kv("nodes.heat_node", n.heat_node.clone());
        kv("nodes.dissipation_node", n.dissipation_node.clone());

        for spec in &self.sorbents {
            let p = format!("sorbents.{}", spec.name);
            kv(&format!("{p}.dHfd_kJ_mol"), spec.formation_enthalpy.to_string());
            kv(&format!("{p}.molar_mass_g_mol"), spec.molar_mass.to_string());
            for h in spec.hydrates() {
                let mut v = format!("{}, {}", h.formation_enthalpy, h.reaction_enthalpy);
                if let Some(t) = h.min_stable_temperature_c {
                    let _ = write!(v, ", {t}");
                }
                kv(&format!("{p}.hydrate.{}", h.water_moles), v);
            }
        }

        match &self.tess {
            None => kv("tess.sorbent", "none".into()),
            Some(t) => {
                kv("tess.sorbent", t.sorbent.clone());
                kv("tess.salt_mass_g", t.salt_mass_g.to_string());
                kv("tess.water_mass_g", t.water_mass_g.to_string());
                kv("tess.water_temperature_K", t.water_temperature.to_string());
                kv("tess.water_phase", t.water_phase.as_str().into());
                kv("tess.delivery", t.delivery.as_str().into());
                kv("tess.rate_constant_per_s", t.rate_constant.to_string());
                kv("tess.degradation_coefficient", t.degradation_coefficient.to_string());
                kv("tess.initial_hydration", t.initial_hydration.to_string());
                kv("tess.bed_link_resistance_K_W", t.bed_link_resistance.to_string());
                kv("tess.attach_node", t.attach_node.clone());
                kv("tess.charge_power_W", t.charge_power.to_string());
                kv("tess.charge_efficiency", t.charge_efficiency.to_string());
            }
        }

        let c = &self.controller;
        kv("controller.mode", c.policy.mode.as_str().into());
        kv("controller.setpoint_K", c.policy.setpoint.to_string());
        kv("controller.hysteresis_K", c.policy.hysteresis_band.to_string());
        kv("controller.heater_power_W", c.policy.heater_power.to_string());
        kv("controller.max_feed_g_s", c.policy.max_feed_rate.to_string());
        kv("controller.energy_budget_J", c.policy.energy_budget.to_string());
        for sensor in &c.sensors {
            kv(
                &format!("controller.sensor.{}", sensor.name),
                format!("{}, {}, {}", sensor.bias, sensor.quantization, sensor.attach_node),
            );
        }
        kv("controller.control_sensor", c.control_sensor.clone());

        let e = &self.environment;
        kv("environment.kind", e.profile.kind().into());
        match &e.profile {
            EnvironmentProfile::Constant(t) => kv("environment.temperature_K", t.to_string()),
            EnvironmentProfile::SquareWave { day, night, period, phase }
            | EnvironmentProfile::Sinusoid { day, night, period, phase } => {
                kv("environment.day_K", day.to_string());
                kv("environment.night_K", night.to_string());
                kv("environment.period_s", period.to_string());
                kv("environment.phase_s", phase.to_string());
            }
            EnvironmentProfile::Table(samples) => match &e.table_file {
                Some(f) => kv("environment.table_file", f.clone()),
                None => kv(
                    "environment.table",
                    samples
                        .iter()
                        .map(|(t, temp)| format!("{t}:{temp}"))
                        .collect::<Vec<_>>()
                        .join("; "),
                ),
            },
        }
        kv("environment.solar_flux_W", e.solar_flux.to_string());
        kv("environment.solar_node", e.solar_node.clone());

        let b = &self.budget;
        kv("budget.tables", "none".into());
        for m in &b.mass {
            kv(
                &format!("budget.mass.{}", m.name),
                format!("{}, {}, {}, {}, {}", m.mass, m.deviation, m.max_mass, m.node, m.material),
            );
        }
        for p in &b.power {
            kv(
                &format!("budget.power.{}", p.name),
                format!(
                    "{}, {}, {}, {}",
                    fmt_optional(p.current_ma),
                    fmt_optional(p.voltage_v),
                    p.power_mw,
                    p.heat_lost_mw
                ),
            );
        }
        kv("budget.listed_heat_lost_mW", fmt_optional(b.listed_heat_lost_mw));
        kv("budget.listed_total_mass_g", fmt_optional(b.listed_total_mass_g));

        let r = &self.run;
        kv("run.duration_s", r.duration.to_string());
        kv("run.output_interval_s", r.output_interval.to_string());
        kv("run.threshold_K", r.threshold.to_string());
        kv("run.dissipation_W", r.dissipation.to_string());
        kv("run.rtol", r.rtol.to_string());
        kv("run.atol", r.atol.to_string());
        s
    }

    /// Current value of a scalar numeric key in canonical form, or an error
    /// if the key does not exist or is not a single number.
    pub fn numeric_value(&self, key: &str) -> CResult<f64> {
        let emitted = self.emit();
        let line = emitted
            .lines()
            .find_map(|l| l.split_once(" = ").filter(|(k, _)| *k == key))
            .ok_or_else(|| invalid(key, "no such key in this scenario"))?;
        line.1
            .parse::<f64>()
            .map_err(|_| invalid(key, format!("`{}` is not a numeric setting", line.1)))
    }

    /// Copy of the config with one numeric key replaced, revalidated.
    pub fn with_numeric(&self, key: &str, value: f64) -> CResult<ScenarioConfig> {
        self.numeric_value(key)?;
        let text: String = self
            .emit()
            .lines()
            .map(|l| match l.split_once(" = ") {
                Some((k, _)) if k == key => format!("{k} = {value}\n"),
                _ => format!("{l}\n"),
            })
            .collect();
        load_config(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "\
geometry.shape = sphere
environment.kind = constant
environment.temperature_K = 241
run.duration_s = 3600
controller.mode = passive
";

    #[test]
    fn empty_document_lists_required_keys() {
        match load_config("# nothing\n") {
            Err(ConfigError::MissingKeys(k)) => assert_eq!(k, REQUIRED.map(String::from).to_vec()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minimal_defaults() {
        let c = load_config(MINIMAL).unwrap();
        assert_eq!(
            c.geometry,
            ProbeGeometry::Sphere {
                r_inner: 0.035,
                r_outer: 0.055
            }
        );
        assert!(c.tess.is_none());
        assert_eq!(c.run.dissipation, 0.09);
        assert_eq!(c.controller.control_sensor, "TMP36");
        let input = c.build().unwrap();
        assert_eq!(input.network.nodes().len(), 3);
    }

    #[test]
    fn negative_radius_names_key() {
        let doc = format!("{MINIMAL}geometry.r_inner = -0.01\n");
        match load_config(&doc) {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "geometry.r_inner"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_has_line() {
        let doc = format!("{MINIMAL}\ngeometry.colour = red\n");
        assert_eq!(
            load_config(&doc),
            Err(ConfigError::UnknownKey {
                line: 7,
                key: "geometry.colour".into()
            })
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(load_config("just words\n"), Err(ConfigError::Parse { line: 1, .. })));
        let dup = format!("{MINIMAL}run.duration_s = 5\n");
        assert!(matches!(load_config(&dup), Err(ConfigError::Parse { line: 6, .. })));
    }

    #[test]
    fn unknown_sorbent() {
        let doc = format!("{MINIMAL}tess.sorbent = Unobtainium\n");
        assert_eq!(load_config(&doc), Err(ConfigError::UnknownSorbent("Unobtainium".into())));
    }

    #[test]
    fn custom_sorbent_and_round_trip() {
        let doc = format!(
            "{MINIMAL}tess.sorbent = KX\n\
             sorbents.KX.dHfd_kJ_mol = -500\n\
             sorbents.KX.molar_mass_g_mol = 80\n\
             sorbents.KX.hydrate.2 = -1100, -100\n\
             sorbents.KX.hydrate.4 = -1700, -180, -40\n"
        );
        let c = load_config(&doc).unwrap();
        assert_eq!(c.sorbent().unwrap().max_hydration(), 4);
        let again = load_config(&c.emit()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.emit(), c.emit());
    }

    #[test]
    fn custom_layout() {
        let doc = "\
geometry.shape = sphere
environment.kind = table
environment.table = 0:250; 3600:200
run.duration_s = 60
controller.mode = passive
nodes.layout = custom
nodes.node.core = 50, 290
nodes.node.skin = 80, 290
nodes.link.a = conduction, core, skin, 3
nodes.link.b = radiation, skin, ambient, 1e-10
environment.solar_node = skin
";
        let c = load_config(doc).unwrap();
        assert_eq!(c.build().unwrap().network.nodes().len(), 2);
        assert_eq!(load_config(&c.emit()).unwrap(), c);
        let bad = doc.replace("nodes.link.a = conduction, core, skin, 3\n", "");
        assert!(load_config(&bad).is_err());
    }

    #[test]
    fn mode_consistency() {
        let valve = format!("{MINIMAL}tess.sorbent = LiCl\ntess.delivery = valve\n");
        match load_config(&valve) {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "tess.delivery"),
            other => panic!("{other:?}"),
        }
        let fixed = valve.replace("controller.mode = passive", "controller.mode = tess_valve");
        assert!(load_config(&fixed).is_ok());
        let heater = MINIMAL.replace("passive", "heater") + "controller.heater_power_W = 0\n";
        assert!(load_config(&heater).is_err());
    }

    #[test]
    fn numeric_override() {
        let doc = format!("{MINIMAL}tess.sorbent = LiCl\n");
        let c = load_config(&doc).unwrap();
        assert_eq!(c.numeric_value("tess.salt_mass_g").unwrap(), 25.0);
        let big = c.with_numeric("tess.salt_mass_g", 50.0).unwrap();
        assert_eq!(big.tess.as_ref().unwrap().salt_mass_g, 50.0);
        assert!(c.numeric_value("tess.water_phase").is_err());
        assert!(c.numeric_value("tess.nope").is_err());
    }

    #[test]
    fn standard_capacities_from_budget() {
        let doc = format!("{MINIMAL}tess.sorbent = LiCl\n");
        let c = load_config(&doc).unwrap();
        let caps = c.standard_capacities().unwrap();
        // 178 + 5 g of structure at 1400 J/(kg·K).
        assert!((caps[OUTER_SHELL] - 0.183 * 1400.0).abs() < 1e-9);
        // Container plus 25 g of salt.
        assert!((caps[BED_NODE] - (0.021 * 1400.0 + 0.025 * 1130.0)).abs() < 1e-9);
    }
}
