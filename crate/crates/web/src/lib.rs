//! Browser bindings: scenario runs, the sorbent table and the geometry
//! comparison, each returned as a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tess_core::kelvin_to_celsius;
use tess_core::scenario::{load_config, run_scenario};
use tess_core::thermal_network::{compare_geometries, EnclosureModel, ProbeGeometry};
use tess_core::thermo_props::{builtin_sorbents, capacity_table};

/// Bundled scenarios offered by the page, as (name, document) pairs.
pub const PRESETS: [(&str, &str); 5] = [
    ("insulation only", include_str!("../../../scenarios/freezer_passive.cfg")),
    ("kapton heater", include_str!("../../../scenarios/freezer_heater.cfg")),
    ("salt hydration", include_str!("../../../scenarios/freezer_tess.cfg")),
    ("lunar night", include_str!("../../../scenarios/lunar_night.cfg")),
    ("fast asteroid", include_str!("../../../scenarios/asteroid.cfg")),
];

fn round(x: f64, digits: i32) -> f64 {
    let p = 10f64.powi(digits);
    (x * p).round() / p
}

pub fn presets() -> String {
    let list: Vec<Value> = PRESETS.iter().map(|(n, t)| json!({ "name": n, "config": t })).collect();
    Value::Array(list).to_string()
}

/// Run a scenario document. Temperatures come back in °C.
pub fn simulate(config: &str) -> Result<String, String> {
    let cfg = load_config(config).map_err(|e| e.to_string())?;
    let out = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let series = &out.result.series;
    let col = |f: &dyn Fn(&tess_core::simulation::Sample) -> f64| -> Vec<f64> {
        series.samples.iter().map(f).collect()
    };
    let sensors: Vec<Value> = series
        .sensor_names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            json!({
                "name": name,
                "values": col(&|s| round(kelvin_to_celsius(s.sensed[k]), 3)),
            })
        })
        .collect();
    let summary: Vec<Value> = out
        .summary
        .sensors
        .iter()
        .map(|s| {
            json!({
                "sensor": s.sensor,
                "steady_c": s.steady.map(|st| round(kelvin_to_celsius(st.temperature), 2)),
                "hold_min": round(s.time_above_threshold / 60.0, 1),
                "area_k_min": round(s.area_above_ambient, 1),
            })
        })
        .collect();
    Ok(json!({
        "time_h": col(&|s| s.time / 3600.0),
        "ambient_c": col(&|s| round(kelvin_to_celsius(s.ambient), 3)),
        "sensors": sensors,
        "threshold_c": kelvin_to_celsius(cfg.run.threshold),
        "summary": summary,
        "heat_released_kj": out.result.tess_final.as_ref().map(|t| round(t.heat_released_j / 1000.0, 2)),
        "heater_energy_kj": round(out.result.heater_energy / 1000.0, 2),
        "audit_relative": out.result.audit.relative(),
    })
    .to_string())
}

pub fn sorbent_table() -> String {
    let rows: Vec<Value> = capacity_table(&builtin_sorbents())
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "water_moles": r.water_moles,
                "reaction_kj_mol": r.reaction_enthalpy,
                "wh_per_kg": round(r.energy_wh_per_kg, 1),
            })
        })
        .collect();
    Value::Array(rows).to_string()
}

/// Steady core temperature of the configured sphere and its equal-volume cube.
pub fn geometry(config: &str) -> Result<String, String> {
    let cfg = load_config(config).map_err(|e| e.to_string())?;
    let sphere = cfg.enclosure();
    if !matches!(sphere.geometry, ProbeGeometry::Sphere { .. }) {
        return Err("the comparison starts from a sphere".into());
    }
    let cube = EnclosureModel {
        geometry: sphere.geometry.equal_volume_cube(),
        ..sphere
    };
    let boundary = cfg.environment.profile.bounds().0;
    let cmp = compare_geometries(&sphere, &cube, cfg.run.dissipation, boundary).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = cmp
        .rows
        .iter()
        .map(|r| {
            json!({
                "shape": r.label,
                "core_c": round(kelvin_to_celsius(r.core_temperature), 3),
                "loss_w_per_k": round(r.loss_conductance, 5),
                "outer_area_m2": round(r.outer_area, 5),
            })
        })
        .collect();
    Ok(json!({ "boundary_c": kelvin_to_celsius(boundary), "dissipation_w": cmp.dissipation, "rows": rows }).to_string())
}

#[wasm_bindgen(js_name = presets)]
pub fn presets_js() -> String {
    presets()
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(config: &str) -> Result<String, JsError> {
    simulate(config).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sorbentTable)]
pub fn sorbent_table_js() -> String {
    sorbent_table()
}

#[wasm_bindgen(js_name = geometry)]
pub fn geometry_js(config: &str) -> Result<String, JsError> {
    geometry(config).map_err(|e| JsError::new(&e))
}
