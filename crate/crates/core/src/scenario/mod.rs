//! Scenario documents, budgets, run summaries, comparisons and sweeps.

mod budget;
mod config;
mod summary;

pub use budget::{
    validate_budget, BudgetModel, BudgetReport, MassEntry, MassViolation, PowerEntry, ROUNDING_TOLERANCE_G,
};
pub use config::{
    load_config, load_config_file, load_config_in, ControllerConfig, EnvironmentConfig, Materials, NodeLayout,
    NodesConfig, RunConfig, ScenarioConfig, TessConfig, BED_NODE,
};
pub use summary::{
    compute_summary, SensorSummary, SteadyState, Summary, STEADY_RATE_K_PER_MIN, STEADY_WINDOW_MIN,
};

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::simulation::{simulate, SimulationResult};
use crate::{kelvin_to_celsius, ConfigError, Error, Result};

/// A finished run with its summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub result: SimulationResult,
    pub summary: Summary,
}

impl RunOutcome {
    /// Summary listing plus the energy audit and solver counters.
    pub fn report(&self) -> String {
        let mut s = self.summary.render();
        let a = &self.result.audit;
        let _ = writeln!(s, "audit.stored_J = {}", a.stored);
        let _ = writeln!(s, "audit.source_J = {}", a.source);
        let _ = writeln!(s, "audit.boundary_J = {}", a.boundary);
        let _ = writeln!(s, "audit.residual_J = {}", a.residual);
        let _ = writeln!(s, "audit.relative = {}", a.relative());
        let _ = writeln!(s, "heater_energy_J = {}", self.result.heater_energy);
        if let Some(t) = &self.result.tess_final {
            let _ = writeln!(s, "tess.heat_released_J = {}", t.heat_released_j);
            let _ = writeln!(s, "tess.water_absorbed_g = {}", t.water_absorbed_g);
            let _ = writeln!(s, "tess.final_hydration = {}", t.bed.mean_hydration);
            let _ = writeln!(s, "tess.charge_energy_J = {}", t.charge_energy_j);
            let _ = writeln!(s, "tess.feed_clipped_events = {}", self.result.feed_clipped_events);
        }
        let st = &self.result.stats;
        let _ = writeln!(s, "solver.accepted = {}", st.accepted);
        let _ = writeln!(s, "solver.rejected = {}", st.rejected);
        let _ = writeln!(s, "solver.implicit_steps = {}", st.implicit_steps);
        s
    }

    /// Write `series.csv` and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("series.csv"), self.result.series.to_csv())?;
        std::fs::write(dir.join("summary.txt"), self.report())
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutcome> {
    let input = config.build()?;
    let result = simulate(&input)?;
    let summary = compute_summary(&result.series, config.run.threshold)?;
    Ok(RunOutcome { result, summary })
}

/// One (case, sensor) line of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub case: String,
    pub sensor: String,
    pub steady_state_c: Option<f64>,
    pub time_to_steady_min: Option<f64>,
    pub time_above_threshold_min: f64,
    pub area_above_ambient_k_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Cases that failed, with the error text.
    pub failures: Vec<(String, String)>,
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "not_reached".into(), |x| format!("{x:.digits$}"))
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "case,sensor,steady_state_C,time_to_steady_min,time_above_threshold_min,area_above_ambient_K_min\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.case,
                r.sensor,
                opt(r.steady_state_c, 3),
                opt(r.time_to_steady_min, 2),
                format_args!("{:.2}", r.time_above_threshold_min),
                format_args!("{:.2}", r.area_above_ambient_k_min),
            );
        }
        s
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "{:<16} {:<10} {:>10} {:>12} {:>14} {:>12}\n",
            "case", "sensor", "steady °C", "steady min", "above thr min", "area K·min"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16} {:<10} {:>10} {:>12} {:>14.1} {:>12.1}",
                r.case,
                r.sensor,
                opt(r.steady_state_c, 2),
                opt(r.time_to_steady_min, 1),
                r.time_above_threshold_min,
                r.area_above_ambient_k_min
            );
        }
        for (case, err) in &self.failures {
            let _ = writeln!(s, "{case}: FAILED: {err}");
        }
        s
    }

    pub fn row(&self, case: &str, sensor: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.case == case && r.sensor == sensor)
    }
}

fn rows_for(case: &str, summary: &Summary) -> Vec<ComparisonRow> {
    summary
        .sensors
        .iter()
        .map(|s| ComparisonRow {
            case: case.to_string(),
            sensor: s.sensor.clone(),
            steady_state_c: s.steady.map(|st| kelvin_to_celsius(st.temperature)),
            time_to_steady_min: s.steady.map(|st| st.reached_at / 60.0),
            time_above_threshold_min: s.time_above_threshold / 60.0,
            area_above_ambient_k_min: s.area_above_ambient,
        })
        .collect()
}

/// Run labelled cases in parallel. Rows follow the input order, one per
/// (case, sensor); a failing case is reported and the rest still run.
pub fn run_comparison(cases: &[(String, ScenarioConfig)]) -> Result<ComparisonReport> {
    if cases.is_empty() {
        return Err(Error::InvalidInput("comparison needs at least one case".into()));
    }
    let outcomes: Vec<Result<RunOutcome>> = cases.par_iter().map(|(_, c)| run_scenario(c)).collect();
    let mut report = ComparisonReport {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for ((label, _), outcome) in cases.iter().zip(outcomes) {
        match outcome {
            Ok(o) => report.rows.extend(rows_for(label, &o.summary)),
            Err(e) => report.failures.push((label.clone(), e.to_string())),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: std::result::Result<Summary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "{},sensor,steady_state_K,time_to_steady_s,time_above_threshold_s,area_above_ambient_K_min\n",
            self.parameter
        );
        for p in &self.points {
            match &p.outcome {
                Ok(summary) => {
                    for x in &summary.sensors {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            p.value,
                            x.sensor,
                            x.steady.map_or("not_reached".into(), |st| st.temperature.to_string()),
                            x.steady.map_or("not_reached".into(), |st| st.reached_at.to_string()),
                            x.time_above_threshold,
                            x.area_above_ambient
                        );
                    }
                }
                Err(e) => {
                    let _ = writeln!(s, "{},FAILED,{},,,", p.value, e.replace(',', ";"));
                }
            }
        }
        s
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }
}

/// Run `base` once per value of a numeric key. The key and every value are
/// validated before any run starts; results keep the input order.
pub fn sweep(base: &ScenarioConfig, parameter: &str, values: &[f64], parallel: bool) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one value".into()));
    }
    base.numeric_value(parameter)?;
    let configs = values
        .iter()
        .map(|&v| base.with_numeric(parameter, v))
        .collect::<std::result::Result<Vec<_>, ConfigError>>()?;
    let run = |(v, c): (&f64, &ScenarioConfig)| SweepPoint {
        value: *v,
        outcome: run_scenario(c).map(|o| o.summary).map_err(|e| e.to_string()),
    };
    let points = if parallel {
        values.par_iter().zip(configs.par_iter()).map(run).collect()
    } else {
        values.iter().zip(configs.iter()).map(run).collect()
    };
    Ok(SweepReport {
        parameter: parameter.to_string(),
        points,
    })
}
