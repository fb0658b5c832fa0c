//! Mass and power budgets of the probe, with consistency reporting.

use std::fmt::Write as _;

/// Slack allowed on `max ≥ mass × deviation` for values printed as whole grams.
pub const ROUNDING_TOLERANCE_G: f64 = 0.5;

/// Entries whose max mass exceeds this multiple of `mass × deviation` are
/// treated as outliers when reconciling the total.
const OUTLIER_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MassEntry {
    pub name: String,
    /// Nominal mass, g.
    pub mass: f64,
    pub deviation: f64,
    /// Listed maximum mass, g.
    pub max_mass: f64,
    /// Thermal node the mass belongs to (`core`, `inner_shell`,
    /// `outer_shell`, `bed`), or `-` for report-only entries.
    pub node: String,
    /// Key into the specific-heat table (`structure`, `electronics`, ...).
    pub material: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerEntry {
    pub name: String,
    pub current_ma: Option<f64>,
    pub voltage_v: Option<f64>,
    pub power_mw: f64,
    pub heat_lost_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BudgetModel {
    pub mass: Vec<MassEntry>,
    pub power: Vec<PowerEntry>,
    /// Heat-lost total as printed in the power budget, mW.
    pub listed_heat_lost_mw: Option<f64>,
    /// Max-mass total as printed in the mass budget, g.
    pub listed_total_mass_g: Option<f64>,
}

fn mass(name: &str, m: f64, dev: f64, max: f64, node: &str, material: &str) -> MassEntry {
    MassEntry {
        name: name.into(),
        mass: m,
        deviation: dev,
        max_mass: max,
        node: node.into(),
        material: material.into(),
    }
}

fn power(name: &str, ma: Option<f64>, v: Option<f64>, mw: f64, lost: f64) -> PowerEntry {
    PowerEntry {
        name: name.into(),
        current_ma: ma,
        voltage_v: v,
        power_mw: mw,
        heat_lost_mw: lost,
    }
}

impl BudgetModel {
    /// The probe's published mass and power budgets, values verbatim.
    pub fn probe() -> Self {
        Self {
            mass: vec![
                mass("outer_sphere", 178.0, 1.2, 210.0, "outer_shell", "structure"),
                mass("inner_sphere", 102.0, 1.2, 120.0, "inner_shell", "structure"),
                mass("connector_ring", 5.0, 1.1, 6.0, "outer_shell", "structure"),
                mass("battery_holders", 19.0, 1.1, 200.0, "core", "structure"),
                mass("tcm_container", 21.0, 1.1, 23.0, "bed", "structure"),
                mass("microprocessor", 4.0, 1.1, 5.0, "core", "electronics"),
                mass("sd_card_module", 4.0, 1.1, 5.0, "core", "electronics"),
                mass("uhf_radio", 7.0, 1.1, 8.0, "core", "electronics"),
                mass("bma250", 4.0, 1.1, 4.0, "core", "electronics"),
                mass("tmp36", 2.0, 1.1, 2.0, "core", "electronics"),
                mass("battery", 25.0, 1.3, 33.0, "core", "battery"),
                mass("insulation", 3.0, 1.1, 3.0, "inner_shell", "insulation"),
                mass("tcm_salt", 25.0, 1.2, 30.0, "-", "salt"),
            ],
            power: vec![
                power("processor", Some(1.2), Some(3.5), 4.2, 0.42),
                power("sd_card", Some(100.0), Some(3.5), 350.0, 35.0),
                power("sensor_board", Some(0.14), Some(3.5), 0.49, 0.0),
                power("tmp36", Some(0.05), Some(3.5), 0.175, 0.0),
                power("battery", None, None, 355.0, 53.0),
            ],
            listed_heat_lost_mw: Some(90.0),
            listed_total_mass_g: Some(470.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassViolation {
    pub name: String,
    pub max_mass: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub nominal_mass_g: f64,
    /// Sum of the max-mass column as given, g.
    pub max_mass_g: f64,
    /// Max-mass total with outliers replaced by `mass × deviation`, g.
    pub reconciled_max_mass_g: f64,
    pub listed_total_mass_g: Option<f64>,
    /// Entries whose max mass is below `mass × deviation` beyond rounding.
    pub violations: Vec<MassViolation>,
    /// Entries whose max mass is implausibly far above `mass × deviation`.
    pub outliers: Vec<MassViolation>,
    pub heat_lost_mw: f64,
    pub listed_heat_lost_mw: Option<f64>,
    pub power_mw: f64,
}

impl BudgetReport {
    /// Default internal dissipation, W: the listed heat-lost total when
    /// present, the computed one otherwise.
    pub fn default_dissipation_w(&self) -> f64 {
        self.listed_heat_lost_mw.unwrap_or(self.heat_lost_mw) / 1000.0
    }

    /// Whether the mass ceiling holds using the reconciled total.
    pub fn within_mass_ceiling(&self) -> bool {
        match self.listed_total_mass_g {
            Some(ceiling) => self.reconciled_max_mass_g <= ceiling + ROUNDING_TOLERANCE_G,
            None => true,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mass nominal            {:.1} g", self.nominal_mass_g);
        let _ = writeln!(s, "mass max (as listed)    {:.1} g", self.max_mass_g);
        let _ = writeln!(s, "mass max (reconciled)   {:.1} g", self.reconciled_max_mass_g);
        if let Some(l) = self.listed_total_mass_g {
            let verdict = if self.within_mass_ceiling() { "ok" } else { "EXCEEDED" };
            let _ = writeln!(s, "mass ceiling            {l:.1} g ({verdict})");
        }
        for v in &self.violations {
            let _ = writeln!(
                s,
                "  inconsistent: {} max {:.1} g < mass x deviation {:.2} g",
                v.name, v.max_mass, v.expected
            );
        }
        for v in &self.outliers {
            let _ = writeln!(
                s,
                "  outlier: {} max {:.1} g vs mass x deviation {:.2} g",
                v.name, v.max_mass, v.expected
            );
        }
        let _ = writeln!(s, "power consumed          {:.3} mW", self.power_mw);
        let _ = writeln!(s, "heat lost (computed)    {:.3} mW", self.heat_lost_mw);
        if let Some(l) = self.listed_heat_lost_mw {
            let _ = writeln!(s, "heat lost (listed)      {l:.3} mW");
        }
        let _ = writeln!(s, "default dissipation     {:.4} W", self.default_dissipation_w());
        s
    }
}

pub fn validate_budget(budget: &BudgetModel) -> BudgetReport {
    let mut violations = Vec::new();
    let mut outliers = Vec::new();
    let mut reconciled = 0.0;
    for e in &budget.mass {
        let expected = e.mass * e.deviation;
        let entry = || MassViolation {
            name: e.name.clone(),
            max_mass: e.max_mass,
            expected,
        };
        if e.max_mass + ROUNDING_TOLERANCE_G < expected {
            violations.push(entry());
        }
        if e.max_mass > OUTLIER_FACTOR * expected {
            outliers.push(entry());
            reconciled += expected;
        } else {
            reconciled += e.max_mass;
        }
    }
    BudgetReport {
        nominal_mass_g: budget.mass.iter().map(|e| e.mass).sum(),
        max_mass_g: budget.mass.iter().map(|e| e.max_mass).sum(),
        reconciled_max_mass_g: reconciled,
        listed_total_mass_g: budget.listed_total_mass_g,
        violations,
        outliers,
        heat_lost_mw: budget.power.iter().map(|p| p.heat_lost_mw).sum(),
        listed_heat_lost_mw: budget.listed_heat_lost_mw,
        power_mw: budget.power.iter().map(|p| p.power_mw).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_power_budget() {
        let r = validate_budget(&BudgetModel::probe());
        assert!((r.heat_lost_mw - 88.42).abs() < 1e-9);
        assert_eq!(r.listed_heat_lost_mw, Some(90.0));
        assert_eq!(r.default_dissipation_w(), 0.09);
    }

    #[test]
    fn empty_power_list() {
        let r = validate_budget(&BudgetModel::default());
        assert_eq!(r.heat_lost_mw, 0.0);
        assert_eq!(r.default_dissipation_w(), 0.0);
    }

    #[test]
    fn probe_mass_budget() {
        let r = validate_budget(&BudgetModel::probe());
        assert_eq!(r.nominal_mass_g, 399.0);
        assert_eq!(r.max_mass_g, 649.0);
        assert_eq!(r.outliers.len(), 1);
        assert_eq!(r.outliers[0].name, "battery_holders");
        assert!((r.reconciled_max_mass_g - 469.9).abs() < 1e-9);
        assert_eq!(r.reconciled_max_mass_g.round(), 470.0);
        assert!(r.within_mass_ceiling());
        let names: Vec<&str> = r.violations.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, vec!["outer_sphere", "inner_sphere"]);
    }
}
