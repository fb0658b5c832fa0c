//! Thermostat logic for the resistive heater and the TESS feed valve, plus
//! the sensor model whose reading the thermostat acts on.

use crate::{Error, Result};

/// Controller sampling period, s.
pub const CONTROL_PERIOD: f64 = 10.0;

/// Usable battery energy for the heater: 25 g at 140 Wh/kg, 85 % discharge
/// efficiency, J.
pub const DEFAULT_HEATER_BUDGET: f64 = 0.025 * 140.0 * 0.85 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    Passive,
    Heater,
    TessValve,
}

impl ControlMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::Passive => "passive",
            ControlMode::Heater => "heater",
            ControlMode::TessValve => "tess_valve",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "passive" => Some(ControlMode::Passive),
            "heater" => Some(ControlMode::Heater),
            "tess_valve" => Some(ControlMode::TessValve),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPolicy {
    pub mode: ControlMode,
    /// K
    pub setpoint: f64,
    /// Full width of the dead band, K.
    pub hysteresis_band: f64,
    /// W
    pub heater_power: f64,
    /// g/s
    pub max_feed_rate: f64,
    /// J
    pub energy_budget: f64,
}

impl ControlPolicy {
    pub fn passive() -> Self {
        Self {
            mode: ControlMode::Passive,
            setpoint: 253.15,
            hysteresis_band: 1.0,
            heater_power: 0.0,
            max_feed_rate: 0.0,
            energy_budget: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str, v: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} = {v}")))
            }
        };
        check(self.setpoint > 0.0 && self.setpoint.is_finite(), "setpoint", self.setpoint)?;
        check(
            self.hysteresis_band >= 0.0 && self.hysteresis_band.is_finite(),
            "hysteresis band",
            self.hysteresis_band,
        )?;
        check(
            self.heater_power >= 0.0 && self.heater_power.is_finite(),
            "heater power",
            self.heater_power,
        )?;
        check(
            self.max_feed_rate >= 0.0 && self.max_feed_rate.is_finite(),
            "max feed rate",
            self.max_feed_rate,
        )?;
        check(self.energy_budget >= 0.0, "energy budget", self.energy_budget)
    }
}

/// What the thermostat can see of the actuated plant besides temperature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantStatus {
    /// Heater energy still available, J.
    pub budget_remaining: f64,
    pub reservoir_empty: bool,
    pub bed_saturated: bool,
}

/// One bang-bang decision. Switches on below `setpoint − band/2`, off above
/// `setpoint + band/2`, holds in between.
pub fn control_step(policy: &ControlPolicy, sensed: f64, previous: bool, plant: PlantStatus) -> bool {
    let blocked = match policy.mode {
        ControlMode::Passive => return false,
        ControlMode::Heater => plant.budget_remaining <= 0.0,
        ControlMode::TessValve => plant.reservoir_empty || plant.bed_saturated,
    };
    if blocked {
        return false;
    }
    let half = 0.5 * policy.hysteresis_band;
    if sensed < policy.setpoint - half {
        true
    } else if sensed > policy.setpoint + half {
        false
    } else {
        previous
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub name: String,
    /// Additive offset, K.
    pub bias: f64,
    /// Reading resolution, K; 0 means continuous.
    pub quantization: f64,
    pub attach_node: String,
}

impl SensorModel {
    pub fn new(name: &str, bias: f64, quantization: f64, attach_node: &str) -> Result<Self> {
        if !(quantization >= 0.0 && quantization.is_finite()) || !bias.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sensor {name}: bias {bias} K, quantization {quantization} K"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            bias,
            quantization,
            attach_node: attach_node.to_string(),
        })
    }

    /// Analog TMP36 on the electronics: reads warm.
    pub fn tmp36(attach_node: &str) -> Self {
        Self::new("TMP36", 2.0, 0.0, attach_node).expect("valid preset")
    }

    /// BMA250 accelerometer die sensor: 0.5 K steps, reads slightly cold.
    pub fn bma250(attach_node: &str) -> Self {
        Self::new("BMA250", -1.0, 0.5, attach_node).expect("valid preset")
    }

    pub fn sense(&self, true_temperature: f64) -> f64 {
        let raw = true_temperature + self.bias;
        if self.quantization > 0.0 {
            (raw / self.quantization).round() * self.quantization
        } else {
            raw
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy(mode: ControlMode) -> ControlPolicy {
        ControlPolicy {
            mode,
            setpoint: 253.15,
            hysteresis_band: 1.0,
            heater_power: 2.0,
            max_feed_rate: 1e-3,
            energy_budget: DEFAULT_HEATER_BUDGET,
        }
    }

    fn funded() -> PlantStatus {
        PlantStatus {
            budget_remaining: 1.0,
            ..PlantStatus::default()
        }
    }

    #[test]
    fn default_budget() {
        assert!((DEFAULT_HEATER_BUDGET - 10_710.0).abs() < 1e-9);
    }

    #[test]
    fn sensing() {
        let ideal = SensorModel::new("x", 0.0, 0.0, "core").unwrap();
        assert_eq!(ideal.sense(245.123), 245.123);
        assert_eq!(SensorModel::tmp36("core").sense(245.0), 247.0);
        let q = SensorModel::new("q", 0.0, 0.5, "core").unwrap();
        assert_eq!(q.sense(245.3), 245.5);
        assert!(SensorModel::new("bad", 0.0, -1.0, "core").is_err());
    }

    #[test]
    fn bang_bang() {
        let p = policy(ControlMode::Heater);
        assert!(control_step(&p, 251.0, false, funded()));
        assert!(control_step(&p, 253.15, true, funded()));
        assert!(!control_step(&p, 253.15, false, funded()));
        assert!(!control_step(&p, 253.7, true, funded()));
        assert!(!control_step(&p, 200.0, true, PlantStatus::default()));
    }

    #[test]
    fn valve_interlocks() {
        let p = policy(ControlMode::TessValve);
        let ok = PlantStatus::default();
        assert!(control_step(&p, 240.0, false, ok));
        let empty = PlantStatus {
            reservoir_empty: true,
            ..ok
        };
        assert!(!control_step(&p, 240.0, true, empty));
        let full = PlantStatus {
            bed_saturated: true,
            ..ok
        };
        assert!(!control_step(&p, 240.0, true, full));
    }

    #[test]
    fn passive_never_acts() {
        let p = ControlPolicy::passive();
        assert!(!control_step(&p, 1.0, true, funded()));
    }

    #[test]
    fn policy_validation() {
        let mut p = policy(ControlMode::Heater);
        p.hysteresis_band = -1.0;
        assert!(p.validate().is_err());
        assert!(policy(ControlMode::Heater).validate().is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Between any two toggles the sensed signal must cross the whole band.
            #[test]
            fn toggles_need_full_excursion(
                band in 0.1..5.0f64,
                steps in proptest::collection::vec(-0.3..0.3f64, 10..400),
            ) {
                let mut p = policy(ControlMode::Heater);
                p.hysteresis_band = band;
                let mut t = p.setpoint;
                let mut on = false;
                let mut last_toggle: Option<f64> = None;
                for dt in steps {
                    t += dt;
                    let next = control_step(&p, t, on, funded());
                    if next != on {
                        if let Some(prev) = last_toggle {
                            prop_assert!((t - prev).abs() >= band);
                        }
                        last_toggle = Some(t);
                        on = next;
                    }
                }
            }
        }
    }
}
