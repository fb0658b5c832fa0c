//! Per-sensor figures of merit computed from a sampled series alone.

use std::fmt::Write as _;

use crate::simulation::TimeSeries;
use crate::{Error, Result};

/// Largest |dT/dt| still counted as steady, K/min.
pub const STEADY_RATE_K_PER_MIN: f64 = 0.01;
/// Minimum length of the trailing steady window, min.
pub const STEADY_WINDOW_MIN: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Mean reading over the window, K.
    pub temperature: f64,
    /// Start of the window, s.
    pub reached_at: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSummary {
    pub sensor: String,
    pub steady: Option<SteadyState>,
    /// Time with the reading at or above the threshold, s (left-point rule).
    pub time_above_threshold: f64,
    /// ∫ max(reading − ambient, 0) dt, K·min (trapezoidal).
    pub area_above_ambient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub threshold: f64,
    pub duration: f64,
    pub sensors: Vec<SensorSummary>,
}

impl Summary {
    pub fn sensor(&self, name: &str) -> Option<&SensorSummary> {
        self.sensors.iter().find(|s| s.sensor == name)
    }

    /// Flat `key = value` listing.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "threshold_K = {}", self.threshold);
        let _ = writeln!(s, "duration_s = {}", self.duration);
        for x in &self.sensors {
            let p = format!("sensor.{}", x.sensor);
            match x.steady {
                Some(st) => {
                    let _ = writeln!(s, "{p}.steady_state_K = {}", st.temperature);
                    let _ = writeln!(s, "{p}.time_to_steady_s = {}", st.reached_at);
                }
                None => {
                    let _ = writeln!(s, "{p}.steady_state_K = not_reached");
                    let _ = writeln!(s, "{p}.time_to_steady_s = not_reached");
                }
            }
            let _ = writeln!(s, "{p}.time_above_threshold_s = {}", x.time_above_threshold);
            let _ = writeln!(s, "{p}.area_above_ambient_K_min = {}", x.area_above_ambient);
        }
        s
    }
}

fn summarize(name: &str, times: &[f64], values: &[f64], ambient: &[f64], threshold: f64) -> SensorSummary {
    let n = times.len();
    let mut above = 0.0;
    let mut area = 0.0;
    for i in 0..n.saturating_sub(1) {
        let dt = times[i + 1] - times[i];
        if values[i] >= threshold {
            above += dt;
        }
        let e0 = (values[i] - ambient[i]).max(0.0);
        let e1 = (values[i + 1] - ambient[i + 1]).max(0.0);
        area += 0.5 * (e0 + e1) * dt;
    }

    let mut start = n - 1;
    while start > 0 {
        let dt = times[start] - times[start - 1];
        let rate = (values[start] - values[start - 1]).abs() / dt * 60.0;
        if !(rate < STEADY_RATE_K_PER_MIN) {
            break;
        }
        start -= 1;
    }
    let steady = (times[n - 1] - times[start] >= STEADY_WINDOW_MIN * 60.0).then(|| {
        let window = &values[start..];
        SteadyState {
            temperature: window.iter().sum::<f64>() / window.len() as f64,
            reached_at: times[start],
        }
    });

    SensorSummary {
        sensor: name.to_string(),
        steady,
        time_above_threshold: above,
        area_above_ambient: area / 60.0,
    }
}

/// Summarise every sensor column of `series` against `threshold` (K).
pub fn compute_summary(series: &TimeSeries, threshold: f64) -> Result<Summary> {
    let samples = &series.samples;
    if samples.is_empty() {
        return Err(Error::InvalidInput("cannot summarise an empty series".into()));
    }
    let times: Vec<f64> = samples.iter().map(|s| s.time).collect();
    let ambient: Vec<f64> = samples.iter().map(|s| s.ambient).collect();
    let sensors = series
        .sensor_names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let values: Vec<f64> = samples.iter().map(|s| s.sensed[k]).collect();
            summarize(name, &times, &values, &ambient, threshold)
        })
        .collect();
    Ok(Summary {
        threshold,
        duration: times[times.len() - 1] - times[0],
        sensors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::Sample;

    fn series(values: impl Fn(f64) -> f64, ambient: f64, step: f64, count: usize) -> TimeSeries {
        let samples = (0..count)
            .map(|i| {
                let t = i as f64 * step;
                Sample {
                    time: t,
                    ambient,
                    temperatures: vec![values(t)],
                    sensed: vec![values(t)],
                    q_source: 0.0,
                    q_boundary: 0.0,
                    actuation: false,
                    q_heater: 0.0,
                    feed: 0.0,
                    x_bar: 0.0,
                    water_g: 0.0,
                    q_tess: 0.0,
                    heat_released: 0.0,
                }
            })
            .collect();
        TimeSeries {
            node_ids: vec!["core".into()],
            sensor_names: vec!["probe".into()],
            samples,
        }
    }

    #[test]
    fn constant_at_ambient() {
        let s = compute_summary(&series(|_| 241.0, 241.0, 10.0, 400), 253.15).unwrap();
        let p = &s.sensors[0];
        assert_eq!(p.area_above_ambient, 0.0);
        assert_eq!(p.time_above_threshold, 0.0);
        let st = p.steady.unwrap();
        assert_eq!(st.temperature, 241.0);
        assert_eq!(st.reached_at, 0.0);
    }

    #[test]
    fn exponential_area_matches_integral() {
        // 50 K excess decaying with τ = 40 min, sampled every 10 s for 8 h.
        let tau = 2400.0;
        let s = compute_summary(&series(|t| 241.0 + 50.0 * (-t / tau).exp(), 241.0, 10.0, 2881), 253.15).unwrap();
        let p = &s.sensors[0];
        let exact = 50.0 * tau / 60.0 * (1.0 - (-28_800.0 / tau).exp());
        assert!(((p.area_above_ambient - exact) / exact).abs() < 0.005);
        // 241 + 50 e^{-t/τ} ≥ 253.15 until t = τ ln(50/12.15).
        let cross = tau * (50.0 / 12.15_f64).ln();
        assert!((p.time_above_threshold - cross).abs() <= 10.0);
        let st = p.steady.unwrap();
        assert!(st.reached_at > cross);
        assert!((st.temperature - 241.0).abs() < 0.5);
    }

    #[test]
    fn never_steady() {
        let s = compute_summary(&series(|t| 241.0 + t / 60.0, 241.0, 10.0, 600), 253.15).unwrap();
        assert!(s.sensors[0].steady.is_none());
        assert!(s.render().contains("not_reached"));
    }

    #[test]
    fn short_series() {
        let s = compute_summary(&series(|_| 260.0, 241.0, 10.0, 1), 253.15).unwrap();
        assert_eq!(s.sensors[0].time_above_threshold, 0.0);
        assert!(s.sensors[0].steady.is_none());
        let empty = TimeSeries {
            samples: vec![],
            ..series(|_| 0.0, 1.0, 1.0, 0)
        };
        assert!(compute_summary(&empty, 253.15).is_err());
    }
}
