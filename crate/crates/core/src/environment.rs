//! Ambient boundary temperature as a function of time.

use crate::{Error, Result};

pub const HOUR: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentProfile {
    Constant(f64),
    /// Day value for the first half of each period, night for the second.
    SquareWave { day: f64, night: f64, period: f64, phase: f64 },
    /// Cosine between `day` (at the start of a period) and `night`.
    Sinusoid { day: f64, night: f64, period: f64, phase: f64 },
    /// `(t_s, T_K)` samples, linearly interpolated and held at the ends.
    Table(Vec<(f64, f64)>),
}

fn positive_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("ambient temperature must be positive, got {t} K")))
    }
}

impl EnvironmentProfile {
    /// Freezer used for the experiments.
    pub fn freezer() -> Self {
        EnvironmentProfile::Constant(241.0)
    }

    /// Lunar night at −150 °C.
    pub fn lunar_night() -> Self {
        EnvironmentProfile::Constant(123.15)
    }

    /// Representative Mars equatorial diurnal cycle, 210 ± 60 K over a sol.
    pub fn mars_equatorial() -> Self {
        EnvironmentProfile::Sinusoid {
            day: 270.0,
            night: 150.0,
            period: 24.62 * HOUR,
            phase: 0.0,
        }
    }

    /// Small body rotating every 3 hours, night at −150 °C.
    pub fn fast_asteroid() -> Self {
        EnvironmentProfile::SquareWave {
            day: 300.0,
            night: 123.15,
            period: 3.0 * HOUR,
            phase: 0.0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EnvironmentProfile::Constant(_) => "constant",
            EnvironmentProfile::SquareWave { .. } => "square_wave",
            EnvironmentProfile::Sinusoid { .. } => "sinusoid",
            EnvironmentProfile::Table(_) => "table",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentProfile::Constant(t) => positive_temperature(*t),
            EnvironmentProfile::SquareWave { day, night, period, phase }
            | EnvironmentProfile::Sinusoid { day, night, period, phase } => {
                positive_temperature(*day)?;
                positive_temperature(*night)?;
                if !(*period > 0.0 && period.is_finite()) {
                    return Err(Error::InvalidInput(format!("period must be positive, got {period} s")));
                }
                if !phase.is_finite() {
                    return Err(Error::InvalidInput(format!("phase {phase} s")));
                }
                Ok(())
            }
            EnvironmentProfile::Table(samples) => {
                if samples.len() < 2 {
                    return Err(Error::InvalidInput("ambient table needs at least 2 samples".into()));
                }
                for w in samples.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidInput(format!(
                            "ambient table times must increase strictly ({} then {})",
                            w[0].0, w[1].0
                        )));
                    }
                }
                samples.iter().try_for_each(|&(t, temp)| {
                    if !t.is_finite() {
                        return Err(Error::InvalidInput(format!("ambient table time {t}")));
                    }
                    positive_temperature(temp)
                })
            }
        }
    }

    /// Position within the current period, in [0, period).
    fn cycle_position(t: f64, period: f64, phase: f64) -> f64 {
        (t + phase).rem_euclid(period)
    }

    /// Ambient temperature at time `t`, K. Tables are clamped outside their range.
    pub fn ambient_at(&self, t: f64) -> f64 {
        match self {
            EnvironmentProfile::Constant(temp) => *temp,
            EnvironmentProfile::SquareWave { day, night, period, phase } => {
                if Self::cycle_position(t, *period, *phase) < 0.5 * period {
                    *day
                } else {
                    *night
                }
            }
            EnvironmentProfile::Sinusoid { day, night, period, phase } => {
                let mean = 0.5 * (day + night);
                let half = 0.5 * (day - night);
                let angle = std::f64::consts::TAU * Self::cycle_position(t, *period, *phase) / period;
                (mean + half * angle.cos()).clamp(day.min(*night), day.max(*night))
            }
            EnvironmentProfile::Table(samples) => interpolate(samples, t),
        }
    }

    /// Whether `t` falls in a day phase: the first half-period of periodic
    /// profiles. Constant and tabulated profiles are never in daylight.
    pub fn is_day(&self, t: f64) -> bool {
        match self {
            EnvironmentProfile::SquareWave { period, phase, .. }
            | EnvironmentProfile::Sinusoid { period, phase, .. } => {
                Self::cycle_position(t, *period, *phase) < 0.5 * period
            }
            _ => false,
        }
    }

    /// Times in `(start, end)` where the profile or the day flag changes
    /// discontinuously, or where a table's slope changes.
    pub fn breakpoints(&self, start: f64, end: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            EnvironmentProfile::Constant(_) => {}
            EnvironmentProfile::SquareWave { period, phase, .. }
            | EnvironmentProfile::Sinusoid { period, phase, .. } => {
                let half = 0.5 * period;
                let mut k = ((start + phase) / half).floor();
                loop {
                    let t = k * half - phase;
                    if t >= end {
                        break;
                    }
                    if t > start {
                        out.push(t);
                    }
                    k += 1.0;
                }
            }
            EnvironmentProfile::Table(samples) => {
                out.extend(samples.iter().map(|s| s.0).filter(|&t| t > start && t < end));
            }
        }
        out
    }

    /// Lowest and highest temperature the profile can produce.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            EnvironmentProfile::Constant(t) => (*t, *t),
            EnvironmentProfile::SquareWave { day, night, .. }
            | EnvironmentProfile::Sinusoid { day, night, .. } => (day.min(*night), day.max(*night)),
            EnvironmentProfile::Table(s) => s
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, t)| (lo.min(t), hi.max(t))),
        }
    }
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let i = samples.partition_point(|s| s.0 <= t);
    let (t0, y0) = samples[i - 1];
    let (t1, y1) = samples[i];
    if t == t0 {
        return y0;
    }
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

/// Parse a two-column `t_s, T_K` CSV. A non-numeric first line is taken
/// as a header; blank lines and `#` comments are skipped.
pub fn parse_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::InvalidInput(format!("table line {}: expected two columns", n + 1)));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(temp)) => samples.push((t, temp)),
            _ if samples.is_empty() && n == 0 => continue,
            _ => {
                return Err(Error::InvalidInput(format!("table line {}: not numeric", n + 1)));
            }
        }
    }
    let profile = EnvironmentProfile::Table(samples);
    profile.validate()?;
    match profile {
        EnvironmentProfile::Table(s) => Ok(s),
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        assert_eq!(EnvironmentProfile::freezer().ambient_at(12_345.0), 241.0);
        assert_eq!(EnvironmentProfile::lunar_night().ambient_at(0.0), 123.15);
        let a = EnvironmentProfile::fast_asteroid();
        assert_eq!(a.ambient_at(0.0), 300.0);
        assert_eq!(a.ambient_at(1.6 * HOUR), 123.15);
        let m = EnvironmentProfile::mars_equatorial();
        assert_eq!(m.ambient_at(0.0), 270.0);
        assert!((m.ambient_at(12.31 * HOUR) - 150.0).abs() < 1e-9);
        assert!((m.ambient_at(24.62 * HOUR / 4.0) - 210.0).abs() < 1e-9);
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let p = EnvironmentProfile::Table(vec![(0.0, 250.0), (100.0, 200.0), (300.0, 240.0)]);
        p.validate().unwrap();
        assert_eq!(p.ambient_at(-5.0), 250.0);
        assert_eq!(p.ambient_at(50.0), 225.0);
        assert_eq!(p.ambient_at(100.0), 200.0);
        assert_eq!(p.ambient_at(200.0), 220.0);
        assert_eq!(p.ambient_at(1e6), 240.0);
        assert_eq!(p.breakpoints(0.0, 1000.0), vec![100.0, 300.0]);
    }

    #[test]
    fn validation() {
        assert!(EnvironmentProfile::Constant(0.0).validate().is_err());
        assert!(EnvironmentProfile::Table(vec![(0.0, 250.0)]).validate().is_err());
        assert!(EnvironmentProfile::Table(vec![(0.0, 250.0), (0.0, 240.0)]).validate().is_err());
        let bad_period = EnvironmentProfile::SquareWave {
            day: 300.0,
            night: 100.0,
            period: 0.0,
            phase: 0.0,
        };
        assert!(bad_period.validate().is_err());
    }

    #[test]
    fn square_wave_breakpoints() {
        let a = EnvironmentProfile::fast_asteroid();
        let b = a.breakpoints(0.0, 6.0 * HOUR);
        assert_eq!(b, vec![1.5 * HOUR, 3.0 * HOUR, 4.5 * HOUR]);
        assert!(a.is_day(0.0));
        assert!(!a.is_day(1.5 * HOUR));
    }

    #[test]
    fn csv_table() {
        let s = parse_table_csv("t_s,T_K\n0,250\n# note\n60, 240\n").unwrap();
        assert_eq!(s, vec![(0.0, 250.0), (60.0, 240.0)]);
        assert!(parse_table_csv("0,250\nx,1\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn periodic() -> impl Strategy<Value = EnvironmentProfile> {
            (1.0..400.0f64, 1.0..400.0f64, 1.0..1e5f64, 0.0..1e5f64, any::<bool>()).prop_map(
                |(day, night, period, phase, square)| {
                    if square {
                        EnvironmentProfile::SquareWave { day, night, period, phase }
                    } else {
                        EnvironmentProfile::Sinusoid { day, night, period, phase }
                    }
                },
            )
        }

        proptest! {
            #[test]
            fn periodic_and_bounded(p in periodic(), t in 0.0..1e6f64) {
                let (lo, hi) = p.bounds();
                let a = p.ambient_at(t);
                prop_assert!(a >= lo && a <= hi);
                let period = match p {
                    EnvironmentProfile::SquareWave { period, .. }
                    | EnvironmentProfile::Sinusoid { period, .. } => period,
                    _ => unreachable!(),
                };
                let b = p.ambient_at(t + period);
                // Square waves may flip only when t sits within rounding of an edge.
                let pos = (t + match p {
                    EnvironmentProfile::SquareWave { phase, .. }
                    | EnvironmentProfile::Sinusoid { phase, .. } => phase,
                    _ => 0.0,
                }).rem_euclid(period) / (0.5 * period);
                let near_edge = (pos - pos.round()).abs() < 1e-9;
                if !near_edge {
                    prop_assert!((a - b).abs() <= 1e-9 * hi, "{} vs {}", a, b);
                }
            }

            #[test]
            fn table_hits_knots(temps in proptest::collection::vec(1.0..500.0f64, 2..10)) {
                let samples: Vec<(f64, f64)> =
                    temps.iter().enumerate().map(|(i, &t)| (i as f64 * 7.5, t)).collect();
                let p = EnvironmentProfile::Table(samples.clone());
                for (t, temp) in samples {
                    prop_assert_eq!(p.ambient_at(t), temp);
                }
            }
        }
    }
}
