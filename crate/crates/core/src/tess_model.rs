//! Thermochemical heat source: a lumped salt bed hydrated from a water
//! reservoir, with first-order kinetics, a crystalline-layer efficiency
//! loss, and an energy-accounting recharge.
//!
//! Masses are grams, energies joules, capacities reported in Wh.

use crate::thermo_props::{SorbentSpec, WATER_MOLAR_MASS};
use crate::{Error, Result};

/// Specific heat of liquid water, J/(g·K).
pub const WATER_SPECIFIC_HEAT: f64 = 4.18;

/// Default first-order rate constant, 1/s: 63 % of a fresh bed's
/// capacity in 45 minutes.
pub const DEFAULT_RATE_CONSTANT: f64 = 1.0 / 2700.0;

/// Default crystalline-layer coefficient for liquid delivery.
pub const DEFAULT_LIQUID_DEGRADATION: f64 = 1.0;

const J_PER_WH: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaterPhase {
    Liquid,
    Vapor,
}

impl WaterPhase {
    pub fn default_degradation(self) -> f64 {
        match self {
            WaterPhase::Liquid => DEFAULT_LIQUID_DEGRADATION,
            WaterPhase::Vapor => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WaterPhase::Liquid => "liquid",
            WaterPhase::Vapor => "vapor",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaltBed {
    pub sorbent: SorbentSpec,
    pub dry_mass_g: f64,
    /// Mean water moles bound per mole of salt.
    pub mean_hydration: f64,
    /// First-order kinetic constant, 1/s.
    pub rate_constant: f64,
    pub degradation_coefficient: f64,
}

impl SaltBed {
    pub fn new(
        sorbent: SorbentSpec,
        dry_mass_g: f64,
        mean_hydration: f64,
        rate_constant: f64,
        degradation_coefficient: f64,
    ) -> Result<Self> {
        if !(dry_mass_g > 0.0 && dry_mass_g.is_finite()) {
            return Err(Error::InvalidInput(format!("salt mass must be positive, got {dry_mass_g} g")));
        }
        let max = f64::from(sorbent.max_hydration());
        if !(0.0..=max).contains(&mean_hydration) {
            return Err(Error::InvalidInput(format!(
                "mean hydration {mean_hydration} outside [0, {max}]"
            )));
        }
        if !(rate_constant >= 0.0 && rate_constant.is_finite()) {
            return Err(Error::InvalidInput(format!("rate constant {rate_constant} 1/s")));
        }
        if !(degradation_coefficient >= 0.0 && degradation_coefficient.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "degradation coefficient {degradation_coefficient}"
            )));
        }
        Ok(Self {
            sorbent,
            dry_mass_g,
            mean_hydration,
            rate_constant,
            degradation_coefficient,
        })
    }

    /// Moles of anhydrous salt.
    pub fn moles(&self) -> f64 {
        self.dry_mass_g / self.sorbent.molar_mass
    }

    pub fn max_hydration(&self) -> f64 {
        f64::from(self.sorbent.max_hydration())
    }

    /// Crystalline-layer efficiency at a given mean hydration.
    pub fn efficiency_at(&self, mean_hydration: f64) -> f64 {
        (-self.degradation_coefficient * mean_hydration / self.max_hydration()).exp()
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency_at(self.mean_hydration)
    }

    /// Water the bed can still take up before saturating, g.
    pub fn water_to_saturate_g(&self) -> f64 {
        ((self.max_hydration() - self.mean_hydration) * self.moles() * WATER_MOLAR_MASS).max(0.0)
    }

    pub fn is_saturated(&self) -> bool {
        self.mean_hydration >= self.max_hydration()
    }

    /// Mean hydration change per gram of water absorbed.
    fn hydration_per_gram(&self) -> f64 {
        1.0 / (WATER_MOLAR_MASS * self.moles())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterReservoir {
    pub mass_g: f64,
    /// Temperature of the water delivered to the bed, K.
    pub temperature: f64,
    pub phase: WaterPhase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TessState {
    pub bed: SaltBed,
    pub reservoir: WaterReservoir,
    /// Net heat delivered to the bed node since start, J.
    pub heat_released_j: f64,
    pub water_absorbed_g: f64,
    /// Energy drawn from the charging supply, J.
    pub charge_energy_j: f64,
}

impl TessState {
    pub fn new(bed: SaltBed, reservoir: WaterReservoir) -> Result<Self> {
        if !(reservoir.mass_g >= 0.0 && reservoir.mass_g.is_finite()) {
            return Err(Error::InvalidInput(format!("water mass {} g", reservoir.mass_g)));
        }
        if !(reservoir.temperature > 0.0) {
            return Err(Error::InvalidInput(format!(
                "water temperature {} K",
                reservoir.temperature
            )));
        }
        Ok(Self {
            bed,
            reservoir,
            heat_released_j: 0.0,
            water_absorbed_g: 0.0,
            charge_energy_j: 0.0,
        })
    }

    /// Reservoir mass at the start, recovered from the mass balance.
    pub fn initial_water_g(&self) -> f64 {
        self.reservoir.mass_g + self.water_absorbed_g
    }

    /// Sensible heat to bring one gram of delivered water up to the bed
    /// temperature, J/g. Zero for vapour or when the water is warmer.
    fn sensible_penalty_per_gram(&self, bed_temperature: f64) -> f64 {
        match self.reservoir.phase {
            WaterPhase::Liquid => {
                WATER_SPECIFIC_HEAT * (bed_temperature - self.reservoir.temperature).max(0.0)
            }
            WaterPhase::Vapor => 0.0,
        }
    }

    /// Absorb a discrete amount of water, integrating the release enthalpy
    /// exactly across hydrate segments. Returns the heat delivered, J.
    pub fn absorb(&mut self, grams: f64, bed_temperature: f64) -> f64 {
        let grams = grams
            .min(self.reservoir.mass_g)
            .min(self.bed.water_to_saturate_g())
            .max(0.0);
        let bed = &self.bed;
        let x_start = bed.mean_hydration;
        let x_end = (x_start + grams * bed.hydration_per_gram()).min(bed.max_hydration());
        let a = bed.degradation_coefficient / bed.max_hydration();

        let mut chemical = 0.0;
        let mut x = x_start;
        while x < x_end {
            let Some(seg) = bed.sorbent.absorption_enthalpy(x) else { break };
            let upper = seg.upper.min(x_end);
            let slope = seg.per_mole_water.abs() * 1000.0;
            let weight = if a == 0.0 {
                upper - x
            } else {
                ((-a * x).exp() - (-a * upper).exp()) / a
            };
            chemical += bed.moles() * slope * weight;
            x = upper;
        }
        let heat = (chemical - grams * self.sensible_penalty_per_gram(bed_temperature)).max(0.0);

        self.bed.mean_hydration = x_end;
        self.reservoir.mass_g -= grams;
        self.water_absorbed_g += grams;
        self.heat_released_j += heat;
        heat
    }
}

/// Instantaneous uptake and heat output of the bed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReleaseRate {
    /// Water absorbed, g/s.
    pub absorption_g_s: f64,
    /// Net heat to the bed node, W (never negative).
    pub heat_w: f64,
    /// d(mean hydration)/dt, 1/s.
    pub hydration_rate: f64,
    /// The requested feed could not be honoured because the reservoir is empty.
    pub feed_clipped: bool,
}

/// Heat released by the bed for a given water feed (g/s; use
/// `f64::INFINITY` when the whole reservoir is in contact with the bed).
///
/// Absorption is the smaller of the feed and the kinetic limit
/// `k · remaining · η(x̄)`, where `remaining` is the water still absorbable
/// and `η(x̄) = exp(−d·x̄/x_max)`. Heat is absorption times the enthalpy of
/// the current hydrate segment times `η`, less the sensible heat of cold
/// liquid water.
pub fn heat_release_rate(state: &TessState, water_feed_g_s: f64, bed_temperature: f64) -> ReleaseRate {
    let feed = water_feed_g_s.max(0.0);
    let bed = &state.bed;
    if feed == 0.0 || bed.is_saturated() {
        return ReleaseRate::default();
    }
    if state.reservoir.mass_g <= 0.0 {
        return ReleaseRate {
            feed_clipped: true,
            ..ReleaseRate::default()
        };
    }
    let Some(seg) = bed.sorbent.absorption_enthalpy(bed.mean_hydration) else {
        return ReleaseRate::default();
    };
    let efficiency = bed.efficiency();
    let remaining = state.reservoir.mass_g.min(bed.water_to_saturate_g());
    let kinetic = bed.rate_constant * remaining * efficiency;
    let absorption = feed.min(kinetic);
    let chemical = absorption / WATER_MOLAR_MASS * seg.per_mole_water.abs() * 1000.0 * efficiency;
    let heat = (chemical - absorption * state.sensible_penalty_per_gram(bed_temperature)).max(0.0);
    ReleaseRate {
        absorption_g_s: absorption,
        heat_w: heat,
        hydration_rate: absorption * bed.hydration_per_gram(),
        feed_clipped: false,
    }
}

/// Heat available if the bed hydrates from its current level as far as
/// `available_water_g` allows (capped at the top hydrate), Wh. Ignores
/// kinetics, degradation and sensible losses.
pub fn total_capacity(bed: &SaltBed, available_water_g: f64) -> f64 {
    let water = available_water_g.max(0.0);
    let reach = (bed.mean_hydration + water * bed.hydration_per_gram()).min(bed.max_hydration());
    let sorbent = &bed.sorbent;
    let kj_per_mol = sorbent.cumulative_enthalpy(bed.mean_hydration) - sorbent.cumulative_enthalpy(reach);
    bed.moles() * kj_per_mol * 1000.0 / J_PER_WH
}

/// Dehydrate the bed with `input_power` watts for `dt` seconds. Removing a
/// mole of water costs the segment enthalpy divided by `efficiency`; the
/// water returns to the reservoir.
pub fn charge(state: &TessState, input_power: f64, dt: f64, efficiency: f64) -> Result<TessState> {
    if !(input_power >= 0.0 && input_power.is_finite()) || !(dt >= 0.0) {
        return Err(Error::InvalidInput(format!("charge power {input_power} W over {dt} s")));
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "charging efficiency must lie in (0, 1], got {efficiency}"
        )));
    }
    let mut next = state.clone();
    let moles = next.bed.moles();
    let mut budget = input_power * dt;
    let mut spent = 0.0;
    let mut removed_mol = 0.0;
    while budget > 0.0 {
        let x = next.bed.mean_hydration;
        let Some(seg) = next.bed.sorbent.desorption_enthalpy(x) else { break };
        let cost_per_mol = seg.per_mole_water.abs() * 1000.0 / efficiency;
        let available_mol = (x - seg.lower) * moles;
        let needed = available_mol * cost_per_mol;
        if budget >= needed {
            next.bed.mean_hydration = seg.lower;
            removed_mol += available_mol;
            budget -= needed;
            spent += needed;
        } else {
            let mol = budget / cost_per_mol;
            next.bed.mean_hydration = (x - mol / moles).max(seg.lower);
            removed_mol += mol;
            spent += budget;
            budget = 0.0;
        }
    }
    let grams = removed_mol * WATER_MOLAR_MASS;
    next.reservoir.mass_g += grams;
    next.water_absorbed_g -= grams;
    next.charge_energy_j += spent;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo_props::{builtin_sorbents, find_sorbent};

    fn licl_state(salt: f64, water: f64, degradation: f64, phase: WaterPhase) -> TessState {
        let licl = find_sorbent(&builtin_sorbents(), "LiCl").unwrap().clone();
        let bed = SaltBed::new(licl, salt, 0.0, DEFAULT_RATE_CONSTANT, degradation).unwrap();
        TessState::new(
            bed,
            WaterReservoir {
                mass_g: water,
                temperature: 273.15,
                phase,
            },
        )
        .unwrap()
    }

    #[test]
    fn capacity_by_hand() {
        // n_salt = 25/42.4 = 0.589623 mol, n_water = 25/18.015 = 1.387732 mol
        // x_reach = 2.353604; H = 109.7 + 0.353604·(159 − 109.7) = 127.132 kJ/mol
        // Q = 0.589623 · 127.132 = 74.960 kJ = 20.822 Wh
        let s = licl_state(25.0, 25.0, 0.0, WaterPhase::Vapor);
        let wh = total_capacity(&s.bed, 25.0);
        assert!((wh - 20.822).abs() < 0.001, "{wh}");
        assert_eq!(total_capacity(&s.bed, 0.0), 0.0);
        // Unlimited water stops at the pentahydrate: 0.589623 · 241.11 kJ = 39.49 Wh.
        let cap = total_capacity(&s.bed, 1e6);
        assert!((cap - 39.490).abs() < 0.001, "{cap}");
    }

    #[test]
    fn saturated_bed_releases_nothing() {
        let mut s = licl_state(25.0, 100.0, 0.0, WaterPhase::Vapor);
        s.bed.mean_hydration = 5.0;
        let r = heat_release_rate(&s, 1.0, 300.0);
        assert_eq!(r.heat_w, 0.0);
        assert_eq!(r.absorption_g_s, 0.0);
    }

    #[test]
    fn feed_limited_rate() {
        let s = licl_state(25.0, 25.0, 0.0, WaterPhase::Vapor);
        let r = heat_release_rate(&s, 1e-3, 273.15);
        assert!((r.heat_w - 1e-3 / 18.015 * 56_000.0).abs() < 1e-12);
        assert!((r.heat_w - 3.1086).abs() < 1e-4);
        let liquid = licl_state(25.0, 25.0, 0.0, WaterPhase::Liquid);
        // Water delivered at bed temperature costs nothing extra.
        assert_eq!(heat_release_rate(&liquid, 1e-3, 273.15).heat_w, r.heat_w);
        assert!(heat_release_rate(&liquid, 1e-3, 293.15).heat_w < r.heat_w);
    }

    #[test]
    fn zero_feed_is_inert() {
        let s = licl_state(25.0, 25.0, 1.0, WaterPhase::Liquid);
        assert_eq!(heat_release_rate(&s, 0.0, 280.0), ReleaseRate::default());
    }

    #[test]
    fn empty_reservoir_clips_feed() {
        let s = licl_state(25.0, 0.0, 0.0, WaterPhase::Vapor);
        let r = heat_release_rate(&s, 1e-3, 280.0);
        assert!(r.feed_clipped);
        assert_eq!(r.heat_w, 0.0);
    }

    #[test]
    fn kinetic_limit_caps_flood() {
        let s = licl_state(25.0, 25.0, 0.0, WaterPhase::Vapor);
        let r = heat_release_rate(&s, f64::INFINITY, 273.15);
        assert!((r.absorption_g_s - 25.0 / 2700.0).abs() < 1e-15);
    }

    #[test]
    fn charge_dehydrated_bed_is_noop() {
        let s = licl_state(25.0, 25.0, 0.0, WaterPhase::Vapor);
        let c = charge(&s, 10.0, 100.0, 0.8).unwrap();
        assert_eq!(c.bed.mean_hydration, 0.0);
        assert_eq!(c.reservoir.mass_g, 25.0);
        assert_eq!(c.charge_energy_j, 0.0);
    }

    #[test]
    fn charge_reverses_absorb() {
        let mut s = licl_state(25.0, 25.0, 0.0, WaterPhase::Vapor);
        let initial = s.clone();
        let q = s.absorb(25.0, 273.15);
        assert!((q / 3600.0 - 20.822).abs() < 0.001);
        let back = charge(&s, q / 10.0, 10.0, 1.0).unwrap();
        assert!(back.bed.mean_hydration.abs() < 1e-9);
        assert!((back.reservoir.mass_g - initial.reservoir.mass_g).abs() < 1e-9);
        assert!((back.charge_energy_j - q).abs() < 1e-6);
    }

    #[test]
    fn charge_efficiency_scales_cost() {
        let mut s = licl_state(25.0, 25.0, 0.0, WaterPhase::Vapor);
        s.absorb(5.0, 273.15);
        let full = charge(&s, 1.0, 100.0, 1.0).unwrap();
        let half = charge(&s, 1.0, 100.0, 0.5).unwrap();
        let removed_full = s.bed.mean_hydration - full.bed.mean_hydration;
        let removed_half = s.bed.mean_hydration - half.bed.mean_hydration;
        assert!((removed_full - 2.0 * removed_half).abs() < 1e-12);
        assert!(charge(&s, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn degraded_absorb_matches_closed_form() {
        let mut s = licl_state(25.0, 5.0, 2.0, WaterPhase::Vapor);
        let n = s.bed.moles();
        let x1 = 5.0 / 18.015 / n;
        let a = 2.0 / 5.0;
        let expected = n * 56_000.0 * (1.0 - (-a * x1).exp()) / a;
        let q = s.absorb(5.0, 273.15);
        assert!((q - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn bed_validation() {
        let licl = find_sorbent(&builtin_sorbents(), "LiCl").unwrap().clone();
        assert!(SaltBed::new(licl.clone(), 0.0, 0.0, 1e-3, 0.0).is_err());
        assert!(SaltBed::new(licl.clone(), 25.0, 5.5, 1e-3, 0.0).is_err());
        assert!(SaltBed::new(licl, 25.0, 0.0, 1e-3, -1.0).is_err());
    }
}
