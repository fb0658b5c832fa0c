//! Salt-hydrate chemistry: reaction enthalpies, storage densities and the
//! built-in sorbent database.
//!
//! Enthalpies are in kJ/mol of salt, molar masses in g/mol and storage
//! densities in Wh per kg of *dehydrated* salt.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Molar mass of water, g/mol.
pub const WATER_MOLAR_MASS: f64 = 18.015;

/// kJ/g → Wh/kg.
const KJ_PER_G_TO_WH_PER_KG: f64 = 1000.0 / 3.6;

/// One hydrate level of a salt, e.g. LiCl·2H₂O.
#[derive(Debug, Clone, PartialEq)]
pub struct HydrateVariant {
    /// Moles of water bound per mole of salt.
    pub water_moles: u32,
    /// Formation enthalpy of the hydrate, kJ/mol.
    pub formation_enthalpy: f64,
    /// Cumulative hydration enthalpy from the anhydrous salt, kJ/mol (as tabulated).
    pub reaction_enthalpy: f64,
    /// Lowest temperature at which the hydrate is known to be stable, °C.
    pub min_stable_temperature_c: Option<f64>,
}

impl HydrateVariant {
    pub fn new(water_moles: u32, formation_enthalpy: f64, reaction_enthalpy: f64) -> Self {
        Self {
            water_moles,
            formation_enthalpy,
            reaction_enthalpy,
            min_stable_temperature_c: None,
        }
    }

    pub fn with_min_stable_temperature(mut self, celsius: f64) -> Self {
        self.min_stable_temperature_c = Some(celsius);
        self
    }
}

/// A dehydrated salt together with its known hydrates.
#[derive(Debug, Clone, PartialEq)]
pub struct SorbentSpec {
    pub name: String,
    /// Formation enthalpy of the anhydrous salt, kJ/mol.
    pub formation_enthalpy: f64,
    /// Molar mass of the anhydrous salt, g/mol.
    pub molar_mass: f64,
    hydrates: Vec<HydrateVariant>,
}

impl SorbentSpec {
    /// Build and validate a sorbent. Hydrates must be strictly ascending in
    /// water content, exothermic, and release more heat the more water they bind.
    pub fn new(
        name: impl Into<String>,
        formation_enthalpy: f64,
        molar_mass: f64,
        hydrates: Vec<HydrateVariant>,
    ) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::InvalidInput(format!(
                "sorbent name `{name}` must be a non-empty identifier"
            )));
        }
        if !(molar_mass > 0.0 && molar_mass.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{name}: molar mass must be positive, got {molar_mass}"
            )));
        }
        if !formation_enthalpy.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{name}: formation enthalpy must be finite"
            )));
        }
        if hydrates.is_empty() {
            return Err(Error::InvalidInput(format!("{name}: no hydrates listed")));
        }
        let mut prev: Option<&HydrateVariant> = None;
        for h in &hydrates {
            if h.water_moles < 1 {
                return Err(Error::InvalidInput(format!(
                    "{name}: hydrate water content must be at least 1"
                )));
            }
            if !(h.reaction_enthalpy < 0.0) || !h.formation_enthalpy.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name}·{}H2O: hydration must be exothermic (dHr < 0), got {}",
                    h.water_moles, h.reaction_enthalpy
                )));
            }
            if let Some(p) = prev {
                if h.water_moles <= p.water_moles {
                    return Err(Error::InvalidInput(format!(
                        "{name}: hydrates must be strictly ascending in water content"
                    )));
                }
                if h.reaction_enthalpy.abs() <= p.reaction_enthalpy.abs() {
                    return Err(Error::InvalidInput(format!(
                        "{name}: |dHr| must increase with water content ({}H2O vs {}H2O)",
                        h.water_moles, p.water_moles
                    )));
                }
            }
            prev = Some(h);
        }
        Ok(Self {
            name,
            formation_enthalpy,
            molar_mass,
            hydrates,
        })
    }

    pub fn hydrates(&self) -> &[HydrateVariant] {
        &self.hydrates
    }

    pub fn hydrate(&self, water_moles: u32) -> Option<&HydrateVariant> {
        self.hydrates.iter().find(|h| h.water_moles == water_moles)
    }

    /// Highest hydrate level.
    pub fn max_hydration(&self) -> u32 {
        self.hydrates.last().map_or(0, |h| h.water_moles)
    }

    /// Coldest stability temperature recorded for any hydrate, °C.
    pub fn min_stable_temperature_c(&self) -> Option<f64> {
        self.hydrates
            .iter()
            .filter_map(|h| h.min_stable_temperature_c)
            .reduce(f64::min)
    }

    /// Tabulated enthalpy of a level; level 0 is the anhydrous salt.
    fn level_enthalpy(&self, level: u32) -> Option<f64> {
        if level == 0 {
            Some(0.0)
        } else {
            self.hydrate(level).map(|h| h.reaction_enthalpy)
        }
    }

    /// Segments between consecutive levels (anhydrous first), as
    /// `(x0, H0, x1, H1)` with cumulative enthalpies.
    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let mut prev = (0.0, 0.0);
        self.hydrates.iter().map(move |h| {
            let next = (f64::from(h.water_moles), h.reaction_enthalpy);
            let seg = (prev.0, prev.1, next.0, next.1);
            prev = next;
            seg
        })
    }

    /// Cumulative hydration enthalpy at a (possibly fractional) mean
    /// hydration, kJ/mol salt, linearly interpolated between levels and
    /// clamped to `[0, max]`.
    pub fn cumulative_enthalpy(&self, mean_hydration: f64) -> f64 {
        let x = mean_hydration.clamp(0.0, f64::from(self.max_hydration()));
        self.segments()
            .find(|&(_, _, x1, _)| x <= x1)
            .map_or(0.0, |(x0, h0, x1, h1)| h0 + (h1 - h0) * (x - x0) / (x1 - x0))
    }

    /// Segment that the next absorbed water enters (`[lo, hi)` containing
    /// `mean_hydration`). `None` once the bed is saturated.
    pub fn absorption_enthalpy(&self, mean_hydration: f64) -> Option<Interval> {
        self.segments()
            .find(|&(x0, _, x1, _)| mean_hydration >= x0 && mean_hydration < x1)
            .map(Interval::from_segment)
    }

    /// Segment that removing water leaves (`(lo, hi]` containing
    /// `mean_hydration`). `None` when fully dehydrated.
    pub fn desorption_enthalpy(&self, mean_hydration: f64) -> Option<Interval> {
        self.segments()
            .find(|&(x0, _, x1, _)| mean_hydration > x0 && mean_hydration <= x1)
            .map(Interval::from_segment)
    }
}

/// A segment between two tabulated hydrate levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    /// Hydration enthalpy per mole of water in this segment, kJ/mol (negative).
    pub per_mole_water: f64,
}

impl Interval {
    fn from_segment((x0, h0, x1, h1): (f64, f64, f64, f64)) -> Self {
        Self {
            lower: x0,
            upper: x1,
            per_mole_water: (h1 - h0) / (x1 - x0),
        }
    }
}

/// Formation enthalpy of water used when evaluating hydration reactions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterEnthalpyConvention {
    /// kJ/mol, negative.
    pub formation_enthalpy: f64,
}

impl WaterEnthalpyConvention {
    /// Value that reproduces the tabulated reaction enthalpies.
    pub const TABULATED: Self = Self {
        formation_enthalpy: -248.0,
    };
    /// Standard formation enthalpy of water vapour.
    pub const VAPOR: Self = Self {
        formation_enthalpy: -241.826,
    };
    /// Standard formation enthalpy of liquid water.
    pub const LIQUID: Self = Self {
        formation_enthalpy: -285.83,
    };

    pub fn new(formation_enthalpy: f64) -> Result<Self> {
        if formation_enthalpy < 0.0 && formation_enthalpy.is_finite() {
            Ok(Self { formation_enthalpy })
        } else {
            Err(Error::InvalidInput(format!(
                "water formation enthalpy must be negative, got {formation_enthalpy}"
            )))
        }
    }
}

impl Default for WaterEnthalpyConvention {
    fn default() -> Self {
        Self::TABULATED
    }
}

/// Hydration enthalpy from formation enthalpies:
/// `dHr = dHf(hydrate) − (x·dHf(water) + dHf(salt))`.
pub fn reaction_enthalpy(
    spec: &SorbentSpec,
    water_moles: u32,
    hydrate_formation_enthalpy: f64,
    convention: WaterEnthalpyConvention,
) -> Result<f64> {
    if water_moles < 1 {
        return Err(Error::InvalidInput(
            "hydrate water content must be at least 1".into(),
        ));
    }
    if !hydrate_formation_enthalpy.is_finite() {
        return Err(Error::InvalidInput("formation enthalpy must be finite".into()));
    }
    Ok(hydrate_formation_enthalpy
        - (f64::from(water_moles) * convention.formation_enthalpy + spec.formation_enthalpy))
}

/// Hess's law: Σ formation enthalpies of products minus those of reactants.
pub fn reaction_enthalpy_hess(products: &[f64], reactants: &[f64]) -> Result<f64> {
    if products.is_empty() || reactants.is_empty() {
        return Err(Error::InvalidInput(
            "products and reactants must both be non-empty".into(),
        ));
    }
    Ok(products.iter().sum::<f64>() - reactants.iter().sum::<f64>())
}

/// Products and reactants of `salt + x H₂O → salt·xH₂O`, in the order
/// [`reaction_enthalpy_hess`] expects.
pub fn hydration_stoichiometry(
    spec: &SorbentSpec,
    water_moles: u32,
    hydrate_formation_enthalpy: f64,
    convention: WaterEnthalpyConvention,
) -> (Vec<f64>, Vec<f64>) {
    (
        vec![hydrate_formation_enthalpy],
        vec![
            spec.formation_enthalpy,
            f64::from(water_moles) * convention.formation_enthalpy,
        ],
    )
}

/// Theoretical storage density per kg of dehydrated salt, Wh/kg.
pub fn energy_storage_density(reaction_enthalpy: f64, molar_mass_dehydrated: f64) -> Result<f64> {
    if !(molar_mass_dehydrated > 0.0 && molar_mass_dehydrated.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "molar mass must be positive, got {molar_mass_dehydrated}"
        )));
    }
    Ok(reaction_enthalpy.abs() / molar_mass_dehydrated * KJ_PER_G_TO_WH_PER_KG)
}

/// Enthalpy released going from one hydrate level to a higher one, kJ/mol salt.
/// Level 0 is the anhydrous salt.
pub fn stepwise_enthalpy(spec: &SorbentSpec, from_level: u32, to_level: u32) -> Result<f64> {
    let unknown = |level| Error::UnknownHydrate {
        sorbent: spec.name.clone(),
        level,
    };
    let from = spec.level_enthalpy(from_level).ok_or_else(|| unknown(from_level))?;
    let to = spec.level_enthalpy(to_level).ok_or_else(|| unknown(to_level))?;
    if from_level > to_level {
        return Err(Error::InvalidInput(format!(
            "stepwise enthalpy needs from ≤ to, got {from_level} → {to_level}"
        )));
    }
    Ok(to - from)
}

/// The eight salt hydrates of the reference storage-capacity table.
pub fn builtin_sorbents() -> Vec<SorbentSpec> {
    let table = [
        (
            "LiCl",
            -408.0,
            42.4,
            vec![
                HydrateVariant::new(1, -712.0, -56.0),
                HydrateVariant::new(2, -1013.7, -109.7),
                HydrateVariant::new(3, -1311.0, -159.0),
                HydrateVariant::new(5, -1889.11, -241.11).with_min_stable_temperature(-80.0),
            ],
        ),
        (
            "MgSO4",
            -1278.0,
            120.36,
            vec![HydrateVariant::new(7, -3388.0, -374.0)],
        ),
        (
            "MgCl2",
            -641.0,
            95.21,
            vec![HydrateVariant::new(6, -2499.0, -370.0)],
        ),
        (
            "SrBr2",
            -717.0,
            247.4,
            vec![HydrateVariant::new(6, -2531.0, -326.0)],
        ),
        (
            "CaCl2",
            -795.0,
            110.98,
            vec![HydrateVariant::new(6, -2607.0, -363.2)],
        ),
    ];
    table
        .into_iter()
        .map(|(name, dhfd, molar, hydrates)| {
            SorbentSpec::new(name, dhfd, molar, hydrates).expect("built-in table is valid")
        })
        .collect()
}

/// Look up a sorbent by name (case-insensitive).
pub fn find_sorbent<'a>(specs: &'a [SorbentSpec], name: &str) -> Option<&'a SorbentSpec> {
    specs.iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

/// One row of the storage-capacity table.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRow {
    pub name: String,
    pub water_moles: u32,
    pub dehydrated_formation_enthalpy: f64,
    pub hydrate_formation_enthalpy: f64,
    pub reaction_enthalpy: f64,
    pub energy_wh_per_kg: f64,
}

/// Storage-capacity rows for every hydrate of every sorbent, from the
/// tabulated reaction enthalpies.
pub fn capacity_table(specs: &[SorbentSpec]) -> Vec<CapacityRow> {
    specs
        .iter()
        .flat_map(|s| {
            s.hydrates().iter().map(move |h| CapacityRow {
                name: s.name.clone(),
                water_moles: h.water_moles,
                dehydrated_formation_enthalpy: s.formation_enthalpy,
                hydrate_formation_enthalpy: h.formation_enthalpy,
                reaction_enthalpy: h.reaction_enthalpy,
                energy_wh_per_kg: energy_storage_density(h.reaction_enthalpy, s.molar_mass)
                    .expect("validated molar mass"),
            })
        })
        .collect()
}

/// CSV rendering of [`capacity_table`].
pub fn capacity_table_csv(rows: &[CapacityRow]) -> String {
    let mut out = String::from("name,x,dHfd_kJ_mol,dHfh_kJ_mol,dHr_kJ_mol,energy_Wh_kg\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.2}",
            r.name,
            r.water_moles,
            r.dehydrated_formation_enthalpy,
            r.hydrate_formation_enthalpy,
            r.reaction_enthalpy,
            r.energy_wh_per_kg
        );
    }
    out
}

/// Weights for the sorbent selection criteria. Quantified criteria come
/// from the database; the rest are ordinal scores supplied by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingWeights {
    pub water_uptake: f64,
    pub specific_energy: f64,
    pub low_temperature_stability: f64,
    pub kinetics: f64,
    pub availability: f64,
    pub ease_of_storage: f64,
    pub safety: f64,
}

impl RankingWeights {
    pub const ZERO: Self = Self {
        water_uptake: 0.0,
        specific_energy: 0.0,
        low_temperature_stability: 0.0,
        kinetics: 0.0,
        availability: 0.0,
        ease_of_storage: 0.0,
        safety: 0.0,
    };

    fn as_array(&self) -> [f64; 7] {
        [
            self.water_uptake,
            self.specific_energy,
            self.low_temperature_stability,
            self.kinetics,
            self.availability,
            self.ease_of_storage,
            self.safety,
        ]
    }
}

impl Default for RankingWeights {
    fn default() -> Self {
        Self {
            water_uptake: 1.0,
            specific_energy: 1.0,
            low_temperature_stability: 1.0,
            kinetics: 1.0,
            availability: 1.0,
            ease_of_storage: 1.0,
            safety: 1.0,
        }
    }
}

/// User-supplied 0–5 scores for the criteria the database cannot quantify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdinalScores {
    pub kinetics: f64,
    pub availability: f64,
    pub ease_of_storage: f64,
    pub safety: f64,
}

impl Default for OrdinalScores {
    fn default() -> Self {
        Self {
            kinetics: 3.0,
            availability: 3.0,
            ease_of_storage: 3.0,
            safety: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSorbent {
    pub name: String,
    /// Weighted score normalised so the best sorbent scores 1.
    pub score: f64,
}

/// Rank sorbents by a weighted sum of criteria, each normalised by its
/// maximum over the candidates. Low-temperature stability counts degrees
/// below 0 °C of the coldest stable hydrate (0 when unknown). Ties are
/// broken by name.
pub fn rank_sorbents(
    specs: &[SorbentSpec],
    weights: &RankingWeights,
    ordinals: &BTreeMap<String, OrdinalScores>,
) -> Result<Vec<RankedSorbent>> {
    let w = weights.as_array();
    if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("ranking weights must be non-negative".into()));
    }
    if w.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput(
            "at least one ranking weight must be positive".into(),
        ));
    }

    let raw: Vec<[f64; 7]> = specs
        .iter()
        .map(|s| {
            let top = s.hydrates().last().expect("validated non-empty");
            let ord = ordinals.get(&s.name).copied().unwrap_or_default();
            [
                f64::from(top.water_moles),
                energy_storage_density(top.reaction_enthalpy, s.molar_mass)
                    .expect("validated molar mass"),
                s.min_stable_temperature_c().map_or(0.0, |t| (-t).max(0.0)),
                ord.kinetics.clamp(0.0, 5.0),
                ord.availability.clamp(0.0, 5.0),
                ord.ease_of_storage.clamp(0.0, 5.0),
                ord.safety.clamp(0.0, 5.0),
            ]
        })
        .collect();

    let mut maxima = [0.0_f64; 7];
    for row in &raw {
        for (m, v) in maxima.iter_mut().zip(row) {
            *m = m.max(*v);
        }
    }

    let mut ranked: Vec<RankedSorbent> = specs
        .iter()
        .zip(&raw)
        .map(|(s, row)| {
            let score = row
                .iter()
                .zip(&maxima)
                .zip(&w)
                .map(|((v, m), wt)| if *m > 0.0 { wt * v / m } else { 0.0 })
                .sum::<f64>();
            RankedSorbent {
                name: s.name.clone(),
                score,
            }
        })
        .collect();

    let best = ranked.iter().map(|r| r.score).fold(0.0, f64::max);
    if best > 0.0 {
        for r in &mut ranked {
            r.score /= best;
        }
    }
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.name.cmp(&b.name)));
    Ok(ranked)
}
