//! Scenario configuration: one TOML document with preset layering and
//! `key.path=value` overrides.

use serde::{Deserialize, Serialize};

use crate::control::{FilterSpec, Gains};
use crate::error::{Error, Result};
use crate::ifs::{logistic, verify_schur, DEFAULT_FLOOR, DEFAULT_SCHUR_MARGIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub spots: usize,
    pub occupancy: f64,
    pub initial_on: f64,
    pub r_target: f64,
    pub neighbor_radius_m: f64,
    pub rfid_radius_m: f64,
    pub ped_speed_mps: f64,
    pub timeout_s: f64,
    pub tick_s: f64,
    pub control_period_s: f64,
    pub n_sims: usize,
    pub seed: u64,
    /// Walk a pedestrian and stop at detection; off for pure regulation runs.
    pub pedestrian: bool,
    /// Minimum selection probability asserted during runs.
    pub floor: f64,
    pub city: CityConfig,
    pub behavior: BehaviorConfig,
    pub controller: ControllerConfig,
    pub filter: FilterSpec,
    pub environment: EnvironmentConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            spots: 24_067,
            occupancy: 0.5,
            initial_on: 0.3,
            r_target: 7_200.0,
            neighbor_radius_m: 20.0,
            rfid_radius_m: 6.0,
            ped_speed_mps: 1.39,
            timeout_s: 1_800.0,
            tick_s: 1.0,
            control_period_s: 20.0,
            n_sims: 100,
            seed: 7,
            pedestrian: true,
            floor: DEFAULT_FLOOR,
            city: CityConfig::default(),
            behavior: BehaviorConfig::default(),
            controller: ControllerConfig::default(),
            filter: FilterSpec::Identity,
            environment: EnvironmentConfig::default(),
        }
    }
}

/// Street lattice with parking bays along both curbs of some blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CityConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub street_spacing_m: f64,
    pub bay_spacing_m: f64,
    /// Distance from the street centreline to a parked car.
    pub curb_offset_m: f64,
    /// No bays this close to an intersection.
    pub intersection_clearance_m: f64,
    /// Seeds which blocks carry bays; fixed across a campaign.
    pub layout_seed: u64,
    /// Probability that a parked car takes part in sensing.
    pub participation: f64,
}

impl Default for CityConfig {
    fn default() -> Self {
        Self {
            width_m: 6_000.0,
            height_m: 6_000.0,
            street_spacing_m: 150.0,
            bay_spacing_m: 6.0,
            curb_offset_m: 4.0,
            intersection_clearance_m: 10.0,
            layout_seed: 1,
            participation: 1.0,
        }
    }
}

/// `p_on(π) = logistic(slope·π + intercept)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub slope: f64,
    pub intercept: f64,
}

impl Curve {
    pub fn p_on(&self, pi: f64) -> f64 {
        logistic(self.slope * pi + self.intercept)
    }

    /// Curve with `p_on(0) = p0`.
    pub fn through(slope: f64, p0: f64) -> Self {
        Self { slope, intercept: (p0 / (1.0 - p0)).ln() }
    }
}

pub const DEFAULT_SLOPE: f64 = 2e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorConfig {
    /// At most this many neighbours: the "few" curve.
    pub t_few: u32,
    /// At least this many neighbours: the "many" curve.
    pub t_many: u32,
    pub few: Curve,
    pub some: Curve,
    pub many: Curve,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        Self {
            t_few: 2,
            t_many: 8,
            few: Curve::through(DEFAULT_SLOPE, 0.9),
            some: Curve::through(DEFAULT_SLOPE, 0.5),
            many: Curve::through(DEFAULT_SLOPE, 0.2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub pi_min: f64,
    pub pi_max: f64,
    pub pi0: f64,
    /// Accept |γ| > 1 with a warning instead of an error.
    pub allow_unstable: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let g = Gains::REFERENCE;
        Self { alpha: g.alpha, gamma: g.gamma, kappa: g.kappa, pi_min: -20_000.0, pi_max: 20_000.0, pi0: 0.0, allow_unstable: false }
    }
}

impl ControllerConfig {
    pub fn gains(&self) -> Gains {
        Gains { alpha: self.alpha, gamma: self.gamma, kappa: self.kappa }
    }
}

/// Time-varying environment: every `segment_s` seconds each car's neighbour
/// count is offset by a fresh integer in `−delta..=delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub delta: u32,
    /// Zero disables segmentation.
    pub segment_s: f64,
}

pub const PRESETS: [&str; 3] = ["melbourne-scale", "regulation-only", "small"];

/// Named starting points for the layering.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let mut c = ScenarioConfig::default();
    match name {
        "melbourne-scale" => {}
        "regulation-only" => {
            c.pedestrian = false;
            c.n_sims = 10;
        }
        "small" => {
            // a quarter of the spots on a city a quarter the area; the slope
            // grows with the population shrink so the loop gain is unchanged
            c.spots = 6_000;
            c.r_target = 1_800.0;
            c.city.width_m = 3_000.0;
            c.city.height_m = 3_000.0;
            c.n_sims = 20;
            let slope = DEFAULT_SLOPE * 4.0;
            c.behavior.few = Curve::through(slope, 0.9);
            c.behavior.some = Curve::through(slope, 0.5);
            c.behavior.many = Curve::through(slope, 0.2);
            c.controller.pi_min = -5_000.0;
            c.controller.pi_max = 5_000.0;
        }
        _ => return Err(Error::Config(format!("unknown preset {name:?}; available: {}", PRESETS.join(", ")))),
    }
    Ok(c)
}

fn to_table(c: &ScenarioConfig) -> Result<toml::Table> {
    toml::Table::try_from(c).map_err(|e| Error::Config(e.to_string()))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses `a.b=value`; the value is read as TOML, falling back to a bare string.
pub fn parse_override(s: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {s:?} is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(|p| p.trim().to_string()).collect();
    if path.iter().any(|p| p.is_empty() || !p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')) {
        return Err(Error::Config(format!("override key {key:?} is not a dotted identifier path")));
    }
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed table has the key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((path, value))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("override path is non-empty");
    let mut t = table;
    for (depth, p) in parents.iter().enumerate() {
        t = match t.entry(p.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new())) {
            toml::Value::Table(inner) => inner,
            _ => return Err(Error::Config(format!("override key {:?} is not a table", path[..=depth].join(".")))),
        };
    }
    t.insert(last.clone(), value);
    Ok(())
}

fn from_table(t: toml::Table) -> Result<ScenarioConfig> {
    ScenarioConfig::deserialize(t).map_err(|e| Error::Config(e.to_string()))
}

/// Parses a config document on its own (missing keys take defaults).
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// `preset → file → overrides`, later layers winning key by key.
pub fn resolve(preset_name: Option<&str>, file: Option<&str>, overrides: &[String]) -> Result<ScenarioConfig> {
    let base = match preset_name {
        Some(p) => preset(p)?,
        None => ScenarioConfig::default(),
    };
    let mut table = to_table(&base)?;
    if let Some(text) = file {
        let over: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        // reject unknown keys against the file alone, so errors point at the file
        from_table(over.clone())?;
        merge(&mut table, over);
    }
    for o in overrides {
        let (path, value) = parse_override(o)?;
        apply_override(&mut table, &path, value)?;
    }
    from_table(table)
}

impl ScenarioConfig {
    /// Canonical TOML text; parsing it yields `self` again.
    pub fn canonical(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn ticks(&self) -> usize {
        (self.timeout_s / self.tick_s).round() as usize
    }

    pub fn control_period_ticks(&self) -> usize {
        (self.control_period_s / self.tick_s).round() as usize
    }

    pub fn segment_ticks(&self) -> Option<usize> {
        (self.environment.segment_s > 0.0).then(|| (self.environment.segment_s / self.tick_s).round() as usize)
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let mut push = |name: &'static str, precondition: Option<&'static str>, severity: Severity, detail: String| {
            out.push(Check { name, precondition, severity, detail });
        };

        let mut ranges = Vec::new();
        if self.spots == 0 {
            ranges.push("spots must be at least 1".to_string());
        }
        for (k, v) in [("occupancy", self.occupancy), ("initial_on", self.initial_on), ("city.participation", self.city.participation)] {
            if !(0.0..=1.0).contains(&v) {
                ranges.push(format!("{k} = {v} outside [0, 1]"));
            }
        }
        for (k, v) in [
            ("r_target", self.r_target),
            ("neighbor_radius_m", self.neighbor_radius_m),
            ("rfid_radius_m", self.rfid_radius_m),
            ("ped_speed_mps", self.ped_speed_mps),
            ("timeout_s", self.timeout_s),
            ("tick_s", self.tick_s),
            ("control_period_s", self.control_period_s),
            ("city.width_m", self.city.width_m),
            ("city.height_m", self.city.height_m),
            ("city.street_spacing_m", self.city.street_spacing_m),
            ("city.bay_spacing_m", self.city.bay_spacing_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                ranges.push(format!("{k} = {v} must be positive"));
            }
        }
        for (k, v) in [
            ("city.curb_offset_m", self.city.curb_offset_m),
            ("city.intersection_clearance_m", self.city.intersection_clearance_m),
            ("environment.segment_s", self.environment.segment_s),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                ranges.push(format!("{k} = {v} must be non-negative"));
            }
        }
        if self.n_sims == 0 {
            ranges.push("n_sims must be at least 1".into());
        }
        if self.tick_s > 0.0 {
            for (k, v) in [("timeout_s", self.timeout_s), ("control_period_s", self.control_period_s), ("environment.segment_s", self.environment.segment_s)] {
                let r = v / self.tick_s;
                if (r - r.round()).abs() > 1e-9 {
                    ranges.push(format!("{k} = {v} is not a whole number of ticks of {} s", self.tick_s));
                }
            }
        }
        if !(self.floor > 0.0 && self.floor < 0.5) {
            ranges.push(format!("floor = {} must lie in (0, 0.5)", self.floor));
        }
        if let Err(e) = self.filter.validate() {
            ranges.push(e.to_string());
        }
        match crate::search::bay_capacity(&self.city) {
            Ok(cap) if cap < self.spots => ranges.push(format!("the city has room for {cap} bays, fewer than spots = {}", self.spots)),
            Ok(_) => {}
            Err(e) => ranges.push(e.to_string()),
        }
        let ranges_ok = ranges.is_empty();
        push(
            "parameter ranges",
            None,
            if ranges_ok { Severity::Pass } else { Severity::Error },
            if ranges_ok { "all values in range".into() } else { ranges.join("; ") },
        );

        // on/off maps x ↦ 0 and x ↦ 1 share the zero matrix
        let schur = verify_schur(&nalgebra::DMatrix::zeros(1, 1), DEFAULT_SCHUR_MARGIN);
        let schur_ok = schur.as_ref().is_ok_and(|s| s.stable);
        push(
            "schur maps",
            Some("each A_i is a Schur matrix"),
            if schur_ok { Severity::Pass } else { Severity::Error },
            format!("on/off maps have spectral radius {}", schur.map(|s| s.spectral_radius).unwrap_or(f64::NAN)),
        );

        let b = &self.behavior;
        let slope_bad: Vec<&str> = [("few", b.few), ("some", b.some), ("many", b.many)]
            .into_iter()
            .filter(|(_, c)| !(c.slope.is_finite() && c.slope > 0.0 && c.intercept.is_finite()))
            .map(|(n, _)| n)
            .collect();
        push(
            "response curves increasing",
            None,
            if slope_bad.is_empty() { Severity::Pass } else { Severity::Error },
            if slope_bad.is_empty() { "all slopes positive".into() } else { format!("curves {slope_bad:?} need a finite positive slope") },
        );

        let c = &self.controller;
        let mut worst = (f64::INFINITY, "", 0.0);
        for (n, curve) in [("few", b.few), ("some", b.some), ("many", b.many)] {
            for pi in [c.pi_min, c.pi_max] {
                let p = curve.p_on(pi);
                let m = p.min(1.0 - p);
                if m < worst.0 {
                    worst = (m, n, pi);
                }
            }
        }
        let floor_ok = worst.0 >= self.floor;
        push(
            "probability floor",
            Some("probabilities are bounded away from zero"),
            if floor_ok { Severity::Pass } else { Severity::Error },
            format!(
                "smallest on/off probability on [{}, {}] is {:.3e} ({} curve at pi = {}), floor {:.1e}",
                c.pi_min, c.pi_max, worst.0, worst.1, worst.2, self.floor
            ),
        );

        let order_ok = b.t_few < b.t_many;
        push(
            "threshold ordering",
            None,
            if order_ok { Severity::Pass } else { Severity::Error },
            format!("t_few = {}, t_many = {}", b.t_few, b.t_many),
        );

        let gains_finite = [c.alpha, c.gamma, c.kappa, c.pi_min, c.pi_max, c.pi0].iter().all(|v| v.is_finite());
        let clamp_ok = gains_finite && c.pi_min < c.pi_max && (c.pi_min..=c.pi_max).contains(&c.pi0);
        push(
            "signal clamp",
            None,
            if clamp_ok { Severity::Pass } else { Severity::Error },
            format!("pi in [{}, {}], pi0 = {}", c.pi_min, c.pi_max, c.pi0),
        );

        let stable = c.gamma.abs() <= 1.0;
        push(
            "controller stability",
            Some("the controller is a stable linear system"),
            match (stable, c.allow_unstable) {
                (true, _) => Severity::Pass,
                (false, true) => Severity::Warning,
                (false, false) => Severity::Error,
            },
            format!("|gamma| = {}", c.gamma.abs()),
        );
        out
    }

    /// Fails on the first check with [`Severity::Error`].
    pub fn validate(&self) -> Result<()> {
        match self.checks().into_iter().find(|c| c.severity == Severity::Error) {
            Some(c) => Err(Error::Config(c.to_string())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Pass,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Convergence precondition at stake, if any.
    pub precondition: Option<&'static str>,
    pub severity: Severity,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Pass => "ok",
            Severity::Warning => "warning",
            Severity::Error => "FAILED",
        };
        write!(f, "{tag}: {}: {}", self.name, self.detail)?;
        if self.severity != Severity::Pass {
            if let Some(p) = self.precondition {
                write!(f, " (violates precondition: {p})")?;
            }
        }
        Ok(())
    }
}
