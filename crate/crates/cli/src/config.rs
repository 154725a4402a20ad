//! Run configuration: a TOML file, command-line overrides, and defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "CONTACT_BUNDLES_THREADS";
pub const DEFAULT_SEED: u64 = 42;

pub const SCENARIOS: [&str; 10] = [
    "std_contact",
    "hopf_fatness",
    "assoc_contact",
    "parallel_transport",
    "yamazaki_n1",
    "yamazaki_n2",
    "kcontact_killing",
    "cross_section_su2_s3",
    "cross_section_su2_s5",
    "negative_controls",
];

/// Names accepted by [`Tolerances::set`], in declaration order.
pub const TOLERANCE_NAMES: [&str; 22] = [
    "pf",
    "fat",
    "invariance",
    "reeb_exact",
    "reeb",
    "reproduction",
    "equivariance",
    "curvature",
    "sigma",
    "basic",
    "fiber_restriction",
    "connection_angle",
    "transport_angle",
    "transport_base",
    "killing",
    "verticality",
    "compatibility",
    "block_variation",
    "splitting_a",
    "splitting_c",
    "membership",
    "bracket",
];

/// Pass thresholds. Every field can be set in the `[tolerances]` table or
/// with `--tol-<name>` (underscores become dashes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative Pfaffian degeneracy threshold.
    pub pf: f64,
    /// Relative fatness threshold `|det W| / ‖W‖_F^n`.
    pub fat: f64,
    pub invariance: f64,
    pub reeb_exact: f64,
    pub reeb: f64,
    pub reproduction: f64,
    pub equivariance: f64,
    pub curvature: f64,
    pub sigma: f64,
    pub basic: f64,
    pub fiber_restriction: f64,
    pub connection_angle: f64,
    pub transport_angle: f64,
    pub transport_base: f64,
    pub killing: f64,
    pub verticality: f64,
    pub compatibility: f64,
    pub block_variation: f64,
    pub splitting_a: f64,
    pub splitting_c: f64,
    pub membership: f64,
    pub bracket: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pf: 1e-8,
            fat: 1e-6,
            invariance: 1e-8,
            reeb_exact: 1e-12,
            reeb: 1e-8,
            reproduction: 1e-10,
            equivariance: 1e-9,
            curvature: 1e-6,
            sigma: 1e-6,
            basic: 1e-9,
            fiber_restriction: 0.0,
            connection_angle: 1e-7,
            transport_angle: 1e-4,
            transport_base: 1e-6,
            killing: 1e-4,
            verticality: 1e-7,
            compatibility: 1e-9,
            block_variation: 1e-3,
            splitting_a: 1e-7,
            splitting_c: 1e-7,
            membership: 1e-7,
            bracket: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        let slot = match name.replace('-', "_").as_str() {
            "pf" => &mut self.pf,
            "fat" => &mut self.fat,
            "invariance" => &mut self.invariance,
            "reeb_exact" => &mut self.reeb_exact,
            "reeb" => &mut self.reeb,
            "reproduction" => &mut self.reproduction,
            "equivariance" => &mut self.equivariance,
            "curvature" => &mut self.curvature,
            "sigma" => &mut self.sigma,
            "basic" => &mut self.basic,
            "fiber_restriction" => &mut self.fiber_restriction,
            "connection_angle" => &mut self.connection_angle,
            "transport_angle" => &mut self.transport_angle,
            "transport_base" => &mut self.transport_base,
            "killing" => &mut self.killing,
            "verticality" => &mut self.verticality,
            "compatibility" => &mut self.compatibility,
            "block_variation" => &mut self.block_variation,
            "splitting_a" => &mut self.splitting_a,
            "splitting_c" => &mut self.splitting_c,
            "membership" => &mut self.membership,
            "bracket" => &mut self.bracket,
            other => return Err(CliError::Config(format!("unknown tolerance `{other}`"))),
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(CliError::Config(format!("tolerance `{name}` must be a finite non-negative number")));
        }
        *slot = value;
        Ok(())
    }
}

/// The contents of a config file. All keys are optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub tolerances: Option<Tolerances>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: u64,
    /// Overrides the scenario's primary sample count.
    pub samples: Option<usize>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(scenario: &str, seed: u64) -> Self {
        ScenarioConfig {
            scenario: scenario.into(),
            seed,
            samples: None,
            tolerances: Tolerances::default(),
            threads: None,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !SCENARIOS.contains(&self.scenario.as_str()) {
            return Err(CliError::Config(format!(
                "unknown scenario `{}` (see --list-scenarios)",
                self.scenario
            )));
        }
        if self.samples == Some(0) {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// `samples` if given, else `default`.
    pub fn count(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

/// Worker count from `--threads`, the config file, or [`THREADS_ENV`].
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(FileConfig::parse("scenario = \"std_contact\"\nbogus = 1\n").is_err());
        assert!(FileConfig::parse("[tolerances]\nnot_a_tol = 1.0\n").is_err());
    }

    #[test]
    fn partial_tolerance_table_keeps_defaults() {
        let c = FileConfig::parse("seed = 7\n[tolerances]\nkilling = 1e-3\n").unwrap();
        let t = c.tolerances.unwrap();
        assert_eq!(t.killing, 1e-3);
        assert_eq!(t.pf, 1e-8);
        assert_eq!(c.seed, Some(7));
    }

    #[test]
    fn tolerance_names_accept_dashes() {
        let mut t = Tolerances::default();
        t.set("transport-angle", 2e-4).unwrap();
        assert_eq!(t.transport_angle, 2e-4);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("pf", -1.0).is_err());
    }

    #[test]
    fn every_listed_name_is_settable() {
        let mut t = Tolerances::default();
        for name in TOLERANCE_NAMES {
            t.set(name, 0.5).unwrap();
        }
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json.as_object().unwrap().len(), TOLERANCE_NAMES.len());
        assert!(json.as_object().unwrap().values().all(|v| v.as_f64() == Some(0.5)));
    }
}
