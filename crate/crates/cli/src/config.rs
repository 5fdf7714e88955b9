//! Effective run configuration: preset, `key=value` file, flag overrides.

use std::fmt::Debug;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use orbavg::j2problem::J2Config;
use orbavg::runner::RunConfig;

use crate::CliError;

/// Example data sets with Earth constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Preset {
    #[default]
    Polar,
    Cosb,
}

impl Preset {
    pub fn problem(self) -> J2Config {
        match self {
            Preset::Polar => J2Config::polar(),
            Preset::Cosb => J2Config::cosb(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Polar => "polar",
            Preset::Cosb => "cosb",
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "polar" => Ok(Preset::Polar),
            "cosb" => Ok(Preset::Cosb),
            _ => Err(CliError::Usage(format!("unknown preset '{s}', expected polar or cosb"))),
        }
    }
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub run: RunConfig,
    pub out_dir: PathBuf,
}

/// Keys accepted in config files and written to manifests, in order.
pub const KEYS: &[&str] = &[
    "p0",
    "e0",
    "y0",
    "epsilon",
    "orbits",
    "theta_grid",
    "tau_grid",
    "rk_abs_tol",
    "rk_rel_tol",
    "inverse_mode",
    "interp_mode",
    "theta_refine",
    "sample_count",
    "compare_points",
    "slack",
    "l_orbit_budget",
    "out_dir",
];

fn parse<T>(key: &str, value: &str) -> Result<T, CliError>
where
    T: FromStr,
    T::Err: Debug,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid value '{value}' for {key}: {e:?}")))
}

impl CliConfig {
    pub fn from_preset(preset: Preset) -> Self {
        Self {
            run: RunConfig::new(preset.problem()),
            out_dir: PathBuf::from("out"),
        }
    }

    /// Set one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let r = &mut self.run;
        let p = &mut r.problem;
        match key {
            "p0" => p.p0 = parse(key, value)?,
            "e0" => p.e0 = parse(key, value)?,
            "y0" => p.y0 = parse(key, value)?,
            "epsilon" => p.epsilon = parse(key, value)?,
            "orbits" => p.orbits = parse(key, value)?,
            "theta_grid" => p.theta_grid = parse(key, value)?,
            "tau_grid" => p.tau_grid = parse(key, value)?,
            "rk_abs_tol" => r.rk_abs_tol = parse(key, value)?,
            "rk_rel_tol" => r.rk_rel_tol = parse(key, value)?,
            "inverse_mode" => r.inverse_mode = parse(key, value)?,
            "interp_mode" => r.interp_mode = parse(key, value)?,
            "theta_refine" => r.theta_refine = parse(key, value)?,
            "sample_count" => r.sample_count = parse(key, value)?,
            "compare_points" => r.compare_points = parse(key, value)?,
            "slack" => r.slack = parse(key, value)?,
            "l_orbit_budget" => r.l_orbit_budget = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(CliError::Usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Text form of one key; floats in shortest round-trip notation.
    pub fn get(&self, key: &str) -> Option<String> {
        let r = &self.run;
        let p = &r.problem;
        Some(match key {
            "p0" => format!("{:?}", p.p0),
            "e0" => format!("{:?}", p.e0),
            "y0" => format!("{:?}", p.y0),
            "epsilon" => format!("{:?}", p.epsilon),
            "orbits" => format!("{:?}", p.orbits),
            "theta_grid" => p.theta_grid.to_string(),
            "tau_grid" => p.tau_grid.to_string(),
            "rk_abs_tol" => format!("{:?}", r.rk_abs_tol),
            "rk_rel_tol" => format!("{:?}", r.rk_rel_tol),
            "inverse_mode" => r.inverse_mode.as_str().to_string(),
            "interp_mode" => r.interp_mode.as_str().to_string(),
            "theta_refine" => r.theta_refine.to_string(),
            "sample_count" => r.sample_count.to_string(),
            "compare_points" => r.compare_points.to_string(),
            "slack" => format!("{:?}", r.slack),
            "l_orbit_budget" => format!("{:?}", r.l_orbit_budget),
            "out_dir" => self.out_dir.display().to_string(),
            _ => return None,
        })
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|k| (*k, self.get(k).unwrap_or_default())).collect()
    }

    /// Manifest text: a config file that reproduces this run.
    pub fn manifest(&self, command: &str) -> String {
        let mut out = format!("# orbavg {command}\n");
        for (k, v) in self.pairs() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.run.validate().map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Build the configuration from a preset, an optional file, and overrides.
/// A `preset` key in the file is honoured unless `preset` is given.
pub fn resolve(
    preset: Option<Preset>,
    file: Option<&Path>,
    overrides: &[(&str, String)],
) -> Result<CliConfig, CliError> {
    let pairs = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    let file_preset = pairs.iter().find(|(k, _)| k == "preset").map(|(_, v)| v.parse()).transpose()?;
    let mut cfg = CliConfig::from_preset(preset.or(file_preset).unwrap_or_default());
    for (k, v) in pairs.iter().filter(|(k, _)| k != "preset") {
        cfg.set(k, v)?;
    }
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let mut cfg = CliConfig::from_preset(Preset::Cosb);
        cfg.set("epsilon", "0.000123456789").unwrap();
        cfg.set("inverse_mode", "exact").unwrap();
        cfg.set("out_dir", "/tmp/x y").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.txt");
        fs::write(&path, cfg.manifest("estimate")).unwrap();
        let back = resolve(None, Some(&path), &[]).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_beat_file_and_file_beats_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        fs::write(&path, "preset=cosb\norbits=10\n# comment\n\ntau_grid = 20\n").unwrap();
        let cfg = resolve(None, Some(&path), &[("orbits", "50".to_string())]).unwrap();
        assert_eq!(cfg.run.problem.p0, 1.973);
        assert_eq!(cfg.run.problem.orbits, 50.0);
        assert_eq!(cfg.run.problem.tau_grid, 20);
        let cfg = resolve(Some(Preset::Polar), Some(&path), &[]).unwrap();
        assert_eq!(cfg.run.problem.p0, 3.0);
    }

    #[test]
    fn bad_keys_and_values_are_usage_errors() {
        let mut cfg = CliConfig::from_preset(Preset::Polar);
        assert!(matches!(cfg.set("nope", "1"), Err(CliError::Usage(_))));
        assert!(matches!(cfg.set("p0", "abc"), Err(CliError::Usage(_))));
        assert!(matches!(cfg.set("inverse_mode", "fast"), Err(CliError::Usage(_))));
        assert!(parse_pairs("just text").is_err());
    }

    #[test]
    fn every_key_has_a_text_form() {
        let cfg = CliConfig::from_preset(Preset::Polar);
        for k in KEYS {
            let v = cfg.get(k).unwrap();
            let mut copy = cfg.clone();
            copy.set(k, &v).unwrap();
            assert_eq!(copy, cfg, "{k}");
        }
    }
}
