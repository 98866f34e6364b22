//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lattice::HoppingSpec;
use crate::model::ModelParams;
use crate::numerics::Matrix;

pub const DEFAULT_PRECISION: usize = 12;
pub const PRECISION_RANGE: std::ops::RangeInclusive<usize> = 6..=17;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub ed: Option<EdConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads for sweeps; all available cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
pub enum LatticeKind {
    #[default]
    #[serde(rename = "nn-periodic")]
    NearestNeighborPeriodic,
    #[serde(rename = "explicit")]
    Explicit,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub omega_z: f64,
    pub g: f64,
    #[serde(rename = "Delta", default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub lattice_kind: LatticeKind,
    #[serde(default)]
    pub onsite: Option<Vec<f64>>,
    #[serde(default)]
    pub hopping_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCommand {
    #[default]
    Meanfield,
    Dispersion,
    Gaps,
    EdCheck,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// One of `g`, `omega_z`, `Delta`, `t`.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub command: SweepCommand,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdConfig {
    pub n_max: usize,
    #[serde(rename = "N_sites")]
    pub n_sites: usize,
    #[serde(default = "default_levels")]
    pub num_levels: usize,
}

fn default_levels() -> usize {
    6
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_precision() -> usize {
    DEFAULT_PRECISION
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { format: Format::Csv, path: None, precision: DEFAULT_PRECISION }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        check_precision(self.output.precision)?;
        self.model.params()?;
        if let Some(sweep) = &self.sweep {
            sweep.validate(&self.model)?;
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidInput("workers must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn check_precision(p: usize) -> Result<()> {
    if PRECISION_RANGE.contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("precision must lie in [6, 17], got {p}")))
    }
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams> {
        let lattice = match self.lattice_kind {
            LatticeKind::NearestNeighborPeriodic => self.nn_lattice()?,
            LatticeKind::Explicit => self.explicit_lattice()?,
        };
        ModelParams::new(self.omega_z, self.g, lattice)
    }

    fn nn_lattice(&self) -> Result<HoppingSpec> {
        if self.hopping_matrix.is_some() {
            return Err(Error::InvalidInput("hopping_matrix requires lattice_kind \"explicit\"".into()));
        }
        let t = self.t.ok_or_else(|| Error::InvalidInput("nn-periodic lattice needs t".into()))?;
        match (&self.onsite, self.delta) {
            (Some(_), Some(_)) => Err(Error::InvalidInput("give either Delta or onsite, not both".into())),
            (Some(onsite), None) => {
                if self.n.is_some_and(|n| n != onsite.len()) {
                    return Err(Error::InvalidInput(format!("N = {} but onsite has {} entries", self.n.unwrap(), onsite.len())));
                }
                HoppingSpec::nearest_neighbor(onsite.clone(), -t)
            }
            (None, Some(delta)) => {
                let n = self.n.ok_or_else(|| Error::InvalidInput("nn-periodic lattice needs N".into()))?;
                HoppingSpec::uniform_chain(n, delta, t)
            }
            (None, None) => Err(Error::InvalidInput("nn-periodic lattice needs Delta or onsite".into())),
        }
    }

    fn explicit_lattice(&self) -> Result<HoppingSpec> {
        let (Some(onsite), Some(rows)) = (&self.onsite, &self.hopping_matrix) else {
            return Err(Error::InvalidInput("explicit lattice needs onsite and hopping_matrix".into()));
        };
        if self.delta.is_some() || self.t.is_some() {
            return Err(Error::InvalidInput("Delta and t do not apply to an explicit lattice".into()));
        }
        if self.n.is_some_and(|n| n != onsite.len()) {
            return Err(Error::InvalidInput(format!("N = {} but onsite has {} entries", self.n.unwrap(), onsite.len())));
        }
        if rows.len() != onsite.len() || rows.iter().any(|r| r.len() != onsite.len()) {
            return Err(Error::InvalidInput("hopping_matrix must be square and match onsite".into()));
        }
        HoppingSpec::explicit(onsite.clone(), Matrix::from_rows(rows))
    }

    /// Copy with one named parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = self.clone();
        match name {
            "g" => out.g = value,
            "omega_z" => out.omega_z = value,
            "Delta" if self.delta.is_some() => out.delta = Some(value),
            "t" if self.t.is_some() => out.t = Some(value),
            _ => return Err(Error::InvalidInput(format!("cannot sweep parameter {name:?} on this lattice"))),
        }
        Ok(out)
    }
}

impl SweepConfig {
    fn validate(&self, model: &ModelConfig) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidInput("sweep needs at least one point".into()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidInput("sweep bounds must be finite".into()));
        }
        model.with_parameter(&self.parameter, self.start)?;
        Ok(())
    }

    /// Evenly spaced values from start to stop inclusive.
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"{"model": {"omega_z": 1, "g": 1, "Delta": 1, "t": 0.5, "N": 100}}"#;

    #[test]
    fn minimal_config() {
        let c = RunConfig::from_json(FIG1).unwrap();
        assert_eq!(c.output, OutputConfig::default());
        let p = c.model.params().unwrap();
        assert_eq!(p.lattice.sites(), 100);
        assert_eq!(p.lattice.chain_parameters(), Some((1.0, 0.5)));
    }

    #[test]
    fn rejects_bad_documents() {
        for bad in [
            r#"{"model": {"omega_z": 1, "g": 1, "Delta": 1, "t": 0.5}}"#,
            r#"{"model": {"omega_z": 1, "g": 1, "Delta": 1, "t": 0.5, "N": 4}, "output": {"precision": 5}}"#,
            r#"{"model": {"omega_z": 1, "g": 1, "Delta": 1, "t": 0.5, "N": 4}, "output": {"precision": 18}}"#,
            r#"{"model": {"omega_z": 1, "g": 1, "Delta": 1, "t": 0.5, "N": 4}, "extra": 1}"#,
            r#"{"model": {"omega_z": 1, "g": 1, "Delta": 1, "t": 0.5, "N": 4}, "sweep": {"parameter": "q", "start": 0, "stop": 1, "points": 3}}"#,
            r#"{"model": {"omega_z": 1, "g": 1, "Delta": 1, "t": 0.5, "N": 4}, "sweep": {"parameter": "g", "start": 0, "stop": 1, "points": 0}}"#,
            r#"{"model": {"omega_z": 1, "g": 1, "lattice_kind": "explicit", "onsite": [1, 1]}}"#,
            r#"{"model": {"omega_z": -1, "g": 1, "Delta": 1, "t": 0.5, "N": 4}}"#,
            "not json",
        ] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::InvalidInput(_))), "{bad}");
        }
    }

    #[test]
    fn explicit_lattice() {
        let text = r#"{"model": {"omega_z": 1, "g": 1, "lattice_kind": "explicit",
            "onsite": [1.0, 1.5, 2.0], "hopping_matrix": [[0, -0.2, 0], [-0.2, 0, -0.1], [0, -0.1, 0]]}}"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(c.model.params().unwrap().lattice.sites(), 3);
        assert!(c.model.with_parameter("t", 0.1).is_err());
        assert!(c.model.with_parameter("g", 2.0).is_ok());
    }

    #[test]
    fn grid_endpoints() {
        let s = SweepConfig { parameter: "g".into(), start: 0.0, stop: 2.0, points: 201, command: SweepCommand::Meanfield };
        let grid = s.grid();
        assert_eq!(grid.len(), 201);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[200], 2.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}
