//! Run configuration: a JSON file whose fields command-line flags override.

use std::path::{Path, PathBuf};

use chaospi_core::chaos::{AnalyzeOptions, CaoOptions, RosensteinOptions};
use chaospi_core::pipeline::{IntervalPolicy, PointPolicy, Preset, StageParams};
use chaospi_core::{ModelKind, PipelineConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { base: u64, count: usize },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { base, count } => (*base..).take(*count).collect(),
        }
    }

    /// `"1,2,3"`, `"1..21"` (half-open) or `"1..=20"`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("cannot parse seeds {s:?}"));
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        if let Some((a, b)) = s.split_once("..") {
            let (lo, hi) = match b.strip_prefix('=') {
                Some(b) => (num(a)?, num(b)?.checked_add(1).ok_or_else(bad)?),
                None => (num(a)?, num(b)?),
            };
            if hi <= lo {
                return Err(bad());
            }
            return Ok(SeedSpec::Range {
                base: lo,
                count: (hi - lo) as usize,
            });
        }
        s.split(',')
            .map(num)
            .collect::<Result<_, _>>()
            .map(SeedSpec::List)
    }
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::Range { base: 1, count: 20 }
    }
}

/// Chaos options other than the `tau` / `m` overrides, which sit at the top level.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosSection {
    pub max_lag: Option<usize>,
    pub cao: CaoOptions,
    pub rosenstein: RosensteinOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub test_horizon: usize,
    pub tau: Option<usize>,
    pub m: Option<usize>,
    pub model: ModelKind,
    /// Published hyperparameter set; `nsga` takes precedence when both are given.
    pub preset: Option<Preset>,
    pub nsga: Option<StageParams>,
    pub grid_step: f64,
    pub picp_target: f64,
    pub point_policy: PointPolicy,
    pub interval_policy: IntervalPolicy,
    pub standardize: bool,
    pub chaos: ChaosSection,
    pub seeds: SeedSpec,
    /// Run seeds and objective evaluations on the thread pool. Results do not
    /// depend on it.
    pub parallel: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            input: None,
            column: None,
            test_horizon: p.test_horizon,
            tau: None,
            m: None,
            model: ModelKind::TwoStage,
            preset: None,
            nsga: None,
            grid_step: p.grid_step,
            picp_target: p.picp_target,
            point_policy: p.point_policy,
            interval_policy: p.interval_policy,
            standardize: p.standardize,
            chaos: ChaosSection::default(),
            seeds: SeedSpec::default(),
            parallel: true,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.test_horizon == 0 {
            return Err(CliError::Config("test_horizon must be >= 1".into()));
        }
        if self.seeds.seeds().is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        if self.tau == Some(0) || self.m == Some(0) {
            return Err(CliError::Config("tau and m must be >= 1".into()));
        }
        Ok(())
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Config("no input file given (--input or \"input\")".into()))
    }

    pub fn analyze_options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            tau: self.tau,
            m: self.m,
            max_lag: self.chaos.max_lag,
            cao: self.chaos.cao,
            rosenstein: self.chaos.rosenstein,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        let mut nsga = match (&self.nsga, self.preset) {
            (Some(n), _) => n.clone(),
            (None, Some(p)) => StageParams::preset(p),
            (None, None) => StageParams::default(),
        };
        for block in [
            &mut nsga.stage2,
            &mut nsga.stage3_single,
            &mut nsga.stage3_dual,
        ] {
            block.parallel = self.parallel;
        }
        PipelineConfig {
            test_horizon: self.test_horizon,
            chaos: self.analyze_options(),
            nsga,
            grid_step: self.grid_step,
            picp_target: self.picp_target,
            point_policy: self.point_policy,
            interval_policy: self.interval_policy,
            standardize: self.standardize,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_syntax() {
        assert_eq!(SeedSpec::parse("3, 1,2").unwrap().seeds(), vec![3, 1, 2]);
        assert_eq!(SeedSpec::parse("1..4").unwrap().seeds(), vec![1, 2, 3]);
        assert_eq!(SeedSpec::parse("1..=4").unwrap().seeds(), vec![1, 2, 3, 4]);
        assert!(SeedSpec::parse("4..1").is_err());
        assert!(SeedSpec::parse("a").is_err());
        assert_eq!(SeedSpec::default().seeds().len(), 20);
    }

    #[test]
    fn json_forms() {
        let c: RunConfig = serde_json::from_str(
            r#"{"seeds": {"base": 5, "count": 2}, "model": "three_stage_dual", "preset": "headline"}"#,
        )
        .unwrap();
        assert_eq!(c.seeds.seeds(), vec![5, 6]);
        assert_eq!(c.model, ModelKind::ThreeStageDual);
        assert_eq!(c.pipeline().nsga.stage2.generations, 50);
        let c: RunConfig = serde_json::from_str(r#"{"seeds": [9]}"#).unwrap();
        assert_eq!(c.seeds.seeds(), vec![9]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"horizon": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"model": "four_stage"}"#).is_err());
    }

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.pipeline(), PipelineConfig::default());
    }
}
