use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NetworkParams;
use crate::scheduling::{SchedulerKind, WeightFn};

/// Where decision schedules come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionMode {
    /// Emulated contention slot.
    #[default]
    Contention,
    /// Uniform draw over the candidate schedules, Idle included.
    UniformSampler,
}

impl std::fmt::Display for DecisionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecisionMode::Contention => "contention",
            DecisionMode::UniformSampler => "uniform-sampler",
        })
    }
}

impl std::str::FromStr for DecisionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "contention" => Ok(DecisionMode::Contention),
            "uniform-sampler" => Ok(DecisionMode::UniformSampler),
            other => Err(format!("unknown decision mode `{other}` (contention|uniform-sampler)")),
        }
    }
}

pub const DEFAULT_HORIZON: u64 = 10_000;
pub const DEFAULT_SEEDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: NetworkParams,
    pub scheduler: SchedulerKind,
    pub horizon: u64,
    pub n_seeds: usize,
    pub decision_mode: DecisionMode,
}

/// On-disk layout: one flat TOML table.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rho: Vec<f64>,
    lambda: Vec<f64>,
    a_max: Option<u32>,
    beta: Option<f64>,
    contention_window: Option<u32>,
    seed: Option<u64>,
    weight_fn: Option<WeightFn>,
    scheduler: Option<SchedulerKind>,
    horizon: Option<u64>,
    n_seeds: Option<usize>,
    decision_mode: Option<DecisionMode>,
}

impl ExperimentConfig {
    pub fn new(params: NetworkParams, scheduler: SchedulerKind) -> Self {
        ExperimentConfig {
            params,
            scheduler,
            horizon: DEFAULT_HORIZON,
            n_seeds: DEFAULT_SEEDS,
            decision_mode: DecisionMode::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.horizon < 1 {
            return Err(Error::InvalidParam {
                name: "horizon",
                reason: "must be at least 1 slot".into(),
            });
        }
        if self.n_seeds < 1 {
            return Err(Error::InvalidParam {
                name: "n_seeds",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut params = NetworkParams::new(file.rho, file.lambda)?;
        if let Some(v) = file.a_max {
            params.a_max = v;
        }
        if let Some(v) = file.beta {
            params.beta = v;
        }
        if let Some(v) = file.contention_window {
            params.contention_window = v;
        }
        if let Some(v) = file.seed {
            params.seed = v;
        }
        if let Some(v) = file.weight_fn {
            params.weight_fn = v;
        }
        let config = ExperimentConfig {
            params,
            scheduler: file.scheduler.unwrap_or(SchedulerKind::Rqcsma),
            horizon: file.horizon.unwrap_or(DEFAULT_HORIZON),
            n_seeds: file.n_seeds.unwrap_or(DEFAULT_SEEDS),
            decision_mode: file.decision_mode.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Seed of the `k`-th independent run.
    pub fn seed_for(&self, k: usize) -> u64 {
        self.params.seed.wrapping_add(k as u64)
    }

    /// `# key = value` lines describing everything needed to rerun.
    pub fn header(&self) -> String {
        let p = &self.params;
        let list = |v: &[f64]| {
            let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("[{}]", items.join(", "))
        };
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            writeln!(out, "# {k} = {v}").expect("writing to a String");
        };
        line("n_relays", p.n_relays.to_string());
        line("rho", list(&p.rho));
        line("lambda", list(&p.lambda));
        line("a_max", p.a_max.to_string());
        line("arrival_law", p.arrival_law().to_string());
        line("beta", p.beta.to_string());
        line("weight_fn", p.weight_fn.to_string());
        line("contention_window", p.contention_window.to_string());
        line("seed", p.seed.to_string());
        line("scheduler", self.scheduler.to_string());
        line("horizon", self.horizon.to_string());
        line("n_seeds", self.n_seeds.to_string());
        line("decision_mode", self.decision_mode.to_string());
        out
    }
}
