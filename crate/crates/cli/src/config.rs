//! Run configuration: command-line flags layered over an optional JSON file
//! with the same keys. Flags win.

use std::path::{Path, PathBuf};

use hardcopy::CheckpointSchedule;
use serde::Deserialize;

use crate::CliError;

/// Checkpoint schedule as written in a config file: `"geometric"` or a list
/// of times.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum CheckpointSpec {
    Named(String),
    Times(Vec<u64>),
}

impl CheckpointSpec {
    /// Parses the flag form: `geometric` or a comma-separated list.
    pub fn parse_flag(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("geometric") {
            return Ok(Self::Named("geometric".into()));
        }
        s.split(',')
            .map(|p| p.trim().parse::<u64>().map_err(|_| format!("`{p}` is not a checkpoint time")))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::Times)
    }

    pub fn schedule(&self) -> Result<CheckpointSchedule, CliError> {
        match self {
            Self::Named(name) if name.eq_ignore_ascii_case("geometric") => Ok(CheckpointSchedule::Geometric),
            Self::Named(name) => Err(CliError::invalid("checkpoints", format!("unknown schedule `{name}`"))),
            Self::Times(times) => {
                CheckpointSchedule::explicit(times.clone()).map_err(|e| CliError::invalid("checkpoints", e.to_string()))
            }
        }
    }
}

/// Every key any command understands.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub model: Option<String>,
    pub alpha: Option<f64>,
    pub m: Option<u32>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub checkpoints: Option<CheckpointSpec>,
    pub replicas: Option<u64>,
    pub threads: Option<usize>,
    pub k_min: Option<u64>,
    pub k_max: Option<u64>,
    pub eps0: Option<f64>,
    pub edges: Option<bool>,
    pub max_edges: Option<u64>,
    pub copy_factor: Option<f64>,
    pub out_degree: Option<u32>,
    pub input: Option<PathBuf>,
    pub empirical: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),+ $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )+
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            let msg = e.to_string();
            // serde reports unknown keys as "unknown field `name`".
            let key = msg.split('`').nth(1).unwrap_or("config").to_string();
            CliError::Invalid { key, message: format!("{}: {msg}", path.display()) }
        })
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: Settings) -> Self {
        overlay!(
            self,
            top,
            model,
            alpha,
            m,
            steps,
            seed,
            out,
            checkpoints,
            replicas,
            threads,
            k_min,
            k_max,
            eps0,
            edges,
            max_edges,
            copy_factor,
            out_degree,
            input,
            empirical,
        );
        self
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        self.alpha.ok_or_else(|| CliError::missing("alpha"))
    }

    pub fn m(&self) -> Result<u32, CliError> {
        self.m.ok_or_else(|| CliError::missing("m"))
    }

    pub fn steps(&self) -> Result<u64, CliError> {
        self.steps.ok_or_else(|| CliError::missing("steps"))
    }

    pub fn out(&self) -> Result<&Path, CliError> {
        self.out.as_deref().ok_or_else(|| CliError::missing("out"))
    }

    pub fn schedule(&self) -> Result<CheckpointSchedule, CliError> {
        match &self.checkpoints {
            Some(spec) => spec.schedule(),
            None => Ok(CheckpointSchedule::Geometric),
        }
    }

    pub fn thread_pool(&self) -> Result<rayon::ThreadPool, CliError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::invalid("threads", "must be at least 1"));
            }
            builder = builder.num_threads(n);
        }
        builder.build().map_err(|e| CliError::invalid("threads", e.to_string()))
    }
}
