//! Experiment configuration: a `key = value` file describing a grid of
//! guidance rows and columns over one generated suite.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use parplan_core::search::DEFAULT_BUDGET;
use parplan_domains::{DomainKind, PartialKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("`{key}`: {message}")]
    Value { key: String, message: String },
    #[error("unknown source `{0}`")]
    Source(String),
    #[error("{algorithm} needs {expected} guidance sources, got {got}")]
    Arity { algorithm: AlgoKind, expected: usize, got: usize },
    #[error("`{0}` does not apply to this domain")]
    Domain(String),
}

/// Where an evaluator comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// Constant zero.
    None,
    FfFull,
    FfPartial(PartialKind),
    /// Regression model trained on plans of the named dataset.
    Surrogate(String),
    /// FF on the partial model covering what the named biased dataset teaches.
    BiasedFf(String),
    GoalCount,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::None => f.write_str("none"),
            Source::FfFull => f.write_str("ff-full"),
            Source::FfPartial(k) => write!(f, "ff-partial({k})"),
            Source::Surrogate(d) => write!(f, "surrogate({d})"),
            Source::BiasedFf(d) => write!(f, "biased-ff({d})"),
            Source::GoalCount => f.write_str("goal-count"),
        }
    }
}

fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')').map(str::trim)
}

impl FromStr for Source {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ConfigError::Source(s.to_string());
        match s {
            "none" => return Ok(Source::None),
            "ff-full" | "ff" => return Ok(Source::FfFull),
            "goal-count" => return Ok(Source::GoalCount),
            _ => {}
        }
        if let Some(k) = call(s, "ff-partial") {
            return k.parse().map(Source::FfPartial).map_err(|_| bad());
        }
        if let Some(d) = call(s, "surrogate").filter(|d| !d.is_empty()) {
            return Ok(Source::Surrogate(d.to_string()));
        }
        if let Some(d) = call(s, "biased-ff").filter(|d| !d.is_empty()) {
            return Ok(Source::BiasedFf(d.to_string()));
        }
        Err(bad())
    }
}

impl Source {
    /// Partial model standing in for a surrogate trained on a biased
    /// dataset: the part of the task that dataset's instances exercise.
    pub fn biased_kind(domain: DomainKind, dataset: &str) -> Option<PartialKind> {
        match (domain, dataset) {
            (DomainKind::Logistics, "hgn-one") => Some(PartialKind::Trucks),
            (DomainKind::Grid, "hgn-gridsize") => Some(PartialKind::Keys),
            (DomainKind::Grid, "hgn-onelock") => Some(PartialKind::Robot),
            (DomainKind::Woodworking, "hgn-oneloc") => Some(PartialKind::Wood),
            (DomainKind::Woodworking, "hgn-move") => Some(PartialKind::Logistics),
            _ => None,
        }
    }

    pub fn check(&self, domain: DomainKind) -> Result<(), ConfigError> {
        let ok = match self {
            Source::FfPartial(k) => domain.partial_kinds().contains(k),
            Source::Surrogate(d) => domain.datasets().contains(&d.as_str()),
            Source::BiasedFf(d) => Source::biased_kind(domain, d).is_some(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(ConfigError::Domain(self.to_string()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Heuristic,
    /// Successor ranking turned into discrepancy values.
    Policy,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guide {
    pub role: Role,
    pub source: Source,
}

impl Guide {
    pub fn heuristic(source: Source) -> Self {
        Guide { role: Role::Heuristic, source }
    }

    pub fn policy(source: Source) -> Self {
        Guide { role: Role::Policy, source }
    }

    pub fn is_none(&self) -> bool {
        self.source == Source::None
    }
}

/// `h:<source>`, `p:<source>`, or a bare source read as a heuristic.
impl FromStr for Guide {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("p:") {
            return Ok(Guide::policy(rest.parse()?));
        }
        Ok(Guide::heuristic(s.strip_prefix("h:").unwrap_or(s).parse()?))
    }
}

impl fmt::Display for Guide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.role, &self.source) {
            (_, Source::None) => f.write_str("none"),
            (Role::Heuristic, s) => write!(f, "h:{s}"),
            (Role::Policy, s) => write!(f, "p:{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoKind {
    Gbfs,
    DoubleQueue,
    /// The first guide is primary.
    TieBreak,
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgoKind::Gbfs => "gbfs",
            AlgoKind::DoubleQueue => "double-queue",
            AlgoKind::TieBreak => "tiebreak",
        })
    }
}

impl FromStr for AlgoKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "gbfs" => Ok(AlgoKind::Gbfs),
            "double-queue" | "dq" => Ok(AlgoKind::DoubleQueue),
            "tiebreak" | "tie-break" => Ok(AlgoKind::TieBreak),
            other => Err(ConfigError::Value { key: "algorithm".into(), message: format!("unknown `{other}`") }),
        }
    }
}

/// One search configuration applied to every instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub id: String,
    pub algorithm: AlgoKind,
    pub guides: Vec<Guide>,
}

impl RunConfig {
    pub fn new(id: impl Into<String>, algorithm: AlgoKind, guides: Vec<Guide>) -> Result<Self, ConfigError> {
        let expected = if algorithm == AlgoKind::Gbfs { 1 } else { 2 };
        if guides.len() != expected {
            return Err(ConfigError::Arity { algorithm, expected, got: guides.len() });
        }
        Ok(RunConfig { id: id.into(), algorithm, guides })
    }
}

/// Which grid axis is primary when combining with tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combination {
    DoubleQueue,
    TieBreak { primary_col: bool },
}

impl FromStr for Combination {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "double-queue" | "dq" => Ok(Combination::DoubleQueue),
            "tiebreak" | "tiebreak(col)" => Ok(Combination::TieBreak { primary_col: true }),
            "tiebreak(row)" => Ok(Combination::TieBreak { primary_col: false }),
            other => Err(ConfigError::Value { key: "algorithm".into(), message: format!("unknown `{other}`") }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub dataset: String,
    pub seed: u64,
    pub count: usize,
    /// Read instances from here instead of generating them.
    pub instances: Option<PathBuf>,
    pub budget: u64,
    pub train_seed: u64,
    pub train_count: usize,
    pub combination: Combination,
    pub rows: Vec<Guide>,
    pub cols: Vec<Guide>,
}

pub const DEFAULT_TRAIN_COUNT: usize = 100;
pub const DEFAULT_TRAIN_SEED: u64 = 1000;

impl ExperimentConfig {
    pub fn new(domain: DomainKind, rows: Vec<Guide>, cols: Vec<Guide>) -> Self {
        ExperimentConfig {
            domain,
            dataset: "test".into(),
            seed: 1,
            count: 50,
            instances: None,
            budget: DEFAULT_BUDGET,
            train_seed: DEFAULT_TRAIN_SEED,
            train_count: DEFAULT_TRAIN_COUNT,
            combination: Combination::DoubleQueue,
            rows,
            cols,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut domain = None;
        let mut rows = None;
        let mut cols = None;
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, message: "expected `key = value`".into() })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "domain" => {
                    domain = Some(v.parse::<DomainKind>().map_err(|e| ConfigError::Value {
                        key: k.into(),
                        message: e.to_string(),
                    })?)
                }
                "rows" => rows = Some(parse_list(v)?),
                "cols" | "columns" => cols = Some(parse_list(v)?),
                _ => pairs.push((i + 1, k.to_string(), v.to_string())),
            }
        }
        let domain = domain.ok_or(ConfigError::Missing("domain"))?;
        let mut cfg = ExperimentConfig::new(
            domain,
            rows.unwrap_or_else(|| vec![Guide::heuristic(Source::None)]),
            cols.ok_or(ConfigError::Missing("cols"))?,
        );
        for (line, k, v) in pairs {
            let num = |v: &str| {
                v.replace('_', "").parse::<u64>().map_err(|e| ConfigError::Value { key: k.clone(), message: e.to_string() })
            };
            match k.as_str() {
                "dataset" => cfg.dataset = v,
                "seed" => cfg.seed = num(&v)?,
                "count" => cfg.count = num(&v)? as usize,
                "instances" => cfg.instances = Some(PathBuf::from(v)),
                "budget" => cfg.budget = num(&v)?,
                "train-seed" | "train_seed" => cfg.train_seed = num(&v)?,
                "train-count" | "train_count" => cfg.train_count = num(&v)? as usize,
                "algorithm" => cfg.combination = v.parse()?,
                _ => return Err(ConfigError::Syntax { line, message: format!("unknown key `{k}`") }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.domain.datasets().contains(&self.dataset.as_str()) && self.instances.is_none() {
            return Err(ConfigError::Domain(format!("dataset {}", self.dataset)));
        }
        if self.count == 0 || self.budget == 0 {
            return Err(ConfigError::Value { key: "count/budget".into(), message: "must be positive".into() });
        }
        if self.cols.is_empty() || self.rows.is_empty() {
            return Err(ConfigError::Value { key: "rows/cols".into(), message: "must not be empty".into() });
        }
        for g in self.rows.iter().chain(&self.cols) {
            g.source.check(self.domain)?;
        }
        if self.runs()?.is_empty() {
            return Err(ConfigError::Value { key: "rows/cols".into(), message: "grid has no runnable cell".into() });
        }
        Ok(())
    }

    /// One configuration per grid cell, row-major; the `none`/`none` cell is
    /// skipped. Ids are `<row>~<col>`.
    pub fn runs(&self) -> Result<Vec<RunConfig>, ConfigError> {
        let mut out = Vec::new();
        for r in &self.rows {
            for c in &self.cols {
                let id = cell_id(r, c);
                let run = match (r.is_none(), c.is_none()) {
                    (true, true) => continue,
                    (true, false) => RunConfig::new(id, AlgoKind::Gbfs, vec![c.clone()])?,
                    (false, true) => RunConfig::new(id, AlgoKind::Gbfs, vec![r.clone()])?,
                    (false, false) => match self.combination {
                        Combination::DoubleQueue => {
                            RunConfig::new(id, AlgoKind::DoubleQueue, vec![r.clone(), c.clone()])?
                        }
                        Combination::TieBreak { primary_col: true } => {
                            RunConfig::new(id, AlgoKind::TieBreak, vec![c.clone(), r.clone()])?
                        }
                        Combination::TieBreak { primary_col: false } => {
                            RunConfig::new(id, AlgoKind::TieBreak, vec![r.clone(), c.clone()])?
                        }
                    },
                };
                out.push(run);
            }
        }
        Ok(out)
    }

    /// Datasets whose surrogate models must be trained.
    pub fn training_sets(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .rows
            .iter()
            .chain(&self.cols)
            .filter_map(|g| match &g.source {
                Source::Surrogate(d) => Some(d.clone()),
                _ => None,
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

pub fn cell_id(row: &Guide, col: &Guide) -> String {
    format!("{row}~{col}")
}

/// Splits on commas outside parentheses.
fn parse_list(v: &str) -> Result<Vec<Guide>, ConfigError> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in v.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(&v[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&v[start..]);
    items.into_iter().filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}
