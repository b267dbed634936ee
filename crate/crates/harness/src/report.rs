//! Tables and plot-ready data derived from run records.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::runner::RunRecord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("no records for configuration `{0}`")]
    MissingConfig(String),
}

/// Splits a `<row>~<col>` id; ids without `~` form their own row.
fn split_id(id: &str) -> (&str, &str) {
    id.split_once('~').unwrap_or((id, "none"))
}

fn solved_by_config(records: &[RunRecord]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for r in records {
        *m.entry(r.config.as_str()).or_insert(0) += r.solved() as usize;
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub solved: usize,
    pub runs: usize,
    /// Both constituents exist and the combination solves more than either.
    pub beats_both: bool,
    /// Solves fewer than the row's guidance alone.
    pub worse_than_row: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// `cells[r][c]`; `None` where no configuration ran.
    pub cells: Vec<Vec<Option<Cell>>>,
    pub warnings: Vec<String>,
}

/// Solved counts per grid cell, rows and columns in order of first
/// appearance.
pub fn coverage_table(records: &[RunRecord]) -> CoverageTable {
    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    let mut runs: HashMap<&str, usize> = HashMap::new();
    let mut instances: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        let (row, col) = split_id(&r.config);
        if !rows.iter().any(|x| x == row) {
            rows.push(row.to_string());
        }
        if !cols.iter().any(|x| x == col) {
            cols.push(col.to_string());
        }
        *runs.entry(&r.config).or_insert(0) += 1;
        instances.entry(&r.config).or_default().insert(&r.instance);
    }
    if let Some(i) = cols.iter().position(|c| c == "none") {
        let none = cols.remove(i);
        cols.insert(0, none);
    }
    if let Some(i) = rows.iter().position(|c| c == "none") {
        let none = rows.remove(i);
        rows.insert(0, none);
    }
    let solved = solved_by_config(records);
    let count = |row: &str, col: &str| solved.get(format!("{row}~{col}").as_str()).copied();

    let mut warnings = Vec::new();
    if records.is_empty() {
        warnings.push("incomplete grid: no records".to_string());
    }
    let mut cells = Vec::new();
    for row in &rows {
        let mut line = Vec::new();
        for col in &cols {
            let id = format!("{row}~{col}");
            let cell = runs.get(id.as_str()).map(|&n| {
                let s = solved[id.as_str()];
                let combo = row != "none" && col != "none";
                let alone_row = count(row, "none");
                let alone_col = count("none", col);
                Cell {
                    solved: s,
                    runs: n,
                    beats_both: combo && matches!((alone_row, alone_col), (Some(a), Some(b)) if s > a && s > b),
                    worse_than_row: combo && alone_row.is_some_and(|a| s < a),
                }
            });
            if cell.is_none() && !(row == "none" && col == "none") {
                warnings.push(format!("incomplete grid: no records for {id}"));
            }
            line.push(cell);
        }
        cells.push(line);
    }
    let sets: BTreeSet<&BTreeSet<&str>> = instances.values().collect();
    if sets.len() > 1 {
        warnings.push("incomplete grid: configurations ran on different instances".to_string());
    }
    CoverageTable { rows, cols, cells, warnings }
}

impl CoverageTable {
    pub fn get(&self, row: &str, col: &str) -> Option<&Cell> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.cols.iter().position(|x| x == col)?;
        self.cells[r][c].as_ref()
    }

    /// Bold marks a combination beating both constituents; a trailing `-`
    /// marks one below its row's guidance alone.
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| | {} |", self.cols.join(" | "));
        let _ = writeln!(s, "|---|{}", "---:|".repeat(self.cols.len()));
        for (row, line) in self.rows.iter().zip(&self.cells) {
            let cells: Vec<String> = line
                .iter()
                .map(|c| match c {
                    None => "-".to_string(),
                    Some(c) => {
                        let mut v = c.solved.to_string();
                        if c.beats_both {
                            v = format!("**{v}**");
                        }
                        if c.worse_than_row {
                            v.push_str(" -");
                        }
                        v
                    }
                })
                .collect();
            let _ = writeln!(s, "| {row} | {} |", cells.join(" | "));
        }
        for w in &self.warnings {
            let _ = writeln!(s, "\n> warning: {w}");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,solved,runs,beats_both,worse_than_row\n");
        for (row, line) in self.rows.iter().zip(&self.cells) {
            for (col, c) in self.cols.iter().zip(line) {
                if let Some(c) = c {
                    let _ = writeln!(
                        s,
                        "{row},{col},{},{},{},{}",
                        c.solved, c.runs, c.beats_both, c.worse_than_row
                    );
                }
            }
        }
        s
    }
}

/// Coverage of an alternative algorithm against a base table with the same
/// grid. Each cell shows the base count and, when positive, the extra
/// instances the alternative solves as `+N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub base: CoverageTable,
    pub alt: CoverageTable,
}

impl Comparison {
    pub fn new(base: &[RunRecord], alt: &[RunRecord]) -> Self {
        Comparison { base: coverage_table(base), alt: coverage_table(alt) }
    }

    /// `alt - base` for a cell present in both tables.
    pub fn gain(&self, row: &str, col: &str) -> Option<i64> {
        Some(self.alt.get(row, col)?.solved as i64 - self.base.get(row, col)?.solved as i64)
    }

    /// Bold marks a gain that makes the combination beat both constituents
    /// where the base did not.
    pub fn to_markdown(&self) -> String {
        let t = &self.base;
        let mut s = String::new();
        let _ = writeln!(s, "| | {} |", t.cols.join(" | "));
        let _ = writeln!(s, "|---|{}", "---:|".repeat(t.cols.len()));
        for (row, line) in t.rows.iter().zip(&t.cells) {
            let cells: Vec<String> = t
                .cols
                .iter()
                .zip(line)
                .map(|(col, c)| match c {
                    None => "-".to_string(),
                    Some(c) => match self.gain(row, col) {
                        Some(g) if g > 0 => {
                            let new = self.alt.get(row, col).is_some_and(|a| a.beats_both) && !c.beats_both;
                            if new {
                                format!("{}**+{g}**", c.solved)
                            } else {
                                format!("{}+{g}", c.solved)
                            }
                        }
                        _ => c.solved.to_string(),
                    },
                })
                .collect();
            let _ = writeln!(s, "| {row} | {} |", cells.join(" | "));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,base,alt,gain\n");
        for row in &self.base.rows {
            for col in &self.base.cols {
                if let (Some(b), Some(a)) = (self.base.get(row, col), self.alt.get(row, col)) {
                    let _ = writeln!(s, "{row},{col},{},{},{}", b.solved, a.solved, a.solved as i64 - b.solved as i64);
                }
            }
        }
        s
    }
}

/// Expansions per instance for two configurations, unsolved mapped to
/// `budget + 1`. Instances are those run under both, in record order.
pub fn scatter_data(
    records: &[RunRecord],
    a: &str,
    b: &str,
    budget: u64,
) -> Result<Vec<(String, u64, u64)>, ReportError> {
    let pick = |cfg: &str| {
        let m: BTreeMap<&str, u64> = records
            .iter()
            .filter(|r| r.config == cfg)
            .map(|r| (r.instance.as_str(), if r.solved() { r.expansions } else { budget + 1 }))
            .collect();
        if m.is_empty() {
            Err(ReportError::MissingConfig(cfg.to_string()))
        } else {
            Ok(m)
        }
    };
    let (ma, mb) = (pick(a)?, pick(b)?);
    let mut seen = BTreeSet::new();
    Ok(records
        .iter()
        .filter(|r| r.config == a && seen.insert(r.instance.as_str()))
        .filter_map(|r| Some((r.instance.clone(), ma[r.instance.as_str()], *mb.get(r.instance.as_str())?)))
        .collect())
}

pub fn scatter_csv(points: &[(String, u64, u64)], a: &str, b: &str) -> String {
    let mut s = format!("# unsolved plotted at budget+1\ninstance,{a},{b}\n");
    for (i, x, y) in points {
        let _ = writeln!(s, "{i},{x},{y}");
    }
    s
}

/// Solved counts within each expansion bound. Bounds are 0, every distinct
/// expansion count of a solved record, and the budget.
pub fn cumulative_coverage(records: &[RunRecord], configs: &[String], budget: u64) -> Vec<(u64, Vec<usize>)> {
    let mut bounds: BTreeSet<u64> = [0, budget].into();
    let per: Vec<Vec<u64>> = configs
        .iter()
        .map(|c| {
            let mut v: Vec<u64> = records
                .iter()
                .filter(|r| &r.config == c && r.solved() && r.expansions <= budget)
                .map(|r| r.expansions)
                .collect();
            v.sort_unstable();
            bounds.extend(&v);
            v
        })
        .collect();
    bounds
        .into_iter()
        .map(|b| (b, per.iter().map(|v| v.partition_point(|&x| x <= b)).collect()))
        .collect()
}

pub fn cumulative_csv(curve: &[(u64, Vec<usize>)], configs: &[String]) -> String {
    let mut s = format!("expansions,{}\n", configs.join(","));
    for (b, counts) in curve {
        let c: Vec<String> = counts.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "{b},{}", c.join(","));
    }
    s
}

/// Instances where one side found a strictly cheaper plan. When only one
/// side solved an instance, that side is credited; instances neither solved
/// are left out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostSummary {
    pub config: String,
    /// The other configuration is cheaper.
    pub better: usize,
    /// The baseline is cheaper.
    pub worse: usize,
    pub equal: usize,
}

pub const COST_CONVENTION: &str =
    "# better/worse count strictly cheaper plans; a side that alone solved an instance is credited; instances neither solved are excluded";

pub fn cost_comparison(
    records: &[RunRecord],
    baseline: &str,
    others: &[String],
) -> Result<Vec<CostSummary>, ReportError> {
    let costs = |cfg: &str| {
        let m: BTreeMap<&str, Option<u64>> = records
            .iter()
            .filter(|r| r.config == cfg)
            .map(|r| (r.instance.as_str(), r.cost.filter(|_| r.solved())))
            .collect();
        if m.is_empty() {
            Err(ReportError::MissingConfig(cfg.to_string()))
        } else {
            Ok(m)
        }
    };
    let base = costs(baseline)?;
    others
        .iter()
        .map(|o| {
            let other = costs(o)?;
            let mut s = CostSummary { config: o.clone(), better: 0, worse: 0, equal: 0 };
            for (inst, b) in &base {
                let Some(x) = other.get(inst) else { continue };
                match (b, x) {
                    (Some(b), Some(x)) if x < b => s.better += 1,
                    (Some(b), Some(x)) if x > b => s.worse += 1,
                    (Some(_), Some(_)) => s.equal += 1,
                    (None, Some(_)) => s.better += 1,
                    (Some(_), None) => s.worse += 1,
                    (None, None) => {}
                }
            }
            Ok(s)
        })
        .collect()
}

pub fn costs_csv(baseline: &str, summary: &[CostSummary]) -> String {
    let mut s = format!("{COST_CONVENTION}\nbaseline,config,better,worse,equal\n");
    for c in summary {
        let _ = writeln!(s, "{baseline},{},{},{},{}", c.config, c.better, c.worse, c.equal);
    }
    s
}
