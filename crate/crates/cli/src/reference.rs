//! Published reference values shipped as CSV files under `data/`.

use stocp::{Error, Result};

const TABLES: [&str; 5] = [
    include_str!("../data/table1.csv"),
    include_str!("../data/table2.csv"),
    include_str!("../data/table3.csv"),
    include_str!("../data/table4.csv"),
    include_str!("../data/table5.csv"),
];

/// Column order shared by reference files and generated tables.
pub const KEY_COLUMNS: [&str; 10] = [
    "table",
    "level",
    "degree",
    "alpha",
    "kappa",
    "formulation",
    "control",
    "observation",
    "backend",
    "metric",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRow {
    pub table: u8,
    pub level: u32,
    pub degree: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub formulation: String,
    pub control: String,
    pub observation: String,
    pub backend: String,
    pub metric: String,
    pub value: f64,
}

impl ReferenceRow {
    /// Same parameter point, ignoring the level.
    pub fn same_point(&self, other: &ReferenceRow) -> bool {
        self.table == other.table
            && self.degree == other.degree
            && rel_eq(self.alpha, other.alpha)
            && rel_eq(self.kappa, other.kappa)
            && self.formulation == other.formulation
            && self.control == other.control
            && self.observation == other.observation
            && self.backend == other.backend
            && self.metric == other.metric
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

pub fn parse_csv(text: &str) -> Result<Vec<ReferenceRow>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if !header_seen {
            header_seen = true;
            if f.first() == Some(&"table") {
                continue;
            }
        }
        if f.len() != 11 {
            return Err(Error::Parse(format!("line {}: expected 11 fields, got {}", n + 1, f.len())));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number '{}'", n + 1, f[i])))
        };
        rows.push(ReferenceRow {
            table: num(0)? as u8,
            level: num(1)? as u32,
            degree: num(2)? as usize,
            alpha: num(3)?,
            kappa: num(4)?,
            formulation: f[5].into(),
            control: f[6].into(),
            observation: f[7].into(),
            backend: f[8].into(),
            metric: f[9].into(),
            value: num(10)?,
        });
    }
    Ok(rows)
}

/// Reference rows of table `id` (1 to 5).
pub fn reference_table(id: u8) -> Result<Vec<ReferenceRow>> {
    let text = TABLES
        .get((id as usize).wrapping_sub(1))
        .ok_or_else(|| Error::Config(format!("table id must be 1 to 5, got {id}")))?;
    parse_csv(text)
}

/// Reference value for `row`: the same level if published, otherwise the
/// finest published level of the same parameter point.
pub fn lookup<'a>(refs: &'a [ReferenceRow], row: &ReferenceRow) -> Option<&'a ReferenceRow> {
    let same: Vec<&ReferenceRow> = refs.iter().filter(|r| r.same_point(row)).collect();
    same.iter()
        .find(|r| r.level == row.level)
        .copied()
        .or_else(|| same.iter().max_by_key(|r| r.level).copied())
}
