use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Scenario;
use crate::error::{CliError, CliResult};

pub const UNITS_LINE: &str = "# units: rates and times in units of kappa (kappa = 1); mutual information in bits";

/// One CSV column: name, unit, meaning.
#[derive(Debug, Clone, Copy)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
    pub doc: &'static str,
}

const fn col(name: &'static str, unit: &'static str, doc: &'static str) -> Column {
    Column { name, unit, doc }
}

const PARAMS: [Column; 5] = [
    col("g0", "kappa", "atom-field coupling"),
    col("eps", "kappa", "coherent drive amplitude"),
    col("n_th", "photons", "thermal photon number of the bath"),
    col("gamma", "kappa", "atomic decay rate"),
    col(
        "cutoff",
        "levels",
        "Fock cutoff of the exact model; the largest one tried when automatic truncation did not converge",
    ),
];

/// CSV layout of each scenario; the first five columns always hold the resolved parameters.
pub fn columns(scenario: Scenario) -> Vec<Column> {
    let extra: &[Column] = match scenario {
        Scenario::GapCoherent => &[
            col("gap_exact", "kappa", "spectral gap of the displaced-frame exact model"),
            col("gap_effective", "kappa", "spectral gap of the effective atomic model"),
            col("gap_analytic", "kappa", "closed-form gap kappa (2 eps / kappa)^-2"),
            col("rel_err_exact", "1", "abs(gap_exact - gap_analytic) / gap_analytic"),
            col("rel_err_effective", "1", "abs(gap_effective - gap_analytic) / gap_analytic"),
            col("tau_exact", "1/kappa", "relaxation time 1 / gap_exact"),
            col("converged", "bool", "1 when automatic truncation converged; 0 for a fixed cutoff"),
        ],
        Scenario::SecondRateCoherent => &[
            col("second_rate_exact", "kappa", "slowest rate outside the gap family, exact model"),
            col("second_rate_effective", "kappa", "same rate for the effective atomic model"),
            col("second_rate_analytic", "kappa", "closed form 4 Gamma_g0 + 2 Gamma_eps"),
            col("rel_err_exact", "1", "relative error of second_rate_exact"),
            col("rel_err_effective", "1", "relative error of second_rate_effective"),
            col("splitting_ratio", "1", "second_rate_effective / gap_effective"),
            col("converged", "bool", "1 when automatic truncation converged; 0 for a fixed cutoff"),
        ],
        Scenario::MiCoherent | Scenario::MiIncoherent | Scenario::RealDetector => &[
            col("model", "-", "effective or exact; exact rows are left out when automatic truncation did not converge"),
            col("t", "1/kappa", "time"),
            col("mi", "bits", "mutual information between the two atoms"),
        ],
        Scenario::GapIncoherent => &[
            col("gap_exact", "kappa", "spectral gap of the lab-frame exact model"),
            col("gap_effective", "kappa", "spectral gap of the effective atomic model"),
            col("gap_analytic", "kappa", "closed-form gap 2 n_th (g0 / kappa)^2 kappa"),
            col("rel_err_exact", "1", "abs(gap_exact - gap_analytic) / gap_analytic"),
            col("rel_err_effective", "1", "abs(gap_effective - gap_analytic) / gap_analytic"),
            col("tau_effective", "1/kappa", "relaxation time 1 / gap_effective"),
            col("converged", "bool", "1 when automatic truncation converged; 0 for a fixed cutoff"),
        ],
        Scenario::Verify => {
            return vec![
                col("criterion", "-", "acceptance criterion number"),
                col("passed", "bool", "1 when the criterion holds"),
                col("metric", "-", "worst value of the checked quantity"),
                col("bound", "-", "limit the metric is compared against"),
            ]
        }
    };
    PARAMS.iter().chain(extra).copied().collect()
}

/// Markdown description of every scenario's CSV layout.
pub fn schema_markdown() -> String {
    let mut s = String::from("# Output schema\n\n");
    s.push_str("Every CSV file starts with comment lines naming the scenario, the units and the columns:\n\n");
    s.push_str("```\n# scenario: <name>\n");
    s.push_str(UNITS_LINE);
    s.push_str("\n# columns: <comma-separated names>\n```\n\n");
    s.push_str("Floats are written with 17 significant digits. Booleans are 0 or 1. ");
    s.push_str("Every row repeats the full parameter set it was computed with.\n");
    for sc in Scenario::ALL {
        let _ = write!(
            s,
            "\n## {}\n\nFile: `{}.csv`\n\n| column | unit | meaning |\n|---|---|---|\n",
            sc.name(),
            sc.name()
        );
        for c in columns(sc) {
            let _ = writeln!(s, "| `{}` | {} | {} |", c.name, c.unit, c.doc);
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) if x.is_nan() => "nan".into(),
            Cell::Float(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }
}

/// Rows of one scenario's CSV file.
#[derive(Debug, Clone)]
pub struct Table {
    pub scenario: Scenario,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(scenario: Scenario) -> Self {
        Self { scenario, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        let width = columns(self.scenario).len();
        assert_eq!(row.len(), width, "row width does not match the {} schema", self.scenario);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = columns(self.scenario).iter().map(|c| c.name).collect();
        let mut s = format!("# scenario: {}\n{UNITS_LINE}\n# columns: {}\n", self.scenario, names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes `contents` to `dir/name`, creating `dir` as needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("cannot encode summary: {e}")))?;
    s.push('\n');
    Ok(s)
}
