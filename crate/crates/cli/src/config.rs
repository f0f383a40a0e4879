use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// The fixed scenario catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GapCoherent,
    SecondRateCoherent,
    MiCoherent,
    GapIncoherent,
    MiIncoherent,
    RealDetector,
    Verify,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::GapCoherent,
        Scenario::SecondRateCoherent,
        Scenario::MiCoherent,
        Scenario::GapIncoherent,
        Scenario::MiIncoherent,
        Scenario::RealDetector,
        Scenario::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::GapCoherent => "gap-coherent",
            Scenario::SecondRateCoherent => "second-rate-coherent",
            Scenario::MiCoherent => "mi-coherent",
            Scenario::GapIncoherent => "gap-incoherent",
            Scenario::MiIncoherent => "mi-incoherent",
            Scenario::RealDetector => "real-detector",
            Scenario::Verify => "verify",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
            CliError::Usage(format!("unknown scenario '{s}'; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Evenly spaced values on a linear or logarithmic axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

/// A parameter range: one value, an explicit list, or a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    Value(f64),
    List(Vec<f64>),
    Grid(Grid),
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Range::Value(x) => vec![*x],
            Range::List(xs) => xs.clone(),
            Range::Grid(g) => {
                if g.points < 1 {
                    return Err(CliError::Validation("grid needs at least one point".into()));
                }
                if g.points == 1 {
                    vec![g.from]
                } else {
                    let n = (g.points - 1) as f64;
                    match g.spacing {
                        Spacing::Linear => (0..g.points).map(|k| g.from + (g.to - g.from) * k as f64 / n).collect(),
                        Spacing::Log => {
                            if !(g.from > 0.0 && g.to > 0.0) {
                                return Err(CliError::Validation("log grid needs positive endpoints".into()));
                            }
                            let (a, b) = (g.from.log10(), g.to.log10());
                            (0..g.points).map(|k| 10f64.powf(a + (b - a) * k as f64 / n)).collect()
                        }
                    }
                }
            }
        };
        if v.is_empty() {
            return Err(CliError::Validation("parameter range is empty".into()));
        }
        if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(CliError::Validation(format!("parameter value {bad} is not a finite nonnegative number")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRanges {
    pub g0: Range,
    pub eps: Range,
    pub n_th: Range,
    pub gamma: Range,
}

/// Fock cutoff: fixed, or chosen by doubling until the observable converges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    Auto,
    Fixed(usize),
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Auto => f.write_str("auto"),
            Cutoff::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Cutoff {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "auto" {
            return Ok(Cutoff::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Cutoff::Fixed(n)),
            _ => Err(CliError::Usage(format!("cutoff must be 'auto' or a positive integer, got '{s}'"))),
        }
    }
}

impl Serialize for Cutoff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cutoff::Auto => s.serialize_str("auto"),
            Cutoff::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Cutoff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) if n >= 1 => Ok(Cutoff::Fixed(n)),
            Raw::Num(n) => Err(serde::de::Error::custom(format!("cutoff must be positive, got {n}"))),
            Raw::Str(s) => s.parse().map_err(|e: CliError| serde::de::Error::custom(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// First positive time of a log grid.
    #[serde(default = "default_t_min")]
    pub t_min: f64,
}

fn default_t_min() -> f64 {
    0.1
}

impl TimeGrid {
    /// Sample times; always starts at 0.
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let grid = match self.spacing {
            Spacing::Log => cavity_relax::dynamics::log_time_grid(self.t_min, self.t_max, self.points),
            Spacing::Linear => cavity_relax::dynamics::linear_time_grid(self.t_max, self.points),
        };
        grid.map_err(|e| CliError::Validation(e.to_string()))
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub params: ParamRanges,
    pub cutoff: Cutoff,
    pub time_grid: TimeGrid,
    pub output: PathBuf,
    pub seeds: u64,
    #[serde(default)]
    pub plot: bool,
}

/// Config file contents; anything missing comes from the scenario defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<Scenario>,
    pub params: Option<PartialParams>,
    pub cutoff: Option<Cutoff>,
    pub time_grid: Option<TimeGrid>,
    pub output: Option<PathBuf>,
    pub seeds: Option<u64>,
    pub plot: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialParams {
    pub g0: Option<Range>,
    pub eps: Option<Range>,
    pub n_th: Option<Range>,
    pub gamma: Option<Range>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }
}

/// Values given on the command line; they win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub cutoff: Option<Cutoff>,
    pub output: Option<PathBuf>,
    pub plot: bool,
}

fn grid(from: f64, to: f64, points: usize) -> Range {
    Range::Grid(Grid { from, to, points, spacing: Spacing::Log })
}

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let (params, cutoff, time_grid) = match scenario {
            Scenario::GapCoherent | Scenario::SecondRateCoherent => (
                ParamRanges {
                    g0: Range::List(vec![0.125, 0.25, 0.5]),
                    eps: grid(1.0, 1000.0, 10),
                    n_th: Range::Value(0.0),
                    gamma: Range::Value(0.0),
                },
                Cutoff::Auto,
                TimeGrid { t_max: 1.0, points: 2, spacing: Spacing::Linear, t_min: 0.1 },
            ),
            Scenario::MiCoherent => (
                ParamRanges {
                    g0: Range::Value(0.25),
                    eps: Range::List(vec![10.0, 100.0, 1000.0]),
                    n_th: Range::Value(0.0),
                    gamma: Range::Value(0.0),
                },
                Cutoff::Fixed(6),
                TimeGrid { t_max: 1e9, points: 241, spacing: Spacing::Log, t_min: 0.1 },
            ),
            Scenario::GapIncoherent => (
                ParamRanges {
                    g0: Range::List(vec![0.01, 0.1]),
                    eps: Range::Value(0.0),
                    n_th: grid(0.1, 10.0, 9),
                    gamma: Range::Value(0.0),
                },
                Cutoff::Auto,
                TimeGrid { t_max: 1.0, points: 2, spacing: Spacing::Linear, t_min: 0.1 },
            ),
            Scenario::MiIncoherent => (
                ParamRanges {
                    g0: Range::Value(0.01),
                    eps: Range::Value(0.0),
                    n_th: Range::List(vec![1.0, 3.0, 10.0, 100.0]),
                    gamma: Range::Value(0.0),
                },
                Cutoff::Auto,
                TimeGrid { t_max: 1e6, points: 141, spacing: Spacing::Log, t_min: 0.1 },
            ),
            Scenario::RealDetector => (
                ParamRanges {
                    g0: Range::Value(0.1),
                    eps: Range::Value(10f64.sqrt()),
                    n_th: Range::Value(0.0),
                    gamma: Range::List(vec![1e-3, 1e-4, 1e-5, 0.0]),
                },
                Cutoff::Fixed(6),
                TimeGrid { t_max: 1e7, points: 161, spacing: Spacing::Log, t_min: 0.1 },
            ),
            Scenario::Verify => (
                ParamRanges {
                    g0: Range::Value(0.25),
                    eps: Range::Value(10.0),
                    n_th: Range::Value(0.0),
                    gamma: Range::Value(0.0),
                },
                Cutoff::Auto,
                TimeGrid { t_max: 1.0, points: 2, spacing: Spacing::Linear, t_min: 0.1 },
            ),
        };
        Self { scenario, params, cutoff, time_grid, output: PathBuf::from("out"), seeds: 7, plot: false }
    }

    /// Scenario defaults, then the file, then the flags.
    pub fn resolve(file: Option<ConfigFile>, flags: &Overrides) -> Result<Self, CliError> {
        let file = file.unwrap_or_default();
        let scenario = flags
            .scenario
            .or(file.scenario)
            .ok_or_else(|| CliError::Usage("no scenario given (use --scenario or a config file)".into()))?;
        let mut c = Self::defaults(scenario);
        if let Some(p) = file.params {
            c.params.g0 = p.g0.unwrap_or(c.params.g0);
            c.params.eps = p.eps.unwrap_or(c.params.eps);
            c.params.n_th = p.n_th.unwrap_or(c.params.n_th);
            c.params.gamma = p.gamma.unwrap_or(c.params.gamma);
        }
        c.cutoff = flags.cutoff.or(file.cutoff).unwrap_or(c.cutoff);
        c.time_grid = file.time_grid.unwrap_or(c.time_grid);
        c.output = flags.output.clone().or(file.output).unwrap_or(c.output);
        c.seeds = file.seeds.unwrap_or(c.seeds);
        c.plot = flags.plot || file.plot.unwrap_or(false);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for r in [&self.params.g0, &self.params.eps, &self.params.n_th, &self.params.gamma] {
            r.values()?;
        }
        let g = &self.time_grid;
        if !(g.t_max > 0.0 && g.t_max.is_finite()) {
            return Err(CliError::Validation(format!("t_max must be positive, got {}", g.t_max)));
        }
        if g.points < 2 {
            return Err(CliError::Validation(format!("time grid needs at least 2 points, got {}", g.points)));
        }
        if g.spacing == Spacing::Log && !(g.t_min > 0.0 && g.t_min < g.t_max) {
            return Err(CliError::Validation(format!(
                "log time grid needs 0 < t_min < t_max, got t_min = {}",
                g.t_min
            )));
        }
        Ok(())
    }

    /// Every parameter combination, sorted by (g0, eps, n_th, gamma).
    pub fn points(&self) -> Result<Vec<cavity_relax::models::ModelParams>, CliError> {
        let mut out = Vec::new();
        for g0 in self.params.g0.values()? {
            for eps in self.params.eps.values()? {
                for n_th in self.params.n_th.values()? {
                    for gamma in self.params.gamma.values()? {
                        out.push(
                            cavity_relax::models::ModelParams::new(g0, eps, n_th, gamma)
                                .map_err(|e| CliError::Validation(e.to_string()))?,
                        );
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            a.g0.total_cmp(&b.g0)
                .then(a.eps.total_cmp(&b.eps))
                .then(a.n_th.total_cmp(&b.n_th))
                .then(a.gamma.total_cmp(&b.gamma))
        });
        Ok(out)
    }
}
