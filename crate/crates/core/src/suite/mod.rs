//! Named check suites and the JSON report they produce.
//!
//! A suite turns a [`RunConfig`] into a [`Report`]. Every check is an
//! aggregate (worst case) over its sample points, so reports stay small.
//! Reports are deterministic in `(config, build)`: sampling is seeded per
//! index and parallel results are folded in index order.

mod record;
mod runs;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, simplify};
use crate::tolerances::Tolerances;

pub use record::{CheckRecord, Rule, Series, SkipRecord, Summary};

/// The embedded expression corpus, one expression per line.
pub const CORPUS: &str = include_str!("../../data/corpus.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    VerifyGroup,
    VerifyCommutators,
    VerifyJets,
    VerifyBubble,
    VerifyIdentity,
    VerifyInequalities,
    VerifyAppendix,
    VerifyIntegrals,
    VerifyEuclidean,
    All,
}

impl SuiteId {
    /// Every concrete suite, in the order `all` runs them.
    pub const CONCRETE: [SuiteId; 9] = [
        SuiteId::VerifyGroup,
        SuiteId::VerifyCommutators,
        SuiteId::VerifyJets,
        SuiteId::VerifyBubble,
        SuiteId::VerifyIdentity,
        SuiteId::VerifyInequalities,
        SuiteId::VerifyAppendix,
        SuiteId::VerifyIntegrals,
        SuiteId::VerifyEuclidean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::VerifyGroup => "verify-group",
            SuiteId::VerifyCommutators => "verify-commutators",
            SuiteId::VerifyJets => "verify-jets",
            SuiteId::VerifyBubble => "verify-bubble",
            SuiteId::VerifyIdentity => "verify-identity",
            SuiteId::VerifyInequalities => "verify-inequalities",
            SuiteId::VerifyAppendix => "verify-appendix",
            SuiteId::VerifyIntegrals => "verify-integrals",
            SuiteId::VerifyEuclidean => "verify-euclidean",
            SuiteId::All => "all",
        }
    }

    /// Dimensions used when the config does not list any. For the
    /// Euclidean suite these are dimensions of `ℝⁿ`.
    pub fn default_dims(self) -> Vec<usize> {
        match self {
            SuiteId::VerifyGroup
            | SuiteId::VerifyCommutators
            | SuiteId::VerifyJets
            | SuiteId::VerifyBubble => {
                vec![1, 2, 3]
            }
            SuiteId::VerifyEuclidean => vec![3, 4, 5],
            _ => vec![1, 2],
        }
    }

    /// Primary sample count: triples for the group suite, Monte Carlo draws
    /// for the integral suite, points per function or family member
    /// otherwise.
    pub fn default_samples(self) -> usize {
        match self {
            SuiteId::VerifyGroup => 10_000,
            SuiteId::VerifyJets => 50,
            SuiteId::VerifyIntegrals => 200_000,
            _ => 100,
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::CONCRETE
            .iter()
            .chain(std::iter::once(&SuiteId::All))
            .find(|id| id.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMember {
    pub n: usize,
    pub lambda: Complex64,
    pub mu: Vec<Complex64>,
}

/// Bubble parameters: the seeded default grid, or explicit members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    Default { count: usize },
    Members { members: Vec<GridMember> },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Default { count: 50 }
    }
}

impl GridSpec {
    /// Members of dimension `n`. An empty result means the grid has
    /// nothing for `n`.
    pub fn members(&self, n: usize, seed: u64) -> Vec<GridMember> {
        match self {
            GridSpec::Default { count } => crate::solutions::default_grid(n, *count, seed)
                .into_iter()
                .map(|(lambda, mu)| GridMember { n, lambda, mu })
                .collect(),
            GridSpec::Members { members } => members.iter().filter(|m| m.n == n).cloned().collect(),
        }
    }
}

/// Parse a complex literal such as `0.5-2i`, `i` or `3`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let e = parse(text).map_err(|e| Error::Config(format!("bad complex number '{text}': {e}")))?;
    simplify(&e)
        .as_constant()
        .map(|c| c.approx())
        .ok_or_else(|| Error::Config(format!("'{text}' is not a constant")))
}

/// Contents of a `--grid` file (TOML).
///
/// ```toml
/// seed = 7
/// samples = 100
/// radii = [10.0, 100.0, 1000.0]
///
/// [[member]]
/// n = 1
/// lambda = "0.3+1.2i"
/// mu = ["0.1-0.2i"]
/// ```
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridFile {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub members: Vec<GridMember>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGridFile {
    seed: Option<u64>,
    samples: Option<usize>,
    radii: Option<Vec<f64>>,
    #[serde(default)]
    member: Vec<RawMember>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMember {
    n: usize,
    lambda: String,
    #[serde(default)]
    mu: Vec<String>,
}

impl GridFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawGridFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("grid file: {e}")))?;
        let members = raw
            .member
            .into_iter()
            .map(|m| {
                let mu = if m.mu.is_empty() {
                    vec![Complex64::new(0.0, 0.0); m.n]
                } else {
                    m.mu.iter()
                        .map(|s| parse_complex(s))
                        .collect::<Result<Vec<_>>>()?
                };
                let member = GridMember {
                    n: m.n,
                    lambda: parse_complex(&m.lambda)?,
                    mu,
                };
                check_member(&member)?;
                Ok(member)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GridFile {
            seed: raw.seed,
            samples: raw.samples,
            radii: raw.radii,
            members,
        })
    }
}

/// Admissibility of an explicit member, as a config error.
pub fn check_member(m: &GridMember) -> Result<()> {
    crate::solutions::check_params(m.n, m.lambda, &m.mu).map_err(|e| Error::Config(e.to_string()))
}

/// Everything a suite run depends on. Echoed verbatim in the report, so a
/// report can be re-run from its own `config` field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub suite: SuiteId,
    /// Dimensions; empty selects each suite's defaults.
    pub dims: Vec<usize>,
    pub grid: GridSpec,
    pub seed: u64,
    /// Primary sample count; `None` selects each suite's default.
    pub samples: Option<usize>,
    /// Radii for the growth and gradient estimates; `None` selects defaults.
    pub radii: Option<Vec<f64>>,
    /// A user expression replacing the built-in test objects.
    pub expr: Option<String>,
    /// Effective tolerances, after overrides.
    pub tolerances: Tolerances,
    /// Record wall time in the report (breaks byte-for-byte determinism).
    #[serde(default)]
    pub timing: bool,
}

impl RunConfig {
    pub fn new(suite: SuiteId) -> Self {
        RunConfig {
            suite,
            dims: Vec::new(),
            grid: GridSpec::default(),
            seed: 0,
            samples: None,
            radii: None,
            expr: None,
            tolerances: Tolerances::default(),
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Config("dimension n must be at least 1".into()));
        }
        if self.samples == Some(0) {
            return Err(Error::Config("samples must be positive".into()));
        }
        if let Some(r) = &self.radii {
            if r.len() < 2 || r.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Config(
                    "radii must be at least two positive numbers".into(),
                ));
            }
        }
        match &self.grid {
            GridSpec::Default { count } if *count == 0 => {
                return Err(Error::Config(
                    "default grid needs at least one member".into(),
                ))
            }
            GridSpec::Members { members } => members.iter().try_for_each(check_member)?,
            _ => {}
        }
        if let Some(e) = &self.expr {
            parse(e).map_err(|err| Error::Config(format!("--expr: {err}")))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: SuiteId,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub skips: Vec<SkipRecord>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("report: {e}")))
    }

    /// The check table as CSV: `id,value,tolerance,rule,pass,inputs_digest`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,value,tolerance,rule,pass,inputs_digest\n");
        for c in &self.checks {
            let value = c.value.map(|v| format!("{v:e}")).unwrap_or_default();
            out.push_str(&format!(
                "\"{}\",{},{:e},{},{},{}\n",
                c.id,
                value,
                c.tolerance,
                c.rule.name(),
                c.pass,
                c.inputs_digest
            ));
        }
        out
    }

    pub fn series(&self, id: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.id == id)
    }
}

/// Run a suite. Errors are configuration problems; check failures are
/// reported in the returned report.
pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rec = record::Recorder::new(&cfg.tolerances);
    let suites: Vec<SuiteId> = if cfg.suite == SuiteId::All {
        SuiteId::CONCRETE.to_vec()
    } else {
        vec![cfg.suite]
    };
    for s in suites {
        runs::run(s, cfg, &mut rec)?;
    }
    let mut report = rec.finish(cfg);
    if cfg.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Two-column `R value` text of one series.
pub fn emit_series(report: &Report, id: &str) -> Result<String> {
    let s = report
        .series(id)
        .ok_or_else(|| Error::UnknownSeries(id.to_string()))?;
    let mut out = format!("# {} {}\n", s.columns[0], s.columns[1]);
    for [x, y] in &s.rows {
        out.push_str(&format!("{x:e} {y:e}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
