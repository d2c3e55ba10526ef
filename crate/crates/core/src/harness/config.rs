use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::baselines::DEFAULT_BALL_BUDGET;
use crate::error::{Error, Result};
use crate::graph::GraphKind;
use crate::par::Execution;
use crate::tape::{DEFAULT_DELTA, DEFAULT_T_MULTIPLIER};

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    /// Generated per seed with the seed as generator seed.
    Generator(GraphKind),
    File(PathBuf),
    /// Every connected graph on `1..=max_n` vertices, one per isomorphism class.
    SmallGraphs {
        max_n: usize,
    },
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::Generator(k) => write!(f, "{k}"),
            GraphSource::File(p) => write!(f, "file:{}", p.display()),
            GraphSource::SmallGraphs { max_n } => write!(f, "small:{max_n}"),
        }
    }
}

impl Serialize for GraphSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for GraphSource {
    type Err = Error;

    /// `small:<max_n>` or a generator spec such as `gnp:1000,0.01`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("small:") {
            let max_n = rest
                .parse()
                .ok()
                .filter(|&m| (1..=7).contains(&m))
                .ok_or_else(|| Error::Input(format!("bad small-graph bound '{rest}' (1..=7)")))?;
            return Ok(GraphSource::SmallGraphs { max_n });
        }
        Ok(GraphSource::Generator(s.parse()?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Lca,
    Global,
    BaselineRg,
    BaselineBall,
    Verify,
    Bench,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Lca => "lca",
            Mode::Global => "global",
            Mode::BaselineRg => "baseline-rg",
            Mode::BaselineBall => "baseline-ball",
            Mode::Verify => "verify",
            Mode::Bench => "bench",
            Mode::Sweep => "sweep",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lca" => Mode::Lca,
            "global" => Mode::Global,
            "baseline-rg" => Mode::BaselineRg,
            "baseline-ball" => Mode::BaselineBall,
            "verify" => Mode::Verify,
            "bench" => Mode::Bench,
            "sweep" => Mode::Sweep,
            _ => return Err(Error::Input(format!("unknown mode '{s}'"))),
        })
    }
}

/// Which vertices are questioned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Questions {
    /// All vertices when `n <= 10^5`, else a sample of `10^4`.
    #[default]
    Auto,
    All,
    Sample(usize),
    One(u32),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Input(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub source: GraphSource,
    pub seeds: Vec<u64>,
    pub t_multiplier: u32,
    pub delta: f64,
    pub k_override: Option<u64>,
    pub questions: Questions,
    pub cap: Option<usize>,
    /// Degrees for `bench`, `C_T` values for `sweep`.
    pub sweep: Vec<u32>,
    pub ball_budget: u128,
    /// Directory receiving per-seed trace CSVs in `global` mode.
    #[serde(skip)]
    pub trace_dir: Option<PathBuf>,
    /// Record wall-clock times (makes the report non-reproducible).
    pub timings: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, source: GraphSource, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            mode,
            source,
            seeds,
            t_multiplier: DEFAULT_T_MULTIPLIER,
            delta: DEFAULT_DELTA,
            k_override: None,
            questions: Questions::Auto,
            cap: None,
            sweep: Vec::new(),
            ball_budget: DEFAULT_BALL_BUDGET,
            trace_dir: None,
            timings: false,
            execution: Execution::Parallel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Input("seed list is empty".into()));
        }
        if self.t_multiplier == 0 {
            return Err(Error::Input("C_T must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Input(format!("delta {} outside (0, 1)", self.delta)));
        }
        if let Questions::Sample(0) = self.questions {
            return Err(Error::Input("sample size must be positive".into()));
        }
        match (self.mode, &self.source) {
            (Mode::Bench, GraphSource::Generator(k)) if !self.sweep.is_empty() => {
                k.with_degree(4)?;
            }
            (Mode::Bench, _) if !self.sweep.is_empty() => {
                return Err(Error::Input(
                    "a degree sweep needs a generator source".into(),
                ))
            }
            (Mode::Sweep, _) if self.sweep.is_empty() => {
                return Err(Error::Input("sweep mode needs --sweep <C_T list>".into()))
            }
            (Mode::Sweep, _) if self.sweep.contains(&0) => {
                return Err(Error::Input("C_T values must be positive".into()))
            }
            (m, GraphSource::SmallGraphs { .. }) if m != Mode::Verify => {
                return Err(Error::Input(
                    "small-graph enumeration is only available in verify mode".into(),
                ))
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sources_and_modes() {
        assert_eq!(
            "small:6".parse::<GraphSource>().unwrap(),
            GraphSource::SmallGraphs { max_n: 6 }
        );
        assert!("small:9".parse::<GraphSource>().is_err());
        assert!(matches!(
            "cycle:5".parse::<GraphSource>().unwrap(),
            GraphSource::Generator(_)
        ));
        for m in [
            "lca",
            "global",
            "baseline-rg",
            "baseline-ball",
            "verify",
            "bench",
            "sweep",
        ] {
            assert_eq!(m.parse::<Mode>().unwrap().name(), m);
        }
    }

    #[test]
    fn validation() {
        let src = GraphSource::Generator(GraphKind::Cycle { n: 5 });
        assert!(ExperimentConfig::new(Mode::Lca, src.clone(), vec![])
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(Mode::Sweep, src.clone(), vec![1])
            .validate()
            .is_err());
        let mut c = ExperimentConfig::new(Mode::Bench, src, vec![1]);
        c.sweep = vec![4, 8];
        assert!(c.validate().is_err());
        assert!(
            ExperimentConfig::new(Mode::Lca, GraphSource::SmallGraphs { max_n: 3 }, vec![1])
                .validate()
                .is_err()
        );
    }
}
