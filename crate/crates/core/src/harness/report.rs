use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentConfig, Format};
use super::verify::Verdict;
use crate::error::Result;
use crate::local_ref::Tallies;

/// Nearest-rank summary of per-question probe counts.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProbeStats {
    pub questions: usize,
    pub max: u64,
    pub mean: f64,
    pub p50: u64,
    pub p95: u64,
    pub p99: u64,
}

impl ProbeStats {
    pub fn from_counts(counts: &[u64]) -> ProbeStats {
        if counts.is_empty() {
            return ProbeStats::default();
        }
        let mut s = counts.to_vec();
        s.sort_unstable();
        let rank = |q: f64| s[((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        ProbeStats {
            questions: s.len(),
            max: *s.last().unwrap(),
            mean: s.iter().sum::<u64>() as f64 / s.len() as f64,
            p50: rank(0.50),
            p95: rank(0.95),
            p99: rank(0.99),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ComponentStats {
    pub count: usize,
    pub max: usize,
    /// Component size to number of components.
    pub histogram: BTreeMap<usize, usize>,
}

impl ComponentStats {
    pub fn from_sizes(sizes: &[usize]) -> ComponentStats {
        let mut histogram = BTreeMap::new();
        for &s in sizes {
            *histogram.entry(s).or_insert(0) += 1;
        }
        ComponentStats {
            count: sizes.len(),
            max: sizes.iter().copied().max().unwrap_or(0),
            histogram,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GraphInfo {
    /// Number of graphs in the run (more than one for small-graph suites).
    pub graphs: usize,
    pub n: usize,
    pub edges: usize,
    pub max_degree: u32,
}

/// Results for one seed (and one sweep point).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub point: Option<String>,
    pub graph: GraphInfo,
    pub rounds: u32,
    pub k: u64,
    pub probes: Option<ProbeStats>,
    pub residual_fraction: Option<f64>,
    pub components: Option<ComponentStats>,
    pub mis_size: Option<usize>,
    pub tallies: Option<Tallies>,
    pub cap_aborts: u64,
    pub ball_refusals: Option<u64>,
    /// Moore-bound reveal estimate of the ball baseline, unbounded by `n`.
    pub ball_estimate: Option<f64>,
}

impl RunReport {
    /// `(metric, value)` pairs in a fixed order.
    pub fn metrics(&self) -> Vec<(String, String)> {
        let mut m: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| m.push((k.to_string(), v));
        put("n", self.graph.n.to_string());
        put("edges", self.graph.edges.to_string());
        put("max_degree", self.graph.max_degree.to_string());
        if self.graph.graphs != 1 {
            put("graphs", self.graph.graphs.to_string());
        }
        put("rounds", self.rounds.to_string());
        put("k", self.k.to_string());
        if let Some(p) = &self.probes {
            put("probes_questions", p.questions.to_string());
            put("probes_max", p.max.to_string());
            put("probes_mean", p.mean.to_string());
            put("probes_p50", p.p50.to_string());
            put("probes_p95", p.p95.to_string());
            put("probes_p99", p.p99.to_string());
        }
        if let Some(r) = self.residual_fraction {
            put("residual_fraction", r.to_string());
        }
        if let Some(c) = &self.components {
            put("components", c.count.to_string());
            put("component_max", c.max.to_string());
        }
        if let Some(s) = self.mis_size {
            put("mis_size", s.to_string());
        }
        if let Some(t) = &self.tallies {
            for (name, tally) in [
                ("mistaken", t.mistaken),
                ("wrong_down", t.wrong_down),
                ("wrong_up", t.wrong_up),
                ("heavy_halving", t.heavy_halving),
                ("good1_join", t.good1_join),
                ("good2_neighbor_join", t.good2_neighbor_join),
            ] {
                put(&format!("{name}_trials"), tally.trials.to_string());
                put(&format!("{name}_hits"), tally.hits.to_string());
            }
        }
        put("cap_aborts", self.cap_aborts.to_string());
        if let Some(r) = self.ball_refusals {
            put("ball_refusals", r.to_string());
        }
        if let Some(e) = self.ball_estimate {
            put("ball_estimate", e.to_string());
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedVerdict {
    pub check: String,
    pub seed: Option<u64>,
    pub point: Option<String>,
    pub verdict: Verdict,
}

/// Mean over seeds of one metric at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub point: Option<String>,
    pub metric: String,
    pub seeds: usize,
    pub mean: f64,
    /// Standard error of the mean (0 for a single seed).
    pub std_err: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub seed: u64,
    pub point: Option<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub aggregate: Vec<Aggregate>,
    /// Extra derived figures, e.g. the fitted probe exponent of a sweep.
    pub summary: BTreeMap<String, f64>,
    pub verdicts: Vec<NamedVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict.is_pass())
    }

    pub fn failures(&self) -> impl Iterator<Item = &NamedVerdict> {
        self.verdicts.iter().filter(|v| !v.verdict.is_pass())
    }

    /// Runs sorted by `(point, seed)` and aggregates computed from them, so
    /// the result does not depend on the order runs were produced in.
    pub(crate) fn finish(&mut self) {
        self.runs
            .sort_by(|a, b| (&a.point, a.seed).cmp(&(&b.point, b.seed)));
        let mut groups: BTreeMap<(Option<String>, usize, String), Vec<f64>> = BTreeMap::new();
        for r in &self.runs {
            for (i, (k, v)) in r.metrics().into_iter().enumerate() {
                if let Ok(x) = v.parse::<f64>() {
                    groups.entry((r.point.clone(), i, k)).or_default().push(x);
                }
            }
        }
        self.aggregate = groups
            .into_iter()
            .map(|((point, _, metric), xs)| {
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                let var = if xs.len() > 1 {
                    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                Aggregate {
                    point,
                    metric,
                    seeds: xs.len(),
                    mean,
                    std_err: (var / n).sqrt(),
                    max: xs.iter().copied().fold(f64::MIN, f64::max),
                }
            })
            .collect();
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `seed,metric,value`; aggregates use seed `all`, sweep points prefix
    /// the metric as `<point>/<metric>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,metric,value\n");
        let name = |point: &Option<String>, m: &str| match point {
            Some(p) => format!("{p}/{m}"),
            None => m.to_string(),
        };
        for r in &self.runs {
            for (k, v) in r.metrics() {
                let _ = writeln!(out, "{},{},{}", r.seed, name(&r.point, &k), v);
            }
        }
        for a in &self.aggregate {
            let _ = writeln!(
                out,
                "all,{},{}",
                name(&a.point, &format!("{}_mean", a.metric)),
                a.mean
            );
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "all,{k},{v}");
        }
        for v in &self.verdicts {
            let seed = v.seed.map_or("all".to_string(), |s| s.to_string());
            let status = if v.verdict.is_pass() { "pass" } else { "fail" };
            let _ = writeln!(
                out,
                "{seed},{},{status}",
                name(&v.point, &format!("verdict_{}", v.check))
            );
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => Ok(self.to_csv()),
        }
    }
}

/// Writes the report in `format`.
pub fn emit_report(report: &Report, format: Format, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, report.render(format)?)?;
    Ok(())
}
