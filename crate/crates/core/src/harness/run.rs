use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use super::config::{ExperimentConfig, GraphSource, Mode, Questions};
use super::report::{
    ComponentStats, GraphInfo, NamedVerdict, ProbeStats, Report, RunReport, Timing,
};
use super::verify::{verify_mis, verify_region, Verdict};
use crate::baselines::{
    ball_simulate_answer, moore_bound, rgmis_answer, sequential_greedy, BallMode,
};
use crate::error::{Error, Result};
use crate::graph::{generate, load_edge_list, small, Graph};
use crate::lca::{
    self, default_component_cap, greedy_complete, BatchOptions, QuestionContext, Reply,
};
use crate::local_ref::{self, assert_influence_bounds, tally_rounds, Outcome, RunOptions};
use crate::par;
use crate::state::Phase1Status;
use crate::tape::Params;

const SAMPLE_SALT: u64 = 0x243f_6a88_85a3_08d3;

/// Runs `config` over every seed (and sweep point) and aggregates a report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let mut report = Report {
        config: config.clone(),
        runs: Vec::new(),
        aggregate: Vec::new(),
        summary: BTreeMap::new(),
        verdicts: Vec::new(),
        timings: config.timings.then(Vec::new),
    };
    let file_graph = match &config.source {
        GraphSource::File(p) => Some(load_edge_list(p)?),
        _ => None,
    };
    let points: Vec<Option<u32>> = match config.mode {
        Mode::Bench | Mode::Sweep if !config.sweep.is_empty() => {
            config.sweep.iter().map(|&x| Some(x)).collect()
        }
        _ => vec![None],
    };
    for &point in &points {
        for &seed in &config.seeds {
            let start = Instant::now();
            let label = point.map(|x| match config.mode {
                Mode::Sweep => format!("ct={x}"),
                _ => format!("delta={x}"),
            });
            let mut run = RunReport {
                seed,
                point: label.clone(),
                ..Default::default()
            };
            let mut verdicts = Vec::new();
            if let GraphSource::SmallGraphs { max_n } = config.source {
                verify_small(config, max_n, seed, &mut run, &mut verdicts)?;
            } else {
                let g = match (&file_graph, &config.source) {
                    (Some(g), _) => g.clone(),
                    (None, GraphSource::Generator(kind)) => {
                        let kind = match (config.mode, point) {
                            (Mode::Bench, Some(d)) => kind.with_degree(d as usize)?,
                            _ => kind.clone(),
                        };
                        generate(kind, seed)?
                    }
                    _ => unreachable!("file graphs are loaded above"),
                };
                let ct = match (config.mode, point) {
                    (Mode::Sweep, Some(ct)) => ct,
                    _ => config.t_multiplier,
                };
                let params = params_for(config, &g, seed, ct);
                run.graph = GraphInfo {
                    graphs: 1,
                    n: g.n(),
                    edges: g.edge_count(),
                    max_degree: g.max_degree(),
                };
                run.rounds = params.rounds;
                run.k = params.k;
                match config.mode {
                    Mode::Global | Mode::Sweep => {
                        global(config, &g, &params, &mut run, &mut verdicts)?
                    }
                    Mode::Lca | Mode::Bench => {
                        lca_mode(config, &g, &params, &mut run, &mut verdicts)?
                    }
                    Mode::BaselineRg => rg_mode(config, &g, seed, &mut run, &mut verdicts)?,
                    Mode::BaselineBall => ball_mode(config, &g, &params, &mut run, &mut verdicts)?,
                    Mode::Verify => verify_graph(config, &g, &params, &mut run, &mut verdicts)?,
                }
            }
            for (check, verdict) in verdicts {
                report.verdicts.push(NamedVerdict {
                    check,
                    seed: Some(seed),
                    point: label.clone(),
                    verdict,
                });
            }
            if let Some(t) = &mut report.timings {
                t.push(Timing {
                    seed,
                    point: label,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
            report.runs.push(run);
        }
    }
    report.finish();
    if config.mode == Mode::Bench && points.len() >= 2 {
        if let Some(slope) = fit_probe_exponent(&report) {
            report.summary.insert("probe_exponent_fit".into(), slope);
        }
    }
    Ok(report)
}

fn params_for(config: &ExperimentConfig, g: &Graph, seed: u64, ct: u32) -> Params {
    let p = Params::derive(g.max_degree(), config.delta, ct, seed);
    match config.k_override {
        Some(k) => p.with_k(k),
        None => p,
    }
}

/// Least-squares slope of `log(mean max probes)` against `log(max degree)`
/// across sweep points.
fn fit_probe_exponent(report: &Report) -> Option<f64> {
    let mut by_point: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for a in &report.aggregate {
        let Some(p) = a.point.as_deref() else {
            continue;
        };
        let e = by_point.entry(p).or_default();
        match a.metric.as_str() {
            "max_degree" => e.0 = a.mean,
            "probes_max" => e.1 = a.mean,
            _ => {}
        }
    }
    let pts: Vec<(f64, f64)> = by_point
        .values()
        .filter(|(d, p)| *d > 0.0 && *p > 0.0)
        .map(|(d, p)| (d.ln(), p.ln()))
        .collect();
    least_squares_slope(&pts)
}

/// Slope of the least-squares line through `points`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// The question list for a graph: sorted, duplicate-free.
pub fn question_list(q: Questions, n: usize, seed: u64) -> Result<Vec<u32>> {
    let sample = |k: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SAMPLE_SALT);
        let mut v: Vec<u32> = rand::seq::index::sample(&mut rng, n, k.min(n))
            .into_iter()
            .map(|i| i as u32)
            .collect();
        v.sort_unstable();
        v
    };
    Ok(match q {
        Questions::All => (0..n as u32).collect(),
        Questions::Auto if n <= 100_000 => (0..n as u32).collect(),
        Questions::Auto => sample(10_000),
        Questions::Sample(k) => sample(k),
        Questions::One(v) => {
            if v as usize >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: v as u64,
                    n,
                });
            }
            vec![v]
        }
    })
}

/// Connected components of the residual vertices, each ascending.
pub fn residual_components(g: &Graph, statuses: &[Phase1Status]) -> Vec<Vec<u32>> {
    let mut seen = vec![false; g.n()];
    let mut comps = Vec::new();
    for s in 0..g.n() as u32 {
        if seen[s as usize] || !statuses[s as usize].is_residual() {
            continue;
        }
        seen[s as usize] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let w = comp[head];
            head += 1;
            for &u in g.neighbors(w) {
                if !seen[u as usize] && statuses[u as usize].is_residual() {
                    seen[u as usize] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Membership after phase 1 and greedy completion of every residual
/// component, computed from a global run.
pub fn complete_globally(g: &Graph, out: &Outcome) -> (Vec<bool>, Vec<Vec<u32>>) {
    let mut member: Vec<bool> = out
        .statuses()
        .iter()
        .map(|&s| s == Phase1Status::InI)
        .collect();
    let comps = residual_components(g, out.statuses());
    for comp in &comps {
        let edges: Vec<(u32, u32)> = comp
            .iter()
            .flat_map(|&w| g.neighbors(w).iter().map(move |&u| (w, u)))
            .filter(|&(w, u)| w < u && comp.binary_search(&u).is_ok())
            .collect();
        for v in greedy_complete(comp, &edges) {
            member[v as usize] = true;
        }
    }
    (member, comps)
}

fn global(
    config: &ExperimentConfig,
    g: &Graph,
    params: &Params,
    run: &mut RunReport,
    verdicts: &mut Vec<(String, Verdict)>,
) -> Result<()> {
    let out = local_ref::run_with(
        g,
        params,
        RunOptions {
            execution: config.execution,
            labels: None,
        },
    )?;
    let influence = assert_influence_bounds(&out.ledger, params);
    verdicts.push((
        "influence_bounds".into(),
        Verdict::check(influence.is_pass(), || format!("{influence:?}")),
    ));
    let (member, comps) = complete_globally(g, &out);
    let cap = config
        .cap
        .unwrap_or_else(|| default_component_cap(g.max_degree(), g.n()));
    let sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
    run.cap_aborts = sizes.iter().filter(|&&s| s > cap).count() as u64;
    run.components = Some(ComponentStats::from_sizes(&sizes));
    run.residual_fraction = Some(out.residual_fraction());
    run.mis_size = Some(member.iter().filter(|&&b| b).count());
    run.tallies = Some(tally_rounds(g, &out));
    verdicts.push(("mis".into(), verify_mis(g, &member).to_verdict()));
    if let Some(dir) = &config.trace_dir {
        std::fs::create_dir_all(dir)?;
        let name = match &run.point {
            Some(p) => format!("trace_{}_seed{}.csv", p.replace('=', ""), run.seed),
            None => format!("trace_seed{}.csv", run.seed),
        };
        std::fs::write(dir.join(name), out.trace_csv(g))?;
    }
    Ok(())
}

fn replies_to_answers(replies: &[Reply]) -> (Vec<Option<lca::Answer>>, u64) {
    let aborts = replies.iter().filter(|r| r.answer().is_none()).count() as u64;
    (
        replies.iter().map(|r| r.answer().copied()).collect(),
        aborts,
    )
}

fn lca_mode(
    config: &ExperimentConfig,
    g: &Graph,
    params: &Params,
    run: &mut RunReport,
    verdicts: &mut Vec<(String, Verdict)>,
) -> Result<()> {
    let questions = question_list(config.questions, g.n(), run.seed)?;
    let opts = BatchOptions {
        execution: config.execution,
        cap: config.cap,
        ..Default::default()
    };
    let replies = lca::answer_many(g, params, &questions, opts)?;
    let (answers, aborts) = replies_to_answers(&replies);
    run.cap_aborts = aborts;
    let probes: Vec<u64> = answers.iter().flatten().map(|a| a.probes_used).collect();
    run.probes = Some(ProbeStats::from_counts(&probes));
    run.mis_size = Some(answers.iter().flatten().filter(|a| a.in_mis).count());
    if config.mode == Mode::Bench {
        return Ok(());
    }
    let shared = lca::answer_many(
        g,
        params,
        &questions,
        BatchOptions {
            shared_cache: true,
            chunk: 256,
            ..opts
        },
    )?;
    let same = replies
        .iter()
        .zip(&shared)
        .all(|(a, b)| a.answer().map(|x| x.in_mis) == b.answer().map(|x| x.in_mis));
    verdicts.push((
        "batch_equals_single".into(),
        Verdict::check(same, || {
            "shared-cache answers differ from fresh ones".into()
        }),
    ));
    let verdict = certify(g, params, &questions, config)?;
    verdicts.push(("mis_certified_region".into(), verdict));
    Ok(())
}

/// Certifies the region formed by the questions and the residual
/// components of residual questions: every edge touching it is independent
/// and every vertex in it is covered, with memberships of the region and
/// its neighbourhood all obtained from the LCA.
pub fn certify(
    g: &Graph,
    params: &Params,
    questions: &[u32],
    config: &ExperimentConfig,
) -> Result<Verdict> {
    let mut ctx = QuestionContext::new(g, params)?;
    if let Some(cap) = config.cap {
        ctx = ctx.with_cap(cap);
    }
    let mut member: FxHashMap<u32, bool> = FxHashMap::default();
    let mut region = Vec::new();
    for &v in questions {
        if member.contains_key(&v) {
            continue;
        }
        ctx.reset();
        match ctx.phase1_status(v)? {
            Phase1Status::Residual => {
                let comp = match ctx.residual_component(v) {
                    Ok(c) => c,
                    Err(Error::ComponentCap { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let mis = ctx.complete(&comp)?;
                for &w in &comp {
                    member.insert(w, mis.binary_search(&w).is_ok());
                    region.push(w);
                }
            }
            s => {
                member.insert(v, s == Phase1Status::InI);
                region.push(v);
            }
        }
    }
    let mut missing: Vec<u32> = region
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|u| !member.contains_key(u))
        .collect();
    missing.sort_unstable();
    missing.dedup();
    let opts = BatchOptions {
        execution: config.execution,
        cap: config.cap,
        ..Default::default()
    };
    for (u, r) in missing
        .iter()
        .zip(lca::answer_many(g, params, &missing, opts)?)
    {
        if let Some(a) = r.answer() {
            member.insert(*u, a.in_mis);
        }
    }
    region.sort_unstable();
    Ok(verify_region(g, &region, |v| member.get(&v).copied()).to_verdict())
}

fn rg_mode(
    config: &ExperimentConfig,
    g: &Graph,
    seed: u64,
    run: &mut RunReport,
    verdicts: &mut Vec<(String, Verdict)>,
) -> Result<()> {
    let questions = question_list(config.questions, g.n(), seed)?;
    let answers = par::map_slice(config.execution, &questions, |&v| rgmis_answer(g, seed, v));
    let answers: Vec<(bool, u64)> = answers.into_iter().collect::<Result<_>>()?;
    let seq = sequential_greedy(g, seed);
    run.probes = Some(ProbeStats::from_counts(
        &answers.iter().map(|a| a.1).collect::<Vec<_>>(),
    ));
    run.mis_size = Some(seq.iter().filter(|&&b| b).count());
    let mismatch = questions
        .iter()
        .zip(&answers)
        .find(|(&v, a)| a.0 != seq[v as usize]);
    verdicts.push((
        "rg_equals_sequential".into(),
        Verdict::check(mismatch.is_none(), || {
            format!("vertex {} differs", mismatch.unwrap().0)
        }),
    ));
    verdicts.push(("rg_mis".into(), verify_mis(g, &seq).to_verdict()));
    Ok(())
}

fn ball_mode(
    config: &ExperimentConfig,
    g: &Graph,
    params: &Params,
    run: &mut RunReport,
    verdicts: &mut Vec<(String, Verdict)>,
) -> Result<()> {
    let questions = question_list(config.questions, g.n(), run.seed)?;
    let radius = BallMode::Exact.reveal_radius(params.rounds);
    run.ball_estimate =
        Some(moore_bound(params.delta_max_degree, radius) * (params.delta_max_degree as f64 + 1.0));
    let results = par::map_slice(config.execution, &questions, |&v| {
        let ball = match ball_simulate_answer(g, params, v, BallMode::Exact, config.ball_budget) {
            Ok(a) => Some(a),
            Err(Error::BallBudget { .. }) => None,
            Err(e) => return Err(e),
        };
        let lca = QuestionContext::new(g, params)?.phase1_status(v)?;
        Ok((ball, lca))
    });
    let results: Vec<_> = results.into_iter().collect::<Result<_>>()?;
    run.ball_refusals = Some(results.iter().filter(|r| r.0.is_none()).count() as u64);
    let probes: Vec<u64> = results
        .iter()
        .filter_map(|r| r.0.map(|b| b.probes))
        .collect();
    run.probes = Some(ProbeStats::from_counts(&probes));
    let bad = questions
        .iter()
        .zip(&results)
        .find(|(_, (b, l))| b.is_some_and(|b| b.status != *l));
    verdicts.push((
        "ball_equals_lca".into(),
        Verdict::check(bad.is_none(), || {
            format!("vertex {} differs", bad.unwrap().0)
        }),
    ));
    Ok(())
}

/// Named checks, each with the first failure reason if any.
type Checks = Vec<(&'static str, Option<String>)>;

/// Cross-checks on one graph.
fn cross_check(
    config: &ExperimentConfig,
    g: &Graph,
    params: &Params,
    trace_all: bool,
) -> Result<(Checks, Outcome, Vec<bool>)> {
    let out = local_ref::run_with(
        g,
        params,
        RunOptions {
            execution: config.execution,
            labels: None,
        },
    )?;
    let (global_member, _) = complete_globally(g, &out);
    let n = g.n();
    let questions = question_list(config.questions, n, params.master_seed)?;
    let opts = BatchOptions {
        execution: config.execution,
        cap: config.cap,
        ..Default::default()
    };
    let fresh = lca::answer_many(g, params, &questions, opts)?;
    let shared = lca::answer_many(
        g,
        params,
        &questions,
        BatchOptions {
            shared_cache: true,
            chunk: 256,
            ..opts
        },
    )?;
    let mut checks: Checks = Vec::new();
    let mut first = |name: &'static str, bad: Option<String>| checks.push((name, bad));

    let influence = assert_influence_bounds(&out.ledger, params);
    first(
        "influence_bounds",
        (!influence.is_pass()).then(|| format!("{influence:?}")),
    );

    let status_bad = questions
        .iter()
        .zip(&fresh)
        .find_map(|(&v, r)| match r.answer() {
            Some(a) if a.phase1 == out.status(v) => None,
            Some(a) => Some(format!(
                "vertex {v}: lca {:?}, global {:?}",
                a.phase1,
                out.status(v)
            )),
            None => Some(format!("vertex {v}: component cap exceeded")),
        });
    first("phase1_equals_global", status_bad);

    let member_bad = questions.iter().zip(&fresh).find_map(|(&v, r)| {
        let a = r.answer()?;
        (a.in_mis != global_member[v as usize]).then(|| format!("vertex {v}"))
    });
    first("answers_equal_global", member_bad);

    let batch_bad = questions
        .iter()
        .zip(fresh.iter().zip(&shared))
        .find_map(|(&v, (a, b))| {
            (a.answer().map(|x| x.in_mis) != b.answer().map(|x| x.in_mis))
                .then(|| format!("vertex {v}"))
        });
    first("batch_equals_single", batch_bad);

    let lca_member = if questions.len() == n {
        let m: Vec<bool> = fresh
            .iter()
            .map(|r| r.answer().is_some_and(|a| a.in_mis))
            .collect();
        let v = verify_mis(g, &m).to_verdict();
        first(
            "lca_mis",
            match v {
                Verdict::Pass => None,
                Verdict::Fail(r) => Some(r),
            },
        );
        m
    } else {
        global_member.clone()
    };

    let trace_vs: Vec<u32> = if trace_all || n <= 2000 {
        questions.clone()
    } else {
        question_list(Questions::Sample(200), n, params.master_seed)?
    };
    let trace_bad = par::map_slice(
        config.execution,
        &trace_vs,
        |&v| -> Result<Option<String>> {
            let mut ctx = QuestionContext::new(g, params)?;
            for t in (0..=params.rounds).rev() {
                let s = ctx.simulate_node(v, t)?;
                if s != out.state(v, t) {
                    return Ok(Some(format!(
                        "vertex {v} round {t}: lca {s:?}, global {:?}",
                        out.state(v, t)
                    )));
                }
            }
            Ok(None)
        },
    );
    let trace_bad = trace_bad
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    first("trace_equals_global", trace_bad);

    let radius = BallMode::Exact.reveal_radius(params.rounds);
    if crate::baselines::estimated_probes(params, n, radius) <= config.ball_budget {
        let ball_vs: Vec<u32> = if n <= 64 {
            questions.clone()
        } else {
            trace_vs.iter().take(20).copied().collect()
        };
        let ball_bad = ball_vs.iter().find_map(|&v| {
            match ball_simulate_answer(g, params, v, BallMode::Exact, config.ball_budget) {
                Ok(b) if b.status == out.status(v) => None,
                Ok(b) => Some(format!(
                    "vertex {v}: ball {:?}, global {:?}",
                    b.status,
                    out.status(v)
                )),
                Err(e) => Some(format!("vertex {v}: {e}")),
            }
        });
        first("ball_equals_global", ball_bad);
    }

    let seq = sequential_greedy(g, params.master_seed);
    let rg = verify_mis(g, &seq).to_verdict();
    first(
        "rg_mis",
        match rg {
            Verdict::Pass => None,
            Verdict::Fail(r) => Some(r),
        },
    );
    Ok((checks, out, lca_member))
}

fn verify_graph(
    config: &ExperimentConfig,
    g: &Graph,
    params: &Params,
    run: &mut RunReport,
    verdicts: &mut Vec<(String, Verdict)>,
) -> Result<()> {
    let (checks, out, member) = cross_check(config, g, params, false)?;
    run.residual_fraction = Some(out.residual_fraction());
    run.mis_size = Some(member.iter().filter(|&&b| b).count());
    for (name, bad) in checks {
        verdicts.push((name.to_string(), bad.map_or(Verdict::Pass, Verdict::Fail)));
    }
    Ok(())
}

fn verify_small(
    config: &ExperimentConfig,
    max_n: usize,
    seed: u64,
    run: &mut RunReport,
    verdicts: &mut Vec<(String, Verdict)>,
) -> Result<()> {
    let graphs: Vec<Graph> = small::nonisomorphic_up_to(max_n)
        .into_iter()
        .filter(small::is_connected)
        .collect();
    let mut firsts: BTreeMap<&'static str, Option<String>> = BTreeMap::new();
    let mut order: Vec<&'static str> = Vec::new();
    let sequential = ExperimentConfig {
        execution: crate::par::Execution::Sequential,
        questions: Questions::All,
        ..config.clone()
    };
    let results = par::map_slice(config.execution, &graphs, |g| {
        let params = params_for(config, g, seed, config.t_multiplier);
        cross_check(&sequential, g, &params, true)
    });
    let mut residual = 0usize;
    let mut vertices = 0usize;
    for (g, r) in graphs.iter().zip(results) {
        let (checks, out, _) = r?;
        residual += out.residual().len();
        vertices += g.n();
        for (name, bad) in checks {
            if !firsts.contains_key(name) {
                order.push(name);
            }
            let slot = firsts.entry(name).or_insert(None);
            if slot.is_none() {
                if let Some(b) = bad {
                    *slot = Some(format!("graph {:?}: {b}", g.edges()));
                }
            }
        }
    }
    run.graph = GraphInfo {
        graphs: graphs.len(),
        n: vertices,
        edges: graphs.iter().map(Graph::edge_count).sum(),
        max_degree: graphs.iter().map(Graph::max_degree).max().unwrap_or(0),
    };
    run.residual_fraction = Some(if vertices == 0 {
        0.0
    } else {
        residual as f64 / vertices as f64
    });
    for name in order {
        verdicts.push((
            name.to_string(),
            firsts[name].clone().map_or(Verdict::Pass, Verdict::Fail),
        ));
    }
    Ok(())
}
