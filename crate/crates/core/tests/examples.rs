use mis_lca::baselines::{ball_simulate_answer, BallMode, DEFAULT_BALL_BUDGET};
use mis_lca::graph::{generate, GraphKind};
use mis_lca::harness::verify_mis;
use mis_lca::lca::{self, answer_all, BatchOptions, QuestionContext};
use mis_lca::local_ref::{run, run_with, RunOptions};
use mis_lca::par::Execution;
use mis_lca::{Graph, Params, Phase1Status};

fn edge() -> Graph {
    Graph::from_edges(2, &[(0, 1)]).unwrap()
}

fn half(p: &Params) -> u128 {
    1u128 << (p.bits - 1)
}

#[test]
fn rho_is_uniform_over_sixteen_buckets() {
    let p = Params::new(16, 2024);
    let tape = p.tape();
    let mut buckets = [0u64; 16];
    let mut count = 0u64;
    'outer: for v in 0..5000u32 {
        for t in 1..=p.rounds {
            let bucket = ((tape.rho(v, t) - 1) >> (p.bits - 4)) as usize;
            buckets[bucket] += 1;
            count += 1;
            if count == 100_000 {
                break 'outer;
            }
        }
    }
    let expected = count as f64 / 16.0;
    let chi2: f64 = buckets
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    // upper 10^-3 quantile of chi-square with 15 degrees of freedom
    assert!(chi2 < 37.697, "chi2 = {chi2}");
}

#[test]
fn seed_changes_some_rho() {
    let a = Params::new(8, 1).tape();
    let b = Params::new(8, 2).tape();
    let pairs = (0..25u32).flat_map(|v| (1..=4).map(move |t| (v, t)));
    assert!(pairs.clone().any(|(v, t)| a.rho(v, t) != b.rho(v, t)));
    assert!(pairs.clone().all(|(v, t)| a.rho(v, t) == a.rho(v, t)));
}

#[test]
fn star_center_relevant_set_by_enumeration() {
    let g = generate(GraphKind::Star { leaves: 64 }, 0).unwrap();
    for seed in 0..5 {
        let p = Params::new(64, seed);
        assert_eq!(p.initial_exponent(), 7);
        let tape = p.tape();
        let bound = 1u128 << (p.bits - 7);
        let want: Vec<u32> = (1..=64).filter(|&u| tape.rho(u, 1) <= bound).collect();
        assert_eq!(run(&g, &p).unwrap().relevant_set(&g, 0, 1), want);
        let mut ctx = QuestionContext::new(&g, &p).unwrap();
        assert_eq!(ctx.relevant_set(0, 1).unwrap(), want);
    }
}

#[test]
fn clique_init_sleep_with_zero_k() {
    let g = generate(GraphKind::Complete { n: 8 }, 0).unwrap();
    let mut slept = 0;
    for seed in 0..40 {
        let p = Params::new(7, seed).with_k(0);
        assert_eq!(p.initial_exponent(), 4);
        let tape = p.tape();
        let bound = 1u128 << (p.bits - 4);
        let out = run(&g, &p).unwrap();
        for v in 0..8u32 {
            let size = (0..8)
                .filter(|&u| u != v && tape.rho(u, 1) <= bound)
                .count();
            assert_eq!(out.sleeping(v, 1), size > 1, "seed {seed} v {v}");
            slept += (size > 1) as u32;
        }
    }
    assert!(slept > 0);
}

#[test]
fn single_edge_round_examples() {
    let g = edge();
    let (mut both, mut one) = (false, false);
    for seed in 0..200 {
        let p = Params::new(1, seed);
        let out = run(&g, &p).unwrap();
        for t in 1..=p.rounds {
            if !(out.active(0, t) && out.active(1, t)) || out.sleeping(0, t) || out.sleeping(1, t) {
                continue;
            }
            let (m0, m1) = (out.marked(0, t), out.marked(1, t));
            if m0 && m1 {
                both = true;
                assert_ne!(out.join_round(0), Some(t));
                assert_ne!(out.join_round(1), Some(t));
                assert_eq!(out.exponent(0, t + 1), out.exponent(0, t) + 1);
                assert_eq!(out.exponent(1, t + 1), out.exponent(1, t) + 1);
            } else if m0 && !m1 && out.relevant_set(&g, 1, t) == [0] {
                one = true;
                assert_eq!(out.join_round(0), Some(t));
                assert_eq!(out.dead_round(1), Some(t));
            }
        }
    }
    assert!(both && one);
}

#[test]
fn single_edge_first_joiner() {
    let g = edge();
    let seed = (0..100)
        .find(|&s| run(&g, &Params::new(1, s)).unwrap().status(0) == Phase1Status::InI)
        .expect("some seed lets vertex 0 join");
    let p = Params::new(1, seed);
    let mut ctx = QuestionContext::new(&g, &p).unwrap();
    assert_eq!(ctx.phase1_status(0).unwrap(), Phase1Status::InI);
    assert_eq!(
        ctx.phase1_status(1).unwrap(),
        Phase1Status::Dominated { by: 0 }
    );
}

#[test]
fn k2_both_residual_at_one_round() {
    let g = edge();
    let seed = (0..1000)
        .find(|&s| {
            let p = Params::new(1, s).with_t_multiplier(1);
            let tape = p.tape();
            tape.rho(0, 1) > half(&p) && tape.rho(1, 1) > half(&p)
        })
        .unwrap();
    let p = Params::new(1, seed).with_t_multiplier(1);
    assert_eq!(p.rounds, 1);
    let out = run(&g, &p).unwrap();
    let mut ctx = QuestionContext::new(&g, &p).unwrap();
    for v in 0..2 {
        assert_eq!(out.status(v), Phase1Status::Residual);
        assert_eq!(ctx.phase1_status(v).unwrap(), Phase1Status::Residual);
    }
    assert_eq!(ctx.residual_component(1).unwrap(), vec![0, 1]);
    let a = lca::answer(&g, &p, 1).unwrap();
    assert!(!a.in_mis);
    assert_eq!(a.component_size, 2);
    assert!(lca::answer(&g, &p, 0).unwrap().in_mis);
}

#[test]
fn never_marked_vertex_is_never_in_phase_one_set() {
    let g = Graph::empty(3000);
    let p = Params::new(0, 5);
    let tape = p.tape();
    let quiet: Vec<u32> = (0..3000)
        .filter(|&v| (1..=p.rounds).all(|t| tape.rho(v, t) > half(&p)))
        .collect();
    assert!(!quiet.is_empty());
    let out = run(&g, &p).unwrap();
    for v in quiet {
        assert_eq!(out.status(v), Phase1Status::Residual);
        let a = lca::answer(&g, &p, v).unwrap();
        assert_eq!(
            (a.phase1, a.in_mis, a.component_size),
            (Phase1Status::Residual, true, 1)
        );
    }
}

#[test]
fn isolated_vertex_is_always_in_the_set() {
    let g = Graph::empty(1);
    for seed in 0..200 {
        let a = lca::answer(&g, &Params::new(0, seed), 0).unwrap();
        assert!(a.in_mis);
        assert_eq!(a.probes_used, 1);
    }
}

#[test]
fn path_three_middle_question_probes() {
    let g = generate(GraphKind::Path { n: 3 }, 0).unwrap();
    for seed in 0..50 {
        let p = Params::new(2, seed);
        let mut ctx = QuestionContext::new(&g, &p).unwrap();
        ctx.phase1_status(1).unwrap();
        assert!(ctx.probes() <= 7, "seed {seed}: {} probes", ctx.probes());
        let a = lca::answer(&g, &p, 1).unwrap();
        assert!(a.probes_used <= 7);
    }
}

#[test]
fn residual_component_examples() {
    let g = generate(GraphKind::Path { n: 3 }, 0).unwrap();
    let seed = (0..5000)
        .find(|&s| {
            let p = Params::new(2, s).with_t_multiplier(1);
            let out = run(&g, &p).unwrap();
            out.residual().len() == 3
        })
        .expect("some seed leaves P_3 untouched");
    let p = Params::new(2, seed).with_t_multiplier(1);
    for v in 0..3 {
        let mut ctx = QuestionContext::new(&g, &p).unwrap();
        assert_eq!(ctx.residual_component(v).unwrap(), vec![0, 1, 2]);
    }
    let members: Vec<bool> = (0..3)
        .map(|v| lca::answer(&g, &p, v).unwrap().in_mis)
        .collect();
    assert_eq!(members, [true, false, true]);

    // a residual vertex whose neighbours are all dominated
    let g = generate(GraphKind::Path { n: 40 }, 0).unwrap();
    let mut found = false;
    for s in 0..200 {
        let p = Params::new(2, s).with_t_multiplier(1);
        let out = run(&g, &p).unwrap();
        for v in 0..40u32 {
            if out.status(v).is_residual()
                && g.neighbors(v).iter().all(|&u| !out.status(u).is_residual())
            {
                let mut ctx = QuestionContext::new(&g, &p).unwrap();
                assert_eq!(ctx.residual_component(v).unwrap(), vec![v]);
                found = true;
            }
        }
    }
    assert!(found);
}

#[test]
fn gnp_answers_form_a_maximal_independent_set() {
    let g = generate(
        GraphKind::Gnp {
            n: 2000,
            p: 6.0 / 2000.0,
        },
        11,
    )
    .unwrap();
    let p = Params::new(g.max_degree(), 11);
    let replies = answer_all(&g, &p, BatchOptions::default()).unwrap();
    let member: Vec<bool> = replies.iter().map(|r| r.answer().unwrap().in_mis).collect();
    assert!(verify_mis(&g, &member).is_pass());
}

#[test]
fn star_ball_versus_lca_probes() {
    let g = generate(GraphKind::Star { leaves: 8 }, 0).unwrap();
    for seed in 0..10 {
        let p = Params::new(8, seed).with_t_multiplier(1);
        let ball = ball_simulate_answer(&g, &p, 0, BallMode::Exact, DEFAULT_BALL_BUDGET).unwrap();
        let mut ctx = QuestionContext::new(&g, &p).unwrap();
        assert_eq!(ball.status, ctx.phase1_status(0).unwrap());
        // the centre plus eight leaves, each revealed once
        assert_eq!(ball.probes, 9 + 8 * 2);
        assert!(ctx.probes() <= ball.probes);
    }
}

/// Simulating only the radius-`T` ball can give the wrong status, which is
/// why the ball baseline reveals radius `2T`.
#[test]
fn radius_t_ball_is_not_enough() {
    let g = generate(GraphKind::Path { n: 30 }, 0).unwrap();
    let mut wrong = 0;
    for seed in 0..200 {
        let p = Params::new(2, seed).with_t_multiplier(1);
        let out = run(&g, &p).unwrap();
        let v = 15u32;
        let r = p.rounds;
        let ids: Vec<u32> = (v - r..=v + r).collect();
        let edges: Vec<(u32, u32)> = (0..ids.len() as u32 - 1).map(|i| (i, i + 1)).collect();
        let sub = Graph::from_edges(ids.len(), &edges).unwrap();
        let opts = RunOptions {
            execution: Execution::Sequential,
            labels: Some(&ids),
        };
        let local = run_with(&sub, &p, opts).unwrap();
        let centre = r;
        let truncated = match local.status(centre) {
            Phase1Status::Dominated { by } => Phase1Status::Dominated {
                by: ids[by as usize],
            },
            s => s,
        };
        if truncated != out.status(v) {
            wrong += 1;
        }
        let exact = ball_simulate_answer(&g, &p, v, BallMode::Exact, DEFAULT_BALL_BUDGET).unwrap();
        assert_eq!(exact.status, out.status(v));
    }
    assert!(wrong > 0);
}
