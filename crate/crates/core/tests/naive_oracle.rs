//! A straight-line re-implementation of the round simulator with hash sets,
//! no cursors and no phases shared with the library, compared field by field.

use std::collections::{BTreeSet, HashSet};

use mis_lca::graph::{generate, small, GraphKind};
use mis_lca::local_ref::run;
use mis_lca::state::SleepBasis;
use mis_lca::{Graph, Params, Phase1Status};

fn pow2_sat(e: u64) -> u128 {
    if e >= 127 {
        u128::MAX
    } else {
        1u128 << e
    }
}

fn threshold(gap: u32, k: u64) -> u128 {
    pow2_sat(5 * gap as u64).saturating_add(k as u128)
}

struct Naive {
    exps: Vec<Vec<u32>>,
    marked: Vec<Vec<bool>>,
    sleeping: Vec<Vec<bool>>,
    lp: Vec<Vec<u32>>,
    join: Vec<Option<u32>>,
    dead: Vec<Option<u32>>,
    sets: Vec<Vec<HashSet<u32>>>,
    status: Vec<Phase1Status>,
}

fn naive(g: &Graph, p: &Params) -> Naive {
    let n = g.n();
    let rounds = p.rounds;
    let tt = rounds as usize;
    let tape = p.tape();
    let b = p.bits as u64;
    let rho = |u: u32, t: u32| tape.rho(u, t);
    let under = |u: u32, t: u32, e: u32, shift: u32| -> bool {
        shift >= e || rho(u, t) <= pow2_sat(b - e as u64 + shift as u64)
    };
    let e1 = (64 - (p.delta_max_degree.max(1) as u64 - 1).leading_zeros()) + 1;

    let mut exps = vec![vec![0u32; n]; tt + 2];
    exps[1] = vec![e1; n];
    let mut marked = vec![vec![false; n]; tt + 1];
    let mut sleeping = vec![vec![false; n]; tt + 2];
    let mut lp = vec![vec![0u32; n]; tt + 1];
    let mut cur_lp = vec![0u32; n];
    let mut e = vec![e1; n];
    let mut join: Vec<Option<u32>> = vec![None; n];
    let mut dead: Vec<Option<u32>> = vec![None; n];
    let mut sets: Vec<Vec<HashSet<u32>>> = vec![vec![HashSet::new(); tt + 1]; n];

    for v in 0..n {
        for t in 1..=rounds {
            let s: HashSet<u32> = g
                .neighbors(v as u32)
                .iter()
                .copied()
                .filter(|&u| under(u, t, e1, t - 1))
                .collect();
            let size = s.len() as u128;
            if size > threshold(t - 1, p.k) {
                let mut z = 0;
                while size > threshold(t + z, p.k) {
                    z += 1;
                }
                for x in t..=(t + z).min(rounds) {
                    sleeping[x as usize][v] = true;
                }
            }
            sets[v][t as usize] = s;
        }
    }

    let resolved_before = |join: &[Option<u32>], dead: &[Option<u32>], v: usize, t: u32| {
        join[v].is_some_and(|j| j < t) || dead[v].is_some_and(|d| d < t)
    };

    for t in 1..=rounds {
        let ti = t as usize;
        for v in 0..n {
            if resolved_before(&join, &dead, v, t) {
                continue;
            }
            if !sleeping[ti][v] {
                for r in cur_lp[v] + 1..t {
                    if sets[v][r as usize]
                        .iter()
                        .any(|&u| join[u as usize] == Some(r))
                    {
                        dead[v] = Some(t);
                        break;
                    }
                }
                cur_lp[v] = t - 1;
                if dead[v].is_some() {
                    continue;
                }
            }
            marked[ti][v] = rho(v as u32, t) <= pow2_sat(b - e[v] as u64);
        }
        let joiners: Vec<usize> = (0..n)
            .filter(|&v| {
                marked[ti][v]
                    && !sleeping[ti][v]
                    && sets[v][ti].iter().all(|&u| !marked[ti][u as usize])
            })
            .collect();
        for &v in &joiners {
            join[v] = Some(t);
        }
        let mut new_dead = Vec::new();
        for v in 0..n {
            if resolved_before(&join, &dead, v, t) || dead[v] == Some(t) || join[v] == Some(t) {
                continue;
            }
            let mut died = false;
            if sleeping[ti][v] {
                e[v] += 1;
            } else {
                let blocked = sets[v][ti].iter().any(|&u| marked[ti][u as usize]);
                died = sets[v][ti].iter().any(|&u| join[u as usize] == Some(t));
                cur_lp[v] = t;
                e[v] = if blocked { e[v] + 1 } else { (e[v] - 1).max(1) };
            }
            if died {
                new_dead.push(v);
                continue;
            }
            for t2 in t + 1..=rounds {
                if sleeping[t2 as usize][v] {
                    continue;
                }
                let gap = t2 - t;
                if t < gap + 2 {
                    continue;
                }
                let lo = if t > 2 * gap { t - 2 * gap } else { 1 };
                for r in lo..=t - gap - 1 {
                    let kept: HashSet<u32> = sets[v][t2 as usize]
                        .iter()
                        .copied()
                        .filter(|&u| {
                            let du = dead[u as usize].is_some_and(|d| d <= r);
                            !du && under(u, t2, exps[r as usize][u as usize], t2 - r)
                        })
                        .collect();
                    sets[v][t2 as usize] = kept;
                    if sets[v][t2 as usize].len() as u128 > threshold(t2 - r, p.k) {
                        for x in t2..=(t2 + t2 - r).min(rounds) {
                            sleeping[x as usize][v] = true;
                        }
                        break;
                    }
                }
            }
        }
        for v in new_dead {
            dead[v] = Some(t);
        }
        exps[ti + 1] = e.clone();
        lp[ti] = cur_lp.clone();
    }

    let status = (0..n)
        .map(|v| {
            if join[v].is_some() {
                return Phase1Status::InI;
            }
            g.neighbors(v as u32)
                .iter()
                .filter_map(|&u| join[u as usize].map(|j| (j, u)))
                .min()
                .map_or(Phase1Status::Residual, |(_, by)| Phase1Status::Dominated {
                    by,
                })
        })
        .collect();
    Naive {
        exps,
        marked,
        sleeping,
        lp,
        join,
        dead,
        sets,
        status,
    }
}

/// Returns `(init, refine)` declaration counts of the run.
fn compare(g: &Graph, p: &Params, what: &str) -> (usize, usize) {
    let want = naive(g, p);
    let got = run(g, p).unwrap();
    for v in 0..g.n() as u32 {
        let i = v as usize;
        assert_eq!(got.status(v), want.status[i], "{what}: status of {v}");
        assert_eq!(got.join_round(v), want.join[i], "{what}: join round of {v}");
        assert_eq!(got.dead_round(v), want.dead[i], "{what}: dead round of {v}");
        for t in 1..=p.rounds {
            let ti = t as usize;
            assert_eq!(
                got.exponent(v, t),
                want.exps[ti][i],
                "{what}: exponent {v}@{t}"
            );
            assert_eq!(
                got.marked(v, t),
                want.marked[ti][i],
                "{what}: marked {v}@{t}"
            );
            assert_eq!(
                got.sleeping(v, t),
                want.sleeping[ti][i],
                "{what}: sleeping {v}@{t}"
            );
            assert_eq!(
                got.state(v, t).last_processed,
                want.lp[ti][i],
                "{what}: lp {v}@{t}"
            );
            let a: BTreeSet<u32> = got.relevant_set(g, v, t).into_iter().collect();
            let b: BTreeSet<u32> = want.sets[i][ti].iter().copied().collect();
            assert_eq!(a, b, "{what}: N({v},{t})");
        }
        assert_eq!(
            got.exponent(v, p.rounds + 1),
            want.exps[p.rounds as usize + 1][i],
            "{what}: final exponent of {v}"
        );
    }
    let init = got
        .decls
        .iter()
        .filter(|d| matches!(d.basis, SleepBasis::Init { .. }))
        .count();
    (init, got.decls.len() - init)
}

#[test]
fn path_of_one_hundred() {
    let g = generate(GraphKind::Path { n: 100 }, 0).unwrap();
    for seed in 0..10 {
        let p = Params::new(g.max_degree(), seed);
        compare(&g, &p, &format!("P100 seed {seed}"));
        let naive_fraction = naive(&g, &p)
            .status
            .iter()
            .filter(|s| s.is_residual())
            .count() as f64
            / 100.0;
        assert_eq!(run(&g, &p).unwrap().residual_fraction(), naive_fraction);
    }
}

#[test]
fn small_graphs_with_sleeping_forced() {
    let mut decls = (0, 0);
    for g in small::nonisomorphic_up_to(5) {
        for seed in 0..4 {
            for k in [0, 1, 2] {
                let p = Params::new(g.max_degree(), seed).with_k(k);
                let (a, b) = compare(&g, &p, &format!("{:?} seed {seed} K {k}", g.edges()));
                decls = (decls.0 + a, decls.1 + b);
            }
        }
    }
    // refinement declarations need more than 2^15 relevant neighbours
    assert!(decls.0 > 0, "init sleeping not exercised: {decls:?}");
    assert_eq!(decls.1, 0);
}

#[test]
fn random_graphs() {
    for (seed, (n, avg, k, ct)) in [
        (300, 4.0, None, 8),
        (300, 8.0, Some(0), 8),
        (200, 12.0, Some(2), 3),
        (400, 6.0, Some(1), 16),
        (150, 20.0, None, 2),
    ]
    .into_iter()
    .enumerate()
    {
        let g = generate(
            GraphKind::Gnp {
                n,
                p: avg / n as f64,
            },
            seed as u64,
        )
        .unwrap();
        let mut p = Params::derive(g.max_degree(), 0.005, ct, seed as u64);
        if let Some(k) = k {
            p = p.with_k(k);
        }
        compare(&g, &p, &format!("gnp({n}) #{seed}"));
    }
}

#[test]
fn regular_graphs_with_small_k() {
    let mut decls = (0, 0);
    for d in [3, 6, 10] {
        let g = generate(GraphKind::RandomRegular { n: 120, d }, d as u64).unwrap();
        for k in [0, 3] {
            let p = Params::new(g.max_degree(), 7).with_k(k);
            let (a, b) = compare(&g, &p, &format!("dreg d={d} K={k}"));
            decls = (decls.0 + a, decls.1 + b);
        }
    }
    assert!(decls.0 > 0, "init sleeping not exercised: {decls:?}");
}
