//! Per-question local computation algorithm.
//!
//! A question about `v` simulates `v`'s view of the reference algorithm by
//! memoized recursion over the vertices whose messages it needs, against a
//! probe-counted adjacency oracle, then completes the residual component of
//! `v` with the lexicographically-first greedy MIS.

mod engine;

pub use engine::{default_component_cap, greedy_complete, Answer, QuestionContext};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{self, Execution};
use crate::state::Phase1Status;
use crate::tape::Params;

/// Answers one question with a fresh context.
pub fn answer(g: &Graph, params: &Params, v: u32) -> Result<Answer> {
    QuestionContext::new(g, params)?.answer(v)
}

/// Options for answering many questions.
#[derive(Clone, Copy, Debug)]
pub struct BatchOptions {
    pub execution: Execution,
    /// Share one cache across each chunk of consecutive questions; probes
    /// are then charged to the first question that needed them.
    pub shared_cache: bool,
    pub chunk: usize,
    /// Residual component cap; `None` uses [`default_component_cap`].
    pub cap: Option<usize>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            execution: Execution::Parallel,
            shared_cache: false,
            chunk: 64,
            cap: None,
        }
    }
}

/// Outcome of a question that may have hit the component cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reply {
    Answered(Answer),
    CapExceeded { reached: usize },
}

impl Reply {
    pub fn answer(&self) -> Option<&Answer> {
        match self {
            Reply::Answered(a) => Some(a),
            Reply::CapExceeded { .. } => None,
        }
    }
}

/// Answers `questions` in order. Each chunk of `opts.chunk` consecutive
/// questions is processed independently, so results do not depend on the
/// number of threads.
pub fn answer_many(
    g: &Graph,
    params: &Params,
    questions: &[u32],
    opts: BatchOptions,
) -> Result<Vec<Reply>> {
    // fail early on bad parameters
    QuestionContext::new(g, params)?;
    let chunks: Vec<&[u32]> = questions.chunks(opts.chunk.max(1)).collect();
    let results = par::map_slice(opts.execution, &chunks, |chunk| -> Result<Vec<Reply>> {
        let mut ctx = QuestionContext::new(g, params)?;
        if let Some(cap) = opts.cap {
            ctx = ctx.with_cap(cap);
        }
        let mut out = Vec::with_capacity(chunk.len());
        for &v in *chunk {
            if !opts.shared_cache {
                ctx.reset();
            }
            match ctx.answer(v) {
                Ok(a) => out.push(Reply::Answered(a)),
                Err(Error::ComponentCap { reached, .. }) => {
                    out.push(Reply::CapExceeded { reached })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    });
    let mut out = Vec::with_capacity(questions.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Every vertex, in id order.
pub fn answer_all(g: &Graph, params: &Params, opts: BatchOptions) -> Result<Vec<Reply>> {
    let all: Vec<u32> = (0..g.n() as u32).collect();
    answer_many(g, params, &all, opts)
}

/// Phase-1 statuses of `questions` with fresh contexts.
pub fn phase1_statuses(
    g: &Graph,
    params: &Params,
    questions: &[u32],
    exec: Execution,
) -> Result<Vec<Phase1Status>> {
    let out = par::map_slice(exec, questions, |&v| {
        QuestionContext::new(g, params)?.phase1_status(v)
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn triangle_has_exactly_one_member() {
        let g = generate(GraphKind::Complete { n: 3 }, 0).unwrap();
        for seed in 0..50 {
            let p = Params::new(2, seed);
            let count = (0..3)
                .filter(|&v| answer(&g, &p, v).unwrap().in_mis)
                .count();
            assert_eq!(count, 1, "seed {seed}");
        }
    }

    #[test]
    fn shared_cache_gives_identical_bits() {
        let g = generate(GraphKind::Gnp { n: 300, p: 0.02 }, 2).unwrap();
        let p = Params::new(g.max_degree(), 1);
        let fresh = answer_all(&g, &p, BatchOptions::default()).unwrap();
        let shared = answer_all(
            &g,
            &p,
            BatchOptions {
                shared_cache: true,
                chunk: 1000,
                ..Default::default()
            },
        )
        .unwrap();
        let bits =
            |r: &[Reply]| -> Vec<bool> { r.iter().map(|x| x.answer().unwrap().in_mis).collect() };
        assert_eq!(bits(&fresh), bits(&shared));
        let total =
            |r: &[Reply]| -> u64 { r.iter().map(|x| x.answer().unwrap().probes_used).sum() };
        assert!(total(&shared) <= total(&fresh));
    }
}
