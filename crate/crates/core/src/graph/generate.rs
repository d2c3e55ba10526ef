use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use super::Graph;
use crate::error::{Error, Result};

/// Generator families. Text form is `kind:params`, e.g. `gnp:1000,0.01`,
/// `dreg:20000,16`, `grid2d:30,40`.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphKind {
    Empty { n: usize },
    Cycle { n: usize },
    Path { n: usize },
    Complete { n: usize },
    Star { leaves: usize },
    RandomRegular { n: usize, d: usize },
    Gnp { n: usize, p: f64 },
    Grid2d { rows: usize, cols: usize },
}

impl GraphKind {
    /// Same family with its degree-like parameter replaced (used by sweeps).
    pub fn with_degree(&self, d: usize) -> Result<GraphKind> {
        match *self {
            GraphKind::RandomRegular { n, .. } => Ok(GraphKind::RandomRegular { n, d }),
            GraphKind::Gnp { n, .. } => Ok(GraphKind::Gnp {
                n,
                p: d as f64 / (n.max(2) - 1) as f64,
            }),
            GraphKind::Star { .. } => Ok(GraphKind::Star { leaves: d }),
            _ => Err(Error::Input(format!("{self} has no degree parameter"))),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Empty { n } => write!(f, "empty:{n}"),
            GraphKind::Cycle { n } => write!(f, "cycle:{n}"),
            GraphKind::Path { n } => write!(f, "path:{n}"),
            GraphKind::Complete { n } => write!(f, "complete:{n}"),
            GraphKind::Star { leaves } => write!(f, "star:{leaves}"),
            GraphKind::RandomRegular { n, d } => write!(f, "dreg:{n},{d}"),
            GraphKind::Gnp { n, p } => write!(f, "gnp:{n},{p}"),
            GraphKind::Grid2d { rows, cols } => write!(f, "grid2d:{rows},{cols}"),
        }
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("bad generator spec '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let args: Vec<&str> = rest.split(',').map(str::trim).collect();
        let int = |i: usize| -> Result<usize> {
            args.get(i).and_then(|a| a.parse().ok()).ok_or_else(bad)
        };
        let want = |k: usize| if args.len() == k { Ok(()) } else { Err(bad()) };
        let g = match kind {
            "empty" => {
                want(1)?;
                GraphKind::Empty { n: int(0)? }
            }
            "cycle" => {
                want(1)?;
                GraphKind::Cycle { n: int(0)? }
            }
            "path" => {
                want(1)?;
                GraphKind::Path { n: int(0)? }
            }
            "complete" => {
                want(1)?;
                GraphKind::Complete { n: int(0)? }
            }
            "star" => {
                want(1)?;
                GraphKind::Star { leaves: int(0)? }
            }
            "dreg" | "d_regular_random" => {
                want(2)?;
                GraphKind::RandomRegular {
                    n: int(0)?,
                    d: int(1)?,
                }
            }
            "gnp" => {
                want(2)?;
                let p: f64 = args[1].parse().map_err(|_| bad())?;
                GraphKind::Gnp { n: int(0)?, p }
            }
            "grid2d" => {
                want(2)?;
                GraphKind::Grid2d {
                    rows: int(0)?,
                    cols: int(1)?,
                }
            }
            _ => return Err(bad()),
        };
        Ok(g)
    }
}

/// Deterministic for a fixed `(kind, seed)`.
pub fn generate(kind: GraphKind, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check_n = |n: usize| {
        if n > u32::MAX as usize {
            Err(Error::Input(format!("n = {n} exceeds the u32 id space")))
        } else {
            Ok(())
        }
    };
    match kind {
        GraphKind::Empty { n } => {
            check_n(n)?;
            Ok(Graph::empty(n))
        }
        GraphKind::Path { n } => {
            check_n(n)?;
            let edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &edges)
        }
        GraphKind::Cycle { n } => {
            check_n(n)?;
            if n < 3 {
                return Err(Error::Input("a cycle needs n >= 3".into()));
            }
            let mut edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
            edges.push((0, n as u32 - 1));
            Graph::from_edges(n, &edges)
        }
        GraphKind::Complete { n } => {
            check_n(n)?;
            let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(n, &edges)
        }
        GraphKind::Star { leaves } => {
            check_n(leaves + 1)?;
            let edges: Vec<_> = (1..=leaves as u32).map(|i| (0, i)).collect();
            Graph::from_edges(leaves + 1, &edges)
        }
        GraphKind::Grid2d { rows, cols } => {
            check_n(rows * cols)?;
            let id = |r: usize, c: usize| (r * cols + c) as u32;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            Graph::from_edges(rows * cols, &edges)
        }
        GraphKind::Gnp { n, p } => {
            check_n(n)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Input(format!(
                    "gnp edge probability {p} outside [0, 1]"
                )));
            }
            Graph::from_edges(n, &gnp_edges(n, p, &mut rng))
        }
        GraphKind::RandomRegular { n, d } => {
            check_n(n)?;
            if d >= n.max(1) || (n * d) % 2 != 0 {
                return Err(Error::Input(format!(
                    "no simple {d}-regular graph on {n} vertices"
                )));
            }
            for _ in 0..1000 {
                if let Some(edges) = try_regular(n, d, &mut rng) {
                    return Graph::from_edges(n, &edges);
                }
            }
            Err(Error::Input(format!(
                "failed to sample a {d}-regular graph on {n} vertices"
            )))
        }
    }
}

/// Geometric skipping over the `n(n-1)/2` candidate pairs.
fn gnp_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    if p <= 0.0 || n < 2 {
        return edges;
    }
    if p >= 1.0 {
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        return edges;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w): (i64, i64) = (1, -1);
    let n = n as i64;
    while v < n {
        let r: f64 = 1.0 - rng.gen::<f64>();
        w += 1 + (r.ln() / log_q).floor() as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            edges.push((w as u32, v as u32));
        }
    }
    edges
}

/// One pairing attempt with incremental repair of rejected stubs; `None`
/// when the leftover stubs admit no further simple edge.
fn try_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(u32, u32)>> {
    let mut edges: FxHashSet<(u32, u32)> = FxHashSet::default();
    let mut order: Vec<(u32, u32)> = Vec::with_capacity(n * d / 2);
    let mut stubs: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, d))
        .collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<u32, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                order.push((a, b));
            } else {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        if leftover.is_empty() {
            break;
        }
        let nodes: Vec<u32> = leftover.keys().copied().collect();
        let suitable = nodes.iter().enumerate().any(|(i, &a)| {
            nodes[..i]
                .iter()
                .any(|&b| !edges.contains(&(b.min(a), b.max(a))))
        });
        if !suitable {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, c)| std::iter::repeat_n(v, c))
            .collect();
    }
    Some(order)
}
