use serde::Serialize;

use crate::graph::Graph;

/// Pass, or Fail with a reason.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason")]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn check(ok: bool, reason: impl FnOnce() -> String) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail(reason())
        }
    }
}

/// Why a membership vector is not a maximal independent set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MisViolation {
    /// Both endpoints are members.
    Edge(u32, u32),
    /// A non-member with no member neighbour.
    Uncovered(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MisVerdict {
    Pass,
    Fail(MisViolation),
}

impl MisVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, MisVerdict::Pass)
    }

    pub fn to_verdict(self) -> Verdict {
        match self {
            MisVerdict::Pass => Verdict::Pass,
            MisVerdict::Fail(MisViolation::Edge(u, v)) => {
                Verdict::Fail(format!("adjacent members {u} and {v}"))
            }
            MisVerdict::Fail(MisViolation::Uncovered(v)) => Verdict::Fail(format!(
                "vertex {v} has no member in its closed neighbourhood"
            )),
        }
    }
}

/// Independence over all edges, then maximality over all vertices; the
/// first violation in id order is the witness.
pub fn verify_mis(g: &Graph, membership: &[bool]) -> MisVerdict {
    assert_eq!(
        membership.len(),
        g.n(),
        "membership must cover every vertex"
    );
    let all: Vec<u32> = (0..g.n() as u32).collect();
    verify_region(g, &all, |v| Some(membership[v as usize]))
}

/// Same predicate restricted to `region`: every edge with an endpoint in the
/// region is independent and every region vertex is covered. `member`
/// must know every region vertex and every neighbour of one; `None`
/// anywhere it is consulted is reported as uncovered.
pub fn verify_region(
    g: &Graph,
    region: &[u32],
    member: impl Fn(u32) -> Option<bool>,
) -> MisVerdict {
    for &v in region {
        if member(v) == Some(true) {
            for &u in g.neighbors(v) {
                if member(u) != Some(false) {
                    return MisVerdict::Fail(MisViolation::Edge(v.min(u), v.max(u)));
                }
            }
        }
    }
    for &v in region {
        match member(v) {
            Some(true) => {}
            Some(false) => {
                if !g.neighbors(v).iter().any(|&u| member(u) == Some(true)) {
                    return MisVerdict::Fail(MisViolation::Uncovered(v));
                }
            }
            None => return MisVerdict::Fail(MisViolation::Uncovered(v)),
        }
    }
    MisVerdict::Pass
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(verify_mis(&p3, &[true, false, true]), MisVerdict::Pass);
        assert_eq!(
            verify_mis(&p3, &[true, false, false]),
            MisVerdict::Fail(MisViolation::Uncovered(2))
        );
        let k3 = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(
            verify_mis(&k3, &[true, true, false]),
            MisVerdict::Fail(MisViolation::Edge(0, 1))
        );
    }

    #[test]
    fn brute_force_agreement() {
        use crate::graph::small::all_labeled;
        for g in all_labeled(4) {
            for mask in 0..16u32 {
                let m: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
                let independent = g
                    .edges()
                    .iter()
                    .all(|&(u, v)| !(m[u as usize] && m[v as usize]));
                let maximal = (0..4u32)
                    .all(|v| m[v as usize] || g.neighbors(v).iter().any(|&u| m[u as usize]));
                assert_eq!(verify_mis(&g, &m).is_pass(), independent && maximal);
            }
        }
    }
}
