//! Exhaustive enumeration of small graphs for oracle-style tests.

use rustc_hash::FxHashSet;

use super::Graph;

const MAX_SMALL: usize = 8;

fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = (u.min(v), u.max(v));
    // row-major index into the strict upper triangle
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

fn pairs(n: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            out.push((u, v));
        }
    }
    out
}

/// Graph on `n` vertices whose edge set is the given bitmask over the
/// upper-triangle pairs.
pub fn from_mask(n: usize, mask: u64) -> Graph {
    let edges: Vec<_> = pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, e)| e)
        .collect();
    Graph::from_edges(n, &edges).expect("mask graphs are simple")
}

/// All `2^(n(n-1)/2)` labelled graphs on `n` vertices.
pub fn all_labeled(n: usize) -> impl Iterator<Item = Graph> {
    assert!(n <= 7, "labelled enumeration limited to n <= 7");
    let m = n * n.saturating_sub(1) / 2;
    (0..1u64 << m).map(move |mask| from_mask(n, mask))
}

pub fn is_connected(g: &Graph) -> bool {
    if g.n() == 0 {
        return true;
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![0u32];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            if !seen[u as usize] {
                seen[u as usize] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == g.n()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

struct Canonizer {
    /// For every permutation, where each pair index lands.
    maps: Vec<Vec<u8>>,
}

impl Canonizer {
    fn new(n: usize) -> Self {
        let ps = pairs(n);
        let maps = permutations(n)
            .into_iter()
            .map(|perm| {
                ps.iter()
                    .map(|&(u, v)| pair_index(n, perm[u as usize], perm[v as usize]) as u8)
                    .collect()
            })
            .collect();
        Canonizer { maps }
    }

    fn canonical(&self, mask: u64) -> u64 {
        self.maps
            .iter()
            .map(|map| {
                let mut out = 0u64;
                let mut m = mask;
                while m != 0 {
                    let i = m.trailing_zeros() as usize;
                    out |= 1 << map[i];
                    m &= m - 1;
                }
                out
            })
            .min()
            .unwrap_or(0)
    }
}

/// One representative per isomorphism class on exactly `n` vertices, as
/// canonical edge masks. Every graph on `n` vertices is a graph on `n - 1`
/// vertices plus one vertex, so classes are grown one vertex at a time.
pub fn nonisomorphic_masks(n: usize) -> Vec<u64> {
    assert!(n < MAX_SMALL, "isomorphism classes limited to n <= 7");
    let mut reps: Vec<u64> = vec![0];
    for k in 2..=n {
        let canon = Canonizer::new(k);
        let mut seen: FxHashSet<u64> = FxHashSet::default();
        let mut next = Vec::new();
        for &rep in &reps {
            // re-index the (k-1)-vertex mask into the k-vertex triangle
            let mut base = 0u64;
            for (i, (u, v)) in pairs(k - 1).into_iter().enumerate() {
                if rep >> i & 1 == 1 {
                    base |= 1 << pair_index(k, u as usize, v as usize);
                }
            }
            for nbrs in 0..1u64 << (k - 1) {
                let mut mask = base;
                for u in 0..k - 1 {
                    if nbrs >> u & 1 == 1 {
                        mask |= 1 << pair_index(k, u, k - 1);
                    }
                }
                let c = canon.canonical(mask);
                if seen.insert(c) {
                    next.push(c);
                }
            }
        }
        next.sort_unstable();
        reps = next;
    }
    if n == 0 {
        return vec![0];
    }
    reps
}

/// Isomorphism representatives on exactly `n` vertices.
pub fn nonisomorphic(n: usize) -> Vec<Graph> {
    nonisomorphic_masks(n)
        .into_iter()
        .map(|m| from_mask(n, m))
        .collect()
}

/// Isomorphism representatives on `1..=max_n` vertices.
pub fn nonisomorphic_up_to(max_n: usize) -> Vec<Graph> {
    (1..=max_n).flat_map(nonisomorphic).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts_match_known_sequence() {
        // OEIS A000088
        let counts: Vec<usize> = (1..=6).map(|n| nonisomorphic_masks(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34, 156]);
        let connected: Vec<usize> = (1..=6)
            .map(|n| nonisomorphic(n).iter().filter(|g| is_connected(g)).count())
            .collect();
        // OEIS A001349
        assert_eq!(connected, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn labeled_counts() {
        assert_eq!(all_labeled(4).count(), 64);
        assert_eq!(all_labeled(4).filter(is_connected).count(), 38);
    }
}
