//! Edge-list text files: one `u v` pair per line, smaller id first, lines
//! sorted, `#` comments. The canonical writer prefixes `# vertices <n>` so
//! isolated trailing vertices survive a round trip.

use std::fs;
use std::path::Path;

use rustc_hash::FxHashSet;

use super::Graph;
use crate::error::{Error, Result};

const VERTEX_HEADER: &str = "# vertices ";

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * g.edge_count() + 32);
    out.push_str(VERTEX_HEADER);
    out.push_str(&g.n().to_string());
    out.push('\n');
    for (u, v) in g.edges() {
        out.push_str(&u.to_string());
        out.push(' ');
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_edge_list(g))?;
    Ok(())
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared_n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen: FxHashSet<(u32, u32)> = FxHashSet::default();
    let mut max_id: Option<u32> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |reason: String| Error::Parse { line, reason };
        if raw.is_empty() {
            continue;
        }
        if let Some(comment) = raw.strip_prefix('#') {
            if let Some(n) = raw.strip_prefix(VERTEX_HEADER) {
                let n = n
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad vertex count in '{comment}'")))?;
                declared_n = Some(n);
            }
            continue;
        }
        let (a, b) = raw
            .split_once(' ')
            .ok_or_else(|| err(format!("expected two ids, got '{raw}'")))?;
        let parse_id = |s: &str| -> Result<u32> {
            if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
                return Err(err(format!("'{s}' is not a base-10 vertex id")));
            }
            s.parse()
                .map_err(|_| err(format!("vertex id '{s}' out of range")))
        };
        let (u, v) = (parse_id(a)?, parse_id(b)?);
        if u == v {
            return Err(err(format!("self-loop at vertex {u}")));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(err(format!("duplicate edge {} {}", key.0, key.1)));
        }
        max_id = Some(max_id.map_or(key.1, |m| m.max(key.1)));
        edges.push(key);
    }
    let implied = max_id.map_or(0, |m| m as usize + 1);
    let n = match declared_n {
        Some(n) if n < implied => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("declared {n} vertices but id {} appears", implied - 1),
            })
        }
        Some(n) => n,
        None => implied,
    };
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn parses_path() {
        let g = parse_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_bad_lines_with_line_numbers() {
        match parse_edge_list("0 1\n3 3\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_edge_list("# hi\n0 1\n1 0\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        for bad in ["0\n", "0  1\n", "a b\n", "0 -1\n", "0 1 2\n"] {
            assert!(
                matches!(parse_edge_list(bad), Err(Error::Parse { line: 1, .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let g = generate(GraphKind::Gnp { n: 200, p: 0.05 }, 11).unwrap();
        let text = write_edge_list(&g);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(write_edge_list(&back), text);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        save_edge_list(&g, &path).unwrap();
        assert_eq!(load_edge_list(&path).unwrap(), g);
    }

    #[test]
    fn isolated_vertices_survive() {
        let g = Graph::from_edges(5, &[(0, 1)]).unwrap();
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap().n(), 5);
    }
}
