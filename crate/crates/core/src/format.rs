//! Text formats: the matrix format, path files (blank-line separated matrix
//! blocks) and a small undirected DOT dialect.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `n` on the first line, then `n` whitespace-separated rows.
pub fn to_matrix_text(g: &Graph) -> String {
    let mut out = format!("{}\n", g.n());
    for i in 0..g.n() {
        let row: Vec<String> = g.row(i).iter().map(|v| format_weight(*v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn format_weight(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v == 1.0 {
        "1".into()
    } else {
        // Shortest representation that parses back to the same f64.
        format!("{v}")
    }
}

pub fn parse_matrix_text(text: &str) -> Result<Graph> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    parse_block(&lines)
}

fn parse_block(lines: &[(usize, &str)]) -> Result<Graph> {
    let (first_line, first) = *lines.first().ok_or(Error::Parse {
        line: 1,
        detail: "empty matrix block".into(),
    })?;
    let n: usize = first.parse().map_err(|_| Error::Parse {
        line: first_line,
        detail: format!("expected node count, found {first:?}"),
    })?;
    if lines.len() != n + 1 {
        return Err(Error::Parse {
            line: first_line,
            detail: format!("expected {n} rows, found {}", lines.len() - 1),
        });
    }
    let mut w = Vec::with_capacity(n * n);
    for &(line, row) in &lines[1..] {
        let vals: Vec<&str> = row.split_whitespace().collect();
        if vals.len() != n {
            return Err(Error::Parse {
                line,
                detail: format!("expected {n} entries, found {}", vals.len()),
            });
        }
        for v in vals {
            w.push(v.parse::<f64>().map_err(|_| Error::Parse {
                line,
                detail: format!("invalid weight {v:?}"),
            })?);
        }
    }
    Graph::from_matrix(n, w).map_err(|e| Error::Parse {
        line: first_line,
        detail: e.to_string(),
    })
}

/// Matrix blocks separated by a blank line.
pub fn to_path_text(graphs: &[Graph]) -> String {
    graphs
        .iter()
        .map(to_matrix_text)
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_path_text(text: &str) -> Result<Vec<Graph>> {
    let mut blocks: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
    for (k, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.starts_with('#') {
            continue;
        }
        if l.is_empty() {
            if !blocks.last().unwrap().is_empty() {
                blocks.push(Vec::new());
            }
        } else {
            blocks.last_mut().unwrap().push((k + 1, l));
        }
    }
    blocks
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| parse_block(b))
        .collect()
}

/// Undirected DOT with 1-based node names; `weight` only when it differs from 1.
pub fn to_dot(g: &Graph, name: &str) -> String {
    let mut out = format!("graph {name} {{\n");
    for v in 0..g.n() {
        let _ = writeln!(out, "  {};", v + 1);
    }
    for (e, w) in g.edges() {
        if w == 1.0 {
            let _ = writeln!(out, "  {} -- {};", e.i + 1, e.j + 1);
        } else {
            let _ = writeln!(out, "  {} -- {} [weight={}];", e.i + 1, e.j + 1, w);
        }
    }
    out.push_str("}\n");
    out
}

/// Parse the dialect written by [`to_dot`].
pub fn parse_dot(text: &str) -> Result<Graph> {
    let mut nodes = 0usize;
    let mut edges: Vec<(usize, usize, f64, usize)> = Vec::new();
    let mut opened = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with("//") {
            continue;
        }
        if !opened {
            if l.starts_with("graph") && l.ends_with('{') {
                opened = true;
                continue;
            }
            return Err(Error::Parse {
                line,
                detail: "expected `graph NAME {`".into(),
            });
        }
        if l == "}" {
            break;
        }
        let body = l.trim_end_matches(';').trim();
        let parse_node = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    detail: format!("invalid node name {s:?}"),
                }),
            }
        };
        if let Some((a, rest)) = body.split_once("--") {
            let (b, attrs) = match rest.split_once('[') {
                Some((b, attrs)) => (b, Some(attrs.trim_end_matches(']'))),
                None => (rest, None),
            };
            let a = parse_node(a)?;
            let b = parse_node(b)?;
            let mut w = 1.0;
            if let Some(attrs) = attrs {
                for kv in attrs.split(',') {
                    if let Some((key, val)) = kv.split_once('=') {
                        if key.trim() == "weight" {
                            w = val.trim().trim_matches('"').parse().map_err(|_| Error::Parse {
                                line,
                                detail: format!("invalid weight {val:?}"),
                            })?;
                        }
                    }
                }
            }
            nodes = nodes.max(a).max(b);
            edges.push((a - 1, b - 1, w, line));
        } else {
            nodes = nodes.max(parse_node(body)?);
        }
    }
    if !opened {
        return Err(Error::Parse {
            line: 1,
            detail: "missing graph header".into(),
        });
    }
    let mut w = vec![0.0; nodes * nodes];
    for (a, b, v, line) in edges {
        if a == b {
            return Err(Error::Parse {
                line,
                detail: "self-loop".into(),
            });
        }
        w[a * nodes + b] = v;
        w[b * nodes + a] = v;
    }
    Graph::from_matrix(nodes, w).map_err(|e| Error::Parse {
        line: 1,
        detail: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let text = to_matrix_text(&g);
        assert!(text.starts_with("4\n0 1 0 0\n"));
        let back = parse_matrix_text(&text).unwrap();
        assert_eq!(back.as_slice(), g.as_slice());
    }

    #[test]
    fn weighted_matrix_round_trip_is_exact() {
        let g = Graph::new_empty(3).unwrap().with_weight(0, 2, 0.1 + 0.2);
        let back = parse_matrix_text(&to_matrix_text(&g)).unwrap();
        assert_eq!(back.as_slice(), g.as_slice());
    }

    #[test]
    fn matrix_parse_reports_line() {
        let err = parse_matrix_text("2\n0 1\n1 x\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                detail: "invalid weight \"x\"".into()
            }
        );
    }

    #[test]
    fn path_file_round_trip() {
        let a = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let b = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let text = to_path_text(&[a.clone(), b.clone()]);
        assert_eq!(parse_path_text(&text).unwrap(), vec![a, b]);
    }

    #[test]
    fn dot_omits_unit_weights() {
        let g = Graph::from_edges(3, &[(0, 1)])
            .unwrap()
            .with_weight(1, 2, 0.25);
        let dot = to_dot(&g, "G");
        assert!(dot.contains("  1 -- 2;\n"));
        assert!(dot.contains("  2 -- 3 [weight=0.25];\n"));
        assert_eq!(parse_dot(&dot).unwrap(), g);
    }

    #[test]
    fn dot_keeps_isolated_nodes() {
        let g = Graph::from_edges(5, &[(0, 1)]).unwrap();
        assert_eq!(parse_dot(&to_dot(&g, "G")).unwrap().n(), 5);
    }
}
