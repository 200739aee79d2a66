//! PACE `.gr` graph and `.td` decomposition text formats (1-based on disk).

use std::fmt::Write as _;

use thiserror::Error;

use super::{graph_from_edges, Graph, TreeDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PaceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing header line")]
    MissingHeader,
    #[error("header declares {declared} {what}, found {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
}

fn err(line: usize, msg: impl Into<String>) -> PaceError {
    PaceError::Parse {
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty() && toks[0] != "c").then_some((i + 1, toks))
    })
}

fn number(line: usize, tok: &str) -> Result<usize, PaceError> {
    tok.parse()
        .map_err(|_| err(line, format!("expected a non-negative integer, got {tok:?}")))
}

fn vertex(line: usize, tok: &str, n: usize) -> Result<usize, PaceError> {
    let v = number(line, tok)?;
    if v == 0 || v > n {
        return Err(err(line, format!("vertex {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

/// Parses `p tw <n> <m>` followed by `m` edge lines.
pub fn parse_gr(text: &str) -> Result<Graph, PaceError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(PaceError::MissingHeader)?;
    if header.len() != 4 || header[0] != "p" || header[1] != "tw" {
        return Err(err(hl, "expected header `p tw <n> <m>`"));
    }
    let n = number(hl, header[2])?;
    let m = number(hl, header[3])?;
    let mut edges = Vec::with_capacity(m);
    for (line, toks) in lines {
        if toks.len() != 2 {
            return Err(err(line, "expected an edge `<u> <v>`"));
        }
        let u = vertex(line, toks[0], n)?;
        let v = vertex(line, toks[1], n)?;
        if u == v {
            return Err(err(line, "self-loop"));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(PaceError::CountMismatch {
            what: "edges",
            declared: m,
            found: edges.len(),
        });
    }
    Ok(graph_from_edges(n, &edges))
}

pub fn write_gr(graph: &Graph) -> String {
    let edges: Vec<(usize, usize)> = graph
        .iter()
        .enumerate()
        .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect();
    let mut out = format!("p tw {} {}\n", graph.len(), edges.len());
    for (u, v) in edges {
        let _ = writeln!(out, "{} {}", u + 1, v + 1);
    }
    out
}

/// Parses `s td <bags> <width+1> <n>`, `b <id> <vertices...>` lines and tree
/// edge lines.
pub fn parse_td(text: &str) -> Result<TreeDecomposition, PaceError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(PaceError::MissingHeader)?;
    if header.len() != 5 || header[0] != "s" || header[1] != "td" {
        return Err(err(hl, "expected header `s td <bags> <width+1> <n>`"));
    }
    let nb = number(hl, header[2])?;
    let max_bag = number(hl, header[3])?;
    let n = number(hl, header[4])?;
    let mut bags: Vec<Option<Vec<usize>>> = vec![None; nb];
    let mut edges = Vec::new();
    for (line, toks) in lines {
        if toks[0] == "b" {
            if toks.len() < 2 {
                return Err(err(line, "bag line needs an id"));
            }
            let id = number(line, toks[1])?;
            if id == 0 || id > nb {
                return Err(err(line, format!("bag id {id} outside 1..={nb}")));
            }
            if bags[id - 1].is_some() {
                return Err(err(line, format!("bag {id} defined twice")));
            }
            let verts = toks[2..]
                .iter()
                .map(|t| vertex(line, t, n))
                .collect::<Result<Vec<_>, _>>()?;
            if verts.len() > max_bag {
                return Err(err(line, format!("bag {id} exceeds declared size {max_bag}")));
            }
            bags[id - 1] = Some(verts);
        } else {
            if toks.len() != 2 {
                return Err(err(line, "expected a tree edge `<a> <b>`"));
            }
            let a = vertex(line, toks[0], nb)?;
            let b = vertex(line, toks[1], nb)?;
            edges.push((a, b));
        }
    }
    let bags = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| err(0, format!("bag {} never defined", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TreeDecomposition::new(bags, edges))
}

pub fn write_td(decomp: &TreeDecomposition, n: usize) -> String {
    let mut out = format!(
        "s td {} {} {}\n",
        decomp.num_nodes(),
        decomp.width() + 1,
        n
    );
    for (i, bag) in decomp.bags().iter().enumerate() {
        let _ = write!(out, "b {}", i + 1);
        for v in bag {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    for &(a, b) in decomp.tree_edges() {
        let _ = writeln!(out, "{} {}", a + 1, b + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let text = "c a path\np tw 3 2\n1 2\n2 3\n";
        let g = parse_gr(text).unwrap();
        assert_eq!(g, vec![vec![1], vec![0, 2], vec![1]]);
        assert_eq!(parse_gr(&write_gr(&g)).unwrap(), g);
    }

    #[test]
    fn decomposition_round_trip() {
        let text = "s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n";
        let d = parse_td(text).unwrap();
        assert_eq!(d.bags(), &[vec![0, 1], vec![1, 2]]);
        assert_eq!(d.tree_edges(), &[(0, 1)]);
        assert_eq!(parse_td(&write_td(&d, 3)).unwrap(), d);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse_gr("p tw 2 1\n1 3\n"),
            Err(err(2, "vertex 3 outside 1..=2"))
        );
        assert!(matches!(parse_gr("p td 2 1\n"), Err(PaceError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_gr("p tw 2 2\n1 2\n"),
            Err(PaceError::CountMismatch { .. })
        ));
        assert!(matches!(
            parse_td("s td 1 1 2\nb 1 1 2\n"),
            Err(PaceError::Parse { line: 2, .. })
        ));
        assert_eq!(parse_gr(""), Err(PaceError::MissingHeader));
    }
}
