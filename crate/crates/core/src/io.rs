//! Plain-text graph formats.
//!
//! `edge_list`: a header line `n m`, then `m` lines `i j [w]` with 0-indexed
//! endpoints and an optional weight (default 1).
//! `dimacs`: `c` comment lines, a `p edge n m` header, and `m` lines `e i j [w]`
//! with 1-indexed endpoints.
//!
//! Writers emit edges with `i < j` in lexicographic order.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Dimacs,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge_list" | "edgelist" => Ok(GraphFormat::EdgeList),
            "dimacs" => Ok(GraphFormat::Dimacs),
            other => Err(Error::InvalidParameter(format!("unknown graph format `{other}`"))),
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFormat::EdgeList => "edge_list",
            GraphFormat::Dimacs => "dimacs",
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    token.parse().map_err(|_| parse_err(line, format!("invalid {what} `{token}`")))
}

fn parse_weight(token: Option<&str>, line: usize) -> Result<f64> {
    match token {
        None => Ok(1.0),
        Some(t) => {
            let w: f64 = t.parse().map_err(|_| parse_err(line, format!("invalid weight `{t}`")))?;
            if !w.is_finite() || w < 0.0 {
                return Err(parse_err(line, format!("negative or non-finite weight {t}")));
            }
            Ok(w)
        }
    }
}

struct EdgeCollector {
    n: usize,
    seen: std::collections::HashSet<(usize, usize)>,
    edges: Vec<(usize, usize, f64)>,
}

impl EdgeCollector {
    fn new(n: usize) -> Self {
        EdgeCollector { n, seen: Default::default(), edges: Vec::new() }
    }

    fn push(&mut self, i: usize, j: usize, w: f64, line: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(parse_err(line, format!("vertex out of range for n = {}", self.n)));
        }
        if i == j {
            return Err(parse_err(line, format!("self-loop at vertex {i}")));
        }
        if !self.seen.insert((i.min(j), i.max(j))) {
            return Err(parse_err(line, format!("duplicate edge ({i}, {j})")));
        }
        self.edges.push((i, j, w));
        Ok(())
    }

    fn finish(self, declared: usize, line: usize) -> Result<Graph> {
        if self.edges.len() != declared {
            return Err(parse_err(
                line,
                format!("header declares {declared} edges but {} were read", self.edges.len()),
            ));
        }
        Graph::from_edges(self.n, &self.edges)
    }
}

pub fn read_graph(source: impl BufRead, format: GraphFormat) -> Result<Graph> {
    match format {
        GraphFormat::EdgeList => read_edge_list(source),
        GraphFormat::Dimacs => read_dimacs(source),
    }
}

fn read_edge_list(source: impl BufRead) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut collector = EdgeCollector::new(0);
    let mut last_line = 0;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut tokens = text.split_whitespace();
        match header {
            None => {
                let n: usize = parse_num(tokens.next(), lineno, "vertex count")?;
                let m: usize = parse_num(tokens.next(), lineno, "edge count")?;
                if n == 0 {
                    return Err(parse_err(lineno, "vertex count must be positive"));
                }
                header = Some((n, m));
                collector = EdgeCollector::new(n);
            }
            Some(_) => {
                let i: usize = parse_num(tokens.next(), lineno, "endpoint")?;
                let j: usize = parse_num(tokens.next(), lineno, "endpoint")?;
                let w = parse_weight(tokens.next(), lineno)?;
                if tokens.next().is_some() {
                    return Err(parse_err(lineno, "trailing tokens"));
                }
                collector.push(i, j, w, lineno)?;
            }
        }
    }
    let (_, m) = header.ok_or_else(|| parse_err(last_line.max(1), "missing `n m` header"))?;
    collector.finish(m, last_line)
}

fn read_dimacs(source: impl BufRead) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut collector = EdgeCollector::new(0);
    let mut last_line = 0;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let text = line.trim();
        let mut tokens = text.split_whitespace();
        match tokens.next() {
            None | Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(parse_err(lineno, "duplicate problem line"));
                }
                match tokens.next() {
                    Some("edge") | Some("col") => {}
                    other => return Err(parse_err(lineno, format!("unsupported problem type {other:?}"))),
                }
                let n: usize = parse_num(tokens.next(), lineno, "vertex count")?;
                let m: usize = parse_num(tokens.next(), lineno, "edge count")?;
                if n == 0 {
                    return Err(parse_err(lineno, "vertex count must be positive"));
                }
                header = Some((n, m));
                collector = EdgeCollector::new(n);
            }
            Some("e") => {
                if header.is_none() {
                    return Err(parse_err(lineno, "edge before problem line"));
                }
                let i: usize = parse_num(tokens.next(), lineno, "endpoint")?;
                let j: usize = parse_num(tokens.next(), lineno, "endpoint")?;
                if i == 0 || j == 0 {
                    return Err(parse_err(lineno, "DIMACS vertices are 1-indexed"));
                }
                let w = parse_weight(tokens.next(), lineno)?;
                collector.push(i - 1, j - 1, w, lineno)?;
            }
            Some(other) => return Err(parse_err(lineno, format!("unknown line type `{other}`"))),
        }
    }
    let (_, m) = header.ok_or_else(|| parse_err(last_line.max(1), "missing `p edge n m` line"))?;
    collector.finish(m, last_line)
}

fn format_weight(w: f64) -> String {
    // `{}` on f64 prints the shortest representation that round-trips.
    format!("{w}")
}

pub fn write_graph(mut sink: impl Write, g: &Graph, format: GraphFormat) -> Result<()> {
    let edges: Vec<_> = g.edges().collect();
    let weighted = !g.is_unweighted();
    match format {
        GraphFormat::EdgeList => {
            writeln!(sink, "{} {}", g.n(), edges.len())?;
            for (i, j, w) in edges {
                if weighted {
                    writeln!(sink, "{i} {j} {}", format_weight(w))?;
                } else {
                    writeln!(sink, "{i} {j}")?;
                }
            }
        }
        GraphFormat::Dimacs => {
            if let Some(name) = g.name() {
                writeln!(sink, "c {name}")?;
            }
            writeln!(sink, "p edge {} {}", g.n(), edges.len())?;
            for (i, j, w) in edges {
                if weighted {
                    writeln!(sink, "e {} {} {}", i + 1, j + 1, format_weight(w))?;
                } else {
                    writeln!(sink, "e {} {}", i + 1, j + 1)?;
                }
            }
        }
    }
    Ok(())
}
