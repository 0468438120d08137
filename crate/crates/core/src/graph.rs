//! Graph containers and their edge-list format.
//!
//! ```text
//! # comment
//! p <nodes> <edges>
//! u v          (unweighted)
//! u v w        (weighted)
//! ```

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::io::{content_lines, parse_usize};
use crate::sets::ElementSet;

/// A directed graph on nodes `0..n`; parallel edges are merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out: Vec<Vec<usize>>,
    out_sets: Vec<ElementSet>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            out: vec![Vec::new(); n],
            out_sets: vec![ElementSet::empty(n); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Digraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds `u -> v`. Self-loops are accepted and ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::input(format!("edge ({u}, {v}) out of range for {} nodes", self.n)));
        }
        if u == v || self.out_sets[u].contains(v) {
            return Ok(());
        }
        self.out_sets[u].insert(v);
        let pos = self.out[u].partition_point(|&x| x < v);
        self.out[u].insert(pos, v);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn out_set(&self, u: usize) -> &ElementSet {
        &self.out_sets[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_sets[u].contains(v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// Nodes reachable from `r`, including `r`.
    pub fn reachable(&self, r: usize) -> ElementSet {
        let mut seen = ElementSet::empty(self.n);
        let mut stack = vec![r];
        seen.insert(r);
        while let Some(u) = stack.pop() {
            for &v in &self.out[u] {
                if !seen.contains(v) {
                    seen.insert(v);
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// A simple undirected graph on nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::input(format!("edge ({u}, {v}) out of range for {} nodes", self.n)));
        }
        if u == v || self.adj[u].contains(&v) {
            return Ok(());
        }
        for (a, b) in [(u, v), (v, u)] {
            let pos = self.adj[a].partition_point(|&x| x < b);
            self.adj[a].insert(pos, b);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    /// `{u} ∪ N(u)`.
    pub fn closed_neighborhood(&self, u: usize) -> ElementSet {
        let mut s = ElementSet::empty(self.n);
        s.insert(u);
        for &v in &self.adj[u] {
            s.insert(v);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Edge-weighted graph, directed or not. Parallel edges are kept; solvers
/// use the lightest.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    directed: bool,
    edges: Vec<WeightedEdge>,
}

impl WeightedGraph {
    pub fn new(n: usize, directed: bool) -> Self {
        WeightedGraph {
            n,
            directed,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::input(format!("edge ({u}, {v}) out of range for {} nodes", self.n)));
        }
        if !w.is_finite() {
            return Err(Error::input(format!("edge ({u}, {v}) has non-finite weight")));
        }
        self.edges.push(WeightedEdge { u, v, w });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    /// Traversable arcs `(from, to, w)`: each edge once if directed, both
    /// ways otherwise. Self-loops are dropped.
    pub fn arcs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edges.len() * 2);
        for e in self.edges.iter().filter(|e| e.u != e.v) {
            out.push((e.u, e.v, e.w));
            if !self.directed {
                out.push((e.v, e.u, e.w));
            }
        }
        out
    }

    /// Per-node outgoing arcs with parallel arcs collapsed to the lightest.
    pub fn lightest_out(&self) -> Vec<Vec<(usize, f64)>> {
        let mut best: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for (u, v, w) in self.arcs() {
            match best[u].iter_mut().find(|(x, _)| *x == v) {
                Some(slot) => slot.1 = slot.1.min(w),
                None => best[u].push((v, w)),
            }
        }
        for list in &mut best {
            list.sort_by_key(|&(v, _)| v);
        }
        best
    }
}

struct RawEdges {
    n: usize,
    edges: Vec<(usize, usize, Option<f64>)>,
}

fn read_edges<R: BufRead>(reader: R, weighted: bool) -> Result<RawEdges> {
    let lines = content_lines(reader, |_, _| Ok(()))?;
    let mut it = lines.into_iter();
    let (hline, header) = it
        .next()
        .ok_or_else(|| Error::parse(1, "missing header `p <nodes> <edges>`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "p" {
        return Err(Error::parse(hline, "header must be `p <nodes> <edges>`"));
    }
    let n = parse_usize(hline, fields[1], "node count")?;
    let m = parse_usize(hline, fields[2], "edge count")?;
    let mut edges = Vec::with_capacity(m);
    for (lineno, line) in it {
        if edges.len() == m {
            return Err(Error::parse(lineno, format!("unexpected line after {m} edges")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let want = if weighted { 3 } else { 2 };
        if toks.len() != want {
            let shape = if weighted { "`u v w`" } else { "`u v`" };
            return Err(Error::parse(lineno, format!("expected {shape}")));
        }
        let u = parse_usize(lineno, toks[0], "node id")?;
        let v = parse_usize(lineno, toks[1], "node id")?;
        for x in [u, v] {
            if x >= n {
                return Err(Error::parse(lineno, format!("node {x} out of range for {n} nodes")));
            }
        }
        let w = if weighted {
            let w: f64 = toks[2]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad weight `{}`", toks[2])))?;
            if !w.is_finite() {
                return Err(Error::parse(lineno, "weight must be finite"));
            }
            Some(w)
        } else {
            None
        };
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(Error::parse(
            hline,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Ok(RawEdges { n, edges })
}

pub fn read_digraph<R: BufRead>(reader: R) -> Result<Digraph> {
    let raw = read_edges(reader, false)?;
    Digraph::from_edges(raw.n, raw.edges.into_iter().map(|(u, v, _)| (u, v)))
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let raw = read_edges(reader, false)?;
    Graph::from_edges(raw.n, raw.edges.into_iter().map(|(u, v, _)| (u, v)))
}

pub fn read_weighted_graph<R: BufRead>(reader: R, directed: bool) -> Result<WeightedGraph> {
    let raw = read_edges(reader, true)?;
    let mut g = WeightedGraph::new(raw.n, directed);
    for (u, v, w) in raw.edges {
        g.add_edge(u, v, w.unwrap_or(0.0))?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digraph_dedupes_and_sorts() {
        let g = Digraph::from_edges(4, [(0, 2), (0, 1), (0, 2), (3, 3)]).unwrap();
        assert_eq!(g.out_neighbors(0), &[1, 2]);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(0, 2) && !g.has_edge(2, 0));
        assert_eq!(g.reachable(0).to_vec(), vec![0, 1, 2]);
    }

    #[test]
    fn parses_edge_lists() {
        let g = read_digraph("# path\np 3 2\n0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        let h = read_graph("p 3 1\n2 0\n".as_bytes()).unwrap();
        assert_eq!(h.neighbors(0), &[2]);
        assert_eq!(h.closed_neighborhood(2).to_vec(), vec![0, 2]);
        let w = read_weighted_graph("p 3 2\n0 1 1.5\n1 2 -2\n".as_bytes(), false).unwrap();
        assert_eq!(w.arcs().len(), 4);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let line = |text: &str, weighted: bool| match read_edges(text.as_bytes(), weighted) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected a parse error, got {:?}", other.map(|r| r.n)),
        };
        assert_eq!(line("3 1\n0 1\n", false), 1);
        assert_eq!(line("p 3 1\n0 5\n", false), 2);
        assert_eq!(line("p 3 1\n0 1 2\n", false), 2);
        assert_eq!(line("p 3 1\n0 1 x\n", true), 2);
        assert_eq!(line("p 3 2\n0 1\n", false), 1);
        assert_eq!(line("p 3 1\n0 1\n\n1 2\n", false), 4);
    }

    #[test]
    fn lightest_parallel_arc_wins() {
        let mut g = WeightedGraph::new(2, true);
        g.add_edge(0, 1, 4.0).unwrap();
        g.add_edge(0, 1, 2.0).unwrap();
        assert_eq!(g.lightest_out()[0], vec![(1, 2.0)]);
        assert!(g.lightest_out()[1].is_empty());
    }
}
