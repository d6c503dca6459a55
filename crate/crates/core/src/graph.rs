//! Undirected graphs, the self-connected normalized adjacency, and the
//! low-pass / high-pass smoothing pair built from its powers.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{IgtError, Result};
use crate::numerics::{spmm, DenseMatrix, SparseOperator};

/// Undirected simple graph. Edges are stored once as `(i, j)` with `i < j`,
/// sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from arbitrary (possibly directed, duplicated or
    /// self-looped) pairs. Self-loops are dropped with a warning.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut loops = 0usize;
        for (i, j) in pairs {
            if i >= n || j >= n {
                return Err(IgtError::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i == j {
                loops += 1;
                continue;
            }
            set.insert((i.min(j), i.max(j)));
        }
        if loops > 0 {
            log::warn!("dropped {loops} self-loop(s); normalization adds its own");
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self { n, edges }
    }

    pub fn path(n: usize) -> Self {
        Self {
            n,
            edges: (1..n).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(IgtError::InvalidArgument("permutation length differs from n".into()));
        }
        Self::new(self.n, self.edges.iter().map(|&(i, j)| (perm[i], perm[j])))
    }

    /// Parses the edge-list format: a header line `n <count>`, then one
    /// whitespace-separated 0-based pair per line; `#` lines are comments.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| IgtError::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut n: Option<usize> = None;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            let (a, b) = (tok.next(), tok.next());
            if tok.next().is_some() {
                return Err(err(line_no, format!("expected two fields, got `{line}`")));
            }
            match n {
                None => {
                    if a != Some("n") {
                        return Err(err(line_no, "first line must be `n <node_count>`".into()));
                    }
                    let count = b
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(line_no, format!("bad node count in `{line}`")))?;
                    n = Some(count);
                }
                Some(_) => {
                    let parse = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
                    match (parse(a), parse(b)) {
                        (Some(i), Some(j)) => pairs.push((i, j)),
                        _ => return Err(err(line_no, format!("bad edge `{line}`"))),
                    }
                }
            }
        }
        let n = n.ok_or_else(|| err(0, "missing `n <node_count>` header".into()))?;
        Self::new(n, pairs).map_err(|e| err(0, e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for &(i, j) in &self.edges {
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

/// Exponent `J` of the smoothing operator `A_J = A_norm^J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct SmoothingScale(pub u32);

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` with `D̃` the degree matrix of `A + I`.
pub fn normalize_adjacency(g: &Graph) -> SparseOperator {
    let deg: Vec<f64> = g.degrees().iter().map(|&d| (d + 1) as f64).collect();
    let mut triplets = Vec::with_capacity(2 * g.edge_count() + g.n());
    for (i, &d) in deg.iter().enumerate() {
        triplets.push((i, i, 1.0 / d));
    }
    for &(i, j) in g.edges() {
        let v = 1.0 / (deg[i] * deg[j]).sqrt();
        triplets.push((i, j, v));
        triplets.push((j, i, v));
    }
    SparseOperator::from_triplets(g.n(), triplets).expect("normalized adjacency is well formed")
}

/// `A_J X`, computed as `J` successive sparse products.
pub fn apply_smoothing(
    a: &SparseOperator,
    x: &DenseMatrix,
    scale: SmoothingScale,
) -> Result<DenseMatrix> {
    if a.n() != x.rows() {
        return spmm(a, x);
    }
    let mut y = x.clone();
    for _ in 0..scale.0 {
        y = spmm(a, &y)?;
    }
    Ok(y)
}

/// `(I − A_J) X`.
pub fn high_pass(a: &SparseOperator, x: &DenseMatrix, scale: SmoothingScale) -> Result<DenseMatrix> {
    let low = apply_smoothing(a, x, scale)?;
    x.sub(&low)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(a: &SparseOperator) -> DenseMatrix {
        a.to_dense()
    }

    #[test]
    fn edgeless_normalizes_to_identity() {
        assert_eq!(normalize_adjacency(&Graph::empty(3)), SparseOperator::identity(3));
    }

    #[test]
    fn single_edge_is_half_everywhere() {
        let a = dense(&normalize_adjacency(&Graph::new(2, [(0, 1)]).unwrap()));
        assert!(a.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn path_graph_entries() {
        let a = normalize_adjacency(&Graph::path(3));
        let s6 = 1.0 / 6f64.sqrt();
        let expect = [
            (0, 0, 0.5),
            (0, 1, s6),
            (1, 0, s6),
            (1, 1, 1.0 / 3.0),
            (1, 2, s6),
            (2, 1, s6),
            (2, 2, 0.5),
        ];
        for (r, c, v) in expect {
            assert!((a.entry(r, c).unwrap() - v).abs() < 1e-15);
        }
        assert_eq!(a.entry(0, 2), None);
        assert_eq!(a.nnz(), 7);
    }

    #[test]
    fn smoothing_examples() {
        let a = normalize_adjacency(&Graph::new(2, [(0, 1)]).unwrap());
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![3.0]]);
        assert_eq!(apply_smoothing(&a, &x, SmoothingScale(0)).unwrap(), x);
        let two = DenseMatrix::from_rows(&[vec![2.0], vec![2.0]]);
        assert_eq!(apply_smoothing(&a, &x, SmoothingScale(2)).unwrap(), two);
        assert_eq!(
            high_pass(&a, &x, SmoothingScale(1)).unwrap(),
            DenseMatrix::from_rows(&[vec![-1.0], vec![1.0]])
        );
        assert_eq!(high_pass(&a, &x, SmoothingScale(0)).unwrap(), DenseMatrix::zeros(2, 1));

        let id = normalize_adjacency(&Graph::empty(4));
        let y = DenseMatrix::from_fn(4, 2, |r, c| r as f64 * 1.5 - c as f64);
        assert_eq!(apply_smoothing(&id, &y, SmoothingScale(3)).unwrap(), y);
        assert_eq!(high_pass(&id, &y, SmoothingScale(3)).unwrap(), DenseMatrix::zeros(4, 2));
    }

    #[test]
    fn smoothing_shape_error() {
        let a = SparseOperator::identity(3);
        assert!(apply_smoothing(&a, &DenseMatrix::zeros(2, 1), SmoothingScale(0)).is_err());
        assert!(high_pass(&a, &DenseMatrix::zeros(2, 1), SmoothingScale(2)).is_err());
    }

    #[test]
    fn complete_graph_is_mean_projector() {
        let a = normalize_adjacency(&Graph::complete(5));
        assert!(dense(&a).values().iter().all(|&v| v == 0.2));
    }

    #[test]
    fn parse_drops_loops_and_symmetrizes() {
        let text = "# toy\nn 4\n0 1\n1 0\n2 2\n3 1\n0 1\n";
        let g = Graph::parse(text, Path::new("toy")).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 3)]);
        assert_eq!(Graph::parse(&g.to_edge_list(), Path::new("x")).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        assert!(Graph::parse("0 1\n", Path::new("x")).is_err());
        assert!(Graph::parse("n 2\n0 5\n", Path::new("x")).is_err());
        assert!(Graph::parse("n 2\n0 x\n", Path::new("x")).is_err());
        assert!(Graph::parse("", Path::new("x")).is_err());
    }
}
