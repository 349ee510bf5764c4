//! Graph construction, canonical generators, and normalized operators.
//!
//! A [`Graph`] is pure topology: an undirected simple graph held as a sorted
//! CSR structure with a degree vector. Self-loops are *never* stored here —
//! they are added exactly once, inside [`Graph::normalize`], which builds the
//! self-loop-augmented normalized adjacency
//!
//! ```text
//!   sym:  D̃^{-1/2} (A + I) D̃^{-1/2}      rw:  D̃^{-1} (A + I)       D̃ = D + I
//! ```
//!
//! Both operators have spectral radius at most 1 (each row of the rw form
//! sums to 1; the sym form is a similarity transform of it), which is what
//! makes truncated Neumann propagation in [`crate::filter`] converge. The
//! [`NormalizedAdjacency::spectral_radius`] power iteration is the runtime
//! check of that fact.
//!
//! All types are immutable after construction and safe to share across
//! threads. Matrix application parallelizes over output rows; within a row,
//! accumulation follows column-index order, so results do not depend on the
//! thread count.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;
use rand::Rng;
use rayon::prelude::*;

/// Undirected simple graph in CSR form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, deduplicated undirected edges as `(u, v)` with `u < v`.
    edges: Vec<(usize, usize)>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    degree: Vec<usize>,
}

/// Canonical graph families.
///
/// The first four are small deterministic case-study graphs; the last two are
/// seeded random families for synthetic experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    /// `n` nodes, no edges.
    Isolated,
    /// Node 0 is the center, connected to every other node.
    Star,
    /// Every pair of nodes connected.
    Complete,
    /// Cycle `0-1-...-(n-1)-0`.
    Ring,
    /// Erdős–Rényi: each pair independently an edge with probability `p`.
    ErdosRenyi { p: f64 },
    /// Stochastic block model with contiguous equal blocks: pairs inside a
    /// block connect with probability `p_in`, pairs across blocks with `p_out`.
    Sbm { blocks: usize, p_in: f64, p_out: f64 },
}

impl Graph {
    /// Build a graph from an edge list.
    ///
    /// The input may contain duplicates and both orientations; the result is
    /// symmetrized, deduplicated, and sorted. Self-loops are rejected (they
    /// are added later by normalization) and out-of-range indices are errors.
    ///
    /// # Examples
    /// ```
    /// let g = ngc::Graph::build(2, &[(0, 1), (1, 0)]).unwrap();
    /// assert_eq!(g.edge_count(), 1);
    /// assert_eq!(g.degrees(), &[1, 1]);
    /// ```
    pub fn build(n: usize, edge_list: &[(usize, usize)]) -> Result<Graph> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "graph needs at least one node".into(),
            });
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange { u, v, bad: u.max(v), n });
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Graph::from_canonical_edges(n, edges))
    }

    /// Build from edges already in canonical form (`u < v`, sorted, unique).
    fn from_canonical_edges(n: usize, edges: Vec<(usize, usize)>) -> Graph {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + degree[i];
        }
        let mut col_idx = vec![0usize; 2 * edges.len()];
        let mut cursor = row_ptr.clone();
        for &(u, v) in &edges {
            col_idx[cursor[u]] = v;
            cursor[u] += 1;
            col_idx[cursor[v]] = u;
            cursor[v] += 1;
        }
        // Neighbor lists come out sorted because edges are sorted by (u, v)
        // and each row receives its columns in increasing order of the other
        // endpoint only when u < v insertions interleave; enforce explicitly.
        for i in 0..n {
            col_idx[row_ptr[i]..row_ptr[i + 1]].sort_unstable();
        }
        Graph { n, edges, row_ptr, col_idx, degree }
    }

    /// Generate a canonical graph. Deterministic: the same
    /// `(kind, n, seed)` always yields the same edge list (the seed is
    /// ignored by the non-random kinds).
    ///
    /// # Examples
    /// ```
    /// use ngc::{Graph, GraphKind};
    /// let ring = Graph::canonical(GraphKind::Ring, 8, 0).unwrap();
    /// assert_eq!(ring.edge_count(), 8);
    /// assert!(ring.degrees().iter().all(|&d| d == 2));
    /// ```
    pub fn canonical(kind: GraphKind, n: usize, seed: u64) -> Result<Graph> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "graph needs at least one node".into(),
            });
        }
        let edges: Vec<(usize, usize)> = match kind {
            GraphKind::Isolated => Vec::new(),
            GraphKind::Star => (1..n).map(|i| (0, i)).collect(),
            GraphKind::Complete => {
                let mut e = Vec::with_capacity(n * (n - 1) / 2);
                for u in 0..n {
                    for v in (u + 1)..n {
                        e.push((u, v));
                    }
                }
                e
            }
            GraphKind::Ring => match n {
                1 => Vec::new(),
                2 => vec![(0, 1)],
                _ => {
                    let mut e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
                    e.push((0, n - 1));
                    e.sort_unstable();
                    e
                }
            },
            GraphKind::ErdosRenyi { p } => {
                check_probability("p", p)?;
                let mut r = rng::stream(seed, "graph.erdos_renyi");
                let mut e = Vec::new();
                for u in 0..n {
                    for v in (u + 1)..n {
                        if r.random::<f64>() < p {
                            e.push((u, v));
                        }
                    }
                }
                e
            }
            GraphKind::Sbm { blocks, p_in, p_out } => {
                check_probability("p_in", p_in)?;
                check_probability("p_out", p_out)?;
                if blocks == 0 || blocks > n {
                    return Err(Error::TooManyBlocks { blocks, n });
                }
                let mut r = rng::stream(seed, "graph.sbm");
                let mut e = Vec::new();
                for u in 0..n {
                    for v in (u + 1)..n {
                        let p = if block_of(u, n, blocks) == block_of(v, n, blocks) {
                            p_in
                        } else {
                            p_out
                        };
                        if r.random::<f64>() < p {
                            e.push((u, v));
                        }
                    }
                }
                e
            }
        };
        Ok(Graph::from_canonical_edges(n, edges))
    }

    #[must_use]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted unique undirected edges, each as `(u, v)` with `u < v`.
    #[must_use]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Per-node degrees (self-loops excluded by construction).
    #[must_use]
    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    /// Sorted neighbor list of node `i`.
    #[must_use]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Build the self-loop-augmented normalized adjacency operator.
    #[must_use]
    pub fn normalize(&self, mode: NormMode) -> NormalizedAdjacency {
        NormalizedAdjacency::new(self, mode)
    }
}

/// Block index of node `i` when `n` nodes are split into `blocks` contiguous
/// blocks (block `b` owns indices `[b*n/blocks, (b+1)*n/blocks)`).
#[must_use]
pub fn block_of(i: usize, n: usize, blocks: usize) -> usize {
    debug_assert!(i < n && blocks >= 1 && blocks <= n);
    // Inverse of the floor boundaries: the unique b with
    // floor(b*n/blocks) <= i < floor((b+1)*n/blocks).
    ((i + 1) * blocks - 1) / n
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability { name, value: p });
    }
    Ok(())
}

/// Normalization mode for the self-loop-augmented adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormMode {
    /// Symmetric `D̃^{-1/2} (A+I) D̃^{-1/2}`.
    Sym,
    /// Random-walk `D̃^{-1} (A+I)`; rows sum to 1.
    Rw,
}

impl std::fmt::Display for NormMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormMode::Sym => "sym",
            NormMode::Rw => "rw",
        })
    }
}

/// Result of a power-iteration spectral-radius estimate.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEstimate {
    /// Estimated dominant eigenvalue magnitude.
    pub value: f64,
    /// `||Av - value*v||` at the final iterate (v unit-norm).
    pub residual: f64,
    /// Whether the residual fell below the requested tolerance in budget.
    pub converged: bool,
    /// Iterations actually spent.
    pub iters: usize,
}

/// Self-loop-augmented normalized adjacency Ã in CSR form.
///
/// The sparsity pattern is the adjacency pattern plus the diagonal. For the
/// rw mode the operator is row-stochastic; for the sym mode it is symmetric.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    mode: NormMode,
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    /// Values of Ã^T on the same (symmetric) pattern; `None` when Ã is
    /// symmetric so the forward values can be reused.
    values_t: Option<Vec<f64>>,
    /// D̃ = D + I diagonal.
    self_loop_degree: Vec<f64>,
}

impl NormalizedAdjacency {
    fn new(g: &Graph, mode: NormMode) -> NormalizedAdjacency {
        let n = g.node_count();
        let self_loop_degree: Vec<f64> = g.degrees().iter().map(|&d| (d + 1) as f64).collect();
        let nnz = g.col_idx.len() + n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for i in 0..n {
            // Merge the sorted neighbor list with the diagonal entry i.
            let mut inserted_diag = false;
            for &j in g.neighbors(i) {
                if !inserted_diag && j > i {
                    col_idx.push(i);
                    inserted_diag = true;
                }
                col_idx.push(j);
            }
            if !inserted_diag {
                col_idx.push(i);
            }
            let row = &col_idx[row_ptr[i]..];
            match mode {
                NormMode::Rw => {
                    let w = 1.0 / self_loop_degree[i];
                    values.extend(row.iter().map(|_| w));
                }
                NormMode::Sym => {
                    let di = self_loop_degree[i].sqrt();
                    values.extend(row.iter().map(|&j| 1.0 / (di * self_loop_degree[j].sqrt())));
                }
            }
            row_ptr.push(col_idx.len());
        }
        // Ã^T shares the symmetric pattern; entry (i, j) of the transpose is
        // Ã_ji, which for rw normalization is 1/D̃_jj.
        let values_t = match mode {
            NormMode::Sym => None,
            NormMode::Rw => Some(col_idx.iter().map(|&j| 1.0 / self_loop_degree[j]).collect()),
        };
        NormalizedAdjacency { mode, n, row_ptr, col_idx, values, values_t, self_loop_degree }
    }

    #[must_use]
    pub fn mode(&self) -> NormMode {
        self.mode
    }

    #[must_use]
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Nonzero count (adjacency entries plus the diagonal).
    #[must_use]
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// D̃ = D + I diagonal entries.
    #[must_use]
    pub fn self_loop_degrees(&self) -> &[f64] {
        &self.self_loop_degree
    }

    /// Sparse row `i` as parallel `(columns, values)` slices.
    #[must_use]
    pub fn sparse_row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Undirected edges recovered from the off-diagonal pattern (`u < v`).
    pub fn edge_iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, _) = self.sparse_row(i);
            cols.iter().copied().filter(move |&j| j > i).map(move |j| (i, j))
        })
    }

    /// `Ã * x` for a dense row-major matrix `x`.
    ///
    /// Parallel over output rows; within a row the accumulation order is the
    /// fixed column order, so results are identical for any thread count.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        self.apply_with(x, &self.values)
    }

    /// `Ã^T * x`. Same cost and determinism contract as [`Self::apply`].
    pub fn apply_transpose(&self, x: &Matrix) -> Result<Matrix> {
        match &self.values_t {
            None => self.apply_with(x, &self.values),
            Some(vt) => self.apply_with(x, vt),
        }
    }

    fn apply_with(&self, x: &Matrix, values: &[f64]) -> Result<Matrix> {
        if x.rows() != self.n {
            return Err(Error::DimensionMismatch {
                op: "NormalizedAdjacency::apply",
                expected: format!("{} rows", self.n),
                got: format!("{} rows", x.rows()),
            });
        }
        let cols = x.cols();
        let mut out = Matrix::zeros(self.n, cols);
        out.as_mut_slice()
            .par_chunks_mut(cols.max(1))
            .enumerate()
            .for_each(|(i, out_row)| {
                let span = self.row_ptr[i]..self.row_ptr[i + 1];
                for (&j, &v) in self.col_idx[span.clone()].iter().zip(&values[span]) {
                    let x_row = x.row(j);
                    for (o, &xv) in out_row.iter_mut().zip(x_row) {
                        *o += v * xv;
                    }
                }
            });
        Ok(out)
    }

    /// `Ã * v` for a vector.
    pub fn apply_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let m = Matrix::from_vec(v.len(), 1, v.to_vec())?;
        Ok(self.apply(&m)?.as_slice().to_vec())
    }

    /// Power-iteration estimate of the dominant eigenvalue magnitude.
    ///
    /// Starts from the normalized all-ones vector. Non-convergence within the
    /// budget is reported through [`SpectralEstimate::converged`], not as an
    /// error.
    pub fn spectral_radius(&self, iters: usize, tol: f64) -> Result<SpectralEstimate> {
        if iters == 0 {
            return Err(Error::InvalidParameter {
                name: "iters",
                reason: "power iteration needs at least one step".into(),
            });
        }
        let n = self.n;
        let mut v = Matrix::from_vec(n, 1, vec![1.0 / (n as f64).sqrt(); n])?;
        let mut estimate = 0.0;
        let mut residual = f64::INFINITY;
        let mut used = 0;
        for it in 1..=iters {
            used = it;
            let w = self.apply(&v)?;
            let norm = w.frobenius_norm();
            if norm == 0.0 {
                // v is in the kernel; the all-ones start vector cannot reach
                // this for our operators (diagonal entries are positive), but
                // report a zero estimate rather than dividing by zero.
                return Ok(SpectralEstimate { value: 0.0, residual: 0.0, converged: true, iters: it });
            }
            estimate = norm; // |lambda| since v is unit-norm
            let mut diff = w.clone();
            diff.axpy(-estimate, &v)?;
            residual = diff.frobenius_norm();
            v = w;
            v.scale(1.0 / norm);
            if residual < tol {
                return Ok(SpectralEstimate { value: estimate, residual, converged: true, iters: it });
            }
        }
        Ok(SpectralEstimate { value: estimate, residual, converged: false, iters: used })
    }
}

/// Parse an edge-list text: one `u v` pair per line, whitespace-separated,
/// 0-indexed; `#` starts a comment; blank lines are skipped. Either
/// orientation (and both) are accepted.
///
/// Returns the raw pairs and the smallest node count that fits them
/// (`max index + 1`, or 0 for an empty list). `path` is used only in error
/// messages.
pub fn parse_edge_list(text: &str, path: &str) -> Result<(Vec<(usize, usize)>, usize)> {
    let with_lines = parse_edge_list_lines(text, path)?;
    let min_n = with_lines.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    Ok((with_lines.into_iter().map(|(u, v, _)| (u, v)).collect(), min_n))
}

/// Like [`parse_edge_list`] but keeps the 1-based source line of each edge,
/// so callers validating against an externally known node count can point at
/// the offending line.
pub fn parse_edge_list_lines(text: &str, path: &str) -> Result<Vec<(usize, usize, usize)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or(())
                .and_then(|t| t.parse::<usize>().map_err(|_| ()))
                .map_err(|()| Error::ParseError {
                    path: path.to_string(),
                    line: lineno + 1,
                    message: format!("expected `u v` with nonnegative integers, got `{raw}`"),
                })
        };
        let u = parse(fields.next())?;
        let v = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::ParseError {
                path: path.to_string(),
                line: lineno + 1,
                message: format!("expected exactly two fields, got `{raw}`"),
            });
        }
        pairs.push((u, v, lineno + 1));
    }
    Ok(pairs)
}

/// Read and parse an edge-list file (see [`parse_edge_list`]).
pub fn read_edge_list(path: &str) -> Result<(Vec<(usize, usize)>, usize)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}
