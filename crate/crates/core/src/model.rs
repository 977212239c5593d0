//! Graphs, interaction matrices, stationary distributions, and the graph
//! functionals that govern consensus time: the synchronous and asynchronous
//! partition functionals, graph conductance with the Cheeger sandwich, the
//! sampled-neighbor functional, and the comparison inequalities between them.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Mat};
use crate::math;
use crate::rng::SplitMix64;
use crate::simulate::StateVector;
use crate::{Error, Result};

/// Largest n for exact enumeration of the partition functionals.
pub const PHI_EXACT_LIMIT: usize = 16;
/// Largest n for exact evaluation of the sampled-neighbor functional
/// (each partition needs a 2^n enumeration of Bernoulli outcomes).
pub const PSI_EXACT_LIMIT: usize = 12;
/// Largest n for the inequality comparison report (needs all exact values).
pub const COMPARISON_LIMIT: usize = 12;
/// Partitions are stored as u64 bitmasks.
pub const PARTITION_LIMIT: usize = 63;

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

/// Undirected connected graph, optionally with self-loops. Proper edges are
/// stored as ordered pairs (u, v) with u < v; a self-loop adds one to the
/// degree of its vertex.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    self_loops: BTreeSet<usize>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        self_loops: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut edge_set = BTreeSet::new();
        let mut loop_set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n {
                return Err(Error::VertexOutOfRange { index: a, n });
            }
            if b >= n {
                return Err(Error::VertexOutOfRange { index: b, n });
            }
            if a == b {
                loop_set.insert(a);
                continue;
            }
            let e = (a.min(b), a.max(b));
            if !edge_set.insert(e) {
                return Err(Error::Domain("duplicate edge"));
            }
        }
        for u in self_loops {
            if u >= n {
                return Err(Error::VertexOutOfRange { index: u, n });
            }
            loop_set.insert(u);
        }

        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edge_set {
            adj[a].push(b);
            adj[b].push(a);
        }
        for &u in &loop_set {
            adj[u].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }

        let g = Self {
            n,
            edges: edge_set,
            self_loops: loop_set,
            adj,
        };
        for u in 0..n {
            if g.degree(u) == 0 {
                return Err(Error::IsolatedVertex(u));
            }
        }
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b)));
        Self::new(n, edges, []).expect("complete graph is connected")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs n >= 3");
        let edges = (0..n).map(|a| (a, (a + 1) % n));
        Self::new(n, edges, []).expect("cycle is connected")
    }

    pub fn path(n: usize) -> Self {
        assert!(n >= 2, "path needs n >= 2");
        let edges = (0..n - 1).map(|a| (a, a + 1));
        Self::new(n, edges, []).expect("path is connected")
    }

    /// Star with `leaves` leaves attached to center vertex 0.
    pub fn star(leaves: usize) -> Self {
        assert!(leaves >= 1);
        let edges = (1..=leaves).map(|v| (0, v));
        Self::new(leaves + 1, edges, []).expect("star is connected")
    }

    /// Two k-cliques joined by a single edge between vertices k-1 and k.
    pub fn barbell(k: usize) -> Self {
        assert!(k >= 2);
        let n = 2 * k;
        let mut edges = Vec::new();
        for a in 0..k {
            for b in (a + 1)..k {
                edges.push((a, b));
                edges.push((a + k, b + k));
            }
        }
        edges.push((k - 1, k));
        Self::new(n, edges, []).expect("barbell is connected")
    }

    /// Copy of the graph with a self-loop added at every vertex.
    pub fn with_all_self_loops(&self) -> Self {
        Self::new(self.n, self.edges.iter().copied(), 0..self.n).expect("was connected")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn self_loops(&self) -> impl Iterator<Item = usize> + '_ {
        self.self_loops.iter().copied()
    }

    pub fn has_self_loop(&self, u: usize) -> bool {
        self.self_loops.contains(&u)
    }

    pub fn any_self_loop(&self) -> bool {
        !self.self_loops.is_empty()
    }

    pub fn all_have_self_loops(&self) -> bool {
        self.self_loops.len() == self.n
    }

    /// Sampling neighborhood of `u`, including `u` itself when it has a
    /// self-loop.
    pub fn adjacency(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    /// Degree counting a self-loop once.
    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    /// d(V), the sum of all degrees.
    pub fn degree_sum(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// |E(S, S^c)|: proper edges crossing the cut.
    pub fn crossing_edges(&self, s: Partition) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| s.contains(a) != s.contains(b))
            .count()
    }

    /// d(S): degree mass of one side.
    pub fn degree_mass(&self, s: Partition) -> usize {
        s.iter_vertices().map(|u| self.degree(u)).sum()
    }

    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

/// Nonempty proper vertex subset S, encoded as a bitmask over n <= 63 vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Partition {
    mask: u64,
    n: usize,
}

impl Partition {
    pub fn new(mask: u64, n: usize) -> Result<Self> {
        if n > PARTITION_LIMIT {
            return Err(Error::TooLargeForExact {
                n,
                limit: PARTITION_LIMIT,
            });
        }
        let full = (1u64 << n) - 1;
        if mask == 0 || mask >= full {
            return Err(Error::Domain("partition must be a nonempty proper subset"));
        }
        Ok(Self { mask, n })
    }

    /// All 2^n - 2 partitions in ascending bitmask order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = Partition> {
        let full = (1u64 << n) - 1;
        (1..full).map(move |mask| Partition { mask, n })
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, u: usize) -> bool {
        (self.mask >> u) & 1 == 1
    }

    pub fn size(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn complement(&self) -> Partition {
        let full = (1u64 << self.n) - 1;
        Partition {
            mask: full ^ self.mask,
            n: self.n,
        }
    }

    pub fn iter_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.contains(u))
    }

    pub fn to_state(&self) -> StateVector {
        StateVector::from_fn(self.n, |u| self.contains(u))
    }
}

// ---------------------------------------------------------------------------
// Interaction matrix
// ---------------------------------------------------------------------------

/// Row-stochastic node interaction matrix. Row u is the distribution by which
/// vertex u samples a peer in one step.
#[derive(Clone, Debug)]
pub struct InteractionMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
}

/// Row-sum slack accepted on construction before rejection.
const ROW_SUM_NORMALIZE_TOL: f64 = 1e-9;
/// Row sums hold to this tolerance after normalization.
const ROW_SUM_TOL: f64 = 1e-12;

impl InteractionMatrix {
    /// Validates entries, row sums, irreducibility, and aperiodicity of the
    /// support digraph. Rows within `1e-9` of stochastic are normalized.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, true)
    }

    /// Like [`InteractionMatrix::new`] but accepts periodic support (for
    /// example the two-neighbor matrix of an even cycle, whose support is
    /// bipartite). The stationary distribution is still unique; only
    /// convergence of the dynamics is lost.
    pub fn new_irreducible(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, false)
    }

    fn build(mut rows: Vec<Vec<f64>>, require_aperiodic: bool) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Domain("interaction matrix needs n >= 2"));
        }
        for (u, row) in rows.iter_mut().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            let mut sum = 0.0;
            for (v, a) in row.iter_mut().enumerate() {
                if *a < 0.0 {
                    if *a > -ROW_SUM_TOL {
                        *a = 0.0;
                    } else {
                        return Err(Error::EntryOutOfRange {
                            row: u,
                            col: v,
                            value: *a,
                        });
                    }
                }
                if *a > 1.0 + ROW_SUM_NORMALIZE_TOL {
                    return Err(Error::EntryOutOfRange {
                        row: u,
                        col: v,
                        value: *a,
                    });
                }
                sum += *a;
            }
            if math::abs(sum - 1.0) > ROW_SUM_NORMALIZE_TOL {
                return Err(Error::NotStochastic { row: u, sum });
            }
            for a in row.iter_mut() {
                *a /= sum;
            }
            debug_assert!(math::abs(row.iter().sum::<f64>() - 1.0) <= ROW_SUM_TOL);
        }

        let m = Self { n, rows };
        if !m.support_irreducible() {
            return Err(Error::BipartiteOrReducible);
        }
        if require_aperiodic && m.support_period() != 1 {
            return Err(Error::BipartiteOrReducible);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.rows[u]
    }

    pub fn entry(&self, u: usize, v: usize) -> f64 {
        self.rows[u][v]
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_rows(&self.rows)
    }

    /// Smallest strictly positive entry (the alpha of the inference theory).
    pub fn min_positive_entry(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .copied()
            .filter(|&a| a > 0.0)
            .fold(1.0, f64::min)
    }

    /// a_u^T x for a binary state.
    pub fn row_dot(&self, u: usize, x: &StateVector) -> f64 {
        let row = &self.rows[u];
        let mut s = 0.0;
        for v in x.ones() {
            s += row[v];
        }
        s
    }

    /// a_u^T x for a bitmask state (n <= 63).
    pub fn row_dot_mask(&self, u: usize, mask: u64) -> f64 {
        let row = &self.rows[u];
        let mut s = 0.0;
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            s += row[v];
            m &= m - 1;
        }
        s
    }

    fn support_irreducible(&self) -> bool {
        let forward =
            |u: usize| -> Vec<usize> { (0..self.n).filter(|&v| self.rows[u][v] > 0.0).collect() };
        let backward =
            |u: usize| -> Vec<usize> { (0..self.n).filter(|&v| self.rows[v][u] > 0.0).collect() };
        let reach = |next: &dyn Fn(usize) -> Vec<usize>| -> bool {
            let mut seen = vec![false; self.n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in next(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(&forward) && reach(&backward)
    }

    /// Period of the support digraph: gcd of cycle lengths through vertex 0,
    /// computed from BFS levels. Assumes irreducibility.
    fn support_period(&self) -> u64 {
        let n = self.n;
        let mut dist = vec![usize::MAX; n];
        let mut queue = alloc::collections::VecDeque::new();
        dist[0] = 0;
        queue.push_back(0usize);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if self.rows[u][v] > 0.0 && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g: u64 = 0;
        for u in 0..n {
            for v in 0..n {
                if self.rows[u][v] > 0.0 {
                    let delta = (dist[u] as i64 + 1 - dist[v] as i64).unsigned_abs();
                    g = gcd(g, delta);
                }
            }
        }
        g.max(1)
    }

    pub fn is_aperiodic(&self) -> bool {
        self.support_period() == 1
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Which interaction matrix to derive from a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// With probability 1/2 keep the own state, otherwise copy a uniformly
    /// random neighbor. Requires a graph without self-loops.
    Lazy,
    /// Copy a node sampled uniformly from the neighborhood set (which
    /// includes the node itself exactly when it has a self-loop).
    UniformNeighbor,
}

/// Raw lazy rows: a_{uu} = 1/2, a_{uv} = 1/(2 d_u) for neighbors.
pub fn lazy_rows(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.n();
    let mut rows = vec![vec![0.0; n]; n];
    for u in 0..n {
        rows[u][u] = 0.5;
        let d = graph.degree(u) as f64;
        for &v in graph.adjacency(u) {
            rows[u][v] += 0.5 / d;
        }
    }
    rows
}

/// Raw uniform-neighbor rows: a_{uv} = 1/d_u over the adjacency of u.
pub fn uniform_neighbor_rows(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.n();
    let mut rows = vec![vec![0.0; n]; n];
    for u in 0..n {
        let d = graph.degree(u) as f64;
        for &v in graph.adjacency(u) {
            rows[u][v] += 1.0 / d;
        }
    }
    rows
}

/// Builds the interaction matrix of the requested kind and verifies
/// irreducibility and aperiodicity of its support.
pub fn build_matrix(graph: &Graph, kind: MatrixKind) -> Result<InteractionMatrix> {
    let rows = match kind {
        MatrixKind::Lazy => {
            if graph.any_self_loop() {
                return Err(Error::SelfLoopViolation(
                    "lazy matrix is defined for graphs without self-loops",
                ));
            }
            lazy_rows(graph)
        }
        MatrixKind::UniformNeighbor => uniform_neighbor_rows(graph),
    };
    InteractionMatrix::new(rows)
}

// ---------------------------------------------------------------------------
// Stationary distribution
// ---------------------------------------------------------------------------

/// Stationary distribution of an interaction matrix: pi^T = pi^T A.
#[derive(Clone, Debug)]
pub struct StationaryDistribution {
    pi: Vec<f64>,
    pi_star: f64,
}

const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;
const DENSE_SOLVE_LIMIT: usize = 64;

impl StationaryDistribution {
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn pi_star(&self) -> f64 {
        self.pi_star
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    /// ||pi||_2^2
    pub fn norm_sq(&self) -> f64 {
        self.pi.iter().map(|p| p * p).sum()
    }

    pub fn dot(&self, x: &StateVector) -> f64 {
        x.ones().map(|u| self.pi[u]).sum()
    }

    pub fn dot_mask(&self, mask: u64) -> f64 {
        let mut s = 0.0;
        let mut m = mask;
        while m != 0 {
            s += self.pi[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        s
    }

    /// V_pi(x) = pi^T x (1 - pi^T x)
    pub fn v_pi(&self, x: &StateVector) -> f64 {
        let s = self.dot(x);
        s * (1.0 - s)
    }

    pub fn v_pi_mask(&self, mask: u64) -> f64 {
        let s = self.dot_mask(mask);
        s * (1.0 - s)
    }

    /// min over transient states of V_pi, which is attained at the most
    /// extreme singleton: pi* (1 - pi*).
    pub fn min_transient_v_pi(&self) -> f64 {
        self.pi_star * (1.0 - self.pi_star)
    }

    fn from_vector(pi: Vec<f64>, a: &InteractionMatrix) -> Result<Self> {
        let n = pi.len();
        let sum: f64 = pi.iter().sum();
        if sum <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let pi: Vec<f64> = pi.into_iter().map(|p| p / sum).collect();
        let mut residual = 0.0f64;
        for v in 0..n {
            let pav: f64 = (0..n).map(|u| pi[u] * a.entry(u, v)).sum();
            residual = residual.max(math::abs(pav - pi[v]));
        }
        if residual > STATIONARY_RESIDUAL_TOL {
            return Err(Error::NonConvergence { residual });
        }
        if pi.iter().any(|&p| p <= 0.0) {
            return Err(Error::Domain(
                "stationary distribution not strictly positive",
            ));
        }
        let pi_star = pi.iter().copied().fold(1.0, f64::min);
        Ok(Self { pi, pi_star })
    }
}

/// Solves pi^T = pi^T A: dense linear solve for n <= 64, power iteration
/// otherwise.
pub fn stationary_distribution(a: &InteractionMatrix) -> Result<StationaryDistribution> {
    let n = a.n();
    if n <= DENSE_SOLVE_LIMIT {
        // (A^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = a.entry(j, i) - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..n {
            m[(n - 1, j)] = 1.0;
        }
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let pi = linalg::solve(m, b)?;
        StationaryDistribution::from_vector(pi, a)
    } else {
        let mut pi = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        for _ in 0..1_000_000u32 {
            for x in next.iter_mut() {
                *x = 0.0;
            }
            for u in 0..n {
                let pu = pi[u];
                if pu == 0.0 {
                    continue;
                }
                for (v, &auv) in a.row(u).iter().enumerate() {
                    next[v] += pu * auv;
                }
            }
            let mut diff = 0.0f64;
            for (p, q) in pi.iter().zip(&next) {
                diff = diff.max(math::abs(p - q));
            }
            core::mem::swap(&mut pi, &mut next);
            if diff <= STATIONARY_RESIDUAL_TOL / 2.0 {
                return StationaryDistribution::from_vector(pi, a);
            }
        }
        Err(Error::NonConvergence { residual: f64::NAN })
    }
}

// ---------------------------------------------------------------------------
// Partition functionals
// ---------------------------------------------------------------------------

/// Synchronous vs asynchronous variant of the partition functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiVariant {
    Sync,
    Async,
}

/// Evaluation mode for partition minimizations.
#[derive(Clone, Copy, Debug)]
pub enum PhiMode {
    Exact,
    /// Upper estimate over k uniformly sampled partitions.
    Sampled {
        k: u64,
        seed: u64,
    },
}

/// Value of a minimized partition functional with its witness.
#[derive(Clone, Copy, Debug)]
pub struct PhiResult {
    pub value: f64,
    pub witness: Partition,
    pub exact: bool,
}

/// The ratio minimized by the synchronous functional at one partition.
pub fn phi_ratio(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    variant: PhiVariant,
    s: Partition,
) -> f64 {
    let mask = s.mask();
    let den = pi.v_pi_mask(mask);
    let mut num = 0.0;
    for u in 0..a.n() {
        let q = a.row_dot_mask(u, mask);
        let vu = match variant {
            PhiVariant::Sync => q * (1.0 - q),
            PhiVariant::Async => {
                let xu = if s.contains(u) { 1.0 } else { 0.0 };
                xu * (1.0 - q) + (1.0 - xu) * q
            }
        };
        num += pi.pi()[u] * pi.pi()[u] * vu;
    }
    let scale = match variant {
        PhiVariant::Sync => 1.0,
        PhiVariant::Async => 1.0 / a.n() as f64,
    };
    scale * num / den
}

/// Minimizes the partition functional. Exact mode enumerates all 2^n - 2
/// partitions (n <= 16) and reports the lexicographically smallest witness;
/// sampled mode returns an upper estimate over k random partitions.
pub fn phi_a(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    variant: PhiVariant,
    mode: PhiMode,
) -> Result<PhiResult> {
    let n = a.n();
    if n > PARTITION_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            limit: PARTITION_LIMIT,
        });
    }
    match mode {
        PhiMode::Exact => {
            if n > PHI_EXACT_LIMIT {
                return Err(Error::TooLargeForExact {
                    n,
                    limit: PHI_EXACT_LIMIT,
                });
            }
            let mut best = f64::INFINITY;
            let mut witness = None;
            for s in Partition::enumerate(n) {
                let r = phi_ratio(a, pi, variant, s);
                if r < best {
                    best = r;
                    witness = Some(s);
                }
            }
            Ok(PhiResult {
                value: best,
                witness: witness.expect("n >= 2"),
                exact: true,
            })
        }
        PhiMode::Sampled { k, seed } => {
            let mut rng = SplitMix64::new(seed);
            let count = (1u64 << n) - 2;
            let mut best = f64::INFINITY;
            let mut witness = None;
            for _ in 0..k.max(1) {
                let mask = 1 + ((rng.next_u64() as u128 * count as u128) >> 64) as u64;
                let s = Partition::new(mask, n)?;
                let r = phi_ratio(a, pi, variant, s);
                if r < best {
                    best = r;
                    witness = Some(s);
                }
            }
            Ok(PhiResult {
                value: best,
                witness: witness.expect("k >= 1"),
                exact: false,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Conductance and the Cheeger sandwich
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct ConductanceReport {
    pub phi_g: f64,
    pub witness: Partition,
    /// Second smallest eigenvalue of the normalized Laplacian.
    pub lambda2: f64,
    /// Whether lambda2/2 <= phi(G) <= sqrt(2 lambda2).
    pub cheeger_ok: bool,
}

/// Cut ratio |E(S,S^c)| / min{d(S), d(S^c)} for one partition.
pub fn conductance_ratio(graph: &Graph, s: Partition) -> f64 {
    let cut = graph.crossing_edges(s) as f64;
    let ds = graph.degree_mass(s);
    let dsc = graph.degree_sum() - ds;
    cut / ds.min(dsc) as f64
}

/// Exact graph conductance by enumeration (n <= 16), the normalized
/// Laplacian's lambda_2, and the Cheeger sandwich check.
pub fn conductance(graph: &Graph) -> Result<ConductanceReport> {
    let n = graph.n();
    if n > PHI_EXACT_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            limit: PHI_EXACT_LIMIT,
        });
    }
    let mut best = f64::INFINITY;
    let mut witness = None;
    for s in Partition::enumerate(n) {
        let r = conductance_ratio(graph, s);
        if r < best {
            best = r;
            witness = Some(s);
        }
    }
    let witness = witness.ok_or(Error::Domain("graph needs n >= 2"))?;

    // Normalized Laplacian L = I - D^{-1/2} Adj D^{-1/2}, self-loops on the
    // diagonal of Adj.
    let mut lap = Mat::identity(n);
    let dsqrt: Vec<f64> = (0..n).map(|u| math::sqrt(graph.degree(u) as f64)).collect();
    for (a, b) in graph.edges() {
        let w = 1.0 / (dsqrt[a] * dsqrt[b]);
        lap[(a, b)] -= w;
        lap[(b, a)] -= w;
    }
    for u in graph.self_loops() {
        lap[(u, u)] -= 1.0 / (dsqrt[u] * dsqrt[u]);
    }
    let eig = linalg::sym_eigen(&lap)?;
    let lambda2 = eig.values[1];
    let phi_g = best;
    let cheeger_ok = lambda2 / 2.0 <= phi_g + 1e-9 && phi_g <= math::sqrt(2.0 * lambda2) + 1e-9;
    Ok(ConductanceReport {
        phi_g,
        witness,
        lambda2,
        cheeger_ok,
    })
}

// ---------------------------------------------------------------------------
// Sampled-neighbor functional (the CR16 comparison quantity)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub enum PsiMode {
    Exact,
    /// Monte Carlo numerator with k Bernoulli-vector samples per partition;
    /// partitions are enumerated for n <= 16 and sampled (k of them) beyond.
    Mc {
        k: u64,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct PsiResult {
    pub value: f64,
    pub witness: Partition,
    pub exact: bool,
}

/// Exact numerator E|sum_u pi_u (x_u - B_u)| with independent B_u ~
/// Ber(a_u^T x), by enumeration of outcomes with zero-probability pruning.
pub fn psi_numerator_exact(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    s: Partition,
) -> f64 {
    let n = a.n();
    let mask = s.mask();
    let q: Vec<f64> = (0..n).map(|u| a.row_dot_mask(u, mask)).collect();
    let start = pi.dot_mask(mask);

    fn rec(u: usize, acc: f64, prob: f64, q: &[f64], pi: &[f64], total: &mut f64) {
        if prob == 0.0 {
            return;
        }
        if u == q.len() {
            *total += prob * math::abs(acc);
            return;
        }
        rec(u + 1, acc - pi[u], prob * q[u], q, pi, total);
        rec(u + 1, acc, prob * (1.0 - q[u]), q, pi, total);
    }

    let mut total = 0.0;
    rec(0, start, 1.0, &q, pi.pi(), &mut total);
    total
}

fn psi_ratio_exact(a: &InteractionMatrix, pi: &StationaryDistribution, s: Partition) -> f64 {
    let sm = pi.dot_mask(s.mask());
    psi_numerator_exact(a, pi, s) / sm.min(1.0 - sm)
}

fn psi_ratio_mc(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    s: Partition,
    k: u64,
    rng: &mut SplitMix64,
) -> f64 {
    let n = a.n();
    let mask = s.mask();
    let q: Vec<f64> = (0..n).map(|u| a.row_dot_mask(u, mask)).collect();
    let start = pi.dot_mask(mask);
    let mut sum = 0.0;
    for _ in 0..k {
        let mut acc = start;
        for u in 0..n {
            if rng.bernoulli(q[u]) {
                acc -= pi.pi()[u];
            }
        }
        sum += math::abs(acc);
    }
    (sum / k as f64) / start.min(1.0 - start)
}

/// Minimizes the sampled-neighbor functional over partitions.
pub fn psi_tilde(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    mode: PsiMode,
) -> Result<PsiResult> {
    let n = a.n();
    if n > PARTITION_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            limit: PARTITION_LIMIT,
        });
    }
    match mode {
        PsiMode::Exact => {
            if n > PSI_EXACT_LIMIT {
                return Err(Error::TooLargeForExact {
                    n,
                    limit: PSI_EXACT_LIMIT,
                });
            }
            let mut best = f64::INFINITY;
            let mut witness = None;
            for s in Partition::enumerate(n) {
                let r = psi_ratio_exact(a, pi, s);
                if r < best {
                    best = r;
                    witness = Some(s);
                }
            }
            Ok(PsiResult {
                value: best,
                witness: witness.expect("n >= 2"),
                exact: true,
            })
        }
        PsiMode::Mc { k, seed } => {
            let mut rng = SplitMix64::new(seed);
            let mut best = f64::INFINITY;
            let mut witness = None;
            if n <= PHI_EXACT_LIMIT {
                for s in Partition::enumerate(n) {
                    let r = psi_ratio_mc(a, pi, s, k.max(1), &mut rng);
                    if r < best {
                        best = r;
                        witness = Some(s);
                    }
                }
            } else {
                let count = (1u64 << n) - 2;
                for _ in 0..k.max(1) {
                    let mask = 1 + ((rng.next_u64() as u128 * count as u128) >> 64) as u64;
                    let s = Partition::new(mask, n)?;
                    let r = psi_ratio_mc(a, pi, s, k.max(1), &mut rng);
                    if r < best {
                        best = r;
                        witness = Some(s);
                    }
                }
            }
            Ok(PsiResult {
                value: best,
                witness: witness.expect("k >= 1"),
                exact: false,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Aggregate spectral report
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    pub phi_mode: PhiMode,
    pub psi_mode: PsiMode,
}

impl SpectralOptions {
    /// Exact when within the enumeration limits, sampled otherwise.
    pub fn auto(n: usize, seed: u64) -> Self {
        let phi_mode = if n <= PHI_EXACT_LIMIT {
            PhiMode::Exact
        } else {
            PhiMode::Sampled { k: 4096, seed }
        };
        let psi_mode = if n <= PSI_EXACT_LIMIT {
            PsiMode::Exact
        } else {
            PsiMode::Mc {
                k: 2048,
                seed: seed.wrapping_add(1),
            }
        };
        Self { phi_mode, psi_mode }
    }
}

/// Spectral functionals of one interaction matrix (plus graph conductance
/// when the underlying graph is known).
#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub phi_a: PhiResult,
    pub phi_a_async: PhiResult,
    pub psi_tilde: PsiResult,
    /// psi_A = pi* psi~_A
    pub psi_a: f64,
    pub pi_star: f64,
    pub conductance: Option<ConductanceReport>,
}

pub fn spectral_report(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    graph: Option<&Graph>,
    opts: SpectralOptions,
) -> Result<SpectralReport> {
    let phi = phi_a(a, pi, PhiVariant::Sync, opts.phi_mode)?;
    let phi_async = phi_a(a, pi, PhiVariant::Async, opts.phi_mode)?;
    let psi = psi_tilde(a, pi, opts.psi_mode)?;
    let cond = graph.map(conductance).transpose()?;
    Ok(SpectralReport {
        phi_a: phi,
        phi_a_async: phi_async,
        psi_a: pi.pi_star() * psi.value,
        psi_tilde: psi,
        pi_star: pi.pi_star(),
        conductance: cond,
    })
}

// ---------------------------------------------------------------------------
// Comparison inequalities
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
}

impl InequalityCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs * (1.0 + 1e-12) + 1e-12;
        Self {
            name,
            lhs,
            rhs,
            holds,
            slack: rhs - lhs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub kind: MatrixKind,
    pub phi_a: f64,
    pub psi_tilde: f64,
    pub phi_g: f64,
    pub checks: Vec<InequalityCheck>,
}

/// Checks the comparison inequalities between the partition functional, the
/// sampled-neighbor functional, and graph conductance for the given matrix
/// kind. All functionals are evaluated exactly, so n <= 12.
pub fn comparison_report(graph: &Graph, kind: MatrixKind) -> Result<ComparisonReport> {
    let n = graph.n();
    if n > COMPARISON_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            limit: COMPARISON_LIMIT,
        });
    }
    if kind == MatrixKind::UniformNeighbor && !graph.all_have_self_loops() {
        return Err(Error::SelfLoopViolation(
            "the uniform-neighbor comparison inequalities assume a self-loop at every vertex",
        ));
    }
    let a = build_matrix(graph, kind)?;
    let pi = stationary_distribution(&a)?;
    let phi = phi_a(&a, &pi, PhiVariant::Sync, PhiMode::Exact)?.value;
    let psi = psi_tilde(&a, &pi, PsiMode::Exact)?.value;
    let cond = conductance(graph)?;
    let dv = graph.degree_sum() as f64;
    let dmin = graph.min_degree() as f64;

    let checks = match kind {
        MatrixKind::Lazy => vec![
            InequalityCheck::new(
                "inv_phi_A <= 2 (d(V)/d_min) inv_phi_G",
                1.0 / phi,
                2.0 * (dv / dmin) / cond.phi_g,
            ),
            InequalityCheck::new("psi_tilde <= phi_G", psi, cond.phi_g),
        ],
        MatrixKind::UniformNeighbor => {
            let psi_a = pi.pi_star() * psi;
            vec![
                InequalityCheck::new(
                    "inv_phi_A <= (d(V)/2) inv_phi_G",
                    1.0 / phi,
                    0.5 * dv / cond.phi_g,
                ),
                InequalityCheck::new("psi_tilde <= 2 phi_G", psi, 2.0 * cond.phi_g),
                InequalityCheck::new("inv_phi_A <= d_min inv_psi_A", 1.0 / phi, dmin / psi_a),
            ]
        }
    };

    Ok(ComparisonReport {
        kind,
        phi_a: phi,
        psi_tilde: psi,
        phi_g: cond.phi_g,
        checks,
    })
}

// ---------------------------------------------------------------------------
