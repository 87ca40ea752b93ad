//! Graph construction, ingestion and result persistence.
//!
//! Edge lists are 1-based. The adjacency convention follows the shift
//! definition: `A[i, j]` is the weight of the edge from `j` to `i`, so row i
//! of the adjacency marks the incoming neighborhood of node i.
//!
//! File formats:
//! * edge-list CSV with header `src,dst,weight`;
//! * signal CSV with header `node,value_re,value_im`;
//! * result JSON `{config, results, versions, seed}` with floats carried as
//!   17-significant-digit decimal strings so every value round-trips
//!   bit-exactly.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::spectral::{GraphSignal, ShiftOperator};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Weighted graph as an edge list. Undirected graphs store each edge once;
/// self-loops are allowed (weighted diagonals occur in ingested tables).
#[derive(Debug, Clone)]
pub struct EdgeListGraph {
    node_count: usize,
    edges: Vec<Edge>,
    directed: bool,
}

impl EdgeListGraph {
    pub fn new(node_count: usize, edges: Vec<(usize, usize, f64)>, directed: bool) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for (src, dst, weight) in edges {
            if src == 0 || src > node_count || dst == 0 || dst > node_count {
                return Err(Error::IndexOutOfRange {
                    context: "edge endpoint",
                    index: src.max(dst),
                    max: node_count,
                });
            }
            let key = if directed || src <= dst {
                (src, dst)
            } else {
                (dst, src)
            };
            if !seen.insert(key) {
                return Err(Error::InvalidPlan {
                    reason: format!("duplicate edge ({src}, {dst})"),
                });
            }
            list.push(Edge { src, dst, weight });
        }
        Ok(Self {
            node_count,
            edges: list,
            directed,
        })
    }

    /// The directed cycle 1 -> 2 -> ... -> N -> 1.
    pub fn directed_cycle(n: usize) -> Self {
        let edges = (1..=n).map(|i| Edge {
            src: i,
            dst: i % n + 1,
            weight: 1.0,
        });
        Self {
            node_count: n,
            edges: edges.collect(),
            directed: true,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Dense adjacency with `A[dst-1, src-1] = weight`.
    pub fn adjacency(&self) -> Array2<Complex64> {
        let n = self.node_count;
        let mut a = Array2::zeros((n, n));
        for e in &self.edges {
            a[[e.dst - 1, e.src - 1]] = c(e.weight);
            if !self.directed && e.src != e.dst {
                a[[e.src - 1, e.dst - 1]] = c(e.weight);
            }
        }
        a
    }

    /// Nodes with an edge into `node` (1-based).
    pub fn incoming_neighbors(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.src == e.dst {
                continue;
            }
            if e.dst == node {
                out.push(e.src);
            } else if !self.directed && e.src == node {
                out.push(e.dst);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Connectivity of the symmetrized pattern (undirected reachability).
    pub fn is_connected(&self) -> bool {
        let n = self.node_count;
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n + 1];
        for e in &self.edges {
            if e.src != e.dst {
                adj[e.src].push(e.dst);
                adj[e.dst].push(e.src);
            }
        }
        let mut seen = vec![false; n + 1];
        let mut stack = vec![1usize];
        seen[1] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }
}

const CONNECTIVITY_ATTEMPTS: usize = 10_000;

/// Random graph: every node pair carries an edge independently with
/// probability `p` (unordered pairs when `symmetric`, ordered otherwise).
/// Realizations that are not connected are discarded and redrawn, each
/// attempt on its own seed stream, up to 10^4 attempts.
pub fn erdos_renyi(
    n: usize,
    p: f64,
    seed: u64,
    require_connected: bool,
    symmetric: bool,
) -> Result<EdgeListGraph> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidPlan {
            reason: format!("edge probability {p} not in (0, 1)"),
        });
    }
    use rand::Rng;
    for attempt in 0..CONNECTIVITY_ATTEMPTS {
        let mut rng = stream_rng(seed, attempt as u64);
        let mut edges = Vec::new();
        if symmetric {
            for i in 1..=n {
                for j in (i + 1)..=n {
                    if rng.random::<f64>() < p {
                        edges.push((i, j, 1.0));
                    }
                }
            }
        } else {
            for i in 1..=n {
                for j in 1..=n {
                    if i != j && rng.random::<f64>() < p {
                        edges.push((i, j, 1.0));
                    }
                }
            }
        }
        let graph = EdgeListGraph::new(n, edges, !symmetric)?;
        if !require_connected || graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(Error::ConnectivityBudgetExceeded {
        attempts: CONNECTIVITY_ATTEMPTS,
    })
}

/// Shift operators derived from a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftKind {
    Adjacency,
    IdentityMinusAdjacency,
    HalfAdjacencySquared,
    Laplacian,
}

impl ShiftKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "adjacency" | "a" => Ok(Self::Adjacency),
            "identity-minus-adjacency" | "i-minus-a" => Ok(Self::IdentityMinusAdjacency),
            "half-adjacency-squared" | "half-a-squared" => Ok(Self::HalfAdjacencySquared),
            "laplacian" => Ok(Self::Laplacian),
            other => Err(Error::InvalidPlan {
                reason: format!("unknown shift kind '{other}'"),
            }),
        }
    }
}

fn one_hop_pattern(graph: &EdgeListGraph) -> Array2<bool> {
    let n = graph.node_count();
    let a = graph.adjacency();
    Array2::from_shape_fn((n, n), |(i, j)| i == j || a[[i, j]].norm() > 0.0)
}

/// Build the requested shift. The sparsity pattern is the one-hop
/// neighborhood except for the squared adjacency, whose locality is the
/// two-hop neighborhood.
pub fn shift_from_graph(graph: &EdgeListGraph, kind: &ShiftKind) -> Result<ShiftOperator> {
    let n = graph.node_count();
    let a = graph.adjacency();
    match kind {
        ShiftKind::Adjacency => ShiftOperator::with_pattern(a, one_hop_pattern(graph)),
        ShiftKind::IdentityMinusAdjacency => {
            let m = crate::linalg::identity(n) - &a;
            ShiftOperator::with_pattern(m, one_hop_pattern(graph))
        }
        ShiftKind::HalfAdjacencySquared => {
            let sq = a.dot(&a).mapv(|z| z * 0.5);
            let pattern =
                Array2::from_shape_fn((n, n), |(i, j)| i == j || sq[[i, j]].norm() > 0.0);
            ShiftOperator::with_pattern(sq, pattern)
        }
        ShiftKind::Laplacian => {
            let mut m = a.mapv(|z| -z);
            for i in 0..n {
                let degree: Complex64 = a.row(i).iter().sum();
                m[[i, i]] = degree - a[[i, i]];
            }
            ShiftOperator::with_pattern(m, one_hop_pattern(graph))
        }
    }
}

/// Wrap a user-provided matrix as a shift for this graph, enforcing that
/// entries live on the diagonal or on incoming edges.
pub fn custom_shift(graph: &EdgeListGraph, entries: Array2<Complex64>) -> Result<ShiftOperator> {
    ShiftOperator::with_pattern(entries, one_hop_pattern(graph))
}

/// Result of table ingestion.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub graph: EdgeListGraph,
    /// Entries that were nonzero and fell below the threshold (unordered
    /// pairs counted once when symmetrized).
    pub dropped_edges: usize,
}

/// Ingest a square weighted input-output table from CSV text: optionally
/// symmetrize as `(U(i,j) + U(j,i)) / 2`, then zero all entries strictly
/// below `threshold`. The resulting graph's adjacency reproduces the
/// processed table exactly.
pub fn ingest_weighted_table<R: Read>(
    reader: R,
    symmetrize: bool,
    threshold: f64,
) -> Result<IngestReport> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::MalformedTable(e.to_string()))?;
        let row: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::MalformedTable(format!("non-numeric entry: {e}")))?);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::MalformedTable("empty table".into()));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::MalformedTable(format!(
            "table is not square: {n} rows, widths {:?}",
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    let mut table = Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            table[[i, j]] = v;
        }
    }
    if symmetrize {
        let t = table.t().to_owned();
        table = (&table + &t) / 2.0;
    }
    let mut dropped = 0usize;
    let mut edges = Vec::new();
    for i in 0..n {
        let j_range = if symmetrize { i..n } else { 0..n };
        for j in j_range {
            let v: f64 = table[[i, j]];
            if v == 0.0 {
                continue;
            }
            if v.abs() < threshold {
                dropped += 1;
            } else if symmetrize {
                // Undirected edge (i, j); adjacency symmetric by build.
                edges.push((i + 1, j + 1, v));
            } else {
                // Entry (i, j) of the adjacency is the edge j -> i.
                edges.push((j + 1, i + 1, v));
            }
        }
    }
    let graph = EdgeListGraph::new(n, edges, !symmetrize)?;
    Ok(IngestReport {
        graph,
        dropped_edges: dropped,
    })
}

/// Save an edge list as `src,dst,weight` CSV (1-based, LF line endings).
pub fn save_edge_list<P: AsRef<Path>>(path: P, graph: &EdgeListGraph) -> Result<()> {
    let mut out = String::from("src,dst,weight\n");
    for e in graph.edges() {
        out.push_str(&format!("{},{},{}\n", e.src, e.dst, e.weight));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Load an edge-list CSV. The node count is the largest endpoint unless an
/// explicit count is given (isolated trailing nodes are not representable in
/// the format itself).
pub fn load_edge_list<P: AsRef<Path>>(
    path: P,
    directed: bool,
    node_count: Option<usize>,
) -> Result<EdgeListGraph> {
    let text = std::fs::read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    {
        let headers = rdr
            .headers()
            .map_err(|e| Error::MalformedTable(e.to_string()))?;
        let expected = ["src", "dst", "weight"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::SchemaMismatch(format!(
                "edge list header {:?}, expected {:?}",
                headers, expected
            )));
        }
    }
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::MalformedTable(e.to_string()))?;
        if record.len() != 3 {
            return Err(Error::MalformedTable(format!(
                "edge row has {} fields",
                record.len()
            )));
        }
        let src: usize = record[0]
            .parse()
            .map_err(|e| Error::MalformedTable(format!("src: {e}")))?;
        let dst: usize = record[1]
            .parse()
            .map_err(|e| Error::MalformedTable(format!("dst: {e}")))?;
        let weight: f64 = record[2]
            .parse()
            .map_err(|e| Error::MalformedTable(format!("weight: {e}")))?;
        max_node = max_node.max(src).max(dst);
        edges.push((src, dst, weight));
    }
    EdgeListGraph::new(node_count.unwrap_or(max_node), edges, directed)
}

/// Save a signal as `node,value_re,value_im` CSV.
pub fn save_signal<P: AsRef<Path>>(path: P, signal: &GraphSignal) -> Result<()> {
    let mut out = String::from("node,value_re,value_im\n");
    for (i, v) in signal.values.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, v.re, v.im));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_signal<P: AsRef<Path>>(path: P) -> Result<GraphSignal> {
    let text = std::fs::read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    {
        let headers = rdr
            .headers()
            .map_err(|e| Error::MalformedTable(e.to_string()))?;
        let expected = ["node", "value_re", "value_im"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::SchemaMismatch(format!(
                "signal header {:?}, expected {:?}",
                headers, expected
            )));
        }
    }
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedTable(e.to_string()))?;
        let node: usize = record[0]
            .parse()
            .map_err(|e| Error::MalformedTable(format!("node: {e}")))?;
        if node != row + 1 {
            return Err(Error::SchemaMismatch(format!(
                "signal rows out of order: row {} has node {node}",
                row + 1
            )));
        }
        let re: f64 = record[1]
            .parse()
            .map_err(|e| Error::MalformedTable(format!("value_re: {e}")))?;
        let im: f64 = record[2]
            .parse()
            .map_err(|e| Error::MalformedTable(format!("value_im: {e}")))?;
        values.push(Complex64::new(re, im));
    }
    Ok(GraphSignal::new(Array1::from_vec(values)))
}

/// f64 persisted as a 17-significant-digit decimal string: enough digits to
/// reproduce the exact bit pattern on load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecimalF64(pub f64);

impl Serialize for DecimalF64 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:.16e}", self.0))
    }
}

impl<'de> Deserialize<'de> for DecimalF64 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse::<f64>()
            .map(DecimalF64)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: DecimalF64,
    pub im: DecimalF64,
}

impl From<Complex64> for ComplexEntry {
    fn from(z: Complex64) -> Self {
        Self {
            re: DecimalF64(z.re),
            im: DecimalF64(z.im),
        }
    }
}

/// One value in a result record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResultValue {
    Flag(bool),
    Int(i64),
    Number(DecimalF64),
    Complex(ComplexEntry),
    List(Vec<DecimalF64>),
    IntList(Vec<i64>),
    ComplexList(Vec<ComplexEntry>),
    Text(String),
}

impl ResultValue {
    pub fn number(x: f64) -> Self {
        Self::Number(DecimalF64(x))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Number(d) => Some(d.0),
            Self::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

/// Named bundle of result values (BTreeMap for stable serialized order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub name: String,
    pub values: BTreeMap<String, ResultValue>,
}

impl ResultRecord {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: ResultValue) -> Self {
        self.values.insert(key.into(), value);
        self
    }
}

/// Top-level persisted result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    pub results: Vec<ResultRecord>,
    pub versions: BTreeMap<String, String>,
    pub seed: u64,
    /// Wall-clock stamp; excluded from any determinism comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
}

impl ResultsFile {
    pub fn new(seed: u64) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("gsp-core".into(), env!("CARGO_PKG_VERSION").into());
        versions.insert("format".into(), "1".into());
        Self {
            config: None,
            results: Vec::new(),
            versions,
            seed,
            timestamp_unix: None,
        }
    }
}

pub fn save_results<P: AsRef<Path>>(path: P, file: &ResultsFile) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    let text = serde_json::to_string_pretty(file)
        .map_err(|e| Error::SchemaMismatch(e.to_string()))?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn load_results<P: AsRef<Path>>(path: P) -> Result<ResultsFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::SchemaMismatch(e.to_string()))
}

/// Everything needed to reproduce one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub graph: GraphSpec,
    pub shift: ShiftKind,
    pub support: SupportSpec,
    pub noise: NoiseSpec,
    pub plan: PlanSpec,
    pub trials: usize,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    ErdosRenyi {
        n: usize,
        p: f64,
        #[serde(default = "default_true")]
        connected: bool,
        #[serde(default = "default_true")]
        symmetric: bool,
    },
    DirectedCycle {
        n: usize,
    },
    EdgeList {
        path: String,
        #[serde(default)]
        directed: bool,
    },
    WeightedTable {
        path: String,
        #[serde(default = "default_true")]
        symmetrize: bool,
        #[serde(default)]
        threshold: f64,
    },
}

impl GraphSpec {
    /// Materialize the graph; file-backed specs read from disk.
    pub fn build(&self, seed: u64) -> Result<EdgeListGraph> {
        match self {
            Self::ErdosRenyi {
                n,
                p,
                connected,
                symmetric,
            } => erdos_renyi(*n, *p, seed, *connected, *symmetric),
            Self::DirectedCycle { n } => Ok(EdgeListGraph::directed_cycle(*n)),
            Self::EdgeList { path, directed } => load_edge_list(path, *directed, None),
            Self::WeightedTable {
                path,
                symmetrize,
                threshold,
            } => {
                let file = std::fs::File::open(path)?;
                Ok(ingest_weighted_table(file, *symmetrize, *threshold)?.graph)
            }
        }
    }

    pub fn is_directed_cycle(&self) -> bool {
        matches!(self, Self::DirectedCycle { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportSpec {
    FirstK { k: usize },
    Indices { indices: Vec<usize> },
}

impl SupportSpec {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Self::FirstK { k } => {
                if *k == 0 || *k > n {
                    return Err(Error::InvalidSupport {
                        reason: format!("bandwidth {k} not in 1..={n}"),
                    });
                }
                Ok((1..=*k).collect())
            }
            Self::Indices { indices } => {
                crate::spectral::validate_support(indices, n)?;
                Ok(indices.clone())
            }
        }
    }

    pub fn bandwidth(&self) -> usize {
        match self {
            Self::FirstK { k } => *k,
            Self::Indices { indices } => indices.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    Observation { sigma2: f64 },
    Signal { sigma2: f64 },
    Frequency { sigma2: f64 },
}

impl NoiseSpec {
    pub fn to_model(self) -> crate::noisy::NoiseModel {
        use crate::noisy::NoiseModel;
        match self {
            Self::None => NoiseModel::ObservationWhite { sigma2: 0.0 },
            Self::Observation { sigma2 } => NoiseModel::ObservationWhite { sigma2 },
            Self::Signal { sigma2 } => NoiseModel::SignalWhite { sigma2 },
            Self::Frequency { sigma2 } => NoiseModel::FrequencyWhite { sigma2 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanSpec {
    FirstK,
    Structured { n0: usize, spacing: usize },
    Picks { picks: Vec<usize> },
}

impl PlanSpec {
    pub fn to_plan(&self, total: usize, k: usize) -> Result<crate::sampling::SelectionPlan> {
        use crate::sampling::SelectionPlan;
        match self {
            Self::FirstK => SelectionPlan::first_k(total, k),
            Self::Structured { n0, spacing } => SelectionPlan::structured(total, *n0, *spacing, k),
            Self::Picks { picks } => SelectionPlan::new(total, picks.clone()),
        }
    }
}
