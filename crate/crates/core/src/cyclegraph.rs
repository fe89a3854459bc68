//! Cartesian powers of the directed `l`-cycle, vertex subsets and induced
//! degree statistics.
//!
//! Vertices of `C_l^n` are digit tuples read big-endian, so the first
//! Kronecker factor of `B_n` is the most significant digit. An arc
//! increments exactly one digit mod `l`, matching `y_{i,i+1} = 1`.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::limits::Limits;
use crate::qmatrix::{abs_pattern, build_b};
use crate::SCHEMA_VERSION;

/// Big-endian base-`l` digits of a vertex index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexCode {
    l: usize,
    digits: Vec<usize>,
}

impl VertexCode {
    pub fn from_index(l: usize, n: usize, mut index: usize) -> Self {
        let mut digits = vec![0; n];
        for d in digits.iter_mut().rev() {
            *d = index % l;
            index /= l;
        }
        VertexCode { l, digits }
    }

    pub fn from_digits(l: usize, digits: Vec<usize>) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d >= l) {
            return invalid(format!("digit {d} out of range for base {l}"));
        }
        Ok(VertexCode { l, digits })
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn index(&self) -> usize {
        self.digits.iter().fold(0, |acc, &d| acc * self.l + d)
    }

    pub fn digit_sum(&self) -> usize {
        self.digits.iter().sum()
    }
}

impl std::fmt::Display for VertexCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sep = if self.l > 10 { "," } else { "" };
        let parts: Vec<String> = self.digits.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(sep))
    }
}

/// A set of vertices drawn from `[0, universe)`, stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSubset {
    universe: usize,
    words: Vec<u64>,
    size: usize,
}

impl VertexSubset {
    pub fn empty(universe: usize) -> Self {
        VertexSubset {
            universe,
            words: vec![0; universe.div_ceil(64)],
            size: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for v in 0..universe {
            s.insert(v);
        }
        s
    }

    /// Rejects indices outside the universe; repeated indices count once.
    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(universe);
        for v in indices {
            if v >= universe {
                return invalid(format!("vertex {v} outside universe of size {universe}"));
            }
            s.insert(v);
        }
        Ok(s)
    }

    /// Parses indices separated by commas, whitespace or newlines.
    pub fn parse_list(universe: usize, text: &str) -> Result<Self> {
        let indices = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad vertex index `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(universe, indices)
    }

    /// Uniform random subset of the given size.
    pub fn random<R: Rng + ?Sized>(universe: usize, size: usize, rng: &mut R) -> Result<Self> {
        if size > universe {
            return invalid(format!("subset size {size} exceeds universe {universe}"));
        }
        Self::from_indices(universe, index::sample(rng, universe, size))
    }

    /// [`VertexSubset::random`] driven by a ChaCha8 generator seeded with `seed`.
    pub fn seeded(universe: usize, size: usize, seed: u64) -> Result<Self> {
        Self::random(universe, size, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    /// Returns whether `v` was newly added.
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.universe, "vertex {v} outside universe {}", self.universe);
        let fresh = !self.contains(v);
        if fresh {
            self.words[v / 64] |= 1 << (v % 64);
            self.size += 1;
        }
        fresh
    }

    /// Returns whether `v` was present.
    pub fn remove(&mut self, v: usize) -> bool {
        let present = self.contains(v);
        if present {
            self.words[v / 64] &= !(1 << (v % 64));
            self.size -= 1;
        }
        present
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn complement(&self) -> VertexSubset {
        let mut c = VertexSubset::full(self.universe);
        for v in self.iter() {
            c.remove(v);
        }
        c
    }
}

impl Serialize for VertexSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("VertexSubset", 3)?;
        st.serialize_field("universe", &self.universe)?;
        st.serialize_field("size", &self.size)?;
        st.serialize_field("vertices", &self.to_vec())?;
        st.end()
    }
}

/// Simple digraph: at most one arc per ordered pair, no multi-arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    num_vertices: usize,
    out_adj: Vec<Vec<usize>>,
}

impl DiGraph {
    pub fn from_arcs(num_vertices: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out_adj = vec![Vec::new(); num_vertices];
        for (a, b) in arcs {
            if a >= num_vertices || b >= num_vertices {
                return invalid(format!("arc {a} -> {b} outside {num_vertices} vertices"));
            }
            out_adj[a].push(b);
        }
        for (v, adj) in out_adj.iter_mut().enumerate() {
            adj.sort_unstable();
            if adj.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("duplicate arc out of vertex {v}"));
            }
        }
        Ok(DiGraph { num_vertices, out_adj })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_arcs(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn out_adj(&self) -> &[Vec<usize>] {
        &self.out_adj
    }

    /// Sorted in-neighbor lists.
    pub fn in_adj(&self) -> Vec<Vec<usize>> {
        let mut in_adj = vec![Vec::new(); self.num_vertices];
        for (a, adj) in self.out_adj.iter().enumerate() {
            for &b in adj {
                in_adj[b].push(a);
            }
        }
        in_adj
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.out_adj[a].binary_search(&b).is_ok()
    }

    /// Graphviz rendering; members of `highlight` are filled.
    pub fn to_dot(&self, label: impl Fn(usize) -> String, highlight: Option<&VertexSubset>) -> String {
        let mut out = String::from("digraph G {\n");
        for v in 0..self.num_vertices {
            let fill = match highlight {
                Some(s) if s.contains(v) => ", style=filled, fillcolor=\"#f4a261\"",
                _ => "",
            };
            let _ = writeln!(out, "  {v} [label=\"{}\"{fill}];", label(v));
        }
        for (a, adj) in self.out_adj.iter().enumerate() {
            for b in adj {
                let _ = writeln!(out, "  {a} -> {b};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// `C_l^n`: arc `a -> b` iff `b` is `a` with one digit incremented mod `l`.
pub fn build_cycle_power(l: usize, n: usize, limits: &Limits) -> Result<DiGraph> {
    if l < 2 {
        return invalid(format!("cycle length must be at least 2, got {l}"));
    }
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let dim = limits.check_dim(l, n)?;
    let mut arcs = Vec::with_capacity(dim * n);
    for v in 0..dim {
        let code = VertexCode::from_index(l, n, v);
        for j in 0..n {
            let mut digits = code.digits().to_vec();
            digits[j] = (digits[j] + 1) % l;
            let w = VertexCode { l, digits }.index();
            arcs.push((v, w));
        }
    }
    DiGraph::from_arcs(dim, arcs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternReport {
    pub check: &'static str,
    pub l: usize,
    pub n: usize,
    pub pass: bool,
    pub dim: usize,
    pub arcs: usize,
    /// First `(row, col)` where the two 0/1 matrices differ.
    pub first_mismatch: Option<(usize, usize)>,
    pub schema_version: u32,
}

/// Compares `|B_n|` entrywise with the adjacency matrix of `C_l^n` built
/// from digit tuples.
pub fn verify_pattern_equivalence(l: usize, n: usize, limits: &Limits) -> Result<PatternReport> {
    let graph = build_cycle_power(l, n, limits)?;
    let pattern = abs_pattern(&build_b(l, n, limits)?);
    let first_mismatch = (0..graph.num_vertices()).find_map(|i| {
        if pattern.rows[i] == graph.out_adj[i] {
            return None;
        }
        (0..graph.num_vertices())
            .find(|&j| pattern.get(i, j) != u8::from(graph.has_arc(i, j)))
            .map(|j| (i, j))
    });
    Ok(PatternReport {
        check: "abs(B_n)=M(C_l^n)",
        l,
        n,
        pass: first_mismatch.is_none(),
        dim: graph.num_vertices(),
        arcs: graph.num_arcs(),
        first_mismatch,
        schema_version: SCHEMA_VERSION,
    })
}

/// In/out degrees of the subgraph induced on a subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeStats {
    /// `(vertex, out-degree within s, in-degree within s)` for each member.
    pub per_vertex: Vec<(usize, usize, usize)>,
    pub max_out: usize,
    pub max_in: usize,
    /// `max(max_out, max_in)`.
    pub max_degree: usize,
}

pub fn induced_degree_stats(g: &DiGraph, s: &VertexSubset) -> Result<DegreeStats> {
    if s.universe() != g.num_vertices() {
        return invalid(format!(
            "subset universe {} does not match graph with {} vertices",
            s.universe(),
            g.num_vertices()
        ));
    }
    let mut in_deg = vec![0usize; g.num_vertices()];
    let mut out_deg = vec![0usize; g.num_vertices()];
    for a in s.iter() {
        for &b in g.out_neighbors(a) {
            if s.contains(b) {
                out_deg[a] += 1;
                in_deg[b] += 1;
            }
        }
    }
    let per_vertex: Vec<_> = s.iter().map(|v| (v, out_deg[v], in_deg[v])).collect();
    let max_out = per_vertex.iter().map(|p| p.1).max().unwrap_or(0);
    let max_in = per_vertex.iter().map(|p| p.2).max().unwrap_or(0);
    Ok(DegreeStats {
        per_vertex,
        max_out,
        max_in,
        max_degree: max_out.max(max_in),
    })
}

/// Union of the digit-sum classes `S_{2k+1}` over integers `0 <= k < (l-1)/2`.
pub fn referee_independent_set(l: usize, m: usize, limits: &Limits) -> Result<VertexSubset> {
    if l < 2 {
        return invalid(format!("cycle length must be at least 2, got {l}"));
    }
    if m == 0 {
        return invalid("m must be at least 1");
    }
    let dim = limits.check_dim(l, m)?;
    // k < (l-1)/2  <=>  2k < l-1
    let classes: Vec<usize> = (0..).take_while(|k| 2 * k < l - 1).map(|k| 2 * k + 1).collect();
    let members = (0..dim).filter(|&v| {
        let r = VertexCode::from_index(l, m, v).digit_sum() % l;
        classes.contains(&r)
    });
    VertexSubset::from_indices(dim, members)
}

pub fn verify_independent(g: &DiGraph, s: &VertexSubset) -> Result<bool> {
    Ok(induced_degree_stats(g, s)?.max_degree == 0)
}
