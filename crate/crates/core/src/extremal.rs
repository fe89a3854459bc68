//! Checking the induced-degree bound on `C_l^n` over subsets of size
//! `(l-1) l^{n-1} + 1`, and searching for low-degree induced subgraphs.
//!
//! Work is cut into fixed-size chunks that do not depend on the worker
//! count, and chunk results are merged in chunk order, so reports are
//! identical for any number of threads.

use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclegraph::{build_cycle_power, induced_degree_stats, referee_independent_set, VertexSubset};
use crate::error::{invalid, Error, Result};
use crate::limits::Limits;
use crate::SCHEMA_VERSION;

const ENUM_CHUNK: u128 = 1 << 15;
const SAMPLE_CHUNK: u64 = 1 << 10;

/// `n^{1/l}` and its integer ceiling (exact, not via rounding).
pub fn degree_bound(l: usize, n: usize) -> (f64, usize) {
    let approx = (n as f64).powf(1.0 / l as f64);
    let pow_at_least_n = |c: usize| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..l {
            acc = acc.saturating_mul(c as u128);
        }
        acc >= n as u128
    };
    let mut c = approx.ceil() as usize;
    while c > 0 && pow_at_least_n(c - 1) {
        c -= 1;
    }
    while !pow_at_least_n(c) {
        c += 1;
    }
    let exact = {
        let mut acc: u128 = 1;
        for _ in 0..l {
            acc = acc.saturating_mul(c as u128);
        }
        acc == n as u128
    };
    (if exact { c as f64 } else { approx }, c)
}

/// `(l-1) l^{n-1} + 1`.
pub fn threshold_size(l: usize, n: usize) -> usize {
    (l - 1) * l.pow(n as u32 - 1) + 1
}

/// Saturating binomial coefficient.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub l: usize,
    pub n: usize,
    pub threshold_size: usize,
    /// `n^{1/l}`.
    pub bound: f64,
    pub ceil_bound: usize,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub subsets_checked: u128,
    /// Minimum over checked subsets of the induced `max(out, in)` degree.
    pub min_max_degree: usize,
    pub theorem_holds: bool,
    pub counterexample: Option<VertexSubset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub schema_version: u32,
}

impl TheoremReport {
    /// The report with wall-clock timing removed, for byte-stable output.
    pub fn without_timing(mut self) -> Self {
        self.elapsed_ms = None;
        self
    }
}

/// Adjacency in compact form for the hot loops.
struct Adjacency {
    dim: usize,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
}

impl Adjacency {
    fn new(l: usize, n: usize, limits: &Limits) -> Result<Self> {
        let g = build_cycle_power(l, n, limits)?;
        let to32 = |adj: &[Vec<usize>]| -> Vec<Vec<u32>> {
            adj.iter().map(|a| a.iter().map(|&v| v as u32).collect()).collect()
        };
        Ok(Adjacency {
            dim: g.num_vertices(),
            out_adj: to32(g.out_adj()),
            in_adj: to32(&g.in_adj()),
        })
    }

    /// Induced `max(out, in)` over members, stopping early once it reaches `cap`.
    fn max_degree_capped(&self, members: &[usize], bits: &Bits, cap: usize) -> usize {
        let mut best = 0;
        for &v in members {
            let out = self.out_adj[v].iter().filter(|&&w| bits.get(w as usize)).count();
            let inn = self.in_adj[v].iter().filter(|&&w| bits.get(w as usize)).count();
            best = best.max(out).max(inn);
            if best >= cap {
                break;
            }
        }
        best
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
}

/// Minimum and first counterexample found in one chunk.
struct ChunkOutcome {
    min_max_degree: usize,
    counterexample: Option<Vec<usize>>,
}

fn merge(outcomes: Vec<ChunkOutcome>) -> (usize, Option<Vec<usize>>) {
    let min = outcomes.iter().map(|o| o.min_max_degree).min().unwrap_or(usize::MAX);
    let cex = outcomes.into_iter().find_map(|o| o.counterexample);
    (min, cex)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Combination of colex rank `rank` among `k`-subsets.
fn colex_unrank(mut rank: u128, k: usize) -> Vec<usize> {
    let mut comb = vec![0; k];
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= rank
        let mut c = i - 1;
        while binomial(c + 1, i) <= rank {
            c += 1;
        }
        comb[i - 1] = c;
        rank -= binomial(c, i);
    }
    comb
}

/// Advance to the colex successor, keeping `bits` in sync. Returns false
/// after the last combination.
fn colex_next(comb: &mut [usize], universe: usize, bits: &mut Bits) -> bool {
    let k = comb.len();
    let mut j = 0;
    while j < k {
        let limit = if j + 1 < k { comb[j + 1] } else { universe };
        if comb[j] + 1 < limit {
            break;
        }
        j += 1;
    }
    if j == k {
        return false;
    }
    for &v in &comb[..=j] {
        bits.clear(v);
    }
    comb[j] += 1;
    for (i, slot) in comb[..j].iter_mut().enumerate() {
        *slot = i;
    }
    for &v in &comb[..=j] {
        bits.set(v);
    }
    true
}

/// Checks every subset of threshold size, in colex order.
pub fn verify_theorem_exhaustive(l: usize, n: usize, limits: &Limits, threads: usize) -> Result<TheoremReport> {
    check_ln(l, n)?;
    let start = Instant::now();
    let adj = Adjacency::new(l, n, limits)?;
    let t = threshold_size(l, n);
    let total = binomial(adj.dim, t);
    if total > limits.max_subsets {
        return Err(Error::ResourceLimit {
            what: format!("enumeration of C({}, {t}) subsets", adj.dim),
            required: total,
            limit: limits.max_subsets,
        });
    }
    let (_, ceil_bound) = degree_bound(l, n);
    let chunks = total.div_ceil(ENUM_CHUNK) as u64;
    let outcomes = with_pool(threads, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let first = c as u128 * ENUM_CHUNK;
                let count = ENUM_CHUNK.min(total - first);
                let mut comb = colex_unrank(first, t);
                let mut bits = Bits::new(adj.dim);
                comb.iter().for_each(|&v| bits.set(v));
                let mut out = ChunkOutcome {
                    min_max_degree: usize::MAX,
                    counterexample: None,
                };
                for step in 0..count {
                    if step > 0 {
                        colex_next(&mut comb, adj.dim, &mut bits);
                    }
                    let d = adj.max_degree_capped(&comb, &bits, out.min_max_degree);
                    if d < out.min_max_degree {
                        out.min_max_degree = d;
                    }
                    if d < ceil_bound && out.counterexample.is_none() {
                        out.counterexample = Some(comb.clone());
                    }
                }
                out
            })
            .collect::<Vec<_>>()
    })?;
    let (min_max_degree, cex) = merge(outcomes);
    finish_report(l, n, Mode::Exhaustive, None, total, min_max_degree, cex, adj.dim, start)
}

/// Checks `samples` uniformly random subsets of threshold size.
pub fn verify_theorem_sampled(
    l: usize,
    n: usize,
    samples: u64,
    seed: u64,
    limits: &Limits,
    threads: usize,
) -> Result<TheoremReport> {
    check_ln(l, n)?;
    if samples == 0 {
        return invalid("samples must be at least 1");
    }
    let start = Instant::now();
    let adj = Adjacency::new(l, n, limits)?;
    let t = threshold_size(l, n);
    let (_, ceil_bound) = degree_bound(l, n);
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let outcomes = with_pool(threads, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
                let mut out = ChunkOutcome {
                    min_max_degree: usize::MAX,
                    counterexample: None,
                };
                let mut bits = Bits::new(adj.dim);
                for _ in 0..count {
                    let mut members = index::sample(&mut rng, adj.dim, t).into_vec();
                    members.sort_unstable();
                    members.iter().for_each(|&v| bits.set(v));
                    let d = adj.max_degree_capped(&members, &bits, out.min_max_degree);
                    out.min_max_degree = out.min_max_degree.min(d);
                    if d < ceil_bound && out.counterexample.is_none() {
                        out.counterexample = Some(members.clone());
                    }
                    members.iter().for_each(|&v| bits.clear(v));
                }
                out
            })
            .collect::<Vec<_>>()
    })?;
    let (min_max_degree, cex) = merge(outcomes);
    finish_report(
        l,
        n,
        Mode::Sampled,
        Some(seed),
        samples as u128,
        min_max_degree,
        cex,
        adj.dim,
        start,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_report(
    l: usize,
    n: usize,
    mode: Mode,
    seed: Option<u64>,
    subsets_checked: u128,
    min_max_degree: usize,
    counterexample: Option<Vec<usize>>,
    dim: usize,
    start: Instant,
) -> Result<TheoremReport> {
    let (bound, ceil_bound) = degree_bound(l, n);
    let counterexample = counterexample.map(|c| VertexSubset::from_indices(dim, c)).transpose()?;
    Ok(TheoremReport {
        l,
        n,
        threshold_size: threshold_size(l, n),
        bound,
        ceil_bound,
        mode,
        seed,
        subsets_checked,
        min_max_degree,
        theorem_holds: min_max_degree >= ceil_bound,
        counterexample,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
        schema_version: SCHEMA_VERSION,
    })
}

fn check_ln(l: usize, n: usize) -> Result<()> {
    if l < 2 {
        return invalid(format!("cycle length must be at least 2, got {l}"));
    }
    if n == 0 {
        return invalid("n must be at least 1");
    }
    Ok(())
}

/// Starting point of a local-search chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchInit {
    Random,
    /// The digit-sum independent set, padded or truncated at random.
    Referee,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub size: usize,
    /// Proposed swaps per chain.
    pub iters: u64,
    pub seed: u64,
    pub init: SearchInit,
    /// Independent chains; the best one wins, ties to the lowest index.
    pub restarts: usize,
    /// Restart a chain from a fresh random subset after this many
    /// iterations without lowering its objective; 0 disables.
    pub stall: u64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub l: usize,
    pub n: usize,
    pub target_size: usize,
    pub init: SearchInit,
    /// Re-checked with [`induced_degree_stats`].
    pub best_max_degree: usize,
    pub best_subset: VertexSubset,
    pub iterations: u64,
    pub restarts: usize,
    pub best_chain: usize,
    pub seed: u64,
    pub schema_version: u32,
}

/// Membership plus induced in/out counts, maintained under single-vertex moves.
struct SearchState<'a> {
    adj: &'a Adjacency,
    member: Vec<bool>,
    out_cnt: Vec<usize>,
    in_cnt: Vec<usize>,
    /// `hist[d]` = number of members with `max(out, in) = d`.
    hist: Vec<usize>,
    inside: Vec<usize>,
    outside: Vec<usize>,
    /// Position of each vertex in `inside` or `outside`.
    pos: Vec<usize>,
}

impl<'a> SearchState<'a> {
    fn new(adj: &'a Adjacency, members: &[usize], max_degree: usize) -> Self {
        let dim = adj.dim;
        let mut st = SearchState {
            adj,
            member: vec![false; dim],
            out_cnt: vec![0; dim],
            in_cnt: vec![0; dim],
            hist: vec![0; max_degree + 1],
            inside: Vec::new(),
            outside: (0..dim).collect(),
            pos: (0..dim).collect(),
        };
        for &v in members {
            st.add(v);
        }
        st
    }

    fn degree(&self, v: usize) -> usize {
        self.out_cnt[v].max(self.in_cnt[v])
    }

    fn objective(&self) -> usize {
        self.hist.iter().rposition(|&c| c > 0).unwrap_or(0)
    }

    fn bump(&mut self, w: usize, f: impl FnOnce(&mut Self)) {
        if self.member[w] {
            {
                let d = self.degree(w);
                self.hist[d] -= 1;
            }
            f(self);
            {
                let d = self.degree(w);
                self.hist[d] += 1;
            }
        } else {
            f(self);
        }
    }

    fn move_between(list_from: &mut Vec<usize>, list_to: &mut Vec<usize>, pos: &mut [usize], v: usize) {
        let i = pos[v];
        let last = *list_from.last().expect("vertex present in list");
        list_from.swap_remove(i);
        if last != v {
            pos[last] = i;
        }
        pos[v] = list_to.len();
        list_to.push(v);
    }

    fn add(&mut self, v: usize) {
        let adj = self.adj;
        Self::move_between(&mut self.outside, &mut self.inside, &mut self.pos, v);
        self.member[v] = true;
        {
            let d = self.degree(v);
            self.hist[d] += 1;
        }
        for &w in &adj.out_adj[v] {
            self.bump(w as usize, |s| s.in_cnt[w as usize] += 1);
        }
        for &w in &adj.in_adj[v] {
            self.bump(w as usize, |s| s.out_cnt[w as usize] += 1);
        }
    }

    fn remove(&mut self, v: usize) {
        let adj = self.adj;
        Self::move_between(&mut self.inside, &mut self.outside, &mut self.pos, v);
        {
            let d = self.degree(v);
            self.hist[d] -= 1;
        }
        self.member[v] = false;
        for &w in &adj.out_adj[v] {
            self.bump(w as usize, |s| s.in_cnt[w as usize] -= 1);
        }
        for &w in &adj.in_adj[v] {
            self.bump(w as usize, |s| s.out_cnt[w as usize] -= 1);
        }
    }
}

fn initial_members(
    l: usize,
    n: usize,
    size: usize,
    init: SearchInit,
    rng: &mut ChaCha8Rng,
    limits: &Limits,
) -> Result<Vec<usize>> {
    let dim = limits.check_dim(l, n)?;
    match init {
        SearchInit::Random => Ok(index::sample(rng, dim, size).into_vec()),
        SearchInit::Referee => {
            let base = referee_independent_set(l, n, limits)?;
            let mut members = base.to_vec();
            if members.len() > size {
                let keep = index::sample(rng, members.len(), size);
                members = keep.into_iter().map(|i| members[i]).collect();
            } else {
                let rest = base.complement().to_vec();
                let extra = index::sample(rng, rest.len(), size - members.len());
                members.extend(extra.into_iter().map(|i| rest[i]));
            }
            Ok(members)
        }
    }
}

/// Local search for a subset of the given size with small induced
/// `max(out, in)` degree. Swaps that do not increase the objective are
/// accepted.
pub fn search_min_max_degree(l: usize, n: usize, config: &SearchConfig, limits: &Limits) -> Result<SearchResult> {
    check_ln(l, n)?;
    let adj = Adjacency::new(l, n, limits)?;
    if config.size == 0 || config.size > adj.dim {
        return invalid(format!("size must be in 1..={}, got {}", adj.dim, config.size));
    }
    if config.restarts == 0 {
        return invalid("restarts must be at least 1");
    }
    let chains = with_pool(config.threads, || {
        (0..config.restarts)
            .into_par_iter()
            .map(|r| -> Result<(usize, Vec<usize>)> {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(r as u64);
                let start = initial_members(l, n, config.size, config.init, &mut rng, limits)?;
                Ok(run_chain(&adj, n, &start, config, &mut rng))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let (best_chain, (objective, members)) = chains
        .into_iter()
        .enumerate()
        .min_by_key(|(i, (obj, _))| (*obj, *i))
        .expect("at least one chain");
    let best_subset = VertexSubset::from_indices(adj.dim, members)?;
    let g = build_cycle_power(l, n, limits)?;
    let certified = induced_degree_stats(&g, &best_subset)?.max_degree;
    assert_eq!(certified, objective, "incremental objective disagrees with recount");
    Ok(SearchResult {
        l,
        n,
        target_size: config.size,
        init: config.init,
        best_max_degree: certified,
        best_subset,
        iterations: config.iters,
        restarts: config.restarts,
        best_chain,
        seed: config.seed,
        schema_version: SCHEMA_VERSION,
    })
}

fn run_chain(
    adj: &Adjacency,
    n: usize,
    start: &[usize],
    config: &SearchConfig,
    rng: &mut ChaCha8Rng,
) -> (usize, Vec<usize>) {
    let mut st = SearchState::new(adj, start, n);
    let mut current = st.objective();
    let mut best = (current, st.inside.clone());
    let mut since_drop = 0;
    for _ in 0..config.iters {
        if best.0 == 0 || st.inside.is_empty() || st.outside.is_empty() {
            break;
        }
        if config.stall > 0 && since_drop >= config.stall {
            let fresh = index::sample(rng, adj.dim, config.size).into_vec();
            st = SearchState::new(adj, &fresh, n);
            current = st.objective();
            since_drop = 0;
            if current < best.0 {
                best = (current, st.inside.clone());
            }
            continue;
        }
        let u = st.inside[rng.random_range(0..st.inside.len())];
        let v = st.outside[rng.random_range(0..st.outside.len())];
        st.remove(u);
        st.add(v);
        let obj = st.objective();
        since_drop += 1;
        if obj <= current {
            if obj < current {
                since_drop = 0;
            }
            current = obj;
            if obj < best.0 {
                best = (obj, st.inside.clone());
            }
        } else {
            st.remove(v);
            st.add(u);
        }
    }
    best.1.sort_unstable();
    best
}
