//! Independence complexes and their reduced homology over GF(2).
//!
//! Simplices are bitmasks over the graph's vertices (in increasing id order).
//! The chain complex is augmented by the empty simplex in dimension −1, so
//! ranks come out reduced.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::topology::graph::Graph;

/// Extended non-negative integer with ∞ on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Eta {
    Finite(u32),
    Infinite,
}

impl Eta {
    pub fn plus(self, k: u32) -> Eta {
        match self {
            Eta::Finite(n) => Eta::Finite(n + k),
            Eta::Infinite => Eta::Infinite,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Eta::Infinite
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Finite(n) => write!(f, "{n}"),
            Eta::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Eta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Eta::Finite(n) => s.serialize_u32(*n),
            Eta::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaCaps {
    pub max_vertices: usize,
    /// Largest number of simplices held in one dimension.
    pub max_level: usize,
}

impl Default for EtaCaps {
    fn default() -> Self {
        EtaCaps {
            max_vertices: 24,
            max_level: 4_000_000,
        }
    }
}

/// Abstract simplicial complex given by its facets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    pub vertices: Vec<usize>,
    pub facets: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    pub fn dimension(&self) -> Option<usize> {
        self.facets.iter().map(|f| f.len()).max().map(|n| n - 1)
    }
}

/// Facets of the independence complex: the maximal independent sets,
/// listed as maximal cliques of the complement (Bron–Kerbosch with pivot).
pub fn independence_complex(g: &Graph, caps: &EtaCaps) -> Result<SimplicialComplex> {
    check_size(g, caps)?;
    let (order, adj) = g.masks();
    let n = order.len();
    let full = full_mask(n);
    let co: Vec<u64> = (0..n).map(|i| !adj[i] & full & !(1 << i)).collect();
    let mut facets = Vec::new();
    if n > 0 {
        bron_kerbosch(&co, 0, full, 0, &mut facets);
    }
    let mut facets: Vec<Vec<usize>> = facets
        .into_iter()
        .map(|mask| bits(mask).map(|i| order[i]).collect())
        .collect();
    facets.sort();
    Ok(SimplicialComplex {
        vertices: order,
        facets,
    })
}

fn bron_kerbosch(nbr: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    let pivot = bits(p | x).max_by_key(|&u| (nbr[u] & p).count_ones()).expect("p | x nonempty");
    let mut candidates = p & !nbr[pivot];
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        bron_kerbosch(nbr, r | 1 << v, p & nbr[v], x & nbr[v], out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

/// Ranks of the reduced homology groups, from dimension −1 upward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyProfile {
    /// `ranks[k]` is the rank of H̃_{k−1}.
    pub ranks: Vec<usize>,
}

impl HomologyProfile {
    pub fn rank(&self, dim: isize) -> usize {
        usize::try_from(dim + 1)
            .ok()
            .and_then(|k| self.ranks.get(k).copied())
            .unwrap_or(0)
    }

    pub fn eta(&self) -> Eta {
        self.ranks
            .iter()
            .position(|&r| r != 0)
            .map_or(Eta::Infinite, |k| Eta::Finite(k as u32))
    }
}

/// Full reduced homology profile of the independence complex of `g`.
pub fn reduced_homology(g: &Graph, caps: &EtaCaps) -> Result<HomologyProfile> {
    let mut ranks = Vec::new();
    walk_levels(g, caps, |_, betti| {
        ranks.push(betti);
        true
    })?;
    Ok(HomologyProfile { ranks })
}

/// `η(g)`: one plus the first dimension with nonzero reduced homology.
pub fn eta(g: &Graph, caps: &EtaCaps) -> Result<Eta> {
    check_size(g, caps)?;
    if g.is_empty() {
        return Ok(Eta::Finite(0));
    }
    if g.has_isolated_vertex() {
        // the complex is a cone, hence acyclic
        return Ok(Eta::Infinite);
    }
    let mut found = None;
    walk_levels(g, caps, |k, betti| {
        if betti != 0 {
            found = Some(k as u32);
            false
        } else {
            true
        }
    })?;
    Ok(found.map_or(Eta::Infinite, Eta::Finite))
}

/// Whether `η(g) ≥ k`, computing homology only up to dimension `k − 2`.
pub fn eta_at_least(g: &Graph, k: u32, caps: &EtaCaps) -> Result<bool> {
    check_size(g, caps)?;
    if k == 0 {
        return Ok(true);
    }
    if g.is_empty() {
        return Ok(false);
    }
    if g.has_isolated_vertex() {
        return Ok(true);
    }
    let mut holds = true;
    walk_levels(g, caps, |level, betti| {
        if level as u32 >= k {
            return false;
        }
        if betti != 0 {
            holds = false;
            return false;
        }
        true
    })?;
    Ok(holds)
}

/// Calls `visit(k, rank H̃_{k−1})` for k = 0, 1, … until it returns false or
/// the complex runs out of simplices.
fn walk_levels(g: &Graph, caps: &EtaCaps, mut visit: impl FnMut(usize, usize) -> bool) -> Result<()> {
    check_size(g, caps)?;
    let (_, adj) = g.masks();
    let n = adj.len();
    // level k holds the simplices with k vertices; level 0 is the empty simplex
    let mut lower: Vec<u64> = vec![0];
    let mut current: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    // rank of the boundary map from `lower` into the level below it
    let mut rank_below = 0;
    let mut k = 0;
    loop {
        let rank_here = boundary_rank(&current, &lower);
        let betti = lower.len() - rank_below - rank_here;
        if !visit(k, betti) {
            return Ok(());
        }
        if current.is_empty() {
            return Ok(());
        }
        let next = extend(&current, &adj, caps)?;
        lower = current;
        current = next;
        rank_below = rank_here;
        k += 1;
    }
}

/// Simplices one dimension up: add a vertex above the current maximum that is
/// not adjacent to any member.
fn extend(level: &[u64], adj: &[u64], caps: &EtaCaps) -> Result<Vec<u64>> {
    let n = adj.len();
    let mut out = Vec::new();
    for &s in level {
        let top = 63 - s.leading_zeros() as usize;
        let blocked = bits(s).fold(0u64, |acc, i| acc | adj[i]);
        for v in top + 1..n {
            if blocked >> v & 1 == 0 {
                out.push(s | 1 << v);
            }
        }
        if out.len() > caps.max_level {
            return Err(Error::CapExceeded {
                what: "simplices in one dimension",
                actual: out.len(),
                cap: caps.max_level,
            });
        }
    }
    Ok(out)
}

/// GF(2) rank of the boundary map from `upper` to `lower` by column reduction.
fn boundary_rank(upper: &[u64], lower: &[u64]) -> usize {
    if upper.is_empty() || lower.is_empty() {
        return 0;
    }
    let index: HashMap<u64, u32> = lower.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    // pivot row -> reduced column owning it
    let mut pivots: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut rank = 0;
    for &s in upper {
        let mut col: Vec<u32> = bits(s).map(|v| index[&(s & !(1u64 << v))]).collect();
        col.sort_unstable_by(|a, b| b.cmp(a));
        while let Some(&low) = col.first() {
            match pivots.get(&low) {
                Some(other) => col = xor_desc(&col, other),
                None => break,
            }
        }
        if let Some(&low) = col.first() {
            pivots.insert(low, col);
            rank += 1;
        }
    }
    rank
}

/// Symmetric difference of two strictly decreasing index lists.
fn xor_desc(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Greater => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Less => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_size(g: &Graph, caps: &EtaCaps) -> Result<()> {
    let cap = caps.max_vertices.min(64);
    if g.num_vertices() > cap {
        return Err(Error::CapExceeded {
            what: "graph vertices for homology",
            actual: g.num_vertices(),
            cap,
        });
    }
    Ok(())
}

/// η evaluator with a shared memo table. Lookups and inserts each take the
/// lock once, so concurrent callers see atomic cache operations.
#[derive(Debug, Default)]
pub struct EtaEngine {
    pub caps: EtaCaps,
    cache: Mutex<HashMap<Graph, Eta>>,
}

impl EtaEngine {
    pub fn new(caps: EtaCaps) -> Self {
        EtaEngine {
            caps,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn eta(&self, g: &Graph) -> Result<Eta> {
        if let Some(&hit) = self.cache.lock().expect("eta cache poisoned").get(g) {
            return Ok(hit);
        }
        let value = eta(g, &self.caps)?;
        self.cache
            .lock()
            .expect("eta cache poisoned")
            .insert(g.clone(), value);
        Ok(value)
    }

    pub fn at_least(&self, g: &Graph, k: u32) -> Result<bool> {
        if let Some(&hit) = self.cache.lock().expect("eta cache poisoned").get(g) {
            return Ok(hit >= Eta::Finite(k));
        }
        eta_at_least(g, k, &self.caps)
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("eta cache poisoned").len()
    }
}
