//! α-hyperedges and the partite allocation graphs built from them.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, PlayerIx, ResourceIx};
use crate::lp::{subsets::minimal_sets, ClpCaps};
use crate::rational::{fmt_exact, Rational};
use crate::topology::{Graph, GraphDocument, PartitionedGraph};

/// An inclusion-minimal coveted set of value at least `αT`, tagged with the
/// player it belongs to. The same set under two owners is two hyperedges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlphaHyperedge {
    pub owner: PlayerIx,
    pub resources: Vec<ResourceIx>,
    pub is_fat: bool,
}

impl AlphaHyperedge {
    pub fn intersects(&self, other: &AlphaHyperedge) -> bool {
        // both lists are sorted
        let (mut i, mut j) = (0, 0);
        while i < self.resources.len() && j < other.resources.len() {
            match self.resources[i].cmp(&other.resources[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// `owner:r1,r2,...` with resource ids in order.
    pub fn descriptor(&self, inst: &Instance) -> String {
        let ids: Vec<&str> = self
            .resources
            .iter()
            .map(|&r| inst.resources()[r].id.as_str())
            .collect();
        format!("{}:{}", inst.players()[self.owner], ids.join(","))
    }
}

fn threshold(target: &Rational, alpha: &Rational) -> Result<Rational> {
    if !target.is_positive() || !alpha.is_positive() {
        return Err(Error::OutOfRange("target and alpha must be positive".into()));
    }
    Ok(alpha * target)
}

fn check_covets(inst: &Instance, p: PlayerIx, caps: ClpCaps) -> Result<()> {
    let len = inst.covets(p).len();
    if len > caps.max_covets {
        return Err(Error::CapExceeded {
            what: "covet list length",
            actual: len,
            cap: caps.max_covets,
        });
    }
    Ok(())
}

/// All α-hyperedges of player `p`, in lexicographic order of resource sets.
pub fn enumerate_alpha_hyperedges(
    inst: &Instance,
    target: &Rational,
    alpha: &Rational,
    p: PlayerIx,
    caps: ClpCaps,
) -> Result<Vec<AlphaHyperedge>> {
    let theta = threshold(target, alpha)?;
    check_covets(inst, p, caps)?;
    let items: Vec<(ResourceIx, Rational)> = inst
        .covets(p)
        .iter()
        .map(|&r| (r, inst.resource_value(r).clone()))
        .collect();
    let edges: Vec<AlphaHyperedge> = minimal_sets(&items, &theta)
        .into_iter()
        .map(|resources| AlphaHyperedge {
            owner: p,
            is_fat: resources.len() == 1,
            resources,
        })
        .collect();
    for e in &edges {
        let total = inst.value(&e.resources);
        let minimal = e
            .resources
            .iter()
            .all(|r| &total - inst.resource_value(*r) < theta);
        if total < theta || !minimal {
            return Err(Error::Internal(format!(
                "enumerated set {} is not a minimal α-hyperedge",
                e.descriptor(inst)
            )));
        }
    }
    Ok(edges)
}

/// `F(α)`: resources that are α-hyperedges on their own.
pub fn fat_set(inst: &Instance, target: &Rational, alpha: &Rational) -> Result<Vec<ResourceIx>> {
    let theta = threshold(target, alpha)?;
    Ok((0..inst.num_resources())
        .filter(|&r| *inst.resource_value(r) >= theta)
        .collect())
}

/// The partite graph whose vertex `i` is `vertices[i]` and whose class for
/// `players[k]` is the set of vertices owned by that player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationGraph {
    pub alpha: Rational,
    pub target: Rational,
    pub players: Vec<PlayerIx>,
    pub vertices: Vec<AlphaHyperedge>,
    pub graph: Graph,
}

impl AllocationGraph {
    /// `H(α)` over all players.
    pub fn build_h(inst: &Instance, target: &Rational, alpha: &Rational, caps: ClpCaps) -> Result<Self> {
        let mut vertices = Vec::new();
        for p in 0..inst.num_players() {
            vertices.extend(enumerate_alpha_hyperedges(inst, target, alpha, p, caps)?);
        }
        Ok(Self::from_vertices(
            alpha.clone(),
            target.clone(),
            (0..inst.num_players()).collect(),
            vertices,
        ))
    }

    fn from_vertices(
        alpha: Rational,
        target: Rational,
        players: Vec<PlayerIx>,
        vertices: Vec<AlphaHyperedge>,
    ) -> Self {
        let mut edges = Vec::new();
        for (i, e) in vertices.iter().enumerate() {
            for (j, f) in vertices.iter().enumerate().skip(i + 1) {
                if e.owner != f.owner && e.intersects(f) {
                    edges.push((i, j));
                }
            }
        }
        let graph = Graph::new(0..vertices.len(), edges).expect("vertex ids are in range");
        AllocationGraph {
            alpha,
            target,
            players,
            vertices,
            graph,
        }
    }

    /// `J(α)`: drops every fat vertex (the fat cliques).
    pub fn build_j(&self) -> Self {
        let thin = self.vertices.iter().filter(|e| !e.is_fat).cloned().collect();
        Self::from_vertices(self.alpha.clone(), self.target.clone(), self.players.clone(), thin)
    }

    /// The subgraph induced by the classes of `players`, renumbered.
    pub fn restrict(&self, players: &[PlayerIx]) -> Self {
        let keep: BTreeSet<PlayerIx> = players.iter().copied().collect();
        let vertices = self
            .vertices
            .iter()
            .filter(|e| keep.contains(&e.owner))
            .cloned()
            .collect();
        Self::from_vertices(
            self.alpha.clone(),
            self.target.clone(),
            keep.into_iter().collect(),
            vertices,
        )
    }

    /// Vertex ids of each class, in `players` order.
    pub fn parts(&self) -> Vec<Vec<usize>> {
        self.players
            .iter()
            .map(|&p| {
                self.vertices
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.owner == p)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }

    pub fn partitioned(&self) -> PartitionedGraph {
        PartitionedGraph {
            graph: self.graph.clone(),
            parts: self.parts(),
        }
    }

    pub fn resources_of(&self, v: usize) -> &[ResourceIx] {
        &self.vertices[v].resources
    }

    pub fn to_document(&self, inst: &Instance) -> GraphDocument {
        let name = |v: usize| self.vertices[v].descriptor(inst);
        let mut doc = GraphDocument::from_graph(&self.graph, name);
        doc.parts = Some(
            self.parts()
                .into_iter()
                .map(|class| class.into_iter().map(name).collect())
                .collect(),
        );
        doc.alpha = Some(fmt_exact(&self.alpha));
        doc.target = Some(fmt_exact(&self.target));
        doc
    }

    /// The allocation giving each player the resources of its chosen vertex.
    pub fn transversal_to_allocation(&self, inst: &Instance, transversal: &[usize]) -> Result<Allocation> {
        let mut alloc = Allocation::empty(inst.num_players());
        for &v in transversal {
            let e = &self.vertices[v];
            if !alloc.assignment[e.owner].is_empty() {
                return Err(Error::Hypothesis(format!(
                    "two chosen vertices belong to `{}`",
                    inst.players()[e.owner]
                )));
            }
            alloc.assignment[e.owner] = e.resources.clone();
        }
        alloc.validate(inst)?;
        Ok(alloc)
    }
}

/// `m(α)`, the largest value of a coveted set that falls short of `αT`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MAlpha {
    #[serde(with = "crate::rational::serde_exact")]
    pub m: Rational,
}

impl MAlpha {
    pub fn is_block(&self, inst: &Instance, set: &[ResourceIx]) -> bool {
        inst.value(set) <= self.m
    }
}

pub fn compute_m(inst: &Instance, target: &Rational, alpha: &Rational, caps: ClpCaps) -> Result<MAlpha> {
    let theta = threshold(target, alpha)?;
    let mut best = Rational::zero();
    for p in 0..inst.num_players() {
        check_covets(inst, p, caps)?;
        let mut values: Vec<Rational> = inst.covets(p).iter().map(|&r| inst.resource_value(r).clone()).collect();
        values.sort_by(|a, b| b.cmp(a));
        best = best.max(max_sum_below(&values, &theta));
    }
    debug_assert!(best < theta);
    Ok(MAlpha { m: best })
}

/// Largest subset sum strictly below `limit`; values sorted non-increasing.
fn max_sum_below(values: &[Rational], limit: &Rational) -> Rational {
    let mut suffix = vec![Rational::zero(); values.len() + 1];
    for i in (0..values.len()).rev() {
        suffix[i] = &suffix[i + 1] + &values[i];
    }
    let mut best = Rational::zero();
    fn walk(values: &[Rational], suffix: &[Rational], limit: &Rational, i: usize, sum: Rational, best: &mut Rational) {
        if sum > *best {
            *best = sum.clone();
        }
        if i == values.len() || &sum + &suffix[i] <= *best {
            return;
        }
        let with = &sum + &values[i];
        if with < *limit {
            walk(values, suffix, limit, i + 1, with, best);
        }
        walk(values, suffix, limit, i + 1, sum, best);
    }
    walk(values, &suffix, limit, 0, Rational::zero(), &mut best);
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransversalCaps {
    pub max_vertices: usize,
    pub max_parts: usize,
}

impl Default for TransversalCaps {
    fn default() -> Self {
        TransversalCaps {
            max_vertices: 60,
            max_parts: 8,
        }
    }
}

/// An independent set with exactly one vertex in each class, listed in class
/// order, or `None` when no such set exists.
pub fn find_independent_transversal(pg: &PartitionedGraph, caps: TransversalCaps) -> Result<Option<Vec<usize>>> {
    let vertices: usize = pg.parts.iter().map(Vec::len).sum();
    if vertices > caps.max_vertices {
        return Err(Error::CapExceeded {
            what: "transversal search vertices",
            actual: vertices,
            cap: caps.max_vertices,
        });
    }
    if pg.parts.len() > caps.max_parts {
        return Err(Error::CapExceeded {
            what: "transversal search parts",
            actual: pg.parts.len(),
            cap: caps.max_parts,
        });
    }
    let mut order: Vec<usize> = (0..pg.parts.len()).collect();
    order.sort_by_key(|&i| (pg.parts[i].len(), i));
    let mut chosen = vec![usize::MAX; pg.parts.len()];
    if pick(pg, &order, 0, &mut chosen) {
        Ok(Some(chosen))
    } else {
        Ok(None)
    }
}

fn pick(pg: &PartitionedGraph, order: &[usize], depth: usize, chosen: &mut [usize]) -> bool {
    let Some(&class) = order.get(depth) else {
        return true;
    };
    for &v in &pg.parts[class] {
        let clash = order[..depth].iter().any(|&c| {
            let u = chosen[c];
            u == v || pg.graph.has_edge(crate::topology::Edge::new(u, v))
        });
        if clash {
            continue;
        }
        chosen[class] = v;
        if pick(pg, order, depth + 1, chosen) {
            return true;
        }
    }
    chosen[class] = usize::MAX;
    false
}
