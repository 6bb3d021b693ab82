//! Bounded depth-first search for DE-sequences meeting an objective.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::de::{classify_edge, min_cover, CoverWeight, DeSequence, DeStep};
use super::graph::Graph;
use super::homology::EtaEngine;
use crate::allocation_graph::AlphaHyperedge;
use crate::error::{Error, Result};
use crate::instance::{Instance, PlayerIx, ResourceIx};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    /// Reach a graph with an isolated vertex.
    Ko,
    /// Reach a graph without edges.
    AnyToEdgeless,
    /// At least one explosion and a cover of value at most `2mℓ`.
    Cheap { m: Rational },
    /// At least one explosion and a cover of at most `γℓ` resources.
    Gamma { gamma: Rational },
    KoOrCheap { m: Rational },
    /// Every explosion pairs a vertex of `owner` whose hyperedge lies in
    /// `region` with some neighbor; at least one explosion; average cover
    /// size at most `max_average`.
    BasedIn {
        owner: PlayerIx,
        region: BTreeSet<ResourceIx>,
        max_average: Rational,
    },
}

impl Objective {
    fn prefers_deletions(&self) -> bool {
        matches!(self, Objective::Ko | Objective::AnyToEdgeless)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub max_nodes: usize,
    pub max_steps: Option<usize>,
    pub max_explosions: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 20_000,
            max_steps: None,
            max_explosions: None,
        }
    }
}

/// What the objectives that price covers need to know about vertices.
#[derive(Debug, Clone, Copy)]
pub struct SearchContext<'a> {
    pub engine: &'a EtaEngine,
    pub hyperedges: Option<&'a [AlphaHyperedge]>,
    pub instance: Option<&'a Instance>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found {
    pub seq: DeSequence,
    pub end: Graph,
    /// Cheapest cover under the objective's pricing (empty for KO and
    /// edgeless objectives).
    pub cover: Vec<ResourceIx>,
    pub ko: bool,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Found),
    /// Every legal sequence was examined: none meets the objective.
    Exhausted { nodes: usize },
    /// The node budget or a step limit cut the search short.
    BudgetExhausted { nodes: usize },
}

impl SearchOutcome {
    pub fn found(self) -> Option<Found> {
        match self {
            SearchOutcome::Found(f) => Some(f),
            _ => None,
        }
    }
}

struct Search<'a> {
    start: &'a Graph,
    objective: &'a Objective,
    budget: SearchBudget,
    ctx: SearchContext<'a>,
    seen: HashSet<(Graph, usize)>,
    nodes: usize,
    truncated: bool,
    steps: Vec<DeStep>,
}

enum Verdict {
    Met { cover: Vec<ResourceIx>, ko: bool },
    NotMet,
}

pub fn search_de_sequence(
    start: &Graph,
    objective: &Objective,
    budget: SearchBudget,
    ctx: SearchContext<'_>,
) -> Result<SearchOutcome> {
    let needs_hyperedges = !matches!(objective, Objective::Ko | Objective::AnyToEdgeless);
    if needs_hyperedges && ctx.hyperedges.is_none() {
        return Err(Error::Hypothesis("objective needs vertex hyperedges".into()));
    }
    if matches!(objective, Objective::Cheap { .. } | Objective::KoOrCheap { .. }) && ctx.instance.is_none() {
        return Err(Error::Hypothesis("cheap objective needs the instance".into()));
    }
    let mut s = Search {
        start,
        objective,
        budget,
        ctx,
        seen: HashSet::new(),
        nodes: 0,
        truncated: false,
        steps: Vec::new(),
    };
    let hit = s.visit(start.clone(), 0)?;
    Ok(match hit {
        Some((end, cover, ko)) => SearchOutcome::Found(Found {
            seq: DeSequence::new(start, s.steps),
            end,
            cover,
            ko,
            nodes: s.nodes,
        }),
        None if s.truncated => SearchOutcome::BudgetExhausted { nodes: s.nodes },
        None => SearchOutcome::Exhausted { nodes: s.nodes },
    })
}

impl Search<'_> {
    /// On success `self.steps` holds the sequence.
    fn visit(&mut self, g: Graph, ell: usize) -> Result<Option<(Graph, Vec<ResourceIx>, bool)>> {
        if let Verdict::Met { cover, ko } = self.judge(&g, ell) {
            return Ok(Some((g, cover, ko)));
        }
        if !self.seen.insert((g.clone(), ell)) {
            return Ok(None);
        }
        if self.nodes >= self.budget.max_nodes {
            self.truncated = true;
            return Ok(None);
        }
        self.nodes += 1;
        if self.budget.max_steps.is_some_and(|cap| self.steps.len() >= cap) {
            if g.num_edges() > 0 {
                self.truncated = true;
            }
            return Ok(None);
        }
        let mut moves = Vec::new();
        for &e in g.edges() {
            let class = classify_edge(&g, e, self.ctx.engine)?;
            if class.explodable && self.explosion_allowed(e.0, e.1) {
                if self.budget.max_explosions.is_some_and(|cap| ell >= cap) {
                    self.truncated = true;
                } else {
                    moves.push(DeStep::Explode(e));
                }
            }
            if class.deletable {
                moves.push(DeStep::Delete(e));
            }
        }
        let deletions_first = self.objective.prefers_deletions();
        moves.sort_by_key(|m| (m.is_explosion() == deletions_first, m.edge()));
        for step in moves {
            let next = step.apply(&g)?;
            self.steps.push(step);
            let found = self.visit(next, ell + usize::from(step.is_explosion()))?;
            if found.is_some() {
                return Ok(found);
            }
            self.steps.pop();
        }
        Ok(None)
    }

    fn explosion_allowed(&self, a: usize, b: usize) -> bool {
        match self.objective {
            Objective::BasedIn { owner, region, .. } => {
                let edges = self.ctx.hyperedges.expect("checked on entry");
                [a, b].iter().any(|&v| {
                    edges[v].owner == *owner && edges[v].resources.iter().all(|r| region.contains(r))
                })
            }
            _ => true,
        }
    }

    fn judge(&self, g: &Graph, ell: usize) -> Verdict {
        let ko = g.has_isolated_vertex();
        let cover = |weight| min_cover(self.start, g, self.ctx.hyperedges.expect("checked on entry"), weight);
        let scaled = |q: &Rational, k: usize| q * Rational::from_integer(k.into());
        match self.objective {
            Objective::Ko if ko => Verdict::Met { cover: vec![], ko },
            Objective::AnyToEdgeless if g.num_edges() == 0 => Verdict::Met { cover: vec![], ko },
            Objective::KoOrCheap { .. } if ko => Verdict::Met { cover: vec![], ko },
            Objective::Cheap { m } | Objective::KoOrCheap { m } if ell > 0 => {
                let inst = self.ctx.instance.expect("checked on entry");
                let (value, w) = cover(CoverWeight::Value(inst));
                if value <= scaled(m, 2 * ell) {
                    Verdict::Met { cover: w, ko: false }
                } else {
                    Verdict::NotMet
                }
            }
            Objective::Gamma { gamma } if ell > 0 => {
                let (size, w) = cover(CoverWeight::Cardinality);
                if size <= scaled(gamma, ell) {
                    Verdict::Met { cover: w, ko: false }
                } else {
                    Verdict::NotMet
                }
            }
            Objective::BasedIn { max_average, .. } if ell > 0 => {
                let (size, w) = cover(CoverWeight::Cardinality);
                if size <= scaled(max_average, ell) {
                    Verdict::Met { cover: w, ko: false }
                } else {
                    Verdict::NotMet
                }
            }
            _ => Verdict::NotMet,
        }
    }
}
