//! Deletion/explosion sequences: legality, replay, and cover accounting.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::graph::{Edge, Graph, GraphDocument};
use super::homology::{Eta, EtaEngine};
use crate::allocation_graph::AlphaHyperedge;
use crate::error::{Error, Result};
use crate::instance::{Instance, ResourceIx};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeStep {
    Delete(Edge),
    Explode(Edge),
}

impl DeStep {
    pub fn edge(&self) -> Edge {
        match *self {
            DeStep::Delete(e) | DeStep::Explode(e) => e,
        }
    }

    pub fn is_explosion(&self) -> bool {
        matches!(self, DeStep::Explode(_))
    }

    pub fn apply(&self, g: &Graph) -> Result<Graph> {
        match *self {
            DeStep::Delete(e) => g.delete_edge(e),
            DeStep::Explode(e) => g.explode_edge(e),
        }
    }
}

/// Steps together with the fingerprint of the graph they start from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeSequence {
    pub start: String,
    pub steps: Vec<DeStep>,
}

impl DeSequence {
    pub fn new(start: &Graph, steps: Vec<DeStep>) -> Self {
        DeSequence {
            start: start.fingerprint(),
            steps,
        }
    }

    /// Number of explosions.
    pub fn ell(&self) -> usize {
        self.steps.iter().filter(|s| s.is_explosion()).count()
    }

    /// Applies the steps without checking legality.
    pub fn replay(&self, start: &Graph) -> Result<Graph> {
        self.steps.iter().try_fold(start.clone(), |g, s| s.apply(&g))
    }

    pub fn to_trace(&self, name: impl Fn(usize) -> String) -> Vec<TraceStep> {
        self.steps
            .iter()
            .map(|s| {
                let e = s.edge();
                TraceStep {
                    op: if s.is_explosion() { TraceOp::Explode } else { TraceOp::Delete },
                    edge: [name(e.0), name(e.1)],
                }
            })
            .collect()
    }

    pub fn from_trace(doc: &GraphDocument, trace: &[TraceStep]) -> Result<Self> {
        let index = doc.index()?;
        let lookup = |n: &String| {
            index
                .get(n.as_str())
                .copied()
                .ok_or_else(|| Error::Json(format!("trace references unknown vertex `{n}`")))
        };
        let steps = trace
            .iter()
            .map(|t| {
                let e = Edge::new(lookup(&t.edge[0])?, lookup(&t.edge[1])?);
                Ok(match t.op {
                    TraceOp::Delete => DeStep::Delete(e),
                    TraceOp::Explode => DeStep::Explode(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DeSequence {
            start: doc.to_graph()?.fingerprint(),
            steps,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceOp {
    Delete,
    Explode,
}

/// One line of a replayable JSON trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub op: TraceOp,
    pub edge: [String; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeClass {
    pub deletable: bool,
    pub explodable: bool,
    pub eta: Eta,
    pub eta_deleted: Eta,
    pub eta_exploded: Eta,
}

pub fn classify_edge(g: &Graph, e: Edge, engine: &EtaEngine) -> Result<EdgeClass> {
    let eta = engine.eta(g)?;
    let eta_deleted = engine.eta(&g.delete_edge(e)?)?;
    let eta_exploded = engine.eta(&g.explode_edge(e)?)?;
    Ok(EdgeClass {
        deletable: eta_deleted <= eta,
        explodable: eta_exploded.plus(1) <= eta,
        eta,
        eta_deleted,
        eta_exploded,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub explosion: bool,
    pub edge: (usize, usize),
    pub eta_before: Eta,
    pub eta_after: Option<Eta>,
    pub legal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Execution {
    #[serde(skip)]
    pub final_graph: Graph,
    pub valid: bool,
    pub ell: usize,
    pub eta_start: Eta,
    pub eta_final: Eta,
    /// `η(start) ≥ η(final) + ℓ`, obtained by chaining the per-step bounds
    /// and confirmed against direct computation at both ends.
    pub eta_drop_certified: bool,
    pub failed_at: Option<usize>,
    pub records: Vec<StepRecord>,
}

/// Replays `seq` from `start`, checking each step's legality. An illegal or
/// inapplicable step stops the replay and is reported by index.
pub fn execute_sequence(start: &Graph, seq: &DeSequence, engine: &EtaEngine) -> Result<Execution> {
    if seq.start != start.fingerprint() {
        return Err(Error::Hypothesis("sequence was recorded against a different graph".into()));
    }
    let eta_start = engine.eta(start)?;
    let mut g = start.clone();
    let mut eta_g = eta_start;
    let mut records = Vec::with_capacity(seq.steps.len());
    let mut failed_at = None;
    let mut ell = 0;
    for (index, step) in seq.steps.iter().enumerate() {
        let e = step.edge();
        let mut record = StepRecord {
            index,
            explosion: step.is_explosion(),
            edge: (e.0, e.1),
            eta_before: eta_g,
            eta_after: None,
            legal: false,
            reason: None,
        };
        if !g.has_edge(e) {
            record.reason = Some("edge not present".into());
            records.push(record);
            failed_at = Some(index);
            break;
        }
        let next = step.apply(&g)?;
        let eta_next = engine.eta(&next)?;
        record.eta_after = Some(eta_next);
        record.legal = if step.is_explosion() {
            eta_next.plus(1) <= eta_g
        } else {
            eta_next <= eta_g
        };
        if !record.legal {
            record.reason = Some(if step.is_explosion() {
                "explosion does not lower eta".into()
            } else {
                "deletion raises eta".into()
            });
            records.push(record);
            failed_at = Some(index);
            break;
        }
        records.push(record);
        if step.is_explosion() {
            ell += 1;
        }
        g = next;
        eta_g = eta_next;
    }
    let valid = failed_at.is_none();
    let eta_final = engine.eta(&g)?;
    let chained = records.iter().all(|r| r.legal);
    let eta_drop_certified = valid && chained && eta_start >= eta_final.plus(ell as u32);
    Ok(Execution {
        final_graph: g,
        valid,
        ell,
        eta_start,
        eta_final,
        eta_drop_certified,
        failed_at,
        records,
    })
}

/// A cover `W` of a sequence: every start vertex whose hyperedge misses `W`
/// is still present at the end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverRecord {
    pub cover: Vec<ResourceIx>,
    pub start: String,
    pub end: String,
    pub star_verified: bool,
}

/// Union of both hyperedges of every exploded edge.
pub fn basic_cover(start: &Graph, seq: &DeSequence, hyperedges: &[AlphaHyperedge]) -> Result<CoverRecord> {
    let end = seq.replay(start)?;
    let cover: BTreeSet<ResourceIx> = seq
        .steps
        .iter()
        .filter(|s| s.is_explosion())
        .flat_map(|s| {
            let e = s.edge();
            hyperedges[e.0].resources.iter().chain(&hyperedges[e.1].resources).copied()
        })
        .collect();
    let cover: Vec<ResourceIx> = cover.into_iter().collect();
    Ok(CoverRecord {
        star_verified: verify_star(start, &end, &cover, hyperedges),
        cover,
        start: start.fingerprint(),
        end: end.fingerprint(),
    })
}

pub fn verify_star(start: &Graph, end: &Graph, cover: &[ResourceIx], hyperedges: &[AlphaHyperedge]) -> bool {
    let w: BTreeSet<ResourceIx> = cover.iter().copied().collect();
    start
        .vertices()
        .iter()
        .filter(|&&v| !hyperedges[v].resources.iter().any(|r| w.contains(r)))
        .all(|&v| end.contains_vertex(v))
}

pub fn is_cheap(inst: &Instance, seq: &DeSequence, cover: &[ResourceIx], m: &Rational) -> bool {
    inst.value(cover) <= Rational::from_integer((2 * seq.ell()).into()) * m
}

pub fn is_gamma(seq: &DeSequence, cover: &[ResourceIx], gamma: &Rational) -> bool {
    Rational::from_integer(cover.len().into()) <= gamma * Rational::from_integer(seq.ell().into())
}

pub fn average_cost(seq: &DeSequence, cover: &[ResourceIx]) -> Result<Rational> {
    match seq.ell() {
        0 => Err(Error::OutOfRange("average cost of a sequence without explosions".into())),
        ell => Ok(Rational::new(cover.len().into(), ell.into())),
    }
}

/// How a cover is priced.
#[derive(Debug, Clone, Copy)]
pub enum CoverWeight<'a> {
    Value(&'a Instance),
    Cardinality,
}

impl CoverWeight<'_> {
    fn of(&self, r: ResourceIx) -> Rational {
        match self {
            CoverWeight::Value(inst) => inst.resource_value(r).clone(),
            CoverWeight::Cardinality => Rational::from_integer(1.into()),
        }
    }
}

/// Cheapest cover for going from `start` to `end`: a minimum-weight set
/// meeting the hyperedge of every vertex that disappeared.
pub fn min_cover(
    start: &Graph,
    end: &Graph,
    hyperedges: &[AlphaHyperedge],
    weight: CoverWeight<'_>,
) -> (Rational, Vec<ResourceIx>) {
    let mut gone: Vec<&[ResourceIx]> = start
        .vertices()
        .iter()
        .filter(|&&v| !end.contains_vertex(v))
        .map(|&v| hyperedges[v].resources.as_slice())
        .collect();
    gone.sort_by_key(|e| e.len());
    gone.dedup();
    let mut best: Option<(Rational, Vec<ResourceIx>)> = None;
    let mut chosen = Vec::new();
    hit(&gone, weight, &mut chosen, Rational::zero(), &mut best);
    let (cost, mut set) = best.expect("every hyperedge is nonempty, so a cover exists");
    set.sort_unstable();
    (cost, set)
}

fn hit(
    sets: &[&[ResourceIx]],
    weight: CoverWeight<'_>,
    chosen: &mut Vec<ResourceIx>,
    cost: Rational,
    best: &mut Option<(Rational, Vec<ResourceIx>)>,
) {
    if let Some((b, _)) = best {
        if cost >= *b {
            return;
        }
    }
    let open = sets.iter().find(|s| !s.iter().any(|r| chosen.contains(r)));
    let Some(open) = open else {
        *best = Some((cost, chosen.clone()));
        return;
    };
    for &r in open.iter() {
        chosen.push(r);
        hit(sets, weight, chosen, &cost + weight.of(r), best);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn engine() -> EtaEngine {
        EtaEngine::default()
    }

    #[test]
    fn c5_edges_are_deletable_only() {
        let g = Graph::cycle(5);
        for &e in g.edges() {
            let c = classify_edge(&g, e, &engine()).unwrap();
            assert!(c.deletable && !c.explodable, "{e:?}");
        }
    }

    #[test]
    fn k2_edge_is_explodable() {
        let g = Graph::complete(2);
        let c = classify_edge(&g, Edge(0, 1), &engine()).unwrap();
        assert_eq!((c.eta, c.eta_exploded), (Eta::Finite(1), Eta::Finite(0)));
        assert!(c.explodable);
    }

    #[test]
    fn empty_sequence_is_valid() {
        let g = Graph::cycle(5);
        let run = execute_sequence(&g, &DeSequence::new(&g, vec![]), &engine()).unwrap();
        assert!(run.valid && run.eta_drop_certified);
        assert_eq!(run.ell, 0);
    }

    #[test]
    fn c5_replay_reaches_p2_plus_p3() {
        let g = Graph::cycle(5);
        // delete {4,0}: leaves the path 0-1-2-3-4; its middle edge is {1,2}
        let seq = DeSequence::new(&g, vec![DeStep::Delete(Edge(0, 4)), DeStep::Delete(Edge(1, 2))]);
        let run = execute_sequence(&g, &seq, &engine()).unwrap();
        assert!(run.valid);
        let expected = Graph::new(0..5, [(0, 1), (2, 3), (3, 4)]).unwrap();
        assert_eq!(run.final_graph, expected);
        assert!(run.eta_final >= Eta::Finite(2));
        assert!(run.eta_drop_certified);
    }

    #[test]
    fn exploding_c5_edge_is_rejected_at_first_step() {
        let g = Graph::cycle(5);
        let seq = DeSequence::new(&g, vec![DeStep::Explode(Edge(0, 1))]);
        let run = execute_sequence(&g, &seq, &engine()).unwrap();
        assert!(!run.valid);
        assert_eq!(run.failed_at, Some(0));
    }

    #[test]
    fn missing_edge_is_reported_by_index() {
        let g = Graph::cycle(5);
        let seq = DeSequence::new(&g, vec![DeStep::Delete(Edge(0, 4)), DeStep::Delete(Edge(0, 4))]);
        let run = execute_sequence(&g, &seq, &engine()).unwrap();
        assert_eq!(run.failed_at, Some(1));
    }

    fn two_player_instance() -> (Instance, Vec<AlphaHyperedge>) {
        let inst = Instance::parse_document(
            "players p q\nresource a 1/2\nresource b 1/2\nresource c 1/2\ncovets p a b\ncovets q b c\n",
        )
        .unwrap();
        let edges = vec![
            AlphaHyperedge { owner: 0, resources: vec![0, 1], is_fat: false },
            AlphaHyperedge { owner: 1, resources: vec![1, 2], is_fat: false },
        ];
        (inst, edges)
    }

    #[test]
    fn single_explosion_cover() {
        let (inst, edges) = two_player_instance();
        let g = Graph::complete(2);
        let seq = DeSequence::new(&g, vec![DeStep::Explode(Edge(0, 1))]);
        let rec = basic_cover(&g, &seq, &edges).unwrap();
        assert_eq!(rec.cover, vec![0, 1, 2]);
        assert!(rec.star_verified);
        // with m = 1/2 the basic cover costs 3m, the cheapest cover only m
        assert!(inst.value(&rec.cover) <= int(3) * ratio(1, 2));
        assert!(!is_cheap(&inst, &seq, &rec.cover, &ratio(1, 2)));
        let (cost, w) = min_cover(&g, &Graph::default(), &edges, CoverWeight::Value(&inst));
        assert_eq!((cost, w.clone()), (ratio(1, 2), vec![1]));
        assert!(is_cheap(&inst, &seq, &w, &ratio(1, 2)));
        assert_eq!(average_cost(&seq, &rec.cover).unwrap(), int(3));
        assert!(is_gamma(&seq, &rec.cover, &int(3)));
        assert!(!is_gamma(&seq, &rec.cover, &ratio(5, 2)));
    }

    #[test]
    fn deletion_only_sequence_has_empty_cover() {
        let (inst, edges) = two_player_instance();
        let g = Graph::complete(2);
        let seq = DeSequence::new(&g, vec![DeStep::Delete(Edge(0, 1))]);
        let rec = basic_cover(&g, &seq, &edges).unwrap();
        assert!(rec.cover.is_empty() && rec.star_verified);
        assert!(is_cheap(&inst, &seq, &rec.cover, &ratio(1, 2)));
        assert!(average_cost(&seq, &rec.cover).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let g = Graph::cycle(5);
        let doc = GraphDocument::from_graph(&g, |v| format!("v{v}"));
        let seq = DeSequence::new(&g, vec![DeStep::Delete(Edge(0, 4)), DeStep::Explode(Edge(1, 2))]);
        let trace = seq.to_trace(|v| format!("v{v}"));
        let text = serde_json::to_string(&trace).unwrap();
        assert!(text.contains("\"op\":\"explode\""));
        let back: Vec<TraceStep> = serde_json::from_str(&text).unwrap();
        assert_eq!(DeSequence::from_trace(&doc, &back).unwrap(), seq);
    }
}
