//! The four-phase DE-sequence construction with cover bookkeeping, and the
//! η-Hall condition over the classes of a partitioned graph.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::de::{basic_cover, classify_edge, verify_star, DeSequence, DeStep};
use super::graph::{Graph, PartitionedGraph};
use super::homology::EtaEngine;
use super::search::{search_de_sequence, Objective, SearchBudget, SearchContext, SearchOutcome};
use crate::allocation_graph::{fat_set, AllocationGraph, MAlpha};
use crate::error::{Error, Result};
use crate::instance::{Instance, ResourceIx};
use crate::lp::fat_for_players;
use crate::rational::{ratio, Rational};

/// Explosion counts and cover sets per phase. Phase-1 entries collect the
/// cheap sequences of phases 1 to 3.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PhaseLedger {
    pub n: [usize; 4],
    pub w: [Vec<ResourceIx>; 4],
}

impl PhaseLedger {
    fn record(&mut self, phase: usize, ell: usize, cover: &[ResourceIx]) {
        self.n[phase] += ell;
        let mut w: BTreeSet<ResourceIx> = self.w[phase].iter().copied().collect();
        w.extend(cover);
        self.w[phase] = w.into_iter().collect();
    }

    pub fn total_explosions(&self) -> usize {
        self.n.iter().sum()
    }

    pub fn union(&self) -> Vec<ResourceIx> {
        let all: BTreeSet<ResourceIx> = self.w.iter().flatten().copied().collect();
        all.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DriverOutcome {
    Ko,
    Edgeless,
    Inconclusive,
}

/// The per-phase cover bounds, each checked exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverChecks {
    /// `v(W1) ≤ 2m·n1`
    pub cheap_value: bool,
    /// `|W2| ≤ 7/3·n2` and `|W3| ≤ 5/2·n3`
    pub gamma_size: bool,
    /// `v(W2) ≤ 7/3·m·n2` and `v(W3) ≤ 5/2·m·n3`
    pub gamma_value: bool,
    /// `v(W4) ≤ 3m·n4`
    pub basic_value: bool,
    /// The union of all covers is a cover of the whole sequence.
    pub star: bool,
}

impl CoverChecks {
    pub fn all(&self) -> bool {
        self.cheap_value && self.gamma_size && self.gamma_value && self.basic_value && self.star
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseReport {
    pub outcome: DriverOutcome,
    pub ledger: PhaseLedger,
    #[serde(skip)]
    pub seq: DeSequence,
    pub ell: usize,
    pub checks: CoverChecks,
    /// `|U| − |F_U|`, the explosion count the accounting argument promises.
    pub demand: i64,
    /// Right-hand sides of the four snapshot bounds on `|U| − |F_U|`, when
    /// `T > 3m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_bounds: Option<Vec<String>>,
    pub searches: usize,
    pub inconclusive_searches: usize,
}

/// Coefficients of `n1..n4` in the four snapshot bounds on `|U| − |F_U|`.
/// Needs `T > 3m`.
pub fn phase_bound_coefficients(target: &Rational, m: &Rational) -> Result<[[Rational; 4]; 4]> {
    let k = |n: i64| Rational::from_integer(n.into());
    let t3 = target - k(3) * m;
    if !t3.is_positive() {
        return Err(Error::OutOfRange("need T > 3m".into()));
    }
    let t2 = target - k(2) * m;
    let t1 = target - m;
    let zero = Rational::zero();
    Ok([
        [k(2) * m / &t3, ratio(7, 3), zero.clone(), zero.clone()],
        [m / &t3, ratio(7, 6), ratio(5, 4), zero.clone()],
        [k(2) * m / &t2, k(7) * m / (k(3) * &t2), k(5) * m / (k(2) * &t2), zero],
        [k(2) * m / &t1, k(7) * m / (k(3) * &t1), k(5) * m / (k(2) * &t1), k(3) * m / &t1],
    ])
}

struct Runner<'a> {
    inst: &'a Instance,
    graph: &'a AllocationGraph,
    engine: &'a EtaEngine,
    budget: SearchBudget,
    current: Graph,
    steps: Vec<DeStep>,
    ledger: PhaseLedger,
    searches: usize,
    inconclusive: usize,
}

enum Step {
    Done,
    Ko,
    Progress,
}

impl Runner<'_> {
    fn ctx(&self) -> SearchContext<'_> {
        SearchContext {
            engine: self.engine,
            hyperedges: Some(&self.graph.vertices),
            instance: Some(self.inst),
        }
    }

    /// One search from the current graph; on success the sequence is
    /// appended and its cover charged to `phase`.
    fn try_once(&mut self, objective: &Objective, phase: usize) -> Result<Step> {
        self.searches += 1;
        match search_de_sequence(&self.current, objective, self.budget, self.ctx())? {
            SearchOutcome::Found(f) => {
                self.steps.extend(f.seq.steps.iter().copied());
                self.current = f.end;
                if f.ko {
                    return Ok(Step::Ko);
                }
                self.ledger.record(phase, f.seq.ell(), &f.cover);
                Ok(Step::Progress)
            }
            SearchOutcome::Exhausted { .. } => Ok(Step::Done),
            SearchOutcome::BudgetExhausted { .. } => {
                self.inconclusive += 1;
                Ok(Step::Done)
            }
        }
    }

    /// KO or cheap sequences until none is found. Returns true on KO.
    fn cheap_loop(&mut self, m: &Rational) -> Result<bool> {
        let objective = Objective::KoOrCheap { m: m.clone() };
        loop {
            match self.try_once(&objective, 0)? {
                Step::Ko => return Ok(true),
                Step::Done => return Ok(false),
                Step::Progress => {}
            }
        }
    }

    fn gamma_phase(&mut self, gamma: Rational, phase: usize, m: &Rational) -> Result<bool> {
        let objective = Objective::Gamma { gamma };
        loop {
            match self.try_once(&objective, phase)? {
                Step::Ko => return Ok(true),
                Step::Done => return Ok(false),
                Step::Progress => {
                    if self.cheap_loop(m)? {
                        return Ok(true);
                    }
                }
            }
        }
    }

    /// Single steps until no edge is left: delete when legal, else explode.
    fn finish(&mut self) -> Result<()> {
        while let Some(&e) = self.current.edges().iter().next() {
            let class = classify_edge(&self.current, e, self.engine)?;
            let step = if class.deletable {
                DeStep::Delete(e)
            } else if class.explodable {
                DeStep::Explode(e)
            } else {
                return Err(Error::Internal(format!(
                    "edge ({}, {}) is neither deletable nor explodable",
                    e.0, e.1
                )));
            };
            let before = self.current.clone();
            self.current = step.apply(&before)?;
            self.steps.push(step);
            if step.is_explosion() {
                let single = DeSequence::new(&before, vec![step]);
                let cover = basic_cover(&before, &single, &self.graph.vertices)?;
                self.ledger.record(3, 1, &cover.cover);
            }
        }
        Ok(())
    }
}

/// Runs the four phases on `graph` (the thin graph restricted to a player
/// set `U`), starting with `W = ∅`.
pub fn four_phase_driver(
    inst: &Instance,
    graph: &AllocationGraph,
    m: &MAlpha,
    budget: SearchBudget,
    engine: &EtaEngine,
) -> Result<PhaseReport> {
    if let Some(v) = graph.vertices.iter().find(|e| e.is_fat) {
        return Err(Error::Hypothesis(format!(
            "driver expects a thin graph, found fat vertex {}",
            v.descriptor(inst)
        )));
    }
    let m = &m.m;
    let mut run = Runner {
        inst,
        graph,
        engine,
        budget,
        current: graph.graph.clone(),
        steps: Vec::new(),
        ledger: PhaseLedger::default(),
        searches: 0,
        inconclusive: 0,
    };
    let ko = run.cheap_loop(m)? || run.gamma_phase(ratio(7, 3), 1, m)? || run.gamma_phase(ratio(5, 2), 2, m)?;
    if !ko {
        run.finish()?;
    }
    let outcome = if ko || !run.current.is_empty() {
        DriverOutcome::Ko
    } else if run.inconclusive > 0 {
        DriverOutcome::Inconclusive
    } else {
        DriverOutcome::Edgeless
    };

    let ledger = run.ledger;
    let n = |i: usize| Rational::from_integer(ledger.n[i].into());
    let size = |i: usize| Rational::from_integer(ledger.w[i].len().into());
    let value = |i: usize| inst.value(&ledger.w[i]);
    let k = |a: i64, b: i64| ratio(a, b);
    let star = verify_star(&graph.graph, &run.current, &ledger.union(), &graph.vertices);
    let checks = CoverChecks {
        cheap_value: value(0) <= k(2, 1) * m * n(0),
        gamma_size: size(1) <= k(7, 3) * n(1) && size(2) <= k(5, 2) * n(2),
        gamma_value: value(1) <= k(7, 3) * m * n(1) && value(2) <= k(5, 2) * m * n(2),
        basic_value: value(3) <= k(3, 1) * m * n(3),
        star,
    };

    let fat = fat_set(inst, &graph.target, &graph.alpha)?;
    let demand = graph.players.len() as i64 - fat_for_players(inst, &fat, &graph.players).len() as i64;
    let snapshot_bounds = phase_bound_coefficients(&graph.target, m).ok().map(|rows| {
        rows.iter()
            .map(|row| {
                let total = row
                    .iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (i, c)| acc + c * n(i));
                crate::rational::fmt_exact(&total)
            })
            .collect()
    });
    let seq = DeSequence::new(&graph.graph, run.steps);
    Ok(PhaseReport {
        outcome,
        ell: seq.ell(),
        seq,
        ledger,
        checks,
        demand,
        snapshot_bounds,
        searches: run.searches,
        inconclusive_searches: run.inconclusive,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HallReport {
    pub holds: bool,
    /// Class indices of the first `U` with `η(G|_U) < |U|`.
    pub violating: Option<Vec<usize>>,
}

/// Checks `η(G|_U) ≥ |U|` for every nonempty set `U` of classes, smallest
/// sets first.
pub fn hall_eta_check(pg: &PartitionedGraph, engine: &EtaEngine, max_parts: usize) -> Result<HallReport> {
    let k = pg.parts.len();
    if k > max_parts || k >= 32 {
        return Err(Error::CapExceeded {
            what: "classes for the Hall check",
            actual: k,
            cap: max_parts.min(31),
        });
    }
    let mut masks: Vec<u32> = (1..1u32 << k).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let classes: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let sub = pg.restrict(&classes);
        if !engine.at_least(&sub.graph, classes.len() as u32)? {
            return Ok(HallReport {
                holds: false,
                violating: Some(classes),
            });
        }
    }
    Ok(HallReport {
        holds: true,
        violating: None,
    })
}
