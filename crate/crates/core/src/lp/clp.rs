use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::dual::{verify_dual, DualSolution};
use super::simplex::{Phase1, Sense};
use super::subsets::{minimal_sets, subset_sums};
use crate::error::{Error, Result};
use crate::instance::{Instance, PlayerIx, ResourceIx};
use crate::rational::{fmt_exact, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClpCaps {
    /// Largest covet list for which configurations are enumerated.
    pub max_covets: usize,
    /// Largest total number of LP columns.
    pub max_columns: usize,
}

impl Default for ClpCaps {
    fn default() -> Self {
        ClpCaps {
            max_covets: 20,
            max_columns: 100_000,
        }
    }
}

/// A configuration `S ∈ C_p(T)`: a coveted set of value at least the target.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub owner: PlayerIx,
    pub resources: Vec<ResourceIx>,
    pub total_value: Rational,
}

impl Configuration {
    pub fn describe(&self, inst: &Instance) -> String {
        let ids: Vec<&str> = self
            .resources
            .iter()
            .map(|&r| inst.resources()[r].id.as_str())
            .collect();
        format!("{}:{{{}}}", inst.players()[self.owner], ids.join(","))
    }
}

pub(crate) fn check_covet_cap(inst: &Instance, p: PlayerIx, cap: usize) -> Result<()> {
    let len = inst.covets(p).len();
    if len > cap {
        return Err(Error::CapExceeded {
            what: "covet list length",
            actual: len,
            cap,
        });
    }
    Ok(())
}

pub(crate) fn covet_items(inst: &Instance, p: PlayerIx) -> Vec<(ResourceIx, Rational)> {
    inst.covets(p)
        .iter()
        .map(|&r| (r, inst.resource_value(r).clone()))
        .collect()
}

/// The inclusion-minimal configurations of `p` at target `target`.
pub fn enumerate_configurations(
    inst: &Instance,
    p: PlayerIx,
    target: &Rational,
    caps: ClpCaps,
) -> Result<Vec<Configuration>> {
    if !target.is_positive() {
        return Err(Error::OutOfRange("target must be positive".into()));
    }
    check_covet_cap(inst, p, caps.max_covets)?;
    Ok(minimal_sets(&covet_items(inst, p), target)
        .into_iter()
        .map(|resources| Configuration {
            owner: p,
            total_value: inst.value(&resources),
            resources,
        })
        .collect())
}

/// The configuration LP at a fixed target, restricted to minimal
/// configurations (shrinking a column only relaxes packing rows).
#[derive(Debug, Clone)]
pub struct ClpModel {
    pub target: Rational,
    pub columns: Vec<Configuration>,
    pub num_players: usize,
    pub num_resources: usize,
}

impl ClpModel {
    pub fn build(inst: &Instance, target: &Rational, caps: ClpCaps) -> Result<Self> {
        let mut columns = Vec::new();
        for p in 0..inst.num_players() {
            columns.extend(enumerate_configurations(inst, p, target, caps)?);
            if columns.len() > caps.max_columns {
                return Err(Error::CapExceeded {
                    what: "configuration columns",
                    actual: columns.len(),
                    cap: caps.max_columns,
                });
            }
        }
        Ok(ClpModel {
            target: target.clone(),
            columns,
            num_players: inst.num_players(),
            num_resources: inst.num_resources(),
        })
    }

    /// Rows `0..|P|` are covering rows, rows `|P|..` packing rows.
    fn phase1(&self) -> Phase1 {
        let mut rows = vec![(Sense::AtLeast, Rational::one()); self.num_players];
        rows.extend(vec![(Sense::AtMost, Rational::one()); self.num_resources]);
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut col = vec![(c.owner, Rational::one())];
                col.extend(c.resources.iter().map(|&r| (self.num_players + r, Rational::one())));
                col
            })
            .collect();
        Phase1 { rows, columns }
    }

    /// Exact check of covering and packing rows.
    pub fn check_primal(&self, x: &[Rational]) -> bool {
        if x.len() != self.columns.len() || x.iter().any(Signed::is_negative) {
            return false;
        }
        let mut cover = vec![Rational::zero(); self.num_players];
        let mut pack = vec![Rational::zero(); self.num_resources];
        for (c, xv) in self.columns.iter().zip(x) {
            cover[c.owner] += xv;
            for &r in &c.resources {
                pack[r] += xv;
            }
        }
        cover.iter().all(|v| *v >= Rational::one()) && pack.iter().all(|v| *v <= Rational::one())
    }
}

#[derive(Debug, Clone)]
pub struct LpFeasibilityResult {
    pub target: Rational,
    pub feasible: bool,
    /// Nonzero primal entries when feasible.
    pub primal: Vec<(Configuration, Rational)>,
    /// Farkas certificate when infeasible: a dual solution with positive
    /// objective that satisfies every configuration constraint.
    pub certificate: Option<DualSolution>,
    pub pivots: usize,
}

/// Decides feasibility of CLP(target) exactly.
pub fn clp_feasible(inst: &Instance, target: &Rational, caps: ClpCaps) -> Result<LpFeasibilityResult> {
    let model = ClpModel::build(inst, target, caps)?;
    let outcome = model.phase1().solve();
    if outcome.feasible() {
        if !model.check_primal(&outcome.x) {
            return Err(Error::Internal(format!(
                "simplex primal fails verification at T = {}",
                fmt_exact(target)
            )));
        }
        let primal = model
            .columns
            .iter()
            .zip(outcome.x)
            .filter(|(_, x)| !x.is_zero())
            .map(|(c, x)| (c.clone(), x))
            .collect();
        return Ok(LpFeasibilityResult {
            target: target.clone(),
            feasible: true,
            primal,
            certificate: None,
            pivots: outcome.pivots,
        });
    }
    let p = inst.num_players();
    let certificate = DualSolution {
        y: outcome.duals[..p].to_vec(),
        z: outcome.duals[p..].iter().map(|d| -d).collect(),
    };
    let verdict = verify_dual(inst, target, &certificate, caps)?;
    if !verdict.feasible || !verdict.objective.is_positive() {
        return Err(Error::Internal(format!(
            "Farkas certificate fails verification at T = {}",
            fmt_exact(target)
        )));
    }
    Ok(LpFeasibilityResult {
        target: target.clone(),
        feasible: false,
        primal: Vec::new(),
        certificate: Some(certificate),
        pivots: outcome.pivots,
    })
}

#[derive(Debug, Clone)]
pub struct TStarResult {
    pub t_star: Rational,
    /// Size of the candidate grid.
    pub candidates: usize,
    /// Number of LP solves performed.
    pub probes: usize,
    /// Feasible solve at `t_star` (absent when `t_star` is zero).
    pub feasibility_witness: Option<LpFeasibilityResult>,
    /// Smallest candidate above `t_star` and its infeasibility proof.
    pub next_infeasible: Option<LpFeasibilityResult>,
}

/// Candidate targets: positive subset sums of every covet list. The family
/// `C_p(T)` only changes when `T` crosses one of these.
pub fn t_star_candidates(inst: &Instance, caps: ClpCaps) -> Result<Vec<Rational>> {
    let mut all = std::collections::BTreeSet::new();
    for p in 0..inst.num_players() {
        check_covet_cap(inst, p, caps.max_covets)?;
        let values: Vec<Rational> = inst
            .covets(p)
            .iter()
            .map(|&r| inst.resource_value(r).clone())
            .collect();
        all.extend(subset_sums(&values).into_iter().filter(Signed::is_positive));
    }
    Ok(all.into_iter().collect())
}

/// Exact `T* = max { T : CLP(T) feasible }` by binary search over the
/// candidate grid.
pub fn compute_t_star(inst: &Instance, caps: ClpCaps) -> Result<TStarResult> {
    let candidates = t_star_candidates(inst, caps)?;
    let zero = |probes, next| TStarResult {
        t_star: Rational::zero(),
        candidates: candidates.len(),
        probes,
        feasibility_witness: None,
        next_infeasible: next,
    };
    if (0..inst.num_players()).any(|p| inst.covets(p).is_empty()) || candidates.is_empty() {
        return Ok(zero(0, None));
    }
    let mut probes = 1;
    let first = clp_feasible(inst, &candidates[0], caps)?;
    if !first.feasible {
        return Ok(zero(probes, Some(first)));
    }
    // invariant: candidates[lo] feasible, candidates[hi] infeasible (hi may be len)
    let (mut lo, mut hi) = (0usize, candidates.len());
    let mut lo_result = first;
    let mut hi_result = None;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let res = clp_feasible(inst, &candidates[mid], caps)?;
        probes += 1;
        if res.feasible {
            lo = mid;
            lo_result = res;
        } else {
            hi = mid;
            hi_result = Some(res);
        }
    }
    Ok(TStarResult {
        t_star: candidates[lo].clone(),
        candidates: candidates.len(),
        probes,
        feasibility_witness: Some(lo_result),
        next_infeasible: hi_result,
    })
}
