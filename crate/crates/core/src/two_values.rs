//! The (1, ε)-restricted setting: phase coefficients, the `(c, r_c)` table,
//! the gap function `f`, its limit, and the phase-X construction.

use std::collections::BTreeSet;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::allocation_graph::{
    fat_set, find_independent_transversal, AllocationGraph, TransversalCaps,
};
use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, ResourceIx};
use crate::lp::{clp_feasible, fat_for_players, ClpCaps};
use crate::rational::{fmt_exact, int, ratio, Rational};
use crate::topology::{
    classify_edge, search_de_sequence, DeSequence, DeStep, EtaEngine, Graph, Objective, SearchBudget,
    SearchContext, SearchOutcome,
};

fn q(n: u64) -> Rational {
    Rational::from_integer(n.into())
}

/// Phase coefficient `a_r(X)`:
/// `3r − X − 1` for `X ≤ (3r−1)/2`, `2r − (X+1)/3` for `3r/2 ≤ X ≤ 2r`,
/// `(4r−1)/3` for `X ≥ 2r+1`.
pub fn a_coeff(r: u64, x: u64) -> Result<Rational> {
    if r == 0 || x < r {
        return Err(Error::OutOfRange(format!("a_r(X) needs X >= r >= 1, got r={r}, X={x}")));
    }
    if 2 * x < 3 * r {
        // for integers 2X <= 3r-1 and 2X < 3r coincide
        Ok(q(3 * r - x - 1))
    } else if x <= 2 * r {
        Ok(q(2 * r) - q(x + 1) / q(3))
    } else {
        Ok(q(4 * r - 1) / q(3))
    }
}

/// `Σ_{X=r}^{c} 1/a_r(X)`, zero when `c < r`.
pub fn reciprocal_sum(r: u64, c: u64) -> Rational {
    (r..=c).fold(Rational::zero(), |acc, x| {
        acc + a_coeff(r, x).expect("x >= r").recip()
    })
}

/// `reciprocal_sum(r, c) >= 1`. A float sum settles clear cases; the
/// accumulated rounding error is far below the margin, and anything near 1
/// is decided exactly.
fn reaches_one(r: u64, c: u64) -> bool {
    let approx: f64 = (r..=c)
        .map(|x| a_coeff(r, x).expect("x >= r").to_f64().expect("finite").recip())
        .sum();
    if (approx - 1.0).abs() > 1e-9 {
        approx > 1.0
    } else {
        reciprocal_sum(r, c) >= Rational::one()
    }
}

/// Largest `r` with `Σ_{X=r}^{c} 1/a_r(X) ≥ 1`.
pub fn r_c(c: u64) -> Result<u64> {
    if c == 0 {
        return Err(Error::OutOfRange("c must be at least 1".into()));
    }
    // every term is at most 3/(4r-1), so r > (3c+4)/7 cannot reach 1
    let top = ((3 * c + 4) / 7).clamp(1, c);
    (1..=top)
        .rev()
        .find(|&r| reaches_one(r, c))
        .ok_or_else(|| Error::Internal(format!("no r qualifies for c={c}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RcEntry {
    pub c: u64,
    pub r_c: u64,
    #[serde(with = "crate::rational::serde_exact")]
    pub ratio: Rational,
}

pub fn rc_table(max_c: u64) -> Result<Vec<RcEntry>> {
    (1..=max_c)
        .into_par_iter()
        .map(|c| {
            let r = r_c(c)?;
            Ok(RcEntry {
                c,
                r_c: r,
                ratio: Rational::new(c.into(), r.into()),
            })
        })
        .collect()
}

/// The three size predicates for a pair `(c, r_c)`: `r_c ≥ c/4`,
/// `c ≥ 2r_c + 1`, `c ≥ 2r_c + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrcChecks {
    pub quarter: bool,
    pub odd_gap: bool,
    pub even_gap: bool,
}

pub fn check_obs_crc(c: u64) -> Result<CrcChecks> {
    let r = r_c(c)?;
    Ok(CrcChecks {
        quarter: 4 * r >= c,
        odd_gap: c > 2 * r,
        even_gap: c >= 2 * r + 2,
    })
}

/// `f(x) = 1 / (x · r_{⌈1/x⌉})` for `0 < x ≤ 1`.
pub fn f_gap(x: &Rational) -> Result<Rational> {
    if !x.is_positive() || *x > Rational::one() {
        return Err(Error::OutOfRange(format!("f needs 0 < x <= 1, got {}", fmt_exact(x))));
    }
    let c = x.recip().ceil().to_integer().to_u64().ok_or_else(|| {
        Error::OutOfRange(format!("1/x too large: {}", fmt_exact(x)))
    })?;
    Ok((x * q(r_c(c)?)).recip())
}

/// `H_n = Σ_{k=1}^{n} 1/k`.
pub fn harmonic(n: u64) -> Rational {
    (1..=n).fold(Rational::zero(), |acc, k| acc + Rational::new(1.into(), k.into()))
}

/// The three blocks of the reciprocal sum, one per range of `a_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarmonicSums {
    #[serde(with = "crate::rational::serde_exact")]
    pub a: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub b: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub c: Rational,
}

/// `A_r = H_{2r−1} − H_{⌈(3r−1)/2⌉−1}`, `B_r = 3(H_{⌊9r/2−1⌋} − H_{4r−2})`,
/// `C_r = 3(c−2r)/(4r−1)` (zero when `c < 2r+1`).
pub fn harmonic_sums(r: u64, c: u64) -> Result<HarmonicSums> {
    if r < 2 {
        return Err(Error::OutOfRange("harmonic sums need r >= 2".into()));
    }
    let a = harmonic(2 * r - 1) - harmonic((3 * r - 1).div_ceil(2) - 1);
    let b = q(3) * (harmonic((9 * r - 2) / 2) - harmonic(4 * r - 2));
    let c_sum = if c > 2 * r {
        Rational::new((3 * (c - 2 * r)).into(), (4 * r - 1).into())
    } else {
        Rational::zero()
    };
    Ok(HarmonicSums { a, b, c: c_sum })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitConstants {
    pub a_limit: f64,
    pub b_limit: f64,
    pub bound: f64,
}

pub fn limit_constants() -> LimitConstants {
    let a_limit = (4.0f64 / 3.0).ln();
    let b_limit = 3.0 * (9.0f64 / 8.0).ln();
    LimitConstants {
        a_limit,
        b_limit,
        bound: 10.0 / 3.0 - 4.0 / 3.0 * a_limit - 4.0 / 3.0 * b_limit,
    }
}

/// `10/3 − (4/3)·ln(4/3) − 4·ln(9/8)`.
pub fn limit_bound() -> f64 {
    limit_constants().bound
}

/// Rationals `x` in `(0, 1]` with denominator at most `max_den`, where the
/// gap function breaks the two stated bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridReport {
    pub points: usize,
    /// `f(x) ≥ 3` away from `1/6` and `1/3`.
    pub above_three: Vec<String>,
    /// `f(x) > 11/4` inside `(0, 1/6) ∪ [2/11, 1/3) ∪ [4/11, 1]`.
    pub above_eleven_quarters: Vec<String>,
    /// `f` at `1/6` and `1/3`.
    pub exceptional: Vec<(String, String)>,
}

pub fn gap_bound_grid(max_den: u64) -> Result<GridReport> {
    let mut xs = BTreeSet::new();
    for d in 1..=max_den {
        for n in 1..=d {
            xs.insert(Rational::new(n.into(), d.into()));
        }
    }
    let exceptions = [ratio(1, 6), ratio(1, 3)];
    let in_union = |x: &Rational| {
        *x < ratio(1, 6) || (*x >= ratio(2, 11) && *x < ratio(1, 3)) || *x >= ratio(4, 11)
    };
    let mut report = GridReport {
        points: xs.len(),
        above_three: Vec::new(),
        above_eleven_quarters: Vec::new(),
        exceptional: Vec::new(),
    };
    for x in &xs {
        let f = f_gap(x)?;
        if exceptions.contains(x) {
            report.exceptional.push((fmt_exact(x), fmt_exact(&f)));
        } else if f >= int(3) {
            report.above_three.push(fmt_exact(x));
        }
        if in_union(x) && f > ratio(11, 4) {
            report.above_eleven_quarters.push(fmt_exact(x));
        }
    }
    Ok(report)
}

/// The common small value of a (1, ε) instance.
pub fn thin_value(inst: &Instance) -> Result<Rational> {
    let values: BTreeSet<&Rational> = inst.resources().iter().map(|r| &r.value).collect();
    let small: Vec<&Rational> = values.into_iter().filter(|v| !v.is_one()).collect();
    match small.as_slice() {
        [eps] if **eps < Rational::one() => Ok((*eps).clone()),
        _ => Err(Error::Hypothesis("values must be 1 and a single ε < 1".into())),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TwoValueBudget {
    pub search: SearchBudget,
    pub transversal: TransversalCaps,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseXEntry {
    pub x: u64,
    #[serde(with = "crate::rational::serde_exact")]
    pub a_x: Rational,
    pub explosions: usize,
    pub cover_size: usize,
    /// `|W_X| ≤ n_X · a(X)`
    pub within_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseXOutcome {
    /// An isolated vertex appeared; η is infinite from there on.
    Ko,
    Completed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoValueOutcome {
    /// A transversal of `H(α)` gives every player at least `rε`.
    Allocation,
    /// `H(α)` has no independent transversal.
    NoTransversal,
    /// The transversal search was over its caps.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoValueReport {
    #[serde(with = "crate::rational::serde_exact")]
    pub epsilon: Rational,
    pub c: u64,
    pub r: u64,
    #[serde(with = "crate::rational::serde_exact")]
    pub alpha: Rational,
    pub phases: Vec<PhaseXEntry>,
    pub phase_outcome: PhaseXOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_note: Option<String>,
    pub ell: usize,
    pub demand: i64,
    pub outcome: TwoValueOutcome,
    pub allocation: Option<Allocation>,
    #[serde(with = "crate::rational::serde_exact_opt")]
    pub min_value: Option<Rational>,
}

/// Checks the hypotheses `ε < 1/2`, `1 ≤ T < 2`, `c = ⌈T/ε⌉ ≥ 4` and CLP(T)
/// feasible, then runs the phase-X construction for all players and looks
/// for an allocation of min-value `r_c·ε`.
pub fn two_value_driver(
    inst: &Instance,
    target: &Rational,
    budget: TwoValueBudget,
    engine: &EtaEngine,
) -> Result<TwoValueReport> {
    let eps = thin_value(inst)?;
    if eps >= ratio(1, 2) {
        return Err(Error::Hypothesis("need ε < 1/2".into()));
    }
    if *target < int(1) || *target >= int(2) {
        return Err(Error::Hypothesis("need 1 <= T < 2".into()));
    }
    let c = (target / &eps).ceil().to_integer().to_u64().expect("c is small");
    if c < 4 {
        return Err(Error::Hypothesis(format!("need c = ceil(T/ε) >= 4, got {c}")));
    }
    if !clp_feasible(inst, target, ClpCaps::default())?.feasible {
        return Err(Error::Hypothesis("CLP(T) is infeasible".into()));
    }
    let r = r_c(c)?;
    let alpha = q(r) * &eps / target;
    let caps = ClpCaps::default();
    let h = AllocationGraph::build_h(inst, target, &alpha, caps)?;
    let j = h.build_j();
    let fat = fat_set(inst, target, &alpha)?;
    let players: Vec<usize> = (0..inst.num_players()).collect();
    let demand = players.len() as i64 - fat_for_players(inst, &fat, &players).len() as i64;

    // η is capped; a thin graph past the cap leaves the phase record
    // inconclusive but does not block the transversal search
    let (phase, phase_note) = match run_phase_x(inst, &j, &fat, c, r, budget.search, engine) {
        Ok(run) => (run, None),
        Err(e @ Error::CapExceeded { .. }) => (
            PhaseRun {
                entries: Vec::new(),
                outcome: PhaseXOutcome::Inconclusive,
                ell: 0,
            },
            Some(e.to_string()),
        ),
        Err(e) => return Err(e),
    };

    let (outcome, allocation) = match find_independent_transversal(&h.partitioned(), budget.transversal) {
        Ok(Some(t)) => (TwoValueOutcome::Allocation, Some(h.transversal_to_allocation(inst, &t)?)),
        Ok(None) => (TwoValueOutcome::NoTransversal, None),
        Err(Error::CapExceeded { .. }) => (TwoValueOutcome::Inconclusive, None),
        Err(e) => return Err(e),
    };
    let min_value = allocation.as_ref().map(|a| a.min_value(inst));
    if let Some(v) = &min_value {
        if *v < q(r) * &eps {
            return Err(Error::Internal("transversal allocation is below rε".into()));
        }
    }
    Ok(TwoValueReport {
        epsilon: eps,
        c,
        r,
        alpha,
        phases: phase.entries,
        phase_outcome: phase.outcome,
        phase_note,
        ell: phase.ell,
        demand,
        outcome,
        allocation,
        min_value,
    })
}

struct PhaseRun {
    entries: Vec<PhaseXEntry>,
    outcome: PhaseXOutcome,
    ell: usize,
}

/// Applies legal deletions, lowest edge first, until none is left.
fn delete_while_possible(g: &mut Graph, steps: &mut Vec<DeStep>, engine: &EtaEngine) -> Result<()> {
    loop {
        let mut progressed = false;
        for e in g.edges().iter().copied().collect::<Vec<_>>() {
            if classify_edge(g, e, engine)?.deletable {
                *g = g.delete_edge(e)?;
                steps.push(DeStep::Delete(e));
                progressed = true;
                break;
            }
        }
        if !progressed {
            return Ok(());
        }
    }
}

fn run_phase_x(
    inst: &Instance,
    j: &AllocationGraph,
    fat: &[ResourceIx],
    c: u64,
    r: u64,
    budget: SearchBudget,
    engine: &EtaEngine,
) -> Result<PhaseRun> {
    let mut current = j.graph.clone();
    let mut steps = Vec::new();
    delete_while_possible(&mut current, &mut steps, engine)?;
    let mut entries = Vec::new();
    let mut covered: BTreeSet<ResourceIx> = BTreeSet::new();
    let mut inconclusive = false;
    // each player's thin covet list, kept when it is itself a configuration
    let configurations: Vec<(usize, BTreeSet<ResourceIx>)> = j
        .players
        .iter()
        .map(|&p| {
            let thin: BTreeSet<ResourceIx> = inst.covets(p).iter().copied().filter(|r| !fat.contains(r)).collect();
            (p, thin)
        })
        .filter(|(_, thin)| thin.len() as u64 >= c)
        .collect();
    for x in (r..=c).rev() {
        let a_x = a_coeff(r, x)?;
        let mut entry = PhaseXEntry {
            x,
            a_x: a_x.clone(),
            explosions: 0,
            cover_size: 0,
            within_bound: true,
        };
        let mut phase_cover: BTreeSet<ResourceIx> = BTreeSet::new();
        let mut stuck: BTreeSet<usize> = BTreeSet::new();
        loop {
            if current.has_isolated_vertex() {
                entries.push(entry);
                return Ok(PhaseRun {
                    entries,
                    outcome: PhaseXOutcome::Ko,
                    ell: DeSequence::new(&j.graph, steps).ell(),
                });
            }
            let next = configurations.iter().find(|(p, conf)| {
                !stuck.contains(p) && conf.difference(&covered).count() as u64 >= x
            });
            let Some((owner, conf)) = next else { break };
            let objective = Objective::BasedIn {
                owner: *owner,
                region: conf.difference(&covered).copied().collect(),
                max_average: a_x.clone(),
            };
            let ctx = SearchContext {
                engine,
                hyperedges: Some(&j.vertices),
                instance: Some(inst),
            };
            match search_de_sequence(&current, &objective, budget, ctx)? {
                SearchOutcome::Found(f) => {
                    steps.extend(f.seq.steps.iter().copied());
                    current = f.end;
                    delete_while_possible(&mut current, &mut steps, engine)?;
                    entry.explosions += f.seq.ell();
                    phase_cover.extend(&f.cover);
                    covered.extend(&f.cover);
                }
                SearchOutcome::Exhausted { .. } | SearchOutcome::BudgetExhausted { .. } => {
                    inconclusive = true;
                    stuck.insert(*owner);
                }
            }
        }
        entry.cover_size = phase_cover.len();
        entry.within_bound = q(entry.cover_size as u64) <= q(entry.explosions as u64) * &a_x;
        entries.push(entry);
    }
    Ok(PhaseRun {
        entries,
        outcome: if inconclusive {
            PhaseXOutcome::Inconclusive
        } else {
            PhaseXOutcome::Completed
        },
        ell: DeSequence::new(&j.graph, steps).ell(),
    })
}

/// How a (1, ε) instance with `T* > 0` reaches the two-value theorem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum GapCase {
    /// `x = ε/T* ≥ 1/3`: one coveted resource per player already gives
    /// `OPT ≥ ε`, so the gap is at most `1/x`.
    OneEach,
    /// `T* ≥ 2`: the additive assignment-LP bound gives `OPT ≥ T* − 1 ≥ T*/2`.
    LargeTarget,
    /// `1 ≤ T* < 2`: the driver runs on the instance itself at `T = T*`.
    Direct,
    /// `T* < 1`: thin values become `ε' = ε/T*` and the driver runs at `T = 1`.
    Rescaled {
        #[serde(with = "crate::rational::serde_exact")]
        epsilon: Rational,
    },
}

#[derive(Debug, Clone)]
pub struct Reduced {
    pub case: GapCase,
    /// Instance and target for the driver, when it applies.
    pub driver_input: Option<(Instance, Rational)>,
}

/// Sorts a (1, ε) instance into the cases of the gap argument.
pub fn reduce_two_value(inst: &Instance, t_star: &Rational) -> Result<Reduced> {
    let eps = thin_value(inst)?;
    if !t_star.is_positive() {
        return Err(Error::Hypothesis("T* must be positive".into()));
    }
    let x = &eps / t_star;
    let (case, driver_input) = if x >= ratio(1, 3) {
        (GapCase::OneEach, None)
    } else if *t_star >= int(2) {
        (GapCase::LargeTarget, None)
    } else if *t_star >= int(1) {
        (GapCase::Direct, Some((inst.clone(), t_star.clone())))
    } else {
        let rescaled = Instance::new(
            inst.players().iter().cloned(),
            inst.resources().iter().map(|r| {
                let v = if r.value.is_one() { r.value.clone() } else { x.clone() };
                (r.id.clone(), v)
            }),
            (0..inst.num_players()).map(|p| {
                let ids = inst.covets(p).iter().map(|&r| inst.resources()[r].id.clone()).collect();
                (inst.players()[p].clone(), ids)
            }),
        )?;
        (GapCase::Rescaled { epsilon: x }, Some((rescaled, int(1))))
    };
    Ok(Reduced { case, driver_input })
}
