//! Dual (DCLP) solutions: the two structured constructions used in the
//! cover accounting, and an exact verifier.
//!
//! DCLP(T) has a variable `y_p >= 0` per player and `z_r >= 0` per resource,
//! one constraint `y_p <= sum_{r in S} z_r` per configuration `S ∈ C_p(T)`,
//! and objective `sum y - sum z`. Any feasible dual has objective at most zero
//! when CLP(T) is feasible.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::clp::{check_covet_cap, covet_items, ClpCaps, Configuration};
use super::subsets::{min_cost_cover, minimal_sets};
use crate::error::{Error, Result};
use crate::instance::{Instance, PlayerIx, ResourceIx};
use crate::rational::{fmt_exact, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSolution {
    pub y: Vec<Rational>,
    pub z: Vec<Rational>,
}

impl DualSolution {
    pub fn zero(inst: &Instance) -> Self {
        DualSolution {
            y: vec![Rational::zero(); inst.num_players()],
            z: vec![Rational::zero(); inst.num_resources()],
        }
    }

    pub fn objective(&self) -> Rational {
        let y: Rational = self.y.iter().fold(Rational::zero(), |a, b| a + b);
        let z: Rational = self.z.iter().fold(Rational::zero(), |a, b| a + b);
        y - z
    }

    /// JSON document keyed by ids; zero entries are omitted.
    pub fn to_json(&self, inst: &Instance) -> String {
        let pick = |values: &[Rational], id: &dyn Fn(usize) -> String| -> BTreeMap<String, String> {
            values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (id(i), fmt_exact(v)))
                .collect()
        };
        let doc = DualJson {
            y: pick(&self.y, &|p| inst.players()[p].clone()),
            z: pick(&self.z, &|r| inst.resources()[r].id.clone()),
        };
        serde_json::to_string_pretty(&doc).expect("dual serializes")
    }

    /// Parses `{"y": {player: "a/b"}, "z": {resource: "a/b"}}`; absent
    /// entries are zero.
    pub fn parse_json(inst: &Instance, text: &str) -> Result<Self> {
        let doc: DualJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        let mut sol = DualSolution::zero(inst);
        for (id, v) in doc.y {
            let p = inst.player_index(&id).ok_or(Error::UnknownPlayer(id))?;
            sol.y[p] = parse_rational(&v)?;
        }
        for (id, v) in doc.z {
            let r = inst.resource_index(&id).ok_or(Error::UnknownResource(id))?;
            sol.z[r] = parse_rational(&v)?;
        }
        Ok(sol)
    }
}

#[derive(Serialize, Deserialize)]
struct DualJson {
    #[serde(default)]
    y: BTreeMap<String, String>,
    #[serde(default)]
    z: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualVerdict {
    pub feasible: bool,
    pub objective: Rational,
    /// First violated configuration in enumeration order.
    pub violated: Option<Configuration>,
}

/// Checks every configuration constraint of DCLP(target) exactly.
///
/// With `z >= 0` the weight `z(S)` is smallest on some minimal configuration,
/// so scanning minimal configurations is complete. For `y_p > 0` the minimum
/// is recomputed independently by a min-cost covering search over `L_p`, and
/// the two must agree.
pub fn verify_dual(
    inst: &Instance,
    target: &Rational,
    sol: &DualSolution,
    caps: ClpCaps,
) -> Result<DualVerdict> {
    if sol.y.len() != inst.num_players() || sol.z.len() != inst.num_resources() {
        return Err(Error::Dimension(format!(
            "dual has {}/{} entries, instance {}/{}",
            sol.y.len(),
            sol.z.len(),
            inst.num_players(),
            inst.num_resources()
        )));
    }
    let objective = sol.objective();
    if sol.y.iter().chain(&sol.z).any(Signed::is_negative) {
        return Ok(DualVerdict {
            feasible: false,
            objective,
            violated: None,
        });
    }
    for p in 0..inst.num_players() {
        if !sol.y[p].is_positive() {
            continue;
        }
        check_covet_cap(inst, p, caps.max_covets)?;
        let items = covet_items(inst, p);
        let weight = |s: &[ResourceIx]| s.iter().fold(Rational::zero(), |a, &r| a + &sol.z[r]);
        let mut min_weight: Option<Rational> = None;
        let mut violated = None;
        for set in minimal_sets(&items, target) {
            let w = weight(&set);
            if w < sol.y[p] && violated.is_none() {
                violated = Some(Configuration {
                    owner: p,
                    total_value: inst.value(&set),
                    resources: set,
                });
            }
            if min_weight.as_ref().is_none_or(|m| w < *m) {
                min_weight = Some(w);
            }
        }
        let priced: Vec<(ResourceIx, Rational, Rational)> = items
            .iter()
            .map(|(r, v)| (*r, v.clone(), sol.z[*r].clone()))
            .collect();
        let searched = min_cost_cover(&priced, target).map(|(c, _)| c);
        if searched != min_weight {
            return Err(Error::Internal(
                "configuration scan and covering search disagree".into(),
            ));
        }
        if violated.is_some() {
            return Ok(DualVerdict {
                feasible: false,
                objective,
                violated,
            });
        }
    }
    Ok(DualVerdict {
        feasible: true,
        objective,
        violated: None,
    })
}

/// `F_U`: fat resources coveted by some player of `players`.
pub fn fat_for_players(inst: &Instance, fat: &[ResourceIx], players: &[PlayerIx]) -> Vec<ResourceIx> {
    let fat: BTreeSet<ResourceIx> = fat.iter().copied().collect();
    let mut out = BTreeSet::new();
    for &p in players {
        out.extend(inst.covets(p).iter().filter(|r| fat.contains(r)));
    }
    out.into_iter().collect()
}

fn check_disjoint_from_fat(y_set: &[ResourceIx], fat: &[ResourceIx]) -> Result<()> {
    if let Some(r) = y_set.iter().find(|r| fat.contains(r)) {
        return Err(Error::Hypothesis(format!(
            "Y contains fat resource index {r}"
        )));
    }
    Ok(())
}

/// `y_p = c` on `U`; `z_r = c` on `F_U`, `v_r` on `Y`, zero elsewhere.
pub fn build_dual_basic(
    inst: &Instance,
    players: &[PlayerIx],
    y_set: &[ResourceIx],
    c: &Rational,
    fat: &[ResourceIx],
) -> Result<DualSolution> {
    if c.is_negative() {
        return Err(Error::OutOfRange("c must be non-negative".into()));
    }
    check_disjoint_from_fat(y_set, fat)?;
    let mut sol = DualSolution::zero(inst);
    for &p in players {
        sol.y[p] = c.clone();
    }
    for r in fat_for_players(inst, fat, players) {
        sol.z[r] = c.clone();
    }
    for &r in y_set {
        sol.z[r] = inst.resource_value(r).clone();
    }
    Ok(sol)
}

/// As [`build_dual_basic`], except resources of `Y` worth more than `d` are
/// priced at `d`. Requires `0 <= c <= 2d`.
pub fn build_dual_refined(
    inst: &Instance,
    players: &[PlayerIx],
    y_set: &[ResourceIx],
    c: &Rational,
    d: &Rational,
    fat: &[ResourceIx],
) -> Result<DualSolution> {
    if c.is_negative() || *c > d * Rational::from_integer(2.into()) {
        return Err(Error::OutOfRange("need 0 <= c <= 2d".into()));
    }
    check_disjoint_from_fat(y_set, fat)?;
    let mut sol = DualSolution::zero(inst);
    for &p in players {
        sol.y[p] = c.clone();
    }
    for r in fat_for_players(inst, fat, players) {
        sol.z[r] = c.clone();
    }
    for &r in y_set {
        let v = inst.resource_value(r);
        sol.z[r] = if v > d { d.clone() } else { v.clone() };
    }
    Ok(sol)
}

/// Minimal thin configurations of the players in `players`. Every thin
/// configuration contains one of these, and both hypotheses below are
/// monotone under taking supersets, so scanning these suffices.
pub fn thin_configurations(
    inst: &Instance,
    target: &Rational,
    players: &[PlayerIx],
    fat: &[ResourceIx],
    caps: ClpCaps,
) -> Result<Vec<Configuration>> {
    let mut out = Vec::new();
    for &p in players {
        check_covet_cap(inst, p, caps.max_covets)?;
        let items: Vec<(ResourceIx, Rational)> = covet_items(inst, p)
            .into_iter()
            .filter(|(r, _)| !fat.contains(r))
            .collect();
        out.extend(minimal_sets(&items, target).into_iter().map(|resources| Configuration {
            owner: p,
            total_value: inst.value(&resources),
            resources,
        }));
    }
    Ok(out)
}

/// Hypothesis of the basic construction: `v(Y ∩ S) >= c` for every thin
/// configuration `S` of a player in `U`.
pub fn basic_hypothesis_holds(
    inst: &Instance,
    target: &Rational,
    players: &[PlayerIx],
    y_set: &[ResourceIx],
    c: &Rational,
    fat: &[ResourceIx],
    caps: ClpCaps,
) -> Result<bool> {
    let y: BTreeSet<ResourceIx> = y_set.iter().copied().collect();
    Ok(thin_configurations(inst, target, players, fat, caps)?
        .iter()
        .all(|s| {
            let inside: Vec<ResourceIx> = s.resources.iter().copied().filter(|r| y.contains(r)).collect();
            inst.value(&inside) >= *c
        }))
}

/// Hypothesis of the refined construction: for thin `S` with at most one
/// element of `Y_{>d}`, `v(Y_{<=d} ∩ S)` is at least `c` (none) or `c - d`
/// (one).
#[allow(clippy::too_many_arguments)]
pub fn refined_hypothesis_holds(
    inst: &Instance,
    target: &Rational,
    players: &[PlayerIx],
    y_set: &[ResourceIx],
    c: &Rational,
    d: &Rational,
    fat: &[ResourceIx],
    caps: ClpCaps,
) -> Result<bool> {
    let y: BTreeSet<ResourceIx> = y_set.iter().copied().collect();
    for s in thin_configurations(inst, target, players, fat, caps)? {
        let (heavy, light): (Vec<ResourceIx>, Vec<ResourceIx>) = s
            .resources
            .iter()
            .copied()
            .filter(|r| y.contains(r))
            .partition(|&r| inst.resource_value(r) > d);
        let need = match heavy.len() {
            0 => c.clone(),
            1 => c - d,
            _ => continue,
        };
        if inst.value(&light) < need {
            return Ok(false);
        }
    }
    Ok(true)
}
