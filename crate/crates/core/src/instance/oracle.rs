use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Allocation, Instance};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCaps {
    pub max_resources: usize,
    pub max_players: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_resources: 14,
            max_players: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub opt_value: Rational,
    pub witness: Allocation,
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<usize>,
    coveters: Vec<Vec<usize>>,
    current: Vec<Rational>,
    /// Value of still-unassigned coveted resources, per player.
    remaining: Vec<Rational>,
    assignment: Vec<Option<usize>>,
    best: Option<(Rational, Vec<Option<usize>>)>,
}

impl Search<'_> {
    fn upper_bound(&self) -> Rational {
        self.current
            .iter()
            .zip(&self.remaining)
            .map(|(c, r)| c + r)
            .min()
            .unwrap_or_else(Rational::zero)
    }

    fn dfs(&mut self, depth: usize) {
        if let Some((best, _)) = &self.best {
            if self.upper_bound() <= *best {
                return;
            }
        }
        if depth == self.order.len() {
            let value = self.current.iter().min().cloned().unwrap_or_else(Rational::zero);
            self.best = Some((value, self.assignment.clone()));
            return;
        }
        let r = self.order[depth];
        let v = self.inst.resource_value(r).clone();
        let mut owners = self.coveters[r].clone();
        // poorest player first so good incumbents appear early
        owners.sort_by(|&a, &b| self.current[a].cmp(&self.current[b]).then(a.cmp(&b)));
        for &p in &self.coveters[r] {
            self.remaining[p] -= &v;
        }
        for p in owners {
            self.current[p] += &v;
            self.assignment[r] = Some(p);
            self.dfs(depth + 1);
            self.assignment[r] = None;
            self.current[p] -= &v;
        }
        for &p in &self.coveters[r] {
            self.remaining[p] += &v;
        }
    }
}

/// Exact OPT by exhaustive assignment with branch-and-bound on the min-value.
///
/// Every coveted resource goes to one of its coveters: values are positive,
/// so leaving a coveted resource unassigned never raises the min-value.
/// Resources nobody covets stay unassigned.
pub fn brute_force_opt(inst: &Instance, caps: OracleCaps) -> Result<OptResult> {
    if inst.num_resources() > caps.max_resources || inst.num_players() > caps.max_players {
        return Err(Error::TooLarge(format!(
            "{} players / {} resources exceeds {} / {}",
            inst.num_players(),
            inst.num_resources(),
            caps.max_players,
            caps.max_resources
        )));
    }
    let coveters: Vec<Vec<usize>> = (0..inst.num_resources()).map(|r| inst.coveters(r)).collect();
    let mut order: Vec<usize> = (0..inst.num_resources())
        .filter(|&r| !coveters[r].is_empty())
        .collect();
    order.sort_by(|&a, &b| inst.resource_value(b).cmp(inst.resource_value(a)).then(a.cmp(&b)));
    let remaining = (0..inst.num_players())
        .map(|p| inst.value(inst.covets(p)))
        .collect();
    let mut search = Search {
        inst,
        order,
        coveters,
        current: vec![Rational::zero(); inst.num_players()],
        remaining,
        assignment: vec![None; inst.num_resources()],
        best: None,
    };
    search.dfs(0);
    let (opt_value, assignment) = search
        .best
        .ok_or_else(|| Error::Internal("oracle found no leaf".into()))?;
    let mut witness = Allocation::empty(inst.num_players());
    for (r, owner) in assignment.into_iter().enumerate() {
        if let Some(p) = owner {
            witness.assignment[p].push(r);
        }
    }
    witness.validate(inst)?;
    if witness.min_value(inst) != opt_value {
        return Err(Error::Internal(
            "oracle witness disagrees with reported optimum".into(),
        ));
    }
    Ok(OptResult { opt_value, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn parse(doc: &str) -> Instance {
        Instance::parse_document(doc).unwrap()
    }

    #[test]
    fn single_player_gets_everything() {
        let inst = parse("players p\nresource a 5\ncovets p a\n");
        assert_eq!(brute_force_opt(&inst, OracleCaps::default()).unwrap().opt_value, int(5));
    }

    #[test]
    fn contested_single_resource_gives_zero() {
        let inst = parse("players p q\nresource a 1\ncovets p a\ncovets q a\n");
        assert_eq!(brute_force_opt(&inst, OracleCaps::default()).unwrap().opt_value, int(0));
    }

    #[test]
    fn two_value_six_thin() {
        let mut doc = String::from("players p q\n");
        for i in 0..6 {
            doc.push_str(&format!("resource e{i} 1/3\n"));
        }
        doc.push_str("covets p e0 e1 e2 e3 e4 e5\ncovets q e0 e1 e2 e3 e4 e5\n");
        let res = brute_force_opt(&parse(&doc), OracleCaps::default()).unwrap();
        assert_eq!(res.opt_value, int(1));
        assert!(res.witness.assignment.iter().all(|s| s.len() == 3));
    }

    #[test]
    fn empty_covet_list_gives_zero() {
        let inst = parse("players p q\nresource a 1\ncovets p a\n");
        assert_eq!(brute_force_opt(&inst, OracleCaps::default()).unwrap().opt_value, int(0));
    }

    #[test]
    fn cap_is_enforced() {
        let mut doc = String::from("players p\n");
        for i in 0..15 {
            doc.push_str(&format!("resource r{i:02} 1\n"));
        }
        let err = brute_force_opt(&parse(&doc), OracleCaps::default()).unwrap_err();
        assert!(matches!(err, Error::TooLarge(_)));
    }

    #[test]
    fn fractional_values() {
        let inst = parse(
            "players p q\nresource a 1/2\nresource b 1/3\nresource c 1/6\n\
             covets p a b c\ncovets q a b c\n",
        );
        assert_eq!(brute_force_opt(&inst, OracleCaps::default()).unwrap().opt_value, ratio(1, 2));
    }
}
