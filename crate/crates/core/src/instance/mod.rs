//! Problem instances of the restricted max-min allocation problem.
//!
//! An [`Instance`] is a set of players, a set of resources with exact positive
//! values, and one covet list per player. Players and resources are addressed
//! internally by their index in lexicographic id order, which keeps every
//! enumeration in the crate deterministic.

mod generate;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_exact, parse_rational, Rational};

pub use generate::{gen_random, gen_two_value, RandomConfig, TwoValueConfig};
pub use oracle::{brute_force_opt, OptResult, OracleCaps};

/// Index of a player in [`Instance::players`].
pub type PlayerIx = usize;
/// Index of a resource in [`Instance::resources`].
pub type ResourceIx = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub id: String,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    players: Vec<String>,
    resources: Vec<Resource>,
    covets: Vec<Vec<ResourceIx>>,
}

impl Instance {
    /// Validates and builds an instance. Players without a covet entry get an
    /// empty covet list.
    pub fn new(
        players: impl IntoIterator<Item = String>,
        resources: impl IntoIterator<Item = (String, Rational)>,
        covets: impl IntoIterator<Item = (String, Vec<String>)>,
    ) -> Result<Self> {
        let mut player_set = BTreeSet::new();
        for p in players {
            if !player_set.insert(p.clone()) {
                return Err(Error::DuplicateId { kind: "player", id: p });
            }
        }
        let mut resource_map = BTreeMap::new();
        for (id, value) in resources {
            if !value.is_positive() {
                return Err(Error::NonPositiveValue {
                    id,
                    value: fmt_exact(&value),
                });
            }
            if resource_map.insert(id.clone(), value).is_some() {
                return Err(Error::DuplicateId { kind: "resource", id });
            }
        }
        let players: Vec<String> = player_set.into_iter().collect();
        let resources: Vec<Resource> = resource_map
            .into_iter()
            .map(|(id, value)| Resource { id, value })
            .collect();
        let mut inst = Instance {
            covets: vec![Vec::new(); players.len()],
            players,
            resources,
        };
        let mut seen = BTreeSet::new();
        for (player, list) in covets {
            let p = inst
                .player_index(&player)
                .ok_or_else(|| Error::DanglingPlayer(player.clone()))?;
            if !seen.insert(p) {
                return Err(Error::DuplicateId { kind: "covet list for player", id: player });
            }
            let mut set = BTreeSet::new();
            for r in list {
                let ix = inst.resource_index(&r).ok_or_else(|| Error::DanglingResource {
                    player: player.clone(),
                    resource: r.clone(),
                })?;
                set.insert(ix);
            }
            inst.covets[p] = set.into_iter().collect();
        }
        Ok(inst)
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn num_resources(&self) -> usize {
        self.resources.len()
    }

    /// Sorted resource indices coveted by `p` (the list `L_p`).
    pub fn covets(&self, p: PlayerIx) -> &[ResourceIx] {
        &self.covets[p]
    }

    pub fn resource_value(&self, r: ResourceIx) -> &Rational {
        &self.resources[r].value
    }

    pub fn player_index(&self, id: &str) -> Option<PlayerIx> {
        self.players.binary_search_by(|p| p.as_str().cmp(id)).ok()
    }

    pub fn resource_index(&self, id: &str) -> Option<ResourceIx> {
        self.resources.binary_search_by(|r| r.id.as_str().cmp(id)).ok()
    }

    /// Players coveting `r`.
    pub fn coveters(&self, r: ResourceIx) -> Vec<PlayerIx> {
        (0..self.players.len())
            .filter(|&p| self.covets[p].binary_search(&r).is_ok())
            .collect()
    }

    pub fn covets_resource(&self, p: PlayerIx, r: ResourceIx) -> bool {
        self.covets[p].binary_search(&r).is_ok()
    }

    /// Exact total value of a set of resource indices.
    pub fn value(&self, set: &[ResourceIx]) -> Rational {
        set.iter()
            .fold(Rational::zero(), |acc, &r| acc + &self.resources[r].value)
    }

    /// [`Instance::value`] for resource ids.
    pub fn value_of_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Rational> {
        let mut total = Rational::zero();
        for id in ids {
            let r = self
                .resource_index(id.as_ref())
                .ok_or_else(|| Error::UnknownResource(id.as_ref().to_string()))?;
            total += &self.resources[r].value;
        }
        Ok(total)
    }

    pub fn total_value(&self) -> Rational {
        self.resources
            .iter()
            .fold(Rational::zero(), |acc, r| acc + &r.value)
    }

    /// Renders the line-oriented instance document.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "players {}", self.players.join(" "));
        for r in &self.resources {
            let v = if r.value.is_integer() {
                r.value.numer().to_string()
            } else {
                fmt_exact(&r.value)
            };
            let _ = writeln!(out, "resource {} {}", r.id, v);
        }
        for (p, list) in self.covets.iter().enumerate() {
            let _ = write!(out, "covets {}", self.players[p]);
            for &r in list {
                let _ = write!(out, " {}", self.resources[r].id);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the line-oriented instance document.
    ///
    /// ```text
    /// players p1 p2
    /// resource a 1/3
    /// covets p1 a
    /// ```
    pub fn parse_document(text: &str) -> Result<Self> {
        let mut players: Option<Vec<String>> = None;
        let mut resources = Vec::new();
        let mut covets = Vec::new();
        for (ix, raw) in text.lines().enumerate() {
            let line = ix + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut words = trimmed.split_whitespace();
            let keyword = words.next().unwrap_or_default();
            let syntax = |message: String| Error::Syntax { line, message };
            match keyword {
                "players" => {
                    if players.is_some() {
                        return Err(syntax("second `players` line".into()));
                    }
                    players = Some(words.map(str::to_string).collect());
                }
                "resource" => {
                    let (Some(id), Some(value), None) = (words.next(), words.next(), words.next())
                    else {
                        return Err(syntax("expected `resource <id> <value>`".into()));
                    };
                    let value = parse_rational(value).map_err(|e| syntax(e.to_string()))?;
                    resources.push((id.to_string(), value));
                }
                "covets" => {
                    let Some(player) = words.next() else {
                        return Err(syntax("expected `covets <player> <resource>...`".into()));
                    };
                    covets.push((player.to_string(), words.map(str::to_string).collect()));
                }
                other => return Err(syntax(format!("unknown keyword `{other}`"))),
            }
        }
        let players = players.ok_or(Error::Syntax {
            line: 0,
            message: "missing `players` line".into(),
        })?;
        Instance::new(players, resources, covets)
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceJson {
            players: self.players.clone(),
            resources: self
                .resources
                .iter()
                .map(|r| (r.id.clone(), fmt_exact(&r.value)))
                .collect(),
            covets: self
                .covets
                .iter()
                .enumerate()
                .map(|(p, list)| {
                    (
                        self.players[p].clone(),
                        list.iter().map(|&r| self.resources[r].id.clone()).collect(),
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("instance serializes")
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let doc: InstanceJson =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        let mut resources = Vec::with_capacity(doc.resources.len());
        for (id, value) in doc.resources {
            let value = parse_rational(&value).map_err(|e| Error::Json(format!("{id}: {e}")))?;
            resources.push((id, value));
        }
        Instance::new(doc.players, resources, doc.covets)
    }

    /// Loads a document, choosing the JSON mirror when the file name ends in
    /// `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|ext| ext == "json") {
            Instance::parse_json(&text)
        } else {
            Instance::parse_document(&text)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    players: Vec<String>,
    resources: BTreeMap<String, String>,
    #[serde(default)]
    covets: BTreeMap<String, Vec<String>>,
}

/// An assignment of resource sets to players.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub assignment: Vec<Vec<ResourceIx>>,
}

impl Allocation {
    pub fn empty(num_players: usize) -> Self {
        Allocation {
            assignment: vec![Vec::new(); num_players],
        }
    }

    /// Checks `a(p) ⊆ L_p` and pairwise disjointness.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.assignment.len() != inst.num_players() {
            return Err(Error::Dimension(format!(
                "allocation has {} players, instance {}",
                self.assignment.len(),
                inst.num_players()
            )));
        }
        let mut used = BTreeSet::new();
        for (p, set) in self.assignment.iter().enumerate() {
            for &r in set {
                if r >= inst.num_resources() || !inst.covets_resource(p, r) {
                    return Err(Error::Hypothesis(format!(
                        "player `{}` receives a resource it does not covet",
                        inst.players()[p]
                    )));
                }
                if !used.insert(r) {
                    return Err(Error::Hypothesis(format!(
                        "resource `{}` assigned twice",
                        inst.resources()[r].id
                    )));
                }
            }
        }
        Ok(())
    }

    /// `min_p v(a(p))`, or zero for an instance without players.
    pub fn min_value(&self, inst: &Instance) -> Rational {
        self.assignment
            .iter()
            .map(|set| inst.value(set))
            .min()
            .unwrap_or_else(Rational::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    const TWO_BY_TWO: &str = "\
# minimal document
players p1 p2
resource a 1
resource b 1
covets p1 a b
covets p2 a b
";

    #[test]
    fn parses_minimal_document() {
        let inst = Instance::parse_document(TWO_BY_TWO).unwrap();
        assert_eq!(inst.num_players(), 2);
        assert_eq!(inst.num_resources(), 2);
        assert_eq!(inst.covets(1), &[0, 1]);
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let doc = "players p\nresource a 1\ncovets p a b\n";
        assert_eq!(
            Instance::parse_document(doc).unwrap_err(),
            Error::DanglingResource {
                player: "p".into(),
                resource: "b".into()
            }
        );
    }

    #[test]
    fn fraction_values_are_exact() {
        let doc = "players p\nresource a 1/3\ncovets p a\n";
        let inst = Instance::parse_document(doc).unwrap();
        assert_eq!(inst.resource_value(0), &ratio(1, 3));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let doc = "players p\nresource a\n";
        match Instance::parse_document(doc).unwrap_err() {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
        let doc = "players p\nresource a 0\n";
        assert!(matches!(
            Instance::parse_document(doc),
            Err(Error::NonPositiveValue { .. })
        ));
        let doc = "players p p\n";
        assert!(matches!(
            Instance::parse_document(doc),
            Err(Error::DuplicateId { .. })
        ));
        let doc = "players p\nresource a 1\nresource a 2\n";
        assert!(matches!(
            Instance::parse_document(doc),
            Err(Error::DuplicateId { .. })
        ));
    }

    #[test]
    fn value_sums_exactly() {
        let doc = "players p\nresource a 1/3\nresource b 1/6\ncovets p a b\n";
        let inst = Instance::parse_document(doc).unwrap();
        assert_eq!(inst.value(&[]), int(0));
        assert_eq!(inst.value_of_ids(&["a", "b"]).unwrap(), ratio(1, 2));
        assert_eq!(
            inst.value_of_ids(&["z"]).unwrap_err(),
            Error::UnknownResource("z".into())
        );
    }

    #[test]
    fn json_mirror_matches_text_format() {
        let inst = Instance::parse_document(TWO_BY_TWO).unwrap();
        let again = Instance::parse_json(&inst.to_json()).unwrap();
        assert_eq!(inst, again);
        let json = r#"{"players":["p1"],"resources":{"a":"1/2"},"covets":{"p1":["a"]}}"#;
        let inst = Instance::parse_json(json).unwrap();
        assert_eq!(inst.resource_value(0), &ratio(1, 2));
    }

    #[test]
    fn empty_covet_list_is_legal() {
        let inst = Instance::parse_document("players p q\nresource a 1\ncovets p a\n").unwrap();
        assert!(inst.covets(1).is_empty());
    }

    #[test]
    fn allocation_validation() {
        let inst = Instance::parse_document(TWO_BY_TWO).unwrap();
        let good = Allocation {
            assignment: vec![vec![0], vec![1]],
        };
        good.validate(&inst).unwrap();
        assert_eq!(good.min_value(&inst), int(1));
        let twice = Allocation {
            assignment: vec![vec![0], vec![0]],
        };
        assert!(twice.validate(&inst).is_err());
    }
}
