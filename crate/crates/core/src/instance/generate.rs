use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Instance;
use crate::error::{Error, Result};
use crate::rational::{int, ratio, Rational};

/// Resource counts and covet density for the (1, ε) generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoValueConfig {
    pub num_fat: usize,
    pub num_thin: usize,
    pub covet_density: f64,
}

/// Shape of a random instance. Values are drawn from the grid
/// `lo + (hi - lo) * k / value_steps`, `k = 0..=value_steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomConfig {
    pub num_players: usize,
    pub num_resources: usize,
    #[serde(with = "crate::rational::serde_exact")]
    pub value_lo: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub value_hi: Rational,
    pub value_steps: u32,
    pub covet_density: f64,
}

fn id(prefix: char, i: usize, count: usize) -> String {
    let width = count.max(1).to_string().len();
    format!("{prefix}{:0width$}", i + 1)
}

/// Samples a covet matrix where every resource has at least one coveter and
/// every player at least one coveted resource.
fn sample_covets(
    rng: &mut ChaCha8Rng,
    num_players: usize,
    num_resources: usize,
    density: f64,
) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::new(); num_players];
    if num_players == 0 {
        return rows;
    }
    for r in 0..num_resources {
        loop {
            let column: Vec<usize> = (0..num_players).filter(|_| rng.gen_bool(density)).collect();
            if !column.is_empty() {
                for p in column {
                    rows[p].push(r);
                }
                break;
            }
        }
    }
    if num_resources > 0 {
        for row in rows.iter_mut() {
            if row.is_empty() {
                row.push(rng.gen_range(0..num_resources));
            }
        }
    }
    rows
}

fn assemble(
    num_players: usize,
    values: Vec<Rational>,
    rows: Vec<Vec<usize>>,
    fat_prefix: Option<usize>,
) -> Result<Instance> {
    let n = values.len();
    let resource_id = |r: usize| match fat_prefix {
        Some(num_fat) if r < num_fat => id('f', r, num_fat),
        Some(num_fat) => id('t', r - num_fat, n - num_fat),
        None => id('r', r, n),
    };
    let players: Vec<String> = (0..num_players).map(|p| id('p', p, num_players)).collect();
    let resources = values
        .into_iter()
        .enumerate()
        .map(|(r, v)| (resource_id(r), v));
    let covets = rows.into_iter().enumerate().map(|(p, row)| {
        (
            id('p', p, num_players),
            row.into_iter().map(resource_id).collect(),
        )
    });
    Instance::new(players, resources, covets)
}

fn check_density(density: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::OutOfRange(format!("covet density {density} not in [0,1]")));
    }
    Ok(())
}

/// A (1, ε)-restricted instance: `num_fat` resources of value 1 and
/// `num_thin` of value `eps`. Deterministic in `seed`.
pub fn gen_two_value(
    num_players: usize,
    eps: &Rational,
    config: &TwoValueConfig,
    seed: u64,
) -> Result<Instance> {
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(Error::OutOfRange("eps must lie in (0, 1)".into()));
    }
    check_density(config.covet_density)?;
    let total = config.num_fat + config.num_thin;
    if config.covet_density == 0.0 && total > 0 && num_players > 0 {
        return Err(Error::OutOfRange(
            "zero covet density cannot cover any resource".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..total)
        .map(|r| if r < config.num_fat { int(1) } else { eps.clone() })
        .collect();
    let rows = sample_covets(&mut rng, num_players, total, config.covet_density);
    assemble(num_players, values, rows, Some(config.num_fat))
}

/// A random instance with values on a rational grid. Deterministic in `seed`.
pub fn gen_random(config: &RandomConfig, seed: u64) -> Result<Instance> {
    check_density(config.covet_density)?;
    if !config.value_lo.is_positive() || config.value_hi < config.value_lo {
        return Err(Error::OutOfRange(
            "value range must satisfy 0 < lo <= hi".into(),
        ));
    }
    if config.value_steps == 0 {
        return Err(Error::OutOfRange("value_steps must be positive".into()));
    }
    if config.num_players == 0 || config.num_resources == 0 {
        return Err(Error::OutOfRange(
            "random instances need at least one player and one resource".into(),
        ));
    }
    if config.covet_density == 0.0 {
        return Err(Error::OutOfRange(
            "zero covet density cannot cover any resource".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = &config.value_hi - &config.value_lo;
    let steps = i64::from(config.value_steps);
    let values = (0..config.num_resources)
        .map(|_| {
            let k = rng.gen_range(0..=steps);
            &config.value_lo + &span * ratio(k, steps)
        })
        .collect();
    let rows = sample_covets(
        &mut rng,
        config.num_players,
        config.num_resources,
        config.covet_density,
    );
    assemble(config.num_players, values, rows, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_config(density: f64) -> RandomConfig {
        RandomConfig {
            num_players: 4,
            num_resources: 8,
            value_lo: ratio(1, 4),
            value_hi: int(2),
            value_steps: 7,
            covet_density: density,
        }
    }

    #[test]
    fn two_value_values_are_one_or_eps() {
        let eps = ratio(1, 4);
        let cfg = TwoValueConfig {
            num_fat: 2,
            num_thin: 9,
            covet_density: 0.6,
        };
        let inst = gen_two_value(3, &eps, &cfg, 7).unwrap();
        assert!(inst
            .resources()
            .iter()
            .all(|r| r.value == int(1) || r.value == eps));
        let cfg = TwoValueConfig {
            num_fat: 1,
            num_thin: 0,
            covet_density: 1.0,
        };
        let inst = gen_two_value(1, &ratio(1, 2), &cfg, 0).unwrap();
        assert_eq!(inst.resources()[0].value, int(1));
    }

    #[test]
    fn two_value_rejects_bad_eps() {
        let cfg = TwoValueConfig {
            num_fat: 1,
            num_thin: 1,
            covet_density: 1.0,
        };
        assert!(gen_two_value(1, &int(1), &cfg, 0).is_err());
        assert!(gen_two_value(1, &int(0), &cfg, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_random(&random_config(0.5), 42).unwrap();
        let b = gen_random(&random_config(0.5), 42).unwrap();
        assert_eq!(a, b);
        let c = gen_random(&random_config(0.5), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_density_covets_everything() {
        let inst = gen_random(&random_config(1.0), 3).unwrap();
        for p in 0..inst.num_players() {
            assert_eq!(inst.covets(p).len(), inst.num_resources());
        }
    }

    #[test]
    fn every_resource_is_coveted() {
        for seed in 0..50 {
            let inst = gen_random(&random_config(0.5), seed).unwrap();
            for r in 0..inst.num_resources() {
                assert!(!inst.coveters(r).is_empty());
            }
            for p in 0..inst.num_players() {
                assert!(!inst.covets(p).is_empty());
            }
        }
    }

    #[test]
    fn zero_density_is_impossible() {
        assert!(gen_random(&random_config(0.0), 0).is_err());
    }
}
