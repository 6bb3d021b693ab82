//! Reporting layer: the 53/15 coefficient certificate, the integrality-gap
//! experiment harness, and the `santa` command line.

mod cli;

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::{
    brute_force_opt, gen_random, gen_two_value, Allocation, Instance, OracleCaps, RandomConfig, TwoValueConfig,
};
use crate::lp::{compute_t_star, ClpCaps, TStarResult};
use crate::rational::{fmt_exact, ratio, Rational};
use crate::topology::phase_bound_coefficients;
use crate::two_values::{f_gap, thin_value};

pub use cli::{cli_main, run};

pub const SCHEMA: &str = "santa-gap/1";

/// Weights of the snapshot inequalities in the 53/15 combination.
pub fn convex_weights() -> [Rational; 4] {
    [ratio(1, 35), ratio(26, 245), ratio(46, 2205), ratio(38, 45)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientCertificate {
    #[serde(rename = "T", with = "crate::rational::serde_exact")]
    pub target: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub m: Rational,
    #[serde(serialize_with = "exact_array")]
    pub weights: [Rational; 4],
    #[serde(with = "crate::rational::serde_exact")]
    pub weight_sum: Rational,
    /// Keyed `n1..n4`.
    #[serde(serialize_with = "exact_map")]
    pub per_variable: BTreeMap<String, Rational>,
    pub all_at_most_one: bool,
    /// `T ≥ (53/15)·m`
    pub above_threshold: bool,
}

fn exact_array<S: Serializer>(v: &[Rational; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_exact))
}

fn exact_map<S: Serializer>(v: &BTreeMap<String, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(v.iter().map(|(k, q)| (k, fmt_exact(q))))
}

/// Combines the four snapshot bounds with the fixed weights. Needs `T > 3m`
/// and `m ≥ 0`.
pub fn verify_convex_combination(target: &Rational, m: &Rational) -> Result<CoefficientCertificate> {
    if m.is_negative() {
        return Err(Error::OutOfRange("m must be non-negative".into()));
    }
    let rows = phase_bound_coefficients(target, m)?;
    let weights = convex_weights();
    let weight_sum = weights.iter().fold(Rational::zero(), |a, w| a + w);
    let per_variable: BTreeMap<String, Rational> = (0..4)
        .map(|j| {
            let combined = rows
                .iter()
                .zip(&weights)
                .fold(Rational::zero(), |acc, (row, w)| acc + w * &row[j]);
            (format!("n{}", j + 1), combined)
        })
        .collect();
    let all_at_most_one = per_variable.values().all(|c| *c <= Rational::one());
    let above_threshold = target * Rational::from_integer(15.into()) >= m * Rational::from_integer(53.into());
    if all_at_most_one != above_threshold {
        return Err(Error::Internal(format!(
            "coefficient test disagrees with the 53/15 threshold at T = {}, m = {}",
            fmt_exact(target),
            fmt_exact(m)
        )));
    }
    Ok(CoefficientCertificate {
        target: target.clone(),
        m: m.clone(),
        weights,
        weight_sum,
        per_variable,
        all_at_most_one,
        above_threshold,
    })
}

/// `T*/OPT` for one instance; `gap = None` stands for ∞ (OPT = 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub instance_id: String,
    #[serde(with = "crate::rational::serde_exact")]
    pub t_star: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub opt: Rational,
    #[serde(serialize_with = "gap_string")]
    pub gap: Option<Rational>,
    pub opt_zero: bool,
    #[serde(with = "crate::rational::serde_exact")]
    pub bound_claimed: Rational,
    pub bound_respected: bool,
    /// `f(ε/T*)` for (1, ε) instances with `T* > 0`.
    #[serde(with = "crate::rational::serde_exact_opt", skip_serializing_if = "Option::is_none")]
    pub two_value_bound: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_value_bound_respected: Option<bool>,
}

fn gap_string<S: Serializer>(gap: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match gap {
        Some(q) => s.serialize_str(&fmt_exact(q)),
        None => s.serialize_str("inf"),
    }
}

impl GapReport {
    /// A bound failure on a non-degenerate instance. `OPT = 0` is flagged
    /// through `opt_zero` instead.
    pub fn exceeds(&self) -> bool {
        !self.opt_zero && (!self.bound_respected || self.two_value_bound_respected == Some(false))
    }

    pub fn tsv_header() -> &'static str {
        "instance_id\tt_star\topt\tgap\tgap_decimal\tbound\trespected"
    }

    pub fn tsv_row(&self) -> String {
        let (gap, decimal) = match &self.gap {
            Some(g) => (fmt_exact(g), format!("{:.6}", crate::rational::to_f64(g))),
            None => ("inf".to_string(), "inf".to_string()),
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.instance_id,
            fmt_exact(&self.t_star),
            fmt_exact(&self.opt),
            gap,
            decimal,
            fmt_exact(&self.bound_claimed),
            !self.exceeds()
        )
    }
}

/// Everything needed to recheck a reported exceedance by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Audit {
    pub instance_id: String,
    pub instance: String,
    /// Positive primal weights at `T*`, as `(configuration, weight)`.
    pub t_star_primal: Vec<(String, String)>,
    /// Farkas certificate for the next candidate above `T*`.
    pub next_infeasible_dual: Option<String>,
    pub opt_witness: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skip {
    pub instance_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BatchConfig {
    Random {
        config: RandomConfig,
        count: usize,
    },
    TwoValue {
        num_players: usize,
        #[serde(with = "crate::rational::serde_exact")]
        epsilon: Rational,
        config: TwoValueConfig,
        count: usize,
    },
}

impl BatchConfig {
    fn count(&self) -> usize {
        match self {
            BatchConfig::Random { count, .. } | BatchConfig::TwoValue { count, .. } => *count,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            BatchConfig::Random { .. } => "random",
            BatchConfig::TwoValue { .. } => "two-value",
        }
    }

    fn generate(&self, seed: u64) -> Result<Instance> {
        match self {
            BatchConfig::Random { config, .. } => gen_random(config, seed),
            BatchConfig::TwoValue {
                num_players,
                epsilon,
                config,
                ..
            } => gen_two_value(*num_players, epsilon, config, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub seed: u64,
    pub batch: BatchConfig,
    #[serde(with = "crate::rational::serde_exact")]
    pub bound: Rational,
    pub reports: Vec<GapReport>,
    pub skipped: Vec<Skip>,
    pub exceedances: Vec<Audit>,
}

impl ExperimentReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(GapReport::tsv_header());
        out.push('\n');
        for r in &self.reports {
            out.push_str(&r.tsv_row());
            out.push('\n');
        }
        out
    }
}

/// Exact `T*` and `OPT` for one instance, compared against `bound` (and
/// against `f(ε/T*)` when the instance takes two values).
pub fn gap_for_instance(
    instance_id: &str,
    inst: &Instance,
    bound: &Rational,
    caps: ClpCaps,
    oracle: OracleCaps,
) -> Result<(GapReport, TStarResult, Allocation)> {
    let t = compute_t_star(inst, caps)?;
    let opt = brute_force_opt(inst, oracle)?;
    if opt.opt_value > t.t_star {
        return Err(Error::Internal(format!(
            "OPT = {} exceeds T* = {} on {instance_id}",
            fmt_exact(&opt.opt_value),
            fmt_exact(&t.t_star)
        )));
    }
    let gap = (!opt.opt_value.is_zero()).then(|| &t.t_star / &opt.opt_value);
    let bound_respected = gap.as_ref().is_some_and(|g| g <= bound);
    let two_value_bound = match thin_value(inst) {
        Ok(eps) if t.t_star.is_positive() => Some(f_gap(&(eps / &t.t_star))?),
        _ => None,
    };
    let two_value_bound_respected = two_value_bound
        .as_ref()
        .map(|f| gap.as_ref().is_some_and(|g| g <= f));
    let report = GapReport {
        instance_id: instance_id.to_string(),
        t_star: t.t_star.clone(),
        opt: opt.opt_value,
        opt_zero: gap.is_none(),
        gap,
        bound_claimed: bound.clone(),
        bound_respected,
        two_value_bound,
        two_value_bound_respected,
    };
    Ok((report, t, opt.witness))
}

pub fn allocation_by_id(inst: &Instance, alloc: &Allocation) -> BTreeMap<String, Vec<String>> {
    alloc
        .assignment
        .iter()
        .enumerate()
        .map(|(p, set)| {
            let ids = set.iter().map(|&r| inst.resources()[r].id.clone()).collect();
            (inst.players()[p].clone(), ids)
        })
        .collect()
}

fn audit(instance_id: &str, inst: &Instance, t: &TStarResult, witness: &Allocation) -> Audit {
    let t_star_primal = t
        .feasibility_witness
        .iter()
        .flat_map(|w| &w.primal)
        .map(|(conf, x)| (conf.describe(inst), fmt_exact(x)))
        .collect();
    Audit {
        instance_id: instance_id.to_string(),
        instance: inst.to_document(),
        t_star_primal,
        next_infeasible_dual: t
            .next_infeasible
            .as_ref()
            .and_then(|r| r.certificate.as_ref())
            .map(|d| d.to_json(inst)),
        opt_witness: allocation_by_id(inst, witness),
    }
}

/// An evaluated instance with its audit if it broke a bound, or the reason
/// it was skipped.
type Row = std::result::Result<(GapReport, Option<Audit>), Skip>;

/// Generates `count` instances with seeds `seed, seed+1, …` and evaluates
/// them in parallel. Output order follows the instance index, so equal
/// inputs give byte-identical reports.
pub fn run_gap_experiment(batch: &BatchConfig, bound: &Rational, seed: u64) -> Result<ExperimentReport> {
    let rows: Vec<Row> = (0..batch.count())
        .into_par_iter()
        .map(|i| -> Result<Row> {
            let instance_seed = seed.wrapping_add(i as u64);
            let id = format!("{}-{seed}-{i:04}", batch.label());
            let inst = batch.generate(instance_seed)?;
            match gap_for_instance(&id, &inst, bound, ClpCaps::default(), OracleCaps::default()) {
                Ok((report, t, witness)) => {
                    let audit = report.exceeds().then(|| audit(&id, &inst, &t, &witness));
                    Ok(Ok((report, audit)))
                }
                Err(e @ (Error::CapExceeded { .. } | Error::TooLarge(_))) => Ok(Err(Skip {
                    instance_id: id,
                    reason: e.to_string(),
                })),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport {
        schema: SCHEMA,
        seed,
        batch: batch.clone(),
        bound: bound.clone(),
        reports: Vec::new(),
        skipped: Vec::new(),
        exceedances: Vec::new(),
    };
    for row in rows {
        match row {
            Ok((r, a)) => {
                report.reports.push(r);
                report.exceedances.extend(a);
            }
            Err(s) => report.skipped.push(s),
        }
    }
    Ok(report)
}
