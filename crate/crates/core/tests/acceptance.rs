//! Acceptance runner. One PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails or runs past its time budget.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use santa_core::allocation_graph::{fat_set, find_independent_transversal, TransversalCaps};
use santa_core::gap_report::{convex_weights, gap_for_instance, run, verify_convex_combination};
use santa_core::instance::{brute_force_opt, gen_random, OracleCaps, RandomConfig};
use santa_core::lp::{
    basic_hypothesis_holds, build_dual_basic, build_dual_refined, compute_t_star, fat_for_players,
    refined_hypothesis_holds, thin_configurations, verify_dual, ClpCaps,
};
use santa_core::rational::{int, ratio, Rational};
use santa_core::topology::{
    classify_edge, execute_sequence, hall_eta_check, DeSequence, DeStep, Edge, Eta, EtaEngine, Graph,
};
use santa_core::two_values::{f_gap, gap_bound_grid, limit_bound, r_c, thin_value};

use common::{dense_eta, hypothesis_two_value, random_graph, random_partite, rng, small_instance};

type Outcome = Result<(String, Duration), String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: u64) -> Rational {
    Rational::from_integer(n.into())
}

fn as_option(eta: Eta) -> Option<u32> {
    match eta {
        Eta::Finite(k) => Some(k),
        Eta::Infinite => None,
    }
}

// (c, r_c) for c = 1..30, the published table
const PUBLISHED_TABLE: [u64; 30] = [
    1, 1, 1, 2, 2, 2, 3, 3, 4, 4, 4, 5, 5, 6, 6, 6, 7, 7, 8, 8, 8, 9, 9, 10, 10, 11, 11, 11, 12, 12,
];

fn rc_table_matches() -> Outcome {
    let start = Instant::now();
    let mut out = Vec::new();
    let code = run(["santa", "rc-table", "--max", "30"], &mut out);
    let elapsed = start.elapsed();
    check(code == 0, || format!("exit code {code}"))?;
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    check(rows.len() == 30, || format!("{} rows", rows.len()))?;
    for (row, (c, r)) in rows.iter().zip((1u64..).zip(PUBLISHED_TABLE)) {
        let got_c: u64 = row[0].parse().map_err(|_| format!("bad c {:?}", row[0]))?;
        let got_r: u64 = row[1].parse().map_err(|_| format!("bad r {:?}", row[1]))?;
        check((got_c, got_r) == (c, r), || format!("row {row:?}, want ({c}, {r})"))?;
        let want = Rational::new(c.into(), r.into());
        let got: Rational = row[2].parse().map_err(|_| format!("bad ratio {:?}", row[2]))?;
        check(got == want, || format!("ratio {got} at c = {c}, want {want}"))?;
    }
    Ok(("30 pairs, exact ratios".into(), elapsed))
}

/// `atanh(1/k)` as a partial sum of `Σ 1/((2j+1) k^(2j+1))`.
fn atanh_recip(k: u64, terms: u32) -> Rational {
    (0..terms).fold(Rational::zero(), |acc, j| {
        let power = 2 * j + 1;
        let den = num_bigint::BigInt::from(k).pow(power) * num_bigint::BigInt::from(power);
        acc + Rational::new(1.into(), den)
    })
}

fn limit_bound_oracle() -> Outcome {
    let start = Instant::now();
    let bound = limit_bound();
    let elapsed = start.elapsed();
    // ln(4/3) = 2 atanh(1/7), ln(9/8) = 2 atanh(1/17); 30 terms put the
    // truncation error far below f64 resolution
    let ln_4_3 = int(2) * atanh_recip(7, 30);
    let ln_9_8 = int(2) * atanh_recip(17, 30);
    let exact = ratio(10, 3) - ratio(4, 3) * ln_4_3 - int(4) * ln_9_8;
    let oracle = exact.to_f64().ok_or("oracle does not fit in f64")?;
    check(bound < 2.479, || format!("limit bound {bound} is not below 2.479"))?;
    check((bound - oracle).abs() < 1e-9, || format!("{bound} vs oracle {oracle}"))?;
    Ok((format!("{bound:.12} (oracle {oracle:.12})"), elapsed))
}

/// The four snapshot bounds, each written as `c·(|U| − |F_U|) ≤ Σ a_j n_j`
/// and divided through by its `c`.
fn snapshot_rows_oracle(t: &Rational, m: &Rational) -> Vec<[Rational; 4]> {
    let k = |n: i64| Rational::from_integer(n.into());
    let z = Rational::zero;
    let raw = [
        (t - k(3) * m, [k(2) * m, ratio(7, 3) * (t - k(3) * m), z(), z()]),
        (
            k(2) * (t - k(3) * m),
            [k(2) * m, ratio(7, 3) * (t - k(3) * m), ratio(5, 2) * (t - k(3) * m), z()],
        ),
        (t - k(2) * m, [k(2) * m, ratio(7, 3) * m, ratio(5, 2) * m, z()]),
        (t - m, [k(2) * m, ratio(7, 3) * m, ratio(5, 2) * m, k(3) * m]),
    ];
    raw.into_iter().map(|(c, row)| row.map(|a| a / &c)).collect()
}

fn convex_combination() -> Outcome {
    let (t, m) = (ratio(53, 15), int(1));
    // oracle first: the published weights, rows rebuilt from the covers
    let weights = [ratio(1, 35), ratio(26, 245), ratio(46, 2205), ratio(38, 45)];
    let rows = snapshot_rows_oracle(&t, &m);
    let oracle: Vec<Rational> = (0..4)
        .map(|j| weights.iter().zip(&rows).map(|(w, row)| w * &row[j]).sum())
        .collect();
    check(weights.iter().sum::<Rational>() == int(1), || "oracle weights do not sum to 1".into())?;
    check(oracle.iter().all(|c| *c == int(1)), || format!("oracle coefficients {oracle:?}"))?;
    check(convex_weights() == weights, || "library weights differ from the published ones".into())?;

    let start = Instant::now();
    let cert = verify_convex_combination(&t, &m).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(cert.weight_sum == int(1), || format!("weight sum {}", cert.weight_sum))?;
    for (j, want) in oracle.iter().enumerate() {
        let key = format!("n{}", j + 1);
        let got = cert.per_variable.get(&key).ok_or_else(|| format!("missing {key}"))?;
        check(got == want, || format!("{key} = {got}, oracle {want}"))?;
    }
    check(cert.all_at_most_one && cert.above_threshold, || "flags not set".into())?;
    Ok(("weights sum to 1, n1..n4 all exactly 1".into(), elapsed))
}

fn eta_goldens() -> Outcome {
    let triangles = |k: usize| (1..k).fold(Graph::complete(3), |g, _| g.disjoint_union(&Graph::complete(3)));
    let cases = [
        ("empty", Graph::edgeless(0), Some(0)),
        ("point", Graph::edgeless(1), None),
        ("C5", Graph::cycle(5), Some(2)),
        ("K2", Graph::complete(2), Some(1)),
        ("K3", Graph::complete(3), Some(1)),
        ("K4", Graph::complete(4), Some(1)),
        ("1 triangle", triangles(1), Some(1)),
        ("2 triangles", triangles(2), Some(2)),
        ("3 triangles", triangles(3), Some(3)),
    ];
    let mut slowest = Duration::ZERO;
    for (name, g, want) in cases {
        check(dense_eta(&g) == want, || format!("dense oracle disagrees on {name}"))?;
        let engine = EtaEngine::default();
        let start = Instant::now();
        let got = engine.eta(&g).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        check(as_option(got) == want, || format!("{name}: η = {got:?}, want {want:?}"))?;
        check(elapsed < Duration::from_secs(1), || format!("{name} took {elapsed:?}"))?;
        slowest = slowest.max(elapsed);
    }
    Ok(("9 goldens, dense homology agrees".into(), slowest))
}

fn meshulam_suite() -> Outcome {
    let start = Instant::now();
    let engine = EtaEngine::default();
    let mut r = rng(500);
    let mut edges = 0;
    for i in 0..500 {
        let g = random_graph(&mut r, 8);
        let eta = engine.eta(&g).map_err(|e| e.to_string())?;
        check(as_option(eta) == dense_eta(&g), || format!("graph {i}: engine and dense η differ"))?;
        for &e in g.edges() {
            let c = classify_edge(&g, e, &engine).map_err(|e| e.to_string())?;
            check(c.deletable || c.explodable, || format!("graph {i}: {e:?} is neither"))?;
            check(c.eta >= c.eta_deleted.min(c.eta_exploded.plus(1)), || {
                format!("graph {i}: inequality fails at {e:?}")
            })?;
            edges += 1;
        }
    }
    Ok((format!("500 graphs, {edges} edges, no violations"), start.elapsed()))
}

fn hall_suite() -> Outcome {
    let start = Instant::now();
    let engine = EtaEngine::default();
    let mut r = rng(200);
    let mut held = 0;
    for i in 0..200 {
        let pg = random_partite(&mut r, 4, 3);
        let hall = hall_eta_check(&pg, &engine, 8).map_err(|e| e.to_string())?;
        let t = find_independent_transversal(&pg, TransversalCaps::default()).map_err(|e| e.to_string())?;
        if let Some(t) = &t {
            let independent = t
                .iter()
                .all(|&a| t.iter().all(|&b| a == b || !pg.graph.has_edge(Edge::new(a, b))));
            let one_per_class = t.len() == pg.parts.len() && t.iter().zip(&pg.parts).all(|(v, c)| c.contains(v));
            check(independent && one_per_class, || format!("graph {i}: bad transversal {t:?}"))?;
        }
        if hall.holds {
            held += 1;
            check(t.is_some(), || format!("graph {i}: Hall holds but no transversal"))?;
        }
    }
    check(held > 0, || "the Hall condition never held".into())?;
    Ok((format!("200 graphs, Hall held on {held}, no violations"), start.elapsed()))
}

fn random_subset<T: Copy>(r: &mut impl Rng, items: &[T]) -> Vec<T> {
    items.iter().copied().filter(|_| r.gen_bool(0.5)).collect()
}

fn duality_suite() -> Outcome {
    let start = Instant::now();
    let caps = ClpCaps::default();
    let mut r = rng(700);
    let (mut basic, mut refined, mut rejected) = (0, 0, 0);
    for seed in 1000..1200u64 {
        let inst = small_instance(seed);
        let target = compute_t_star(&inst, caps).map_err(|e| e.to_string())?.t_star;
        let opt = brute_force_opt(&inst, OracleCaps::default()).map_err(|e| e.to_string())?;
        check(opt.opt_value <= target, || format!("seed {seed}: OPT > T*"))?;
        if target.is_zero() {
            continue;
        }
        let alpha = [ratio(1, 4), ratio(1, 3), ratio(1, 2)].choose(&mut r).unwrap().clone();
        let fat = fat_set(&inst, &target, &alpha).map_err(|e| e.to_string())?;
        let players = random_subset(&mut r, &(0..inst.num_players()).collect::<Vec<_>>());
        let non_fat: Vec<usize> = (0..inst.num_resources()).filter(|x| !fat.contains(x)).collect();
        let y_set = random_subset(&mut r, &non_fat);
        let y: BTreeSet<usize> = y_set.iter().copied().collect();
        let f_u = q(fat_for_players(&inst, &fat, &players).len() as u64);
        let u = q(players.len() as u64);
        let thin = thin_configurations(&inst, &target, &players, &fat, caps).map_err(|e| e.to_string())?;
        let inside = |s: &[usize]| -> Vec<usize> { s.iter().copied().filter(|x| y.contains(x)).collect() };

        // basic construction: the largest admissible c and a random one
        let c_max = thin.iter().map(|s| inst.value(&inside(&s.resources))).min().unwrap_or_else(|| int(1));
        for c in [c_max, ratio(r.gen_range(1..=8), 2)] {
            let holds = basic_hypothesis_holds(&inst, &target, &players, &y_set, &c, &fat, caps)
                .map_err(|e| e.to_string())?;
            if !holds {
                rejected += 1;
                continue;
            }
            let sol = build_dual_basic(&inst, &players, &y_set, &c, &fat).map_err(|e| e.to_string())?;
            let v = verify_dual(&inst, &target, &sol, caps).map_err(|e| e.to_string())?;
            check(v.feasible, || format!("seed {seed}: basic dual violates {:?}", v.violated))?;
            let displayed = &c * (&u - &f_u) - inst.value(&y_set);
            check(v.objective == displayed, || format!("seed {seed}: basic objective mismatch"))?;
            check(!v.objective.is_positive(), || format!("seed {seed}: v(Y) < c(|U| - |F_U|)"))?;
            basic += 1;
        }

        // refined construction with a random d and the largest admissible c
        let d = ratio(r.gen_range(1..=6), 2);
        let mut c = int(2) * &d;
        for s in &thin {
            let (heavy, light): (Vec<usize>, Vec<usize>) =
                inside(&s.resources).into_iter().partition(|&x| *inst.resource_value(x) > d);
            match heavy.len() {
                0 => c = c.min(inst.value(&light)),
                1 => c = c.min(inst.value(&light) + &d),
                _ => {}
            }
        }
        let holds = refined_hypothesis_holds(&inst, &target, &players, &y_set, &c, &d, &fat, caps)
            .map_err(|e| e.to_string())?;
        if !holds {
            rejected += 1;
            continue;
        }
        let sol = build_dual_refined(&inst, &players, &y_set, &c, &d, &fat).map_err(|e| e.to_string())?;
        let v = verify_dual(&inst, &target, &sol, caps).map_err(|e| e.to_string())?;
        check(v.feasible, || format!("seed {seed}: refined dual violates {:?}", v.violated))?;
        // the right-hand side minimised over splits Y = Y1 ⊔ Y2 prices each
        // resource at min(v, d)
        let priced: Rational = y_set.iter().map(|&x| inst.resource_value(x).clone().min(d.clone())).sum();
        let displayed = &c * (&u - &f_u) - &priced;
        check(v.objective == displayed, || format!("seed {seed}: refined objective mismatch"))?;
        for _ in 0..4 {
            let y1 = random_subset(&mut r, &y_set);
            let y2: Vec<usize> = y_set.iter().copied().filter(|x| !y1.contains(x)).collect();
            check(&c * (&u - &f_u) <= &d * q(y1.len() as u64) + inst.value(&y2), || {
                format!("seed {seed}: refined inequality fails")
            })?;
        }
        refined += 1;
    }
    check(basic >= 200 && refined >= 150, || format!("too few constructions: {basic} basic, {refined} refined"))?;
    Ok((
        format!("200 instances, {basic} basic and {refined} refined duals verified, {rejected} hypotheses rejected"),
        start.elapsed(),
    ))
}

fn gap_consistency() -> Outcome {
    let start = Instant::now();
    let (caps, oracle) = (ClpCaps::default(), OracleCaps::default());
    let bound = ratio(53, 15);
    let mut worst = int(0);
    let mut zero_opt = 0;
    let mut kept = 0;
    let mut seed = 0u64;
    while kept < 100 {
        let mut r = rng(seed ^ 0xacc);
        let config = RandomConfig {
            num_players: r.gen_range(2..=4),
            num_resources: r.gen_range(3..=9),
            value_lo: ratio(1, 4),
            value_hi: int(4),
            value_steps: 7,
            covet_density: r.gen_range(0.3..0.8),
        };
        let inst = gen_random(&config, seed).map_err(|e| e.to_string())?;
        let (report, _, _) =
            gap_for_instance(&format!("random-{seed}"), &inst, &bound, caps, oracle).map_err(|e| e.to_string())?;
        seed += 1;
        if report.opt_zero {
            zero_opt += 1;
            continue;
        }
        let gap = report.gap.clone().unwrap();
        check(gap <= bound && report.bound_respected, || format!("seed {}: gap {gap}", seed - 1))?;
        worst = worst.max(gap);
        kept += 1;
    }

    let mut two_value_worst = int(0);
    let mut next = 0;
    for _ in 0..50 {
        let (used, inst, t) = hypothesis_two_value(next);
        next = used + 1;
        let eps = thin_value(&inst).map_err(|e| e.to_string())?;
        let c = (&t / &eps).ceil().to_u64().ok_or("c out of range")?;
        let opt = brute_force_opt(&inst, oracle).map_err(|e| e.to_string())?.opt_value;
        let floor = q(r_c(c).map_err(|e| e.to_string())?) * &eps;
        check(opt >= floor, || format!("seed {used}: OPT {opt} below r_c·ε = {floor}"))?;
        let gap = &t / &opt;
        let f = f_gap(&(&eps / &t)).map_err(|e| e.to_string())?;
        check(gap <= f, || format!("seed {used}: gap {gap} above f = {f}"))?;
        two_value_worst = two_value_worst.max(gap);
    }
    Ok((
        format!(
            "100 random (worst gap {worst}, {zero_opt} OPT = 0 skipped), 50 two-value (worst gap {two_value_worst})"
        ),
        start.elapsed(),
    ))
}

fn c5_replay() -> Outcome {
    let start = Instant::now();
    let engine = EtaEngine::default();
    let c5 = Graph::cycle(5);
    // first deletion leaves the path 1-2-3-4-0, the second cuts it between
    // two inner vertices
    let first = Edge::new(0, 1);
    let second = Edge::new(2, 3);
    let class = classify_edge(&c5, first, &engine).map_err(|e| e.to_string())?;
    check(class.deletable && !class.explodable, || format!("first edge: {class:?}"))?;
    check(class.eta_exploded == Eta::Infinite, || "exploding a C5 edge should leave a point".into())?;
    let p5 = c5.delete_edge(first).map_err(|e| e.to_string())?;
    let class = classify_edge(&p5, second, &engine).map_err(|e| e.to_string())?;
    check(class.deletable && !class.explodable, || format!("second edge: {class:?}"))?;

    let seq = DeSequence::new(&c5, vec![DeStep::Delete(first), DeStep::Delete(second)]);
    let run = execute_sequence(&c5, &seq, &engine).map_err(|e| e.to_string())?;
    check(run.valid && run.failed_at.is_none(), || "trace rejected".into())?;
    let p2_p3 = Graph::new(0..5, [(1, 2), (3, 4), (4, 0)]).map_err(|e| e.to_string())?;
    check(run.final_graph == p2_p3, || "trace does not end at P2 ⊔ P3".into())?;
    // each path has positive η, and a disjoint union adds at least one
    let p2 = engine.eta(&Graph::path(2)).map_err(|e| e.to_string())?;
    let p3 = engine.eta(&Graph::path(3)).map_err(|e| e.to_string())?;
    check(p2 >= Eta::Finite(1) && p3 >= Eta::Finite(1), || "paths should have η ≥ 1".into())?;
    check(run.eta_final >= p3.plus(1), || format!("η(P2 ⊔ P3) = {:?}", run.eta_final))?;
    check(run.ell == 0 && run.eta_drop_certified, || "η accounting not certified".into())?;
    check(run.eta_start >= run.eta_final.plus(run.ell as u32), || "η(C5) below η(end) + ℓ".into())?;
    check(run.eta_start >= Eta::Finite(2), || format!("η(C5) = {:?}", run.eta_start))?;
    Ok(("η(C5) ≥ η(P2 ⊔ P3) ≥ 2 certified".into(), start.elapsed()))
}

fn bullet_grid() -> Outcome {
    let start = Instant::now();
    let grid = gap_bound_grid(66).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(grid.above_three.is_empty(), || format!("f ≥ 3 at {:?}", grid.above_three))?;
    check(grid.above_eleven_quarters.is_empty(), || format!("f > 11/4 at {:?}", grid.above_eleven_quarters))?;
    let exceptional: Vec<&str> = grid.exceptional.iter().map(|(x, _)| x.as_str()).collect();
    check(exceptional == ["1/6", "1/3"], || format!("exceptions {exceptional:?}"))?;
    // both exceptional points sit exactly at 3
    for x in [ratio(1, 6), ratio(1, 3)] {
        let f = f_gap(&x).map_err(|e| e.to_string())?;
        check(f == int(3), || format!("f({x}) = {f}"))?;
    }
    Ok((format!("{} points, exceptions 1/6 and 1/3", grid.points), elapsed))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("rc-table --max 30", Duration::from_secs(1), rc_table_matches),
        ("limit bound below 2.479", Duration::from_millis(1), limit_bound_oracle),
        ("convex combination at 53/15", Duration::from_millis(1), convex_combination),
        ("eta golden values", Duration::from_secs(1), eta_goldens),
        ("deletable-or-explodable suite", Duration::from_secs(300), meshulam_suite),
        ("Hall implies transversal suite", Duration::from_secs(300), hall_suite),
        ("duality suite", Duration::from_secs(600), duality_suite),
        ("integrality gap consistency", Duration::from_secs(900), gap_consistency),
        ("C5 trace replay", Duration::from_secs(1), c5_replay),
        ("gap bound grid to denominator 66", Duration::from_secs(10), bullet_grid),
    ];
    let mut failures = 0;
    for (i, (name, budget, body)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let line = match outcome {
            Ok((detail, took)) if took <= budget => format!("PASS {:>2} {name}: {detail} [{took:.2?} / {budget:?}]", i + 1),
            Ok((detail, took)) => {
                failures += 1;
                format!("FAIL {:>2} {name}: over budget, {detail} [{took:.2?} / {budget:?}]", i + 1)
            }
            Err(why) => {
                failures += 1;
                format!("FAIL {:>2} {name}: {why}", i + 1)
            }
        };
        println!("{line}");
    }
    if failures > 0 {
        println!("{failures} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
