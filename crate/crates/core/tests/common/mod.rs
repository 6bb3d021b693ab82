//! Shared generators and oracles for the integration tests and the
//! acceptance runner. Everything is seeded.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use santa_core::instance::{gen_random, gen_two_value, Instance, RandomConfig, TwoValueConfig};
use santa_core::rational::{int, ratio};
use santa_core::topology::{classify_edge, DeSequence, DeStep, EtaEngine, Graph, PartitionedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) on `0..n` with `n` drawn from `0..=max_n`.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.gen_range(0..=max_n);
    let p: f64 = rng.gen_range(0.15..0.75);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(0..n, edges).unwrap()
}

/// Up to `max_parts` classes of 1..=`max_size` vertices, random edges
/// between distinct classes only.
pub fn random_partite(rng: &mut ChaCha8Rng, max_parts: usize, max_size: usize) -> PartitionedGraph {
    let k = rng.gen_range(1..=max_parts);
    let mut parts = Vec::new();
    let mut next = 0;
    for _ in 0..k {
        let size = rng.gen_range(1..=max_size);
        parts.push((next..next + size).collect::<Vec<_>>());
        next += size;
    }
    let class_of = |v: usize| parts.iter().position(|c| c.contains(&v)).unwrap();
    let p: f64 = rng.gen_range(0.1..0.7);
    let mut edges = Vec::new();
    for a in 0..next {
        for b in a + 1..next {
            if class_of(a) != class_of(b) && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    PartitionedGraph {
        graph: Graph::new(0..next, edges).unwrap(),
        parts,
    }
}

/// A legal DE-sequence chosen at random until no edge is left.
pub fn random_de_sequence(rng: &mut ChaCha8Rng, start: &Graph, engine: &EtaEngine) -> (DeSequence, Graph) {
    let mut g = start.clone();
    let mut steps = Vec::new();
    while g.num_edges() > 0 {
        let edges: Vec<_> = g.edges().iter().copied().collect();
        let e = *edges.choose(rng).unwrap();
        let class = classify_edge(&g, e, engine).unwrap();
        let step = match (class.deletable, class.explodable) {
            (true, true) if rng.gen_bool(0.5) => DeStep::Explode(e),
            (true, _) => DeStep::Delete(e),
            (false, true) => DeStep::Explode(e),
            (false, false) => panic!("edge {e:?} is neither deletable nor explodable"),
        };
        g = step.apply(&g).unwrap();
        steps.push(step);
    }
    (DeSequence::new(start, steps), g)
}

/// Small random instance with values on a grid in [1/2, 3].
pub fn small_instance(seed: u64) -> Instance {
    let mut r = rng(seed ^ 0x5eed);
    let config = RandomConfig {
        num_players: r.gen_range(2..=4),
        num_resources: r.gen_range(3..=8),
        value_lo: ratio(1, 2),
        value_hi: int(3),
        value_steps: 5,
        covet_density: r.gen_range(0.3..0.8),
    };
    gen_random(&config, seed).unwrap()
}

pub fn small_two_value(seed: u64, players: usize, eps: (i64, i64), fat: usize, thin: usize) -> Instance {
    let config = TwoValueConfig {
        num_fat: fat,
        num_thin: thin,
        covet_density: 0.45,
    };
    gen_two_value(players, &ratio(eps.0, eps.1), &config, seed).unwrap()
}

/// η by a separate route: every independent set listed by brute force,
/// dense boundary matrices over GF(2), ranks by Gaussian elimination.
/// `None` is ∞.
pub fn dense_eta(g: &Graph) -> Option<u32> {
    let n = g.num_vertices();
    assert!(n <= 14, "dense oracle is for tiny graphs");
    let verts: Vec<usize> = g.vertices().iter().copied().collect();
    let adjacent = |a: usize, b: usize| g.has_edge(santa_core::topology::Edge::new(verts[a], verts[b]));
    // simplices by size, including the empty face for reduced homology
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 2];
    for mask in 0u32..1 << n {
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let independent = members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| !adjacent(a, b)));
        if independent {
            by_size[members.len()].push(mask);
        }
    }
    // rank of the boundary from size-k faces to size-(k-1) faces
    let boundary_rank = |k: usize| -> usize {
        if k == 0 || k >= by_size.len() {
            return 0;
        }
        let lower = &by_size[k - 1];
        let rows: Vec<Vec<bool>> = by_size[k]
            .iter()
            .map(|&s| lower.iter().map(|&f| f & s == f && (s ^ f).count_ones() == 1).collect())
            .collect();
        gf2_rank(rows)
    };
    let ranks: Vec<usize> = (0..by_size.len() + 1).map(boundary_rank).collect();
    // reduced H in dimension k - 1 lives on size-k faces
    for k in 0..by_size.len() {
        let betti = by_size[k].len() - ranks[k] - ranks.get(k + 1).copied().unwrap_or(0);
        if betti > 0 {
            return Some(k as u32);
        }
    }
    None
}

pub fn gf2_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] {
                row.iter_mut().zip(&pivot).for_each(|(x, &y)| *x ^= y);
            }
        }
        rank += 1;
    }
    rank
}

/// Values on the grid {1/6, 1/3, …, 1}: with `T = 1`, `α = 1/2` most
/// α-hyperedges are thin.
pub fn thin_heavy_instance(seed: u64) -> Instance {
    let mut r = rng(seed ^ 0x7417);
    let config = RandomConfig {
        num_players: r.gen_range(2..=4),
        num_resources: r.gen_range(4..=8),
        value_lo: ratio(1, 6),
        value_hi: int(1),
        value_steps: 5,
        covet_density: r.gen_range(0.3..0.7),
    };
    gen_random(&config, seed).unwrap()
}

/// A (1, ε) instance with `ε < 1/2`, `1 ≤ T* < 2` and `⌈T*/ε⌉ ≥ 4`, drawn
/// by trying seeds from `seed` upward. Returns the seed used and `T*`.
pub fn hypothesis_two_value(seed: u64) -> (u64, Instance, santa_core::Rational) {
    use santa_core::lp::{compute_t_star, ClpCaps};
    const EPS: [(i64, i64); 5] = [(1, 4), (1, 5), (1, 6), (2, 9), (1, 7)];
    for s in seed.. {
        let mut r = rng(s ^ 0x2a1);
        let eps = EPS[r.gen_range(0..EPS.len())];
        let players = r.gen_range(2..=4);
        let fat = r.gen_range(0..=players);
        let thin = r.gen_range(5..=(12 - fat).min(10));
        let inst = small_two_value(s, players, eps, fat, thin);
        let t = compute_t_star(&inst, ClpCaps::default()).unwrap().t_star;
        let eps = ratio(eps.0, eps.1);
        if t >= int(1) && t < int(2) && (&t / &eps).ceil() >= int(4) {
            return (s, inst, t);
        }
    }
    unreachable!()
}
