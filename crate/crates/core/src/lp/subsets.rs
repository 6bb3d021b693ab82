//! Knapsack-style enumeration over small resource lists.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

/// All inclusion-minimal subsets of `items` whose value reaches `threshold`.
///
/// Items are visited in non-increasing value order; a branch stops the moment
/// its running sum reaches the threshold, at which point the last item added
/// is the cheapest one in the set and the set before it was short, so the set
/// is minimal. Sets are returned sorted, in lexicographic order.
pub fn minimal_sets(items: &[(usize, Rational)], threshold: &Rational) -> Vec<Vec<usize>> {
    if !threshold.is_positive() {
        return vec![Vec::new()];
    }
    let mut sorted: Vec<&(usize, Rational)> = items.iter().collect();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut suffix = vec![Rational::zero(); sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix[i] = &suffix[i + 1] + &sorted[i].1;
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    walk(&sorted, &suffix, threshold, 0, &Rational::zero(), &mut chosen, &mut out);
    for set in &mut out {
        set.sort_unstable();
    }
    out.sort();
    out
}

fn walk(
    items: &[&(usize, Rational)],
    suffix: &[Rational],
    threshold: &Rational,
    i: usize,
    sum: &Rational,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if sum + &suffix[i] < *threshold {
        return;
    }
    let (ix, value) = items[i];
    let with = sum + value;
    chosen.push(*ix);
    if with >= *threshold {
        out.push(chosen.clone());
    } else {
        walk(items, suffix, threshold, i + 1, &with, chosen, out);
    }
    chosen.pop();
    if i + 1 < items.len() {
        walk(items, suffix, threshold, i + 1, sum, chosen, out);
    }
}

/// Minimum total cost of a subset of `items` (index, value, cost) with value
/// at least `threshold`. Costs must be non-negative. Returns `None` when even
/// the full list falls short.
pub fn min_cost_cover(
    items: &[(usize, Rational, Rational)],
    threshold: &Rational,
) -> Option<(Rational, Vec<usize>)> {
    if !threshold.is_positive() {
        return Some((Rational::zero(), Vec::new()));
    }
    let mut sorted: Vec<&(usize, Rational, Rational)> = items.iter().collect();
    // cheap-per-value first finds good incumbents early
    sorted.sort_by(|a, b| (&a.2 * &b.1).cmp(&(&b.2 * &a.1)).then(a.0.cmp(&b.0)));
    let mut suffix = vec![Rational::zero(); sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix[i] = &suffix[i + 1] + &sorted[i].1;
    }
    if suffix[0] < *threshold {
        return None;
    }
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut chosen = Vec::new();
    cover_walk(
        &sorted,
        &suffix,
        threshold,
        0,
        &Rational::zero(),
        &Rational::zero(),
        &mut chosen,
        &mut best,
    );
    best.map(|(cost, mut set)| {
        set.sort_unstable();
        (cost, set)
    })
}

#[allow(clippy::too_many_arguments)]
fn cover_walk(
    items: &[&(usize, Rational, Rational)],
    suffix: &[Rational],
    threshold: &Rational,
    i: usize,
    sum: &Rational,
    cost: &Rational,
    chosen: &mut Vec<usize>,
    best: &mut Option<(Rational, Vec<usize>)>,
) {
    if let Some((b, _)) = best {
        if cost >= b {
            return;
        }
    }
    if sum >= threshold {
        *best = Some((cost.clone(), chosen.clone()));
        return;
    }
    if i == items.len() || sum + &suffix[i] < *threshold {
        return;
    }
    let (ix, value, c) = items[i];
    chosen.push(*ix);
    cover_walk(items, suffix, threshold, i + 1, &(sum + value), &(cost + c), chosen, best);
    chosen.pop();
    cover_walk(items, suffix, threshold, i + 1, sum, cost, chosen, best);
}

/// Distinct values of all subsets of `values` (including the empty sum).
pub fn subset_sums<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BTreeSet<Rational> {
    let mut sums = BTreeSet::from([Rational::zero()]);
    for v in values {
        let shifted: Vec<Rational> = sums.iter().map(|s| s + v).collect();
        sums.extend(shifted);
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    /// Brute force: every subset, filtered for value and minimality.
    fn minimal_by_enumeration(items: &[(usize, Rational)], threshold: &Rational) -> Vec<Vec<usize>> {
        let n = items.len();
        let value = |mask: u32| -> Rational {
            (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .fold(Rational::zero(), |acc, i| acc + &items[i].1)
        };
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if value(mask) < *threshold {
                continue;
            }
            let minimal = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .all(|i| value(mask & !(1 << i)) < *threshold);
            if minimal {
                let mut set: Vec<usize> =
                    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| items[i].0).collect();
                set.sort_unstable();
                out.push(set);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn single_item() {
        assert_eq!(minimal_sets(&[(0, int(1))], &int(1)), vec![vec![0]]);
    }

    #[test]
    fn non_minimal_pair_is_excluded() {
        let items = [(0, int(1)), (1, int(1))];
        assert_eq!(minimal_sets(&items, &int(1)), vec![vec![0], vec![1]]);
    }

    #[test]
    fn three_halves_give_three_pairs() {
        let items = [(0, ratio(1, 2)), (1, ratio(1, 2)), (2, ratio(1, 2))];
        let expected = minimal_by_enumeration(&items, &int(1));
        assert_eq!(expected, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(minimal_sets(&items, &int(1)), expected);
    }

    #[test]
    fn unreachable_threshold_gives_nothing() {
        assert!(minimal_sets(&[(0, int(1))], &int(2)).is_empty());
        assert!(min_cost_cover(&[(0, int(1), int(0))], &int(2)).is_none());
    }

    #[test]
    fn subset_sums_of_small_list() {
        let sums = subset_sums(&[int(1), int(1), int(2)]);
        assert_eq!(sums.into_iter().collect::<Vec<_>>(), vec![int(0), int(1), int(2), int(3), int(4)]);
    }

    fn small_items() -> impl Strategy<Value = (Vec<(usize, Rational)>, Rational)> {
        (
            prop::collection::vec((1i64..7, 1i64..4), 0..9),
            1i64..13,
            1i64..4,
        )
            .prop_map(|(vals, tn, td)| {
                let items = vals
                    .into_iter()
                    .enumerate()
                    .map(|(i, (n, d))| (i, ratio(n, d)))
                    .collect();
                (items, ratio(tn, td))
            })
    }

    proptest! {
        #[test]
        fn minimal_sets_match_enumeration((items, threshold) in small_items()) {
            prop_assert_eq!(minimal_sets(&items, &threshold), minimal_by_enumeration(&items, &threshold));
        }

        #[test]
        fn min_cost_cover_matches_minimal_sets(
            (items, threshold) in small_items(),
            costs in prop::collection::vec(0i64..5, 9),
        ) {
            let priced: Vec<(usize, Rational, Rational)> = items
                .iter()
                .map(|(i, v)| (*i, v.clone(), int(costs[*i])))
                .collect();
            let by_enum = minimal_sets(&items, &threshold)
                .into_iter()
                .map(|s| s.iter().fold(Rational::zero(), |acc, i| acc + int(costs[*i])))
                .min();
            let by_search = min_cost_cover(&priced, &threshold).map(|(c, _)| c);
            prop_assert_eq!(by_enum, by_search);
        }
    }
}
