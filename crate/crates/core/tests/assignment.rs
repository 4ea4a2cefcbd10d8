mod common;

use common::brute_force_assignment;
use homotrack::assignment::{build_association_cost, gated_pairs, hungarian_solve, CostMatrix};
use homotrack::geometry::ImagePoint;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = CostMatrix> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(n, m)| {
        prop::collection::vec(0u8..6, n * m)
            .prop_map(move |v| CostMatrix::new(n, m, v.into_iter().map(f64::from).collect()).unwrap())
    })
}

/// Row-by-row nearest-free-column matching.
fn greedy_cost(c: &CostMatrix) -> f64 {
    let mut used = vec![false; c.cols()];
    let mut total = 0.0;
    for i in 0..c.rows() {
        let best = (0..c.cols()).filter(|&j| !used[j]).min_by(|&a, &b| c.get(i, a).total_cmp(&c.get(i, b)));
        if let Some(j) = best {
            used[j] = true;
            total += c.get(i, j);
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ties_break_to_lexicographically_smallest(c in matrix()) {
        let got = hungarian_solve(&c);
        let (cost, pairs) = brute_force_assignment(&c);
        prop_assert_eq!(got.total_cost(&c), cost);
        prop_assert_eq!(got.pairs(), &pairs[..]);
    }

    #[test]
    fn never_worse_than_greedy(c in matrix()) {
        prop_assert!(hungarian_solve(&c).total_cost(&c) <= greedy_cost(&c));
    }

    #[test]
    fn shifting_a_fully_matched_line_shifts_the_optimum(c in matrix(), line in 0usize..6, k in 0u8..5) {
        // shift a row when every row is matched, otherwise a column
        let by_row = c.rows() <= c.cols();
        let line = line % if by_row { c.rows() } else { c.cols() };
        let shifted = CostMatrix::from_fn(c.rows(), c.cols(), |i, j| {
            let hit = if by_row { i == line } else { j == line };
            c.get(i, j) + if hit { f64::from(k) } else { 0.0 }
        })
        .unwrap();
        let a = hungarian_solve(&c);
        let b = hungarian_solve(&shifted);
        prop_assert_eq!(b.total_cost(&shifted), a.total_cost(&c) + f64::from(k));
    }

    #[test]
    fn pairs_are_injective(c in matrix()) {
        let a = hungarian_solve(&c);
        let mut rows: Vec<_> = a.pairs().iter().map(|p| p.0).collect();
        let mut cols: Vec<_> = a.pairs().iter().map(|p| p.1).collect();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(rows.len(), a.len());
        prop_assert_eq!(cols.len(), a.len());
        prop_assert_eq!(a.len(), c.rows().min(c.cols()));
    }
}

#[test]
fn crossing_targets_keep_identities_where_greedy_swaps() {
    let preds = [ImagePoint::new(100.0, 100.0), ImagePoint::new(110.0, 100.0)];
    let dets = [ImagePoint::new(106.0, 100.0), ImagePoint::new(117.0, 100.0)];
    let c = build_association_cost(&preds, &dets, 100.0, 800.0);
    let (best, pairs) = brute_force_assignment(&c);
    let a = gated_pairs(&hungarian_solve(&c), &c, 800.0);
    assert_eq!(a.matched, vec![(0, 0), (1, 1)]);
    assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    assert_eq!(best, 13.0);
    // nearest-neighbour from detection 0 would take tracklet 1
    assert!(preds[1].distance(&dets[0]) < preds[0].distance(&dets[0]));
}

#[test]
fn sentinel_pairs_are_gated_out() {
    let preds = [ImagePoint::new(0.0, 0.0)];
    let dets = [ImagePoint::new(500.0, 0.0)];
    let c = build_association_cost(&preds, &dets, 100.0, 800.0);
    assert_eq!(c.get(0, 0), 800.0);
    let a = gated_pairs(&hungarian_solve(&c), &c, 800.0);
    assert!(a.matched.is_empty());
    assert_eq!((a.unmatched_rows, a.unmatched_cols), (vec![0], vec![0]));
}
