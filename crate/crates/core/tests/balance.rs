mod common;

use ndarray::Array2;
use num_rational::Ratio;
use olid_core::balance::{class_counts, class_weights, nearest_neighbors, smote, SmoteConfig, SmoteTarget};
use proptest::prelude::*;

fn labelled_points() -> impl Strategy<Value = (Array2<f64>, Vec<usize>)> {
    (2usize..5, 1usize..4).prop_flat_map(|(classes, d)| {
        prop::collection::vec((0..classes, prop::collection::vec(-5.0f64..5.0, d)), 8..60).prop_map(move |rows| {
            let n = rows.len();
            let mut y: Vec<usize> = rows.iter().map(|r| r.0).collect();
            // two members per class so every class can be oversampled
            for c in 0..classes {
                y[2 * c] = c;
                y[2 * c + 1] = c;
            }
            let flat: Vec<f64> = rows.into_iter().flat_map(|r| r.1).collect();
            (Array2::from_shape_vec((n, d), flat).unwrap(), y)
        })
    })
}

proptest! {
    #[test]
    fn weighted_total_equals_count(labels in prop::collection::vec(0usize..4, 4..200)) {
        let mut labels = labels;
        labels[..4].copy_from_slice(&[0, 1, 2, 3]);
        let table = class_weights(&labels, 4).unwrap();
        let counts = class_counts(&labels, 4).unwrap();
        let total: Ratio<u64> = counts.iter().zip(table.exact()).map(|(&n, w)| w * n).sum();
        prop_assert_eq!(total, Ratio::from_integer(labels.len() as u64));
        prop_assert!(table.as_f64().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn balanced_labels_weigh_one(per_class in 1usize..30, classes in 2usize..5) {
        let labels: Vec<usize> = (0..per_class * classes).map(|i| i % classes).collect();
        prop_assert!(class_weights(&labels, classes).unwrap().as_f64().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn neighbours_match_sorting_oracle(rows in prop::collection::vec(prop::collection::vec(-3i32..3, 2), 2..100), k in 1usize..6) {
        let n = rows.len();
        let k = k.min(n - 1);
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
        let x = Array2::from_shape_vec((n, 2), rows.concat()).unwrap();
        prop_assert_eq!(nearest_neighbors(x.view(), k).unwrap(), common::knn(&rows, k));
    }

    #[test]
    fn smote_keeps_originals_and_levels_classes((x, y) in labelled_points(), seed in any::<u64>()) {
        let cfg = SmoteConfig { k_neighbors: 3, target: SmoteTarget::MatchMajority, seed };
        let (xs, ys) = smote(x.view(), &y, &cfg).unwrap();
        let n = x.nrows();
        prop_assert!(xs.slice(ndarray::s![..n, ..]).iter().zip(x.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(&ys[..n], y.as_slice());
        let before = class_counts(&y, 5).unwrap();
        let after = class_counts(&ys, 5).unwrap();
        let majority = *before.iter().max().unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert_eq!(*a, if *b == 0 { 0 } else { majority });
        }
        let (xs2, ys2) = smote(x.view(), &y, &cfg).unwrap();
        prop_assert_eq!(xs, xs2);
        prop_assert_eq!(ys, ys2);
    }
}
