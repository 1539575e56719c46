mod common;

use olid_core::metrics::report;
use proptest::prelude::*;

fn labelled_pairs() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (2usize..6).prop_flat_map(|c| {
        prop::collection::vec((0..c, 0..c), 1..50).prop_map(move |pairs| {
            let (t, p) = pairs.into_iter().unzip();
            (c, t, p)
        })
    })
}

proptest! {
    #[test]
    fn matches_recount((c, t, p) in labelled_pairs()) {
        let r = report(&t, &p, c).unwrap();
        let o = common::recount(&t, &p, c);
        prop_assert_eq!(r.accuracy, o.accuracy);
        prop_assert_eq!(r.macro_f1, o.macro_f1);
        for (s, (pr, re, f)) in r.per_class.iter().zip(&o.per_class) {
            prop_assert_eq!((s.precision, s.recall, s.f1), (*pr, *re, *f));
        }
        prop_assert_eq!(r.confusion.total(), t.len() as u64);
    }

    #[test]
    fn scores_are_bounded((c, t, p) in labelled_pairs()) {
        let r = report(&t, &p, c).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.macro_f1));
        let hits = t.iter().zip(&p).filter(|(a, b)| a == b).count();
        prop_assert_eq!(r.accuracy, hits as f64 / t.len() as f64);
        for s in &r.per_class {
            prop_assert!([s.precision, s.recall, s.f1].iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let mean = r.per_class.iter().map(|s| s.f1).sum::<f64>() / c as f64;
        prop_assert_eq!(r.macro_f1, mean);
    }

    #[test]
    fn pair_order_does_not_matter((c, t, p) in labelled_pairs(), seed in any::<u64>()) {
        let mut idx: Vec<usize> = (0..t.len()).collect();
        let mut s = seed;
        for i in (1..idx.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            idx.swap(i, (s >> 33) as usize % (i + 1));
        }
        let t2: Vec<usize> = idx.iter().map(|&i| t[i]).collect();
        let p2: Vec<usize> = idx.iter().map(|&i| p[i]).collect();
        prop_assert_eq!(report(&t, &p, c).unwrap(), report(&t2, &p2, c).unwrap());
    }

    #[test]
    fn relabelling_permutes_scores((c, t, p) in labelled_pairs(), perm_seed in any::<prop::sample::Index>()) {
        // rotate class ids by a random offset
        let shift = perm_seed.index(c);
        let map = |k: usize| (k + shift) % c;
        let a = report(&t, &p, c).unwrap();
        let b = report(&t.iter().map(|&k| map(k)).collect::<Vec<_>>(), &p.iter().map(|&k| map(k)).collect::<Vec<_>>(), c)
            .unwrap();
        prop_assert_eq!(a.accuracy, b.accuracy);
        prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-15);
        for k in 0..c {
            prop_assert_eq!(a.per_class[k], b.per_class[map(k)]);
        }
    }
}

#[test]
fn worked_examples() {
    let r = report(&[0, 0, 1, 1], &[0, 1, 1, 1], 2).unwrap();
    assert!((r.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-12);
    assert!((r.per_class[1].f1 - 0.8).abs() < 1e-12);
    assert!((r.macro_f1 - 0.7333333333333334).abs() < 1e-9);
    assert_eq!(r.accuracy, 0.75);

    let degenerate = report(&[0, 0, 1, 1], &[0, 0, 0, 0], 2).unwrap();
    assert_eq!(degenerate.accuracy, 0.5);
    assert!((degenerate.macro_f1 - 1.0 / 3.0).abs() < 1e-12);
}
