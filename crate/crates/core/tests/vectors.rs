mod common;

use common::{check_fallback_equivalence, check_many_vector_norm, rel_diff, split, sv};
use ivpkit::vector::{Capabilities, ManyVector, NVector, SerialVector};
use proptest::prelude::*;

fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, len)
}

/// Lengths of a random partition summing to the length of the data.
fn partition(len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), len - 1).prop_map(move |cuts| {
        let mut sizes = vec![1];
        for c in cuts {
            if c {
                sizes.push(1);
            } else {
                *sizes.last_mut().unwrap() += 1;
            }
        }
        sizes
    })
}

fn data_with_partition() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<usize>, Vec<bool>)> {
    (1usize..=64).prop_flat_map(|len| {
        (
            values(len),
            prop::collection::vec(0.01..100.0f64, len),
            partition(len),
        )
            .prop_flat_map(|(x, w, sizes)| {
                let n = sizes.len();
                (
                    Just(x),
                    Just(w),
                    Just(sizes),
                    prop::collection::vec(any::<bool>(), n),
                )
            })
    })
}

fn flat(v: &ManyVector<SerialVector>) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    v.copy_to_slice(&mut out).unwrap();
    out
}

proptest! {
    #[test]
    fn linear_combination_matches_fallback(
        (c, xs) in (1usize..=5, 1usize..=64).prop_flat_map(|(n, len)| {
            (prop::collection::vec(-2.0..2.0f64, n), prop::collection::vec(values(len), n))
        })
    ) {
        let len = xs[0].len();
        let fused: Vec<SerialVector> = xs.iter().map(|x| sv(x)).collect();
        let plain: Vec<SerialVector> =
            xs.iter().map(|x| sv(x).with_capabilities(Capabilities::NONE)).collect();
        let mut zf = sv(&vec![0.0; len]);
        let mut zp = sv(&vec![0.0; len]).with_capabilities(Capabilities::NONE);
        zf.linear_combination(&c, &fused.iter().collect::<Vec<_>>()).unwrap();
        zp.linear_combination(&c, &plain.iter().collect::<Vec<_>>()).unwrap();
        prop_assert!(rel_diff(zf.as_slice(), zp.as_slice()) <= 1e-14);
    }

    #[test]
    fn many_vector_wrms_matches_flat((x, w, sizes, mask) in data_with_partition()) {
        let xm = split(&x, &sizes, &mask);
        let wm = split(&w, &sizes, &mask);
        let many = xm.wrms_norm(&wm).unwrap();
        let single = sv(&x).wrms_norm(&sv(&w)).unwrap();
        prop_assert!((many - single).abs() <= 1e-14 * single.max(1e-300));
    }

    #[test]
    fn many_vector_elementwise_ops_match_flat((x, w, sizes, mask) in data_with_partition()) {
        let (xm, wm) = (split(&x, &sizes, &mask), split(&w, &sizes, &mask));
        let (xs, ws) = (sv(&x), sv(&w));

        let mut zm = xm.clone();
        zm.linear_sum(2.0, &xm, -0.5, &wm).unwrap();
        let mut zs = xs.clone();
        zs.linear_sum(2.0, &xs, -0.5, &ws).unwrap();
        prop_assert_eq!(flat(&zm), zs.as_slice().to_vec());

        zm.prod(&xm, &wm).unwrap();
        zs.prod(&xs, &ws).unwrap();
        prop_assert_eq!(flat(&zm), zs.as_slice().to_vec());

        prop_assert_eq!(xm.max_norm(), xs.max_norm());
        prop_assert_eq!(xm.min(), xs.min());
        let (dm, ds) = (xm.dot(&wm).unwrap(), xs.dot(&ws).unwrap());
        prop_assert!((dm - ds).abs() <= 1e-12 * xs.max_norm() * ws.max_norm() * x.len() as f64);
    }

    #[test]
    fn local_kernels_give_one_combine_per_reduction((x, w, sizes, _) in data_with_partition()) {
        let mask = vec![true; sizes.len()];
        let (xm, wm) = (split(&x, &sizes, &mask), split(&w, &sizes, &mask));
        let counter = xm.reduction_counter().clone();
        counter.reset();
        xm.wrms_norm(&wm).unwrap();
        xm.dot(&wm).unwrap();
        xm.min();
        prop_assert_eq!(counter.get(), 3);
    }
}

#[test]
fn seeded_fallback_suite() {
    check_fallback_equivalence(7).unwrap();
}

#[test]
fn seeded_partition_suite() {
    check_many_vector_norm(7).unwrap();
}
