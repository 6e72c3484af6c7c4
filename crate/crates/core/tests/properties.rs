use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use smoothclust::data::{canonicalize_labels, load_csv, save_csv};
use smoothclust::graph::{
    filter_via_spectrum, normalized_laplacian, smoothness_energy, AffinityMatrix, GraphFilter,
};
use smoothclust::metrics::{accuracy, nmi, purity};
use smoothclust::numerics::sym_eig;
use smoothclust::selfexpress::{lsr_coefficients, trr_threshold, LsrConfig};

/// Symmetric nonnegative weights with zero diagonal; about half the pairs
/// are disconnected so isolated nodes show up now and then.
fn affinity(max_n: usize) -> impl Strategy<Value = AffinityMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..3.0], n * n).prop_map(move |v| {
            let mut w = DMatrix::from_vec(n, n, v);
            for i in 0..n {
                w[(i, i)] = 0.0;
                for j in 0..i {
                    w[(i, j)] = w[(j, i)];
                }
            }
            AffinityMatrix::new(w).unwrap()
        })
    })
}

fn signal(n: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0f64..5.0, n * cols).prop_map(move |v| DMatrix::from_vec(n, cols, v))
}

fn graph_and_signal(max_n: usize) -> impl Strategy<Value = (AffinityMatrix, DMatrix<f64>)> {
    affinity(max_n).prop_flat_map(|w| {
        let n = w.n();
        (Just(w), signal(n, 3))
    })
}

fn labels(n: usize, g: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..g, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_never_amplifies((w, x) in graph_and_signal(12), k in 0u32..6) {
        let y = GraphFilter::new(k, normalized_laplacian(&w)).apply(&x).unwrap();
        for c in 0..x.ncols() {
            prop_assert!(y.column(c).norm() <= x.column(c).norm() * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn higher_orders_are_smoother((w, x) in graph_and_signal(12), k in 0u32..5) {
        let lap = normalized_laplacian(&w);
        let lo = GraphFilter::new(k, lap.clone()).apply(&x).unwrap();
        let hi = GraphFilter::new(k + 1, lap.clone()).apply(&x).unwrap();
        for c in 0..x.ncols() {
            let e_lo = smoothness_energy(&lap, &DVector::from(lo.column(c).clone_owned())).unwrap();
            let e_hi = smoothness_energy(&lap, &DVector::from(hi.column(c).clone_owned())).unwrap();
            prop_assert!(e_hi <= e_lo + 1e-10 * (1.0 + e_lo.abs()));
        }
    }

    #[test]
    fn repeated_products_match_the_spectrum((w, x) in graph_and_signal(10), k in 0u32..5) {
        let lap = normalized_laplacian(&w);
        let direct = GraphFilter::new(k, lap.clone()).apply(&x).unwrap();
        let spectral = filter_via_spectrum(&lap, k, &x).unwrap();
        // the symmetric eigensolver reconstructs only to ~1e-10 relative
        prop_assert!((direct - spectral).amax() < 1e-8 * (1.0 + x.amax()));
    }

    #[test]
    fn thresholding_is_idempotent(w in affinity(10), p in 1usize..10) {
        let p = p.min(w.n());
        let once = trr_threshold(w.weights(), p).unwrap();
        let twice = trr_threshold(&once, p).unwrap();
        prop_assert_eq!(&once, &twice);
        for row in once.row_iter() {
            prop_assert!(row.iter().filter(|v| **v != 0.0).count() <= p);
        }
    }

    #[test]
    fn lsr_spectrum_lies_in_unit_interval(x in signal(8, 5), alpha in 1e-3f64..10.0) {
        let z = lsr_coefficients(&x, &LsrConfig::new(alpha)).unwrap();
        let sym = (z.values() + z.values().transpose()) * 0.5;
        let eig = sym_eig(&sym).unwrap();
        for &l in eig.eigenvalues.iter() {
            prop_assert!(l > -1e-9 && l < 1.0, "eigenvalue {l}");
        }
    }

    #[test]
    fn larger_alpha_shrinks_coefficients(x in signal(8, 5), alpha in 1e-3f64..5.0) {
        let small = lsr_coefficients(&x, &LsrConfig::new(alpha)).unwrap();
        let large = lsr_coefficients(&x, &LsrConfig::new(alpha * 2.0)).unwrap();
        prop_assert!(large.values().norm() <= small.values().norm() + 1e-12);
    }

    #[test]
    fn scores_ignore_cluster_names(
        (pred, truth) in (1usize..40).prop_flat_map(|n| (labels(n, 4), labels(n, 4))),
        shift in 1usize..4,
    ) {
        let renamed: Vec<usize> = pred.iter().map(|l| (l + shift) % 4).collect();
        prop_assert_eq!(accuracy(&pred, &truth).unwrap(), accuracy(&renamed, &truth).unwrap());
        prop_assert!((nmi(&pred, &truth).unwrap() - nmi(&renamed, &truth).unwrap()).abs() < 1e-12);
        prop_assert_eq!(purity(&pred, &truth).unwrap(), purity(&renamed, &truth).unwrap());
    }

    #[test]
    fn scores_are_bounded((pred, truth) in (1usize..40).prop_flat_map(|n| (labels(n, 5), labels(n, 3)))) {
        for s in [accuracy(&pred, &truth).unwrap(), nmi(&pred, &truth).unwrap(), purity(&pred, &truth).unwrap()] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        }
        prop_assert!(purity(&pred, &truth).unwrap() >= accuracy(&pred, &truth).unwrap() - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn csv_round_trip_is_exact(
        x in signal(6, 4).prop_map(|m| m.map(|v| v * 1e3 / 7.0)),
        raw in prop::collection::vec(-3i64..3, 6),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let labels = canonicalize_labels(&raw);
        save_csv(&path, &x, Some(&labels)).unwrap();
        let back = load_csv(&path, true).unwrap();
        prop_assert_eq!(&back.features, &x);
        prop_assert_eq!(back.labels.unwrap(), labels);
    }
}
