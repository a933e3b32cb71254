use proptest::prelude::*;

use capacheck_core::engine::{
    compute_y, compute_z, is_capable, missing_index, reduce_special, witnesses,
};
use capacheck_core::presentation::{coproduct, extend_with_central, parse};
use capacheck_core::{PhiStructure, Prime, Subspace};

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![3u32, 5, 7]).prop_map(|p| Prime::new(p).unwrap())
}

/// `(n, p, X)` with `X` spanned by up to `dim V` random vectors.
fn instance(max_n: usize) -> impl Strategy<Value = (usize, Prime, Subspace)> {
    (2..=max_n, prime()).prop_flat_map(|(n, p)| {
        let d = n * (n - 1) / 2;
        prop::collection::vec(prop::collection::vec(-10i64..10, d), 0..=d)
            .prop_map(move |rows| (n, p, Subspace::span(p, d, &rows).unwrap()))
    })
}

/// Like `instance`, but every vector avoids the coordinates of one pair.
fn instance_with_zero_coord() -> impl Strategy<Value = (usize, Prime, Subspace, usize)> {
    (3..=5usize, prime()).prop_flat_map(|(n, p)| {
        let d = n * (n - 1) / 2;
        (
            prop::collection::vec(prop::collection::vec(-10i64..10, d), 0..d),
            0..d,
        )
            .prop_map(move |(mut rows, col)| {
                for r in &mut rows {
                    r[col] = 0;
                }
                (n, p, Subspace::span(p, d, &rows).unwrap(), col)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn x_is_inside_z((n, p, x) in instance(5)) {
        let ps = PhiStructure::build(n, p).unwrap();
        let z = compute_z(&ps, &x).unwrap();
        prop_assert!(z.contains_subspace(&x).unwrap());
    }

    #[test]
    fn report_is_consistent((n, p, x) in instance(5)) {
        let ps = PhiStructure::build(n, p).unwrap();
        let r = is_capable(&ps, &x).unwrap();
        prop_assert_eq!(r.capable, r.x == r.z);
        prop_assert_eq!(r.capable, r.witnesses.is_empty());
        prop_assert_eq!(r.witnesses.len(), r.dim_z - r.dim_x);
        prop_assert!(r.dim_y <= n * r.dim_x);
        for w in &r.witnesses {
            prop_assert!(r.z.contains(w).unwrap());
            prop_assert!(!r.x.contains(w).unwrap());
        }
        if r.capable {
            prop_assert!(r.hn_ok);
        }
        if r.dim_x <= 2 {
            prop_assert!(r.capable);
        }
        if r.dim_x == 1 || r.dim_x == 2 {
            prop_assert_eq!(r.dim_y, n * r.dim_x);
        }
    }

    #[test]
    fn zero_coordinate_propagates((n, p, x, col) in instance_with_zero_coord()) {
        let ps = PhiStructure::build(n, p).unwrap();
        let z = compute_z(&ps, &x).unwrap();
        for v in z.basis_vectors() {
            prop_assert_eq!(v[col], 0);
        }
    }

    #[test]
    fn missing_index_means_capable((n, p, x) in instance(5)) {
        let ps = PhiStructure::build(n, p).unwrap();
        if missing_index(&ps, &x).is_some() {
            prop_assert!(is_capable(&ps, &x).unwrap().capable);
        }
    }

    #[test]
    fn reduction_preserves_verdict((n, p, x) in instance(5)) {
        let ps = PhiStructure::build(n, p).unwrap();
        let red = reduce_special(&ps, &x).unwrap();
        prop_assert_eq!(red.m + red.r, n);
        prop_assert_eq!(red.verdict().unwrap(), is_capable(&ps, &x).unwrap().capable);
    }

    #[test]
    fn adding_a_central_factor((n, p, x) in instance(4)) {
        let ps = PhiStructure::build(n, p).unwrap();
        let big = PhiStructure::build(n + 1, p).unwrap();
        let ext = extend_with_central(n, &x).unwrap();
        prop_assert_eq!(ext.dim(), x.dim() + n);
        prop_assert_eq!(
            is_capable(&ps, &x).unwrap().capable,
            is_capable(&big, &ext).unwrap().capable
        );
    }

    #[test]
    fn coproducts_are_capable((a, p, xa) in instance(3), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = 2 + (seed % 2) as usize;
        let db = b * (b - 1) / 2;
        let xb = capacheck_core::enumeration::random_subspace(db, p, &mut rng).unwrap();
        let x = coproduct(a, &xa, b, &xb).unwrap();
        let ps = PhiStructure::build(a + b, p).unwrap();
        prop_assert!(is_capable(&ps, &x).unwrap().capable);
    }

    #[test]
    fn y_is_linear_in_generators((n, p, x) in instance(4), k in 0usize..4) {
        // Spanning X by its basis or by a redundant generating set gives the same Y.
        let ps = PhiStructure::build(n, p).unwrap();
        let mut rows: Vec<Vec<i64>> =
            x.basis_vectors().map(|v| v.iter().map(|&a| a as i64).collect()).collect();
        if !rows.is_empty() {
            let extra: Vec<i64> = rows[0].iter().map(|&a| a * (k as i64 + 2)).collect();
            rows.push(extra);
        }
        let again = Subspace::span(p, ps.dim_v(), &rows).unwrap();
        prop_assert_eq!(compute_y(&ps, &x).unwrap(), compute_y(&ps, &again).unwrap());
    }

    #[test]
    fn witnesses_reduce_z_modulo_x((n, p, x) in instance(4)) {
        let ps = PhiStructure::build(n, p).unwrap();
        let z = compute_z(&ps, &x).unwrap();
        let w = witnesses(&x, &z).unwrap();
        let ws = Subspace::span(
            p,
            ps.dim_v(),
            &w.iter().map(|v| v.iter().map(|&a| a as i64).collect::<Vec<_>>()).collect::<Vec<_>>(),
        )
        .unwrap();
        prop_assert_eq!(ws.sum(&x).unwrap(), z);
        prop_assert!(ws.intersection(&x).unwrap().is_zero());
    }

    #[test]
    fn parse_display_round_trip(
        n in 2usize..6,
        rels in prop::collection::vec(prop::collection::vec((0usize..100, -6i64..7), 1..4), 0..5),
    ) {
        let mut text = format!("n={n} p=5\n");
        for rel in &rels {
            for &(seed, e) in rel {
                let j = 2 + seed % (n - 1);
                let i = 1 + (seed / 7) % (j - 1);
                text.push_str(&format!("[{j},{i}]^{e}"));
            }
            text.push('\n');
        }
        let pres = parse(&text).unwrap();
        let again = parse(&pres.to_string()).unwrap();
        prop_assert_eq!(&again, &pres);
        prop_assert_eq!(again.to_subspace().unwrap(), pres.to_subspace().unwrap());
    }
}
