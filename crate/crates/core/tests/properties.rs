use boolvol_core::algebra::AdditiveFunction;
use boolvol_core::expr::format;
use boolvol_core::geometry::{dist_to_hull, simplex_volume};
use boolvol_core::{eval_to_atoms, parse, AtomSet, BoolExpr, IndexSet, PointConfig};
use proptest::prelude::*;

fn arb_expr(n: u32) -> impl Strategy<Value = BoolExpr> {
    let leaf = prop_oneof![
        8 => (1..=n).prop_map(BoolExpr::Var),
        1 => Just(BoolExpr::Universe),
        1 => Just(BoolExpr::Empty),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.union(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.inter(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.diff(b)),
            inner.prop_map(BoolExpr::compl),
        ]
    })
}

/// Pointwise truth value; `inside[i]` says whether the point lies in `x_{i+1}`.
fn truth(e: &BoolExpr, inside: &[bool]) -> bool {
    match e {
        BoolExpr::Var(i) => inside[*i as usize - 1],
        BoolExpr::Universe => true,
        BoolExpr::Empty => false,
        BoolExpr::Union(a, b) => truth(a, inside) || truth(b, inside),
        BoolExpr::Inter(a, b) => truth(a, inside) && truth(b, inside),
        BoolExpr::Diff(a, b) => truth(a, inside) && !truth(b, inside),
        BoolExpr::Compl(a) => !truth(a, inside),
    }
}

fn arb_atoms(n: usize) -> impl Strategy<Value = AtomSet> {
    prop::collection::vec(any::<bool>(), 1 << n)
        .prop_map(move |bits| AtomSet::from_fn(n, |atom| bits[atom.bits() as usize]).unwrap())
}

fn arb_bounded(n: usize) -> impl Strategy<Value = AtomSet> {
    arb_atoms(n).prop_map(move |mut f| {
        f.remove(IndexSet::full(n));
        f
    })
}

/// `μ(u_I)` from atom values: `u_I` holds every atom whose excluded set misses some `i ∈ I`.
fn union_value(n: usize, values: &[i64], union: IndexSet) -> i64 {
    (0..(1u32 << n) - 1)
        .map(IndexSet::from_bits)
        .filter(|atom| !union.is_subset(*atom))
        .map(|atom| values[atom.bits() as usize])
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn format_then_parse_is_identity(e in arb_expr(6)) {
        let text = format(&e);
        prop_assert_eq!(parse(&text).unwrap(), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn atoms_match_truth_tables(e in arb_expr(4), extra in 0usize..3) {
        let n = (e.max_var() as usize).max(1) + extra;
        let f = eval_to_atoms(&e, n).unwrap();
        for bits in 0..1u32 << n {
            let inside: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 0).collect();
            prop_assert_eq!(f.contains(IndexSet::from_bits(bits)), truth(&e, &inside));
        }
    }

    #[test]
    fn equivalent_formulas_share_canonical_form(a in arb_expr(3), b in arb_expr(3)) {
        let n = 3;
        let demorgan = a.clone().union(b.clone()).compl();
        let expanded = a.clone().compl().inter(b.clone().compl());
        prop_assert_eq!(eval_to_atoms(&demorgan, n).unwrap(), eval_to_atoms(&expanded, n).unwrap());
        let diff = a.clone().diff(b.clone());
        let meet = a.inter(b.compl());
        prop_assert_eq!(eval_to_atoms(&diff, n).unwrap(), eval_to_atoms(&meet, n).unwrap());
    }

    #[test]
    fn euler_characteristic_identities(n in 1usize..=5, seed in any::<u64>()) {
        let bits: Vec<bool> = (0..1u64 << n).map(|i| (seed.rotate_left(i as u32 * 7) ^ i.wrapping_mul(0x9E37)) & 1 == 1).collect();
        let f = AtomSet::from_fn(n, |a| bits[a.bits() as usize]).unwrap();
        let direct: i64 = f.atoms().map(|a| if a.len() % 2 == 1 { 1 } else { -1 }).sum();
        prop_assert_eq!(f.reduced_euler(), direct);
        prop_assert_eq!(f.complement().reduced_euler(), -f.reduced_euler());
        let sign = if n % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(f.contradual().reduced_euler(), sign * f.reduced_euler());
        prop_assert_eq!(-f.dual().reduced_euler(), sign * f.reduced_euler());
    }

    #[test]
    fn missing_variable_forces_zero_euler(e in arb_expr(3)) {
        let f = eval_to_atoms(&e, 4).unwrap();
        prop_assert_eq!(f.reduced_euler(), 0);
    }

    #[test]
    fn coefficients_reproduce_every_additive_function(
        f in arb_bounded(4),
        values in prop::collection::vec(-50i64..50, 15),
    ) {
        let n = 4;
        let m = f.coefficients().unwrap();
        let mu = AdditiveFunction::new(n, values.clone()).unwrap();
        let lhs = mu.value(&f, false).unwrap();
        let rhs: i64 = m.iter().map(|(set, c)| c * union_value(n, &values, set)).sum();
        prop_assert_eq!(lhs, rhs);
        let expected_sum = i64::from(f.contains(IndexSet::EMPTY));
        prop_assert_eq!(m.sum(), expected_sum);
    }

    #[test]
    fn coefficients_are_additive_on_disjoint_elements(f in arb_bounded(4), g in arb_bounded(4)) {
        let g = g.difference(&f);
        let joint = f.union(&g).coefficients().unwrap();
        let (mf, mg) = (f.coefficients().unwrap(), g.coefficients().unwrap());
        for (set, c) in joint.iter() {
            prop_assert_eq!(c, mf.get(set) + mg.get(set));
        }
    }

    #[test]
    fn simplex_volume_is_rigid_motion_invariant(
        raw in prop::collection::vec(-2.0f64..2.0, 9),
        angle in 0.0f64..std::f64::consts::TAU,
        shift in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let pts: Vec<Vec<f64>> = raw.chunks(3).map(|c| c.to_vec()).collect();
        let (s, c) = angle.sin_cos();
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| vec![c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1], p[2] + shift[2]])
            .collect();
        let v = simplex_volume(&pts);
        let cross = {
            let a: Vec<f64> = (0..3).map(|i| pts[1][i] - pts[0][i]).collect();
            let b: Vec<f64> = (0..3).map(|i| pts[2][i] - pts[0][i]).collect();
            let x = a[1] * b[2] - a[2] * b[1];
            let y = a[2] * b[0] - a[0] * b[2];
            let z = a[0] * b[1] - a[1] * b[0];
            (x * x + y * y + z * z).sqrt() / 2.0
        };
        prop_assert!((v - cross).abs() <= 1e-9 * (1.0 + cross));
        prop_assert!((simplex_volume(&moved) - v).abs() <= 1e-9 * (1.0 + v));
        let permuted = vec![pts[2].clone(), pts[0].clone(), pts[1].clone()];
        prop_assert!((simplex_volume(&permuted) - v).abs() <= 1e-9 * (1.0 + v));
    }

    #[test]
    fn convex_combinations_have_zero_hull_distance(
        raw in prop::collection::vec(-3.0f64..3.0, 15),
        weights in prop::collection::vec(0.01f64..1.0, 5),
    ) {
        let rows: Vec<Vec<f64>> = raw.chunks(3).map(|c| c.to_vec()).collect();
        let p = PointConfig::new(3, rows.clone()).unwrap();
        let total: f64 = weights.iter().sum();
        let x: Vec<f64> = (0..3)
            .map(|k| rows.iter().zip(&weights).map(|(r, w)| r[k] * w / total).sum())
            .collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dist = dist_to_hull(&p, p.all(), &x).unwrap();
        prop_assert!(dist <= 1e-9 * (1.0 + norm), "distance {dist}");
    }

    #[test]
    fn segment_distance_matches_projection(
        a in prop::collection::vec(-3.0f64..3.0, 2),
        b in prop::collection::vec(-3.0f64..3.0, 2),
        x in prop::collection::vec(-6.0f64..6.0, 2),
    ) {
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        prop_assume!(len2 > 1e-6);
        let t = (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
        let near = [a[0] + t * ab[0], a[1] + t * ab[1]];
        let expected = ((x[0] - near[0]).powi(2) + (x[1] - near[1]).powi(2)).sqrt();
        let p = PointConfig::new(2, vec![a, b]).unwrap();
        let dist = dist_to_hull(&p, p.all(), &x).unwrap();
        prop_assert!((dist - expected).abs() <= 1e-9 * (1.0 + expected));
    }
}
