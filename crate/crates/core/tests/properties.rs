use latdisp_core::bessel::{bessel_integral_oracle, bessel_j, bessel_row, i_pow};
use latdisp_core::kernel::{dispersion_envelope_constant, lattice_factor_1d};
use latdisp_core::spectral::{eigendecompose, fiber_operator, FiberPoint};
use latdisp_core::{build_finite_graph, FiniteGraph, GraphSpec, ProductGraph, ProductPoint, Spectrum};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn symmetric_matrix(max_k: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_k).prop_flat_map(|k| {
        prop::collection::vec(-5.0f64..5.0, k * k).prop_map(move |v| {
            let a = DMatrix::from_vec(k, k, v);
            (&a + a.transpose()) * 0.5
        })
    })
}

fn test_graph() -> impl Strategy<Value = FiniteGraph> {
    prop_oneof![
        Just(build_finite_graph(&GraphSpec::new("path", 2)).unwrap()),
        Just(build_finite_graph(&GraphSpec::new("path", 4)).unwrap()),
        Just(build_finite_graph(&GraphSpec::new("cycle", 3).with_potential(vec![0.7, -0.3, 1.1])).unwrap()),
        Just(build_finite_graph(&GraphSpec::new("star", 3)).unwrap()),
        Just(build_finite_graph(&GraphSpec::new("complete", 4).with_potential(vec![0.0, 1.0, 0.0, -1.0])).unwrap()),
        (-2.0f64..2.0).prop_map(FiniteGraph::single_vertex),
    ]
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_reconstructs(h in symmetric_matrix(30)) {
        let s = eigendecompose(&h).unwrap();
        prop_assert!(max_abs_diff(&s.reconstruct(), &h) < 1e-10);
        let k = h.nrows();
        let gram = s.eigenvectors().transpose() * s.eigenvectors();
        prop_assert!((gram - DMatrix::identity(k, k)).norm() < 1e-12);
        for w in s.eigenvalues().windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for (col, &mu) in s.eigenvalues().iter().enumerate() {
            let phi = s.eigenvectors().column(col);
            let residual = (&h * phi - phi * mu).abs().max();
            prop_assert!(residual < 1e-10);
        }
    }

    #[test]
    fn propagator_group_law(h in symmetric_matrix(12), t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let s = eigendecompose(&h).unwrap();
        let a = s.finite_propagator(t1).matrix * s.finite_propagator(t2).matrix;
        let b = s.finite_propagator(t1 + t2).matrix;
        prop_assert!((a - b).norm() < 1e-10);
        let m = s.finite_propagator(t1);
        prop_assert!(m.unitarity_defect() < 1e-10);
        prop_assert_eq!(&m.matrix, &m.matrix.transpose());
    }

    #[test]
    fn floquet_eigenvalues_shift(g in test_graph(), theta in prop::collection::vec(0.0f64..1.0, 1..=3)) {
        let d = theta.len();
        let fp = FiberPoint::new(theta).unwrap();
        let direct = eigendecompose(&fiber_operator(&g, &fp, d).unwrap()).unwrap();
        let formula = Spectrum::of_graph(&g).unwrap().floquet_eigenvalues(&fp);
        for (a, b) in direct.eigenvalues().iter().zip(&formula) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn three_term_recurrence(t in 0.5f64..100.0, frac in 0.0f64..1.0) {
        let nu = ((2.0 * t * frac).floor() as i64).max(1);
        let (below, above) = (bessel_j(nu - 1, t), bessel_j(nu + 1, t));
        let rhs = 2.0 * nu as f64 / t * bessel_j(nu, t);
        // Relative to the size of the terms being combined.
        let scale = below.abs().max(above.abs()).max(rhs.abs());
        prop_assert!((below + above - rhs).abs() <= 1e-10 * scale, "nu={} t={}", nu, t);
    }

    #[test]
    fn bessel_sum_rule(t in 0.0f64..100.0) {
        let row = bessel_row(t.ceil() as usize + 40, t);
        prop_assert!((row.normalization() - 1.0).abs() < 1e-10);
        prop_assert!(row.values.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn bessel_row_matches_pointwise(t in 0.0f64..60.0, nu in 0usize..120) {
        let row = bessel_row(nu + 5, t);
        prop_assert!((row.values[nu] - bessel_j(nu as i64, t)).abs() < 1e-13);
    }

    #[test]
    fn bessel_parity(t in 0.0f64..50.0, nu in 0i64..80) {
        let sign = if nu % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(bessel_j(-nu, t), sign * bessel_j(nu, t));
    }

    #[test]
    fn translation_invariance(
        g in test_graph(),
        n in prop::collection::vec(-6i64..6, 2),
        m in prop::collection::vec(-6i64..6, 2),
        a in prop::collection::vec(-50i64..50, 2),
        t in -4.0f64..4.0,
    ) {
        let k = g.k();
        let pg = ProductGraph::new(g, 2).unwrap();
        for (p, q) in [(0, k - 1), (k - 1, 0)] {
            let x = ProductPoint::new(n.clone(), p);
            let y = ProductPoint::new(m.clone(), q);
            let xs = ProductPoint::new(n.iter().zip(&a).map(|(u, v)| u + v).collect(), p);
            let ys = ProductPoint::new(m.iter().zip(&a).map(|(u, v)| u + v).collect(), q);
            prop_assert_eq!(pg.kernel(&x, &y, t).unwrap(), pg.kernel(&xs, &ys, t).unwrap());
        }
    }

    #[test]
    fn time_reversal_and_symmetry(
        g in test_graph(),
        n in prop::collection::vec(-8i64..8, 1..=3),
        t in 0.0f64..6.0,
    ) {
        let d = n.len();
        let k = g.k();
        let pg = ProductGraph::new(g, d).unwrap();
        let x = ProductPoint::new(n, 0);
        let y = ProductPoint::origin(d, k - 1);
        let fwd = pg.kernel(&x, &y, t).unwrap();
        let back = pg.kernel(&x, &y, -t).unwrap();
        prop_assert!((back - fwd.conj()).norm() < 1e-14);
        let swapped = pg.kernel(&y, &x, t).unwrap();
        prop_assert!((swapped - fwd).norm() < 1e-14);
    }

    #[test]
    fn two_dimensional_factorization(g in test_graph(), a in -10i64..10, b in -10i64..10, t in 0.0f64..5.0) {
        let k = g.k();
        let pg = ProductGraph::new(g, 2).unwrap();
        let m = pg.finite_propagator(t);
        for p in 0..k {
            for q in 0..k {
                let composed = lattice_factor_1d(a, t) * lattice_factor_1d(b, t) * m.get(p, q);
                let direct = pg.kernel(&ProductPoint::new(vec![a, b], p), &ProductPoint::origin(2, q), t).unwrap();
                prop_assert!((composed - direct).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn block_bounded_by_lattice_factor(g in test_graph(), nu in prop::collection::vec(-12i64..12, 1..=2), t in 0.0f64..5.0) {
        let pg = ProductGraph::new(g, nu.len()).unwrap();
        let b = pg.kernel_block(&nu, t).unwrap();
        let bound: f64 = nu.iter().map(|&v| bessel_j(v, 2.0 * t).abs()).product();
        prop_assert!(b.max_abs() <= bound * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn dispersion_envelope_holds(g in test_graph(), d in 1usize..=2, t in 0.1f64..200.0) {
        let pg = ProductGraph::new(g, d).unwrap();
        let scaled = pg.sup_norm(t).unwrap() * t.powf(d as f64 / 3.0);
        prop_assert!(scaled <= dispersion_envelope_constant(d) + 1e-6);
    }

    #[test]
    fn finite_pigeonhole(g in test_graph(), t in -200.0f64..200.0) {
        let s = Spectrum::of_graph(&g).unwrap();
        let k = s.k();
        let m = s.finite_propagator(t);
        let sup = (0..k).map(|p| m.get(p, 0).norm()).fold(0.0, f64::max);
        prop_assert!(sup >= 1.0 / (k as f64).sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quadrature_matches_recurrence(nu in -60i64..60, t in 0.0f64..50.0) {
        let nodes = 2 * (nu.unsigned_abs() as usize + t.ceil() as usize) + 16;
        let z = bessel_integral_oracle(nu, t, nodes).unwrap();
        prop_assert!((z - i_pow(nu) * bessel_j(nu, t)).norm() < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fiber_factorization(g in test_graph(), theta in prop::collection::vec(0.0f64..1.0, 1..=3), t in -10.0f64..10.0) {
        let d = theta.len();
        let fp = FiberPoint::new(theta).unwrap();
        let factored = Spectrum::of_graph(&g).unwrap().fiber_propagator(&fp, t);
        let direct = eigendecompose(&fiber_operator(&g, &fp, d).unwrap()).unwrap().finite_propagator(t);
        for (a, b) in factored.matrix.iter().zip(direct.matrix.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn graph_json_round_trip_preserves_kernel() {
    let g = build_finite_graph(&GraphSpec::new("cycle", 5).with_potential(vec![0.1, 0.2, 0.3, 0.4, 0.5])).unwrap();
    let back: FiniteGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
    let a = ProductGraph::new(g, 1).unwrap();
    let b = ProductGraph::new(back, 1).unwrap();
    let x = ProductPoint::new(vec![3], 2);
    let y = ProductPoint::origin(1, 4);
    assert_eq!(a.kernel(&x, &y, 1.5).unwrap(), b.kernel(&x, &y, 1.5).unwrap());
}
